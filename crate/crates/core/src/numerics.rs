//! Dense complex matrix kernel.
//!
//! [`UnitaryMatrix`] is the general object being compiled; [`Su2Matrix`] is a
//! fixed-size fast path used by the single-qubit machinery (basis search and
//! Solovay-Kitaev recursion), where heap-allocated matrices would dominate the
//! cost of a nearest-element scan.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Residual tolerance for exact-math invariants.
pub const EXACT_TOL: f64 = 1e-10;
/// Residual tolerance for iterative decompositions.
pub const ITERATIVE_TOL: f64 = 1e-8;
/// Grid resolution of the fallback phase minimisation.
pub const PHASE_GRID_POINTS: usize = 4096;

/// Largest supported matrix dimension (six qubits).
pub const MAX_DIM: usize = 64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense square complex matrix that is unitary within tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    data: DMatrix<C64>,
}

impl UnitaryMatrix {
    /// Wraps `data`, checking `U U† = I` with the default tolerance.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(data, EXACT_TOL)
    }

    pub fn with_tolerance(data: DMatrix<C64>, tol: f64) -> Result<Self> {
        if data.nrows() == 0 || data.nrows() != data.ncols() {
            return Err(Error::InvalidDimension(format!(
                "expected a non-empty square matrix, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let residual = unitarity_residual(&data);
        if residual.is_nan() || residual >= tol {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { data })
    }

    /// Wraps a matrix that is unitary by construction (products of unitaries).
    pub(crate) fn from_matrix_unchecked(data: DMatrix<C64>) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        Self { data }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: DMatrix::identity(dim, dim),
        }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidDimension(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            data: self.data.kronecker(&other.data),
        }
    }

    pub fn scale(&self, phase: C64) -> Self {
        Self {
            data: &self.data * phase,
        }
    }

    pub fn determinant(&self) -> C64 {
        self.data.clone().determinant()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Frobenius norm of `U U† - I`.
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.data)
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.data - &other.data).norm()
    }

    pub fn to_su2(&self) -> Result<Su2Matrix> {
        project_su2(self)
    }

    /// Serialises in the fixture text format: `dim N`, then one row per line.
    pub fn to_text(&self) -> String {
        format_matrix_text(&self.data)
    }

    pub fn from_text(text: &str, tol: f64) -> Result<Self> {
        Self::with_tolerance(parse_matrix_text(text)?, tol)
    }
}

impl Mul for &UnitaryMatrix {
    type Output = UnitaryMatrix;

    fn mul(self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix {
            data: &self.data * &rhs.data,
        }
    }
}

impl Mul for UnitaryMatrix {
    type Output = UnitaryMatrix;

    fn mul(self, rhs: UnitaryMatrix) -> UnitaryMatrix {
        &self * &rhs
    }
}

fn unitarity_residual(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    (m * m.adjoint() - DMatrix::<C64>::identity(n, n)).norm()
}

/// Element of SU(2), stored row-major as `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Matrix {
    m: [C64; 4],
}

impl Su2Matrix {
    pub const IDENTITY: Su2Matrix = Su2Matrix {
        m: [ONE, ZERO, ZERO, ONE],
    };

    /// Checks unitarity and `det = 1` within `tol`.
    pub fn new(entries: [C64; 4], tol: f64) -> Result<Self> {
        let candidate = Self { m: entries };
        let residual = candidate.unitarity_residual();
        if residual >= tol {
            return Err(Error::NotUnitary { residual });
        }
        let det = candidate.det();
        if (det - ONE).norm() >= tol {
            return Err(Error::NotSu2(format!("determinant {det}")));
        }
        Ok(candidate)
    }

    pub fn entries(&self) -> [C64; 4] {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[row * 2 + col]
    }

    pub fn det(&self) -> C64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn trace(&self) -> C64 {
        self.m[0] + self.m[3]
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.m;
        Self {
            m: [a.conj(), c.conj(), b.conj(), d.conj()],
        }
    }

    pub fn negate(&self) -> Self {
        let [a, b, c, d] = self.m;
        Self {
            m: [-a, -b, -c, -d],
        }
    }

    pub fn unitarity_residual(&self) -> f64 {
        let p = *self * self.adjoint();
        let diff = [p.m[0] - ONE, p.m[1], p.m[2], p.m[3] - ONE];
        diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_unitary(&self) -> UnitaryMatrix {
        UnitaryMatrix::from_matrix_unchecked(DMatrix::from_row_slice(2, 2, &self.m))
    }

    /// Rotation `exp(-i angle/2 n·σ)` about the unit axis `axis`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (nx, ny, nz) = if norm > 0.0 {
            (axis[0] / norm, axis[1] / norm, axis[2] / norm)
        } else {
            (0.0, 0.0, 1.0)
        };
        let (s, c) = (angle / 2.0).sin_cos();
        Self {
            m: [
                C64::new(c, -s * nz),
                C64::new(-s * ny, -s * nx),
                C64::new(s * ny, -s * nx),
                C64::new(c, s * nz),
            ],
        }
    }

    /// Rotation angle in `[0, π]` and unit axis, after choosing the sign of the
    /// matrix so that its trace is non-negative (the two signs are
    /// phase-equivalent).
    pub fn axis_angle(&self) -> ([f64; 3], f64) {
        let q = self.quaternion();
        let (w, x, y, z) = if q[0] < 0.0 {
            (-q[0], -q[1], -q[2], -q[3])
        } else {
            (q[0], q[1], q[2], q[3])
        };
        let vnorm = (x * x + y * y + z * z).sqrt();
        let angle = 2.0 * vnorm.atan2(w);
        if vnorm < 1e-300 {
            ([0.0, 0.0, 1.0], 0.0)
        } else {
            ([x / vnorm, y / vnorm, z / vnorm], angle)
        }
    }

    /// Unit quaternion `(w, x, y, z)` with `U = w I - i (x X + y Y + z Z)`.
    pub fn quaternion(&self) -> [f64; 4] {
        let [a, b, c, d] = self.m;
        let w = (a.re + d.re) / 2.0;
        let z = -(a.im - d.im) / 2.0;
        let x = -(b.im + c.im) / 2.0;
        let y = (c.re - b.re) / 2.0;
        [w, x, y, z]
    }

    /// Phase-aligned operator-norm distance between two SU(2) elements.
    ///
    /// Within SU(2) the optimal global phase is ±1, and `U ∓ V` is a scaled
    /// quaternion whose operator norm is the Euclidean norm of its first column.
    pub fn distance(&self, other: &Su2Matrix) -> f64 {
        let dot = (self.adjoint() * *other).trace().re;
        let sign = if dot >= 0.0 { 1.0 } else { -1.0 };
        let a = self.m[0] - other.m[0] * sign;
        let c = self.m[2] - other.m[2] * sign;
        (a.norm_sqr() + c.norm_sqr()).sqrt()
    }
}

impl Mul for Su2Matrix {
    type Output = Su2Matrix;

    fn mul(self, rhs: Su2Matrix) -> Su2Matrix {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = rhs.m;
        Su2Matrix {
            m: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h],
        }
    }
}

/// Haar-distributed unitary of dimension `dim`, fully determined by `seed`.
///
/// QR of a complex Gaussian matrix with the phases of `R`'s diagonal moved
/// into `Q`.
pub fn haar_random_unitary(dim: usize, seed: u64) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension(
            "dimension must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(haar_with_rng(dim, &mut rng))
}

pub(crate) fn haar_with_rng<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let gaussian = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            ONE
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::from_matrix_unchecked(q)
}

/// Haar-random element of SU(2).
pub fn haar_random_su2(seed: u64) -> Su2Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_with_rng(2, &mut rng);
    project_su2(&u).expect("haar sample is unitary")
}

/// `min_φ ‖U − e^{iφ} V‖` in the operator norm.
///
/// The eigenvalues of `U†V` lie on the unit circle; the optimal phase centres
/// them on the shortest covering arc of length `L`, giving `2 sin(L/4)`.
pub fn phase_aligned_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    if u.dim() == 2 {
        let (pu, pv) = (project_su2_unchecked(u), project_su2_unchecked(v));
        return Ok(pu.distance(&pv));
    }
    let w = u.adjoint() * v.clone();
    match eig_unitary(&w) {
        Ok(eig) => {
            let phases: Vec<f64> = eig.values.iter().map(|z| z.arg()).collect();
            Ok(2.0 * (covering_arc(&phases) / 4.0).sin())
        }
        Err(_) => Ok(grid_phase_distance(u, v)),
    }
}

/// Length of the shortest arc of the unit circle containing all `phases`.
fn covering_arc(phases: &[f64]) -> f64 {
    if phases.len() <= 1 {
        return 0.0;
    }
    let mut sorted: Vec<f64> = phases.iter().map(|p| p.rem_euclid(2.0 * PI)).collect();
    sorted.sort_by(f64::total_cmp);
    let mut max_gap = sorted[0] + 2.0 * PI - sorted[sorted.len() - 1];
    for pair in sorted.windows(2) {
        max_gap = max_gap.max(pair[1] - pair[0]);
    }
    (2.0 * PI - max_gap).max(0.0)
}

/// Brute-force phase minimisation over a uniform grid, used when the
/// eigen-solver fails.
pub(crate) fn grid_phase_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> f64 {
    (0..PHASE_GRID_POINTS)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / PHASE_GRID_POINTS as f64;
            operator_norm(&(u.matrix() - v.matrix() * C64::from_polar(1.0, phi)))
        })
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn operator_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Divides a 2×2 unitary by a square root of its determinant.
///
/// The branch is chosen so that the first entry of appreciable magnitude in
/// `(0,0), (1,0)` order has positive real part (positive imaginary part if the
/// real part vanishes), which makes the projection idempotent.
pub fn project_su2(u: &UnitaryMatrix) -> Result<Su2Matrix> {
    if u.dim() != 2 {
        return Err(Error::InvalidDimension(format!(
            "expected a 2x2 matrix, got {0}x{0}",
            u.dim()
        )));
    }
    let residual = u.unitarity_residual();
    if residual.is_nan() || residual >= ITERATIVE_TOL {
        return Err(Error::NotUnitary { residual });
    }
    Ok(project_su2_unchecked(u))
}

pub(crate) fn project_su2_unchecked(u: &UnitaryMatrix) -> Su2Matrix {
    let m = u.matrix();
    let entries = [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]];
    project_entries(entries)
}

pub(crate) fn project_entries(entries: [C64; 4]) -> Su2Matrix {
    let det = entries[0] * entries[3] - entries[1] * entries[2];
    let root = det.sqrt();
    let mut out = entries.map(|z| z / root);
    let pivot = if out[0].norm() > 1e-12 {
        out[0]
    } else {
        out[2]
    };
    let flip = if pivot.re.abs() > 1e-12 {
        pivot.re < 0.0
    } else {
        pivot.im < 0.0
    };
    if flip {
        out = out.map(|z| -z);
    }
    Su2Matrix { m: out }
}

/// Eigen-decomposition of a unitary matrix.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub values: Vec<C64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: UnitaryMatrix,
}

const EIG_MIXING: [f64; 4] = [
    0.577_215_664_901_532_9,
    std::f64::consts::SQRT_2,
    -std::f64::consts::FRAC_1_PI,
    std::f64::consts::E,
];

/// Eigen-decomposition of a unitary matrix.
///
/// The Hermitian and anti-Hermitian parts of a unitary commute, so a generic
/// real combination of the two shares its eigenvectors; that combination is
/// diagonalised with a Hermitian solver. Several mixing weights are tried in
/// case one produces an accidental degeneracy.
pub fn eig_unitary(u: &UnitaryMatrix) -> Result<UnitaryEigen> {
    let n = u.dim();
    let m = u.matrix();
    let adj = m.adjoint();
    let herm = (m + &adj) * C64::new(0.5, 0.0);
    let anti = (m - &adj) * C64::new(0.0, -0.5);
    for &weight in EIG_MIXING.iter() {
        let mut combo = &herm + &anti * C64::new(weight, 0.0);
        // symmetrise against round-off so the Hermitian solver sees exact symmetry
        combo = (&combo + combo.adjoint()) * C64::new(0.5, 0.0);
        let eig = match combo.try_symmetric_eigen(f64::EPSILON, 10_000) {
            Some(eig) => eig,
            None => continue,
        };
        let vectors = eig.eigenvectors;
        let mut values = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let v = vectors.column(k);
            let uv = m * v;
            let lambda = v.dotc(&uv);
            let lambda = if lambda.norm() > 0.0 {
                lambda / lambda.norm()
            } else {
                lambda
            };
            worst = worst.max((uv - v * lambda).norm());
            values.push(lambda);
        }
        if worst < ITERATIVE_TOL {
            return Ok(UnitaryEigen {
                values,
                vectors: UnitaryMatrix::from_matrix_unchecked(vectors),
            });
        }
    }
    Err(Error::NoConvergence {
        what: "unitary eigen-decomposition",
        iterations: EIG_MIXING.len(),
    })
}

/// Parses the fixture text format: a `dim N` line followed by `N` rows of
/// whitespace-separated `re+imj` entries.
pub fn parse_matrix_text(text: &str) -> Result<DMatrix<C64>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::format("matrix", "empty input"))?;
    let dim: usize = header
        .strip_prefix("dim")
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| Error::format("matrix", format!("bad header {header:?}")))?;
    if dim == 0 {
        return Err(Error::InvalidDimension(
            "dimension must be at least 1".into(),
        ));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for row in 0..dim {
        let line = lines
            .next()
            .ok_or_else(|| Error::format("matrix", format!("missing row {row}")))?;
        let before = entries.len();
        for tok in line.split_whitespace() {
            entries.push(parse_complex(tok)?);
        }
        if entries.len() - before != dim {
            return Err(Error::format(
                "matrix",
                format!("row {row} has {} entries", entries.len() - before),
            ));
        }
    }
    Ok(DMatrix::from_row_slice(dim, dim, &entries))
}

pub fn format_matrix_text(m: &DMatrix<C64>) -> String {
    let mut out = format!("dim {}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn format_complex(z: C64) -> String {
    format!("{}{:+}j", z.re, z.im)
}

/// Parses `re+imj`, `re-imj`, `imj` or `re`.
pub fn parse_complex(tok: &str) -> Result<C64> {
    let bad = || Error::format("matrix", format!("bad complex entry {tok:?}"));
    let Some(body) = tok.strip_suffix('j') else {
        return tok
            .parse::<f64>()
            .map(|re| C64::new(re, 0.0))
            .map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re: f64 = body[..i].parse().map_err(|_| bad())?;
            let im: f64 = body[i..].parse().map_err(|_| bad())?;
            Ok(C64::new(re, im))
        }
        None => body
            .parse::<f64>()
            .map(|im| C64::new(0.0, im))
            .map_err(|_| bad()),
    }
}
