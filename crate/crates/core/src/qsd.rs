//! Quantum Shannon decomposition into single-qubit rotations and CX, plus the
//! lowering pass that maps every single-qubit gate onto the discrete gate set.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::basis::{gate_su2, SkBasis};
use crate::circuit::{circuit_unitary, single_qubit_entries, Circuit, GateSymbol, Op, MAX_QUBITS};
use crate::dictionary::{Token, CX_LABEL};
use crate::error::{Error, Result};
use crate::numerics::{
    eig_unitary, project_entries, project_su2_unchecked, Su2Matrix, UnitaryMatrix, C64,
};
use crate::skd::{solovay_kitaev_with, SkdOptions, SkdResult};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Angles below this are dropped from emitted circuits.
const ANGLE_EPS: f64 = 1e-12;

/// Factors of `U = diag(L1, L2) · [[C, −S], [S, C]] · diag(R1, R2)†`.
#[derive(Clone, Debug)]
pub struct CsdFactors {
    pub l1: UnitaryMatrix,
    pub l2: UnitaryMatrix,
    pub r1: UnitaryMatrix,
    pub r2: UnitaryMatrix,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

impl CsdFactors {
    pub fn reassemble(&self) -> DMatrix<C64> {
        let m = self.c.len();
        let mut mid = DMatrix::<C64>::zeros(2 * m, 2 * m);
        for k in 0..m {
            mid[(k, k)] = C64::new(self.c[k], 0.0);
            mid[(m + k, m + k)] = C64::new(self.c[k], 0.0);
            mid[(k, m + k)] = C64::new(-self.s[k], 0.0);
            mid[(m + k, k)] = C64::new(self.s[k], 0.0);
        }
        let left = block_diag(self.l1.matrix(), self.l2.matrix());
        let right = block_diag(self.r1.matrix(), self.r2.matrix());
        left * mid * right.adjoint()
    }
}

fn block_diag(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::<C64>::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// Closest unitary in Frobenius norm.
fn polar_unitary(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let svd = m.clone().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(u * v_t),
        _ => Err(Error::NoConvergence {
            what: "polar decomposition",
            iterations: 1,
        }),
    }
}

/// Orthonormalises the columns of `w`, processing larger columns first, and
/// completes the basis where columns vanish. Returns `Q` and the non-negative
/// diagonal `q_k† w_k`.
fn orthonormalize_columns(w: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>) {
    let n = w.nrows();
    let mut order: Vec<usize> = (0..w.ncols()).collect();
    order.sort_by(|&a, &b| w.column(b).norm().total_cmp(&w.column(a).norm()));
    let mut q = DMatrix::<C64>::zeros(n, w.ncols());
    let mut done: Vec<usize> = Vec::new();
    let mut next_unit = 0;
    for &k in &order {
        let mut v: DVector<C64> = w.column(k).into_owned();
        let scale = v.norm();
        for _ in 0..2 {
            for &j in &done {
                let qj = q.column(j).into_owned();
                let proj = qj.dotc(&v);
                v -= qj * proj;
            }
        }
        if v.norm() <= 1e-10 * scale.max(1e-300) || scale < 1e-14 {
            // Column carries no direction: take the next standard vector that
            // survives orthogonalisation.
            loop {
                let mut e = DVector::<C64>::zeros(n);
                e[next_unit % n] = ONE;
                next_unit += 1;
                for _ in 0..2 {
                    for &j in &done {
                        let qj = q.column(j).into_owned();
                        let proj = qj.dotc(&e);
                        e -= qj * proj;
                    }
                }
                if e.norm() > 0.5 {
                    v = e;
                    break;
                }
            }
        }
        v /= C64::new(v.norm(), 0.0);
        let overlap = v.dotc(&w.column(k));
        if overlap.norm() > 0.0 {
            v *= overlap / overlap.norm();
        }
        q.set_column(k, &v);
        done.push(k);
    }
    let diag = (0..w.ncols())
        .map(|k| q.column(k).dotc(&w.column(k)).re.max(0.0))
        .collect();
    (q, diag)
}

/// Cosine-sine decomposition of an even-dimensional unitary.
pub fn cosine_sine_decompose(u: &UnitaryMatrix) -> Result<CsdFactors> {
    let dim = u.dim();
    if dim < 2 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "cosine-sine decomposition needs an even dimension, got {dim}"
        )));
    }
    let m = dim / 2;
    let full = u.matrix();
    let u00 = full.view((0, 0), (m, m)).into_owned();
    let u01 = full.view((0, m), (m, m)).into_owned();
    let u10 = full.view((m, 0), (m, m)).into_owned();
    let u11 = full.view((m, m), (m, m)).into_owned();

    let svd = u00.clone().svd(true, true);
    let (mut l1, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => {
            return Err(Error::NoConvergence {
                what: "cosine-sine SVD",
                iterations: 1,
            })
        }
    };
    let c: Vec<f64> = svd.singular_values.iter().map(|x| x.min(1.0)).collect();
    let mut r1 = v_t.adjoint();
    for k in 0..m {
        if let Some(first) = r1.column(k).iter().copied().find(|z| z.norm() > 1e-12) {
            let phase = first.conj() / first.norm();
            for i in 0..m {
                r1[(i, k)] *= phase;
                l1[(i, k)] *= phase;
            }
        }
    }

    let (l2, s) = orthonormalize_columns(&(&u10 * &r1));

    let a = l2.adjoint() * &u11;
    let b = l1.adjoint() * &u01;
    let mut r2_adj = DMatrix::<C64>::zeros(m, m);
    for k in 0..m {
        if c[k] >= s[k] {
            let row = a.row(k) / C64::new(c[k], 0.0);
            r2_adj.set_row(k, &row);
        } else {
            let row = b.row(k) / C64::new(-s[k], 0.0);
            r2_adj.set_row(k, &row);
        }
    }
    let r2 = polar_unitary(&r2_adj)?.adjoint();

    let factors = CsdFactors {
        l1: UnitaryMatrix::from_matrix_unchecked(l1),
        l2: UnitaryMatrix::from_matrix_unchecked(l2),
        r1: UnitaryMatrix::from_matrix_unchecked(r1),
        r2: UnitaryMatrix::from_matrix_unchecked(r2),
        c,
        s,
    };
    let residual = (factors.reassemble() - full).norm();
    if residual > 1e-8 {
        return Err(Error::Residual {
            what: "cosine-sine decomposition",
            residual,
        });
    }
    Ok(factors)
}

/// Demultiplexed form of `diag(A1, A2)`.
#[derive(Clone, Debug)]
pub struct Demultiplexed {
    pub p: UnitaryMatrix,
    /// `θ_k` with `Λ = diag(e^{iθ_k/2})`.
    pub angles: Vec<f64>,
    pub q: UnitaryMatrix,
}

/// Splits `diag(A1, A2)` into `(I ⊗ P) · diag(Λ, Λ†) · (I ⊗ Q)`.
pub fn demultiplex(a1: &UnitaryMatrix, a2: &UnitaryMatrix) -> Result<Demultiplexed> {
    if a1.dim() != a2.dim() {
        return Err(Error::DimensionMismatch {
            left: a1.dim(),
            right: a2.dim(),
        });
    }
    let eig = eig_unitary(&(a1 * &a2.adjoint()))?;
    let angles: Vec<f64> = eig.values.iter().map(|z| z.arg()).collect();
    let p = eig.vectors.matrix().clone();
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
        angles.len(),
        angles.iter().map(|&t| C64::from_polar(1.0, t / 2.0)),
    ));
    let q = &lambda * p.adjoint() * a2.matrix();
    let residual = (&p * &lambda * &q - a1.matrix()).norm();
    if residual > 1e-8 {
        return Err(Error::Residual {
            what: "demultiplexing",
            residual,
        });
    }
    Ok(Demultiplexed {
        p: UnitaryMatrix::from_matrix_unchecked(p),
        angles,
        q: UnitaryMatrix::from_matrix_unchecked(q),
    })
}

/// ZYZ Euler angles with `U = RZ(α)·RY(β)·RZ(γ)` up to phase and `β ∈ [0, π]`.
pub fn euler_zyz(u: &Su2Matrix) -> (f64, f64, f64) {
    let a = u.get(0, 0);
    let c = u.get(1, 0);
    let d = u.get(1, 1);
    let beta = 2.0 * c.norm().atan2(a.norm());
    let (alpha, gamma) = if c.norm() < 1e-12 {
        (2.0 * d.arg(), 0.0)
    } else if a.norm() < 1e-12 {
        (2.0 * c.arg(), 0.0)
    } else {
        let sum = 2.0 * d.arg();
        let diff = 2.0 * c.arg();
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    (wrap_angle(alpha), beta, wrap_angle(gamma))
}

/// Maps an angle into `(−π, π]`.
fn wrap_angle(t: f64) -> f64 {
    let mut w = t.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w.abs() < ANGLE_EPS {
        0.0
    } else {
        w
    }
}

fn push_rotation(ops: &mut Vec<Op>, gate: GateSymbol, qubit: usize) {
    let angle = match gate {
        GateSymbol::RY(t) | GateSymbol::RZ(t) => t,
        _ => 1.0,
    };
    if wrap_angle(angle).abs() > ANGLE_EPS || !matches!(gate, GateSymbol::RY(_) | GateSymbol::RZ(_))
    {
        ops.push(Op::one(gate, qubit));
    }
}

/// Single-qubit unitary as one `U3`, or nothing when it is the identity.
fn single_qubit_ops(u: &Su2Matrix, qubit: usize, ops: &mut Vec<Op>) {
    let (alpha, beta, gamma) = euler_zyz(u);
    if alpha == 0.0 && gamma == 0.0 && beta.abs() < ANGLE_EPS {
        return;
    }
    if beta.abs() < ANGLE_EPS {
        push_rotation(ops, GateSymbol::RZ(wrap_angle(alpha + gamma)), qubit);
        return;
    }
    ops.push(Op::one(GateSymbol::U3(beta, alpha, gamma), qubit));
}

/// Uniformly controlled rotation: for each control state `j` (first control is
/// the most significant bit) apply `rot(angles[j])` to `target`.
fn multiplexed_rotation(
    ops: &mut Vec<Op>,
    rot: fn(f64) -> GateSymbol,
    angles: &[f64],
    controls: &[usize],
    target: usize,
) {
    let k = controls.len();
    debug_assert_eq!(angles.len(), 1 << k);
    if k == 0 {
        push_rotation(ops, rot(angles[0]), target);
        return;
    }
    if angles.iter().all(|t| t.abs() < ANGLE_EPS) {
        return;
    }
    let count = 1usize << k;
    for i in 0..count {
        let gray = i ^ (i >> 1);
        let phi: f64 = angles
            .iter()
            .enumerate()
            .map(|(j, t)| {
                if (j & gray).count_ones() % 2 == 0 {
                    *t
                } else {
                    -*t
                }
            })
            .sum::<f64>()
            / count as f64;
        push_rotation(ops, rot(phi), target);
        let bit = if i + 1 == count {
            k - 1
        } else {
            (i + 1).trailing_zeros() as usize
        };
        ops.push(Op::cx(controls[k - 1 - bit], target));
    }
}

fn shift_ops(ops: &mut Vec<Op>, sub: Vec<Op>, offset: usize) {
    ops.extend(
        sub.into_iter()
            .map(|op| Op::new(op.gate, op.qubits.iter().map(|q| q + offset).collect())),
    );
}

const MAGIC: [[C64; 4]; 4] = {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = C64::new(h, 0.0);
    let i = C64::new(0.0, h);
    let nr = C64::new(-h, 0.0);
    let ni = C64::new(0.0, -h);
    [
        [r, ZERO, ZERO, i],
        [ZERO, i, r, ZERO],
        [ZERO, i, nr, ZERO],
        [r, ZERO, ZERO, ni],
    ]
};

fn magic() -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| MAGIC[i][j])
}

/// Factors a 4×4 `A ⊗ B` into its two 2×2 SU(2) factors.
fn split_tensor(k: &DMatrix<C64>) -> Result<(Su2Matrix, Su2Matrix)> {
    let (mut r, mut c, mut best) = (0, 0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            if k[(i, j)].norm() > best {
                best = k[(i, j)].norm();
                r = i;
                c = j;
            }
        }
    }
    let (i1, i2, j1, j2) = (r >> 1, r & 1, c >> 1, c & 1);
    let pivot = k[(r, c)];
    let a = [0, 1, 2, 3].map(|x| k[(((x >> 1) << 1) | i2, ((x & 1) << 1) | j2)] / pivot);
    let b = [0, 1, 2, 3].map(|x| k[((i1 << 1) | (x >> 1), (j1 << 1) | (x & 1))]);
    let (a, b) = (project_entries(a), project_entries(b));
    let rebuilt = a.to_unitary().kron(&b.to_unitary());
    let residual = crate::numerics::phase_aligned_distance(
        &rebuilt,
        &UnitaryMatrix::from_matrix_unchecked(k.clone()),
    )?;
    if residual > 1e-8 {
        return Err(Error::Residual {
            what: "tensor factorisation",
            residual,
        });
    }
    Ok((a, b))
}

/// Canonical two-qubit decomposition with at most three CX gates.
pub fn two_qubit_decompose(u: &UnitaryMatrix) -> Result<Circuit> {
    if u.dim() != 4 {
        return Err(Error::InvalidDimension(format!(
            "expected a 4×4 unitary, got {}",
            u.dim()
        )));
    }
    let det = u.determinant();
    let us = u.matrix() / det.powf(0.25);
    let b = magic();
    let up = b.adjoint() * &us * &b;
    let m2 = up.transpose() * &up;
    let re = m2.map(|z| z.re);
    let im = m2.map(|z| z.im);

    let mut p_found = None;
    for &weight in &[
        0.0,
        0.577_215_664_901_532_9,
        std::f64::consts::SQRT_2,
        -std::f64::consts::E,
    ] {
        let mut combo = &re + &im * weight;
        combo = (&combo + combo.transpose()) * 0.5;
        let eig = combo.symmetric_eigen();
        let mut p = eig.eigenvectors;
        if p.determinant() < 0.0 {
            let neg = -p.column(0);
            p.set_column(0, &neg);
        }
        let pc = p.map(|x| C64::new(x, 0.0));
        let d = pc.transpose() * &m2 * &pc;
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| d[(i, j)].norm())
            .sum();
        if off < 1e-9 {
            p_found = Some((pc, d));
            break;
        }
    }
    let (p, d) = p_found.ok_or(Error::NoConvergence {
        what: "two-qubit canonical decomposition",
        iterations: 4,
    })?;

    let mut theta: Vec<f64> = (0..4).map(|k| d[(k, k)].arg() / 2.0).collect();
    let prod: C64 = theta.iter().map(|&t| C64::from_polar(1.0, t)).product();
    if prod.re < 0.0 {
        theta[0] += PI;
    }
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        4,
        theta.iter().map(|&t| C64::from_polar(1.0, -t)),
    ));
    let k1 = &up * &p * phases;
    let left = &b * &k1 * b.adjoint();
    let right = &b * p.transpose() * b.adjoint();

    const XX: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
    const YY: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];
    const ZZ: [f64; 4] = [1.0, -1.0, -1.0, 1.0];
    let dot = |v: &[f64; 4]| (0..4).map(|k| theta[k] * v[k]).sum::<f64>() / 4.0;
    let (ca, cb, cc) = (dot(&XX), dot(&YY), dot(&ZZ));

    let (ra, rb) = split_tensor(&right)?;
    let (la, lb) = split_tensor(&left)?;
    let mut ops = Vec::new();
    single_qubit_ops(&ra, 0, &mut ops);
    single_qubit_ops(&rb, 1, &mut ops);
    push_rotation(&mut ops, GateSymbol::RZ(FRAC_PI_2), 1);
    ops.push(Op::cx(1, 0));
    push_rotation(&mut ops, GateSymbol::RZ(FRAC_PI_2 - 2.0 * cc), 0);
    push_rotation(&mut ops, GateSymbol::RY(FRAC_PI_2 - 2.0 * ca), 1);
    ops.push(Op::cx(0, 1));
    push_rotation(&mut ops, GateSymbol::RY(-FRAC_PI_2 + 2.0 * cb), 1);
    ops.push(Op::cx(1, 0));
    push_rotation(&mut ops, GateSymbol::RZ(-FRAC_PI_2), 0);
    single_qubit_ops(&la, 0, &mut ops);
    single_qubit_ops(&lb, 1, &mut ops);
    let circuit = fuse_single_qubit_runs(&Circuit::from_ops(2, ops)?)?;
    let residual = crate::numerics::phase_aligned_distance(&circuit_unitary(&circuit)?, u)?;
    if residual > 1e-8 {
        return Err(Error::Residual {
            what: "two-qubit decomposition",
            residual,
        });
    }
    Ok(circuit)
}

fn qsd_ops(u: &UnitaryMatrix, n: usize) -> Result<Vec<Op>> {
    let mut ops = Vec::new();
    match n {
        1 => single_qubit_ops(&project_su2_unchecked(u), 0, &mut ops),
        2 => ops.extend(two_qubit_decompose(u)?.ops().iter().cloned()),
        _ => {
            let csd = cosine_sine_decompose(u)?;
            let controls: Vec<usize> = (1..n).collect();
            let emit_mux =
                |ops: &mut Vec<Op>, a1: &UnitaryMatrix, a2: &UnitaryMatrix| -> Result<()> {
                    let dm = demultiplex(a1, a2)?;
                    shift_ops(ops, qsd_ops(&dm.q, n - 1)?, 1);
                    let neg: Vec<f64> = dm.angles.iter().map(|t| -t).collect();
                    multiplexed_rotation(ops, GateSymbol::RZ, &neg, &controls, 0);
                    shift_ops(ops, qsd_ops(&dm.p, n - 1)?, 1);
                    Ok(())
                };
            emit_mux(&mut ops, &csd.r1.adjoint(), &csd.r2.adjoint())?;
            let ry: Vec<f64> = csd
                .c
                .iter()
                .zip(&csd.s)
                .map(|(c, s)| 2.0 * s.atan2(*c))
                .collect();
            multiplexed_rotation(&mut ops, GateSymbol::RY, &ry, &controls, 0);
            emit_mux(&mut ops, &csd.l1, &csd.l2)?;
        }
    }
    Ok(ops)
}

/// Decomposes a `2^n × 2^n` unitary into U3/RY/RZ rotations and CX.
pub fn qsd_decompose(u: &UnitaryMatrix) -> Result<Circuit> {
    let dim = u.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n} qubits exceeds the {MAX_QUBITS}-qubit limit"
        )));
    }
    if u.unitarity_residual() > 1e-8 {
        return Err(Error::NotUnitary {
            residual: u.unitarity_residual(),
        });
    }
    let ops = qsd_ops(u, n)?;
    fuse_single_qubit_runs(&Circuit::from_ops(n, ops)?)
}

/// Merges consecutive single-qubit gates on each wire into one gate (`U3` or
/// `RZ`), dropping identities. CX gates are left untouched.
pub fn fuse_single_qubit_runs(c: &Circuit) -> Result<Circuit> {
    let n = c.num_qubits();
    let mut pending: Vec<Option<Su2Matrix>> = vec![None; n];
    let mut ops = Vec::new();
    let flush = |q: usize, pending: &mut Vec<Option<Su2Matrix>>, ops: &mut Vec<Op>| {
        if let Some(m) = pending[q].take() {
            single_qubit_ops(&m, q, ops);
        }
    };
    for op in c.ops() {
        if op.gate.arity() == 1 {
            let q = op.qubits[0];
            let g = project_entries(single_qubit_entries(&op.gate));
            pending[q] = Some(g * pending[q].unwrap_or(Su2Matrix::IDENTITY));
        } else {
            for &q in &op.qubits {
                flush(q, &mut pending, &mut ops);
            }
            ops.push(op.clone());
        }
    }
    for q in 0..n {
        flush(q, &mut pending, &mut ops);
    }
    Circuit::from_ops(n, ops)
}

/// How a circuit reaches the discrete gate set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Lowering {
    /// Lower each single-qubit gate in place.
    #[default]
    PerGate,
    /// Decompose the whole circuit unitary first, then lower.
    Unitary,
}

impl fmt::Display for Lowering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lowering::PerGate => "per-gate",
            Lowering::Unitary => "unitary",
        })
    }
}

impl FromStr for Lowering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-gate" => Ok(Lowering::PerGate),
            "unitary" => Ok(Lowering::Unitary),
            _ => Err(Error::InvalidArgument(format!(
                "unknown lowering {s:?} (expected per-gate or unitary)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoweredCircuit {
    pub circuit: Circuit,
    /// Program-order instructions: one per emitted basis element, one per CX.
    pub tokens: Vec<Token>,
    /// Sum of the per-gate approximation errors.
    pub error_bound: f64,
}

/// Replaces every single-qubit gate with its Solovay-Kitaev sequence on the
/// same qubit. CX gates pass through.
pub fn lower_circuit(
    c: &Circuit,
    basis: &SkBasis,
    degree: usize,
    opts: SkdOptions,
) -> Result<LoweredCircuit> {
    let mut cache: HashMap<String, SkdResult> = HashMap::new();
    let mut out = Circuit::new(c.num_qubits())?;
    let mut tokens = Vec::new();
    let mut error_bound = 0.0;
    for op in c.ops() {
        match op.gate.arity() {
            1 => {
                let key = op.gate.mnemonic();
                if !cache.contains_key(&key) {
                    let r = solovay_kitaev_with(&gate_su2(&op.gate)?, degree, basis, opts)?;
                    cache.insert(key.clone(), r);
                }
                let r = &cache[&key];
                error_bound += r.achieved_error;
                for g in &r.sequence {
                    out.push(*g, &op.qubits)?;
                }
                tokens.extend(
                    r.segment_labels(basis)
                        .into_iter()
                        .map(|l| Token::new(l, op.qubits.clone())),
                );
            }
            2 if op.gate == GateSymbol::CX => {
                out.push_op(op.clone())?;
                tokens.push(Token::new(CX_LABEL, op.qubits.clone()));
            }
            _ => return Err(Error::InvalidGate(format!("cannot lower {}", op.gate))),
        }
    }
    Ok(LoweredCircuit {
        circuit: out,
        tokens,
        error_bound,
    })
}

/// Full pipeline from an arbitrary circuit to `{base gates, CX}`.
pub fn lower(
    c: &Circuit,
    mode: Lowering,
    basis: &SkBasis,
    degree: usize,
    opts: SkdOptions,
) -> Result<LoweredCircuit> {
    let front = match mode {
        Lowering::PerGate => fuse_single_qubit_runs(c)?,
        Lowering::Unitary => qsd_decompose(&circuit_unitary(c)?)?,
    };
    lower_circuit(&front, basis, degree, opts)
}
