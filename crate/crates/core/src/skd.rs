//! Recursive Solovay-Kitaev approximation of single-qubit unitaries.

use crate::basis::{base_inverse_of, nearest_element, word_su2, SkBasis};
use crate::circuit::GateSymbol;
use crate::error::{Error, Result};
use crate::numerics::Su2Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct SkdResult {
    /// Gates in application order.
    pub sequence: Vec<GateSymbol>,
    /// Basis elements (indices into the basis) whose words concatenate to `sequence`.
    pub segments: Vec<usize>,
    /// Phase-aligned distance between the sequence product and the target.
    pub achieved_error: f64,
    pub degree: usize,
    /// Set when refinement ended further from the target than the base case.
    pub error_grew: bool,
}

impl SkdResult {
    pub fn segment_labels<'a>(&self, basis: &'a SkBasis) -> Vec<&'a str> {
        self.segments
            .iter()
            .map(|&i| basis.elements()[i].label())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkdOptions {
    /// Cancel adjacent mutually inverse segments after each level.
    pub simplify: bool,
}

impl Default for SkdOptions {
    fn default() -> Self {
        Self { simplify: true }
    }
}

/// Approximates `u` at recursion degree `n` with default options.
pub fn solovay_kitaev(u: &Su2Matrix, n: usize, basis: &SkBasis) -> Result<SkdResult> {
    solovay_kitaev_with(u, n, basis, SkdOptions::default())
}

pub fn solovay_kitaev_with(
    u: &Su2Matrix,
    n: usize,
    basis: &SkBasis,
    opts: SkdOptions,
) -> Result<SkdResult> {
    if u.unitarity_residual() > 1e-8 || (u.det() - 1.0).norm() > 1e-8 {
        return Err(Error::NotSu2(format!("target has determinant {}", u.det())));
    }
    let segments = recurse(u, n, basis, opts);
    let sequence: Vec<GateSymbol> = segments
        .iter()
        .flat_map(|&i| basis.elements()[i].gates().iter().copied())
        .collect();
    let achieved_error = word_su2(&sequence)?.distance(u);
    let base_error = nearest_element(u, basis).1;
    Ok(SkdResult {
        sequence,
        segments,
        achieved_error,
        degree: n,
        error_grew: achieved_error > base_error + 1e-12,
    })
}

fn product(segments: &[usize], basis: &SkBasis) -> Su2Matrix {
    segments.iter().fold(Su2Matrix::IDENTITY, |acc, &i| {
        *basis.elements()[i].matrix() * acc
    })
}

fn recurse(u: &Su2Matrix, n: usize, basis: &SkBasis, opts: SkdOptions) -> Vec<usize> {
    if n == 0 {
        let (e, _) = nearest_element(u, basis);
        return if e.is_null() {
            Vec::new()
        } else {
            vec![basis.index_of(e.label()).expect("element is in the basis")]
        };
    }
    let prev = recurse(u, n - 1, basis, opts);
    let delta = *u * product(&prev, basis).adjoint();
    let (v, w) = balanced_commutator_decompose(&delta);
    let vs = recurse(&v, n - 1, basis, opts);
    let ws = recurse(&w, n - 1, basis, opts);
    let invert = |s: &[usize]| {
        s.iter()
            .rev()
            .map(|&i| basis.inverse_index(i))
            .collect::<Vec<_>>()
    };
    let mut seq = prev;
    seq.extend(invert(&ws));
    seq.extend(invert(&vs));
    seq.extend(ws);
    seq.extend(vs);
    if opts.simplify {
        seq = cancel_inverse_segments(&seq, basis);
    }
    seq
}

/// Removes adjacent segments that multiply to the identity, until none remain.
pub fn cancel_inverse_segments(segments: &[usize], basis: &SkBasis) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(segments.len());
    for &i in segments {
        match out.last() {
            Some(&last) if basis.inverse_index(last) == i => {
                out.pop();
            }
            _ => out.push(i),
        }
    }
    out
}

/// Reversed word with each gate replaced by its inverse from `base`.
pub fn inverse_sequence(seq: &[GateSymbol], base: &[GateSymbol]) -> Result<Vec<GateSymbol>> {
    seq.iter().rev().map(|g| base_inverse_of(base, g)).collect()
}

/// Removes adjacent inverse pairs until none remain.
pub fn simplify_sequence(seq: &[GateSymbol], base: &[GateSymbol]) -> Result<Vec<GateSymbol>> {
    let mut out: Vec<GateSymbol> = Vec::with_capacity(seq.len());
    for g in seq {
        match out.last() {
            Some(last) if base_inverse_of(base, last)? == *g => {
                out.pop();
            }
            _ => out.push(*g),
        }
    }
    Ok(out)
}

/// Finds `V`, `W`, equal-angle rotations about orthogonal axes, with `VWV†W† = ±Δ`.
pub fn balanced_commutator_decompose(delta: &Su2Matrix) -> (Su2Matrix, Su2Matrix) {
    let delta = if delta.trace().re < 0.0 {
        delta.negate()
    } else {
        *delta
    };
    let (axis, theta) = delta.axis_angle();
    if theta < 1e-15 {
        return (Su2Matrix::IDENTITY, Su2Matrix::IDENTITY);
    }
    let sin_half_phi = ((1.0 - (theta / 2.0).cos()) / 2.0).powf(0.25);
    let phi = 2.0 * sin_half_phi.min(1.0).asin();
    let vx = Su2Matrix::from_axis_angle([1.0, 0.0, 0.0], phi);
    let wy = Su2Matrix::from_axis_angle([0.0, 1.0, 0.0], phi);
    let comm = vx * wy * vx.adjoint() * wy.adjoint();
    let comm = if comm.trace().re < 0.0 {
        comm.negate()
    } else {
        comm
    };
    let (c_axis, _) = comm.axis_angle();
    let s = rotation_between(c_axis, axis);
    let sd = s.adjoint();
    (s * vx * sd, s * wy * sd)
}

/// SU(2) element rotating unit vector `from` onto `to`.
fn rotation_between(from: [f64; 3], to: [f64; 3]) -> Su2Matrix {
    let dot = (from[0] * to[0] + from[1] * to[1] + from[2] * to[2]).clamp(-1.0, 1.0);
    let cross = [
        from[1] * to[2] - from[2] * to[1],
        from[2] * to[0] - from[0] * to[2],
        from[0] * to[1] - from[1] * to[0],
    ];
    let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    if cross_norm < 1e-12 {
        if dot > 0.0 {
            return Su2Matrix::IDENTITY;
        }
        // Antiparallel: half turn about any axis perpendicular to `from`.
        let trial = if from[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let perp = [
            from[1] * trial[2] - from[2] * trial[1],
            from[2] * trial[0] - from[0] * trial[2],
            from[0] * trial[1] - from[1] * trial[0],
        ];
        return Su2Matrix::from_axis_angle(perp, std::f64::consts::PI);
    }
    Su2Matrix::from_axis_angle(cross, cross_norm.atan2(dot))
}
