//! Gate vocabulary and circuit IR.
//!
//! Qubit 0 is the most significant bit of a basis-state index, so a gate
//! acting on qubit 0 of a two-qubit circuit lifts to `G ⊗ I`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{UnitaryMatrix, C64, MAX_DIM};

/// Largest circuit width whose unitary we materialise.
pub const MAX_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateSymbol {
    H,
    T,
    Tdg,
    CX,
    RX(f64),
    RY(f64),
    RZ(f64),
    U3(f64, f64, f64),
}

impl GateSymbol {
    pub fn arity(&self) -> usize {
        match self {
            GateSymbol::CX => 2,
            _ => 1,
        }
    }

    pub fn is_parametric(&self) -> bool {
        matches!(
            self,
            GateSymbol::RX(_) | GateSymbol::RY(_) | GateSymbol::RZ(_) | GateSymbol::U3(..)
        )
    }

    /// Upper-case mnemonic used in instruction labels (`H`, `Tdg`, `RZ(0.5)`).
    pub fn mnemonic(&self) -> String {
        match self {
            GateSymbol::H => "H".into(),
            GateSymbol::T => "T".into(),
            GateSymbol::Tdg => "Tdg".into(),
            GateSymbol::CX => "CX".into(),
            GateSymbol::RX(t) => format!("RX({t})"),
            GateSymbol::RY(t) => format!("RY({t})"),
            GateSymbol::RZ(t) => format!("RZ({t})"),
            GateSymbol::U3(a, b, c) => format!("U3({a},{b},{c})"),
        }
    }

    /// Inverse of [`GateSymbol::mnemonic`].
    pub fn from_mnemonic(text: &str) -> Result<GateSymbol> {
        let bad = || Error::InvalidGate(format!("unknown gate mnemonic {text:?}"));
        match text {
            "H" => return Ok(GateSymbol::H),
            "T" => return Ok(GateSymbol::T),
            "Tdg" => return Ok(GateSymbol::Tdg),
            "CX" => return Ok(GateSymbol::CX),
            _ => {}
        }
        let open = text.find('(').ok_or_else(bad)?;
        let args = text[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let params: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let gate = match (&text[..open], params.as_slice()) {
            ("RX", [t]) => GateSymbol::RX(*t),
            ("RY", [t]) => GateSymbol::RY(*t),
            ("RZ", [t]) => GateSymbol::RZ(*t),
            ("U3", [a, b, c]) => GateSymbol::U3(*a, *b, *c),
            _ => return Err(bad()),
        };
        gate.validate()?;
        Ok(gate)
    }

    pub fn inverse(&self) -> GateSymbol {
        match *self {
            GateSymbol::H => GateSymbol::H,
            GateSymbol::T => GateSymbol::Tdg,
            GateSymbol::Tdg => GateSymbol::T,
            GateSymbol::CX => GateSymbol::CX,
            GateSymbol::RX(t) => GateSymbol::RX(-t),
            GateSymbol::RY(t) => GateSymbol::RY(-t),
            GateSymbol::RZ(t) => GateSymbol::RZ(-t),
            GateSymbol::U3(theta, phi, lambda) => GateSymbol::U3(-theta, -lambda, -phi),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = match *self {
            GateSymbol::RX(t) | GateSymbol::RY(t) | GateSymbol::RZ(t) => t.is_finite(),
            GateSymbol::U3(a, b, c) => a.is_finite() && b.is_finite() && c.is_finite(),
            _ => true,
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidGate(format!(
                "{} has a non-finite angle",
                self.mnemonic()
            )))
        }
    }
}

impl fmt::Display for GateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.mnemonic())
    }
}

/// 2×2 entries (row-major) of a single-qubit gate.
pub(crate) fn single_qubit_entries(g: &GateSymbol) -> [C64; 4] {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match *g {
        GateSymbol::H => {
            let s = C64::new(FRAC_1_SQRT_2, 0.0);
            [s, s, s, -s]
        }
        GateSymbol::T => [one, zero, zero, C64::from_polar(1.0, PI / 4.0)],
        GateSymbol::Tdg => [one, zero, zero, C64::from_polar(1.0, -PI / 4.0)],
        GateSymbol::RX(t) => {
            let (s, c) = (t / 2.0).sin_cos();
            [
                C64::new(c, 0.0),
                C64::new(0.0, -s),
                C64::new(0.0, -s),
                C64::new(c, 0.0),
            ]
        }
        GateSymbol::RY(t) => {
            let (s, c) = (t / 2.0).sin_cos();
            [
                C64::new(c, 0.0),
                C64::new(-s, 0.0),
                C64::new(s, 0.0),
                C64::new(c, 0.0),
            ]
        }
        GateSymbol::RZ(t) => [
            C64::from_polar(1.0, -t / 2.0),
            zero,
            zero,
            C64::from_polar(1.0, t / 2.0),
        ],
        GateSymbol::U3(theta, phi, lambda) => {
            let (s, c) = (theta / 2.0).sin_cos();
            [
                C64::new(c, 0.0),
                -C64::from_polar(s, lambda),
                C64::from_polar(s, phi),
                C64::from_polar(c, phi + lambda),
            ]
        }
        GateSymbol::CX => panic!("CX is not a single-qubit gate"),
    }
}

/// Standard matrix of a gate: 2×2, or 4×4 for CX (control is the first qubit).
pub fn gate_unitary(g: &GateSymbol) -> UnitaryMatrix {
    match g {
        GateSymbol::CX => {
            let mut m = DMatrix::<C64>::zeros(4, 4);
            let one = C64::new(1.0, 0.0);
            m[(0, 0)] = one;
            m[(1, 1)] = one;
            m[(2, 3)] = one;
            m[(3, 2)] = one;
            UnitaryMatrix::from_matrix_unchecked(m)
        }
        _ => UnitaryMatrix::from_matrix_unchecked(DMatrix::from_row_slice(
            2,
            2,
            &single_qubit_entries(g),
        )),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Op {
    pub gate: GateSymbol,
    pub qubits: Vec<usize>,
}

impl Op {
    pub fn new(gate: GateSymbol, qubits: Vec<usize>) -> Self {
        Self { gate, qubits }
    }

    pub fn one(gate: GateSymbol, qubit: usize) -> Self {
        Self {
            gate,
            qubits: vec![qubit],
        }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self {
            gate: GateSymbol::CX,
            qubits: vec![control, target],
        }
    }
}

/// Ordered list of gate applications on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidDimension(
                "a circuit needs at least one qubit".into(),
            ));
        }
        Ok(Self {
            num_qubits,
            ops: Vec::new(),
        })
    }

    pub fn from_ops(num_qubits: usize, ops: impl IntoIterator<Item = Op>) -> Result<Self> {
        let mut c = Self::new(num_qubits)?;
        for op in ops {
            c.push_op(op)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Serial depth: one layer per op.
    pub fn depth(&self) -> usize {
        self.ops.len()
    }

    /// Parallel layer depth (ops on disjoint qubits share a layer).
    pub fn layer_depth(&self) -> usize {
        let mut front = vec![0usize; self.num_qubits];
        for op in &self.ops {
            let layer = op.qubits.iter().map(|&q| front[q]).max().unwrap_or(0) + 1;
            for &q in &op.qubits {
                front[q] = layer;
            }
        }
        front.into_iter().max().unwrap_or(0)
    }

    pub fn cx_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| op.gate == GateSymbol::CX)
            .count()
    }

    pub fn push(&mut self, gate: GateSymbol, qubits: &[usize]) -> Result<()> {
        self.push_op(Op::new(gate, qubits.to_vec()))
    }

    pub fn push_op(&mut self, op: Op) -> Result<()> {
        op.gate.validate()?;
        if op.qubits.len() != op.gate.arity() {
            return Err(Error::InvalidGate(format!(
                "{} expects {} qubit(s), got {}",
                op.gate,
                op.gate.arity(),
                op.qubits.len()
            )));
        }
        for &q in &op.qubits {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    id: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if op.qubits.len() == 2 && op.qubits[0] == op.qubits[1] {
            return Err(Error::InvalidGate(format!(
                "{} needs two distinct qubits",
                op.gate
            )));
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        for op in &other.ops {
            self.push_op(op.clone())?;
        }
        Ok(())
    }

    /// Gate-wise inverse: reversed order, each gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            ops: self
                .ops
                .iter()
                .rev()
                .map(|op| Op::new(op.gate.inverse(), op.qubits.clone()))
                .collect(),
        }
    }
}

fn bit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Applies `op` to every column of `m` (i.e. left-multiplies by the lifted gate).
pub(crate) fn apply_op(m: &mut DMatrix<C64>, num_qubits: usize, op: &Op) {
    let dim = m.nrows();
    match op.gate {
        GateSymbol::CX => {
            let cmask = bit_mask(num_qubits, op.qubits[0]);
            let tmask = bit_mask(num_qubits, op.qubits[1]);
            for i in 0..dim {
                if i & cmask != 0 && i & tmask == 0 {
                    m.swap_rows(i, i | tmask);
                }
            }
        }
        ref g => {
            let [a, b, c, d] = single_qubit_entries(g);
            let mask = bit_mask(num_qubits, op.qubits[0]);
            for col in 0..m.ncols() {
                for i in 0..dim {
                    if i & mask == 0 {
                        let j = i | mask;
                        let (x, y) = (m[(i, col)], m[(j, col)]);
                        m[(i, col)] = a * x + b * y;
                        m[(j, col)] = c * x + d * y;
                    }
                }
            }
        }
    }
}

/// Product of the lifted gate matrices in application order.
pub fn circuit_unitary(c: &Circuit) -> Result<UnitaryMatrix> {
    if c.num_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{} qubits exceeds the {MAX_QUBITS}-qubit limit for dense unitaries",
            c.num_qubits
        )));
    }
    let dim = 1usize << c.num_qubits;
    debug_assert!(dim <= MAX_DIM);
    let mut m = DMatrix::<C64>::identity(dim, dim);
    for op in &c.ops {
        apply_op(&mut m, c.num_qubits, op);
    }
    Ok(UnitaryMatrix::from_matrix_unchecked(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::phase_aligned_distance;

    #[test]
    fn hadamard_matrix() {
        let h = gate_unitary(&GateSymbol::H);
        let s = FRAC_1_SQRT_2;
        assert!((h.get(0, 0).re - s).abs() < 1e-15);
        assert!((h.get(1, 1).re + s).abs() < 1e-15);
    }

    #[test]
    fn t_times_tdg_is_identity() {
        let p = gate_unitary(&GateSymbol::T) * gate_unitary(&GateSymbol::Tdg);
        assert!(p.frobenius_distance(&UnitaryMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn rz_quarter_pi_matches_t_up_to_phase() {
        let d = phase_aligned_distance(
            &gate_unitary(&GateSymbol::RZ(PI / 4.0)),
            &gate_unitary(&GateSymbol::T),
        )
        .unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn u3_covers_rotations() {
        let ry = gate_unitary(&GateSymbol::RY(0.3));
        let u3 = gate_unitary(&GateSymbol::U3(0.3, 0.0, 0.0));
        assert!(ry.frobenius_distance(&u3) < 1e-15);
        let inv = gate_unitary(&GateSymbol::U3(0.3, 0.2, -1.1).inverse())
            * gate_unitary(&GateSymbol::U3(0.3, 0.2, -1.1));
        assert!(inv.frobenius_distance(&UnitaryMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn mnemonic_round_trip() {
        for g in [
            GateSymbol::H,
            GateSymbol::T,
            GateSymbol::Tdg,
            GateSymbol::CX,
            GateSymbol::RZ(-0.25),
            GateSymbol::U3(1.0, 2.5, -3.0),
        ] {
            assert_eq!(GateSymbol::from_mnemonic(&g.mnemonic()).unwrap(), g);
        }
        assert!(GateSymbol::from_mnemonic("S").is_err());
        assert!(GateSymbol::from_mnemonic("RZ(1,2)").is_err());
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2).unwrap();
        assert_eq!(circuit_unitary(&c).unwrap(), UnitaryMatrix::identity(4));
    }

    #[test]
    fn bell_preparation() {
        let c = Circuit::from_ops(2, [Op::one(GateSymbol::H, 0), Op::cx(0, 1)]).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let s = FRAC_1_SQRT_2;
        let col: Vec<f64> = (0..4).map(|i| u.get(i, 0).re).collect();
        assert!(
            (col[0] - s).abs() < 1e-15
                && col[1].abs() < 1e-15
                && col[2].abs() < 1e-15
                && (col[3] - s).abs() < 1e-15
        );
    }

    #[test]
    fn cx_lift_matches_standard_matrix() {
        let c = Circuit::from_ops(2, [Op::cx(0, 1)]).unwrap();
        assert_eq!(circuit_unitary(&c).unwrap(), gate_unitary(&GateSymbol::CX));
        let rev = Circuit::from_ops(2, [Op::cx(1, 0)]).unwrap();
        let u = circuit_unitary(&rev).unwrap();
        assert_eq!(u.get(1, 3).re, 1.0);
    }

    #[test]
    fn rejects_bad_ops() {
        let mut c = Circuit::new(2).unwrap();
        assert!(c.push(GateSymbol::H, &[2]).is_err());
        assert!(c.push(GateSymbol::CX, &[1, 1]).is_err());
        assert!(c.push(GateSymbol::CX, &[1]).is_err());
        assert!(c.push(GateSymbol::RZ(f64::NAN), &[0]).is_err());
        assert!(Circuit::new(0).is_err());
    }

    #[test]
    fn capacity_limit() {
        let c = Circuit::new(7).unwrap();
        assert!(matches!(circuit_unitary(&c), Err(Error::Capacity(_))));
    }

    #[test]
    fn layer_depth_packs_disjoint_ops() {
        let c = Circuit::from_ops(
            3,
            [
                Op::one(GateSymbol::H, 0),
                Op::one(GateSymbol::H, 1),
                Op::one(GateSymbol::H, 2),
                Op::cx(0, 1),
            ],
        )
        .unwrap();
        assert_eq!(c.depth(), 4);
        assert_eq!(c.layer_depth(), 2);
    }
}
