//! Solovay-Kitaev basis: every word over a base gate set up to a fixed
//! length, with identities and phase-equivalent duplicates pruned.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{single_qubit_entries, GateSymbol};
use crate::error::{Error, Result};
use crate::numerics::{
    format_complex, haar_with_rng, parse_complex, project_entries, project_su2_unchecked,
    Su2Matrix, EXACT_TOL,
};

/// Default pruning tolerance on the phase-aligned distance.
pub const PRUNE_TOL: f64 = 1e-10;

/// Longest word length accepted by [`generate_basis`].
pub const MAX_DEPTH: usize = 10;

const HEADER: &str = "# eqisa sk-basis v1";

/// Text used for the empty word in files and reports.
pub const NULL_LABEL: &str = "[]";

/// SU(2) projection of a single-qubit gate.
pub fn gate_su2(g: &GateSymbol) -> Result<Su2Matrix> {
    if g.arity() != 1 {
        return Err(Error::InvalidGate(format!(
            "{g} is not a single-qubit gate"
        )));
    }
    Ok(project_entries(single_qubit_entries(g)))
}

/// Product of a gate word in circuit order (first gate applied first).
pub fn word_su2(gates: &[GateSymbol]) -> Result<Su2Matrix> {
    let mut acc = Su2Matrix::IDENTITY;
    for g in gates {
        acc = gate_su2(g)? * acc;
    }
    Ok(acc)
}

/// Concatenated mnemonics, e.g. `HTdgH`. The empty word has an empty label.
pub fn label_of(gates: &[GateSymbol]) -> String {
    gates.iter().map(|g| g.mnemonic()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisElement {
    gates: Vec<GateSymbol>,
    label: String,
    matrix: Su2Matrix,
}

impl BasisElement {
    pub fn gates(&self) -> &[GateSymbol] {
        &self.gates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &Su2Matrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn is_null(&self) -> bool {
        self.gates.is_empty()
    }

    /// Label with the empty word shown as `[]`.
    pub fn display_label(&self) -> &str {
        if self.is_null() {
            NULL_LABEL
        } else {
            &self.label
        }
    }
}

/// Immutable search net and coding alphabet. Element 0 is always the null word.
#[derive(Clone, Debug, PartialEq)]
pub struct SkBasis {
    base_gates: Vec<GateSymbol>,
    depth: usize,
    tolerance: f64,
    elements: Vec<BasisElement>,
    /// Index of each element's inverse (up to phase).
    inverses: Vec<usize>,
}

impl SkBasis {
    pub fn base_gates(&self) -> &[GateSymbol] {
        &self.base_gates
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    /// Elements other than the null word.
    pub fn non_null(&self) -> impl Iterator<Item = &BasisElement> {
        self.elements.iter().filter(|e| !e.is_null())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn find(&self, label: &str) -> Option<&BasisElement> {
        self.index_of(label).map(|i| &self.elements[i])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.label == label || (e.is_null() && label == NULL_LABEL))
    }

    /// Index of the element equal to the inverse of element `i` up to phase.
    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverses[i]
    }

    /// Inverse of a base gate within the base set (up to phase).
    pub fn base_inverse(&self, g: &GateSymbol) -> Result<GateSymbol> {
        base_inverse_of(&self.base_gates, g)
    }

    /// Splits a concatenated label back into base gates (longest mnemonic first).
    pub fn parse_label(&self, label: &str) -> Result<Vec<GateSymbol>> {
        parse_word(&self.base_gates, label)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let gates: Vec<String> = self.base_gates.iter().map(|g| g.mnemonic()).collect();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "base_gates {}", gates.join(" "));
        let _ = writeln!(out, "depth {}", self.depth);
        let _ = writeln!(out, "tolerance {:e}", self.tolerance);
        let _ = writeln!(out, "elements {}", self.elements.len());
        for e in &self.elements {
            let m = e.matrix.entries().map(format_complex);
            let _ = writeln!(out, "{}\t{}", e.display_label(), m.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SkBasis> {
        let bad = |msg: String| Error::format("sk-basis", msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(HEADER) {
            return Err(bad("missing header".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(|r| r.trim().to_string())
                .ok_or_else(|| bad(format!("expected {key}, found {line:?}")))
        };
        let base_gates = field("base_gates")?
            .split_whitespace()
            .map(GateSymbol::from_mnemonic)
            .collect::<Result<Vec<_>>>()?;
        let depth: usize = field("depth")?
            .parse()
            .map_err(|_| bad("bad depth".into()))?;
        let tolerance: f64 = field("tolerance")?
            .parse()
            .map_err(|_| bad("bad tolerance".into()))?;
        let count: usize = field("elements")?
            .parse()
            .map_err(|_| bad("bad element count".into()))?;
        validate_base(&base_gates)?;

        let mut elements = Vec::with_capacity(count);
        for line in lines {
            let (label, nums) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("no tab in {line:?}")))?;
            let gates = if label == NULL_LABEL {
                Vec::new()
            } else {
                parse_word(&base_gates, label)?
            };
            let entries: Vec<_> = nums
                .split_whitespace()
                .map(parse_complex)
                .collect::<Result<_>>()?;
            let entries: [_; 4] = entries
                .try_into()
                .map_err(|_| bad(format!("{label}: need 4 entries")))?;
            let matrix = Su2Matrix::new(entries, 1e-8)?;
            if matrix.distance(&word_su2(&gates)?) > EXACT_TOL {
                return Err(bad(format!("{label}: matrix does not match its gates")));
            }
            elements.push(BasisElement {
                label: label_of(&gates),
                gates,
                matrix,
            });
        }
        if elements.len() != count {
            return Err(bad(format!(
                "expected {count} elements, found {}",
                elements.len()
            )));
        }
        if elements.first().map(|e| !e.is_null()).unwrap_or(true) {
            return Err(bad("first element must be the null word".into()));
        }
        SkBasis::assemble(base_gates, depth, tolerance, elements)
    }

    fn assemble(
        base_gates: Vec<GateSymbol>,
        depth: usize,
        tolerance: f64,
        elements: Vec<BasisElement>,
    ) -> Result<SkBasis> {
        let mut basis = SkBasis {
            base_gates,
            depth,
            tolerance,
            elements,
            inverses: Vec::new(),
        };
        let mut inverses = Vec::with_capacity(basis.elements.len());
        for e in &basis.elements {
            let (found, d) = nearest_element(&e.matrix.adjoint(), &basis);
            if d > 1e-9 {
                return Err(Error::NotInverseClosed(e.display_label().to_string()));
            }
            inverses.push(
                basis
                    .index_of(found.label())
                    .expect("element is in the basis"),
            );
        }
        basis.inverses = inverses;
        Ok(basis)
    }
}

/// Inverse of `g` (up to phase) among `base`.
pub fn base_inverse_of(base: &[GateSymbol], g: &GateSymbol) -> Result<GateSymbol> {
    let m = gate_su2(g)?;
    base.iter()
        .copied()
        .find(|h| {
            gate_su2(h)
                .map(|hm| (hm * m).distance(&Su2Matrix::IDENTITY) < EXACT_TOL)
                .unwrap_or(false)
        })
        .ok_or_else(|| Error::NoInverse(g.mnemonic()))
}

/// Rejects empty or non-inverse-closed base sets.
pub fn validate_base(base: &[GateSymbol]) -> Result<()> {
    if base.is_empty() {
        return Err(Error::InvalidArgument("base gate set is empty".into()));
    }
    for g in base {
        base_inverse_of(base, g).map_err(|_| Error::NotInverseClosed(g.mnemonic()))?;
    }
    Ok(())
}

fn parse_word(base: &[GateSymbol], label: &str) -> Result<Vec<GateSymbol>> {
    let mut names: Vec<(String, GateSymbol)> = base.iter().map(|g| (g.mnemonic(), *g)).collect();
    names.sort_by_key(|n| std::cmp::Reverse(n.0.len()));
    let mut rest = label;
    let mut out = Vec::new();
    while !rest.is_empty() {
        let (name, g) = names
            .iter()
            .find(|(n, _)| rest.starts_with(n.as_str()))
            .ok_or_else(|| Error::UnknownToken(label.to_string()))?;
        out.push(*g);
        rest = &rest[name.len()..];
    }
    Ok(out)
}

/// Enumerates all words up to length `depth` in (length, base order) order and
/// keeps the first representative of each phase class.
pub fn generate_basis(base_gates: &[GateSymbol], depth: usize) -> Result<SkBasis> {
    generate_basis_with_tolerance(base_gates, depth, PRUNE_TOL)
}

pub fn generate_basis_with_tolerance(
    base_gates: &[GateSymbol],
    depth: usize,
    tolerance: f64,
) -> Result<SkBasis> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidArgument(format!(
            "basis depth must be in 1..={MAX_DEPTH}, got {depth}"
        )));
    }
    for g in base_gates {
        gate_su2(g)?;
    }
    validate_base(base_gates)?;
    let mats: Vec<Su2Matrix> = base_gates.iter().map(gate_su2).collect::<Result<_>>()?;

    let mut elements = vec![BasisElement {
        gates: Vec::new(),
        label: String::new(),
        matrix: Su2Matrix::IDENTITY,
    }];
    // Words of the previous length with their products, in lexicographic order.
    let mut frontier: Vec<(Vec<usize>, Su2Matrix)> = vec![(Vec::new(), Su2Matrix::IDENTITY)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * base_gates.len());
        for (word, m) in &frontier {
            for (i, g) in mats.iter().enumerate() {
                let mut w = word.clone();
                w.push(i);
                next.push((w, *g * *m));
            }
        }
        for (word, m) in &next {
            if elements.iter().all(|e| e.matrix.distance(m) >= tolerance) {
                let gates: Vec<GateSymbol> = word.iter().map(|&i| base_gates[i]).collect();
                elements.push(BasisElement {
                    label: label_of(&gates),
                    gates,
                    matrix: *m,
                });
            }
        }
        frontier = next;
    }
    SkBasis::assemble(base_gates.to_vec(), depth, tolerance, elements)
}

/// Closest element up to phase; the earliest (shortest, then lexicographic) wins ties.
pub fn nearest_element<'a>(u: &Su2Matrix, basis: &'a SkBasis) -> (&'a BasisElement, f64) {
    let mut best = &basis.elements[0];
    let mut best_d = best.matrix.distance(u);
    for e in &basis.elements[1..] {
        let d = e.matrix.distance(u);
        if d < best_d {
            best = e;
            best_d = d;
        }
    }
    (best, best_d)
}

/// Empirical covering radius of the basis over Haar-random SU(2) samples.
pub fn epsilon_zero(basis: &SkBasis, sample_count: usize, seed: u64) -> Result<f64> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument(
            "sample_count must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..sample_count {
        let u = project_su2_unchecked(&haar_with_rng(2, &mut rng));
        worst = worst.max(nearest_element(&u, basis).1);
    }
    Ok(worst)
}

/// The default base set `{H, T, Tdg}`.
pub fn clifford_t_base() -> Vec<GateSymbol> {
    vec![GateSymbol::H, GateSymbol::T, GateSymbol::Tdg]
}
