//! Instruction dictionaries: tokenizing lowered circuits into SK-basis
//! instructions, learning usage frequencies, and selecting the sparse set.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{generate_basis, label_of, SkBasis};
use crate::circuit::{Circuit, GateSymbol, Op};
use crate::error::{Error, Result};
use crate::numerics::{haar_random_su2, haar_random_unitary};
use crate::qsd::{lower_circuit, qsd_decompose, LoweredCircuit};
use crate::skd::SkdOptions;

pub const CX_LABEL: &str = "CX";

/// One instruction of a tokenized program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub label: String,
    pub qubits: Vec<usize>,
}

impl Token {
    pub fn new(label: impl Into<String>, qubits: Vec<usize>) -> Self {
        Self {
            label: label.into(),
            qubits,
        }
    }
}

/// Instruction labels with their gate expansions.
#[derive(Clone, Debug)]
pub struct Alphabet {
    expansions: HashMap<String, Vec<GateSymbol>>,
    max_len: usize,
}

impl Alphabet {
    /// Every non-null element of the basis.
    pub fn from_basis(basis: &SkBasis) -> Self {
        let expansions: HashMap<_, _> = basis
            .non_null()
            .map(|e| (e.label().to_string(), e.gates().to_vec()))
            .collect();
        let max_len = expansions.values().map(Vec::len).max().unwrap_or(0);
        Self {
            expansions,
            max_len,
        }
    }

    /// Selected labels only, expanded through the basis.
    pub fn from_selection(selection: &DictionarySelection, basis: &SkBasis) -> Result<Self> {
        let mut expansions = HashMap::new();
        for label in selection.labels() {
            if label == CX_LABEL {
                continue;
            }
            expansions.insert(label.clone(), basis.parse_label(label)?);
        }
        let max_len = expansions.values().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            expansions,
            max_len,
        })
    }

    pub fn contains(&self, label: &str) -> bool {
        label == CX_LABEL || self.expansions.contains_key(label)
    }

    pub fn expand(&self, label: &str) -> Option<&[GateSymbol]> {
        self.expansions.get(label).map(Vec::as_slice)
    }
}

/// Greedy longest-match segmentation of a single-qubit gate run.
pub fn tokenize(stream: &[GateSymbol], alphabet: &Alphabet) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < stream.len() {
        let longest = alphabet.max_len.min(stream.len() - i);
        let found = (1..=longest).rev().find_map(|len| {
            let label = label_of(&stream[i..i + len]);
            alphabet
                .expansions
                .contains_key(&label)
                .then_some((label, len))
        });
        let (label, len) = found.ok_or_else(|| Error::UnknownToken(stream[i].mnemonic()))?;
        out.push(label);
        i += len;
    }
    Ok(out)
}

/// Tokenizes a lowered circuit. Single-qubit runs on each wire are flushed at
/// CX boundaries (and at the end) in order of their first gate.
pub fn tokenize_circuit(c: &Circuit, alphabet: &Alphabet) -> Result<Vec<Token>> {
    let n = c.num_qubits();
    let mut runs: Vec<(usize, Vec<GateSymbol>)> = vec![(0, Vec::new()); n];
    let mut out = Vec::new();

    fn flush(
        qubits: &mut [usize],
        runs: &mut [(usize, Vec<GateSymbol>)],
        alphabet: &Alphabet,
        out: &mut Vec<Token>,
    ) -> Result<()> {
        qubits.sort_by_key(|&q| runs[q].0);
        for &q in qubits.iter() {
            let run = std::mem::take(&mut runs[q].1);
            for label in tokenize(&run, alphabet)? {
                out.push(Token::new(label, vec![q]));
            }
        }
        Ok(())
    }

    for (pos, op) in c.ops().iter().enumerate() {
        match op.gate {
            GateSymbol::CX => {
                let mut qs = op.qubits.clone();
                flush(&mut qs, &mut runs, alphabet, &mut out)?;
                out.push(Token::new(CX_LABEL, op.qubits.clone()));
            }
            g => {
                let run = &mut runs[op.qubits[0]];
                if run.1.is_empty() {
                    run.0 = pos;
                }
                run.1.push(g);
            }
        }
    }
    let mut all: Vec<usize> = (0..n).filter(|&q| !runs[q].1.is_empty()).collect();
    flush(&mut all, &mut runs, alphabet, &mut out)?;
    Ok(out)
}

/// Expands tokens back into a circuit.
pub fn detokenize(tokens: &[Token], num_qubits: usize, alphabet: &Alphabet) -> Result<Circuit> {
    let mut c = Circuit::new(num_qubits)?;
    for t in tokens {
        if t.label == CX_LABEL {
            c.push_op(Op::new(GateSymbol::CX, t.qubits.clone()))?;
        } else {
            let gates = alphabet
                .expand(&t.label)
                .ok_or_else(|| Error::UnknownToken(t.label.clone()))?;
            for g in gates {
                c.push(*g, &t.qubits)?;
            }
        }
    }
    Ok(c)
}

/// Where instruction boundaries come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Segmentation {
    /// The basis elements emitted by the decomposition itself.
    #[default]
    Net,
    /// Greedy longest-match over per-qubit runs of the lowered gate stream.
    Greedy,
}

impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Segmentation::Net => "net",
            Segmentation::Greedy => "greedy",
        })
    }
}

impl FromStr for Segmentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "net" => Ok(Segmentation::Net),
            "greedy" => Ok(Segmentation::Greedy),
            _ => Err(Error::InvalidArgument(format!(
                "unknown segmentation {s:?} (expected net or greedy)"
            ))),
        }
    }
}

/// Token stream of a lowered circuit under the given segmentation.
pub fn segment(
    lowered: &LoweredCircuit,
    alphabet: &Alphabet,
    mode: Segmentation,
) -> Result<Vec<Token>> {
    match mode {
        Segmentation::Net => Ok(lowered.tokens.clone()),
        Segmentation::Greedy => tokenize_circuit(&lowered.circuit, alphabet),
    }
}

/// Replaces unselected tokens by their single-gate letters.
pub fn reexpand_unselected(
    tokens: &[Token],
    selection: &DictionarySelection,
    basis: &SkBasis,
) -> Result<Vec<Token>> {
    let mut out = Vec::with_capacity(tokens.len());
    for t in tokens {
        if selection.contains(&t.label) {
            out.push(t.clone());
        } else {
            for g in basis.parse_label(&t.label)? {
                out.push(Token::new(g.mnemonic(), t.qubits.clone()));
            }
        }
    }
    Ok(out)
}

/// Occurrence count of each label.
pub fn count_labels(tokens: &[Token]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.label.clone()).or_insert(0) += 1;
    }
    counts
}

/// Settings that fully determine a learned table.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub base_gates: Vec<GateSymbol>,
    pub depth: usize,
    pub degree: usize,
    pub ensemble_size: usize,
    /// Width of the training unitaries (1 = single-qubit SKD only).
    pub num_qubits: usize,
    pub seed: u64,
    pub simplify: bool,
    pub segmentation: Segmentation,
}

/// Mean per-circuit usage of each instruction, in basis order with CX first.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTable {
    entries: Vec<(String, f64)>,
    provenance: Provenance,
}

const TABLE_HEADER: &str = "# eqisa frequency-table v1";
const SELECTION_HEADER: &str = "# eqisa dictionary v1";

impl FrequencyTable {
    pub fn new(entries: Vec<(String, f64)>, provenance: Provenance) -> Result<Self> {
        if let Some((label, v)) = entries.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "frequency of {label} must be a non-negative number, got {v}"
            )));
        }
        Ok(Self {
            entries,
            provenance,
        })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
    }

    /// Labels that are always selected: CX and every base gate.
    pub fn mandatory(&self) -> Vec<String> {
        std::iter::once(CX_LABEL.to_string())
            .chain(self.provenance.base_gates.iter().map(|g| g.mnemonic()))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let gates: Vec<String> = p.base_gates.iter().map(|g| g.mnemonic()).collect();
        let _ = writeln!(out, "{TABLE_HEADER}");
        let _ = writeln!(out, "base_gates {}", gates.join(" "));
        let _ = writeln!(out, "depth {}", p.depth);
        let _ = writeln!(out, "degree {}", p.degree);
        let _ = writeln!(out, "ensemble {}", p.ensemble_size);
        let _ = writeln!(out, "qubits {}", p.num_qubits);
        let _ = writeln!(out, "seed {}", p.seed);
        let _ = writeln!(out, "simplify {}", p.simplify);
        let _ = writeln!(out, "segmentation {}", p.segmentation);
        for (label, v) in &self.entries {
            let _ = writeln!(out, "{label}\t{v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::format("frequency-table", msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(TABLE_HEADER) {
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
        let num = |s: String, key: &str| s.parse::<u64>().map_err(|_| bad(format!("bad {key}")));
        let depth = num(field("depth")?, "depth")? as usize;
        let degree = num(field("degree")?, "degree")? as usize;
        let ensemble_size = num(field("ensemble")?, "ensemble")? as usize;
        let num_qubits = num(field("qubits")?, "qubits")? as usize;
        let seed = num(field("seed")?, "seed")?;
        let simplify = field("simplify")?
            .parse::<bool>()
            .map_err(|_| bad("bad simplify".into()))?;
        let segmentation = field("segmentation")?.parse::<Segmentation>()?;
        let mut entries = Vec::new();
        for line in lines {
            let (label, v) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("no tab in {line:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad count for {label}")))?;
            entries.push((label.to_string(), v));
        }
        let provenance = Provenance {
            base_gates,
            depth,
            degree,
            ensemble_size,
            num_qubits,
            seed,
            simplify,
            segmentation,
        };
        FrequencyTable::new(entries, provenance)
    }
}

/// Training ensemble settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub base_gates: Vec<GateSymbol>,
    pub depth: usize,
    pub degree: usize,
    pub ensemble_size: usize,
    pub num_qubits: usize,
    pub seed: u64,
    pub skd: SkdOptions,
    pub segmentation: Segmentation,
}

/// One lowered Haar-random training sample.
pub fn lowered_sample(seed: u64, cfg: &TrainingConfig, basis: &SkBasis) -> Result<LoweredCircuit> {
    let front = if cfg.num_qubits == 1 {
        let u = haar_random_su2(seed);
        let (a, b, g) = crate::qsd::euler_zyz(&u);
        Circuit::from_ops(1, [Op::one(GateSymbol::U3(b, a, g), 0)])?
    } else {
        qsd_decompose(&haar_random_unitary(1 << cfg.num_qubits, seed)?)?
    };
    lower_circuit(&front, basis, cfg.degree, cfg.skd)
}

/// Mean instruction counts over a Haar-random training ensemble.
pub fn learn_frequencies(cfg: &TrainingConfig) -> Result<FrequencyTable> {
    if cfg.ensemble_size == 0 {
        return Err(Error::InvalidArgument(
            "ensemble size must be at least 1".into(),
        ));
    }
    let basis = generate_basis(&cfg.base_gates, cfg.depth)?;
    learn_frequencies_with(cfg, &basis, |seed| lowered_sample(seed, cfg, &basis))
}

/// Like [`learn_frequencies`] but with a caller-provided sample generator.
pub fn learn_frequencies_with<F>(
    cfg: &TrainingConfig,
    basis: &SkBasis,
    sample: F,
) -> Result<FrequencyTable>
where
    F: Fn(u64) -> Result<LoweredCircuit> + Sync,
{
    let alphabet = Alphabet::from_basis(basis);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.ensemble_size).map(|_| rng.next_u64()).collect();
    let per_sample: Vec<BTreeMap<String, u64>> = seeds
        .par_iter()
        .map(|&s| {
            Ok(count_labels(&segment(
                &sample(s)?,
                &alphabet,
                cfg.segmentation,
            )?))
        })
        .collect::<Result<_>>()?;

    let mut totals: BTreeMap<String, u64> = BTreeMap::new();
    for counts in &per_sample {
        for (label, c) in counts {
            *totals.entry(label.clone()).or_insert(0) += c;
        }
    }
    let mean =
        |label: &str| totals.get(label).copied().unwrap_or(0) as f64 / cfg.ensemble_size as f64;
    let mut entries = vec![(CX_LABEL.to_string(), mean(CX_LABEL))];
    entries.extend(
        basis
            .non_null()
            .map(|e| (e.label().to_string(), mean(e.label()))),
    );
    let provenance = Provenance {
        base_gates: cfg.base_gates.clone(),
        depth: cfg.depth,
        degree: cfg.degree,
        ensemble_size: cfg.ensemble_size,
        num_qubits: cfg.num_qubits,
        seed: cfg.seed,
        simplify: cfg.skd.simplify,
        segmentation: cfg.segmentation,
    };
    FrequencyTable::new(entries, provenance)
}

/// Cutoff rule for [`select_dictionary`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ThresholdMode {
    /// Mean of the non-zero mean counts.
    #[default]
    Mean,
    /// The `k` most used labels beyond the mandatory ones.
    TopK(usize),
    /// Labels with mean count at least this value.
    Value(f64),
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMode::Mean => f.write_str("mean"),
            ThresholdMode::TopK(k) => write!(f, "top-{k}"),
            ThresholdMode::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mean" {
            return Ok(ThresholdMode::Mean);
        }
        if let Some(k) = s.strip_prefix("top-") {
            return k
                .parse()
                .map(ThresholdMode::TopK)
                .map_err(|_| Error::InvalidArgument(format!("bad top-k value {s:?}")));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(ThresholdMode::Value(v)),
            _ => Err(Error::InvalidArgument(format!(
                "threshold must be mean, top-K or a non-negative number, got {s:?}"
            ))),
        }
    }
}

/// The v3 instruction set.
#[derive(Clone, Debug, PartialEq)]
pub struct DictionarySelection {
    labels: Vec<String>,
    mode: String,
}

impl DictionarySelection {
    pub fn new(labels: Vec<String>) -> Self {
        Self {
            labels,
            mode: "explicit".into(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{SELECTION_HEADER}\nmode {}\n", self.mode);
        for l in &self.labels {
            out.push_str(l);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(SELECTION_HEADER) {
            return Err(Error::format("dictionary", "missing header"));
        }
        let mode = lines
            .next()
            .and_then(|l| l.strip_prefix("mode "))
            .ok_or_else(|| Error::format("dictionary", "missing mode line"))?
            .to_string();
        Ok(Self {
            labels: lines.map(String::from).collect(),
            mode,
        })
    }
}

/// Frequent labels plus the mandatory ones, in table order.
pub fn select_dictionary(
    table: &FrequencyTable,
    mode: ThresholdMode,
) -> Result<DictionarySelection> {
    if table.entries.is_empty() {
        return Err(Error::EmptyFrequencies);
    }
    let mandatory = table.mandatory();
    let chosen: Vec<&str> = match mode {
        ThresholdMode::Mean | ThresholdMode::Value(_) => {
            let threshold = match mode {
                ThresholdMode::Value(v) => v,
                _ => {
                    let nonzero: Vec<f64> = table
                        .entries
                        .iter()
                        .map(|(_, v)| *v)
                        .filter(|v| *v > 0.0)
                        .collect();
                    if nonzero.is_empty() {
                        f64::INFINITY
                    } else {
                        nonzero.iter().sum::<f64>() / nonzero.len() as f64
                    }
                }
            };
            table
                .entries
                .iter()
                .filter(|(_, v)| *v > 0.0 && *v >= threshold)
                .map(|(l, _)| l.as_str())
                .collect()
        }
        ThresholdMode::TopK(k) => {
            let mut ranked: Vec<(usize, &(String, f64))> = table
                .entries
                .iter()
                .enumerate()
                .filter(|(_, (l, v))| *v > 0.0 && !mandatory.contains(l))
                .collect();
            ranked.sort_by(|a, b| b.1 .1.total_cmp(&a.1 .1).then(a.0.cmp(&b.0)));
            ranked
                .into_iter()
                .take(k)
                .map(|(_, (l, _))| l.as_str())
                .collect()
        }
    };
    let mut labels: Vec<String> = mandatory.clone();
    for (label, _) in &table.entries {
        if !mandatory.contains(label) && chosen.contains(&label.as_str()) {
            labels.push(label.clone());
        }
    }
    Ok(DictionarySelection {
        labels,
        mode: mode.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::clifford_t_base;
    use crate::circuit::GateSymbol::{Tdg, H, T};

    fn basis3() -> SkBasis {
        generate_basis(&clifford_t_base(), 3).unwrap()
    }

    fn labels(tokens: &[String]) -> Vec<&str> {
        tokens.iter().map(String::as_str).collect()
    }

    #[test]
    fn greedy_tokenization() {
        let a = Alphabet::from_basis(&basis3());
        assert_eq!(labels(&tokenize(&[H, T, H], &a).unwrap()), ["HTH"]);
        assert_eq!(labels(&tokenize(&[T, H, T, T], &a).unwrap()), ["THT", "T"]);
        assert_eq!(labels(&tokenize(&[T, T, H, H], &a).unwrap()), ["TTH", "H"]);
        assert!(tokenize(&[], &a).unwrap().is_empty());
        assert!(tokenize(&[GateSymbol::RZ(0.1)], &a).is_err());
    }

    #[test]
    fn circuit_round_trip_flushes_at_cx() {
        let b = basis3();
        let a = Alphabet::from_basis(&b);
        let c = Circuit::from_ops(
            2,
            [
                Op::one(H, 1),
                Op::one(T, 0),
                Op::one(H, 0),
                Op::cx(0, 1),
                Op::one(Tdg, 0),
                Op::one(T, 1),
            ],
        )
        .unwrap();
        let tokens = tokenize_circuit(&c, &a).unwrap();
        let want = [
            Token::new("H", vec![1]),
            Token::new("TH", vec![0]),
            Token::new("CX", vec![0, 1]),
            Token::new("Tdg", vec![0]),
            Token::new("T", vec![1]),
        ];
        assert_eq!(tokens, want);
        let back = detokenize(&tokens, 2, &a).unwrap();
        let u1 = crate::circuit::circuit_unitary(&back).unwrap();
        let u2 = crate::circuit::circuit_unitary(&c).unwrap();
        assert!(crate::numerics::phase_aligned_distance(&u1, &u2).unwrap() < 1e-12);
    }

    #[test]
    fn reexpansion() {
        let b = basis3();
        let sel =
            DictionarySelection::new(["CX", "H", "T", "Tdg", "HTH"].map(String::from).to_vec());
        let t = [Token::new("HTH", vec![0]), Token::new("TH", vec![0])];
        let out = reexpand_unselected(&t, &sel, &b).unwrap();
        let got: Vec<&str> = out.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(got, ["HTH", "T", "H"]);
    }

    fn table(entries: &[(&str, f64)]) -> FrequencyTable {
        let provenance = Provenance {
            base_gates: clifford_t_base(),
            depth: 3,
            degree: 2,
            ensemble_size: 1,
            num_qubits: 1,
            seed: 0,
            simplify: true,
            segmentation: Segmentation::Net,
        };
        FrequencyTable::new(
            entries.iter().map(|(l, v)| (l.to_string(), *v)).collect(),
            provenance,
        )
        .unwrap()
    }

    #[test]
    fn selection_modes() {
        let t = table(&[
            ("CX", 0.0),
            ("H", 0.1),
            ("T", 1.0),
            ("Tdg", 1.0),
            ("HTH", 9.0),
            ("TH", 0.2),
            ("TTT", 0.0),
        ]);
        let sel = select_dictionary(&t, ThresholdMode::Mean).unwrap();
        assert_eq!(sel.labels(), ["CX", "H", "T", "Tdg", "HTH"]);
        let sel = select_dictionary(&t, ThresholdMode::TopK(2)).unwrap();
        assert_eq!(sel.labels(), ["CX", "H", "T", "Tdg", "HTH", "TH"]);
        let low = select_dictionary(&t, ThresholdMode::Value(0.1)).unwrap();
        let high = select_dictionary(&t, ThresholdMode::Value(0.5)).unwrap();
        assert!(high.labels().iter().all(|l| low.contains(l)));
        let back = DictionarySelection::from_text(&sel.to_text()).unwrap();
        assert_eq!(back, sel);
        assert!("top-3".parse::<ThresholdMode>().is_ok() && "x".parse::<ThresholdMode>().is_err());
    }

    #[test]
    fn learned_tables_are_deterministic() {
        let cfg = TrainingConfig {
            base_gates: clifford_t_base(),
            depth: 3,
            degree: 1,
            ensemble_size: 8,
            num_qubits: 1,
            seed: 5,
            skd: SkdOptions::default(),
            segmentation: Segmentation::Net,
        };
        let a = learn_frequencies(&cfg).unwrap();
        let b = learn_frequencies(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries().len(), 22);
        assert_eq!(FrequencyTable::from_text(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn identity_ensemble_has_zero_counts() {
        let b = basis3();
        let cfg = TrainingConfig {
            base_gates: clifford_t_base(),
            depth: 3,
            degree: 2,
            ensemble_size: 1,
            num_qubits: 1,
            seed: 0,
            skd: SkdOptions::default(),
            segmentation: Segmentation::Net,
        };
        let t = learn_frequencies_with(&cfg, &b, |_| {
            let c = Circuit::from_ops(1, [Op::one(GateSymbol::RZ(0.0), 0)])?;
            lower_circuit(&c, &b, 2, SkdOptions::default())
        })
        .unwrap();
        assert!(t.entries().iter().all(|(_, v)| *v == 0.0));
    }
}
