//! Run configuration as a flat `key = value` file.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::basis::{clifford_t_base, validate_base, MAX_DEPTH};
use crate::circuit::GateSymbol;
use crate::codec::Variant;
use crate::dictionary::{Segmentation, ThresholdMode};
use crate::error::{Error, Result};
use crate::metrics::DEFAULT_PJ_PER_BIT;
use crate::qsd::Lowering;

pub const CONFIG_ENV: &str = "EQISA_CONFIG";
pub const MAX_RECURSION: usize = 8;
pub const MAX_TRAINING_QUBITS: usize = 4;

/// Where encode/decode codebooks come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CodebookMode {
    /// Global codebooks trained on the Haar ensemble.
    #[default]
    Trained,
    /// Codebooks built from each program's own counts.
    PerProgram,
}

impl fmt::Display for CodebookMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodebookMode::Trained => "trained",
            CodebookMode::PerProgram => "per-program",
        })
    }
}

impl FromStr for CodebookMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trained" => Ok(CodebookMode::Trained),
            "per-program" => Ok(CodebookMode::PerProgram),
            _ => Err(Error::InvalidArgument(format!(
                "unknown codebook mode {s:?} (expected trained or per-program)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub base_gates: Vec<GateSymbol>,
    pub sk_depth: usize,
    pub sk_recursion: usize,
    pub simplify: bool,
    pub ensemble_size: usize,
    pub training_qubits: usize,
    pub seed: u64,
    pub variant: Variant,
    pub threshold: ThresholdMode,
    pub lowering: Lowering,
    pub segmentation: Segmentation,
    pub codebooks: CodebookMode,
    pub pj_per_bit: f64,
    pub post_lossless: bool,
    pub artifacts_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            base_gates: clifford_t_base(),
            sk_depth: 5,
            sk_recursion: 4,
            simplify: true,
            ensemble_size: 200,
            training_qubits: 1,
            seed: 42,
            variant: Variant::V3,
            threshold: ThresholdMode::Mean,
            lowering: Lowering::PerGate,
            segmentation: Segmentation::Net,
            codebooks: CodebookMode::Trained,
            pj_per_bit: DEFAULT_PJ_PER_BIT,
            post_lossless: false,
            artifacts_dir: PathBuf::from("eqisa-artifacts"),
        }
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::InvalidArgument(format!(
            "expected true or false, got {v:?}"
        ))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse {v:?}")))
}

impl RunConfig {
    pub const KEYS: [&'static str; 15] = [
        "base_gates",
        "sk_depth",
        "sk_recursion",
        "simplify",
        "ensemble_size",
        "training_qubits",
        "seed",
        "variant",
        "threshold",
        "lowering",
        "segmentation",
        "codebooks",
        "pj_per_bit",
        "post_lossless",
        "artifacts_dir",
    ];

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "base_gates" => {
                self.base_gates = v
                    .split_whitespace()
                    .map(GateSymbol::from_mnemonic)
                    .collect::<Result<_>>()?;
            }
            "sk_depth" => self.sk_depth = parse_num(key, v)?,
            "sk_recursion" => self.sk_recursion = parse_num(key, v)?,
            "simplify" => self.simplify = parse_bool(v)?,
            "ensemble_size" => self.ensemble_size = parse_num(key, v)?,
            "training_qubits" => self.training_qubits = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "variant" => self.variant = v.parse()?,
            "threshold" => self.threshold = v.parse()?,
            "lowering" => self.lowering = v.parse()?,
            "segmentation" => self.segmentation = v.parse()?,
            "codebooks" => self.codebooks = v.parse()?,
            "pj_per_bit" => self.pj_per_bit = parse_num(key, v)?,
            "post_lossless" => self.post_lossless = parse_bool(v)?,
            "artifacts_dir" => self.artifacts_dir = PathBuf::from(v),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key {key:?}"
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        validate_base(&self.base_gates)?;
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(1..=MAX_DEPTH).contains(&self.sk_depth) {
            return bad(format!(
                "sk_depth must be in 1..={MAX_DEPTH}, got {}",
                self.sk_depth
            ));
        }
        if self.sk_recursion > MAX_RECURSION {
            return bad(format!(
                "sk_recursion must be at most {MAX_RECURSION}, got {}",
                self.sk_recursion
            ));
        }
        if self.ensemble_size == 0 {
            return bad("ensemble_size must be at least 1".into());
        }
        if !(1..=MAX_TRAINING_QUBITS).contains(&self.training_qubits) {
            return bad(format!(
                "training_qubits must be in 1..={MAX_TRAINING_QUBITS}, got {}",
                self.training_qubits
            ));
        }
        if !(self.pj_per_bit.is_finite() && self.pj_per_bit >= 0.0) {
            return bad(format!(
                "pj_per_bit must be a non-negative number, got {}",
                self.pj_per_bit
            ));
        }
        if let ThresholdMode::Value(v) = self.threshold {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("threshold must be non-negative, got {v}"));
            }
        }
        if self.artifacts_dir.as_os_str().is_empty() {
            return bad("artifacts_dir must not be empty".into());
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "base_gates" => self
                .base_gates
                .iter()
                .map(GateSymbol::mnemonic)
                .collect::<Vec<_>>()
                .join(" "),
            "sk_depth" => self.sk_depth.to_string(),
            "sk_recursion" => self.sk_recursion.to_string(),
            "simplify" => self.simplify.to_string(),
            "ensemble_size" => self.ensemble_size.to_string(),
            "training_qubits" => self.training_qubits.to_string(),
            "seed" => self.seed.to_string(),
            "variant" => self.variant.to_string(),
            "threshold" => self.threshold.to_string(),
            "lowering" => self.lowering.to_string(),
            "segmentation" => self.segmentation.to_string(),
            "codebooks" => self.codebooks.to_string(),
            "pj_per_bit" => self.pj_per_bit.to_string(),
            "post_lossless" => self.post_lossless.to_string(),
            "artifacts_dir" => self.artifacts_dir.display().to_string(),
            _ => unreachable!("KEYS lists every field"),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    /// Defaults overridden by the file's keys, then validated.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            cfg.set(k.trim(), v).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(
            (cfg.sk_depth, cfg.sk_recursion, cfg.ensemble_size),
            (5, 4, 200)
        );
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn overrides_round_trip() {
        let text = "# test\nsk_depth = 3\nthreshold = top-10\nvariant = v1\ncodebooks = per-program\npj_per_bit = 0.3\nlowering = unitary\nbase_gates = H T Tdg\n";
        let cfg = RunConfig::from_text(text).unwrap();
        assert_eq!(cfg.sk_depth, 3);
        assert_eq!(cfg.threshold, ThresholdMode::TopK(10));
        assert_eq!(cfg.codebooks, CodebookMode::PerProgram);
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            "sk_depth = 0",
            "sk_depth = 11",
            "ensemble_size = 0",
            "pj_per_bit = -1",
            "colour = red",
            "variant = v9",
            "base_gates = H T",
            "nonsense",
        ] {
            assert!(RunConfig::from_text(text).is_err(), "{text}");
        }
    }
}
