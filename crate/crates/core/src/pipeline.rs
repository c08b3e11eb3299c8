//! End-to-end toolchain: trained artifacts, circuit encoding and decoding, and
//! per-circuit measurement for reports.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::basis::{generate_basis, SkBasis};
use crate::circuit::{Circuit, GateSymbol};
use crate::codec::{
    build_per_program, build_trained, decode_program, encode_program, Codebook, EncodedProgram,
    Variant,
};
use crate::config::{CodebookMode, RunConfig};
use crate::dictionary::{
    detokenize, learn_frequencies_with, lowered_sample, reexpand_unselected, segment,
    select_dictionary, Alphabet, DictionarySelection, FrequencyTable, Token, TrainingConfig,
    CX_LABEL,
};
use crate::error::{Error, Result};
use crate::lossless;
use crate::metrics::{RawRow, Report, ReportEntry, ReportRow};
use crate::qasm::{parse_qasm, qasm_byte_size, to_qasm};
use crate::qsd::{lower, LoweredCircuit};
use crate::skd::SkdOptions;

pub const BASIS_FILE: &str = "basis.txt";
pub const FREQUENCIES_FILE: &str = "frequencies.txt";
pub const DICTIONARY_FILE: &str = "dictionary.txt";

pub fn codebook_file(variant: Variant) -> String {
    format!("codebook-{variant}.txt")
}

pub fn training_config(cfg: &RunConfig) -> TrainingConfig {
    TrainingConfig {
        base_gates: cfg.base_gates.clone(),
        depth: cfg.sk_depth,
        degree: cfg.sk_recursion,
        ensemble_size: cfg.ensemble_size,
        num_qubits: cfg.training_qubits,
        seed: cfg.seed,
        skd: SkdOptions {
            simplify: cfg.simplify,
        },
        segmentation: cfg.segmentation,
    }
}

/// One gate per token.
pub fn gate_tokens(c: &Circuit) -> Vec<Token> {
    c.ops()
        .iter()
        .map(|op| {
            Token::new(
                if op.gate == GateSymbol::CX {
                    CX_LABEL.to_string()
                } else {
                    op.gate.mnemonic()
                },
                op.qubits.clone(),
            )
        })
        .collect()
}

/// Output of [`Toolchain::encode`].
#[derive(Clone, Debug)]
pub struct Encoded {
    pub lowered: LoweredCircuit,
    pub tokens: Vec<Token>,
    pub codebook: Codebook,
    pub program: EncodedProgram,
}

/// Basis, learned frequencies, selected dictionary and the trained codebooks.
#[derive(Clone, Debug)]
pub struct Toolchain {
    config: RunConfig,
    basis: SkBasis,
    table: FrequencyTable,
    selection: DictionarySelection,
    codebooks: Vec<Codebook>,
}

impl Toolchain {
    pub fn build_basis(cfg: &RunConfig) -> Result<SkBasis> {
        cfg.validate()?;
        generate_basis(&cfg.base_gates, cfg.sk_depth)
    }

    pub fn train(cfg: &RunConfig) -> Result<Self> {
        Self::train_with_basis(cfg, Self::build_basis(cfg)?)
    }

    pub fn train_with_basis(cfg: &RunConfig, basis: SkBasis) -> Result<Self> {
        cfg.validate()?;
        let tc = training_config(cfg);
        let table = learn_frequencies_with(&tc, &basis, |seed| lowered_sample(seed, &tc, &basis))?;
        let selection = select_dictionary(&table, cfg.threshold)?;
        Self::from_parts(cfg, basis, table, selection)
    }

    pub fn from_parts(
        cfg: &RunConfig,
        basis: SkBasis,
        table: FrequencyTable,
        selection: DictionarySelection,
    ) -> Result<Self> {
        cfg.validate()?;
        let p = table.provenance();
        if p.depth != basis.depth() || p.base_gates != basis.base_gates() {
            return Err(Error::InvalidArgument(format!(
                "frequency table was learned at depth {} but the basis has depth {}",
                p.depth,
                basis.depth()
            )));
        }
        if basis.depth() != cfg.sk_depth || basis.base_gates() != cfg.base_gates.as_slice() {
            return Err(Error::InvalidArgument(format!(
                "basis depth {} does not match sk_depth {}",
                basis.depth(),
                cfg.sk_depth
            )));
        }
        for label in selection.labels() {
            if label != CX_LABEL && basis.index_of(label).is_none() {
                return Err(Error::UnknownToken(label.clone()));
            }
        }
        let codebooks = Variant::ALL
            .iter()
            .map(|&v| build_trained(&table, v, &basis, Some(&selection)))
            .collect::<Result<_>>()?;
        Ok(Self {
            config: cfg.clone(),
            basis,
            table,
            selection,
            codebooks,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn basis(&self) -> &SkBasis {
        &self.basis
    }

    pub fn table(&self) -> &FrequencyTable {
        &self.table
    }

    pub fn selection(&self) -> &DictionarySelection {
        &self.selection
    }

    /// Trained codebook for a variant.
    pub fn codebook(&self, variant: Variant) -> &Codebook {
        &self.codebooks[variant.as_byte() as usize]
    }

    /// Writes every artifact into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(BASIS_FILE), self.basis.to_text())?;
        fs::write(dir.join(FREQUENCIES_FILE), self.table.to_text())?;
        fs::write(dir.join(DICTIONARY_FILE), self.selection.to_text())?;
        for v in Variant::ALL {
            fs::write(dir.join(codebook_file(v)), self.codebook(v).to_text())?;
        }
        Ok(())
    }

    /// Reads the basis, table and selection from `dir` and rebuilds the codebooks.
    pub fn load(cfg: &RunConfig, dir: &Path) -> Result<Self> {
        let read = |name: &str| -> Result<String> {
            let path: PathBuf = dir.join(name);
            fs::read_to_string(&path).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", path.display()),
                ))
            })
        };
        let basis = SkBasis::from_text(&read(BASIS_FILE)?)?;
        let table = FrequencyTable::from_text(&read(FREQUENCIES_FILE)?)?;
        let selection = DictionarySelection::from_text(&read(DICTIONARY_FILE)?)?;
        let mut cfg = cfg.clone();
        cfg.sk_depth = basis.depth();
        cfg.base_gates = basis.base_gates().to_vec();
        Self::from_parts(&cfg, basis, table, selection)
    }

    pub fn lower(&self, c: &Circuit) -> Result<LoweredCircuit> {
        lower(
            c,
            self.config.lowering,
            &self.basis,
            self.config.sk_recursion,
            SkdOptions {
                simplify: self.config.simplify,
            },
        )
    }

    /// Instruction stream of a lowered circuit for one variant.
    pub fn tokens(&self, lowered: &LoweredCircuit, variant: Variant) -> Result<Vec<Token>> {
        match variant {
            Variant::V0 | Variant::V1 => Ok(gate_tokens(&lowered.circuit)),
            Variant::V2 => segment(
                lowered,
                &Alphabet::from_basis(&self.basis),
                self.config.segmentation,
            ),
            Variant::V3 => {
                let v2 = segment(
                    lowered,
                    &Alphabet::from_basis(&self.basis),
                    self.config.segmentation,
                )?;
                reexpand_unselected(&v2, &self.selection, &self.basis)
            }
        }
    }

    /// Codebook used to encode `tokens` under the configured mode.
    /// v0 is always the fixed-width code over CX and the base gates.
    pub fn codebook_for(&self, tokens: &[Token], variant: Variant) -> Result<Codebook> {
        if variant == Variant::V0
            || self.config.codebooks == CodebookMode::Trained
            || tokens.is_empty()
        {
            return Ok(self.codebook(variant).clone());
        }
        build_per_program(tokens, variant)
    }

    pub fn encode_lowered(&self, lowered: LoweredCircuit, variant: Variant) -> Result<Encoded> {
        let tokens = self.tokens(&lowered, variant)?;
        let codebook = self.codebook_for(&tokens, variant)?;
        let program = encode_program(&tokens, &codebook, lowered.circuit.num_qubits())?;
        Ok(Encoded {
            lowered,
            tokens,
            codebook,
            program,
        })
    }

    pub fn encode(&self, c: &Circuit, variant: Variant) -> Result<Encoded> {
        self.encode_lowered(self.lower(c)?, variant)
    }

    /// Decodes back to the lowered circuit. Without an explicit codebook the
    /// trained one for the program's variant is used.
    pub fn decode(&self, program: &EncodedProgram, codebook: Option<&Codebook>) -> Result<Circuit> {
        let book = codebook.unwrap_or_else(|| self.codebook(program.header.variant));
        let tokens = decode_program(program, book)?;
        detokenize(
            &tokens,
            program.header.num_qubits as usize,
            &Alphabet::from_basis(&self.basis),
        )
    }

    /// Raw report columns for one QASM source.
    pub fn measure(&self, name: &str, source: &str) -> Result<RawRow> {
        let parsed = parse_qasm(source)?;
        let lowered = self.lower(&parsed.circuit)?;
        let c = &lowered.circuit;
        let mut row = RawRow {
            name: name.to_string(),
            num_qubits: c.num_qubits() as u64,
            depth: c.depth() as u64,
            source_qasm_bits: qasm_byte_size(source),
            qasm_bits: qasm_byte_size(&to_qasm(c)),
            decomposition_error: lowered.error_bound,
            ..RawRow::default()
        };
        for v in Variant::ALL {
            let e = self.encode_lowered(lowered.clone(), v)?;
            row.bits[v.as_byte() as usize] = e.program.total_bits() as u64;
            row.lossless_bytes[v.as_byte() as usize] =
                lossless::compress(&e.program.to_bytes())?.byte_len() as u64;
        }
        Ok(row)
    }

    /// Measures every `(name, source)` pair in parallel; failures become
    /// error rows.
    pub fn bench(&self, sources: &[(String, String)]) -> Report {
        let mut report = Report::new(self.config.pj_per_bit, self.config.codebooks.to_string());
        report.entries = sources
            .par_iter()
            .map(|(name, text)| {
                match self
                    .measure(name, text)
                    .and_then(|raw| ReportRow::derive(raw, self.config.pj_per_bit))
                {
                    Ok(row) => ReportEntry::Ok(row),
                    Err(e) => ReportEntry::Failed {
                        name: name.clone(),
                        error: e.to_string(),
                    },
                }
            })
            .collect();
        report
    }
}

/// `(file stem, contents)` of every `.qasm` file in `dir`, sorted by name.
pub fn read_corpus(dir: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "qasm") {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            out.push((stem, fs::read_to_string(&path)?));
        }
    }
    out.sort();
    Ok(out)
}
