use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eqisa::codec::{Codebook, EncodedProgram, Variant};
use eqisa::config::{CodebookMode, RunConfig, CONFIG_ENV};
use eqisa::lossless;
use eqisa::metrics::{compression_factor, Report, ReportEntry};
use eqisa::pipeline::{read_corpus, Toolchain, BASIS_FILE};
use eqisa::qasm::{parse_qasm, qasm_byte_size, to_qasm};
use eqisa::{basis::SkBasis, Error, Result};

const LOW_CONFIDENCE_SAMPLES: usize = 30;

#[derive(Parser)]
#[command(
    name = "eqisa",
    version,
    about = "Lower quantum circuits to Clifford+T and emit compressed instruction streams"
)]
struct Cli {
    #[command(flatten)]
    opts: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override the config file.
#[derive(Args)]
struct Overrides {
    /// key = value config file
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Directory holding the basis, frequency table, dictionary and codebooks
    #[arg(long, global = true)]
    artifacts: Option<PathBuf>,
    /// Base gates, space separated
    #[arg(long, global = true)]
    base_gates: Option<String>,
    /// SK basis depth d
    #[arg(long, global = true)]
    sk_depth: Option<usize>,
    /// Solovay-Kitaev recursion degree n
    #[arg(long, global = true)]
    sk_recursion: Option<usize>,
    /// Keep adjacent inverse segments
    #[arg(long, global = true)]
    no_simplify: bool,
    /// Training samples
    #[arg(long, global = true)]
    ensemble_size: Option<usize>,
    /// Qubits per training sample
    #[arg(long, global = true)]
    training_qubits: Option<usize>,
    /// Training RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// v0, v1, v2 or v3
    #[arg(long, global = true)]
    variant: Option<String>,
    /// mean, top-K or a number
    #[arg(long, global = true)]
    threshold: Option<String>,
    /// per-gate or unitary
    #[arg(long, global = true)]
    lowering: Option<String>,
    /// net or greedy
    #[arg(long, global = true)]
    segmentation: Option<String>,
    /// trained or per-program
    #[arg(long, global = true)]
    codebooks: Option<String>,
    /// Link energy in pJ/bit
    #[arg(long, global = true)]
    pj_per_bit: Option<f64>,
    /// Measure description complexity after the lossless stage
    #[arg(long, global = true)]
    post_lossless: bool,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_text(&read_text(path)?)?,
            None => RunConfig::default(),
        };
        let pairs: [(&str, Option<String>); 13] = [
            (
                "artifacts_dir",
                self.artifacts.as_ref().map(|p| p.display().to_string()),
            ),
            ("base_gates", self.base_gates.clone()),
            ("sk_depth", self.sk_depth.map(|v| v.to_string())),
            ("sk_recursion", self.sk_recursion.map(|v| v.to_string())),
            ("ensemble_size", self.ensemble_size.map(|v| v.to_string())),
            (
                "training_qubits",
                self.training_qubits.map(|v| v.to_string()),
            ),
            ("seed", self.seed.map(|v| v.to_string())),
            ("variant", self.variant.clone()),
            ("threshold", self.threshold.clone()),
            ("lowering", self.lowering.clone()),
            ("segmentation", self.segmentation.clone()),
            ("codebooks", self.codebooks.clone()),
            ("pj_per_bit", self.pj_per_bit.map(|v| v.to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.no_simplify {
            cfg.simplify = false;
        }
        if self.post_lossless {
            cfg.post_lossless = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the SK basis
    Basis {
        /// Output file (default: <artifacts>/basis.txt)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Learn frequencies, select the dictionary and build codebooks
    Train,
    /// Lower and encode a QASM file
    Encode {
        input: PathBuf,
        /// Output .eqisa file (default: input with .eqisa extension)
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write a .eqbz compressed copy
        #[arg(long)]
        compress: bool,
    },
    /// Decode a .eqisa or .eqbz file to QASM
    Decode {
        input: PathBuf,
        /// Codebook file (default: the trained codebook for the file's variant)
        #[arg(long)]
        codebook: Option<PathBuf>,
        /// Output QASM file (default: stdout)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compress any file with the block compressor
    Compress {
        input: PathBuf,
        /// Output file (default: input with .eqbz extension)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Reverse `compress`
    Decompress {
        input: PathBuf,
        /// Output file (default: input with .eqisa extension)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Encode every .qasm file in a directory and write a CSV report
    Bench {
        corpus: PathBuf,
        /// CSV output (default: stdout)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a CSV report and print it as a table
    Report { input: PathBuf },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| io_error(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn load_toolchain(cfg: &RunConfig) -> Result<Toolchain> {
    Toolchain::load(cfg, &cfg.artifacts_dir)
}

fn codebook_path(out: &Path) -> PathBuf {
    out.with_extension("codebook")
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.opts.resolve()?;
    match cli.command {
        Command::Basis { out } => {
            let basis = Toolchain::build_basis(&cfg)?;
            let path = match out {
                Some(p) => p,
                None => {
                    fs::create_dir_all(&cfg.artifacts_dir)
                        .map_err(|e| io_error(&cfg.artifacts_dir, e))?;
                    cfg.artifacts_dir.join(BASIS_FILE)
                }
            };
            write_bytes(&path, basis.to_text().as_bytes())?;
            println!("{} elements (+ null)", basis.len() - 1);
            eprintln!("wrote {}", path.display());
        }
        Command::Train => {
            let path = cfg.artifacts_dir.join(BASIS_FILE);
            let basis = SkBasis::from_text(&read_text(&path)?)?;
            let mut cfg = cfg.clone();
            cfg.sk_depth = basis.depth();
            cfg.base_gates = basis.base_gates().to_vec();
            if cfg.ensemble_size < LOW_CONFIDENCE_SAMPLES {
                eprintln!(
                    "warning: {} training samples; frequencies are low-confidence (use at least {LOW_CONFIDENCE_SAMPLES})",
                    cfg.ensemble_size
                );
            }
            let tc = Toolchain::train_with_basis(&cfg, basis)?;
            tc.save(&cfg.artifacts_dir)?;
            println!(
                "selected {} instructions: {}",
                tc.selection().len(),
                tc.selection().labels().join(" ")
            );
            eprintln!("wrote artifacts to {}", cfg.artifacts_dir.display());
        }
        Command::Encode {
            input,
            out,
            compress,
        } => {
            let source = read_text(&input)?;
            let parsed = parse_qasm(&source)?;
            if parsed.warning_count() > 0 {
                eprintln!(
                    "warning: skipped {} measure/creg/barrier statements",
                    parsed.warning_count()
                );
            }
            let tc = load_toolchain(&cfg)?;
            let lowered = tc.lower(&parsed.circuit)?;
            let baseline = tc.encode_lowered(lowered.clone(), Variant::V0)?;
            let e = tc.encode_lowered(lowered, cfg.variant)?;
            let out = out.unwrap_or_else(|| input.with_extension("eqisa"));
            let bytes = e.program.to_bytes();
            write_bytes(&out, &bytes)?;
            if cfg.codebooks == CodebookMode::PerProgram {
                write_bytes(&codebook_path(&out), e.codebook.to_text().as_bytes())?;
            }
            let v0_bits = baseline.program.total_bits() as u64;
            let bits = e.program.total_bits() as u64;
            let qasm_bits = qasm_byte_size(&to_qasm(&e.lowered.circuit));
            println!("variant {}", cfg.variant);
            println!("tokens {}", e.tokens.len());
            println!("instruction_bits {}", e.program.instruction_bits.len());
            println!("qubit_bits {}", e.program.qubit_bits.len());
            println!("total_bits {bits}");
            println!("v0_bits {v0_bits}");
            if v0_bits > 0 {
                println!("factor_vs_v0 {}", compression_factor(bits, v0_bits)?);
            }
            println!("qasm_bits {qasm_bits}");
            println!("decomposition_error {}", e.lowered.error_bound);
            if compress {
                let block = lossless::compress(&bytes)?;
                let path = out.with_extension("eqbz");
                write_bytes(&path, &block.to_bytes())?;
                println!("lossless_bits {}", 8 * block.byte_len());
            }
            eprintln!("wrote {}", out.display());
        }
        Command::Decode {
            input,
            codebook,
            out,
        } => {
            let mut bytes = read_bytes(&input)?;
            if bytes.starts_with(b"EQBZ") {
                bytes = lossless::decompress_bytes(&bytes)?;
            }
            let program = EncodedProgram::from_bytes(&bytes)?;
            let tc = load_toolchain(&cfg)?;
            let book = codebook
                .map(|p| read_text(&p).and_then(|t| Codebook::from_text(&t)))
                .transpose()?;
            let circuit = tc.decode(&program, book.as_ref())?;
            let text = to_qasm(&circuit);
            match out {
                Some(p) => write_bytes(&p, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Command::Compress { input, out } => {
            let data = read_bytes(&input)?;
            let block = lossless::compress(&data)?;
            let out = out.unwrap_or_else(|| input.with_extension("eqbz"));
            write_bytes(&out, &block.to_bytes())?;
            println!("{} -> {} bytes", data.len(), block.byte_len());
        }
        Command::Decompress { input, out } => {
            let data = lossless::decompress_bytes(&read_bytes(&input)?)?;
            let out = out.unwrap_or_else(|| input.with_extension("eqisa"));
            write_bytes(&out, &data)?;
            println!("{} bytes", data.len());
        }
        Command::Bench { corpus, out } => {
            let sources = read_corpus(&corpus).map_err(|e| match e {
                Error::Io(io) => io_error(&corpus, io),
                other => other,
            })?;
            if sources.is_empty() {
                eprintln!("warning: no .qasm files in {}", corpus.display());
            }
            let tc = load_toolchain(&cfg)?;
            let report = tc.bench(&sources);
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            match out {
                Some(p) => write_bytes(&p, &csv)?,
                None => std::io::stdout().write_all(&csv)?,
            }
            eprint!("{}", report.to_table(cfg.post_lossless));
            let failed = report
                .entries
                .iter()
                .filter(|e| matches!(e, ReportEntry::Failed { .. }))
                .count();
            if failed > 0 && failed == report.entries.len() {
                return Err(Error::InvalidArgument(format!(
                    "all {failed} circuits failed"
                )));
            }
        }
        Command::Report { input } => {
            let report =
                Report::read_csv(fs::File::open(&input).map_err(|e| io_error(&input, e))?)?;
            report.verify()?;
            print!("{}", report.to_table(cfg.post_lossless));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
