//! Compression factors, link energy, complexity measures, and the benchmark
//! report.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::circuit::Circuit;
use crate::codec::EncodedProgram;
use crate::error::{Error, Result};

pub const DEFAULT_PJ_PER_BIT: f64 = 2.46;

pub fn compression_factor(encoded_bits: u64, baseline_bits: u64) -> Result<f64> {
    if baseline_bits == 0 {
        return Err(Error::InvalidArgument("baseline has zero bits".into()));
    }
    Ok(encoded_bits as f64 / baseline_bits as f64)
}

/// Joules to move `bits` over a link costing `pj_per_bit`.
pub fn energy_estimate(bits: u64, pj_per_bit: f64) -> Result<f64> {
    if !(pj_per_bit.is_finite() && pj_per_bit >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "energy rate {pj_per_bit} must be a non-negative number"
        )));
    }
    Ok(bits as f64 * pj_per_bit * 1e-12)
}

/// Qubits × serial depth.
pub fn circuit_complexity(c: &Circuit) -> u64 {
    (c.num_qubits() * c.depth()) as u64
}

pub fn description_complexity(p: &EncodedProgram) -> u64 {
    p.total_bits() as u64
}

pub fn total_complexity(c: &Circuit, p: &EncodedProgram) -> u64 {
    circuit_complexity(c) + description_complexity(p)
}

/// Raw measurements for one circuit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawRow {
    pub name: String,
    pub num_qubits: u64,
    /// Serial depth of the lowered circuit.
    pub depth: u64,
    /// Comment-stripped source QASM, in bits.
    pub source_qasm_bits: u64,
    /// The lowered circuit printed as QASM, in bits.
    pub qasm_bits: u64,
    /// Payload bits per variant (headers excluded).
    pub bits: [u64; 4],
    /// `.eqbz` size of each variant's `.eqisa` file.
    pub lossless_bytes: [u64; 4],
    pub decomposition_error: f64,
}

/// Raw measurements plus every derived column.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub raw: RawRow,
    pub factors: [f64; 4],
    pub qasm_ratio_v3: f64,
    pub qasm_ratio_v3_lossless: f64,
    pub energy_qasm_j: f64,
    pub energy_v0_j: f64,
    pub energy_v3_j: f64,
    pub energy_v3_lossless_j: f64,
    pub circuit_complexity: u64,
    pub description_complexity: u64,
    pub description_complexity_lossless: u64,
    pub total_complexity: u64,
    pub total_complexity_lossless: u64,
}

impl ReportRow {
    pub fn derive(raw: RawRow, pj_per_bit: f64) -> Result<Self> {
        let v0 = raw.bits[0];
        let factor = |b: u64| {
            if v0 == 0 {
                Ok(1.0)
            } else {
                compression_factor(b, v0)
            }
        };
        let factors = [
            factor(raw.bits[0])?,
            factor(raw.bits[1])?,
            factor(raw.bits[2])?,
            factor(raw.bits[3])?,
        ];
        let v3_lossless_bits = 8 * raw.lossless_bytes[3];
        let circuit = raw.num_qubits * raw.depth;
        Ok(Self {
            factors,
            qasm_ratio_v3: compression_factor(raw.bits[3], raw.qasm_bits)?,
            qasm_ratio_v3_lossless: compression_factor(v3_lossless_bits, raw.qasm_bits)?,
            energy_qasm_j: energy_estimate(raw.qasm_bits, pj_per_bit)?,
            energy_v0_j: energy_estimate(raw.bits[0], pj_per_bit)?,
            energy_v3_j: energy_estimate(raw.bits[3], pj_per_bit)?,
            energy_v3_lossless_j: energy_estimate(v3_lossless_bits, pj_per_bit)?,
            circuit_complexity: circuit,
            description_complexity: raw.bits[3],
            description_complexity_lossless: v3_lossless_bits,
            total_complexity: circuit + raw.bits[3],
            total_complexity_lossless: circuit + v3_lossless_bits,
            raw,
        })
    }
}

/// One line per circuit; failures keep their name and message.
#[derive(Clone, Debug, PartialEq)]
pub enum ReportEntry {
    Ok(ReportRow),
    Failed { name: String, error: String },
}

impl ReportEntry {
    pub fn name(&self) -> &str {
        match self {
            ReportEntry::Ok(r) => &r.raw.name,
            ReportEntry::Failed { name, .. } => name,
        }
    }
}

pub const CSV_COLUMNS: [&str; 31] = [
    "name",
    "num_qubits",
    "depth",
    "source_qasm_bits",
    "qasm_bits",
    "v0_bits",
    "v1_bits",
    "v2_bits",
    "v3_bits",
    "v0_lossless_bytes",
    "v1_lossless_bytes",
    "v2_lossless_bytes",
    "v3_lossless_bytes",
    "factor_v0",
    "factor_v1",
    "factor_v2",
    "factor_v3",
    "qasm_ratio_v3",
    "qasm_ratio_v3_lossless",
    "energy_qasm_j",
    "energy_v0_j",
    "energy_v3_j",
    "energy_v3_lossless_j",
    "circuit_complexity",
    "description_complexity",
    "description_complexity_lossless",
    "total_complexity",
    "total_complexity_lossless",
    "decomposition_error",
    "codebooks",
    "error",
];

/// Benchmark report with the settings needed to recompute it.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub pj_per_bit: f64,
    /// `trained` or `per-program`.
    pub codebooks: String,
    pub entries: Vec<ReportEntry>,
}

impl Report {
    pub fn new(pj_per_bit: f64, codebooks: impl Into<String>) -> Self {
        Self {
            pj_per_bit,
            codebooks: codebooks.into(),
            entries: Vec::new(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.entries.iter().filter_map(|e| match e {
            ReportEntry::Ok(r) => Some(r),
            ReportEntry::Failed { .. } => None,
        })
    }

    /// Checks every derived column against recomputation from the raw ones.
    pub fn verify(&self) -> Result<()> {
        for row in self.rows() {
            let again = ReportRow::derive(row.raw.clone(), self.pj_per_bit)?;
            if &again != row {
                return Err(Error::InvalidArgument(format!(
                    "row {} does not match its raw columns",
                    row.raw.name
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# pj_per_bit {}", self.pj_per_bit)?;
        writeln!(w, "# codebooks {}", self.codebooks)?;
        writeln!(
            w,
            "# qasm baseline: 8 x bytes of the lowered circuit printed as QASM, comments stripped"
        )?;
        writeln!(w, "# variant bits exclude the 28-byte stream header; lossless bytes are whole .eqbz files")?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_COLUMNS).map_err(csv_error)?;
        for e in &self.entries {
            let record: Vec<String> = match e {
                ReportEntry::Ok(r) => {
                    let raw = &r.raw;
                    let mut v = vec![
                        raw.name.clone(),
                        raw.num_qubits.to_string(),
                        raw.depth.to_string(),
                    ];
                    v.extend([raw.source_qasm_bits, raw.qasm_bits].map(|x| x.to_string()));
                    v.extend(raw.bits.map(|x| x.to_string()));
                    v.extend(raw.lossless_bytes.map(|x| x.to_string()));
                    v.extend(r.factors.map(|x| x.to_string()));
                    v.extend(
                        [
                            r.qasm_ratio_v3,
                            r.qasm_ratio_v3_lossless,
                            r.energy_qasm_j,
                            r.energy_v0_j,
                            r.energy_v3_j,
                            r.energy_v3_lossless_j,
                        ]
                        .map(|x| x.to_string()),
                    );
                    v.extend(
                        [
                            r.circuit_complexity,
                            r.description_complexity,
                            r.description_complexity_lossless,
                            r.total_complexity,
                            r.total_complexity_lossless,
                        ]
                        .map(|x| x.to_string()),
                    );
                    v.push(raw.decomposition_error.to_string());
                    v.push(self.codebooks.clone());
                    v.push(String::new());
                    v
                }
                ReportEntry::Failed { name, error } => {
                    let mut v = vec![String::new(); CSV_COLUMNS.len()];
                    v[0] = name.clone();
                    v[CSV_COLUMNS.len() - 2] = self.codebooks.clone();
                    v[CSV_COLUMNS.len() - 1] = error.clone();
                    v
                }
            };
            out.write_record(&record).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let meta = |key: &str| {
            text.lines()
                .filter_map(|l| l.strip_prefix("# "))
                .find_map(|l| l.strip_prefix(key).and_then(|v| v.strip_prefix(' ')))
                .map(str::to_string)
                .ok_or_else(|| Error::format("report", format!("missing {key}")))
        };
        let pj_per_bit: f64 = meta("pj_per_bit")?
            .parse()
            .map_err(|_| Error::format("report", "bad pj_per_bit"))?;
        let codebooks = meta("codebooks")?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = rdr.headers().map_err(csv_error)?.clone();
        if header.iter().ne(CSV_COLUMNS) {
            return Err(Error::format("report", "unexpected header row"));
        }
        let mut report = Report::new(pj_per_bit, codebooks);
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let error = rec.get(CSV_COLUMNS.len() - 1).unwrap_or("");
            if !error.is_empty() {
                report.entries.push(ReportEntry::Failed {
                    name: rec[0].to_string(),
                    error: error.to_string(),
                });
                continue;
            }
            let int = |i: usize| {
                rec[i].parse::<u64>().map_err(|_| {
                    Error::format("report", format!("bad {} {:?}", CSV_COLUMNS[i], &rec[i]))
                })
            };
            let float = |i: usize| {
                rec[i].parse::<f64>().map_err(|_| {
                    Error::format("report", format!("bad {} {:?}", CSV_COLUMNS[i], &rec[i]))
                })
            };
            let raw = RawRow {
                name: rec[0].to_string(),
                num_qubits: int(1)?,
                depth: int(2)?,
                source_qasm_bits: int(3)?,
                qasm_bits: int(4)?,
                bits: [int(5)?, int(6)?, int(7)?, int(8)?],
                lossless_bytes: [int(9)?, int(10)?, int(11)?, int(12)?],
                decomposition_error: float(28)?,
            };
            report.entries.push(ReportEntry::Ok(ReportRow {
                raw,
                factors: [float(13)?, float(14)?, float(15)?, float(16)?],
                qasm_ratio_v3: float(17)?,
                qasm_ratio_v3_lossless: float(18)?,
                energy_qasm_j: float(19)?,
                energy_v0_j: float(20)?,
                energy_v3_j: float(21)?,
                energy_v3_lossless_j: float(22)?,
                circuit_complexity: int(23)?,
                description_complexity: int(24)?,
                description_complexity_lossless: int(25)?,
                total_complexity: int(26)?,
                total_complexity_lossless: int(27)?,
            }));
        }
        Ok(report)
    }

    /// Fixed-width summary; `post_lossless` picks which description
    /// complexity feeds the total.
    pub fn to_table(&self, post_lossless: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>3} {:>7} {:>9} {:>8} {:>6} {:>6} {:>6} {:>8} {:>9} {:>9}",
            "circuit",
            "n",
            "depth",
            "qasm",
            "v0",
            "v1/v0",
            "v2/v0",
            "v3/v0",
            "v3+lz",
            "C_circ",
            "C_total"
        );
        for e in &self.entries {
            match e {
                ReportEntry::Ok(r) => {
                    let total = if post_lossless {
                        r.total_complexity_lossless
                    } else {
                        r.total_complexity
                    };
                    let _ = writeln!(
                        out,
                        "{:<16} {:>3} {:>7} {:>9} {:>8} {:>6.3} {:>6.3} {:>6.3} {:>8} {:>9} {:>9}",
                        r.raw.name,
                        r.raw.num_qubits,
                        r.raw.depth,
                        r.raw.qasm_bits,
                        r.raw.bits[0],
                        r.factors[1],
                        r.factors[2],
                        r.factors[3],
                        8 * r.raw.lossless_bytes[3],
                        r.circuit_complexity,
                        total
                    );
                }
                ReportEntry::Failed { name, error } => {
                    let _ = writeln!(out, "{name:<16} failed: {error}");
                }
            }
        }
        let _ = writeln!(
            out,
            "energy rate {} pJ/bit; codebooks {}",
            self.pj_per_bit, self.codebooks
        );
        out
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::format("report", e.to_string())
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateSymbol, Op};

    #[test]
    fn factor_examples() {
        assert_eq!(compression_factor(59, 80).unwrap(), 0.7375);
        assert_eq!(compression_factor(80, 80).unwrap(), 1.0);
        assert_eq!(compression_factor(45, 80).unwrap(), 0.5625);
        assert!(compression_factor(1, 0).is_err());
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_estimate(0, 2.46).unwrap(), 0.0);
        let e = energy_estimate(1_000_000, 2.46).unwrap();
        assert!((e - 2.46e-6).abs() <= 2.0 * f64::EPSILON * 2.46e-6);
        assert!(energy_estimate(1, -1.0).is_err());
        let a = energy_estimate(300, 0.3).unwrap();
        let b = energy_estimate(600, 0.3).unwrap();
        assert!((2.0 * a - b).abs() <= f64::EPSILON * b);
    }

    #[test]
    fn complexity_examples() {
        let c = Circuit::from_ops(1, (0..40).map(|_| Op::one(GateSymbol::T, 0))).unwrap();
        assert_eq!(circuit_complexity(&c), 40);
        assert_eq!(circuit_complexity(&Circuit::new(2).unwrap()), 0);
        let c = Circuit::from_ops(3, (0..10).map(|i| Op::one(GateSymbol::H, i % 3))).unwrap();
        assert_eq!(circuit_complexity(&c), 30);
    }

    fn sample_report() -> Report {
        let mut report = Report::new(DEFAULT_PJ_PER_BIT, "trained");
        for (i, name) in ["ghz_2", "qft_3"].iter().enumerate() {
            let raw = RawRow {
                name: name.to_string(),
                num_qubits: 2 + i as u64,
                depth: 17 + 5 * i as u64,
                source_qasm_bits: 400,
                qasm_bits: 1234 + i as u64,
                bits: [80, 59, 44, 45],
                lossless_bytes: [40, 39, 37, 36],
                decomposition_error: 0.1 / 3.0,
            };
            report.entries.push(ReportEntry::Ok(
                ReportRow::derive(raw, DEFAULT_PJ_PER_BIT).unwrap(),
            ));
        }
        report.entries.push(ReportEntry::Failed {
            name: "bad_2".into(),
            error: "parse error, line 3".into(),
        });
        report
    }

    #[test]
    fn report_csv_round_trip_and_verification() {
        let report = sample_report();
        report.verify().unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let back = Report::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, report);
        back.verify().unwrap();

        let mut tampered = report.clone();
        if let ReportEntry::Ok(r) = &mut tampered.entries[0] {
            r.total_complexity += 1;
        }
        assert!(tampered.verify().is_err());
        assert!(report.to_table(false).contains("failed"));
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
        let r = spearman(
            &[2.0, 2.0, 3.0, 3.0, 4.0, 4.0],
            &[1.0, 5.0, 2.0, 6.0, 9.0, 7.0],
        )
        .unwrap();
        assert!(r > 0.0);
    }
}
