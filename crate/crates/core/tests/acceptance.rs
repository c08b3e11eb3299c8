use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqisa::basis::{clifford_t_base, generate_basis};
use eqisa::circuit::{circuit_unitary, GateSymbol};
use eqisa::codec::{
    build_huffman, build_per_program, build_v0, decode_program, encode_program, Codebook,
    EncodedProgram, Variant,
};
use eqisa::config::{CodebookMode, RunConfig};
use eqisa::dictionary::{
    count_labels, learn_frequencies, reexpand_unselected, select_dictionary, DictionarySelection,
    ThresholdMode, Token, CX_LABEL,
};
use eqisa::lossless::{compress, compress_bytes, decompress, decompress_bytes};
use eqisa::metrics::{compression_factor, spearman, Report};
use eqisa::numerics::{haar_random_su2, haar_random_unitary, phase_aligned_distance};
use eqisa::pipeline::{read_corpus, training_config, Toolchain};
use eqisa::qsd::qsd_decompose;
use eqisa::skd::solovay_kitaev;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    read_corpus(&dir).expect("fixture corpus")
}

fn toolchain(mode: CodebookMode) -> &'static Toolchain {
    static TRAINED: OnceLock<Toolchain> = OnceLock::new();
    static PER_PROGRAM: OnceLock<Toolchain> = OnceLock::new();
    let cell = match mode {
        CodebookMode::Trained => &TRAINED,
        CodebookMode::PerProgram => &PER_PROGRAM,
    };
    cell.get_or_init(|| {
        let cfg = RunConfig {
            codebooks: mode,
            ..RunConfig::default()
        };
        Toolchain::train(&cfg).expect("default training")
    })
}

fn tokens_1q(counts: &[(&str, usize)]) -> Vec<Token> {
    counts
        .iter()
        .flat_map(|(l, n)| std::iter::repeat_with(|| Token::new(*l, vec![0])).take(*n))
        .collect()
}

fn freqs(table: &[(&str, f64)]) -> Vec<(String, f64)> {
    table.iter().map(|(l, w)| (l.to_string(), *w)).collect()
}

fn round_trip(tokens: &[Token], book: &Codebook, n: usize) -> Result<EncodedProgram, String> {
    let p = encode_program(tokens, book, n).map_err(|e| e.to_string())?;
    let back = EncodedProgram::from_bytes(&p.to_bytes()).map_err(|e| e.to_string())?;
    let decoded = decode_program(&back, book).map_err(|e| e.to_string())?;
    check(decoded == tokens, || "decoded stream differs".into())?;
    Ok(p)
}

fn criterion_1() -> Outcome {
    let v0_book =
        build_v0(&["CX", "H", "T", "Tdg"].map(String::from)).map_err(|e| e.to_string())?;
    let stream = tokens_1q(&[("H", 21), ("T", 10), ("Tdg", 9)]);
    let v0 = round_trip(&stream, &v0_book, 1)?;
    check(
        v0.instruction_bits.len() == 80 && v0.qubit_bits.is_empty(),
        || {
            format!(
                "v0 {} + {} bits, expected 80 + 0",
                v0.instruction_bits.len(),
                v0.qubit_bits.len()
            )
        },
    )?;

    let v1_book = build_huffman(
        &freqs(&[("H", 21.0), ("T", 10.0), ("Tdg", 9.0)]),
        Variant::V1,
        "fixture",
    )
    .map_err(|e| e.to_string())?;
    let v1 = round_trip(&stream, &v1_book, 1)?;
    let f1 = compression_factor(v1.total_bits() as u64, 80).map_err(|e| e.to_string())?;
    check(v1.total_bits() == 59 && f1 == 0.7375, || {
        format!("v1 {} bits, factor {f1}", v1.total_bits())
    })?;

    let v2_counts = [("HTH", 5), ("HTdgH", 5), ("T", 4), ("Tdg", 4), ("TH", 1)];
    let v2_stream = tokens_1q(&v2_counts);
    let v2_table: Vec<(String, f64)> = v2_counts
        .iter()
        .map(|(l, n)| (l.to_string(), *n as f64))
        .collect();
    let v2_book = build_huffman(&v2_table, Variant::V2, "fixture").map_err(|e| e.to_string())?;
    let v2 = round_trip(&v2_stream, &v2_book, 1)?;
    check(v2.total_bits() == 43 && v2.total_bits() <= 44, || {
        format!("v2 {} bits", v2.total_bits())
    })?;

    let basis = generate_basis(&clifford_t_base(), 3).map_err(|e| e.to_string())?;
    let selection = DictionarySelection::new(
        ["CX", "H", "T", "Tdg", "HTH", "HTdgH"]
            .map(String::from)
            .to_vec(),
    );
    let v3_stream =
        reexpand_unselected(&v2_stream, &selection, &basis).map_err(|e| e.to_string())?;
    let expected: BTreeMap<String, u64> =
        [("H", 1), ("HTH", 5), ("HTdgH", 5), ("T", 5), ("Tdg", 4)]
            .map(|(l, n)| (l.to_string(), n))
            .into();
    check(count_labels(&v3_stream) == expected, || {
        format!("re-expanded counts {:?}", count_labels(&v3_stream))
    })?;
    let v3_table: Vec<(String, f64)> = expected
        .iter()
        .map(|(l, n)| (l.clone(), *n as f64))
        .collect();
    let v3_book = build_huffman(&v3_table, Variant::V3, "fixture").map_err(|e| e.to_string())?;
    let v3 = round_trip(&v3_stream, &v3_book, 1)?;
    check(v3.total_bits() <= 45, || {
        format!("v3 {} bits", v3.total_bits())
    })?;
    Ok(format!(
        "v0 80, v1 59 (factor 0.7375), v2 {} <= 44, v3 {} <= 45",
        v2.total_bits(),
        v3.total_bits()
    ))
}

/// Cheapest prefix code by exhaustive search over non-decreasing length
/// vectors (weights sorted descending) that satisfy Kraft's inequality.
fn optimal_prefix_cost(weights: &[u64]) -> u64 {
    let mut w = weights.to_vec();
    w.sort_unstable_by(|a, b| b.cmp(a));
    if w.len() == 1 {
        return w[0];
    }
    let max_len = w.len() - 1;
    let unit = 1u64 << max_len;
    #[allow(clippy::too_many_arguments)]
    fn go(
        w: &[u64],
        i: usize,
        min_len: usize,
        max_len: usize,
        room: u64,
        unit: u64,
        cost: u64,
        best: &mut u64,
    ) {
        if cost >= *best {
            return;
        }
        if i == w.len() {
            *best = cost;
            return;
        }
        for len in min_len..=max_len {
            let used = unit >> len;
            if used > room {
                continue;
            }
            go(
                w,
                i + 1,
                len,
                max_len,
                room - used,
                unit,
                cost + w[i] * len as u64,
                best,
            );
        }
    }
    let mut best = u64::MAX;
    go(&w, 0, 1, max_len, unit, unit, 0, &mut best);
    best
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut sizes = BTreeMap::new();
    for case in 0..500 {
        let n = rng.gen_range(1..=10);
        *sizes.entry(n).or_insert(0) += 1;
        let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=100)).collect();
        let table: Vec<(String, f64)> = weights
            .iter()
            .enumerate()
            .map(|(i, w)| (format!("s{i}"), *w as f64))
            .collect();
        let book = build_huffman(&table, Variant::V2, "random").map_err(|e| e.to_string())?;
        let cost: u64 = weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                w * book
                    .code(&format!("s{i}"))
                    .expect("every symbol coded")
                    .len() as u64
            })
            .sum();
        let optimal = optimal_prefix_cost(&weights);
        check(cost == optimal, || {
            format!("table {case} {weights:?}: huffman {cost}, optimal {optimal}")
        })?;
    }
    Ok(format!("500 tables, sizes {sizes:?}"))
}

fn arb_program(labels: Vec<String>) -> impl Strategy<Value = (usize, Vec<(usize, usize, usize)>)> {
    let k = labels.len();
    (1usize..=6)
        .prop_flat_map(move |n| (Just(n), prop::collection::vec((0..k, 0..n, 0..n), 0..120)))
}

fn build_stream(labels: &[String], n: usize, raw: &[(usize, usize, usize)]) -> Vec<Token> {
    raw.iter()
        .filter_map(|&(i, a, b)| {
            let label = &labels[i];
            if label == CX_LABEL {
                (n >= 2).then(|| {
                    Token::new(label.clone(), vec![a, if a == b { (b + 1) % n } else { b }])
                })
            } else {
                Some(Token::new(label.clone(), vec![a]))
            }
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let tc = toolchain(CodebookMode::Trained);
    let mut programs = 0;
    for v in Variant::ALL {
        let book = tc.codebook(v).clone();
        let labels: Vec<String> = book.codes().keys().cloned().collect();
        let mut runner = TestRunner::new(Config {
            cases: 2500,
            failure_persistence: None,
            ..Config::default()
        });
        runner
            .run(
                &(arb_program(labels.clone()), any::<bool>()),
                |((n, raw), per_program)| {
                    let stream = build_stream(&labels, n, &raw);
                    let own;
                    let book = if per_program && !stream.is_empty() {
                        own = build_per_program(&stream, v).expect("non-empty stream");
                        &own
                    } else {
                        &book
                    };
                    round_trip(&stream, book, n).map_err(TestCaseError::fail)?;
                    Ok(())
                },
            )
            .map_err(|e| format!("{v}: {e}"))?;
        programs += 2500;
    }

    let mut edge: Vec<Vec<u8>> = vec![
        vec![],
        vec![0],
        vec![255],
        vec![0; 1024],
        vec![7; 4],
        vec![7; 5],
        vec![9; 255],
        vec![9; 256],
        vec![9; 260],
    ];
    for (_, src) in corpus().iter().take(6) {
        let parsed = eqisa::qasm::parse_qasm(src).map_err(|e| e.to_string())?;
        for v in Variant::ALL {
            edge.push(
                tc.encode(&parsed.circuit, v)
                    .map_err(|e| e.to_string())?
                    .program
                    .to_bytes(),
            );
        }
    }
    for data in &edge {
        let back = decompress_bytes(&compress_bytes(data).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        check(&back == data, || {
            format!("edge case of {} bytes differs", data.len())
        })?;
    }
    let bytes = prop_oneof![
        prop::collection::vec(any::<u8>(), 0..1024),
        prop::collection::vec(0u8..4, 0..2048),
        (any::<u8>(), 0usize..2048).prop_map(|(b, n)| vec![b; n]),
        prop::collection::vec((any::<u8>(), 1usize..300), 0..12).prop_map(|runs| runs
            .into_iter()
            .flat_map(|(b, n)| std::iter::repeat_n(b, n))
            .collect()),
        prop::sample::select(edge.clone()),
    ];
    let cases = 10_000 - edge.len() as u32;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&bytes, |data| {
            let block = compress(&data).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let back = decompress(&block).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(back, data);
            Ok(())
        })
        .map_err(|e| format!("lossless: {e}"))?;
    Ok(format!(
        "{programs} programs, {} byte strings, zero failures",
        cases as usize + edge.len()
    ))
}

fn criterion_4() -> Outcome {
    let expected: BTreeSet<&str> = [
        "H",
        "T",
        "Tdg",
        "HT",
        "HTdg",
        "TH",
        "TT",
        "TdgH",
        "TdgTdg",
        "HTH",
        "HTT",
        "HTdgH",
        "HTdgTdg",
        "THT",
        "THTdg",
        "TTH",
        "TTT",
        "TdgHT",
        "TdgHTdg",
        "TdgTdgH",
        "TdgTdgTdg",
    ]
    .into();
    let basis = generate_basis(&clifford_t_base(), 3).map_err(|e| e.to_string())?;
    let got: BTreeSet<&str> = basis.non_null().map(|e| e.label()).collect();
    check(got == expected, || format!("got {got:?}"))?;
    check(basis.elements()[0].is_null(), || {
        "element 0 is not the null word".into()
    })?;
    Ok("21 labels, set equal".into())
}

fn selection(depth: usize, k: usize) -> Result<BTreeSet<String>, String> {
    let cfg = RunConfig {
        sk_depth: depth,
        ..RunConfig::default()
    };
    let table = learn_frequencies(&training_config(&cfg)).map_err(|e| e.to_string())?;
    let sel = select_dictionary(&table, ThresholdMode::TopK(k)).map_err(|e| e.to_string())?;
    Ok(sel.labels().iter().cloned().collect())
}

fn criterion_5() -> Outcome {
    const D4: [&str; 14] = [
        "CX", "H", "T", "Tdg", "HTH", "HTdgH", "HTHT", "HTHTdg", "HTdgHT", "HTdgHTdg", "THTH",
        "THTdgH", "TdgHTH", "TdgHTdgH",
    ];
    const D5_EXTRA: [&str; 4] = ["THTHTdg", "THTdgHTdg", "TdgHTHT", "TdgHTdgHT"];
    let d4 = selection(4, 10)?;
    let d5 = selection(5, 14)?;
    let want4: BTreeSet<String> = D4.iter().map(|s| s.to_string()).collect();
    let want5: BTreeSet<String> = D4.iter().chain(&D5_EXTRA).map(|s| s.to_string()).collect();
    check(d4 == want4, || format!("d=4 selection {d4:?}"))?;
    check(d5.is_superset(&d4), || {
        format!("d=5 selection {d5:?} does not contain d=4")
    })?;
    let d5_exact = d5 == want5;
    Ok(format!(
        "d=4 equals the 14-label column; d=5 ({} labels) contains it; d=5 column exact: {d5_exact}",
        d5.len()
    ))
}

fn gate(g: GateSymbol) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match g {
        GateSymbol::H => DMatrix::from_row_slice(2, 2, &[one * s, one * s, one * s, -one * s]),
        GateSymbol::T => DMatrix::from_row_slice(
            2,
            2,
            &[one, z, z, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
        ),
        GateSymbol::Tdg => DMatrix::from_row_slice(
            2,
            2,
            &[
                one,
                z,
                z,
                C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
            ],
        ),
        other => panic!("unexpected gate {other}"),
    }
}

/// Operator-norm distance minimised over global phase, from the eigenvalues
/// of `U†V` in closed form.
fn phase_distance_2x2(u: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    let w = u.adjoint() * v;
    let tr = w[(0, 0)] + w[(1, 1)];
    let det = w[(0, 0)] * w[(1, 1)] - w[(0, 1)] * w[(1, 0)];
    let root = (tr * tr - det * 4.0).sqrt();
    let (a, b) = ((tr + root) / 2.0, (tr - root) / 2.0);
    let arc = (a / b).arg().abs();
    2.0 * (arc / 4.0).sin()
}

fn criterion_6() -> Outcome {
    let basis = generate_basis(&clifford_t_base(), 3).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut sum1, mut sum3, mut worst) = (0.0, 0.0, 0.0f64);
    for _ in 0..50 {
        let u = haar_random_su2(rng.gen());
        let target = DMatrix::from_row_slice(2, 2, &u.entries());
        for (n, sum) in [(1, &mut sum1), (3, &mut sum3)] {
            let r = solovay_kitaev(&u, n, &basis).map_err(|e| e.to_string())?;
            let product = r
                .sequence
                .iter()
                .fold(DMatrix::identity(2, 2), |acc, g| gate(*g) * acc);
            let again = phase_distance_2x2(&target, &product);
            worst = worst.max((again - r.achieved_error).abs());
            *sum += r.achieved_error;
        }
    }
    let (m1, m3) = (sum1 / 50.0, sum3 / 50.0);
    check(m3 < m1, || {
        format!("mean error n=3 {m3:.3e} is not below n=1 {m1:.3e}")
    })?;
    check(worst <= 1e-12, || {
        format!("recomputation differs by {worst:.3e}")
    })?;
    Ok(format!(
        "mean error n=1 {m1:.4e}, n=3 {m3:.4e}, recomputation within {worst:.1e}"
    ))
}

/// Frobenius distance minimised over global phase.
fn frobenius_phase_distance(u: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    let tr = (u.adjoint() * v).trace();
    let phase = if tr.norm() > 0.0 {
        tr.conj() / tr.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    (u - v * phase).norm()
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    let mut max_cx_2q = 0;
    for qubits in [2usize, 3] {
        for i in 0..20 {
            let u = haar_random_unitary(1 << qubits, 7000 + 100 * qubits as u64 + i)
                .map_err(|e| e.to_string())?;
            let c = qsd_decompose(&u).map_err(|e| e.to_string())?;
            let back = circuit_unitary(&c).map_err(|e| e.to_string())?;
            let d = phase_aligned_distance(&u, &back).map_err(|e| e.to_string())?;
            let f = frobenius_phase_distance(u.matrix(), back.matrix());
            worst = worst.max(d).max(f);
            if qubits == 2 {
                max_cx_2q = max_cx_2q.max(c.cx_count());
            }
        }
    }
    check(worst <= 1e-7, || {
        format!("reconstruction error {worst:.3e}")
    })?;
    check(max_cx_2q <= 3, || format!("{max_cx_2q} CX at 2 qubits"))?;
    Ok(format!(
        "40 unitaries, worst distance {worst:.2e}, at most {max_cx_2q} CX at 2 qubits"
    ))
}

struct CorpusStats {
    mean_v3: f64,
    lossless_ratio: f64,
    rows: usize,
}

fn corpus_stats(report: &Report) -> CorpusStats {
    let rows: Vec<_> = report.rows().collect();
    let mean_v3 = rows.iter().map(|r| r.factors[3]).sum::<f64>() / rows.len() as f64;
    let lossless: u64 = rows.iter().map(|r| 8 * r.raw.lossless_bytes[3]).sum();
    let qasm: u64 = rows.iter().map(|r| r.raw.qasm_bits).sum();
    CorpusStats {
        mean_v3,
        lossless_ratio: lossless as f64 / qasm as f64,
        rows: rows.len(),
    }
}

fn bench(mode: CodebookMode) -> Result<Report, String> {
    let sources = corpus();
    let report = toolchain(mode).bench(&sources);
    check(report.rows().count() == sources.len(), || {
        format!(
            "{} of {} fixtures failed",
            sources.len() - report.rows().count(),
            sources.len()
        )
    })?;
    Ok(report)
}

fn criterion_8() -> Outcome {
    let per_program = corpus_stats(&bench(CodebookMode::PerProgram)?);
    let trained = corpus_stats(&bench(CodebookMode::Trained)?);
    let summary = format!(
        "{} fixtures; per-program codebooks: mean v3/v0 {:.3}, v3+lossless/QASM {:.2}%; trained codebooks: mean v3/v0 {:.3}, v3+lossless/QASM {:.2}%",
        per_program.rows,
        per_program.mean_v3,
        100.0 * per_program.lossless_ratio,
        trained.mean_v3,
        100.0 * trained.lossless_ratio
    );
    check(
        per_program.mean_v3 <= 0.7 && per_program.lossless_ratio <= 0.05,
        || summary.clone(),
    )?;
    Ok(summary)
}

fn criterion_9() -> Outcome {
    let mut out = Vec::new();
    for mode in [CodebookMode::PerProgram, CodebookMode::Trained] {
        let report = bench(mode)?;
        report.verify().map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        report.write_csv(&mut buf).map_err(|e| e.to_string())?;
        let reread = Report::read_csv(buf.as_slice()).map_err(|e| e.to_string())?;
        reread.verify().map_err(|e| e.to_string())?;
        check(reread == report, || {
            "CSV round trip changed the report".into()
        })?;

        let mut rows: Vec<_> = report.rows().collect();
        rows.sort_by_key(|r| (r.raw.num_qubits, r.circuit_complexity));
        let qubits: Vec<f64> = rows.iter().map(|r| r.raw.num_qubits as f64).collect();
        let gap: Vec<f64> = rows
            .iter()
            .map(|r| r.circuit_complexity as f64 - r.description_complexity as f64)
            .collect();
        let rho = spearman(&qubits, &gap).ok_or("rank correlation undefined")?;
        check(rho > 0.0, || format!("{mode}: rank correlation {rho:.3}"))?;
        out.push(format!("{mode}: rho {rho:.3}"));
    }
    Ok(format!(
        "gap vs qubit count {}; all columns recompute",
        out.join(", ")
    ))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "worked-example codec regression",
            criterion_1,
            Duration::from_secs(1),
        ),
        (
            "Huffman optimality oracle",
            criterion_2,
            Duration::from_secs(30),
        ),
        ("round-trip losslessness", criterion_3, Duration::MAX),
        ("SK basis fixture", criterion_4, Duration::MAX),
        ("dictionary selection fixture", criterion_5, Duration::MAX),
        ("SKD convergence", criterion_6, Duration::from_secs(300)),
        ("QSD reconstruction", criterion_7, Duration::from_secs(120)),
        (
            "corpus-level compression",
            criterion_8,
            Duration::from_secs(600),
        ),
        ("complexity report", criterion_9, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > limit => {
                Err(format!("{detail}; took {took:.2?}, limit {limit:.0?}"))
            }
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} ({took:.2?})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail} ({took:.2?})", i + 1);
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
