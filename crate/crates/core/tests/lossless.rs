use std::path::PathBuf;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqisa::codec::Variant;
use eqisa::config::{CodebookMode, RunConfig};
use eqisa::lossless::{
    bwt_forward, bwt_inverse, compress, compress_bytes, decompress, decompress_bytes, mtf_decode,
    mtf_encode, rle1_decode, rle1_encode, rle2_decode, rle2_encode, CompressedBlock, BLOCK_SIZE,
};
use eqisa::pipeline::{read_corpus, Toolchain};
use eqisa::qasm::parse_qasm;
use eqisa::Error;

fn small_alphabet() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        prop::collection::vec(any::<u8>(), 0..600),
        prop::collection::vec(0u8..3, 0..600),
        prop::collection::vec((any::<u8>(), 1usize..300), 0..6).prop_map(|runs| runs
            .into_iter()
            .flat_map(|(b, n)| std::iter::repeat_n(b, n))
            .collect()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bwt_output_is_a_permutation(data in small_alphabet()) {
        let (last, primary) = bwt_forward(&data);
        let (mut a, mut b) = (data.clone(), last.clone());
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
        prop_assert_eq!(bwt_inverse(&last, primary).unwrap(), data);
    }

    #[test]
    fn every_stage_inverts(data in small_alphabet()) {
        prop_assert_eq!(rle1_decode(&rle1_encode(&data)).unwrap(), data.clone());
        prop_assert_eq!(mtf_decode(&mtf_encode(&data)), data.clone());
        prop_assert_eq!(rle2_decode(&rle2_encode(&data)).unwrap(), data);
    }

    #[test]
    fn compression_is_deterministic_and_exact(data in small_alphabet()) {
        let a = compress_bytes(&data).unwrap();
        prop_assert_eq!(&a, &compress_bytes(&data).unwrap());
        prop_assert_eq!(decompress_bytes(&a).unwrap(), data);
    }
}

#[test]
fn stage_one_escapes_runs_after_four() {
    assert_eq!(rle1_encode(b"aaaaaa"), vec![b'a', b'a', b'a', b'a', 2]);
    assert_eq!(rle1_encode(b"abcabc").len(), 6);
    assert!(matches!(rle1_decode(b"aaaa"), Err(Error::Corrupt { .. })));
}

#[test]
fn zero_buffer_compresses_below_64_bytes() {
    let block = compress(&[0u8; 1024]).unwrap();
    assert!(block.byte_len() < 64, "{} bytes", block.byte_len());
    assert!(!block.is_stored());
}

#[test]
fn random_kilobyte_is_stored() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: Vec<u8> = (0..1024).map(|_| rng.gen()).collect();
    let block = compress(&data).unwrap();
    assert!(block.is_stored());
    assert_eq!(decompress(&block).unwrap(), data);
}

#[test]
fn oversized_input_is_a_capacity_error() {
    let err = compress(&vec![1u8; BLOCK_SIZE + 1]).unwrap_err();
    assert!(matches!(err, Error::Capacity(_)));
}

#[test]
fn corruption_names_a_stage() {
    let data = b"the quick brown fox jumps over the lazy dog, the quick brown fox".repeat(4);
    let bytes = compress_bytes(&data).unwrap();
    for i in 4..bytes.len() {
        let mut bad = bytes.clone();
        bad[i] ^= 0x5a;
        match decompress_bytes(&bad) {
            Ok(out) => assert_ne!(out, data, "flip at {i} went unnoticed"),
            Err(Error::Corrupt { stage, .. }) => assert!(!stage.is_empty()),
            Err(e) => panic!("flip at {i}: unexpected error {e}"),
        }
    }
    assert!(CompressedBlock::from_bytes(&bytes[..10]).is_err());
}

fn corpus_programs(mode: CodebookMode) -> Vec<(String, Vec<u8>, Vec<u8>)> {
    let cfg = RunConfig {
        codebooks: mode,
        ..RunConfig::default()
    };
    let tc = Toolchain::train(&cfg).unwrap();
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    read_corpus(&dir)
        .unwrap()
        .into_iter()
        .map(|(name, src)| {
            let c = parse_qasm(&src).unwrap().circuit;
            let v0 = tc.encode(&c, Variant::V0).unwrap().program.to_bytes();
            let v3 = tc.encode(&c, Variant::V3).unwrap().program.to_bytes();
            (name, v0, v3)
        })
        .collect()
}

#[test]
fn encoded_programs_round_trip_and_large_ones_shrink() {
    for (name, v0, v3) in corpus_programs(CodebookMode::Trained) {
        for data in [&v0, &v3] {
            let block = compress(data).unwrap();
            assert_eq!(&decompress(&block).unwrap(), data, "{name}");
            if data.len() > 1024 {
                assert!(
                    block.byte_len() < data.len(),
                    "{name}: {} -> {}",
                    data.len(),
                    block.byte_len()
                );
            }
        }
    }
}
