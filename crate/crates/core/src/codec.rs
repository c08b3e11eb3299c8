//! Prefix-free codebooks (fixed-width v0, Huffman v1–v3) and the `.eqisa`
//! bitstream format.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use bitvec::prelude::*;
use sha2::{Digest, Sha256};

use crate::basis::SkBasis;
use crate::dictionary::{DictionarySelection, FrequencyTable, Token, CX_LABEL};
use crate::error::{Error, Result};

pub type Bits = BitVec<u8, Msb0>;

pub const FORMAT_VERSION: u8 = 1;
const MAGIC: &[u8; 4] = b"EQSA";
pub const HEADER_LEN: usize = 28;
const CODEBOOK_HEADER: &str = "# eqisa codebook v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Fixed-width codes over the base gates and CX.
    V0,
    /// Huffman over base gates and CX.
    V1,
    /// Huffman over the full basis.
    V2,
    /// Huffman over a selected dictionary, unselected labels re-expanded.
    V3,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::V0, Variant::V1, Variant::V2, Variant::V3];

    pub fn as_byte(self) -> u8 {
        self as u8
    }

    pub fn from_byte(b: u8) -> Result<Self> {
        Variant::ALL
            .get(b as usize)
            .copied()
            .ok_or_else(|| Error::corrupt("header", format!("unknown variant byte {b}")))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", *self as u8)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v0" => Ok(Variant::V0),
            "v1" => Ok(Variant::V1),
            "v2" => Ok(Variant::V2),
            "v3" => Ok(Variant::V3),
            _ => Err(Error::InvalidArgument(format!(
                "unknown variant {s:?} (expected v0..v3)"
            ))),
        }
    }
}

/// Bits needed to address `n` distinct values; zero for `n ≤ 1`.
pub fn id_width(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn bits_from_str(s: &str) -> Result<Bits> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::format("codebook", format!("bad bit {c:?}"))),
        })
        .collect()
}

fn bits_to_string(b: &BitSlice<u8, Msb0>) -> String {
    b.iter().map(|x| if *x { '1' } else { '0' }).collect()
}

/// Label → prefix-free code.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    variant: Variant,
    codes: BTreeMap<String, Bits>,
    source: String,
}

impl Codebook {
    pub fn new(
        variant: Variant,
        codes: BTreeMap<String, Bits>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let book = Self {
            variant,
            codes,
            source: source.into(),
        };
        if book.codes.is_empty() {
            return Err(Error::EmptyFrequencies);
        }
        if !book.is_prefix_free() {
            return Err(Error::InvalidArgument("codes are not prefix-free".into()));
        }
        Ok(book)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn codes(&self) -> &BTreeMap<String, Bits> {
        &self.codes
    }

    pub fn code(&self, label: &str) -> Option<&Bits> {
        self.codes.get(label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.codes.contains_key(label)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// `Σ freq·len` over the given frequencies (labels without codes are ignored).
    pub fn cost<'a>(&self, freqs: impl IntoIterator<Item = (&'a str, f64)>) -> f64 {
        freqs
            .into_iter()
            .filter_map(|(l, f)| self.codes.get(l).map(|c| f * c.len() as f64))
            .sum()
    }

    /// `Σ 2^(−len)`; exactly 1 for a full binary tree.
    pub fn kraft_sum(&self) -> f64 {
        self.codes
            .values()
            .map(|c| 2f64.powi(-(c.len() as i32)))
            .sum()
    }

    pub fn is_prefix_free(&self) -> bool {
        let mut sorted: Vec<&Bits> = self.codes.values().collect();
        sorted.sort();
        sorted.windows(2).all(|w| !w[1].starts_with(w[0]))
    }

    /// First 8 bytes of SHA-256 over the canonical code listing.
    pub fn hash(&self) -> u64 {
        let mut h = Sha256::new();
        h.update([self.variant.as_byte()]);
        for (label, code) in &self.codes {
            h.update(label.as_bytes());
            h.update(b"\t");
            h.update(bits_to_string(code).as_bytes());
            h.update(b"\n");
        }
        let digest = h.finalize();
        u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CODEBOOK_HEADER}");
        let _ = writeln!(out, "variant {}", self.variant);
        let _ = writeln!(out, "source {}", self.source);
        for (label, code) in &self.codes {
            let _ = writeln!(out, "{label}\t{}", bits_to_string(code));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::format("codebook", msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(CODEBOOK_HEADER) {
            return Err(bad("missing header".into()));
        }
        let variant = lines
            .next()
            .and_then(|l| l.strip_prefix("variant "))
            .ok_or_else(|| bad("missing variant".into()))?
            .trim()
            .parse()?;
        let source = lines
            .next()
            .and_then(|l| l.strip_prefix("source "))
            .ok_or_else(|| bad("missing source".into()))?;
        let mut codes = BTreeMap::new();
        for line in lines {
            let (label, code) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("no tab in {line:?}")))?;
            if code.is_empty() {
                return Err(bad(format!("{label} has an empty code")));
            }
            if codes
                .insert(label.to_string(), bits_from_str(code.trim())?)
                .is_some()
            {
                return Err(bad(format!("duplicate label {label}")));
            }
        }
        Codebook::new(variant, codes, source.trim())
    }

    fn decoder(&self) -> Decoder<'_> {
        let mut nodes: Vec<[Option<usize>; 2]> = vec![[None, None]];
        let mut leaves: HashMap<usize, &str> = HashMap::new();
        for (label, code) in &self.codes {
            let mut at = 0;
            for bit in code.iter() {
                let b = *bit as usize;
                at = match nodes[at][b] {
                    Some(next) => next,
                    None => {
                        nodes.push([None, None]);
                        let next = nodes.len() - 1;
                        nodes[at][b] = Some(next);
                        next
                    }
                };
            }
            leaves.insert(at, label);
        }
        Decoder { nodes, leaves }
    }
}

struct Decoder<'a> {
    nodes: Vec<[Option<usize>; 2]>,
    leaves: HashMap<usize, &'a str>,
}

impl<'a> Decoder<'a> {
    fn next(&self, bits: &BitSlice<u8, Msb0>, pos: &mut usize) -> Result<&'a str> {
        let mut at = 0;
        loop {
            if let Some(label) = self.leaves.get(&at) {
                return Ok(label);
            }
            let bit = *bits
                .get(*pos)
                .ok_or_else(|| Error::corrupt("instruction stream", "truncated code"))?;
            *pos += 1;
            at = self.nodes[at][bit as usize]
                .ok_or_else(|| Error::corrupt("instruction stream", "bits match no code"))?;
        }
    }
}

/// Fixed-width codes of width `⌈log₂ N⌉` (at least 1), in label order.
pub fn build_v0(labels: &[String]) -> Result<Codebook> {
    if labels.is_empty() {
        return Err(Error::EmptyFrequencies);
    }
    let width = id_width(labels.len()).max(1);
    let mut codes = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        let mut code = Bits::with_capacity(width);
        for b in (0..width).rev() {
            code.push((i >> b) & 1 == 1);
        }
        if codes.insert(label.clone(), code).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate label {label}")));
        }
    }
    Codebook::new(Variant::V0, codes, format!("fixed-width {width}"))
}

/// Huffman code over labels with positive weight. Ties merge in
/// lexicographic order of each subtree's smallest label; the lighter subtree
/// becomes the `0` branch.
pub fn build_huffman(
    freqs: &[(String, f64)],
    variant: Variant,
    source: impl Into<String>,
) -> Result<Codebook> {
    struct Node {
        weight: f64,
        key: String,
        labels: Vec<usize>,
    }
    let mut names: Vec<&str> = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    for (label, w) in freqs {
        if !(w.is_finite() && *w >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "frequency of {label} must be a non-negative number"
            )));
        }
        if *w > 0.0 {
            names.push(label);
            nodes.push(Node {
                weight: *w,
                key: label.clone(),
                labels: vec![names.len() - 1],
            });
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyFrequencies);
    }
    let mut codes: Vec<Bits> = vec![Bits::new(); names.len()];
    if nodes.len() == 1 {
        codes[0].push(false);
    }
    let order = |a: &Node, b: &Node| {
        a.weight
            .total_cmp(&b.weight)
            .then_with(|| a.key.cmp(&b.key))
    };
    while nodes.len() > 1 {
        nodes.sort_by(|a, b| order(b, a));
        let left = nodes.pop().expect("two nodes");
        let right = nodes.pop().expect("two nodes");
        for &i in &left.labels {
            codes[i].insert(0, false);
        }
        for &i in &right.labels {
            codes[i].insert(0, true);
        }
        let key = left.key.clone().min(right.key.clone());
        let mut labels = left.labels;
        labels.extend(right.labels);
        nodes.push(Node {
            weight: left.weight + right.weight,
            key,
            labels,
        });
    }
    let codes = names
        .iter()
        .zip(codes)
        .map(|(n, c)| (n.to_string(), c))
        .collect();
    Codebook::new(variant, codes, source)
}

/// Per-gate frequencies implied by a label table (each label contributes its
/// count to every letter it spells).
pub fn letter_frequencies(table: &[(String, f64)], basis: &SkBasis) -> Result<Vec<(String, f64)>> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for (label, f) in table {
        if label == CX_LABEL {
            *out.entry(label.clone()).or_insert(0.0) += f;
            continue;
        }
        for g in basis.parse_label(label)? {
            *out.entry(g.mnemonic()).or_insert(0.0) += f;
        }
    }
    Ok(out.into_iter().collect())
}

/// Frequencies after unselected labels are spelled out in base letters.
pub fn reexpanded_frequencies(
    table: &[(String, f64)],
    selection: &DictionarySelection,
    basis: &SkBasis,
) -> Result<Vec<(String, f64)>> {
    let mut out: BTreeMap<String, f64> = selection
        .labels()
        .iter()
        .map(|l| (l.clone(), 0.0))
        .collect();
    for (label, f) in table {
        if selection.contains(label) {
            *out.entry(label.clone()).or_insert(0.0) += f;
        } else {
            for g in basis.parse_label(label)? {
                *out.entry(g.mnemonic()).or_insert(0.0) += f;
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Global codebook for `variant` trained on an ensemble table. Every symbol
/// the variant can emit gets a code: unseen ones are weighted as half an
/// observation across the ensemble.
pub fn build_trained(
    table: &FrequencyTable,
    variant: Variant,
    basis: &SkBasis,
    selection: Option<&DictionarySelection>,
) -> Result<Codebook> {
    let mandatory = table.mandatory();
    let source = {
        let p = table.provenance();
        format!(
            "trained d={} n={} ensemble={} qubits={} seed={} segmentation={}",
            p.depth, p.degree, p.ensemble_size, p.num_qubits, p.seed, p.segmentation
        )
    };
    let floor = 0.5 / table.provenance().ensemble_size.max(1) as f64;
    let raw: Vec<(String, f64)> = match variant {
        Variant::V0 => return build_v0(&mandatory),
        Variant::V1 => letter_frequencies(table.entries(), basis)?,
        Variant::V2 => table.entries().to_vec(),
        Variant::V3 => {
            let sel = selection
                .ok_or_else(|| Error::InvalidArgument("v3 needs a dictionary selection".into()))?;
            reexpanded_frequencies(table.entries(), sel, basis)?
        }
    };
    let mut weights: BTreeMap<String, f64> = raw.into_iter().collect();
    for label in &mandatory {
        weights.entry(label.clone()).or_insert(0.0);
    }
    let floored: Vec<(String, f64)> = weights
        .into_iter()
        .map(|(l, w)| (l, w.max(floor)))
        .collect();
    build_huffman(&floored, variant, source)
}

/// Codebook over one program's own token counts.
pub fn build_per_program(tokens: &[Token], variant: Variant) -> Result<Codebook> {
    let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.label.as_str()).or_insert(0.0) += 1.0;
    }
    let freqs: Vec<(String, f64)> = counts
        .into_iter()
        .map(|(l, c)| (l.to_string(), c))
        .collect();
    build_huffman(&freqs, variant, "per-program")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub version: u8,
    pub variant: Variant,
    pub num_qubits: u16,
    pub token_count: u32,
    pub codebook_hash: u64,
    pub instruction_bits: u32,
    pub qubit_bits: u32,
}

impl Header {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(MAGIC);
        out[4] = self.version;
        out[5] = self.variant.as_byte();
        out[6..8].copy_from_slice(&self.num_qubits.to_be_bytes());
        out[8..12].copy_from_slice(&self.token_count.to_be_bytes());
        out[12..20].copy_from_slice(&self.codebook_hash.to_be_bytes());
        out[20..24].copy_from_slice(&self.instruction_bits.to_be_bytes());
        out[24..28].copy_from_slice(&self.qubit_bits.to_be_bytes());
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER_LEN {
            return Err(Error::corrupt("header", "file shorter than the header"));
        }
        if &b[..4] != MAGIC {
            return Err(Error::corrupt("header", "bad magic"));
        }
        if b[4] != FORMAT_VERSION {
            return Err(Error::corrupt(
                "header",
                format!("unsupported version {}", b[4]),
            ));
        }
        let be32 = |i: usize| u32::from_be_bytes(b[i..i + 4].try_into().expect("4 bytes"));
        Ok(Header {
            version: b[4],
            variant: Variant::from_byte(b[5])?,
            num_qubits: u16::from_be_bytes([b[6], b[7]]),
            token_count: be32(8),
            codebook_hash: u64::from_be_bytes(b[12..20].try_into().expect("8 bytes")),
            instruction_bits: be32(20),
            qubit_bits: be32(24),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedProgram {
    pub header: Header,
    pub instruction_bits: Bits,
    pub qubit_bits: Bits,
}

impl EncodedProgram {
    /// Payload bits, header excluded.
    pub fn total_bits(&self) -> usize {
        self.instruction_bits.len() + self.qubit_bits.len()
    }

    /// Header, then each stream zero-padded to a whole byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header.to_bytes().to_vec();
        out.extend_from_slice(self.instruction_bits.clone().into_vec().as_slice());
        out.extend_from_slice(self.qubit_bits.clone().into_vec().as_slice());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = Header::from_bytes(bytes)?;
        let ib = header.instruction_bits as usize;
        let qb = header.qubit_bits as usize;
        let (il, ql) = (ib.div_ceil(8), qb.div_ceil(8));
        let body = &bytes[HEADER_LEN..];
        if body.len() != il + ql {
            return Err(Error::corrupt(
                "payload",
                format!("expected {} payload bytes, found {}", il + ql, body.len()),
            ));
        }
        let stream = |bytes: &[u8], len: usize, stage: &'static str| -> Result<Bits> {
            let mut bits = Bits::from_slice(bytes);
            if bits[len..].any() {
                return Err(Error::corrupt(stage, "non-zero padding"));
            }
            bits.truncate(len);
            Ok(bits)
        };
        Ok(EncodedProgram {
            header,
            instruction_bits: stream(&body[..il], ib, "instruction stream")?,
            qubit_bits: stream(&body[il..], qb, "qubit-id stream")?,
        })
    }
}

fn arity(label: &str) -> usize {
    if label == CX_LABEL {
        2
    } else {
        1
    }
}

/// Encodes tokens and their qubit operands.
pub fn encode_program(
    tokens: &[Token],
    codebook: &Codebook,
    num_qubits: usize,
) -> Result<EncodedProgram> {
    let n16 = u16::try_from(num_qubits)
        .map_err(|_| Error::Capacity(format!("{num_qubits} qubits do not fit the header")))?;
    if num_qubits == 0 {
        return Err(Error::InvalidDimension(
            "a program needs at least one qubit".into(),
        ));
    }
    let width = id_width(num_qubits);
    let mut ins = Bits::new();
    let mut ids = Bits::new();
    for t in tokens {
        let code = codebook
            .code(&t.label)
            .ok_or_else(|| Error::UnknownToken(t.label.clone()))?;
        if t.qubits.len() != arity(&t.label) {
            return Err(Error::InvalidGate(format!(
                "{} takes {} operand(s)",
                t.label,
                arity(&t.label)
            )));
        }
        ins.extend_from_bitslice(code);
        for &q in &t.qubits {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { id: q, num_qubits });
            }
            for b in (0..width).rev() {
                ids.push((q >> b) & 1 == 1);
            }
        }
    }
    let too_long = |what: &str| Error::Capacity(format!("{what} exceeds 2^32"));
    let header = Header {
        version: FORMAT_VERSION,
        variant: codebook.variant(),
        num_qubits: n16,
        token_count: u32::try_from(tokens.len()).map_err(|_| too_long("token count"))?,
        codebook_hash: codebook.hash(),
        instruction_bits: u32::try_from(ins.len()).map_err(|_| too_long("instruction stream"))?,
        qubit_bits: u32::try_from(ids.len()).map_err(|_| too_long("qubit-id stream"))?,
    };
    Ok(EncodedProgram {
        header,
        instruction_bits: ins,
        qubit_bits: ids,
    })
}

/// Exact inverse of [`encode_program`].
pub fn decode_program(p: &EncodedProgram, codebook: &Codebook) -> Result<Vec<Token>> {
    let actual = codebook.hash();
    if p.header.codebook_hash != actual {
        return Err(Error::CodebookMismatch {
            expected: p.header.codebook_hash,
            actual,
        });
    }
    if p.instruction_bits.len() != p.header.instruction_bits as usize
        || p.qubit_bits.len() != p.header.qubit_bits as usize
    {
        return Err(Error::corrupt(
            "payload",
            "stream lengths disagree with the header",
        ));
    }
    let decoder = codebook.decoder();
    let n = p.header.num_qubits as usize;
    let width = id_width(n);
    let (mut ip, mut qp) = (0usize, 0usize);
    let mut tokens = Vec::with_capacity(p.header.token_count as usize);
    for _ in 0..p.header.token_count {
        let label = decoder.next(&p.instruction_bits, &mut ip)?;
        let mut qubits = Vec::with_capacity(2);
        for _ in 0..arity(label) {
            let end = qp + width;
            let slice = p
                .qubit_bits
                .get(qp..end)
                .ok_or_else(|| Error::corrupt("qubit-id stream", "truncated"))?;
            let q = slice.iter().fold(0usize, |acc, b| (acc << 1) | *b as usize);
            if q >= n.max(1) {
                return Err(Error::corrupt(
                    "qubit-id stream",
                    format!("qubit {q} out of range"),
                ));
            }
            qubits.push(q);
            qp = end;
        }
        tokens.push(Token::new(label, qubits));
    }
    if ip != p.instruction_bits.len() {
        return Err(Error::corrupt(
            "instruction stream",
            format!("{} trailing bits", p.instruction_bits.len() - ip),
        ));
    }
    if qp != p.qubit_bits.len() {
        return Err(Error::corrupt(
            "qubit-id stream",
            format!("{} trailing bits", p.qubit_bits.len() - qp),
        ));
    }
    Ok(tokens)
}
