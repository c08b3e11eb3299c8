//! Five-stage block compressor: RLE1 → BWT → MTF → RLE2 → Huffman, and the
//! `.eqbz` container.

use std::collections::HashMap;

use bitvec::prelude::*;
use sha2::{Digest, Sha256};

use crate::codec::{build_huffman, Bits, Variant};
use crate::error::{Error, Result};

pub const BLOCK_SIZE: usize = 900_000;
const MAGIC: &[u8; 4] = b"EQBZ";
const VERSION: u8 = 1;
/// Payload holds the input verbatim because the pipeline would have grown it.
pub const FLAG_STORED: u8 = 0x01;
const RUNA: u16 = 0;
const RUNB: u16 = 1;
const ALPHABET: usize = 257;
const GROUPS: usize = ALPHABET.div_ceil(16);
const GROUP_MASK_LEN: usize = GROUPS.div_ceil(8);
const FIXED_HEADER: usize = 26;
const MAX_CODE_LEN: u8 = 63;

/// Runs of 4 to 255 equal bytes become four literals and a count of the extra
/// repeats.
pub fn rle1_encode(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len());
    let mut i = 0;
    while i < data.len() {
        let b = data[i];
        let run = data[i..].iter().take(255).take_while(|&&x| x == b).count();
        if run >= 4 {
            out.extend_from_slice(&[b; 4]);
            out.push((run - 4) as u8);
        } else {
            out.extend(std::iter::repeat_n(b, run));
        }
        i += run;
    }
    out
}

pub fn rle1_decode(data: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(data.len());
    let mut run = 0usize;
    let mut last: Option<u8> = None;
    let mut it = data.iter();
    while let Some(&b) = it.next() {
        run = if last == Some(b) { run + 1 } else { 1 };
        last = Some(b);
        out.push(b);
        if run == 4 {
            let &count = it
                .next()
                .ok_or_else(|| Error::corrupt("rle1", "missing run count"))?;
            if count > 251 {
                return Err(Error::corrupt(
                    "rle1",
                    format!("run count {count} exceeds 251"),
                ));
            }
            out.extend(std::iter::repeat_n(b, count as usize));
            run = 0;
            last = None;
        }
    }
    Ok(out)
}

/// Last column of the sorted rotation matrix and the row holding the input.
pub fn bwt_forward(data: &[u8]) -> (Vec<u8>, usize) {
    let n = data.len();
    if n == 0 {
        return (Vec::new(), 0);
    }
    let mut rank: Vec<usize> = data.iter().map(|&b| b as usize).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut next = vec![0usize; n];
    let mut k = 1;
    loop {
        let key = |i: usize| (rank[i], rank[(i + k) % n]);
        order.sort_by_key(|&i| key(i));
        next[order[0]] = 0;
        for w in 1..n {
            next[order[w]] = next[order[w - 1]] + usize::from(key(order[w]) != key(order[w - 1]));
        }
        std::mem::swap(&mut rank, &mut next);
        if rank[order[n - 1]] == n - 1 || k >= n {
            break;
        }
        k *= 2;
    }
    let last = order.iter().map(|&i| data[(i + n - 1) % n]).collect();
    let primary = order
        .iter()
        .position(|&i| i == 0)
        .expect("rotation 0 is present");
    (last, primary)
}

pub fn bwt_inverse(last: &[u8], primary: usize) -> Result<Vec<u8>> {
    let n = last.len();
    if n == 0 {
        return if primary == 0 {
            Ok(Vec::new())
        } else {
            Err(Error::corrupt("bwt", "primary index on empty block"))
        };
    }
    if primary >= n {
        return Err(Error::corrupt(
            "bwt",
            format!("primary index {primary} out of range for {n} bytes"),
        ));
    }
    let mut start = [0usize; 256];
    for &b in last {
        start[b as usize] += 1;
    }
    let mut sum = 0;
    for c in start.iter_mut() {
        let count = *c;
        *c = sum;
        sum += count;
    }
    let mut seen = [0usize; 256];
    let lf: Vec<usize> = last
        .iter()
        .map(|&b| {
            let r = start[b as usize] + seen[b as usize];
            seen[b as usize] += 1;
            r
        })
        .collect();
    let mut out = vec![0u8; n];
    let mut row = primary;
    for slot in out.iter_mut().rev() {
        *slot = last[row];
        row = lf[row];
    }
    Ok(out)
}

pub fn mtf_encode(data: &[u8]) -> Vec<u8> {
    let mut table: Vec<u8> = (0..=255).collect();
    data.iter()
        .map(|&b| {
            let pos = table
                .iter()
                .position(|&x| x == b)
                .expect("table holds every byte");
            table.remove(pos);
            table.insert(0, b);
            pos as u8
        })
        .collect()
}

pub fn mtf_decode(data: &[u8]) -> Vec<u8> {
    let mut table: Vec<u8> = (0..=255).collect();
    data.iter()
        .map(|&p| {
            let b = table.remove(p as usize);
            table.insert(0, b);
            b
        })
        .collect()
}

/// Zero runs become bijective base-2 digits (RUNA = 1, RUNB = 2); byte `v > 0`
/// becomes symbol `v + 1`.
pub fn rle2_encode(data: &[u8]) -> Vec<u16> {
    let mut out = Vec::with_capacity(data.len());
    let mut zeros = 0usize;
    let flush = |zeros: &mut usize, out: &mut Vec<u16>| {
        while *zeros > 0 {
            if *zeros & 1 == 1 {
                out.push(RUNA);
                *zeros = (*zeros - 1) / 2;
            } else {
                out.push(RUNB);
                *zeros = (*zeros - 2) / 2;
            }
        }
    };
    for &b in data {
        if b == 0 {
            zeros += 1;
        } else {
            flush(&mut zeros, &mut out);
            out.push(b as u16 + 1);
        }
    }
    flush(&mut zeros, &mut out);
    out
}

pub fn rle2_decode(symbols: &[u16]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut run = 0usize;
    let mut weight = 1usize;
    for &s in symbols {
        match s {
            RUNA | RUNB => {
                run = weight
                    .checked_mul(s as usize + 1)
                    .and_then(|d| run.checked_add(d))
                    .filter(|&r| r <= BLOCK_SIZE * 2)
                    .ok_or_else(|| Error::corrupt("rle2", "zero run too long"))?;
                weight = weight.saturating_mul(2);
            }
            2..=256 => {
                out.extend(std::iter::repeat_n(0u8, run));
                run = 0;
                weight = 1;
                out.push((s - 1) as u8);
            }
            _ => return Err(Error::corrupt("rle2", format!("symbol {s} out of range"))),
        }
    }
    out.extend(std::iter::repeat_n(0u8, run));
    Ok(out)
}

/// Canonical codes for the given lengths: shorter first, ties by symbol.
fn canonical_codes(lengths: &[u8]) -> Vec<Option<(u64, u8)>> {
    let mut order: Vec<usize> = (0..lengths.len()).filter(|&s| lengths[s] > 0).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut codes = vec![None; lengths.len()];
    let mut code = 0u64;
    let mut prev = 0u8;
    for (i, &s) in order.iter().enumerate() {
        let len = lengths[s];
        if i > 0 {
            code = (code + 1) << (len - prev);
        }
        prev = len;
        codes[s] = Some((code, len));
    }
    codes
}

fn huffman_lengths(symbols: &[u16]) -> Result<Vec<u8>> {
    let mut counts = vec![0u64; ALPHABET];
    for &s in symbols {
        counts[s as usize] += 1;
    }
    let freqs: Vec<(String, f64)> = counts
        .iter()
        .enumerate()
        .map(|(s, &c)| (format!("{s:03}"), c as f64))
        .collect();
    let book = build_huffman(&freqs, Variant::V1, "lossless")?;
    let mut lengths = vec![0u8; ALPHABET];
    for (label, code) in book.codes() {
        let s: usize = label.parse().expect("labels are symbol numbers");
        lengths[s] = u8::try_from(code.len())
            .ok()
            .filter(|&l| l <= MAX_CODE_LEN)
            .ok_or_else(|| Error::Capacity("Huffman code too long".into()))?;
    }
    Ok(lengths)
}

/// Group mask over 16-symbol groups, then a 16-bit presence word per used group.
fn used_symbol_map(lengths: &[u8]) -> Vec<u8> {
    let mut mask = [0u8; GROUP_MASK_LEN];
    let mut words = Vec::new();
    for g in 0..GROUPS {
        let word = (0..16)
            .filter(|j| lengths.get(g * 16 + j).is_some_and(|&l| l > 0))
            .fold(0u16, |w, j| w | (0x8000 >> j));
        if word != 0 {
            mask[g / 8] |= 0x80 >> (g % 8);
            words.extend_from_slice(&word.to_be_bytes());
        }
    }
    let mut out = mask.to_vec();
    out.extend(words);
    out
}

fn checksum(data: &[u8]) -> u32 {
    let digest = Sha256::digest(data);
    u32::from_be_bytes(digest[..4].try_into().expect("digest has 32 bytes"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedBlock {
    pub flags: u8,
    pub original_length: u32,
    pub primary_index: u32,
    pub checksum: u32,
    /// Huffman code length per RLE2 symbol; zero for absent symbols.
    pub code_lengths: Vec<u8>,
    pub symbol_count: u32,
    pub payload: Bits,
}

impl CompressedBlock {
    pub fn is_stored(&self) -> bool {
        self.flags & FLAG_STORED != 0
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FIXED_HEADER + self.payload.len() / 8 + 64);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.flags);
        for v in [
            self.original_length,
            self.primary_index,
            self.checksum,
            self.symbol_count,
        ] {
            out.extend_from_slice(&v.to_be_bytes());
        }
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        if !self.is_stored() {
            out.extend(used_symbol_map(&self.code_lengths));
            out.extend(self.code_lengths.iter().filter(|&&l| l > 0));
        }
        out.extend_from_slice(self.payload.clone().into_vec().as_slice());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: String| Error::corrupt("container", msg);
        if bytes.len() < FIXED_HEADER {
            return Err(bad("shorter than the header".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(bad(format!("unsupported version {}", bytes[4])));
        }
        let flags = bytes[5];
        if flags & !FLAG_STORED != 0 {
            return Err(bad(format!("unknown flags {flags:#04x}")));
        }
        let be32 = |i: usize| u32::from_be_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let (original_length, primary_index, checksum, symbol_count, payload_bits) =
            (be32(6), be32(10), be32(14), be32(18), be32(22));
        if flags & FLAG_STORED != 0 && (primary_index != 0 || symbol_count != 0) {
            return Err(bad("stored block with transform fields set".into()));
        }
        let mut at = FIXED_HEADER;
        let mut code_lengths = Vec::new();
        if flags & FLAG_STORED == 0 {
            let mask = bytes
                .get(at..at + GROUP_MASK_LEN)
                .ok_or_else(|| bad("truncated code table".into()))?;
            at += GROUP_MASK_LEN;
            if (GROUPS..8 * GROUP_MASK_LEN).any(|g| mask[g / 8] & (0x80 >> (g % 8)) != 0) {
                return Err(bad("unused code-table group marked present".into()));
            }
            code_lengths = vec![0u8; ALPHABET];
            let mut present = Vec::new();
            for g in 0..GROUPS {
                if mask[g / 8] & (0x80 >> (g % 8)) == 0 {
                    continue;
                }
                let word = bytes
                    .get(at..at + 2)
                    .ok_or_else(|| bad("truncated code table".into()))?;
                at += 2;
                let word = u16::from_be_bytes([word[0], word[1]]);
                if word == 0 {
                    return Err(bad(format!("code-table group {g} is empty")));
                }
                for j in 0..16 {
                    if word & (0x8000 >> j) != 0 {
                        let s = g * 16 + j;
                        if s >= ALPHABET {
                            return Err(bad(format!("symbol {s} out of range")));
                        }
                        present.push(s);
                    }
                }
            }
            for s in present {
                let &l = bytes
                    .get(at)
                    .ok_or_else(|| bad("truncated code table".into()))?;
                if l == 0 || l > MAX_CODE_LEN {
                    return Err(bad(format!("code length {l} out of range")));
                }
                code_lengths[s] = l;
                at += 1;
            }
        }
        let payload_bytes = &bytes[at..];
        if payload_bytes.len() != (payload_bits as usize).div_ceil(8) {
            return Err(bad(format!(
                "payload is {} bytes, header says {payload_bits} bits",
                payload_bytes.len()
            )));
        }
        let mut payload = Bits::from_slice(payload_bytes);
        if payload[payload_bits as usize..].any() {
            return Err(bad("non-zero padding".into()));
        }
        payload.truncate(payload_bits as usize);
        Ok(CompressedBlock {
            flags,
            original_length,
            primary_index,
            checksum,
            code_lengths,
            symbol_count,
            payload,
        })
    }

    /// Serialized size in bytes.
    pub fn byte_len(&self) -> usize {
        let table = if self.is_stored() {
            0
        } else {
            used_symbol_map(&self.code_lengths).len()
                + self.code_lengths.iter().filter(|&&l| l > 0).count()
        };
        FIXED_HEADER + table + self.payload.len().div_ceil(8)
    }
}

pub fn compress(data: &[u8]) -> Result<CompressedBlock> {
    if data.len() > BLOCK_SIZE {
        return Err(Error::Capacity(format!(
            "{} bytes exceed the {BLOCK_SIZE}-byte block",
            data.len()
        )));
    }
    let (last, primary) = bwt_forward(&rle1_encode(data));
    let symbols = rle2_encode(&mtf_encode(&last));
    let mut payload = Bits::new();
    let mut code_lengths = vec![0u8; ALPHABET];
    if !symbols.is_empty() {
        code_lengths = huffman_lengths(&symbols)?;
        let codes = canonical_codes(&code_lengths);
        for &s in &symbols {
            let (code, len) = codes[s as usize].expect("every emitted symbol has a code");
            for b in (0..len).rev() {
                payload.push((code >> b) & 1 == 1);
            }
        }
    }
    let block = CompressedBlock {
        flags: 0,
        original_length: data.len() as u32,
        primary_index: primary as u32,
        checksum: checksum(data),
        code_lengths,
        symbol_count: symbols.len() as u32,
        payload,
    };
    if block.byte_len() <= FIXED_HEADER + data.len() {
        return Ok(block);
    }
    Ok(CompressedBlock {
        flags: FLAG_STORED,
        primary_index: 0,
        code_lengths: Vec::new(),
        symbol_count: 0,
        payload: Bits::from_slice(data),
        ..block
    })
}

pub fn decompress(block: &CompressedBlock) -> Result<Vec<u8>> {
    let data = if block.is_stored() {
        if !block.payload.len().is_multiple_of(8) {
            return Err(Error::corrupt(
                "container",
                "stored payload is not whole bytes",
            ));
        }
        block.payload.clone().into_vec()
    } else {
        let symbols = huffman_decode(block)?;
        let mtf = rle2_decode(&symbols)?;
        let last = mtf_decode(&mtf);
        rle1_decode(&bwt_inverse(&last, block.primary_index as usize)?)?
    };
    if data.len() != block.original_length as usize {
        return Err(Error::corrupt(
            "container",
            format!(
                "decoded {} bytes, expected {}",
                data.len(),
                block.original_length
            ),
        ));
    }
    if checksum(&data) != block.checksum {
        return Err(Error::corrupt("checksum", "payload checksum mismatch"));
    }
    Ok(data)
}

fn huffman_decode(block: &CompressedBlock) -> Result<Vec<u16>> {
    if block.code_lengths.len() != ALPHABET {
        return Err(Error::corrupt("huffman", "code table has the wrong size"));
    }
    let kraft: f64 = block
        .code_lengths
        .iter()
        .filter(|&&l| l > 0)
        .map(|&l| 2f64.powi(-(l as i32)))
        .sum();
    if kraft > 1.0 + 1e-12 {
        return Err(Error::corrupt(
            "huffman",
            "code lengths violate the Kraft inequality",
        ));
    }
    let lookup: HashMap<(u8, u64), u16> = canonical_codes(&block.code_lengths)
        .into_iter()
        .enumerate()
        .filter_map(|(s, c)| c.map(|(code, len)| ((len, code), s as u16)))
        .collect();
    let mut out = Vec::with_capacity(block.symbol_count as usize);
    let bits: &BitSlice<u8, Msb0> = &block.payload;
    let mut pos = 0;
    for _ in 0..block.symbol_count {
        let (mut code, mut len) = (0u64, 0u8);
        loop {
            let bit = *bits
                .get(pos)
                .ok_or_else(|| Error::corrupt("huffman", "truncated payload"))?;
            pos += 1;
            code = (code << 1) | bit as u64;
            len += 1;
            if let Some(&s) = lookup.get(&(len, code)) {
                out.push(s);
                break;
            }
            if len >= MAX_CODE_LEN {
                return Err(Error::corrupt("huffman", "bits match no code"));
            }
        }
    }
    if pos != bits.len() {
        return Err(Error::corrupt(
            "huffman",
            format!("{} trailing bits", bits.len() - pos),
        ));
    }
    Ok(out)
}

pub fn compress_bytes(data: &[u8]) -> Result<Vec<u8>> {
    Ok(compress(data)?.to_bytes())
}

pub fn decompress_bytes(bytes: &[u8]) -> Result<Vec<u8>> {
    decompress(&CompressedBlock::from_bytes(bytes)?)
}
