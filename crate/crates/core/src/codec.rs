//! Joint Huffman / run-length coding of bit sequences.
//!
//! The scanner walks a sequence left to right and measures the run of identical
//! bits at the head. A long run (`L >= l_fix`) becomes a run-length record
//! `0 | L in l_run bits | bit`; runs longer than `2^l_run - 1` are split into
//! maximal chunks. A short run causes the next `l_fix` bits to be read as one
//! symbol and emitted as `1 | codeword`. When fewer than `l_fix` bits remain and
//! the head run is short, every remaining run is written as a run-length record.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::bitplane::{BitPlane, RearrangeMode, Rearrangement};
use crate::error::{corrupt, Error, Result};
use crate::image_io::{BitBuffer, BitReader};

pub const DEFAULT_BLOCK_SIZE: usize = 4;
pub const DEFAULT_FIXED_LEN: u8 = 6;
pub const DEFAULT_RUN_BITS: u8 = 5;

/// Longest codeword accepted from a serialised table.
pub const MAX_CODE_LEN: u8 = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodecParams {
    /// Block side used by the rearrangement, `1..=255`.
    pub t: usize,
    /// Short/long threshold and Huffman symbol width, `2..=8`.
    pub l_fix: u8,
    /// Width of the run-length field, `2..=16`.
    pub l_run: u8,
}

impl Default for CodecParams {
    fn default() -> Self {
        CodecParams {
            t: DEFAULT_BLOCK_SIZE,
            l_fix: DEFAULT_FIXED_LEN,
            l_run: DEFAULT_RUN_BITS,
        }
    }
}

impl CodecParams {
    pub fn new(t: usize, l_fix: u8, l_run: u8) -> Result<Self> {
        let p = CodecParams { t, l_fix, l_run };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=255).contains(&self.t) {
            return Err(Error::Parameter(format!("t = {} outside 1..=255", self.t)));
        }
        if !(2..=8).contains(&self.l_fix) {
            return Err(Error::Parameter(format!(
                "l_fix = {} outside 2..=8",
                self.l_fix
            )));
        }
        if !(2..=16).contains(&self.l_run) {
            return Err(Error::Parameter(format!(
                "l_run = {} outside 2..=16",
                self.l_run
            )));
        }
        Ok(())
    }

    pub fn symbol_count(&self) -> usize {
        1 << self.l_fix
    }

    /// Longest run a single run-length record can describe.
    pub fn max_run(&self) -> usize {
        (1 << self.l_run) - 1
    }
}

/// One step of the scanner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Token {
    Run { bit: bool, len: usize },
    Symbol(u16),
}

/// Iterator over the tokens of a sequence under the given parameters.
pub struct Scanner<'a> {
    seq: &'a [bool],
    pos: usize,
    l_fix: usize,
    max_run: usize,
}

impl<'a> Scanner<'a> {
    pub fn new(seq: &'a [bool], params: &CodecParams) -> Self {
        Scanner {
            seq,
            pos: 0,
            l_fix: params.l_fix as usize,
            max_run: params.max_run(),
        }
    }
}

impl Iterator for Scanner<'_> {
    type Item = Token;

    fn next(&mut self) -> Option<Token> {
        let rest = &self.seq[self.pos..];
        let &bit = rest.first()?;
        let limit = self.max_run.max(self.l_fix);
        let run = rest.iter().take(limit).take_while(|&&b| b == bit).count();
        if run >= self.l_fix || rest.len() < self.l_fix {
            let len = run.min(self.max_run);
            self.pos += len;
            Some(Token::Run { bit, len })
        } else {
            let sym = rest[..self.l_fix]
                .iter()
                .fold(0u16, |acc, &b| (acc << 1) | b as u16);
            self.pos += self.l_fix;
            Some(Token::Symbol(sym))
        }
    }
}

/// Occurrence counts of every `l_fix`-bit symbol the scanner would intercept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolCounts {
    counts: Vec<u64>,
}

impl SymbolCounts {
    pub fn new(l_fix: u8) -> Self {
        SymbolCounts {
            counts: vec![0; 1 << l_fix],
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        assert!(counts.len().is_power_of_two());
        SymbolCounts { counts }
    }

    pub fn add_sequence(&mut self, seq: &[bool], params: &CodecParams) {
        debug_assert_eq!(self.counts.len(), params.symbol_count());
        for tok in Scanner::new(seq, params) {
            if let Token::Symbol(s) = tok {
                self.counts[s as usize] += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &SymbolCounts) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn count_symbols<'a>(
    sequences: impl IntoIterator<Item = &'a [bool]>,
    params: &CodecParams,
) -> SymbolCounts {
    let mut counts = SymbolCounts::new(params.l_fix);
    for seq in sequences {
        counts.add_sequence(seq, params);
    }
    counts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub bits: u64,
    pub len: u8,
}

const NO_CHILD: u32 = u32::MAX;
const LEAF: u32 = 1 << 31;

/// A prefix code over the `2^l_fix` fixed-width symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanTable {
    codes: Vec<Option<Codeword>>,
    // Binary trie for decoding; entries are child node indices or `LEAF | symbol`.
    trie: Vec<[u32; 2]>,
}

impl HuffmanTable {
    /// A table with no symbols; valid for sequences that contain no short runs.
    pub fn empty(l_fix: u8) -> Self {
        HuffmanTable {
            codes: vec![None; 1 << l_fix],
            trie: vec![[NO_CHILD; 2]],
        }
    }

    /// Canonical code for the given lengths (0 = absent).
    ///
    /// Lengths must form a complete prefix code, except that a lone symbol of
    /// length 1 is allowed (it is coded as `0`).
    pub fn from_code_lengths(lengths: &[u8]) -> Result<Self> {
        if !lengths.len().is_power_of_two() || lengths.len() < 4 {
            return Err(Error::Parameter(format!(
                "{} code lengths is not a symbol alphabet",
                lengths.len()
            )));
        }
        let present: Vec<usize> = (0..lengths.len()).filter(|&s| lengths[s] > 0).collect();
        if let Some(&s) = present.iter().find(|&&s| lengths[s] > MAX_CODE_LEN) {
            return corrupt(format!("code length {} exceeds {MAX_CODE_LEN}", lengths[s]));
        }
        match present.len() {
            0 => {}
            1 if lengths[present[0]] == 1 => {}
            1 => return corrupt("single-symbol code must have length 1"),
            _ => {
                // Kraft sum scaled by 2^MAX_CODE_LEN must equal exactly 2^MAX_CODE_LEN.
                let kraft: u128 = present
                    .iter()
                    .map(|&s| 1u128 << (MAX_CODE_LEN - lengths[s]))
                    .sum();
                if kraft != 1u128 << MAX_CODE_LEN {
                    return corrupt("code lengths do not form a complete prefix code");
                }
            }
        }
        let mut order = present;
        order.sort_by_key(|&s| (lengths[s], s));
        let mut codes = vec![None; lengths.len()];
        let mut code = 0u64;
        let mut prev_len = order.first().map_or(0, |&s| lengths[s]);
        for &s in &order {
            let len = lengths[s];
            code <<= len - prev_len;
            codes[s] = Some(Codeword { bits: code, len });
            code += 1;
            prev_len = len;
        }
        Self::from_codes(codes)
    }

    /// A table with explicitly assigned codewords, indexed by symbol. The code
    /// must be prefix-free but need not be complete.
    pub fn from_codewords(l_fix: u8, words: &[(u16, &str)]) -> Result<Self> {
        let mut codes = vec![None; 1 << l_fix];
        for &(sym, word) in words {
            let slot = codes
                .get_mut(sym as usize)
                .ok_or_else(|| Error::Parameter(format!("symbol {sym} wider than {l_fix} bits")))?;
            if word.is_empty() || word.len() > MAX_CODE_LEN as usize {
                return Err(Error::Parameter(format!(
                    "bad codeword length for {word:?}"
                )));
            }
            let bits = u64::from_str_radix(word, 2)
                .map_err(|_| Error::Parameter(format!("codeword {word:?} is not binary")))?;
            *slot = Some(Codeword {
                bits,
                len: word.len() as u8,
            });
        }
        Self::from_codes(codes)
            .map_err(|_| Error::Parameter("codewords are not prefix-free".into()))
    }

    fn from_codes(codes: Vec<Option<Codeword>>) -> Result<Self> {
        let mut trie = vec![[NO_CHILD; 2]];
        for (sym, code) in codes.iter().enumerate() {
            let Some(cw) = code else { continue };
            let mut node = 0usize;
            for i in (0..cw.len).rev() {
                let bit = ((cw.bits >> i) & 1) as usize;
                let next = trie[node][bit];
                if i == 0 {
                    if next != NO_CHILD {
                        return corrupt("codeword collides with another");
                    }
                    trie[node][bit] = LEAF | sym as u32;
                } else if next == NO_CHILD {
                    trie.push([NO_CHILD; 2]);
                    let idx = (trie.len() - 1) as u32;
                    trie[node][bit] = idx;
                    node = idx as usize;
                } else if next & LEAF != 0 {
                    return corrupt("codeword extends another codeword");
                } else {
                    node = next as usize;
                }
            }
        }
        Ok(HuffmanTable { codes, trie })
    }

    pub fn l_fix(&self) -> u8 {
        self.codes.len().trailing_zeros() as u8
    }

    pub fn codeword(&self, symbol: u16) -> Option<Codeword> {
        self.codes.get(symbol as usize).copied().flatten()
    }

    pub fn code_lengths(&self) -> Vec<u8> {
        self.codes
            .iter()
            .map(|c| c.map_or(0, |cw| cw.len))
            .collect()
    }

    pub fn symbol_count(&self) -> usize {
        self.codes.iter().filter(|c| c.is_some()).count()
    }

    fn decode_symbol(&self, reader: &mut BitReader<'_>) -> Result<u16> {
        let mut node = 0usize;
        loop {
            let bit = reader.read_bit()? as usize;
            let next = self.trie[node][bit];
            if next == NO_CHILD {
                return corrupt("codeword not in table");
            }
            if next & LEAF != 0 {
                return Ok((next & !LEAF) as u16);
            }
            node = next as usize;
        }
    }
}

/// Optimal code lengths for `counts`, then the canonical table for them.
///
/// Merges always take the two lightest subtrees, ordered by
/// `(count, smallest symbol in subtree)`, which makes the result deterministic.
pub fn build_huffman(counts: &SymbolCounts) -> HuffmanTable {
    let n = counts.counts.len();
    let l_fix = n.trailing_zeros() as u8;
    let present: Vec<usize> = (0..n).filter(|&s| counts.counts[s] > 0).collect();
    let mut lengths = vec![0u8; n];
    match present.len() {
        0 => return HuffmanTable::empty(l_fix),
        1 => lengths[present[0]] = 1,
        _ => {
            // Nodes 0..n are leaves; internal nodes are appended with their parent link.
            let mut parent: Vec<usize> = vec![usize::MAX; n];
            let mut heap = BinaryHeap::new();
            for &s in &present {
                heap.push(Reverse((counts.counts[s], s, s)));
            }
            while heap.len() > 1 {
                let Reverse((ca, ma, a)) = heap.pop().unwrap();
                let Reverse((cb, mb, b)) = heap.pop().unwrap();
                let id = parent.len();
                parent.push(usize::MAX);
                parent[a] = id;
                parent[b] = id;
                heap.push(Reverse((ca + cb, ma.min(mb), id)));
            }
            for &s in &present {
                let mut depth = 0usize;
                let mut node = s;
                while parent[node] != usize::MAX {
                    node = parent[node];
                    depth += 1;
                }
                assert!(depth <= MAX_CODE_LEN as usize, "Huffman tree too deep");
                lengths[s] = depth as u8;
            }
        }
    }
    HuffmanTable::from_code_lengths(&lengths).expect("Huffman lengths are complete")
}

fn missing_symbol(sym: u16) -> Error {
    Error::Parameter(format!("symbol {sym:b} has no codeword in the table"))
}

/// Size of `encode(seq)` in bits, without producing it.
pub fn encoded_len(seq: &[bool], params: &CodecParams, table: &HuffmanTable) -> Result<usize> {
    let run_record = 2 + params.l_run as usize;
    let mut total = 0usize;
    for tok in Scanner::new(seq, params) {
        total += match tok {
            Token::Run { .. } => run_record,
            Token::Symbol(s) => {
                1 + table.codeword(s).ok_or_else(|| missing_symbol(s))?.len as usize
            }
        };
    }
    Ok(total)
}

pub fn encode(seq: &[bool], params: &CodecParams, table: &HuffmanTable) -> Result<BitBuffer> {
    let mut out = BitBuffer::with_capacity(seq.len() / 2);
    encode_into(seq, params, table, &mut out)?;
    Ok(out)
}

fn encode_into(
    seq: &[bool],
    params: &CodecParams,
    table: &HuffmanTable,
    out: &mut BitBuffer,
) -> Result<()> {
    for tok in Scanner::new(seq, params) {
        match tok {
            Token::Run { bit, len } => {
                out.push(false);
                out.push_bits(len as u64, params.l_run as usize);
                out.push(bit);
            }
            Token::Symbol(s) => {
                let cw = table.codeword(s).ok_or_else(|| missing_symbol(s))?;
                out.push(true);
                out.push_bits(cw.bits, cw.len as usize);
            }
        }
    }
    Ok(())
}

/// Inverse of [`encode`]. The stream must produce exactly `target_len` bits
/// and be consumed completely.
pub fn decode(
    coded: &[bool],
    params: &CodecParams,
    table: &HuffmanTable,
    target_len: usize,
) -> Result<Vec<bool>> {
    let mut reader = BitReader::new(coded);
    let mut out = Vec::with_capacity(target_len);
    let l_fix = params.l_fix as usize;
    while out.len() < target_len {
        if reader.read_bit()? {
            let sym = table.decode_symbol(&mut reader)?;
            if out.len() + l_fix > target_len {
                return corrupt("symbol overruns the target length");
            }
            out.extend((0..l_fix).rev().map(|i| (sym >> i) & 1 == 1));
        } else {
            let len = reader.read_bits(params.l_run as usize)? as usize;
            let bit = reader.read_bit()?;
            if len == 0 {
                return corrupt("zero-length run record");
            }
            if out.len() + len > target_len {
                return corrupt("run overruns the target length");
            }
            out.resize(out.len() + len, bit);
        }
    }
    if reader.remaining() != 0 {
        return corrupt(format!(
            "{} trailing bits after decoding",
            reader.remaining()
        ));
    }
    Ok(out)
}

/// A processed bit-plane record: either compressed under one rearrangement, or raw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompressedPlane {
    Compressed {
        mode: RearrangeMode,
        payload: BitBuffer,
    },
    Raw {
        bits: BitBuffer,
    },
}

impl CompressedPlane {
    /// `false` (0) for compressed, `true` (1) for raw.
    pub fn mark(&self) -> bool {
        matches!(self, CompressedPlane::Raw { .. })
    }

    pub fn is_compressed(&self) -> bool {
        !self.mark()
    }

    pub fn payload(&self) -> &BitBuffer {
        match self {
            CompressedPlane::Compressed { payload, .. } => payload,
            CompressedPlane::Raw { bits } => bits,
        }
    }

    pub fn serialized_len(&self) -> usize {
        match self {
            CompressedPlane::Compressed { payload, .. } => 3 + payload.len(),
            CompressedPlane::Raw { bits } => 1 + bits.len(),
        }
    }

    /// Appends `[mark][mode:2][payload]` or `[mark][raw bits]`.
    pub fn write_to(&self, out: &mut BitBuffer) {
        out.push(self.mark());
        match self {
            CompressedPlane::Compressed { mode, payload } => {
                out.push_bits(mode.to_bits() as u64, 2);
                out.extend_from_slice(payload.as_slice());
            }
            CompressedPlane::Raw { bits } => out.extend_from_slice(bits.as_slice()),
        }
    }

    /// Reads one record. `payload_len` is the compressed payload size (ignored for raw records).
    pub fn read_from(
        reader: &mut BitReader<'_>,
        pixel_count: usize,
        payload_len: usize,
    ) -> Result<Self> {
        if reader.read_bit()? {
            Ok(CompressedPlane::Raw {
                bits: reader.take(pixel_count)?.to_vec().into(),
            })
        } else {
            let mode = RearrangeMode::from_bits(reader.read_bits(2)? as u8);
            Ok(CompressedPlane::Compressed {
                mode,
                payload: reader.take(payload_len)?.to_vec().into(),
            })
        }
    }

    /// Decodes back to the raster-order plane.
    pub fn decompress(
        &self,
        params: &CodecParams,
        table: &HuffmanTable,
        rows: usize,
        cols: usize,
        k: u8,
    ) -> Result<BitPlane> {
        let count = rows * cols;
        let bits = match self {
            CompressedPlane::Raw { bits } => {
                if bits.len() != count {
                    return corrupt("raw plane has the wrong size");
                }
                bits.as_slice().to_vec()
            }
            CompressedPlane::Compressed { mode, payload } => {
                let seq = decode(payload.as_slice(), params, table, count)?;
                Rearrangement::new(rows, cols, params.t, *mode)?.invert(&seq)?
            }
        };
        BitPlane::new(rows, cols, k, bits)
    }
}

/// Compresses a plane given the four precomputed rearrangements of its shape.
///
/// The shortest encoding wins, ties going to the lowest mode. A raw record is
/// returned unless the compressed record is strictly smaller.
pub fn compress_plane_with(
    plane: &BitPlane,
    rearrangements: &[Rearrangement; 4],
    params: &CodecParams,
    table: &HuffmanTable,
) -> Result<CompressedPlane> {
    let candidates: Vec<Vec<bool>> = rearrangements
        .iter()
        .map(|r| r.apply(plane.bits()))
        .collect();
    compress_candidates(plane.bits(), candidates, params, table)
}

/// Picks the shortest of the four rearranged `candidates` (indexed by mode
/// bits) or falls back to the raw `plane` bits.
pub fn compress_candidates(
    plane: &[bool],
    candidates: Vec<Vec<bool>>,
    params: &CodecParams,
    table: &HuffmanTable,
) -> Result<CompressedPlane> {
    if candidates.len() != RearrangeMode::ALL.len() {
        return Err(Error::Parameter(format!(
            "expected 4 candidates, got {}",
            candidates.len()
        )));
    }
    let mut best: Option<(usize, usize, Vec<bool>)> = None;
    for (idx, seq) in candidates.into_iter().enumerate() {
        let len = encoded_len(&seq, params, table)?;
        if best.as_ref().is_none_or(|(l, _, _)| len < *l) {
            best = Some((len, idx, seq));
        }
    }
    let (len, idx, seq) = best.expect("four candidates");
    if 3 + len > plane.len() {
        return Ok(CompressedPlane::Raw {
            bits: plane.to_vec().into(),
        });
    }
    let payload = encode(&seq, params, table)?;
    debug_assert_eq!(payload.len(), len);
    Ok(CompressedPlane::Compressed {
        mode: RearrangeMode::ALL[idx],
        payload,
    })
}

pub fn compress_plane(
    plane: &BitPlane,
    params: &CodecParams,
    table: &HuffmanTable,
) -> Result<CompressedPlane> {
    let rearrangements = Rearrangement::all_modes(plane.rows(), plane.cols(), params.t)?;
    compress_plane_with(plane, &rearrangements, params, table)
}
