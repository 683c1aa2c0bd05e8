//! Histograms, Shannon entropy and canonical Huffman codes for residual
//! symbols, plus the bit cost of best-scheme signaling.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictors::Signal;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolHistogram {
    counts: BTreeMap<i32, u64>,
    total: u64,
}

impl SymbolHistogram {
    pub fn counts(&self) -> &BTreeMap<i32, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, symbol: i32) -> u64 {
        self.counts.get(&symbol).copied().unwrap_or(0)
    }

    pub fn add(&mut self, symbol: i32) {
        *self.counts.entry(symbol).or_default() += 1;
        self.total += 1;
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (i32, u64)>) -> Result<Self> {
        let mut hist = Self::default();
        for (symbol, count) in counts {
            if count > 0 {
                *hist.counts.entry(symbol).or_default() += count;
                hist.total += count;
            }
        }
        if hist.total == 0 {
            return Err(Error::Statistic("histogram with no counts"));
        }
        Ok(hist)
    }
}

pub fn histogram(symbols: &[i32]) -> Result<SymbolHistogram> {
    if symbols.is_empty() {
        return Err(Error::Statistic("histogram of an empty symbol list"));
    }
    let mut hist = SymbolHistogram::default();
    symbols.iter().for_each(|&s| hist.add(s));
    Ok(hist)
}

/// Bits per symbol.
pub fn entropy(hist: &SymbolHistogram) -> f64 {
    let total = hist.total as f64;
    hist.counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * (1.0 / p).log2()
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codeword {
    pub len: u32,
    /// Right-aligned code bits.
    pub bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuffmanTable {
    entries: BTreeMap<i32, Codeword>,
}

impl HuffmanTable {
    pub fn entries(&self) -> &BTreeMap<i32, Codeword> {
        &self.entries
    }

    pub fn get(&self, symbol: i32) -> Result<Codeword> {
        self.entries.get(&symbol).copied().ok_or(Error::Coverage(symbol))
    }

    /// Assigns canonical codewords to the given lengths: symbols ordered by
    /// (length, value), each code one more than the last, left-shifted on
    /// every length increase.
    pub fn from_lengths(lengths: &BTreeMap<i32, u32>) -> Self {
        let mut order: Vec<(u32, i32)> = lengths.iter().map(|(&s, &l)| (l, s)).collect();
        order.sort_unstable();
        let mut entries = BTreeMap::new();
        let mut code = 0u64;
        let mut prev_len = order.first().map_or(0, |&(l, _)| l);
        for (i, &(len, symbol)) in order.iter().enumerate() {
            if i > 0 {
                code = (code + 1) << (len - prev_len);
            }
            prev_len = len;
            entries.insert(symbol, Codeword { len, bits: code });
        }
        Self { entries }
    }

    /// Σ 2^-len.
    pub fn kraft_sum(&self) -> f64 {
        self.entries.values().map(|c| (-(c.len as f64)).exp2()).sum()
    }

    fn decoder(&self) -> BTreeMap<(u32, u64), i32> {
        self.entries.iter().map(|(&s, c)| ((c.len, c.bits), s)).collect()
    }
}

/// Huffman code lengths from the min-heap merge, ties broken by lower weight,
/// then smaller minimum symbol; canonical codewords. A one-symbol alphabet
/// gets the single codeword `0`.
pub fn build_huffman(hist: &SymbolHistogram) -> HuffmanTable {
    let symbols: Vec<i32> = hist.counts.iter().filter(|(_, &c)| c > 0).map(|(&s, _)| s).collect();
    let mut lengths: BTreeMap<i32, u32> = symbols.iter().map(|&s| (s, 0)).collect();
    if symbols.len() == 1 {
        lengths.insert(symbols[0], 1);
        return HuffmanTable::from_lengths(&lengths);
    }
    // (weight, min symbol, node); members[node] lists the leaves below it
    let mut heap = BinaryHeap::new();
    let mut members: Vec<Vec<i32>> = Vec::new();
    for &s in &symbols {
        heap.push(Reverse((hist.count(s), s, members.len())));
        members.push(vec![s]);
    }
    while heap.len() > 1 {
        let Reverse((w1, m1, a)) = heap.pop().unwrap();
        let Reverse((w2, m2, b)) = heap.pop().unwrap();
        let mut merged = std::mem::take(&mut members[a]);
        merged.append(&mut members[b]);
        for s in &merged {
            *lengths.get_mut(s).unwrap() += 1;
        }
        heap.push(Reverse((w1 + w2, m1.min(m2), members.len())));
        members.push(merged);
    }
    HuffmanTable::from_lengths(&lengths)
}

/// Σ count × length.
pub fn code_cost(hist: &SymbolHistogram, table: &HuffmanTable) -> Result<u64> {
    hist.counts
        .iter()
        .map(|(&s, &c)| table.get(s).map(|cw| c * cw.len as u64))
        .sum()
}

/// Growable bit string, most significant bit first within each byte.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitBuffer {
    bytes: Vec<u8>,
    len: u64,
}

impl BitBuffer {
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn push_bit(&mut self, bit: bool) {
        let offset = (self.len % 8) as u32;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.len += 1;
    }

    pub fn push(&mut self, cw: Codeword) {
        for i in (0..cw.len).rev() {
            self.push_bit((cw.bits >> i) & 1 == 1);
        }
    }

    pub fn bit(&self, index: u64) -> Option<bool> {
        (index < self.len).then(|| self.bytes[(index / 8) as usize] & (0x80 >> (index % 8)) != 0)
    }

    /// Flips one bit; for corruption tests.
    pub fn flip(&mut self, index: u64) {
        if index < self.len {
            self.bytes[(index / 8) as usize] ^= 0x80 >> (index % 8);
        }
    }

    /// Drops bits past `len`.
    pub fn truncate(&mut self, len: u64) {
        if len >= self.len {
            return;
        }
        self.len = len;
        self.bytes.truncate(len.div_ceil(8) as usize);
        if len % 8 != 0 {
            *self.bytes.last_mut().unwrap() &= 0xFFu8 << (8 - len % 8);
        }
    }

    /// 8-byte little-endian bit count, then the packed bits.
    pub fn dump<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(&self.len.to_le_bytes())?;
        writer.write_all(&self.bytes)?;
        Ok(())
    }

    pub fn load<R: Read>(mut reader: R) -> Result<Self> {
        let mut head = [0u8; 8];
        reader
            .read_exact(&mut head)
            .map_err(|_| Error::format(0, "bitstream shorter than its 8-byte length prefix"))?;
        let len = u64::from_le_bytes(head);
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        if bytes.len() as u64 != len.div_ceil(8) {
            return Err(Error::format(8, format!("{len} bits need {} bytes, found {}", len.div_ceil(8), bytes.len())));
        }
        Ok(Self { bytes, len })
    }
}

pub fn encode_stream(symbols: &[i32], table: &HuffmanTable) -> Result<BitBuffer> {
    let mut out = BitBuffer::default();
    for &s in symbols {
        out.push(table.get(s)?);
    }
    Ok(out)
}

/// Errors carry the bit offset at which the undecodable codeword starts.
pub fn decode_stream(bits: &BitBuffer, table: &HuffmanTable) -> Result<Vec<i32>> {
    let lookup = table.decoder();
    let max_len = table.entries.values().map(|c| c.len).max().unwrap_or(0);
    let mut symbols = Vec::new();
    let mut pos = 0;
    while pos < bits.len() {
        let start = pos;
        let (mut code, mut len) = (0u64, 0u32);
        loop {
            let Some(bit) = bits.bit(pos) else {
                return Err(Error::Decode { offset: start });
            };
            code = (code << 1) | bit as u64;
            len += 1;
            pos += 1;
            if let Some(&s) = lookup.get(&(len, code)) {
                symbols.push(s);
                break;
            }
            if len >= max_len {
                return Err(Error::Decode { offset: start });
            }
        }
    }
    Ok(symbols)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalingMode {
    /// One median/non-median flag per symbol plus a side bit for non-median.
    Flat,
    /// Huffman code over the observed three-symbol histogram.
    Huffman,
}

/// Total signaling bits. `NONE` symbols belong to signal-free schemes and
/// cost nothing.
pub fn signaling_cost(signals: &[Signal], mode: SignalingMode) -> u64 {
    let coded = signals.iter().filter(|&&s| s != Signal::None);
    match mode {
        SignalingMode::Flat => coded.map(|&s| if s == Signal::Median { 1 } else { 2 }).sum(),
        SignalingMode::Huffman => {
            let symbols: Vec<i32> = coded.map(|s| s.symbol()).collect();
            match histogram(&symbols) {
                Ok(hist) => code_cost(&hist, &build_huffman(&hist)).expect("table built from the same histogram"),
                Err(_) => 0,
            }
        }
    }
}

/// Entropy and Huffman bit total of one residual coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodingSummary {
    pub symbols: u64,
    pub entropy: f64,
    pub bits: u64,
}

pub fn summarize(residuals: &[i32]) -> Result<CodingSummary> {
    let hist = histogram(residuals)?;
    let bits = code_cost(&hist, &build_huffman(&hist))?;
    Ok(CodingSummary {
        symbols: hist.total,
        entropy: entropy(&hist),
        bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lengths(table: &HuffmanTable) -> Vec<(i32, u32)> {
        table.entries().iter().map(|(&s, c)| (s, c.len)).collect()
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(histogram(&[0, 0, 0]).unwrap().counts().clone(), BTreeMap::from([(0, 3)]));
        let h = histogram(&[-1, 0, 0, 1]).unwrap();
        assert_eq!(h.counts().clone(), BTreeMap::from([(-1, 1), (0, 2), (1, 1)]));
        assert_eq!(h.total(), 4);
        assert!(matches!(histogram(&[]), Err(Error::Statistic(_))));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&histogram(&[5; 9]).unwrap()), 0.0);
        assert!((entropy(&histogram(&[0, 1, 2, 3]).unwrap()) - 2.0).abs() < 1e-15);
        assert!((entropy(&histogram(&[0, 0, 1, 2]).unwrap()) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn huffman_examples() {
        assert_eq!(lengths(&build_huffman(&histogram(&[0, 1, 2, 3]).unwrap())), vec![(0, 2), (1, 2), (2, 2), (3, 2)]);
        let t = build_huffman(&histogram(&[7, 7, -1, 4]).unwrap());
        assert_eq!(lengths(&t), vec![(-1, 2), (4, 2), (7, 1)]);
        assert_eq!(t.get(7).unwrap(), Codeword { len: 1, bits: 0 });
        assert_eq!(t.get(-1).unwrap(), Codeword { len: 2, bits: 0b10 });
        assert_eq!(t.get(4).unwrap(), Codeword { len: 2, bits: 0b11 });
        let single = build_huffman(&histogram(&[3]).unwrap());
        assert_eq!(single.get(3).unwrap(), Codeword { len: 1, bits: 0 });
    }

    #[test]
    fn cost_examples() {
        let h = histogram(&[0, 0, 0]).unwrap();
        assert_eq!(code_cost(&h, &build_huffman(&h)).unwrap(), 3);
        let symbols: Vec<i32> = (0..100).map(|i| i % 4).collect();
        let h = histogram(&symbols).unwrap();
        assert_eq!(code_cost(&h, &build_huffman(&h)).unwrap(), 200);
        let other = build_huffman(&histogram(&[1, 2]).unwrap());
        assert!(matches!(code_cost(&h, &other), Err(Error::Coverage(0))));
    }

    #[test]
    fn stream_basics() {
        let h = histogram(&[1, 2, 2]).unwrap();
        let t = build_huffman(&h);
        assert!(encode_stream(&[], &t).unwrap().is_empty());
        assert!(matches!(encode_stream(&[5], &t), Err(Error::Coverage(5))));
        let bits = encode_stream(&[2, 1, 2, 2, 1], &t).unwrap();
        assert_eq!(decode_stream(&bits, &t).unwrap(), vec![2, 1, 2, 2, 1]);
    }

    #[test]
    fn truncated_stream_reports_offset() {
        let h = histogram(&[0, 1, 2, 3, 4, 5]).unwrap();
        let t = build_huffman(&h);
        let mut bits = encode_stream(&[0, 1, 2], &t).unwrap();
        let start_of_last = bits.len() - t.get(2).unwrap().len as u64;
        bits.truncate(bits.len() - 1);
        assert!(matches!(decode_stream(&bits, &t), Err(Error::Decode { offset }) if offset == start_of_last));
    }

    #[test]
    fn dump_format() {
        let mut bits = BitBuffer::default();
        for b in [true, false, true, true, false, false, false, false, true] {
            bits.push_bit(b);
        }
        let mut out = Vec::new();
        bits.dump(&mut out).unwrap();
        assert_eq!(out, vec![9, 0, 0, 0, 0, 0, 0, 0, 0b1011_0000, 0b1000_0000]);
        assert_eq!(BitBuffer::load(out.as_slice()).unwrap(), bits);
        assert!(BitBuffer::load(&out[..9]).is_err());
        assert!(BitBuffer::load(&out[..4]).is_err());
    }

    #[test]
    fn signaling_examples() {
        let n = 40;
        assert_eq!(signaling_cost(&vec![Signal::Median; n], SignalingMode::Flat), 40);
        assert_eq!(signaling_cost(&vec![Signal::Lower; n], SignalingMode::Flat), 80);
        assert_eq!(signaling_cost(&vec![Signal::Median; n], SignalingMode::Huffman), 40);
        assert_eq!(signaling_cost(&vec![Signal::None; n], SignalingMode::Flat), 0);
        assert_eq!(signaling_cost(&[], SignalingMode::Huffman), 0);
        let mixed = [Signal::Median, Signal::Median, Signal::Lower, Signal::Higher];
        assert_eq!(signaling_cost(&mixed, SignalingMode::Flat), 6);
        assert_eq!(signaling_cost(&mixed, SignalingMode::Huffman), 6);
    }

    fn counts() -> impl Strategy<Value = Vec<(i32, u64)>> {
        prop::collection::vec((-40i32..40, 1u64..1000), 2..30)
    }

    proptest! {
        #[test]
        fn kraft_and_redundancy_bound(counts in counts()) {
            let h = SymbolHistogram::from_counts(counts).unwrap();
            prop_assume!(h.counts().len() >= 2);
            let t = build_huffman(&h);
            prop_assert_eq!(t.kraft_sum(), 1.0);
            let mean = code_cost(&h, &t).unwrap() as f64 / h.total() as f64;
            let hh = entropy(&h);
            prop_assert!(hh <= mean + 1e-12 && mean < hh + 1.0, "H={} L={}", hh, mean);
            prop_assert_eq!(build_huffman(&h), t);
        }

        #[test]
        fn round_trip(symbols in prop::collection::vec(-20i32..20, 1..400)) {
            let h = histogram(&symbols).unwrap();
            let t = build_huffman(&h);
            let bits = encode_stream(&symbols, &t).unwrap();
            prop_assert_eq!(bits.len(), code_cost(&h, &t).unwrap());
            prop_assert_eq!(decode_stream(&bits, &t).unwrap(), symbols);
        }
    }
}
