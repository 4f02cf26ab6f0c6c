//! Bit-packed bitvectors and small-alphabet symbol sequences with rank/select.
//!
//! Every rank/select query in this module uses 1-based positions: `rank(i)`
//! counts occurrences in positions `1..=i` and `select(j)` returns the
//! 1-based position of the `j`-th occurrence, with `select(0) == 0`.
//! Storage is 0-based internally; [`RawBits`] and [`PackedInts`] expose the
//! 0-based mutable view used by the merge scratch arrays.

use std::fmt;

use thiserror::Error;

/// A symbol. `0` is the sentinel `$`, regular symbols are `1..=sigma`.
pub type Sym = u8;

/// The sentinel symbol `$`, smaller than every alphabet symbol.
pub const SENTINEL: Sym = 0;

const WORD: usize = 64;
/// Bits covered by one rank superblock of a [`BitVec`].
const SUPER_BITS: usize = 512;
const WORDS_PER_SUPER: usize = SUPER_BITS / WORD;
/// Symbols covered by one count block of a [`SymSeq`].
const SYM_BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RangeError {
    #[error("position {pos} out of range for length {len}")]
    Position { pos: usize, len: usize },
    #[error("rank {rank} exceeds the {count} occurrences of symbol {symbol}")]
    Rank { symbol: usize, rank: usize, count: usize },
    #[error("symbol {symbol} outside alphabet 0..={sigma}")]
    Symbol { symbol: usize, sigma: usize },
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Position (0-based) of the `j`-th set bit (0-based `j`) in `word`.
#[inline]
fn select_in_word(mut word: u64, j: u32) -> u32 {
    for _ in 0..j {
        word &= word - 1;
    }
    word.trailing_zeros()
}

/// A fixed-length mutable bit array without any index. 0-based.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct RawBits {
    words: Vec<u64>,
    len: usize,
}

impl RawBits {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; words_for(len)], len }
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self { words: Vec::with_capacity(words_for(bits)), len: 0 }
    }

    pub fn from_words(words: Vec<u64>, len: usize) -> Self {
        assert!(words.len() >= words_for(len));
        let mut raw = Self { words, len };
        raw.words.truncate(words_for(len));
        raw.clear_tail();
        raw
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn fill(&mut self, bit: bool) {
        let v = if bit { u64::MAX } else { 0 };
        self.words.iter_mut().for_each(|w| *w = v);
        self.clear_tail();
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl FromIterator<bool> for RawBits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let iter = iter.into_iter();
        let mut raw = RawBits::with_capacity(iter.size_hint().0);
        for b in iter {
            raw.push(b);
        }
        raw
    }
}

impl fmt::Debug for RawBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RawBits(")?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

/// Immutable bitvector with constant-time rank and logarithmic select.
#[derive(Clone)]
pub struct BitVec {
    bits: RawBits,
    /// Cumulative count of ones before each superblock; one trailing entry.
    supers: Vec<u64>,
    ones: usize,
}

impl BitVec {
    pub fn new(bits: RawBits) -> Self {
        let nwords = bits.words.len();
        let mut supers = Vec::with_capacity(nwords / WORDS_PER_SUPER + 2);
        let mut acc = 0u64;
        for (w, word) in bits.words.iter().enumerate() {
            if w % WORDS_PER_SUPER == 0 {
                supers.push(acc);
            }
            acc += word.count_ones() as u64;
        }
        supers.push(acc);
        Self { bits, supers, ones: acc as usize }
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let mut raw = RawBits::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => raw.push(false),
                '1' => raw.push(true),
                c if c.is_whitespace() => {}
                _ => return None,
            }
        }
        Some(Self::new(raw))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len() - self.ones
    }

    pub fn raw(&self) -> &RawBits {
        &self.bits
    }

    pub fn into_raw(self) -> RawBits {
        self.bits
    }

    /// Bit at 1-based position `pos`.
    #[inline]
    pub fn get(&self, pos: usize) -> bool {
        assert!(pos >= 1 && pos <= self.len(), "position {pos} out of range 1..={}", self.len());
        self.bits.get(pos - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter()
    }

    /// Number of ones in positions `1..=i`. Panics if `i > len`.
    #[inline]
    pub fn rank1(&self, i: usize) -> usize {
        assert!(i <= self.len(), "rank position {i} out of range 0..={}", self.len());
        let w = i / WORD;
        let sb = w / WORDS_PER_SUPER;
        let mut r = self.supers[sb] as usize;
        for word in &self.bits.words[sb * WORDS_PER_SUPER..w] {
            r += word.count_ones() as usize;
        }
        let rem = i % WORD;
        if rem != 0 {
            r += (self.bits.words[w] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        r
    }

    #[inline]
    pub fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }

    /// 1-based position of the `j`-th one; `select1(0) == 0`.
    pub fn select1(&self, j: usize) -> usize {
        assert!(j <= self.ones, "select1({j}) with only {} ones", self.ones);
        if j == 0 {
            return 0;
        }
        self.select_impl(j, true)
    }

    /// 1-based position of the `j`-th zero; `select0(0) == 0`.
    pub fn select0(&self, j: usize) -> usize {
        assert!(j <= self.count_zeros(), "select0({j}) with only {} zeros", self.count_zeros());
        if j == 0 {
            return 0;
        }
        self.select_impl(j, false)
    }

    fn select_impl(&self, j: usize, bit: bool) -> usize {
        let count_before = |sb: usize| -> usize {
            let ones = self.supers[sb] as usize;
            if bit {
                ones
            } else {
                (sb * SUPER_BITS).min(self.len()) - ones
            }
        };
        // last superblock whose preceding count is < j
        let nsuper = self.supers.len() - 1;
        let (mut lo, mut hi) = (0usize, nsuper);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if count_before(mid) < j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut remaining = j - count_before(lo);
        let mut w = lo * WORDS_PER_SUPER;
        loop {
            let mut word = self.bits.words[w];
            if !bit {
                word = !word;
                let valid = self.len() - w * WORD;
                if valid < WORD {
                    word &= (1u64 << valid) - 1;
                }
            }
            let c = word.count_ones() as usize;
            if remaining <= c {
                let off = select_in_word(word, (remaining - 1) as u32) as usize;
                return w * WORD + off + 1;
            }
            remaining -= c;
            w += 1;
        }
    }

    pub fn rank(&self, bit: bool, i: usize) -> Result<usize, RangeError> {
        if i > self.len() {
            return Err(RangeError::Position { pos: i, len: self.len() });
        }
        Ok(if bit { self.rank1(i) } else { self.rank0(i) })
    }

    pub fn select(&self, bit: bool, j: usize) -> Result<usize, RangeError> {
        let count = if bit { self.ones } else { self.count_zeros() };
        if j > count {
            return Err(RangeError::Rank { symbol: bit as usize, rank: j, count });
        }
        Ok(if bit { self.select1(j) } else { self.select0(j) })
    }

    /// Bits held by the rank directory, excluding the bitvector itself.
    pub fn index_bits(&self) -> usize {
        self.supers.len() * 64
    }
}

impl PartialEq for BitVec {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits
    }
}

impl Eq for BitVec {}

impl From<RawBits> for BitVec {
    fn from(raw: RawBits) -> Self {
        BitVec::new(raw)
    }
}

impl FromIterator<bool> for BitVec {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitVec::new(iter.into_iter().collect())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Fixed-width unsigned integers packed contiguously, LSB first, entries may
/// straddle word boundaries. 0-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PackedInts {
    words: Vec<u64>,
    len: usize,
    width: u8,
}

impl PackedInts {
    pub fn new(width: u8) -> Self {
        assert!((1..=64).contains(&width));
        Self { words: Vec::new(), len: 0, width }
    }

    pub fn zeros(len: usize, width: u8) -> Self {
        assert!((1..=64).contains(&width));
        Self { words: vec![0; words_for(len * width as usize)], len, width }
    }

    pub fn from_words(words: Vec<u64>, len: usize, width: u8) -> Self {
        assert!((1..=64).contains(&width));
        assert!(words.len() >= words_for(len * width as usize));
        let mut p = Self { words, len, width };
        p.words.truncate(words_for(len * width as usize));
        p
    }

    /// Smallest width able to store `max_value`.
    pub fn width_for(max_value: u64) -> u8 {
        (64 - max_value.leading_zeros()).max(1) as u8
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let w = self.width as usize;
        let bit = i * w;
        let (idx, off) = (bit / WORD, bit % WORD);
        let mut v = self.words[idx] >> off;
        if off + w > WORD {
            v |= self.words[idx + 1] << (WORD - off);
        }
        v & self.mask()
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: u64) {
        debug_assert!(i < self.len);
        let mask = self.mask();
        debug_assert!(value <= mask, "value {value} does not fit in {} bits", self.width);
        let w = self.width as usize;
        let bit = i * w;
        let (idx, off) = (bit / WORD, bit % WORD);
        self.words[idx] = (self.words[idx] & !(mask << off)) | ((value & mask) << off);
        if off + w > WORD {
            let spill = off + w - WORD;
            let hi_mask = (1u64 << spill) - 1;
            self.words[idx + 1] = (self.words[idx + 1] & !hi_mask) | ((value & mask) >> (WORD - off));
        }
    }

    pub fn push(&mut self, value: u64) {
        self.len += 1;
        let need = words_for(self.len * self.width as usize);
        if self.words.len() < need {
            self.words.push(0);
        }
        self.set(self.len - 1, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Logical payload size in bits.
    pub fn bit_len(&self) -> usize {
        self.len * self.width as usize
    }
}

impl fmt::Debug for PackedInts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

/// Sequence over `{0 = $, 1..=sigma}` with per-symbol rank/select.
#[derive(Clone)]
pub struct SymSeq {
    data: PackedInts,
    sigma: usize,
    /// `counts[b * (sigma + 1) + c]` = occurrences of `c` before block `b`.
    counts: Vec<u64>,
}

impl SymSeq {
    pub fn new(symbols: &[Sym], sigma: usize) -> Result<Self, RangeError> {
        let width = PackedInts::width_for(sigma as u64);
        let mut data = PackedInts::new(width);
        for &s in symbols {
            if s as usize > sigma {
                return Err(RangeError::Symbol { symbol: s as usize, sigma });
            }
            data.push(s as u64);
        }
        Ok(Self::from_packed(data, sigma))
    }

    /// Builds the rank directory over already packed symbols. Values must be
    /// `<= sigma`.
    pub fn from_packed(data: PackedInts, sigma: usize) -> Self {
        let stride = sigma + 1;
        let nblocks = data.len() / SYM_BLOCK + 1;
        let mut counts = vec![0u64; (nblocks + 1) * stride];
        let mut running = vec![0u64; stride];
        for i in 0..data.len() {
            if i % SYM_BLOCK == 0 {
                let b = i / SYM_BLOCK;
                counts[b * stride..(b + 1) * stride].copy_from_slice(&running);
            }
            running[data.get(i) as usize] += 1;
        }
        let last = data.len().div_ceil(SYM_BLOCK).max(1);
        for b in last..=nblocks {
            counts[b * stride..(b + 1) * stride].copy_from_slice(&running);
        }
        if data.is_empty() {
            counts[..stride].iter_mut().for_each(|c| *c = 0);
        }
        Self { data, sigma, counts }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn packed(&self) -> &PackedInts {
        &self.data
    }

    /// Symbol at 1-based position `pos`.
    #[inline]
    pub fn get(&self, pos: usize) -> Sym {
        assert!(pos >= 1 && pos <= self.len(), "position {pos} out of range 1..={}", self.len());
        self.data.get(pos - 1) as Sym
    }

    /// Symbol at 0-based index `i`.
    #[inline]
    pub fn at(&self, i: usize) -> Sym {
        self.data.get(i) as Sym
    }

    pub fn iter(&self) -> impl Iterator<Item = Sym> + '_ {
        self.data.iter().map(|v| v as Sym)
    }

    pub fn to_vec(&self) -> Vec<Sym> {
        self.iter().collect()
    }

    /// Total occurrences of `c`.
    pub fn count(&self, c: Sym) -> usize {
        if c as usize > self.sigma {
            return 0;
        }
        self.rank_c(c, self.len())
    }

    /// Occurrences of `c` in positions `1..=i`. Panics if `i > len`.
    pub fn rank_c(&self, c: Sym, i: usize) -> usize {
        assert!(i <= self.len(), "rank position {i} out of range 0..={}", self.len());
        let c = c as usize;
        if c > self.sigma {
            return 0;
        }
        let b = i / SYM_BLOCK;
        let mut r = self.counts[b * (self.sigma + 1) + c] as usize;
        for j in b * SYM_BLOCK..i {
            if self.data.get(j) as usize == c {
                r += 1;
            }
        }
        r
    }

    /// 1-based position of the `j`-th `c`; `select_c(c, 0) == 0`.
    pub fn select_c(&self, c: Sym, j: usize) -> usize {
        let total = self.count(c);
        assert!(j <= total, "select({c}, {j}) with only {total} occurrences");
        if j == 0 {
            return 0;
        }
        let stride = self.sigma + 1;
        let cu = c as usize;
        let nblocks = self.len().div_ceil(SYM_BLOCK);
        // last block whose preceding count is < j
        let (mut lo, mut hi) = (0usize, nblocks);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if (self.counts[mid * stride + cu] as usize) < j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut seen = self.counts[lo * stride + cu] as usize;
        for i in lo * SYM_BLOCK..self.len() {
            if self.data.get(i) as usize == cu {
                seen += 1;
                if seen == j {
                    return i + 1;
                }
            }
        }
        unreachable!("directory inconsistent with data")
    }

    pub fn rank(&self, c: Sym, i: usize) -> Result<usize, RangeError> {
        if i > self.len() {
            return Err(RangeError::Position { pos: i, len: self.len() });
        }
        if c as usize > self.sigma {
            return Err(RangeError::Symbol { symbol: c as usize, sigma: self.sigma });
        }
        Ok(self.rank_c(c, i))
    }

    pub fn select(&self, c: Sym, j: usize) -> Result<usize, RangeError> {
        if c as usize > self.sigma {
            return Err(RangeError::Symbol { symbol: c as usize, sigma: self.sigma });
        }
        let count = self.count(c);
        if j > count {
            return Err(RangeError::Rank { symbol: c as usize, rank: j, count });
        }
        Ok(self.select_c(c, j))
    }
}

impl PartialEq for SymSeq {
    fn eq(&self, other: &Self) -> bool {
        self.sigma == other.sigma && self.len() == other.len() && self.iter().eq(other.iter())
    }
}

impl Eq for SymSeq {}

impl fmt::Debug for SymSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymSeq").field("sigma", &self.sigma).field("symbols", &self.to_vec()).finish()
    }
}
