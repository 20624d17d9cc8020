//! Fixed-width bitsets and a few word-slice helpers used by the reachability tables.

use serde::{Deserialize, Serialize};

/// Number of `u64` words needed to hold `bits` bits.
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub fn get_bit(words: &[u64], i: usize) -> bool {
    words[i >> 6] >> (i & 63) & 1 == 1
}

#[inline]
pub fn set_bit(words: &mut [u64], i: usize) {
    words[i >> 6] |= 1u64 << (i & 63);
}

/// `dst |= src` over the common prefix.
#[inline]
pub fn or_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= *s;
    }
}

/// True when `a` and `b` share a set bit among their first `bits` positions.
pub fn intersects_prefix(a: &[u64], b: &[u64], bits: usize) -> bool {
    let full = bits >> 6;
    if a[..full].iter().zip(&b[..full]).any(|(x, y)| x & y != 0) {
        return true;
    }
    let rest = bits & 63;
    rest != 0 && (a[full] & b[full]) & ((1u64 << rest) - 1) != 0
}

/// The `len ≤ 64` bits starting at `start`, as the low bits of a word.
#[inline]
pub fn read_bits(words: &[u64], start: usize, len: usize) -> u64 {
    debug_assert!(len <= 64);
    if len == 0 {
        return 0;
    }
    let (w, o) = (start >> 6, start & 63);
    let mut v = words[w] >> o;
    if o + len > 64 {
        v |= words[w + 1] << (64 - o);
    }
    if len < 64 {
        v &= (1u64 << len) - 1;
    }
    v
}

/// ORs the low `len ≤ 64` bits of `value` into the bits starting at `start`.
#[inline]
pub fn or_bits(words: &mut [u64], start: usize, len: usize, value: u64) {
    debug_assert!(len <= 64);
    if len == 0 {
        return;
    }
    let value = if len < 64 { value & ((1u64 << len) - 1) } else { value };
    let (w, o) = (start >> 6, start & 63);
    words[w] |= value << o;
    if o + len > 64 {
        words[w + 1] |= value >> (64 - o);
    }
}

/// Indices of set bits in a word slice.
pub fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let t = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(wi * 64 + t)
        })
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet { len, words: vec![0; words_for(len)] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && get_bit(&self.words, i)
    }

    /// Sets bit `i`; returns true when it was previously clear.
    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let (w, m) = (i >> 6, 1u64 << (i & 63));
        let fresh = self.words[w] & m == 0;
        self.words[w] |= m;
        fresh
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.len {
            self.words[i >> 6] &= !(1u64 << (i & 63));
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    /// `self |= other`; returns true if anything changed.
    pub fn union_with(&mut self, other: &BitSet) -> bool {
        let mut changed = false;
        for (d, s) in self.words.iter_mut().zip(&other.words) {
            let n = *d | *s;
            changed |= n != *d;
            *d = n;
        }
        changed
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        ones(&self.words)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}
