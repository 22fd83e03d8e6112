//! Multi-index combinatorics: permutations with parity, the Levi-Civita
//! symbol and canonical keys for completely symmetric tensors.
//!
//! Public entry points take 1-based indices. Kernels work on 0-based
//! [`PermutationTable`]s.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Largest supported dimension `n`.
pub const MAX_DIM: usize = 8;
/// Largest supported tensor rank `m`.
pub const MAX_RANK: usize = 8;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::CapExceeded {
            what: "dimension",
            value: n as u128,
            limit: MAX_DIM as u128,
        });
    }
    Ok(())
}

pub(crate) fn check_rank(m: usize) -> Result<()> {
    if m > MAX_RANK {
        return Err(Error::CapExceeded {
            what: "rank",
            value: m as u128,
            limit: MAX_RANK as u128,
        });
    }
    Ok(())
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// An index string `i_1 i_2 ... i_m` with entries in `1..=dim`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>, dim: usize) -> Result<Self> {
        if let Some(&entry) = entries.iter().find(|&&e| e == 0 || e > dim) {
            return Err(Error::IndexOutOfRange { entry, dim });
        }
        Ok(MultiIndex { entries })
    }

    /// Validates both the entry range and the length.
    pub fn with_rank(entries: Vec<usize>, dim: usize, rank: usize) -> Result<Self> {
        if entries.len() != rank {
            return Err(Error::IndexLength {
                expected: rank,
                found: entries.len(),
            });
        }
        Self::new(entries, dim)
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub(crate) fn from_zero_based(idx: &[usize]) -> Self {
        MultiIndex {
            entries: idx.iter().map(|&i| i + 1).collect(),
        }
    }

    pub(crate) fn to_zero_based(&self) -> Vec<usize> {
        self.entries.iter().map(|&i| i - 1).collect()
    }
}

/// Sorted representative of a permutation class plus the size of the class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalIndex {
    pub sorted: MultiIndex,
    pub multiplicity: u64,
}

/// Number of distinct orderings of `sorted`: `rank! / prod(count!)`.
pub fn multiplicity(idx: &[usize]) -> u64 {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in idx {
        *counts.entry(e).or_default() += 1;
    }
    let denom: u128 = counts.values().map(|&c| factorial(c)).product();
    (factorial(idx.len()) / denom) as u64
}

pub fn canonicalize(idx: &MultiIndex) -> CanonicalIndex {
    let mut sorted = idx.entries.clone();
    sorted.sort_unstable();
    let multiplicity = multiplicity(&sorted);
    CanonicalIndex {
        sorted: MultiIndex { entries: sorted },
        multiplicity,
    }
}

/// Levi-Civita symbol with `eps(1, 2, ..., n) = +1`.
pub fn levi_civita(idx: &MultiIndex, dim: usize) -> Result<i8> {
    if idx.rank() != dim {
        return Err(Error::IndexLength {
            expected: dim,
            found: idx.rank(),
        });
    }
    if let Some(&entry) = idx.entries.iter().find(|&&e| e == 0 || e > dim) {
        return Err(Error::IndexOutOfRange { entry, dim });
    }
    Ok(levi_civita_zero_based(&idx.to_zero_based()))
}

/// Sign by inversion counting; 0 on any repeated entry. No range checks.
pub(crate) fn levi_civita_zero_based(idx: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Heap's algorithm over `0..n` with the sign tracked incrementally.
///
/// Every step is a single transposition, so the sign just flips.
#[derive(Debug, Clone)]
pub struct HeapPermutations {
    current: Vec<usize>,
    counters: Vec<usize>,
    i: usize,
    sign: i8,
    started: bool,
}

impl HeapPermutations {
    pub fn new(n: usize) -> Self {
        HeapPermutations {
            current: (0..n).collect(),
            counters: vec![0; n],
            i: 0,
            sign: 1,
            started: false,
        }
    }

    /// Advances to the next permutation without allocating.
    pub fn next_permutation(&mut self) -> Option<(&[usize], i8)> {
        if !self.started {
            self.started = true;
            return Some((&self.current, self.sign));
        }
        while self.i < self.current.len() {
            if self.counters[self.i] < self.i {
                if self.i.is_multiple_of(2) {
                    self.current.swap(0, self.i);
                } else {
                    self.current.swap(self.counters[self.i], self.i);
                }
                self.sign = -self.sign;
                self.counters[self.i] += 1;
                self.i = 0;
                return Some((&self.current, self.sign));
            }
            self.counters[self.i] = 0;
            self.i += 1;
        }
        None
    }
}

/// All `n!` permutations of `1..=n` with their signs, in a fixed order.
pub fn permutations(n: usize) -> Result<impl Iterator<Item = (Vec<usize>, i8)>> {
    check_dim(n)?;
    let mut heap = HeapPermutations::new(n);
    Ok(std::iter::from_fn(move || {
        heap.next_permutation()
            .map(|(p, s)| (p.iter().map(|&i| i + 1).collect(), s))
    }))
}

/// Flattened 0-based permutations of `0..n`, built once per kernel call.
#[derive(Debug, Clone)]
pub struct PermutationTable {
    n: usize,
    flat: Vec<usize>,
    signs: Vec<i8>,
}

impl PermutationTable {
    pub fn new(n: usize) -> Result<Self> {
        check_dim(n)?;
        let count = factorial(n) as usize;
        let mut flat = Vec::with_capacity(count * n);
        let mut signs = Vec::with_capacity(count);
        let mut heap = HeapPermutations::new(n);
        while let Some((p, s)) = heap.next_permutation() {
            flat.extend_from_slice(p);
            signs.push(s);
        }
        Ok(PermutationTable { n, flat, signs })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    #[inline]
    pub fn get(&self, k: usize) -> (&[usize], i8) {
        (&self.flat[k * self.n..(k + 1) * self.n], self.signs[k])
    }
}

/// Odometer over every tuple in `0..base` of the given length, last slot fastest.
#[derive(Debug, Clone)]
pub(crate) struct Tuples {
    current: Vec<usize>,
    base: usize,
    started: bool,
    done: bool,
}

impl Tuples {
    pub(crate) fn new(base: usize, len: usize) -> Self {
        Tuples {
            current: vec![0; len],
            base,
            started: false,
            done: base == 0 && len > 0,
        }
    }

    pub(crate) fn next_tuple(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        let mut pos = self.current.len();
        loop {
            if pos == 0 {
                self.done = true;
                return None;
            }
            pos -= 1;
            self.current[pos] += 1;
            if self.current[pos] < self.base {
                return Some(&self.current);
            }
            self.current[pos] = 0;
        }
    }
}

/// `sum over all n-tuples of eps(idx) * eps(idx)`, which equals `n!`.
pub fn epsilon_contraction_identity(n: usize) -> Result<i64> {
    check_dim(n)?;
    let mut total = 0i64;
    let mut tuples = Tuples::new(n, n);
    while let Some(t) = tuples.next_tuple() {
        let e = levi_civita_zero_based(t) as i64;
        total += e * e;
    }
    Ok(total)
}
