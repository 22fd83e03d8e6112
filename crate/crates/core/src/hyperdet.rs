//! Cayley hyperdeterminants of completely symmetric tensors.
//!
//! Every quantity here is the same contraction pattern: fix the first slot of
//! each of `n` tensor factors to a given index string and contract the other
//! `rank - 1` slots against Levi-Civita symbols,
//!
//! ```text
//! C_{a1..an} = eps^{j2_1..j2_n} ... eps^{jm_1..jm_n} T_{a1 j2_1 .. jm_1} ... T_{an j2_n .. jm_n}
//! ```
//!
//! Applied to the metric `g` this gives the density `G_{a1..an}`; with
//! `a = 12..n` it is `hdet[g]`. For odd rank `G` is symmetric and the same
//! contraction applied to `G` gives the second-stage `hdet[G]`.
//!
//! Only nonzero Levi-Civita terms are visited: the sum runs over
//! `(rank - 1)`-tuples of permutations. The outermost permutation splits the
//! work into `n!` fixed chunks, each summed with compensation and merged in
//! chunk order, so results do not depend on the worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indexing::{binomial, factorial, levi_civita, MultiIndex, PermutationTable, Tuples};
use crate::scalar::{Accumulator, Scalar};
use crate::tensor::{canonical_slots, DensityTensor, Parity, SymTensor};

/// Largest term count accepted without `allow_big`: `(6!)^3`, i.e. n = 6, m = 4.
pub const TERM_BUDGET: u128 = 720 * 720 * 720;

/// Dimensions the odd-rank path accepts without `allow_big`.
pub const ODD_PATH_DIMS: [usize; 2] = [2, 4];

#[derive(Debug, Clone, Default)]
pub struct KernelOptions {
    /// Worker threads; `None` uses the ambient rayon pool, `Some(1)` runs inline.
    pub workers: Option<usize>,
    /// Lift the term budget and the odd-path dimension restriction.
    pub allow_big: bool,
}

impl KernelOptions {
    pub fn single_threaded() -> Self {
        KernelOptions {
            workers: Some(1),
            allow_big: false,
        }
    }

    pub fn with_workers(workers: usize) -> Self {
        KernelOptions {
            workers: Some(workers),
            allow_big: false,
        }
    }

    pub(crate) fn run<R: Send>(&self, job: impl FnOnce() -> R + Send) -> R {
        match self.workers {
            Some(w) if w > 1 => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                Ok(pool) => pool.install(job),
                Err(_) => job(),
            },
            _ => job(),
        }
    }
}

fn check_budget(what: &'static str, terms: u128, opts: &KernelOptions) -> Result<()> {
    if !opts.allow_big && terms > TERM_BUDGET {
        return Err(Error::CapExceeded {
            what,
            value: terms,
            limit: TERM_BUDGET,
        });
    }
    Ok(())
}

fn contraction_terms(n: usize, rank: usize) -> u128 {
    factorial(n).saturating_pow(rank as u32 - 1)
}

/// Contraction of a dense `n^rank` table with the first slots fixed to `first`.
struct Contraction<'a, T> {
    table: &'a [T],
    n: usize,
    rank: usize,
    perms: &'a PermutationTable,
}

impl<T: Scalar> Contraction<'_, T> {
    fn evaluate(&self, first: &[usize], opts: &KernelOptions) -> T {
        let chunks = self.perms.len();
        let partials: Vec<T::Acc> = if opts.workers == Some(1) {
            (0..chunks).map(|k| self.chunk(first, k)).collect()
        } else {
            opts.run(|| (0..chunks).into_par_iter().map(|k| self.chunk(first, k)).collect())
        };
        let mut total = T::Acc::new();
        for p in partials {
            total.merge(p);
        }
        total.value()
    }

    /// Sum over all tuples whose outermost permutation is number `k`.
    fn chunk(&self, first: &[usize], k: usize) -> T::Acc {
        let n = self.n;
        let mut acc = T::Acc::new();
        // Row l of `offsets` holds the partial row-major offset of every
        // factor once slots 0..=l are fixed.
        let mut offsets = vec![0usize; self.rank * n];
        offsets[..n].copy_from_slice(first);
        let (p, sign) = self.perms.get(k);
        for r in 0..n {
            offsets[n + r] = offsets[r] * n + p[r];
        }
        if self.rank == 2 {
            self.emit(&offsets[n..2 * n], sign, &mut acc);
        } else {
            self.descend(2, sign, &mut offsets, &mut acc);
        }
        acc
    }

    fn descend(&self, level: usize, sign: i8, offsets: &mut [usize], acc: &mut T::Acc) {
        let n = self.n;
        let last = level + 1 == self.rank;
        for k in 0..self.perms.len() {
            let (p, s) = self.perms.get(k);
            for r in 0..n {
                offsets[level * n + r] = offsets[(level - 1) * n + r] * n + p[r];
            }
            if last {
                self.emit(&offsets[level * n..(level + 1) * n], sign * s, acc);
            } else {
                self.descend(level + 1, sign * s, offsets, acc);
            }
        }
    }

    #[inline]
    fn emit(&self, offsets: &[usize], sign: i8, acc: &mut T::Acc) {
        let mut prod = self.table[offsets[0]].clone();
        for &o in &offsets[1..] {
            if prod.is_zero() {
                return;
            }
            prod = prod * self.table[o].clone();
        }
        if prod.is_zero() {
            return;
        }
        acc.add(if sign < 0 { -prod } else { prod });
    }
}

fn identity_first(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Even-rank hyperdeterminant `hdet[g] = G_{12..n}`; the determinant for rank 2.
pub fn hdet_even<T: Scalar>(g: &SymTensor<T>) -> Result<T> {
    hdet_even_with(g, &KernelOptions::default())
}

pub fn hdet_even_with<T: Scalar>(g: &SymTensor<T>, opts: &KernelOptions) -> Result<T> {
    let (n, m) = (g.dim(), g.rank());
    if m % 2 != 0 {
        return Err(Error::Parity(format!(
            "even-rank hyperdeterminant requested for odd rank {m}; use the odd-rank path"
        )));
    }
    check_budget("contraction terms", contraction_terms(n, m), opts)?;
    let perms = PermutationTable::new(n)?;
    let table = g.dense();
    let c = Contraction {
        table: &table,
        n,
        rank: m,
        perms: &perms,
    };
    Ok(c.evaluate(&identity_first(n), opts))
}

/// First-stage density `G_{j1..jn}`.
///
/// Antisymmetric for even rank (only `G_{12..n}` is computed), symmetric for
/// odd rank (every canonical slot is computed).
pub fn g_density<T: Scalar>(g: &SymTensor<T>) -> Result<DensityTensor<T>> {
    g_density_with(g, &KernelOptions::default())
}

pub fn g_density_with<T: Scalar>(g: &SymTensor<T>, opts: &KernelOptions) -> Result<DensityTensor<T>> {
    let (n, m) = (g.dim(), g.rank());
    let slots = if m % 2 == 0 { 1 } else { binomial(2 * n - 1, n) };
    check_budget(
        "density terms",
        slots.saturating_mul(contraction_terms(n, m)),
        opts,
    )?;
    let perms = PermutationTable::new(n)?;
    let table = g.dense();
    let c = Contraction {
        table: &table,
        n,
        rank: m,
        perms: &perms,
    };
    if m % 2 == 0 {
        return Ok(DensityTensor::antisymmetric(n, c.evaluate(&identity_first(n), opts)));
    }
    let mut components = BTreeMap::new();
    for slot in canonical_slots(n, n) {
        let v = c.evaluate(&slot, opts);
        if !v.is_zero() {
            components.insert(slot, v);
        }
    }
    Ok(DensityTensor::symmetric(n, components))
}

/// A single component `G_{a1..an}` evaluated directly, without assuming any
/// symmetry of `G`.
pub fn density_component<T: Scalar>(g: &SymTensor<T>, idx: &MultiIndex) -> Result<T> {
    let n = g.dim();
    let idx = MultiIndex::with_rank(idx.entries().to_vec(), n, n)?;
    check_budget("contraction terms", contraction_terms(n, g.rank()), &KernelOptions::default())?;
    let perms = PermutationTable::new(n)?;
    let table = g.dense();
    let c = Contraction {
        table: &table,
        n,
        rank: g.rank(),
        perms: &perms,
    };
    Ok(c.evaluate(&idx.to_zero_based(), &KernelOptions::single_threaded()))
}

/// Total contraction `eps^{j1..jn} G_{j1..jn}`.
///
/// `n! G_{12..n}` for antisymmetric densities; a signed sum over permutations
/// of one symmetric slot, hence zero, otherwise.
pub fn total_contraction<T: Scalar>(density: &DensityTensor<T>) -> T {
    let n = density.dim();
    match density.parity() {
        Parity::Antisymmetric => density.top_component() * T::from_int(factorial(n) as i64),
        Parity::Symmetric => {
            let perms = PermutationTable::new(n).expect("density dimension already validated");
            let mut acc = T::Acc::new();
            for k in 0..perms.len() {
                let (p, s) = perms.get(k);
                let v = density.get_zero_based(p);
                acc.add(if s < 0 { -v } else { v });
            }
            acc.value()
        }
    }
}

/// Total contraction summed over all `n^n` index tuples, zero symbols included.
pub fn total_contraction_naive<T: Scalar>(density: &DensityTensor<T>) -> T {
    let n = density.dim();
    let mut acc = T::Acc::new();
    let mut tuples = Tuples::new(n, n);
    while let Some(t) = tuples.next_tuple() {
        let e = crate::indexing::levi_civita_zero_based(t);
        acc.add(density.get_zero_based(t) * T::from_int(e as i64));
    }
    acc.value()
}

fn check_odd_path<T: Scalar>(g: &SymTensor<T>, opts: &KernelOptions) -> Result<()> {
    let (n, m) = (g.dim(), g.rank());
    if m % 2 == 0 {
        return Err(Error::Parity(format!(
            "odd-rank hyperdeterminant requested for even rank {m}; use the even-rank path"
        )));
    }
    if n % 2 != 0 {
        return Err(Error::UnsupportedParity { rank: m, dim: n });
    }
    if !opts.allow_big && !ODD_PATH_DIMS.contains(&n) {
        return Err(Error::CapExceeded {
            what: "odd-rank dimension",
            value: n as u128,
            limit: 4,
        });
    }
    check_budget("second-stage terms", contraction_terms(n, n), opts)
}

/// Second-stage hyperdeterminant `hdet[G] = G~_{12..n}` for odd rank and even
/// dimension.
///
/// For rank 3 in dimension 2, `-hdet[G]` expands to Cayley's 2x2x2
/// hyperdeterminant with the symmetric identifications applied.
pub fn hdet_odd<T: Scalar>(g: &SymTensor<T>) -> Result<T> {
    hdet_odd_with(g, &KernelOptions::default())
}

pub fn hdet_odd_with<T: Scalar>(g: &SymTensor<T>, opts: &KernelOptions) -> Result<T> {
    check_odd_path(g, opts)?;
    let density = g_density_with(g, opts)?;
    second_stage_component(&density, &identity_first(density.dim()), opts)
}

/// Component `G~_{a1..an}` of the second-stage density built from a symmetric `G`.
pub fn second_stage_component<T: Scalar>(
    density: &DensityTensor<T>,
    first: &[usize],
    opts: &KernelOptions,
) -> Result<T> {
    let n = density.dim();
    if first.len() != n || first.iter().any(|&a| a >= n) {
        return Err(Error::IndexLength {
            expected: n,
            found: first.len(),
        });
    }
    check_budget("second-stage terms", contraction_terms(n, n), opts)?;
    let perms = PermutationTable::new(n)?;
    let table = density.dense();
    let c = Contraction {
        table: &table,
        n,
        rank: n,
        perms: &perms,
    };
    Ok(c.evaluate(first, opts))
}

/// Closed form for rank 4 in dimension 2:
/// `g1111 g2222 - 4 g1112 g1222 + 3 g1122^2`.
pub fn closed_form_m4n2<T: Scalar>(g: &SymTensor<T>) -> Result<T> {
    expect_shape(g, 4, 2)?;
    let c = |i: &[usize]| g.get_zero_based(i);
    let g1111 = c(&[0, 0, 0, 0]);
    let g1112 = c(&[0, 0, 0, 1]);
    let g1122 = c(&[0, 0, 1, 1]);
    let g1222 = c(&[0, 1, 1, 1]);
    let g2222 = c(&[1, 1, 1, 1]);
    Ok(g1111 * g2222 - T::from_int(4) * g1112 * g1222 + T::from_int(3) * g1122.clone() * g1122)
}

/// Closed form for rank 3 in dimension 2:
/// `-(g111 g222)^2 + 6 g111 g112 g122 g222 - 4 g111 g122^3 - 4 g112^3 g222 + 3 (g112 g122)^2`.
pub fn closed_form_m3n2<T: Scalar>(g: &SymTensor<T>) -> Result<T> {
    expect_shape(g, 3, 2)?;
    let c = |i: &[usize]| g.get_zero_based(i);
    let a = c(&[0, 0, 0]);
    let b = c(&[0, 0, 1]);
    let d = c(&[0, 1, 1]);
    let e = c(&[1, 1, 1]);
    let ae = a.clone() * e.clone();
    let bd = b.clone() * d.clone();
    Ok(-(ae.clone() * ae.clone()) + T::from_int(6) * ae.clone() * bd.clone()
        - T::from_int(4) * a * d.powu(3)
        - T::from_int(4) * b.powu(3) * e
        + T::from_int(3) * bd.clone() * bd)
}

/// The eight-term expansion for rank 4 in dimension 2 before the symmetric
/// identifications are used.
pub fn raw_expansion_m4n2<T: Scalar>(g: &SymTensor<T>) -> Result<T> {
    expect_shape(g, 4, 2)?;
    let c = |s: &str| raw_lookup(g, s);
    Ok(c("1111") * c("2222") - c("1112") * c("2221") - c("1121") * c("2212") + c("1122") * c("2211")
        - c("1211") * c("2122")
        + c("1212") * c("2121")
        + c("1221") * c("2112")
        - c("1222") * c("2111"))
}

/// The sixteen-term expansion for rank 3 in dimension 2 before the symmetric
/// identifications are used.
pub fn raw_expansion_m3n2<T: Scalar>(g: &SymTensor<T>) -> Result<T> {
    expect_shape(g, 3, 2)?;
    let c = |s: &str| raw_lookup(g, s);
    let sq = |x: T| x.clone() * x;
    let two = T::from_int(2);
    let four = T::from_int(4);
    Ok(-sq(c("111") * c("222")) - sq(c("112") * c("221")) - sq(c("121") * c("212"))
        - sq(c("122") * c("211"))
        + two
            * (c("111") * c("112") * c("221") * c("222")
                + c("111") * c("121") * c("212") * c("222")
                + c("111") * c("122") * c("211") * c("222")
                + c("112") * c("121") * c("212") * c("221")
                + c("112") * c("122") * c("211") * c("221")
                + c("121") * c("122") * c("211") * c("212"))
        - four
            * (c("111") * c("122") * c("212") * c("221") + c("112") * c("121") * c("211") * c("222")))
}

fn raw_lookup<T: Scalar>(g: &SymTensor<T>, digits: &str) -> T {
    let idx: Vec<usize> = digits.bytes().map(|b| (b - b'1') as usize).collect();
    g.get_zero_based(&idx)
}

fn expect_shape<T: Scalar>(g: &SymTensor<T>, rank: usize, dim: usize) -> Result<()> {
    if g.rank() != rank || g.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "closed form needs m = {rank}, n = {dim}; got m = {}, n = {}",
            g.rank(),
            g.dim()
        )));
    }
    Ok(())
}

/// Contraction over every raw index tuple, zero Levi-Civita terms included.
fn raw_contraction<T: Scalar, F>(lookup: F, n: usize, rank: usize, first: &[usize]) -> Result<T>
where
    F: Fn(&MultiIndex) -> Result<T>,
{
    let levels = rank - 1;
    let mut acc = T::Acc::new();
    let mut tuples = Tuples::new(n, levels * n);
    while let Some(t) = tuples.next_tuple() {
        let mut eps = 1i64;
        for level in t.chunks(n) {
            eps *= levi_civita(&MultiIndex::from_zero_based(level), n)? as i64;
        }
        let mut term = T::from_int(eps);
        for (r, &a) in first.iter().enumerate() {
            let mut idx = Vec::with_capacity(rank);
            idx.push(a);
            idx.extend((0..levels).map(|l| t[l * n + r]));
            term = term * lookup(&MultiIndex::from_zero_based(&idx))?;
        }
        acc.add(term);
    }
    Ok(acc.value())
}

/// Brute-force hyperdeterminant for tiny instances.
///
/// Even rank: `n <= 3`, `m <= 4`. Odd rank: only `m = 3`, `n = 2`.
pub fn hdet_dense_oracle<T: Scalar>(g: &SymTensor<T>) -> Result<T> {
    let (n, m) = (g.dim(), g.rank());
    let first: Vec<usize> = (0..n).collect();
    if m % 2 == 0 {
        if n > 3 || m > 4 {
            return Err(Error::CapExceeded {
                what: "dense oracle size (n^((m-1)n))",
                value: (n as u128).pow(((m - 1) * n) as u32),
                limit: 3u128.pow(9),
            });
        }
        return raw_contraction(|i| g.get(i), n, m, &first);
    }
    if n % 2 != 0 {
        return Err(Error::UnsupportedParity { rank: m, dim: n });
    }
    if n != 2 || m != 3 {
        return Err(Error::CapExceeded {
            what: "dense oracle size (n^((m-1)n))",
            value: (n as u128).pow(((m - 1) * n) as u32),
            limit: 16,
        });
    }
    let mut dense_g = BTreeMap::new();
    let mut pairs = Tuples::new(n, n);
    while let Some(a) = pairs.next_tuple() {
        dense_g.insert(a.to_vec(), raw_contraction(|i| g.get(i), n, m, a)?);
    }
    raw_contraction(
        |i| Ok(dense_g[&i.to_zero_based()].clone()),
        n,
        n,
        &first,
    )
}
