//! Completely symmetric covariant tensors, Jacobians, and the pullback of
//! metric components under a change of coordinates.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::indexing::{check_dim, check_rank, levi_civita_zero_based, MultiIndex, PermutationTable, Tuples};
use crate::scalar::{Accumulator, RealScalar, Scalar};

/// Every non-decreasing 0-based tuple of length `rank` over `0..dim`, in
/// lexicographic order.
pub fn canonical_slots(dim: usize, rank: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, rank: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == rank {
            out.push(cur.clone());
            return;
        }
        for v in start..dim {
            cur.push(v);
            rec(dim, rank, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, rank, 0, &mut Vec::with_capacity(rank), &mut out);
    out
}

/// Completely symmetric covariant tensor `g_{i1...im}` in dimension `n`.
///
/// Only the sorted representative of each permutation class is stored;
/// missing slots are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T> {
    dim: usize,
    rank: usize,
    components: BTreeMap<Vec<usize>, T>,
}

impl<T: Scalar> SymTensor<T> {
    pub fn zeros(dim: usize, rank: usize) -> Result<Self> {
        check_dim(dim)?;
        check_rank(rank)?;
        if rank < 2 {
            return Err(Error::InvalidArgument(format!("tensor rank must be at least 2, got {rank}")));
        }
        Ok(SymTensor {
            dim,
            rank,
            components: BTreeMap::new(),
        })
    }

    /// Builds a tensor from possibly redundant `(index, value)` pairs.
    ///
    /// Indices in the same permutation class must carry equal values.
    pub fn build<I>(dim: usize, rank: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, T)>,
    {
        let mut tensor = Self::zeros(dim, rank)?;
        for (idx, value) in entries {
            if idx.rank() != rank {
                return Err(Error::IndexLength {
                    expected: rank,
                    found: idx.rank(),
                });
            }
            if let Some(&entry) = idx.entries().iter().find(|&&e| e == 0 || e > dim) {
                return Err(Error::IndexOutOfRange { entry, dim });
            }
            if !value.is_finite_value() {
                return Err(Error::NonFinite {
                    index: idx.entries().to_vec(),
                });
            }
            let mut key = idx.to_zero_based();
            key.sort_unstable();
            match tensor.components.get(&key) {
                Some(existing) if *existing != value => {
                    return Err(Error::Inconsistent {
                        index: key.iter().map(|i| i + 1).collect(),
                        existing: format!("{existing:?}"),
                        new: format!("{value:?}"),
                    });
                }
                Some(_) => {}
                None => {
                    tensor.components.insert(key, value);
                }
            }
        }
        tensor.components.retain(|_, v| !v.is_zero());
        Ok(tensor)
    }

    /// Fills every canonical slot from `f`, which receives the sorted 0-based index.
    pub fn from_canonical_fn<F>(dim: usize, rank: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> T,
    {
        let mut tensor = Self::zeros(dim, rank)?;
        for slot in canonical_slots(dim, rank) {
            let v = f(&slot);
            if !v.is_finite_value() {
                return Err(Error::NonFinite {
                    index: slot.iter().map(|i| i + 1).collect(),
                });
            }
            if !v.is_zero() {
                tensor.components.insert(slot, v);
            }
        }
        Ok(tensor)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of stored (nonzero) independent components.
    pub fn stored_len(&self) -> usize {
        self.components.len()
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<T> {
        if idx.rank() != self.rank {
            return Err(Error::IndexLength {
                expected: self.rank,
                found: idx.rank(),
            });
        }
        if let Some(&entry) = idx.entries().iter().find(|&&e| e == 0 || e > self.dim) {
            return Err(Error::IndexOutOfRange { entry, dim: self.dim });
        }
        Ok(self.get_zero_based(&idx.to_zero_based()))
    }

    /// Unchecked lookup by 0-based index in any order.
    pub(crate) fn get_zero_based(&self, idx: &[usize]) -> T {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.components.get(&key).cloned().unwrap_or_else(T::zero)
    }

    /// Stored components as `(sorted 1-based index, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, &T)> {
        self.components
            .iter()
            .map(|(k, v)| (MultiIndex::from_zero_based(k), v))
    }

    /// Dense row-major table of all `dim^rank` components.
    pub fn dense(&self) -> Vec<T> {
        let mut table = vec![T::zero(); self.dim.pow(self.rank as u32)];
        let mut tuples = Tuples::new(self.dim, self.rank);
        let mut pos = 0;
        while let Some(t) = tuples.next_tuple() {
            table[pos] = self.get_zero_based(t);
            pos += 1;
        }
        table
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut out = self.clone();
        for v in out.components.values_mut() {
            *v = v.clone() * factor.clone();
        }
        out.components.retain(|_, v| !v.is_zero());
        out
    }

    /// Largest absolute component, zero for the zero tensor.
    pub fn max_abs(&self) -> T {
        self.components
            .values()
            .map(|v| v.abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn map_values<U: Scalar, F: FnMut(&T) -> U>(&self, mut f: F) -> SymTensor<U> {
        SymTensor {
            dim: self.dim,
            rank: self.rank,
            components: self
                .components
                .iter()
                .map(|(k, v)| (k.clone(), f(v)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }
}

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        check_dim(n)?;
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(bad) = row.iter().position(|v| !v.is_finite_value()) {
                return Err(Error::NonFinite {
                    index: vec![data.len() / n + 1, bad + 1],
                });
            }
            data.extend(row);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(n: usize, mut f: F) -> Result<Self> {
        check_dim(n)?;
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.n + col]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Self::from_fn(self.n, |r, c| {
            (0..self.n).fold(T::zero(), |acc, k| {
                acc + self.get(r, k).clone() * other.get(k, c).clone()
            })
        })
    }

    pub fn scale(&self, factor: &T) -> Self {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v.clone() * factor.clone()).collect(),
        }
    }
}

/// Determinant by the Levi-Civita expansion
/// `det M = eps_{j1...jn} M[j1][0] M[j2][1] ... M[jn][n-1]`.
pub fn determinant<T: Scalar>(m: &SquareMatrix<T>) -> T {
    let n = m.dim();
    let perms = PermutationTable::new(n).expect("matrix dimension already validated");
    let mut acc = T::Acc::new();
    for k in 0..perms.len() {
        let (p, sign) = perms.get(k);
        let mut term = T::from_int(sign as i64);
        for (col, &row) in p.iter().enumerate() {
            term = term * m.get(row, col).clone();
        }
        acc.add(term);
    }
    acc.value()
}

/// Determinant by LU factorisation with partial pivoting.
pub fn lu_determinant<T: RealScalar>(m: &SquareMatrix<T>) -> T {
    let n = m.dim();
    let mut a = m.data.clone();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().partial_cmp(&a[y * n + col].abs()).unwrap())
            .unwrap();
        if a[pivot * n + col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det = det * p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            for c in col..n {
                a[r * n + c] = a[r * n + c] - f * a[col * n + c];
            }
        }
    }
    det
}

/// Jacobian matrix with `entry(j, i) = dx^j / dx'^i` and its cached determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian<T> {
    matrix: SquareMatrix<T>,
    det: T,
}

impl<T: Scalar> Jacobian<T> {
    /// Rejects singular matrices. Orientation is not checked here.
    pub fn new(matrix: SquareMatrix<T>) -> Result<Self> {
        let det = determinant(&matrix);
        if det.is_zero() || !det.is_finite_value() {
            return Err(Error::Singular);
        }
        Ok(Jacobian { matrix, det })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::new(SquareMatrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(SquareMatrix::identity(n)?)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn det(&self) -> &T {
        &self.det
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, j: usize, i: usize) -> &T {
        self.matrix.get(j, i)
    }

    /// Jacobian of the composite change `x -> x' -> x''`, i.e. `self * inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        Self::new(self.matrix.mul(&inner.matrix)?)
    }

    pub fn negate(&self) -> Result<Self> {
        Self::new(self.matrix.scale(&-T::one()))
    }
}

/// Transformed components `g'_{i1..im} = J[j1][i1] ... J[jm][im] g_{j1..jm}`.
///
/// Computed once per canonical target slot, so the result is exactly symmetric.
pub fn pullback<T: Scalar>(g: &SymTensor<T>, jac: &Jacobian<T>) -> Result<SymTensor<T>> {
    let n = g.dim();
    if jac.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: jac.dim(),
        });
    }
    let m = g.rank();
    let table = g.dense();
    SymTensor::from_canonical_fn(n, m, |target| {
        let mut acc = T::Acc::new();
        let mut sources = Tuples::new(n, m);
        let mut pos = 0;
        while let Some(src) = sources.next_tuple() {
            let gv = &table[pos];
            pos += 1;
            if gv.is_zero() {
                continue;
            }
            let mut term = gv.clone();
            for (j, i) in src.iter().zip(target) {
                term = term * jac.entry(*j, *i).clone();
            }
            acc.add(term);
        }
        acc.value()
    })
}

/// Symmetry class of a rank-`n` density tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

/// Rank-`n`, dimension-`n` tensor density.
///
/// Antisymmetric densities keep only the `12...n` component; symmetric ones
/// keep every canonical slot.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTensor<T> {
    dim: usize,
    components: DensityComponents<T>,
}

#[derive(Debug, Clone, PartialEq)]
enum DensityComponents<T> {
    Antisymmetric(T),
    Symmetric(BTreeMap<Vec<usize>, T>),
}

impl<T: Scalar> DensityTensor<T> {
    pub fn antisymmetric(dim: usize, top: T) -> Self {
        DensityTensor {
            dim,
            components: DensityComponents::Antisymmetric(top),
        }
    }

    /// `slots` maps sorted 0-based indices to values; absent slots are zero.
    pub fn symmetric(dim: usize, slots: BTreeMap<Vec<usize>, T>) -> Self {
        DensityTensor {
            dim,
            components: DensityComponents::Symmetric(slots),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.dim
    }

    pub fn parity(&self) -> Parity {
        match self.components {
            DensityComponents::Antisymmetric(_) => Parity::Antisymmetric,
            DensityComponents::Symmetric(_) => Parity::Symmetric,
        }
    }

    /// The `12...n` component.
    pub fn top_component(&self) -> T {
        self.get_zero_based(&(0..self.dim).collect::<Vec<_>>())
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<T> {
        if idx.rank() != self.dim {
            return Err(Error::IndexLength {
                expected: self.dim,
                found: idx.rank(),
            });
        }
        if let Some(&entry) = idx.entries().iter().find(|&&e| e == 0 || e > self.dim) {
            return Err(Error::IndexOutOfRange { entry, dim: self.dim });
        }
        Ok(self.get_zero_based(&idx.to_zero_based()))
    }

    pub(crate) fn get_zero_based(&self, idx: &[usize]) -> T {
        match &self.components {
            DensityComponents::Antisymmetric(top) => {
                top.clone() * T::from_int(levi_civita_zero_based(idx) as i64)
            }
            DensityComponents::Symmetric(slots) => {
                let mut key = idx.to_vec();
                key.sort_unstable();
                slots.get(&key).cloned().unwrap_or_else(T::zero)
            }
        }
    }

    /// Dense row-major table of all `n^n` components.
    pub fn dense(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim.pow(self.dim as u32));
        let mut tuples = Tuples::new(self.dim, self.dim);
        while let Some(t) = tuples.next_tuple() {
            out.push(self.get_zero_based(t));
        }
        out
    }
}
