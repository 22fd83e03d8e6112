//! Natural volume densities, non-degeneracy tests, transformation-law
//! verification and box integration over sampled metric fields.
//!
//! Even rank `m`: `omega_{12..n} = |hdet[g]|^(1/m)`.
//! Odd rank with even `n`: `omega_{12..n} = |hdet[G]|^(1/(mn))` where `G` is
//! the first-stage density. Odd rank with odd `n` is refused.
//!
//! Both are positive scalar densities of weight one: under an
//! orientation-preserving change of coordinates they pick up exactly one
//! factor of the Jacobian determinant.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hyperdet::{
    g_density_with, hdet_even_with, hdet_odd_with, second_stage_component, total_contraction, KernelOptions,
};
use crate::indexing::{levi_civita_zero_based, Tuples};
use crate::scalar::{Accumulator, RealScalar};
use crate::tensor::{pullback, Jacobian, SymTensor};

/// Default relative threshold for [`is_nondegenerate`].
pub const DEFAULT_TOL: f64 = 1e-9;

/// Denominator floor for every relative error reported here.
pub const RELATIVE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `|hdet[g]|^(1/m)`.
    EvenRank,
    /// `|hdet[G]|^(1/(mn))`.
    OddRankEvenDim,
}

impl Branch {
    pub fn for_shape(rank: usize, dim: usize) -> Result<Branch> {
        match (rank.is_multiple_of(2), dim.is_multiple_of(2)) {
            (true, _) => Ok(Branch::EvenRank),
            (false, true) => Ok(Branch::OddRankEvenDim),
            (false, false) => Err(Error::UnsupportedParity { rank, dim }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::EvenRank => "even-m",
            Branch::OddRankEvenDim => "odd-m-even-n",
        }
    }

    /// Root taken of the hyperdeterminant: `m` or `m * n`.
    pub fn root(self, rank: usize, dim: usize) -> usize {
        match self {
            Branch::EvenRank => rank,
            Branch::OddRankEvenDim => rank * dim,
        }
    }

    /// Polynomial degree of the hyperdeterminant in the metric components.
    pub fn degree(self, dim: usize) -> usize {
        match self {
            Branch::EvenRank => dim,
            Branch::OddRankEvenDim => dim * dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeDensity<T> {
    /// `omega_{12..n}`, never negative.
    pub value: T,
    pub branch: Branch,
    /// Signed hyperdeterminant the root was taken of.
    pub hdet_value: T,
    /// Set when `hdet_value` is exactly zero.
    pub degenerate: bool,
}

/// `|x|^(1/k)` via `exp(ln|x| / k)`; zero maps to zero.
fn abs_root<T: RealScalar>(x: T, k: usize) -> T {
    if x == T::zero() {
        return T::zero();
    }
    (x.abs().ln() / T::from_f64_lossy(k as f64)).exp()
}

fn relative_error<T: RealScalar>(lhs: T, rhs: T) -> T {
    (lhs - rhs).abs() / rhs.abs().max(T::from_f64_lossy(RELATIVE_FLOOR))
}

fn relative_error_slices<T: RealScalar>(lhs: &[T], rhs: &[T]) -> T {
    let scale = rhs.iter().fold(T::zero(), |a, b| a.max(b.abs()));
    let diff = lhs
        .iter()
        .zip(rhs)
        .fold(T::zero(), |a, (l, r)| a.max((*l - *r).abs()));
    diff / scale.max(T::from_f64_lossy(RELATIVE_FLOOR))
}

/// The hyperdeterminant selected by the branch: `hdet[g]` or `hdet[G]`.
pub fn branch_hdet<T: RealScalar>(g: &SymTensor<T>, opts: &KernelOptions) -> Result<(Branch, T)> {
    let branch = Branch::for_shape(g.rank(), g.dim())?;
    let h = match branch {
        Branch::EvenRank => hdet_even_with(g, opts)?,
        Branch::OddRankEvenDim => hdet_odd_with(g, opts)?,
    };
    Ok((branch, h))
}

pub fn volume_density<T: RealScalar>(g: &SymTensor<T>) -> Result<VolumeDensity<T>> {
    volume_density_with(g, &KernelOptions::default())
}

pub fn volume_density_with<T: RealScalar>(g: &SymTensor<T>, opts: &KernelOptions) -> Result<VolumeDensity<T>> {
    let (branch, h) = branch_hdet(g, opts)?;
    Ok(VolumeDensity {
        value: abs_root(h, branch.root(g.rank(), g.dim())),
        branch,
        hdet_value: h,
        degenerate: h == T::zero(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nondegeneracy<T> {
    pub nondegenerate: bool,
    /// The signed hyperdeterminant.
    pub witness: T,
    /// `(max |component|)^degree`, the magnitude `witness` is compared against.
    pub scale: T,
}

/// Non-degeneracy verdict for a hyperdeterminant `h` already computed for `g`.
pub fn classify<T: RealScalar>(g: &SymTensor<T>, branch: Branch, h: T, tol: T) -> Nondegeneracy<T> {
    let scale = g.max_abs().powi(branch.degree(g.dim()) as i32);
    Nondegeneracy {
        nondegenerate: h.abs() > tol * scale,
        witness: h,
        scale,
    }
}

/// `|hdet| > tol * (max |component|)^degree`; `tol = 0` tests for exact zero.
pub fn is_nondegenerate<T: RealScalar>(g: &SymTensor<T>, tol: T) -> Result<Nondegeneracy<T>> {
    is_nondegenerate_with(g, tol, &KernelOptions::default())
}

pub fn is_nondegenerate_with<T: RealScalar>(
    g: &SymTensor<T>,
    tol: T,
    opts: &KernelOptions,
) -> Result<Nondegeneracy<T>> {
    if tol < T::zero() || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tolerance must be a nonnegative real, got {tol:?}")));
    }
    let (branch, h) = branch_hdet(g, opts)?;
    Ok(classify(g, branch, h, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightCheck<T> {
    pub name: &'static str,
    pub max_relative_error: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawReport<T> {
    pub det_j: T,
    /// Density of the transformed metric.
    pub lhs: T,
    /// Density of the original metric times `det_j`.
    pub rhs: T,
    pub relative_error: T,
    pub weight_checks: Vec<WeightCheck<T>>,
}

impl<T: RealScalar> LawReport<T> {
    /// Largest error across the density law and every weight check.
    pub fn max_error(&self) -> T {
        self.weight_checks
            .iter()
            .fold(self.relative_error, |a, c| a.max(c.max_relative_error))
    }
}

/// Largest dimension for which componentwise tensor-density checks run.
pub const COMPONENTWISE_MAX_DIM: usize = 5;

/// Transforms a dense covariant rank-`rank` table one mode at a time:
/// `out_{i..} = J[j1][i1] ... J[jr][ir] in_{j..}`.
pub fn transform_covariant<T: RealScalar>(table: &[T], dim: usize, rank: usize, jac: &Jacobian<T>) -> Vec<T> {
    let mut cur = table.to_vec();
    for mode in 0..rank {
        let stride = dim.pow((rank - 1 - mode) as u32);
        let mut next = vec![T::zero(); cur.len()];
        for (pos, out) in next.iter_mut().enumerate() {
            let i = (pos / stride) % dim;
            let base = pos - i * stride;
            let mut acc = T::Acc::new();
            for j in 0..dim {
                acc.add(*jac.entry(j, i) * cur[base + j * stride]);
            }
            *out = acc.value();
        }
        cur = next;
    }
    cur
}

/// `eps^{j1..jn} T_{j1..jn}` over a dense table, every tuple visited.
fn epsilon_contract<T: RealScalar>(table: &[T], dim: usize) -> T {
    let mut acc = T::Acc::new();
    let mut tuples = Tuples::new(dim, dim);
    let mut pos = 0;
    while let Some(t) = tuples.next_tuple() {
        match levi_civita_zero_based(t) {
            1 => acc.add(table[pos]),
            -1 => acc.add(-table[pos]),
            _ => {}
        }
        pos += 1;
    }
    acc.value()
}

/// Every component of the second-stage density, evaluated directly.
fn second_stage_table<T: RealScalar>(g: &SymTensor<T>, opts: &KernelOptions) -> Result<Vec<T>> {
    let density = g_density_with(g, opts)?;
    let n = g.dim();
    let mut out = Vec::with_capacity(n.pow(n as u32));
    let mut tuples = Tuples::new(n, n);
    while let Some(t) = tuples.next_tuple() {
        out.push(second_stage_component(&density, t, opts)?);
    }
    Ok(out)
}

/// Checks `omega(g') = omega(g) det J` for `g' = pullback(g, J)` together with
/// the intermediate weight laws:
///
/// * `G` is a tensor density of weight `m - 1` (componentwise),
/// * even `m`: `eps G` is a scalar density of weight `m`,
/// * odd `m`: `G~` is a tensor density of weight `mn - 1` (componentwise) and
///   `eps G~` a scalar density of weight `mn`.
///
/// Componentwise checks are skipped above [`COMPONENTWISE_MAX_DIM`].
pub fn verify_transformation_law<T: RealScalar>(g: &SymTensor<T>, jac: &Jacobian<T>) -> Result<LawReport<T>> {
    verify_transformation_law_with(g, jac, &KernelOptions::default())
}

pub fn verify_transformation_law_with<T: RealScalar>(
    g: &SymTensor<T>,
    jac: &Jacobian<T>,
    opts: &KernelOptions,
) -> Result<LawReport<T>> {
    let (n, m) = (g.dim(), g.rank());
    let branch = Branch::for_shape(m, n)?;
    let det = *jac.det();
    if det <= T::zero() {
        return Err(Error::Orientation { det: det.to_f64_lossy() });
    }
    let transformed = pullback(g, jac)?;
    let before = volume_density_with(g, opts)?;
    let after = volume_density_with(&transformed, opts)?;
    let lhs = after.value;
    let rhs = before.value * det;

    let mut weight_checks = Vec::new();
    let density = g_density_with(g, opts)?;
    let density_t = g_density_with(&transformed, opts)?;
    if n <= COMPONENTWISE_MAX_DIM {
        let predicted: Vec<T> = transform_covariant(&density.dense(), n, n, jac)
            .into_iter()
            .map(|v| v * det.powi(m as i32 - 1))
            .collect();
        weight_checks.push(WeightCheck {
            name: "G tensor density, weight m-1",
            max_relative_error: relative_error_slices(&density_t.dense(), &predicted),
        });
    }
    match branch {
        Branch::EvenRank => {
            weight_checks.push(WeightCheck {
                name: "eps.G scalar density, weight m",
                max_relative_error: relative_error(
                    total_contraction(&density_t),
                    total_contraction(&density) * det.powi(m as i32),
                ),
            });
        }
        Branch::OddRankEvenDim => {
            let w = (m * n) as i32;
            if n <= COMPONENTWISE_MAX_DIM {
                let tilde = second_stage_table(g, opts)?;
                let tilde_t = second_stage_table(&transformed, opts)?;
                let predicted: Vec<T> = transform_covariant(&tilde, n, n, jac)
                    .into_iter()
                    .map(|v| v * det.powi(w - 1))
                    .collect();
                weight_checks.push(WeightCheck {
                    name: "G~ tensor density, weight mn-1",
                    max_relative_error: relative_error_slices(&tilde_t, &predicted),
                });
                weight_checks.push(WeightCheck {
                    name: "eps.G~ scalar density, weight mn",
                    max_relative_error: relative_error(
                        epsilon_contract(&tilde_t, n),
                        epsilon_contract(&tilde, n) * det.powi(w),
                    ),
                });
            } else {
                // eps.G~ = n! G~_{12..n}; the factorial cancels in the ratio.
                weight_checks.push(WeightCheck {
                    name: "eps.G~ scalar density, weight mn",
                    max_relative_error: relative_error(after.hdet_value, before.hdet_value * det.powi(w)),
                });
            }
        }
    }

    Ok(LawReport {
        det_j: det,
        lhs,
        rhs,
        relative_error: relative_error(lhs, rhs),
        weight_checks,
    })
}

/// Signed form of the law, valid for either orientation:
/// `hdet' = (det J)^w hdet` with `w = m` (even) or `w = mn` (odd).
#[derive(Debug, Clone, PartialEq)]
pub struct SignedRelation<T> {
    pub det_j: T,
    pub weight: usize,
    pub hdet_original: T,
    pub hdet_transformed: T,
    pub predicted: T,
    pub relative_error: T,
}

pub fn signed_relation<T: RealScalar>(
    g: &SymTensor<T>,
    jac: &Jacobian<T>,
    opts: &KernelOptions,
) -> Result<SignedRelation<T>> {
    let (branch, h) = branch_hdet(g, opts)?;
    let (_, h_t) = branch_hdet(&pullback(g, jac)?, opts)?;
    let weight = branch.root(g.rank(), g.dim());
    let det = *jac.det();
    let predicted = h * det.powi(weight as i32);
    Ok(SignedRelation {
        det_j: det,
        weight,
        hdet_original: h,
        hdet_transformed: h_t,
        predicted,
        relative_error: relative_error(h_t, predicted),
    })
}

/// Returns `(omega(lambda g), lambda^(n/m) omega(g))`; the two agree.
pub fn scale_density_check<T: RealScalar>(g: &SymTensor<T>, lambda: T) -> Result<(T, T)> {
    if lambda <= T::zero() || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("scale factor must be positive, got {lambda:?}")));
    }
    let scaled = volume_density(&g.scale(&lambda))?;
    let base = volume_density(g)?;
    let exponent = T::from_f64_lossy(g.dim() as f64 / g.rank() as f64);
    Ok((scaled.value, lambda.powf(exponent) * base.value))
}

/// One coordinate axis of a regular lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<T> {
    pub min: T,
    pub max: T,
    pub nodes: usize,
}

impl<T: RealScalar> Axis<T> {
    pub fn step(&self) -> T {
        (self.max - self.min) / T::from_f64_lossy((self.nodes - 1) as f64)
    }

    pub fn coordinate(&self, i: usize) -> T {
        self.min + self.step() * T::from_f64_lossy(i as f64)
    }

    fn trapezoid_weight(&self, i: usize) -> T {
        let h = self.step();
        if i == 0 || i + 1 == self.nodes {
            h / T::from_f64_lossy(2.0)
        } else {
            h
        }
    }
}

/// Metric sampled on a regular lattice over an axis-aligned box.
///
/// Nodes are stored row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField<T> {
    axes: Vec<Axis<T>>,
    rank: usize,
    nodes: Vec<SymTensor<T>>,
}

impl<T: RealScalar> MetricField<T> {
    pub fn new(axes: Vec<Axis<T>>, nodes: Vec<SymTensor<T>>) -> Result<Self> {
        let dim = axes.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("field needs at least one axis".into()));
        }
        for (k, axis) in axes.iter().enumerate() {
            if axis.nodes < 2 {
                return Err(Error::InvalidArgument(format!(
                    "axis {} has {} node(s); at least 2 are required",
                    k + 1,
                    axis.nodes
                )));
            }
            if !(axis.min.is_finite() && axis.max.is_finite() && axis.min < axis.max) {
                return Err(Error::InvalidArgument(format!("axis {} bounds must satisfy min < max", k + 1)));
            }
        }
        let expected: usize = axes.iter().map(|a| a.nodes).product();
        if nodes.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "field has {} node tensors but the lattice has {expected} nodes",
                nodes.len()
            )));
        }
        let rank = nodes[0].rank();
        for node in &nodes {
            if node.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: node.dim(),
                });
            }
            if node.rank() != rank {
                return Err(Error::InvalidArgument(format!(
                    "mixed ranks in field: {rank} and {}",
                    node.rank()
                )));
            }
        }
        Ok(MetricField { axes, rank, nodes })
    }

    /// Samples `metric` at every lattice node.
    pub fn from_fn<F>(axes: Vec<Axis<T>>, mut metric: F) -> Result<Self>
    where
        F: FnMut(&[T]) -> Result<SymTensor<T>>,
    {
        let counts: Vec<usize> = axes.iter().map(|a| a.nodes).collect();
        let mut nodes = Vec::new();
        let mut tuples = LatticeIter::new(&counts);
        while let Some(t) = tuples.next_node() {
            let x: Vec<T> = t.iter().zip(&axes).map(|(&i, a)| a.coordinate(i)).collect();
            nodes.push(metric(&x)?);
        }
        Self::new(axes, nodes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    pub fn nodes(&self) -> &[SymTensor<T>] {
        &self.nodes
    }

    pub fn box_volume(&self) -> T {
        self.axes.iter().fold(T::one(), |v, a| v * (a.max - a.min))
    }
}

struct LatticeIter {
    counts: Vec<usize>,
    current: Vec<usize>,
    started: bool,
}

impl LatticeIter {
    fn new(counts: &[usize]) -> Self {
        LatticeIter {
            counts: counts.to_vec(),
            current: vec![0; counts.len()],
            started: false,
        }
    }

    fn next_node(&mut self) -> Option<&[usize]> {
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        for pos in (0..self.current.len()).rev() {
            self.current[pos] += 1;
            if self.current[pos] < self.counts[pos] {
                return Some(&self.current);
            }
            self.current[pos] = 0;
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct IntegrationOptions<T> {
    /// Relative threshold passed to the non-degeneracy test.
    pub tol: T,
    /// Permit degenerate nodes; they contribute whatever density they have.
    pub allow_degenerate: bool,
    pub kernel: KernelOptions,
}

impl<T: RealScalar> Default for IntegrationOptions<T> {
    fn default() -> Self {
        IntegrationOptions {
            tol: T::from_f64_lossy(DEFAULT_TOL),
            allow_degenerate: false,
            kernel: KernelOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integration<T> {
    pub integral: T,
    pub node_count: usize,
    pub degenerate_nodes: usize,
}

/// Composite trapezoid integral of the volume density over the field's box.
pub fn integrate_box<T: RealScalar>(field: &MetricField<T>, options: &IntegrationOptions<T>) -> Result<Integration<T>> {
    Branch::for_shape(field.rank(), field.dim())?;
    let inner = KernelOptions {
        workers: Some(1),
        allow_big: options.kernel.allow_big,
    };
    let densities: Vec<Result<(T, bool)>> = options.kernel.run(|| {
        field
            .nodes
            .par_iter()
            .map(|g| {
                let d = volume_density_with(g, &inner)?;
                let c = classify(g, d.branch, d.hdet_value, options.tol);
                Ok((d.value, !c.nondegenerate))
            })
            .collect()
    });

    let counts: Vec<usize> = field.axes.iter().map(|a| a.nodes).collect();
    let mut lattice = LatticeIter::new(&counts);
    let mut acc = T::Acc::new();
    let mut degenerate_nodes = 0;
    for d in densities {
        let (value, degenerate) = d?;
        degenerate_nodes += degenerate as usize;
        let node = lattice.next_node().expect("node count validated at construction");
        let weight = node
            .iter()
            .zip(&field.axes)
            .fold(T::one(), |w, (&i, a)| w * a.trapezoid_weight(i));
        acc.add(weight * value);
    }
    if degenerate_nodes > 0 && !options.allow_degenerate {
        return Err(Error::DegenerateNodes(degenerate_nodes));
    }
    Ok(Integration {
        integral: acc.value(),
        node_count: field.nodes.len(),
        degenerate_nodes,
    })
}
