//! Subcommands as plain functions, so they can be driven without a process.

use mroot::hyperdet::{density_component, hdet_even_with, raw_expansion_m3n2, KernelOptions};
use mroot::indexing::factorial;
use mroot::sampling::{random_jacobian, random_sym_tensor, seeded_rng, MIN_JACOBIAN_DET};
use mroot::tensor::{canonical_slots, lu_determinant};
use mroot::volume::{branch_hdet, classify, integrate_box, volume_density_with, verify_transformation_law_with, IntegrationOptions};
use mroot::{
    closed_form_m3n2, closed_form_m4n2, epsilon_contraction_identity, g_density, hdet_dense_oracle, hdet_odd,
    total_contraction, Branch, JacobianF64, MultiIndex, Parity, Rational, SquareMatrix,
    SymTensor, SymTensorF64,
};

use crate::document::{parse, FieldDocument, JacobianDocument, TensorDocument};
use crate::output::{Field, Record, ResultDocument};
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Debug, Clone)]
pub struct Options {
    /// Non-degeneracy threshold.
    pub tol: f64,
    /// Pass threshold for `verify`.
    pub law_tol: f64,
    pub trials: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub allow_big: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: 1e-9,
            law_tol: 1e-8,
            trials: 100,
            seed: 0,
            workers: None,
            allow_big: false,
        }
    }
}

impl Options {
    pub fn kernel(&self) -> KernelOptions {
        KernelOptions {
            workers: self.workers,
            allow_big: self.allow_big,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: ResultDocument,
    pub exit: i32,
}

impl Outcome {
    fn ok(document: ResultDocument) -> Self {
        Outcome { document, exit: EXIT_OK }
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = self.document.to_json();
            s.push('\n');
            s
        } else {
            self.document.to_text()
        }
    }
}

fn shape(g: &SymTensorF64) -> Record {
    Record::new().int("dim", g.dim()).int("rank", g.rank())
}

pub fn hdet(input: &[u8], opts: &Options) -> Result<Outcome, CliError> {
    let g = parse::<TensorDocument>(input)?.to_tensor()?;
    let (branch, h) = branch_hdet(&g, &opts.kernel())?;
    let out = shape(&g).text("branch", branch.name()).real("hdet", h);
    Ok(Outcome::ok(ResultDocument::new("hdet", input, out)))
}

pub fn density(input: &[u8], opts: &Options) -> Result<Outcome, CliError> {
    let g = parse::<TensorDocument>(input)?.to_tensor()?;
    check_tol(opts.tol)?;
    let d = volume_density_with(&g, &opts.kernel())?;
    let nd = classify(&g, d.branch, d.hdet_value, opts.tol);
    let out = shape(&g)
        .text("branch", d.branch.name())
        .real("hdet", d.hdet_value)
        .real("density", d.value)
        .flag("degenerate", !nd.nondegenerate)
        .real("tol", opts.tol)
        .real("scale", nd.scale);
    Ok(Outcome::ok(ResultDocument::new("density", input, out)))
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(CliError::schema(format!("tolerance must be a nonnegative real, got {tol}")))
    }
}

/// Where `verify` takes its metrics and Jacobians from.
#[derive(Debug, Clone)]
pub enum VerifySource {
    /// Random components in [-1, 1] and random Jacobians, fresh per trial.
    Random { rank: usize, dim: usize },
    /// A fixed metric; random Jacobians unless one is supplied.
    Document { tensor: Vec<u8>, jacobian: Option<Vec<u8>> },
}

#[derive(Default)]
struct LawMaxima {
    density: f64,
    weights: Vec<(&'static str, f64)>,
}

impl LawMaxima {
    fn absorb(&mut self, report: &mroot::LawReportF64) {
        self.density = nan_max(self.density, report.relative_error);
        for c in &report.weight_checks {
            match self.weights.iter_mut().find(|(n, _)| *n == c.name) {
                Some((_, v)) => *v = nan_max(*v, c.max_relative_error),
                None => self.weights.push((c.name, c.max_relative_error)),
            }
        }
    }

    fn overall(&self) -> f64 {
        self.weights.iter().fold(self.density, |a, (_, v)| nan_max(a, *v))
    }
}

/// Maximum that lets NaN win, so a broken trial can never pass.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

pub fn verify(source: &VerifySource, opts: &Options) -> Result<Outcome, CliError> {
    if opts.trials == 0 {
        return Err(CliError::schema("--trials must be at least 1"));
    }
    if !(opts.law_tol.is_finite() && opts.law_tol >= 0.0) {
        return Err(CliError::schema(format!("law tolerance must be a nonnegative real, got {}", opts.law_tol)));
    }
    let kernel = opts.kernel();
    let mut rng = seeded_rng(opts.seed);
    let (digest_input, rank, dim, fixed_g, fixed_j) = match source {
        VerifySource::Random { rank, dim } => {
            let tag = format!("random rank={rank} dim={dim} trials={} seed={}", opts.trials, opts.seed);
            (tag.into_bytes(), *rank, *dim, None, None)
        }
        VerifySource::Document { tensor, jacobian } => {
            let g = parse::<TensorDocument>(tensor)?.to_tensor()?;
            let mut bytes = tensor.clone();
            let j = match jacobian {
                Some(jdoc) => {
                    let j = parse::<JacobianDocument>(jdoc)?.to_jacobian()?;
                    if j.dim() != g.dim() {
                        return Err(CliError::schema(format!(
                            "jacobian dimension {} does not match metric dimension {}",
                            j.dim(),
                            g.dim()
                        )));
                    }
                    bytes.extend_from_slice(jdoc);
                    Some(j)
                }
                None => {
                    bytes.extend_from_slice(format!("\ntrials={} seed={}", opts.trials, opts.seed).as_bytes());
                    None
                }
            };
            (bytes, g.rank(), g.dim(), Some(g), j)
        }
    };
    let branch = Branch::for_shape(rank, dim)?;
    let mut maxima = LawMaxima::default();
    // A fixed Jacobian makes every trial identical, so it runs once.
    let trials = if fixed_j.is_some() { 1 } else { opts.trials };
    for _ in 0..trials {
        let g = match &fixed_g {
            Some(g) => g.clone(),
            None => random_sym_tensor(&mut rng, dim, rank)?,
        };
        let j: JacobianF64 = match &fixed_j {
            Some(j) => j.clone(),
            None => random_jacobian(&mut rng, dim, MIN_JACOBIAN_DET)?,
        };
        maxima.absorb(&verify_transformation_law_with(&g, &j, &kernel)?);
    }
    let overall = maxima.overall();
    let passed = overall <= opts.law_tol;
    let laws = maxima
        .weights
        .iter()
        .fold(Record::new().real("density law", maxima.density), |r, (name, v)| r.real(name, *v));
    let out = Record::new()
        .int("dim", dim)
        .int("rank", rank)
        .text("branch", branch.name())
        .int("trials", trials)
        .with("seed", Field::Int(opts.seed))
        .real("max_relative_error", overall)
        .real("law_tol", opts.law_tol)
        .flag("passed", passed)
        .with("laws", laws.into_field());
    Ok(Outcome {
        document: ResultDocument::new("verify", &digest_input, out),
        exit: if passed { EXIT_OK } else { EXIT_VERIFY },
    })
}

pub fn integrate(input: &[u8], opts: &Options) -> Result<Outcome, CliError> {
    let field = parse::<FieldDocument>(input)?.to_field()?;
    check_tol(opts.tol)?;
    let options = IntegrationOptions {
        tol: opts.tol,
        allow_degenerate: true,
        kernel: opts.kernel(),
    };
    let r = integrate_box(&field, &options)?;
    let out = Record::new()
        .int("dim", field.dim())
        .int("rank", field.rank())
        .text("branch", Branch::for_shape(field.rank(), field.dim())?.name())
        .real("integral", r.integral)
        .real("box_volume", field.box_volume())
        .int("node_count", r.node_count)
        .int("degenerate_nodes", r.degenerate_nodes);
    Ok(Outcome::ok(ResultDocument::new("integrate", input, out)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn check(name: &str, passed: bool, detail: Record) -> Field {
    let mut r = Record::new().text("name", name).flag("passed", passed);
    if let Field::Map(entries) = detail.into_field() {
        for (k, v) in entries {
            r = r.with(&k, v);
        }
    }
    r.into_field()
}

fn to_rational(g: &SymTensorF64) -> SymTensor<Rational> {
    g.map_values(|v| Rational::from_float(*v).expect("sampled components are finite"))
}

fn selftest_epsilon() -> mroot::Result<Field> {
    let mut ok = true;
    for n in 1..=5 {
        ok &= epsilon_contraction_identity(n)? as u128 == factorial(n);
    }
    let n3 = epsilon_contraction_identity(3)?;
    Ok(check("epsilon identity", ok, Record::new().with("n3", Field::Int(n3 as u64))))
}

fn selftest_rank_two(kernel: &KernelOptions) -> mroot::Result<Field> {
    let mut rng = seeded_rng(0x5e1f);
    let mut worst = 0.0f64;
    for n in 2..=5 {
        for _ in 0..20 {
            let g: SymTensorF64 = random_sym_tensor(&mut rng, n, 2)?;
            let m = SquareMatrix::from_fn(n, |r, c| {
                g.get(&MultiIndex::new(vec![r + 1, c + 1], n).expect("in range")).expect("in range")
            })?;
            worst = nan_max(worst, rel(hdet_even_with(&g, kernel)?, lu_determinant(&m)));
        }
    }
    Ok(check("m=2 reduction to the determinant", worst <= 1e-10, Record::new().real("max_relative_error", worst)))
}

fn selftest_quartic(kernel: &KernelOptions) -> mroot::Result<Field> {
    let mut rng = seeded_rng(0x5e2f);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let g: SymTensorF64 = random_sym_tensor(&mut rng, 2, 4)?;
        worst = nan_max(worst, rel(hdet_even_with(&g, kernel)?, closed_form_m4n2(&g)?));
    }
    Ok(check("m=4 n=2 closed form", worst <= 1e-12, Record::new().real("max_relative_error", worst)))
}

fn selftest_cubic() -> mroot::Result<Field> {
    let mut rng = seeded_rng(0x5e3f);
    let mut ok = true;
    for _ in 0..50 {
        let g = to_rational(&random_sym_tensor(&mut rng, 2, 3)?);
        let closed = closed_form_m3n2(&g)?;
        ok &= raw_expansion_m3n2(&g)? == closed && hdet_odd(&g)? == closed;
    }
    Ok(check("m=3 n=2 raw expansion vs closed form (exact)", ok, Record::new().int("samples", 50)))
}

fn selftest_total_contraction(kernel: &KernelOptions) -> mroot::Result<Field> {
    let mut rng = seeded_rng(0x5e4f);
    let mut worst = 0.0f64;
    for (m, n) in [(2, 3), (4, 2), (3, 2), (3, 4), (5, 2)] {
        for _ in 0..20 {
            let g: SymTensorF64 = random_sym_tensor(&mut rng, n, m)?;
            let density = mroot::hyperdet::g_density_with(&g, kernel)?;
            let total = total_contraction(&density);
            let err = if m % 2 == 0 {
                rel(total, factorial(n) as f64 * density.top_component())
            } else {
                total.abs()
            };
            worst = nan_max(worst, err);
        }
    }
    Ok(check("epsilon contraction of G", worst <= 1e-12, Record::new().real("max_error", worst)))
}

fn selftest_parity() -> mroot::Result<Field> {
    let mut rng = seeded_rng(0x5e5f);
    let mut ok = true;
    let mut worst = 0.0f64;
    for (m, n) in [(3, 2), (4, 2), (2, 3), (3, 4)] {
        let g: SymTensorF64 = random_sym_tensor(&mut rng, n, m)?;
        let density = g_density(&g)?;
        let expected = if m % 2 == 0 { Parity::Antisymmetric } else { Parity::Symmetric };
        ok &= density.parity() == expected;
        let dense = density.dense();
        let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for slot in canonical_slots(n, n) {
            let idx = MultiIndex::new(slot.iter().map(|i| i + 1).collect(), n)?;
            let direct = density_component(&g, &idx)?;
            worst = nan_max(worst, (density.get(&idx)? - direct).abs() / scale);
        }
    }
    Ok(check("G parity", ok && worst <= 1e-12, Record::new().real("max_error", worst)))
}

fn selftest_oracle(kernel: &KernelOptions) -> mroot::Result<Field> {
    let mut rng = seeded_rng(0x5e6f);
    let mut worst = 0.0f64;
    for (m, n) in [(2, 2), (2, 3), (4, 2), (4, 3), (3, 2)] {
        for _ in 0..3 {
            let g: SymTensorF64 = random_sym_tensor(&mut rng, n, m)?;
            let (_, h) = branch_hdet(&g, kernel)?;
            worst = nan_max(worst, rel(h, hdet_dense_oracle(&g)?));
        }
    }
    Ok(check("dense oracle", worst <= 1e-12, Record::new().real("max_relative_error", worst)))
}

fn selftest_degeneracy(kernel: &KernelOptions) -> mroot::Result<Field> {
    let quartic = SymTensorF64::build(
        2,
        4,
        [(vec![1, 1, 1, 1], 3.0), (vec![1, 1, 2, 2], -1.0), (vec![2, 2, 2, 2], -1.0)]
            .into_iter()
            .map(|(i, v)| Ok((MultiIndex::new(i, 2)?, v)))
            .collect::<mroot::Result<Vec<_>>>()?,
    )?;
    let cubic = SymTensorF64::from_canonical_fn(2, 3, |_| 1.0)?;
    let mut ok = true;
    let mut worst = 0.0f64;
    for g in [quartic, cubic] {
        let d = volume_density_with(&g, kernel)?;
        worst = nan_max(worst, d.hdet_value.abs());
        ok &= !classify(&g, d.branch, d.hdet_value, 1e-9).nondegenerate;
    }
    Ok(check("degeneracy witnesses", ok && worst <= 1e-12, Record::new().real("max_abs_hdet", worst)))
}

pub fn selftest(opts: &Options) -> Result<Outcome, CliError> {
    let kernel = opts.kernel();
    let checks = vec![
        selftest_epsilon()?,
        selftest_rank_two(&kernel)?,
        selftest_quartic(&kernel)?,
        selftest_cubic()?,
        selftest_total_contraction(&kernel)?,
        selftest_parity()?,
        selftest_oracle(&kernel)?,
        selftest_degeneracy(&kernel)?,
    ];
    let passed = checks.iter().all(|c| match c {
        Field::Map(entries) => entries.iter().any(|(k, v)| k == "passed" && *v == Field::Bool(true)),
        _ => false,
    });
    let out = Record::new().flag("passed", passed).with("checks", Field::List(checks));
    Ok(Outcome {
        document: ResultDocument::new("selftest", b"", out),
        exit: if passed { EXIT_OK } else { EXIT_VERIFY },
    })
}
