//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use mroot::hyperdet::{density_component, hdet_even_with, raw_expansion_m3n2, total_contraction_naive, KernelOptions};
use mroot::indexing::factorial;
use mroot::sampling::{random_sym_tensor, seeded_rng};
use mroot::volume::{integrate_box, Axis, IntegrationOptions};
use mroot::{
    closed_form_m3n2, closed_form_m4n2, g_density, hdet_dense_oracle, hdet_even, hdet_odd, total_contraction,
    volume_density, MetricField, MultiIndex, Parity, Rational, SymTensor, SymTensorF64,
};
use mroot_cli::commands::{self, Options, VerifySource};
use mroot_cli::Field;
use nalgebra::DMatrix;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Maximum that keeps NaN, so a NaN error can never pass.
fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn within(x: f64, tol: f64) -> bool {
    x <= tol
}

struct Gate {
    failed: Vec<u32>,
}

impl Gate {
    fn report(&mut self, id: u32, title: &str, pass: bool, detail: String) {
        println!("criterion {id:>2} {} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let start = Instant::now();
    let r = f();
    (r, start.elapsed())
}

fn real(out: &commands::Outcome, key: &str) -> f64 {
    match out.document.output(key) {
        Some(Field::Real(x)) => *x,
        other => panic!("{key}: {other:?}"),
    }
}

fn quartic_witness() -> SymTensorF64 {
    let entries = [(vec![1, 1, 1, 1], 3.0), (vec![1, 1, 2, 2], -1.0), (vec![2, 2, 2, 2], -1.0)]
        .map(|(i, v)| (MultiIndex::new(i, 2).unwrap(), v));
    SymTensorF64::build(2, 4, entries).unwrap()
}

fn tensor_json(g: &SymTensorF64) -> Vec<u8> {
    serde_json::to_vec(&mroot_cli::TensorDocument::from_tensor(g)).unwrap()
}

fn criterion_1(gate: &mut Gate) {
    let mut rng = seeded_rng(1001);
    let (err, time) = timed(|| {
        let mut err = 0.0f64;
        for n in 2..=5 {
            for _ in 0..50 {
                let g: SymTensorF64 = random_sym_tensor(&mut rng, n, 2).unwrap();
                let m = DMatrix::from_fn(n, n, |r, c| g.get(&MultiIndex::new(vec![r + 1, c + 1], n).unwrap()).unwrap());
                err = worst(err, rel(hdet_even(&g).unwrap(), m.lu().determinant()));
            }
        }
        err
    });
    let pass = within(err, 1e-10) && time < Duration::from_secs(5);
    gate.report(1, "m=2 reduction to LU determinant", pass, format!("200 matrices, max rel {err:.3e}, {time:.2?}"));
}

fn criterion_2(gate: &mut Gate) {
    let mut rng = seeded_rng(1002);
    let samples: Vec<SymTensorF64> = (0..1000).map(|_| random_sym_tensor(&mut rng, 2, 4).unwrap()).collect();
    let (err, time) = timed(|| {
        samples
            .iter()
            .fold(0.0f64, |e, g| worst(e, rel(hdet_even(g).unwrap(), closed_form_m4n2(g).unwrap())))
    });
    let pass = within(err, 1e-12) && time < Duration::from_secs(1);
    gate.report(2, "m=4 n=2 contraction vs closed form", pass, format!("1000 tensors, max rel {err:.3e}, {time:.2?}"));
}

fn criterion_3(gate: &mut Gate) {
    let mut rng = seeded_rng(1003);
    let samples: Vec<SymTensorF64> = (0..1000).map(|_| random_sym_tensor(&mut rng, 2, 3).unwrap()).collect();
    let (err, time) = timed(|| {
        samples
            .iter()
            .fold(0.0f64, |e, g| worst(e, rel(hdet_odd(g).unwrap(), closed_form_m3n2(g).unwrap())))
    });
    let exact = samples.iter().all(|g| {
        let q: SymTensor<Rational> = g.map_values(|v| Rational::from_float(*v).unwrap());
        let closed = closed_form_m3n2(&q).unwrap();
        raw_expansion_m3n2(&q).unwrap() == closed && hdet_odd(&q).unwrap() == closed
    });
    let pass = within(err, 1e-12) && time < Duration::from_secs(1) && exact;
    gate.report(
        3,
        "m=3 n=2 odd pipeline vs closed form",
        pass,
        format!("1000 tensors, max rel {err:.3e}, {time:.2?}, 16-term expansion exact: {exact}"),
    );
}

/// Runs `verify` and returns (exit, overall error, per-law maxima, elapsed).
fn run_verify(rank: usize, dim: usize, trials: usize, law_tol: f64) -> (i32, f64, Vec<(String, f64)>, Duration) {
    let opts = Options {
        trials,
        seed: 2000 + 10 * rank as u64 + dim as u64,
        law_tol,
        ..Options::default()
    };
    let (out, time) = timed(|| commands::verify(&VerifySource::Random { rank, dim }, &opts).unwrap());
    let laws = match out.document.output("laws") {
        Some(Field::Map(entries)) => entries
            .iter()
            .map(|(k, v)| match v {
                Field::Real(x) => (k.clone(), *x),
                _ => (k.clone(), f64::NAN),
            })
            .collect(),
        _ => Vec::new(),
    };
    (out.exit, real(&out, "max_relative_error"), laws, time)
}

fn criteria_4_and_5(gate: &mut Gate) {
    let runs = [(2, 2, 500, 1e-8), (2, 3, 500, 1e-8), (4, 2, 500, 1e-8), (3, 2, 500, 1e-8), (3, 4, 25, 1e-6)];
    let mut law_pass = true;
    let mut weight_pass = true;
    let mut law_detail = Vec::new();
    let mut weight_detail = Vec::new();
    for (m, n, trials, tol) in runs {
        let (exit, overall, laws, time) = run_verify(m, n, trials, tol);
        law_pass &= exit == 0 && within(overall, tol) && time < Duration::from_secs(60);
        law_detail.push(format!("({m},{n})x{trials} {overall:.1e} {time:.1?}"));

        let expected: &[&str] = if m % 2 == 0 {
            &["weight m-1", "weight m"]
        } else {
            &["weight m-1", "weight mn-1", "weight mn"]
        };
        let mut max_weight = 0.0f64;
        for suffix in expected {
            match laws.iter().find(|(k, _)| k.ends_with(suffix)) {
                Some((_, v)) => max_weight = worst(max_weight, *v),
                None => max_weight = f64::NAN,
            }
        }
        weight_pass &= within(max_weight, 1e-8);
        weight_detail.push(format!("({m},{n}) {max_weight:.1e}"));
    }
    gate.report(4, "density transformation laws via verify", law_pass, law_detail.join(", "));
    gate.report(5, "componentwise weight laws", weight_pass, weight_detail.join(", "));
}

fn criterion_6(gate: &mut Gate) {
    let mut rng = seeded_rng(1006);
    let mut odd_abs = 0.0f64;
    for k in 0..200 {
        let (m, n) = [(3, 2), (3, 4), (5, 2), (3, 3)][k % 4];
        let g: SymTensorF64 = random_sym_tensor(&mut rng, n, m).unwrap();
        let d = g_density(&g).unwrap();
        odd_abs = worst(odd_abs, total_contraction(&d).abs());
        odd_abs = worst(odd_abs, total_contraction_naive(&d).abs());
    }
    let mut even_rel = 0.0f64;
    for k in 0..200 {
        let (m, n) = [(2, 3), (4, 2), (4, 3), (6, 2)][k % 4];
        let g: SymTensorF64 = random_sym_tensor(&mut rng, n, m).unwrap();
        let d = g_density(&g).unwrap();
        let expected = factorial(n) as f64 * d.top_component();
        even_rel = worst(even_rel, rel(total_contraction_naive(&d), expected));
    }
    let mut parity_ok = true;
    let mut recon = 0.0f64;
    for (m, n) in [(3, 2), (4, 2), (3, 4)] {
        let g: SymTensorF64 = random_sym_tensor(&mut rng, n, m).unwrap();
        let d = g_density(&g).unwrap();
        let want = if m % 2 == 0 { Parity::Antisymmetric } else { Parity::Symmetric };
        parity_ok &= d.parity() == want;
        let dense = d.dense();
        let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (flat, stored) in dense.iter().enumerate() {
            let mut rest = flat;
            let mut entries = vec![0; n];
            for slot in entries.iter_mut().rev() {
                *slot = rest % n + 1;
                rest /= n;
            }
            let direct = density_component(&g, &MultiIndex::new(entries, n).unwrap()).unwrap();
            recon = worst(recon, (stored - direct).abs() / scale);
        }
    }
    let pass = within(odd_abs, 1e-12) && within(even_rel, 1e-12) && parity_ok && within(recon, 1e-12);
    gate.report(
        6,
        "parity of G and its total contraction",
        pass,
        format!("odd |sum| {odd_abs:.1e}, even rel {even_rel:.1e}, parity {parity_ok}, reconstruction {recon:.1e}"),
    );
}

fn criterion_7(gate: &mut Gate) {
    let cubic = SymTensorF64::from_canonical_fn(2, 3, |_| 1.0).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, g) in [("quartic (3,-1,-1)", quartic_witness()), ("cubic all-ones", cubic)] {
        let out = commands::density(&tensor_json(&g), &Options::default()).unwrap();
        let h = real(&out, "hdet");
        let degenerate = out.document.output("degenerate") == Some(&Field::Bool(true));
        pass &= h.abs() <= 1e-12 && degenerate && out.exit == 0;
        detail.push(format!("{name} hdet {h:.1e} degenerate {degenerate}"));
    }
    gate.report(7, "degeneracy witnesses", pass, detail.join(", "));
}

fn criterion_8(gate: &mut Gate) {
    let mut rng = seeded_rng(1008);
    let mut err = 0.0f64;
    for (m, n) in [(2, 3), (4, 2), (4, 3), (3, 2), (3, 4)] {
        for _ in 0..10 {
            let g: SymTensorF64 = random_sym_tensor(&mut rng, n, m).unwrap();
            let base = volume_density(&g).unwrap().value;
            for lambda in [0.25, 2.0, 10.0] {
                let scaled = volume_density(&g.scale(&lambda)).unwrap().value;
                err = worst(err, rel(scaled, lambda.powf(n as f64 / m as f64) * base));
            }
        }
    }
    gate.report(8, "homogeneity of the density", within(err, 1e-10), format!("both branches, max rel {err:.3e}"));
}

fn criterion_9(gate: &mut Gate) {
    let mut rng = seeded_rng(1009);
    let mut err = 0.0f64;
    let shapes = [(2, 1), (2, 2), (2, 3), (4, 1), (4, 2), (4, 3), (3, 2)];
    for (m, n) in shapes {
        for _ in 0..5 {
            let g: SymTensorF64 = random_sym_tensor(&mut rng, n, m).unwrap();
            let kernel = if m % 2 == 0 { hdet_even(&g) } else { hdet_odd(&g) }.unwrap();
            err = worst(err, rel(kernel, hdet_dense_oracle(&g).unwrap()));
        }
    }
    gate.report(9, "dense oracle equivalence", within(err, 1e-12), format!("{} shapes, max rel {err:.3e}", shapes.len()));
}

fn criterion_10(gate: &mut Gate) {
    let mut rng = seeded_rng(1010);
    let g5: SymTensorF64 = random_sym_tensor(&mut rng, 5, 4).unwrap();
    let (_, t5) = timed(|| hdet_even_with(&g5, &KernelOptions::single_threaded()).unwrap());
    let g6: SymTensorF64 = random_sym_tensor(&mut rng, 6, 4).unwrap();
    let (many, t6) = timed(|| hdet_even_with(&g6, &KernelOptions::with_workers(4)).unwrap());
    let (one, t6_single) = timed(|| hdet_even_with(&g6, &KernelOptions::single_threaded()).unwrap());
    let err = rel(many, one);
    let pass = t5 < Duration::from_secs(1) && t6 < Duration::from_secs(120) && within(err, 1e-12);
    gate.report(
        10,
        "kernel performance",
        pass,
        format!(
            "n=5 single {t5:.2?}, n=6 four workers {t6:.2?} (single {t6_single:.2?}), rel diff {err:.1e}, {} cpus",
            std::thread::available_parallelism().map_or(1, |p| p.get())
        ),
    );
}

fn criterion_11(gate: &mut Gate) {
    let quartic = SymTensorF64::build(
        2,
        4,
        [(vec![1, 1, 1, 1], 16.0), (vec![2, 2, 2, 2], 1.0)].map(|(i, v)| (MultiIndex::new(i, 2).unwrap(), v)),
    )
    .unwrap();
    let axes = vec![
        Axis { min: 0.0, max: 2.0, nodes: 5 },
        Axis { min: -0.5, max: 0.5, nodes: 4 },
    ];
    let field = MetricField::from_fn(axes, |_| Ok(quartic.clone())).unwrap();
    let opts = IntegrationOptions::default();
    let integral = integrate_box(&field, &opts).unwrap().integral;
    let constant_err = rel(integral, volume_density(&quartic).unwrap().value * field.box_volume());

    // g(x) = (1 + x^2)^2 in one dimension: density 1 + x^2, exact integral 4/3 on [0, 1].
    let error = |nodes| {
        let f = MetricField::from_fn(vec![Axis { min: 0.0, max: 1.0, nodes }], |x| {
            SymTensor::from_canonical_fn(1, 2, |_| (1.0f64 + x[0] * x[0]).powi(2))
        })
        .unwrap();
        (integrate_box(&f, &opts).unwrap().integral - 4.0 / 3.0).abs()
    };
    let ratio = error(11) / error(21);
    let pass = within(constant_err, 1e-12) && (ratio - 4.0).abs() <= 0.5;
    gate.report(
        11,
        "trapezoid integration",
        pass,
        format!("constant field rel {constant_err:.1e}, error ratio under doubling {ratio:.4}"),
    );
}

fn main() {
    let mut gate = Gate { failed: Vec::new() };
    criterion_1(&mut gate);
    criterion_2(&mut gate);
    criterion_3(&mut gate);
    criteria_4_and_5(&mut gate);
    criterion_6(&mut gate);
    criterion_7(&mut gate);
    criterion_8(&mut gate);
    criterion_9(&mut gate);
    criterion_10(&mut gate);
    criterion_11(&mut gate);
    if gate.failed.is_empty() {
        println!("acceptance: all 11 criteria passed");
    } else {
        println!("acceptance: failed criteria {:?}", gate.failed);
        std::process::exit(1);
    }
}
