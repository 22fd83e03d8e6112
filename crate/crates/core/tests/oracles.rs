//! Independent-route checks: LU determinants and dense congruences from
//! nalgebra, brute-force contractions, and exact rational arithmetic.

use mroot::hyperdet::{
    density_component, hdet_even_with, raw_expansion_m3n2, raw_expansion_m4n2, total_contraction_naive,
    KernelOptions,
};
use mroot::sampling::{random_invertible, random_jacobian, random_sym_tensor, seeded_rng};
use mroot::tensor::canonical_slots;
use mroot::{
    closed_form_m3n2, closed_form_m4n2, determinant, g_density, hdet_dense_oracle, hdet_even, hdet_odd, pullback,
    total_contraction, Jacobian, MultiIndex, Parity, Rational, SquareMatrix, SymTensor,
};
use nalgebra::DMatrix;
use num_traits::{FromPrimitive, Zero};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn to_nalgebra(m: &SquareMatrix<f64>) -> DMatrix<f64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |r, c| *m.get(r, c))
}

fn sym_to_nalgebra(g: &SymTensor<f64>) -> DMatrix<f64> {
    let n = g.dim();
    DMatrix::from_fn(n, n, |r, c| g.get(&MultiIndex::new(vec![r + 1, c + 1], n).unwrap()).unwrap())
}

fn to_rational(g: &SymTensor<f64>) -> SymTensor<Rational> {
    g.map_values(|v| Rational::from_f64(*v).unwrap())
}

#[test]
fn rank_two_reduces_to_lu_determinant() {
    let mut rng = seeded_rng(11);
    for n in 1..=5 {
        for _ in 0..50 {
            let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, 2).unwrap();
            let lu = sym_to_nalgebra(&g).determinant();
            assert!(rel(hdet_even(&g).unwrap(), lu) <= 1e-10, "n = {n}");
        }
    }
}

#[test]
fn leibniz_determinant_matches_lu() {
    let mut rng = seeded_rng(12);
    for n in 2..=4 {
        for _ in 0..100 {
            let j: Jacobian<f64> = random_invertible(&mut rng, n, 1e-3).unwrap();
            let lu = to_nalgebra(j.matrix()).determinant();
            assert!(rel(*j.det(), lu) <= 1e-12);
            assert!(rel(mroot::tensor::lu_determinant(j.matrix()), lu) <= 1e-12);
            assert!(rel(determinant(j.matrix()), lu) <= 1e-12);
        }
    }
}

#[test]
fn rank_two_pullback_is_congruence() {
    let mut rng = seeded_rng(13);
    for n in 1..=4 {
        for _ in 0..30 {
            let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, 2).unwrap();
            let j: Jacobian<f64> = random_invertible(&mut rng, n, 1e-2).unwrap();
            let jm = to_nalgebra(j.matrix());
            let expected = jm.transpose() * sym_to_nalgebra(&g) * &jm;
            let got = sym_to_nalgebra(&pullback(&g, &j).unwrap());
            assert!((got - &expected).amax() <= 1e-13 * expected.amax().max(1.0));
        }
    }
}

#[test]
fn closed_forms_match_kernels_on_random_tensors() {
    let mut rng = seeded_rng(14);
    let mut worst4 = 0.0f64;
    let mut worst3 = 0.0f64;
    for _ in 0..1000 {
        let g4: SymTensor<f64> = random_sym_tensor(&mut rng, 2, 4).unwrap();
        worst4 = worst4.max(rel(hdet_even(&g4).unwrap(), closed_form_m4n2(&g4).unwrap()));
        let g3: SymTensor<f64> = random_sym_tensor(&mut rng, 2, 3).unwrap();
        worst3 = worst3.max(rel(hdet_odd(&g3).unwrap(), closed_form_m3n2(&g3).unwrap()));
    }
    assert!(worst4 <= 1e-12, "m=4 n=2 worst relative error {worst4:e}");
    assert!(worst3 <= 1e-12, "m=3 n=2 worst relative error {worst3:e}");
}

#[test]
fn closed_forms_and_raw_expansions_agree_exactly_in_rationals() {
    let mut rng = seeded_rng(15);
    for _ in 0..100 {
        let g4 = to_rational(&random_sym_tensor(&mut rng, 2, 4).unwrap());
        let closed = closed_form_m4n2(&g4).unwrap();
        assert_eq!(hdet_even(&g4).unwrap(), closed);
        assert_eq!(raw_expansion_m4n2(&g4).unwrap(), closed);
        assert_eq!(hdet_dense_oracle(&g4).unwrap(), closed);

        let g3 = to_rational(&random_sym_tensor(&mut rng, 2, 3).unwrap());
        let closed = closed_form_m3n2(&g3).unwrap();
        assert_eq!(hdet_odd(&g3).unwrap(), closed);
        assert_eq!(raw_expansion_m3n2(&g3).unwrap(), closed);
        assert_eq!(hdet_dense_oracle(&g3).unwrap(), closed);
    }
}

#[test]
fn dense_oracle_matches_permutation_kernels() {
    let mut rng = seeded_rng(16);
    for (m, n) in [(2, 1), (2, 2), (2, 3), (4, 1), (4, 2), (4, 3)] {
        for _ in 0..20 {
            let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, m).unwrap();
            let a = hdet_even(&g).unwrap();
            let b = hdet_dense_oracle(&g).unwrap();
            assert!(rel(a, b) <= 1e-12, "(m, n) = ({m}, {n}): {a} vs {b}");
        }
    }
    for _ in 0..50 {
        let g: SymTensor<f64> = random_sym_tensor(&mut rng, 2, 3).unwrap();
        assert!(rel(hdet_odd(&g).unwrap(), hdet_dense_oracle(&g).unwrap()) <= 1e-12);
    }
}

#[test]
fn density_parity_matches_direct_components() {
    let mut rng = seeded_rng(17);
    for (m, n) in [(3, 2), (4, 2), (3, 4), (2, 3), (5, 2)] {
        let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, m).unwrap();
        let d = g_density(&g).unwrap();
        let expected = if m % 2 == 0 { Parity::Antisymmetric } else { Parity::Symmetric };
        assert_eq!(d.parity(), expected);
        let dense = d.dense();
        let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut pos = 0;
        for_each_tuple(n, n, |t| {
            let idx = MultiIndex::new(t.iter().map(|i| i + 1).collect(), n).unwrap();
            let direct = density_component(&g, &idx).unwrap();
            assert!((direct - dense[pos]).abs() <= 1e-13 * scale.max(1e-300), "(m, n) = ({m}, {n}) at {t:?}");
            pos += 1;
        });
    }
}

#[test]
fn total_contraction_parity_rules() {
    let mut rng = seeded_rng(18);
    for _ in 0..200 {
        for (m, n) in [(3, 2), (3, 4), (5, 2)] {
            let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, m).unwrap();
            let d = g_density(&g).unwrap();
            assert!(total_contraction(&d).abs() <= 1e-12);
            assert!(total_contraction_naive(&d).abs() <= 1e-12);
        }
    }
    for (m, n) in [(2, 3), (4, 2), (4, 3), (2, 5)] {
        let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, m).unwrap();
        let d = g_density(&g).unwrap();
        let fact = (1..=n).product::<usize>() as f64;
        assert_eq!(total_contraction(&d), fact * d.top_component());
        assert!(rel(total_contraction_naive(&d), fact * d.top_component()) <= 1e-12);
    }
}

#[test]
fn homogeneity_of_hyperdeterminants() {
    let mut rng = seeded_rng(19);
    for lambda in [-2.0f64, 0.5, 3.0] {
        for (m, n) in [(4, 2), (2, 3)] {
            let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, m).unwrap();
            let a = hdet_even(&g.scale(&lambda)).unwrap();
            let b = lambda.powi(n as i32) * hdet_even(&g).unwrap();
            assert!(rel(a, b) <= 1e-10);
        }
        let g: SymTensor<f64> = random_sym_tensor(&mut rng, 2, 3).unwrap();
        let a = hdet_odd(&g.scale(&lambda)).unwrap();
        let b = lambda.powi(4) * hdet_odd(&g).unwrap();
        assert!(rel(a, b) <= 1e-10);
    }
}

#[test]
fn even_rank_hdet_ignores_jacobian_sign() {
    let mut rng = seeded_rng(20);
    for (m, n) in [(2, 2), (4, 2), (2, 3), (4, 3)] {
        let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, m).unwrap();
        let j: Jacobian<f64> = random_jacobian(&mut rng, n, 0.1).unwrap();
        let a = hdet_even(&pullback(&g, &j).unwrap()).unwrap();
        let b = hdet_even(&pullback(&g, &j.negate().unwrap()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let mut rng = seeded_rng(21);
    for (m, n) in [(4, 4), (2, 6), (6, 3)] {
        let g: SymTensor<f64> = random_sym_tensor(&mut rng, n, m).unwrap();
        let one = hdet_even_with(&g, &KernelOptions::single_threaded()).unwrap();
        for w in [2, 3, 4] {
            let many = hdet_even_with(&g, &KernelOptions::with_workers(w)).unwrap();
            assert_eq!(one.to_bits(), many.to_bits(), "(m, n) = ({m}, {n}), workers = {w}");
        }
    }
}

#[test]
fn f32_kernels_track_f64() {
    let mut rng = seeded_rng(22);
    let g: SymTensor<f64> = random_sym_tensor(&mut rng, 2, 4).unwrap();
    let g32: SymTensor<f32> = g.map_values(|v| *v as f32);
    let a = hdet_even(&g32).unwrap() as f64;
    let b = hdet_even(&g32.map_values(|v| *v as f64)).unwrap();
    assert!(rel(a, b) <= 1e-5);
}

#[test]
fn exact_pullback_composition() {
    let mut rng = seeded_rng(23);
    let g = to_rational(&random_sym_tensor(&mut rng, 2, 3).unwrap());
    let q = |v: &f64| Rational::from_f64(*v).unwrap();
    let j1: Jacobian<f64> = random_jacobian(&mut rng, 2, 0.1).unwrap();
    let j2: Jacobian<f64> = random_jacobian(&mut rng, 2, 0.1).unwrap();
    let j1 = Jacobian::from_rows(j1.matrix().rows().iter().map(|r| r.iter().map(q).collect()).collect()).unwrap();
    let j2 = Jacobian::from_rows(j2.matrix().rows().iter().map(|r| r.iter().map(q).collect()).collect()).unwrap();
    let stepwise = pullback(&pullback(&g, &j1).unwrap(), &j2).unwrap();
    let composed = pullback(&g, &j1.compose(&j2).unwrap()).unwrap();
    assert_eq!(stepwise, composed);
    // Exact weight-m law for hdet[G] in rationals.
    let h = hdet_odd(&g).unwrap();
    let h_t = hdet_odd(&pullback(&g, &j1).unwrap()).unwrap();
    assert_eq!(h_t, h * num_traits::pow(j1.det().clone(), 6));
    assert!(!j1.det().is_zero());
}

#[test]
fn canonical_slot_enumeration_is_sorted_and_complete() {
    let slots = canonical_slots(3, 2);
    assert_eq!(slots, vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 1], vec![1, 2], vec![2, 2]]);
}

fn for_each_tuple(base: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let total = base.pow(len as u32);
    let mut t = vec![0; len];
    for mut k in 0..total {
        for slot in t.iter_mut().rev() {
            *slot = k % base;
            k /= base;
        }
        f(&t);
    }
}
