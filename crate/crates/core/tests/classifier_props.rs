mod common;

use aseries::classifier::{
    butterfly_form, closed_form_tests, detect, jet_and_test_values, swallowtail_form, test_value,
    test_value_with_placeholders, DenseTensorOracle, DerivativeOracle, Polynomial, SingularityKind, Tolerances,
    TransformedOracle,
};
use common::{kernel_polynomial, random_orthogonal, reduced_derivatives, rel_close, rng};
use proptest::prelude::*;
use rand::Rng;

/// Kernel polynomial on ℝ^m whose cusp test vanishes, and optionally the
/// swallowtail test too (by adjusting the `α⁴` coefficient).
fn degenerate(m: usize, seed: u64, kill_swallowtail: bool) -> (DenseTensorOracle, Vec<f64>) {
    let mut r = rng(seed);
    let (p, alpha) = kernel_polynomial(m, 6, &mut r);
    // remove the α³ part by subtracting S₃(α,α,α)/6 · (αᵀx)³
    let oracle = DenseTensorOracle::from_polynomial(&p, 6);
    let c3 = oracle.contract(&[&alpha, &alpha, &alpha]).unwrap() / 6.0;
    let mut q = p.clone();
    add_power_of_linear_form(&mut q, &alpha, 3, -c3);
    if kill_swallowtail {
        let o = DenseTensorOracle::from_polynomial(&q, 6);
        let (_, vals) = jet_and_test_values(&o, &alpha, 4).unwrap();
        add_power_of_linear_form(&mut q, &alpha, 4, -vals[1] / 24.0);
    }
    (DenseTensorOracle::from_polynomial(&q, 6), alpha)
}

/// Adds `c · (aᵀx)^k` term by term.
fn add_power_of_linear_form(p: &mut Polynomial, a: &[f64], k: u32, c: f64) {
    let m = a.len();
    fn rec(p: &mut Polynomial, a: &[f64], left: u32, var: usize, e: &mut Vec<u32>, coef: f64) {
        let m = a.len();
        if var == m - 1 {
            e[var] = left;
            let mut multinom = coef * a[var].powi(left as i32);
            let total: u32 = e.iter().sum();
            multinom *= factorial(total) / e.iter().map(|&x| factorial(x)).product::<f64>();
            p.add_term(multinom, e).unwrap();
            e[var] = 0;
            return;
        }
        for j in 0..=left {
            e[var] = j;
            rec(p, a, left - j, var + 1, e, coef * a[var].powi(j as i32));
        }
        e[var] = 0;
    }
    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }
    rec(p, a, k, 0, &mut vec![0; m], c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn test_values_match_finite_differences(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let degree = r.gen_range(3..=6u32);
        let (p, alpha) = kernel_polynomial(3, degree, &mut r);
        let oracle = DenseTensorOracle::from_polynomial(&p, 6);
        let (_, values) = jet_and_test_values(&oracle, &alpha, 5).unwrap();
        let fd = reduced_derivatives(&p, &alpha, 0.005, &[3, 4, 5]);
        for (a, b) in values.iter().zip(&fd) {
            prop_assert!(rel_close(*a, *b, 1e-5), "{} vs {}", a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn placeholders_do_not_matter(seed in 0u64..10_000, c in proptest::collection::vec(-3.0f64..3.0, 8)) {
        let mut r = rng(seed);
        let (p, alpha) = kernel_polynomial(4, 6, &mut r);
        let oracle = DenseTensorOracle::from_polynomial(&p, 6);
        let (jet, values) = jet_and_test_values(&oracle, &alpha, 6).unwrap();
        for n in 3..=6 {
            let v = test_value_with_placeholders(&oracle, &alpha, &jet, n, &c[..4], &c[4..]).unwrap();
            prop_assert!(rel_close(v, values[n - 3], 1e-10), "n = {}: {} vs {}", n, v, values[n - 3]);
        }
    }

    #[test]
    fn sign_parity_under_kernel_flip(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let (p, alpha) = kernel_polynomial(3, 6, &mut r);
        let oracle = DenseTensorOracle::from_polynomial(&p, 6);
        let neg: Vec<f64> = alpha.iter().map(|x| -x).collect();
        let (jp, vp) = jet_and_test_values(&oracle, &alpha, 6).unwrap();
        let (jm, vm) = jet_and_test_values(&oracle, &neg, 6).unwrap();
        for (i, (a, b)) in vp.iter().zip(&vm).enumerate() {
            let n = i + 3;
            let want = if n % 2 == 1 { -a } else { *a };
            prop_assert!(rel_close(*b, want, 1e-10), "r^({}) {} vs {}", n, a, b);
        }
        for (i, (a, b)) in jp.derivatives.iter().zip(&jm.derivatives).enumerate() {
            let order = i + 2;
            for (x, y) in a.iter().zip(b) {
                let want = if order % 2 == 1 { -x } else { *x };
                prop_assert!(rel_close(*y, want, 1e-10), "F^({}) {} vs {}", order, x, y);
            }
        }
    }

    #[test]
    fn closed_forms_agree_with_the_jet_loop(seed in 0u64..10_000) {
        let tol = 1e-8;
        let mut r = rng(seed);
        let (p, alpha) = kernel_polynomial(3, 6, &mut r);
        let plain = DenseTensorOracle::from_polynomial(&p, 6);
        let (_, v) = jet_and_test_values(&plain, &alpha, 3).unwrap();
        let t = closed_form_tests(&plain, &alpha, tol).unwrap();
        prop_assert!(rel_close(t.cusp, v[0], 1e-10));

        let (o, alpha) = degenerate(3, seed, false);
        let (_, v) = jet_and_test_values(&o, &alpha, 4).unwrap();
        let t = closed_form_tests(&o, &alpha, tol).unwrap();
        prop_assert!(t.cusp.abs() < 1e-12);
        prop_assert!(rel_close(t.swallowtail.unwrap(), v[1], 1e-10), "{:?} vs {}", t.swallowtail, v[1]);

        let (o, alpha) = degenerate(3, seed, true);
        let (_, v) = jet_and_test_values(&o, &alpha, 5).unwrap();
        let t = closed_form_tests(&o, &alpha, tol).unwrap();
        prop_assert!(t.swallowtail.unwrap().abs() < 1e-10);
        prop_assert!(rel_close(t.butterfly.unwrap(), v[2], 1e-10), "{:?} vs {}", t.butterfly, v[2]);
    }

    #[test]
    fn forms_are_invariant_under_kernel_shifts(seed in 0u64..10_000, t in -5.0f64..5.0, s in -5.0f64..5.0) {
        let (o, alpha) = degenerate(3, seed, true);
        let c = closed_form_tests(&o, &alpha, 1e-8).unwrap();
        let (v, w) = (c.v.unwrap(), c.w.unwrap());
        let sw = swallowtail_form(&o, &alpha, &v).unwrap();
        let bf = butterfly_form(&o, &alpha, &v, &w).unwrap();
        let vt: Vec<f64> = v.iter().zip(&alpha).map(|(x, a)| x + t * a).collect();
        let wt: Vec<f64> = w.iter().zip(&v).zip(&alpha).map(|((x, vi), a)| x + 3.0 * t * vi + s * a).collect();
        prop_assert!(rel_close(swallowtail_form(&o, &alpha, &vt).unwrap(), sw, 1e-9));
        prop_assert!(rel_close(butterfly_form(&o, &alpha, &vt, &wt).unwrap(), bf, 1e-9));
    }

    #[test]
    fn classification_is_invariant_under_rotation(seed in 0u64..10_000, n in 2usize..=5) {
        let mut r = rng(seed);
        let m = 3;
        let mut e = vec![0u32; m];
        e[0] = n as u32 + 1;
        let p = Polynomial::new(m)
            .with_term(r.gen_range(0.5..2.0), &e)
            .with_term(0.5, &[0, 2, 0])
            .with_term(-0.5, &[0, 0, 2])
            .with_term(r.gen_range(-1.0..1.0), &[0, 1, 2]);
        let q = random_orthogonal(m, &mut r);
        let base = DenseTensorOracle::from_polynomial(&p, 7);
        let tol = Tolerances::default();
        let plain = detect(&base, &tol, 7).unwrap();
        let rotated = detect(&TransformedOracle::new(base.clone(), q), &tol, 7).unwrap();
        prop_assert_eq!(plain.kind, SingularityKind::A(n));
        prop_assert_eq!(rotated.kind, plain.kind);
        prop_assert_eq!(rotated.signature, plain.signature);
        let last = plain.test_values.last().unwrap().abs();
        prop_assert!(rel_close(rotated.test_values.last().unwrap().abs(), last, 1e-9));
    }

    #[test]
    fn scaling_the_functional_scales_test_values(seed in 0u64..10_000, c in 0.1f64..10.0) {
        let mut r = rng(seed);
        let (p, alpha) = kernel_polynomial(3, 5, &mut r);
        let mut scaled = Polynomial::new(3);
        for (coef, e) in p.terms() {
            scaled.add_term(c * coef, e).unwrap();
        }
        let o1 = DenseTensorOracle::from_polynomial(&p, 6);
        let o2 = DenseTensorOracle::from_polynomial(&scaled, 6);
        let (j1, _) = jet_and_test_values(&o1, &alpha, 5).unwrap();
        let (j2, _) = jet_and_test_values(&o2, &alpha, 5).unwrap();
        for n in 3..=5 {
            let a = test_value(&o1, &alpha, &j1, n).unwrap();
            let b = test_value(&o2, &alpha, &j2, n).unwrap();
            prop_assert!(rel_close(b, c * a, 1e-9), "n = {}: {} vs {}", n, b, c * a);
        }
    }
}
