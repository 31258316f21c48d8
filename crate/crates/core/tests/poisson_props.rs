mod common;

use aseries::classifier::DerivativeOracle;
use aseries::poisson::{
    build_laplacian, discrete_functional, jacobian, laplacian_eigenvalue, poisson_oracle, residual, Bratu, Grid,
    GridFunction, Nonlinearity, PolynomialNonlinearity,
};
use common::rng;
use proptest::prelude::*;
use rand::Rng;

fn family(bratu: bool) -> Box<dyn Nonlinearity> {
    if bratu {
        Box::new(Bratu)
    } else {
        Box::new(PolynomialNonlinearity::new(vec![0.7, -0.4, 0.1]))
    }
}

fn state(grid: Grid, seed: u64, bratu: bool) -> (Vec<f64>, [f64; 3]) {
    let mut r = rng(seed);
    let u = (0..grid.len()).map(|_| r.gen_range(if bratu { 0.0..1.5 } else { -1.0..1.0 })).collect();
    let lambda = [r.gen_range(1.0..8.0), r.gen_range(0.0..0.25), r.gen_range(-1.0..1.0)];
    (u, lambda)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn laplacian_spectrum_is_the_closed_form(n in 1usize..=8, m in 1usize..=8) {
        let grid = Grid::new(n, m).unwrap();
        let dense = build_laplacian(grid).to_dense();
        let mut computed: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut exact: Vec<f64> = (1..=n)
            .flat_map(|p| (1..=m).map(move |q| (p, q)))
            .map(|(p, q)| laplacian_eigenvalue(grid, p, q))
            .collect();
        computed.sort_by(f64::total_cmp);
        exact.sort_by(f64::total_cmp);
        let scale = exact[0].abs();
        for (a, b) in computed.iter().zip(&exact) {
            prop_assert!((a - b).abs() <= 1e-10 * scale, "{} vs {}", a, b);
        }
    }

    #[test]
    fn jacobian_is_exactly_symmetric(n in 1usize..=6, m in 1usize..=6, seed in 0u64..1000, bratu: bool) {
        let grid = Grid::new(n, m).unwrap();
        let (u, lambda) = state(grid, seed, bratu);
        let g = jacobian(&u, &lambda, family(bratu).as_ref(), &build_laplacian(grid)).unwrap();
        for (i, j, v) in g.triplets() {
            prop_assert_eq!(g.get(j, i).to_bits(), v.to_bits());
        }
    }

    #[test]
    fn residual_is_the_gradient_of_the_functional(n in 1usize..=4, seed in 0u64..1000, bratu: bool) {
        let grid = Grid::square(n).unwrap();
        let (u, lambda) = state(grid, seed, bratu);
        let nl = family(bratu);
        let l = build_laplacian(grid);
        let g = residual(&u, &lambda, nl.as_ref(), &l).unwrap();
        let h = 1e-5;
        let mut up = u.clone();
        for k in 0..u.len() {
            up[k] = u[k] + h;
            let fp = discrete_functional(&up, &lambda, nl.as_ref(), &l).unwrap();
            up[k] = u[k] - h;
            let fm = discrete_functional(&up, &lambda, nl.as_ref(), &l).unwrap();
            up[k] = u[k];
            let fd = (fp - fm) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1.0), "node {}: {} vs {}", k, fd, g[k]);
        }
    }

    #[test]
    fn oracle_forms_match_explicit_derivatives(n in 1usize..=4, seed in 0u64..1000, bratu: bool) {
        let grid = Grid::square(n).unwrap();
        let (u, lambda) = state(grid, seed, bratu);
        let nl = family(bratu);
        let l = build_laplacian(grid);
        let o = poisson_oracle(&u, &lambda, nl.as_ref(), &l, 5).unwrap();
        let explicit = jacobian(&u, &lambda, nl.as_ref(), &l).unwrap().to_dense();
        prop_assert_eq!(o.hessian().unwrap(), explicit.clone());
        let mut r = rng(seed + 1);
        let a: Vec<f64> = (0..grid.len()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..grid.len()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let ab = o.contract(&[&a, &b]).unwrap();
        let want = (nalgebra::DVector::from_column_slice(&a).transpose() * &explicit * nalgebra::DVector::from_column_slice(&b))[0];
        prop_assert!((ab - want).abs() <= 1e-12 * want.abs().max(1.0));
        let c3 = o.contract(&[&a, &a, &b]).unwrap();
        let f2: f64 = (0..grid.len()).map(|j| nl.derivative(2, u[j], &lambda).unwrap() * a[j] * a[j] * b[j]).sum();
        prop_assert!((c3 - f2).abs() <= 1e-14 * f2.abs().max(1.0));
        let free = o.contract_free(&[&a, &a]).unwrap();
        prop_assert!((free.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() - c3).abs() <= 1e-12 * c3.abs().max(1.0));
    }

    #[test]
    fn saved_states_reload_bitwise(n in 1usize..=6, m in 1usize..=6, seed in 0u64..1000) {
        let grid = Grid::new(n, m).unwrap();
        let (u, lambda) = state(grid, seed, true);
        let f = GridFunction::new(grid, u).unwrap();
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let back = GridFunction::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.grid, grid);
        for (a, b) in back.values.iter().zip(&f.values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        let l = build_laplacian(grid);
        let r1 = residual(&f.values, &lambda, &Bratu, &l).unwrap();
        let r2 = residual(&back.values, &lambda, &Bratu, &l).unwrap();
        prop_assert_eq!(r1, r2);
    }
}

#[test]
fn grid_function_rejects_bad_files() {
    for text in ["", "3\n", "2 2\n1\n2\n3\n", "2 1\n1\nx\n", "0 2\n"] {
        assert!(GridFunction::read_from(text.as_bytes()).is_err(), "{text:?}");
    }
}
