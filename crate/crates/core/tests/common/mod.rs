#![allow(dead_code)]

use aseries::classifier::Polynomial;
use aseries::linalg::Jacobian;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_orthogonal(m: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
    a.qr().q()
}

/// Polynomial without constant or linear part whose Hessian at 0 has kernel
/// `Qᵀe₁`; returns the polynomial in mixed coordinates and the unit kernel vector.
pub fn kernel_polynomial(m: usize, degree: u32, rng: &mut impl Rng) -> (Polynomial, Vec<f64>) {
    let mut p = Polynomial::new(m);
    for i in 1..m {
        let d = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut e = vec![0u32; m];
        e[i] = 2;
        p.add_term(0.5 * d, &e).unwrap();
    }
    for deg in 3..=degree {
        for _ in 0..4 {
            let mut e = vec![0u32; m];
            for _ in 0..deg {
                e[rng.gen_range(0..m)] += 1;
            }
            p.add_term(rng.gen_range(-1.0..1.0), &e).unwrap();
        }
        let mut e = vec![0u32; m];
        e[0] = deg;
        p.add_term(rng.gen_range(-1.0..1.0), &e).unwrap();
    }
    let q = random_orthogonal(m, rng);
    let alpha: Vec<f64> = q.row(0).iter().copied().collect();
    (p.transformed(&q), alpha)
}

/// `r(s) = S(sα + F(s))` with `F(s) ⟂ α` solving the stationarity condition
/// on the complement of `α`, by Newton from `y0`.
pub fn reduced_value(p: &Polynomial, alpha: &[f64], s: f64, y0: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let a = DVector::from_column_slice(alpha);
    // orthonormal complement of α
    let mut full = DMatrix::identity(m, m);
    full.set_column(0, &a);
    let q = full.qr().q();
    let b = q.columns(1, m - 1).into_owned();
    let mut y = DVector::from_column_slice(y0);
    for _ in 0..60 {
        let x = &a * s + &b * &y;
        let g = DVector::from_vec(p.gradient(x.as_slice()));
        let rg = b.transpose() * g;
        let h = p.hessian(x.as_slice());
        let jh = b.transpose() * h * &b;
        let dy = jh.lu().solve(&(-&rg)).expect("reduced Hessian is regular near 0");
        y += &dy;
        if dy.norm() < 1e-17 {
            break;
        }
    }
    let x = &a * s + &b * &y;
    (p.eval(x.as_slice()), y.iter().copied().collect())
}

/// Fornberg weights for the `n`-th derivative at 0 on the nodes `xs`.
pub fn fd_weights(xs: &[f64], n: usize) -> Vec<f64> {
    let len = xs.len();
    let mut c = vec![vec![0.0; n + 1]; len];
    let mut c1 = 1.0;
    let mut c4 = xs[0];
    c[0][0] = 1.0;
    for i in 1..len {
        let mn = i.min(n);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i];
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[n]).collect()
}

/// Derivatives `r^(n)(0)` for each `n` in `orders` from a 13-point central stencil.
pub fn reduced_derivatives(p: &Polynomial, alpha: &[f64], h: f64, orders: &[usize]) -> Vec<f64> {
    let k = 6i32;
    let m = alpha.len();
    let nodes: Vec<f64> = (-k..=k).map(|i| i as f64 * h).collect();
    let mut values = vec![0.0; nodes.len()];
    for dir in [1.0, -1.0] {
        let mut y = vec![0.0; m - 1];
        for i in 0..=k {
            let s = dir * i as f64 * h;
            let (r, y1) = reduced_value(p, alpha, s, &y);
            values[(k + (dir as i32) * i) as usize] = r;
            y = y1;
        }
    }
    orders
        .iter()
        .map(|&n| {
            fd_weights(&nodes, n)
                .iter()
                .zip(&values)
                .map(|(w, v)| w * v)
                .sum()
        })
        .collect()
}

/// Central-difference Jacobian with steps `h · max(1, |z_j|)`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, z: &[f64], h: f64) -> DMatrix<f64> {
    let rows = f(z).len();
    let mut out = DMatrix::zeros(rows, z.len());
    let mut zp = z.to_vec();
    for j in 0..z.len() {
        let step = h * z[j].abs().max(1.0);
        zp[j] = z[j] + step;
        let fp = f(&zp);
        zp[j] = z[j] - step;
        let fm = f(&zp);
        zp[j] = z[j];
        for i in 0..rows {
            out[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    out
}

/// Largest `|A - B| / max(|A|, 1)` entrywise.
pub fn relative_gap(analytic: &Jacobian, fd: &DMatrix<f64>) -> f64 {
    let a = analytic.to_dense();
    assert_eq!(a.shape(), fd.shape());
    a.iter()
        .zip(fd.iter())
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
