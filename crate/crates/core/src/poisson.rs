//! Central-difference discretisation of `Δu + f(u, λ) = 0` on `(0,1)²` with
//! zero Dirichlet data.
//!
//! Interior values `U[i, j]` (`0 ≤ i < N` along x, `0 ≤ j < M` along y) are
//! flattened as `u[j·N + i]`. The discrete functional is
//! `S_Δ(u) = ½ uᵀ L u + Σ_k f̄(u_k, λ)` with gradient `G = L u + f(u, λ)` and
//! Hessian `G_u = L + diag f_u(u, λ)`; every higher derivative is diagonal.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::bell;
use crate::classifier::DerivativeOracle;
use crate::linalg::{dot, SparseMatrix};
use crate::{Error, Result};

/// Uniform interior grid with `N × M` unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub n: usize,
    pub m: usize,
}

impl Grid {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidRange(format!("grid {n}x{m} needs N, M ≥ 1")));
        }
        Ok(Self { n, m })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    pub fn dy(&self) -> f64 {
        1.0 / (self.m + 1) as f64
    }

    /// Cell area `Δx Δy`, the weight of the discrete `L²` inner product.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Flat index of the node closest to the centre of the square.
    pub fn center_index(&self) -> usize {
        self.index((self.n - 1) / 2, (self.m - 1) / 2)
    }

    /// `(x, y)` coordinates of the interior node with flat index `k`.
    pub fn coordinates(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k % self.n, k / self.n);
        ((i + 1) as f64 * self.dx(), (j + 1) as f64 * self.dy())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n, self.m)
    }
}

/// Values on the interior nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coordinates(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    /// Value at node `(i, j)` of the extended grid including the boundary
    /// (`0 ≤ i ≤ N + 1`), where boundary nodes are zero.
    fn extended(&self, i: usize, j: usize) -> f64 {
        if i == 0 || j == 0 || i > self.grid.n || j > self.grid.m {
            0.0
        } else {
            self.values[self.grid.index(i - 1, j - 1)]
        }
    }

    /// Bilinear interpolant (with the zero boundary) evaluated at `(x, y)`.
    pub fn eval_bilinear(&self, x: f64, y: f64) -> f64 {
        let snap = |s: f64| if (s - s.round()).abs() < 1e-12 { s.round() } else { s };
        let sx = snap(x / self.grid.dx()).clamp(0.0, (self.grid.n + 1) as f64);
        let sy = snap(y / self.grid.dy()).clamp(0.0, (self.grid.m + 1) as f64);
        let i0 = (sx.floor() as usize).min(self.grid.n);
        let j0 = (sy.floor() as usize).min(self.grid.m);
        let (tx, ty) = (sx - i0 as f64, sy - j0 as f64);
        (1.0 - tx) * (1.0 - ty) * self.extended(i0, j0)
            + tx * (1.0 - ty) * self.extended(i0 + 1, j0)
            + (1.0 - tx) * ty * self.extended(i0, j0 + 1)
            + tx * ty * self.extended(i0 + 1, j0 + 1)
    }

    /// Bilinear interpolation onto the interior nodes of another grid.
    pub fn interpolate_to(&self, target: Grid) -> GridFunction {
        GridFunction::from_fn(target, |x, y| self.eval_bilinear(x, y))
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{} {}", self.grid.n, self.grid.m)?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty grid function file".into()))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("line 1: invalid header '{header}'"))))
            .collect::<Result<_>>()?;
        let [n, m] = dims[..] else {
            return Err(Error::Parse(format!("line 1: expected 'N M', got '{header}'")));
        };
        let grid = Grid::new(n, m)?;
        let mut values = Vec::with_capacity(grid.len());
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: invalid value '{t}'", i + 2)))?,
            );
        }
        Self::new(grid, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Five-point Laplacian `L = I_M ⊗ D_xx + D_yy ⊗ I_N`.
pub fn build_laplacian(grid: Grid) -> SparseMatrix {
    let dxx = SparseMatrix::tridiagonal(grid.n, -2.0, 1.0).scale(1.0 / (grid.dx() * grid.dx()));
    let dyy = SparseMatrix::tridiagonal(grid.m, -2.0, 1.0).scale(1.0 / (grid.dy() * grid.dy()));
    SparseMatrix::identity(grid.m)
        .kron(&dxx)
        .add(&dyy.kron(&SparseMatrix::identity(grid.n)))
}

/// Exact eigenvalues of [`build_laplacian`].
pub fn laplacian_eigenvalue(grid: Grid, p: usize, q: usize) -> f64 {
    let (dx, dy) = (grid.dx(), grid.dy());
    let sx = (p as f64 * std::f64::consts::PI * dx / 2.0).sin();
    let sy = (q as f64 * std::f64::consts::PI * dy / 2.0).sin();
    -4.0 / (dx * dx) * sx * sx - 4.0 / (dy * dy) * sy * sy
}

/// The first Laplacian eigenvector `sin(πx) sin(πy)`, scaled to `Δx Δy ‖α‖² = 1`.
pub fn first_eigenvector(grid: Grid) -> GridFunction {
    let mut g = GridFunction::from_fn(grid, |x, y| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin());
    let s = (grid.cell_area() * dot(&g.values, &g.values)).sqrt();
    g.values.iter_mut().for_each(|v| *v /= s);
    g
}

/// A scalar nonlinearity `f(t, λ)`, `λ ∈ ℝ³`, with its `t`-derivatives and
/// their first `λ`-derivatives.
pub trait Nonlinearity: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Highest `t`-derivative order available.
    fn max_order(&self) -> usize;

    /// `∂ᵏf/∂tᵏ (t, λ)`.
    fn derivative(&self, k: usize, t: f64, lambda: &[f64; 3]) -> Result<f64>;

    /// `∇_λ ∂ᵏf/∂tᵏ (t, λ)`.
    fn dlambda(&self, k: usize, t: f64, lambda: &[f64; 3]) -> Result<[f64; 3]>;

    /// Antiderivative `f̄(t, λ) = ∫₀ᵗ f(τ, λ) dτ`.
    fn primitive(&self, t: f64, lambda: &[f64; 3]) -> Result<f64>;
}

fn order_check(k: usize, max: usize) -> Result<()> {
    if k > max {
        return Err(Error::OrderTooHigh { requested: k, max });
    }
    Ok(())
}

/// `sin(x + kπ/2)`, the `k`-th derivative of `sin`.
fn sin_shift(k: usize, x: f64) -> f64 {
    match k % 4 {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    }
}

/// Complete Bell polynomials `B_0 … B_n` at `xs[0..n]` via
/// `B_{k+1} = Σ_i C(k, i) B_{k-i} x_{i+1}`.
fn bell_sequence(xs: &[f64], n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    for k in 0..n {
        b[k + 1] = (0..=k).map(|i| bell::binomial(k, i) as f64 * b[k - i] * xs[i]).sum();
    }
    b
}

/// `f(t, λ) = λ₁ exp(t / (λ₂ t + 1)) + λ₃ sin(λ₁ t)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bratu;

/// Smallest admissible `|λ₂ t + 1|`.
pub const BRATU_POLE_GUARD: f64 = 1e-8;

impl Bratu {
    fn denominator(t: f64, lambda: &[f64; 3]) -> Result<f64> {
        let q = lambda[1] * t + 1.0;
        if q.abs() < BRATU_POLE_GUARD {
            return Err(Error::Domain(format!("λ₂ t + 1 = {q:e} at t = {t}")));
        }
        Ok(q)
    }

    /// `g_j = d^j/dt^j [t/q]` for `j = 1..=k`.
    fn inner_derivatives(k: usize, l2: f64, q: f64) -> Vec<f64> {
        (1..=k)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * bell::factorial(j) as f64 * l2.powi(j as i32 - 1) / q.powi(j as i32 + 1)
            })
            .collect()
    }
}

impl Nonlinearity for Bratu {
    fn name(&self) -> &str {
        "bratu"
    }

    fn max_order(&self) -> usize {
        bell::MAX_ORDER
    }

    fn derivative(&self, k: usize, t: f64, lambda: &[f64; 3]) -> Result<f64> {
        order_check(k, self.max_order())?;
        let q = Self::denominator(t, lambda)?;
        let [l1, l2, l3] = *lambda;
        let e = (t / q).exp();
        let g = Self::inner_derivatives(k, l2, q);
        let b = bell_sequence(&g, k);
        Ok(l1 * e * b[k] + l3 * l1.powi(k as i32) * sin_shift(k, l1 * t))
    }

    fn dlambda(&self, k: usize, t: f64, lambda: &[f64; 3]) -> Result<[f64; 3]> {
        order_check(k, self.max_order())?;
        let q = Self::denominator(t, lambda)?;
        let [l1, l2, l3] = *lambda;
        let e = (t / q).exp();
        let g = Self::inner_derivatives(k, l2, q);
        let b = bell_sequence(&g, k);
        let x = l1 * t;

        let lower = if k == 0 { 0.0 } else { k as f64 * l1.powi(k as i32 - 1) * sin_shift(k, x) };
        let d1 = e * b[k] + l3 * (lower + l1.powi(k as i32) * t * sin_shift(k + 1, x));

        // ∂g_j/∂λ₂ = (-1)^{j-1} j! [(j-1) λ₂^{j-2} q^{-(j+1)} - (j+1) t λ₂^{j-1} q^{-(j+2)}]
        let mut d2 = -t * t / (q * q) * b[k];
        for j in 1..=k {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let first = if j >= 2 {
                (j - 1) as f64 * l2.powi(j as i32 - 2) / q.powi(j as i32 + 1)
            } else {
                0.0
            };
            let second = (j + 1) as f64 * t * l2.powi(j as i32 - 1) / q.powi(j as i32 + 2);
            let dg = sign * bell::factorial(j) as f64 * (first - second);
            d2 += bell::binomial(k, j) as f64 * b[k - j] * dg;
        }
        d2 *= l1 * e;

        let d3 = l1.powi(k as i32) * sin_shift(k, x);
        Ok([d1, d2, d3])
    }

    fn primitive(&self, t: f64, lambda: &[f64; 3]) -> Result<f64> {
        let [l1, l2, l3] = *lambda;
        // the pole τ = -1/λ₂ must not lie between 0 and t
        if l2 != 0.0 {
            let pole = -1.0 / l2;
            if (pole - 0.0) * (pole - t) <= 0.0 || (l2 * t + 1.0).abs() < BRATU_POLE_GUARD {
                return Err(Error::Domain(format!("pole of the exponent inside [0, {t}]")));
            }
        }
        let exp_part = if l1 == 0.0 || t == 0.0 {
            0.0
        } else {
            let h = |tau: f64| (tau / (l2 * tau + 1.0)).exp();
            l1 * adaptive_simpson(&h, 0.0, t, 1e-13 * (1.0 + t.abs()), 40)
        };
        let sin_part = if l1 == 0.0 { 0.0 } else { l3 * (1.0 - (l1 * t).cos()) / l1 };
        Ok(exp_part + sin_part)
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// `f(t, λ) = λ₁ t + λ₂ t²/2 + λ₃ t³/6 + Σ_{l ≥ 4} c_l t^l / l!`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolynomialNonlinearity {
    /// `c_4, c_5, …`.
    pub higher: Vec<f64>,
}

impl PolynomialNonlinearity {
    pub fn new(higher: Vec<f64>) -> Self {
        Self { higher }
    }

    /// `(a_1, a_2, …)` with `a_1..a_3 = λ`.
    fn coefficients(&self, lambda: &[f64; 3]) -> Vec<f64> {
        let mut a = lambda.to_vec();
        a.extend_from_slice(&self.higher);
        a
    }
}

impl Nonlinearity for PolynomialNonlinearity {
    fn name(&self) -> &str {
        "polynomial"
    }

    fn max_order(&self) -> usize {
        bell::MAX_ORDER
    }

    fn derivative(&self, k: usize, t: f64, lambda: &[f64; 3]) -> Result<f64> {
        order_check(k, self.max_order())?;
        let a = self.coefficients(lambda);
        Ok(a.iter()
            .enumerate()
            .map(|(i, &al)| (i + 1, al))
            .filter(|&(l, _)| l >= k)
            .map(|(l, al)| al * t.powi((l - k) as i32) / bell::factorial(l - k) as f64)
            .sum())
    }

    fn dlambda(&self, k: usize, t: f64, _lambda: &[f64; 3]) -> Result<[f64; 3]> {
        order_check(k, self.max_order())?;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            let l = i + 1;
            if l >= k {
                *o = t.powi((l - k) as i32) / bell::factorial(l - k) as f64;
            }
        }
        Ok(out)
    }

    fn primitive(&self, t: f64, lambda: &[f64; 3]) -> Result<f64> {
        let a = self.coefficients(lambda);
        Ok(a.iter()
            .enumerate()
            .map(|(i, &al)| al * t.powi(i as i32 + 2) / bell::factorial(i + 2) as f64)
            .sum())
    }
}

/// `f^(k)(u_j, λ)` for every node.
pub fn pointwise(nl: &dyn Nonlinearity, k: usize, u: &[f64], lambda: &[f64; 3]) -> Result<Vec<f64>> {
    u.iter().map(|&t| nl.derivative(k, t, lambda)).collect()
}

/// `∇_λ f^(k)(u_j, λ)` for every node.
pub fn pointwise_dlambda(nl: &dyn Nonlinearity, k: usize, u: &[f64], lambda: &[f64; 3]) -> Result<Vec<[f64; 3]>> {
    u.iter().map(|&t| nl.dlambda(k, t, lambda)).collect()
}

fn check_len(l: &SparseMatrix, u: &[f64]) -> Result<()> {
    if u.len() != l.nrows() {
        return Err(Error::LengthMismatch {
            expected: l.nrows(),
            got: u.len(),
        });
    }
    Ok(())
}

/// `G(u, λ) = L u + f(u, λ)`.
pub fn residual(u: &[f64], lambda: &[f64; 3], nl: &dyn Nonlinearity, l: &SparseMatrix) -> Result<Vec<f64>> {
    check_len(l, u)?;
    let mut g = l.matvec(u);
    for (gi, &ui) in g.iter_mut().zip(u) {
        *gi += nl.derivative(0, ui, lambda)?;
    }
    Ok(g)
}

/// `G_u(u, λ) = L + diag f_u(u, λ)`.
pub fn jacobian(u: &[f64], lambda: &[f64; 3], nl: &dyn Nonlinearity, l: &SparseMatrix) -> Result<SparseMatrix> {
    check_len(l, u)?;
    Ok(l.add_diagonal(&pointwise(nl, 1, u, lambda)?))
}

/// `S_Δ(u, λ) = ½ uᵀ L u + Σ f̄(u_k, λ)`.
pub fn discrete_functional(u: &[f64], lambda: &[f64; 3], nl: &dyn Nonlinearity, l: &SparseMatrix) -> Result<f64> {
    check_len(l, u)?;
    let mut s = 0.5 * dot(u, &l.matvec(u));
    for &ui in u {
        s += nl.primitive(ui, lambda)?;
    }
    Ok(s)
}

/// Derivative forms of `S_Δ` at a fixed state: `S^(1) = G`, `S^(2) = G_u`, and
/// for `k ≥ 3` the diagonal tensors with entries `f^(k-1)(u_j, λ)`.
#[derive(Debug, Clone)]
pub struct PoissonOracle {
    gradient: Vec<f64>,
    hessian: SparseMatrix,
    /// `diagonals[i] = f^(i+2)(u, λ)`, serving orders `k = i + 3`.
    diagonals: Vec<Vec<f64>>,
}

pub fn poisson_oracle(
    u: &[f64],
    lambda: &[f64; 3],
    nl: &dyn Nonlinearity,
    l: &SparseMatrix,
    max_order: usize,
) -> Result<PoissonOracle> {
    if max_order > nl.max_order() + 1 {
        return Err(Error::OrderTooHigh {
            requested: max_order,
            max: nl.max_order() + 1,
        });
    }
    let gradient = residual(u, lambda, nl, l)?;
    let hessian = jacobian(u, lambda, nl, l)?;
    let diagonals = (3..=max_order)
        .map(|k| pointwise(nl, k - 1, u, lambda))
        .collect::<Result<_>>()?;
    Ok(PoissonOracle {
        gradient,
        hessian,
        diagonals,
    })
}

impl PoissonOracle {
    pub fn hessian_sparse(&self) -> &SparseMatrix {
        &self.hessian
    }
}

impl DerivativeOracle for PoissonOracle {
    fn dimension(&self) -> usize {
        self.gradient.len()
    }

    fn max_order(&self) -> usize {
        self.diagonals.len() + 2
    }

    fn contract(&self, vectors: &[&[f64]]) -> Result<f64> {
        match vectors.len() {
            0 => Err(Error::OrderTooHigh { requested: 0, max: self.max_order() }),
            1 => Ok(dot(&self.gradient, vectors[0])),
            2 => Ok(dot(vectors[0], &self.hessian.matvec(vectors[1]))),
            k => {
                let d = self
                    .diagonals
                    .get(k - 3)
                    .ok_or(Error::OrderTooHigh { requested: k, max: self.max_order() })?;
                Ok((0..d.len()).map(|j| d[j] * vectors.iter().map(|v| v[j]).product::<f64>()).sum())
            }
        }
    }

    fn contract_free(&self, vectors: &[&[f64]]) -> Result<Vec<f64>> {
        match vectors.len() {
            0 => Ok(self.gradient.clone()),
            1 => Ok(self.hessian.matvec(vectors[0])),
            k => {
                let d = self.diagonals.get(k - 2).ok_or(Error::OrderTooHigh {
                    requested: k + 1,
                    max: self.max_order(),
                })?;
                Ok((0..d.len()).map(|j| d[j] * vectors.iter().map(|v| v[j]).product::<f64>()).collect())
            }
        }
    }

    fn hessian(&self) -> Result<DMatrix<f64>> {
        Ok(self.hessian.to_dense())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_small_cases() {
        let l = build_laplacian(Grid::new(1, 1).unwrap());
        assert_eq!(l.to_dense()[(0, 0)], -16.0);
        let l = build_laplacian(Grid::new(2, 1).unwrap()).to_dense();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[-26.0, 9.0, 9.0, -26.0]));
    }

    #[test]
    fn laplacian_matches_stencil() {
        let g = Grid::new(4, 3).unwrap();
        let l = build_laplacian(g);
        let (hx, hy) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
        for j in 0..g.m {
            for i in 0..g.n {
                let k = g.index(i, j);
                assert_eq!(l.get(k, k), -2.0 * hx - 2.0 * hy);
                if i + 1 < g.n {
                    assert_eq!(l.get(k, g.index(i + 1, j)), hx);
                }
                if j + 1 < g.m {
                    assert_eq!(l.get(k, g.index(i, j + 1)), hy);
                }
            }
        }
        assert!(l.is_symmetric());
        assert_eq!(l.nnz(), 12 + 2 * (3 * 3) + 2 * (4 * 2));
    }

    #[test]
    fn residual_and_jacobian_examples() {
        let g = Grid::new(1, 1).unwrap();
        let l = build_laplacian(g);
        assert_eq!(residual(&[0.0], &[1.0, 0.0, 0.0], &Bratu, &l).unwrap(), vec![1.0]);
        assert_eq!(residual(&[0.0], &[0.0, 0.0, 0.0], &Bratu, &l).unwrap(), vec![0.0]);
        assert_eq!(jacobian(&[0.0], &[1.0, 0.0, 0.0], &Bratu, &l).unwrap().to_dense()[(0, 0)], -15.0);
        let poly = PolynomialNonlinearity::default();
        assert_eq!(residual(&[0.0], &[3.0, 1.0, 2.0], &poly, &l).unwrap(), vec![0.0]);
    }

    #[test]
    fn bratu_low_order_values() {
        let lam = [1.5, 0.2, 0.7];
        let t: f64 = 0.4;
        let q = 1.0 + 0.2 * t;
        let e = (t / q).exp();
        let expected = 1.5 * e + 0.7 * (1.5 * t).sin();
        assert!((Bratu.derivative(0, t, &lam).unwrap() - expected).abs() < 1e-15);
        let expected = 1.5 * e / (q * q) + 0.7 * 1.5 * (1.5 * t).cos();
        assert!((Bratu.derivative(1, t, &lam).unwrap() - expected).abs() < 1e-14);
        // cusp example: f_uu(0) = λ₁ (1 - 2 λ₂)
        assert!((Bratu.derivative(2, 0.0, &[1.0, 0.5, 0.0]).unwrap()).abs() < 1e-15);
        assert_eq!(Bratu.derivative(3, 0.0, &[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(Bratu.derivative(0, -1.0, &[1.0, 1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn bratu_primitive() {
        let lam = [0.0, 0.0, 0.0];
        assert_eq!(Bratu.primitive(0.3, &lam).unwrap(), 0.0);
        let lam = [2.0, 0.0, 0.5];
        let t: f64 = 0.8;
        let expected = 2.0 * (t.exp() - 1.0) + 0.5 * (1.0 - (2.0 * t).cos()) / 2.0;
        assert!((Bratu.primitive(t, &lam).unwrap() - expected).abs() < 1e-12);
        assert_eq!(Bratu.primitive(0.0, &[1.0, 0.3, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn interpolation_of_constant() {
        let coarse = Grid::square(3).unwrap();
        let c = GridFunction::new(coarse, vec![1.0; 9]).unwrap();
        let same = c.interpolate_to(coarse);
        assert_eq!(same, c);
        let fine = c.interpolate_to(Grid::square(7).unwrap());
        // node (1,1) of the fine grid sits halfway to the boundary
        assert!((fine.values[0] - 0.25).abs() < 1e-15);
        assert!((fine.values[fine.grid.index(3, 3)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_function_round_trip() {
        let g = Grid::new(3, 2).unwrap();
        let f = GridFunction::from_fn(g, |x, y| (x * 7.1).sin() / (0.3 + y));
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let back = GridFunction::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert!(GridFunction::read_from("2 2\n1\n2\n".as_bytes()).is_err());
    }
}
