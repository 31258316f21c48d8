//! Generic A-series recognition for a functional `S: ℝ^m → ℝ` at a point.
//!
//! The functional is seen only through its symmetric derivative forms
//! `S^(k)(v_1, …, v_k)` at the point (a [`DerivativeOracle`]). With `α`
//! spanning the one-dimensional Hessian kernel, the reduced function
//! `r(s) = S(sα + F(s))` has derivatives given by Bell-polynomial contractions
//!
//! ```text
//! r^(n)(0) = Σ_k Σ_{j ∈ J(n,k)} c_j · S^(k)(d_1^{j_1} ⊗ d_2^{j_2} ⊗ ⋯),   d_1 = α, d_l = F^(l)(0)
//! ```
//!
//! and the jet `F''(0), F'''(0), …` follows one order at a time from the same
//! contraction with one extra free slot. Tests are run in increasing order; the
//! first nonzero `r^(n)(0)` identifies an `A_{n-1}` singularity.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bell::{self, MAX_ORDER};
use crate::linalg::{determinant_sign, dot, norm2, Sign, SparseMatrix};
use crate::{Error, Result};

/// Symmetric multilinear forms `S^(k)` of a functional at a fixed point.
pub trait DerivativeOracle {
    fn dimension(&self) -> usize;

    /// Highest order `k` for which [`contract`](Self::contract) is available.
    fn max_order(&self) -> usize;

    /// `S^(k)(v_1, …, v_k)` with `k = vectors.len() ≥ 1`. Order one is the gradient.
    fn contract(&self, vectors: &[&[f64]]) -> Result<f64>;

    /// The linear form `ξ ↦ S^(k+1)(ξ, v_1, …, v_k)` as a vector.
    fn contract_free(&self, vectors: &[&[f64]]) -> Result<Vec<f64>> {
        let m = self.dimension();
        let mut e = vec![0.0; m];
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            e[i] = 1.0;
            let mut args: Vec<&[f64]> = Vec::with_capacity(vectors.len() + 1);
            args.push(&e);
            args.extend_from_slice(vectors);
            out.push(self.contract(&args)?);
            e[i] = 0.0;
        }
        Ok(out)
    }

    fn gradient(&self) -> Result<Vec<f64>> {
        self.contract_free(&[])
    }

    fn hessian(&self) -> Result<DMatrix<f64>> {
        let m = self.dimension();
        let mut h = DMatrix::zeros(m, m);
        let mut e = vec![0.0; m];
        for j in 0..m {
            e[j] = 1.0;
            let col = self.contract_free(&[&e])?;
            for i in 0..m {
                h[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        Ok(h)
    }
}

fn check_order(order: usize, max: usize) -> Result<()> {
    if order == 0 || order > max {
        return Err(Error::OrderTooHigh { requested: order, max });
    }
    Ok(())
}

/// A real polynomial in `m` variables, stored as `(coefficient, exponents)` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }

    pub fn add_term(&mut self, coefficient: f64, exponents: &[u32]) -> Result<()> {
        if exponents.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: exponents.len(),
            });
        }
        self.terms.push((coefficient, exponents.to_vec()));
        Ok(())
    }

    pub fn with_term(mut self, coefficient: f64, exponents: &[u32]) -> Self {
        self.add_term(coefficient, exponents).expect("exponent count");
        self
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, e)| e.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (c, e) in &self.terms {
            for i in 0..self.dim {
                if e[i] == 0 {
                    continue;
                }
                let mut t = c * e[i] as f64;
                for (k, (&p, &xk)) in e.iter().zip(x).enumerate() {
                    let p = if k == i { p - 1 } else { p };
                    t *= xk.powi(p as i32);
                }
                g[i] += t;
            }
        }
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (c, e) in &self.terms {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let mut p = e.clone();
                    let mut t = *c;
                    for &idx in &[i, j] {
                        if p[idx] == 0 {
                            t = 0.0;
                            break;
                        }
                        t *= p[idx] as f64;
                        p[idx] -= 1;
                    }
                    if t == 0.0 {
                        continue;
                    }
                    t *= p.iter().zip(x).map(|(&q, &xk)| xk.powi(q as i32)).product::<f64>();
                    h[(i, j)] += t;
                }
            }
        }
        h
    }

    /// `S(Q x)`: the polynomial in rotated coordinates, expanded.
    pub fn transformed(&self, q: &DMatrix<f64>) -> Polynomial {
        DenseTensorOracle::from_polynomial(self, self.degree().max(1)).to_polynomial_transformed(q)
    }
}

/// Dense symmetric derivative tensors at the origin, orders `1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensorOracle {
    dim: usize,
    /// `tensors[k-1]` holds `S^(k)` with flat index `Σ_s i_s m^s`.
    tensors: Vec<Vec<f64>>,
}

impl DenseTensorOracle {
    pub fn zeros(dim: usize, max_order: usize) -> Self {
        let tensors = (1..=max_order).map(|k| vec![0.0; dim.pow(k as u32)]).collect();
        Self { dim, tensors }
    }

    /// Derivative tensors of a polynomial at the origin, up to `max_order`.
    pub fn from_polynomial(poly: &Polynomial, max_order: usize) -> Self {
        let mut out = Self::zeros(poly.dim, max_order);
        for (c, e) in &poly.terms {
            let k: usize = e.iter().sum::<u32>() as usize;
            if k == 0 || k > max_order {
                continue;
            }
            let weight = c * e.iter().map(|&p| bell::factorial(p as usize) as f64).product::<f64>();
            let m = poly.dim;
            let t = &mut out.tensors[k - 1];
            let mut counts = vec![0u32; m];
            for flat in 0..t.len() {
                counts.iter_mut().for_each(|c| *c = 0);
                let mut rem = flat;
                for _ in 0..k {
                    counts[rem % m] += 1;
                    rem /= m;
                }
                if counts == *e {
                    t[flat] += weight;
                }
            }
        }
        out
    }

    /// Sets `S^(k)` from a flat array of `m^k` values; the array is symmetrised.
    pub fn set_tensor(&mut self, k: usize, values: &[f64]) -> Result<()> {
        check_order(k, self.tensors.len())?;
        let m = self.dim;
        let len = m.pow(k as u32);
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: values.len(),
            });
        }
        // average over all index permutations sharing the same multiset
        let mut sums: std::collections::HashMap<Vec<usize>, (f64, usize)> = Default::default();
        let key = |flat: usize| {
            let mut idx: Vec<usize> = (0..k).map(|s| (flat / m.pow(s as u32)) % m).collect();
            idx.sort_unstable();
            idx
        };
        for (flat, &v) in values.iter().enumerate() {
            let e = sums.entry(key(flat)).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        let t = &mut self.tensors[k - 1];
        for (flat, slot) in t.iter_mut().enumerate() {
            let (s, n) = sums[&key(flat)];
            *slot = s / n as f64;
        }
        Ok(())
    }

    pub fn tensor(&self, k: usize) -> Option<&[f64]> {
        self.tensors.get(k.wrapping_sub(1)).map(Vec::as_slice)
    }

    fn to_polynomial_transformed(&self, q: &DMatrix<f64>) -> Polynomial {
        // Taylor expansion of S(Qx) about 0: coefficient of x^e is S^(k)(Qe_.., …)/e!
        let m = self.dim;
        let mut poly = Polynomial::new(m);
        let cols: Vec<Vec<f64>> = (0..m).map(|j| q.column(j).iter().copied().collect()).collect();
        for k in 1..=self.tensors.len() {
            for e in exponent_vectors(m, k) {
                let mut args: Vec<&[f64]> = Vec::with_capacity(k);
                for (i, &p) in e.iter().enumerate() {
                    for _ in 0..p {
                        args.push(&cols[i]);
                    }
                }
                let v = self.contract(&args).unwrap();
                let denom: f64 = e.iter().map(|&p| bell::factorial(p as usize) as f64).product();
                if v != 0.0 {
                    poly.terms.push((v / denom, e));
                }
            }
        }
        poly
    }
}

fn exponent_vectors(m: usize, k: usize) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![k as u32]];
    }
    let mut out = Vec::new();
    for first in (0..=k).rev() {
        for mut rest in exponent_vectors(m - 1, k - first) {
            rest.insert(0, first as u32);
            out.push(rest);
        }
    }
    out
}

impl DerivativeOracle for DenseTensorOracle {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn max_order(&self) -> usize {
        self.tensors.len()
    }

    fn contract(&self, vectors: &[&[f64]]) -> Result<f64> {
        let k = vectors.len();
        check_order(k, self.tensors.len())?;
        for v in vectors {
            if v.len() != self.dim {
                return Err(Error::LengthMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        // contract the slowest index first: T[i_0 + m i_1 + …]
        let m = self.dim;
        let mut cur: Vec<f64> = self.tensors[k - 1].clone();
        for v in vectors.iter().rev() {
            let stride = cur.len() / m;
            let mut next = vec![0.0; stride];
            for (i, &vi) in v.iter().enumerate() {
                if vi == 0.0 {
                    continue;
                }
                let block = &cur[i * stride..(i + 1) * stride];
                next.iter_mut().zip(block).for_each(|(n, b)| *n += vi * b);
            }
            cur = next;
        }
        Ok(cur[0])
    }
}

/// The oracle of `x ↦ S(Q x)` for a square matrix `Q`.
#[derive(Debug, Clone)]
pub struct TransformedOracle<O> {
    inner: O,
    q: DMatrix<f64>,
}

impl<O: DerivativeOracle> TransformedOracle<O> {
    pub fn new(inner: O, q: DMatrix<f64>) -> Self {
        assert_eq!(q.nrows(), inner.dimension());
        Self { inner, q }
    }

    /// Maps a vector of the original coordinates to the transformed ones (`Qᵀ v`).
    pub fn pull_back(&self, v: &[f64]) -> Vec<f64> {
        (self.q.transpose() * DVector::from_column_slice(v)).iter().copied().collect()
    }
}

impl<O: DerivativeOracle> DerivativeOracle for TransformedOracle<O> {
    fn dimension(&self) -> usize {
        self.q.ncols()
    }

    fn max_order(&self) -> usize {
        self.inner.max_order()
    }

    fn contract(&self, vectors: &[&[f64]]) -> Result<f64> {
        let mapped: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| (&self.q * DVector::from_column_slice(v)).iter().copied().collect())
            .collect();
        let refs: Vec<&[f64]> = mapped.iter().map(Vec::as_slice).collect();
        self.inner.contract(&refs)
    }
}

/// Jet of the map `F` at zero: `derivatives[i] = F^(i+2)(0)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JetOfF {
    pub derivatives: Vec<Vec<f64>>,
}

impl JetOfF {
    /// Highest derivative order held (1 when empty, since `F'(0) = 0`).
    pub fn order(&self) -> usize {
        self.derivatives.len() + 1
    }
}

/// Evaluates the Bell contraction of order `n` with arguments `slots[l-1] = d_l`.
/// `None` slots are zero and every monomial touching them is skipped. With
/// `free`, each `S^(k)` gets one extra open slot and the result is a vector.
fn bell_contract(oracle: &dyn DerivativeOracle, n: usize, slots: &[Option<&[f64]>], free: bool) -> Result<Vec<f64>> {
    let width = if free { oracle.dimension() } else { 1 };
    let mut acc = vec![0.0; width];
    for mono in bell::bell_monomials(n)? {
        let sizes = mono.index.block_sizes();
        let args: Option<Vec<&[f64]>> = sizes.iter().map(|&l| slots[l - 1]).collect();
        let Some(args) = args else { continue };
        let c = mono.coefficient as f64;
        if free {
            let g = oracle.contract_free(&args)?;
            acc.iter_mut().zip(&g).for_each(|(a, gi)| *a += c * gi);
        } else {
            acc[0] += c * oracle.contract(&args)?;
        }
    }
    Ok(acc)
}

/// Outcome of the Hessian kernel test.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInfo {
    pub dimension: usize,
    pub alpha: Option<Vec<f64>>,
    pub singular_values: Vec<f64>,
}

/// Default ratio below which consecutive singular values separate rank from kernel.
pub const KERNEL_TOL_RATIO: f64 = 1e-6;

/// Kernel dimension of the Hessian from its singular values `σ_1 ≥ … ≥ σ_m`:
/// the rank is the first `r` with `σ_{r+1} < tol_ratio · σ_r`. A one-dimensional
/// kernel is returned as a unit vector whose largest entry is positive.
pub fn kernel_of_hessian(oracle: &dyn DerivativeOracle, tol_ratio: f64) -> Result<KernelInfo> {
    check_order(2, oracle.max_order())?;
    let h = oracle.hessian()?;
    kernel_of_matrix(&h, tol_ratio)
}

pub fn kernel_of_matrix(h: &DMatrix<f64>, tol_ratio: f64) -> Result<KernelInfo> {
    let m = h.nrows();
    let svd = h.clone().svd(false, true);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = if sv.first().map_or(true, |&s| s == 0.0) {
        0
    } else {
        (1..m).find(|&r| sv[r] < tol_ratio * sv[r - 1]).unwrap_or(m)
    };
    let dimension = m - rank;
    let alpha = if dimension == 1 {
        let vt = svd.v_t.as_ref().expect("right singular vectors requested");
        let mut a: Vec<f64> = vt.row(order[m - 1]).iter().copied().collect();
        let nrm = norm2(&a);
        a.iter_mut().for_each(|x| *x /= nrm);
        let imax = (0..m).max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs())).unwrap();
        if a[imax] < 0.0 {
            a.iter_mut().for_each(|x| *x = -*x);
        }
        Some(a)
    } else {
        None
    };
    Ok(KernelInfo {
        dimension,
        alpha,
        singular_values: sv,
    })
}

/// Threshold on `σ_min / σ_max` of the regularised normal matrix.
pub const SINGULAR_RATIO: f64 = 1e-13;

/// Solves `S^(2)(x, ξ) = -b(ξ)` for `x ⟂ α` through `(H² + ααᵀ) x̄ = -b`, `x = H x̄`.
fn regularized_solve(h: &DMatrix<f64>, alpha: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let m = h.nrows();
    let a = DVector::from_column_slice(alpha);
    let n = h * h + &a * a.transpose();
    let sv = n.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > SINGULAR_RATIO * smax) {
        return Err(Error::Singular(format!(
            "regularised Hessian has condition ratio {:e}",
            smin / smax
        )));
    }
    let rhs = -DVector::from_column_slice(b);
    let xbar = n
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("regularised Hessian".into()))?;
    let x = h * xbar;
    debug_assert_eq!(x.len(), m);
    Ok(x.iter().copied().collect())
}

/// `F^(n-2)(0)` from the jet relation of order `n - 2`. Requires
/// `F''(0) … F^(n-3)(0)` in `jet`.
pub fn solve_jet_step(oracle: &dyn DerivativeOracle, alpha: &[f64], jet: &JetOfF, n: usize) -> Result<Vec<f64>> {
    let h = oracle.hessian()?;
    solve_jet_step_with(oracle, &h, alpha, jet, n)
}

fn solve_jet_step_with(
    oracle: &dyn DerivativeOracle,
    h: &DMatrix<f64>,
    alpha: &[f64],
    jet: &JetOfF,
    n: usize,
) -> Result<Vec<f64>> {
    if n < 4 || n > MAX_ORDER + 2 {
        return Err(Error::InvalidRange(format!("jet step needs 4 ≤ n ≤ {}, got {n}", MAX_ORDER + 2)));
    }
    let m = n - 2;
    if jet.order() < m - 1 {
        return Err(Error::InsufficientJet {
            needed: m - 1,
            have: jet.order(),
        });
    }
    check_order(m + 1, oracle.max_order())?;
    let mut slots: Vec<Option<&[f64]>> = vec![None; m];
    slots[0] = Some(alpha);
    for l in 2..m {
        slots[l - 1] = Some(&jet.derivatives[l - 2]);
    }
    let b = bell_contract(oracle, m, &slots, true)?;
    regularized_solve(h, alpha, &b)
}

/// `r^(n)(0)` with zero placeholders in the two highest slots.
pub fn test_value(oracle: &dyn DerivativeOracle, alpha: &[f64], jet: &JetOfF, n: usize) -> Result<f64> {
    test_value_impl(oracle, alpha, jet, n, None)
}

/// `r^(n)(0)` with arbitrary vectors `c1, c2` in the slots of `F^(n-1)`, `F^(n)`;
/// at a critical point with `α` in the Hessian kernel the value does not depend on them.
pub fn test_value_with_placeholders(
    oracle: &dyn DerivativeOracle,
    alpha: &[f64],
    jet: &JetOfF,
    n: usize,
    c1: &[f64],
    c2: &[f64],
) -> Result<f64> {
    test_value_impl(oracle, alpha, jet, n, Some((c1, c2)))
}

fn test_value_impl(
    oracle: &dyn DerivativeOracle,
    alpha: &[f64],
    jet: &JetOfF,
    n: usize,
    placeholders: Option<(&[f64], &[f64])>,
) -> Result<f64> {
    if n < 3 || n > MAX_ORDER {
        return Err(Error::InvalidRange(format!("test value needs 3 ≤ n ≤ {MAX_ORDER}, got {n}")));
    }
    if jet.order() < n - 2 {
        return Err(Error::InsufficientJet {
            needed: n - 2,
            have: jet.order(),
        });
    }
    check_order(n, oracle.max_order())?;
    let mut slots: Vec<Option<&[f64]>> = vec![None; n];
    slots[0] = Some(alpha);
    for l in 2..=n - 2 {
        slots[l - 1] = Some(&jet.derivatives[l - 2]);
    }
    if let Some((c1, c2)) = placeholders {
        slots[n - 2] = Some(c1);
        slots[n - 1] = Some(c2);
    }
    Ok(bell_contract(oracle, n, &slots, false)?[0])
}

/// Jet `F''(0) … F^(upto-2)(0)` and test values `r^(3)(0) … r^(upto)(0)` for a
/// given kernel vector, without stopping at nonzero values.
pub fn jet_and_test_values(oracle: &dyn DerivativeOracle, alpha: &[f64], upto: usize) -> Result<(JetOfF, Vec<f64>)> {
    let h = oracle.hessian()?;
    let mut jet = JetOfF::default();
    let mut values = Vec::new();
    for n in 3..=upto {
        if n >= 4 {
            let next = solve_jet_step_with(oracle, &h, alpha, &jet, n)?;
            jet.derivatives.push(next);
        }
        values.push(test_value(oracle, alpha, &jet, n)?);
    }
    Ok((jet, values))
}

/// Low-order tests written out explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormTests {
    pub cusp: f64,
    pub v: Option<Vec<f64>>,
    pub swallowtail: Option<f64>,
    pub w: Option<Vec<f64>>,
    pub butterfly: Option<f64>,
}

/// Solves `S^(2)(x, ξ) = -rhs(ξ)` on the complement of `α`, rejecting
/// right-hand sides with an `α`-component above `tol · max(1, ‖rhs‖)`.
pub fn auxiliary_solve(oracle: &dyn DerivativeOracle, alpha: &[f64], rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let component = dot(alpha, rhs) / norm2(alpha);
    if component.abs() > tol * norm2(rhs).max(1.0) {
        return Err(Error::Solvability { component });
    }
    regularized_solve(&oracle.hessian()?, alpha, rhs)
}

/// `S^(4)(α⁴) - 3 S^(2)(v, v)`.
pub fn swallowtail_form(oracle: &dyn DerivativeOracle, alpha: &[f64], v: &[f64]) -> Result<f64> {
    Ok(oracle.contract(&[alpha, alpha, alpha, alpha])? - 3.0 * oracle.contract(&[v, v])?)
}

/// `S^(5)(α⁵) - 15 S^(3)(α, v, v) + 10 S^(3)(α, α, w)`.
pub fn butterfly_form(oracle: &dyn DerivativeOracle, alpha: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
    Ok(oracle.contract(&[alpha, alpha, alpha, alpha, alpha])? - 15.0 * oracle.contract(&[alpha, v, v])?
        + 10.0 * oracle.contract(&[alpha, alpha, w])?)
}

/// Cusp, swallowtail and butterfly tests with their auxiliary vectors
/// `v = F''(0)` and `w = F'''(0)`. Evaluation stops at the first test whose
/// magnitude exceeds `tol`; later entries are then `None`.
pub fn closed_form_tests(oracle: &dyn DerivativeOracle, alpha: &[f64], tol: f64) -> Result<ClosedFormTests> {
    let cusp = oracle.contract(&[alpha, alpha, alpha])?;
    let mut out = ClosedFormTests {
        cusp,
        v: None,
        swallowtail: None,
        w: None,
        butterfly: None,
    };
    if cusp.abs() > tol || oracle.max_order() < 4 {
        return Ok(out);
    }
    let rhs_v = oracle.contract_free(&[alpha, alpha])?;
    let v = auxiliary_solve(oracle, alpha, &rhs_v, tol)?;
    let sw = swallowtail_form(oracle, alpha, &v)?;
    out.swallowtail = Some(sw);
    if sw.abs() > tol || oracle.max_order() < 5 {
        out.v = Some(v);
        return Ok(out);
    }
    let mut rhs_w = oracle.contract_free(&[alpha, alpha, alpha])?;
    let t = oracle.contract_free(&[alpha, &v])?;
    rhs_w.iter_mut().zip(&t).for_each(|(r, ti)| *r += 3.0 * ti);
    let w = auxiliary_solve(oracle, alpha, &rhs_w, tol)?;
    out.butterfly = Some(butterfly_form(oracle, alpha, &v, &w)?);
    out.v = Some(v);
    out.w = Some(w);
    Ok(out)
}

/// Classification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "order", rename_all = "snake_case")]
pub enum SingularityKind {
    NotCritical,
    /// Critical point whose Hessian kernel is not one-dimensional.
    NotASeries { kernel_dim: usize },
    A(usize),
    Undetermined,
}

/// Thresholds used by [`detect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub gradient: f64,
    pub kernel_ratio: f64,
    /// Absolute zero threshold for `r^(n)(0)`, scaled by `‖α‖^n`.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gradient: 1e-8,
            kernel_ratio: KERNEL_TOL_RATIO,
            zero: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    /// `n` for `A_n`, otherwise 0.
    pub order: usize,
    /// `r^(3)(0), r^(4)(0), …` as computed.
    pub test_values: Vec<f64>,
    /// Sign of the first nonvanishing even-order test value (odd `A_n` only).
    pub signature: Option<Sign>,
    pub kernel_dim: usize,
    pub alpha: Option<Vec<f64>>,
    /// Kernel vector convention: unit Euclidean norm.
    pub normalization: String,
}

impl fmt::Display for SingularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SingularityKind::NotCritical => write!(f, "not critical"),
            SingularityKind::NotASeries { kernel_dim } => write!(f, "not A-series (kernel dimension {kernel_dim})"),
            SingularityKind::Undetermined => write!(f, "undetermined (maximal order reached)"),
            SingularityKind::A(n) => {
                write!(f, "A{n}")?;
                match self.signature {
                    Some(Sign::Positive) => write!(f, ", positive"),
                    Some(Sign::Negative) => write!(f, ", negative"),
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Runs the gradient test, the kernel test and then alternates jet steps and
/// test values for `n = 3, 4, …, max_order` until a value is nonzero.
pub fn detect(oracle: &dyn DerivativeOracle, tol: &Tolerances, max_order: usize) -> Result<SingularityReport> {
    let max_order = max_order.min(MAX_ORDER);
    check_order(max_order, oracle.max_order())?;
    let mut report = SingularityReport {
        kind: SingularityKind::NotCritical,
        order: 0,
        test_values: Vec::new(),
        signature: None,
        kernel_dim: 0,
        alpha: None,
        normalization: "unit euclidean".into(),
    };
    let grad = oracle.gradient()?;
    if norm2(&grad) > tol.gradient {
        return Ok(report);
    }
    let h = oracle.hessian()?;
    let kernel = kernel_of_matrix(&h, tol.kernel_ratio)?;
    report.kernel_dim = kernel.dimension;
    let Some(alpha) = kernel.alpha else {
        report.kind = SingularityKind::NotASeries {
            kernel_dim: kernel.dimension,
        };
        return Ok(report);
    };
    let anorm = norm2(&alpha);
    let mut jet = JetOfF::default();
    report.kind = SingularityKind::Undetermined;
    for n in 3..=max_order {
        if n >= 4 {
            let next = solve_jet_step_with(oracle, &h, &alpha, &jet, n)?;
            jet.derivatives.push(next);
        }
        let r = test_value(oracle, &alpha, &jet, n)?;
        report.test_values.push(r);
        if r.abs() > tol.zero * anorm.powi(n as i32) {
            report.kind = SingularityKind::A(n - 1);
            report.order = n - 1;
            if n % 2 == 0 {
                report.signature = Some(Sign::from_value(r));
            }
            break;
        }
    }
    report.alpha = Some(alpha);
    Ok(report)
}

/// Sign of `det H` from an unpivoted symmetric factorisation.
pub fn signature_of_hessian(h: &SparseMatrix) -> Sign {
    determinant_sign(h)
}

pub fn signature_of_dense_hessian(h: &DMatrix<f64>) -> Sign {
    determinant_sign(&SparseMatrix::from_dense(h))
}

/// Parses the tensor text format:
///
/// ```text
/// dim 2
/// max_order 4
/// term 0.25 4 0        # coefficient, then one exponent per variable
/// tensor 2 1 0 0 1     # order, then m^k values (flat index Σ i_s m^s)
/// ```
pub fn parse_tensor_file(text: &str) -> Result<DenseTensorOracle> {
    let mut dim: Option<usize> = None;
    let mut max_order: Option<usize> = None;
    let mut poly_terms: Vec<(usize, f64, Vec<u32>)> = Vec::new();
    let mut tensors: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    let num = |lineno: usize, s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::Parse(format!("line {lineno}: expected a number, got '{s}'")))
    };
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match key {
            "dim" | "max_order" => {
                let [v] = rest.as_slice() else {
                    return Err(Error::Parse(format!("line {lineno}: '{key}' takes one value")));
                };
                let v: usize = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {lineno}: invalid integer '{v}'")))?;
                if key == "dim" {
                    dim = Some(v);
                } else {
                    max_order = Some(v);
                }
            }
            "term" => {
                let Some((c, exps)) = rest.split_first() else {
                    return Err(Error::Parse(format!("line {lineno}: empty term")));
                };
                let c = num(lineno, c)?;
                let exps = exps
                    .iter()
                    .map(|e| e.parse::<u32>().map_err(|_| Error::Parse(format!("line {lineno}: invalid exponent '{e}'"))))
                    .collect::<Result<Vec<_>>>()?;
                poly_terms.push((lineno, c, exps));
            }
            "tensor" => {
                let Some((k, vals)) = rest.split_first() else {
                    return Err(Error::Parse(format!("line {lineno}: empty tensor")));
                };
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {lineno}: invalid order '{k}'")))?;
                let vals = vals.iter().map(|v| num(lineno, v)).collect::<Result<Vec<_>>>()?;
                tensors.push((lineno, k, vals));
            }
            other => return Err(Error::Parse(format!("line {lineno}: unknown key '{other}'"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("missing 'dim'".into()))?;
    if dim == 0 {
        return Err(Error::Parse("'dim' must be positive".into()));
    }
    let mut poly = Polynomial::new(dim);
    for (lineno, c, e) in poly_terms {
        poly.add_term(c, &e)
            .map_err(|_| Error::Parse(format!("line {lineno}: expected {dim} exponents")))?;
    }
    let declared = tensors.iter().map(|t| t.1).max().unwrap_or(0);
    let max_order = max_order.unwrap_or_else(|| poly.degree().max(declared).max(2));
    if max_order > MAX_ORDER {
        return Err(Error::Parse(format!("max_order above {MAX_ORDER}")));
    }
    let mut oracle = DenseTensorOracle::from_polynomial(&poly, max_order);
    for (lineno, k, vals) in tensors {
        let mut t = DenseTensorOracle::zeros(dim, max_order);
        t.set_tensor(k, &vals)
            .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
        oracle.tensors[k - 1]
            .iter_mut()
            .zip(&t.tensors[k - 1])
            .for_each(|(a, b)| *a += b);
    }
    Ok(oracle)
}
