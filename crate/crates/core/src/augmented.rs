//! Augmented defining systems for folds, cusps and swallowtails of the
//! discrete semilinear Poisson problem, with analytic Jacobians and the
//! monitor functions used along continuation branches.
//!
//! Unknowns at each level (the active parameters are appended last):
//!
//! | level | unknowns          | equations                                            |
//! |-------|-------------------|------------------------------------------------------|
//! | 0     | `u`               | `G`                                                  |
//! | 1     | `u, α`            | `G, G_u α, ΔxΔy αᵀα - 1`                             |
//! | 2     | `u, α`            | level 1 and `f_uuᵀ α³`                               |
//! | 3     | `u, α, v̄`        | level 2, `(G_u² + ααᵀ) v̄ + f_uu α²`, swallowtail row |
//!
//! Products and powers of grid vectors are componentwise.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::continuation::{ContinuationProblem, PointSummary};
use crate::linalg::{determinant_sign, dot, norm_inf, Jacobian, Sign, SparseMatrix};
use crate::poisson::{build_laplacian, pointwise, pointwise_dlambda, Grid, Nonlinearity};
use crate::{Error, Result};

/// Componentwise product of any number of vectors.
fn hadamard(vs: &[&[f64]]) -> Vec<f64> {
    let n = vs[0].len();
    (0..n).map(|j| vs.iter().map(|v| v[j]).product()).collect()
}

fn powi(v: &[f64], p: i32) -> Vec<f64> {
    v.iter().map(|x| x.powi(p)).collect()
}

/// Unpacked unknowns of an augmented system.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AugmentedState {
    pub u: Vec<f64>,
    pub alpha: Vec<f64>,
    pub vbar: Vec<f64>,
    pub lambda: [f64; 3],
}

/// Pointwise nonlinearity data at a state.
struct Pointwise {
    /// `f[k] = f^(k)(u, λ)`.
    f: Vec<Vec<f64>>,
    /// `dl[k] = ∇_λ f^(k)(u, λ)`.
    dl: Vec<Vec<[f64; 3]>>,
}

impl Pointwise {
    fn new(nl: &dyn Nonlinearity, u: &[f64], lambda: &[f64; 3], orders: usize) -> Result<Self> {
        let f = (0..=orders).map(|k| pointwise(nl, k, u, lambda)).collect::<Result<_>>()?;
        let dl = (0..orders).map(|k| pointwise_dlambda(nl, k, u, lambda)).collect::<Result<_>>()?;
        Ok(Self { f, dl })
    }

    fn dl_component(&self, k: usize, i: usize) -> Vec<f64> {
        self.dl[k].iter().map(|d| d[i]).collect()
    }
}

/// A fold (1), cusp (2) or swallowtail (3) system, or the plain equilibrium
/// equations (0), with a chosen set of free parameters.
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub grid: Grid,
    pub laplacian: SparseMatrix,
    pub nl: Arc<dyn Nonlinearity>,
    pub level: usize,
    /// Indices (0..3) of the free parameters, in unknown order.
    pub active: Vec<usize>,
    /// Parameter values; entries listed in `active` are overwritten by the unknowns.
    pub lambda: [f64; 3],
}

impl AugmentedSystem {
    pub fn new(grid: Grid, nl: Arc<dyn Nonlinearity>, level: usize, active: Vec<usize>, lambda: [f64; 3]) -> Result<Self> {
        if level > 3 {
            return Err(Error::InvalidRange(format!("augmentation level {level} above 3")));
        }
        let mut seen = [false; 3];
        for &a in &active {
            if a >= 3 || seen[a] {
                return Err(Error::InvalidRange(format!("invalid active parameter set {active:?}")));
            }
            seen[a] = true;
        }
        if active.is_empty() {
            return Err(Error::InvalidRange("active parameter set is empty".into()));
        }
        Ok(Self {
            grid,
            laplacian: build_laplacian(grid),
            nl,
            level,
            active,
            lambda,
        })
    }

    /// Same grid and nonlinearity, different level, active set or parameters.
    pub fn with(&self, level: usize, active: Vec<usize>, lambda: [f64; 3]) -> Result<Self> {
        let mut out = Self::new(self.grid, self.nl.clone(), level, active, lambda)?;
        out.laplacian = self.laplacian.clone();
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn state_len(&self) -> usize {
        match self.level {
            0 => self.n(),
            1 | 2 => 2 * self.n(),
            _ => 3 * self.n(),
        }
    }

    pub fn unknowns(&self) -> usize {
        self.state_len() + self.active.len()
    }

    pub fn equations(&self) -> usize {
        let n = self.n();
        match self.level {
            0 => n,
            1 => 2 * n + 1,
            2 => 2 * n + 2,
            _ => 3 * n + 3,
        }
    }

    /// Position of parameter `i` in the unknown vector, if active.
    pub fn parameter_position(&self, i: usize) -> Option<usize> {
        self.active.iter().position(|&a| a == i).map(|p| self.state_len() + p)
    }

    pub fn pack(&self, s: &AugmentedState) -> Vec<f64> {
        let mut z = s.u.clone();
        if self.level >= 1 {
            z.extend_from_slice(&s.alpha);
        }
        if self.level >= 3 {
            z.extend_from_slice(&s.vbar);
        }
        z.extend(self.active.iter().map(|&i| s.lambda[i]));
        z
    }

    pub fn unpack(&self, z: &[f64]) -> Result<AugmentedState> {
        if z.len() != self.unknowns() {
            return Err(Error::LengthMismatch {
                expected: self.unknowns(),
                got: z.len(),
            });
        }
        let n = self.n();
        let mut lambda = self.lambda;
        for (p, &i) in self.active.iter().enumerate() {
            lambda[i] = z[self.state_len() + p];
        }
        Ok(AugmentedState {
            u: z[..n].to_vec(),
            alpha: if self.level >= 1 { z[n..2 * n].to_vec() } else { Vec::new() },
            vbar: if self.level >= 3 { z[2 * n..3 * n].to_vec() } else { Vec::new() },
            lambda,
        })
    }

    /// `G_u` at a state.
    pub fn hessian(&self, s: &AugmentedState) -> Result<SparseMatrix> {
        crate::poisson::jacobian(&s.u, &s.lambda, self.nl.as_ref(), &self.laplacian)
    }

    fn orders_needed(&self) -> usize {
        match self.level {
            0 => 1,
            1 => 2,
            2 => 3,
            _ => 4,
        }
    }

    pub fn residual(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.assemble(z, false)?.0)
    }

    pub fn jacobian(&self, z: &[f64]) -> Result<Jacobian> {
        Ok(self.assemble(z, true)?.1.expect("jacobian requested"))
    }

    pub fn residual_and_jacobian(&self, z: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        let (r, j) = self.assemble(z, true)?;
        Ok((r, j.expect("jacobian requested")))
    }

    fn assemble(&self, z: &[f64], with_jacobian: bool) -> Result<(Vec<f64>, Option<Jacobian>)> {
        let s = self.unpack(z)?;
        let n = self.n();
        let h = self.grid.cell_area();
        let p = Pointwise::new(self.nl.as_ref(), &s.u, &s.lambda, self.orders_needed())?;
        let g = self.laplacian.add_diagonal(&p.f[1]);
        let lam_col: Vec<Option<usize>> = (0..3).map(|i| self.parameter_position(i)).collect();

        let mut res = Vec::with_capacity(self.equations());
        let mut t: Vec<(usize, usize, f64)> = Vec::new();
        let mut rank_one = Vec::new();

        // G
        let mut r1 = self.laplacian.matvec(&s.u);
        r1.iter_mut().zip(&p.f[0]).for_each(|(r, f)| *r += f);
        res.extend_from_slice(&r1);
        if with_jacobian {
            t.extend(g.shifted_triplets(0, 0));
            for (i, col) in lam_col.iter().enumerate() {
                if let Some(c) = *col {
                    t.extend((0..n).map(|j| (j, c, p.dl[0][j][i])));
                }
            }
        }
        if self.level == 0 {
            return Ok((res, with_jacobian.then(|| self.finish(t, rank_one))));
        }

        let a = &s.alpha;
        let (ca, cv) = (n, 2 * n);
        // G_u α
        res.extend(g.matvec(a));
        if with_jacobian {
            let d = hadamard(&[&p.f[2], a]);
            t.extend((0..n).map(|j| (n + j, j, d[j])));
            t.extend(g.shifted_triplets(n, ca));
            for (i, col) in lam_col.iter().enumerate() {
                if let Some(c) = *col {
                    t.extend((0..n).map(|j| (n + j, c, p.dl[1][j][i] * a[j])));
                }
            }
        }
        // normalisation
        res.push(h * dot(a, a) - 1.0);
        if with_jacobian {
            t.extend((0..n).map(|j| (2 * n, ca + j, 2.0 * h * a[j])));
        }
        if self.level == 1 {
            return Ok((res, with_jacobian.then(|| self.finish(t, rank_one))));
        }

        // cusp row
        let a2 = powi(a, 2);
        let a3 = powi(a, 3);
        res.push(dot(&p.f[2], &a3));
        if with_jacobian {
            let r = 2 * n + 1;
            t.extend((0..n).map(|j| (r, j, p.f[3][j] * a3[j])));
            t.extend((0..n).map(|j| (r, ca + j, 3.0 * p.f[2][j] * a2[j])));
            for (i, col) in lam_col.iter().enumerate() {
                if let Some(c) = *col {
                    t.push((r, c, dot(&p.dl_component(2, i), &a3)));
                }
            }
        }
        if self.level == 2 {
            return Ok((res, with_jacobian.then(|| self.finish(t, rank_one))));
        }

        // v̄ rows: (G² + ααᵀ) v̄ + f_uu α²
        let vb = &s.vbar;
        let gv = g.matvec(vb);
        let g2v = g.matvec(&gv);
        let av = dot(a, vb);
        let f2a2 = hadamard(&[&p.f[2], &a2]);
        let r5 = 2 * n + 2;
        res.extend((0..n).map(|j| g2v[j] + a[j] * av + f2a2[j]));
        if with_jacobian {
            let f2v = hadamard(&[&p.f[2], vb]);
            t.extend(g.scale_columns(&f2v).shifted_triplets(r5, 0));
            t.extend((0..n).map(|j| (r5 + j, j, p.f[2][j] * gv[j] + p.f[3][j] * a2[j])));
            t.extend((0..n).map(|j| (r5 + j, ca + j, 2.0 * p.f[2][j] * a[j] + av)));
            t.extend(g.matmul(&g).shifted_triplets(r5, cv));
            let mut rows = vec![0.0; self.equations()];
            rows[r5..r5 + n].copy_from_slice(a);
            let mut cols = vec![0.0; self.unknowns()];
            cols[ca..ca + n].copy_from_slice(vb);
            cols[cv..cv + n].copy_from_slice(a);
            rank_one.push((rows, cols));
            for (i, col) in lam_col.iter().enumerate() {
                if let Some(c) = *col {
                    let gi = p.dl_component(1, i);
                    let g_giv = g.matvec(&hadamard(&[&gi, vb]));
                    let d2 = p.dl_component(2, i);
                    t.extend((0..n).map(|j| (r5 + j, c, gi[j] * gv[j] + g_giv[j] + d2[j] * a2[j])));
                }
            }
        }

        // swallowtail row
        let a4 = powi(a, 4);
        let r6 = 3 * n + 2;
        res.push(dot(&p.f[3], &a4) + 6.0 * dot(&f2a2, &gv) + 3.0 * dot(&gv, &g2v));
        if with_jacobian {
            for j in 0..n {
                let dq = p.f[2][j] * (2.0 * vb[j] * g2v[j] + gv[j] * gv[j]);
                let du = p.f[4][j] * a4[j]
                    + 6.0 * p.f[3][j] * a2[j] * gv[j]
                    + 6.0 * p.f[2][j] * p.f[2][j] * vb[j] * a2[j]
                    + 3.0 * dq;
                t.push((r6, j, du));
                t.push((r6, ca + j, 4.0 * p.f[3][j] * a3[j] + 12.0 * p.f[2][j] * a[j] * gv[j]));
            }
            let gf = g.matvec(&f2a2);
            let g3v = g.matvec(&g2v);
            t.extend((0..n).map(|j| (r6, cv + j, 6.0 * gf[j] + 6.0 * g3v[j])));
            for (i, col) in lam_col.iter().enumerate() {
                if let Some(c) = *col {
                    let gi = p.dl_component(1, i);
                    let giv = hadamard(&[&gi, vb]);
                    let dq = 2.0 * dot(&g2v, &giv) + dot(&gi, &powi(&gv, 2));
                    let v = dot(&p.dl_component(3, i), &a4)
                        + 6.0 * dot(&hadamard(&[&p.dl_component(2, i), &a2]), &gv)
                        + 6.0 * dot(&f2a2, &giv)
                        + 3.0 * dq;
                    t.push((r6, c, v));
                }
            }
        }
        Ok((res, with_jacobian.then(|| self.finish(t, rank_one))))
    }

    fn finish(&self, t: Vec<(usize, usize, f64)>, rank_one: Vec<(Vec<f64>, Vec<f64>)>) -> Jacobian {
        Jacobian {
            sparse: SparseMatrix::from_triplets(self.equations(), self.unknowns(), &t),
            rank_one,
        }
    }

    /// Monitor values available at this level.
    pub fn monitors(&self, z: &[f64]) -> Result<Monitors> {
        let s = self.unpack(z)?;
        let mut m = Monitors::default();
        if self.level == 0 {
            return Ok(m);
        }
        let nl = self.nl.as_ref();
        m.cusp = Some(cusp_monitor(nl, &s.u, &s.alpha, &s.lambda)?);
        if self.level >= 2 {
            let g = self.hessian(&s)?;
            let v = if self.level == 3 {
                g.matvec(&s.vbar)
            } else {
                solve_v(nl, &g, &s.u, &s.alpha, &s.lambda)?.1
            };
            m.swallowtail = Some(swallowtail_monitor(nl, &g, &s.u, &s.alpha, &s.lambda, &v)?);
            m.butterfly = butterfly_monitor(nl, &g, &s.u, &s.alpha, &s.lambda, &v).ok();
        }
        Ok(m)
    }
}

/// The last active parameter orients branches and defines folds.
impl ContinuationProblem for AugmentedSystem {
    fn unknowns(&self) -> usize {
        AugmentedSystem::unknowns(self)
    }

    fn residual_and_jacobian(&self, z: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        AugmentedSystem::residual_and_jacobian(self, z)
    }

    fn parameter_index(&self) -> usize {
        self.unknowns() - 1
    }

    fn monitors(&self, z: &[f64]) -> Result<Monitors> {
        AugmentedSystem::monitors(self, z)
    }

    /// `sign det G_u` on solution and fold branches; the sign of the
    /// swallowtail test (the cusp type) on cusp branches.
    fn signature(&self, z: &[f64], monitors: &Monitors) -> Sign {
        if self.level >= 2 {
            return monitors.swallowtail.map_or(Sign::Degenerate, Sign::from_value);
        }
        self.unpack(z)
            .and_then(|s| self.hessian(&s))
            .map_or(Sign::Degenerate, |g| determinant_sign(&g))
    }

    fn summary(&self, z: &[f64]) -> PointSummary {
        let s = self.unpack(z).expect("state length");
        PointSummary {
            lambda: s.lambda,
            norm_u_inf: norm_inf(&s.u),
            u_center: s.u[self.grid.center_index()],
        }
    }
}

/// Monitor values of a state; `None` where the level does not provide them.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Monitors {
    pub cusp: Option<f64>,
    pub swallowtail: Option<f64>,
    pub butterfly: Option<f64>,
}

/// `Σ_j f_uu(u_j, λ) α_j³`.
pub fn cusp_monitor(nl: &dyn Nonlinearity, u: &[f64], alpha: &[f64], lambda: &[f64; 3]) -> Result<f64> {
    let f2 = pointwise(nl, 2, u, lambda)?;
    Ok(dot(&f2, &powi(alpha, 3)))
}

/// Solves `(G_u² + ααᵀ) x̄ = -b` and returns `(x̄, G_u x̄)`.
pub fn regularized_solve(g: &SparseMatrix, alpha: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let normal = Jacobian {
        sparse: g.matmul(g),
        rank_one: vec![(alpha.to_vec(), alpha.to_vec())],
    };
    let rhs: Vec<f64> = b.iter().map(|x| -x).collect();
    let xbar = normal.solve(&rhs)?;
    let x = g.matvec(&xbar);
    Ok((xbar, x))
}

/// `(v̄, v)` with `(G_u² + ααᵀ) v̄ = -f_uu α²` and `v = G_u v̄`.
pub fn solve_v(
    nl: &dyn Nonlinearity,
    g: &SparseMatrix,
    u: &[f64],
    alpha: &[f64],
    lambda: &[f64; 3],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let f2 = pointwise(nl, 2, u, lambda)?;
    regularized_solve(g, alpha, &hadamard(&[&f2, &powi(alpha, 2)]))
}

/// `f_uuuᵀ α⁴ + 6 (f_uu α²)ᵀ v + 3 vᵀ G_u v`.
pub fn swallowtail_monitor(
    nl: &dyn Nonlinearity,
    g: &SparseMatrix,
    u: &[f64],
    alpha: &[f64],
    lambda: &[f64; 3],
    v: &[f64],
) -> Result<f64> {
    let f2 = pointwise(nl, 2, u, lambda)?;
    let f3 = pointwise(nl, 3, u, lambda)?;
    let a2 = powi(alpha, 2);
    Ok(dot(&f3, &powi(alpha, 4)) + 6.0 * dot(&hadamard(&[&f2, &a2]), v) + 3.0 * dot(v, &g.matvec(v)))
}

/// The same monitor written with `v̄`: `f_uuuᵀ α⁴ + 6 (f_uu α²)ᵀ G_u v̄ + 3 v̄ᵀ G_u³ v̄`.
pub fn swallowtail_monitor_vbar(
    nl: &dyn Nonlinearity,
    g: &SparseMatrix,
    u: &[f64],
    alpha: &[f64],
    lambda: &[f64; 3],
    vbar: &[f64],
) -> Result<f64> {
    let f2 = pointwise(nl, 2, u, lambda)?;
    let f3 = pointwise(nl, 3, u, lambda)?;
    let gv = g.matvec(vbar);
    let g2v = g.matvec(&gv);
    Ok(dot(&f3, &powi(alpha, 4)) + 6.0 * dot(&hadamard(&[&f2, &powi(alpha, 2)]), &gv) + 3.0 * dot(&gv, &g2v))
}

/// Auxiliary `w = G_u w̄` with `(G_u² + ααᵀ) w̄ = -(3 f_uu α v + f_uuu α³)`.
pub fn solve_w(
    nl: &dyn Nonlinearity,
    g: &SparseMatrix,
    u: &[f64],
    alpha: &[f64],
    lambda: &[f64; 3],
    v: &[f64],
) -> Result<Vec<f64>> {
    let f2 = pointwise(nl, 2, u, lambda)?;
    let f3 = pointwise(nl, 3, u, lambda)?;
    let b: Vec<f64> = (0..u.len())
        .map(|j| 3.0 * f2[j] * alpha[j] * v[j] + f3[j] * alpha[j].powi(3))
        .collect();
    Ok(regularized_solve(g, alpha, &b)?.1)
}

/// `f_uuuuᵀ α⁵ - 15 (f_uu α)ᵀ v² + 10 (f_uu α²)ᵀ w` for a given `w`.
pub fn butterfly_form(
    nl: &dyn Nonlinearity,
    u: &[f64],
    alpha: &[f64],
    lambda: &[f64; 3],
    v: &[f64],
    w: &[f64],
) -> Result<f64> {
    let f2 = pointwise(nl, 2, u, lambda)?;
    let f4 = pointwise(nl, 4, u, lambda)?;
    Ok(dot(&f4, &powi(alpha, 5)) - 15.0 * dot(&hadamard(&[&f2, alpha]), &powi(v, 2))
        + 10.0 * dot(&hadamard(&[&f2, &powi(alpha, 2)]), w))
}

/// Butterfly test with `w` from [`solve_w`].
pub fn butterfly_monitor(
    nl: &dyn Nonlinearity,
    g: &SparseMatrix,
    u: &[f64],
    alpha: &[f64],
    lambda: &[f64; 3],
    v: &[f64],
) -> Result<f64> {
    let w = solve_w(nl, g, u, alpha, lambda, v)?;
    butterfly_form(nl, u, alpha, lambda, v, &w)
}

/// Sign of `det G_u`.
pub fn solution_signature(g: &SparseMatrix) -> Sign {
    determinant_sign(g)
}

/// Seeded starting guess for the fold direction: a random vector refined by a
/// few inverse-iteration steps on `G_u`, scaled to `ΔxΔy αᵀα = 1` with a
/// positive sum.
pub fn initial_alpha(g: &SparseMatrix, grid: Grid, seed: u64, steps: usize) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let shifted;
    let op = match g.solve(&a) {
        Ok(_) => g,
        Err(_) => {
            shifted = g.add_diagonal(&vec![1e-8 * g.norm_inf(); grid.len()]);
            &shifted
        }
    };
    for _ in 0..steps {
        a = op.solve(&a)?;
        let s = norm_inf(&a);
        a.iter_mut().for_each(|x| *x /= s);
    }
    normalize_alpha(&mut a, grid);
    Ok(a)
}

/// Rescales to `ΔxΔy αᵀα = 1` keeping the sign with positive component sum.
pub fn normalize_alpha(a: &mut [f64], grid: Grid) {
    let s = (grid.cell_area() * dot(a, a)).sqrt();
    let sign = if a.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    a.iter_mut().for_each(|x| *x *= sign / s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::{Bratu, PolynomialNonlinearity};

    fn poly_system(level: usize, n: usize, active: Vec<usize>, lambda: [f64; 3]) -> AugmentedSystem {
        AugmentedSystem::new(Grid::square(n).unwrap(), Arc::new(PolynomialNonlinearity::default()), level, active, lambda).unwrap()
    }

    #[test]
    fn fold_residual_at_eigenfold() {
        let sys = poly_system(1, 1, vec![0], [16.0, 0.3, 0.1]);
        let z = vec![0.0, 2.0, 16.0];
        assert_eq!(sys.residual(&z).unwrap(), vec![0.0, 0.0, 0.0]);
        let z = vec![0.0, 1.0, 16.0];
        assert_eq!(sys.residual(&z).unwrap()[2], -0.75);
    }

    #[test]
    fn cusp_monitor_examples() {
        let poly = PolynomialNonlinearity::default();
        assert_eq!(cusp_monitor(&poly, &[0.0], &[2.0], &[16.0, 0.7, 0.0]).unwrap(), 0.7 * 8.0);
        assert_eq!(cusp_monitor(&poly, &[0.0], &[2.0], &[16.0, 0.0, 3.0]).unwrap(), 0.0);
        assert!(cusp_monitor(&Bratu, &[0.0], &[2.0], &[1.0, 0.5, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn solve_v_one_by_one() {
        // G_u = [0], α = [2], f_uu = [c]: 4 v̄ = -4c
        let poly = PolynomialNonlinearity::default();
        let g = SparseMatrix::from_triplets(1, 1, &[(0, 0, 0.0)]);
        let (vbar, v) = solve_v(&poly, &g, &[0.0], &[2.0], &[16.0, 1.5, 0.0]).unwrap();
        assert!((vbar[0] + 1.5).abs() < 1e-15);
        assert_eq!(v[0], 0.0);
    }

    #[test]
    fn swallowtail_examples() {
        let poly = PolynomialNonlinearity::default();
        let g = SparseMatrix::from_triplets(1, 1, &[(0, 0, 0.0)]);
        let sw = swallowtail_monitor(&poly, &g, &[0.0], &[2.0], &[16.0, 0.0, 0.5], &[0.0]).unwrap();
        assert_eq!(sw, 0.5 * 16.0);
    }

    #[test]
    fn signature_of_negative_definite() {
        let g = build_laplacian(Grid::new(2, 3).unwrap());
        assert_eq!(solution_signature(&g), Sign::Positive);
        let g = build_laplacian(Grid::new(1, 3).unwrap());
        assert_eq!(solution_signature(&g), Sign::Negative);
        assert_eq!(solution_signature(&SparseMatrix::diagonal(&[-15.0])), Sign::Negative);
    }

    #[test]
    fn pack_unpack_round_trip() {
        let sys = poly_system(3, 2, vec![2, 0], [1.0, 2.0, 3.0]);
        let s = AugmentedState {
            u: vec![1.0, 2.0, 3.0, 4.0],
            alpha: vec![5.0, 6.0, 7.0, 8.0],
            vbar: vec![9.0, 10.0, 11.0, 12.0],
            lambda: [-1.0, 2.0, -3.0],
        };
        let z = sys.pack(&s);
        assert_eq!(z.len(), sys.unknowns());
        assert_eq!(&z[12..], &[-3.0, -1.0]);
        assert_eq!(sys.unpack(&z).unwrap(), s);
    }
}
