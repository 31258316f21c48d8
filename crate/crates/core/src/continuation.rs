//! Pseudoarclength continuation of underdetermined systems `R(z) = 0`,
//! `R: ℝⁿ⁺¹ → ℝⁿ`, with monitor-driven event detection.
//!
//! Each step predicts along the unit tangent, `z_p = z + Δs·t`, and corrects
//! with Newton on `[R(z); tᵀ(z - z_p)] = 0`. Tangents solve `[DR; t_prevᵀ] x = e`
//! so consecutive tangents never flip. Sign changes of monitors between
//! accepted points are refined by secant iteration on the step length.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::augmented::Monitors;
use crate::linalg::{dot, norm2, norm_inf, Jacobian, Sign};
use crate::{Error, Result};

/// A square-plus-one residual system.
pub trait ContinuationProblem {
    /// Length of `z` (equations + 1).
    fn unknowns(&self) -> usize;

    fn residual_and_jacobian(&self, z: &[f64]) -> Result<(Vec<f64>, Jacobian)>;

    fn residual(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.residual_and_jacobian(z)?.0)
    }

    /// Index in `z` of the parameter that orients the branch and defines folds.
    fn parameter_index(&self) -> usize;

    fn monitors(&self, _z: &[f64]) -> Result<Monitors> {
        Ok(Monitors::default())
    }

    fn signature(&self, _z: &[f64], _monitors: &Monitors) -> Sign {
        Sign::Degenerate
    }

    fn summary(&self, z: &[f64]) -> PointSummary {
        PointSummary {
            lambda: [z[self.parameter_index()], 0.0, 0.0],
            norm_u_inf: norm_inf(z),
            u_center: z[0],
        }
    }
}

/// Scalar quantities recorded for output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub lambda: [f64; 3],
    pub norm_u_inf: f64,
    pub u_center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MonitorRecord {
    /// Component of the unit tangent along the designated parameter.
    pub fold_direction: f64,
    pub cusp: Option<f64>,
    pub swallowtail: Option<f64>,
    pub butterfly: Option<f64>,
    pub blowup_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    #[serde(skip)]
    pub z: Vec<f64>,
    pub s: f64,
    #[serde(skip)]
    pub tangent: Vec<f64>,
    pub monitors: MonitorRecord,
    pub signature: Sign,
    pub newton_iters: usize,
    pub summary: PointSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Fold,
    Cusp,
    Swallowtail,
    Butterfly,
    Blowup,
}

impl EventKind {
    pub fn monitor(self, m: &MonitorRecord) -> Option<f64> {
        match self {
            EventKind::Fold => Some(m.fold_direction),
            EventKind::Cusp => m.cusp,
            EventKind::Swallowtail => m.swallowtail,
            EventKind::Butterfly => m.butterfly,
            EventKind::Blowup => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Fold => "fold",
            EventKind::Cusp => "cusp",
            EventKind::Swallowtail => "swallowtail",
            EventKind::Butterfly => "butterfly",
            EventKind::Blowup => "blowup",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    /// Indices of the bracketing points in the branch.
    pub bracket: (usize, usize),
    /// Refined point (the second bracket point for unrefined events).
    pub point: BranchPoint,
    /// Monitor value at the refined point.
    pub monitor: f64,
    /// Set when the tolerance was not reached within the iteration budget or
    /// before the bracket collapsed to rounding level.
    pub approximate: bool,
    pub refinement_iters: usize,
    /// Monitor values at the refinement iterates, in order.
    pub refinement_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Fall back to a dense minimum-norm least-squares step when the sparse
    /// solve reports a singular matrix.
    pub dense_fallback: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 25,
            dense_fallback: false,
        }
    }
}

fn dense_min_norm(j: &Jacobian, rhs: &[f64]) -> Result<Vec<f64>> {
    let a: DMatrix<f64> = j.to_dense();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(&DVector::from_column_slice(rhs), 1e-12 * smax)
        .map_err(|e| Error::Singular(e.to_string()))?;
    Ok(x.iter().copied().collect())
}

/// Newton iteration on `F(z) = 0` for square systems. Returns the root and the
/// number of linear solves performed.
pub fn newton_solve(
    f: &dyn Fn(&[f64]) -> Result<(Vec<f64>, Jacobian)>,
    z0: &[f64],
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, usize)> {
    let mut z = z0.to_vec();
    let mut last = f64::INFINITY;
    for iter in 0..=opts.max_iter {
        let (r, j) = f(&z)?;
        let rn = norm_inf(&r);
        if !rn.is_finite() {
            return Err(Error::NoConvergence { iters: iter, residual: rn });
        }
        if rn < opts.tol {
            return Ok((z, iter));
        }
        last = rn;
        if iter == opts.max_iter {
            break;
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let dz = match j.solve(&rhs) {
            Ok(dz) => dz,
            Err(Error::Singular(_)) | Err(Error::LengthMismatch { .. }) if opts.dense_fallback => dense_min_norm(&j, &rhs)?,
            Err(e) => return Err(e),
        };
        z.iter_mut().zip(&dz).for_each(|(zi, d)| *zi += d);
    }
    Err(Error::NoConvergence {
        iters: opts.max_iter,
        residual: last,
    })
}

/// Unit null vector of `DR` oriented by `reference` (`referenceᵀ t > 0`).
pub fn tangent(dr: &Jacobian, reference: &[f64]) -> Result<Vec<f64>> {
    let bordered = dr.with_row(reference);
    let mut rhs = vec![0.0; bordered.nrows()];
    *rhs.last_mut().unwrap() = 1.0;
    let mut t = bordered
        .solve(&rhs)
        .map_err(|e| Error::RankDeficient(format!("tangent system: {e}")))?;
    let nrm = norm2(&t);
    t.iter_mut().for_each(|x| *x /= nrm);
    if dot(&t, reference) < 0.0 {
        t.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub ds0: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub grow: f64,
    /// Steps converging within this many Newton iterations enlarge `Δs`.
    pub fast_iters: usize,
    /// Largest accepted angle (radians) between consecutive tangents.
    pub max_turn: f64,
    pub newton: NewtonOptions,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            ds0: 0.05,
            ds_min: 1e-5,
            ds_max: 0.5,
            grow: 1.3,
            fast_iters: 3,
            max_turn: 0.5,
            newton: NewtonOptions {
                max_iter: 8,
                ..Default::default()
            },
        }
    }
}

fn make_point(problem: &dyn ContinuationProblem, z: Vec<f64>, s: f64, t: Vec<f64>, iters: usize) -> Result<BranchPoint> {
    let m = problem.monitors(&z)?;
    let monitors = MonitorRecord {
        fold_direction: t[problem.parameter_index()],
        cusp: m.cusp,
        swallowtail: m.swallowtail,
        butterfly: m.butterfly,
        blowup_flag: false,
    };
    Ok(BranchPoint {
        signature: problem.signature(&z, &m),
        summary: problem.summary(&z),
        z,
        s,
        tangent: t,
        monitors,
        newton_iters: iters,
    })
}

/// Converges `z0` with the designated parameter held fixed and builds the
/// first branch point, oriented so that the parameter moves along `direction`.
pub fn start_point(problem: &dyn ContinuationProblem, z0: &[f64], direction: f64, newton: &NewtonOptions) -> Result<BranchPoint> {
    let p = problem.parameter_index();
    let fixed = z0[p];
    let mut e = vec![0.0; problem.unknowns()];
    e[p] = 1.0;
    let f = |z: &[f64]| -> Result<(Vec<f64>, Jacobian)> {
        let (mut r, j) = problem.residual_and_jacobian(z)?;
        r.push(z[p] - fixed);
        Ok((r, j.with_row(&e)))
    };
    let (z, iters) = newton_solve(&f, z0, newton)?;
    let (_, dr) = problem.residual_and_jacobian(&z)?;
    let reference: Vec<f64> = e.iter().map(|x| x * direction.signum()).collect();
    let t = tangent(&dr, &reference)?;
    make_point(problem, z, 0.0, t, iters)
}

/// One predictor-corrector step of length `ds` from `point`.
pub fn step(problem: &dyn ContinuationProblem, point: &BranchPoint, ds: f64, newton: &NewtonOptions) -> Result<BranchPoint> {
    let t = &point.tangent;
    let zp: Vec<f64> = point.z.iter().zip(t).map(|(z, ti)| z + ds * ti).collect();
    let f = |z: &[f64]| -> Result<(Vec<f64>, Jacobian)> {
        let (mut r, j) = problem.residual_and_jacobian(z)?;
        r.push(z.iter().zip(&zp).zip(t).map(|((a, b), ti)| ti * (a - b)).sum());
        Ok((r, j.with_row(t)))
    };
    let (z, iters) = newton_solve(&f, &zp, newton)?;
    let (_, dr) = problem.residual_and_jacobian(&z)?;
    let tn = tangent(&dr, t)?;
    make_point(problem, z, point.s + ds, tn, iters)
}

/// Absolute threshold on the swallowtail monitor for the blow-up rule.
pub const BLOWUP_ABSOLUTE: f64 = 1e6;
/// Growth factor over one step for the blow-up rule.
pub const BLOWUP_GROWTH: f64 = 100.0;

/// Blow-up rule for a monitor sequence `a → b`: `|b| > 1e6`, or growth by at
/// least a factor 100 without a sign change once `|b| ≥ 1`.
pub fn is_blowup(a: f64, b: f64) -> bool {
    if !b.is_finite() || b.abs() > BLOWUP_ABSOLUTE {
        return true;
    }
    a != 0.0 && a.signum() == b.signum() && b.abs() >= 1.0 && b.abs() >= BLOWUP_GROWTH * a.abs()
}

/// Sign-change scan between consecutive points; no refinement.
pub fn detect_events(prev: &BranchPoint, next: &BranchPoint, kinds: &[EventKind]) -> Vec<EventKind> {
    let mut out = Vec::new();
    for &k in kinds {
        if k == EventKind::Blowup {
            if let (Some(a), Some(b)) = (prev.monitors.swallowtail, next.monitors.swallowtail) {
                if is_blowup(a, b) {
                    out.push(k);
                }
            }
            continue;
        }
        if let (Some(a), Some(b)) = (k.monitor(&prev.monitors), k.monitor(&next.monitors)) {
            if a == 0.0 || a.signum() != b.signum() {
                if a != 0.0 || b != 0.0 {
                    out.push(k);
                }
            }
        }
    }
    out
}

/// Secant refinement of a sign change of `kind` between `prev` and `next`,
/// re-stepping from `prev` with reduced step lengths. Falls back to bisection
/// when the secant iterate leaves the bracket.
pub fn refine_event(
    problem: &dyn ContinuationProblem,
    prev: &BranchPoint,
    next: &BranchPoint,
    kind: EventKind,
    control: &StepControl,
    event_tol: f64,
    max_iter: usize,
) -> Result<Event> {
    let ma = kind.monitor(&prev.monitors).ok_or_else(|| Error::InvalidRange(format!("no {} monitor", kind.name())))?;
    let mb = kind.monitor(&next.monitors).ok_or_else(|| Error::InvalidRange(format!("no {} monitor", kind.name())))?;
    let scale = ma.abs().max(mb.abs());
    let width = next.s - prev.s;
    let (mut lo, mut hi) = ((0.0, ma), (width, mb));
    // last two iterates for the secant update
    let (mut x0, mut x1) = (lo, hi);
    let mut best = next.clone();
    let mut best_m = mb;
    let mut history = Vec::new();
    let mut iters = 0;
    let tol = event_tol * scale;
    if mb.abs() <= tol {
        return Ok(Event {
            kind,
            bracket: (0, 0),
            point: best,
            monitor: mb,
            approximate: false,
            refinement_iters: 0,
            refinement_history: history,
        });
    }
    let mut approximate = true;
    while iters < max_iter {
        if hi.0 - lo.0 <= 4.0 * f64::EPSILON * width.abs() {
            break;
        }
        let mut sigma = if x1.1 != x0.1 { x1.0 - x1.1 * (x1.0 - x0.0) / (x1.1 - x0.1) } else { f64::NAN };
        if !(sigma > lo.0 && sigma < hi.0) {
            sigma = 0.5 * (lo.0 + hi.0);
        }
        iters += 1;
        let pt = match step(problem, prev, sigma, &control.newton) {
            Ok(p) => p,
            Err(_) => {
                // shrink toward the converged side
                hi = (sigma, hi.1);
                continue;
            }
        };
        let m = kind.monitor(&pt.monitors).unwrap_or(f64::NAN);
        history.push(m);
        if m.abs() < best_m.abs() || !best_m.is_finite() {
            best = pt.clone();
            best_m = m;
        }
        if m.abs() <= tol {
            approximate = false;
            break;
        }
        if m.signum() == lo.1.signum() {
            lo = (sigma, m);
        } else {
            hi = (sigma, m);
        }
        x0 = x1;
        x1 = (sigma, m);
    }
    Ok(Event {
        kind,
        bracket: (0, 0),
        point: best,
        monitor: best_m,
        approximate,
        refinement_iters: iters,
        refinement_history: history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchConfig {
    pub control: StepControl,
    pub max_steps: usize,
    /// Orientation of the designated parameter at the start (`±1`).
    pub direction: f64,
    /// `(index in z, lower, upper)`; the run stops once a point leaves a box.
    pub bounds: Vec<(usize, f64, f64)>,
    /// Event kinds that are detected and refined.
    pub detect: Vec<EventKind>,
    /// Event kinds that end the run once found.
    pub stop_on: Vec<EventKind>,
    pub event_tol: f64,
    pub max_refine: usize,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            max_steps: 200,
            direction: 1.0,
            bounds: Vec::new(),
            detect: vec![EventKind::Fold],
            stop_on: Vec::new(),
            event_tol: 1e-8,
            max_refine: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StepBudget,
    Bounds,
    Event(EventKind),
    StepTooSmall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub events: Vec<Event>,
    pub stop: StopReason,
}

/// Adaptive continuation from `z0` (converged first with the designated parameter fixed).
pub fn run_branch(problem: &dyn ContinuationProblem, z0: &[f64], config: &BranchConfig) -> Result<Branch> {
    let start = start_point(problem, z0, config.direction, &config.control.newton)?;
    run_from(problem, start, config)
}

/// Adaptive continuation from an already converged, oriented point.
pub fn run_from(problem: &dyn ContinuationProblem, start: BranchPoint, config: &BranchConfig) -> Result<Branch> {
    let c = &config.control;
    let mut points = vec![start];
    let mut events = Vec::new();
    let mut ds = c.ds0.clamp(c.ds_min, c.ds_max);
    let mut stop = StopReason::StepBudget;
    let mut steps = 0;
    'outer: while steps < config.max_steps {
        let prev = points.last().unwrap();
        let next = loop {
            match step(problem, prev, ds, &c.newton) {
                Ok(p) if dot(&p.tangent, &prev.tangent) >= c.max_turn.cos() => break p,
                _ => {
                    ds *= 0.5;
                    if ds < c.ds_min {
                        stop = StopReason::StepTooSmall;
                        break 'outer;
                    }
                }
            }
        };
        steps += 1;
        let iters = next.newton_iters;
        let mut next = next;
        let found = detect_events(prev, &next, &config.detect);
        if found.contains(&EventKind::Blowup) {
            next.monitors.blowup_flag = true;
        }
        let idx = points.len();
        let prev = prev.clone();
        points.push(next);
        let mut stop_event = None;
        for kind in found {
            let ev = if kind == EventKind::Blowup {
                Event {
                    kind,
                    bracket: (idx - 1, idx),
                    point: points[idx].clone(),
                    monitor: points[idx].monitors.swallowtail.unwrap_or(f64::NAN),
                    approximate: true,
                    refinement_iters: 0,
                    refinement_history: Vec::new(),
                }
            } else {
                let mut ev = refine_event(problem, &prev, &points[idx], kind, c, config.event_tol, config.max_refine)?;
                ev.bracket = (idx - 1, idx);
                ev
            };
            if config.stop_on.contains(&kind) && stop_event.is_none() {
                stop_event = Some(kind);
            }
            events.push(ev);
        }
        if let Some(kind) = stop_event {
            stop = StopReason::Event(kind);
            break;
        }
        let z = &points[idx].z;
        if config.bounds.iter().any(|&(i, lo, hi)| z[i] < lo || z[i] > hi) {
            stop = StopReason::Bounds;
            break;
        }
        if iters <= c.fast_iters {
            ds = (ds * c.grow).min(c.ds_max);
        }
    }
    Ok(Branch { points, events, stop })
}

pub const BRANCH_CSV_HEADER: &str =
    "step,s,lambda1,lambda2,lambda3,norm_u_inf,u_center,monitor_fold,monitor_cusp,monitor_sw,signature,newton_iters";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:.16e}"))
}

/// Writes the branch table with round-trip precision.
pub fn write_branch_csv(points: &[BranchPoint], mut w: impl Write) -> Result<()> {
    writeln!(w, "{BRANCH_CSV_HEADER}")?;
    for (i, p) in points.iter().enumerate() {
        let [l1, l2, l3] = p.summary.lambda;
        writeln!(
            w,
            "{i},{:.16e},{l1:.16e},{l2:.16e},{l3:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{}",
            p.s,
            p.summary.norm_u_inf,
            p.summary.u_center,
            p.monitors.fold_direction,
            opt(p.monitors.cusp),
            opt(p.monitors.swallowtail),
            p.signature.as_i32(),
            p.newton_iters
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;

    /// `R(z, μ) = z - μ`.
    struct Line;

    impl ContinuationProblem for Line {
        fn unknowns(&self) -> usize {
            2
        }
        fn residual_and_jacobian(&self, z: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
            Ok((
                vec![z[0] - z[1]],
                Jacobian::from_sparse(SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, -1.0)])),
            ))
        }
        fn parameter_index(&self) -> usize {
            1
        }
    }

    /// `R(x, μ) = x² + μ² - 1`, folds in `μ` at `(0, ±1)`.
    struct Circle;

    impl ContinuationProblem for Circle {
        fn unknowns(&self) -> usize {
            2
        }
        fn residual_and_jacobian(&self, z: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
            Ok((
                vec![z[0] * z[0] + z[1] * z[1] - 1.0],
                Jacobian::from_sparse(SparseMatrix::from_triplets(1, 2, &[(0, 0, 2.0 * z[0]), (0, 1, 2.0 * z[1])])),
            ))
        }
        fn parameter_index(&self) -> usize {
            1
        }
    }

    #[test]
    fn newton_scalar_quadratic() {
        let f = |z: &[f64]| -> Result<(Vec<f64>, Jacobian)> {
            Ok((vec![z[0] * z[0] - 4.0], Jacobian::from_sparse(SparseMatrix::diagonal(&[2.0 * z[0]]))))
        };
        let (z, iters) = newton_solve(&f, &[3.0], &NewtonOptions::default()).unwrap();
        assert!((z[0] - 2.0).abs() < 1e-9);
        assert!(iters <= 6);
        assert!(matches!(newton_solve(&f, &[0.0], &NewtonOptions::default()), Err(Error::Singular(_))));
    }

    #[test]
    fn line_tangent_and_step() {
        let (_, dr) = Line.residual_and_jacobian(&[0.0, 0.0]).unwrap();
        let t = tangent(&dr, &[0.0, 1.0]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((t[0] - r).abs() < 1e-15 && (t[1] - r).abs() < 1e-15);
        let t = tangent(&dr, &[r, r]).unwrap();
        assert!(t[0] > 0.0);
        let t2 = tangent(&dr, &[-r, -r]).unwrap();
        assert!(t2[0] < 0.0);
        let start = start_point(&Line, &[0.0, 0.0], 1.0, &NewtonOptions::default()).unwrap();
        let p = step(&Line, &start, 2f64.sqrt(), &NewtonOptions::default()).unwrap();
        assert!((p.z[0] - 1.0).abs() < 1e-15 && (p.z[1] - 1.0).abs() < 1e-15);
        assert!(p.newton_iters <= 1);
    }

    #[test]
    fn arclength_is_exact_on_line() {
        let cfg = BranchConfig {
            max_steps: 20,
            ..Default::default()
        };
        let b = run_branch(&Line, &[0.0, 0.0], &cfg).unwrap();
        for p in &b.points {
            let len = norm2(&p.z);
            assert!((len - p.s).abs() < 1e-12);
        }
        for w in b.points.windows(2) {
            assert!(dot(&w[0].tangent, &w[1].tangent) > 0.0);
        }
    }

    #[test]
    fn circle_fold_is_refined() {
        let cfg = BranchConfig {
            max_steps: 100,
            stop_on: vec![EventKind::Fold],
            control: StepControl {
                ds0: 0.1,
                ..Default::default()
            },
            ..Default::default()
        };
        let b = run_branch(&Circle, &[0.8, 0.6], &cfg).unwrap();
        assert_eq!(b.stop, StopReason::Event(EventKind::Fold));
        let ev = &b.events[0];
        assert!(!ev.approximate);
        assert!(ev.point.z[0].abs() < 1e-7, "fold at x = {}", ev.point.z[0]);
        assert!((ev.point.z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blowup_rule() {
        assert!(is_blowup(1e3, 1e5));
        assert!(is_blowup(1.0, 2e6));
        assert!(!is_blowup(1e3, 5e4));
        assert!(!is_blowup(1e-9, -1e-6));
    }

    #[test]
    fn fold_scan_on_parameter_sequence() {
        let mk = |l: f64, dir: f64| BranchPoint {
            z: vec![0.0, l],
            s: 0.0,
            tangent: vec![0.0, dir],
            monitors: MonitorRecord {
                fold_direction: dir,
                ..Default::default()
            },
            signature: Sign::Degenerate,
            newton_iters: 0,
            summary: PointSummary {
                lambda: [l, 0.0, 0.0],
                norm_u_inf: 0.0,
                u_center: 0.0,
            },
        };
        let seq = [mk(1.0, 1.0), mk(1.2, 1.0), mk(1.1, -1.0)];
        assert!(detect_events(&seq[0], &seq[1], &[EventKind::Fold]).is_empty());
        assert_eq!(detect_events(&seq[1], &seq[2], &[EventKind::Fold]), vec![EventKind::Fold]);
    }
}
