//! End-to-end workflows: the fold → cusp → swallowtail hunt, coarse-to-fine
//! refinement of swallowtail points, convergence tables and the fold-line
//! slices around a swallowtail.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::augmented::{initial_alpha, normalize_alpha, AugmentedState, AugmentedSystem, Monitors};
use crate::continuation::{
    newton_solve, run_branch, run_from, start_point, Branch, BranchConfig, BranchPoint, Event, EventKind, NewtonOptions, StepControl,
    StopReason,
};
use crate::linalg::norm_inf;
use crate::poisson::{GridFunction, Grid, Nonlinearity};
use crate::{Error, Result};

/// Progress of a hunt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Solution,
    Fold,
    Cusp,
    Swallowtail,
}

impl Stage {
    /// Augmentation level of the defining system for this singularity.
    pub fn level(self) -> usize {
        self as usize
    }

    /// Free parameters of the square defining system.
    pub fn active(self) -> Vec<usize> {
        (0..self.level().max(1)).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Solution => "solution",
            Stage::Fold => "fold",
            Stage::Cusp => "cusp",
            Stage::Swallowtail => "swallowtail",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solution" => Ok(Stage::Solution),
            "fold" => Ok(Stage::Fold),
            "cusp" => Ok(Stage::Cusp),
            "swallowtail" => Ok(Stage::Swallowtail),
            _ => Err(Error::Parse(format!("unknown stage `{s}`"))),
        }
    }
}

/// How the chain is located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Direct chain for polynomial families, continuation otherwise.
    Auto,
    /// Solution branch → fold line → cusp line, each event refined by Newton.
    Continuation,
    /// Newton on each defining system in turn from the starting parameters.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntConfig {
    /// Starting parameters; `u = 0` is the starting solution.
    pub lambda0: [f64; 3],
    pub target: Stage,
    pub strategy: Strategy,
    pub seed: u64,
    /// Inverse-iteration steps for the initial fold direction.
    pub alpha_steps: usize,
    pub control: StepControl,
    /// Step budget per continuation stage.
    pub max_steps: usize,
    pub event_tol: f64,
    /// Newton options for the direct solves on defining systems.
    pub newton: NewtonOptions,
    /// Box `[-b, b]` for the secondary parameters during line continuations.
    pub parameter_bound: f64,
    /// λ₃ of the slice on which the fold line is continued; `None` keeps `lambda0[2]`.
    pub fold_line_lambda3: Option<f64>,
    /// Half-width of the λ₃ range explored along each cusp line.
    pub cusp_line_window: f64,
    pub cusp_line_steps: usize,
}

impl Default for HuntConfig {
    fn default() -> Self {
        Self {
            lambda0: [0.0; 3],
            target: Stage::Swallowtail,
            strategy: Strategy::Auto,
            seed: 0,
            alpha_steps: 8,
            control: StepControl {
                ds_max: 0.25,
                ..Default::default()
            },
            max_steps: 400,
            event_tol: 1e-8,
            newton: NewtonOptions::default(),
            parameter_bound: 20.0,
            fold_line_lambda3: Some(-1.0),
            cusp_line_window: 0.5,
            cusp_line_steps: 150,
        }
    }
}

/// A singular point converged on its own defining system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Located {
    pub kind: Stage,
    pub grid: Grid,
    pub lambda: [f64; 3],
    /// `‖F‖∞` recomputed on a freshly assembled defining system.
    pub residual_inf: f64,
    pub monitors: Monitors,
    pub newton_iters: usize,
    pub state: AugmentedState,
}

impl Located {
    /// The square defining system this point solves.
    pub fn system(&self, nl: Arc<dyn Nonlinearity>) -> Result<AugmentedSystem> {
        AugmentedSystem::new(self.grid, nl, self.kind.level(), self.kind.active(), self.lambda)
    }

    /// Unknown vector of [`Located::system`].
    pub fn z(&self, sys: &AugmentedSystem) -> Vec<f64> {
        sys.pack(&self.state)
    }
}

/// Continuation data kept for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBranch {
    pub name: String,
    pub points: Vec<BranchPoint>,
    pub events: Vec<Event>,
    pub stop: StopReason,
}

impl StageBranch {
    fn new(name: impl Into<String>, b: Branch) -> Self {
        Self {
            name: name.into(),
            points: b.points,
            events: b.events,
            stop: b.stop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntReport {
    pub problem: String,
    pub grid: Grid,
    pub seed: u64,
    pub target: Stage,
    /// Last stage completed.
    pub stage: Stage,
    pub chain: Vec<Located>,
    pub branches: Vec<StageBranch>,
    /// Why the hunt stopped short of the target.
    pub failure: Option<String>,
    pub timings: Vec<Timing>,
}

impl HuntReport {
    pub fn is_complete(&self) -> bool {
        self.stage == self.target
    }

    pub fn find(&self, kind: Stage) -> Option<&Located> {
        self.chain.iter().find(|l| l.kind == kind)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Newton on the defining system of `kind` from `state`, with the result
/// checked against a freshly assembled residual.
pub fn locate(
    nl: Arc<dyn Nonlinearity>,
    grid: Grid,
    kind: Stage,
    state: &AugmentedState,
    newton: &NewtonOptions,
) -> Result<Located> {
    let sys = AugmentedSystem::new(grid, nl.clone(), kind.level(), kind.active(), state.lambda)?;
    let z0 = sys.pack(state);
    let (z, iters) = newton_solve(&|z: &[f64]| sys.residual_and_jacobian(z), &z0, newton)?;
    let state = sys.unpack(&z)?;
    let check = AugmentedSystem::new(grid, nl, kind.level(), kind.active(), state.lambda)?;
    let residual_inf = norm_inf(&check.residual(&check.pack(&state))?);
    let monitors = check.monitors(&check.pack(&state))?;
    Ok(Located {
        kind,
        grid,
        lambda: state.lambda,
        residual_inf,
        monitors,
        newton_iters: iters,
        state,
    })
}

struct Hunt<'a> {
    nl: Arc<dyn Nonlinearity>,
    grid: Grid,
    config: &'a HuntConfig,
    report: HuntReport,
    clock: Instant,
}

impl Hunt<'_> {
    fn lap(&mut self, stage: &str) {
        self.report.timings.push(Timing {
            stage: stage.to_string(),
            seconds: self.clock.elapsed().as_secs_f64(),
        });
        self.clock = Instant::now();
    }

    fn push(&mut self, located: Located) {
        self.report.stage = located.kind;
        self.report.chain.push(located);
    }

    fn branch_config(&self, detect: Vec<EventKind>, direction: f64, bounds: Vec<(usize, f64, f64)>) -> BranchConfig {
        BranchConfig {
            control: self.config.control,
            max_steps: self.config.max_steps,
            direction,
            bounds,
            stop_on: detect.iter().copied().filter(|&k| k != EventKind::Blowup).collect(),
            detect,
            event_tol: self.config.event_tol,
            max_refine: 40,
        }
    }

    fn fail(&mut self, msg: String) {
        if self.report.failure.is_none() || !msg.is_empty() {
            self.report.failure = Some(msg);
        }
    }

    fn run_continuation(&mut self) {
        let nl = self.nl.clone();
        let grid = self.grid;
        let n = grid.len();
        let cfg = self.config;
        let lambda0 = cfg.lambda0;
        if cfg.max_steps == 0 {
            self.fail("step budget exhausted before any event".into());
            return;
        }

        // solution branch in λ₁
        let Ok(sys0) = AugmentedSystem::new(grid, nl.clone(), 0, vec![0], lambda0) else { return };
        let mut z0 = vec![0.0; n];
        z0.push(lambda0[0]);
        let branch_cfg = self.branch_config(vec![EventKind::Fold], 1.0, vec![]);
        let fold_event = match run_branch(&sys0, &z0, &branch_cfg) {
            Ok(b) => {
                let ev = b.events.iter().find(|e| e.kind == EventKind::Fold).cloned();
                self.report.branches.push(StageBranch::new("solution", b));
                ev
            }
            Err(e) => {
                self.fail(format!("solution branch: {e}"));
                None
            }
        };
        self.lap("solution");
        let Some(ev) = fold_event else {
            self.fail("no fold on the solution branch within budget".into());
            return;
        };
        if self.config.target == Stage::Solution {
            return;
        }

        // fold
        let Ok(s0) = sys0.unpack(&ev.point.z) else { return };
        let g = match sys0.hessian(&s0) {
            Ok(g) => g,
            Err(e) => return self.fail(format!("fold: {e}")),
        };
        let alpha = match initial_alpha(&g, grid, cfg.seed, cfg.alpha_steps) {
            Ok(a) => a,
            Err(e) => return self.fail(format!("fold direction: {e}")),
        };
        let start = AugmentedState {
            u: s0.u,
            alpha,
            vbar: Vec::new(),
            lambda: s0.lambda,
        };
        let fold = match locate(nl.clone(), grid, Stage::Fold, &start, &cfg.newton) {
            Ok(l) => l,
            Err(e) => return self.fail(format!("fold Newton: {e}")),
        };
        self.push(fold.clone());
        self.lap("fold");
        if cfg.target == Stage::Fold {
            return;
        }

        // fold line in (λ₁, λ₂) on the slice λ₃ = fold_line_lambda3
        let mut fold_start = fold;
        if let Some(l3) = cfg.fold_line_lambda3 {
            if l3 != fold_start.lambda[2] {
                let mut s = fold_start.state.clone();
                s.lambda[2] = l3;
                match locate(nl.clone(), grid, Stage::Fold, &s, &cfg.newton) {
                    Ok(l) => fold_start = l,
                    Err(e) => return self.fail(format!("fold at λ₃ = {l3}: {e}")),
                }
            }
        }
        let Ok(sys1) = AugmentedSystem::new(grid, nl.clone(), 1, vec![0, 1], fold_start.lambda) else { return };
        let z1 = sys1.pack(&fold_start.state);
        let b = cfg.parameter_bound;
        let p2 = sys1.unknowns() - 1;
        let mut budget = cfg.max_steps;
        let mut first_cusp = None;
        for direction in [1.0, -1.0] {
            let mut start = match start_point(&sys1, &z1, direction, &cfg.control.newton) {
                Ok(p) => p,
                Err(e) => return self.fail(format!("fold line: {e}")),
            };
            let mut segment = 0;
            while budget > 0 {
                let mut bc = self.branch_config(vec![EventKind::Cusp], direction, vec![(p2, -b, b)]);
                bc.max_steps = budget;
                let branch = match run_from(&sys1, start.clone(), &bc) {
                    Ok(br) => br,
                    Err(e) => {
                        self.fail(format!("fold line: {e}"));
                        break;
                    }
                };
                budget = budget.saturating_sub(branch.points.len() - 1);
                let stop = branch.stop;
                let event = branch.events.iter().find(|e| e.kind == EventKind::Cusp).cloned();
                let last = branch.points.last().cloned();
                let sign = if direction > 0.0 { "+" } else { "-" };
                self.report.branches.push(StageBranch::new(format!("fold_line{sign}{segment}"), branch));
                segment += 1;
                let Some(ev) = event else { break };
                if let Ok(s1) = sys1.unpack(&ev.point.z) {
                    if self.from_cusp(&s1, &mut first_cusp) {
                        return;
                    }
                }
                match (stop, last) {
                    (StopReason::Event(EventKind::Cusp), Some(p)) => start = p,
                    _ => break,
                }
            }
        }
        self.lap("fold_line");
        match first_cusp {
            Some(c) => {
                self.push(c);
                self.fail("no swallowtail on the cusp lines within budget".into());
            }
            None => self.fail("no cusp on the fold line within budget".into()),
        }
    }

    /// Locates the cusp near `s1` and searches its cusp line for a swallowtail.
    /// Returns `true` once the hunt is finished.
    fn from_cusp(&mut self, s1: &AugmentedState, first_cusp: &mut Option<Located>) -> bool {
        let nl = self.nl.clone();
        let grid = self.grid;
        let cfg = self.config;
        let Ok(cusp) = locate(nl.clone(), grid, Stage::Cusp, s1, &cfg.newton) else {
            return false;
        };
        if cfg.target == Stage::Cusp {
            self.push(cusp);
            self.lap("cusp");
            return true;
        }
        first_cusp.get_or_insert_with(|| cusp.clone());

        // cusp line in (λ₁, λ₂, λ₃)
        let Ok(sys2) = AugmentedSystem::new(grid, nl.clone(), 2, vec![0, 1, 2], cusp.lambda) else {
            return false;
        };
        let z2 = sys2.pack(&cusp.state);
        let p3 = sys2.unknowns() - 1;
        let (b, w) = (cfg.parameter_bound, cfg.cusp_line_window);
        let l3 = cusp.lambda[2];
        let detect = vec![EventKind::Swallowtail, EventKind::Blowup];
        for direction in [1.0, -1.0] {
            let mut bc = self.branch_config(detect.clone(), direction, vec![(p3, l3 - w, l3 + w), (p3 - 1, -b, b)]);
            bc.max_steps = cfg.cusp_line_steps;
            let sign = if direction > 0.0 { "+" } else { "-" };
            let Ok(branch) = run_branch(&sys2, &z2, &bc) else { continue };
            let event = branch.events.iter().find(|e| e.kind == EventKind::Swallowtail).cloned();
            self.report.branches.push(StageBranch::new(format!("cusp_line{sign}"), branch));
            let Some(ev) = event else { continue };
            let Ok(s2) = sys2.unpack(&ev.point.z) else { continue };
            let start = AugmentedState {
                vbar: vec![0.0; grid.len()],
                ..s2
            };
            if let Ok(sw) = locate(nl.clone(), grid, Stage::Swallowtail, &start, &cfg.newton) {
                self.lap("fold_line");
                self.push(cusp);
                self.push(sw);
                self.lap("swallowtail");
                return true;
            }
        }
        false
    }

    fn run_direct(&mut self) {
        let nl = self.nl.clone();
        let grid = self.grid;
        let n = grid.len();
        let cfg = self.config;
        if cfg.target == Stage::Solution {
            return;
        }
        let newton = NewtonOptions {
            dense_fallback: true,
            ..cfg.newton
        };
        let u = vec![0.0; n];
        let g = match crate::poisson::jacobian(&u, &cfg.lambda0, nl.as_ref(), &crate::poisson::build_laplacian(grid)) {
            Ok(g) => g,
            Err(e) => return self.fail(format!("fold direction: {e}")),
        };
        let alpha = match initial_alpha(&g, grid, cfg.seed, cfg.alpha_steps) {
            Ok(a) => a,
            Err(e) => return self.fail(format!("fold direction: {e}")),
        };
        let mut state = AugmentedState {
            u,
            alpha,
            vbar: vec![0.0; n],
            lambda: cfg.lambda0,
        };
        for kind in [Stage::Fold, Stage::Cusp, Stage::Swallowtail] {
            let mut start = state.clone();
            if kind != Stage::Swallowtail {
                start.vbar.clear();
            } else if start.vbar.is_empty() {
                start.vbar = vec![0.0; n];
            }
            match locate(nl.clone(), grid, kind, &start, &newton) {
                Ok(l) => {
                    let l = polish(nl.clone(), grid, kind, l);
                    state = l.state.clone();
                    self.push(l);
                    self.lap(kind.name());
                }
                Err(e) => return self.fail(format!("{kind} Newton: {e}")),
            }
            if kind == cfg.target {
                return;
            }
        }
    }
}

/// Re-solves with a tight tolerance and keeps the result unless its residual grew.
fn polish(nl: Arc<dyn Nonlinearity>, grid: Grid, kind: Stage, l: Located) -> Located {
    let tight = NewtonOptions {
        tol: 1e-15,
        max_iter: 120,
        dense_fallback: true,
    };
    match locate(nl, grid, kind, &l.state, &tight) {
        Ok(p) if p.residual_inf <= l.residual_inf => Located {
            newton_iters: l.newton_iters + p.newton_iters,
            ..p
        },
        _ => l,
    }
}

/// Locates the chain fold → cusp → swallowtail from the solution `u = 0` at
/// `config.lambda0`. Stages that fail end the chain; the partial report is
/// returned with `failure` set.
pub fn hunt_swallowtail(nl: Arc<dyn Nonlinearity>, grid: Grid, config: &HuntConfig) -> HuntReport {
    let strategy = match config.strategy {
        Strategy::Auto if nl.name() == "polynomial" => Strategy::Direct,
        Strategy::Auto => Strategy::Continuation,
        s => s,
    };
    let mut hunt = Hunt {
        report: HuntReport {
            problem: nl.name().to_string(),
            grid,
            seed: config.seed,
            target: config.target,
            stage: Stage::Solution,
            chain: Vec::new(),
            branches: Vec::new(),
            failure: None,
            timings: Vec::new(),
        },
        nl,
        grid,
        config,
        clock: Instant::now(),
    };
    match strategy {
        Strategy::Direct => hunt.run_direct(),
        _ => hunt.run_continuation(),
    }
    if hunt.report.is_complete() {
        hunt.report.failure = None;
    }
    hunt.report
}

/// Result of moving a swallowtail point to another grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub located: Option<Located>,
    pub newton_iters: usize,
    /// Residual of the interpolated starting guess.
    pub initial_residual: f64,
    pub error: Option<String>,
}

/// Interpolates `u`, `α`, `v̄` of `entry` onto `finer`, rescales `α`, and
/// solves the defining system there.
pub fn refine_on_grid(nl: Arc<dyn Nonlinearity>, entry: &Located, finer: Grid, newton: &NewtonOptions) -> Result<Refinement> {
    let coarse = entry.grid;
    let interp = |v: &[f64]| -> Result<Vec<f64>> {
        if v.is_empty() {
            return Ok(Vec::new());
        }
        if coarse == finer {
            return Ok(v.to_vec());
        }
        Ok(GridFunction::new(coarse, v.to_vec())?.interpolate_to(finer).values)
    };
    let mut alpha = interp(&entry.state.alpha)?;
    if !alpha.is_empty() {
        normalize_alpha(&mut alpha, finer);
    }
    let state = AugmentedState {
        u: interp(&entry.state.u)?,
        alpha,
        vbar: interp(&entry.state.vbar)?,
        lambda: entry.lambda,
    };
    let sys = AugmentedSystem::new(finer, nl.clone(), entry.kind.level(), entry.kind.active(), entry.lambda)?;
    let initial_residual = norm_inf(&sys.residual(&sys.pack(&state))?);
    Ok(match locate(nl, finer, entry.kind, &state, newton) {
        Ok(l) => Refinement {
            newton_iters: l.newton_iters,
            located: Some(l),
            initial_residual,
            error: None,
        },
        Err(e) => Refinement {
            located: None,
            newton_iters: match e {
                Error::NoConvergence { iters, .. } => iters,
                _ => 0,
            },
            initial_residual,
            error: Some(e.to_string()),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub lambda: Option<[f64; 3]>,
    /// `‖λ(N) - λ(N_max)‖₂`.
    pub distance: Option<f64>,
    pub newton_iters: Option<usize>,
    pub residual_inf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub kind: Stage,
    pub rows: Vec<ConvergenceRow>,
    pub error: Option<String>,
}

impl ConvergenceTable {
    /// `(Δx, distance)` pairs of the rows that converged.
    pub fn series(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.distance.map(|d| (1.0 / (r.n as f64 + 1.0), d)))
            .collect()
    }

    /// Differences `‖λ(N_{i+1}) - λ(N_i)‖₂` between successive converged rows.
    pub fn successive_differences(&self) -> Vec<f64> {
        let ls: Vec<[f64; 3]> = self.rows.iter().filter_map(|r| r.lambda).collect();
        ls.windows(2).map(|w| distance(&w[0], &w[1])).collect()
    }

    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "N,dx,lambda1,lambda2,lambda3,distance,newton_iters")?;
        for r in &self.rows {
            let dx = 1.0 / (r.n as f64 + 1.0);
            match (r.lambda, r.distance) {
                (Some([a, b, c]), Some(d)) => writeln!(
                    w,
                    "{},{dx:.16e},{a:.16e},{b:.16e},{c:.16e},{d:.16e},{}",
                    r.n,
                    r.newton_iters.unwrap_or(0)
                )?,
                _ => writeln!(w, "{},{dx:.16e},nan,nan,nan,nan,nan", r.n)?,
            }
        }
        Ok(())
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Chains [`refine_on_grid`] across square grids `ns` starting from `seed`.
/// After a failed refinement the remaining rows are left empty.
pub fn convergence_study(nl: Arc<dyn Nonlinearity>, ns: &[usize], seed: &Located, newton: &NewtonOptions) -> Result<ConvergenceTable> {
    let mut rows = Vec::with_capacity(ns.len());
    let mut current = seed.clone();
    let mut error = None;
    for &n in ns {
        let empty = ConvergenceRow {
            n,
            lambda: None,
            distance: None,
            newton_iters: None,
            residual_inf: None,
        };
        if error.is_some() {
            rows.push(empty);
            continue;
        }
        let r = refine_on_grid(nl.clone(), &current, Grid::square(n)?, newton)?;
        match r.located {
            Some(l) => {
                rows.push(ConvergenceRow {
                    lambda: Some(l.lambda),
                    newton_iters: Some(r.newton_iters),
                    residual_inf: Some(l.residual_inf),
                    ..empty
                });
                current = l;
            }
            None => {
                error = Some(format!("N = {n}: {}", r.error.unwrap_or_default()));
                rows.push(empty);
            }
        }
    }
    fill_distances(&mut rows);
    Ok(ConvergenceTable {
        kind: seed.kind,
        rows,
        error,
    })
}

fn fill_distances(rows: &mut [ConvergenceRow]) {
    if let Some(last) = rows.iter().rev().find_map(|r| r.lambda) {
        for r in rows {
            r.distance = r.lambda.map(|l| distance(&l, &last));
        }
    }
}

/// Hunts `kind` from scratch on every square grid in `ns`. Failed grids leave
/// empty rows; the first failure is kept in `error`.
pub fn independent_study(nl: Arc<dyn Nonlinearity>, ns: &[usize], kind: Stage, config: &HuntConfig) -> Result<ConvergenceTable> {
    let config = HuntConfig {
        target: kind,
        ..config.clone()
    };
    let mut rows = Vec::with_capacity(ns.len());
    let mut error = None;
    for &n in ns {
        let report = hunt_swallowtail(nl.clone(), Grid::square(n)?, &config);
        let found = report.find(kind);
        if found.is_none() && error.is_none() {
            error = Some(format!("N = {n}: {}", report.failure.as_deref().unwrap_or("not reached")));
        }
        rows.push(ConvergenceRow {
            n,
            lambda: found.map(|l| l.lambda),
            distance: None,
            newton_iters: found.map(|l| l.newton_iters),
            residual_inf: found.map(|l| l.residual_inf),
        });
    }
    fill_distances(&mut rows);
    Ok(ConvergenceTable { kind, rows, error })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    /// Offset of λ₃ on each side; `None` uses 10% of `|λ₃|` at the swallowtail.
    pub delta_lambda3: Option<f64>,
    /// Half-width of the λ₂ window scanned on each slice.
    pub lambda2_window: f64,
    pub control: StepControl,
    pub max_steps: usize,
    pub newton: NewtonOptions,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            delta_lambda3: None,
            lambda2_window: 0.02,
            control: StepControl {
                ds0: 0.02,
                ds_max: 0.1,
                ..Default::default()
            },
            max_steps: 400,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub lambda3: f64,
    pub cusp_events: usize,
    /// Cusp points found, as `(λ₁, λ₂)`.
    pub cusps: Vec<[f64; 2]>,
    /// Projected fold line `(λ₁, λ₂)`, ordered along λ₂.
    pub fold_line: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub swallowtail_lambda: [f64; 3],
    pub delta_lambda3: f64,
    /// Slices at `λ₃ - δ` and `λ₃ + δ`.
    pub slices: Vec<Slice>,
    /// Cusp counts on the two slices, in the same order.
    pub counts: (usize, usize),
    pub at_singularity: bool,
}

impl GeometryReport {
    /// One slice crosses two cusps and the other none.
    pub fn is_swallowtail(&self) -> bool {
        matches!(self.counts, (2, 0) | (0, 2))
    }
}

fn slice(nl: Arc<dyn Nonlinearity>, sw: &Located, lambda3: f64, cfg: &GeometryConfig) -> Result<Slice> {
    let grid = sw.grid;
    let mut state = AugmentedState {
        u: sw.state.u.clone(),
        alpha: sw.state.alpha.clone(),
        vbar: Vec::new(),
        lambda: sw.lambda,
    };
    // walk the fold sheet to the slice in small λ₃ increments
    let substeps = 8;
    let mut fold = None;
    for k in 1..=substeps {
        state.lambda[2] = sw.lambda[2] + (lambda3 - sw.lambda[2]) * k as f64 / substeps as f64;
        let l = locate(nl.clone(), grid, Stage::Fold, &state, &cfg.newton)?;
        state = l.state.clone();
        fold = Some(l);
    }
    let fold = fold.expect("at least one substep");
    let sys = AugmentedSystem::new(grid, nl, 1, vec![0, 1], fold.lambda)?;
    let z = sys.pack(&fold.state);
    let p2 = sys.unknowns() - 1;
    let (lo, hi) = (sw.lambda[1] - cfg.lambda2_window, sw.lambda[1] + cfg.lambda2_window);
    let mut cusps = Vec::new();
    let mut line: Vec<[f64; 2]> = Vec::new();
    for direction in [-1.0, 1.0] {
        let bc = BranchConfig {
            control: cfg.control,
            max_steps: cfg.max_steps,
            direction,
            bounds: vec![(p2, lo, hi)],
            detect: vec![EventKind::Cusp],
            stop_on: Vec::new(),
            event_tol: 1e-8,
            max_refine: 40,
        };
        let b = run_branch(&sys, &z, &bc)?;
        let pts = b.points.iter().map(|p| [p.summary.lambda[0], p.summary.lambda[1]]);
        if direction < 0.0 {
            line.extend(pts.rev());
        } else {
            line.extend(pts.skip(1));
        }
        cusps.extend(b.events.iter().map(|e| [e.point.summary.lambda[0], e.point.summary.lambda[1]]));
    }
    cusps.sort_by(|a, b| a[1].total_cmp(&b[1]));
    Ok(Slice {
        lambda3,
        cusp_events: cusps.len(),
        cusps,
        fold_line: line,
    })
}

/// Fold-line slices in `(λ₁, λ₂)` at `λ₃ ∓ δ` around a swallowtail, counting
/// the cusps met on each.
pub fn verify_swallowtail_geometry(nl: Arc<dyn Nonlinearity>, sw: &Located, cfg: &GeometryConfig) -> Result<GeometryReport> {
    if sw.kind != Stage::Swallowtail {
        return Err(Error::InvalidRange(format!("expected a swallowtail point, got {}", sw.kind)));
    }
    let delta = cfg.delta_lambda3.unwrap_or(0.1 * sw.lambda[2].abs());
    if delta == 0.0 {
        return Ok(GeometryReport {
            swallowtail_lambda: sw.lambda,
            delta_lambda3: 0.0,
            slices: Vec::new(),
            counts: (0, 0),
            at_singularity: true,
        });
    }
    let below = slice(nl.clone(), sw, sw.lambda[2] - delta, cfg)?;
    let above = slice(nl, sw, sw.lambda[2] + delta, cfg)?;
    Ok(GeometryReport {
        swallowtail_lambda: sw.lambda,
        delta_lambda3: delta,
        counts: (below.cusp_events, above.cusp_events),
        slices: vec![below, above],
        at_singularity: false,
    })
}

/// λ₁ at the first fold of the solution branch from `u = 0`, converged on the
/// fold system.
pub fn first_fold(nl: Arc<dyn Nonlinearity>, grid: Grid, lambda: [f64; 3], seed: u64) -> Result<Located> {
    let config = HuntConfig {
        lambda0: lambda,
        target: Stage::Fold,
        strategy: Strategy::Continuation,
        seed,
        ..Default::default()
    };
    let report = hunt_swallowtail(nl, grid, &config);
    match report.find(Stage::Fold) {
        Some(l) => Ok(l.clone()),
        None => Err(Error::NoConvergence {
            iters: config.max_steps,
            residual: f64::NAN,
        }),
    }
}

/// Second-order Richardson extrapolation `(4 a_h/2 - a_h) / 3` for grids with
/// `Δx` halving between successive entries.
pub fn richardson(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect()
}
