use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use aseries::augmented::{AugmentedState, AugmentedSystem};
use aseries::classifier::{detect, parse_tensor_file, DerivativeOracle, Tolerances};
use aseries::continuation::{run_branch, write_branch_csv, BranchConfig, EventKind, NewtonOptions, StepControl};
use aseries::harness::{
    convergence_study, hunt_swallowtail, independent_study, ConvergenceTable, HuntConfig, HuntReport, Located, Stage, Strategy,
};
use aseries::poisson::{build_laplacian, poisson_oracle, Bratu, Grid, GridFunction, Nonlinearity, PolynomialNonlinearity};
use serde_json::json;

use crate::args::{
    ClassifyArgs, Command, ContinueArgs, ConvergeArgs, ExportArgs, HuntArgs, ProblemArgs, ProblemKind, StageArg,
    StrategyArg,
};
use crate::CliError;

type Res<T> = Result<T, CliError>;

pub fn run(cmd: Command) -> Res<()> {
    match cmd {
        Command::Continue(a) => cmd_continue(&a),
        Command::Hunt(a) => cmd_hunt(&a),
        Command::Converge(a) => cmd_converge(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::ExportPlot(a) => cmd_export(&a),
    }
}

fn numerical(e: aseries::Error) -> CliError {
    match e {
        aseries::Error::Parse(m) | aseries::Error::InvalidRange(m) => CliError::Usage(m),
        e => CliError::Numerical(e.to_string()),
    }
}

fn output(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

fn read_input(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// `15x15`, `15x10` or `15`.
pub fn parse_grid(s: &str) -> Res<Grid> {
    let bad = || CliError::Usage(format!("invalid grid '{s}', expected NxM"));
    let (n, m) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    Grid::new(n, m).map_err(|e| CliError::Usage(e.to_string()))
}

/// `10:85:5` (inclusive) or `10,15,20`.
pub fn parse_grids(s: &str) -> Res<Vec<usize>> {
    let bad = || CliError::Usage(format!("invalid grid list '{s}', expected start:end:step or N1,N2,..."));
    let ns: Vec<usize> = if s.contains(':') {
        let parts: Vec<usize> = s
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Res<_>>()?;
        let [start, end, step] = parts[..] else {
            return Err(bad());
        };
        if step == 0 || end < start {
            return Err(bad());
        }
        (start..=end).step_by(step).collect()
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Res<_>>()?
    };
    if ns.is_empty() || ns.contains(&0) {
        return Err(bad());
    }
    Ok(ns)
}

/// `l1`, `l2`, `l3` (also `lambda1`, ...) to an index.
fn parse_param(s: &str) -> Res<usize> {
    match s.trim() {
        "l1" | "lambda1" => Ok(0),
        "l2" | "lambda2" => Ok(1),
        "l3" | "lambda3" => Ok(2),
        other => Err(CliError::Usage(format!("unknown parameter '{other}', expected l1, l2 or l3"))),
    }
}

fn parse_active(s: &str) -> Res<Vec<usize>> {
    let active: Vec<usize> = s.split(',').filter(|p| !p.trim().is_empty()).map(parse_param).collect::<Res<_>>()?;
    if active.is_empty() {
        return Err(CliError::Usage("active parameter set is empty".into()));
    }
    for (i, a) in active.iter().enumerate() {
        if active[..i].contains(a) {
            return Err(CliError::Usage(format!("parameter l{} listed twice", a + 1)));
        }
    }
    Ok(active)
}

fn parse_fixed(s: &str) -> Res<Vec<(usize, f64)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("invalid fixed value '{p}', expected l3=0")))?;
            let v = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid number in '{p}'")))?;
            Ok((parse_param(k)?, v))
        })
        .collect()
}

fn nonlinearity(p: &ProblemArgs) -> Res<Arc<dyn Nonlinearity>> {
    match p.problem {
        ProblemKind::Bratu if !p.coeffs.is_empty() => Err(CliError::Usage("--coeffs applies to the polynomial problem".into())),
        ProblemKind::Bratu => Ok(Arc::new(Bratu)),
        ProblemKind::Polynomial => Ok(Arc::new(PolynomialNonlinearity::new(p.coeffs.clone()))),
    }
}

fn lambda(p: &ProblemArgs) -> Res<[f64; 3]> {
    <[f64; 3]>::try_from(p.lambda.as_slice())
        .map_err(|_| CliError::Usage(format!("--lambda needs three values, got {}", p.lambda.len())))
}

fn newton(p: &ProblemArgs) -> Res<NewtonOptions> {
    if !(p.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    if p.max_iter == 0 {
        return Err(CliError::Usage("--max-iter must be positive".into()));
    }
    Ok(NewtonOptions {
        tol: p.tol,
        max_iter: p.max_iter,
        dense_fallback: p.problem == ProblemKind::Polynomial,
    })
}

fn stage(s: StageArg) -> Stage {
    match s {
        StageArg::Solution => Stage::Solution,
        StageArg::Fold => Stage::Fold,
        StageArg::Cusp => Stage::Cusp,
        StageArg::Swallowtail => Stage::Swallowtail,
    }
}

fn load_state(path: &Path, grid: Grid) -> Res<Vec<f64>> {
    let text = read_input(path)?;
    let gf = GridFunction::read_from(text.as_bytes()).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if gf.grid != grid {
        return Err(CliError::Usage(format!(
            "{}: state is on grid {}, expected {grid}",
            path.display(),
            gf.grid
        )));
    }
    Ok(gf.values)
}

fn save_state(path: &Path, grid: Grid, u: Vec<f64>) -> Res<()> {
    GridFunction::new(grid, u)
        .and_then(|g| g.save(path))
        .map_err(|e| output(path, e))
}

fn load_report(path: &Path) -> Res<HuntReport> {
    HuntReport::from_json(&read_input(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Res<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| output(path, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| output(path, e))
}

/// Writes `text` to `path`, or to standard output.
fn emit(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| output(p, e))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

fn to_json(v: &impl serde::Serialize) -> Res<String> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Output(e.to_string()))
}

fn level_event(level: usize) -> EventKind {
    match level {
        0 => EventKind::Fold,
        1 => EventKind::Cusp,
        2 => EventKind::Swallowtail,
        _ => EventKind::Butterfly,
    }
}

fn level_stage(level: usize) -> Stage {
    match level {
        1 => Stage::Fold,
        2 => Stage::Cusp,
        _ => Stage::Swallowtail,
    }
}

fn hunt_config(p: &ProblemArgs, target: Stage) -> Res<HuntConfig> {
    Ok(HuntConfig {
        lambda0: lambda(p)?,
        target,
        seed: p.seed,
        newton: newton(p)?,
        ..HuntConfig::default()
    })
}

fn starting_point(a: &ContinueArgs, grid: Grid, nl: &Arc<dyn Nonlinearity>, lam: [f64; 3]) -> Res<AugmentedState> {
    let kind = level_stage(a.level);
    let located: Located = match &a.start_report {
        Some(path) => {
            let report = load_report(path)?;
            report
                .find(kind)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("{}: report holds no {kind}", path.display())))?
        }
        None => {
            let mut cfg = hunt_config(&a.problem, kind)?;
            cfg.lambda0 = lam;
            cfg.fold_line_lambda3 = a.fold_line_l3;
            let report = hunt_swallowtail(nl.clone(), grid, &cfg);
            match report.find(kind) {
                Some(l) => l.clone(),
                None => {
                    return Err(CliError::Numerical(format!(
                        "no {kind} to start from: {}",
                        report.failure.unwrap_or_default()
                    )))
                }
            }
        }
    };
    if located.grid != grid {
        return Err(CliError::Usage(format!("start point is on grid {}, expected {grid}", located.grid)));
    }
    let mut state = located.state;
    if let Some(fixed) = &a.fixed {
        let mut moved = false;
        for (i, v) in parse_fixed(fixed)? {
            moved |= state.lambda[i] != v;
            state.lambda[i] = v;
        }
        if moved {
            let l = aseries::harness::locate(nl.clone(), grid, kind, &state, &newton(&a.problem)?).map_err(numerical)?;
            state = l.state;
        }
    }
    Ok(state)
}

fn cmd_continue(a: &ContinueArgs) -> Res<()> {
    let grid = parse_grid(&a.grid)?;
    let nl = nonlinearity(&a.problem)?;
    let mut lam = lambda(&a.problem)?;
    if a.level > 3 {
        return Err(CliError::Usage(format!("--level must be 0..=3, got {}", a.level)));
    }
    let active = parse_active(&a.active)?;
    if active.len() != a.level + 1 {
        return Err(CliError::Usage(format!(
            "level {} needs {} active parameters, got {}",
            a.level,
            a.level + 1,
            active.len()
        )));
    }
    let fixed = parse_fixed(a.fixed.as_deref().unwrap_or(""))?;
    for &(i, v) in &fixed {
        if active.contains(&i) {
            return Err(CliError::Usage(format!("l{} is both active and fixed", i + 1)));
        }
        lam[i] = v;
    }
    if !(a.ds > 0.0 && a.ds_min > 0.0 && a.ds_max >= a.ds && a.ds >= a.ds_min) {
        return Err(CliError::Usage("step sizes must satisfy 0 < ds-min <= ds <= ds-max".into()));
    }
    if !(a.event_tol > 0.0 && a.bound > 0.0) {
        return Err(CliError::Usage("--event-tol and --bound must be positive".into()));
    }
    if a.level > 0 && a.state.is_some() {
        return Err(CliError::Usage("--state applies to level 0; use --start-report for augmented levels".into()));
    }
    let newton = newton(&a.problem)?;
    let state = if a.level == 0 {
        let u = match &a.state {
            Some(p) => load_state(p, grid)?,
            None => vec![0.0; grid.len()],
        };
        AugmentedState {
            u,
            alpha: Vec::new(),
            vbar: Vec::new(),
            lambda: lam,
        }
    } else {
        starting_point(a, grid, &nl, lam)?
    };
    let sys = AugmentedSystem::new(grid, nl, a.level, active.clone(), state.lambda).map_err(numerical)?;
    let z0 = sys.pack(&state);
    let event = level_event(a.level);
    let cfg = BranchConfig {
        control: StepControl {
            ds0: a.ds,
            ds_min: a.ds_min,
            ds_max: a.ds_max,
            newton,
            ..StepControl::default()
        },
        max_steps: a.max_steps,
        direction: a.direction.signum(),
        bounds: active
            .iter()
            .filter_map(|&i| sys.parameter_position(i))
            .map(|p| (p, -a.bound, a.bound))
            .collect(),
        detect: vec![event],
        stop_on: if a.stop_on_event { vec![event] } else { Vec::new() },
        event_tol: a.event_tol,
        ..BranchConfig::default()
    };
    let branch = run_branch(&sys, &z0, &cfg).map_err(numerical)?;

    let mut csv = Vec::new();
    write_branch_csv(&branch.points, &mut csv).map_err(|e| CliError::Output(e.to_string()))?;
    emit(a.out.as_deref(), &String::from_utf8_lossy(&csv))?;

    let events = json!({
        "problem": sys_problem(&a.problem),
        "grid": grid,
        "level": a.level,
        "active": active.iter().map(|i| format!("l{}", i + 1)).collect::<Vec<_>>(),
        "points": branch.points.len(),
        "stop": branch.stop,
        "events": branch.events,
    });
    let events_path: Option<PathBuf> = a.events.clone().or_else(|| {
        a.out.as_ref().map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(".events.json");
            PathBuf::from(s)
        })
    });
    match &events_path {
        Some(p) => emit(Some(p), &to_json(&events)?)?,
        None => eprint!("{}", to_json(&events)?),
    }
    if let Some(path) = &a.save_state {
        let last = branch.points.last().expect("branch has a start point");
        let s = sys.unpack(&last.z).map_err(numerical)?;
        save_state(path, grid, s.u)?;
    }
    Ok(())
}

fn sys_problem(p: &ProblemArgs) -> &'static str {
    match p.problem {
        ProblemKind::Bratu => "bratu",
        ProblemKind::Polynomial => "polynomial",
    }
}

fn cmd_hunt(a: &HuntArgs) -> Res<()> {
    let grid = parse_grid(&a.grid)?;
    let nl = nonlinearity(&a.problem)?;
    let mut cfg = hunt_config(&a.problem, stage(a.target))?;
    cfg.strategy = match a.strategy {
        StrategyArg::Auto => Strategy::Auto,
        StrategyArg::Continuation => Strategy::Continuation,
        StrategyArg::Direct => Strategy::Direct,
    };
    cfg.max_steps = a.max_steps;
    cfg.fold_line_lambda3 = if a.keep_l3 { None } else { Some(a.fold_line_l3) };
    if !(a.cusp_window > 0.0) {
        return Err(CliError::Usage("--cusp-window must be positive".into()));
    }
    cfg.cusp_line_window = a.cusp_window;
    let mut report = hunt_swallowtail(nl, grid, &cfg);
    if a.timings {
        for t in &report.timings {
            eprintln!("{:>12}: {:.3} s", t.stage, t.seconds);
        }
    } else {
        report.timings.clear();
    }
    emit(a.out.as_deref(), &to_json(&report)?)?;
    if let (Some(path), Some(last)) = (&a.save_state, report.chain.last()) {
        save_state(path, grid, last.state.u.clone())?;
    }
    for l in &report.chain {
        eprintln!(
            "{:>12}: lambda = ({:.10}, {:.10}, {:.10})  residual {:.2e}",
            l.kind, l.lambda[0], l.lambda[1], l.lambda[2], l.residual_inf
        );
    }
    if !report.is_complete() {
        return Err(CliError::Numerical(format!(
            "stopped at stage {}: {}",
            report.stage,
            report.failure.unwrap_or_default()
        )));
    }
    Ok(())
}

fn cmd_converge(a: &ConvergeArgs) -> Res<()> {
    let ns = parse_grids(&a.grids)?;
    let nl = nonlinearity(&a.problem)?;
    let newton = newton(&a.problem)?;
    if a.independent {
        let kind = a.kind.map(stage).unwrap_or(Stage::Swallowtail);
        let table = independent_study(nl, &ns, kind, &hunt_config(&a.problem, kind)?).map_err(numerical)?;
        return write_table(a, &table);
    }
    let report = match &a.seed_report {
        Some(path) => {
            let r = load_report(path)?;
            if r.problem != nl.name() {
                return Err(CliError::Usage(format!(
                    "{}: report is for problem '{}', not '{}'",
                    path.display(),
                    r.problem,
                    nl.name()
                )));
            }
            r
        }
        None => {
            let target = a.kind.map(stage).unwrap_or(Stage::Swallowtail);
            hunt_swallowtail(nl.clone(), Grid::square(ns[0]).map_err(numerical)?, &hunt_config(&a.problem, target)?)
        }
    };
    let seed = match a.kind {
        Some(k) => report.find(stage(k)),
        None => report.chain.last(),
    }
    .ok_or_else(|| match &report.failure {
        Some(f) => CliError::Numerical(format!("no starting singularity: {f}")),
        None => CliError::Usage("report holds no matching singularity".into()),
    })?;
    let table = convergence_study(nl, &ns, seed, &newton).map_err(numerical)?;
    write_table(a, &table)
}

fn write_table(a: &ConvergeArgs, table: &ConvergenceTable) -> Res<()> {
    emit(a.out.as_deref(), &to_json(table)?)?;
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        table.write_csv(&mut w).map_err(|e| output(path, e))?;
        w.flush().map_err(|e| output(path, e))?;
    }
    match &table.error {
        Some(e) => Err(CliError::Numerical(e.clone())),
        None => Ok(()),
    }
}

fn cmd_classify(a: &ClassifyArgs) -> Res<()> {
    let tol = Tolerances {
        gradient: a.gradient_tol,
        zero: a.zero_tol,
        ..Tolerances::default()
    };
    if !(tol.gradient > 0.0 && tol.zero > 0.0) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    let report = match (&a.tensors, &a.grid) {
        (Some(path), _) => {
            let oracle = parse_tensor_file(&read_input(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            detect(&oracle, &tol, a.max_order.min(oracle.max_order())).map_err(numerical)?
        }
        (None, Some(g)) => {
            let grid = parse_grid(g)?;
            let nl = nonlinearity(&a.problem)?;
            let u = match &a.state {
                Some(p) => load_state(p, grid)?,
                None => vec![0.0; grid.len()],
            };
            let l = build_laplacian(grid);
            let max_order = a.max_order.min(nl.max_order() + 1);
            let oracle = poisson_oracle(&u, &lambda(&a.problem)?, nl.as_ref(), &l, max_order).map_err(numerical)?;
            detect(&oracle, &tol, max_order).map_err(numerical)?
        }
        (None, None) => return Err(CliError::Usage("classify needs --tensors or --grid".into())),
    };
    if a.json {
        emit(None, &to_json(&report)?)
    } else {
        emit(None, &format!("{report}\n"))
    }
}

fn cmd_export(a: &ExportArgs) -> Res<()> {
    if a.report.is_none() && a.table.is_none() {
        return Err(CliError::Usage("export-plot needs --report or --table".into()));
    }
    std::fs::create_dir_all(&a.out_dir).map_err(|e| output(&a.out_dir, e))?;
    if let Some(path) = &a.report {
        let report = load_report(path)?;
        for (i, b) in report.branches.iter().enumerate() {
            let name: String = b
                .name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect();
            let p = a.out_dir.join(format!("{i:02}_{name}.csv"));
            let mut w = create(&p)?;
            write_branch_csv(&b.points, &mut w).map_err(|e| output(&p, e))?;
            w.flush().map_err(|e| output(&p, e))?;
        }
        let p = a.out_dir.join("singularities.csv");
        let mut w = create(&p)?;
        let opt = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.16e}"));
        let mut text = String::from("kind,N,M,lambda1,lambda2,lambda3,residual_inf,monitor_cusp,monitor_sw,monitor_butterfly\n");
        for l in &report.chain {
            text.push_str(&format!(
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}\n",
                l.kind,
                l.grid.n,
                l.grid.m,
                l.lambda[0],
                l.lambda[1],
                l.lambda[2],
                l.residual_inf,
                opt(l.monitors.cusp),
                opt(l.monitors.swallowtail),
                opt(l.monitors.butterfly)
            ));
        }
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| output(&p, e))?;
    }
    if let Some(path) = &a.table {
        let table: ConvergenceTable = serde_json::from_str(&read_input(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let p = a.out_dir.join("convergence.csv");
        let mut w = create(&p)?;
        table.write_csv(&mut w).map_err(|e| output(&p, e))?;
        w.flush().map_err(|e| output(&p, e))?;
    }
    Ok(())
}
