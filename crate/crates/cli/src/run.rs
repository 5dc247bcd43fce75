//! Dispatch of one configured experiment.

use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::json;
use stablemix::fieldfile;
use stablemix::kernels::stable_bound_table;
use stablemix::noise::sample_driver_path;
use stablemix::pide::{picard_solve, residual, solve_driftfree, IterateRecord};
use stablemix::presets::{gaussian_source, DriftPreset};
use stablemix::probe::{
    direct_euler_krylov, girsanov_mean, khasminskii_exponential, krylov_driver, scale_to_constant, weighted_exponential,
    weighted_krylov, McOptions, TestFunction,
};
use stablemix::sim::{
    euler_maruyama, kinetic_sde, ode_branch_residual, pathwise_uniqueness_experiment, simulate_transformed,
    transform_discrepancy, FnDrift, SimConfig,
};
use stablemix::zvonkin::{backward_residual, build_zvonkin_map, check_bilipschitz, ZvonkinOptions};
use stablemix::{NoiseStream, StableParams};

use crate::config::{Command, ExperimentConfig};
use crate::output::{estimate_row, num, path_rows, OutDir, ESTIMATE_HEADER, ESTIMATE_UNITS, PATH_HEADER, PATH_UNITS};

/// What a finished run reports back.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: serde_json::Value,
    /// Some Monte-Carlo verdict or oracle agreement failed.
    pub check_failed: bool,
    pub files: Vec<String>,
}

/// Runs `cfg.command`, writing CSVs, field files and `manifest.json` into
/// `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let start = Instant::now();
    let mut out = OutDir::create(&cfg.out)?;
    let (summary, check_failed) = match cfg.command {
        Command::CheckConditions => check_conditions(cfg, &mut out)?,
        Command::VerifyKernels => verify_kernels(cfg, &mut out)?,
        Command::PideSolve => pide_solve(cfg, &mut out)?,
        Command::PidePicard => pide_picard(cfg, &mut out)?,
        Command::ZvonkinBuild => zvonkin_build(cfg, &mut out)?,
        Command::SimEuler => sim_euler(cfg, &mut out)?,
        Command::SimTransformed => sim_transformed(cfg, &mut out)?,
        Command::SimUniqueness => sim_uniqueness(cfg, &mut out)?,
        Command::SimKinetic => sim_kinetic(cfg, &mut out)?,
        Command::McKrylov => mc_krylov(cfg, &mut out)?,
        Command::McKhasminskii => mc_khasminskii(cfg, &mut out)?,
        Command::McGirsanov => mc_girsanov(cfg, &mut out)?,
    };
    out.manifest(cfg.to_json(), start.elapsed().as_secs_f64(), summary.clone())?;
    Ok(Outcome { summary, check_failed, files: out.files })
}

type Step = Result<(serde_json::Value, bool)>;

fn check_conditions(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let rep = cfg.indices.check();
    println!("sum = d1/(alpha p) + d2/(2p) + 1/q = {:.9}", rep.sum);
    println!("{:<11} {:<36} {:>12} {:>12} {:>13}  holds", "condition", "inequality", "lhs", "rhs", "margin");
    let mut rows = Vec::new();
    for (name, ineq, c) in rep.rows() {
        println!("{name:<11} {ineq:<36} {:>12.9} {:>12.9} {:>13.9}  {}", c.lhs, c.rhs, c.margin, c.holds);
        rows.push(vec![name.to_string(), ineq.to_string(), num(c.lhs), num(c.rhs), num(c.margin), c.holds.to_string()]);
    }
    out.csv(
        "conditions.csv",
        "lhs, rhs, margin: dimensionless; holds: true when the strict inequality holds",
        &["condition", "inequality", "lhs", "rhs", "margin", "holds"],
        &rows,
    )?;
    let summary = rep.rows().iter().map(|(n, _, c)| (n.to_string(), json!(c.holds))).collect();
    Ok((serde_json::Value::Object(summary), false))
}

fn verify_kernels(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let ts = [0.01, 0.1, 1.0, 10.0];
    let xs: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.5).collect();
    let (table, c0) = stable_bound_table(cfg.indices.alpha, &ts, &xs)?;
    let rows: Vec<Vec<String>> =
        table.iter().map(|r| vec![num(r.t), num(r.x), num(r.ratio), num(1.0 / r.ratio)]).collect();
    out.csv(
        "kernel_bounds.csv",
        "t: time; x: space units; ratio_lower = kernel/profile, ratio_upper = profile/kernel, both dimensionless",
        &["t", "x", "ratio_lower", "ratio_upper"],
        &rows,
    )?;
    println!("stable kernel two-sided bound: all ratios within [1/c0, c0], c0 = {c0:.6}");
    Ok((json!({"c0": c0, "rows": rows.len()}), false))
}

fn iterate_rows(label: &str, its: &[IterateRecord]) -> Vec<Vec<String>> {
    its.iter()
        .map(|r| {
            vec![
                label.to_string(),
                r.iteration.to_string(),
                num(r.diff_norm),
                r.ratio.map(num).unwrap_or_default(),
                num(r.grad_x_sup),
                num(r.grad_y_sup),
            ]
        })
        .collect()
}

const ITERATE_HEADER: [&str; 6] = ["component", "iteration", "diff_norm", "ratio", "grad_x_sup", "grad_y_sup"];
const ITERATE_UNITS: &str =
    "iteration: count; diff_norm: mixed L^q L^p norm of successive differences; ratio: dimensionless; grad_*_sup: sup norms";

fn pide_solve(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let s = &cfg.source;
    let f = gaussian_source(cfg.grid, s.amplitude, s.width, s.center[0], s.center[1]);
    let sol = solve_driftfree(&f, &cfg.indices)?;
    fieldfile::save(&out.path("u.smxf"), &[&sol.u])?;
    let res = residual(&sol.u, &f, None, cfg.indices.alpha).sup_norm();
    let u_sup = sol.u.sup_norm();
    out.csv(
        "pide_summary.csv",
        "u_sup: solution units; residual_sup: source units (finite-difference time derivative)",
        &["u_sup", "residual_sup"],
        &[vec![num(u_sup), num(res)]],
    )?;
    println!("drift-free solve: sup|u| = {u_sup:.6e}, residual sup = {res:.3e}");
    Ok((json!({"u_sup": u_sup, "residual_sup": res}), false))
}

fn pide_picard(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let s = &cfg.source;
    let f = gaussian_source(cfg.grid, s.amplitude, s.width, s.center[0], s.center[1]);
    let drift = cfg.drift.sample(cfg.grid);
    let sol = picard_solve(&f, &drift, &cfg.indices, cfg.picard)?;
    fieldfile::save(&out.path("u.smxf"), &[&sol.u])?;
    out.csv("picard_iterations.csv", ITERATE_UNITS, &ITERATE_HEADER, &iterate_rows("u", &sol.iterates))?;
    let max_ratio = sol.iterates.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let res = residual(&sol.u, &f, Some(&drift), cfg.indices.alpha).sup_norm();
    println!(
        "Picard: {} iterations, largest ratio {max_ratio:.4}, sup|u| = {:.6e}, residual sup = {res:.3e}",
        sol.iterates.len(),
        sol.u.sup_norm()
    );
    Ok((json!({"iterations": sol.iterates.len(), "max_ratio": max_ratio, "u_sup": sol.u.sup_norm(), "residual_sup": res}), false))
}

fn zvonkin_options(cfg: &ExperimentConfig) -> ZvonkinOptions {
    ZvonkinOptions { picard: cfg.picard, max_grad: cfg.zvonkin.max_grad, ..ZvonkinOptions::default() }
}

fn zvonkin_build(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let drift = cfg.drift.sample(cfg.grid);
    let map = build_zvonkin_map(&drift, &cfg.indices, zvonkin_options(cfg))?;
    let bl = check_bilipschitz(&map, cfg.zvonkin.bilip_pairs, &mut NoiseStream::new(cfg.seed, 0));
    fieldfile::save(&out.path("zvonkin_u.smxf"), &[&map.u[0], &map.u[1]])?;
    let mut rows = iterate_rows("U1", &map.iterates[0]);
    rows.extend(iterate_rows("U2", &map.iterates[1]));
    out.csv("zvonkin_iterates.csv", ITERATE_UNITS, &ITERATE_HEADER, &rows)?;
    let resid = backward_residual(&map, &drift);
    let summary = vec![
        num(map.grad_sup),
        num(bl.c_min),
        num(bl.c_max),
        bl.pairs.to_string(),
        num(map.terminal_norm()),
        num(resid),
    ];
    out.csv(
        "zvonkin_summary.csv",
        "grad_sup, c_min, c_max: dimensionless; pairs: count; terminal_sup, residual_sup: state units",
        &["grad_sup", "c_min", "c_max", "pairs", "terminal_sup", "residual_sup"],
        &[summary],
    )?;
    println!(
        "Zvonkin map: sup|grad U| = {:.4}, difference quotients in [{:.4}, {:.4}] over {} pairs",
        map.grad_sup, bl.c_min, bl.c_max, bl.pairs
    );
    let ok = bl.c_min >= 0.5 && bl.c_max <= 1.5;
    Ok((json!({"grad_sup": map.grad_sup, "c_min": bl.c_min, "c_max": bl.c_max, "residual_sup": resid}), !ok))
}

fn params(cfg: &ExperimentConfig) -> Result<StableParams<f64>> {
    Ok(StableParams::new(cfg.indices.alpha, 1)?)
}

fn sim_config(cfg: &ExperimentConfig) -> SimConfig<f64> {
    SimConfig { epsilon: cfg.sim.epsilon, ..SimConfig::new(cfg.sim.z0) }
}

fn preset_drift(p: DriftPreset) -> FnDrift<impl Fn(f64, [f64; 2]) -> [f64; 2] + Sync> {
    FnDrift(move |_: f64, z: [f64; 2]| {
        let (f, g) = p.value(z[0], z[1]);
        [f, g]
    })
}

fn sim_euler(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let noise = sample_driver_path(&params(cfg)?, 1, cfg.sim.horizon, cfg.sim.steps, &NoiseStream::new(cfg.seed, 0))?;
    let path = euler_maruyama(&preset_drift(cfg.drift), &sim_config(cfg), &noise)?;
    out.csv("path.csv", PATH_UNITS, &PATH_HEADER, &path_rows(&path))?;
    let last = path.states.last().cloned().unwrap_or_default();
    println!("Euler path: {} steps, Z_T = ({:.6}, {:.6})", path.n_steps(), last[0], last[1]);
    Ok((json!({"steps": path.n_steps(), "final": last, "large_jumps": path.large_jumps.len()}), false))
}

fn sim_transformed(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let drift = cfg.drift.sample(cfg.grid);
    let map = build_zvonkin_map(&drift, &cfg.indices, zvonkin_options(cfg))?;
    let noise =
        sample_driver_path(&params(cfg)?, 1, cfg.grid.t_end, cfg.sim.steps, &NoiseStream::new(cfg.seed, 0))?;
    let sc = sim_config(cfg);
    let direct = euler_maruyama(&drift, &sc, &noise)?;
    let transformed = simulate_transformed(&map, &sc, &noise)?;
    let gap = transform_discrepancy(&map, &direct, &transformed);
    out.csv("direct_path.csv", PATH_UNITS, &PATH_HEADER, &path_rows(&direct))?;
    out.csv("transformed_path.csv", PATH_UNITS, &PATH_HEADER, &path_rows(&transformed))?;
    out.csv(
        "transform_summary.csv",
        "steps: count; discrepancy: state units, sup over nodes of |Phi(Z) - Zhat|",
        &["steps", "discrepancy"],
        &[vec![cfg.sim.steps.to_string(), num(gap)]],
    )?;
    println!("sup_t |Phi_t(Z_t) - Zhat_t| = {gap:.6e} on {} steps", cfg.sim.steps);
    Ok((json!({"discrepancy": gap, "grad_sup": map.grad_sup}), false))
}

fn sim_uniqueness(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let drift = cfg.drift.sample(cfg.grid);
    let seeds: Vec<u64> = (0..cfg.sim.n_seeds as u64).map(|k| cfg.seed + k).collect();
    let rep = pathwise_uniqueness_experiment(
        &drift,
        &sim_config(cfg),
        &params(cfg)?,
        &cfg.sim.levels,
        cfg.sim.horizon,
        cfg.sim.steps,
        &seeds,
    )?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| vec![r.level.to_string(), r.next_level.to_string(), r.seed.to_string(), num(r.sup_distance)])
        .collect();
    out.csv(
        "uniqueness.csv",
        "level, next_level: mollification index; seed: RNG seed; sup_distance: state units",
        &["level", "next_level", "seed", "sup_distance"],
        &rows,
    )?;
    let mut summary = Vec::new();
    for i in 0..rep.mean_distance.len() {
        summary.push(vec![
            rep.levels[i].to_string(),
            rep.levels[i + 1].to_string(),
            num(rep.mean_distance[i]),
            rep.shrink.get(i).map(|&s| num(s)).unwrap_or_default(),
        ]);
    }
    out.csv(
        "uniqueness_summary.csv",
        "mean_distance: state units averaged over seeds; shrink: ratio to the next row",
        &["level", "next_level", "mean_distance", "shrink"],
        &summary,
    )?;
    for row in &summary {
        println!("levels {}->{}: mean sup distance {} shrink {}", row[0], row[1], row[2], row[3]);
    }
    let mut s = json!({"mean_distance": rep.mean_distance, "shrink": rep.shrink, "dt_refinement": rep.dt_refinement});
    if let DriftPreset::Holder { gamma, .. } = cfg.drift {
        let times: Vec<f64> = (0..=20).map(|k| cfg.sim.horizon * k as f64 / 20.0).collect();
        s["ode_branch_residual"] = json!(ode_branch_residual(gamma, &times));
    }
    Ok((s, false))
}

fn sim_kinetic(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let noise = sample_driver_path(&params(cfg)?, 1, cfg.sim.horizon, cfg.sim.steps, &NoiseStream::new(cfg.seed, 0))?;
    let p = cfg.drift;
    let k = kinetic_sde(move |_: f64, x: f64, v: f64| p.value(x, v).1, cfg.sim.epsilon, cfg.sim.z0, &noise)?;
    out.csv("kinetic_path.csv", PATH_UNITS, &PATH_HEADER, &path_rows(&k.path))?;
    let last = k.path.states.last().cloned().unwrap_or_default();
    println!("kinetic path: (X_T, V_T) = ({:.6}, {:.6}), degenerate = {}", last[0], last[1], k.degenerate);
    Ok((json!({"final": last, "degenerate": k.degenerate}), false))
}

fn mc_options(cfg: &ExperimentConfig) -> McOptions {
    McOptions::new(cfg.mc.n_samples, cfg.mc.n_steps, cfg.mc.horizon, cfg.seed)
}

fn report(out: &mut OutDir, rows: &[Vec<String>]) -> Result<()> {
    for r in rows {
        println!("{:<22} mean {:>14} stderr {:>12} bound {:>12} oracle {:>12} {}", r[0], r[1], r[2], r[5], r[6], r[8]);
    }
    out.csv("estimate.csv", ESTIMATE_UNITS, &ESTIMATE_HEADER, rows)
}

fn mc_krylov(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let e = krylov_driver(&cfg.mc.test_function, &cfg.indices, &mc_options(cfg))?;
    report(out, &[estimate_row("krylov", &e)])?;
    let agrees = e.oracle.map(|o| e.agrees_with(o)).unwrap_or(true);
    Ok((json!({"mean": e.mean, "stderr": e.stderr, "oracle": e.oracle, "verdict": e.verdict, "oracle_agrees": agrees}), !(e.verdict && agrees)))
}

fn khasminskii_starts(f: &TestFunction) -> Vec<[f64; 2]> {
    let c = match *f {
        TestFunction::Bump { center, .. } => center,
        TestFunction::Box { x, y, .. } => [(x[0] + x[1]) / 2.0, (y[0] + y[1]) / 2.0],
        TestFunction::Constant(_) => [0.0, 0.0],
    };
    vec![c, [c[0] + 0.25, c[1]], [c[0] - 0.25, c[1]], [c[0], c[1] + 0.25], [c[0], c[1] - 0.25]]
}

fn mc_khasminskii(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let opts = mc_options(cfg);
    let starts = khasminskii_starts(&cfg.mc.test_function);
    let (f, factor, c0) = scale_to_constant(&cfg.mc.test_function, &cfg.indices, &opts, &starts, cfg.mc.target_c)
        .context("measuring the Khasminskii constant")?;
    let e = khasminskii_exponential(&f, &cfg.indices, &opts, &starts)?
        .note(format!("f rescaled by {factor:.6} from measured c = {c0:.6}"));
    report(out, &[estimate_row("khasminskii", &e)])?;
    Ok((json!({"mean": e.mean, "stderr": e.stderr, "bound": e.bound_rhs, "scale": factor, "verdict": e.verdict}), !e.verdict))
}

fn mc_girsanov(cfg: &ExperimentConfig, out: &mut OutDir) -> Step {
    let p = cfg.drift;
    let g_only = FnDrift(move |_: f64, z: [f64; 2]| [0.0, p.value(z[0], z[1]).1]);
    let opts = mc_options(cfg);
    let f = &cfg.mc.test_function;
    let phi = girsanov_mean(&g_only, &cfg.indices, &opts)?
        .note("exponent pairs the Brownian-block drift G with dW; F is not reweighted");
    let weighted = weighted_krylov(f, &g_only, &cfg.indices, &opts)?;
    let direct_opts = McOptions { seed: cfg.seed.wrapping_add(0x9E37_79B9), ..opts };
    let direct = direct_euler_krylov(f, &g_only, &cfg.indices, &direct_opts)?;
    let weighted_exp = weighted_exponential(f, &g_only, &cfg.indices, &opts)?;
    let rows = vec![
        estimate_row("weight_mean", &phi),
        estimate_row("weighted_krylov", &weighted),
        estimate_row("direct_euler_krylov", &direct),
        estimate_row("weighted_exponential", &weighted_exp),
    ];
    report(out, &rows)?;
    let phi_ok = phi.agrees_with(1.0);
    let cross_ok = weighted.agrees_with_estimate(&direct);
    println!("E[phi] = 1 within 3 stderr: {phi_ok}; weighted vs direct within 3 combined stderr: {cross_ok}");
    Ok((
        json!({
            "weight_mean": phi.mean, "weight_stderr": phi.stderr, "weight_ok": phi_ok,
            "weighted": weighted.mean, "direct": direct.mean, "cross_ok": cross_ok,
            "weighted_verdict": weighted.verdict, "exponential_verdict": weighted_exp.verdict,
        }),
        !(phi_ok && cross_ok && weighted.verdict && weighted_exp.verdict),
    ))
}
