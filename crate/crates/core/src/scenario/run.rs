use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde_json::{json, Value};

use crate::analysis::{
    detect_monotone, elliptic_weak_residual, extinction_check, extract_steady_state, gronwall_extinction_bound,
    max_principle_bound, write_residuals_csv, LimitCoefficients, ResidualPair, TestFunction,
};
use crate::duhamel::{picard_solve, KernelConfig};
use crate::error::{Error, Result};
use crate::fdm::{solve, solve_cauchy_nested, write_diagnostics_csv, write_snapshots, write_trajectory_csv, Trajectory};
use crate::hypothesis::{check_all, CheckConfig, HypothesisReport, Status};
use crate::model::ProblemSpec;

use super::config::{ScenarioConfig, SteadyAnalysis};
use super::manifest::{list_files, sha256_hex, RunManifest, RunStatus, TagVerdict, Verdict};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides the sampling seed of the config.
    pub seed: Option<u64>,
    /// Directory against which table paths are resolved.
    pub base_dir: PathBuf,
    /// Progress lines on standard error.
    pub verbose: bool,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self { out_dir: out_dir.into(), seed: None, base_dir: PathBuf::new(), verbose: false }
    }
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    opts: &'a RunOptions,
    verdicts: Vec<TagVerdict>,
    conclusions: serde_json::Map<String, Value>,
    hypotheses_failed: bool,
}

impl Ctx<'_> {
    fn log(&self, msg: &str) {
        if self.opts.verbose {
            eprintln!("[{}] {msg}", self.cfg.name);
        }
    }

    /// Records a conclusion; a failure under failed hypotheses is inconclusive.
    fn conclude(&mut self, tag: &str, holds: bool, detail: String) {
        let verdict = match (holds, self.hypotheses_failed) {
            (true, _) => Verdict::Verified,
            (false, false) => Verdict::Violated,
            (false, true) => Verdict::Inconclusive,
        };
        self.log(&format!("{tag}: {verdict:?} ({detail})"));
        self.verdicts.push(TagVerdict { tag: tag.to_string(), verdict, detail });
    }

    fn inconclusive(&mut self, tag: &str, detail: String) {
        self.verdicts.push(TagVerdict { tag: tag.to_string(), verdict: Verdict::Inconclusive, detail });
    }

    fn record(&mut self, key: &str, value: Value) {
        self.conclusions.insert(key.to_string(), value);
    }
}

fn now() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Runs checks, solvers and analyses of one scenario and writes all outputs
/// plus `manifest.json` into `opts.out_dir`. Module failures are reported in
/// the manifest (status `error`); only an unusable output directory is an
/// `Err`.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunManifest> {
    let started_at = now();
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.checks.budget.seed = seed;
    }
    std::fs::create_dir_all(&opts.out_dir)?;
    let config_text = serde_json::to_string(&cfg).map_err(|e| Error::Io(e.to_string()))?;
    let mut ctx = Ctx {
        cfg: &cfg,
        opts,
        verdicts: Vec::new(),
        conclusions: serde_json::Map::new(),
        hypotheses_failed: false,
    };
    let outcome = execute(&mut ctx);
    let (status, error) = match outcome {
        Ok(()) => (RunStatus::Completed, None),
        Err(e) => {
            ctx.log(&format!("error: {e}"));
            (RunStatus::Error, Some(e.to_string()))
        }
    };
    let manifest = RunManifest {
        scenario: cfg.name.clone(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.checks.budget.seed,
        started_at,
        finished_at: now(),
        status,
        error,
        verdicts: ctx.verdicts,
        files: list_files(&opts.out_dir)?,
    };
    manifest.write(&opts.out_dir)?;
    Ok(manifest)
}

fn execute(ctx: &mut Ctx<'_>) -> Result<()> {
    let cfg = ctx.cfg;
    let out = ctx.opts.out_dir.clone();
    let base = ctx.opts.base_dir.clone();
    let spec = cfg.build_problem(&base, 0)?;

    let report = if cfg.checks.assumptions.is_empty() {
        None
    } else {
        ctx.log("checking hypotheses");
        let mut check = CheckConfig::new(cfg.checks.budget.clone(), cfg.checks.assumptions.clone());
        check.tolerances = cfg.checks.tolerances;
        check.exec = cfg.scheme.exec;
        let report = check_all(&spec, &check)?;
        let failed: Vec<&str> =
            report.entries.iter().filter(|e| e.status == Status::Fail).map(|e| e.assumption.as_str()).collect();
        ctx.hypotheses_failed = !failed.is_empty();
        let (verdict, detail) = if failed.is_empty() {
            (Verdict::Verified, format!("{} sampled checks passed", report.entries.len()))
        } else {
            (Verdict::Violated, format!("failed: {}", failed.join(", ")))
        };
        ctx.log(&format!("hypotheses: {verdict:?} ({detail})"));
        ctx.verdicts.push(TagVerdict { tag: "hypotheses".into(), verdict, detail });
        Some(report)
    };
    write_checks(&out, report.as_ref(), &ctx.conclusions)?;

    ctx.log("solving");
    let traj = if cfg.is_cauchy() {
        let tol = cfg.analysis.nested.as_ref().map_or(1e-6, |n| n.tol);
        let (traj, nested) = match solve_cauchy_nested(&spec, &cfg.scheme, tol) {
            Ok(v) => v,
            Err(Error::NonConvergence(msg)) => {
                ctx.conclude("nested_boxes", false, msg.clone());
                return Err(Error::NonConvergence(msg));
            }
            Err(e) => return Err(e),
        };
        let d = &nested.differences;
        let decreasing = d.windows(2).all(|w| w[1] < w[0]) || d.iter().all(|v| *v == 0.0);
        let last = d.last().copied().unwrap_or(0.0);
        ctx.record("nested", to_value(&nested));
        ctx.conclude(
            "nested_boxes",
            decreasing && last <= tol,
            format!("differences {d:?}, tolerance {tol:e}"),
        );
        traj
    } else {
        solve(&spec, &cfg.scheme)?
    };
    ctx.record(
        "run",
        json!({
            "steps": traj.steps(),
            "final_time": traj.final_time(),
            "steady_at": traj.steady_at,
            "positivity_dt_bound": traj.positivity_dt_bound,
            "within_positivity_bound": traj.within_positivity_bound(),
            "max_negpart": traj.max_negpart(),
            "max_sup_norm": traj.max_sup_norm(),
        }),
    );

    if cfg.outputs.trajectory {
        write_trajectory_csv(&out.join("trajectory.csv"), &traj.times, &traj.snapshots)?;
    }
    if cfg.outputs.diagnostics {
        write_diagnostics_csv(&out.join("diagnostics.csv"), &traj)?;
    }
    if cfg.outputs.snapshots {
        write_snapshots(&out.join("snapshots"), &traj)?;
    }

    conclusions(ctx, &spec, &traj, report.as_ref())?;
    write_checks(&out, report.as_ref(), &ctx.conclusions)
}

fn write_checks(out: &Path, report: Option<&HypothesisReport>, conclusions: &serde_json::Map<String, Value>) -> Result<()> {
    let doc = json!({
        "hypotheses": report.map(to_value),
        "conclusions": conclusions,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(out.join("checks.json"), text + "\n")?;
    Ok(())
}

fn conclusions(ctx: &mut Ctx<'_>, spec: &ProblemSpec, traj: &Trajectory, report: Option<&HypothesisReport>) -> Result<()> {
    let cfg = ctx.cfg;
    let a = &cfg.analysis;
    let base = ctx.opts.base_dir.clone();

    if let Some(p) = &a.positivity {
        let mut worst: f64 = 0.0;
        for d in &traj.diagnostics {
            worst = worst.max(d.negpart_norm / (1.0 + d.sup_norm));
        }
        ctx.record("positivity", json!({ "worst_relative_negpart": worst, "tol": p.tol }));
        ctx.conclude("positivity", worst <= p.tol, format!("relative negative part {worst:e} vs {:e}", p.tol));
    }

    if let Some(mb) = &a.max_bound {
        let constants = report.map(|r| (r.constants.d1, r.constants.d2));
        match constants {
            Some((Some(d1), Some(d2))) => {
                let m = max_principle_bound(d1, d2, traj.final_time(), spec.initial().sup_norm())?;
                let sup = traj.max_sup_norm();
                ctx.record("max_bound", json!({ "d1": d1, "d2": d2, "bound": m, "sup_norm": sup }));
                ctx.conclude("max_principle_bound", sup <= m + mb.slack, format!("sup {sup:.6e} vs bound {m:.6e}"));
            }
            _ => ctx.inconclusive("max_principle_bound", "no dissipativity estimate; request A2' in checks".into()),
        }
    }

    if let Some(ex) = &a.extinction {
        let lv = cfg.lv(&base)?;
        let grid = traj.grid();
        let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
        let k = ex.component;
        match gronwall_extinction_bound(spec.initial().max_value(k).max(0.0), lv.growth(k), &points) {
            Ok(b) => {
                let worst = traj.snapshots.iter().map(|f| f.max_value(k)).fold(f64::NEG_INFINITY, f64::max);
                ctx.record("gronwall", json!({ "bound": b, "sup": worst }));
                ctx.conclude("gronwall_bound", worst <= b + ex.slack, format!("sup {worst:.6e} vs bound {b:.6e}"));
            }
            Err(Error::Integrability(msg)) => ctx.inconclusive("gronwall_bound", msg),
            Err(e) => return Err(e),
        }
        let r = extinction_check(traj, k, ex.tol, ex.window_fraction)?;
        ctx.record("extinction", to_value(&r));
        ctx.conclude(
            "extinction",
            r.extinct,
            format!("final sup {:.3e} vs {:e}, decreasing tail: {}", r.final_sup, ex.tol, r.decreasing),
        );
    }

    let mut monotone = Vec::new();
    for m in &a.monotone {
        monotone.push(detect_monotone(traj, m.component, m.sign)?);
    }
    if !monotone.is_empty() {
        let pass = monotone.iter().all(|r| r.pass);
        let detail = monotone
            .iter()
            .map(|r| format!("u{}: margin {:.3e}", r.component, r.worst_margin))
            .collect::<Vec<_>>()
            .join(", ");
        ctx.record("monotone", to_value(&monotone));
        ctx.conclude("monotone_convergence", pass, detail);
    }

    if let Some(st) = &a.steady {
        steady(ctx, st, traj, monotone)?;
    }

    if let Some(or) = &a.oracle {
        ctx.log("running kernel oracle");
        let kcfg = KernelConfig { exec: cfg.scheme.exec, ..KernelConfig::for_spec(spec)? };
        let sol = match picard_solve(spec, &kcfg, cfg.scheme.dt) {
            Ok(s) => s,
            Err(Error::NonContraction(msg)) => {
                ctx.conclude("kernel_oracle", false, msg);
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let (tf, fdm_state) = traj.snapshot_near(or.compare_at);
        let (tp, pic_state) = sol.state_near(or.compare_at);
        if (tf - or.compare_at).abs() > 1e-9 || (tp - or.compare_at).abs() > 1e-9 {
            return Err(Error::spec(format!("no stored state at t = {} (fdm {tf}, kernel {tp})", or.compare_at)));
        }
        let rel = fdm_state.max_abs_diff(pic_state) / pic_state.sup_norm().max(f64::MIN_POSITIVE);
        let h = traj.grid().spacing().iter().copied().fold(0.0, f64::max);
        let allowed = or.floor.max(or.constant * (h * h + cfg.scheme.dt));
        let ratios = sol.contraction_ratios(or.burn_in, 1e-13);
        let worst_ratio = ratios.iter().copied().fold(0.0, f64::max);
        write_trajectory_csv(&ctx.opts.out_dir.join("trajectory_duhamel.csv"), &sol.times, &sol.states)?;
        ctx.record(
            "oracle",
            json!({
                "relative_difference": rel,
                "allowed": allowed,
                "worst_contraction_ratio": worst_ratio,
                "iterations": sol.iterations,
                "converged": sol.converged,
                "window_length": sol.window_length,
            }),
        );
        ctx.conclude(
            "kernel_oracle",
            rel <= allowed && worst_ratio < 1.0 && sol.converged,
            format!("relative difference {rel:.3e} vs {allowed:.3e}, worst ratio {worst_ratio:.3}"),
        );
    }
    Ok(())
}

fn limits_for(cfg: &ScenarioConfig, st: &SteadyAnalysis, base: &Path) -> Result<LimitCoefficients> {
    match st.limits {
        Some(l) => Ok(LimitCoefficients::constant(l)),
        None => LimitCoefficients::from_lv(&cfg.lv(base)?),
    }
}

fn steady(
    ctx: &mut Ctx<'_>,
    st: &SteadyAnalysis,
    traj: &Trajectory,
    monotone: Vec<crate::analysis::MonotoneReport>,
) -> Result<()> {
    let cfg = ctx.cfg;
    let base = ctx.opts.base_dir.clone();
    let mut report = extract_steady_state(traj, st.window_fraction, st.steady_tol)?;
    let limits = limits_for(cfg, st, &base)?;
    let d = cfg.lv(&base)?.diffusion().to_vec();
    let tests = TestFunction::battery(traj.grid().domain())?;
    report.residuals = elliptic_weak_residual(&report.state, d[0], d[1], &limits, &tests, cfg.scheme.exec)?;
    report.monotonicity = monotone;
    ctx.conclude(
        "steady_state",
        report.converged(),
        format!("tail slope {:.3e} over window {:.3} at t = {}", report.tail_slope, report.window, report.final_time),
    );
    write_residuals_csv(&ctx.opts.out_dir.join("residuals.csv"), &report.residuals)?;
    std::fs::write(ctx.opts.out_dir.join("steady_state.json"), report.to_json()? + "\n")?;

    let worst = report.residuals.iter().map(|r| r.r1.abs().max(r.r2.abs())).fold(0.0, f64::max);
    let mut levels: Vec<Vec<ResidualPair>> = vec![report.residuals.clone()];
    for level in 1..=st.refinements as u32 {
        ctx.log(&format!("residual refinement level {level}"));
        let spec = cfg.build_problem(&base, level)?;
        let scheme = cfg.scheme.clone().with_dt(cfg.scheme.dt / f64::from(1u32 << level));
        let fine = solve(&spec, &scheme)?;
        let fine_report = extract_steady_state(&fine, st.window_fraction, st.steady_tol)?;
        levels.push(elliptic_weak_residual(&fine_report.state, d[0], d[1], &limits, &tests, cfg.scheme.exec)?);
    }
    let decreasing = levels.windows(2).all(|w| {
        w[0].iter().zip(&w[1]).all(|(a, b)| b.r1.abs() < a.r1.abs() && b.r2.abs() < a.r2.abs())
    });
    let magnitudes: Vec<Vec<[f64; 2]>> =
        levels.iter().map(|l| l.iter().map(|r| [r.r1.abs(), r.r2.abs()]).collect()).collect();
    ctx.record("residual_levels", to_value(&magnitudes));
    ctx.conclude(
        "weak_residual",
        worst <= st.residual_tol && decreasing,
        format!(
            "worst residual {worst:.3e} vs {:e}, decreasing over {} halvings: {decreasing}",
            st.residual_tol, st.refinements
        ),
    );
    Ok(())
}
