//! Command pipelines.  Each writes its artifacts into the output directory
//! through atomic renames; on a numerical failure everything written by the
//! failed invocation is removed again.

use std::path::{Path, PathBuf};

use critwave_core::export;
use critwave_core::functional::{fit_frame_constants, functional_sample, identity_residual};
use critwave_core::iteration::{blowup_onset, OnsetConstants};
use critwave_core::modulus::iterated_log;
use critwave_core::radial_wave::{solve_leapfrog, Forcing, SolutionField};
use critwave_core::testfunc::TestFunctionParams;
use serde_json::json;

use crate::config::{Command, ExperimentConfig, ForcingConfig};
use crate::verify;

pub enum Failure {
    /// Environment or configuration problem surfacing after parse (exit 1).
    Config(String),
    /// The pipeline itself failed (exit 2).
    Numerical(String),
}

impl From<critwave_core::Error> for Failure {
    fn from(e: critwave_core::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

/// Files written by one invocation, removed together if it fails.
struct ArtifactSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactSet {
    fn new(dir: &Path) -> Self {
        ArtifactSet {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        export::write_atomic(&path, contents)
            .map_err(|e| Failure::Numerical(format!("writing {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    fn discard(&self) {
        for path in &self.written {
            let _ = std::fs::remove_file(path);
        }
    }
}

/// Exit status of a completed run: 0, or 2 when the verify suite reports
/// failing checks (their summary is still a complete artifact and is kept).
pub fn execute(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32, Failure> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Failure::Config(format!("cannot create output directory {}: {e}", out_dir.display())))?;
    let mut artifacts = ArtifactSet::new(out_dir);
    let outcome = match cfg.command {
        Command::Classify => run_classify(cfg, &mut artifacts),
        Command::Solve => run_solve(cfg, &mut artifacts),
        Command::Functional => run_functional(cfg, &mut artifacts),
        Command::Iterate => run_iterate(cfg, &mut artifacts),
        Command::Verify => return run_verify(&mut artifacts),
    };
    match outcome {
        Ok(()) => Ok(0),
        Err(f) => {
            artifacts.discard();
            Err(f)
        }
    }
}

fn run_classify(cfg: &ExperimentConfig, artifacts: &mut ArtifactSet) -> Result<(), Failure> {
    let spec = &cfg.modulus;
    let lambda0 = (-2f64).exp().min(spec.lambda_max());
    let floors = [(-25f64).exp(), (-50f64).exp(), (-100f64).exp()];
    let report = spec.critical_integral(lambda0, &floors)?;
    let c_str = spec.c_str_index();
    let probes = [(-20f64).exp(), (-40f64).exp(), (-80f64).exp(), (-160f64).exp()];
    let decay = spec.decay_predicates(&probes)?;
    artifacts.write("classify.json", &export::classify_json(&report, &c_str, Some(&decay)))
}

fn solve_field(cfg: &ExperimentConfig) -> Result<SolutionField, Failure> {
    let data = cfg.initial_data()?;
    let grid = cfg.characteristic_grid()?;
    let forcing = match cfg.forcing {
        ForcingConfig::Critical => Forcing::Critical(&cfg.modulus),
        ForcingConfig::None => Forcing::None,
    };
    Ok(solve_leapfrog(&data, &grid, forcing, cfg.grid.u_max)?)
}

fn run_solve(cfg: &ExperimentConfig, artifacts: &mut ArtifactSet) -> Result<(), Failure> {
    let sol = solve_field(cfg)?;
    let label = export::modulus_hash(&cfg.modulus);
    artifacts.write("solution.csv", &export::solution_csv(&sol, &label))?;
    if let Some(event) = &sol.blowup {
        artifacts.write("blowup.json", &export::blowup_json(event))?;
    }
    Ok(())
}

fn test_params(cfg: &ExperimentConfig) -> Result<TestFunctionParams, Failure> {
    Ok(TestFunctionParams::new(cfg.testfunc.k)?.with_quad_tol(cfg.testfunc.quad_tol))
}

/// Grid-aligned sample times, every max(0.5, 8h) up to the stored horizon.
fn sample_rows(sol: &SolutionField) -> Vec<usize> {
    let step = ((0.5 / sol.h).round() as usize).max(8);
    (step..sol.n_t()).step_by(step).collect()
}

fn run_functional(cfg: &ExperimentConfig, artifacts: &mut ArtifactSet) -> Result<(), Failure> {
    let sol = solve_field(cfg)?;
    let params = test_params(cfg)?;
    let data = cfg.initial_data()?;
    let spec = &cfg.modulus;
    let mut rows = Vec::new();
    let mut residual_rows = Vec::new();
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for i in sample_rows(&sol) {
        let t = sol.t_of(i);
        let sample = functional_sample(&sol, &params, spec, t)?;
        let res = identity_residual(&sol, &params, spec, &data, t)?;
        let rel = if res.lhs != 0.0 {
            (res.residual / res.lhs).abs()
        } else {
            res.residual.abs()
        };
        max_abs = max_abs.max(res.residual.abs());
        max_rel = max_rel.max(rel);
        residual_rows.push(json!({
            "t": res.t,
            "lhs": res.lhs,
            "data_term": res.data_term,
            "duhamel_term": res.duhamel_term,
            "residual": res.residual,
            "relative": rel,
        }));
        rows.push((sample, res.residual));
    }
    if rows.is_empty() {
        return Err(Failure::Numerical(
            "no sample time fits inside the computed horizon".to_string(),
        ));
    }
    let label = export::modulus_hash(spec);
    artifacts.write("functional.csv", &export::functional_csv(&rows, &label))?;
    let report = json!({
        "rows": residual_rows,
        "max_abs_residual": max_abs,
        "max_rel_residual": max_rel,
    })
    .to_string();
    artifacts.write("residuals.json", &report)
}

fn run_iterate(cfg: &ExperimentConfig, artifacts: &mut ArtifactSet) -> Result<(), Failure> {
    let sol = solve_field(cfg)?;
    let params = test_params(cfg)?;
    let spec = &cfg.modulus;
    let k = params.k;
    let horizon = sol.t_of(sol.n_t() - 1);
    let t_grid: Vec<f64> = [0.5, 0.75, 1.0]
        .iter()
        .map(|f| {
            let i = ((f * horizon) / sol.h).round() as usize;
            sol.t_of(i.min(sol.n_t() - 1))
        })
        .filter(|&t| iterated_log(k + 1, t).map(|v| v > 0.0).unwrap_or(false))
        .collect();
    if t_grid.is_empty() {
        return Err(Failure::Numerical(format!(
            "horizon {horizon} too short: the depth-{k} onset needs log^{} t > 0",
            k + 1
        )));
    }
    let fit = fit_frame_constants(&sol, &params, spec, &t_grid)?;
    let t_0 = if fit.t_0.is_finite() { fit.t_0 } else { t_grid[0] };
    let constants = OnsetConstants::with_unit_factors(fit.b_k, fit.c_k, t_0);
    let estimate = blowup_onset(&constants, spec)?;
    artifacts.write("estimate.json", &export::estimate_json(&estimate))
}

fn run_verify(artifacts: &mut ArtifactSet) -> Result<i32, Failure> {
    let checks = verify::run_suite();
    let failed = checks.iter().filter(|c| !c.pass).count();
    let rows: Vec<_> = checks
        .iter()
        .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
        .collect();
    let summary = json!({
        "checks": rows,
        "passed": checks.len() - failed,
        "failed": failed,
    })
    .to_string();
    match artifacts.write("verify.json", &summary) {
        Ok(()) => Ok(if failed == 0 { 0 } else { 2 }),
        Err(f) => {
            artifacts.discard();
            Err(f)
        }
    }
}
