//! Executes a scenario: integration, CSV tables, checks and `report.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lieevolve::closed_forms::{
    guedes_solution, ClassicalLinearPotential, MassLinearPotential, OracleSpec,
};
use lieevolve::curve::{CoefficientSource, ScalarCurve};
use lieevolve::grid_oracle::{compare, propagate_system, GridState};
use lieevolve::lie_core::{builtin_algebra, MatrixRep};
use lieevolve::linalg::Mat;
use lieevolve::quantum_gaussian::{
    ehrenfest_residual, evolve, expectations, jacobi_from_wn, GaussianState,
};
use lieevolve::reduction::{oscillator_solve, projected_equation_residual, sl2_reduce};
use lieevolve::scalar::linspace;
use lieevolve::wei_norman::{
    group_equation_residual, integrate, GroupRealization, IntegrateOptions, Ordering,
};
use lieevolve::Solution;
use serde::Serialize;

use crate::scenario::{Check, Resolved, Scenario, SchemaError, SCHEMA_VERSION};

/// Number of interior probe times used by the pointwise checks.
pub const PROBES: usize = 20;
/// Step of the central differences in the residual checks.
const FD_STEP: f64 = 1e-4;
/// Printed formulas that disagree with an independent evaluation by more
/// than this are listed as discrepancies.
const DISCREPANCY_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Output directory for this scenario.
    pub out: PathBuf,
    /// Overrides the integrator tolerance.
    pub tol: Option<f64>,
    /// Adds the grid comparison for quantum scenarios.
    pub grid_check: bool,
}

#[derive(Debug)]
pub enum RunError {
    Schema(SchemaError),
    Numerical(String),
    Io(String),
}

impl RunError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Numerical(_) | RunError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Schema(e) => write!(f, "invalid scenario: {e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<SchemaError> for RunError {
    fn from(e: SchemaError) -> Self {
        RunError::Schema(e)
    }
}

impl From<lieevolve::Error> for RunError {
    fn from(e: lieevolve::Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub rtol: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub restarts: usize,
    pub max_condition: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Largest error measured by the check.
    pub max: f64,
    pub tolerance: f64,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Discrepancy {
    pub name: String,
    pub description: String,
    pub max_difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub title: String,
    pub passed: bool,
    pub solver: SolverReport,
    pub checks: Vec<CheckReport>,
    pub oracle_max_error: Option<f64>,
    pub discrepancies: Vec<Discrepancy>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

/// Interior times `t₀ + (k + ½)(t₁ - t₀)/n`, `k = 0..n`.
pub fn probe_times(span: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| span.0 + (k as f64 + 0.5) * (span.1 - span.0) / n as f64)
        .collect()
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), RunError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_f64(x)))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn check(name: Check, max: f64, tolerance: f64, details: serde_json::Value) -> CheckReport {
    CheckReport {
        name: name.name().to_string(),
        passed: max.is_finite() && max < tolerance,
        max,
        tolerance,
        details,
    }
}

/// Context shared by the checks of one run.
struct Run<'a> {
    scenario: &'a Scenario,
    resolved: Resolved,
    sol: Solution,
    span: (f64, f64),
    warnings: Vec<String>,
    discrepancies: Vec<Discrepancy>,
}

/// Runs a scenario and writes its artifacts into `opts.out`.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Report, RunError> {
    scenario.validate()?;
    let resolved = scenario.resolve()?;
    let rtol = opts.tol.unwrap_or(scenario.tolerances.integrator);
    if !(rtol > 0.0 && rtol.is_finite()) {
        return Err(SchemaError::new("--tol", format!("must be positive, got {rtol}")).into());
    }
    let span = (scenario.span[0], scenario.span[1]);
    let source = resolved.curve.clone().into_source();
    let sol = integrate(
        &resolved.algebra,
        &resolved.ordering,
        source,
        span,
        &IntegrateOptions::with_tol(rtol),
    )?;
    let diag = sol.diagnostics();
    let solver = SolverReport {
        rtol,
        accepted_steps: diag.steps.accepted,
        rejected_steps: diag.steps.rejected,
        rhs_evaluations: diag.steps.rhs_evals,
        restarts: diag.restarts,
        max_condition: diag.max_condition,
    };
    let mut run = Run {
        scenario,
        resolved,
        sol,
        span,
        warnings: Vec::new(),
        discrepancies: Vec::new(),
    };
    if diag.restarts > 0 {
        run.warnings.push(format!(
            "{} chart restart(s); v.csv holds segment-local coordinates",
            diag.restarts
        ));
    }

    fs::create_dir_all(&opts.out).map_err(|e| io_err(&opts.out, e))?;
    let times = linspace(span.0, span.1, scenario.samples);
    let mut files = Vec::new();
    run.write_v(&opts.out.join("v.csv"), &times)?;
    files.push("v.csv".to_string());
    if run.write_group(&opts.out.join("group.csv"), &times)? {
        files.push("group.csv".to_string());
    }
    if scenario.is_quantum() {
        run.write_quantum(&opts.out.join("quantum.csv"), &times)?;
        files.push("quantum.csv".to_string());
    }

    let mut requested = scenario.checks.clone();
    if opts.grid_check && scenario.is_quantum() && !requested.contains(&Check::GridCompare) {
        requested.push(Check::GridCompare);
    }
    let mut checks = Vec::new();
    let mut oracle_max_error = None;
    for c in requested {
        let report = match c {
            Check::Residual => run.residual_check()?,
            Check::OracleCompare => {
                let r = run.oracle_check()?;
                oracle_max_error = Some(r.max);
                r
            }
            Check::Ehrenfest => run.ehrenfest_check()?,
            Check::GridCompare => run.grid_check()?,
            Check::Reduction => run.reduction_check()?,
        };
        checks.push(report);
    }
    run.log_discrepancies()?;

    let report = Report {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.id.clone(),
        title: scenario.title.clone(),
        passed: checks.iter().all(|c| c.passed),
        solver,
        checks,
        oracle_max_error,
        discrepancies: run.discrepancies,
        warnings: run.warnings,
        files: {
            files.push("report.json".to_string());
            files
        },
    };
    let path = opts.out.join("report.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| io_err(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
    Ok(report)
}

impl Run<'_> {
    fn initial_state(&self) -> Result<GaussianState<f64>, RunError> {
        Ok(self.scenario.initial_state.unwrap_or_default().state()?)
    }

    fn write_v(&self, path: &Path, times: &[f64]) -> Result<(), RunError> {
        let r = self.resolved.algebra.dim();
        let mut header = vec!["t".to_string()];
        header.extend((1..=r).map(|k| format!("v{k}")));
        let mut rows = Vec::with_capacity(times.len());
        for &t in times {
            let mut row = vec![t];
            row.extend(self.sol.v(t)?);
            rows.push(row);
        }
        write_csv(path, &header, &rows)
    }

    fn write_group(&mut self, path: &Path, times: &[f64]) -> Result<bool, RunError> {
        let Some(rep) = &self.resolved.rep else {
            self.warnings.push(
                "no matrix representation for an inline algebra; group.csv not written".into(),
            );
            return Ok(false);
        };
        let n = rep.size();
        let mut header = vec!["t".to_string()];
        for i in 1..=n {
            header.extend((1..=n).map(|j| format!("g{i}{j}")));
        }
        let mut rows = Vec::with_capacity(times.len());
        for &t in times {
            let g = self.sol.reconstruct(rep, t)?;
            let mut row = vec![t];
            row.extend_from_slice(g.as_slice());
            rows.push(row);
        }
        write_csv(path, &header, &rows)?;
        Ok(true)
    }

    fn write_quantum(&self, path: &Path, times: &[f64]) -> Result<(), RunError> {
        let psi0 = self.initial_state()?;
        let header: Vec<String> = [
            "t", "x", "p", "var_x", "var_p", "norm", "re_a", "im_a", "re_b", "im_b", "re_c", "im_c",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let mut rows = Vec::with_capacity(times.len());
        for &t in times {
            let psi = evolve(&psi0, &self.sol, t)?;
            let m = expectations(&psi)?;
            rows.push(vec![
                t, m.x, m.p, m.var_x, m.var_p, m.norm, psi.a.re, psi.a.im, psi.b.re, psi.b.im,
                psi.c.re, psi.c.im,
            ]);
        }
        write_csv(path, &header, &rows)
    }

    fn residual_check(&self) -> Result<CheckReport, RunError> {
        let tol = self.scenario.tolerances.residual;
        let Some(rep) = &self.resolved.rep else {
            return Err(
                SchemaError::new("checks", "the residual check needs a catalog algebra").into(),
            );
        };
        let mut max: f64 = 0.0;
        let mut worst_t = self.span.0;
        for t in probe_times(self.span, PROBES) {
            let r = group_equation_residual(&self.sol, rep, t, FD_STEP)?;
            if r > max || r.is_nan() {
                max = r;
                worst_t = t;
            }
        }
        Ok(check(
            Check::Residual,
            max,
            tol,
            serde_json::json!({ "probes": PROBES, "worst_t": worst_t, "fd_step": FD_STEP }),
        ))
    }

    /// Oracle group element from single-chart coordinates.
    fn chart_element(
        rep: &MatrixRep<f64>,
        ordering: &Ordering,
        v: &[f64],
    ) -> Result<Mat<f64>, RunError> {
        let mut g = rep.identity();
        for &alpha in ordering.perm() {
            g = rep.compose(&g, &rep.factor(alpha, v[alpha])?);
        }
        Ok(g)
    }

    fn oracle_check(&mut self) -> Result<CheckReport, RunError> {
        let tol = self.scenario.tolerances.oracle;
        let spec = self
            .scenario
            .oracle
            .as_ref()
            .expect("validated: oracle present");
        let oracle = spec.build(self.span.1)?;
        let (lo, hi) = oracle.domain;
        if hi < self.span.1 {
            self.warnings.push(format!(
                "oracle `{}` compared on [{lo}, {hi}] only (validity domain)",
                oracle.id
            ));
        }
        let single_chart = self.sol.diagnostics().restarts == 0;
        if !single_chart {
            self.warnings.push(
                "chart restarts: the oracle is compared through the group representation".into(),
            );
        }
        let times: Vec<f64> = linspace(self.span.0, self.span.1, self.scenario.samples)
            .into_iter()
            .filter(|&t| t >= lo && t <= hi)
            .collect();
        let mut max: f64 = 0.0;
        let mut per_component = vec![0.0_f64; self.resolved.algebra.dim()];
        for &t in &times {
            let exact = oracle.eval(t)?;
            if single_chart {
                let v = self.sol.v(t)?;
                for (k, (a, b)) in v.iter().zip(&exact).enumerate() {
                    let e = (a - b).abs();
                    per_component[k] = per_component[k].max(e);
                    max = max.max(e);
                }
            } else {
                let rep = self.resolved.rep.as_ref().ok_or_else(|| {
                    RunError::Numerical(
                        "chart restarts and no representation to compare through".into(),
                    )
                })?;
                let g = self.sol.reconstruct(rep, t)?;
                let g_exact = Self::chart_element(rep, &self.resolved.ordering, &exact)?;
                max = max.max((&g - &g_exact).max_abs());
            }
        }
        Ok(check(
            Check::OracleCompare,
            max,
            tol,
            serde_json::json!({
                "oracle": oracle.id,
                "method": oracle.note,
                "domain": [lo, hi],
                "samples": times.len(),
                "compared": if single_chart { "coordinates" } else { "group elements" },
                "max_per_component": if single_chart { Some(per_component) } else { None },
            }),
        ))
    }

    fn ehrenfest_check(&self) -> Result<CheckReport, RunError> {
        let tol = self.scenario.tolerances.ehrenfest;
        let psi0 = self.initial_state()?;
        let (mut mx, mut mp) = (0.0_f64, 0.0_f64);
        for t in probe_times(self.span, PROBES) {
            let (rx, rp) = ehrenfest_residual(&psi0, &self.sol, t, FD_STEP)?;
            mx = mx.max(rx);
            mp = mp.max(rp);
        }
        Ok(check(
            Check::Ehrenfest,
            mx.max(mp),
            tol,
            serde_json::json!({ "probes": PROBES, "max_x": mx, "max_p": mp, "fd_step": FD_STEP }),
        ))
    }

    fn grid_check(&mut self) -> Result<CheckReport, RunError> {
        let tol = &self.scenario.tolerances;
        let cfg = self.scenario.grid.unwrap_or_default();
        let t1 = cfg.t.unwrap_or(self.span.1);
        let opts = cfg.options();
        let psi0 = self.initial_state()?;
        let start = GridState::from_gaussian(&psi0, &opts, self.span.0)?;
        let source = self.resolved.curve.clone();
        let prop = propagate_system(&start, self.resolved.algebra.name(), &source, t1, opts.dt)?;
        self.warnings.extend(prop.warnings.iter().cloned());
        let analytic = evolve(&psi0, &self.sol, t1)?;
        let cmp = compare(&prop.state, &analytic)?;
        let passed = cmp.phase_insensitive < tol.grid && cmp.full < tol.grid_phase;
        Ok(CheckReport {
            name: Check::GridCompare.name().to_string(),
            passed,
            max: cmp.phase_insensitive,
            tolerance: tol.grid,
            details: serde_json::json!({
                "t": t1,
                "points": opts.points,
                "domain": [opts.x_min, opts.x_max],
                "dt": opts.dt,
                "steps": prop.steps,
                "phase_insensitive": cmp.phase_insensitive,
                "full": cmp.full,
                "full_tolerance": tol.grid_phase,
                "mass_outside": cmp.mass_outside,
                "norm_drift": prop.norm_drift,
                "max_edge_amplitude": prop.max_edge_amplitude,
            }),
        })
    }

    fn reduction_check(&mut self) -> Result<CheckReport, RunError> {
        let tol = self.scenario.tolerances.reduction;
        let cfg = self
            .scenario
            .reduction
            .as_ref()
            .expect("validated: reduction present");
        let osc = Arc::new(oscillator_solve(&cfg.omega, self.span)?);
        let red = sl2_reduce(osc)?;
        let (lo, hi) = red.interval();
        let hi = hi.min(self.span.1);
        if hi < self.span.1 {
            self.warnings.push(format!(
                "reduction evaluated on [{lo}, {hi}] (before the first zero of the oscillator solution)"
            ));
        }
        let sys = red.system();
        let mut coefficient_mismatch: f64 = 0.0;
        let mut curve_error: f64 = 0.0;
        let mut projected: f64 = 0.0;
        let mut reconstruction: f64 = 0.0;
        let sl2 = builtin_algebra::<f64>("sl2")?
            .rep
            .expect("sl2 has a representation");
        for t in probe_times((lo, hi), PROBES) {
            let b = self.resolved.curve.eval(t)?;
            let expected = sys.eval(t)?;
            for k in 0..3 {
                coefficient_mismatch = coefficient_mismatch.max((b[k] - expected[k]).abs());
            }
            let a = red.reduced_curve(t)?;
            let c = red.reduced_coefficient(t)?;
            curve_error = curve_error
                .max((a.coords[0] + c).abs())
                .max(a.coords[1].abs())
                .max(a.coords[2].abs());
            projected = projected.max(projected_equation_residual(
                red.gauge().as_ref(),
                sys.as_ref(),
                t,
            )?);
            let g = red.reconstruct(t)?;
            let direct = match self.resolved.algebra.name() {
                "quadratic6" => jacobi_from_wn(&self.sol, t)?.s,
                _ => self.sol.reconstruct(&sl2, t)?,
            };
            reconstruction = reconstruction.max((&g - &direct).max_abs());
        }
        if coefficient_mismatch > tol {
            return Err(SchemaError::new(
                "reduction.omega",
                format!("b1..b3 differ from (1, 0, omega^2) by {coefficient_mismatch:.3e}"),
            )
            .into());
        }
        let max = curve_error.max(projected).max(reconstruction);
        Ok(check(
            Check::Reduction,
            max,
            tol,
            serde_json::json!({
                "interval": [lo, hi],
                "probes": PROBES,
                "reduced_curve": curve_error,
                "projected_equation": projected,
                "reconstruction": reconstruction,
            }),
        ))
    }

    /// Compares printed formulas with independent evaluations and records
    /// disagreements.
    fn log_discrepancies(&mut self) -> Result<(), RunError> {
        let Some(spec) = &self.scenario.oracle else {
            return Ok(());
        };
        match spec {
            OracleSpec::ClassicalLinear { m, f } => {
                let o = ClassicalLinearPotential::new(*m, f, self.span.1)?;
                let rep = self
                    .resolved
                    .rep
                    .as_ref()
                    .expect("heisenberg3 has a representation");
                let (x0, p0) = (0.7, -0.4);
                let (_, i2_start) = o.printed_constants(x0, p0, 0.0)?;
                let mut max: f64 = 0.0;
                for t in probe_times(self.span, PROBES) {
                    let g = self.sol.reconstruct(rep, t)?;
                    let z = g.mul_vec(&[x0, p0, 1.0]);
                    let (_, i2) = o.printed_constants(z[0], z[1], t)?;
                    max = max.max((i2 - i2_start).abs());
                }
                if max > DISCREPANCY_THRESHOLD {
                    self.discrepancies.push(Discrepancy {
                        name: "classical-linear-second-constant".into(),
                        description:
                            "the printed second constant of motion drifts along trajectories; \
                                      x - (t/m)(p + F) + FF/m is conserved instead"
                                .into(),
                        max_difference: max,
                    });
                }
            }
            OracleSpec::Guedes {
                m,
                q,
                eps0,
                eps,
                omega,
            } => {
                let mass = ScalarCurve::constant(*m);
                let s = ScalarCurve::CosineAffine {
                    q: *q,
                    eps0: *eps0,
                    eps: *eps,
                    omega: *omega,
                };
                let quad = MassLinearPotential::new(&mass, &s, self.span.1)?;
                let mut max: f64 = 0.0;
                for t in probe_times(self.span, PROBES) {
                    let closed = guedes_solution(*m, *q, *eps0, *eps, *omega, t)?;
                    let nested = quad.eval(t)?;
                    for (a, b) in closed.iter().zip(&nested) {
                        max = max.max((a - b).abs());
                    }
                }
                if max > DISCREPANCY_THRESHOLD {
                    self.discrepancies.push(Discrepancy {
                        name: "guedes-closed-form".into(),
                        description: "closed-form display disagrees with nested quadratures".into(),
                        max_difference: max,
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }
}
