//! Scenario files: what to solve, which checks to run and their tolerances.

use std::collections::BTreeMap;
use std::fmt;

use lieevolve::closed_forms::OracleSpec;
use lieevolve::curve::{CoefficientCurve, ScalarCurve};
use lieevolve::grid_oracle::GridOptions;
use lieevolve::lie_core::{builtin_algebra, LieAlgebra, MatrixRep};
use lieevolve::quantum_gaussian::GaussianState;
use lieevolve::wei_norman::Ordering;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Version of the scenario format and of `report.json`.
pub const SCHEMA_VERSION: u32 = 1;

/// Invalid scenario, with the JSON path of the offending field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for SchemaError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraRef {
    /// Name of a catalog algebra.
    Builtin(String),
    /// Inline definition in the algebra JSON format.
    Inline(serde_json::Value),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Residual,
    OracleCompare,
    Ehrenfest,
    GridCompare,
    Reduction,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Residual => "residual",
            Check::OracleCompare => "oracle-compare",
            Check::Ehrenfest => "ehrenfest",
            Check::GridCompare => "grid-compare",
            Check::Reduction => "reduction",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Minimum-uncertainty packet.
    Coherent { x0: f64, p0: f64, sigma_p: f64 },
    /// `ψ(p) = exp(-(A p² + B p + C))` with `[re, im]` pairs.
    Gaussian {
        a: [f64; 2],
        b: [f64; 2],
        c: [f64; 2],
    },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Coherent {
            x0: 0.5,
            p0: -0.3,
            sigma_p: 0.8,
        }
    }
}

impl InitialState {
    pub fn state(&self) -> lieevolve::Result<GaussianState<f64>> {
        match *self {
            InitialState::Coherent { x0, p0, sigma_p } => GaussianState::coherent(x0, p0, sigma_p),
            InitialState::Gaussian { a, b, c } => GaussianState::new(
                Complex64::new(a[0], a[1]),
                Complex64::new(b[0], b[1]),
                Complex64::new(c[0], c[1]),
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the Wei-Norman integrator.
    pub integrator: f64,
    /// Group-equation residual.
    pub residual: f64,
    /// Numerical solution vs oracle.
    pub oracle: f64,
    /// First-moment equations.
    pub ehrenfest: f64,
    /// Phase-insensitive grid comparison.
    pub grid: f64,
    /// Phase-sensitive grid comparison.
    pub grid_phase: f64,
    /// Reduction checks.
    pub reduction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            integrator: 1e-12,
            residual: 1e-6,
            oracle: 1e-7,
            ehrenfest: 1e-6,
            grid: 1e-4,
            grid_phase: 1e-3,
            reduction: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub dt: f64,
    /// Comparison time; the end of the span when absent.
    pub t: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridOptions::default();
        GridConfig {
            x_min: g.x_min,
            x_max: g.x_max,
            points: g.points,
            dt: g.dt,
            t: None,
        }
    }
}

impl GridConfig {
    pub fn options(&self) -> GridOptions {
        GridOptions {
            x_min: self.x_min,
            x_max: self.x_max,
            points: self.points,
            dt: self.dt,
        }
    }
}

/// Reduction of the unit-mass oscillator block `b = (1, 0, Ω²)` of `sl2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionConfig {
    pub omega: ScalarCurve<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    /// Named parameter values, shown by `describe`.
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub algebra: AlgebraRef,
    /// 1-based factor ordering.
    pub ordering: Vec<usize>,
    /// Coefficient curves by 1-based index; missing indices are zero. When
    /// absent, the oracle's coefficients are used.
    #[serde(default)]
    pub coefficients: Option<BTreeMap<String, ScalarCurve<f64>>>,
    pub span: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub initial_state: Option<InitialState>,
    #[serde(default)]
    pub oracle: Option<OracleSpec<f64>>,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub reduction: Option<ReductionConfig>,
}

fn default_samples() -> usize {
    101
}

/// Scenario with its algebra, representation, ordering and coefficients
/// resolved.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub algebra: LieAlgebra<f64>,
    pub rep: Option<MatrixRep<f64>>,
    pub ordering: Ordering,
    pub curve: CoefficientCurve<f64>,
}

impl Scenario {
    /// Parses and validates a scenario.
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de)
            .map_err(|e| SchemaError::new(e.path().to_string(), e.inner().to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.id.trim().is_empty() {
            return Err(SchemaError::new("id", "must not be empty"));
        }
        let [t0, t1] = self.span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(SchemaError::new(
                "span",
                "must be a finite, nonempty interval [t0, t1]",
            ));
        }
        if self.samples < 2 {
            return Err(SchemaError::new("samples", "must be at least 2"));
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("integrator", tol.integrator),
            ("residual", tol.residual),
            ("oracle", tol.oracle),
            ("ehrenfest", tol.ehrenfest),
            ("grid", tol.grid),
            ("grid_phase", tol.grid_phase),
            ("reduction", tol.reduction),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SchemaError::new(
                    format!("tolerances.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if let Some(g) = &self.grid {
            if g.points < 5 || !(g.x_max > g.x_min) || !(g.dt > 0.0) {
                return Err(SchemaError::new(
                    "grid",
                    "needs points >= 5, x_max > x_min and dt > 0",
                ));
            }
            if let Some(t) = g.t {
                if !(t >= t0 && t <= t1) {
                    return Err(SchemaError::new("grid.t", "must lie inside the span"));
                }
            }
        }
        if let Some(InitialState::Coherent { sigma_p, .. }) = self.initial_state {
            if !(sigma_p > 0.0) {
                return Err(SchemaError::new(
                    "initial_state.sigma_p",
                    "must be positive",
                ));
            }
        }
        if self.checks.contains(&Check::OracleCompare) && self.oracle.is_none() {
            return Err(SchemaError::new(
                "checks",
                "oracle-compare requested without an oracle",
            ));
        }
        if self.checks.contains(&Check::Reduction) && self.reduction.is_none() {
            return Err(SchemaError::new(
                "checks",
                "reduction requested without a reduction section",
            ));
        }
        if self.coefficients.is_none() && self.oracle.is_none() {
            return Err(SchemaError::new(
                "coefficients",
                "required when no oracle is given",
            ));
        }
        self.resolve()?;
        Ok(())
    }

    /// Resolves the algebra, ordering and coefficients.
    pub fn resolve(&self) -> Result<Resolved, SchemaError> {
        let (algebra, rep) = match &self.algebra {
            AlgebraRef::Builtin(name) => {
                let b = builtin_algebra::<f64>(name)
                    .map_err(|e| SchemaError::new("algebra", e.to_string()))?;
                (b.algebra, b.rep)
            }
            AlgebraRef::Inline(value) => {
                let alg = LieAlgebra::from_json(&value.to_string())
                    .map_err(|e| SchemaError::new("algebra", e.to_string()))?;
                let report = alg.validate(lieevolve::lie_core::Tolerances::default().validation);
                if !report.passed() {
                    return Err(SchemaError::new(
                        "algebra",
                        report.violations[0].to_string(),
                    ));
                }
                (alg, None)
            }
        };
        let ordering = Ordering::from_one_based(&self.ordering)
            .map_err(|e| SchemaError::new("ordering", e.to_string()))?;
        if ordering.len() != algebra.dim() {
            return Err(SchemaError::new(
                "ordering",
                format!(
                    "has {} entries for a {}-dimensional algebra",
                    ordering.len(),
                    algebra.dim()
                ),
            ));
        }
        let curve = match (&self.coefficients, &self.oracle) {
            (Some(map), _) => {
                let mut entries = Vec::new();
                for (key, c) in map {
                    let path = format!("coefficients.{key}");
                    let idx: usize = key.parse().map_err(|_| {
                        SchemaError::new(path.clone(), "keys must be 1-based indices")
                    })?;
                    if idx == 0 || idx > algebra.dim() {
                        return Err(SchemaError::new(
                            path,
                            format!("index outside 1..={}", algebra.dim()),
                        ));
                    }
                    c.validate()
                        .map_err(|e| SchemaError::new(path, e.to_string()))?;
                    entries.push((idx - 1, c.clone()));
                }
                CoefficientCurve::sparse(algebra.dim(), entries)
                    .map_err(|e| SchemaError::new("coefficients", e.to_string()))?
            }
            (None, Some(oracle)) => oracle
                .curve()
                .map_err(|e| SchemaError::new("oracle", e.to_string()))?,
            (None, None) => {
                return Err(SchemaError::new(
                    "coefficients",
                    "required when no oracle is given",
                ))
            }
        };
        if let Some(oracle) = &self.oracle {
            if oracle.algebra() != algebra.name() || oracle.ordering() != self.ordering {
                return Err(SchemaError::new(
                    "oracle",
                    format!(
                        "`{}` refers to {} with ordering {:?}",
                        oracle.id(),
                        oracle.algebra(),
                        oracle.ordering()
                    ),
                ));
            }
        }
        let quantum = matches!(algebra.name(), "quadratic6" | "heisenberg4_central");
        if !quantum
            && (self.checks.contains(&Check::Ehrenfest)
                || self.checks.contains(&Check::GridCompare))
        {
            return Err(SchemaError::new(
                "checks",
                "quantum checks need quadratic6 or heisenberg4_central",
            ));
        }
        if self.checks.contains(&Check::Reduction)
            && !matches!(algebra.name(), "quadratic6" | "sl2")
        {
            return Err(SchemaError::new(
                "checks",
                "the reduction check needs quadratic6 or sl2",
            ));
        }
        Ok(Resolved {
            algebra,
            rep,
            ordering,
            curve,
        })
    }

    /// Whether the scenario has a Gaussian realization.
    pub fn is_quantum(&self) -> bool {
        matches!(&self.algebra, AlgebraRef::Builtin(n) if n == "quadratic6" || n == "heisenberg4_central")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "id": "free",
        "title": "Free particle",
        "algebra": "heisenberg3",
        "ordering": [3, 2, 1],
        "coefficients": {"1": {"kind": "constant", "value": 1.0}},
        "span": [0, 1]
    }"#;

    #[test]
    fn minimal_scenario() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.samples, 101);
        let r = s.resolve().unwrap();
        assert_eq!(r.ordering.perm(), &[2, 1, 0]);
        assert!(r.rep.is_some());
    }

    #[test]
    fn negative_tolerance_reports_path() {
        let text = MINIMAL.replace(
            "\"span\": [0, 1]",
            "\"span\": [0, 1], \"tolerances\": {\"oracle\": -1e-7}",
        );
        let err = Scenario::from_json(&text).unwrap_err();
        assert_eq!(err.path, "tolerances.oracle");
    }

    #[test]
    fn type_errors_report_path() {
        let text = MINIMAL.replace("\"value\": 1.0", "\"value\": \"one\"");
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(err.path.starts_with("coefficients.1"), "{err}");
    }

    #[test]
    fn unknown_algebra_and_bad_ordering() {
        let err = Scenario::from_json(&MINIMAL.replace("heisenberg3", "nope")).unwrap_err();
        assert_eq!(err.path, "algebra");
        let err = Scenario::from_json(&MINIMAL.replace("[3, 2, 1]", "[1, 2]")).unwrap_err();
        assert_eq!(err.path, "ordering");
        let err = Scenario::from_json(&MINIMAL.replace("\"1\":", "\"7\":")).unwrap_err();
        assert_eq!(err.path, "coefficients.7");
    }

    #[test]
    fn inline_algebra() {
        let text = MINIMAL.replace(
            "\"heisenberg3\"",
            r#"{"name": "h3", "dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": -1}}]}"#,
        );
        let s = Scenario::from_json(&text).unwrap();
        let r = s.resolve().unwrap();
        assert_eq!(r.algebra.dim(), 3);
        assert!(r.rep.is_none());
    }
}
