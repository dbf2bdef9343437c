use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::ExpectedSign;
use crate::error::{Error, Result};
use crate::fdm::SchemeConfig;
use crate::hypothesis::{AssumptionId, CheckTolerances, SampleBudget};
use crate::model::{
    build_lv_problem, BoundaryKind, CoefficientSet, Field, Grid, LVCoefficients, ProblemSpec, ScalarFamily,
    ShiftedSource, SpatialDomain,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub problem: ProblemConfig,
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainConfig,
    pub grid: GridConfig,
    pub horizon: f64,
    pub model: ModelConfig,
    /// One profile per component.
    pub initial: Vec<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub bounds: Vec<(f64, f64)>,
    #[serde(default = "dirichlet")]
    pub boundary: BoundaryKind,
}

fn dirichlet() -> BoundaryKind {
    BoundaryKind::DirichletZero
}

/// Either node counts per axis or a common spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// `c^k = u^k (beta_k - sum_i gamma_ki u^i) + shift_k`.
    LotkaVolterra {
        diffusion: Vec<f64>,
        growth: Vec<ScalarFamily>,
        interaction: Vec<Vec<ScalarFamily>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source_shift: Option<Vec<f64>>,
    },
}

/// Initial profiles; every profile is forced to zero on a Dirichlet boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant { value: f64 },
    /// `amplitude * prod_a sin(pi (x_a - lo_a) / L_a)^power`
    Sine {
        amplitude: f64,
        #[serde(default = "one")]
        power: u32,
    },
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`
    Gaussian { center: Vec<f64>, width: f64, amplitude: f64 },
    /// `amplitude * (1 - |x - center|^2 / radius^2)^2` inside the ball.
    Bump { center: Vec<f64>, radius: f64, amplitude: f64 },
}

fn one() -> u32 {
    1
}

impl Profile {
    pub fn eval(&self, x: &[f64], bounds: &[(f64, f64)]) -> f64 {
        let r2 = |c: &[f64]| x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        match self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => *value,
            Profile::Sine { amplitude, power } => {
                amplitude
                    * x.iter()
                        .zip(bounds)
                        .map(|(v, (lo, hi))| (std::f64::consts::PI * (v - lo) / (hi - lo)).sin().powi(*power as i32))
                        .product::<f64>()
            }
            Profile::Gaussian { center, width, amplitude } => amplitude * (-r2(center) / (2.0 * width * width)).exp(),
            Profile::Bump { center, radius, amplitude } => {
                let q = r2(center) / (radius * radius);
                if q < 1.0 {
                    amplitude * (1.0 - q) * (1.0 - q)
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self, dim: usize) -> std::result::Result<(), String> {
        let finite = |v: f64| if v.is_finite() { Ok(()) } else { Err("values must be finite".to_string()) };
        match self {
            Profile::Zero => Ok(()),
            Profile::Constant { value } => finite(*value),
            Profile::Sine { amplitude, .. } => finite(*amplitude),
            Profile::Gaussian { center, width, amplitude } => {
                finite(*amplitude)?;
                if center.len() != dim {
                    return Err(format!("center must have {dim} coordinates"));
                }
                if !(*width > 0.0) {
                    return Err("width must be positive".into());
                }
                Ok(())
            }
            Profile::Bump { center, radius, amplitude } => {
                finite(*amplitude)?;
                if center.len() != dim {
                    return Err(format!("center must have {dim} coordinates"));
                }
                if !(*radius > 0.0) {
                    return Err("radius must be positive".into());
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default)]
    pub assumptions: Vec<AssumptionId>,
    #[serde(default)]
    pub budget: SampleBudget,
    #[serde(default)]
    pub tolerances: CheckTolerances,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self { assumptions: Vec::new(), budget: SampleBudget::default(), tolerances: CheckTolerances::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positivity: Option<PositivityAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bound: Option<MaxBoundAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extinction: Option<ExtinctionAnalysis>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub monotone: Vec<MonotoneAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady: Option<SteadyAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nested: Option<NestedAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleAnalysis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositivityAnalysis {
    /// Allowed negative part relative to `1 + sup |u|`.
    #[serde(default = "default_neg_tol")]
    pub tol: f64,
}

fn default_neg_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxBoundAnalysis {
    #[serde(default = "default_bound_slack")]
    pub slack: f64,
}

fn default_bound_slack() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtinctionAnalysis {
    pub component: usize,
    #[serde(default = "default_tol_ext")]
    pub tol: f64,
    #[serde(default = "default_window")]
    pub window_fraction: f64,
    /// Slack on the Gronwall bound.
    #[serde(default = "default_bound_slack")]
    pub slack: f64,
}

fn default_tol_ext() -> f64 {
    1e-3
}

fn default_window() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneAnalysis {
    pub component: usize,
    pub sign: ExpectedSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyAnalysis {
    #[serde(default = "default_window")]
    pub window_fraction: f64,
    #[serde(default = "default_steady_tol")]
    pub steady_tol: f64,
    /// Bound on every weak residual magnitude at base resolution.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Number of successive `(h, dt)` halvings over which residuals must decrease.
    #[serde(default)]
    pub refinements: usize,
    /// Limit coefficients `beta, gamma, delta, rho, sigma, theta`; taken from
    /// the declared family limits when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<[f64; 6]>,
}

fn default_steady_tol() -> f64 {
    1e-8
}

fn default_residual_tol() -> f64 {
    5e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedAnalysis {
    #[serde(default = "default_nested_tol")]
    pub tol: f64,
}

fn default_nested_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleAnalysis {
    pub compare_at: f64,
    /// Constant of the `C (h^2 + dt)` allowance.
    #[serde(default = "one_f")]
    pub constant: f64,
    #[serde(default = "default_oracle_floor")]
    pub floor: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn one_f() -> f64 {
    1.0
}

fn default_oracle_floor() -> f64 {
    1e-3
}

fn default_burn_in() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default = "yes")]
    pub diagnostics: bool,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self { trajectory: true, diagnostics: true, snapshots: true }
    }
}

fn pointer_of(path: &serde_path_to_error::Path, msg: &str) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    if let Some(rest) = msg.strip_prefix("missing field `") {
        if let Some(field) = rest.split('`').next() {
            out.push('/');
            out.push_str(field);
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Parses and validates a scenario. Errors carry a JSON pointer.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let msg = e.inner().to_string();
        Error::config(pointer_of(e.path(), &msg), msg)
    })?;
    cfg.validate(base_dir)?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, &base_dir_of(path))
}

pub(crate) fn base_dir_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn positive(v: f64, pointer: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(pointer, format!("must be positive and finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self, base_dir: &Path) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("/name", "must not be empty"));
        }
        let p = &self.problem;
        positive(p.horizon, "/problem/horizon")?;
        let dim = p.domain.bounds.len();
        SpatialDomain::new(p.domain.bounds.clone(), p.domain.boundary.clone())
            .map_err(|e| Error::config("/problem/domain", e.to_string()))?;
        match (&p.grid.nodes, p.grid.spacing) {
            (Some(n), None) => {
                if n.len() != dim {
                    return Err(Error::config("/problem/grid/nodes", format!("need {dim} entries")));
                }
                if n.iter().any(|&k| k < 3) {
                    return Err(Error::config("/problem/grid/nodes", "at least 3 nodes per axis"));
                }
            }
            (None, Some(h)) => positive(h, "/problem/grid/spacing")?,
            _ => return Err(Error::config("/problem/grid", "give exactly one of nodes or spacing")),
        }
        let m = match &p.model {
            ModelConfig::LotkaVolterra { diffusion, growth, interaction, source_shift } => {
                let m = diffusion.len();
                if m == 0 {
                    return Err(Error::config("/problem/model/diffusion", "at least one species"));
                }
                for (k, d) in diffusion.iter().enumerate() {
                    positive(*d, &format!("/problem/model/diffusion/{k}"))?;
                }
                if growth.len() != m {
                    return Err(Error::config("/problem/model/growth", format!("need {m} entries")));
                }
                if interaction.len() != m || interaction.iter().any(|r| r.len() != m) {
                    return Err(Error::config("/problem/model/interaction", format!("need a {m}x{m} matrix")));
                }
                for (k, f) in growth.iter().enumerate() {
                    let ptr = format!("/problem/model/growth/{k}");
                    f.validate().map_err(|e| Error::config(&ptr, e))?;
                    f.build(base_dir).map_err(|e| Error::config(&ptr, e.to_string()))?;
                }
                for (k, row) in interaction.iter().enumerate() {
                    for (i, f) in row.iter().enumerate() {
                        let ptr = format!("/problem/model/interaction/{k}/{i}");
                        f.validate().map_err(|e| Error::config(&ptr, e))?;
                        f.build(base_dir).map_err(|e| Error::config(&ptr, e.to_string()))?;
                    }
                }
                if let Some(s) = source_shift {
                    if s.len() != m || s.iter().any(|v| !v.is_finite()) {
                        return Err(Error::config("/problem/model/source_shift", format!("need {m} finite entries")));
                    }
                }
                m
            }
        };
        if p.initial.len() != m {
            return Err(Error::config("/problem/initial", format!("need {m} profiles")));
        }
        for (k, prof) in p.initial.iter().enumerate() {
            prof.validate(dim).map_err(|e| Error::config(format!("/problem/initial/{k}"), e))?;
        }

        let s = &self.scheme;
        positive(s.dt, "/scheme/dt")?;
        positive(s.linear_tol, "/scheme/linear_tol")?;
        if s.snapshot_stride == 0 {
            return Err(Error::config("/scheme/snapshot_stride", "must be at least 1"));
        }
        if s.max_linear_iter == 0 {
            return Err(Error::config("/scheme/max_linear_iter", "must be at least 1"));
        }
        if let Some(st) = &s.steady_stop {
            positive(st.window, "/scheme/steady_stop/window")?;
            positive(st.tol, "/scheme/steady_stop/tol")?;
        }

        let b = &self.checks.budget;
        b.validate().map_err(|e| Error::config("/checks/budget", e.to_string()))?;
        let t = &self.checks.tolerances;
        positive(t.tol_zero, "/checks/tolerances/tol_zero")?;
        positive(t.tol_sign, "/checks/tolerances/tol_sign")?;
        positive(t.tol_compat, "/checks/tolerances/tol_compat")?;

        let a = &self.analysis;
        if let Some(x) = &a.positivity {
            positive(x.tol, "/analysis/positivity/tol")?;
        }
        if let Some(x) = &a.max_bound {
            positive(x.slack, "/analysis/max_bound/slack")?;
        }
        if let Some(x) = &a.extinction {
            if x.component >= m {
                return Err(Error::config("/analysis/extinction/component", "out of range"));
            }
            positive(x.tol, "/analysis/extinction/tol")?;
            positive(x.slack, "/analysis/extinction/slack")?;
            if x.window_fraction > 1.0 {
                return Err(Error::config("/analysis/extinction/window_fraction", "must not exceed 1"));
            }
            positive(x.window_fraction, "/analysis/extinction/window_fraction")?;
        }
        for (i, x) in a.monotone.iter().enumerate() {
            if x.component >= m {
                return Err(Error::config(format!("/analysis/monotone/{i}/component"), "out of range"));
            }
        }
        if let Some(x) = &a.steady {
            if x.window_fraction > 1.0 {
                return Err(Error::config("/analysis/steady/window_fraction", "must not exceed 1"));
            }
            positive(x.window_fraction, "/analysis/steady/window_fraction")?;
            positive(x.steady_tol, "/analysis/steady/steady_tol")?;
            positive(x.residual_tol, "/analysis/steady/residual_tol")?;
            if m != 2 {
                return Err(Error::config("/analysis/steady", "weak residuals need two species"));
            }
            if let Some(l) = &x.limits {
                if l.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("/analysis/steady/limits", "must be finite"));
                }
            }
        }
        if let Some(x) = &a.nested {
            positive(x.tol, "/analysis/nested/tol")?;
            if !matches!(p.domain.boundary, BoundaryKind::CauchyNested { .. }) {
                return Err(Error::config("/analysis/nested", "needs a cauchy_nested domain"));
            }
        }
        if matches!(p.domain.boundary, BoundaryKind::CauchyNested { .. }) && a.nested.is_none() {
            return Err(Error::config("/analysis/nested", "cauchy_nested domains need the nested analysis"));
        }
        if let Some(x) = &a.oracle {
            positive(x.compare_at, "/analysis/oracle/compare_at")?;
            if x.compare_at > p.horizon {
                return Err(Error::config("/analysis/oracle/compare_at", "must not exceed the horizon"));
            }
            positive(x.constant, "/analysis/oracle/constant")?;
            positive(x.floor, "/analysis/oracle/floor")?;
        }
        Ok(())
    }

    /// Grid with its nodes per axis scaled by `2^level` intervals.
    pub fn grid(&self, level: u32) -> Result<Arc<Grid>> {
        let p = &self.problem;
        let domain = SpatialDomain::new(p.domain.bounds.clone(), p.domain.boundary.clone())?;
        let grid = match (&p.grid.nodes, p.grid.spacing) {
            (Some(n), _) => Grid::new(domain, n.iter().map(|&k| (k - 1) * (1 << level) + 1).collect())?,
            (None, Some(h)) => Grid::with_spacing(domain, h / f64::from(1u32 << level))?,
            (None, None) => return Err(Error::config("/problem/grid", "give exactly one of nodes or spacing")),
        };
        Ok(Arc::new(grid))
    }

    pub fn lv(&self, base_dir: &Path) -> Result<LVCoefficients> {
        match &self.problem.model {
            ModelConfig::LotkaVolterra { diffusion, growth, interaction, .. } => LVCoefficients::new(
                diffusion.clone(),
                growth.iter().map(|f| f.build(base_dir)).collect::<Result<_>>()?,
                interaction
                    .iter()
                    .map(|row| row.iter().map(|f| f.build(base_dir)).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?,
            ),
        }
    }

    /// Problem on the grid of refinement `level`.
    pub fn build_problem(&self, base_dir: &Path, level: u32) -> Result<ProblemSpec> {
        let grid = self.grid(level)?;
        let bounds = self.problem.domain.bounds.clone();
        let profiles = self.problem.initial.clone();
        let init = Field::from_fn(grid.clone(), profiles.len(), |x| {
            profiles.iter().map(|p| p.eval(x, &bounds)).collect()
        })?;
        let lv = self.lv(base_dir)?;
        let spec = build_lv_problem(lv, grid.domain(), init, self.problem.horizon)?;
        match &self.problem.model {
            ModelConfig::LotkaVolterra { source_shift: Some(shift), .. } => {
                let coef = CoefficientSet::new(ShiftedSource::new(spec.coefficients().raw().clone(), shift.clone())?);
                spec.with_coefficients(coef)
            }
            _ => Ok(spec),
        }
    }

    pub fn is_cauchy(&self) -> bool {
        matches!(self.problem.domain.boundary, BoundaryKind::CauchyNested { .. })
    }
}
