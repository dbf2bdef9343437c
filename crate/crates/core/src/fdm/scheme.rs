use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::ExecPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeStepper {
    /// Backward Euler for diffusion, explicit drift and source.
    #[default]
    ImexBe,
    /// Crank-Nicolson for diffusion, explicit drift and source.
    ImexCn,
    /// Fully explicit Heun method.
    Erk2,
}

impl TimeStepper {
    /// Implicitness weight of the diffusion operator.
    pub(crate) fn theta(self) -> f64 {
        match self {
            TimeStepper::ImexBe => 1.0,
            TimeStepper::ImexCn => 0.5,
            TimeStepper::Erk2 => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PositivityMode {
    /// Record negative parts, never alter values.
    #[default]
    MonitorOnly,
    /// Set negative values to zero after each step and record the amount.
    ClipAndFlag,
}

/// Stop the integration once `sup |u(t) - u(t - window)| / window <= tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyStop {
    pub window: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default)]
    pub time_stepper: TimeStepper,
    pub dt: f64,
    #[serde(default)]
    pub positivity_mode: PositivityMode,
    /// Store a full snapshot every `snapshot_stride` steps.
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// Relative residual target of iterative linear solves.
    #[serde(default = "default_linear_tol")]
    pub linear_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_linear_iter: usize,
    #[serde(default)]
    pub steady_stop: Option<SteadyStop>,
    #[serde(default)]
    pub exec: ExecPolicy,
}

fn default_stride() -> usize {
    10
}

fn default_linear_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    5000
}

impl SchemeConfig {
    pub fn new(time_stepper: TimeStepper, dt: f64) -> Result<Self> {
        let s = Self {
            time_stepper,
            dt,
            positivity_mode: PositivityMode::default(),
            snapshot_stride: default_stride(),
            linear_tol: default_linear_tol(),
            max_linear_iter: default_max_iter(),
            steady_stop: None,
            exec: ExecPolicy::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_positivity(mut self, mode: PositivityMode) -> Self {
        self.positivity_mode = mode;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_exec(mut self, exec: ExecPolicy) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_steady_stop(mut self, window: f64, tol: f64) -> Self {
        self.steady_stop = Some(SteadyStop { window, tol });
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::spec(format!("time step must be positive, got {}", self.dt)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::spec("snapshot stride must be at least 1"));
        }
        if !(self.linear_tol > 0.0) || self.max_linear_iter == 0 {
            return Err(Error::spec("linear solver tolerance and iteration cap must be positive"));
        }
        if let Some(s) = &self.steady_stop {
            if !(s.window > 0.0 && s.tol > 0.0) {
                return Err(Error::spec("steady stop window and tolerance must be positive"));
            }
        }
        Ok(())
    }
}
