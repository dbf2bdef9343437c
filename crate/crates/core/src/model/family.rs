//! Scalar coefficient functions `(t, x) -> R` selectable from configuration.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type ScalarEval = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type LimitEval = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A scalar coefficient `f(t, x)` with an optional known limit as `t -> inf`.
#[derive(Clone)]
pub struct ScalarCoef {
    eval: Arc<ScalarEval>,
    limit: Option<Arc<LimitEval>>,
    constant: Option<f64>,
}

impl fmt::Debug for ScalarCoef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constant {
            Some(c) => write!(f, "ScalarCoef::Constant({c})"),
            None => write!(f, "ScalarCoef::Fn"),
        }
    }
}

impl ScalarCoef {
    pub fn constant(value: f64) -> Self {
        Self {
            eval: Arc::new(move |_, _| value),
            limit: Some(Arc::new(move |_| value)),
            constant: Some(value),
        }
    }

    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), limit: None, constant: None }
    }

    /// Time-only coefficient.
    pub fn of_time<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(move |t, _| f(t))
    }

    pub fn with_limit<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.limit = Some(Arc::new(f));
        self
    }

    #[inline]
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        (self.eval)(t, x)
    }

    pub fn limit(&self, x: &[f64]) -> Option<f64> {
        self.limit.as_ref().map(|l| l(x))
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }
}

/// Spatial factor of a separable coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceFactor {
    Uniform,
    /// `offset + amplitude * exp(-|x - center|^2 / (2 width^2))`
    Gaussian { center: Vec<f64>, width: f64, offset: f64, amplitude: f64 },
}

impl SpaceFactor {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SpaceFactor::Uniform => 1.0,
            SpaceFactor::Gaussian { center, width, offset, amplitude } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                offset + amplitude * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }
}

/// Built-in coefficient families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFamily {
    Constant { value: f64 },
    /// `base + amplitude * exp(-rate * t)`
    ExpTime { base: f64, amplitude: f64, rate: f64 },
    /// `base + amplitude / (1 + t)^2`
    InverseSquareTime { base: f64, amplitude: f64 },
    /// `(base + amplitude * exp(-rate * t)) * g(x)`
    Separable { base: f64, amplitude: f64, rate: f64, space: SpaceFactor },
    /// CSV side file with columns `t,x,value` (1D) or `t,x,y,value` (2D),
    /// interpolated multilinearly and clamped outside the table.
    Table { path: String },
}

impl ScalarFamily {
    /// Builds the evaluator. Table paths are resolved against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<ScalarCoef> {
        Ok(match *self {
            ScalarFamily::Constant { value } => ScalarCoef::constant(value),
            ScalarFamily::ExpTime { base, amplitude, rate } => {
                let limit = if rate > 0.0 { base } else { base + amplitude };
                ScalarCoef::of_time(move |t| base + amplitude * (-rate * t).exp())
                    .with_limit(move |_| limit)
            }
            ScalarFamily::InverseSquareTime { base, amplitude } => {
                ScalarCoef::of_time(move |t| base + amplitude / ((1.0 + t) * (1.0 + t)))
                    .with_limit(move |_| base)
            }
            ScalarFamily::Separable { base, amplitude, rate, ref space } => {
                let s1 = space.clone();
                let s2 = space.clone();
                let tlim = if rate > 0.0 { base } else { base + amplitude };
                ScalarCoef::new(move |t, x| (base + amplitude * (-rate * t).exp()) * s1.eval(x))
                    .with_limit(move |x| tlim * s2.eval(x))
            }
            ScalarFamily::Table { ref path } => {
                let table = Arc::new(Table::load(&base_dir.join(path))?);
                let t2 = table.clone();
                let t_last = *table.axes[0].last().unwrap();
                ScalarCoef::new(move |t, x| table.eval(t, x))
                    .with_limit(move |x| t2.eval(t_last, x))
            }
        })
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be finite"))
            }
        };
        match self {
            ScalarFamily::Constant { value } => finite(*value, "value"),
            ScalarFamily::ExpTime { base, amplitude, rate } => {
                finite(*base, "base")?;
                finite(*amplitude, "amplitude")?;
                finite(*rate, "rate")
            }
            ScalarFamily::InverseSquareTime { base, amplitude } => {
                finite(*base, "base")?;
                finite(*amplitude, "amplitude")
            }
            ScalarFamily::Separable { base, amplitude, rate, space } => {
                finite(*base, "base")?;
                finite(*amplitude, "amplitude")?;
                finite(*rate, "rate")?;
                if let SpaceFactor::Gaussian { width, .. } = space {
                    if !(*width > 0.0) {
                        return Err("gaussian width must be positive".into());
                    }
                }
                Ok(())
            }
            ScalarFamily::Table { .. } => Ok(()),
        }
    }
}

/// Tensor-product table over `(t, x[, y])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Sorted axis values: `t`, then one per spatial axis.
    axes: Vec<Vec<f64>>,
    /// Row-major values, last axis fastest.
    values: Vec<f64>,
}

impl Table {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::spec(format!("cannot read table {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::spec(format!("table {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or("empty table")?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let ncoord = match cols.as_slice() {
            ["t", "x", "value"] => 2,
            ["t", "x", "y", "value"] => 3,
            _ => return Err(format!("unexpected header {header:?}")),
        };
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| format!("row {}: {e}", lineno + 2))?;
            if vals.len() != ncoord + 1 || vals.iter().any(|v| !v.is_finite()) {
                return Err(format!("row {}: expected {} finite numbers", lineno + 2, ncoord + 1));
            }
            rows.push(vals);
        }
        let mut axes: Vec<Vec<f64>> = (0..ncoord)
            .map(|a| {
                let mut v: Vec<f64> = rows.iter().map(|r| r[a]).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            })
            .collect();
        let expected: usize = axes.iter().map(Vec::len).product();
        if expected != rows.len() {
            return Err(format!(
                "table is not a full tensor grid ({} rows, {} expected)",
                rows.len(),
                expected
            ));
        }
        let mut values = vec![f64::NAN; expected];
        for r in &rows {
            let mut flat = 0;
            for (a, axis) in axes.iter().enumerate() {
                let i = axis.binary_search_by(|v| v.total_cmp(&r[a])).unwrap();
                flat = flat * axis.len() + i;
            }
            values[flat] = r[ncoord];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err("duplicate rows in table".into());
        }
        axes.shrink_to_fit();
        Ok(Self { axes, values })
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let mut coords = [0.0; 3];
        coords[0] = t;
        for (c, xi) in coords[1..].iter_mut().zip(x) {
            *c = *xi;
        }
        let na = self.axes.len();
        let mut lo = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..na {
            let axis = &self.axes[a];
            let c = coords[a].clamp(axis[0], *axis.last().unwrap());
            if axis.len() == 1 {
                continue;
            }
            let i = match axis.binary_search_by(|v| v.total_cmp(&c)) {
                Ok(i) => i.min(axis.len() - 2),
                Err(i) => i.saturating_sub(1).min(axis.len() - 2),
            };
            lo[a] = i;
            frac[a] = (c - axis[i]) / (axis[i + 1] - axis[i]);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << na) {
            let mut w = 1.0;
            let mut flat = 0;
            for a in 0..na {
                let up = (corner >> a) & 1 == 1 && self.axes[a].len() > 1;
                w *= if up { frac[a] } else { 1.0 - frac[a] };
                flat = flat * self.axes[a].len() + lo[a] + usize::from(up);
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }
}
