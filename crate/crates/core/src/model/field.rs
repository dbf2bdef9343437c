use std::sync::Arc;

use crate::error::{Error, Result};

use super::domain::{BoundaryKind, Grid};

/// `m` scalar arrays over the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<Vec<f64>>,
}

impl Field {
    pub fn zeros(grid: Arc<Grid>, m: usize) -> Self {
        let n = grid.len();
        Self { grid, values: vec![vec![0.0; n]; m] }
    }

    /// Wraps raw arrays. On Dirichlet-zero domains, boundary values must
    /// already be zero.
    pub fn from_values(grid: Arc<Grid>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::spec("field needs at least one component"));
        }
        if let Some(v) = values.iter().find(|v| v.len() != grid.len()) {
            return Err(Error::spec(format!(
                "component has {} values but grid has {} nodes",
                v.len(),
                grid.len()
            )));
        }
        let field = Self { grid, values };
        if field.is_dirichlet() && field.boundary_max_abs() != 0.0 {
            return Err(Error::spec("Dirichlet-zero field has non-zero boundary values"));
        }
        Ok(field)
    }

    /// Samples `profile(x)` (returning `m` values) at every node; boundary
    /// nodes of Dirichlet-zero domains are set to zero.
    pub fn from_fn<F>(grid: Arc<Grid>, m: usize, profile: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let mut values = vec![vec![0.0; grid.len()]; m];
        let dirichlet = matches!(grid.domain().boundary(), BoundaryKind::DirichletZero);
        let mut x = vec![0.0; grid.dim()];
        for node in 0..grid.len() {
            if dirichlet && grid.is_boundary(node) {
                continue;
            }
            grid.point_into(node, &mut x);
            let v = profile(&x);
            if v.len() != m {
                return Err(Error::spec(format!(
                    "initial profile returned {} components, expected {m}",
                    v.len()
                )));
            }
            for (k, vk) in v.into_iter().enumerate() {
                if !vk.is_finite() {
                    return Err(Error::spec(format!("non-finite initial value at node {node}")));
                }
                values[k][node] = vk;
            }
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.values.len()
    }

    pub fn component(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec<f64>> {
        self.values
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self.grid.domain().boundary(), BoundaryKind::DirichletZero)
    }

    /// State vector at one node.
    pub fn at(&self, node: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[node]).collect()
    }

    pub fn at_into(&self, node: usize, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(&self.values) {
            *o = v[node];
        }
    }

    pub fn boundary_max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for node in self.grid.boundary_nodes() {
            for v in &self.values {
                m = m.max(v[node].abs());
            }
        }
        m
    }

    pub fn zero_boundary(&mut self) {
        for node in self.grid.boundary_nodes() {
            for v in &mut self.values {
                v[node] = 0.0;
            }
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self, k: usize) -> f64 {
        self.values[k].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_x |u(x)|` with the Euclidean norm over components.
    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|n| self.values.iter().map(|v| v[n] * v[n]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `max_k max_x |min(u^k, 0)|`.
    pub fn negative_part_norm(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |acc: f64, &v| acc.max((-v).max(0.0)))
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}
