use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the lateral boundary is treated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    DirichletZero,
    /// Whole-space problem approximated on boxes `[-r, r]^n` for each radius of
    /// the schedule, with a smooth cutoff of width `transition_width`.
    CauchyNested { radii: Vec<f64>, transition_width: f64 },
}

/// An interval (n = 1) or axis-aligned rectangle (n = 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialDomain {
    bounds: Vec<(f64, f64)>,
    boundary: BoundaryKind,
}

impl SpatialDomain {
    pub fn new(bounds: Vec<(f64, f64)>, boundary: BoundaryKind) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > 2 {
            return Err(Error::spec(format!(
                "dimension must be 1 or 2, got {}",
                bounds.len()
            )));
        }
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::spec(format!(
                    "axis {axis}: interval [{lo}, {hi}] must have positive length"
                )));
            }
        }
        if let BoundaryKind::CauchyNested { radii, transition_width } = &boundary {
            if radii.is_empty() {
                return Err(Error::spec("cauchy_nested requires a radius schedule"));
            }
            if !(*transition_width > 0.0) {
                return Err(Error::spec("cutoff transition width must be positive"));
            }
            if radii.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::spec("radius schedule must be strictly increasing"));
            }
            if radii.iter().any(|r| !(r > transition_width)) {
                return Err(Error::spec("every radius must exceed the transition width"));
            }
            let rmax = *radii.last().unwrap();
            for &(lo, hi) in &bounds {
                if lo > -rmax || hi < rmax {
                    return Err(Error::spec(
                        "cauchy_nested domain must contain the largest box [-r, r]^n",
                    ));
                }
            }
        }
        Ok(Self { bounds, boundary })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)], BoundaryKind::DirichletZero)
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        Self::new(vec![x, y], BoundaryKind::DirichletZero)
    }

    /// Box `[-r, r]^dim` with Dirichlet-zero boundary.
    pub fn centered_box(dim: usize, r: f64) -> Result<Self> {
        Self::new(vec![(-r, r); dim], BoundaryKind::DirichletZero)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn boundary(&self) -> &BoundaryKind {
        &self.boundary
    }

    pub fn length(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        hi - lo
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.bounds).all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi)
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()
    }
}

/// Uniform tensor grid including boundary nodes. Node `(i, j)` has flat index
/// `i * ny + j` (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: SpatialDomain,
    nodes: Vec<usize>,
    spacing: Vec<f64>,
}

impl Grid {
    pub fn new(domain: SpatialDomain, nodes: Vec<usize>) -> Result<Self> {
        if nodes.len() != domain.dim() {
            return Err(Error::spec(format!(
                "grid has {} axes but domain has dimension {}",
                nodes.len(),
                domain.dim()
            )));
        }
        if let Some(n) = nodes.iter().find(|&&n| n < 3) {
            return Err(Error::spec(format!("need at least 3 nodes per axis, got {n}")));
        }
        let spacing = (0..nodes.len())
            .map(|a| domain.length(a) / (nodes[a] - 1) as f64)
            .collect();
        Ok(Self { domain, nodes, spacing })
    }

    /// Grid on `domain` whose spacing is `h` on every axis; lengths must be
    /// integer multiples of `h` up to rounding.
    pub fn with_spacing(domain: SpatialDomain, h: f64) -> Result<Self> {
        let nodes = (0..domain.dim())
            .map(|a| {
                let cells = domain.length(a) / h;
                let rounded = cells.round();
                if (cells - rounded).abs() > 1e-9 * cells.max(1.0) {
                    Err(Error::spec(format!(
                        "axis length {} is not a multiple of spacing {h}",
                        domain.length(a)
                    )))
                } else {
                    Ok(rounded as usize + 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, nodes)
    }

    pub fn domain(&self) -> &SpatialDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat node index.
    #[inline]
    pub fn index(&self, flat: usize) -> [usize; 2] {
        if self.nodes.len() == 1 {
            [flat, 0]
        } else {
            [flat / self.nodes[1], flat % self.nodes[1]]
        }
    }

    #[inline]
    pub fn flat(&self, idx: [usize; 2]) -> usize {
        if self.nodes.len() == 1 {
            idx[0]
        } else {
            idx[0] * self.nodes[1] + idx[1]
        }
    }

    /// Stride of `axis` in the flat layout.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        if self.nodes.len() == 2 && axis == 0 {
            self.nodes[1]
        } else {
            1
        }
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = self.domain.bounds()[axis];
        if i + 1 == self.nodes[axis] {
            hi
        } else {
            lo + i as f64 * self.spacing[axis]
        }
    }

    /// Physical coordinates of a node, written into `out` (length `dim`).
    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let idx = self.index(flat);
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.coord(a, idx[a]);
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.point_into(flat, &mut x);
        x
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        let idx = self.index(flat);
        (0..self.dim()).any(|a| idx[a] == 0 || idx[a] + 1 == self.nodes[a])
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&f| self.is_boundary(f)).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&f| !self.is_boundary(f)).collect()
    }

    /// Trapezoid weight of a node (product of 1D weights).
    pub fn trapezoid_weight(&self, flat: usize) -> f64 {
        let idx = self.index(flat);
        (0..self.dim())
            .map(|a| {
                let end = idx[a] == 0 || idx[a] + 1 == self.nodes[a];
                if end {
                    0.5 * self.spacing[a]
                } else {
                    self.spacing[a]
                }
            })
            .product()
    }

    /// Grid with `2(n-1)+1` nodes per axis on the same domain.
    pub fn refined(&self) -> Self {
        let nodes = self.nodes.iter().map(|&n| 2 * (n - 1) + 1).collect();
        Self::new(self.domain.clone(), nodes).expect("refinement of a valid grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_intervals() {
        assert!(SpatialDomain::interval(1.0, 1.0).is_err());
        assert!(SpatialDomain::interval(2.0, 1.0).is_err());
        assert!(SpatialDomain::new(vec![], BoundaryKind::DirichletZero).is_err());
    }

    #[test]
    fn cauchy_requires_schedule() {
        let b = BoundaryKind::CauchyNested { radii: vec![], transition_width: 1.0 };
        assert!(SpatialDomain::new(vec![(-5.0, 5.0)], b).is_err());
        let b = BoundaryKind::CauchyNested { radii: vec![2.0, 4.0], transition_width: 1.0 };
        assert!(SpatialDomain::new(vec![(-4.0, 4.0)], b.clone()).is_ok());
        assert!(SpatialDomain::new(vec![(-3.0, 3.0)], b).is_err());
    }

    #[test]
    fn spacing_and_indexing() {
        let d = SpatialDomain::rectangle((0.0, 1.0), (0.0, 2.0)).unwrap();
        let g = Grid::new(d, vec![11, 5]).unwrap();
        assert_eq!(g.h(0), 0.1);
        assert_eq!(g.h(1), 0.5);
        assert_eq!(g.len(), 55);
        let f = g.flat([3, 2]);
        assert_eq!(g.index(f), [3, 2]);
        assert_eq!(g.point(f), vec![0.30000000000000004, 1.0]);
        assert_eq!(g.coord(0, 10), 1.0);
        assert_eq!(g.boundary_nodes().len(), 55 - 9 * 3);
        assert!(Grid::new(SpatialDomain::interval(0.0, 1.0).unwrap(), vec![2]).is_err());
    }

    #[test]
    fn trapezoid_weights_sum_to_area() {
        let d = SpatialDomain::rectangle((0.0, 1.0), (-1.0, 2.0)).unwrap();
        let g = Grid::new(d, vec![7, 9]).unwrap();
        let area: f64 = (0..g.len()).map(|f| g.trapezoid_weight(f)).sum();
        assert!((area - 3.0).abs() < 1e-14);
    }

    #[test]
    fn with_spacing_matches_length() {
        let g = Grid::with_spacing(SpatialDomain::centered_box(1, 4.0).unwrap(), 0.1).unwrap();
        assert_eq!(g.nodes_per_axis(), &[81]);
        assert!(Grid::with_spacing(SpatialDomain::interval(0.0, 1.0).unwrap(), 0.3).is_err());
    }
}
