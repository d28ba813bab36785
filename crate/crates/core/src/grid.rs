//! Uniform radial grid in units of the cylinder radius, plus the trapezoidal
//! quadrature used by every solver.

use crate::error::{domain, Error, Result};

/// Exponent of the Gaussian tail `exp(-a rho^2)` at the outer edge of an
/// automatically sized grid.
pub const TAIL_EXPONENT: f64 = 40.0;

/// Uniform grid on `[0, rho_max]` whose node `per_unit` sits exactly on the
/// cylinder surface `rho = 1`.
///
/// Nodes are `i / per_unit`, so the boundary node is bit-exact `1.0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RadialGrid {
    len: usize,
    per_unit: usize,
}

impl RadialGrid {
    /// Grid with `n` nodes reaching approximately `rho_max`.
    ///
    /// The spacing is snapped to `1 / round((n - 1) / rho_max)` so that the
    /// surface is a node; the outer edge moves by at most `rho_max / 2` spacings.
    pub fn new(n: usize, rho_max: f64) -> Result<Self> {
        if n < 3 {
            return Err(domain(format!("grid needs at least 3 nodes, got {n}")));
        }
        if !(rho_max.is_finite() && rho_max >= 1.0) {
            return Err(domain(format!("rho_max must be finite and >= 1, got {rho_max}")));
        }
        let per_unit = ((n - 1) as f64 / rho_max).round() as usize;
        if per_unit < 2 {
            return Err(domain(format!(
                "{n} nodes are too few to resolve the cylinder out to rho_max = {rho_max}"
            )));
        }
        Ok(Self { len: n, per_unit })
    }

    /// Grid with `per_unit` intervals across the cylinder radius, extended
    /// with the same spacing to at least `rho_max`.
    pub fn with_spacing(per_unit: usize, rho_max: f64) -> Result<Self> {
        if per_unit < 2 {
            return Err(domain(format!("need at least 2 intervals per radius, got {per_unit}")));
        }
        if !(rho_max.is_finite() && rho_max >= 1.0) {
            return Err(domain(format!("rho_max must be finite and >= 1, got {rho_max}")));
        }
        let intervals = (rho_max * per_unit as f64 - 1e-9).ceil() as usize;
        Ok(Self { len: intervals.max(per_unit) + 1, per_unit })
    }

    /// Grid covering only the cylinder, `[0, 1]`.
    pub fn cylinder(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.per_unit as f64
    }

    pub fn rho_max(&self) -> f64 {
        self.node(self.len - 1)
    }

    /// Index of the node at `rho = 1`.
    pub fn boundary_index(&self) -> usize {
        self.per_unit
    }

    /// Number of nodes in `[0, 1]`.
    pub fn cylinder_len(&self) -> usize {
        self.per_unit + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.per_unit as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.node(i)).collect()
    }

    pub(crate) fn check_len(&self, what: &str, values: &[f64]) -> Result<()> {
        if values.len() != self.len {
            return Err(Error::GridMismatch(format!(
                "{what} has {} values for a {}-node grid",
                values.len(),
                self.len
            )));
        }
        Ok(())
    }

    /// Linear interpolation of nodal `values` at `rho`, clamped to the grid.
    pub fn interpolate(&self, values: &[f64], rho: f64) -> f64 {
        let x = (rho * self.per_unit as f64).clamp(0.0, (self.len - 1) as f64);
        let i = (x.floor() as usize).min(self.len - 2);
        let t = x - i as f64;
        values[i] * (1.0 - t) + values[i + 1] * t
    }
}

/// Outer radius at which a Gaussian of flux `a_flux` has decayed to
/// `exp(-TAIL_EXPONENT)`; never below 3.
pub fn confining_rho_max(a_flux: f64) -> f64 {
    (TAIL_EXPONENT / a_flux).sqrt().max(3.0)
}

/// Running trapezoidal integral, starting at 0 on the first node.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Supremum of `|a - b|` over the first `len` entries.
pub fn sup_distance(a: &[f64], b: &[f64], len: usize) -> f64 {
    a[..len].iter().zip(&b[..len]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_is_an_exact_node() {
        let g = RadialGrid::new(2001, 3.0).unwrap();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.node(g.boundary_index()), 1.0);
        assert!((g.rho_max() - 3.0).abs() <= 1.5 * g.spacing());
        let nodes = g.nodes();
        assert_eq!(nodes[0], 0.0);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-12);
        }
    }

    #[test]
    fn cylinder_grid_spacing() {
        let g = RadialGrid::cylinder(4001).unwrap();
        assert_eq!(g.boundary_index(), 4000);
        assert_eq!(g.rho_max(), 1.0);
        assert_eq!(g.spacing(), 1.0 / 4000.0);
    }

    #[test]
    fn with_spacing_reaches_requested_radius() {
        let g = RadialGrid::with_spacing(400, 8.94).unwrap();
        assert_eq!(g.boundary_index(), 400);
        assert!(g.rho_max() >= 8.94 && g.rho_max() < 8.94 + g.spacing());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::new(2, 1.0).is_err());
        assert!(RadialGrid::new(101, 0.5).is_err());
        assert!(RadialGrid::new(5, 10.0).is_err());
        assert!(RadialGrid::new(101, f64::NAN).is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let g = RadialGrid::cylinder(11).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| 3.0 * r + 1.0).collect();
        let c = cumulative_trapezoid(&f, g.spacing());
        for (r, v) in g.nodes().iter().zip(&c) {
            assert!((v - (1.5 * r * r + r)).abs() < 1e-14);
        }
        assert!((trapezoid(&f, g.spacing()) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn interpolation_hits_nodes_and_midpoints() {
        let g = RadialGrid::new(21, 2.0).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        assert_eq!(g.interpolate(&f, 1.0), 1.0);
        let mid = 0.5 * (g.node(3) + g.node(4));
        assert!((g.interpolate(&f, mid) - 0.5 * (f[3] + f[4])).abs() < 1e-15);
        assert_eq!(g.interpolate(&f, 5.0), f[20]);
    }
}
