//! Ground state of the radial one-particle Hamiltonian
//!
//! ```text
//! -u'' - u'/rho + (k/rho + alpha(rho))^2 u = E u
//! ```
//!
//! for a given gauge function `alpha`, in units of `hbar^2 / (2 m R^2)`.
//! Wavefunctions are normalized on the cylinder, `2 ∫_0^1 phi^2 rho = 1`, so
//! that the density `g = phi^2` of the homogeneous problem is exactly the
//! Gaussian reference.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::field_solver::{vector_potential, DensityProfile, FieldProfile};
use crate::grid::{trapezoid, RadialGrid};
use crate::tridiagonal::SymTridiagonal;

/// `sqrt(h(1))` for the Gaussian reference at `a_flux = 1/2`, the floor for
/// `sqrt(g)` on the cylinder.
pub const SQRT_DENSITY_FLOOR: f64 = 0.8779;

/// Relative tolerance on the change of the eigenvalue between iterations.
pub const EIGEN_TOL: f64 = 1e-12;

pub const EIGEN_MAX_ITER: usize = 500;

/// Energies within this relative distance count as degenerate in
/// [`sector_check`].
pub const SECTOR_TIE_TOL: f64 = 1e-6;

/// Condition imposed at the outer edge of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarBoundary {
    /// `u = 0`; the natural choice on a grid extending well past the cylinder.
    Dirichlet,
    /// `u' = 0`; on a cylinder-only grid this confines the particle to the
    /// cylinder.
    Neumann,
}

/// Gauge function `alpha(rho)` on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaProfile {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl AlphaProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len("gauge function", &values)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("gauge function must be finite"));
        }
        if values[0] != 0.0 {
            return Err(domain(format!("gauge function must vanish on the axis, got {}", values[0])));
        }
        Ok(Self { grid, values })
    }

    /// `alpha = a_flux rho`, the homogeneous field `b = 2 a_flux`.
    pub fn homogeneous(grid: RadialGrid, a_flux: f64) -> Self {
        Self { grid, values: grid.nodes().iter().map(|r| a_flux * r).collect() }
    }

    pub fn from_field(field: &FieldProfile) -> Self {
        Self { grid: field.grid(), values: vector_potential(field) }
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub grid: RadialGrid,
    /// Positive radial wavefunction, cylinder normalized.
    pub phi: Vec<f64>,
    pub energy: f64,
    pub g: DensityProfile,
    pub sector_k: i32,
    /// `2 ∫_1^rho_max phi^2 rho`, the mass left outside the cylinder.
    pub tail_mass: f64,
    /// Emergent surface parameter `-phi'(1) / phi(1)`.
    pub sigma: f64,
    /// Sup-norm eigen-equation residual of the unit discrete eigenvector,
    /// relative to `max(1, energy)`.
    pub residual: f64,
    pub iterations: usize,
}

/// Closed-form ground state for `alpha = a_flux rho`:
/// `h = a / (1 - e^{-a}) e^{-a rho^2}` and `E = 2 a`.
pub fn gaussian_reference(a_flux: f64, grid: RadialGrid) -> Result<GroundState> {
    if !(a_flux > 0.0 && a_flux <= 0.5) {
        return Err(domain(format!("flux parameter must lie in (0, 1/2], got {a_flux}")));
    }
    let amplitude = a_flux / -(-a_flux).exp_m1();
    let h: Vec<f64> = grid.nodes().iter().map(|r| amplitude * (-a_flux * r * r).exp()).collect();
    let phi = h.iter().map(|v| v.sqrt()).collect();
    // 2 ∫_1^∞ h rho = e^{-a} / (1 - e^{-a})
    let tail_mass = 1.0 / a_flux.exp_m1();
    Ok(GroundState {
        grid,
        phi,
        energy: 2.0 * a_flux,
        g: DensityProfile::new(grid, h)?,
        sector_k: 0,
        tail_mass,
        sigma: a_flux,
        residual: 0.0,
        iterations: 0,
    })
}

/// Finite-volume discretization on the nodes `first..=last`, symmetrized with
/// the cell areas `w`: the eigenproblem `A u = E W u` becomes
/// `W^{-1/2} A W^{-1/2} v = E v`.
struct RadialOperator {
    first: usize,
    weights: Vec<f64>,
    matrix: SymTridiagonal,
}

impl RadialOperator {
    fn new(alpha: &AlphaProfile, k: i32, far: FarBoundary) -> Result<Self> {
        let grid = alpha.grid;
        let n = grid.len();
        let h = grid.spacing();
        let first = usize::from(k != 0);
        let last = match far {
            FarBoundary::Dirichlet => n - 2,
            FarBoundary::Neumann => n - 1,
        };
        if last < first + 1 {
            return Err(domain("grid too small for the eigenproblem"));
        }
        let kf = f64::from(k);
        let mut diag = Vec::with_capacity(last - first + 1);
        let mut weights = Vec::with_capacity(last - first + 1);
        for i in first..=last {
            let fi = i as f64;
            let inward = if i == 0 { 0.0 } else { fi - 0.5 };
            let (outward, w) = if i == 0 {
                (0.5, h * h / 8.0)
            } else if i == n - 1 {
                (0.0, (0.5 * fi - 0.125) * h * h)
            } else {
                (fi + 0.5, fi * h * h)
            };
            let rho = grid.node(i);
            let potential = if i == 0 {
                alpha.values[0].powi(2)
            } else {
                (kf / rho + alpha.values[i]).powi(2)
            };
            diag.push((inward + outward + w * potential) / w);
            weights.push(w);
        }
        let off = (first..last)
            .map(|i| -(i as f64 + 0.5) / (weights[i - first] * weights[i + 1 - first]).sqrt())
            .collect();
        Ok(Self { first, weights, matrix: SymTridiagonal { diag, off } })
    }
}

/// Ground state of the `k = 0` sector with a Dirichlet condition at the
/// outer edge of the grid.
pub fn ground_state(alpha: &AlphaProfile) -> Result<GroundState> {
    ground_state_in_sector(alpha, 0, FarBoundary::Dirichlet)
}

/// Lowest eigenpair in angular-momentum sector `k`. The `k = 0` sector is
/// regular at the axis; other sectors vanish there.
pub fn ground_state_in_sector(alpha: &AlphaProfile, k: i32, far: FarBoundary) -> Result<GroundState> {
    let grid = alpha.grid;
    let op = RadialOperator::new(alpha, k, far)?;
    let pair = op.matrix.lowest(EIGEN_TOL, EIGEN_MAX_ITER)?;
    if pair.value < -1e-10 {
        return Err(Error::Discretization(format!(
            "negative ground energy {:.3e}",
            pair.value
        )));
    }
    let peak = pair.vector.iter().copied().fold(0.0, f64::max);
    if pair.vector.iter().any(|v| *v < -1e-10 * peak) {
        return Err(Error::Discretization("ground state changes sign".into()));
    }

    let mut phi = vec![0.0; grid.len()];
    for (j, (v, w)) in pair.vector.iter().zip(&op.weights).enumerate() {
        phi[op.first + j] = v.max(0.0) / w.sqrt();
    }
    let h = grid.spacing();
    let m = grid.boundary_index();
    let mass = |phi: &[f64], range: std::ops::Range<usize>| {
        let integrand: Vec<f64> = range.map(|i| phi[i] * phi[i] * grid.node(i)).collect();
        2.0 * trapezoid(&integrand, h)
    };
    let norm = mass(&phi, 0..m + 1);
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::Discretization("ground state vanishes on the cylinder".into()));
    }
    let scale = norm.sqrt().recip();
    phi.iter_mut().for_each(|v| *v *= scale);
    let tail_mass = mass(&phi, m..grid.len());
    let slope = if m + 1 < grid.len() {
        (phi[m + 1] - phi[m - 1]) / (2.0 * h)
    } else {
        (3.0 * phi[m] - 4.0 * phi[m - 1] + phi[m - 2]) / (2.0 * h)
    };
    let sigma = -slope / phi[m];
    let g = DensityProfile::new(grid, phi.iter().map(|v| v * v).collect())?;
    Ok(GroundState {
        grid,
        phi,
        energy: pair.value,
        g,
        sector_k: k,
        tail_mass,
        sigma,
        residual: pair.residual / pair.value.abs().max(1.0),
        iterations: pair.iterations,
    })
}

/// Sup-norm residual of the discrete eigen-equation for `state` in the
/// potential built from `alpha`, recomputed from scratch. The wavefunction is
/// taken in the symmetric form with unit 2-norm and the residual is relative
/// to `max(1, energy)`.
pub fn eigen_residual(alpha: &AlphaProfile, state: &GroundState, far: FarBoundary) -> Result<f64> {
    if alpha.grid != state.grid {
        return Err(Error::GridMismatch("gauge function and ground state live on different grids".into()));
    }
    let op = RadialOperator::new(alpha, state.sector_k, far)?;
    let psi: Vec<f64> =
        op.weights.iter().enumerate().map(|(j, w)| state.phi[op.first + j] * w.sqrt()).collect();
    let norm = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let image = op.matrix.apply(&psi);
    let sup = image
        .iter()
        .zip(&psi)
        .map(|(a, b)| (a - state.energy * b).abs())
        .fold(0.0, f64::max);
    Ok(sup / norm / state.energy.abs().max(1.0))
}

pub fn density_g(state: &GroundState) -> &DensityProfile {
    &state.g
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorReport {
    /// `(k, lowest energy in sector k)` in the order of the scanned range.
    pub energies: Vec<(i32, f64)>,
    pub best_k: i32,
}

/// Scans the sectors in `k_range` and returns the one with the lowest energy.
/// Sectors within `SECTOR_TIE_TOL` of the minimum are degenerate and the one
/// with the smallest `|k|` wins.
pub fn sector_check(
    alpha: &AlphaProfile,
    k_range: RangeInclusive<i32>,
    far: FarBoundary,
) -> Result<SectorReport> {
    if !(k_range.contains(&0) && k_range.contains(&-1)) {
        return Err(domain("sector range must contain 0 and -1"));
    }
    let energies = k_range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| ground_state_in_sector(alpha, k, far).map(|s| (k, s.energy)))
        .collect::<Result<Vec<_>>>()?;
    let lowest = energies.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let cutoff = lowest + SECTOR_TIE_TOL * lowest.abs().max(1e-12);
    let best_k = energies
        .iter()
        .filter(|(_, e)| *e <= cutoff)
        .min_by_key(|(k, _)| k.abs())
        .map(|(k, _)| *k)
        .unwrap_or(0);
    Ok(SectorReport { energies, best_k })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `g - h` on the cylinder nodes.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin_rho: f64,
    pub min_sqrt_g: f64,
    /// `g >= h - eps` everywhere on the cylinder.
    pub dominates: bool,
    /// `min sqrt(g) >= SQRT_DENSITY_FLOOR - eps`.
    pub above_floor: bool,
}

/// Compares a London ground-state density `g` against the Gaussian reference
/// `h` on the cylinder. Failures are reported, not raised.
pub fn comparison_check(g: &DensityProfile, h: &DensityProfile, eps: f64) -> Result<ComparisonReport> {
    if g.grid() != h.grid() {
        return Err(Error::GridMismatch("density and reference live on different grids".into()));
    }
    let margins: Vec<f64> =
        g.cylinder_values().iter().zip(h.cylinder_values()).map(|(a, b)| a - b).collect();
    let (argmin, min_margin) = margins
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    let min_sqrt_g = g.min_in_cylinder().sqrt();
    Ok(ComparisonReport {
        margins,
        min_margin,
        argmin_rho: g.grid().node(argmin),
        min_sqrt_g,
        dominates: min_margin >= -eps,
        above_floor: min_sqrt_g >= SQRT_DENSITY_FLOOR - eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::confining_rho_max;

    const J01: f64 = 2.404_825_557_695_773;
    const J11: f64 = 3.831_705_970_207_512;

    fn gaussian_grid(n: usize) -> RadialGrid {
        RadialGrid::new(n, confining_rho_max(0.5)).unwrap()
    }

    #[test]
    fn gaussian_reference_values() {
        let grid = gaussian_grid(2001);
        let gs = gaussian_reference(0.5, grid).unwrap();
        assert_eq!(gs.energy, 1.0);
        assert!((gs.phi[grid.boundary_index()] - 0.877_922).abs() < 1e-6);
        assert!((gs.phi[0] - 1.127_274).abs() < 1e-6);
        assert!((gs.g.cylinder_mass() - 1.0).abs() < 1e-5);
        let flat = gaussian_reference(1e-9, grid).unwrap();
        assert!(flat.g.cylinder_values().iter().all(|v| (v - 1.0).abs() < 1e-8));
        assert!(gaussian_reference(0.0, grid).is_err());
        assert!(gaussian_reference(0.7, grid).is_err());
    }

    #[test]
    fn harmonic_ground_state_matches_gaussian() {
        let grid = gaussian_grid(2001);
        let gs = ground_state(&AlphaProfile::homogeneous(grid, 0.5)).unwrap();
        assert!((gs.energy - 1.0).abs() < 1e-4, "{}", gs.energy);
        let reference = gaussian_reference(0.5, grid).unwrap();
        for i in 0..grid.len() {
            assert!((gs.phi[i] - reference.phi[i]).abs() < 1e-4);
        }
        assert!((gs.g.cylinder_mass() - 1.0).abs() < 1e-12);
        assert!((gs.tail_mass - reference.tail_mass).abs() < 1e-3);
        assert!((gs.sigma - 0.5).abs() < 1e-3);
        assert!(gs.residual < 1e-8);
        let recomputed = eigen_residual(&AlphaProfile::homogeneous(grid, 0.5), &gs, FarBoundary::Dirichlet).unwrap();
        assert!((recomputed - gs.residual).abs() < 1e-10);
        let wrong = eigen_residual(&AlphaProfile::homogeneous(grid, 0.6), &gs, FarBoundary::Dirichlet).unwrap();
        assert!(wrong > 1e-3);
    }

    #[test]
    fn harmonic_error_is_second_order() {
        let errors: Vec<f64> = [501, 1001, 2001]
            .iter()
            .map(|n| {
                let grid = gaussian_grid(*n);
                (ground_state(&AlphaProfile::homogeneous(grid, 0.5)).unwrap().energy - 1.0).abs()
            })
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8 && order < 2.2, "{errors:?}");
        }
    }

    #[test]
    fn free_particle_in_cylinder() {
        let grid = RadialGrid::cylinder(801).unwrap();
        let zero = AlphaProfile::new(grid, vec![0.0; grid.len()]).unwrap();
        let neumann = ground_state_in_sector(&zero, 0, FarBoundary::Neumann).unwrap();
        assert!(neumann.energy.abs() < 1e-10);
        assert!(neumann.phi.iter().all(|v| (v - 1.0).abs() < 1e-8));
        let dirichlet = ground_state_in_sector(&zero, 0, FarBoundary::Dirichlet).unwrap();
        assert!((dirichlet.energy - J01 * J01).abs() < 1e-4);
        let k1 = ground_state_in_sector(&zero, 1, FarBoundary::Dirichlet).unwrap();
        assert!((k1.energy - J11 * J11).abs() < 1e-3);
        assert_eq!(k1.phi[0], 0.0);
    }

    #[test]
    fn weaker_potential_lowers_energy() {
        let grid = gaussian_grid(1001);
        let strong = ground_state(&AlphaProfile::homogeneous(grid, 0.5)).unwrap();
        let values = grid.nodes().iter().map(|r| 0.5 * r * (-(1.0 - r).max(0.0)).exp()).collect();
        let weak = ground_state(&AlphaProfile::new(grid, values).unwrap()).unwrap();
        assert!(weak.energy <= strong.energy);
    }

    #[test]
    fn alpha_must_vanish_on_axis() {
        let grid = RadialGrid::cylinder(11).unwrap();
        assert!(AlphaProfile::new(grid, vec![0.1; 11]).is_err());
        assert!(AlphaProfile::new(grid, vec![0.0; 10]).is_err());
    }

    #[test]
    fn sectors_for_weak_and_strong_fields() {
        let grid = gaussian_grid(1001);
        let weak = sector_check(&AlphaProfile::homogeneous(grid, 0.45), -2..=0, FarBoundary::Dirichlet).unwrap();
        assert_eq!(weak.best_k, 0);
        let zero = AlphaProfile::new(grid, vec![0.0; grid.len()]).unwrap();
        assert_eq!(sector_check(&zero, -2..=2, FarBoundary::Dirichlet).unwrap().best_k, 0);
        let cylinder = RadialGrid::cylinder(801).unwrap();
        let strong =
            sector_check(&AlphaProfile::homogeneous(cylinder, 20.0), -30..=0, FarBoundary::Neumann).unwrap();
        assert!(strong.best_k < 0, "{:?}", strong.best_k);
        assert!(sector_check(&zero, 0..=3, FarBoundary::Dirichlet).is_err());
    }

    #[test]
    fn comparison_of_reference_with_itself() {
        let grid = gaussian_grid(501);
        let h = gaussian_reference(0.5, grid).unwrap().g;
        let report = comparison_check(&h, &h, 1e-12).unwrap();
        assert!(report.margins.iter().all(|m| *m == 0.0));
        assert!(report.dominates && report.above_floor);
        assert!((report.min_sqrt_g - 0.877_922).abs() < 1e-6);
    }
}
