//! Alternating iteration of the field equation and the ground-state problem
//! until the induction and the density reproduce each other.

use crate::eigensolver::{
    eigen_residual, gaussian_reference, ground_state, sector_check, AlphaProfile, FarBoundary,
    GroundState,
};
use crate::error::{domain, Result};
use crate::field_solver::{
    fixed_point_residual, solve_picard, DensityProfile, FieldProfile, PicardOptions, Relaxation,
};
use crate::grid::{sup_distance, RadialGrid};

/// The field solve inside each step is run this much tighter than the outer
/// tolerance.
const INNER_TOL_FACTOR: f64 = 1e-2;

const INNER_MAX_ITER: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new density in `g <- mixing g_new + (1 - mixing) g`.
    pub mixing: f64,
    /// Scan the sectors `-2..=0` after every step and stop if `k = 0` loses.
    pub check_sectors: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, mixing: 0.5, check_sectors: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    /// Sup-norm change of `B` on the cylinder.
    pub field_change: f64,
    /// Sup-norm change of the unmixed density on the cylinder.
    pub density_change: f64,
    pub field_residual: f64,
    pub eigen_residual: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfConsistentSolution {
    pub kappa: f64,
    pub field: FieldProfile,
    pub ground: GroundState,
    pub iterations: usize,
    pub field_residual: f64,
    pub eigen_residual: f64,
    pub converged: bool,
    /// Sector that beat `k = 0` when the iteration was stopped for it.
    pub regime_violation: Option<i32>,
    pub history: Vec<HistoryEntry>,
}

impl SelfConsistentSolution {
    pub fn grid(&self) -> RadialGrid {
        self.field.grid()
    }

    pub fn alpha(&self) -> AlphaProfile {
        AlphaProfile::from_field(&self.field)
    }
}

/// Iterates from the homogeneous Gaussian density. Each step solves the field
/// equation for the current density, takes the ground state in the resulting
/// vector potential and mixes its density into the next iterate.
///
/// Convergence requires the changes of `B` and of the unmixed density, the
/// fixed-point residual of `B` against the new density and the eigen
/// residual all to fall below `tol`. Running out of iterations, or a field
/// solve that does not converge, yields `converged = false` with the history
/// so far rather than an error.
pub fn iterate(
    kappa: f64,
    boundary_b: f64,
    grid: RadialGrid,
    opts: &IterationOptions,
) -> Result<SelfConsistentSolution> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(domain(format!("kappa must be finite and non-negative, got {kappa}")));
    }
    if !(boundary_b > 0.0 && boundary_b < 1.0) {
        return Err(domain(format!("boundary induction must lie in (0, 1), got {boundary_b}")));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !(opts.mixing > 0.0 && opts.mixing <= 1.0) {
        return Err(domain(format!("mixing must lie in (0, 1], got {}", opts.mixing)));
    }
    if opts.max_iter == 0 {
        return Err(domain("at least one iteration is required"));
    }
    let len = grid.cylinder_len();
    let picard = PicardOptions {
        tol: opts.tol * INNER_TOL_FACTOR,
        max_iter: INNER_MAX_ITER,
        relaxation: Relaxation::Auto,
    };
    let reference = gaussian_reference(0.5 * boundary_b, grid)?;
    let mut density = reference.g.clone();
    let mut field = FieldProfile::constant(grid, boundary_b);
    let mut ground = reference;
    let mut history = Vec::new();
    let mut field_residual = f64::INFINITY;
    let mut eigen_res = f64::INFINITY;

    for iteration in 1..=opts.max_iter {
        let next_field = match solve_picard(&density, kappa, boundary_b, &picard) {
            Ok(sol) => sol.field,
            Err(_) => break,
        };
        let alpha = AlphaProfile::from_field(&next_field);
        let next_ground = ground_state(&alpha)?;
        let field_change = sup_distance(field.values(), next_field.values(), len);
        let density_change = sup_distance(ground.g.values(), next_ground.g.values(), len);
        field_residual = fixed_point_residual(&next_field, &next_ground.g, kappa)?;
        eigen_res = next_ground.residual;
        history.push(HistoryEntry {
            iteration,
            field_change,
            density_change,
            field_residual,
            eigen_residual: eigen_res,
            energy: next_ground.energy,
        });

        let mixed: Vec<f64> = density
            .values()
            .iter()
            .zip(next_ground.g.values())
            .map(|(old, new)| opts.mixing * new + (1.0 - opts.mixing) * old)
            .collect();
        density = DensityProfile::new(grid, mixed)?;
        field = next_field;
        ground = next_ground;

        if opts.check_sectors {
            let report = sector_check(&alpha, -2..=0, FarBoundary::Dirichlet)?;
            if report.best_k != 0 {
                return Ok(SelfConsistentSolution {
                    kappa,
                    field,
                    ground,
                    iterations: iteration,
                    field_residual,
                    eigen_residual: eigen_res,
                    converged: false,
                    regime_violation: Some(report.best_k),
                    history,
                });
            }
        }

        let tol = opts.tol;
        if field_change < tol && density_change < tol && field_residual < tol && eigen_res < tol {
            return Ok(SelfConsistentSolution {
                kappa,
                field,
                ground,
                iterations: iteration,
                field_residual,
                eigen_residual: eigen_res,
                converged: true,
                regime_violation: None,
                history,
            });
        }
    }
    Ok(SelfConsistentSolution {
        kappa,
        field,
        ground,
        iterations: history.len(),
        field_residual,
        eigen_residual: eigen_res,
        converged: false,
        regime_violation: None,
        history,
    })
}

/// Fixed-point residual of the field against the density and eigen residual
/// of the ground state in the field's vector potential, both recomputed from
/// the final pair.
pub fn residuals(sol: &SelfConsistentSolution) -> Result<(f64, f64)> {
    let field = fixed_point_residual(&sol.field, &sol.ground.g, sol.kappa)?;
    let eigen = eigen_residual(&sol.alpha(), &sol.ground, FarBoundary::Dirichlet)?;
    Ok((field, eigen))
}
