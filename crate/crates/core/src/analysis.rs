//! Physical read-outs of self-consistent solutions: the ground-energy curve,
//! its slope at zero field, critical fields, the phase of the cylinder in an
//! applied field, the penetration depth and the London current.

use rayon::prelude::*;

use crate::constants::{ELECTRON_MASS, ELEMENTARY_CHARGE, EPS0, HBAR, LIGHT_SPEED, MU0};
use crate::error::{domain, Error, Result};
use crate::grid::{confining_rho_max, RadialGrid};
use crate::self_consistent::{iterate, IterationOptions, SelfConsistentSolution};

/// Slope magnitude below which a negative magnetization slope is attributed
/// to discretization noise.
pub const TAU_SLOPE_TOL: f64 = 1e-6;

/// Field steps used for the zero-field slope.
pub const TAU_STEPS: [f64; 2] = [0.02, 0.04];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub b: f64,
    /// `None` when the self-consistent iteration did not converge.
    pub energy: Option<f64>,
    pub iterations: usize,
    pub regime_violation: Option<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySweep {
    pub kappa: f64,
    pub points: Vec<SweepPoint>,
    /// Converged energies do not decrease with `b`.
    pub monotone: bool,
}

impl EnergySweep {
    /// `(b, energy)` of the converged points.
    pub fn curve(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.energy.map(|e| (p.b, e))).collect()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.energy.is_none()).map(|p| p.b).collect()
    }
}

/// Self-consistent ground energy at each `b` in `(0, 1)`. Every point gets a
/// grid with `per_unit` intervals across the cylinder reaching out to the
/// Gaussian tail of its own field. Points run in parallel.
pub fn energy_sweep(
    kappa: f64,
    b_values: &[f64],
    per_unit: usize,
    opts: &IterationOptions,
) -> Result<EnergySweep> {
    if let Some(b) = b_values.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(domain(format!("sweep fields must lie in (0, 1), got {b}")));
    }
    let points = b_values
        .par_iter()
        .map(|&b| {
            let grid = RadialGrid::with_spacing(per_unit, confining_rho_max(0.5 * b))?;
            let sol = iterate(kappa, b, grid, opts)?;
            Ok(SweepPoint {
                b,
                energy: sol.converged.then_some(sol.ground.energy),
                iterations: sol.iterations,
                regime_violation: sol.regime_violation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sweep = EnergySweep { kappa, points, monotone: true };
    let mut curve = sweep.curve();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    sweep.monotone = curve.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(sweep)
}

/// Slope of the energy curve at `b = 0` from the three lowest points
/// `0, s, 2 s`: the derivative of the interpolating parabola,
/// `(4 E(s) - E(2 s) - 3 E(0)) / (2 s)`. The zero-field energy vanishes, so
/// the point `(0, 0)` is added when the curve lacks it.
pub fn magnetization_tau(curve: &[(f64, f64)]) -> Result<f64> {
    let mut points: Vec<(f64, f64)> = curve.to_vec();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    if points.first().is_none_or(|p| p.0 != 0.0) {
        points.insert(0, (0.0, 0.0));
    }
    if points.len() < 3 {
        return Err(Error::Input(format!(
            "slope at zero field needs 3 points including the origin, got {}",
            points.len()
        )));
    }
    let (e0, (s, e1), (s2, e2)) = (points[0].1, points[1], points[2]);
    if (s2 - 2.0 * s).abs() > 1e-9 * s {
        return Err(Error::Input(format!(
            "the two lowest fields must be s and 2s, got {s} and {s2}"
        )));
    }
    let tau = (4.0 * e1 - e2 - 3.0 * e0) / (2.0 * s);
    if tau < -TAU_SLOPE_TOL {
        return Err(Error::InvariantViolation(format!("negative magnetization slope {tau:.3e}")));
    }
    Ok(tau)
}

/// Centered slopes `(b_mid, dE/db)` between consecutive points of a curve.
pub fn slope_curve(curve: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut points = curve.to_vec();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points
        .windows(2)
        .map(|w| (0.5 * (w[0].0 + w[1].0), (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
        .collect()
}

/// Material and geometry data in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub particle_mass: f64,
    pub charge: f64,
    /// Number density of charge carriers, 1/m^3.
    pub density: f64,
    pub radius: f64,
    pub mu0: f64,
    pub eps0: f64,
    pub light_speed: f64,
}

impl Default for PhysicalParams {
    /// Electron pairs at `1e27 / m^3` in a cylinder of radius 1 micron.
    fn default() -> Self {
        Self {
            particle_mass: 2.0 * ELECTRON_MASS,
            charge: 2.0 * ELEMENTARY_CHARGE,
            density: 1e27,
            radius: 1e-6,
            mu0: MU0,
            eps0: EPS0,
            light_speed: LIGHT_SPEED,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("particle_mass", self.particle_mass),
            ("charge", self.charge),
            ("density", self.density),
            ("radius", self.radius),
            ("mu0", self.mu0),
            ("eps0", self.eps0),
            ("light_speed", self.light_speed),
        ];
        match fields.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            Some((name, v)) => Err(domain(format!("{name} must be positive, got {v}"))),
            None => Ok(()),
        }
    }

    /// Unit of induction, `hbar / (e R^2)`, in tesla.
    pub fn field_unit(&self) -> f64 {
        HBAR / (self.charge * self.radius * self.radius)
    }

    /// Unit of energy, `hbar^2 / (2 m R^2)`, in joule.
    pub fn energy_unit(&self) -> f64 {
        HBAR * HBAR / (2.0 * self.particle_mass * self.radius * self.radius)
    }
}

/// Critical fields as applied fields `H`, in A/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFields {
    /// Field below which the induction is expelled completely.
    pub h0: f64,
    /// Finite-size field `hbar / (e R^2 mu0)`.
    pub hc_r: f64,
    /// `h0 + hc_r`, where the field penetrates.
    pub hc0: f64,
}

/// Converts the dimensionless slope `tau` to `dE/dB = tau hbar e / (2 m)` in
/// J/T and forms `H0 = d dE/dB`.
pub fn critical_fields(params: &PhysicalParams, tau: f64) -> Result<CriticalFields> {
    params.validate()?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(domain(format!("magnetization slope must be non-negative, got {tau}")));
    }
    let tau_si = tau * params.energy_unit() / params.field_unit();
    let h0 = params.density * tau_si;
    let hc_r = params.field_unit() / params.mu0;
    Ok(CriticalFields { h0, hc_r, hc0: h0 + hc_r })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Expelled,
    SurfaceDecay,
    Penetrating,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Expelled => "expelled",
            Phase::SurfaceDecay => "surface_decay",
            Phase::Penetrating => "penetrating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReport {
    pub applied_h: f64,
    pub h0: f64,
    pub hc_r: f64,
    pub hc0: f64,
    pub phase: Phase,
    /// Boundary value `max(H - H0, 0)` of the field inside.
    pub boundary_bf: f64,
}

/// Phase of the cylinder in the applied field `H`: expelled for `H <= H0`,
/// penetrating for `H >= H0 + HcR`, exponential surface decay in between.
pub fn phase_classify(applied_h: f64, h0: f64, hc_r: f64) -> Result<PhaseReport> {
    if !(h0 >= 0.0 && hc_r >= 0.0 && applied_h.is_finite()) {
        return Err(domain(format!(
            "need finite H and non-negative H0, HcR, got {applied_h}, {h0}, {hc_r}"
        )));
    }
    let hc0 = h0 + hc_r;
    let phase = if applied_h <= h0 {
        Phase::Expelled
    } else if applied_h < hc0 {
        Phase::SurfaceDecay
    } else {
        Phase::Penetrating
    };
    Ok(PhaseReport { applied_h, h0, hc_r, hc0, phase, boundary_bf: (applied_h - h0).max(0.0) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenetrationDepth {
    /// `sqrt(eps0 m c^2 / (d e^2))`, in meters.
    pub delta: f64,
    /// `R / delta`.
    pub kappa: f64,
}

pub fn penetration_depth(params: &PhysicalParams) -> Result<PenetrationDepth> {
    params.validate()?;
    let delta = (params.eps0 * params.particle_mass * params.light_speed.powi(2)
        / (params.density * params.charge.powi(2)))
    .sqrt();
    Ok(PenetrationDepth { delta, kappa: params.radius / delta })
}

/// London current `j = -g a` on the cylinder nodes.
pub fn current_profile(sol: &SelfConsistentSolution) -> Vec<f64> {
    let a = crate::field_solver::vector_potential(&sol.field);
    let len = sol.grid().cylinder_len();
    sol.ground.g.values()[..len].iter().zip(&a[..len]).map(|(g, a)| -g * a).collect()
}
