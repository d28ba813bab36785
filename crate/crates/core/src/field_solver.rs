//! Magnetic induction inside the cylinder for a given particle density.
//!
//! The induction `B(rho)` (units of `hbar / (e R^2)`) solves
//!
//! ```text
//! B(rho) = b - kappa^2 ∫_rho^1 du g(u)/u ∫_0^u dv v B(v),      B(1) = b,
//! ```
//!
//! where `g` is the ground-state density and `kappa = R / delta`. Three routes
//! are provided: Picard iteration of the right-hand side, the closed form
//! for constant density, and a slab-wise Bessel solution for piecewise-constant
//! density. Outside the cylinder the induction is the constant `b`.

use crate::error::{domain, Error, Result};
use crate::grid::{cumulative_trapezoid, RadialGrid};
use crate::special_functions::{
    bessel_i0_log, bessel_i0_scaled, bessel_i1_scaled, bessel_k0_scaled, bessel_k1_scaled,
    ratio_threshold,
};

/// Exponential decay rate per unit `kappa (1 - rho)` guaranteed when the
/// square root of the density stays above `0.8779`.
pub const LINEAR_DECAY_RATE: f64 = 0.4389;

/// Relative slack allowed in the bound and monotonicity checks.
pub const MONOTONE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Initial,
    Picard,
    BesselPiecewise,
    AnalyticConstantG,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Initial => "initial",
            Provenance::Picard => "picard",
            Provenance::BesselPiecewise => "bessel-piecewise",
            Provenance::AnalyticConstantG => "analytic",
        }
    }
}

/// Induction sampled on every node of a grid, equal to `boundary_b` from the
/// surface outwards.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    grid: RadialGrid,
    values: Vec<f64>,
    boundary_b: f64,
    provenance: Provenance,
}

impl FieldProfile {
    pub fn constant(grid: RadialGrid, boundary_b: f64) -> Self {
        Self { grid, values: vec![boundary_b; grid.len()], boundary_b, provenance: Provenance::Initial }
    }

    /// Wraps nodal values. The surface node and everything beyond it must
    /// equal `boundary_b`.
    pub fn from_values(
        grid: RadialGrid,
        values: Vec<f64>,
        boundary_b: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        grid.check_len("field profile", &values)?;
        let m = grid.boundary_index();
        let slack = 1e-12 * boundary_b.abs().max(1.0);
        if values[m..].iter().any(|v| (v - boundary_b).abs() > slack) {
            return Err(Error::InvariantViolation(format!(
                "field must equal the boundary value {boundary_b} on and outside the surface"
            )));
        }
        Ok(Self { grid, values, boundary_b, provenance })
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values on `[0, 1]`.
    pub fn cylinder_values(&self) -> &[f64] {
        &self.values[..self.grid.cylinder_len()]
    }

    pub fn boundary_b(&self) -> f64 {
        self.boundary_b
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn at(&self, rho: f64) -> f64 {
        self.grid.interpolate(&self.values, rho)
    }

    /// Checks `0 <= B <= b` and that `B` does not decrease towards the
    /// surface, both up to `MONOTONE_SLACK * b`.
    pub fn check_london_bounds(&self) -> Result<()> {
        let eps = MONOTONE_SLACK * self.boundary_b;
        let inside = self.cylinder_values();
        if let Some((i, v)) =
            inside.iter().enumerate().find(|(_, v)| **v < -eps || **v > self.boundary_b + eps)
        {
            return Err(Error::InvariantViolation(format!(
                "B = {v:.6e} at rho = {:.6} leaves [0, {}]",
                self.grid.node(i),
                self.boundary_b
            )));
        }
        // running minimum from the surface inwards must not be undercut from above
        let mut floor = f64::INFINITY;
        for (i, v) in inside.iter().enumerate().rev() {
            if *v > floor + eps {
                return Err(Error::InvariantViolation(format!(
                    "B increases towards the axis at rho = {:.6}",
                    self.grid.node(i)
                )));
            }
            floor = floor.min(*v);
        }
        Ok(())
    }
}

/// Non-negative particle density `g` on a grid, normalized so that
/// `2 ∫_0^1 g rho drho = 1` when it comes from a ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl DensityProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len("density", &values)?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(domain(format!("density must be finite and non-negative, found {v}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: RadialGrid, s: f64) -> Result<Self> {
        Self::new(grid, vec![s; grid.len()])
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cylinder_values(&self) -> &[f64] {
        &self.values[..self.grid.cylinder_len()]
    }

    pub fn at(&self, rho: f64) -> f64 {
        self.grid.interpolate(&self.values, rho)
    }

    /// `2 ∫_0^1 g rho drho` by the trapezoidal rule.
    pub fn cylinder_mass(&self) -> f64 {
        let h = self.grid.spacing();
        let weighted: Vec<f64> = self
            .cylinder_values()
            .iter()
            .enumerate()
            .map(|(i, g)| g * self.grid.node(i))
            .collect();
        2.0 * crate::grid::trapezoid(&weighted, h)
    }

    pub fn max_in_cylinder(&self) -> f64 {
        self.cylinder_values().iter().copied().fold(0.0, f64::max)
    }

    pub fn min_in_cylinder(&self) -> f64 {
        self.cylinder_values().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(domain(format!("kappa must be finite and non-negative, got {kappa}")));
    }
    Ok(())
}

fn check_boundary(b: f64) -> Result<()> {
    if !(b.is_finite() && b > 0.0) {
        return Err(domain(format!("boundary induction must be finite and positive, got {b}")));
    }
    Ok(())
}

/// One application of the field operator on `[0, 1]`, written into `out`.
///
/// Inner integral `F(u) = ∫_0^u v B` and outer integral of `g F / u` are both
/// single trapezoidal sweeps; `g F / u -> 0` at the axis since `F = O(u^2)`.
fn contract_into(
    grid: RadialGrid,
    field: &[f64],
    density: &[f64],
    kappa_sq: f64,
    boundary_b: f64,
    scratch: &mut Vec<f64>,
    out: &mut [f64],
) {
    let m = grid.boundary_index();
    let h = grid.spacing();
    scratch.clear();
    scratch.push(0.0);
    let mut inner = 0.0;
    let mut prev = 0.0;
    for i in 1..=m {
        let rho = grid.node(i);
        let vb = rho * field[i];
        inner += 0.5 * h * (prev + vb);
        prev = vb;
        scratch.push(density[i] * inner / rho);
    }
    out[m] = boundary_b;
    let mut outer = 0.0;
    for i in (0..m).rev() {
        outer += 0.5 * h * (scratch[i] + scratch[i + 1]);
        out[i] = boundary_b - kappa_sq * outer;
    }
    for v in &mut out[m + 1..] {
        *v = boundary_b;
    }
}

/// Applies the field operator once to `field`, with the boundary value of
/// `field` as the surface condition.
pub fn apply_contraction(
    field: &FieldProfile,
    g: &DensityProfile,
    kappa: f64,
) -> Result<FieldProfile> {
    check_kappa(kappa)?;
    if field.grid != g.grid {
        return Err(Error::GridMismatch("field and density live on different grids".into()));
    }
    let mut out = vec![0.0; field.grid.len()];
    let mut scratch = Vec::with_capacity(field.grid.cylinder_len());
    contract_into(
        field.grid,
        &field.values,
        &g.values,
        kappa * kappa,
        field.boundary_b,
        &mut scratch,
        &mut out,
    );
    Ok(FieldProfile {
        grid: field.grid,
        values: out,
        boundary_b: field.boundary_b,
        provenance: Provenance::Picard,
    })
}

/// Sup-norm of `B - A(B)` on `[0, 1]`.
pub fn fixed_point_residual(field: &FieldProfile, g: &DensityProfile, kappa: f64) -> Result<f64> {
    let image = apply_contraction(field, g, kappa)?;
    Ok(crate::grid::sup_distance(
        field.values(),
        image.values(),
        field.grid.cylinder_len(),
    ))
}

/// Upper bound `kappa^2 ∫_0^1 g u / 2 du` on the sup-norm of the linear part
/// of the field operator. Its spectrum is real and non-negative, so this also
/// bounds the largest eigenvalue.
pub fn linear_part_bound(g: &DensityProfile, kappa: f64) -> f64 {
    kappa * kappa * 0.25 * g.cylinder_mass()
}

/// Length of a surface window `[1 - a, 1]` on which the field operator is a
/// contraction for profiles differing only inside the window: half of
/// `min(1/L, 1/(L b))` with `L = kappa^2 max g`, capped at 1.
pub fn contraction_window(g: &DensityProfile, kappa: f64, boundary_b: f64) -> f64 {
    let lip = kappa * kappa * g.max_in_cylinder();
    if lip == 0.0 {
        return 1.0;
    }
    (0.5 * (1.0 / lip).min(1.0 / (lip * boundary_b))).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relaxation {
    /// Plain Picard steps.
    None,
    /// `B <- B + omega (A B - B)` with a fixed `omega` in `(0, 1]`.
    Fixed(f64),
    /// `omega = 2 / (2 + M)` whenever the bound `M` from [`linear_part_bound`]
    /// reaches 0.9, plain steps otherwise.
    Auto,
}

impl Relaxation {
    pub fn factor(&self, g: &DensityProfile, kappa: f64) -> Result<f64> {
        match *self {
            Relaxation::None => Ok(1.0),
            Relaxation::Fixed(w) if w > 0.0 && w <= 1.0 => Ok(w),
            Relaxation::Fixed(w) => Err(domain(format!("relaxation must lie in (0, 1], got {w}"))),
            Relaxation::Auto => {
                let bound = linear_part_bound(g, kappa);
                Ok(if bound < 0.9 { 1.0 } else { 2.0 / (2.0 + bound) })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Stop once `sup |A B - B| < tol` on the cylinder.
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: Relaxation,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100_000, relaxation: Relaxation::Auto }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSolution {
    pub field: FieldProfile,
    pub iterations: usize,
    pub residual: f64,
    pub relaxation: f64,
}

/// Fixed point of the field operator, iterated from the constant profile `b`.
///
/// The iteration runs on the whole cylinder at once. For large `kappa` the
/// plain iteration is not contractive on `[0, 1]`, which is why the default
/// options under-relax. A converged profile that leaves `[0, b]` or is not
/// monotone is reported as an invariant violation.
pub fn solve_picard(
    g: &DensityProfile,
    kappa: f64,
    boundary_b: f64,
    opts: &PicardOptions,
) -> Result<PicardSolution> {
    check_kappa(kappa)?;
    check_boundary(boundary_b)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let grid = g.grid;
    let omega = opts.relaxation.factor(g, kappa)?;
    let kappa_sq = kappa * kappa;
    let len = grid.cylinder_len();
    let mut field = vec![boundary_b; grid.len()];
    let mut image = vec![0.0; grid.len()];
    let mut scratch = Vec::with_capacity(len);
    let mut residual = f64::INFINITY;
    for iteration in 1..=opts.max_iter {
        contract_into(grid, &field, &g.values, kappa_sq, boundary_b, &mut scratch, &mut image);
        residual = crate::grid::sup_distance(&field, &image, len);
        if !residual.is_finite() {
            break;
        }
        if residual < opts.tol {
            let profile = FieldProfile { grid, values: field, boundary_b, provenance: Provenance::Picard };
            profile.check_london_bounds()?;
            return Ok(PicardSolution { field: profile, iterations: iteration, residual, relaxation: omega });
        }
        for (b, a) in field[..len].iter_mut().zip(&image[..len]) {
            *b += omega * (a - *b);
        }
    }
    Err(Error::Convergence { iterations: opts.max_iter, residual })
}

/// Closed-form induction for constant density `s`:
/// `B(rho) = b I0(kappa sqrt(s) rho) / I0(kappa sqrt(s))`.
pub fn analytic_constant_g(
    s: f64,
    kappa: f64,
    boundary_b: f64,
    grid: RadialGrid,
) -> Result<FieldProfile> {
    if !(s.is_finite() && s > 0.0) {
        return Err(domain(format!("constant density must be positive, got {s}")));
    }
    check_kappa(kappa)?;
    check_boundary(boundary_b)?;
    let k = kappa * s.sqrt();
    let top = bessel_i0_log(k)?;
    let m = grid.boundary_index();
    let mut values = vec![boundary_b; grid.len()];
    for (i, v) in values.iter_mut().enumerate().take(m) {
        *v = boundary_b * (bessel_i0_log(k * grid.node(i))? - top).exp();
    }
    Ok(FieldProfile { grid, values, boundary_b, provenance: Provenance::AnalyticConstantG })
}

/// Solution on one slab of constant wave number `k`, normalized to `B = 1`
/// at the lower edge and carrying `F = ∫_0^rho v B dv` through it.
enum Slab {
    /// Slab touching the axis: `B = I0(k rho)`.
    Axis { k: f64 },
    /// Zero density: `B` stays constant and `F` grows like `rho^2 / 2`.
    Flat { lo: f64, flux: f64 },
    /// `B = P I0(k rho) + Q K0(k rho)`, stored in exponentially scaled form.
    General { k: f64, z: f64, p: f64, q: f64 },
}

const FLAT_WAVE_NUMBER: f64 = 1e-12;

impl Slab {
    /// `flux` is `F / B` at the lower edge `lo`.
    fn new(lo: f64, k: f64, flux: f64) -> Result<Self> {
        if k < FLAT_WAVE_NUMBER {
            return Ok(if lo == 0.0 { Slab::Flat { lo: 0.0, flux: 0.0 } } else { Slab::Flat { lo, flux } });
        }
        if lo == 0.0 {
            return Ok(Slab::Axis { k });
        }
        let z = k * lo;
        let slope = k * flux / lo;
        let (i0, i1) = (bessel_i0_scaled(z)?, bessel_i1_scaled(z)?);
        let (k0, k1) = (bessel_k0_scaled(z)?, bessel_k1_scaled(z)?);
        // Wronskian I0 K1 + I1 K0 = 1/z
        let p = z * (k1 + slope * k0);
        let q = z * (i1 - slope * i0);
        Ok(Slab::General { k, z, p, q })
    }

    /// `(ln B, F / B)` at `rho` relative to the slab's lower edge.
    fn eval(&self, rho: f64) -> Result<(f64, f64)> {
        match *self {
            Slab::Flat { lo, flux } => Ok((0.0, flux + 0.5 * (rho * rho - lo * lo))),
            Slab::Axis { k } => {
                let x = k * rho;
                let i0 = bessel_i0_scaled(x)?;
                let log_b = x + i0.ln();
                let flux = if rho == 0.0 { 0.0 } else { rho * bessel_i1_scaled(x)? / (k * i0) };
                Ok((log_b, flux))
            }
            Slab::General { k, z, p, q } => {
                let x = k * rho;
                let grow = (x - z).exp();
                let decay = (z - x).exp();
                let b = p * bessel_i0_scaled(x)? * grow + q * bessel_k0_scaled(x)? * decay;
                let f = rho / k * (p * bessel_i1_scaled(x)? * grow - q * bessel_k1_scaled(x)? * decay);
                if b.is_nan() || b <= 0.0 {
                    return Err(Error::Discretization(format!(
                        "slab solution lost positivity at rho = {rho}"
                    )));
                }
                Ok((b.ln(), f / b))
            }
        }
    }
}

/// Induction for the density replaced by its value at the top of each slab
/// `[1 - (j+1) delta, 1 - j delta]`.
///
/// On each slab the solution is a combination of `I0` and `K0` of
/// `kappa sqrt(c_j) rho`; `B` and `∫_0^rho v B dv` are continuous across slab
/// edges. The innermost slab, reaching the axis, carries only `I0`, and for a
/// constant density every slab reduces to the single `I0` solution. The
/// distance to the exact solution is first order in `delta`.
pub fn solve_piecewise_bessel(
    g: &DensityProfile,
    step_delta: f64,
    kappa: f64,
    boundary_b: f64,
) -> Result<FieldProfile> {
    if !(step_delta.is_finite() && step_delta > 0.0 && step_delta < 1.0) {
        return Err(domain(format!("slab width must lie in (0, 1), got {step_delta}")));
    }
    check_kappa(kappa)?;
    check_boundary(boundary_b)?;
    let grid = g.grid;
    let slabs = (1.0 / step_delta + 1e-9).floor() as usize;
    let mut edges: Vec<f64> = (0..=slabs).map(|j| 1.0 - j as f64 * step_delta).collect();
    match edges.last_mut() {
        Some(last) if *last <= 1e-12 => *last = 0.0,
        _ => edges.push(0.0),
    }
    edges.reverse();

    let m = grid.boundary_index();
    let mut log_values = vec![0.0; m + 1];
    let mut node = 0;
    let mut log_b = 0.0;
    let mut flux = 0.0;
    let last_slab = edges.len() - 2;
    for s in 0..=last_slab {
        let (lo, hi) = (edges[s], edges[s + 1]);
        let k = kappa * g.at(hi).sqrt();
        let slab = Slab::new(lo, k, flux)?;
        while node <= m && (s == last_slab || grid.node(node) <= hi) {
            log_values[node] = log_b + slab.eval(grid.node(node))?.0;
            node += 1;
        }
        let (step, next_flux) = slab.eval(hi)?;
        log_b += step;
        flux = next_flux;
    }

    let top = log_values[m];
    let mut values = vec![boundary_b; grid.len()];
    for (v, l) in values.iter_mut().zip(&log_values).take(m) {
        *v = boundary_b * (l - top).exp();
    }
    Ok(FieldProfile { grid, values, boundary_b, provenance: Provenance::BesselPiecewise })
}

/// Azimuthal vector potential `a(rho) = (1/rho) ∫_0^rho r B(r) dr` on the
/// whole grid, with `a(0) = 0`. In the units used here this is also the gauge
/// function entering the radial Hamiltonian.
pub fn vector_potential(field: &FieldProfile) -> Vec<f64> {
    let grid = field.grid;
    let weighted: Vec<f64> =
        field.values.iter().enumerate().map(|(i, b)| grid.node(i) * b).collect();
    let flux = cumulative_trapezoid(&weighted, grid.spacing());
    flux.iter()
        .enumerate()
        .map(|(i, f)| if i == 0 { 0.0 } else { f / grid.node(i) })
        .collect()
}

/// Exponential-decay bounds on the induction at an interior point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate {
    pub b_point: f64,
    pub field_value: f64,
    /// `b exp(-kappa/2 ∫_{b_point}^1 sqrt(g))`.
    pub integral_bound: f64,
    /// `b exp(-c kappa (1 - b_point))` with `c = LINEAR_DECAY_RATE`.
    pub linear_bound: f64,
    /// `kappa b_point` exceeds the point where `I1/I0` reaches 1/2.
    pub asymptotic_ok: bool,
    /// `field_value <= integral_bound <= linear_bound`.
    pub chain_holds: bool,
}

impl DecayCertificate {
    /// The chain is only claimed inside the asymptotic regime.
    pub fn certified(&self) -> bool {
        !self.asymptotic_ok || self.chain_holds
    }
}

pub fn decay_certificate(
    field: &FieldProfile,
    g: &DensityProfile,
    b_point: f64,
    kappa: f64,
) -> Result<DecayCertificate> {
    if !(b_point > 0.0 && b_point <= 1.0) {
        return Err(domain(format!("probe point must lie in (0, 1], got {b_point}")));
    }
    check_kappa(kappa)?;
    if field.grid != g.grid {
        return Err(Error::GridMismatch("field and density live on different grids".into()));
    }
    let grid = field.grid;
    let root: Vec<f64> = g.cylinder_values().iter().map(|v| v.sqrt()).collect();
    let running = cumulative_trapezoid(&root, grid.spacing());
    let integral = running[grid.boundary_index()] - grid.interpolate(&running, b_point);
    let b = field.boundary_b;
    let integral_bound = b * (-0.5 * kappa * integral).exp();
    let linear_bound = b * (-LINEAR_DECAY_RATE * kappa * (1.0 - b_point)).exp();
    let field_value = field.at(b_point);
    let p = ratio_threshold(0.5)?;
    Ok(DecayCertificate {
        b_point,
        field_value,
        integral_bound,
        linear_bound,
        asymptotic_ok: kappa * b_point > p,
        chain_holds: field_value <= integral_bound && integral_bound <= linear_bound,
    })
}
