//! One function per run mode, each producing a [`Report`].

use std::path::Path;

use meissner_core::analysis::{
    critical_fields, current_profile, energy_sweep, magnetization_tau, penetration_depth,
    phase_classify, slope_curve, PhysicalParams, TAU_STEPS,
};
use meissner_core::eigensolver::{
    comparison_check, gaussian_reference, ground_state, sector_check, AlphaProfile, FarBoundary,
    SQRT_DENSITY_FLOOR,
};
use meissner_core::field_solver::{
    analytic_constant_g, decay_certificate, solve_picard, solve_piecewise_bessel, vector_potential,
    DensityProfile, FieldProfile, PicardOptions,
};
use meissner_core::grid::{confining_rho_max, sup_distance};
use meissner_core::self_consistent::{iterate, residuals, IterationOptions};
use meissner_core::special_functions::{bessel_i1_over_i0, ratio_threshold};
use meissner_core::RadialGrid;

use crate::config::{Mode, RhoMax, RunConfig};
use crate::error::CliError;
use crate::output::{Report, Table, Value};

/// Probe point of the decay certificate.
pub const DECAY_PROBE: f64 = 0.5;

/// Coupling used by `verify` when none is configured.
pub const VERIFY_KAPPA: f64 = 10.0;

/// Tolerance of the constant-density field check in `verify`.
pub const VERIFY_ORACLE_TOL: f64 = 1e-5;

/// Outcome of a run: the report to write and, when the run should exit
/// non-zero after writing it, the error to report.
pub struct RunOutcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

impl From<Report> for RunOutcome {
    fn from(report: Report) -> Self {
        Self { report, failure: None }
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    match cfg.mode {
        Mode::SolveField => solve_field(cfg).map(Into::into),
        Mode::Eigensolve => eigensolve(cfg).map(Into::into),
        Mode::SelfConsistent => self_consistent(cfg),
        Mode::Sweep => sweep(cfg),
        Mode::Phase => phase(cfg).map(Into::into),
        Mode::Verify => verify(cfg),
    }
}

fn kappa(cfg: &RunConfig) -> Result<f64, CliError> {
    cfg.kappa
        .ok_or_else(|| CliError::Config(format!("mode {} requires `kappa`", cfg.mode.as_str())))
}

/// Grid with `grid_n` nodes; `auto` reaches the Gaussian tail of the field
/// `b`, or just the cylinder when `cylinder` is set.
fn grid(cfg: &RunConfig, b: f64, cylinder: bool) -> Result<RadialGrid, CliError> {
    let rho_max = match cfg.rho_max {
        RhoMax::Value(r) => r,
        RhoMax::Auto if cylinder => 1.0,
        RhoMax::Auto => confining_rho_max(0.5 * b),
    };
    Ok(RadialGrid::new(cfg.grid_n, rho_max)?)
}

fn rho_column(grid: RadialGrid) -> Vec<f64> {
    grid.nodes()
}

/// Reads columns `rho` and `g` from a CSV file and interpolates them linearly
/// onto the grid, holding the end values beyond the sampled range.
pub fn read_density(path: &Path, grid: RadialGrid) -> Result<DensityProfile, CliError> {
    let bad = |msg: String| CliError::Config(format!("density_file {}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| bad(format!("missing column `{name}`")))
    };
    let (ir, ig) = (find("rho")?, find("g")?);
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize| {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("row {}: not a number", line + 2)))
        };
        samples.push((parse(ir)?, parse(ig)?));
    }
    if samples.len() < 2 {
        return Err(bad("needs at least two rows".into()));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(bad("rho must be strictly increasing".into()));
    }
    let values = grid
        .nodes()
        .iter()
        .map(|&r| {
            let j = samples.partition_point(|s| s.0 <= r);
            if j == 0 {
                samples[0].1
            } else if j == samples.len() {
                samples[j - 1].1
            } else {
                let ((r0, g0), (r1, g1)) = (samples[j - 1], samples[j]);
                g0 + (g1 - g0) * (r - r0) / (r1 - r0)
            }
        })
        .collect();
    Ok(DensityProfile::new(grid, values)?)
}

fn configured_density(cfg: &RunConfig, grid: RadialGrid) -> Result<(DensityProfile, String), CliError> {
    if let Some(path) = &cfg.density_file {
        return Ok((read_density(path, grid)?, format!("file {}", path.display())));
    }
    if let Some(s) = cfg.density {
        return Ok((DensityProfile::constant(grid, s)?, format!("constant {s}")));
    }
    let a = 0.5 * cfg.boundary_b;
    Ok((gaussian_reference(a, grid)?.g, format!("gaussian a = {a}")))
}

fn solve_field(cfg: &RunConfig) -> Result<Report, CliError> {
    let kappa = kappa(cfg)?;
    let b = cfg.boundary_b;
    let grid = grid(cfg, b, true)?;
    let (g, source) = configured_density(cfg, grid)?;
    let mut report = Report::default().scalar("kappa", kappa).scalar("boundary_b", b).scalar("density", source);
    let field: FieldProfile = match cfg.step_delta {
        Some(delta) => {
            report = report.scalar("method", "bessel-piecewise").scalar("step_delta", delta);
            solve_piecewise_bessel(&g, delta, kappa, b)?
        }
        None => {
            let sol = solve_picard(&g, kappa, b, &PicardOptions { tol: cfg.tol, ..Default::default() })?;
            report = report
                .scalar("method", "picard")
                .scalar("iterations", sol.iterations)
                .scalar("residual", sol.residual)
                .scalar("relaxation", sol.relaxation);
            sol.field
        }
    };
    report = report.scalar("field_at_axis", field.values()[0]);
    if kappa > 0.0 {
        let cert = decay_certificate(&field, &g, DECAY_PROBE, kappa)?;
        report = report
            .scalar("decay_field", cert.field_value)
            .scalar("decay_integral_bound", cert.integral_bound)
            .scalar("decay_linear_bound", cert.linear_bound)
            .scalar("decay_chain_holds", cert.chain_holds);
    }
    report.columns = Table::default()
        .with("rho", rho_column(grid))
        .with("B", field.values().iter().copied())
        .with("a", vector_potential(&field));
    Ok(report)
}

fn eigensolve(cfg: &RunConfig) -> Result<Report, CliError> {
    let b = cfg.boundary_b;
    let grid = grid(cfg, b, false)?;
    let (alpha, gauge) = match cfg.kappa {
        Some(kappa) => {
            let h = gaussian_reference(0.5 * b, grid)?.g;
            let field = solve_picard(&h, kappa, b, &PicardOptions { tol: cfg.tol, ..Default::default() })?.field;
            (AlphaProfile::from_field(&field), format!("screened, kappa = {kappa}"))
        }
        None => (AlphaProfile::homogeneous(grid, 0.5 * b), "homogeneous".to_owned()),
    };
    let gs = ground_state(&alpha)?;
    let sectors = sector_check(&alpha, -3..=0, FarBoundary::Dirichlet)?;
    let mut report = Report::default()
        .scalar("boundary_b", b)
        .scalar("gauge", gauge)
        .scalar("energy", gs.energy)
        .scalar("sector_k", gs.sector_k)
        .scalar("best_sector", sectors.best_k)
        .scalar("emergent_sigma", gs.sigma)
        .scalar("tail_mass", gs.tail_mass)
        .scalar("eigen_residual", gs.residual)
        .scalar("iterations", gs.iterations);
    report.columns = Table::default()
        .with("rho", rho_column(grid))
        .with("phi", gs.phi.iter().copied())
        .with("g", gs.g.values().iter().copied());
    Ok(report)
}

fn self_consistent(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let kappa = kappa(cfg)?;
    let b = cfg.boundary_b;
    let grid = grid(cfg, b, false)?;
    let opts = IterationOptions { tol: cfg.tol, max_iter: cfg.max_iter, mixing: cfg.mixing, check_sectors: true };
    let sol = iterate(kappa, b, grid, &opts)?;
    let (field_res, eigen_res) = residuals(&sol)?;
    let a = vector_potential(&sol.field);
    let g = sol.ground.g.values();
    let mut report = Report::default()
        .scalar("kappa", kappa)
        .scalar("boundary_b", b)
        .scalar("converged", sol.converged)
        .scalar("iterations", sol.iterations)
        .scalar("energy", sol.ground.energy)
        .scalar("field_residual", field_res)
        .scalar("eigen_residual", eigen_res)
        .scalar("emergent_sigma", sol.ground.sigma)
        .scalar("tail_mass", sol.ground.tail_mass)
        .scalar("regime_violation_k", sol.regime_violation.map_or(Value::Missing, Value::from));
    if kappa > 0.0 {
        let cert = decay_certificate(&sol.field, &sol.ground.g, DECAY_PROBE, kappa)?;
        report = report
            .scalar("decay_field", cert.field_value)
            .scalar("decay_integral_bound", cert.integral_bound)
            .scalar("decay_linear_bound", cert.linear_bound)
            .scalar("decay_chain_holds", cert.chain_holds);
    }
    report.columns = Table::default()
        .with("rho", rho_column(grid))
        .with("B", sol.field.values().iter().copied())
        .with("a", a.iter().copied())
        .with("g", g.iter().copied())
        .with("j_theta", g.iter().zip(&a).map(|(g, a)| 0.0 - g * a));
    let h = &sol.history;
    report = report.sidecar(
        "history",
        Table::default()
            .with("iteration", h.iter().map(|e| e.iteration))
            .with("field_change", h.iter().map(|e| e.field_change))
            .with("density_change", h.iter().map(|e| e.density_change))
            .with("field_residual", h.iter().map(|e| e.field_residual))
            .with("eigen_residual", h.iter().map(|e| e.eigen_residual))
            .with("energy", h.iter().map(|e| e.energy)),
    );
    let failure = if let Some(k) = sol.regime_violation {
        Some(CliError::Verification(format!("sector k = {k} undercuts k = 0 at iteration {}", sol.iterations)))
    } else if !sol.converged {
        Some(CliError::NonConvergence(format!(
            "self-consistent loop stopped after {} iterations",
            sol.iterations
        )))
    } else {
        None
    };
    Ok(RunOutcome { report, failure })
}

/// Intervals per unit radius for sweeps: `grid_n` nodes reach the tail of the
/// strongest field, weaker fields get longer grids at the same spacing.
fn sweep_resolution(cfg: &RunConfig, b_values: &[f64]) -> usize {
    let b_max = b_values.iter().copied().fold(0.0, f64::max);
    let rho_max = match cfg.rho_max {
        RhoMax::Value(r) => r,
        RhoMax::Auto => confining_rho_max(0.5 * b_max),
    };
    (((cfg.grid_n - 1) as f64 / rho_max).round() as usize).max(2)
}

fn sweep(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let kappa = kappa(cfg)?;
    let mut b_values = cfg.b_values.clone();
    b_values.sort_by(f64::total_cmp);
    b_values.dedup();
    let opts = IterationOptions { tol: cfg.tol, max_iter: cfg.max_iter, mixing: cfg.mixing, check_sectors: true };
    let result = energy_sweep(kappa, &b_values, sweep_resolution(cfg, &b_values), &opts)?;
    let curve = result.curve();
    let tau = magnetization_tau(&curve);
    if let Err(e) = &tau {
        eprintln!("warning: no zero-field slope: {e}");
    }
    if !result.monotone {
        eprintln!("warning: energy curve is not monotone in b");
    }
    let slopes = slope_curve(&curve);
    let gaps = result.gaps();
    let mut report = Report::default()
        .scalar("kappa", kappa)
        .scalar("tau", tau.ok())
        .scalar("monotone", result.monotone)
        .scalar("gaps", gaps.len());
    let p = &result.points;
    report.columns = Table::default()
        .with("b_tilde", p.iter().map(|x| x.b))
        .with("energy", p.iter().map(|x| x.energy))
        .with("converged", p.iter().map(|x| x.energy.is_some()))
        .with("iterations", p.iter().map(|x| x.iterations));
    report = report.sidecar(
        "slopes",
        Table::default().with("b_mid", slopes.iter().map(|s| s.0)).with("slope", slopes.iter().map(|s| s.1)),
    );
    let failure = (!gaps.is_empty()).then(|| {
        CliError::NonConvergence(format!("sweep points without a converged solution: {gaps:?}"))
    });
    Ok(RunOutcome { report, failure })
}

fn phase(cfg: &RunConfig) -> Result<Report, CliError> {
    let params = PhysicalParams::from(cfg.physical);
    let depth = penetration_depth(&params)?;
    let kappa = cfg.kappa.unwrap_or(depth.kappa);
    let tau = match cfg.tau {
        Some(t) => t,
        None => {
            let opts = IterationOptions { tol: cfg.tol, max_iter: cfg.max_iter, mixing: cfg.mixing, check_sectors: true };
            let result = energy_sweep(kappa, &TAU_STEPS, sweep_resolution(cfg, &TAU_STEPS), &opts)?;
            if !result.gaps().is_empty() {
                return Err(CliError::NonConvergence("zero-field slope sweep did not converge".into()));
            }
            magnetization_tau(&result.curve())?
        }
    };
    let fields = critical_fields(&params, tau)?;
    let mut report = Report::default()
        .scalar("H0", fields.h0)
        .scalar("HcR", fields.hc_r)
        .scalar("Hc0", fields.hc0);
    if let Some(h) = cfg.applied_h {
        let r = phase_classify(h, fields.h0, fields.hc_r)?;
        report = report
            .scalar("applied_H", r.applied_h)
            .scalar("phase", r.phase.as_str())
            .scalar("boundary_Bf", r.boundary_bf);
    }
    Ok(report.scalar("tau", tau).scalar("kappa", kappa).scalar("delta", depth.delta))
}

struct Check {
    name: &'static str,
    status: &'static str,
    value: String,
}

fn check(name: &'static str, pass: bool, value: String) -> Check {
    Check { name, status: if pass { "pass" } else { "fail" }, value }
}

fn verify(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let kappa = cfg.kappa.unwrap_or(VERIFY_KAPPA);
    let b = cfg.boundary_b;
    let mut checks = Vec::new();

    let cylinder = RadialGrid::cylinder(cfg.grid_n)?;
    let one = DensityProfile::constant(cylinder, 1.0)?;
    let picard = solve_picard(&one, kappa, b, &PicardOptions { tol: 1e-11, ..Default::default() })?;
    let exact = analytic_constant_g(1.0, kappa, b, cylinder)?;
    let err = sup_distance(picard.field.values(), exact.values(), cylinder.len());
    checks.push(check("constant_density_field", err < VERIFY_ORACLE_TOL, format!("{err:.3e}")));

    let harmonic = RadialGrid::new(cfg.grid_n, confining_rho_max(0.5))?;
    let gs = ground_state(&AlphaProfile::homogeneous(harmonic, 0.5))?;
    let reference = gaussian_reference(0.5, harmonic)?;
    let energy_err = (gs.energy - 1.0).abs();
    let phi_err = sup_distance(&gs.phi, &reference.phi, harmonic.len());
    checks.push(check("gaussian_energy", energy_err < 1e-4, format!("{energy_err:.3e}")));
    checks.push(check("gaussian_wavefunction", phi_err < 1e-4, format!("{phi_err:.3e}")));

    let p = ratio_threshold(0.5)?;
    let ratio_err = (bessel_i1_over_i0(p)? - 0.5).abs();
    checks.push(check("ratio_threshold", ratio_err < 1e-6 && p > 1.1 && p < 1.2, format!("{p:.10}")));

    let grid = grid(cfg, b, false)?;
    let opts = IterationOptions { tol: cfg.tol, max_iter: cfg.max_iter, mixing: cfg.mixing, check_sectors: true };
    let sol = iterate(kappa, b, grid, &opts)?;
    checks.push(check("self_consistent_converged", sol.converged, format!("{} iterations", sol.iterations)));
    if sol.converged {
        let bounds = sol.field.check_london_bounds();
        checks.push(check(
            "field_bounds_and_monotone",
            bounds.is_ok(),
            bounds.err().map_or("ok".into(), |e| e.to_string()),
        ));
        let (fr, er) = residuals(&sol)?;
        checks.push(check("field_residual", fr < cfg.tol, format!("{fr:.3e}")));
        checks.push(check("eigen_residual", er < cfg.tol, format!("{er:.3e}")));
        checks.push(check("energy_below_homogeneous", sol.ground.energy <= b, format!("{:.10}", sol.ground.energy)));
        let k = sector_check(&sol.alpha(), -3..=0, FarBoundary::Dirichlet)?.best_k;
        checks.push(check("sector_zero", k == 0, format!("k = {k}")));
        if kappa > 0.0 {
            let cert = decay_certificate(&sol.field, &sol.ground.g, DECAY_PROBE, kappa)?;
            checks.push(check(
                "decay_certificate",
                cert.certified(),
                format!("{:.4e} <= {:.4e} <= {:.4e}", cert.field_value, cert.integral_bound, cert.linear_bound),
            ));
        }
        let j = current_profile(&sol);
        checks.push(check("current_diamagnetic", j.iter().all(|v| *v <= 0.0), format!("{:.4e}", j.iter().copied().fold(0.0, f64::min))));
        let h = gaussian_reference(0.5 * b, grid)?.g;
        let cmp = comparison_check(&sol.ground.g, &h, 1e-6)?;
        checks.push(check(
            "density_floor",
            cmp.min_sqrt_g >= SQRT_DENSITY_FLOOR - 1e-4,
            format!("{:.6}", cmp.min_sqrt_g),
        ));
        checks.push(Check {
            name: "density_above_reference",
            status: "info",
            value: format!("min(g - h) = {:.3e} at rho = {:.4}", cmp.min_margin, cmp.argmin_rho),
        });
    }

    let failed: Vec<&str> = checks.iter().filter(|c| c.status == "fail").map(|c| c.name).collect();
    let mut report = Report::default()
        .scalar("kappa", kappa)
        .scalar("boundary_b", b)
        .scalar("checks", checks.len())
        .scalar("failed", failed.len());
    report.columns = Table::default()
        .with("check", checks.iter().map(|c| c.name))
        .with("status", checks.iter().map(|c| c.status))
        .with("value", checks.iter().map(|c| c.value.clone()));
    let failure = (!failed.is_empty()).then(|| CliError::Verification(failed.join(", ")));
    Ok(RunOutcome { report, failure })
}
