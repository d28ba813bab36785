//! Modified Bessel functions of order zero and one.
//!
//! `I0` and `I1` use the ascending power series up to [`SWITCH_POINT`] and the
//! large-argument expansion above it. The expansion is evaluated in
//! exponentially scaled form, so the log and scaled variants stay finite for
//! arguments far beyond the `f64` overflow point of `I0` itself (about 713).
//!
//! `K0` and `K1` are only needed in scaled form by the piecewise field solver;
//! they come from the integral `e^z K_n(z) = ∫_0^∞ exp(-z (cosh t - 1)) cosh(n t) dt`,
//! which the trapezoidal rule integrates to roundoff at a modest step.

use crate::error::{domain, Result};

/// Arguments at or below this value use the power series.
pub const SWITCH_POINT: f64 = 20.0;

/// Direct evaluation of `I0` or `I1` is refused above this argument;
/// use [`bessel_i0_log`] or the scaled functions instead.
pub const MAX_DIRECT_ARGUMENT: f64 = 700.0;

const SERIES_REL_EPS: f64 = 1e-17;
const ASYMPTOTIC_MAX_TERMS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselMethod {
    Series,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub value: f64,
    pub method: BesselMethod,
}

fn check_argument(z: f64) -> Result<()> {
    if !z.is_finite() || z < 0.0 {
        return Err(domain(format!("Bessel argument must be finite and >= 0, got {z}")));
    }
    Ok(())
}

/// `sum_k (z/2)^(2k) / (k!)^2`.
pub fn i0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= SERIES_REL_EPS * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// `sum_k (z/2)^(2k+1) / (k! (k+1)!)`.
pub fn i1_series(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let q = 0.25 * z * z;
    let mut term = 0.5 * z;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + 1.0));
        sum += term;
        if term <= SERIES_REL_EPS * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Bracketed factor of the large-argument expansion
/// `I_n(z) ~ e^z / sqrt(2 pi z) * S_n(z)`, summed until the terms stop shrinking.
fn asymptotic_factor(order: u32, z: f64) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=ASYMPTOTIC_MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= SERIES_REL_EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// `e^{-z} I0(z)` from the large-argument expansion.
pub fn i0_asymptotic_scaled(z: f64) -> f64 {
    asymptotic_factor(0, z) / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// `e^{-z} I1(z)` from the large-argument expansion.
pub fn i1_asymptotic_scaled(z: f64) -> f64 {
    asymptotic_factor(1, z) / (2.0 * std::f64::consts::PI * z).sqrt()
}

fn eval(z: f64, series: fn(f64) -> f64, scaled: fn(f64) -> f64) -> Result<BesselEval> {
    check_argument(z)?;
    if z <= SWITCH_POINT {
        return Ok(BesselEval { value: series(z), method: BesselMethod::Series });
    }
    if z > MAX_DIRECT_ARGUMENT {
        return Err(domain(format!(
            "argument {z} exceeds {MAX_DIRECT_ARGUMENT}; use the log-scaled evaluation"
        )));
    }
    Ok(BesselEval { value: scaled(z) * z.exp(), method: BesselMethod::Asymptotic })
}

pub fn i0_eval(z: f64) -> Result<BesselEval> {
    eval(z, i0_series, i0_asymptotic_scaled)
}

pub fn i1_eval(z: f64) -> Result<BesselEval> {
    eval(z, i1_series, i1_asymptotic_scaled)
}

/// Modified Bessel function `I0(z)` for `0 <= z <= 700`.
pub fn bessel_i0(z: f64) -> Result<f64> {
    i0_eval(z).map(|e| e.value)
}

/// Modified Bessel function `I1(z)` for `0 <= z <= 700`.
pub fn bessel_i1(z: f64) -> Result<f64> {
    i1_eval(z).map(|e| e.value)
}

/// `ln I0(z)`, finite for every finite `z >= 0`.
pub fn bessel_i0_log(z: f64) -> Result<f64> {
    check_argument(z)?;
    if z <= SWITCH_POINT {
        Ok(i0_series(z).ln())
    } else {
        Ok(z + i0_asymptotic_scaled(z).ln())
    }
}

/// `e^{-z} I0(z)`.
pub fn bessel_i0_scaled(z: f64) -> Result<f64> {
    check_argument(z)?;
    if z <= SWITCH_POINT {
        Ok(i0_series(z) * (-z).exp())
    } else {
        Ok(i0_asymptotic_scaled(z))
    }
}

/// `e^{-z} I1(z)`.
pub fn bessel_i1_scaled(z: f64) -> Result<f64> {
    check_argument(z)?;
    if z <= SWITCH_POINT {
        Ok(i1_series(z) * (-z).exp())
    } else {
        Ok(i1_asymptotic_scaled(z))
    }
}

/// `I1(z) / I0(z)`, monotone from 0 at the origin towards 1.
pub fn bessel_i1_over_i0(z: f64) -> Result<f64> {
    check_argument(z)?;
    if z <= SWITCH_POINT {
        Ok(i1_series(z) / i0_series(z))
    } else {
        Ok(asymptotic_factor(1, z) / asymptotic_factor(0, z))
    }
}

const K_STEP: f64 = 0.1;

fn k_scaled(order: f64, z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(domain(format!("K Bessel argument must be finite and > 0, got {z}")));
    }
    // the integrand is a Gaussian of width 1/sqrt(z) near t = 0
    let step = K_STEP.min(0.5 / z.sqrt());
    let mut sum = 0.5;
    let mut t = step;
    loop {
        let f = (-z * (t.cosh() - 1.0)).exp() * (order * t).cosh();
        sum += f;
        if f <= SERIES_REL_EPS * sum {
            break;
        }
        t += step;
    }
    Ok(sum * step)
}

/// `e^{z} K0(z)` for `z > 0`.
pub fn bessel_k0_scaled(z: f64) -> Result<f64> {
    k_scaled(0.0, z)
}

/// `e^{z} K1(z)` for `z > 0`.
pub fn bessel_k1_scaled(z: f64) -> Result<f64> {
    k_scaled(1.0, z)
}

/// Smallest `p` such that `I1(z)/I0(z) >= target` for every `z >= p`.
///
/// The ratio increases strictly from 0 to 1, so the threshold is unique; it is
/// located by bisection to well below the `1e-8` absolute tolerance.
pub fn ratio_threshold(target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(domain(format!("ratio target must lie in (0, 1), got {target}")));
    }
    let ratio = |z: f64| bessel_i1_over_i0(z).expect("non-negative finite argument");
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ratio(hi) < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ratio(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Direct power series with factorials built from scratch: the oracle for
    // the small-argument values below.
    fn series_oracle(order: u32, z: f64, terms: u32) -> f64 {
        let mut sum = 0.0;
        for k in 0..terms {
            let mut kf = 1.0;
            for j in 1..=k {
                kf *= f64::from(j);
            }
            let mut kof = kf;
            for j in (k + 1)..=(k + order) {
                kof *= f64::from(j);
            }
            sum += (0.5 * z).powi((2 * k + order) as i32) / (kf * kof);
        }
        sum
    }

    #[test]
    fn i0_reference_values() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        let one = bessel_i0(1.0).unwrap();
        assert!(rel(one, series_oracle(0, 1.0, 40)) < 1e-14);
        assert!((one - 1.266_065_877_752_008_4).abs() < 1e-14);
        let ten = bessel_i0(10.0).unwrap();
        assert!(rel(ten, series_oracle(0, 10.0, 60)) < 1e-13);
        assert!((ten - 2_815.716_628_466_254).abs() < 1e-9);
        let crude = 10f64.exp() / (2.0 * std::f64::consts::PI * 10.0).sqrt();
        assert!(rel(ten, crude) < 0.02);
    }

    #[test]
    fn i1_reference_values() {
        assert_eq!(bessel_i1(0.0).unwrap(), 0.0);
        assert!(rel(bessel_i1(1.0).unwrap(), series_oracle(1, 1.0, 40)) < 1e-14);
        assert!((bessel_i1(1.0).unwrap() - 0.565_159_103_992_485).abs() < 1e-14);
        assert!((bessel_i1(1.5).unwrap() - 0.981_666_428_577_908).abs() < 1e-14);
    }

    #[test]
    fn log_form_matches_direct_and_large_argument_expansion() {
        assert_eq!(bessel_i0_log(0.0).unwrap(), 0.0);
        let l10 = bessel_i0_log(10.0).unwrap();
        assert!((l10 - 2_815.716_628_466_254_f64.ln()).abs() < 1e-13);
        assert!((l10 - 7.942_972_083_118_696).abs() < 1e-13);
        assert!((bessel_i0_log(1000.0).unwrap() - 995.627_308_889_869_5).abs() < 1e-11);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_i0(-1.0).is_err());
        assert!(bessel_i1(f64::NAN).is_err());
        assert!(bessel_i0_log(f64::INFINITY).is_err());
        assert!(bessel_i0(800.0).is_err());
        assert!(bessel_k0_scaled(0.0).is_err());
        assert!(ratio_threshold(1.0).is_err());
        assert!(ratio_threshold(1.5).is_err());
        assert!(ratio_threshold(0.0).is_err());
    }

    #[test]
    fn method_switches_at_twenty_without_a_jump() {
        let below = i0_eval(SWITCH_POINT).unwrap();
        let above = i0_eval(SWITCH_POINT * (1.0 + 1e-15)).unwrap();
        assert_eq!(below.method, BesselMethod::Series);
        assert_eq!(above.method, BesselMethod::Asymptotic);
        assert!(rel(above.value, below.value) < 1e-10);
        let below = i1_eval(SWITCH_POINT).unwrap();
        let above = i1_eval(SWITCH_POINT * (1.0 + 1e-15)).unwrap();
        assert!(rel(above.value, below.value) < 1e-10);
    }

    #[test]
    fn series_and_expansion_agree_between_15_and_30() {
        let mut z = 15.0;
        while z <= 30.0 {
            let s0 = i0_series(z) * (-z).exp();
            let s1 = i1_series(z) * (-z).exp();
            assert!(rel(i0_asymptotic_scaled(z), s0) < 1e-9, "I0 at {z}");
            assert!(rel(i1_asymptotic_scaled(z), s1) < 1e-9, "I1 at {z}");
            z += 0.25;
        }
    }

    #[test]
    fn derivative_of_i0_is_i1() {
        let h = 1e-5;
        for z in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let d = (bessel_i0(z + h).unwrap() - bessel_i0(z - h).unwrap()) / (2.0 * h);
            assert!(rel(d, bessel_i1(z).unwrap()) < 1e-6, "z = {z}");
        }
    }

    #[test]
    fn monotone_on_dense_grid() {
        let mut prev = (bessel_i0(0.0).unwrap(), bessel_i1(0.0).unwrap(), 0.0);
        for i in 1..=4000 {
            let z = i as f64 * 0.01;
            let cur = (bessel_i0(z).unwrap(), bessel_i1(z).unwrap(), bessel_i1_over_i0(z).unwrap());
            assert!(cur.0 > prev.0 && cur.1 > prev.1 && cur.2 > prev.2, "z = {z}");
            prev = cur;
        }
    }

    #[test]
    fn k_functions_match_tables_and_wronskian() {
        let k0 = |z: f64| bessel_k0_scaled(z).unwrap() * (-z).exp();
        let k1 = |z: f64| bessel_k1_scaled(z).unwrap() * (-z).exp();
        assert!(rel(k0(1.0), 0.421_024_438_240_708_3) < 1e-13);
        assert!(rel(k1(1.0), 0.601_907_230_197_234_6) < 1e-13);
        assert!(rel(k0(0.1), 2.427_069_024_702_016_6) < 1e-13);
        assert!(rel(k1(0.1), 9.853_844_780_870_606) < 1e-13);
        for z in [1e-6, 0.01, 0.3, 1.0, 4.0, 19.0, 21.0, 80.0, 500.0, 5000.0] {
            let w = bessel_i0_scaled(z).unwrap() * bessel_k1_scaled(z).unwrap()
                + bessel_i1_scaled(z).unwrap() * bessel_k0_scaled(z).unwrap();
            assert!(rel(w, 1.0 / z) < 1e-12, "Wronskian at {z}");
        }
    }

    #[test]
    fn log_differences_reproduce_ratios() {
        for (a, b) in [(3.0, 7.5), (19.0, 23.0), (150.0, 151.0), (650.0, 640.0)] {
            let ratio = (bessel_i0_log(a).unwrap() - bessel_i0_log(b).unwrap()).exp();
            let direct = bessel_i0(a).unwrap() / bessel_i0(b).unwrap();
            assert!(rel(ratio, direct) < 1e-10, "{a}/{b}");
        }
        // far beyond overflow: compare against the scaled ratio times e^(a-b)
        let (a, b) = (999_990.5, 1_000_000.0);
        let ratio = (bessel_i0_log(a).unwrap() - bessel_i0_log(b).unwrap()).exp();
        let scaled = bessel_i0_scaled(a).unwrap() / bessel_i0_scaled(b).unwrap() * (a - b).exp();
        assert!(rel(ratio, scaled) < 1e-10);
    }

    #[test]
    fn ratio_threshold_values() {
        assert!(ratio_threshold(1e-12).unwrap() < 1e-8);
        let p = ratio_threshold(0.5).unwrap();
        assert!(bessel_i1_over_i0(1.1).unwrap() < 0.5 && bessel_i1_over_i0(1.2).unwrap() > 0.5);
        assert!(p > 1.1 && p < 1.2);
        assert!((bessel_i1_over_i0(p).unwrap() - 0.5).abs() < 1e-8);
        let p9 = ratio_threshold(0.9).unwrap();
        assert!((bessel_i1(p9).unwrap() / bessel_i0(p9).unwrap() - 0.9).abs() < 1e-8);
    }
}
