//! The truncated minorant ℓ (x^s capped at L^s) and its two-sided bound:
//! there is a δ > 0 with
//!
//!   -4 (p-1)/(sp) L^{-s}  <  ℒ ℓ(x)  <  -(p-1)/(sp) L^{-s}   for 0 < x/L < δ.
//!
//! Since ℒ (x₊)^s = 0, the value of ℒ ℓ is exactly the correction from
//! replacing the power by its plateau past L:
//!
//!   ℒ ℓ(x) = -2 ((p-1)/p) x^{-s} ∫_{L/x}^∞ (τ-1)^{-sp} τ^{s-1} (τ^s-1)^{p-2} dτ.

use crate::error::{Error, Result};
use crate::params::FracParams;
use crate::quad::{gauss_rule, integrate_log, integrate_tail, QuadratureSpec};
use crate::report::{CertificateReport, Sample};

/// ℒ ℓ(x) for 0 < x < 0.9 L, semi-analytically.
pub fn eval_minorant(
    length: f64,
    x: f64,
    params: &FracParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if params.n() != 1 {
        return Err(Error::invalid(
            "the minorant bound is one-dimensional".to_string(),
        ));
    }
    if !(length > 0.0 && x > 0.0 && x < 0.9 * length) {
        return Err(Error::PointOutOfRange(
            "eval_minorant needs 0 < x < 0.9 L".to_string(),
        ));
    }
    let s = params.s();
    let p = params.p();
    let sp = params.sp();
    let rule = gauss_rule(quad.profile_nodes);
    let big_t = length / x;
    // integrand decays like τ^{-1-s}; split a log panel before the tail rule
    let f =
        |tau: f64| (tau - 1.0).powf(-sp) * tau.powf(s - 1.0) * (tau.powf(s) - 1.0).powf(p - 2.0);
    let split = 4.0 * big_t;
    let integral = integrate_log(&rule, big_t, split, quad.profile_panels, f)
        + integrate_tail(&rule, split, s, quad.profile_panels, f);
    Ok(-2.0 * ((p - 1.0) / p) * x.powf(-s) * integral)
}

/// Search downward from x/L = 1/2 for the largest sampled δ such that the
/// two-sided bound holds at every sampled x/L < δ.
pub fn minorant_bracket(
    length: f64,
    params: &FracParams,
    quad: &QuadratureSpec,
) -> Result<(f64, CertificateReport)> {
    if !(length > 0.0) {
        return Err(Error::invalid("need L > 0".to_string()));
    }
    let s = params.s();
    let p = params.p();
    let sp = params.sp();
    let scale = length.powf(-s) * (p - 1.0) / sp;
    let (lower, upper) = (-4.0 * scale, -scale);

    // sampled ratios x/L descending from 1/2
    let ratios: Vec<f64> = (0..28).map(|k| 0.5 * 0.7f64.powi(k)).collect();
    let mut samples = Vec::new();
    let mut delta = 0.0f64;
    let mut certified: Vec<Sample> = Vec::new();
    for &r in ratios.iter().rev() {
        let x = r * length;
        let v = eval_minorant(length, x, params, quad)?;
        samples.push(Sample {
            point: vec![x],
            value: v,
        });
        if v > lower && v < upper {
            delta = r; // bound holds at every sampled ratio up to here
            certified.push(Sample {
                point: vec![x],
                value: v,
            });
        } else {
            break;
        }
    }
    // quadrature error estimate at the smallest certified ratio
    let err = if let Some(sm) = certified.first() {
        let x = sm.point[0];
        let fine = eval_minorant(length, x, params, &QuadratureSpec::fine())?;
        (fine - sm.value).abs().max(f64::EPSILON)
    } else {
        0.0
    };
    let margin = certified
        .iter()
        .map(|s| (s.value - lower).min(upper - s.value))
        .fold(f64::INFINITY, f64::min);
    let report = if certified.is_empty() {
        CertificateReport::failed(
            format!("minorant-bracket(L={length})"),
            "no sampled ratio satisfied the two-sided bound",
        )
    } else {
        CertificateReport::bracket(
            format!("minorant-bracket(L={length})"),
            certified,
            lower,
            upper,
            margin.min((upper - lower) / 2.0).max(0.0),
            err,
        )
        .with_detail(format!("certified ratio delta = {delta}"))
    };
    Ok((delta, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(s: f64, p: f64) -> FracParams {
        FracParams::new(s, p, 1).unwrap()
    }

    #[test]
    fn bracket_certifies_a_positive_delta() {
        // p = 2, s = 1/2, L = 1: bounds (-4, -1)·(p-1)/(sp)·L^{-s} = (-4, -1)
        let quad = QuadratureSpec::standard();
        let (delta, report) = minorant_bracket(1.0, &params(0.5, 2.0), &quad).unwrap();
        assert!(delta > 0.0);
        assert!(report.passed(), "report: {report:?}");
        assert_eq!(report.lower_bound, Some(-4.0));
        assert_eq!(report.bound, -1.0);
    }

    #[test]
    fn small_ratio_limit_matches_magnitude() {
        // as x/L -> 0 the value approaches -2 (p-1)/(sp) L^{-s} (mid-bracket)
        let quad = QuadratureSpec::standard();
        let p = params(0.5, 2.0);
        let v = eval_minorant(1.0, 1e-6, &p, &quad).unwrap();
        assert_relative_eq!(v, -2.0, max_relative = 2e-2);
    }

    #[test]
    fn plateau_values_scale_like_l_to_minus_s() {
        let quad = QuadratureSpec::standard();
        let p = params(0.5, 2.0);
        let a = eval_minorant(1.0, 1e-4, &p, &quad).unwrap();
        let b = eval_minorant(2.0, 2e-4, &p, &quad).unwrap();
        assert_relative_eq!(a / b, 2.0f64.powf(0.5), max_relative = 1e-2);
    }

    #[test]
    fn large_l_limit_recovers_harmonicity() {
        // ℓ with L -> ∞ looks like (x₊)^s: mid-range values tend to 0
        let quad = QuadratureSpec::standard();
        let p = params(0.6, 3.0);
        let v1 = eval_minorant(10.0, 0.5, &p, &quad).unwrap();
        let v2 = eval_minorant(1e5, 0.5, &p, &quad).unwrap();
        assert!(v1 < 0.0 && v2 < 0.0);
        assert!(v2.abs() < v1.abs());
        // magnitude ~ 2(p-1)/(ps) L^{-s} -> 0
        assert!(v2.abs() < 3e-3);
    }
}
