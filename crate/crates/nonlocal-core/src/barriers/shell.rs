//! The one-dimensional shell profile ω₁(x) = (|x|-1)₊^β for |x| > 1:
//!
//!   ℒ ω₁(x) = 2 (β(p-1)/(sp)) (|x|-1)^{β(p-1)-sp} (A + B + C),
//!
//! where A is the strictly negative main integral (shared with the radial
//! ring), and B, C vanish as |x| → 1⁺. The factor 2 is the one carried by ℒ
//! itself; the identity is cross-checked against the generic one-dimensional
//! evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_rule, integrate_unit_split, QuadratureSpec};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShellDecomposition {
    pub main_term: f64,
    pub inner_term: f64,
    pub outer_term: f64,
    pub prefactor: f64,
    pub total: f64,
}

pub fn shell_1d_decomposition(
    beta: f64,
    s: f64,
    p: f64,
    x: f64,
    quad: &QuadratureSpec,
) -> Result<ShellDecomposition> {
    if !(s > 0.0 && s < 1.0 && p > 1.0 && beta > 0.0) {
        return Err(Error::invalid(
            "need 0 < s < 1, p > 1, beta > 0".to_string(),
        ));
    }
    if beta > s {
        return Err(Error::invalid(
            "the shell identity requires beta <= s".to_string(),
        ));
    }
    let xi = x.abs() - 1.0;
    if !(xi > 0.0) {
        return Err(Error::PointOutOfRange("need |x| > 1".to_string()));
    }
    let sp = s * p;
    let rule = gauss_rule(quad.profile_nodes);
    let panels = quad.profile_panels;
    let shape = move |t: f64| (1.0 - t.powf(beta)).powf(p - 2.0) * t.powf(beta - 1.0);
    let shape_w = move |w: f64| {
        let t = 1.0 - w;
        (-(beta * (-w).ln_1p()).exp_m1()).powf(p - 2.0) * t.powf(beta - 1.0)
    };

    let main_term = integrate_unit_split(
        &rule,
        beta - 1.0,
        p - 1.0 - sp,
        panels,
        |t| (t.powf(p * (s - beta)) - 1.0) * shape(t) * (1.0 - t).powf(-sp),
        |w| (p * (s - beta) * (-w).ln_1p()).exp_m1() * shape_w(w) * w.powf(-sp),
    );
    let inner_term = integrate_unit_split(
        &rule,
        beta - 1.0,
        p - 2.0,
        panels,
        |t| shape(t) * (1.0 + t + 2.0 / xi).powf(-sp),
        |w| shape_w(w) * (2.0 - w + 2.0 / xi).powf(-sp),
    );
    let outer_term = integrate_unit_split(
        &rule,
        p * (s - beta) + beta - 1.0,
        p - 2.0,
        panels,
        |t| shape(t) * t.powf(p * (s - beta)) * (1.0 + t + 2.0 * t / xi).powf(-sp),
        |w| {
            let t = 1.0 - w;
            shape_w(w) * t.powf(p * (s - beta)) * (1.0 + t + 2.0 * t / xi).powf(-sp)
        },
    );

    let prefactor = 2.0 * beta * (p - 1.0) / sp * xi.powf(beta * (p - 1.0) - sp);
    let sum = main_term + inner_term + outer_term;
    Ok(ShellDecomposition {
        main_term,
        inner_term,
        outer_term,
        prefactor,
        total: prefactor * sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn main_term_vanishes_at_beta_equals_s() {
        let d = shell_1d_decomposition(0.5, 0.5, 2.0, 1.01, &QuadratureSpec::standard()).unwrap();
        assert_abs_diff_eq!(d.main_term, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn strictly_negative_in_a_thin_shell() {
        let quad = QuadratureSpec::standard();
        let d = shell_1d_decomposition(0.25, 0.5, 2.0, 1.001, &quad).unwrap();
        assert!(d.main_term < 0.0);
        assert!(d.inner_term > 0.0 && d.outer_term > 0.0);
        assert!(d.total < 0.0, "total = {}", d.total);
        // the side terms vanish as |x| -> 1+
        let far = shell_1d_decomposition(0.25, 0.5, 2.0, 1.5, &quad).unwrap();
        assert!(d.inner_term < far.inner_term);
        assert!(d.outer_term < far.outer_term);
    }

    #[test]
    fn rejects_points_inside_the_ball() {
        let quad = QuadratureSpec::standard();
        assert!(shell_1d_decomposition(0.25, 0.5, 2.0, 0.9, &quad).is_err());
        assert!(shell_1d_decomposition(0.25, 0.5, 2.0, 1.0, &quad).is_err());
    }

    #[test]
    fn agrees_with_generic_evaluator() {
        // dual route: ℒ ω₁ by the reduced identity vs the generic
        // split/paired/substituted quadrature of the profile
        let quad = QuadratureSpec::fine();
        let params = crate::params::FracParams::new(0.5, 2.0, 1).unwrap();
        let profile = crate::profile::Profile::Ring {
            beta: 0.25,
            r0: 1.0,
            cap: None,
            center: [0.0; 3],
        };
        for x in [1.05, 1.2, 1.6] {
            let d = shell_1d_decomposition(0.25, 0.5, 2.0, x, &quad).unwrap();
            let generic = crate::operator::eval_profile_1d(&profile, x, &params, &quad).unwrap();
            approx::assert_relative_eq!(d.total, generic, max_relative = 1e-4);
        }
    }
}
