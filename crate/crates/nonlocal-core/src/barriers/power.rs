//! The explicit constant of the one-dimensional power profile:
//!
//!   ℒ (x₊)^β = -C(β,s,p) x^{β(p-1)-sp} for x > 0, with
//!   C(β,s,p) = 2 (β(p-1)/(sp)) ∫₀¹ (1-t)^{-sp} (1-t^β)^{p-2} t^{β-1} (1 - t^{p(s-β)}) dt,
//!
//! strictly positive for 0 < β < s and zero at β = s (the last factor
//! vanishes identically). The fused integrand behaves like t^{β-1} at 0 and
//! (1-t)^{p-1-sp} at 1; both exponents feed the power substitutions.

use crate::error::{Error, Result};
use crate::quad::{gauss_rule, integrate_unit_split, QuadratureSpec};
use crate::report::{ConstantEntry, ConstantTable};

/// C(β, s, p) with a refinement-based error estimate.
pub fn power_constant(beta: f64, s: f64, p: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    validate(beta, s, p)?;
    if beta == s {
        return Ok((0.0, 0.0));
    }
    let base = compute(beta, s, p, quad.profile_nodes, quad.profile_panels);
    let refined = compute(beta, s, p, 2 * quad.profile_nodes, 2 * quad.profile_panels);
    Ok((refined, (refined - base).abs().max(f64::EPSILON)))
}

pub(crate) fn validate(beta: f64, s: f64, p: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0 && p > 1.0) {
        return Err(Error::invalid("need 0 < s < 1 and p > 1".to_string()));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid("need beta > 0".to_string()));
    }
    if beta > s {
        return Err(Error::invalid(
            "beta > s flips the sign of the power identity; the constant is only defined for beta <= s"
                .to_string(),
        ));
    }
    Ok(())
}

fn compute(beta: f64, s: f64, p: f64, nodes: usize, panels: usize) -> f64 {
    let sp = s * p;
    let rule = gauss_rule(nodes);
    // left half in t; right half in w = 1 - t with every 1 - t^q factor in
    // expm1 form, so the w^{-sp} singularity multiplies exact small numbers
    let integral = integrate_unit_split(
        &rule,
        beta - 1.0,
        p - 1.0 - sp,
        panels,
        |t| {
            (1.0 - t).powf(-sp)
                * (1.0 - t.powf(beta)).powf(p - 2.0)
                * t.powf(beta - 1.0)
                * (1.0 - t.powf(p * (s - beta)))
        },
        |w| {
            let t = 1.0 - w;
            let one_minus_tb = -(beta * (-w).ln_1p()).exp_m1();
            let one_minus_tq = -(p * (s - beta) * (-w).ln_1p()).exp_m1();
            w.powf(-sp) * one_minus_tb.powf(p - 2.0) * t.powf(beta - 1.0) * one_minus_tq
        },
    );
    2.0 * (beta * (p - 1.0) / sp) * integral
}

/// Compute and record C(β, s, p).
pub fn record_power_constant(
    table: &mut ConstantTable,
    beta: f64,
    s: f64,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let (value, err) = power_constant(beta, s, p, quad)?;
    table.insert(
        ConstantTable::key("C", &[("beta", beta), ("s", s), ("p", p)]),
        ConstantEntry {
            value,
            method: "singularity-substituted quadrature of the power-profile identity".to_string(),
            error_estimate: err,
            quad_spec: *quad,
        },
    );
    Ok(value)
}
