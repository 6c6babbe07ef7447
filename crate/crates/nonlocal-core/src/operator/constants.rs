//! The dead-variable reduction constant N(n, sp) = ∫_{ℝ^{n-1}} (1+|z|²)^{-(n+sp)/2} dz,
//! relating ℒ in n dimensions to the one-dimensional operator on functions of
//! a single coordinate.

use crate::error::{Error, Result};
use crate::params::FracParams;
use crate::quad::{gauss_rule, integrate_tail, QuadratureSpec};
use crate::report::{ConstantEntry, ConstantTable};

/// N(n, sp) by radial quadrature, with a refinement-based error estimate.
pub fn dead_variable_constant(params: &FracParams, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    if params.n() < 2 {
        return Err(Error::invalid(
            "the reduction constant needs at least one dead variable".to_string(),
        ));
    }
    let value = compute(params, quad.profile_nodes, quad.profile_panels);
    let refined = compute(params, 2 * quad.profile_nodes, 2 * quad.profile_panels);
    Ok((refined, (refined - value).abs().max(f64::EPSILON)))
}

fn compute(params: &FracParams, nodes: usize, panels: usize) -> f64 {
    let rule = gauss_rule(nodes);
    let expo = 0.5 * (params.n() as f64 + params.sp());
    match params.n() {
        2 => {
            // 2 ∫₀^∞ (1+z²)^{-expo} dz, decay z^{-2 expo}
            let f = |z: f64| (1.0 + z * z).powf(-expo);
            2.0 * (rule.integrate_panels(0.0, 1.0, panels, f)
                + integrate_tail(&rule, 1.0, 2.0 * expo - 1.0, panels, f))
        }
        3 => {
            // 2π ∫₀^∞ ρ (1+ρ²)^{-expo} dρ
            let f = |z: f64| z * (1.0 + z * z).powf(-expo);
            std::f64::consts::TAU
                * (rule.integrate_panels(0.0, 1.0, panels, f)
                    + integrate_tail(&rule, 1.0, 2.0 * expo - 2.0, panels, f))
        }
        _ => unreachable!(),
    }
}

/// Compute and record N(n, sp) in a constant table.
pub fn record_dead_variable_constant(
    table: &mut ConstantTable,
    params: &FracParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let (value, err) = dead_variable_constant(params, quad)?;
    let key = ConstantTable::key("N", &[("n", params.n() as f64), ("sp", params.sp())]);
    table.insert(
        key,
        ConstantEntry {
            value,
            method: "radial quadrature of the dead-variable kernel".to_string(),
            error_estimate: err,
            quad_spec: *quad,
        },
    );
    Ok(value)
}
