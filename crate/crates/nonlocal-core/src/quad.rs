//! Quadrature machinery: Gauss-Legendre panel rules plus the power
//! substitutions that remove algebraic endpoint singularities, and the
//! substituted rules for semi-infinite kernel tails.
//!
//! Every singular integral in this crate reduces to one of three shapes:
//! ∫₀^b f with f ~ t^α at 0 (α > -1), the mirrored right-endpoint case,
//! and ∫_{y0}^∞ f with f ~ y^{-1-γ} (γ > 0). The substitutions t = b u^{1/(1+α)}
//! and y = y0 u^{-1/γ} flatten the leading behavior to u^0, after which
//! panelized Gauss-Legendre converges fast.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A Gauss-Legendre rule mapped to [0, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn rule_cache() -> &'static Mutex<HashMap<usize, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss-Legendre nodes/weights of the given degree on [0, 1], cached.
pub fn gauss_rule(degree: usize) -> Arc<GaussRule> {
    let degree = degree.max(2);
    let mut cache = rule_cache().lock().expect("rule cache poisoned");
    cache
        .entry(degree)
        .or_insert_with(|| {
            let gl = GaussLegendre::new(degree).expect("degree >= 2");
            let mut nodes = Vec::with_capacity(degree);
            let mut weights = Vec::with_capacity(degree);
            for (x, w) in gl.into_iter() {
                nodes.push(0.5 * (x + 1.0));
                weights.push(0.5 * w);
            }
            // ascending node order keeps summation deterministic
            let mut idx: Vec<usize> = (0..nodes.len()).collect();
            idx.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
            Arc::new(GaussRule {
                nodes: idx.iter().map(|&i| nodes[i]).collect(),
                weights: idx.iter().map(|&i| weights[i]).collect(),
            })
        })
        .clone()
}

impl GaussRule {
    /// ∫_a^b f, single panel.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let len = b - a;
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a + len * x);
        }
        acc * len
    }

    /// ∫_a^b f over `panels` equal panels.
    pub fn integrate_panels<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> f64 {
        let panels = panels.max(1);
        let step = (b - a) / panels as f64;
        let mut acc = 0.0;
        for k in 0..panels {
            acc += self.integrate(a + k as f64 * step, a + (k + 1) as f64 * step, &f);
        }
        acc
    }
}

/// ∫₀^b f(t) dt where f(t) ~ c·t^alpha as t -> 0+, alpha > -1.
/// Substitutes t = b·u^{1/(1+alpha)} so the transformed integrand is bounded.
pub fn integrate_power_left<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    b: f64,
    alpha: f64,
    panels: usize,
    f: F,
) -> f64 {
    debug_assert!(alpha > -1.0, "endpoint exponent must be > -1");
    if b <= 0.0 {
        return 0.0;
    }
    let m = 1.0 / (1.0 + alpha);
    let g = |u: f64| {
        let t = b * u.powf(m);
        if t == 0.0 {
            return 0.0; // underflow guard: measure-zero endpoint
        }
        let jac = b * m * u.powf(m - 1.0);
        f(t) * jac
    };
    // the substituted integrand is bounded but may keep weak (fractional or
    // logarithmic) irregularities at u = 0: geometric grading beats uniform
    // panels there
    let mut acc = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..(2 * panels).max(16) {
        let lo = 0.5 * hi;
        acc += rule.integrate(lo, hi, &g);
        hi = lo;
    }
    acc + rule.integrate(0.0, hi, &g)
}

/// ∫_a^b f(t) dt where f(t) ~ c·(b-t)^alpha as t -> b-, alpha > -1.
pub fn integrate_power_right<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    a: f64,
    b: f64,
    alpha: f64,
    panels: usize,
    f: F,
) -> f64 {
    integrate_power_left(rule, b - a, alpha, panels, |t| f(b - t))
}

/// ∫₀¹ f(t) dt with f ~ t^{alpha0} at 0 and f ~ (1-t)^{alpha1} at 1, split at
/// 1/2 with a power substitution on each half. The right half is evaluated
/// through `f_right(w)` with w = 1 - t computed exactly (never by the
/// cancelling difference 1.0 - t), so integrands carrying w^{-sp} keep full
/// precision arbitrarily close to the endpoint.
pub fn integrate_unit_split<FL, FR>(
    rule: &GaussRule,
    alpha0: f64,
    alpha1: f64,
    panels: usize,
    f_left: FL,
    f_right: FR,
) -> f64
where
    FL: Fn(f64) -> f64,
    FR: Fn(f64) -> f64,
{
    integrate_power_left(rule, 0.5, alpha0, panels, &f_left)
        + integrate_power_left(rule, 0.5, alpha1, panels, &f_right)
}

/// Convenience form of [`integrate_unit_split`] for integrands already
/// expressed in t alone (no cancellation hazard at t = 1).
pub fn integrate_unit_two_singular<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    alpha0: f64,
    alpha1: f64,
    panels: usize,
    f: F,
) -> f64 {
    integrate_unit_split(rule, alpha0, alpha1, panels, &f, |w| f(1.0 - w))
}

/// ∫ over [a, b] of an integrand with reduced smoothness at one endpoint,
/// by geometrically graded panels toward it. `f_dist` takes the distance
/// from the graded endpoint; `toward_b` selects which endpoint is graded.
pub fn integrate_dyadic<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    len: f64,
    levels: usize,
    f_dist: F,
) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut hi = len;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        acc += rule.integrate(lo, hi, &f_dist);
        hi = lo;
    }
    // the innermost sliver: the integrand is bounded near the endpoint by
    // construction (values continuous), close with one panel
    acc + rule.integrate(0.0, hi, &f_dist)
}

/// ∫_a^b f(t) dt with 0 < a < b, log-substituted t = a (b/a)^u: resolves
/// integrands with power-law decay over an arbitrary dynamic range b/a.
pub fn integrate_log<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    a: f64,
    b: f64,
    panels: usize,
    f: F,
) -> f64 {
    debug_assert!(a > 0.0 && b > a);
    let lambda = (b / a).ln();
    rule.integrate_panels(0.0, 1.0, panels, |u| {
        let t = a * (lambda * u).exp();
        f(t) * t * lambda
    })
}

/// ∫_{y0}^∞ f(y) dy where f(y) ~ c·y^{-1-gamma} as y -> ∞, gamma > 0.
/// Substitutes y = y0·u^{-1/gamma}; the transformed integrand is bounded.
pub fn integrate_tail<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    y0: f64,
    gamma: f64,
    panels: usize,
    f: F,
) -> f64 {
    debug_assert!(gamma > 0.0 && y0 > 0.0);
    let m = 1.0 / gamma;
    let g = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let y = y0 * u.powf(-m);
        if !y.is_finite() {
            return 0.0;
        }
        let jac = y0 * m * u.powf(-m - 1.0);
        let v = f(y) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // graded toward u = 0 (y = ∞): subleading powers and logarithms of y
    // turn into weak irregularities there
    let mut acc = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..(2 * panels).max(16) {
        let lo = 0.5 * hi;
        acc += rule.integrate(lo, hi, &g);
        hi = lo;
    }
    acc + rule.integrate(0.0, hi, &g)
}

/// Named quadrature presets selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadPreset {
    Coarse,
    Standard,
    Fine,
}

impl std::str::FromStr for QuadPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(QuadPreset::Coarse),
            "standard" => Ok(QuadPreset::Standard),
            "fine" => Ok(QuadPreset::Fine),
            other => Err(Error::invalid(format!(
                "unknown quadrature preset `{other}`"
            ))),
        }
    }
}

/// All knobs of the principal-value and tail quadratures.
///
/// * `pv_cut_frac` — the PV cut ε as a fraction of the grid spacing h; the
///   symmetric pairing y ↦ 2x - y handles |y-x| ≤ ε and the residual is
///   bounded from local differences.
/// * `near_field_depth` — offsets within this many cells get refined
///   tensor-Gauss pair weights; a medium ring of 4x this depth uses a light
///   Gauss rule, everything farther uses the midpoint kernel value.
/// * `far_field_radius_factor` — multiple of the box diagonal past which only
///   the analytic remainder bound is reported.
/// * `profile_nodes`/`profile_panels` — Gauss degree and panel count for 1D
///   profile integrals (endpoint-substituted).
/// * `angular_nodes`/`radial_tail_nodes` — exterior-tail rule resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub pv_cut_frac: f64,
    pub near_field_depth: usize,
    pub near_field_nodes: usize,
    pub far_field_radius_factor: f64,
    pub profile_nodes: usize,
    pub profile_panels: usize,
    pub angular_nodes: usize,
    pub radial_tail_nodes: usize,
    pub radial_tail_panels: usize,
}

impl QuadratureSpec {
    pub fn preset(p: QuadPreset) -> Self {
        match p {
            QuadPreset::Coarse => QuadratureSpec {
                pv_cut_frac: 0.25,
                near_field_depth: 2,
                near_field_nodes: 8,
                far_field_radius_factor: 4.0,
                profile_nodes: 16,
                profile_panels: 4,
                angular_nodes: 8,
                radial_tail_nodes: 12,
                radial_tail_panels: 2,
            },
            QuadPreset::Standard => QuadratureSpec {
                pv_cut_frac: 0.25,
                near_field_depth: 3,
                near_field_nodes: 12,
                far_field_radius_factor: 6.0,
                profile_nodes: 24,
                profile_panels: 8,
                angular_nodes: 16,
                radial_tail_nodes: 16,
                radial_tail_panels: 4,
            },
            QuadPreset::Fine => QuadratureSpec {
                pv_cut_frac: 0.125,
                near_field_depth: 4,
                near_field_nodes: 16,
                far_field_radius_factor: 10.0,
                profile_nodes: 32,
                profile_panels: 16,
                angular_nodes: 24,
                radial_tail_nodes: 24,
                radial_tail_panels: 6,
            },
        }
    }

    pub fn standard() -> Self {
        Self::preset(QuadPreset::Standard)
    }

    pub fn fine() -> Self {
        Self::preset(QuadPreset::Fine)
    }

    pub fn coarse() -> Self {
        Self::preset(QuadPreset::Coarse)
    }

    /// ε in absolute units for a given grid.
    pub fn pv_cut(&self, grid: &Grid) -> f64 {
        self.pv_cut_frac * grid.h()
    }

    /// Far-field radius in absolute units (greater than the box diagonal).
    pub fn far_field_radius(&self, grid: &Grid) -> f64 {
        self.far_field_radius_factor * grid.box_diagonal()
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.pv_cut_frac > 0.0 && self.pv_cut_frac < 1.0) {
            return Err(Error::invalid(
                "pv cut must be a positive fraction of the spacing h".to_string(),
            ));
        }
        if self.far_field_radius(grid) <= grid.box_diagonal() {
            return Err(Error::invalid(
                "far-field radius must exceed the box diagonal".to_string(),
            ));
        }
        for (name, v) in [
            ("near_field_nodes", self.near_field_nodes),
            ("profile_nodes", self.profile_nodes),
            ("angular_nodes", self.angular_nodes),
            ("radial_tail_nodes", self.radial_tail_nodes),
        ] {
            if v < 8 {
                return Err(Error::invalid(format!(
                    "{name} must be at least 8, got {v}"
                )));
            }
        }
        Ok(())
    }
}
