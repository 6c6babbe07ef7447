//! Construction and numerical certification of the explicit
//! supersolution/barrier families, plus the right-hand-side modification
//! machinery. "Certified" always means: verified at sampled points with a
//! quadrature error budget, the margin exceeding twice the error estimate.

mod cutoff;
mod infconv;
mod lemmas;
mod minorant;
mod power;
mod ring;
mod shell;

pub use cutoff::{cutoff_supersolution_margin, outer_tail_integral, CutoffMargin};
pub use infconv::inf_convolution;
pub use lemmas::{lemma_simple_check, rhs_modify};
pub use minorant::{eval_minorant, minorant_bracket};
pub use power::{power_constant, record_power_constant};
pub use ring::{find_ring_delta, ring_decomposition, RingDecomposition};
pub use shell::{shell_1d_decomposition, ShellDecomposition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::gridfn::GridFunction;
use crate::operator::{dead_variable_constant, eval_profile_1d, PvContext};
use crate::params::FracParams;
use crate::profile::Profile;
use crate::quad::QuadratureSpec;
use crate::report::{CertificateReport, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierFamily {
    PowerPositivePart,
    TruncatedMinorant,
    HalfSpace,
    Cone,
    Ring,
    OneDimShell,
    IndicatorBall,
    SmoothCutoff,
}

impl std::str::FromStr for BarrierFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "power-positive-part" => BarrierFamily::PowerPositivePart,
            "truncated-minorant" => BarrierFamily::TruncatedMinorant,
            "half-space" => BarrierFamily::HalfSpace,
            "cone" => BarrierFamily::Cone,
            "ring" => BarrierFamily::Ring,
            "one-dim-shell" => BarrierFamily::OneDimShell,
            "indicator-ball" => BarrierFamily::IndicatorBall,
            "smooth-cutoff" => BarrierFamily::SmoothCutoff,
            other => return Err(Error::UnknownProfile(other.to_string())),
        })
    }
}

/// A barrier family with its parameters, validated on construction:
/// 0 < β ≤ s where the supersolution claim requires it (β < s for strict
/// signs), the indicator only when sp < 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub family: BarrierFamily,
    pub params: FracParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// r0 for the ring, R for the cutoff, L for the minorant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl BarrierSpec {
    pub fn new(
        family: BarrierFamily,
        params: FracParams,
        beta: Option<f64>,
        scale: Option<f64>,
    ) -> Result<Self> {
        use BarrierFamily::*;
        match family {
            PowerPositivePart | HalfSpace | Cone | Ring | OneDimShell => {
                let b = beta.ok_or_else(|| Error::invalid("this family needs beta".to_string()))?;
                if !(b > 0.0) {
                    return Err(Error::invalid("need beta > 0".to_string()));
                }
                if b > params.s() {
                    return Err(Error::invalid(format!(
                        "beta = {b} > s = {}: the supersolution claim fails by design",
                        params.s()
                    )));
                }
            }
            IndicatorBall => {
                if params.sp() >= 1.0 {
                    return Err(Error::invalid(
                        "the indicator barrier is only constructible for sp < 1".to_string(),
                    ));
                }
            }
            TruncatedMinorant | SmoothCutoff => {
                let sc = scale.unwrap_or(1.0);
                if !(sc > 0.0) {
                    return Err(Error::invalid("need a positive scale".to_string()));
                }
            }
        }
        Ok(BarrierSpec {
            family,
            params,
            beta,
            scale,
        })
    }

    /// The profile realizing this barrier.
    pub fn profile(&self) -> Profile {
        match self.family {
            BarrierFamily::PowerPositivePart | BarrierFamily::HalfSpace => {
                Profile::HalfSpacePower {
                    beta: self.beta.unwrap_or(self.params.s()),
                    normal: [1.0, 0.0, 0.0],
                }
            }
            BarrierFamily::TruncatedMinorant => Profile::TruncatedMinorant {
                s: self.params.s(),
                length: self.scale.unwrap_or(1.0),
            },
            BarrierFamily::Cone => Profile::Cone {
                beta: self.beta.unwrap_or(self.params.s()),
                center: [0.0; 3],
            },
            BarrierFamily::Ring => Profile::Ring {
                beta: self.beta.unwrap_or(self.params.s()),
                r0: self.scale.unwrap_or(1.0),
                cap: None,
                center: [0.0; 3],
            },
            BarrierFamily::OneDimShell => Profile::Ring {
                beta: self.beta.unwrap_or(self.params.s()),
                r0: 1.0,
                cap: None,
                center: [0.0; 3],
            },
            BarrierFamily::IndicatorBall => Profile::IndicatorBall { radius: 1.0 },
            BarrierFamily::SmoothCutoff => Profile::SmoothCutoff {
                radius: self.scale.unwrap_or(1.0),
            },
        }
    }

    /// Numerical sign certificate on the family's claimed region.
    pub fn certify(&self, quad: &QuadratureSpec) -> Result<CertificateReport> {
        let s = self.params.s();
        let p = self.params.p();
        let strict = self.beta.map(|b| b < s).unwrap_or(true);
        match self.family {
            BarrierFamily::PowerPositivePart => {
                let beta = self.beta.unwrap();
                let profile = Profile::HalfSpacePower {
                    beta,
                    normal: [1.0, 0.0, 0.0],
                };
                let params1 = self.params.with_dimension(1)?;
                let mut samples = Vec::new();
                for x in [0.25, 0.5, 1.0, 2.0] {
                    let v = eval_profile_1d(&profile, x, &params1, quad)?;
                    samples.push(Sample {
                        point: vec![x],
                        value: v,
                    });
                }
                let err = {
                    let v = samples[0].value;
                    let fine = eval_profile_1d(&profile, 0.25, &params1, &QuadratureSpec::fine())?;
                    (v - fine).abs().max(1e-13)
                };
                Ok(sign_certificate(
                    format!("barrier power-positive-part(beta={beta})"),
                    samples,
                    strict,
                    err,
                ))
            }
            BarrierFamily::HalfSpace => {
                // dead-variable reduction: ℒ in n dimensions = N(n, sp) times
                // the one-dimensional operator on the profile of the normal
                // coordinate
                let beta = self.beta.unwrap();
                let profile = Profile::HalfSpacePower {
                    beta,
                    normal: [1.0, 0.0, 0.0],
                };
                let params1 = self.params.with_dimension(1)?;
                let factor = if self.params.n() >= 2 {
                    dead_variable_constant(&self.params, quad)?.0
                } else {
                    1.0
                };
                let mut samples = Vec::new();
                for d in [0.25, 0.5, 1.0, 2.0] {
                    let v = factor * eval_profile_1d(&profile, d, &params1, quad)?;
                    samples.push(Sample {
                        point: vec![d],
                        value: v,
                    });
                }
                let err = {
                    let fine = factor
                        * eval_profile_1d(&profile, 0.25, &params1, &QuadratureSpec::fine())?;
                    (samples[0].value - fine).abs().max(1e-13)
                };
                Ok(sign_certificate(
                    format!("barrier half-space(beta={beta},n={})", self.params.n()),
                    samples,
                    strict,
                    err,
                ))
            }
            BarrierFamily::TruncatedMinorant => {
                let (_, report) = minorant_bracket(self.scale.unwrap_or(1.0), &self.params, quad)?;
                Ok(report)
            }
            BarrierFamily::Cone => {
                // grid evaluation inside the unit ball
                let beta = self.beta.unwrap();
                let profile = Profile::Cone {
                    beta,
                    center: [0.0; 3],
                };
                let n = self.params.n();
                let m = if n == 1 { 257 } else { 41 };
                let grid = Grid::new(n, 2.0, m)?;
                let u = GridFunction::from_profile(grid, &profile)?;
                let ctx = PvContext::new(grid, &self.params, quad)?;
                let mut samples = Vec::new();
                let mut err = 0.0f64;
                for radius in [0.0, 0.3, 0.6, 0.85] {
                    let mut x = [0.0f64; 3];
                    x[0] = radius;
                    let Some(node) = nearest_node(&grid, &x) else {
                        continue;
                    };
                    let ev = ctx.eval_detailed(&u, node)?;
                    err = err.max(ev.singular_residual_bound + ev.tail_remainder_bound);
                    samples.push(Sample {
                        point: grid.node(node)[..n].to_vec(),
                        value: ev.value,
                    });
                }
                Ok(sign_certificate(
                    format!("barrier cone(beta={beta},n={n})"),
                    samples,
                    strict,
                    err,
                ))
            }
            BarrierFamily::Ring => {
                let (_, report) =
                    find_ring_delta(self.beta.unwrap(), s, p, self.scale.unwrap_or(1.0), quad)?;
                Ok(report)
            }
            BarrierFamily::OneDimShell => {
                let beta = self.beta.unwrap();
                let mut samples = Vec::new();
                for xi in [1e-3, 3e-3, 1e-2] {
                    let d = shell_1d_decomposition(beta, s, p, 1.0 + xi, quad)?;
                    samples.push(Sample {
                        point: vec![1.0 + xi],
                        value: d.total,
                    });
                }
                let err = {
                    let a = shell_1d_decomposition(beta, s, p, 1.0 + 1e-3, quad)?.total;
                    let b =
                        shell_1d_decomposition(beta, s, p, 1.0 + 1e-3, &QuadratureSpec::fine())?
                            .total;
                    (a - b).abs().max(1e-12)
                };
                Ok(sign_certificate(
                    format!("barrier one-dim-shell(beta={beta})"),
                    samples,
                    strict,
                    err,
                ))
            }
            BarrierFamily::IndicatorBall => {
                let n = self.params.n();
                let m = if n == 1 { 257 } else { 33 };
                let grid = Grid::new(n, 2.0, m)?;
                let u = GridFunction::from_profile(grid, &Profile::IndicatorBall { radius: 1.0 })?;
                let ctx = PvContext::new(grid, &self.params, quad)?;
                let mut samples = Vec::new();
                let mut err = 0.0f64;
                for radius in [0.0, 0.25, 0.5, 0.75] {
                    let mut x = [0.0f64; 3];
                    x[0] = radius;
                    let Some(node) = nearest_node(&grid, &x) else {
                        continue;
                    };
                    let ev = ctx.eval_detailed(&u, node)?;
                    err = err.max(ev.singular_residual_bound + ev.tail_remainder_bound);
                    samples.push(Sample {
                        point: grid.node(node)[..n].to_vec(),
                        value: ev.value,
                    });
                }
                Ok(sign_certificate(
                    format!("barrier indicator-ball(n={n},sp={})", self.params.sp()),
                    samples,
                    true,
                    err,
                ))
            }
            BarrierFamily::SmoothCutoff => {
                let (_, report) =
                    cutoff_supersolution_margin(self.scale.unwrap_or(1.0), &self.params, quad)?;
                Ok(report)
            }
        }
    }
}

fn nearest_node(grid: &Grid, x: &[f64; 3]) -> Option<usize> {
    let h = grid.h();
    let mut mi = [0usize; 3];
    for a in 0..grid.n() {
        let t = ((x[a] + grid.half_width()) / h).round();
        if t < 0.0 || t as usize >= grid.m() {
            return None;
        }
        mi[a] = t as usize;
    }
    let idx = grid.flat_index(mi);
    grid.is_strictly_interior(idx).then_some(idx)
}

/// Sign certificate: strict families need values ≤ -margin with margin at
/// least twice the error budget; non-strict (β = s) families only need
/// values within the error budget of the nonpositive axis.
fn sign_certificate(
    subject: String,
    samples: Vec<Sample>,
    strict: bool,
    err: f64,
) -> CertificateReport {
    let worst = samples
        .iter()
        .map(|s| s.value)
        .fold(f64::NEG_INFINITY, f64::max);
    if strict {
        CertificateReport::upper_bound(subject, samples, 0.0, (-worst).max(0.0) * 0.5, err)
    } else {
        // supersolution without a strict margin: tolerate the error band
        CertificateReport::upper_bound(subject, samples, 2.5 * err, err, err / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: f64, p: f64, n: usize) -> FracParams {
        FracParams::new(s, p, n).unwrap()
    }

    #[test]
    fn construction_rejects_beta_above_s() {
        let pr = params(0.5, 2.0, 1);
        assert!(BarrierSpec::new(BarrierFamily::Cone, pr, Some(0.6), None).is_err());
        assert!(BarrierSpec::new(BarrierFamily::Cone, pr, Some(0.25), None).is_ok());
        // indicator requires sp < 1
        let high = params(0.75, 2.0, 1);
        assert!(BarrierSpec::new(BarrierFamily::IndicatorBall, high, None, None).is_err());
        let low = params(0.25, 2.0, 1);
        assert!(BarrierSpec::new(BarrierFamily::IndicatorBall, low, None, None).is_ok());
    }

    #[test]
    fn power_certificate_passes_for_beta_half_s() {
        let pr = params(0.5, 2.0, 1);
        let spec =
            BarrierSpec::new(BarrierFamily::PowerPositivePart, pr, Some(0.25), None).unwrap();
        let report = spec.certify(&QuadratureSpec::standard()).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn indicator_certificate_passes_below_sp_one() {
        let pr = params(0.25, 2.0, 1);
        let spec = BarrierSpec::new(BarrierFamily::IndicatorBall, pr, None, None).unwrap();
        let report = spec.certify(&QuadratureSpec::standard()).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
