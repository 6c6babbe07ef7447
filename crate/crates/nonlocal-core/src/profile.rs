//! Closed-form profile families: the explicit barriers and test functions
//! ((x₊)^β, the truncated minorant ℓ, half-space powers, the cone, the ring,
//! the one-dimensional shell, indicators and smooth cutoffs), each defined on
//! all of ℝⁿ so a sampled grid function can carry its exact exterior behavior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// (n·x)₊^β with unit normal n; `power-positive-part` is the n = e₁ case.
    HalfSpacePower {
        beta: f64,
        normal: [f64; 3],
    },
    /// ℓ(x₁): 0 for x₁ ≤ 0, x₁^s on (0, L), L^s beyond.
    TruncatedMinorant {
        s: f64,
        length: f64,
    },
    /// k(x) = (1 − |x − center|)₊^β.
    Cone {
        beta: f64,
        center: [f64; 3],
    },
    /// ω(x) = (|x − center| − r0)₊^β, optionally capped at the value `cap`
    /// (the cap keeps grid tails bounded). r0 = 1 in one dimension is the
    /// shell profile ω₁(x) = (|x| − 1)₊^β.
    Ring {
        beta: f64,
        r0: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        cap: Option<f64>,
        center: [f64; 3],
    },
    /// Characteristic function of |x| < radius.
    IndicatorBall {
        radius: f64,
    },
    /// 1 on B_R, 0 outside B_{2R}, quintic smoothstep between.
    SmoothCutoff {
        radius: f64,
    },
    /// 0 on B_inner, 1 outside B_outer, quintic smoothstep between.
    TransitionOut {
        inner: f64,
        outer: f64,
    },
    /// ⟨gradient, x⟩ + offset.
    Linear {
        gradient: [f64; 3],
        offset: f64,
    },
    /// −coeff·|x|² (concave probe).
    NegParabola {
        coeff: f64,
    },
    /// |x| (infimal-convolution probe).
    AbsNorm,
}

fn smoothstep5(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// (b + d)^beta - b^beta for b > 0, stable when |d| << b.
fn pow_diff(b: f64, d: f64, beta: f64) -> f64 {
    if b > 0.0 && b + d > 0.0 {
        let r = d / b;
        if r.abs() < 0.5 {
            return b.powf(beta) * (beta * r.ln_1p()).exp_m1();
        }
    }
    pos_pow(b + d, beta) - pos_pow(b, beta)
}

fn pos_pow(t: f64, beta: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t.powf(beta)
    }
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(m.to_string()));
        match self {
            Profile::HalfSpacePower { beta, normal } => {
                if !(*beta > 0.0) {
                    return bad("power profile requires beta > 0");
                }
                if (norm(normal) - 1.0).abs() > 1e-9 {
                    return bad("half-space normal must be a unit vector");
                }
            }
            Profile::TruncatedMinorant { s, length } => {
                if !(*s > 0.0 && *s < 1.0) || !(*length > 0.0) {
                    return bad("truncated minorant requires 0 < s < 1 and L > 0");
                }
            }
            Profile::Cone { beta, .. } => {
                if !(*beta > 0.0) {
                    return bad("cone requires beta > 0");
                }
            }
            Profile::Ring { beta, r0, cap, .. } => {
                if !(*beta > 0.0) || !(*r0 > 0.0) {
                    return bad("ring requires beta > 0 and r0 > 0");
                }
                if let Some(c) = cap {
                    if !(*c > 0.0) {
                        return bad("ring cap must be positive");
                    }
                }
            }
            Profile::IndicatorBall { radius } | Profile::SmoothCutoff { radius } => {
                if !(*radius > 0.0) {
                    return bad("radius must be positive");
                }
            }
            Profile::TransitionOut { inner, outer } => {
                if !(*inner > 0.0 && *outer > *inner) {
                    return bad("transition requires 0 < inner < outer");
                }
            }
            Profile::NegParabola { coeff } => {
                if !(*coeff > 0.0) {
                    return bad("parabola coefficient must be positive");
                }
            }
            Profile::Constant { .. } | Profile::Linear { .. } | Profile::AbsNorm => {}
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::HalfSpacePower { beta, normal } => {
                let d: f64 = x.iter().zip(normal).map(|(a, b)| a * b).sum();
                pos_pow(d, *beta)
            }
            Profile::TruncatedMinorant { s, length } => {
                let t = x[0];
                if t <= 0.0 {
                    0.0
                } else if t < *length {
                    t.powf(*s)
                } else {
                    length.powf(*s)
                }
            }
            Profile::Cone { beta, center } => {
                let r = dist(x, center);
                pos_pow(1.0 - r, *beta)
            }
            Profile::Ring {
                beta,
                r0,
                cap,
                center,
            } => {
                let r = dist(x, center);
                let v = pos_pow(r - r0, *beta);
                match cap {
                    Some(c) => v.min(*c),
                    None => v,
                }
            }
            Profile::IndicatorBall { radius } => {
                if norm(x) < *radius {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::SmoothCutoff { radius } => 1.0 - smoothstep5((norm(x) - radius) / radius),
            Profile::TransitionOut { inner, outer } => {
                smoothstep5((norm(x) - inner) / (outer - inner))
            }
            Profile::Linear { gradient, offset } => {
                offset + x.iter().zip(gradient).map(|(a, b)| a * b).sum::<f64>()
            }
            Profile::NegParabola { coeff } => {
                let r = norm(x);
                -coeff * r * r
            }
            Profile::AbsNorm => norm(x),
        }
    }

    /// u(x + d e₁) − u(x) in one dimension, computed in difference form so the
    /// principal-value pairing keeps full precision for tiny d.
    pub fn diff_1d(&self, x: f64, d: f64) -> f64 {
        match self {
            Profile::Constant { .. } => 0.0,
            Profile::Linear { gradient, .. } => gradient[0] * d,
            Profile::HalfSpacePower { beta, normal } => {
                let (b, dd) = (normal[0] * x, normal[0] * d);
                if b > 0.0 && b + dd > 0.0 {
                    pow_diff(b, dd, *beta)
                } else {
                    pos_pow(b + dd, *beta) - pos_pow(b, *beta)
                }
            }
            Profile::TruncatedMinorant { s, length } => {
                let (a, b) = (x, x + d);
                if a > 0.0 && b > 0.0 && a < *length && b < *length {
                    pow_diff(a, d, *s)
                } else {
                    self.eval(&[b]) - self.eval(&[a])
                }
            }
            Profile::Cone { beta, center } => {
                let (a, b) = ((x - center[0]).abs(), (x + d - center[0]).abs());
                if 1.0 - a > 0.0 && 1.0 - b > 0.0 {
                    pow_diff(1.0 - a, a - b, *beta)
                } else {
                    pos_pow(1.0 - b, *beta) - pos_pow(1.0 - a, *beta)
                }
            }
            Profile::Ring {
                beta,
                r0,
                cap,
                center,
            } => {
                let (a, b) = ((x - center[0]).abs() - r0, (x + d - center[0]).abs() - r0);
                let capped = |t: f64| match cap {
                    Some(c) => pos_pow(t, *beta).min(*c),
                    None => pos_pow(t, *beta),
                };
                let below_cap = match cap {
                    Some(c) => pos_pow(a, *beta) < *c && pos_pow(b, *beta) < *c,
                    None => true,
                };
                if a > 0.0 && b > 0.0 && below_cap {
                    pow_diff(a, b - a, *beta)
                } else {
                    capped(b) - capped(a)
                }
            }
            Profile::AbsNorm => (x + d).abs() - x.abs(),
            _ => self.eval(&[x + d]) - self.eval(&[x]),
        }
    }

    /// Growth exponent α at infinity: |u(x)| ≲ C(1 + |x|^α).
    pub fn growth_alpha(&self) -> f64 {
        match self {
            Profile::Constant { .. }
            | Profile::TruncatedMinorant { .. }
            | Profile::Cone { .. }
            | Profile::IndicatorBall { .. }
            | Profile::SmoothCutoff { .. }
            | Profile::TransitionOut { .. } => 0.0,
            Profile::HalfSpacePower { beta, .. } => *beta,
            Profile::Ring { beta, cap, .. } => {
                if cap.is_some() {
                    0.0
                } else {
                    *beta
                }
            }
            Profile::Linear { gradient, .. } => {
                if norm(gradient) > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::NegParabola { .. } => 2.0,
            Profile::AbsNorm => 1.0,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.growth_alpha() == 0.0
    }

    /// Points of reduced smoothness on the line (n = 1); the generic
    /// principal-value evaluator splits its panels there.
    pub fn kinks_1d(&self) -> Vec<f64> {
        match self {
            Profile::Constant { .. } | Profile::Linear { .. } | Profile::NegParabola { .. } => {
                vec![]
            }
            Profile::HalfSpacePower { .. } => vec![0.0],
            Profile::TruncatedMinorant { length, .. } => vec![0.0, *length],
            Profile::Cone { center, .. } => {
                vec![center[0] - 1.0, center[0], center[0] + 1.0]
            }
            Profile::Ring {
                beta,
                r0,
                cap,
                center,
            } => {
                let mut k = vec![center[0] - r0, center[0], center[0] + r0];
                if let Some(c) = cap {
                    // radius where the cap engages
                    let rc = r0 + c.powf(1.0 / beta);
                    k.push(center[0] - rc);
                    k.push(center[0] + rc);
                }
                k
            }
            Profile::IndicatorBall { radius } => vec![-radius, *radius],
            Profile::SmoothCutoff { radius } => {
                vec![-2.0 * radius, -radius, *radius, 2.0 * radius]
            }
            Profile::TransitionOut { inner, outer } => {
                vec![-outer, -inner, *inner, *outer]
            }
            Profile::AbsNorm => vec![0.0],
        }
    }

    /// Range of the profile over {|x| >= radius} (used for tail algebra and
    /// boundedness checks); conservative for off-center families.
    pub fn range_outside(&self, radius: f64) -> (f64, f64) {
        match self {
            Profile::Constant { value } => (*value, *value),
            Profile::HalfSpacePower { .. } => (0.0, f64::INFINITY),
            Profile::TruncatedMinorant { s, length } => (0.0, length.powf(*s)),
            Profile::Cone { center, .. } => {
                let reach = 1.0 + norm(center);
                if radius >= reach {
                    (0.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
            Profile::Ring { cap, .. } => match cap {
                Some(c) => (0.0, *c),
                None => (0.0, f64::INFINITY),
            },
            Profile::IndicatorBall { radius: r } => {
                if radius >= *r {
                    (0.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
            Profile::SmoothCutoff { radius: r } => {
                if radius >= 2.0 * r {
                    (0.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
            Profile::TransitionOut { .. } => (0.0, 1.0),
            Profile::Linear { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Profile::NegParabola { coeff } => (f64::NEG_INFINITY, -coeff * radius * radius),
            Profile::AbsNorm => (radius, f64::INFINITY),
        }
    }
}

fn dist(x: &[f64], center: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for (a, c) in x.iter().zip(center) {
        acc += (a - c) * (a - c);
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn sample_values_from_named_profiles() {
        // (x₊)^β at x = 0.25 with β = s = 0.5 -> 0.5
        let pw = Profile::HalfSpacePower {
            beta: 0.5,
            normal: [1.0, 0.0, 0.0],
        };
        assert_abs_diff_eq!(pw.eval(&[0.25]), 0.5, epsilon = 1e-15);
        assert_eq!(pw.eval(&[-1.0]), 0.0);

        // indicator of the unit ball is 0 for |x| >= 1
        let ind = Profile::IndicatorBall { radius: 1.0 };
        assert_eq!(ind.eval(&[2.0]), 0.0);
        assert_eq!(ind.eval(&[0.5]), 1.0);
        assert_eq!(ind.eval(&[1.0]), 0.0);

        // cone value 1 at its center
        let cone = Profile::Cone {
            beta: 0.3,
            center: [0.0; 3],
        };
        assert_eq!(cone.eval(&[0.0]), 1.0);
        assert_eq!(cone.eval(&[1.0]), 0.0);

        // minorant plateau
        let ell = Profile::TruncatedMinorant {
            s: 0.5,
            length: 2.0,
        };
        assert_relative_eq!(ell.eval(&[1.0]), 1.0);
        assert_relative_eq!(ell.eval(&[4.0]), 2.0f64.powf(0.5));
        assert_eq!(ell.eval(&[-0.5]), 0.0);
    }

    #[test]
    fn stable_diff_matches_naive_but_survives_tiny_steps() {
        let pw = Profile::HalfSpacePower {
            beta: 0.25,
            normal: [1.0, 0.0, 0.0],
        };
        let x = 0.7;
        for d in [0.3, 1e-3, -1e-3] {
            let naive = pw.eval(&[x + d]) - pw.eval(&[x]);
            assert_relative_eq!(pw.diff_1d(x, d), naive, max_relative = 1e-12);
        }
        // tiny step: naive difference loses ~12 digits, stable keeps them
        let d = 1e-14;
        let expected = 0.25 * x.powf(-0.75) * d; // derivative * d
        assert_relative_eq!(pw.diff_1d(x, d), expected, max_relative = 1e-9);
    }

    #[test]
    fn capped_ring_is_bounded() {
        let ring = Profile::Ring {
            beta: 0.25,
            r0: 1.0,
            cap: Some(0.8),
            center: [0.0; 3],
        };
        assert!(ring.is_bounded());
        assert_eq!(ring.eval(&[30.0, 0.0, 0.0]), 0.8);
        let free = Profile::Ring {
            beta: 0.25,
            r0: 1.0,
            cap: None,
            center: [0.0; 3],
        };
        assert!(!free.is_bounded());
        assert_eq!(free.growth_alpha(), 0.25);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(Profile::HalfSpacePower {
            beta: -0.5,
            normal: [1.0, 0.0, 0.0]
        }
        .validate()
        .is_err());
        assert!(Profile::HalfSpacePower {
            beta: 0.5,
            normal: [2.0, 0.0, 0.0]
        }
        .validate()
        .is_err());
        assert!(Profile::TransitionOut {
            inner: 4.0,
            outer: 2.0
        }
        .validate()
        .is_err());
        assert!(Profile::Cone {
            beta: 0.3,
            center: [0.0; 3]
        }
        .validate()
        .is_ok());
    }
}
