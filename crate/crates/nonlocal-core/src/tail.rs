//! Exterior tail models: the declared behavior of a grid function beyond the
//! computational box. The operator integrates over all of ℝⁿ, so the tail
//! contribution is computed semi-analytically from these closed forms rather
//! than from sampled data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm, Grid};
use crate::profile::Profile;

const MIN_DEPTH_CAP: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum TailModel {
    /// Constant value g∞.
    Constant { value: f64 },
    /// scale·profile(x) + offset for a closed-form profile family.
    Profile {
        profile: Profile,
        scale: f64,
        offset: f64,
    },
    /// offset + amplitude·|x|^{-exponent}, exponent > 0 (bounded decay
    /// envelope).
    PowerDecay {
        amplitude: f64,
        exponent: f64,
        offset: f64,
    },
    /// Pointwise min/max of two representable tails (depth-capped).
    Min {
        left: Box<TailModel>,
        right: Box<TailModel>,
    },
    Max {
        left: Box<TailModel>,
        right: Box<TailModel>,
    },
    /// Tail of an infimal convolution: the inf couples the inner tail with
    /// the stored grid values, so the snapshot travels with the model.
    InfConv {
        inner: Box<TailModel>,
        eps: f64,
        grid: Grid,
        values: Vec<f64>,
    },
}

impl TailModel {
    pub fn constant(value: f64) -> Self {
        TailModel::Constant { value }
    }

    pub fn profile(profile: Profile) -> Self {
        TailModel::Profile {
            profile,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TailModel::Constant { value } => *value,
            TailModel::Profile {
                profile,
                scale,
                offset,
            } => scale * profile.eval(x) + offset,
            TailModel::PowerDecay {
                amplitude,
                exponent,
                offset,
            } => {
                // tails are only evaluated outside the box, so r > 0
                let r = norm(x).max(f64::MIN_POSITIVE);
                offset + amplitude * r.powf(-exponent)
            }
            TailModel::Min { left, right } => left.eval(x).min(right.eval(x)),
            TailModel::Max { left, right } => left.eval(x).max(right.eval(x)),
            TailModel::InfConv {
                inner,
                eps,
                grid,
                values,
            } => {
                let mut best = inf_conv_tail_inf(inner, *eps, x, grid);
                for (i, y) in grid.nodes() {
                    let mut d2 = 0.0;
                    for a in 0..grid.n() {
                        d2 += (x[a] - y[a]) * (x[a] - y[a]);
                    }
                    let cand = values[i] + d2 / (2.0 * eps);
                    if cand < best {
                        best = cand;
                    }
                }
                best
            }
        }
    }

    /// Growth exponent α at infinity: |g(x)| ≲ C(1 + |x|^α). The kernel
    /// integrals require α(p-1) < sp.
    pub fn growth_alpha(&self) -> f64 {
        match self {
            TailModel::Constant { .. } | TailModel::PowerDecay { .. } => 0.0,
            TailModel::Profile { profile, .. } => profile.growth_alpha(),
            TailModel::Min { left, right } | TailModel::Max { left, right } => {
                left.growth_alpha().max(right.growth_alpha())
            }
            TailModel::InfConv { inner, .. } => inner.growth_alpha(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.growth_alpha() == 0.0
    }

    fn depth(&self) -> usize {
        match self {
            TailModel::Min { left, right } | TailModel::Max { left, right } => {
                1 + left.depth().max(right.depth())
            }
            _ => 0,
        }
    }

    /// -g, where representable.
    pub fn negated(&self) -> TailModel {
        match self {
            TailModel::Constant { value } => TailModel::Constant { value: -value },
            TailModel::Profile {
                profile,
                scale,
                offset,
            } => TailModel::Profile {
                profile: profile.clone(),
                scale: -scale,
                offset: -offset,
            },
            TailModel::PowerDecay {
                amplitude,
                exponent,
                offset,
            } => TailModel::PowerDecay {
                amplitude: -amplitude,
                exponent: *exponent,
                offset: -offset,
            },
            TailModel::Min { left, right } => TailModel::Max {
                left: Box::new(left.negated()),
                right: Box::new(right.negated()),
            },
            TailModel::Max { left, right } => TailModel::Min {
                left: Box::new(left.negated()),
                right: Box::new(right.negated()),
            },
            TailModel::InfConv {
                inner,
                eps,
                grid,
                values,
            } => TailModel::InfConv {
                inner: Box::new(inner.negated()),
                eps: *eps,
                grid: *grid,
                values: values.iter().map(|v| -v).collect(),
            },
        }
    }

    /// scale·g + shift, where representable.
    pub fn affine(&self, scale: f64, shift: f64) -> TailModel {
        if scale < 0.0 {
            return self.negated().affine(-scale, shift);
        }
        match self {
            TailModel::Constant { value } => TailModel::Constant {
                value: scale * value + shift,
            },
            TailModel::Profile {
                profile,
                scale: s0,
                offset,
            } => TailModel::Profile {
                profile: profile.clone(),
                scale: scale * s0,
                offset: scale * offset + shift,
            },
            TailModel::PowerDecay {
                amplitude,
                exponent,
                offset,
            } => TailModel::PowerDecay {
                amplitude: scale * amplitude,
                exponent: *exponent,
                offset: scale * offset + shift,
            },
            TailModel::Min { left, right } => TailModel::Min {
                left: Box::new(left.affine(scale, shift)),
                right: Box::new(right.affine(scale, shift)),
            },
            TailModel::Max { left, right } => TailModel::Max {
                left: Box::new(left.affine(scale, shift)),
                right: Box::new(right.affine(scale, shift)),
            },
            TailModel::InfConv {
                inner,
                eps,
                grid,
                values,
            } => TailModel::InfConv {
                inner: Box::new(inner.affine(scale, shift)),
                eps: *eps,
                grid: *grid,
                values: values.iter().map(|v| scale * v + shift).collect(),
            },
        }
    }

    /// Pointwise minimum of two tails. Identical tails and pairs of constants
    /// collapse; other combinations nest into a Min node up to a fixed depth,
    /// past which the combination is rejected as non-representable.
    pub fn min_with(&self, other: &TailModel) -> Result<TailModel> {
        if self == other {
            return Ok(self.clone());
        }
        if let (TailModel::Constant { value: a }, TailModel::Constant { value: b }) = (self, other)
        {
            return Ok(TailModel::Constant { value: a.min(*b) });
        }
        let combined = TailModel::Min {
            left: Box::new(self.clone()),
            right: Box::new(other.clone()),
        };
        if combined.depth() > MIN_DEPTH_CAP {
            return Err(Error::NonRepresentableTail(format!(
                "min nesting deeper than {MIN_DEPTH_CAP}"
            )));
        }
        Ok(combined)
    }
}

/// inf over the exterior region of inner(y) + |x-y|²/(2 eps): deterministic
/// radial sweeps along the ray through x and the coordinate axes, each
/// followed by local bisection refinement of the best bracket.
fn inf_conv_tail_inf(inner: &TailModel, eps: f64, x: &[f64], grid: &Grid) -> f64 {
    let edge = grid.cell_union_half_width();
    let n = grid.n();
    let r = norm(&x[..n]);
    let mut best = f64::INFINITY;
    let mut dirs: Vec<[f64; 3]> = Vec::new();
    if r > 1e-300 {
        let mut dir = [0.0f64; 3];
        for a in 0..n {
            dir[a] = x[a] / r;
        }
        dirs.push(dir);
    }
    for a in 0..n {
        let mut dir = [0.0f64; 3];
        dir[a] = 1.0;
        dirs.push(dir);
    }
    let reach = (r + 6.0 * (eps.max(1.0)).sqrt()).max(4.0 * edge);
    const STEPS: usize = 96;
    for dir in dirs {
        for sgn in [1.0f64, -1.0] {
            let value_at = |rho: f64| {
                let mut y = [0.0f64; 3];
                for a in 0..n {
                    y[a] = sgn * dir[a] * rho;
                }
                let mut d2 = 0.0;
                for a in 0..n {
                    d2 += (x[a] - y[a]) * (x[a] - y[a]);
                }
                inner.eval(&y[..n]) + d2 / (2.0 * eps)
            };
            let step = (reach - edge) / STEPS as f64;
            let mut best_rho = edge;
            let mut best_here = value_at(edge);
            for k in 1..=STEPS {
                let rho = edge + step * k as f64;
                let v = value_at(rho);
                if v < best_here {
                    best_here = v;
                    best_rho = rho;
                }
            }
            // local refinement of the winning bracket
            let mut width = step;
            for _ in 0..40 {
                for cand in [best_rho - 0.5 * width, best_rho + 0.5 * width] {
                    let c = cand.max(edge);
                    let v = value_at(c);
                    if v < best_here {
                        best_here = v;
                        best_rho = c;
                    }
                }
                width *= 0.5;
            }
            if best_here < best {
                best = best_here;
            }
        }
    }
    best
}
