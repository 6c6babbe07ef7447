use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance band around sp = 1 inside which the logarithmic limit
/// lim (b^{1-sp} - a^{1-sp})/(1-sp) = ln(b/a) replaces the power difference.
pub const SP_ONE_EPS: f64 = 1e-9;

/// Position of sp relative to the dimension n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassRegime {
    /// sp < n: points have zero capacity, isolated boundary points are ignored.
    Subcritical,
    /// sp = n.
    Critical,
    /// sp > n: Sobolev embedding gives continuity, all boundary points regular.
    Supercritical,
}

/// Position of sp relative to 1, used for quadrature branching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelRegime {
    SpBelowOne,
    SpNearOne,
    SpAboveOne,
}

/// The parameter triple (s, p, n) of the fractional p-Laplacian, with the
/// derived product sp cached. Construction validates 0 < s < 1, p > 1,
/// n in {1, 2, 3}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    s: f64,
    p: f64,
    n: usize,
    sp: f64,
}

impl FracParams {
    pub fn new(s: f64, p: f64, n: usize) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) || !s.is_finite() {
            return Err(Error::invalid(format!("s must lie in (0,1), got {s}")));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::invalid(format!("p must lie in (1,inf), got {p}")));
        }
        if !(1..=3).contains(&n) {
            return Err(Error::invalid(format!("n must be 1, 2 or 3, got {n}")));
        }
        Ok(FracParams { s, p, n, sp: s * p })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The product sp driving the kernel exponent n + sp.
    pub fn sp(&self) -> f64 {
        self.sp
    }

    /// Kernel exponent n + sp of |x - y|^{-n-sp}.
    pub fn kernel_exponent(&self) -> f64 {
        self.n as f64 + self.sp
    }

    pub fn mass_regime(&self) -> MassRegime {
        let n = self.n as f64;
        if self.sp < n {
            MassRegime::Subcritical
        } else if self.sp > n {
            MassRegime::Supercritical
        } else {
            MassRegime::Critical
        }
    }

    pub fn kernel_regime(&self) -> KernelRegime {
        if (self.sp - 1.0).abs() <= SP_ONE_EPS {
            KernelRegime::SpNearOne
        } else if self.sp < 1.0 {
            KernelRegime::SpBelowOne
        } else {
            KernelRegime::SpAboveOne
        }
    }

    /// Same s and p in a different dimension.
    pub fn with_dimension(&self, n: usize) -> Result<Self> {
        FracParams::new(self.s, self.p, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_validates_ranges() {
        assert!(FracParams::new(0.5, 2.0, 1).is_ok());
        assert!(FracParams::new(0.0, 2.0, 1).is_err());
        assert!(FracParams::new(1.0, 2.0, 1).is_err());
        assert!(FracParams::new(0.5, 1.0, 1).is_err());
        assert!(FracParams::new(0.5, 2.0, 0).is_err());
        assert!(FracParams::new(0.5, 2.0, 4).is_err());
        assert!(FracParams::new(f64::NAN, 2.0, 1).is_err());
    }

    #[test]
    fn regimes_follow_sp() {
        let sub = FracParams::new(0.25, 2.0, 1).unwrap(); // sp = 0.5
        assert_eq!(sub.mass_regime(), MassRegime::Subcritical);
        assert_eq!(sub.kernel_regime(), KernelRegime::SpBelowOne);

        let sup = FracParams::new(0.75, 2.0, 1).unwrap(); // sp = 1.5
        assert_eq!(sup.mass_regime(), MassRegime::Supercritical);
        assert_eq!(sup.kernel_regime(), KernelRegime::SpAboveOne);

        let one = FracParams::new(0.5, 2.0, 1).unwrap(); // sp = 1
        assert_eq!(one.mass_regime(), MassRegime::Critical);
        assert_eq!(one.kernel_regime(), KernelRegime::SpNearOne);

        let d3 = FracParams::new(0.5, 2.0, 3).unwrap();
        assert_eq!(d3.mass_regime(), MassRegime::Subcritical);
    }
}
