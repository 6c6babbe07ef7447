//! The scalar kernel Φ_p(t) = |t|^{p-2} t and numerically stable power
//! differences used throughout the profile integrals.

use crate::error::{Error, Result};

/// Φ_p(t) = |t|^{p-2} t, continuous at t = 0 for every p > 1, odd and
/// strictly increasing. Rejects p <= 1.
pub fn phi_p(t: f64, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::invalid(format!("phi_p requires p > 1, got {p}")));
    }
    Ok(phi(t, p))
}

/// Unchecked Φ_p for hot loops; callers hold a validated FracParams.
#[inline]
pub fn phi(t: f64, p: f64) -> f64 {
    if t >= 0.0 {
        t.powf(p - 1.0)
    } else {
        -(-t).powf(p - 1.0)
    }
}

/// dΦ_p/dt = (p-1)|t|^{p-2}, regularized near t = 0 so Newton systems stay
/// finite for p < 2 (and nonsingular for p > 2).
#[inline]
pub fn phi_prime_regularized(t: f64, p: f64, mu: f64) -> f64 {
    (p - 1.0) * (t * t + mu * mu).powf(0.5 * (p - 2.0))
}

/// (b^q - a^q)/q for a, b > 0, with the q -> 0 logarithmic limit ln(b/a).
/// Uses an expm1 form when q·ln(b/a) is small to avoid cancellation.
#[inline]
pub fn power_diff_over_q(a: f64, b: f64, q: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    let l = (b / a).ln();
    if q.abs() * l.abs() < 0.5 {
        // (b^q - a^q)/q = a^q (e^{q ln(b/a)} - 1)/q
        if q == 0.0 {
            l
        } else {
            a.powf(q) * (q * l).exp_m1() / q
        }
    } else {
        (b.powf(q) - a.powf(q)) / q
    }
}
