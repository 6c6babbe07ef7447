//! Discrete Caccioppoli diagnostic: compares the localized Gagliardo energy
//! of a computed solution on B_r against the three right-hand terms
//! (local L^p mass, exterior tail moment, source norm). A sanity check for
//! the solver, not a proof; the constant is taken as 1 and only the ratio and
//! its stability under refinement are meaningful.

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::params::FracParams;
use crate::quad::QuadratureSpec;
use crate::report::{CertificateReport, Sample, Verdict};

use super::tail_rule::TailRule;
use super::weights::PairWeights;

#[derive(Debug, Clone, Copy)]
pub struct CaccioppoliGap {
    pub left: f64,
    pub local_mass: f64,
    pub tail_moment: f64,
    pub source_norm: f64,
    pub right: f64,
    pub ratio: f64,
}

pub fn caccioppoli_gap(
    u: &GridFunction,
    f: &GridFunction,
    r: f64,
    big_r: f64,
    params: &FracParams,
    quad: &QuadratureSpec,
) -> Result<(CaccioppoliGap, CertificateReport)> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::invalid("need 0 < r < R".to_string()));
    }
    let grid = u.grid();
    if f.grid() != grid {
        return Err(Error::GridMismatch(
            "u and f on different grids".to_string(),
        ));
    }
    let n = grid.n();
    let hn = grid.h().powi(n as i32);
    let weights = PairWeights::build(*grid, params, quad);

    let inner: Vec<usize> = (0..grid.len()).filter(|&i| radius(grid, i) < r).collect();
    let ball: Vec<usize> = (0..grid.len())
        .filter(|&i| radius(grid, i) < big_r)
        .collect();

    // left side: double sum of the Gagliardo integrand over B_r × B_r
    let p = params.p();
    let mut left = 0.0;
    for (a, &i) in inner.iter().enumerate() {
        let mi = grid.multi_index(i);
        let ui = u.value(i);
        for &j in inner.iter().skip(a + 1) {
            let mj = grid.multi_index(j);
            let mut d = [0isize; 3];
            for ax in 0..n {
                d[ax] = mj[ax] as isize - mi[ax] as isize;
            }
            left += 2.0 * hn * weights.q(d) * (ui - u.value(j)).abs().powf(p);
        }
    }

    // right side, term by term
    let local_mass = hn * ball.iter().map(|&i| u.value(i).abs().powf(p)).sum::<f64>();

    // ∫_{ℝⁿ \ B_R} |u|^{p-1} |x|^{-n-sp} dx: box nodes beyond B_R plus the tail
    let mut tail_moment = 0.0;
    for i in 0..grid.len() {
        let rad = radius(grid, i);
        if rad >= big_r {
            tail_moment +=
                hn * u.value(i).abs().powf(p - 1.0) * rad.powf(-params.kernel_exponent());
        }
    }
    let origin = vec![0.0f64; n];
    let tail_rule = TailRule::build(grid, params, quad, u.tail(), &origin)?;
    tail_moment += tail_rule.abs_pow_sum(p - 1.0);
    let tail_term = tail_moment.powf(p / (p - 1.0));

    // ‖f‖_{L^{q}(B_R)}^{p/(p-1)} with q the dual Sobolev exponent
    let q = dual_sobolev_exponent(params);
    let fnorm = (hn * ball.iter().map(|&i| f.value(i).abs().powf(q)).sum::<f64>()).powf(1.0 / q);
    let source_norm = fnorm.powf(p / (p - 1.0));

    let right = local_mass + tail_term + source_norm;
    let ratio = if left == 0.0 { 0.0 } else { left / right };
    let gap = CaccioppoliGap {
        left,
        local_mass,
        tail_moment: tail_term,
        source_norm,
        right,
        ratio,
    };
    let verdict_ok = left.is_finite() && right.is_finite() && (left == 0.0 || ratio.is_finite());
    let report = CertificateReport {
        subject: format!("caccioppoli-gap(r={r},R={big_r})"),
        samples: vec![
            Sample {
                point: vec![r],
                value: left,
            },
            Sample {
                point: vec![big_r],
                value: right,
            },
        ],
        bound: right,
        lower_bound: None,
        margin: 0.0,
        verdict: if verdict_ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        tolerances: crate::report::Tolerances {
            error_estimate: 0.0,
            required_margin: 0.0,
        },
        detail: Some(format!("ratio = {ratio}")),
    };
    Ok((gap, report))
}

fn radius(grid: &crate::grid::Grid, i: usize) -> f64 {
    let x = grid.node(i);
    crate::grid::norm(&x[..grid.n()])
}

/// Dual exponent of the fractional Sobolev conjugate: (p*)' for sp < n,
/// and 1 when the embedding already reaches L^∞ (sp >= n).
fn dual_sobolev_exponent(params: &FracParams) -> f64 {
    let n = params.n() as f64;
    if params.sp() < n {
        let pstar = n * params.p() / (n - params.sp());
        pstar / (pstar - 1.0)
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn zero_solution_passes_with_zero_left_side() {
        let grid = Grid::new(1, 2.0, 33).unwrap();
        let u = GridFunction::constant(grid, 0.0);
        let f = GridFunction::constant(grid, 0.0);
        let params = FracParams::new(0.5, 2.0, 1).unwrap();
        let (gap, report) =
            caccioppoli_gap(&u, &f, 0.5, 1.5, &params, &QuadratureSpec::coarse()).unwrap();
        assert_eq!(gap.left, 0.0);
        assert!(report.passed());
    }

    #[test]
    fn left_side_monotone_in_r() {
        let grid = Grid::new(1, 2.0, 65).unwrap();
        let u = GridFunction::from_fn(grid, crate::tail::TailModel::constant(0.0), |x| {
            (1.0 - x[0] * x[0]).max(0.0)
        })
        .unwrap();
        let f = GridFunction::constant(grid, 0.0);
        let params = FracParams::new(0.25, 2.0, 1).unwrap();
        let quad = QuadratureSpec::coarse();
        let mut last = 0.0;
        for r in [0.25, 0.5, 1.0, 1.5] {
            let (gap, _) = caccioppoli_gap(&u, &f, r, 1.9, &params, &quad).unwrap();
            assert!(gap.left >= last);
            last = gap.left;
        }
        assert!(last > 0.0);
    }

    #[test]
    fn rejects_bad_radii() {
        let grid = Grid::new(1, 2.0, 33).unwrap();
        let u = GridFunction::constant(grid, 0.0);
        let f = GridFunction::constant(grid, 0.0);
        let params = FracParams::new(0.5, 2.0, 1).unwrap();
        assert!(caccioppoli_gap(&u, &f, 1.5, 1.5, &params, &QuadratureSpec::coarse()).is_err());
    }
}
