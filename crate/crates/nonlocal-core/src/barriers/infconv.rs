//! Infimal convolution v_ε(x) = inf_y { v(y) + |x-y|²/(2ε) }: the exact
//! discrete infimum over grid nodes plus the tail-model infimum. The output
//! never exceeds v, and the strict-supersolution sign survives on sampled
//! strict supersolutions (probed, never asserted in general).

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::tail::TailModel;

pub fn inf_convolution(v: &GridFunction, eps: f64) -> Result<GridFunction> {
    if !(eps > 0.0) {
        return Err(Error::invalid("need eps > 0".to_string()));
    }
    let grid = v.grid();
    let n = grid.n();
    // bounded below: constants and bounded tails qualify; growing tails only
    // if they grow upward (the parabola beats any sub-quadratic growth, but a
    // downward quadratic tail makes the infimum -∞)
    if v.tail().growth_alpha() >= 2.0 {
        return Err(Error::invalid(
            "inf-convolution needs a tail growing slower than the quadratic penalty".to_string(),
        ));
    }
    let tail_inf = TailModel::InfConv {
        inner: Box::new(v.tail().clone()),
        eps,
        grid: *grid,
        values: v.values().to_vec(),
    };
    let mut out = vec![0.0f64; grid.len()];
    for (i, xi) in grid.nodes() {
        let mut best = f64::INFINITY;
        for (j, yj) in grid.nodes() {
            let mut d2 = 0.0;
            for a in 0..n {
                d2 += (xi[a] - yj[a]) * (xi[a] - yj[a]);
            }
            let cand = v.value(j) + d2 / (2.0 * eps);
            if cand < best {
                best = cand;
            }
        }
        // exterior branch: reuse the tail-model infimum at the node
        let ext = tail_inf.eval(&xi[..n]);
        out[i] = best.min(ext);
    }
    GridFunction::new(*grid, out, tail_inf)
}
