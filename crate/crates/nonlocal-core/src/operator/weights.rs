//! Cached pair weights Q(d) = ∫_{cell(d)} |z|^{-n-sp} dz, keyed by the integer
//! cell offset d. The kernel is not resolved by midpoint rules near the
//! diagonal, so offsets within the near-field depth get refined tensor-Gauss
//! weights, a medium ring gets a light Gauss rule, and far offsets use the
//! midpoint kernel value. Translation invariance of the grid makes the table
//! shared by every evaluation point.

use std::collections::HashMap;

use crate::grid::Grid;
use crate::params::FracParams;
use crate::quad::{gauss_rule, QuadratureSpec};

#[derive(Debug, Clone)]
pub struct PairWeights {
    grid: Grid,
    span: usize,
    q: Vec<f64>,
}

impl PairWeights {
    pub fn build(grid: Grid, params: &FracParams, quad: &QuadratureSpec) -> Self {
        let n = grid.n();
        let m = grid.m();
        let h = grid.h();
        let gamma = params.kernel_exponent();
        let span = 2 * m - 1;
        let total = span.pow(n as u32);
        let mut q = vec![0.0f64; total];

        let near_rule = gauss_rule(quad.near_field_nodes);
        let mid_rule = gauss_rule(4);
        let mut canon: HashMap<[usize; 3], f64> = HashMap::new();

        let near_depth = quad.near_field_depth as isize;
        let mid_depth = 4 * quad.near_field_depth as isize;

        let mut d = [0isize; 3];
        for idx in 0..total {
            let mut rest = idx;
            for a in 0..n {
                d[a] = (rest % span) as isize - (m as isize - 1);
                rest /= span;
            }
            if (0..n).all(|a| d[a] == 0) {
                continue; // singular cell handled by the PV pairing
            }
            let mut key = [0usize; 3];
            for a in 0..n {
                key[a] = d[a].unsigned_abs();
            }
            key[..n].sort_unstable();
            let depth = key[n - 1] as isize;
            let val = *canon.entry(key).or_insert_with(|| {
                if depth <= near_depth {
                    cell_integral(&key, n, h, gamma, &near_rule)
                } else if depth <= mid_depth {
                    cell_integral(&key, n, h, gamma, &mid_rule)
                } else {
                    // midpoint kernel value
                    let mut r2 = 0.0;
                    for ka in key.iter().take(n) {
                        let z = *ka as f64 * h;
                        r2 += z * z;
                    }
                    h.powi(n as i32) * r2.sqrt().powf(-gamma)
                }
            });
            q[idx] = val;
        }
        PairWeights { grid, span, q }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn offset_index(&self, d: [isize; 3]) -> usize {
        let n = self.grid.n();
        let m = self.grid.m() as isize;
        let mut idx = 0usize;
        for a in (0..n).rev() {
            idx = idx * self.span + (d[a] + m - 1) as usize;
        }
        idx
    }

    /// ∫_{cell(d)} |z|^{-n-sp} dz; zero for the singular cell d = 0.
    #[inline]
    pub fn q(&self, d: [isize; 3]) -> f64 {
        self.q[self.offset_index(d)]
    }

    /// Raw table access by precomputed offset index.
    #[inline]
    pub fn q_at(&self, offset_index: usize) -> f64 {
        self.q[offset_index]
    }

    /// Row sum Σ_{d≠0} Q(d), the p = 2 kernel mass of the box seen from the
    /// center; used for preconditioning and tolerance scales.
    pub fn full_row_sum(&self) -> f64 {
        self.q.iter().sum()
    }
}

fn cell_integral(
    key: &[usize; 3],
    n: usize,
    h: f64,
    gamma: f64,
    rule: &crate::quad::GaussRule,
) -> f64 {
    // tensor product over the cell [d_a h - h/2, d_a h + h/2]
    let g = rule.nodes.len();
    let mut acc = 0.0;
    let count = g.pow(n as u32);
    for c in 0..count {
        let mut rest = c;
        let mut w = 1.0;
        let mut r2 = 0.0;
        for ka in key.iter().take(n) {
            let k = rest % g;
            rest /= g;
            let z = (*ka as f64 - 0.5 + rule.nodes[k]) * h;
            w *= rule.weights[k];
            r2 += z * z;
        }
        acc += w * r2.sqrt().powf(-gamma);
    }
    acc * h.powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn near_weights_match_exact_1d_integral() {
        let grid = Grid::new(1, 2.0, 33).unwrap();
        let params = FracParams::new(0.5, 2.0, 1).unwrap(); // sp = 1, kernel z^{-2}
        let w = PairWeights::build(grid, &params, &QuadratureSpec::standard());
        let h = grid.h();
        for d in 1..5i64 {
            let a = (d as f64 - 0.5) * h;
            let b = (d as f64 + 0.5) * h;
            let exact = 1.0 / a - 1.0 / b;
            assert_relative_eq!(w.q([d as isize, 0, 0]), exact, max_relative = 1e-8);
            assert_relative_eq!(w.q([-d as isize, 0, 0]), exact, max_relative = 1e-8);
        }
        assert_eq!(w.q([0, 0, 0]), 0.0);
    }

    #[test]
    fn table_is_symmetric_in_2d() {
        let grid = Grid::new(2, 1.0, 9).unwrap();
        let params = FracParams::new(0.4, 2.5, 2).unwrap();
        let w = PairWeights::build(grid, &params, &QuadratureSpec::coarse());
        assert_eq!(w.q([2, 3, 0]), w.q([3, 2, 0]));
        assert_eq!(w.q([2, 3, 0]), w.q([-2, 3, 0]));
        assert_eq!(w.q([2, 3, 0]), w.q([2, -3, 0]));
    }
}
