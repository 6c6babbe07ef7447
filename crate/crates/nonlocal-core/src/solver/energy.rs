//! The discrete Gagliardo energy
//!
//!   J(v) = (1/p) Σ_{i<j} 2 W_ij |v_i - v_j|^p + tail terms - hⁿ Σ f_i v_i,
//!
//! restricted to pairs touching an unknown (exterior-exterior pairs are
//! constant in the unknowns and dropped, so reported energies are relative),
//! with the tail coupling taken relative to the boundary data so growing
//! tails stay finite. W_ij = hⁿ Q(j-i) shares the operator's kernel rules.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::DomainMask;
use crate::gridfn::GridFunction;
use crate::operator::{PairWeights, TailRule};
use crate::params::FracParams;
use crate::phi::{phi, phi_prime_regularized};
use crate::quad::QuadratureSpec;

pub struct DiscreteEnergy {
    pub(crate) mask: DomainMask,
    pub(crate) params: FracParams,
    weights: PairWeights,
    /// Full node array: non-interior nodes carry the boundary data.
    data: Vec<f64>,
    f_interior: Vec<f64>,
    tails: Vec<TailRule>,
    tail_ref: Vec<f64>,
    hn: f64,
    /// p = 2 row sums (pairs + tail mass): the diagonal preconditioner.
    precond: Vec<f64>,
    unknown_of: Vec<Option<usize>>,
    pub(crate) boundary: GridFunction,
}

impl DiscreteEnergy {
    pub fn new(
        mask: &DomainMask,
        f: &GridFunction,
        g: &GridFunction,
        params: &FracParams,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let grid = *mask.grid();
        if f.grid() != &grid || g.grid() != &grid {
            return Err(Error::GridMismatch(
                "mask, source and boundary data must share one grid".to_string(),
            ));
        }
        if grid.n() != params.n() {
            return Err(Error::GridMismatch("dimension mismatch".to_string()));
        }
        quad.validate(&grid)?;
        let weights = PairWeights::build(grid, params, quad);
        let hn = grid.h().powi(grid.n() as i32);

        let mut unknown_of = vec![None; grid.len()];
        for (k, &i) in mask.interior().iter().enumerate() {
            unknown_of[i] = Some(k);
        }
        let data = g.values().to_vec();
        let f_interior: Vec<f64> = mask.interior().iter().map(|&i| f.value(i)).collect();

        let mut tails = Vec::with_capacity(mask.len());
        let mut tail_ref = Vec::with_capacity(mask.len());
        for &i in mask.interior() {
            let x = grid.node(i);
            tails.push(TailRule::build(
                &grid,
                params,
                quad,
                g.tail(),
                &x[..grid.n()],
            )?);
            tail_ref.push(g.value(i));
        }

        let mut precond = vec![0.0f64; mask.len()];
        for (k, &i) in mask.interior().iter().enumerate() {
            let mi = grid.multi_index(i);
            let mut row = 0.0;
            for j in 0..grid.len() {
                if j == i {
                    continue;
                }
                let mj = grid.multi_index(j);
                let mut d = [0isize; 3];
                for a in 0..grid.n() {
                    d[a] = mj[a] as isize - mi[a] as isize;
                }
                row += weights.q(d);
            }
            precond[k] = 2.0 * hn * (row + tails[k].kappa);
        }

        Ok(DiscreteEnergy {
            mask: mask.clone(),
            params: *params,
            weights,
            data,
            f_interior,
            tails,
            tail_ref,
            hn,
            precond,
            unknown_of,
            boundary: g.clone(),
        })
    }

    pub fn unknowns(&self) -> usize {
        self.mask.len()
    }

    pub fn preconditioner(&self) -> &[f64] {
        &self.precond
    }

    pub fn cell_volume(&self) -> f64 {
        self.hn
    }

    /// Natural residual scale: kernel row mass times the data oscillation
    /// (to the power p-1), plus the source size.
    pub fn residual_scale(&self) -> f64 {
        let grid = self.mask.grid();
        let osc = {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in &self.data {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
            (hi - lo).max(1e-12)
        };
        let row = self.precond.iter().fold(0.0f64, |m, v| m.max(*v)) / self.hn;
        let fmax = self.f_interior.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let _ = grid;
        row * osc.powf(self.params.p() - 1.0) + fmax + 1.0
    }

    /// Full node array with the unknowns spliced in.
    pub fn full_values(&self, x: &[f64]) -> Vec<f64> {
        let mut vals = self.data.clone();
        for (k, &i) in self.mask.interior().iter().enumerate() {
            vals[i] = x[k];
        }
        vals
    }

    pub fn assemble(&self, x: &[f64]) -> GridFunction {
        GridFunction::new(
            *self.mask.grid(),
            self.full_values(x),
            self.boundary.tail().clone(),
        )
        .expect("values are finite")
    }

    /// Relative energy J(v). Row partials are computed in parallel and
    /// reduced in index order, so the result is bitwise reproducible for any
    /// thread count.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let grid = self.mask.grid();
        let p = self.params.p();
        let vals = self.full_values(x);
        let rows: Vec<f64> = self
            .mask
            .interior()
            .par_iter()
            .enumerate()
            .map(|(k, &i)| {
                let mi = grid.multi_index(i);
                let vi = vals[i];
                let mut pair = 0.0;
                for j in 0..grid.len() {
                    if j == i {
                        continue;
                    }
                    // count unknown-unknown pairs once, data pairs always
                    if let Some(l) = self.unknown_of[j] {
                        if l <= k {
                            continue;
                        }
                    }
                    let mj = grid.multi_index(j);
                    let mut d = [0isize; 3];
                    for a in 0..grid.n() {
                        d[a] = mj[a] as isize - mi[a] as isize;
                    }
                    pair += 2.0 * self.weights.q(d) * (vi - vals[j]).abs().powf(p);
                }
                pair / p + 2.0 * self.tails[k].energy_sum(vi, self.tail_ref[k], p)
                    - self.f_interior[k] * vi
            })
            .collect();
        self.hn * rows.iter().sum::<f64>()
    }

    /// ∇J over the unknowns (same parallel layout as the energy).
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let grid = self.mask.grid();
        let p = self.params.p();
        let vals = self.full_values(x);
        out.par_iter_mut().enumerate().for_each(|(k, slot)| {
            let i = self.mask.interior()[k];
            let mi = grid.multi_index(i);
            let vi = vals[i];
            let mut acc = 0.0;
            for j in 0..grid.len() {
                if j == i {
                    continue;
                }
                let mj = grid.multi_index(j);
                let mut d = [0isize; 3];
                for a in 0..grid.n() {
                    d[a] = mj[a] as isize - mi[a] as isize;
                }
                acc += 2.0 * self.weights.q(d) * phi(vi - vals[j], p);
            }
            acc -= 2.0 * self.tails[k].phi_sum(vi, p);
            acc -= self.f_interior[k];
            *slot = self.hn * acc;
        });
    }

    /// Dense regularized Jacobian of the gradient (symmetric positive
    /// definite); row-major n×n, rows assembled in parallel.
    pub fn jacobian(&self, x: &[f64], mu: f64, out: &mut [f64]) {
        let grid = self.mask.grid();
        let p = self.params.p();
        let n_unknown = self.mask.len();
        let vals = self.full_values(x);
        out.par_chunks_mut(n_unknown)
            .enumerate()
            .for_each(|(k, row)| {
                row.iter_mut().for_each(|v| *v = 0.0);
                let i = self.mask.interior()[k];
                let mi = grid.multi_index(i);
                let vi = vals[i];
                let mut diag = 0.0;
                for j in 0..grid.len() {
                    if j == i {
                        continue;
                    }
                    let mj = grid.multi_index(j);
                    let mut d = [0isize; 3];
                    for a in 0..grid.n() {
                        d[a] = mj[a] as isize - mi[a] as isize;
                    }
                    let w = 2.0
                        * self.hn
                        * self.weights.q(d)
                        * phi_prime_regularized(vi - vals[j], p, mu);
                    diag += w;
                    if let Some(l) = self.unknown_of[j] {
                        row[l] -= w;
                    }
                }
                diag += 2.0 * self.hn * self.tails[k].dphi_sum(vi, p, mu);
                row[k] += diag;
            });
    }

    pub fn interior_values_of(&self, g: &GridFunction) -> Vec<f64> {
        self.mask.interior().iter().map(|&i| g.value(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DomainShape, Grid};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn setup(m: usize, s: f64, p: f64) -> (DiscreteEnergy, Grid) {
        let grid = Grid::new(1, 2.0, m).unwrap();
        let mask = DomainMask::from_shape(grid, &DomainShape::Ball { radius: 1.0 }).unwrap();
        let params = FracParams::new(s, p, 1).unwrap();
        let f = GridFunction::constant(grid, 0.0);
        let g = GridFunction::constant(grid, 0.0);
        let e = DiscreteEnergy::new(&mask, &f, &g, &params, &QuadratureSpec::coarse()).unwrap();
        (e, grid)
    }

    #[test]
    fn constant_field_has_zero_energy_and_gradient() {
        let grid = Grid::new(1, 2.0, 33).unwrap();
        let mask = DomainMask::from_shape(grid, &DomainShape::Ball { radius: 1.0 }).unwrap();
        let params = FracParams::new(0.5, 2.0, 1).unwrap();
        let f = GridFunction::constant(grid, 0.0);
        let g = GridFunction::constant(grid, 3.0);
        let e = DiscreteEnergy::new(&mask, &f, &g, &params, &QuadratureSpec::coarse()).unwrap();
        let x = vec![3.0; e.unknowns()];
        assert_abs_diff_eq!(e.energy(&x), 0.0, epsilon = 1e-12);
        let mut grad = vec![0.0; e.unknowns()];
        e.gradient(&x, &mut grad);
        for v in grad {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn energy_nonnegative_for_zero_source() {
        let (e, _) = setup(33, 0.5, 2.0);
        let x: Vec<f64> = (0..e.unknowns())
            .map(|k| ((k * 37) % 11) as f64 / 11.0)
            .collect();
        assert!(e.energy(&x) >= 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        for p in [1.5, 2.0, 3.0] {
            let (e, _) = setup(17, 0.5, p);
            let n = e.unknowns();
            let x: Vec<f64> = (0..n)
                .map(|k| 0.5 * ((k * 29) % 13) as f64 / 13.0 - 0.2)
                .collect();
            let mut grad = vec![0.0; n];
            e.gradient(&x, &mut grad);
            let step = 1e-6;
            let sup = grad.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
            for k in 0..n {
                let mut xp = x.clone();
                xp[k] += step;
                let mut xm = x.clone();
                xm[k] -= step;
                let fd = (e.energy(&xp) - e.energy(&xm)) / (2.0 * step);
                assert_relative_eq!(grad[k], fd, max_relative = 1e-5, epsilon = 1e-5 * sup);
            }
        }
    }

    #[test]
    fn raising_a_node_above_neighbors_gives_positive_gradient() {
        let (e, _) = setup(33, 0.5, 2.5);
        let n = e.unknowns();
        let mut x = vec![0.0; n];
        x[n / 2] = 1.0;
        let mut grad = vec![0.0; n];
        e.gradient(&x, &mut grad);
        assert!(grad[n / 2] > 0.0);
    }

    #[test]
    fn jacobian_is_symmetric_and_matches_gradient_differences() {
        let (e, _) = setup(9, 0.5, 3.0);
        let n = e.unknowns();
        let x: Vec<f64> = (0..n).map(|k| (k as f64 * 0.3).sin() * 0.4).collect();
        let mut jac = vec![0.0; n * n];
        e.jacobian(&x, 1e-12, &mut jac);
        for k in 0..n {
            for l in 0..n {
                assert_relative_eq!(
                    jac[k * n + l],
                    jac[l * n + k],
                    max_relative = 1e-12,
                    epsilon = 1e-12
                );
            }
        }
        // directional derivative of the gradient
        let step = 1e-7;
        let dir: Vec<f64> = (0..n).map(|k| ((k * 7) % 5) as f64 / 5.0 - 0.4).collect();
        let mut xp = x.clone();
        let mut xm = x.clone();
        for k in 0..n {
            xp[k] += step * dir[k];
            xm[k] -= step * dir[k];
        }
        let mut gp = vec![0.0; n];
        let mut gm = vec![0.0; n];
        e.gradient(&xp, &mut gp);
        e.gradient(&xm, &mut gm);
        for k in 0..n {
            let fd = (gp[k] - gm[k]) / (2.0 * step);
            let jd: f64 = (0..n).map(|l| jac[k * n + l] * dir[l]).sum();
            assert_relative_eq!(jd, fd, max_relative = 1e-4, epsilon = 1e-8);
        }
    }
}
