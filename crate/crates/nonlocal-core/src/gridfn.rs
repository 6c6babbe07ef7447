//! Grid functions: node values on a uniform box grid plus an exterior tail
//! model, so evaluation is defined on all of ℝⁿ. Serialization is a CSV of
//! node values with a JSON sidecar for the grid metadata and tail model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::profile::Profile;
use crate::tail::TailModel;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    tail: TailModel,
}

/// Sidecar metadata stored next to the CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFunctionMeta {
    pub grid: Grid,
    pub tail: TailModel,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>, tail: TailModel) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite".to_string()));
        }
        Ok(GridFunction { grid, values, tail })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        GridFunction {
            grid,
            values: vec![c; grid.len()],
            tail: TailModel::constant(c),
        }
    }

    /// Sample a closed-form profile at the nodes; the tail model is the
    /// profile's true behavior at infinity.
    pub fn from_profile(grid: Grid, profile: &Profile) -> Result<Self> {
        profile.validate()?;
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                profile.eval(&x[..grid.n()])
            })
            .collect();
        Ok(GridFunction {
            grid,
            values,
            tail: TailModel::profile(profile.clone()),
        })
    }

    pub fn from_fn(grid: Grid, tail: TailModel, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                f(&x[..grid.n()])
            })
            .collect();
        GridFunction::new(grid, values, tail)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Evaluation anywhere in ℝⁿ: multilinear interpolation inside the node
    /// hull, clamped interpolation in the half-cell rim, tail model beyond
    /// the cell union.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let g = &self.grid;
        let edge = g.cell_union_half_width();
        if x[..g.n()].iter().any(|c| c.abs() > edge) {
            return self.tail.eval(x);
        }
        let h = g.h();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..g.n() {
            let t = ((x[a].clamp(-g.half_width(), g.half_width())) + g.half_width()) / h;
            let mut k = t.floor() as isize;
            if k < 0 {
                k = 0;
            }
            let mut k = k as usize;
            if k >= g.m() - 1 {
                k = g.m() - 2;
            }
            base[a] = k;
            frac[a] = (t - k as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        let corners = 1usize << g.n();
        for c in 0..corners {
            let mut w = 1.0;
            let mut mi = [0usize; 3];
            for a in 0..g.n() {
                if c >> a & 1 == 1 {
                    w *= frac[a];
                    mi[a] = base[a] + 1;
                } else {
                    w *= 1.0 - frac[a];
                    mi[a] = base[a];
                }
            }
            acc += w * self.values[g.flat_index(mi)];
        }
        acc
    }

    /// Node-wise minimum; the tails must combine to a representable model.
    pub fn pointwise_min(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "pointwise_min requires identical grids".to_string(),
            ));
        }
        let tail = self.tail.min_with(&other.tail)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.min(*b))
            .collect();
        Ok(GridFunction {
            grid: self.grid,
            values,
            tail,
        })
    }

    pub fn negated(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| -v).collect(),
            tail: self.tail.negated(),
        }
    }

    pub fn affine(&self, scale: f64, shift: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| scale * v + shift).collect(),
            tail: self.tail.affine(scale, shift),
        }
    }

    pub fn with_tail(&self, tail: TailModel) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.clone(),
            tail,
        }
    }

    /// Resample onto another grid (evaluation handles interpolation and
    /// tails); used by refinement ladders.
    pub fn resampled(&self, grid: Grid) -> Result<GridFunction> {
        if grid.n() != self.grid.n() {
            return Err(Error::GridMismatch("dimension mismatch".to_string()));
        }
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                self.eval(&x[..grid.n()])
            })
            .collect();
        GridFunction::new(grid, values, self.tail.clone())
    }

    /// CSV with header `index,coord_1..coord_n,value`, all floats printed
    /// with 17 significant digits so the round-trip is bit exact.
    pub fn to_csv(&self) -> String {
        let n = self.grid.n();
        let mut out = String::new();
        out.push_str("index");
        for a in 1..=n {
            out.push_str(&format!(",coord_{a}"));
        }
        out.push_str(",value\n");
        for (i, x) in self.grid.nodes() {
            out.push_str(&format!("{i}"));
            for c in x.iter().take(n) {
                out.push_str(&format!(",{}", fmt_f64(*c)));
            }
            out.push_str(&format!(",{}\n", fmt_f64(self.values[i])));
        }
        out
    }

    pub fn meta(&self) -> GridFunctionMeta {
        GridFunctionMeta {
            grid: self.grid,
            tail: self.tail.clone(),
        }
    }

    /// Write `<stem>.csv` and `<stem>.json` under `dir`.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        let meta = serde_json::to_string_pretty(&self.meta())?;
        std::fs::write(dir.join(format!("{stem}.json")), meta + "\n")?;
        Ok(())
    }

    pub fn read_files(dir: &Path, stem: &str) -> Result<GridFunction> {
        let meta: GridFunctionMeta =
            serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        let csv = std::fs::read_to_string(dir.join(format!("{stem}.csv")))?;
        GridFunction::from_csv(&csv, meta)
    }

    pub fn from_csv(csv: &str, meta: GridFunctionMeta) -> Result<GridFunction> {
        let mut values = vec![0.0f64; meta.grid.len()];
        let mut seen = vec![false; meta.grid.len()];
        for (ln, line) in csv.lines().enumerate() {
            if ln == 0 {
                continue; // header
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != meta.grid.n() + 2 {
                return Err(Error::Format(format!("line {}: wrong field count", ln + 1)));
            }
            let idx: usize = fields[0]
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad index", ln + 1)))?;
            if idx >= values.len() {
                return Err(Error::Format(format!(
                    "line {}: index out of range",
                    ln + 1
                )));
            }
            let v: f64 = fields[fields.len() - 1]
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad value", ln + 1)))?;
            values[idx] = v;
            seen[idx] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Format("missing node rows".to_string()));
        }
        GridFunction::new(meta.grid, values, meta.tail)
    }
}

/// 17 significant digits: enough to reconstruct any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid1d() -> Grid {
        Grid::new(1, 2.0, 17).unwrap()
    }

    #[test]
    fn interpolation_and_tail_dispatch() {
        let g = grid1d();
        let f = GridFunction::from_profile(
            g,
            &Profile::Linear {
                gradient: [1.0, 0.0, 0.0],
                offset: 0.0,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(f.eval(&[0.3]), 0.3, epsilon = 1e-14); // interior interp
        assert_abs_diff_eq!(f.eval(&[100.0]), 100.0, epsilon = 1e-12); // tail
        let edge = g.cell_union_half_width();
        assert!(f.eval(&[edge + 1e-9]) > 2.0); // tail just past the cell union
    }

    #[test]
    fn pointwise_min_examples() {
        let g = grid1d();
        let up = GridFunction::from_profile(
            g,
            &Profile::Linear {
                gradient: [1.0, 0.0, 0.0],
                offset: 0.0,
            },
        )
        .unwrap();
        let dn = up.negated();
        // idempotence
        assert_eq!(up.pointwise_min(&up).unwrap(), up);
        // constants
        let one = GridFunction::constant(g, 1.0);
        let two = GridFunction::constant(g, 2.0);
        assert_eq!(one.pointwise_min(&two).unwrap(), one);
        // min(x, -x) sampled at 0.3
        let m = up.pointwise_min(&dn).unwrap();
        assert_abs_diff_eq!(m.eval(&[0.3]), -0.3, epsilon = 1e-14);
        // grid mismatch rejected
        let other = GridFunction::constant(Grid::new(1, 2.0, 33).unwrap(), 0.0);
        assert!(up.pointwise_min(&other).is_err());
    }

    #[test]
    fn min_commutes_and_associates_on_samples() {
        let g = grid1d();
        let a = GridFunction::from_profile(g, &Profile::AbsNorm).unwrap();
        let b = GridFunction::constant(g, 0.7);
        let c = GridFunction::from_profile(
            g,
            &Profile::Linear {
                gradient: [0.5, 0.0, 0.0],
                offset: 0.2,
            },
        )
        .unwrap();
        let ab_c = a.pointwise_min(&b).unwrap().pointwise_min(&c).unwrap();
        let a_bc = a.pointwise_min(&b.pointwise_min(&c).unwrap()).unwrap();
        let ba_c = b.pointwise_min(&a).unwrap().pointwise_min(&c).unwrap();
        for x in [-3.0, -1.2, 0.0, 0.4, 1.9, 2.6, 7.0] {
            assert_abs_diff_eq!(ab_c.eval(&[x]), a_bc.eval(&[x]), epsilon = 1e-14);
            assert_abs_diff_eq!(ab_c.eval(&[x]), ba_c.eval(&[x]), epsilon = 1e-14);
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = grid1d();
        let f = GridFunction::from_profile(
            g,
            &Profile::HalfSpacePower {
                beta: 0.37,
                normal: [1.0, 0.0, 0.0],
            },
        )
        .unwrap();
        let csv = f.to_csv();
        let back = GridFunction::from_csv(&csv, f.meta()).unwrap();
        assert_eq!(f.values(), back.values());
        assert_eq!(f.tail(), back.tail());
    }

    proptest! {
        #[test]
        fn serialization_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 17)) {
            let g = grid1d();
            let f = GridFunction::new(g, values, TailModel::constant(0.25)).unwrap();
            let back = GridFunction::from_csv(&f.to_csv(), f.meta()).unwrap();
            prop_assert_eq!(f.values(), back.values());
        }
    }
}
