//! Uniform tensor grids on [-L, L]^n and node masks describing the domain Ω.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform tensor grid on the box [-L, L]^n with m nodes per axis and
/// spacing h = 2L/(m-1), identical on all axes. Cells are node-centered
/// cubes of side h, so the cell union is [-L - h/2, L + h/2]^n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    half_width: f64,
    m: usize,
}

impl Grid {
    pub fn new(n: usize, half_width: f64, m: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::invalid(format!(
                "grid dimension must be 1..=3, got {n}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::invalid("half width must be positive".to_string()));
        }
        if m < 3 {
            return Err(Error::invalid(format!(
                "need at least 3 nodes per axis, got {m}"
            )));
        }
        Ok(Grid { n, half_width, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Nodes per axis.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.m - 1) as f64
    }

    /// Total node count m^n.
    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Half-width of the cell union [-L-h/2, L+h/2]^n; the exterior tail
    /// model applies beyond this box.
    pub fn cell_union_half_width(&self) -> f64 {
        self.half_width + 0.5 * self.h()
    }

    pub fn box_diagonal(&self) -> f64 {
        2.0 * self.cell_union_half_width() * (self.n as f64).sqrt()
    }

    pub fn axis_coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.h()
    }

    /// Multi-index of a flat node index (unused axes are 0).
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rest = idx;
        for a in 0..self.n {
            out[a] = rest % self.m;
            rest /= self.m;
        }
        out
    }

    pub fn flat_index(&self, mi: [usize; 3]) -> usize {
        let mut idx = 0usize;
        for a in (0..self.n).rev() {
            idx = idx * self.m + mi[a];
        }
        idx
    }

    /// Coordinates of a node (unused axes are 0).
    pub fn node(&self, idx: usize) -> [f64; 3] {
        let mi = self.multi_index(idx);
        let mut x = [0.0f64; 3];
        for a in 0..self.n {
            x[a] = self.axis_coord(mi[a]);
        }
        x
    }

    /// Flat index of the node closest to x, or None outside the node hull.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let h = self.h();
        let mut mi = [0usize; 3];
        for a in 0..self.n {
            let t = (x[a] + self.half_width) / h;
            let k = t.round();
            if (t - k).abs() > 1e-9 || k < 0.0 || k as usize >= self.m {
                return None;
            }
            mi[a] = k as usize;
        }
        Some(self.flat_index(mi))
    }

    /// Whether a node lies strictly inside the box (no coordinate on the hull
    /// boundary).
    pub fn is_strictly_interior(&self, idx: usize) -> bool {
        let mi = self.multi_index(idx);
        (0..self.n).all(|a| mi[a] > 0 && mi[a] + 1 < self.m)
    }

    /// The refined grid sharing every node of self (m -> 2m - 1).
    pub fn refined(&self) -> Grid {
        Grid {
            n: self.n,
            half_width: self.half_width,
            m: 2 * self.m - 1,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, [f64; 3])> + '_ {
        (0..self.len()).map(move |i| (i, self.node(i)))
    }
}

/// Shapes the domain Ω can take inside the grid box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainShape {
    /// |x| < radius
    Ball { radius: f64 },
    /// max |x_a| < half_width
    Box { half_width: f64 },
    /// inner < |x| < outer
    Ring { inner: f64, outer: f64 },
    /// (-radius, radius) \ {0}; one dimension only
    PuncturedInterval { radius: f64 },
}

/// The interior node set of Ω plus an ordered exhaustion D_1 ⊂ D_2 ⊂ … ⊂ Ω
/// built by erosion. Interior nodes always lie strictly inside the grid box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMask {
    grid: Grid,
    interior: Vec<usize>,
    #[serde(skip)]
    membership: Vec<bool>,
    erosion_layers: Vec<usize>,
}

impl DomainMask {
    pub fn from_indices(grid: Grid, mut interior: Vec<usize>) -> Result<Self> {
        interior.sort_unstable();
        interior.dedup();
        for &i in &interior {
            if i >= grid.len() {
                return Err(Error::invalid(format!("node index {i} outside grid")));
            }
            if !grid.is_strictly_interior(i) {
                return Err(Error::invalid(
                    "interior nodes must lie strictly inside the box".to_string(),
                ));
            }
        }
        let mut membership = vec![false; grid.len()];
        for &i in &interior {
            membership[i] = true;
        }
        Ok(DomainMask {
            grid,
            interior,
            membership,
            erosion_layers: vec![3, 2, 1],
        })
    }

    pub fn from_shape(grid: Grid, shape: &DomainShape) -> Result<Self> {
        let mut interior = Vec::new();
        for (i, x) in grid.nodes() {
            if !grid.is_strictly_interior(i) {
                continue;
            }
            let r = norm(&x[..grid.n()]);
            let inside = match shape {
                DomainShape::Ball { radius } => r < radius - 1e-12,
                DomainShape::Box { half_width } => {
                    x[..grid.n()].iter().all(|c| c.abs() < half_width - 1e-12)
                }
                DomainShape::Ring { inner, outer } => r > inner + 1e-12 && r < outer - 1e-12,
                DomainShape::PuncturedInterval { radius } => {
                    if grid.n() != 1 {
                        return Err(Error::invalid(
                            "punctured interval is one-dimensional".to_string(),
                        ));
                    }
                    r < radius - 1e-12 && r > 1e-12
                }
            };
            if inside {
                interior.push(i);
            }
        }
        if interior.is_empty() {
            return Err(Error::invalid("domain contains no grid nodes".to_string()));
        }
        DomainMask::from_indices(grid, interior)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.membership[idx]
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    /// Nodes of the mask whose grid neighborhood (within `layers` cells in
    /// sup-norm) stays inside the mask.
    pub fn eroded(&self, layers: usize) -> DomainMask {
        if layers == 0 {
            return self.clone();
        }
        let g = &self.grid;
        let m = g.m() as isize;
        let l = layers as isize;
        let mut kept = Vec::new();
        'outer: for &i in &self.interior {
            let mi = g.multi_index(i);
            let mut d = [0isize; 3];
            // walk the sup-norm neighborhood
            let span = 2 * l + 1;
            let count = span.pow(g.n() as u32);
            for c in 0..count {
                let mut rest = c;
                for a in 0..g.n() {
                    d[a] = rest % span - l;
                    rest /= span;
                }
                let mut mj = [0usize; 3];
                let mut ok = true;
                for a in 0..g.n() {
                    let v = mi[a] as isize + d[a];
                    if v < 0 || v >= m {
                        ok = false;
                        break;
                    }
                    mj[a] = v as usize;
                }
                if !ok || !self.membership[g.flat_index(mj)] {
                    continue 'outer;
                }
            }
            kept.push(i);
        }
        let mut membership = vec![false; g.len()];
        for &i in &kept {
            membership[i] = true;
        }
        DomainMask {
            grid: *g,
            interior: kept,
            membership,
            erosion_layers: self.erosion_layers.clone(),
        }
    }

    /// The exhaustion D_1 ⊂ D_2 ⊂ … ⊂ Ω used by the Perron machinery:
    /// erosions by 3, 2, 1 grid layers, then the full interior. Empty levels
    /// are dropped.
    pub fn exhaustion(&self) -> Vec<DomainMask> {
        let mut out = Vec::new();
        for &l in &self.erosion_layers {
            let d = self.eroded(l);
            if !d.is_empty() {
                out.push(d);
            }
        }
        out.push(self.clone());
        // enforce nestedness (erosion is monotone, so this is a no-op check)
        out.dedup_by(|b, a| a.interior == b.interior);
        out
    }

    /// Restore the membership bitmap after deserialization.
    pub fn rebuild_membership(&mut self) {
        let mut membership = vec![false; self.grid.len()];
        for &i in &self.interior {
            membership[i] = true;
        }
        self.membership = membership;
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid::new(1, 2.0, 65).unwrap();
        assert_eq!(g.h(), 4.0 / 64.0);
        assert_eq!(g.len(), 65);
        assert_eq!(g.node(32)[0], 0.0);
        assert_eq!(g.node_at(&[0.0]), Some(32));
        assert_eq!(g.node_at(&[0.03]), None);
        assert!(Grid::new(1, 2.0, 2).is_err());
        let g3 = Grid::new(3, 1.0, 5).unwrap();
        assert_eq!(g3.len(), 125);
        let mi = g3.multi_index(124);
        assert_eq!(mi, [4, 4, 4]);
        assert_eq!(g3.flat_index(mi), 124);
    }

    #[test]
    fn refinement_keeps_nodes() {
        let g = Grid::new(1, 2.0, 5).unwrap();
        let r = g.refined();
        assert_eq!(r.m(), 9);
        for k in 0..5 {
            let x = g.axis_coord(k);
            assert!(r.node_at(&[x]).is_some());
        }
    }

    #[test]
    fn mask_exhaustion_is_nested() {
        let g = Grid::new(1, 2.0, 65).unwrap();
        let mask = DomainMask::from_shape(g, &DomainShape::Ball { radius: 1.0 }).unwrap();
        let levels = mask.exhaustion();
        assert!(!levels.is_empty());
        for w in levels.windows(2) {
            for &i in w[0].interior() {
                assert!(w[1].contains(i), "exhaustion must be nested");
            }
        }
        assert_eq!(levels.last().unwrap().interior(), mask.interior());
    }

    #[test]
    fn punctured_interval_excludes_center() {
        let g = Grid::new(1, 2.0, 65).unwrap();
        let mask =
            DomainMask::from_shape(g, &DomainShape::PuncturedInterval { radius: 1.0 }).unwrap();
        let center = g.node_at(&[0.0]).unwrap();
        assert!(!mask.contains(center));
        let full = DomainMask::from_shape(g, &DomainShape::Ball { radius: 1.0 }).unwrap();
        assert_eq!(full.len(), mask.len() + 1);
    }

    #[test]
    fn interior_nodes_strictly_inside() {
        let g = Grid::new(2, 1.0, 9).unwrap();
        let mask = DomainMask::from_shape(g, &DomainShape::Box { half_width: 2.0 }).unwrap();
        for &i in mask.interior() {
            assert!(g.is_strictly_interior(i));
        }
    }
}
