//! Boolean occupancy / drivable grids and footprint rasterization.

use crate::error::{Error, Result};
use crate::geom::{OrientedRect, Vec2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Row-major boolean grid; row index is `y`, column index is `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl Grid {
    pub fn new(width: usize, height: usize, fill: bool) -> Self {
        Self {
            width,
            height,
            cells: vec![fill; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.cells[iy * self.width + ix]
    }

    /// Out-of-bounds reads return `None`.
    pub fn get_signed(&self, ix: i64, iy: i64) -> Option<bool> {
        if ix < 0 || iy < 0 || ix as usize >= self.width || iy as usize >= self.height {
            None
        } else {
            Some(self.get(ix as usize, iy as usize))
        }
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: bool) {
        self.cells[iy * self.width + ix] = v;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    pub fn clear(&mut self) {
        self.cells.iter_mut().for_each(|c| *c = false);
    }

    /// Run-length encoding: alternating run lengths starting with a `false` run
    /// (which may be zero).
    pub fn to_runs(&self) -> Vec<u32> {
        let mut runs = Vec::new();
        let mut cur = false;
        let mut len = 0u32;
        for &c in &self.cells {
            if c == cur {
                len += 1;
            } else {
                runs.push(len);
                cur = c;
                len = 1;
            }
        }
        runs.push(len);
        runs
    }

    pub fn from_runs(width: usize, height: usize, runs: &[u32]) -> Result<Self> {
        let mut cells = Vec::with_capacity(width * height);
        let mut v = false;
        for &r in runs {
            cells.extend(std::iter::repeat_n(v, r as usize));
            v = !v;
        }
        if cells.len() != width * height {
            return Err(Error::Schema(format!(
                "run lengths cover {} cells, expected {}x{}",
                cells.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    width: usize,
    height: usize,
    runs: Vec<u32>,
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridRepr {
            width: self.width,
            height: self.height,
            runs: self.to_runs(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GridRepr::deserialize(d)?;
        Grid::from_runs(r.width, r.height, &r.runs).map_err(serde::de::Error::custom)
    }
}

/// Placement of a grid in the world plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// World coordinates of the lower-left corner of cell (0, 0).
    pub origin: Vec2,
}

impl GridGeometry {
    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing `p` (possibly outside the grid).
    pub fn cell_of(&self, p: Vec2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.resolution).floor() as i64,
            ((p.y - self.origin.y) / self.resolution).floor() as i64,
        )
    }

    pub fn in_bounds(&self, ix: i64, iy: i64) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    /// Range of cell indices (signed, unclipped) whose centers may fall
    /// within `[lo, hi]`.
    fn index_range(&self, lo: f64, hi: f64, origin: f64) -> (i64, i64) {
        let a = ((lo - origin) / self.resolution - 0.5).floor() as i64;
        let b = ((hi - origin) / self.resolution - 0.5).ceil() as i64;
        (a, b)
    }

    /// Cells (signed indices, including off-grid ones) whose centers lie in
    /// the rectangle.
    pub fn footprint_cells(&self, rect: &OrientedRect) -> Vec<(i64, i64)> {
        let (lo, hi) = rect.bounds();
        let (x0, x1) = self.index_range(lo.x, hi.x, self.origin.x);
        let (y0, y1) = self.index_range(lo.y, hi.y, self.origin.y);
        let mut out = Vec::new();
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                let c = Vec2::new(
                    self.origin.x + (ix as f64 + 0.5) * self.resolution,
                    self.origin.y + (iy as f64 + 0.5) * self.resolution,
                );
                if rect.contains(c) {
                    out.push((ix, iy));
                }
            }
        }
        out
    }

    /// Marks every in-grid cell whose center lies in the rectangle.
    pub fn rasterize_into(&self, grid: &mut Grid, rect: &OrientedRect) {
        for (ix, iy) in self.footprint_cells(rect) {
            if self.in_bounds(ix, iy) {
                grid.set(ix as usize, iy as usize, true);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Footprint, Pose};

    #[test]
    fn rle_round_trip() {
        let mut g = Grid::new(5, 3, false);
        g.set(0, 0, true);
        g.set(4, 2, true);
        g.set(2, 1, true);
        let runs = g.to_runs();
        assert_eq!(runs[0], 0);
        assert_eq!(Grid::from_runs(5, 3, &runs).unwrap(), g);
        assert!(Grid::from_runs(5, 3, &[3]).is_err());
    }

    #[test]
    fn axis_aligned_footprint_cell_count() {
        let geo = GridGeometry {
            width: 16,
            height: 16,
            resolution: 0.5,
            origin: Vec2::ZERO,
        };
        // 2m x 1m rectangle centred between cells covers 4 x 2 centers.
        let r = OrientedRect::new(Pose::new(Vec2::new(4.0, 4.0), 0.0), Footprint::new(2.0, 1.0));
        let cells = geo.footprint_cells(&r);
        assert_eq!(cells.len(), 8);
    }

    #[test]
    fn off_grid_cells_reported_but_not_rasterized() {
        let geo = GridGeometry {
            width: 4,
            height: 4,
            resolution: 1.0,
            origin: Vec2::ZERO,
        };
        let r = OrientedRect::new(Pose::new(Vec2::new(0.0, 2.2), 0.0), Footprint::new(2.0, 1.0));
        let cells = geo.footprint_cells(&r);
        assert!(cells.iter().any(|&(ix, _)| ix < 0));
        let mut g = Grid::new(4, 4, false);
        geo.rasterize_into(&mut g, &r);
        assert_eq!(g.count(), 1);
    }
}
