//! Brute-force rasterization oracles for the collision, drivable-area and
//! TTC rewards, plus a generator of random grid instances.
//!
//! The oracles share nothing with the production raster code: every cell of
//! a padded index window is tested against the rectangle's corner polygon
//! with cross products.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wpt::geom::{Footprint, Pose, Vec2};
use wpt::grid::{Grid, GridGeometry};
use wpt::kinematics::Trajectory;
use wpt::world::WorldFrame;

/// Counter-clockwise corners of a `length × width` box centred on `pose`.
pub fn box_corners(pose: Pose, length: f64, width: f64) -> [Vec2; 4] {
    let (s, c) = pose.heading.sin_cos();
    let (hl, hw) = (0.5 * length, 0.5 * width);
    let at = |a: f64, b: f64| Vec2::new(pose.position.x + a * c - b * s, pose.position.y + a * s + b * c);
    [at(hl, -hw), at(hl, hw), at(-hl, hw), at(-hl, -hw)]
}

/// Closed point-in-convex-polygon test; `poly` is counter-clockwise.
pub fn in_polygon(poly: &[Vec2; 4], p: Vec2) -> bool {
    (0..4).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % 4];
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
    })
}

/// Every cell index (on or off the grid) whose center lies in the box.
pub fn covered_cells(geo: &GridGeometry, pose: Pose, length: f64, width: f64) -> Vec<(i64, i64)> {
    let poly = box_corners(pose, length, width);
    let reach = (length.hypot(width) / geo.resolution).ceil() as i64 + 2;
    let (cx, cy) = (
        ((pose.position.x - geo.origin.x) / geo.resolution) as i64,
        ((pose.position.y - geo.origin.y) / geo.resolution) as i64,
    );
    let x_lo = (-reach).min(cx - reach);
    let x_hi = (geo.width as i64 + reach).max(cx + reach);
    let y_lo = (-reach).min(cy - reach);
    let y_hi = (geo.height as i64 + reach).max(cy + reach);
    let mut out = Vec::new();
    for iy in y_lo..=y_hi {
        for ix in x_lo..=x_hi {
            let c = Vec2::new(
                geo.origin.x + (ix as f64 + 0.5) * geo.resolution,
                geo.origin.y + (iy as f64 + 0.5) * geo.resolution,
            );
            if in_polygon(&poly, c) {
                out.push((ix, iy));
            }
        }
    }
    out
}

fn cell(grid: &Grid, geo: &GridGeometry, (ix, iy): (i64, i64)) -> Option<bool> {
    let inside = ix >= 0 && iy >= 0 && (ix as usize) < geo.width && (iy as usize) < geo.height;
    inside.then(|| grid.get(ix as usize, iy as usize))
}

/// 0 if waypoint `k` overlaps an occupied cell of frame `k - 1` for any `k ≥ 1`.
pub fn nc_oracle(traj: &Trajectory, frames: &[WorldFrame], fp: Footprint) -> f64 {
    for k in 1..traj.len() {
        let f = &frames[k - 1];
        let hit = covered_cells(&f.geometry, traj.pose(k), fp.length, fp.width)
            .into_iter()
            .any(|c| cell(&f.instance_occ, &f.geometry, c) == Some(true));
        if hit {
            return 0.0;
        }
    }
    1.0
}

/// 0 if any covered cell at any step is off the grid or not drivable.
pub fn dac_oracle(traj: &Trajectory, frames: &[WorldFrame], fp: Footprint) -> f64 {
    for k in 1..traj.len() {
        let f = &frames[k - 1];
        let ok = covered_cells(&f.geometry, traj.pose(k), fp.length, fp.width)
            .into_iter()
            .all(|c| cell(&f.drivable, &f.geometry, c) == Some(true));
        if !ok {
            return 0.0;
        }
    }
    1.0
}

/// Gated TTC: 0 when DAC fails or a drivable cell of the forward-extended
/// final box is occupied in the last frame.
pub fn ttc_oracle(traj: &Trajectory, frames: &[WorldFrame], fp: Footprint, d_fix: f64) -> f64 {
    if dac_oracle(traj, frames, fp) == 0.0 {
        return 0.0;
    }
    let t = traj.steps();
    let f = &frames[t - 1];
    let end = traj.pose(t);
    let shifted = Pose::new(
        end.position + Vec2::new(end.heading.cos(), end.heading.sin()) * (0.5 * d_fix),
        end.heading,
    );
    let risk = covered_cells(&f.geometry, shifted, fp.length + d_fix, fp.width)
        .into_iter()
        .any(|c| cell(&f.drivable, &f.geometry, c) == Some(true) && cell(&f.instance_occ, &f.geometry, c) == Some(true));
    if risk {
        0.0
    } else {
        1.0
    }
}

/// A random trajectory with its per-step frames.
#[derive(Debug, Clone)]
pub struct Instance {
    pub traj: Trajectory,
    pub frames: Vec<WorldFrame>,
    pub footprint: Footprint,
    pub d_fix: f64,
}

fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> Grid {
    let mut g = Grid::new(w, h, false);
    for iy in 0..h {
        for ix in 0..w {
            if rng.random::<f64>() < density {
                g.set(ix, iy, true);
            }
        }
    }
    g
}

/// Random geometry (at most 64 × 64 cells), random occupancy and drivable
/// grids per step and a random smooth trajectory that may leave the grid.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let w = rng.random_range(4..=64usize);
    let h = rng.random_range(4..=64usize);
    let resolution = [0.25, 0.5, 1.0][rng.random_range(0..3)];
    let geometry = GridGeometry {
        width: w,
        height: h,
        resolution,
        origin: Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)),
    };
    let occ_density = [0.0, 0.002, 0.01, 0.03, 0.1][rng.random_range(0..5)];
    let hole_density = [0.0, 0.001, 0.005, 0.02, 0.1][rng.random_range(0..5)];
    let steps = rng.random_range(1..=8usize);
    let frames: Vec<WorldFrame> = (0..steps)
        .map(|k| {
            let drivable = random_grid(rng, w, h, 1.0 - hole_density);
            let instance_occ = random_grid(rng, w, h, occ_density);
            WorldFrame {
                geometry,
                instance_occ,
                drivable,
                agents: Vec::new(),
                timestamp: k as i64 + 1,
            }
        })
        .collect();
    let extent = Vec2::new(w as f64 * resolution, h as f64 * resolution);
    let mut p = geometry.origin + Vec2::new(rng.random::<f64>() * extent.x, rng.random::<f64>() * extent.y);
    let mut heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let speed = rng.random_range(0.0..6.0);
    let yaw_rate = rng.random_range(-0.6..0.6);
    let dt = 0.5;
    let mut pts = vec![p];
    for _ in 0..steps {
        heading += yaw_rate * dt;
        p += Vec2::new(heading.cos(), heading.sin()) * (speed * dt);
        pts.push(p);
    }
    let traj = if rng.random::<bool>() {
        Trajectory::new(pts, dt)
    } else {
        let h0 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        Trajectory::from_motion(pts, dt, h0)
    }
    .expect("finite trajectory");
    Instance {
        traj,
        frames,
        footprint: Footprint::new(rng.random_range(1.0..5.0), rng.random_range(0.5..2.5)),
        d_fix: rng.random_range(0.0..5.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_box_covers_expected_centers() {
        let geo = GridGeometry {
            width: 16,
            height: 16,
            resolution: 0.5,
            origin: Vec2::ZERO,
        };
        let cells = covered_cells(&geo, Pose::new(Vec2::new(4.0, 4.0), 0.0), 2.0, 1.0);
        assert_eq!(cells.len(), 8);
        assert!(cells.contains(&(6, 7)) && cells.contains(&(9, 8)));
    }

    #[test]
    fn polygon_is_closed() {
        let poly = box_corners(Pose::new(Vec2::ZERO, 0.0), 2.0, 2.0);
        assert!(in_polygon(&poly, Vec2::new(1.0, 1.0)));
        assert!(!in_polygon(&poly, Vec2::new(1.0 + 1e-9, 0.0)));
    }
}
