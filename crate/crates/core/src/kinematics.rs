//! Trajectories and their kinematic profiles.
//!
//! Derivatives are taken by finite differences on the uniformly sampled
//! waypoints: central stencils in the interior and second-order one-sided
//! stencils at the ends. Velocity and acceleration are both computed directly
//! from positions (so both are exact for quadratic motion and acceleration is
//! exact for cubic motion); jerk is the first difference of acceleration.

use crate::error::{Error, Result};
use crate::geom::{Pose, Vec2};
use serde::{Deserialize, Serialize};

/// Below this speed the heading is carried forward from the last moving step.
const MOVING_EPS: f64 = 1e-6;

/// Uniformly timed sequence of planar waypoints. Waypoint 0 is the pose at
/// `t = 0`; waypoint `k` is the pose at `t = k * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Vec2>,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headings: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Vec2>, dt: f64) -> Result<Self> {
        let t = Self {
            waypoints,
            dt,
            headings: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_headings(waypoints: Vec<Vec2>, dt: f64, headings: Vec<f64>) -> Result<Self> {
        let t = Self {
            waypoints,
            dt,
            headings: Some(headings),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidTrajectory(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.waypoints.len() < 2 {
            return Err(Error::InvalidTrajectory(format!(
                "need at least 2 waypoints, got {}",
                self.waypoints.len()
            )));
        }
        if let Some(h) = &self.headings {
            if h.len() != self.waypoints.len() {
                return Err(Error::InvalidTrajectory(format!(
                    "{} headings for {} waypoints",
                    h.len(),
                    self.waypoints.len()
                )));
            }
        }
        if self.waypoints.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidTrajectory("non-finite waypoint".into()));
        }
        Ok(())
    }

    /// Builds a trajectory whose stored heading at waypoint 0 is `heading0`
    /// and elsewhere follows the central-difference direction of travel
    /// (one-sided at the end), carried forward through standstill.
    pub fn from_motion(waypoints: Vec<Vec2>, dt: f64, heading0: f64) -> Result<Self> {
        let n = waypoints.len();
        let mut h = Vec::with_capacity(n);
        let mut prev = heading0;
        h.push(heading0);
        for k in 1..n {
            let d = if k + 1 < n {
                waypoints[k + 1] - waypoints[k - 1]
            } else {
                waypoints[k] - waypoints[k - 1]
            };
            if d.norm() > 1e-9 {
                prev = d.angle();
            }
            h.push(prev);
        }
        Self::with_headings(waypoints, dt, h)
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Number of steps covered (waypoint count minus one).
    pub fn steps(&self) -> usize {
        self.waypoints.len().saturating_sub(1)
    }

    pub fn duration(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// Heading per waypoint: explicit if stored, else the direction of the
    /// segment leaving each waypoint (the last waypoint reuses the final
    /// segment). Zero-length segments inherit the previous heading; leading
    /// zero-length segments take the first non-degenerate direction.
    pub fn headings(&self) -> Vec<f64> {
        if let Some(h) = &self.headings {
            return h.clone();
        }
        let n = self.waypoints.len();
        let mut seg: Vec<Option<f64>> = self
            .waypoints
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                (d.norm() > 1e-12).then(|| d.angle())
            })
            .collect();
        let first = seg.iter().flatten().next().copied().unwrap_or(0.0);
        let mut prev = first;
        for s in seg.iter_mut() {
            match s {
                Some(a) => prev = *a,
                None => *s = Some(prev),
            }
        }
        let mut out: Vec<f64> = seg.into_iter().map(|s| s.unwrap_or(first)).collect();
        let last = out.last().copied().unwrap_or(first);
        out.resize(n, last);
        out
    }

    pub fn pose(&self, k: usize) -> Pose {
        let h = match &self.headings {
            Some(h) => h[k],
            None => self.headings()[k],
        };
        Pose::new(self.waypoints[k], h)
    }

    pub fn poses(&self) -> Vec<Pose> {
        self.headings()
            .into_iter()
            .zip(&self.waypoints)
            .map(|(h, &p)| Pose::new(p, h))
            .collect()
    }

    /// First `steps + 1` waypoints.
    pub fn prefix(&self, steps: usize) -> Result<Trajectory> {
        if steps + 1 > self.len() {
            return Err(Error::OutOfRange {
                requested: steps,
                available: self.steps(),
            });
        }
        let n = steps + 1;
        Ok(Trajectory {
            waypoints: self.waypoints[..n].to_vec(),
            dt: self.dt,
            headings: self.headings.as_ref().map(|h| h[..n].to_vec()),
        })
    }

    /// Flattened `[x0, y0, x1, y1, ...]`.
    pub fn flat(&self) -> Vec<f64> {
        self.waypoints.iter().flat_map(|p| [p.x, p.y]).collect()
    }
}

/// Kinematic series sampled at every waypoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionProfile {
    /// Speed (m/s).
    pub v: Vec<f64>,
    /// Longitudinal acceleration (m/s²).
    pub a_lon: Vec<f64>,
    /// Lateral acceleration, positive to the left (m/s²).
    pub a_lat: Vec<f64>,
    /// Jerk vector magnitude (m/s³).
    pub jerk_mag: Vec<f64>,
    /// Longitudinal jerk (m/s³).
    pub j_lon: Vec<f64>,
}

impl MotionProfile {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

/// First derivative of a uniformly sampled vector series.
fn first_derivative(p: &[Vec2], dt: f64) -> Vec<Vec2> {
    let n = p.len();
    match n {
        0 => vec![],
        1 => vec![Vec2::ZERO],
        2 => {
            let d = (p[1] - p[0]) * (1.0 / dt);
            vec![d, d]
        }
        _ => {
            let inv2 = 1.0 / (2.0 * dt);
            let mut out = Vec::with_capacity(n);
            out.push((p[0] * -3.0 + p[1] * 4.0 - p[2]) * inv2);
            for i in 1..n - 1 {
                out.push((p[i + 1] - p[i - 1]) * inv2);
            }
            out.push((p[n - 1] * 3.0 - p[n - 2] * 4.0 + p[n - 3]) * inv2);
            out
        }
    }
}

/// Second derivative of a uniformly sampled vector series.
fn second_derivative(p: &[Vec2], dt: f64) -> Vec<Vec2> {
    let n = p.len();
    let inv = 1.0 / (dt * dt);
    match n {
        0 => vec![],
        1 | 2 => vec![Vec2::ZERO; n],
        3 => vec![(p[2] - p[1] * 2.0 + p[0]) * inv; 3],
        _ => {
            let mut out = Vec::with_capacity(n);
            out.push((p[0] * 2.0 - p[1] * 5.0 + p[2] * 4.0 - p[3]) * inv);
            for i in 1..n - 1 {
                out.push((p[i + 1] - p[i] * 2.0 + p[i - 1]) * inv);
            }
            out.push((p[n - 1] * 2.0 - p[n - 2] * 5.0 + p[n - 3] * 4.0 - p[n - 4]) * inv);
            out
        }
    }
}

/// Derives speed, longitudinal/lateral acceleration and jerk at every waypoint.
///
/// Accelerations are projected onto the unit heading (longitudinal) and its
/// left normal (lateral). When stored headings are absent the heading is the
/// velocity direction; at (near) standstill the last moving heading is carried
/// forward.
pub fn derive_profile(traj: &Trajectory) -> Result<MotionProfile> {
    traj.validate()?;
    let p = &traj.waypoints;
    let vel = first_derivative(p, traj.dt);
    let acc = second_derivative(p, traj.dt);
    let jerk = first_derivative(&acc, traj.dt);

    let dirs: Vec<Vec2> = match &traj.headings {
        Some(h) => h.iter().map(|&a| Vec2::from_angle(a)).collect(),
        None => {
            let fallback = vel
                .iter()
                .find(|v| v.norm() > MOVING_EPS)
                .map(|v| *v * (1.0 / v.norm()))
                .unwrap_or_else(|| Vec2::from_angle(traj.headings()[0]));
            let mut prev = fallback;
            vel.iter()
                .map(|v| {
                    let s = v.norm();
                    if s > MOVING_EPS {
                        prev = *v * (1.0 / s);
                    }
                    prev
                })
                .collect()
        }
    };

    let n = p.len();
    let mut prof = MotionProfile {
        v: Vec::with_capacity(n),
        a_lon: Vec::with_capacity(n),
        a_lat: Vec::with_capacity(n),
        jerk_mag: Vec::with_capacity(n),
        j_lon: Vec::with_capacity(n),
    };
    for i in 0..n {
        let f = dirs[i];
        let l = f.perp();
        prof.v.push(vel[i].norm());
        prof.a_lon.push(acc[i].dot(f));
        prof.a_lat.push(acc[i].dot(l));
        prof.jerk_mag.push(jerk[i].norm());
        prof.j_lon.push(jerk[i].dot(f));
    }
    Ok(prof)
}

/// Which L2 aggregation a report quotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum L2Mode {
    /// Distance at the horizon waypoint only.
    AtHorizon,
    /// Mean distance over waypoints 1..=horizon.
    #[default]
    AverageToHorizon,
}

/// L2 displacement errors at a set of horizons, in both conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Displacements {
    pub horizons: Vec<f64>,
    pub at_horizon: Vec<f64>,
    pub average_to_horizon: Vec<f64>,
}

impl L2Displacements {
    pub fn select(&self, mode: L2Mode) -> &[f64] {
        match mode {
            L2Mode::AtHorizon => &self.at_horizon,
            L2Mode::AverageToHorizon => &self.average_to_horizon,
        }
    }
}

/// Converts a horizon in seconds to a waypoint index.
pub fn horizon_index(horizon: f64, dt: f64) -> Result<usize> {
    let k = horizon / dt;
    let r = k.round();
    if !(horizon > 0.0) || (k - r).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "horizon {horizon} s is not a positive multiple of dt = {dt} s"
        )));
    }
    Ok(r as usize)
}

pub fn l2_displacements(
    traj: &Trajectory,
    expert: &Trajectory,
    horizons: &[f64],
) -> Result<L2Displacements> {
    if (traj.dt - expert.dt).abs() > 1e-12 {
        return Err(Error::DtMismatch(traj.dt, expert.dt));
    }
    let avail = traj.steps().min(expert.steps());
    let dists: Vec<f64> = traj
        .waypoints
        .iter()
        .zip(&expert.waypoints)
        .map(|(a, b)| (*a - *b).norm())
        .collect();
    let mut out = L2Displacements {
        horizons: horizons.to_vec(),
        at_horizon: Vec::with_capacity(horizons.len()),
        average_to_horizon: Vec::with_capacity(horizons.len()),
    };
    for &h in horizons {
        let k = horizon_index(h, traj.dt)?;
        if k > avail {
            return Err(Error::OutOfRange {
                requested: k,
                available: avail,
            });
        }
        out.at_horizon.push(dists[k]);
        out.average_to_horizon
            .push(dists[1..=k].iter().sum::<f64>() / k as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(speed: f64, dt: f64, n: usize) -> Trajectory {
        let w = (0..n).map(|i| Vec2::new(speed * dt * i as f64, 0.0)).collect();
        Trajectory::new(w, dt).unwrap()
    }

    #[test]
    fn uniform_motion_has_zero_acceleration() {
        let p = derive_profile(&line(5.0, 0.5, 7)).unwrap();
        for i in 0..7 {
            assert!((p.v[i] - 5.0).abs() < 1e-12);
            assert!(p.a_lon[i].abs() < 1e-12);
            assert!(p.a_lat[i].abs() < 1e-12);
            assert!(p.jerk_mag[i].abs() < 1e-12);
        }
    }

    #[test]
    fn constant_acceleration_recovered() {
        let dt = 0.5;
        let w = (0..7)
            .map(|i| {
                let t = dt * i as f64;
                Vec2::new(0.5 * 2.0 * t * t, 0.0)
            })
            .collect();
        let p = derive_profile(&Trajectory::new(w, dt).unwrap()).unwrap();
        for i in 1..6 {
            assert!((p.a_lon[i] - 2.0).abs() < 1e-12, "step {i}: {}", p.a_lon[i]);
        }
        assert!(p.jerk_mag.iter().all(|j| j.abs() < 1e-9));
    }

    #[test]
    fn cubic_jerk_exact() {
        let dt = 0.25;
        let j = 1.5;
        let w = (0..9)
            .map(|i| {
                let t = dt * i as f64;
                Vec2::new(3.0 * t + j * t * t * t / 6.0, 0.0)
            })
            .collect();
        let p = derive_profile(&Trajectory::new(w, dt).unwrap()).unwrap();
        for i in 0..9 {
            assert!((p.j_lon[i] - j).abs() < 1e-9, "step {i}: {}", p.j_lon[i]);
        }
    }

    #[test]
    fn too_short_is_rejected() {
        let t = Trajectory {
            waypoints: vec![Vec2::ZERO],
            dt: 0.5,
            headings: None,
        };
        assert!(matches!(derive_profile(&t), Err(Error::InvalidTrajectory(_))));
        assert!(Trajectory::new(vec![Vec2::ZERO, Vec2::ZERO], 0.0).is_err());
    }

    #[test]
    fn stationary_heading_carried_forward() {
        let w = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let t = Trajectory::new(w, 0.5).unwrap();
        let h = t.headings();
        assert!(h.iter().all(|a| (a - std::f64::consts::FRAC_PI_2).abs() < 1e-12));
        let p = derive_profile(&t).unwrap();
        assert!(p.a_lon.iter().all(|a| a.is_finite()));
    }

    #[test]
    fn l2_shifted_expert() {
        let a = line(4.0, 0.5, 7);
        let mut b = a.clone();
        for w in &mut b.waypoints {
            *w += Vec2::new(0.3, 0.4);
        }
        let r = l2_displacements(&a, &b, &[1.0, 2.0, 3.0]).unwrap();
        for v in r.at_horizon.iter().chain(&r.average_to_horizon) {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_out_of_range_and_bad_horizon() {
        let a = line(4.0, 0.5, 5);
        assert!(matches!(
            l2_displacements(&a, &a, &[3.0]),
            Err(Error::OutOfRange { .. })
        ));
        assert!(l2_displacements(&a, &a, &[0.3]).is_err());
        let b = line(4.0, 0.25, 5);
        assert!(matches!(l2_displacements(&a, &b, &[1.0]), Err(Error::DtMismatch(..))));
    }
}
