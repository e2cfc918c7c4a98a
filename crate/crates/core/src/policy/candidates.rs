//! Anchor vocabulary and seeded perturbations.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kinematics::Trajectory;
use crate::rng::{indexed, Stream};
use crate::world::AgentState;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateConfig {
    pub steps: usize,
    pub dt: f64,
    /// Target speed multipliers of the straight anchors.
    pub speed_factors: [f64; 3],
    /// Arc curvatures (1/m), each used to the left and to the right.
    pub curvatures: [f64; 2],
    /// Braking rate of the stop anchor (m/s²).
    pub stop_decel: f64,
    /// Std-dev of the along-track end-point perturbation (m).
    pub sigma_lon: f64,
    /// Std-dev of the cross-track end-point perturbation (m).
    pub sigma_lat: f64,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        Self {
            steps: 6,
            dt: 0.5,
            speed_factors: [0.5, 1.0, 1.5],
            curvatures: [0.025, 0.06],
            stop_decel: 3.0,
            sigma_lon: 1.5,
            sigma_lat: 0.75,
        }
    }
}

/// Number of deterministic anchors.
pub const N_ANCHORS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub anchor: usize,
    /// Seed of the perturbation applied on top of the anchor, if any.
    pub perturbation_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub trajectories: Vec<Trajectory>,
    pub provenance: Vec<Provenance>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

fn ego_speed(ego: &AgentState) -> f64 {
    ego.velocity.dot(Vec2::from_angle(ego.heading)).max(0.0)
}

/// Anchor `i` in the ego frame: distance along track and lateral offset at
/// each waypoint.
fn anchor_local(i: usize, v0: f64, cfg: &CandidateConfig) -> Vec<Vec2> {
    let horizon = cfg.steps as f64 * cfg.dt;
    (0..=cfg.steps)
        .map(|k| {
            let t = k as f64 * cfg.dt;
            match i {
                0..=2 => {
                    // Constant acceleration towards factor * v0 at the horizon.
                    let a = (cfg.speed_factors[i] - 1.0) * v0 / horizon;
                    Vec2::new(v0 * t + 0.5 * a * t * t, 0.0)
                }
                3..=6 => {
                    let kappa = cfg.curvatures[(i - 3) / 2] * if (i - 3) % 2 == 0 { 1.0 } else { -1.0 };
                    let s = v0 * t;
                    let th = kappa * s;
                    if kappa.abs() < 1e-12 {
                        Vec2::new(s, 0.0)
                    } else {
                        Vec2::new(th.sin() / kappa, (1.0 - th.cos()) / kappa)
                    }
                }
                _ => {
                    let b = cfg.stop_decel.max(1e-9);
                    let ts = (v0 / b).min(t);
                    Vec2::new(v0 * ts - 0.5 * b * ts * ts, 0.0)
                }
            }
        })
        .collect()
}

fn to_world(local: &[Vec2], ego: &AgentState) -> Vec<Vec2> {
    local.iter().map(|p| ego.position + p.rotate(ego.heading)).collect()
}

/// Builds `n` candidates: the anchors in order (straight at each speed
/// factor, arcs left/right per curvature, stop), then perturbed copies of
/// the anchors in round-robin until `n` is reached. A perturbation draws a
/// Gaussian end-point offset and spreads it over the plan as `(t/T)²`, which
/// keeps the perturbed motion kinematically smooth.
pub fn generate_candidates(ego: &AgentState, n: usize, seed: u64, cfg: &CandidateConfig) -> Result<CandidateSet> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 candidates, got {n}")));
    }
    if cfg.steps == 0 || !(cfg.dt > 0.0) {
        return Err(Error::Config("candidate horizon and dt must be positive".into()));
    }
    let v0 = ego_speed(ego);
    let anchors: Vec<Vec<Vec2>> = (0..N_ANCHORS).map(|i| anchor_local(i, v0, cfg)).collect();
    let mut trajectories = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    for i in 0..n {
        let a = i % N_ANCHORS;
        let mut local = anchors[a].clone();
        let mut pseed = None;
        if i >= N_ANCHORS {
            let s = i as u64;
            let mut rng = indexed(seed, Stream::Perturbation, s);
            let lon = Normal::new(0.0, cfg.sigma_lon.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
            let lat = Normal::new(0.0, cfg.sigma_lat.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
            let end = Vec2::new(lon.sample(&mut rng), lat.sample(&mut rng));
            for (k, p) in local.iter_mut().enumerate() {
                let r = k as f64 / cfg.steps as f64;
                *p += end * (r * r);
            }
            pseed = Some(s);
        }
        trajectories.push(Trajectory::from_motion(to_world(&local, ego), cfg.dt, ego.heading)?);
        provenance.push(Provenance {
            anchor: a,
            perturbation_seed: pseed,
        });
    }
    Ok(CandidateSet {
        trajectories,
        provenance,
    })
}

/// Constant-velocity extrapolation of the ego state.
pub fn constant_velocity_prior(ego: &AgentState, steps: usize, dt: f64) -> Result<Trajectory> {
    let w = (0..=steps).map(|k| ego.position + ego.velocity * (k as f64 * dt)).collect();
    Trajectory::from_motion(w, dt, ego.heading)
}
