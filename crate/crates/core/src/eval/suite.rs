//! Seeded scenario-suite generator with a privileged expert planner.

use crate::error::{Error, Result};
use crate::geom::{Footprint, OrientedRect, Vec2};
use crate::grid::{Grid, GridGeometry};
use crate::kinematics::{derive_profile, Trajectory};
use crate::reward::{comf_reward, first_collision, CollisionMode, ComfortThresholds};
use crate::rng::{indexed, Stream};
use crate::world::{
    rollout_frames, AgentState, Behavior, Command, Goal, Scenario, Stratum, WorldConfig, WorldFrame,
};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const SUITE_SCHEMA_VERSION: u32 = 1;

/// Road layout (m): the ego road spans `y ∈ [ROAD_LO, ROAD_HI]`, the ego lane
/// is centred on `EGO_LANE_Y` and the left lane on `LEFT_LANE_Y`.
const ROAD_LO: f64 = 11.0;
const ROAD_HI: f64 = 19.0;
const EGO_LANE_Y: f64 = 13.0;
const LEFT_LANE_Y: f64 = 17.0;
const VEHICLE: Footprint = Footprint::new(4.0, 1.8);
const MAX_ATTEMPTS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub count: usize,
    /// Relative weights of the strata, in `Stratum::ALL` order.
    pub strata_weights: [f64; 5],
    pub grid_width: usize,
    pub grid_height: usize,
    pub resolution: f64,
    pub dt: f64,
    pub history: usize,
    /// Planning horizon T in steps.
    pub horizon: usize,
    /// Closed-loop step budget; experts cover `budget + horizon` steps.
    pub step_budget: usize,
    pub ego_footprint: Footprint,
    pub ego_speed: (f64, f64),
    /// Upper bound on the goal distance (m).
    pub goal_distance: f64,
    /// Expert safety margin added to the ego length and width (m).
    pub expert_margin: (f64, f64),
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            count: 200,
            strata_weights: [1.0; 5],
            grid_width: 64,
            grid_height: 64,
            resolution: 0.5,
            dt: 0.5,
            history: 2,
            horizon: 6,
            step_budget: 12,
            ego_footprint: VEHICLE,
            ego_speed: (3.0, 5.0),
            goal_distance: 10.0,
            expert_margin: (1.0, 0.4),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("suite count must be > 0".into()));
        }
        if self.strata_weights.iter().any(|w| !(*w >= 0.0)) || self.strata_weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("strata weights must be non-negative with a positive sum".into()));
        }
        if self.grid_width == 0 || self.grid_height == 0 || !(self.resolution > 0.0) || !(self.dt > 0.0) {
            return Err(Error::Config("grid and dt must be positive".into()));
        }
        if self.horizon == 0 || self.step_budget == 0 {
            return Err(Error::Config("horizon and step budget must be positive".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry {
            width: self.grid_width,
            height: self.grid_height,
            resolution: self.resolution,
            origin: Vec2::ZERO,
        }
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            dt: self.dt,
            history: self.history,
            ..WorldConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub schema_version: u32,
    pub seed: u64,
    /// Hash of the run configuration that produced the suite, if any.
    #[serde(default)]
    pub config_hash: String,
    pub config: SuiteConfig,
    pub scenarios: Vec<Scenario>,
}

impl Suite {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        match v.get("schema_version").and_then(|x| x.as_u64()) {
            Some(x) if x == SUITE_SCHEMA_VERSION as u64 => {}
            other => {
                return Err(Error::Schema(format!(
                    "suite schema version {other:?}, expected {SUITE_SCHEMA_VERSION}"
                )))
            }
        }
        let suite: Suite = serde_json::from_value(v).map_err(|e| Error::Schema(e.to_string()))?;
        for s in &suite.scenarios {
            s.validate()?;
        }
        Ok(suite)
    }

    /// Scenarios used for training (even positions).
    pub fn train_half(&self) -> Vec<&Scenario> {
        self.scenarios.iter().step_by(2).collect()
    }

    /// Held-out scenarios (odd positions).
    pub fn test_half(&self) -> Vec<&Scenario> {
        self.scenarios.iter().skip(1).step_by(2).collect()
    }
}

/// Per-stratum counts by largest remainder (ties to the earlier stratum).
pub fn strata_counts(count: usize, weights: &[f64; 5]) -> [usize; 5] {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / total * count as f64).collect();
    let mut out = [0usize; 5];
    for i in 0..5 {
        out[i] = exact[i].floor() as usize;
    }
    let mut rem: Vec<(usize, f64)> = exact.iter().enumerate().map(|(i, e)| (i, e - e.floor())).collect();
    rem.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut left = count - out.iter().sum::<usize>();
    for (i, _) in rem {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Interleaves the strata round-robin so that every contiguous or
/// alternating slice of the suite stays mixed.
fn strata_sequence(counts: &[usize; 5]) -> Vec<Stratum> {
    let mut left = *counts;
    let mut seq = Vec::with_capacity(counts.iter().sum());
    while left.iter().any(|&c| c > 0) {
        for (i, s) in Stratum::ALL.iter().enumerate() {
            if left[i] > 0 {
                seq.push(*s);
                left[i] -= 1;
            }
        }
    }
    seq
}

pub fn generate_suite(cfg: &SuiteConfig, seed: u64) -> Result<Suite> {
    cfg.validate()?;
    let seq = strata_sequence(&strata_counts(cfg.count, &cfg.strata_weights));
    let scenarios = seq
        .par_iter()
        .enumerate()
        .map(|(i, &stratum)| {
            let s = indexed(seed, Stream::Scenario, i as u64).next_u64();
            generate_scenario(cfg, i as u64, stratum, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Suite {
        schema_version: SUITE_SCHEMA_VERSION,
        seed,
        config_hash: String::new(),
        config: *cfg,
        scenarios,
    })
}

/// Drivable region description.
#[derive(Debug, Clone, Copy)]
enum Layout {
    Straight,
    /// Vertical crossing road spanning `x ∈ [x_lo, x_hi]`.
    Crossing { x_lo: f64, x_hi: f64 },
    /// Beyond `x_start` only `y ∈ [lo, hi]` is drivable.
    Corridor { x_start: f64, lo: f64, hi: f64 },
}

fn drivable_grid(geo: &GridGeometry, layout: Layout) -> Grid {
    let mut g = Grid::new(geo.width, geo.height, false);
    for iy in 0..geo.height {
        for ix in 0..geo.width {
            let c = geo.cell_center(ix, iy);
            let road = (ROAD_LO..=ROAD_HI).contains(&c.y);
            let ok = match layout {
                Layout::Straight => road,
                Layout::Crossing { x_lo, x_hi } => road || (x_lo..=x_hi).contains(&c.x),
                Layout::Corridor { x_start, lo, hi } => {
                    if c.x < x_start {
                        road
                    } else {
                        (lo..=hi).contains(&c.y)
                    }
                }
            };
            g.set(ix, iy, ok);
        }
    }
    g
}

fn vehicle(position: Vec2, velocity: Vec2, heading: f64, behavior: Behavior) -> AgentState {
    AgentState {
        position,
        velocity,
        footprint: VEHICLE,
        heading,
        behavior,
    }
}

/// Scripted positions for timestamps `0..=n` of an agent moving along +x
/// that cruises at `v`, then from `t_brake` brakes at `b` down to `v_end`.
fn braking_script(start: Vec2, v: f64, t_brake: f64, b: f64, v_end: f64, n: usize, dt: f64) -> Vec<Vec2> {
    let sub = 20;
    let h = dt / sub as f64;
    let mut out = vec![start];
    let (mut x, mut speed) = (0.0, v);
    for k in 0..n {
        for j in 0..sub {
            let t = k as f64 * dt + j as f64 * h;
            let next = if t >= t_brake { (speed - b * h).max(v_end) } else { speed };
            x += 0.5 * (speed + next) * h;
            speed = next;
        }
        out.push(start + Vec2::new(x, 0.0));
    }
    out
}

/// One member of the privileged planner's motion family.
#[derive(Debug, Clone, Copy)]
struct ExpertSpec {
    /// Intermediate target speed.
    v1: f64,
    /// Braking rate used to reach `v1` (m/s²).
    decel: f64,
    /// Time at which the expert returns to its initial speed.
    t_resume: f64,
    /// Final lateral offset (m, positive left).
    delta: f64,
    t_lat: f64,
    tau_lat: f64,
}

const ACCEL: f64 = 1.0;

fn expert_motion(start: Vec2, v0: f64, spec: &ExpertSpec, steps: usize, dt: f64) -> (Vec<Vec2>, Vec<f64>) {
    let sub = 20;
    let h = dt / sub as f64;
    let lat = |t: f64| {
        let u = (t - spec.t_lat) / spec.tau_lat;
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            spec.delta
        } else {
            spec.delta * 0.5 * (1.0 - (std::f64::consts::PI * u).cos())
        }
    };
    let mut pts = vec![start];
    let mut speeds = vec![v0];
    let (mut x, mut v) = (0.0, v0);
    for k in 0..steps {
        for j in 0..sub {
            let t = k as f64 * dt + j as f64 * h;
            let target = if t < spec.t_resume { spec.v1 } else { v0 };
            let rate = if target < v { spec.decel } else { ACCEL };
            let next = v + (target - v).clamp(-rate * h, rate * h);
            x += 0.5 * (v + next) * h;
            v = next;
        }
        let t = (k + 1) as f64 * dt;
        pts.push(start + Vec2::new(x, lat(t)));
        speeds.push(v);
    }
    (pts, speeds)
}

fn expert_family(v0: f64, delta_des: f64) -> Vec<ExpertSpec> {
    let mut deltas = vec![0.0];
    for d in [delta_des, LEFT_LANE_Y - EGO_LANE_Y] {
        if !deltas.iter().any(|x: &f64| (x - d).abs() < 1e-9) {
            deltas.push(d);
        }
    }
    let mut out = Vec::new();
    for &f in &[1.0, 0.75, 0.5, 0.25, 0.0, 1.2] {
        for &t_resume in &[f64::INFINITY, 1.0, 2.0, 3.0, 4.0] {
            if f == 1.0 && t_resume.is_finite() {
                continue;
            }
            for &decel in &[2.0, 3.5] {
                if f >= 1.0 && decel != 2.0 {
                    continue;
                }
                for &delta in &deltas {
                    let lat_opts: &[(f64, f64)] = if delta == 0.0 {
                        &[(0.0, 1.0)]
                    } else {
                        &[(0.0, 2.0), (0.0, 3.0), (1.0, 2.0), (1.0, 3.0)]
                    };
                    for &(t_lat, tau_lat) in lat_opts {
                        out.push(ExpertSpec {
                            v1: f * v0,
                            decel,
                            t_resume,
                            delta,
                            t_lat,
                            tau_lat,
                        });
                    }
                }
            }
        }
    }
    out
}

struct Draft {
    stratum: Stratum,
    layout: Layout,
    agents: Vec<AgentState>,
    ego: AgentState,
    command: Command,
    delta_des: f64,
}

fn draft(cfg: &SuiteConfig, stratum: Stratum, rng: &mut ChaCha8Rng, n_script: usize) -> Draft {
    let x0 = rng.random_range(2.5..4.5);
    let v0 = rng.random_range(cfg.ego_speed.0..cfg.ego_speed.1);
    let ego = AgentState {
        position: Vec2::new(x0, EGO_LANE_Y),
        velocity: Vec2::new(v0, 0.0),
        footprint: cfg.ego_footprint,
        heading: 0.0,
        behavior: Behavior::ConstantVelocity,
    };
    let dt = cfg.dt;
    let mut layout = Layout::Straight;
    let mut command = Command::Keep;
    let mut delta_des = 0.0;
    let mut agents = Vec::new();
    match stratum {
        Stratum::FreeRoad => {
            if rng.random_bool(0.6) {
                let x = rng.random_range(0.0..28.0);
                if rng.random_bool(0.5) {
                    let v = rng.random_range(2.0..6.0);
                    agents.push(vehicle(Vec2::new(x, LEFT_LANE_Y), Vec2::new(v, 0.0), 0.0, Behavior::ConstantVelocity));
                } else {
                    let v = rng.random_range(2.0..5.0);
                    agents.push(vehicle(
                        Vec2::new(x + 10.0, LEFT_LANE_Y),
                        Vec2::new(-v, 0.0),
                        std::f64::consts::PI,
                        Behavior::ConstantVelocity,
                    ));
                }
            }
        }
        Stratum::LeadBraking => {
            let gap = rng.random_range(7.0..11.0);
            let v = (v0 + rng.random_range(-0.5..0.5)).max(1.0);
            let t_brake = dt * rng.random_range(0..3) as f64;
            let b = rng.random_range(2.0..3.5);
            let v_end = v * rng.random_range(0.2..0.5);
            let start = Vec2::new(x0 + gap, EGO_LANE_Y);
            let script = braking_script(start, v, t_brake, b, v_end, n_script, dt);
            agents.push(vehicle(start, Vec2::new(v, 0.0), 0.0, Behavior::ScriptedWaypoints { waypoints: script }));
        }
        Stratum::Crossing | Stratum::YieldMerge => {
            let reactive = stratum == Stratum::YieldMerge;
            if reactive && rng.random_bool(0.5) {
                // Slower vehicle in the left lane that cuts in once the ego
                // draws alongside.
                let d = rng.random_range(3.0..7.0);
                let v = v0 * rng.random_range(0.5..0.8);
                agents.push(vehicle(
                    Vec2::new(x0 + d, LEFT_LANE_Y),
                    Vec2::new(v, 0.0),
                    0.0,
                    Behavior::EgoReactiveCutIn {
                        window: 3.0,
                        lateral_speed: 2.0,
                        lateral_shift: EGO_LANE_Y - LEFT_LANE_Y,
                        active: false,
                        shifted: 0.0,
                    },
                ));
            } else {
                let t_c = rng.random_range(1.5..2.5);
                let x_c = x0 + v0 * t_c;
                layout = Layout::Crossing {
                    x_lo: x_c - 3.0,
                    x_hi: x_c + 3.0,
                };
                let u = rng.random_range(2.5..4.0);
                let t_a = t_c + rng.random_range(-0.75..0.75);
                let from_below = reactive || rng.random_bool(0.5);
                let (y, dir) = if from_below {
                    (EGO_LANE_Y - u * t_a, 1.0)
                } else {
                    (EGO_LANE_Y + u * t_a, -1.0)
                };
                let behavior = if reactive {
                    Behavior::EgoReactiveYield { gap: 8.0, decel: 3.0 }
                } else {
                    Behavior::ConstantVelocity
                };
                agents.push(vehicle(
                    Vec2::new(x_c + rng.random_range(-1.0..1.0), y),
                    Vec2::new(0.0, dir * u),
                    dir * std::f64::consts::FRAC_PI_2,
                    behavior,
                ));
            }
        }
        Stratum::NarrowCorridor => {
            let shifts = [0.0, 2.0, -2.0, 4.0];
            delta_des = shifts[rng.random_range(0..shifts.len())];
            let c = EGO_LANE_Y + delta_des;
            layout = Layout::Corridor {
                x_start: x0 + rng.random_range(8.0..12.0),
                lo: c - 1.6,
                hi: c + 1.6,
            };
            command = if delta_des > 0.0 {
                Command::TurnLeft
            } else if delta_des < 0.0 {
                Command::TurnRight
            } else {
                Command::Keep
            };
        }
    }
    Draft {
        stratum,
        layout,
        agents,
        ego,
        command,
        delta_des,
    }
}

/// History frames at timestamps `-h..=0`, back-extrapolating every agent at
/// its current velocity.
fn history_frames(geo: &GridGeometry, drivable: &Grid, agents: &[AgentState], h: usize, dt: f64) -> Result<Vec<WorldFrame>> {
    (0..=h)
        .map(|j| {
            let back = (h - j) as f64 * dt;
            let past: Vec<AgentState> = agents
                .iter()
                .map(|a| AgentState {
                    position: a.position - a.velocity * back,
                    ..a.clone()
                })
                .collect();
            WorldFrame::new(*geo, drivable.clone(), past, -((h - j) as i64))
        })
        .collect()
}

/// Drivable check that stops at the far end of the map (+x edge).
fn expert_dac(traj: &Trajectory, geo: &GridGeometry, drivable: &Grid, fp: Footprint) -> bool {
    let poses = traj.poses();
    for p in poses.iter().skip(1) {
        let cells = geo.footprint_cells(&OrientedRect::new(*p, fp));
        if cells.iter().any(|&(ix, _)| ix >= geo.width as i64) {
            return true;
        }
        if !cells.iter().all(|&(ix, iy)| drivable.get_signed(ix, iy) == Some(true)) {
            return false;
        }
    }
    true
}

struct ExpertPlan {
    traj: Trajectory,
    goal_distance: f64,
}

fn plan_expert(cfg: &SuiteConfig, d: &Draft, frames: &[WorldFrame], wcfg: &WorldConfig) -> Result<Option<ExpertPlan>> {
    let steps = cfg.step_budget + cfg.horizon;
    let v0 = d.ego.speed();
    let start = d.ego.position;
    let geo = frames[0].geometry;
    let drivable = &frames[0].drivable;
    let th = ComfortThresholds::default();
    let margin = Footprint::new(
        cfg.ego_footprint.length + cfg.expert_margin.0,
        cfg.ego_footprint.width + cfg.expert_margin.1,
    );
    let mut fam: Vec<(f64, usize, ExpertSpec, Vec<Vec2>)> = expert_family(v0, d.delta_des)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let (pts, speeds) = expert_motion(start, v0, &s, steps, cfg.dt);
            let cost = speeds.iter().map(|v| (v - v0).powi(2) * cfg.dt).sum::<f64>()
                + 10.0 * (s.delta - d.delta_des).abs()
                + 0.2 * s.tau_lat * (s.delta != 0.0) as u8 as f64
                + 0.1 * s.t_lat;
            (cost, i, s, pts)
        })
        .collect();
    fam.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let static_future = if frames.last().map(|f| f.has_reactive_agents()).unwrap_or(false) {
        None
    } else {
        let cv = Trajectory::new((0..=steps).map(|k| start + Vec2::new(k as f64, 0.0)).collect(), cfg.dt)?;
        Some(rollout_frames(frames, d.command, cfg.ego_footprint, &cv, steps, wcfg)?)
    };
    for (_, _, _, pts) in fam {
        let traj = Trajectory::from_motion(pts, cfg.dt, d.ego.heading)?;
        if comf_reward(&derive_profile(&traj)?, &th) != 1.0 {
            continue;
        }
        if !expert_dac(&traj, &geo, drivable, cfg.ego_footprint) {
            continue;
        }
        let own;
        let future = match &static_future {
            Some(f) => f,
            None => {
                own = rollout_frames(frames, d.command, cfg.ego_footprint, &traj, steps, wcfg)?;
                &own
            }
        };
        if first_collision(&traj, future, margin, CollisionMode::Footprint)?.is_some() {
            continue;
        }
        let goal = Goal {
            start,
            direction: d.ego.heading,
            distance: 0.0,
        };
        let at_budget = goal.progress(traj.waypoints[cfg.step_budget]);
        let goal_distance = cfg.goal_distance.min(0.9 * at_budget);
        if goal_distance < 2.0 {
            continue;
        }
        let Some(g) = (1..=cfg.step_budget).find(|&k| goal.progress(traj.waypoints[k]) >= goal_distance) else {
            continue;
        };
        if comf_reward(&derive_profile(&traj.prefix(g)?)?, &th) != 1.0 {
            continue;
        }
        return Ok(Some(ExpertPlan { traj, goal_distance }));
    }
    Ok(None)
}

/// Builds one scenario; resamples parameters until the privileged planner
/// finds a safe, comfortable expert. Falls back to the empty road.
pub fn generate_scenario(cfg: &SuiteConfig, id: u64, stratum: Stratum, seed: u64) -> Result<Scenario> {
    let geo = cfg.geometry();
    let wcfg = cfg.world_config();
    let mut rng = indexed(seed, Stream::Scenario, 0);
    let n_script = cfg.step_budget + cfg.horizon + 4;
    for attempt in 0..=MAX_ATTEMPTS {
        let mut d = draft(cfg, stratum, &mut rng, n_script);
        if attempt == MAX_ATTEMPTS {
            d.agents.clear();
            d.layout = Layout::Straight;
            d.delta_des = 0.0;
            d.command = Command::Keep;
        }
        let drivable = drivable_grid(&geo, d.layout);
        let frames = history_frames(&geo, &drivable, &d.agents, cfg.history, cfg.dt)?;
        let ego_cells = geo.footprint_cells(&d.ego.rect());
        let cur = frames.last().expect("history is non-empty");
        if ego_cells.iter().any(|&(ix, iy)| cur.instance_occ.get_signed(ix, iy) == Some(true)) {
            continue;
        }
        if let Some(plan) = plan_expert(cfg, &d, &frames, &wcfg)? {
            let s = Scenario {
                id,
                stratum: d.stratum,
                seed,
                initial_frames: frames,
                ego_init: d.ego.clone(),
                expert: plan.traj,
                command: d.command,
                goal: Goal {
                    start: d.ego.position,
                    direction: d.ego.heading,
                    distance: plan.goal_distance,
                },
            };
            s.validate()?;
            return Ok(s);
        }
    }
    Err(Error::Domain(format!("scenario {id}: no feasible expert even on the empty road")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_remainder_counts() {
        assert_eq!(strata_counts(200, &[1.0; 5]), [40; 5]);
        assert_eq!(strata_counts(7, &[1.0; 5]), [2, 2, 1, 1, 1]);
        assert_eq!(strata_counts(10, &[2.0, 1.0, 1.0, 0.0, 1.0]), [4, 2, 2, 0, 2]);
    }

    #[test]
    fn sequence_is_interleaved() {
        let s = strata_sequence(&[2, 1, 0, 0, 1]);
        assert_eq!(
            s,
            vec![Stratum::FreeRoad, Stratum::LeadBraking, Stratum::NarrowCorridor, Stratum::FreeRoad]
        );
    }

    #[test]
    fn braking_script_reaches_end_speed() {
        let s = braking_script(Vec2::ZERO, 4.0, 0.0, 2.0, 1.0, 8, 0.5);
        let v_last = (s[8].x - s[7].x) / 0.5;
        assert!((v_last - 1.0).abs() < 1e-9);
        // 1.5 s of braking from 4 to 1 m/s covers 3.75 m, then 1 m/s.
        assert!((s[4].x - (3.75 + 0.5)).abs() < 1e-9);
    }
}
