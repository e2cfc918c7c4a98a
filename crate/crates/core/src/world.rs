//! Scripted micro world model.
//!
//! The model is exposed through three stages: an observation encoder that
//! turns grid frames into embeddings, a sliding-window history aggregator, and
//! a decoder that produces the next frame given an action condition. Chaining
//! the three autoregressively yields an action-conditioned rollout.

use crate::error::{Error, Result};
use crate::geom::{Footprint, OrientedRect, Pose, Vec2};
use crate::grid::{Grid, GridGeometry};
use crate::kinematics::Trajectory;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Per-agent motion model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Behavior {
    ConstantVelocity,
    /// `waypoints[k]` is the position at timestamp `k`; past the end of the
    /// list the agent continues at its last velocity.
    ScriptedWaypoints { waypoints: Vec<Vec2> },
    /// Decelerates at `decel` while the ego is ahead-within `gap` meters of
    /// it, measured along the ego heading. Otherwise holds its speed.
    EgoReactiveYield { gap: f64, decel: f64 },
    /// Once the ego is within `window` meters longitudinally (along the agent
    /// heading), shifts sideways by `lateral_shift` (positive = left) at
    /// `lateral_speed`.
    EgoReactiveCutIn {
        window: f64,
        lateral_speed: f64,
        lateral_shift: f64,
        #[serde(default)]
        active: bool,
        #[serde(default)]
        shifted: f64,
    },
}

impl Behavior {
    pub fn is_reactive(&self) -> bool {
        matches!(
            self,
            Behavior::EgoReactiveYield { .. } | Behavior::EgoReactiveCutIn { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub footprint: Footprint,
    pub heading: f64,
    pub behavior: Behavior,
}

impl AgentState {
    pub fn rect(&self) -> OrientedRect {
        OrientedRect::new(Pose::new(self.position, self.heading), self.footprint)
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.position, self.heading)
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.footprint.length > 0.0 && self.footprint.width > 0.0) {
            return Err(Error::Domain("agent footprint must be positive".into()));
        }
        Ok(())
    }

    /// Advances one step from timestamp `t` to `t + 1`.
    fn step(&self, t: i64, dt: f64, ego: Pose) -> AgentState {
        let mut next = self.clone();
        match &mut next.behavior {
            Behavior::ConstantVelocity => {
                next.position = self.position + self.velocity * dt;
            }
            Behavior::ScriptedWaypoints { waypoints } => {
                let k = t + 1;
                if k >= 1 && (k as usize) < waypoints.len() {
                    let p = waypoints[k as usize];
                    let prev = waypoints[k as usize - 1];
                    next.velocity = (p - prev) * (1.0 / dt);
                    next.position = p;
                } else {
                    next.position = self.position + self.velocity * dt;
                }
                if next.velocity.norm() > 1e-9 {
                    next.heading = next.velocity.angle();
                }
            }
            Behavior::EgoReactiveYield { gap, decel } => {
                let ahead = (self.position - ego.position).dot(Vec2::from_angle(ego.heading));
                let speed = self.speed();
                let mut new_speed = speed;
                if ahead >= 0.0 && ahead <= *gap {
                    new_speed = (speed - *decel * dt).max(0.0);
                }
                let dir = Vec2::from_angle(self.heading);
                next.velocity = dir * new_speed;
                next.position = self.position + next.velocity * dt;
            }
            Behavior::EgoReactiveCutIn {
                window,
                lateral_speed,
                lateral_shift,
                active,
                shifted,
            } => {
                let fwd = Vec2::from_angle(self.heading);
                if !*active {
                    let lon = (ego.position - self.position).dot(fwd);
                    if lon.abs() <= *window {
                        *active = true;
                    }
                }
                let mut lateral = 0.0;
                if *active {
                    let remaining = *lateral_shift - *shifted;
                    let stepmax = *lateral_speed * dt;
                    lateral = remaining.clamp(-stepmax, stepmax);
                    *shifted += lateral;
                }
                // Longitudinal motion at constant speed along the heading.
                let lon_speed = self.velocity.dot(fwd);
                next.velocity = fwd * lon_speed;
                next.position = self.position + fwd * (lon_speed * dt) + fwd.perp() * lateral;
            }
        }
        next
    }
}

/// One timestep of world state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldFrame {
    pub geometry: GridGeometry,
    pub instance_occ: Grid,
    pub drivable: Grid,
    pub agents: Vec<AgentState>,
    pub timestamp: i64,
}

impl WorldFrame {
    /// Builds a frame, rasterizing agent footprints into the occupancy grid.
    pub fn new(
        geometry: GridGeometry,
        drivable: Grid,
        agents: Vec<AgentState>,
        timestamp: i64,
    ) -> Result<Self> {
        if drivable.dims() != (geometry.width, geometry.height) {
            return Err(Error::Shape(format!(
                "drivable grid {:?} does not match geometry {}x{}",
                drivable.dims(),
                geometry.width,
                geometry.height
            )));
        }
        for a in &agents {
            a.validate()?;
        }
        let instance_occ = Self::rasterize_agents(&geometry, &agents);
        Ok(Self {
            geometry,
            instance_occ,
            drivable,
            agents,
            timestamp,
        })
    }

    pub fn rasterize_agents(geometry: &GridGeometry, agents: &[AgentState]) -> Grid {
        let mut g = Grid::new(geometry.width, geometry.height, false);
        for a in agents {
            geometry.rasterize_into(&mut g, &a.rect());
        }
        g
    }

    pub fn dims(&self) -> (usize, usize) {
        self.instance_occ.dims()
    }

    /// Whether the stored occupancy equals a fresh rasterization of the agents.
    pub fn is_consistent(&self) -> bool {
        self.instance_occ == Self::rasterize_agents(&self.geometry, &self.agents)
            && self.instance_occ.dims() == self.drivable.dims()
    }

    pub fn has_reactive_agents(&self) -> bool {
        self.agents.iter().any(|a| a.behavior.is_reactive())
    }
}

/// Low-dimensional summary layout (see [`WorldEmbedding::summary`]).
pub const SUMMARY_DIM: usize = 6;

/// Encoded observation: the frame itself plus a fixed-size summary vector
/// `[density NE, NW, SW, SE, nearest obstacle ahead (m), drivable fraction]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldEmbedding {
    pub frame: WorldFrame,
    pub summary: [f64; SUMMARY_DIM],
}

/// Sliding window over the most recent embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedState {
    window: VecDeque<WorldEmbedding>,
    capacity: usize,
}

impl AggregatedState {
    pub fn embeddings(&self) -> impl Iterator<Item = &WorldEmbedding> {
        self.window.iter()
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn latest(&self) -> &WorldEmbedding {
        self.window.back().expect("aggregated state is never empty")
    }

    pub fn push(&mut self, e: WorldEmbedding) {
        self.window.push_back(e);
        while self.window.len() > self.capacity {
            self.window.pop_front();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Keep,
    TurnLeft,
    TurnRight,
    Stop,
}

impl Command {
    pub const ALL: [Command; 4] = [Command::Keep, Command::TurnLeft, Command::TurnRight, Command::Stop];

    pub fn one_hot(self) -> [f64; 4] {
        let mut v = [0.0; 4];
        v[Command::ALL.iter().position(|&c| c == self).unwrap()] = 1.0;
        v
    }
}

/// Conditioning passed to the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionCondition {
    pub command: Command,
    /// Ego positions so far, oldest first; never empty.
    pub history: Vec<Vec2>,
    pub ego_state: AgentState,
}

impl ActionCondition {
    pub fn ego_pose(&self) -> Pose {
        self.ego_state.pose()
    }
}

/// Which strata a scenario belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Stratum {
    FreeRoad,
    LeadBraking,
    Crossing,
    YieldMerge,
    NarrowCorridor,
}

impl Stratum {
    pub const ALL: [Stratum; 5] = [
        Stratum::FreeRoad,
        Stratum::LeadBraking,
        Stratum::Crossing,
        Stratum::YieldMerge,
        Stratum::NarrowCorridor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stratum::FreeRoad => "free-road",
            Stratum::LeadBraking => "lead-braking",
            Stratum::Crossing => "crossing",
            Stratum::YieldMerge => "yield-merge",
            Stratum::NarrowCorridor => "narrow-corridor",
        }
    }
}

/// Goal region for closed-loop episodes: reached once the ego's progress
/// along `direction` from `start` exceeds `distance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub start: Vec2,
    pub direction: f64,
    pub distance: f64,
}

impl Goal {
    pub fn progress(&self, p: Vec2) -> f64 {
        (p - self.start).dot(Vec2::from_angle(self.direction))
    }

    pub fn reached(&self, p: Vec2) -> bool {
        self.progress(p) >= self.distance
    }
}

/// A driving scenario: history frames (oldest first, the last one is the
/// current frame at timestamp 0), ego state, expert plan and command. Agent
/// scripts travel with the agents inside the frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u64,
    pub stratum: Stratum,
    pub seed: u64,
    pub initial_frames: Vec<WorldFrame>,
    pub ego_init: AgentState,
    pub expert: Trajectory,
    pub command: Command,
    pub goal: Goal,
}

impl Scenario {
    pub fn current_frame(&self) -> &WorldFrame {
        self.initial_frames.last().expect("validated scenario")
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_frames.is_empty() {
            return Err(Error::Empty("scenario initial frames"));
        }
        self.expert.validate()?;
        if (self.expert.waypoints[0] - self.ego_init.position).norm() > 1e-9 {
            return Err(Error::Domain("expert must start at the ego position".into()));
        }
        self.ego_init.validate()
    }

    pub fn ego_footprint(&self) -> Footprint {
        self.ego_init.footprint
    }

    pub fn has_reactive_agents(&self) -> bool {
        self.current_frame().has_reactive_agents()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    /// Seconds per step.
    pub dt: f64,
    /// History window `h` (the aggregator keeps `h + 1` embeddings).
    pub history: usize,
    /// Cap on clearance-style distances (m).
    pub clearance_cap: f64,
    /// Half-width of the corridor used for the "nearest obstacle ahead"
    /// summary entry (m).
    pub ahead_half_width: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            dt: 0.5,
            history: 2,
            clearance_cap: 10.0,
            ahead_half_width: 1.5,
        }
    }
}

/// Encodes one frame.
pub fn encode_observation(frame: &WorldFrame, ego: Option<Pose>, cfg: &WorldConfig) -> WorldEmbedding {
    let (w, h) = frame.dims();
    let (hw, hh) = (w / 2, h / 2);
    let mut counts = [0usize; 4];
    for (ix, iy) in frame.instance_occ.iter_set() {
        let east = ix >= hw;
        let north = iy >= hh;
        let q = match (east, north) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        };
        counts[q] += 1;
    }
    let sizes = [
        (w - hw) * (h - hh),
        hw * (h - hh),
        hw * hh,
        (w - hw) * hh,
    ];
    let mut summary = [0.0; SUMMARY_DIM];
    for q in 0..4 {
        summary[q] = if sizes[q] > 0 {
            counts[q] as f64 / sizes[q] as f64
        } else {
            0.0
        };
    }
    summary[4] = match ego {
        Some(pose) => nearest_ahead(frame, pose, cfg),
        None => cfg.clearance_cap,
    };
    summary[5] = if w * h > 0 {
        frame.drivable.count() as f64 / (w * h) as f64
    } else {
        0.0
    };
    WorldEmbedding {
        frame: frame.clone(),
        summary,
    }
}

/// Longitudinal distance to the nearest occupied cell centre in a corridor
/// ahead of `pose`, capped.
pub fn nearest_ahead(frame: &WorldFrame, pose: Pose, cfg: &WorldConfig) -> f64 {
    let f = Vec2::from_angle(pose.heading);
    let l = f.perp();
    let mut best = cfg.clearance_cap;
    for (ix, iy) in frame.instance_occ.iter_set() {
        let d = frame.geometry.cell_center(ix, iy) - pose.position;
        let lon = d.dot(f);
        if lon > 0.0 && d.dot(l).abs() <= cfg.ahead_half_width && lon < best {
            best = lon;
        }
    }
    best
}

pub fn encode_observations(
    frames: &[WorldFrame],
    ego: Option<Pose>,
    cfg: &WorldConfig,
) -> Result<Vec<WorldEmbedding>> {
    let first = frames.first().ok_or(Error::Empty("observation frames"))?;
    let dims = first.dims();
    for f in frames {
        if f.dims() != dims || f.drivable.dims() != dims {
            return Err(Error::Shape(format!(
                "frame at t={} has dims {:?}, expected {:?}",
                f.timestamp,
                f.dims(),
                dims
            )));
        }
    }
    Ok(frames.iter().map(|f| encode_observation(f, ego, cfg)).collect())
}

/// Keeps the most recent `min(h + 1, n)` embeddings, in order.
pub fn aggregate_history(embeddings: &[WorldEmbedding], h: usize) -> Result<AggregatedState> {
    if embeddings.is_empty() {
        return Err(Error::Empty("embeddings"));
    }
    let keep = (h + 1).min(embeddings.len());
    Ok(AggregatedState {
        window: embeddings[embeddings.len() - keep..].iter().cloned().collect(),
        capacity: h + 1,
    })
}

/// One deterministic dynamics step from the latest aggregated frame.
pub fn decode_next(state: &AggregatedState, c: &ActionCondition, cfg: &WorldConfig) -> WorldFrame {
    let cur = &state.latest().frame;
    let ego = c.ego_pose();
    let agents: Vec<AgentState> = cur
        .agents
        .iter()
        .map(|a| a.step(cur.timestamp, cfg.dt, ego))
        .collect();
    let instance_occ = WorldFrame::rasterize_agents(&cur.geometry, &agents);
    WorldFrame {
        geometry: cur.geometry,
        instance_occ,
        drivable: cur.drivable.clone(),
        agents,
        timestamp: cur.timestamp + 1,
    }
}

/// Ego agent state implied by waypoint `k` of a plan.
pub fn ego_state_at(plan: &Trajectory, k: usize, footprint: Footprint) -> AgentState {
    let pose = plan.pose(k);
    let vel = if k + 1 < plan.len() {
        (plan.waypoints[k + 1] - plan.waypoints[k]) * (1.0 / plan.dt)
    } else {
        (plan.waypoints[k] - plan.waypoints[k - 1]) * (1.0 / plan.dt)
    };
    AgentState {
        position: pose.position,
        velocity: vel,
        footprint,
        heading: pose.heading,
        behavior: Behavior::ConstantVelocity,
    }
}

/// The world model with an instrumented call counter.
#[derive(Debug, Default)]
pub struct MicroWorld {
    pub config: WorldConfig,
    calls: AtomicUsize,
}

impl MicroWorld {
    pub fn new(config: WorldConfig) -> Self {
        Self {
            config,
            calls: AtomicUsize::new(0),
        }
    }

    /// Number of rollouts requested so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    /// Action-conditioned autoregressive rollout of `steps` future frames.
    pub fn rollout(&self, scenario: &Scenario, plan: &Trajectory, steps: usize) -> Result<Vec<WorldFrame>> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        rollout_frames(&scenario.initial_frames, scenario.command, scenario.ego_footprint(), plan, steps, &self.config)
    }

    /// Rollout conditioned on the expert trajectory: the ground-truth future.
    pub fn gt_rollout(&self, scenario: &Scenario, steps: usize) -> Result<Vec<WorldFrame>> {
        self.rollout(scenario, &scenario.expert, steps)
    }
}

/// Chains encode, aggregate and decode `steps` times starting from `history`.
pub fn rollout_frames(
    history: &[WorldFrame],
    command: Command,
    ego_footprint: Footprint,
    plan: &Trajectory,
    steps: usize,
    cfg: &WorldConfig,
) -> Result<Vec<WorldFrame>> {
    if plan.steps() < steps {
        return Err(Error::Horizon {
            needed: steps,
            got: plan.steps(),
        });
    }
    if steps == 0 {
        return Ok(Vec::new());
    }
    let embeddings = encode_observations(history, Some(plan.pose(0)), cfg)?;
    let mut state = aggregate_history(&embeddings, cfg.history)?;
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let cond = ActionCondition {
            command,
            history: plan.waypoints[..=k].to_vec(),
            ego_state: ego_state_at(plan, k, ego_footprint),
        };
        let next = decode_next(&state, &cond, cfg);
        state.push(encode_observation(&next, Some(plan.pose(k + 1)), cfg));
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(n: usize) -> GridGeometry {
        GridGeometry {
            width: n,
            height: n,
            resolution: 0.5,
            origin: Vec2::ZERO,
        }
    }

    fn agent(pos: Vec2, vel: Vec2, behavior: Behavior) -> AgentState {
        AgentState {
            position: pos,
            velocity: vel,
            footprint: Footprint::new(1.0, 1.0),
            heading: if vel.norm() > 0.0 { vel.angle() } else { 0.0 },
            behavior,
        }
    }

    fn straight(speed: f64, n: usize, y: f64) -> Trajectory {
        let w = (0..=n).map(|k| Vec2::new(2.0 + speed * 0.5 * k as f64, y)).collect();
        Trajectory::new(w, 0.5).unwrap()
    }

    #[test]
    fn empty_frame_summary() {
        let f = WorldFrame::new(geo(16), Grid::new(16, 16, true), vec![], 0).unwrap();
        let cfg = WorldConfig::default();
        let e = encode_observation(&f, None, &cfg);
        assert_eq!(&e.summary[..4], &[0.0; 4]);
        assert_eq!(e.summary[5], 1.0);
    }

    #[test]
    fn ne_quadrant_density() {
        // 1 m square centred on a cell corner in the NE quadrant covers 4 cells.
        let a = agent(Vec2::new(6.0, 6.0), Vec2::ZERO, Behavior::ConstantVelocity);
        let f = WorldFrame::new(geo(16), Grid::new(16, 16, true), vec![a], 0).unwrap();
        assert_eq!(f.instance_occ.count(), 4);
        let e = encode_observation(&f, None, &WorldConfig::default());
        assert_eq!(e.summary[0], 4.0 / 64.0);
        assert_eq!(&e.summary[1..4], &[0.0; 3]);
    }

    #[test]
    fn mismatched_dims_rejected() {
        let a = WorldFrame::new(geo(16), Grid::new(16, 16, true), vec![], 0).unwrap();
        let b = WorldFrame::new(geo(8), Grid::new(8, 8, true), vec![], 1).unwrap();
        assert!(matches!(
            encode_observations(&[a, b], None, &WorldConfig::default()),
            Err(Error::Shape(_))
        ));
        assert!(WorldFrame::new(geo(8), Grid::new(4, 8, true), vec![], 0).is_err());
    }

    #[test]
    fn window_semantics() {
        let cfg = WorldConfig::default();
        let embs: Vec<_> = (0..5)
            .map(|t| {
                let f = WorldFrame::new(geo(8), Grid::new(8, 8, true), vec![], t).unwrap();
                encode_observation(&f, None, &cfg)
            })
            .collect();
        let s = aggregate_history(&embs, 2).unwrap();
        let ts: Vec<i64> = s.embeddings().map(|e| e.frame.timestamp).collect();
        assert_eq!(ts, vec![2, 3, 4]);
        assert_eq!(aggregate_history(&embs, 0).unwrap().len(), 1);
        assert_eq!(aggregate_history(&embs[..2], 4).unwrap().len(), 2);
        assert!(aggregate_history(&[], 1).is_err());
    }

    #[test]
    fn empty_world_decode_only_advances_time() {
        let cfg = WorldConfig::default();
        let f = WorldFrame::new(geo(16), Grid::new(16, 16, true), vec![], 0).unwrap();
        let s = aggregate_history(&[encode_observation(&f, None, &cfg)], 2).unwrap();
        let plan = straight(2.0, 3, 4.0);
        let c = ActionCondition {
            command: Command::Keep,
            history: vec![plan.waypoints[0]],
            ego_state: ego_state_at(&plan, 0, Footprint::new(4.0, 1.8)),
        };
        let n = decode_next(&s, &c, &cfg);
        assert_eq!(n.timestamp, 1);
        assert_eq!(n.instance_occ, f.instance_occ);
        assert_eq!(n.drivable, f.drivable);
    }

    #[test]
    fn constant_velocity_advances_two_cells() {
        let cfg = WorldConfig::default();
        let a = agent(Vec2::new(3.0, 3.0), Vec2::new(2.0, 0.0), Behavior::ConstantVelocity);
        let f = WorldFrame::new(geo(16), Grid::new(16, 16, true), vec![a], 0).unwrap();
        let plan = straight(0.0, 2, 7.0);
        let frames = rollout_frames(&[f.clone()], Command::Keep, Footprint::new(1.0, 1.0), &plan, 2, &cfg).unwrap();
        let min_x = |g: &Grid| g.iter_set().map(|(x, _)| x).min().unwrap();
        assert_eq!(min_x(&frames[0].instance_occ), min_x(&f.instance_occ) + 2);
        assert_eq!(min_x(&frames[1].instance_occ), min_x(&f.instance_occ) + 4);
    }

    #[test]
    fn yield_agent_decelerates_inside_gap() {
        let cfg = WorldConfig::default();
        let a = agent(
            Vec2::new(6.0, 4.0),
            Vec2::new(0.0, 2.0),
            Behavior::EgoReactiveYield { gap: 5.0, decel: 2.0 },
        );
        let f = WorldFrame::new(geo(16), Grid::new(16, 16, true), vec![a], 0).unwrap();
        let s = aggregate_history(&[encode_observation(&f, None, &cfg)], 0).unwrap();
        let plan = straight(1.0, 1, 4.0);
        let c = ActionCondition {
            command: Command::Keep,
            history: vec![plan.waypoints[0]],
            ego_state: ego_state_at(&plan, 0, Footprint::new(1.0, 1.0)),
        };
        let n = decode_next(&s, &c, &cfg);
        assert!((n.agents[0].speed() - (2.0 - 2.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn short_plan_is_horizon_error() {
        let f = WorldFrame::new(geo(8), Grid::new(8, 8, true), vec![], 0).unwrap();
        let plan = straight(1.0, 2, 1.0);
        let r = rollout_frames(&[f], Command::Keep, Footprint::new(1.0, 1.0), &plan, 3, &WorldConfig::default());
        assert!(matches!(r, Err(Error::Horizon { .. })));
    }
}
