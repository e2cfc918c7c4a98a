//! Receding-horizon execution in the scripted world.

use super::planners::Planner;
use super::REPORT_SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kinematics::{derive_profile, Trajectory};
use crate::reward::{ego_cells, CollisionMode, ComfortThresholds};
use crate::rng::mix64;
use crate::world::{rollout_frames, AgentState, Behavior, Scenario, Stratum, WorldConfig, WorldFrame};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosedLoopConfig {
    pub step_budget: usize,
    /// Score multipliers for the terminal infractions.
    pub collision_factor: f64,
    pub offroad_factor: f64,
    /// Multiplier applied once per step that violates a comfort threshold.
    pub discomfort_factor: f64,
    pub comfort: ComfortThresholds,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        Self {
            step_budget: 12,
            collision_factor: 0.0,
            offroad_factor: 0.0,
            discomfort_factor: 0.95,
            comfort: ComfortThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Goal,
    Collision,
    OffRoad,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopRecord {
    pub id: u64,
    pub stratum: Stratum,
    pub steps: usize,
    pub outcome: Outcome,
    pub success: bool,
    /// Route completion in `[0, 1]`.
    pub completion: f64,
    pub violating_steps: usize,
    /// Driving score in `[0, 100]`.
    pub score: f64,
    /// Mean progress per step over the initial speed times dt.
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopReport {
    pub schema_version: u32,
    pub policy: String,
    pub scenario_count: usize,
    pub driving_score: f64,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub efficiency: f64,
    /// Percent of executed steps within every comfort threshold.
    pub comfort_rate: f64,
    pub constants: ClosedLoopConfig,
    pub records: Vec<ClosedLoopRecord>,
}

impl ClosedLoopReport {
    pub fn from_records(policy: String, constants: ClosedLoopConfig, mut records: Vec<ClosedLoopRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("closed-loop records"));
        }
        records.sort_by_key(|r| r.id);
        let n = records.len() as f64;
        let steps: usize = records.iter().map(|r| r.steps).sum();
        let bad: usize = records.iter().map(|r| r.violating_steps).sum();
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            policy,
            scenario_count: records.len(),
            driving_score: records.iter().map(|r| r.score).sum::<f64>() / n,
            success_rate: 100.0 * records.iter().filter(|r| r.success).count() as f64 / n,
            collision_rate: 100.0 * records.iter().filter(|r| r.outcome == Outcome::Collision).count() as f64 / n,
            efficiency: records.iter().map(|r| r.efficiency).sum::<f64>() / n,
            comfort_rate: if steps == 0 {
                100.0
            } else {
                100.0 * (steps - bad) as f64 / steps as f64
            },
            constants,
            records,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,stratum,steps,outcome,success,completion,violating_steps,score,efficiency\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{:?},{},{},{},{},{}\n",
                r.id,
                r.stratum.name(),
                r.steps,
                r.outcome,
                r.success as u8,
                r.completion,
                r.violating_steps,
                r.score,
                r.efficiency
            ));
        }
        s
    }
}

/// Expert remainder from `step`, shifted to start at `at`, extended at
/// constant velocity if shorter than `min_steps`.
fn remaining_expert(expert: &Trajectory, step: usize, at: Vec2, min_steps: usize) -> Result<Trajectory> {
    let start = step.min(expert.steps() - 1);
    let shift = at - expert.waypoints[start];
    let mut w: Vec<Vec2> = expert.waypoints[start..].iter().map(|p| *p + shift).collect();
    let mut h = expert.headings()[start..].to_vec();
    while w.len() < min_steps + 1 {
        let n = w.len();
        let d = w[n - 1] - w[n - 2];
        w.push(w[n - 1] + d);
        h.push(h[n - 1]);
    }
    Trajectory::with_headings(w, expert.dt, h)
}

/// Ego state after executing the first step of `plan`.
fn advance_ego(plan: &Trajectory, prev: &AgentState) -> AgentState {
    let dt = plan.dt;
    let w = &plan.waypoints;
    let velocity = if w.len() > 2 {
        (w[2] - w[0]) * (0.5 / dt)
    } else {
        (w[1] - w[0]) * (1.0 / dt)
    };
    AgentState {
        position: w[1],
        velocity,
        footprint: prev.footprint,
        heading: plan.pose(1).heading,
        behavior: Behavior::ConstantVelocity,
    }
}

/// Receding-horizon state of one episode.
struct Episode<'a> {
    scenario: &'a Scenario,
    world: &'a WorldConfig,
    plan_steps: usize,
    history: Vec<WorldFrame>,
    ego: AgentState,
    executed: Vec<Vec2>,
    step: usize,
}

impl<'a> Episode<'a> {
    fn new(scenario: &'a Scenario, world: &'a WorldConfig, plan_steps: usize) -> Self {
        Self {
            scenario,
            world,
            plan_steps,
            history: scenario.initial_frames.clone(),
            ego: scenario.ego_init.clone(),
            executed: vec![scenario.ego_init.position],
            step: 0,
        }
    }

    /// The scenario as seen from the current state: the last `h + 1` frames,
    /// the current ego, and the expert remainder moved onto the ego.
    fn view(&self) -> Result<Scenario> {
        if self.step == 0 {
            return Ok(self.scenario.clone());
        }
        let keep = self.world.history + 1;
        Ok(Scenario {
            seed: mix64(self.scenario.seed ^ mix64(self.step as u64)),
            initial_frames: self.history[self.history.len().saturating_sub(keep)..].to_vec(),
            ego_init: self.ego.clone(),
            expert: remaining_expert(&self.scenario.expert, self.step, self.ego.position, self.plan_steps)?,
            ..self.scenario.clone()
        })
    }

    /// Executes the first step of `plan` and reports a terminal outcome.
    fn advance(&mut self, view: &Scenario, plan: &Trajectory) -> Result<Option<Outcome>> {
        if plan.steps() < 1 {
            return Err(Error::Horizon { needed: 1, got: 0 });
        }
        let fp = self.scenario.ego_footprint();
        let next = rollout_frames(&view.initial_frames, view.command, fp, plan, 1, self.world)?
            .pop()
            .ok_or(Error::Empty("world step"))?;
        self.ego = advance_ego(plan, &self.ego);
        self.executed.push(self.ego.position);
        self.step += 1;
        let cells = ego_cells(&next.geometry, self.ego.pose(), fp, CollisionMode::Footprint);
        let hit = cells.iter().any(|&(ix, iy)| next.instance_occ.get_signed(ix, iy) == Some(true));
        let off = cells.iter().any(|&(ix, iy)| next.drivable.get_signed(ix, iy) != Some(true));
        self.history.push(next);
        Ok(if hit {
            Some(Outcome::Collision)
        } else if off {
            Some(Outcome::OffRoad)
        } else if self.scenario.goal.reached(self.ego.position) {
            Some(Outcome::Goal)
        } else {
            None
        })
    }
}

pub fn run_episode(
    policy: &dyn Planner,
    scenario: &Scenario,
    world: &WorldConfig,
    cfg: &ClosedLoopConfig,
    plan_steps: usize,
) -> Result<ClosedLoopRecord> {
    let mut ep = Episode::new(scenario, world, plan_steps);
    let mut outcome = Outcome::Budget;
    for _ in 0..cfg.step_budget {
        let view = ep.view()?;
        let plan = policy.plan(&view)?;
        if let Some(o) = ep.advance(&view, &plan)? {
            outcome = o;
            break;
        }
    }
    let executed = ep.executed;
    let steps = executed.len() - 1;
    let path = Trajectory::new(executed.clone(), world.dt)?;
    let prof = derive_profile(&path)?;
    let th = &cfg.comfort;
    let violating = (1..prof.len())
        .filter(|&i| {
            !(prof.a_lon[i] >= th.a_min
                && prof.a_lon[i] <= th.a_max
                && prof.a_lat[i].abs() <= th.a_lat_max
                && prof.jerk_mag[i] <= th.j_max
                && prof.j_lon[i].abs() <= th.j_lon_max)
        })
        .count();
    let last = *executed.last().expect("non-empty");
    let completion = (scenario.goal.progress(last) / scenario.goal.distance).clamp(0.0, 1.0);
    let mut score = 100.0 * completion * cfg.discomfort_factor.powi(violating as i32);
    match outcome {
        Outcome::Collision => score *= cfg.collision_factor,
        Outcome::OffRoad => score *= cfg.offroad_factor,
        _ => {}
    }
    let v_ref = scenario.ego_init.speed().max(0.1);
    let efficiency = if steps == 0 {
        0.0
    } else {
        scenario.goal.progress(last) / steps as f64 / (v_ref * world.dt)
    };
    Ok(ClosedLoopRecord {
        id: scenario.id,
        stratum: scenario.stratum,
        steps,
        outcome,
        success: outcome == Outcome::Goal,
        completion,
        violating_steps: violating,
        score,
        efficiency,
    })
}

pub fn closed_loop_eval(
    policy: &dyn Planner,
    scenarios: &[&Scenario],
    world: &WorldConfig,
    cfg: &ClosedLoopConfig,
    plan_steps: usize,
) -> Result<ClosedLoopReport> {
    if cfg.step_budget == 0 {
        return Err(Error::Config("step budget must be > 0".into()));
    }
    if scenarios.is_empty() {
        return Err(Error::Empty("scenario suite"));
    }
    let records = scenarios
        .par_iter()
        .map(|sc| run_episode(policy, sc, world, cfg, plan_steps))
        .collect::<Result<Vec<_>>>()?;
    ClosedLoopReport::from_records(policy.name(), *cfg, records)
}
