//! Single-shot planning against the logged future.

use super::planners::Planner;
use super::REPORT_SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::kinematics::{horizon_index, l2_displacements};
use crate::reward::{first_collision, CollisionMode};
use crate::world::{rollout_frames, Scenario, Stratum, WorldConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpenLoopConfig {
    /// Evaluation horizons in seconds.
    pub horizons: Vec<f64>,
    pub collision_mode: CollisionMode,
}

impl Default for OpenLoopConfig {
    fn default() -> Self {
        Self {
            horizons: vec![1.0, 2.0, 3.0],
            collision_mode: CollisionMode::Footprint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenLoopRecord {
    pub id: u64,
    pub stratum: Stratum,
    /// Mean displacement over waypoints up to each horizon (m).
    pub l2: Vec<f64>,
    /// Displacement at each horizon waypoint (m).
    pub l2_at_horizon: Vec<f64>,
    /// First colliding step against the ground-truth future, if any.
    pub collision_step: Option<usize>,
    pub collided: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenLoopReport {
    pub schema_version: u32,
    pub policy: String,
    pub scenario_count: usize,
    pub horizons: Vec<f64>,
    pub l2: Vec<f64>,
    pub l2_avg: f64,
    pub l2_at_horizon: Vec<f64>,
    /// Percent of scenarios with a collision up to each horizon.
    pub collision_rate: Vec<f64>,
    pub collision_avg: f64,
    pub records: Vec<OpenLoopRecord>,
}

impl OpenLoopReport {
    /// Recomputes the aggregates from `records` (sorted by id).
    pub fn from_records(policy: String, horizons: Vec<f64>, mut records: Vec<OpenLoopRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("open-loop records"));
        }
        records.sort_by_key(|r| r.id);
        let n = records.len() as f64;
        let m = horizons.len();
        let mut l2 = vec![0.0; m];
        let mut at = vec![0.0; m];
        let mut col = vec![0.0; m];
        for r in &records {
            for i in 0..m {
                l2[i] += r.l2[i];
                at[i] += r.l2_at_horizon[i];
                col[i] += if r.collided[i] { 1.0 } else { 0.0 };
            }
        }
        l2.iter_mut().for_each(|v| *v /= n);
        at.iter_mut().for_each(|v| *v /= n);
        col.iter_mut().for_each(|v| *v = 100.0 * *v / n);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            policy,
            scenario_count: records.len(),
            l2_avg: mean(&l2),
            collision_avg: mean(&col),
            horizons,
            l2,
            l2_at_horizon: at,
            collision_rate: col,
            records,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,stratum");
        for h in &self.horizons {
            s.push_str(&format!(",l2_{h}s,l2_at_{h}s,collision_{h}s"));
        }
        s.push_str(",collision_step\n");
        for r in &self.records {
            s.push_str(&format!("{},{}", r.id, r.stratum.name()));
            for i in 0..self.horizons.len() {
                s.push_str(&format!(",{},{},{}", r.l2[i], r.l2_at_horizon[i], r.collided[i] as u8));
            }
            s.push_str(&format!(
                ",{}\n",
                r.collision_step.map(|k| k.to_string()).unwrap_or_default()
            ));
        }
        s
    }
}

/// Plans once per scenario from the initial observation and compares the
/// plan with the expert and with the expert-conditioned future.
pub fn open_loop_eval(
    policy: &dyn Planner,
    scenarios: &[&Scenario],
    world: &WorldConfig,
    cfg: &OpenLoopConfig,
) -> Result<OpenLoopReport> {
    if scenarios.is_empty() {
        return Err(Error::Empty("scenario suite"));
    }
    let steps: Vec<usize> = cfg
        .horizons
        .iter()
        .map(|&h| horizon_index(h, world.dt))
        .collect::<Result<_>>()?;
    let max_steps = steps.iter().copied().max().ok_or(Error::Empty("horizons"))?;
    let records = scenarios
        .par_iter()
        .map(|sc| {
            let plan = policy.plan(sc)?;
            if plan.steps() < max_steps {
                return Err(Error::Horizon {
                    needed: max_steps,
                    got: plan.steps(),
                });
            }
            let plan = plan.prefix(max_steps)?;
            let l2 = l2_displacements(&plan, &sc.expert, &cfg.horizons)?;
            let gt = rollout_frames(&sc.initial_frames, sc.command, sc.ego_footprint(), &sc.expert, max_steps, world)?;
            let hit = first_collision(&plan, &gt, sc.ego_footprint(), cfg.collision_mode)?;
            Ok(OpenLoopRecord {
                id: sc.id,
                stratum: sc.stratum,
                l2: l2.average_to_horizon,
                l2_at_horizon: l2.at_horizon,
                collision_step: hit,
                collided: steps.iter().map(|&k| hit.is_some_and(|c| c <= k)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    OpenLoopReport::from_records(policy.name(), cfg.horizons.clone(), records)
}
