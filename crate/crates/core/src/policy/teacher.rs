//! Reward-guided teacher: candidates, world-model interaction, selection.

use super::candidates::{constant_velocity_prior, generate_candidates, CandidateConfig, CandidateSet};
use super::query::{PlanQuery, QueryProjection};
use super::{ego_frame_offsets, observation_summary};
use crate::error::{Error, Result};
use crate::learned::{featurize, learned_reward_vectors, FeatureConfig, InteractionFeatures, RewardHeadParams, RewardSample};
use crate::reward::{score_batch, select_best, RewardConfig, RewardVector};
use crate::rng::{indexed, mix64, Stream};
use crate::world::{MicroWorld, Scenario, WorldFrame};
use crate::kinematics::Trajectory;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Where interaction futures come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Interaction {
    /// One expert-conditioned future shared by every candidate.
    Gt,
    /// One action-conditioned world-model rollout per candidate.
    #[default]
    Wm,
}

/// How candidates are scored before selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Scorer {
    Engine,
    Learned(RewardHeadParams),
    /// Uniform random pick; engine scores are still reported.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeacherConfig {
    pub n_candidates: usize,
    pub candidates: CandidateConfig,
    pub reward: RewardConfig,
    pub interaction: Interaction,
    pub features: FeatureConfig,
    pub query_dim: usize,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        Self {
            n_candidates: 16,
            candidates: CandidateConfig::default(),
            reward: RewardConfig::default(),
            interaction: Interaction::Wm,
            features: FeatureConfig::default(),
            query_dim: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherOutput {
    pub index: usize,
    pub tau_star: Trajectory,
    pub q_t: PlanQuery,
    pub best_rv: RewardVector,
    /// Per-candidate breakdown, in candidate order.
    pub rewards: Vec<RewardVector>,
    /// Interaction future of the selected candidate.
    pub frames: Vec<WorldFrame>,
}

pub struct Teacher<'a> {
    pub world: &'a MicroWorld,
    pub cfg: TeacherConfig,
    pub scorer: Scorer,
    pub projection: QueryProjection,
    pub seed: u64,
}

impl<'a> Teacher<'a> {
    pub fn new(world: &'a MicroWorld, cfg: TeacherConfig, scorer: Scorer, seed: u64) -> Result<Self> {
        let projection = QueryProjection::new(cfg.query_dim, cfg.candidates.steps, seed)?;
        Ok(Self {
            world,
            cfg,
            scorer,
            projection,
            seed,
        })
    }

    pub fn candidates(&self, scenario: &Scenario) -> Result<CandidateSet> {
        let seed = mix64(self.seed ^ mix64(scenario.seed));
        generate_candidates(&scenario.ego_init, self.cfg.n_candidates, seed, &self.cfg.candidates)
    }

    /// Interaction futures, one per candidate.
    pub fn futures(&self, scenario: &Scenario, cands: &[Trajectory]) -> Result<Vec<Vec<WorldFrame>>> {
        let steps = self.cfg.candidates.steps;
        match self.cfg.interaction {
            Interaction::Wm => cands
                .par_iter()
                .map(|c| self.world.rollout(scenario, c, steps))
                .collect(),
            Interaction::Gt => {
                let gt = self.world.gt_rollout(scenario, steps)?;
                Ok(vec![gt; cands.len()])
            }
        }
    }

    pub fn plan(&self, scenario: &Scenario) -> Result<TeacherOutput> {
        let set = self.candidates(scenario)?;
        let cands = &set.trajectories;
        let futures = self.futures(scenario, cands)?;
        let refs: Vec<&[WorldFrame]> = futures.iter().map(|f| f.as_slice()).collect();
        let fp = scenario.ego_footprint();
        let reward = &self.cfg.reward;
        let engine = score_batch(cands, &refs, &scenario.expert, fp, reward)?;
        let (index, rewards) = match &self.scorer {
            Scorer::Engine => (select_best(&engine, reward)?, engine),
            Scorer::Learned(params) => {
                let feats: Vec<InteractionFeatures> = cands
                    .par_iter()
                    .zip(refs.par_iter())
                    .map(|(c, f)| featurize(c, f, fp, &self.cfg.features))
                    .collect::<Result<_>>()?;
                let rvs = learned_reward_vectors(params, &feats, &reward.weights, &reward.signals)?;
                (select_best(&rvs, reward)?, rvs)
            }
            Scorer::Random => {
                let mut rng = indexed(self.seed, Stream::Selection, scenario.seed);
                (rng.random_range(0..cands.len()), engine)
            }
        };
        let tau_star = cands[index].clone();
        let q_t = self.query(scenario, &tau_star)?;
        Ok(TeacherOutput {
            index,
            best_rv: rewards[index],
            tau_star,
            q_t,
            rewards,
            frames: futures.into_iter().nth(index).ok_or(Error::Empty("futures"))?,
        })
    }

    /// Candidate features with engine labels, for training the learned reward.
    pub fn reward_sample(&self, scenario: &Scenario) -> Result<RewardSample> {
        let set = self.candidates(scenario)?;
        let cands = &set.trajectories;
        let futures = self.futures(scenario, cands)?;
        let refs: Vec<&[WorldFrame]> = futures.iter().map(|f| f.as_slice()).collect();
        let fp = scenario.ego_footprint();
        let labels = score_batch(cands, &refs, &scenario.expert, fp, &self.cfg.reward)?;
        let feats: Vec<InteractionFeatures> = cands
            .par_iter()
            .zip(refs.par_iter())
            .map(|(c, f)| featurize(c, f, fp, &self.cfg.features))
            .collect::<Result<_>>()?;
        Ok(RewardSample::from_engine(feats, &labels))
    }

    /// Teacher query for a chosen plan.
    pub fn query(&self, scenario: &Scenario, plan: &Trajectory) -> Result<PlanQuery> {
        let c = &self.cfg.candidates;
        let prior = constant_velocity_prior(&scenario.ego_init, c.steps, c.dt)?;
        let off = ego_frame_offsets(plan, &prior, scenario.ego_init.heading)?;
        let summary = observation_summary(scenario.current_frame(), scenario.ego_init.pose(), &self.world.config);
        self.projection.project(&off, &summary)
    }
}
