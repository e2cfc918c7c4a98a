//! Glue between the stages: teacher caching, reward-model and student
//! training on the training half, and the file envelope every artifact uses.

use crate::config::{sha256_hex, RewardSource, RunConfig};
use crate::error::{Error, Result};
use crate::eval::Suite;
use crate::learned::{train_reward_model, RewardHeadParams, RewardSample, TrainedRewardModel};
use crate::policy::{Scorer, StudentSample, Teacher, TeacherOutput, TrainedStudent};
use crate::world::{MicroWorld, Scenario};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

/// Common wrapper of every file the pipeline writes after the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub schema_version: u32,
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    /// SHA-256 of each input file, by role.
    pub inputs: BTreeMap<String, String>,
    pub config: RunConfig,
    pub body: T,
}

impl<T: Serialize + DeserializeOwned> Artifact<T> {
    pub fn new(kind: &str, cfg: &RunConfig, inputs: BTreeMap<String, String>, body: T) -> Self {
        Self {
            schema_version: ARTIFACT_SCHEMA_VERSION,
            kind: kind.to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            inputs,
            config: cfg.canonical(),
            body,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses `s`, rejecting other schema versions and kinds.
    pub fn from_json(s: &str, kind: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        let version = v.get("schema_version").and_then(|x| x.as_u64());
        if version != Some(ARTIFACT_SCHEMA_VERSION as u64) {
            return Err(Error::Schema(format!(
                "artifact schema version {version:?}, expected {ARTIFACT_SCHEMA_VERSION}"
            )));
        }
        let found = v.get("kind").and_then(|x| x.as_str()).unwrap_or("");
        if found != kind {
            return Err(Error::Schema(format!("expected a {kind} file, found {found:?}")));
        }
        serde_json::from_value(v).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>, kind: &str) -> Result<(Self, String)> {
        let s = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        let a = Self::from_json(&s, kind)?;
        Ok((a, sha256_hex(s.as_bytes())))
    }
}

/// Cached teacher decision for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherRecord {
    pub id: u64,
    pub output: TeacherOutput,
}

/// Teacher for `cfg`. A learned scorer needs `learned`.
pub fn make_teacher<'a>(cfg: &RunConfig, world: &'a MicroWorld, learned: Option<&RewardHeadParams>) -> Result<Teacher<'a>> {
    let scorer = match cfg.teacher.reward_source {
        RewardSource::Engine => Scorer::Engine,
        RewardSource::Random => Scorer::Random,
        RewardSource::Learned => Scorer::Learned(
            learned
                .cloned()
                .ok_or_else(|| Error::Config("learned reward source needs reward parameters".into()))?,
        ),
    };
    Teacher::new(world, cfg.teacher_config(), scorer, cfg.seed)
}

pub fn teacher_records(teacher: &Teacher, scenarios: &[&Scenario]) -> Result<Vec<TeacherRecord>> {
    scenarios
        .par_iter()
        .map(|sc| {
            Ok(TeacherRecord {
                id: sc.id,
                output: teacher.plan(sc)?,
            })
        })
        .collect()
}

/// Engine-labelled candidate batches of the training half.
pub fn reward_dataset(cfg: &RunConfig, suite: &Suite) -> Result<Vec<RewardSample>> {
    let world = MicroWorld::new(cfg.world_config());
    let teacher = Teacher::new(&world, cfg.teacher_config(), Scorer::Engine, cfg.seed)?;
    suite.train_half().par_iter().map(|sc| teacher.reward_sample(sc)).collect()
}

pub fn train_reward(cfg: &RunConfig, suite: &Suite) -> Result<TrainedRewardModel> {
    let data = reward_dataset(cfg, suite)?;
    train_reward_model(&data, &cfg.reward_train_config())
}

/// Student samples for `scenarios`, matched to cached records by id.
pub fn student_samples(cfg: &RunConfig, scenarios: &[&Scenario], records: &[TeacherRecord]) -> Result<Vec<StudentSample>> {
    let by_id: BTreeMap<u64, &TeacherOutput> = records.iter().map(|r| (r.id, &r.output)).collect();
    let world = cfg.world_config();
    scenarios
        .iter()
        .map(|sc| {
            let out = by_id
                .get(&sc.id)
                .ok_or_else(|| Error::Schema(format!("teacher cache has no record for scenario {}", sc.id)))?;
            StudentSample::new(sc, out, &world, cfg.suite.horizon, cfg.suite.dt)
        })
        .collect()
}

/// Distils a student from cached teacher records on the training half.
pub fn distill(cfg: &RunConfig, suite: &Suite, records: &[TeacherRecord]) -> Result<TrainedStudent> {
    let samples = student_samples(cfg, &suite.train_half(), records)?;
    crate::policy::train_student(&samples, &cfg.reward, cfg.seed, &cfg.student_config())
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
