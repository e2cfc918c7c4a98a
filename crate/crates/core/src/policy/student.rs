//! Single-shot student planner and its distillation training.

use super::candidates::constant_velocity_prior;
use super::query::{policy_distill_loss, PlanQuery, QueryProjection};
use super::teacher::TeacherOutput;
use super::{apply_offsets, ego_frame_offsets, observation_summary};
use crate::error::{Error, Result};
use crate::geom::{Footprint, Pose, Vec2};
use crate::kinematics::Trajectory;
use crate::reward::{assemble_scores, score_batch_seq, sim_signals, RewardConfig, SignalMask};
use crate::rng::{stream, Stream};
use crate::world::{nearest_ahead, Scenario, WorldConfig, WorldFrame, SUMMARY_DIM};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const STUDENT_SCHEMA_VERSION: u32 = 1;

/// Which distillation terms are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DistillTerms {
    pub query: bool,
    pub im_reward: bool,
    pub sim_reward: bool,
}

impl DistillTerms {
    pub const NONE: DistillTerms = DistillTerms {
        query: false,
        im_reward: false,
        sim_reward: false,
    };
    pub const ALL: DistillTerms = DistillTerms {
        query: true,
        im_reward: true,
        sim_reward: true,
    };

    pub fn label(&self) -> String {
        let mut parts = vec!["bc"];
        if self.query {
            parts.push("query");
        }
        if self.im_reward {
            parts.push("imreward");
        }
        if self.sim_reward {
            parts.push("simreward");
        }
        parts.join("+")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudentConfig {
    pub query_dim: usize,
    pub steps: usize,
    pub dt: f64,
    pub lambda_exp: f64,
    pub lambda_q: f64,
    pub lambda_r: f64,
    pub terms: DistillTerms,
    pub learning_rate: f64,
    /// L2 penalty on `W` (not on `b`).
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Step of the central differences through the reward engine (m).
    pub fd_step: f64,
    pub fd_basis: FdBasis,
    /// Norm cap on the per-sample reward gradient (in offset space).
    pub reward_grad_clip: f64,
    pub seed: u64,
}

impl Default for StudentConfig {
    fn default() -> Self {
        Self {
            query_dim: 64,
            steps: 6,
            dt: 0.5,
            lambda_exp: 1.0,
            lambda_q: 1.0,
            lambda_r: 1.0,
            terms: DistillTerms::ALL,
            learning_rate: 0.1,
            weight_decay: 0.0,
            batch_size: 16,
            epochs: 400,
            fd_step: 1.0,
            fd_basis: FdBasis::Smooth,
            reward_grad_clip: 2.0,
            seed: 0,
        }
    }
}

/// Linear map `q = W φ + b` from observation features to the plan query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentParams {
    pub schema_version: u32,
    pub feature_dim: usize,
    pub query_dim: usize,
    pub steps: usize,
    pub dt: f64,
    pub projection_seed: u64,
    /// Row-major `query_dim × feature_dim`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl StudentParams {
    pub fn zeros(feature_dim: usize, query_dim: usize, steps: usize, dt: f64, projection_seed: u64) -> Self {
        Self {
            schema_version: STUDENT_SCHEMA_VERSION,
            feature_dim,
            query_dim,
            steps,
            dt,
            projection_seed,
            w: vec![0.0; feature_dim * query_dim],
            b: vec![0.0; query_dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != STUDENT_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "student params schema {} (expected {})",
                self.schema_version, STUDENT_SCHEMA_VERSION
            )));
        }
        if self.w.len() != self.feature_dim * self.query_dim || self.b.len() != self.query_dim {
            return Err(Error::Schema("student parameter shapes do not match their dimensions".into()));
        }
        if self.w.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite student parameter".into()));
        }
        Ok(())
    }

    pub fn query(&self, phi: &[f64]) -> Result<PlanQuery> {
        if phi.len() != self.feature_dim {
            return Err(Error::Shape(format!(
                "student expects {} features, got {}",
                self.feature_dim,
                phi.len()
            )));
        }
        Ok(PlanQuery(
            self.w
                .chunks(self.feature_dim)
                .zip(&self.b)
                .map(|(row, b)| b + row.iter().zip(phi).map(|(w, x)| w * x).sum::<f64>())
                .collect(),
        ))
    }
}

/// Student parameters plus the plan head they decode through.
#[derive(Debug, Clone, PartialEq)]
pub struct Student {
    pub params: StudentParams,
    pub projection: QueryProjection,
}

impl Student {
    pub fn new(params: StudentParams) -> Result<Self> {
        params.validate()?;
        let projection = QueryProjection::new(params.query_dim, params.steps, params.projection_seed)?;
        Ok(Self { params, projection })
    }
}

/// Longitudinal bin edges of the ego-centric raster (m).
const LON_BINS: [f64; 6] = [-2.0, 2.0, 6.0, 10.0, 14.0, 18.0];
/// Lateral bin edges of the ego-centric raster (m, left positive).
const LAT_BINS: [f64; 8] = [-12.0, -7.0, -3.5, -1.2, 1.2, 3.5, 7.0, 12.0];
/// Stations ahead at which lateral drivable margins are measured (m).
const MARGIN_STATIONS: [f64; 4] = [0.0, 4.0, 8.0, 12.0];
const MARGIN_CAP: f64 = 6.0;
/// Hinge knots on the ahead clearance (m).
const CLEARANCE_KNOTS: [f64; 4] = [3.0, 6.0, 9.0, 12.0];

const RASTER_CELLS: usize = (LON_BINS.len() - 1) * (LAT_BINS.len() - 1);

/// Occupied fraction of each ego-centric bin, sampled at half-cell spacing.
fn ego_raster(frame: &WorldFrame, pose: Pose) -> [f64; RASTER_CELLS] {
    let step = frame.geometry.resolution * 0.5;
    let f = Vec2::from_angle(pose.heading);
    let l = f.perp();
    let mut out = [0.0; RASTER_CELLS];
    let nl = LAT_BINS.len() - 1;
    for i in 0..LON_BINS.len() - 1 {
        for j in 0..nl {
            let (mut hit, mut n) = (0usize, 0usize);
            let mut a = LON_BINS[i] + step * 0.5;
            while a < LON_BINS[i + 1] {
                let mut b = LAT_BINS[j] + step * 0.5;
                while b < LAT_BINS[j + 1] {
                    let (ix, iy) = frame.geometry.cell_of(pose.position + f * a + l * b);
                    n += 1;
                    if frame.instance_occ.get_signed(ix, iy) == Some(true) {
                        hit += 1;
                    }
                    b += step;
                }
                a += step;
            }
            out[i * nl + j] = hit as f64 / n.max(1) as f64;
        }
    }
    out
}

/// Distance from the ego centreline to the first non-drivable point on each
/// side, at each station ahead.
fn drivable_margins(frame: &WorldFrame, pose: Pose) -> Vec<f64> {
    let step = frame.geometry.resolution * 0.5;
    let f = Vec2::from_angle(pose.heading);
    let l = f.perp();
    let drivable = |p: Vec2| {
        let (ix, iy) = frame.geometry.cell_of(p);
        frame.drivable.get_signed(ix, iy) == Some(true)
    };
    let mut out = Vec::with_capacity(MARGIN_STATIONS.len() * 2);
    for &s in &MARGIN_STATIONS {
        let c = pose.position + f * s;
        for side in [1.0, -1.0] {
            let mut d = 0.0;
            while d < MARGIN_CAP && drivable(c + l * (side * d)) {
                d += step;
            }
            out.push(d.min(MARGIN_CAP) / MARGIN_CAP);
        }
    }
    out
}

/// Speed factors of the ego forecasts used by [`conflict_features`].
const CONFLICT_SPEEDS: [f64; 5] = [1.25, 1.0, 0.75, 0.5, 0.25];
/// Forecast steps of [`conflict_features`].
const CONFLICT_STEPS: usize = 6;

/// Overlap between the ego, moving straight at a fraction of its speed, and
/// every observed agent moving at its observed velocity, at each forecast
/// step: `max_a relu(1 - |lon|/L) * relu(1 - |lat|/W)` in the ego frame, with
/// `L` and `W` the summed half-extents plus a margin.
fn conflict_features(scenario: &Scenario, dt: f64) -> Vec<f64> {
    let ego = &scenario.ego_init;
    let f = Vec2::from_angle(ego.heading);
    let agents = &scenario.current_frame().agents;
    let mut out = Vec::with_capacity(CONFLICT_SPEEDS.len() * CONFLICT_STEPS);
    for s in CONFLICT_SPEEDS {
        for k in 1..=CONFLICT_STEPS {
            let t = k as f64 * dt;
            let p = ego.position + f * (s * ego.speed() * t);
            let mut best: f64 = 0.0;
            for a in agents {
                let d = (a.position + a.velocity * t - p).rotate(-ego.heading);
                let rel = a.heading - ego.heading;
                let (c, sn) = (rel.cos().abs(), rel.sin().abs());
                let half_lon = 0.5 * (ego.footprint.length + a.footprint.length * c + a.footprint.width * sn) + 1.0;
                let half_lat = 0.5 * (ego.footprint.width + a.footprint.length * sn + a.footprint.width * c) + 0.5;
                let v = (1.0 - d.x.abs() / half_lon).max(0.0) * (1.0 - d.y.abs() / half_lat).max(0.0);
                best = best.max(v);
            }
            out.push(best);
        }
    }
    out
}

/// Observation features: the world summary of each history frame (oldest
/// first, padded by repeating the oldest) seen from the ego pose, an
/// ego-centric occupancy raster of the last two frames, hinges on the ahead
/// clearance and its closing rate, lateral drivable margins, forecast
/// conflicts with the observed agents, the command
/// one-hot, and the ego state (speed/10, heading, position scaled by the
/// map size).
pub fn observation_features(scenario: &Scenario, cfg: &WorldConfig) -> Vec<f64> {
    let frames = &scenario.initial_frames;
    let want = cfg.history + 1;
    let pose = scenario.ego_init.pose();
    let mut x = Vec::with_capacity(feature_dim(cfg.history));
    for i in 0..want {
        let idx = (frames.len() + i).saturating_sub(want);
        x.extend_from_slice(&observation_summary(&frames[idx], pose, cfg));
    }
    let cur = scenario.current_frame();
    let prev = &frames[frames.len().saturating_sub(2)];
    x.extend_from_slice(&ego_raster(cur, pose));
    x.extend_from_slice(&ego_raster(prev, pose));
    let d = nearest_ahead(cur, pose, cfg);
    let closing = (nearest_ahead(prev, pose, cfg) - d) / cfg.dt;
    for k in CLEARANCE_KNOTS {
        x.push((k - d).max(0.0) / k);
    }
    let ahead = if d < cfg.clearance_cap { 1.0 } else { 0.0 };
    x.push(ahead * closing / 10.0);
    x.push(ahead * (scenario.ego_init.speed() - closing) / 10.0);
    x.extend(drivable_margins(cur, pose));
    x.extend(conflict_features(scenario, cfg.dt));
    x.extend_from_slice(&scenario.command.one_hot());
    let geo = cur.geometry;
    let ego = &scenario.ego_init;
    x.push(ego.speed() / 10.0);
    x.push(ego.heading);
    x.push((ego.position.x - geo.origin.x) / (geo.width as f64 * geo.resolution));
    x.push((ego.position.y - geo.origin.y) / (geo.height as f64 * geo.resolution));
    x
}

pub fn feature_dim(history: usize) -> usize {
    (history + 1) * SUMMARY_DIM + 2 * RASTER_CELLS + CLEARANCE_KNOTS.len() + 2 + 2 * MARGIN_STATIONS.len()
        + CONFLICT_SPEEDS.len() * CONFLICT_STEPS
        + 4
        + 4
}

/// One linear evaluation: no candidates, no world-model call.
pub fn student_plan(student: &Student, scenario: &Scenario, cfg: &WorldConfig) -> Result<(Trajectory, PlanQuery)> {
    let p = &student.params;
    let q = p.query(&observation_features(scenario, cfg))?;
    let prior = constant_velocity_prior(&scenario.ego_init, p.steps, p.dt)?;
    let traj = apply_offsets(&prior, &student.projection.offsets(&q.0), scenario.ego_init.heading)?;
    Ok((traj, q))
}

/// `|r_final(τ_S) − r_final(τ*)|`, both scored by the engine as one batch
/// (so the imitation and progress normalisations are shared). The signals
/// enabled in `cfg` decide which terms of the fused score take part.
#[allow(clippy::too_many_arguments)]
pub fn reward_distill_loss(
    tau_s: &Trajectory,
    frames_s: &[WorldFrame],
    tau_star: &Trajectory,
    frames_t: &[WorldFrame],
    expert: &Trajectory,
    footprint: Footprint,
    cfg: &RewardConfig,
) -> Result<f64> {
    let rv = score_batch_seq(&[tau_s.clone(), tau_star.clone()], &[frames_s, frames_t], expert, footprint, cfg)?;
    Ok((rv[0].r_final - rv[1].r_final).abs())
}

/// Everything the trainer needs for one scenario, taken from the teacher
/// cache so training never touches the world model.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentSample {
    pub features: Vec<f64>,
    pub expert_offsets: Vec<f64>,
    pub q_t: PlanQuery,
    pub tau_star: Trajectory,
    pub frames: Vec<WorldFrame>,
    pub prior: Trajectory,
    pub heading: f64,
    pub expert: Trajectory,
    pub footprint: Footprint,
}

impl StudentSample {
    pub fn new(scenario: &Scenario, teacher: &TeacherOutput, world: &WorldConfig, steps: usize, dt: f64) -> Result<Self> {
        let prior = constant_velocity_prior(&scenario.ego_init, steps, dt)?;
        let expert = scenario.expert.prefix(steps)?;
        let heading = scenario.ego_init.heading;
        Ok(Self {
            features: observation_features(scenario, world),
            expert_offsets: ego_frame_offsets(&expert, &prior, heading)?,
            q_t: teacher.q_t.clone(),
            tau_star: teacher.tau_star.clone(),
            frames: teacher.frames.clone(),
            prior,
            heading,
            expert,
            footprint: scenario.ego_footprint(),
        })
    }
}

/// Per-term losses of one sample, unweighted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossTerms {
    pub exp: f64,
    pub query: f64,
    pub reward: f64,
    pub total: f64,
}

impl LossTerms {
    fn add(&mut self, o: &LossTerms) {
        self.exp += o.exp;
        self.query += o.query;
        self.reward += o.reward;
        self.total += o.total;
    }

    fn scale(&mut self, s: f64) {
        self.exp *= s;
        self.query *= s;
        self.reward *= s;
        self.total *= s;
    }
}

/// Directions along which the reward term is differenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FdBasis {
    /// One coordinate of one waypoint at a time.
    Waypoint,
    /// Orthonormalised polynomial profiles `(k/T)^p`, `p = 1..=T`, applied to
    /// all longitudinal or all lateral offsets at once.
    #[default]
    Smooth,
}

/// Orthonormal directions in offset space, `2 * steps` of them.
pub fn fd_directions(basis: FdBasis, steps: usize) -> Vec<Vec<f64>> {
    let n = 2 * steps;
    match basis {
        FdBasis::Waypoint => (0..n)
            .map(|j| {
                let mut v = vec![0.0; n];
                v[j] = 1.0;
                v
            })
            .collect(),
        FdBasis::Smooth => {
            let mut profiles: Vec<Vec<f64>> = Vec::with_capacity(steps);
            for p in 1..=steps {
                let mut v: Vec<f64> = (1..=steps).map(|k| (k as f64 / steps as f64).powi(p as i32)).collect();
                for u in &profiles {
                    let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
                }
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.iter_mut().for_each(|a| *a /= norm);
                profiles.push(v);
            }
            let mut out = Vec::with_capacity(n);
            for axis in 0..2 {
                for u in &profiles {
                    let mut v = vec![0.0; n];
                    for (k, x) in u.iter().enumerate() {
                        v[2 * k + axis] = *x;
                    }
                    out.push(v);
                }
            }
            out
        }
    }
}

/// Reward mask used by the reward-distillation term.
fn distill_mask(base: &SignalMask, terms: &DistillTerms) -> SignalMask {
    SignalMask {
        im: base.im && terms.im_reward,
        nc: base.nc && terms.sim_reward,
        dac: base.dac && terms.sim_reward,
        ep: base.ep && terms.sim_reward,
        ttc: base.ttc && terms.sim_reward,
        comf: base.comf && terms.sim_reward,
    }
}

struct Trainer<'a> {
    cfg: &'a StudentConfig,
    reward: RewardConfig,
    reward_on: bool,
    projection: &'a QueryProjection,
    directions: Vec<Vec<f64>>,
}

impl Trainer<'_> {
    /// Loss terms and the gradient with respect to the query.
    fn sample(&self, p: &StudentParams, s: &StudentSample) -> Result<(LossTerms, Vec<f64>)> {
        let cfg = self.cfg;
        let q = p.query(&s.features)?;
        let off = self.projection.offsets(&q.0);
        let t = cfg.steps as f64;
        let mut g_off = vec![0.0; off.len()];
        let mut lt = LossTerms::default();

        for j in 0..off.len() {
            let d = off[j] - s.expert_offsets[j];
            lt.exp += d * d / t;
            g_off[j] += cfg.lambda_exp * 2.0 * d / t;
        }

        let mut g_q = vec![0.0; q.dim()];
        if cfg.terms.query && cfg.lambda_q != 0.0 {
            lt.query = policy_distill_loss(&q, &s.q_t)?;
            if lt.query > 0.0 {
                for (g, (a, b)) in g_q.iter_mut().zip(q.0.iter().zip(&s.q_t.0)) {
                    *g += cfg.lambda_q * (a - b) / lt.query;
                }
            }
        }

        if self.reward_on {
            let star_sims = sim_signals(&s.tau_star, &s.frames, s.footprint, &self.reward)?;
            let eval = |o: &[f64]| -> Result<f64> {
                let ts = apply_offsets(&s.prior, o, s.heading)?;
                let sims = [sim_signals(&ts, &s.frames, s.footprint, &self.reward)?, star_sims];
                let rv = assemble_scores(&[ts, s.tau_star.clone()], &sims, &s.expert, &self.reward)?;
                Ok((rv[0].r_final - rv[1].r_final).abs())
            };
            lt.reward = eval(&off)?;
            let h = cfg.fd_step;
            let mut g = vec![0.0; off.len()];
            for d in &self.directions {
                let up: Vec<f64> = off.iter().zip(d).map(|(a, b)| a + h * b).collect();
                let dn: Vec<f64> = off.iter().zip(d).map(|(a, b)| a - h * b).collect();
                let slope = (eval(&up)? - eval(&dn)?) / (2.0 * h);
                g.iter_mut().zip(d).for_each(|(a, b)| *a += slope * b);
            }
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = if norm > cfg.reward_grad_clip {
                cfg.reward_grad_clip / norm
            } else {
                1.0
            };
            for (a, b) in g_off.iter_mut().zip(&g) {
                *a += cfg.lambda_r * b * scale;
            }
        }

        lt.total = cfg.lambda_exp * lt.exp
            + if cfg.terms.query { cfg.lambda_q * lt.query } else { 0.0 }
            + if self.reward_on { cfg.lambda_r * lt.reward } else { 0.0 };

        for (j, g) in g_off.iter().enumerate() {
            if *g != 0.0 {
                for (a, c) in g_q.iter_mut().zip(self.projection.offset_col(j)) {
                    *a += g * c;
                }
            }
        }
        Ok((lt, g_q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedStudent {
    pub params: StudentParams,
    /// Batch-mean total loss at every optimiser step (before the update).
    pub loss_curve: Vec<f64>,
    /// Epoch means of each unweighted term.
    pub epoch_terms: Vec<LossTerms>,
}

/// Seeded mini-batch gradient descent from zero parameters on
/// `λ_exp·mean‖τ_S − expert‖² + λ_q·‖Q_S − Q_T‖ + λ_r·|Δ r_final|`.
pub fn train_student(
    samples: &[StudentSample],
    reward: &RewardConfig,
    projection_seed: u64,
    cfg: &StudentConfig,
) -> Result<TrainedStudent> {
    let first = samples.first().ok_or(Error::Empty("student training set"))?;
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch_size must be > 0".into()));
    }
    if cfg.fd_step <= 0.0 {
        return Err(Error::Config("fd_step must be > 0".into()));
    }
    let projection = QueryProjection::new(cfg.query_dim, cfg.steps, projection_seed)?;
    let fdim = first.features.len();
    let mut params = StudentParams::zeros(fdim, cfg.query_dim, cfg.steps, cfg.dt, projection_seed);
    let mask = distill_mask(&reward.signals, &cfg.terms);
    let trainer = Trainer {
        cfg,
        reward: RewardConfig {
            signals: mask,
            ..*reward
        },
        reward_on: cfg.lambda_r != 0.0 && (mask.im || mask.any_sim()),
        projection: &projection,
        directions: fd_directions(cfg.fd_basis, cfg.steps),
    };
    let mut rng = stream(cfg.seed, Stream::Sgd);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut curve = Vec::new();
    let mut epoch_terms = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut et = LossTerms::default();
        for (bi, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let results: Vec<(LossTerms, Vec<f64>)> = chunk
                .par_iter()
                .map(|&i| trainer.sample(&params, &samples[i]))
                .collect::<Result<_>>()?;
            let n = chunk.len() as f64;
            let mut gw = vec![0.0; params.w.len()];
            let mut gb = vec![0.0; params.b.len()];
            let mut bt = LossTerms::default();
            for (&i, (lt, gq)) in chunk.iter().zip(&results) {
                bt.add(lt);
                let phi = &samples[i].features;
                for (r, g) in gq.iter().enumerate() {
                    gb[r] += g;
                    if *g != 0.0 {
                        for (a, x) in gw[r * fdim..(r + 1) * fdim].iter_mut().zip(phi) {
                            *a += g * x;
                        }
                    }
                }
            }
            et.add(&bt);
            let loss = bt.total / n;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: bi,
                    loss,
                });
            }
            curve.push(loss);
            let lr = cfg.learning_rate / n;
            let wd = cfg.learning_rate * cfg.weight_decay;
            params.w.iter_mut().zip(&gw).for_each(|(w, g)| *w -= lr * g + wd * *w);
            params.b.iter_mut().zip(&gb).for_each(|(b, g)| *b -= lr * g);
            if params.w.iter().chain(&params.b).any(|v| !v.is_finite()) {
                return Err(Error::Divergence {
                    epoch,
                    batch: bi,
                    loss: f64::NAN,
                });
            }
        }
        et.scale(1.0 / samples.len() as f64);
        epoch_terms.push(et);
    }
    Ok(TrainedStudent {
        params,
        loss_curve: curve,
        epoch_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_label() {
        assert_eq!(DistillTerms::NONE.label(), "bc");
        assert_eq!(DistillTerms::ALL.label(), "bc+query+imreward+simreward");
    }

    #[test]
    fn zero_params_give_zero_query() {
        let p = StudentParams::zeros(5, 16, 2, 0.5, 1);
        assert_eq!(p.query(&[1.0; 5]).unwrap(), PlanQuery::zeros(16));
        assert!(p.query(&[1.0; 4]).is_err());
    }
}
