//! Ground-truth trajectory rewards.
//!
//! Five simulation signals are computed against a sequence of world frames:
//! no-collision (NC), drivable-area compliance (DAC), ego progress (EP),
//! a fixed-distance time-to-collision probe (TTC) and comfort (Comf). EP is
//! gated by NC and DAC, TTC by DAC. Together with an imitation target they
//! are fused into a single log-scale score used for candidate selection.

use crate::error::{Error, Result};
use crate::geom::{Footprint, OrientedRect, Pose, Vec2};
use crate::grid::GridGeometry;
use crate::kinematics::{derive_profile, MotionProfile, Trajectory};
use crate::world::WorldFrame;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Inner weights of the progress/TTC/comfort log term.
pub const TTC_WEIGHT: f64 = 5.0;
pub const EP_WEIGHT: f64 = 5.0;
pub const COMF_WEIGHT: f64 = 2.0;

/// Below this batch-maximum progress every non-negative candidate scores 1.
pub const EP_MIN_MAX_PROGRESS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComfortThresholds {
    /// Minimum longitudinal acceleration (m/s²).
    pub a_min: f64,
    /// Maximum longitudinal acceleration (m/s²).
    pub a_max: f64,
    /// Maximum absolute lateral acceleration (m/s²).
    pub a_lat_max: f64,
    /// Maximum jerk magnitude (m/s³).
    pub j_max: f64,
    /// Maximum absolute longitudinal jerk (m/s³).
    pub j_lon_max: f64,
}

impl Default for ComfortThresholds {
    fn default() -> Self {
        Self {
            a_min: -4.05,
            a_max: 2.40,
            a_lat_max: 4.89,
            j_max: 8.37,
            j_lon_max: 4.13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    /// Coefficients of the imitation, NC, DAC and progress/TTC/comfort log terms.
    pub alpha: [f64; 4],
    /// Linear selection weights for imitation and simulation rewards.
    pub w: [f64; 2],
    /// Forward extension of the TTC probe (m).
    pub ttc_extension: f64,
    pub comfort: ComfortThresholds,
    /// Clamp applied before every logarithm.
    pub epsilon_log: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            alpha: [1.0; 4],
            w: [0.5, 0.5],
            ttc_extension: 10.0,
            comfort: ComfortThresholds::default(),
            epsilon_log: 1e-6,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_log > 0.0) {
            return Err(Error::Config("epsilon_log must be > 0".into()));
        }
        if !(self.ttc_extension >= 0.0) {
            return Err(Error::Config("ttc_extension must be >= 0".into()));
        }
        Ok(())
    }
}

/// How the ego is tested against grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionMode {
    /// Oriented ego rectangle at each waypoint.
    #[default]
    Footprint,
    /// Only the cell containing each waypoint.
    Point,
}

/// Argument of the softmax producing the imitation target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ImitationMode {
    /// `-d_i / sum_j d_j`: distances normalised by their total.
    #[default]
    SumNormalized,
    /// `-d_i / sum_j (-d_j)`, taken literally. The negative denominator flips
    /// the sign, so this favours the candidates farthest from the expert.
    Literal,
    /// `-d_i / temperature`.
    Temperature { temperature: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// `argmax w1 * r_im + w2 * r_sim`.
    Linear,
    /// `argmax r_final`.
    #[default]
    Logfuse,
}

/// Which reward signals take part in fusion. Disabling a signal removes its
/// term from the fused score; gating inside EP and TTC is part of those
/// signals' definitions and stays in place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalMask {
    pub im: bool,
    pub nc: bool,
    pub dac: bool,
    pub ep: bool,
    pub ttc: bool,
    pub comf: bool,
}

impl Default for SignalMask {
    fn default() -> Self {
        Self::all()
    }
}

impl SignalMask {
    pub const fn all() -> Self {
        Self {
            im: true,
            nc: true,
            dac: true,
            ep: true,
            ttc: true,
            comf: true,
        }
    }

    pub const fn imitation_only() -> Self {
        Self {
            im: true,
            nc: false,
            dac: false,
            ep: false,
            ttc: false,
            comf: false,
        }
    }

    pub fn any_sim(&self) -> bool {
        self.nc || self.dac || self.ep || self.ttc || self.comf
    }
}

/// Everything that parameterises scoring and selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub weights: RewardWeights,
    pub collision_mode: CollisionMode,
    pub imitation_mode: ImitationMode,
    pub selection_mode: SelectionMode,
    pub signals: SignalMask,
}

/// Per-trajectory reward breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardVector {
    pub r_im: f64,
    pub r_nc: f64,
    pub r_dac: f64,
    pub r_ep: f64,
    pub r_ttc: f64,
    pub r_comf: f64,
    pub r_final: f64,
}

impl RewardVector {
    /// Signals in the fixed head order NC, DAC, TTC, EP, Comf.
    pub fn sim_array(&self) -> [f64; 5] {
        [self.r_nc, self.r_dac, self.r_ttc, self.r_ep, self.r_comf]
    }
}

fn check_horizon(traj: &Trajectory, frames: &[WorldFrame]) -> Result<()> {
    traj.validate()?;
    if frames.len() < traj.steps() {
        return Err(Error::Horizon {
            needed: traj.steps(),
            got: frames.len(),
        });
    }
    Ok(())
}

/// Cells tested for the ego at `pose`.
pub fn ego_cells(geo: &GridGeometry, pose: Pose, footprint: Footprint, mode: CollisionMode) -> Vec<(i64, i64)> {
    match mode {
        CollisionMode::Footprint => geo.footprint_cells(&OrientedRect::new(pose, footprint)),
        CollisionMode::Point => vec![geo.cell_of(pose.position)],
    }
}

/// First step (1-based) at which the ego overlaps occupancy, if any.
pub fn first_collision(
    traj: &Trajectory,
    frames: &[WorldFrame],
    footprint: Footprint,
    mode: CollisionMode,
) -> Result<Option<usize>> {
    check_horizon(traj, frames)?;
    let poses = traj.poses();
    for k in 1..traj.len() {
        let f = &frames[k - 1];
        let hit = ego_cells(&f.geometry, poses[k], footprint, mode)
            .into_iter()
            .any(|(ix, iy)| f.instance_occ.get_signed(ix, iy) == Some(true));
        if hit {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// 1 if the ego overlaps no occupied cell at any step `k = 1..=T`
/// (waypoint `k` against `frames[k - 1]`), else 0.
pub fn nc_reward(traj: &Trajectory, frames: &[WorldFrame], footprint: Footprint, mode: CollisionMode) -> Result<f64> {
    Ok(if first_collision(traj, frames, footprint, mode)?.is_some() {
        0.0
    } else {
        1.0
    })
}

/// 1 if every ego cell at every step is inside the grid and drivable.
pub fn dac_reward(traj: &Trajectory, frames: &[WorldFrame], footprint: Footprint, mode: CollisionMode) -> Result<f64> {
    check_horizon(traj, frames)?;
    let poses = traj.poses();
    for k in 1..traj.len() {
        let f = &frames[k - 1];
        let ok = ego_cells(&f.geometry, poses[k], footprint, mode)
            .into_iter()
            .all(|(ix, iy)| f.drivable.get_signed(ix, iy) == Some(true));
        if !ok {
            return Ok(0.0);
        }
    }
    Ok(1.0)
}

/// Rectangle swept by the ego from its final pose forward by `d_fix`.
pub fn ttc_probe(final_pose: Pose, footprint: Footprint, d_fix: f64) -> OrientedRect {
    let f = Vec2::from_angle(final_pose.heading);
    OrientedRect::new(
        Pose::new(final_pose.position + f * (0.5 * d_fix), final_pose.heading),
        Footprint::new(footprint.length + d_fix, footprint.width),
    )
}

/// TTC before gating: 1 unless a drivable probe cell is occupied in the
/// final frame.
pub fn ttc_raw(traj: &Trajectory, frames: &[WorldFrame], footprint: Footprint, d_fix: f64) -> Result<f64> {
    check_horizon(traj, frames)?;
    if !(d_fix >= 0.0) {
        return Err(Error::Domain(format!("d_fix must be >= 0, got {d_fix}")));
    }
    let last = &frames[traj.steps() - 1];
    let probe = ttc_probe(traj.pose(traj.steps()), footprint, d_fix);
    let risk = last.geometry.footprint_cells(&probe).into_iter().any(|(ix, iy)| {
        last.drivable.get_signed(ix, iy) == Some(true) && last.instance_occ.get_signed(ix, iy) == Some(true)
    });
    Ok(if risk { 0.0 } else { 1.0 })
}

/// Gated TTC reward.
pub fn ttc_reward(traj: &Trajectory, frames: &[WorldFrame], dac: f64, footprint: Footprint, d_fix: f64) -> Result<f64> {
    Ok(ttc_raw(traj, frames, footprint, d_fix)? * dac)
}

/// Longitudinal displacement of the final waypoint along the initial heading.
pub fn progress(traj: &Trajectory) -> f64 {
    let p0 = traj.pose(0);
    (traj.waypoints[traj.steps()] - p0.position).dot(Vec2::from_angle(p0.heading))
}

/// Batch-normalised, gated ego progress.
pub fn ep_reward(candidates: &[Trajectory], nc: &[f64], dac: &[f64]) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate batch"));
    }
    if nc.len() != candidates.len() || dac.len() != candidates.len() {
        return Err(Error::Shape("nc/dac not aligned with candidates".into()));
    }
    let c: Vec<f64> = candidates.iter().map(progress).collect();
    let c_max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(c
        .iter()
        .zip(nc.iter().zip(dac))
        .map(|(&ci, (&n, &d))| ep_raw(ci, c_max) * n * d)
        .collect())
}

/// Piecewise progress score before gating.
pub fn ep_raw(c: f64, c_max: f64) -> f64 {
    if c < 0.0 {
        0.0
    } else if c_max > EP_MIN_MAX_PROGRESS {
        c / c_max
    } else {
        1.0
    }
}

pub fn comf_reward(profile: &MotionProfile, th: &ComfortThresholds) -> f64 {
    let ok = (0..profile.len()).all(|i| {
        profile.a_lon[i] >= th.a_min
            && profile.a_lon[i] <= th.a_max
            && profile.a_lat[i].abs() <= th.a_lat_max
            && profile.jerk_mag[i] <= th.j_max
            && profile.j_lon[i].abs() <= th.j_lon_max
    });
    if ok {
        1.0
    } else {
        0.0
    }
}

/// Mean per-waypoint distance over waypoints `1..` shared by both.
pub fn mean_distance(traj: &Trajectory, expert: &Trajectory) -> f64 {
    let n = traj.len().min(expert.len());
    if n < 2 {
        return 0.0;
    }
    let s: f64 = (1..n).map(|k| (traj.waypoints[k] - expert.waypoints[k]).norm()).sum();
    s / (n - 1) as f64
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

/// Softmax target from distances. All-zero distances give a uniform target.
pub fn imitation_target_from_distances(d: &[f64], mode: ImitationMode) -> Result<Vec<f64>> {
    if d.is_empty() {
        return Err(Error::Empty("candidate batch"));
    }
    let n = d.len();
    let total: f64 = d.iter().sum();
    if d.iter().all(|&x| x == 0.0) {
        return Ok(vec![1.0 / n as f64; n]);
    }
    let logits: Vec<f64> = match mode {
        ImitationMode::SumNormalized => d.iter().map(|&x| -x / total).collect(),
        ImitationMode::Literal => d.iter().map(|&x| -x / -total).collect(),
        ImitationMode::Temperature { temperature } => {
            if !(temperature > 0.0) {
                return Err(Error::Config("imitation temperature must be > 0".into()));
            }
            d.iter().map(|&x| -x / temperature).collect()
        }
    };
    Ok(softmax(&logits))
}

pub fn imitation_target(candidates: &[Trajectory], expert: &Trajectory, mode: ImitationMode) -> Result<Vec<f64>> {
    let d: Vec<f64> = candidates.iter().map(|c| mean_distance(c, expert)).collect();
    imitation_target_from_distances(&d, mode)
}

fn clamp_log(x: f64, eps: f64) -> f64 {
    x.max(eps).ln()
}

/// Imitation part of the fused score.
pub fn im_term(r_im: f64, weights: &RewardWeights, mask: &SignalMask) -> f64 {
    if mask.im {
        weights.alpha[0] * clamp_log(r_im, weights.epsilon_log)
    } else {
        0.0
    }
}

/// Simulation part of the fused score.
pub fn sim_term(rv: &RewardVector, weights: &RewardWeights, mask: &SignalMask) -> f64 {
    let eps = weights.epsilon_log;
    let mut s = 0.0;
    if mask.nc {
        s += weights.alpha[1] * clamp_log(rv.r_nc, eps);
    }
    if mask.dac {
        s += weights.alpha[2] * clamp_log(rv.r_dac, eps);
    }
    if mask.ttc || mask.ep || mask.comf {
        let mut inner = 0.0;
        if mask.ttc {
            inner += TTC_WEIGHT * rv.r_ttc;
        }
        if mask.ep {
            inner += EP_WEIGHT * rv.r_ep;
        }
        if mask.comf {
            inner += COMF_WEIGHT * rv.r_comf;
        }
        s += weights.alpha[3] * clamp_log(inner, eps);
    }
    s
}

/// Fused final reward with every signal enabled.
pub fn fuse_final(rv: &RewardVector, weights: &RewardWeights) -> f64 {
    fuse_masked(rv, weights, &SignalMask::all())
}

pub fn fuse_masked(rv: &RewardVector, weights: &RewardWeights, mask: &SignalMask) -> f64 {
    im_term(rv.r_im, weights, mask) + sim_term(rv, weights, mask)
}

/// Per-candidate selection scores under the configured mode.
pub fn selection_scores(rvs: &[RewardVector], cfg: &RewardConfig) -> Vec<f64> {
    rvs.iter()
        .map(|rv| match cfg.selection_mode {
            SelectionMode::Logfuse => rv.r_final,
            SelectionMode::Linear => {
                let im = if cfg.signals.im { rv.r_im } else { 0.0 };
                cfg.weights.w[0] * im + cfg.weights.w[1] * sim_term(rv, &cfg.weights, &cfg.signals)
            }
        })
        .collect()
}

/// Index of the first maximum.
pub fn argmax_first(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Best candidate; ties go to the lowest index.
pub fn select_best(rvs: &[RewardVector], cfg: &RewardConfig) -> Result<usize> {
    argmax_first(&selection_scores(rvs, cfg)).ok_or(Error::Empty("candidate set"))
}

/// Simulation signals of one trajectory against its frames, before the
/// batch-level EP normalisation: `(nc, dac, ttc, progress, comf)`.
pub fn sim_signals(
    traj: &Trajectory,
    frames: &[WorldFrame],
    footprint: Footprint,
    cfg: &RewardConfig,
) -> Result<(f64, f64, f64, f64, f64)> {
    let nc = nc_reward(traj, frames, footprint, cfg.collision_mode)?;
    let dac = dac_reward(traj, frames, footprint, cfg.collision_mode)?;
    let ttc = ttc_reward(traj, frames, dac, footprint, cfg.weights.ttc_extension)?;
    let comf = comf_reward(&derive_profile(traj)?, &cfg.weights.comfort);
    Ok((nc, dac, ttc, progress(traj), comf))
}

/// Scores a candidate batch. `frames[i]` is the interaction future for
/// candidate `i`. Candidates are evaluated in parallel; results keep input
/// order.
pub fn score_batch(
    candidates: &[Trajectory],
    frames: &[&[WorldFrame]],
    expert: &Trajectory,
    footprint: Footprint,
    cfg: &RewardConfig,
) -> Result<Vec<RewardVector>> {
    check_batch(candidates, frames)?;
    let sims: Vec<(f64, f64, f64, f64, f64)> = candidates
        .par_iter()
        .zip(frames.par_iter())
        .map(|(c, f)| sim_signals(c, f, footprint, cfg))
        .collect::<Result<_>>()?;
    assemble_scores(candidates, &sims, expert, cfg)
}

/// Same as [`score_batch`] on the calling thread only.
pub fn score_batch_seq(
    candidates: &[Trajectory],
    frames: &[&[WorldFrame]],
    expert: &Trajectory,
    footprint: Footprint,
    cfg: &RewardConfig,
) -> Result<Vec<RewardVector>> {
    check_batch(candidates, frames)?;
    let sims: Vec<(f64, f64, f64, f64, f64)> = candidates
        .iter()
        .zip(frames)
        .map(|(c, f)| sim_signals(c, f, footprint, cfg))
        .collect::<Result<_>>()?;
    assemble_scores(candidates, &sims, expert, cfg)
}

fn check_batch(candidates: &[Trajectory], frames: &[&[WorldFrame]]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate batch"));
    }
    if frames.len() != candidates.len() {
        return Err(Error::Shape(format!(
            "{} frame sequences for {} candidates",
            frames.len(),
            candidates.len()
        )));
    }
    Ok(())
}

/// Reward vectors from precomputed per-candidate simulation signals
/// (`sim_signals` output) plus the batch-level imitation and EP terms.
pub fn assemble_scores(
    candidates: &[Trajectory],
    sims: &[(f64, f64, f64, f64, f64)],
    expert: &Trajectory,
    cfg: &RewardConfig,
) -> Result<Vec<RewardVector>> {
    let im = imitation_target(candidates, expert, cfg.imitation_mode)?;
    let c_max = sims.iter().map(|s| s.3).fold(f64::NEG_INFINITY, f64::max);
    Ok(sims
        .iter()
        .zip(im)
        .map(|(&(nc, dac, ttc, prog, comf), r_im)| {
            let mut rv = RewardVector {
                r_im,
                r_nc: nc,
                r_dac: dac,
                r_ep: ep_raw(prog, c_max) * nc * dac,
                r_ttc: ttc,
                r_comf: comf,
                r_final: 0.0,
            };
            rv.r_final = fuse_masked(&rv, &cfg.weights, &cfg.signals);
            rv
        })
        .collect())
}
