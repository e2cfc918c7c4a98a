//! Learned reward model: linear imitation and simulation heads over
//! handcrafted trajectory/world interaction features, supervised by the
//! reward engine with cross-entropy (imitation) and binary cross-entropy
//! (simulation) losses.

use crate::error::{Error, Result};
use crate::geom::{Footprint, Vec2};
use crate::grid::{Grid, GridGeometry};
use crate::kinematics::{derive_profile, Trajectory};
use crate::reward::{self, softmax, ComfortThresholds, RewardVector, RewardWeights, SignalMask};
use crate::rng::{stream, Stream};
use crate::world::{encode_observation, nearest_ahead, WorldConfig, WorldFrame};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub const PARAMS_SCHEMA_VERSION: u32 = 1;
/// Order of the simulation head outputs.
pub const SIGNAL_ORDER: [&str; 5] = ["nc", "dac", "ttc", "ep", "comf"];
pub const N_SIGNALS: usize = 5;

/// Clamp used inside both losses.
const LOSS_EPS: f64 = 1e-12;
/// Overlap counts saturate here before scaling.
const OVERLAP_CAP: f64 = 5.0;

/// Interaction feature vector for one (trajectory, future) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionFeatures(pub Vec<f64>);

impl InteractionFeatures {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub clearance_cap: f64,
    pub ttc_extension: f64,
    pub comfort: ComfortThresholds,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            clearance_cap: 10.0,
            ttc_extension: 10.0,
            comfort: ComfortThresholds::default(),
        }
    }
}

/// Feature dimension for a trajectory of `steps` steps.
pub fn feature_dim(steps: usize) -> usize {
    // progress, lateral, per-step clearance, min clearance, min drivable
    // margin, occupied overlap, off-road overlap, probe overlap, five
    // kinematic extremes, world summary.
    2 + steps + 1 + 1 + 3 + 5 + crate::world::SUMMARY_DIM
}

/// Exact Euclidean distance transform (in cells) to the nearest `true` cell;
/// `f64::INFINITY` where the grid has no `true` cell.
pub fn distance_transform(grid: &Grid) -> Vec<f64> {
    let (w, h) = grid.dims();
    // Large finite stand-in for infinity; keeps the parabola arithmetic exact.
    let inf = 1e10;
    let mut f = vec![0.0; w * h];
    for iy in 0..h {
        for ix in 0..w {
            f[iy * w + ix] = if grid.get(ix, iy) { 0.0 } else { inf };
        }
    }
    // Columns, then rows.
    let mut buf = vec![0.0; w.max(h)];
    let mut out = vec![0.0; w.max(h)];
    for ix in 0..w {
        for iy in 0..h {
            buf[iy] = f[iy * w + ix];
        }
        edt_1d(&buf[..h], &mut out[..h]);
        for iy in 0..h {
            f[iy * w + ix] = out[iy];
        }
    }
    for iy in 0..h {
        buf[..w].copy_from_slice(&f[iy * w..iy * w + w]);
        edt_1d(&buf[..w], &mut out[..w]);
        f[iy * w..iy * w + w].copy_from_slice(&out[..w]);
    }
    f.into_iter()
        .map(|d| if d >= inf * 0.5 { f64::INFINITY } else { d.sqrt() })
        .collect()
}

/// 1-D squared distance transform by lower envelope of parabolas.
fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        d[q] = (q as f64 - p as f64).powi(2) + f[p];
    }
}

/// Distance (m) from the centre of the cell containing `p` to the nearest
/// set cell centre, capped. Off-grid query cells are measured directly.
fn clearance_at(geo: &GridGeometry, grid: &Grid, dt: &[f64], p: Vec2, cap: f64) -> f64 {
    let (ix, iy) = geo.cell_of(p);
    let d = if geo.in_bounds(ix, iy) {
        dt[iy as usize * geo.width + ix as usize] * geo.resolution
    } else {
        let c = Vec2::new(
            geo.origin.x + (ix as f64 + 0.5) * geo.resolution,
            geo.origin.y + (iy as f64 + 0.5) * geo.resolution,
        );
        grid.iter_set()
            .map(|(x, y)| (geo.cell_center(x, y) - c).norm())
            .fold(f64::INFINITY, f64::min)
    };
    d.min(cap)
}

/// Nearest-obstacle clearance of waypoint `k` (1-based) against `frames[k-1]`.
pub fn step_clearances(traj: &Trajectory, frames: &[WorldFrame], cap: f64) -> Result<Vec<f64>> {
    if frames.len() < traj.steps() {
        return Err(Error::Horizon {
            needed: traj.steps(),
            got: frames.len(),
        });
    }
    Ok((1..traj.len())
        .map(|k| {
            let f = &frames[k - 1];
            let dt = distance_transform(&f.instance_occ);
            clearance_at(&f.geometry, &f.instance_occ, &dt, traj.waypoints[k], cap)
        })
        .collect())
}

/// Builds the interaction features for one trajectory and its future frames.
pub fn featurize(traj: &Trajectory, frames: &[WorldFrame], footprint: Footprint, cfg: &FeatureConfig) -> Result<InteractionFeatures> {
    traj.validate()?;
    let steps = traj.steps();
    if frames.len() < steps {
        return Err(Error::Horizon {
            needed: steps,
            got: frames.len(),
        });
    }
    let cap = cfg.clearance_cap;
    let mut x = Vec::with_capacity(feature_dim(steps));

    let p0 = traj.pose(0);
    let fwd = Vec2::from_angle(p0.heading);
    let disp = traj.waypoints[steps] - p0.position;
    x.push(disp.dot(fwd) / 10.0);
    x.push(disp.dot(fwd.perp()) / 5.0);

    let clear = step_clearances(traj, frames, cap)?;
    x.extend(clear.iter().map(|c| c / cap));
    x.push(clear.iter().copied().fold(cap, f64::min) / cap);

    // Drivable margin: distance to the nearest non-drivable cell.
    let geo = frames[0].geometry;
    let mut nondrivable = frames[0].drivable.clone();
    for iy in 0..geo.height {
        for ix in 0..geo.width {
            nondrivable.set(ix, iy, !frames[0].drivable.get(ix, iy));
        }
    }
    let nd_dt = distance_transform(&nondrivable);
    let margin = (1..traj.len())
        .map(|k| {
            let (ix, iy) = geo.cell_of(traj.waypoints[k]);
            if !geo.in_bounds(ix, iy) {
                return 0.0;
            }
            // Grid border counts as non-drivable.
            let border = [ix, iy, geo.width as i64 - 1 - ix, geo.height as i64 - 1 - iy]
                .into_iter()
                .min()
                .unwrap() as f64
                + 1.0;
            (nd_dt[iy as usize * geo.width + ix as usize].min(border) * geo.resolution).min(cap)
        })
        .fold(cap, f64::min);
    x.push(margin / cap);

    let poses = traj.poses();
    let mut occ = 0usize;
    let mut off = 0usize;
    for k in 1..traj.len() {
        let f = &frames[k - 1];
        for (ix, iy) in reward::ego_cells(&f.geometry, poses[k], footprint, reward::CollisionMode::Footprint) {
            if f.instance_occ.get_signed(ix, iy) == Some(true) {
                occ += 1;
            }
            if f.drivable.get_signed(ix, iy) != Some(true) {
                off += 1;
            }
        }
    }
    x.push((occ as f64).min(OVERLAP_CAP) / OVERLAP_CAP);
    x.push((off as f64).min(OVERLAP_CAP) / OVERLAP_CAP);
    let last = &frames[steps - 1];
    let probe = reward::ttc_probe(poses[steps], footprint, cfg.ttc_extension);
    let probe_hits = last
        .geometry
        .footprint_cells(&probe)
        .into_iter()
        .filter(|&(ix, iy)| last.drivable.get_signed(ix, iy) == Some(true) && last.instance_occ.get_signed(ix, iy) == Some(true))
        .count();
    x.push((probe_hits as f64).min(OVERLAP_CAP) / OVERLAP_CAP);

    let prof = derive_profile(traj)?;
    let th = &cfg.comfort;
    let max_of = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_of = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let abs_max = |v: &[f64]| v.iter().map(|a| a.abs()).fold(0.0, f64::max);
    x.push(min_of(&prof.a_lon) / th.a_min.abs());
    x.push(max_of(&prof.a_lon) / th.a_max);
    x.push(abs_max(&prof.a_lat) / th.a_lat_max);
    x.push(max_of(&prof.jerk_mag) / th.j_max);
    x.push(abs_max(&prof.j_lon) / th.j_lon_max);

    let wcfg = WorldConfig {
        clearance_cap: cap,
        ..WorldConfig::default()
    };
    let mut summary = encode_observation(last, None, &wcfg).summary;
    summary[4] = nearest_ahead(last, poses[steps], &wcfg) / cap;
    x.extend_from_slice(&summary);

    debug_assert_eq!(x.len(), feature_dim(steps));
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite interaction feature".into()));
    }
    Ok(InteractionFeatures(x))
}

/// Linear reward heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardHeadParams {
    pub dim: usize,
    pub im_weights: Vec<f64>,
    pub im_bias: f64,
    /// One row per signal in [`SIGNAL_ORDER`].
    pub sim_weights: Vec<Vec<f64>>,
    pub sim_bias: [f64; N_SIGNALS],
}

impl RewardHeadParams {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            im_weights: vec![0.0; dim],
            im_bias: 0.0,
            sim_weights: vec![vec![0.0; dim]; N_SIGNALS],
            sim_bias: [0.0; N_SIGNALS],
        }
    }

    /// Flattened parameter vector: imitation weights, imitation bias, then
    /// each simulation row followed by its bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.im_weights.clone();
        v.push(self.im_bias);
        for s in 0..N_SIGNALS {
            v.extend_from_slice(&self.sim_weights[s]);
            v.push(self.sim_bias[s]);
        }
        v
    }

    pub fn from_flat(dim: usize, v: &[f64]) -> Result<Self> {
        if v.len() != (dim + 1) * (1 + N_SIGNALS) {
            return Err(Error::Shape(format!("flat params of length {} for dim {dim}", v.len())));
        }
        let mut p = Self::zeros(dim);
        p.im_weights.copy_from_slice(&v[..dim]);
        p.im_bias = v[dim];
        for s in 0..N_SIGNALS {
            let o = (dim + 1) * (1 + s);
            p.sim_weights[s].copy_from_slice(&v[o..o + dim]);
            p.sim_bias[s] = v[o + dim];
        }
        Ok(p)
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    schema_version: u32,
    feature_dim: usize,
    signal_order: Vec<String>,
    params: RewardHeadParams,
}

pub fn params_to_json(p: &RewardHeadParams) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ParamsFile {
        schema_version: PARAMS_SCHEMA_VERSION,
        feature_dim: p.dim,
        signal_order: SIGNAL_ORDER.iter().map(|s| s.to_string()).collect(),
        params: p.clone(),
    })?)
}

pub fn params_from_json(s: &str) -> Result<RewardHeadParams> {
    let f: ParamsFile = serde_json::from_str(s)?;
    if f.schema_version != PARAMS_SCHEMA_VERSION {
        return Err(Error::Schema(format!("reward params schema {} (expected {PARAMS_SCHEMA_VERSION})", f.schema_version)));
    }
    if f.signal_order != SIGNAL_ORDER {
        return Err(Error::Schema(format!("unexpected signal order {:?}", f.signal_order)));
    }
    if f.feature_dim != f.params.dim
        || f.params.im_weights.len() != f.params.dim
        || f.params.sim_weights.len() != N_SIGNALS
        || f.params.sim_weights.iter().any(|r| r.len() != f.params.dim)
    {
        return Err(Error::Schema("reward params shape does not match feature_dim".into()));
    }
    Ok(f.params)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Head outputs for a candidate batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub r_im: Vec<f64>,
    pub r_sim: Vec<[f64; N_SIGNALS]>,
}

pub fn predict(params: &RewardHeadParams, batch: &[InteractionFeatures]) -> Result<Prediction> {
    if batch.is_empty() {
        return Err(Error::Empty("feature batch"));
    }
    for f in batch {
        if f.dim() != params.dim {
            return Err(Error::Shape(format!("feature dim {} vs head dim {}", f.dim(), params.dim)));
        }
    }
    let logits: Vec<f64> = batch.iter().map(|f| dot(&params.im_weights, &f.0) + params.im_bias).collect();
    let r_sim = batch
        .iter()
        .map(|f| {
            let mut o = [0.0; N_SIGNALS];
            for s in 0..N_SIGNALS {
                o[s] = sigmoid(dot(&params.sim_weights[s], &f.0) + params.sim_bias[s]);
            }
            o
        })
        .collect();
    Ok(Prediction {
        r_im: softmax(&logits),
        r_sim,
    })
}

/// Cross-entropy of `pred` against the target distribution.
pub fn loss_im(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!("{} predictions vs {} targets", pred.len(), target.len())));
    }
    for (name, v) in [("prediction", pred), ("target", target)] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!("{name} sums to {s}, expected 1")));
        }
    }
    Ok(-pred
        .iter()
        .zip(target)
        .map(|(p, t)| t * p.max(LOSS_EPS).ln())
        .sum::<f64>())
}

/// Mean binary cross-entropy over the five signals (soft targets allowed).
pub fn loss_sim(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape(format!("{} predictions vs {} targets", pred.len(), target.len())));
    }
    if let Some(t) = target.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Domain(format!("target {t} outside [0, 1]")));
    }
    if let Some(p) = pred.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("prediction {p} outside [0, 1]")));
    }
    let s: f64 = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| -(t * p.max(LOSS_EPS).ln() + (1.0 - t) * (1.0 - p).max(LOSS_EPS).ln()))
        .sum();
    Ok(s / pred.len() as f64)
}

/// Supervision for one scenario's candidate batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSample {
    pub features: Vec<InteractionFeatures>,
    pub im_target: Vec<f64>,
    /// Per candidate, in [`SIGNAL_ORDER`].
    pub sim_target: Vec<[f64; N_SIGNALS]>,
}

impl RewardSample {
    pub fn from_engine(features: Vec<InteractionFeatures>, labels: &[RewardVector]) -> Self {
        Self {
            features,
            im_target: labels.iter().map(|r| r.r_im).collect(),
            sim_target: labels.iter().map(|r| r.sim_array()).collect(),
        }
    }
}

/// Loss of one sample: imitation cross-entropy plus the mean simulation BCE
/// over candidates.
pub fn sample_loss(params: &RewardHeadParams, s: &RewardSample) -> Result<f64> {
    let p = predict(params, &s.features)?;
    let mut l = loss_im(&p.r_im, &s.im_target)?;
    let n = s.features.len() as f64;
    for (pr, t) in p.r_sim.iter().zip(&s.sim_target) {
        l += loss_sim(pr, t)? / n;
    }
    Ok(l)
}

/// Analytic gradient of [`sample_loss`] in [`RewardHeadParams::to_flat`]
/// layout.
pub fn sample_grad(params: &RewardHeadParams, s: &RewardSample) -> Result<Vec<f64>> {
    let d = params.dim;
    let p = predict(params, &s.features)?;
    let mut g = RewardHeadParams::zeros(d);
    for (i, f) in s.features.iter().enumerate() {
        let e = p.r_im[i] - s.im_target[i];
        for j in 0..d {
            g.im_weights[j] += e * f.0[j];
        }
        g.im_bias += e;
    }
    let scale = 1.0 / (s.features.len() as f64 * N_SIGNALS as f64);
    for (i, f) in s.features.iter().enumerate() {
        for k in 0..N_SIGNALS {
            let e = (p.r_sim[i][k] - s.sim_target[i][k]) * scale;
            for j in 0..d {
                g.sim_weights[k][j] += e * f.0[j];
            }
            g.sim_bias[k] += e;
        }
    }
    Ok(g.to_flat())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardTrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for RewardTrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            batch_size: 16,
            epochs: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRewardModel {
    pub params: RewardHeadParams,
    /// Mean training loss after every mini-batch step.
    pub loss_curve: Vec<f64>,
}

/// Mini-batch gradient descent from zero-initialised heads.
pub fn train_reward_model(dataset: &[RewardSample], cfg: &RewardTrainConfig) -> Result<TrainedRewardModel> {
    let first = dataset.first().ok_or(Error::Empty("reward dataset"))?;
    let dim = first.features.first().ok_or(Error::Empty("candidate features"))?.dim();
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch_size must be > 0".into()));
    }
    let mut params = RewardHeadParams::zeros(dim);
    let mut flat = params.to_flat();
    let mut rng = stream(cfg.seed, Stream::Sgd);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut curve = Vec::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let mut grad = vec![0.0; flat.len()];
            let mut loss = 0.0;
            for &i in chunk {
                loss += sample_loss(&params, &dataset[i])?;
                for (g, x) in grad.iter_mut().zip(sample_grad(&params, &dataset[i])?) {
                    *g += x;
                }
            }
            let n = chunk.len() as f64;
            loss /= n;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, batch: b, loss });
            }
            curve.push(loss);
            for (w, g) in flat.iter_mut().zip(&grad) {
                *w -= cfg.learning_rate * g / n;
            }
            params = RewardHeadParams::from_flat(dim, &flat)?;
            if !params.is_finite() {
                return Err(Error::Divergence { epoch, batch: b, loss: f64::NAN });
            }
        }
    }
    Ok(TrainedRewardModel { params, loss_curve: curve })
}

/// Reward vectors from the learned heads. The fused score uses the same
/// log fusion as the engine, applied to the predicted probabilities.
pub fn learned_reward_vectors(
    params: &RewardHeadParams,
    batch: &[InteractionFeatures],
    weights: &RewardWeights,
    mask: &SignalMask,
) -> Result<Vec<RewardVector>> {
    let p = predict(params, batch)?;
    Ok(p.r_im
        .iter()
        .zip(&p.r_sim)
        .map(|(&r_im, s)| {
            let mut rv = RewardVector {
                r_im,
                r_nc: s[0],
                r_dac: s[1],
                r_ttc: s[2],
                r_ep: s[3],
                r_comf: s[4],
                r_final: 0.0,
            };
            rv.r_final = reward::fuse_masked(&rv, weights, mask);
            rv
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edt_matches_brute_force_small() {
        let mut g = Grid::new(7, 5, false);
        g.set(1, 1, true);
        g.set(5, 3, true);
        let d = distance_transform(&g);
        for iy in 0..5 {
            for ix in 0..7 {
                let b = g
                    .iter_set()
                    .map(|(x, y)| ((x as f64 - ix as f64).powi(2) + (y as f64 - iy as f64).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                assert!((d[iy * 7 + ix] - b).abs() < 1e-12);
            }
        }
        assert!(distance_transform(&Grid::new(3, 3, false)).iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn zero_params_predict_uniform() {
        let p = RewardHeadParams::zeros(3);
        let b = vec![InteractionFeatures(vec![1.0, 2.0, 3.0]); 4];
        let out = predict(&p, &b).unwrap();
        assert!(out.r_im.iter().all(|&r| (r - 0.25).abs() < 1e-15));
        assert!(out.r_sim.iter().flatten().all(|&r| r == 0.5));
        let one = predict(&p, &b[..1]).unwrap();
        assert_eq!(one.r_im, vec![1.0]);
        assert!(predict(&p, &[InteractionFeatures(vec![1.0])]).is_err());
        assert!(predict(&p, &[]).is_err());
    }

    #[test]
    fn loss_closed_forms() {
        assert!(loss_im(&[1.0, 0.0], &[1.0, 0.0]).unwrap().abs() < 1e-12);
        let n = 4;
        let l = loss_im(&vec![0.25; n], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((l - (n as f64).ln()).abs() < 1e-12);
        assert!(loss_im(&[0.5, 0.5], &[1.0]).is_err());
        let b = loss_sim(&[0.5; 5], &[1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((b - 2f64.ln()).abs() < 1e-12);
        assert!(loss_sim(&[1.0, 0.0, 1.0, 0.0, 1.0], &[1.0, 0.0, 1.0, 0.0, 1.0]).unwrap() < 1e-10);
        assert!(loss_sim(&[0.5; 5], &[1.5, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn params_json_round_trip() {
        let mut p = RewardHeadParams::zeros(3);
        p.sim_weights[2][1] = 0.25;
        p.im_bias = -1.5;
        let s = params_to_json(&p).unwrap();
        assert_eq!(params_from_json(&s).unwrap(), p);
        let bad = s.replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(matches!(params_from_json(&bad), Err(Error::Schema(_))));
    }

    #[test]
    fn lr_zero_leaves_params() {
        let s = RewardSample {
            features: vec![InteractionFeatures(vec![1.0, 0.0]), InteractionFeatures(vec![0.0, 1.0])],
            im_target: vec![0.7, 0.3],
            sim_target: vec![[1.0; 5], [0.0; 5]],
        };
        let cfg = RewardTrainConfig {
            learning_rate: 0.0,
            epochs: 3,
            ..Default::default()
        };
        let m = train_reward_model(&[s], &cfg).unwrap();
        assert_eq!(m.params, RewardHeadParams::zeros(2));
        assert!(train_reward_model(&[], &cfg).is_err());
    }
}
