//! The eleven acceptance criteria. Each check returns whether it passed and
//! the measured numbers behind the verdict.

use crate::oracle::{dac_oracle, nc_oracle, random_instance, ttc_oracle};
use crate::run::{run_pipeline, PipelineRun};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use std::time::{Duration, Instant};
use wpt::config::{RewardSource, RunConfig};
use wpt::eval::{generate_suite, open_loop_eval, run_ablation, Axis, Suite, TeacherPlanner};
use wpt::geom::Vec2;
use wpt::kinematics::{derive_profile, Trajectory};
use wpt::learned::{loss_im, loss_sim, predict, sample_grad, InteractionFeatures, RewardHeadParams, RewardSample, N_SIGNALS};
use wpt::pipeline::{make_teacher, with_threads};
use wpt::policy::{student_plan, Student};
use wpt::reward::{
    comf_reward, dac_reward, imitation_target_from_distances, nc_reward, score_batch, ttc_reward, CollisionMode,
    ComfortThresholds, ImitationMode, RewardConfig,
};
use wpt::world::{MicroWorld, Scenario, WorldFrame};
use wpt::Result;

#[derive(Debug, Clone)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Lazily built inputs shared by several criteria.
pub struct Context {
    pub cfg: RunConfig,
    suite: OnceLock<Suite>,
    pipeline: OnceLock<std::result::Result<PipelineRun, String>>,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Self {
        Self {
            cfg,
            suite: OnceLock::new(),
            pipeline: OnceLock::new(),
        }
    }

    pub fn suite(&self) -> Result<&Suite> {
        if let Some(s) = self.suite.get() {
            return Ok(s);
        }
        let s = generate_suite(&self.cfg.suite, self.cfg.seed)?;
        Ok(self.suite.get_or_init(|| s))
    }

    /// Pipeline run on one worker thread.
    fn pipeline(&self) -> std::result::Result<&PipelineRun, String> {
        self.pipeline
            .get_or_init(|| run_pipeline(&self.cfg, 1).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| e.clone())
    }
}

pub const NAMES: [&str; 11] = [
    "reward-oracle equivalence",
    "comfort threshold fidelity",
    "EP/TTC gating",
    "imitation target",
    "gradient checks",
    "safe-selection dominance",
    "teacher vs random selection",
    "distillation ablation",
    "drop-one reward ablation",
    "student efficiency",
    "determinism",
];

pub fn run(id: usize, ctx: &Context) -> Result<Check> {
    match id {
        1 => reward_oracles(),
        2 => comfort_thresholds(),
        3 => gating(),
        4 => imitation_target(),
        5 => gradient_checks(),
        6 => safe_selection(ctx),
        7 => teacher_vs_random(ctx),
        8 => distillation(ctx),
        9 => drop_one(ctx),
        10 => efficiency(ctx),
        11 => determinism(ctx),
        _ => Ok(Check::new(false, format!("no criterion {id}"))),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

pub fn reward_oracles() -> Result<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 1000;
    let mut mismatches = [0usize; 3];
    let mut zeros = [0usize; 3];
    for _ in 0..n {
        let inst = random_instance(&mut rng);
        let (t, f, fp) = (&inst.traj, &inst.frames, inst.footprint);
        let nc = nc_reward(t, f, fp, CollisionMode::Footprint)?;
        let dac = dac_reward(t, f, fp, CollisionMode::Footprint)?;
        let ttc = ttc_reward(t, f, dac, fp, inst.d_fix)?;
        let want = [nc_oracle(t, f, fp), dac_oracle(t, f, fp), ttc_oracle(t, f, fp, inst.d_fix)];
        for (i, (got, w)) in [nc, dac, ttc].into_iter().zip(want).enumerate() {
            mismatches[i] += usize::from(got != w);
            zeros[i] += usize::from(w == 0.0);
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches == [0, 0, 0] && elapsed < Duration::from_secs(30);
    Ok(Check::new(
        ok,
        format!(
            "{n} instances each; mismatches NC {} DAC {} TTC {}; oracle zeros {}/{}/{}; {:.2} s",
            mismatches[0],
            mismatches[1],
            mismatches[2],
            zeros[0],
            zeros[1],
            zeros[2],
            secs(elapsed)
        ),
    ))
}

/// Trajectory along +x with fixed heading, sampled from `pos(t)`.
fn fixture(steps: usize, dt: f64, pos: impl Fn(f64) -> Vec2) -> Result<Trajectory> {
    let pts: Vec<Vec2> = (0..=steps).map(|k| pos(k as f64 * dt)).collect();
    Trajectory::with_headings(pts, dt, vec![0.0; steps + 1])
}

/// Fixtures exercising one threshold at `value`, every other quantity
/// strictly inside its limit.
fn comfort_fixture(which: usize, value: f64) -> Result<Trajectory> {
    match which {
        // Constant longitudinal acceleration.
        0 | 1 => fixture(6, 0.5, |t| Vec2::new(20.0 * t + 0.5 * value * t * t, 0.0)),
        // Constant lateral acceleration.
        2 => fixture(4, 0.5, |t| Vec2::new(30.0 * t, 0.5 * value * t * t)),
        // Constant lateral jerk, acceleration centred on zero.
        3 => fixture(4, 0.25, |t| {
            let s = t - 0.5;
            Vec2::new(10.0 * t, value * (s * s * s + 0.125) / 6.0)
        }),
        // Constant longitudinal jerk.
        _ => fixture(6, 0.25, |t| {
            let s = t - 0.95;
            Vec2::new(10.0 * t + value * (s * s * s + 0.95f64.powi(3)) / 6.0, 0.0)
        }),
    }
}

pub fn comfort_thresholds() -> Result<Check> {
    let th = ComfortThresholds::default();
    let limits = [
        ("a_min", th.a_min),
        ("a_max", th.a_max),
        ("a_lat_max", th.a_lat_max),
        ("j_max", th.j_max),
        ("j_lon_max", th.j_lon_max),
    ];
    let mut failures = Vec::new();
    for (i, (name, limit)) in limits.iter().enumerate() {
        let inside = comf_reward(&derive_profile(&comfort_fixture(i, limit * 0.99)?)?, &th);
        let outside = comf_reward(&derive_profile(&comfort_fixture(i, limit * 1.01)?)?, &th);
        if inside != 1.0 || outside != 0.0 {
            failures.push(format!("{name}: -1% -> {inside}, +1% -> {outside}"));
        }
    }
    let ok = failures.is_empty();
    let detail = if ok {
        "all five thresholds flip 1 -> 0 between 0.99x and 1.01x".to_string()
    } else {
        failures.join("; ")
    };
    Ok(Check::new(ok, detail))
}

pub fn gating() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = RewardConfig::default();
    let (mut violations, mut nc0, mut dac0, mut candidates) = (0usize, 0usize, 0usize, 0usize);
    for _ in 0..500 {
        let n = rng.random_range(2..=12usize);
        let base = random_instance(&mut rng);
        let steps = base.traj.steps();
        let mut cands = Vec::with_capacity(n);
        let mut futures: Vec<Vec<WorldFrame>> = Vec::with_capacity(n);
        while cands.len() < n {
            let inst = random_instance(&mut rng);
            if inst.traj.steps() == steps {
                cands.push(inst.traj);
                futures.push(inst.frames);
            } else if inst.traj.steps() > steps {
                cands.push(inst.traj.prefix(steps)?);
                futures.push(inst.frames);
            }
        }
        let refs: Vec<&[WorldFrame]> = futures.iter().map(|f| f.as_slice()).collect();
        let rvs = score_batch(&cands, &refs, &base.traj, base.footprint, &cfg)?;
        for rv in &rvs {
            candidates += 1;
            nc0 += usize::from(rv.r_nc == 0.0);
            dac0 += usize::from(rv.r_dac == 0.0);
            if (rv.r_nc == 0.0 || rv.r_dac == 0.0) && rv.r_ep != 0.0 {
                violations += 1;
            }
            if rv.r_dac == 0.0 && rv.r_ttc != 0.0 {
                violations += 1;
            }
        }
    }
    Ok(Check::new(
        violations == 0,
        format!("500 batches, {candidates} candidates ({nc0} with NC=0, {dac0} with DAC=0); {violations} violations"),
    ))
}

pub fn imitation_target() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let modes = [ImitationMode::SumNormalized, ImitationMode::Temperature { temperature: 1.0 }];
    let (mut sum_err, mut argmax_bad, mut fixtures) = (0.0f64, 0usize, 0usize);
    for _ in 0..1000 {
        let n = rng.random_range(2..=16usize);
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let min = d.iter().copied().fold(f64::INFINITY, f64::min);
        let unique = d.iter().filter(|&&x| x == min).count() == 1;
        for mode in modes {
            let p = imitation_target_from_distances(&d, mode)?;
            sum_err = sum_err.max((p.iter().sum::<f64>() - 1.0).abs());
            if unique {
                fixtures += 1;
                let am = p
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
                    .0;
                let dm = d.iter().position(|&x| x == min).unwrap_or(0);
                argmax_bad += usize::from(am != dm);
            }
        }
    }
    let p = imitation_target_from_distances(&[1.0, 2.0, 3.0], ImitationMode::Temperature { temperature: 1.0 })?;
    let want = [0.6652, 0.2447, 0.0900];
    let case_err = p.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ok = sum_err <= 1e-9 && argmax_bad == 0 && case_err <= 1e-4;
    Ok(Check::new(
        ok,
        format!(
            "max |sum-1| {sum_err:.1e}; argmax != argmin on {argmax_bad}/{fixtures} fixtures; d=(1,2,3) -> ({:.4}, {:.4}, {:.4})",
            p[0], p[1], p[2]
        ),
    ))
}

fn random_sample(rng: &mut ChaCha8Rng, dim: usize) -> RewardSample {
    let n = rng.random_range(2..=8usize);
    let features = (0..n)
        .map(|_| InteractionFeatures((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let z: f64 = raw.iter().sum();
    RewardSample {
        features,
        im_target: raw.iter().map(|r| r / z).collect(),
        sim_target: (0..n).map(|_| std::array::from_fn(|_| rng.random::<f64>())).collect(),
    }
}

fn im_loss(p: &RewardHeadParams, s: &RewardSample) -> Result<f64> {
    loss_im(&predict(p, &s.features)?.r_im, &s.im_target)
}

fn sim_loss(p: &RewardHeadParams, s: &RewardSample) -> Result<f64> {
    let pred = predict(p, &s.features)?;
    let n = s.features.len() as f64;
    let mut l = 0.0;
    for (pr, t) in pred.r_sim.iter().zip(&s.sim_target) {
        l += loss_sim(pr, t)? / n;
    }
    Ok(l)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

pub fn gradient_checks() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dim = 8;
    let h = 1e-5;
    let im_len = dim + 1;
    let (mut worst_im, mut worst_sim) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let s = random_sample(&mut rng, dim);
        let flat: Vec<f64> = (0..im_len + N_SIGNALS * (dim + 1))
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let params = RewardHeadParams::from_flat(dim, &flat)?;
        let analytic = sample_grad(&params, &s)?;
        let mut num = vec![0.0; flat.len()];
        for j in 0..flat.len() {
            let mut up = flat.clone();
            let mut dn = flat.clone();
            up[j] += h;
            dn[j] -= h;
            let (pu, pd) = (RewardHeadParams::from_flat(dim, &up)?, RewardHeadParams::from_flat(dim, &dn)?);
            let f = if j < im_len { im_loss } else { sim_loss };
            num[j] = (f(&pu, &s)? - f(&pd, &s)?) / (2.0 * h);
        }
        worst_im = worst_im.max(rel_err(&analytic[..im_len], &num[..im_len]));
        worst_sim = worst_sim.max(rel_err(&analytic[im_len..], &num[im_len..]));
    }
    Ok(Check::new(
        worst_im <= 1e-4 && worst_sim <= 1e-4,
        format!("20 points each; worst relative error loss_im {worst_im:.2e}, loss_sim {worst_sim:.2e}"),
    ))
}

pub fn safe_selection(ctx: &Context) -> Result<Check> {
    let suite = ctx.suite()?;
    let world = MicroWorld::new(ctx.cfg.world_config());
    let teacher = make_teacher(&ctx.cfg, &world, None)?;
    let (mut eligible, mut violations) = (0usize, 0usize);
    for sc in &suite.scenarios {
        let out = teacher.plan(sc)?;
        if out.rewards.iter().any(|r| r.r_nc == 1.0) {
            eligible += 1;
            violations += usize::from(out.best_rv.r_nc != 1.0);
        }
    }
    Ok(Check::new(
        violations == 0,
        format!(
            "{} scenarios, {eligible} with a collision-free candidate; {violations} colliding selections",
            suite.scenarios.len()
        ),
    ))
}

fn teacher_collision(ctx: &Context, cfg: &RunConfig, scenarios: &[&Scenario]) -> Result<f64> {
    let world = MicroWorld::new(cfg.world_config());
    let planner = TeacherPlanner {
        teacher: make_teacher(cfg, &world, None)?,
        label: "teacher".into(),
    };
    Ok(open_loop_eval(&planner, scenarios, &ctx.cfg.world_config(), &cfg.open_loop)?.collision_avg)
}

pub fn teacher_vs_random(ctx: &Context) -> Result<Check> {
    let start = Instant::now();
    let suite = ctx.suite()?;
    let all: Vec<&Scenario> = suite.scenarios.iter().collect();
    let engine = teacher_collision(ctx, &ctx.cfg, &all)?;
    let mut rc = ctx.cfg.clone();
    rc.teacher.reward_source = RewardSource::Random;
    let random = teacher_collision(ctx, &rc, &all)?;
    let elapsed = start.elapsed();
    let reduction = if random > 0.0 { 1.0 - engine / random } else { 0.0 };
    Ok(Check::new(
        random > 0.0 && reduction >= 0.5 && elapsed < Duration::from_secs(300),
        format!(
            "collision avg random {random:.2}% vs reward-selected {engine:.2}% ({:.0}% lower); {:.1} s",
            100.0 * reduction,
            secs(elapsed)
        ),
    ))
}

pub fn distillation(ctx: &Context) -> Result<Check> {
    let start = Instant::now();
    let table = run_ablation(Axis::Distill, ctx.suite()?, &ctx.cfg, None)?;
    let elapsed = start.elapsed();
    let col = |label: &str| table.row(label).map(|r| r.open_loop.collision_avg);
    let (Some(bc), Some(q), Some(all)) = (col("bc"), col("bc+query"), col("bc+query+imreward+simreward")) else {
        return Ok(Check::new(false, "missing ablation rows"));
    };
    let lower = bc > 0.0 && all <= 0.8 * bc;
    let monotone = bc >= q && q >= all;
    Ok(Check::new(
        lower && monotone && elapsed < Duration::from_secs(900),
        format!(
            "held-out collision avg bc {bc:.2}%, +query {q:.2}%, +query+rewards {all:.2}% (needs <= {:.2}% and monotone: {}); {:.1} s",
            0.8 * bc,
            if monotone { "yes" } else { "no" },
            secs(elapsed)
        ),
    ))
}

pub fn drop_one(ctx: &Context) -> Result<Check> {
    let table = run_ablation(Axis::Signals, ctx.suite()?, &ctx.cfg, None)?;
    let col = |label: &str| table.row(label).map(|r| r.open_loop.collision_avg).unwrap_or(f64::NAN);
    let full = col("full");
    let drops = ["drop-nc", "drop-dac", "drop-ep", "drop-ttc", "drop-comf"];
    let inc: Vec<f64> = drops.iter().map(|d| col(d) - full).collect();
    let ttc = inc[3];
    let largest = inc.iter().enumerate().all(|(i, &v)| i == 3 || ttc > v);
    let parts: Vec<String> = drops.iter().zip(&inc).map(|(d, v)| format!("{d} {v:+.2}")).collect();
    Ok(Check::new(
        largest,
        format!("full {full:.2}%; increase {}", parts.join(", ")),
    ))
}

pub fn efficiency(ctx: &Context) -> Result<Check> {
    let run = ctx.pipeline().map_err(wpt::Error::Config)?;
    let student = Student::new(run.student.clone())?;
    let cfg = &ctx.cfg;
    let world = MicroWorld::new(cfg.world_config());
    let teacher = make_teacher(cfg, &world, None)?;
    let wcfg = cfg.world_config();
    let scenarios = &run.suite.scenarios;
    let (t_teacher, teacher_calls, t_student, student_calls) = with_threads(Some(1), || -> Result<_> {
        let before = world.calls();
        let t0 = Instant::now();
        for sc in scenarios {
            std::hint::black_box(teacher.plan(sc)?);
        }
        let tt = t0.elapsed();
        let mid = world.calls();
        let t1 = Instant::now();
        for sc in scenarios {
            std::hint::black_box(student_plan(&student, sc, &wcfg)?);
        }
        let ts = t1.elapsed();
        Ok((tt, mid - before, ts, world.calls() - mid))
    })??;
    let n = scenarios.len() as f64;
    let per_t = secs(t_teacher) * 1e3 / n;
    let per_s = secs(t_student) * 1e3 / n;
    Ok(Check::new(
        student_calls == 0 && teacher_calls > 0 && per_s * 4.0 <= per_t,
        format!(
            "world-model calls teacher {teacher_calls}, student {student_calls}; per scenario teacher {per_t:.3} ms, student {per_s:.3} ms ({:.1}x)",
            per_t / per_s.max(1e-12)
        ),
    ))
}

pub fn determinism(ctx: &Context) -> Result<Check> {
    let a = ctx.pipeline().map_err(wpt::Error::Config)?;
    let b = run_pipeline(&ctx.cfg, 4)?;
    let c = run_pipeline(&ctx.cfg, 4)?;
    let mut differing = Vec::new();
    for (name, body) in &a.files {
        if b.files.get(name) != Some(body) || c.files.get(name) != Some(body) {
            differing.push(name.clone());
        }
    }
    let same_set = a.files.len() == b.files.len() && b.files.len() == c.files.len();
    Ok(Check::new(
        differing.is_empty() && same_set,
        if differing.is_empty() {
            format!("{} files byte-identical across 1, 4 and 4 threads", a.files.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    ))
}
