mod common;

use common::{agent, scenario, straight, EGO};
use proptest::prelude::*;
use wpt::eval::{generate_suite, SuiteConfig};
use wpt::geom::Vec2;
use wpt::policy::*;
use wpt::reward::{nc_reward, CollisionMode, RewardConfig};
use wpt::world::{Behavior, MicroWorld, Scenario, WorldConfig, WorldFrame};

fn world() -> MicroWorld {
    MicroWorld::new(WorldConfig::default())
}

#[test]
fn candidates_are_seeded_and_sized() {
    let sc = scenario(vec![], 6.0);
    let cfg = CandidateConfig::default();
    let a = generate_candidates(&sc.ego_init, 20, 4, &cfg).unwrap();
    assert_eq!(a, generate_candidates(&sc.ego_init, 20, 4, &cfg).unwrap());
    assert_ne!(a, generate_candidates(&sc.ego_init, 20, 5, &cfg).unwrap());
    for t in &a.trajectories {
        assert_eq!(t.steps(), 6);
        assert_eq!(t.dt, 0.5);
        assert_eq!(t.waypoints[0], sc.ego_init.position);
    }
    for (i, p) in a.provenance.iter().enumerate() {
        assert_eq!(p.anchor, i % N_ANCHORS);
        assert_eq!(p.perturbation_seed.is_some(), i >= N_ANCHORS);
    }
}

#[test]
fn zero_spread_copies_anchors() {
    let sc = scenario(vec![], 5.0);
    let cfg = CandidateConfig {
        sigma_lon: 0.0,
        sigma_lat: 0.0,
        ..Default::default()
    };
    let c = generate_candidates(&sc.ego_init, 24, 1, &cfg).unwrap();
    for i in N_ANCHORS..24 {
        assert_eq!(c.trajectories[i].waypoints, c.trajectories[i % N_ANCHORS].waypoints);
    }
}

/// Column of parked cars across the road at x = 20; only stopping short
/// avoids them.
fn wall_scenario() -> Scenario {
    let agents = (0..17)
        .map(|i| agent(Vec2::new(20.0, 2.0 * i as f64), Vec2::ZERO, Behavior::ConstantVelocity))
        .collect();
    scenario(agents, 8.0)
}

#[test]
fn teacher_picks_the_only_safe_anchor() {
    let sc = wall_scenario();
    let w = world();
    let cfg = TeacherConfig {
        n_candidates: N_ANCHORS,
        ..Default::default()
    };
    let t = Teacher::new(&w, cfg, Scorer::Engine, 0).unwrap();
    let cands = t.candidates(&sc).unwrap().trajectories;
    let fut = t.futures(&sc, &cands).unwrap();
    let safe: Vec<usize> = (0..cands.len())
        .filter(|&i| nc_reward(&cands[i], &fut[i], EGO, CollisionMode::Footprint).unwrap() == 1.0)
        .collect();
    assert_eq!(safe, vec![7]);
    let out = t.plan(&sc).unwrap();
    assert_eq!(out.index, 7);
    assert_eq!(out.tau_star, cands[7]);
    assert_eq!(out.rewards.len(), N_ANCHORS);
    assert_eq!(out.best_rv, out.rewards[7]);
}

#[test]
fn non_reactive_scenes_select_the_same_plan_under_both_futures() {
    let w = world();
    let cases = [
        vec![agent(Vec2::new(22.0, 16.0), Vec2::new(2.0, 0.0), Behavior::ConstantVelocity)],
        vec![agent(Vec2::new(16.0, 4.0), Vec2::new(0.0, 3.0), Behavior::ConstantVelocity)],
        vec![
            agent(Vec2::new(18.0, 19.0), Vec2::new(-1.0, 0.0), Behavior::ConstantVelocity),
            agent(Vec2::new(26.0, 14.0), Vec2::ZERO, Behavior::ConstantVelocity),
        ],
    ];
    for agents in cases {
        let sc = scenario(agents, 6.0);
        let plan = |i: Interaction| {
            let cfg = TeacherConfig {
                interaction: i,
                ..Default::default()
            };
            Teacher::new(&w, cfg, Scorer::Engine, 3).unwrap().plan(&sc).unwrap()
        };
        let (gt, wm) = (plan(Interaction::Gt), plan(Interaction::Wm));
        assert_eq!(gt.index, wm.index);
        assert_eq!(gt.rewards, wm.rewards);
    }
}

#[test]
fn zero_student_follows_constant_velocity() {
    let sc = scenario(vec![], 7.0);
    let wc = WorldConfig::default();
    let fdim = observation_features(&sc, &wc).len();
    let s = Student::new(StudentParams::zeros(fdim, 64, 6, 0.5, 11)).unwrap();
    let (plan, q) = student_plan(&s, &sc, &wc).unwrap();
    assert!(q.0.iter().all(|v| *v == 0.0));
    let prior = constant_velocity_prior(&sc.ego_init, 6, 0.5).unwrap();
    for (a, b) in plan.waypoints.iter().zip(&prior.waypoints) {
        assert!((*a - *b).norm() < 1e-12);
    }
    assert_eq!(student_plan(&s, &sc, &wc).unwrap(), (plan, q));
}

#[test]
fn query_distance_example() {
    let a = PlanQuery(vec![0.0, 0.0, 1.0]);
    let b = PlanQuery(vec![3.0, 4.0, 1.0]);
    assert_eq!(policy_distill_loss(&a, &b).unwrap(), 5.0);
    assert!(policy_distill_loss(&a, &PlanQuery::zeros(2)).is_err());
}

proptest! {
    #[test]
    fn query_distance_is_a_metric(
        v in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64), 1..16)
    ) {
        let a = PlanQuery(v.iter().map(|x| x.0).collect());
        let b = PlanQuery(v.iter().map(|x| x.1).collect());
        let c = PlanQuery(v.iter().map(|x| x.2).collect());
        let d = |x: &PlanQuery, y: &PlanQuery| policy_distill_loss(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }
}

#[test]
fn reward_distill_loss_examples() {
    let sc = scenario(vec![agent(Vec2::new(16.0, 16.0), Vec2::ZERO, Behavior::ConstantVelocity)], 4.0);
    let w = world();
    let safe = straight(Vec2::new(4.0, 16.0), 0.5, 6, 0.5);
    let crash = straight(Vec2::new(4.0, 16.0), 4.0, 6, 0.5);
    let fs = w.rollout(&sc, &safe, 6).unwrap();
    let fc = w.rollout(&sc, &crash, 6).unwrap();
    let cfg = RewardConfig::default();
    let expert = sc.expert.prefix(6).unwrap();
    assert_eq!(reward_distill_loss(&safe, &fs, &safe, &fs, &expert, EGO, &cfg).unwrap(), 0.0);
    assert!(reward_distill_loss(&crash, &fc, &safe, &fs, &expert, EGO, &cfg).unwrap() > 5.0);
}

fn samples(count: usize) -> (Vec<StudentSample>, WorldConfig) {
    let suite = generate_suite(
        &SuiteConfig {
            count,
            ..Default::default()
        },
        21,
    )
    .unwrap();
    let wc = suite.config.world_config();
    let w = MicroWorld::new(wc);
    let t = Teacher::new(&w, TeacherConfig::default(), Scorer::Engine, 21).unwrap();
    let s = suite
        .scenarios
        .iter()
        .map(|sc| StudentSample::new(sc, &t.plan(sc).unwrap(), &wc, 6, 0.5).unwrap())
        .collect();
    (s, wc)
}

/// Plain full-batch gradient descent on the mean squared offset error.
fn regress(samples: &[StudentSample], cfg: &StudentConfig, seed: u64) -> StudentParams {
    let proj = QueryProjection::new(cfg.query_dim, cfg.steps, seed).unwrap();
    let fdim = samples[0].features.len();
    let mut p = StudentParams::zeros(fdim, cfg.query_dim, cfg.steps, cfg.dt, seed);
    let t = cfg.steps as f64;
    let n = samples.len() as f64;
    for _ in 0..cfg.epochs {
        let mut gw = vec![0.0; p.w.len()];
        let mut gb = vec![0.0; p.b.len()];
        for s in samples {
            let q = p.query(&s.features).unwrap();
            let off = proj.offsets(&q.0);
            let mut gq = vec![0.0; cfg.query_dim];
            for j in 0..off.len() {
                let g = 2.0 * (off[j] - s.expert_offsets[j]) / t;
                for (a, c) in gq.iter_mut().zip(proj.offset_col(j)) {
                    *a += g * c;
                }
            }
            for r in 0..cfg.query_dim {
                gb[r] += gq[r];
                for (a, x) in gw[r * fdim..(r + 1) * fdim].iter_mut().zip(&s.features) {
                    *a += gq[r] * x;
                }
            }
        }
        p.w.iter_mut().zip(&gw).for_each(|(w, g)| *w -= cfg.learning_rate * g / n);
        p.b.iter_mut().zip(&gb).for_each(|(b, g)| *b -= cfg.learning_rate * g / n);
    }
    p
}

#[test]
fn imitation_only_training_is_plain_regression() {
    let (mut data, _) = samples(10);
    let cfg = StudentConfig {
        terms: DistillTerms::NONE,
        batch_size: 64,
        epochs: 30,
        learning_rate: 0.02,
        ..Default::default()
    };
    let reward = RewardConfig::default();
    let a = train_student(&data, &reward, 5, &cfg).unwrap();
    let b = regress(&data, &cfg, 5);
    for (x, y) in a.params.w.iter().chain(&a.params.b).zip(b.w.iter().chain(&b.b)) {
        assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()), "{x} vs {y}");
    }
    // Teacher outputs play no part without the distillation terms.
    for s in &mut data {
        s.q_t = PlanQuery(vec![9.0; s.q_t.dim()]);
        s.frames = Vec::<WorldFrame>::new();
    }
    assert_eq!(train_student(&data, &reward, 5, &cfg).unwrap().params, a.params);
}

#[test]
fn training_is_reproducible() {
    let (data, _) = samples(6);
    let cfg = StudentConfig {
        epochs: 5,
        batch_size: 4,
        ..Default::default()
    };
    let reward = RewardConfig::default();
    let a = train_student(&data, &reward, 2, &cfg).unwrap();
    let b = train_student(&data, &reward, 2, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.loss_curve.len(), 10);
    assert!(a.loss_curve.iter().all(|l| l.is_finite()));
}
