mod common;

use common::{agent, frame, geo, straight, EGO};
use proptest::prelude::*;
use wpt::geom::Vec2;
use wpt::grid::Grid;
use wpt::kinematics::{derive_profile, Trajectory};
use wpt::reward::*;
use wpt::world::{Behavior, WorldFrame};

fn frames(n: usize, count: usize, agents: Vec<wpt::world::AgentState>) -> Vec<WorldFrame> {
    (1..=count).map(|t| frame(n, agents.clone(), t as i64)).collect()
}

fn parked(x: f64, y: f64) -> wpt::world::AgentState {
    agent(Vec2::new(x, y), Vec2::ZERO, Behavior::ConstantVelocity)
}

#[test]
fn empty_world_scores_one() {
    let t = straight(Vec2::new(4.0, 16.0), 4.0, 6, 0.5);
    let f = frames(64, 6, vec![]);
    for mode in [CollisionMode::Footprint, CollisionMode::Point] {
        assert_eq!(nc_reward(&t, &f, EGO, mode).unwrap(), 1.0);
        assert_eq!(dac_reward(&t, &f, EGO, mode).unwrap(), 1.0);
    }
    assert_eq!(ttc_reward(&t, &f, 1.0, EGO, 10.0).unwrap(), 1.0);
}

#[test]
fn overlap_at_step_three() {
    // Waypoint 3 is at x = 10; an agent parked there only in frame 3.
    let t = straight(Vec2::new(4.0, 16.0), 4.0, 6, 0.5);
    let mut f = frames(64, 6, vec![]);
    f[2] = frame(64, vec![parked(10.0, 16.0)], 3);
    assert_eq!(first_collision(&t, &f, EGO, CollisionMode::Footprint).unwrap(), Some(3));
    assert_eq!(nc_reward(&t, &f, EGO, CollisionMode::Footprint).unwrap(), 0.0);
}

#[test]
fn leaving_the_grid_fails_dac() {
    let t = straight(Vec2::new(26.0, 16.0), 4.0, 6, 0.5);
    let f = frames(64, 6, vec![]);
    assert_eq!(dac_reward(&t, &f, EGO, CollisionMode::Footprint).unwrap(), 0.0);
    assert_eq!(dac_reward(&t, &f, EGO, CollisionMode::Point).unwrap(), 0.0);
    assert_eq!(ttc_reward(&t, &f, 0.0, EGO, 10.0).unwrap(), 0.0);
}

#[test]
fn non_drivable_cell_under_footprint_fails_dac() {
    let t = straight(Vec2::new(4.0, 16.0), 2.0, 6, 0.5);
    let mut f = frames(64, 6, vec![]);
    let (ix, iy) = f[5].geometry.cell_of(Vec2::new(11.0, 16.6));
    f[5].drivable.set(ix as usize, iy as usize, false);
    assert_eq!(dac_reward(&t, &f, EGO, CollisionMode::Footprint).unwrap(), 0.0);
    // The waypoint itself stays on a drivable cell.
    assert_eq!(dac_reward(&t, &f, EGO, CollisionMode::Point).unwrap(), 1.0);
}

#[test]
fn ttc_probe_reach() {
    let t = straight(Vec2::new(4.0, 16.0), 2.0, 6, 0.5);
    let end = t.waypoints[6];
    let near = frames(64, 6, vec![parked(end.x + 5.0, end.y)]);
    let far = frames(64, 6, vec![parked(end.x + 15.0, end.y)]);
    assert_eq!(nc_reward(&t, &near, EGO, CollisionMode::Footprint).unwrap(), 1.0);
    assert_eq!(ttc_reward(&t, &near, 1.0, EGO, 10.0).unwrap(), 0.0);
    assert_eq!(ttc_reward(&t, &far, 1.0, EGO, 10.0).unwrap(), 1.0);
    assert!(ttc_reward(&t, &far, 1.0, EGO, -1.0).is_err());
}

#[test]
fn ttc_ignores_occupied_non_drivable_cells() {
    let t = straight(Vec2::new(4.0, 16.0), 2.0, 6, 0.5);
    let end = t.waypoints[6];
    let mut f = frames(64, 6, vec![parked(end.x + 5.0, end.y)]);
    let last = f.last_mut().unwrap();
    let occ: Vec<_> = last.instance_occ.iter_set().collect();
    for (ix, iy) in occ {
        last.drivable.set(ix, iy, false);
    }
    assert_eq!(ttc_raw(&t, &f, EGO, 10.0).unwrap(), 1.0);
}

#[test]
fn too_few_frames_is_a_horizon_error() {
    let t = straight(Vec2::new(4.0, 16.0), 2.0, 6, 0.5);
    let f = frames(64, 4, vec![]);
    assert!(matches!(nc_reward(&t, &f, EGO, CollisionMode::Footprint), Err(wpt::Error::Horizon { .. })));
    assert!(matches!(dac_reward(&t, &f, EGO, CollisionMode::Footprint), Err(wpt::Error::Horizon { .. })));
}

#[test]
fn ep_examples() {
    let start = Vec2::new(0.0, 0.0);
    let run = |d: f64| {
        Trajectory::with_headings(vec![start, start + Vec2::new(d / 2.0, 0.0), start + Vec2::new(d, 0.0)], 0.5, vec![0.0; 3])
            .unwrap()
    };
    let c = [run(10.0), run(5.0), run(-1.0)];
    assert_eq!(ep_reward(&c, &[1.0; 3], &[1.0; 3]).unwrap(), vec![1.0, 0.5, 0.0]);
    let short = [run(4.0), run(2.5), run(5.0)];
    assert_eq!(ep_reward(&short, &[1.0; 3], &[1.0; 3]).unwrap(), vec![1.0; 3]);
    assert_eq!(ep_reward(&c, &[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0]).unwrap(), vec![0.0, 0.0, 0.0]);
    assert!(ep_reward(&c, &[1.0; 2], &[1.0; 3]).is_err());
}

fn decel(a: f64) -> Trajectory {
    let w = (0..=6)
        .map(|k| {
            let t = 0.5 * k as f64;
            Vec2::new(20.0 * t + 0.5 * a * t * t, 0.0)
        })
        .collect();
    Trajectory::new(w, 0.5).unwrap()
}

#[test]
fn comfort_examples() {
    let th = ComfortThresholds::default();
    let comf = |t: &Trajectory| comf_reward(&derive_profile(t).unwrap(), &th);
    assert_eq!(comf(&straight(Vec2::ZERO, 5.0, 6, 0.5)), 1.0);
    assert_eq!(comf(&decel(-4.09)), 0.0);
    assert_eq!(comf(&decel(-4.01)), 1.0);
    // Lateral cubic: jerk magnitude 8.45, lateral acceleration within limits.
    let jerky = |j: f64| {
        let w = (0..=4)
            .map(|k| {
                let t = 0.25 * k as f64;
                let s = t - 0.5;
                Vec2::new(10.0 * t, j * (s * s * s + 0.125) / 6.0)
            })
            .collect();
        Trajectory::with_headings(w, 0.25, vec![0.0; 5]).unwrap()
    };
    assert_eq!(comf(&jerky(8.45)), 0.0);
    assert_eq!(comf(&jerky(8.29)), 1.0);
}

#[test]
fn imitation_prefers_the_expert_copy() {
    let expert = straight(Vec2::ZERO, 4.0, 6, 0.5);
    let others: Vec<Trajectory> = [2.0, 6.0, 0.0]
        .iter()
        .map(|&v| straight(Vec2::ZERO, v, 6, 0.5))
        .collect();
    let mut cands = others.clone();
    cands.insert(1, expert.clone());
    for mode in [ImitationMode::SumNormalized, ImitationMode::Temperature { temperature: 1.0 }] {
        let p = imitation_target(&cands, &expert, mode).unwrap();
        assert_eq!(argmax_first(&p), Some(1));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let sym = imitation_target(&[others[0].clone(), others[1].clone()], &expert, ImitationMode::default()).unwrap();
    assert!((sym[0] - 0.5).abs() < 1e-12 && (sym[1] - 0.5).abs() < 1e-12);
}

fn rvec(v: [f64; 6], w: &RewardWeights) -> RewardVector {
    let mut rv = RewardVector {
        r_im: v[0],
        r_nc: v[1],
        r_dac: v[2],
        r_ep: v[3],
        r_ttc: v[4],
        r_comf: v[5],
        r_final: 0.0,
    };
    rv.r_final = fuse_final(&rv, w);
    rv
}

#[test]
fn selection_examples() {
    let cfg = RewardConfig::default();
    let w = &cfg.weights;
    assert_eq!(select_best(&[rvec([0.2, 1.0, 1.0, 1.0, 1.0, 1.0], w)], &cfg).unwrap(), 0);
    let rvs = vec![
        rvec([0.5, 0.0, 1.0, 1.0, 1.0, 1.0], w),
        rvec([0.3, 0.0, 1.0, 1.0, 1.0, 1.0], w),
        rvec([0.01, 1.0, 1.0, 0.0, 1.0, 0.0], w),
        rvec([0.19, 0.0, 1.0, 1.0, 1.0, 1.0], w),
    ];
    assert_eq!(select_best(&rvs, &cfg).unwrap(), 2);
}

/// Exhaustive scan with the fused scores written out term by term.
fn oracle_best(rvs: &[RewardVector], cfg: &RewardConfig) -> usize {
    let w = &cfg.weights;
    let l = |x: f64| x.max(w.epsilon_log).ln();
    let sim = |r: &RewardVector| {
        w.alpha[1] * l(r.r_nc) + w.alpha[2] * l(r.r_dac) + w.alpha[3] * l(5.0 * r.r_ttc + 5.0 * r.r_ep + 2.0 * r.r_comf)
    };
    let score = |r: &RewardVector| match cfg.selection_mode {
        SelectionMode::Logfuse => w.alpha[0] * l(r.r_im) + sim(r),
        SelectionMode::Linear => w.w[0] * r.r_im + w.w[1] * sim(r),
    };
    let mut best = 0;
    for i in 1..rvs.len() {
        if score(&rvs[i]) > score(&rvs[best]) {
            best = i;
        }
    }
    best
}

fn arb_rv() -> impl Strategy<Value = [f64; 6]> {
    (0.0..1.0f64, 0..2u8, 0..2u8, 0.0..1.0f64, 0..2u8, 0..2u8)
        .prop_map(|(im, nc, dac, ep, ttc, comf)| [im, nc as f64, dac as f64, ep, ttc as f64, comf as f64])
}

proptest! {
    #[test]
    fn select_matches_exhaustive_scan(
        table in prop::collection::vec(arb_rv(), 1..20),
        alpha in prop::array::uniform4(0.1..3.0f64),
        linear in any::<bool>(),
    ) {
        let cfg = RewardConfig {
            weights: RewardWeights { alpha, ..Default::default() },
            selection_mode: if linear { SelectionMode::Linear } else { SelectionMode::Logfuse },
            ..Default::default()
        };
        let rvs: Vec<RewardVector> = table.iter().map(|v| rvec(*v, &cfg.weights)).collect();
        prop_assert_eq!(select_best(&rvs, &cfg).unwrap(), oracle_best(&rvs, &cfg));
    }

    #[test]
    fn fuse_increases_with_imitation_and_progress(v in arb_rv(), d in 0.001..0.5f64) {
        let w = RewardWeights::default();
        let base = [v[0].max(0.01), v[1].max(0.5), v[2].max(0.5), v[3].max(0.01), v[4], v[5]];
        let b = rvec(base, &w).r_final;
        let mut im = base;
        im[0] += d;
        let mut ep = base;
        ep[3] += d;
        prop_assert!(rvec(im, &w).r_final > b);
        prop_assert!(rvec(ep, &w).r_final > b);
    }

    #[test]
    fn imitation_target_is_permutation_equivariant(
        d in prop::collection::vec(0.0..20.0f64, 2..12),
        rot in 0usize..12,
        temp in 0.1..5.0f64,
    ) {
        let r = rot % d.len();
        let mut e = d.clone();
        e.rotate_left(r);
        for mode in [ImitationMode::SumNormalized, ImitationMode::Literal, ImitationMode::Temperature { temperature: temp }] {
            let p = imitation_target_from_distances(&d, mode).unwrap();
            let mut p_rot = p.clone();
            p_rot.rotate_left(r);
            let q = imitation_target_from_distances(&e, mode).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (a, b) in p_rot.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn point_mode_matches_waypoint_cells(
        seed in any::<u64>(),
        x0 in -2.0..34.0f64,
        y0 in -2.0..34.0f64,
        heading in -3.2..3.2f64,
        speed in 0.0..8.0f64,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = geo(64);
        let grids: Vec<(Grid, Grid)> = (0..6)
            .map(|_| {
                let mut occ = Grid::new(64, 64, false);
                let mut drv = Grid::new(64, 64, true);
                for iy in 0..64 {
                    for ix in 0..64 {
                        occ.set(ix, iy, rng.random::<f64>() < 0.05);
                        drv.set(ix, iy, rng.random::<f64>() > 0.02);
                    }
                }
                (occ, drv)
            })
            .collect();
        let f: Vec<WorldFrame> = grids
            .iter()
            .enumerate()
            .map(|(k, (occ, drv))| WorldFrame {
                geometry: g,
                instance_occ: occ.clone(),
                drivable: drv.clone(),
                agents: vec![],
                timestamp: k as i64 + 1,
            })
            .collect();
        let dir = Vec2::from_angle(heading);
        let t = Trajectory::new((0..=6).map(|k| Vec2::new(x0, y0) + dir * (speed * 0.5 * k as f64)).collect(), 0.5).unwrap();
        let cell = |p: Vec2| ((p.x / 0.5).floor() as i64, (p.y / 0.5).floor() as i64);
        let inside = |(ix, iy): (i64, i64)| (0..64).contains(&ix) && (0..64).contains(&iy);
        let mut nc = 1.0;
        let mut dac = 1.0;
        for k in 1..=6 {
            let c = cell(t.waypoints[k]);
            let (occ, drv) = &grids[k - 1];
            if inside(c) && occ.get(c.0 as usize, c.1 as usize) {
                nc = 0.0;
            }
            if !inside(c) || !drv.get(c.0 as usize, c.1 as usize) {
                dac = 0.0;
            }
        }
        prop_assert_eq!(nc_reward(&t, &f, EGO, CollisionMode::Point).unwrap(), nc);
        prop_assert_eq!(dac_reward(&t, &f, EGO, CollisionMode::Point).unwrap(), dac);
    }
}

#[test]
fn batch_scoring_is_thread_independent() {
    let suite = wpt::eval::generate_suite(
        &wpt::eval::SuiteConfig {
            count: 10,
            ..Default::default()
        },
        11,
    )
    .unwrap();
    let world = wpt::world::MicroWorld::new(suite.config.world_config());
    let cfg = RewardConfig::default();
    let cand_cfg = wpt::policy::CandidateConfig::default();
    for sc in &suite.scenarios {
        let set = wpt::policy::generate_candidates(&sc.ego_init, 16, sc.seed, &cand_cfg).unwrap();
        let fut: Vec<Vec<WorldFrame>> = set.trajectories.iter().map(|c| world.rollout(sc, c, 6).unwrap()).collect();
        let refs: Vec<&[WorldFrame]> = fut.iter().map(|f| f.as_slice()).collect();
        let seq = score_batch_seq(&set.trajectories, &refs, &sc.expert, sc.ego_footprint(), &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let par = pool.install(|| score_batch(&set.trajectories, &refs, &sc.expert, sc.ego_footprint(), &cfg).unwrap());
        assert_eq!(seq, par);
    }
}
