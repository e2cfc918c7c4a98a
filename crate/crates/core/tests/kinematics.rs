use proptest::prelude::*;
use wpt::geom::Vec2;
use wpt::kinematics::{derive_profile, l2_displacements, MotionProfile, Trajectory};

fn arc(radius: f64, speed: f64, dt: f64, duration: f64) -> Trajectory {
    let n = (duration / dt).round() as usize;
    let w = (0..=n)
        .map(|k| {
            let a = speed * dt * k as f64 / radius;
            Vec2::new(radius * a.sin(), radius * (1.0 - a.cos()))
        })
        .collect();
    Trajectory::new(w, dt).unwrap()
}

fn max_err(p: &MotionProfile, a_lat: f64, speed: f64) -> f64 {
    p.a_lat
        .iter()
        .map(|a| (a - a_lat).abs())
        .chain(p.v.iter().map(|v| (v - speed).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn circular_arc_lateral_acceleration() {
    let (r, v) = (20.0, 4.0);
    let fine = derive_profile(&arc(r, v, 0.5 / 8.0, 3.0)).unwrap();
    for a in &fine.a_lat {
        assert!((a - v * v / r).abs() < 2e-4, "{a}");
    }
    assert!(fine.a_lon.iter().all(|a| a.abs() < 1e-4));
    let coarse = derive_profile(&arc(r, v, 0.5, 3.0)).unwrap();
    assert!(coarse.a_lat.iter().all(|a| (a - 0.8).abs() < 1e-2));
}

#[test]
fn halving_dt_at_least_halves_the_error() {
    let (r, v) = (20.0, 4.0);
    let mut prev = f64::INFINITY;
    for dt in [0.5, 0.25, 0.125, 0.0625] {
        let e = max_err(&derive_profile(&arc(r, v, dt, 3.0)).unwrap(), v * v / r, v);
        assert!(e * 2.0 <= prev, "dt {dt}: {e} vs {prev}");
        prev = e;
    }
}

#[test]
fn identical_trajectories_have_zero_l2() {
    let t = arc(15.0, 5.0, 0.5, 3.0);
    let r = l2_displacements(&t, &t, &[1.0, 2.0, 3.0]).unwrap();
    assert!(r.at_horizon.iter().chain(&r.average_to_horizon).all(|&d| d == 0.0));
}

fn arb_traj() -> impl Strategy<Value = Trajectory> {
    (4usize..10, 0.5..8.0f64, -0.8..0.8f64, -1.0..1.0f64, prop::collection::vec(-0.2..0.2f64, 20)).prop_map(
        |(n, speed, yaw, acc, noise)| {
            let dt = 0.5;
            let mut p = Vec2::new(1.0, -2.0);
            let (mut h, mut v) = (0.3, speed);
            let mut w = vec![p];
            for k in 0..n {
                h += yaw * dt;
                v += acc * dt;
                p += Vec2::from_angle(h) * (v.max(0.5) * dt) + Vec2::new(noise[k], noise[k + 10]) * 0.1;
                w.push(p);
            }
            Trajectory::new(w, dt).unwrap()
        },
    )
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()))
}

proptest! {
    #[test]
    fn profile_is_rigid_motion_invariant(t in arb_traj(), theta in -3.1..3.1f64, dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let moved = Trajectory::new(
            t.waypoints.iter().map(|p| p.rotate(theta) + Vec2::new(dx, dy)).collect(),
            t.dt,
        ).unwrap();
        let (a, b) = (derive_profile(&t).unwrap(), derive_profile(&moved).unwrap());
        prop_assert!(close(&a.v, &b.v));
        prop_assert!(close(&a.a_lon, &b.a_lon));
        prop_assert!(close(&a.a_lat, &b.a_lat));
        prop_assert!(close(&a.jerk_mag, &b.jerk_mag));
        prop_assert!(close(&a.j_lon, &b.j_lon));
    }

    #[test]
    fn l2_is_symmetric_and_matches_recomputation(a in arb_traj(), b in arb_traj()) {
        let n = a.steps().min(b.steps());
        let hs: Vec<f64> = (1..=n).map(|k| k as f64 * 0.5).collect();
        let ab = l2_displacements(&a, &b, &hs).unwrap();
        let ba = l2_displacements(&b, &a, &hs).unwrap();
        prop_assert_eq!(&ab, &ba);
        for k in 1..=n {
            let d = |i: usize| {
                let (p, q) = (a.waypoints[i], b.waypoints[i]);
                ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt()
            };
            let mean = (1..=k).map(d).sum::<f64>() / k as f64;
            prop_assert!((ab.at_horizon[k - 1] - d(k)).abs() < 1e-12);
            prop_assert!((ab.average_to_horizon[k - 1] - mean).abs() < 1e-12);
        }
    }
}
