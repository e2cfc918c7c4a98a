//! Minimal SVG renderings for inspecting single scenarios.

use crate::kinematics::Trajectory;
use crate::reward::RewardVector;
use crate::world::Scenario;
use std::fmt::Write;

const PX: f64 = 8.0;

/// Drivable area and current occupancy of the scenario, with the expert
/// (green) and `plan` (blue) drawn on top.
pub fn trajectory_overlay(scenario: &Scenario, plan: &Trajectory) -> String {
    let f = scenario.current_frame();
    let g = &f.geometry;
    let (w, h) = (g.width as f64 * g.resolution * PX, g.height as f64 * g.resolution * PX);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r##"<rect width="{w}" height="{h}" fill="#333"/>"##);
    let cell = g.resolution * PX;
    // y grows upwards in the world and downwards in SVG.
    let to_px = |x: f64, y: f64| ((x - g.origin.x) * PX, h - (y - g.origin.y) * PX);
    for (ix, iy) in f.drivable.iter_set() {
        let c = g.cell_center(ix, iy);
        let (x, y) = to_px(c.x, c.y);
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="#888"/>"##,
            x - cell / 2.0,
            y - cell / 2.0
        );
    }
    for (ix, iy) in f.instance_occ.iter_set() {
        let c = g.cell_center(ix, iy);
        let (x, y) = to_px(c.x, c.y);
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="#d33"/>"##,
            x - cell / 2.0,
            y - cell / 2.0
        );
    }
    for (traj, colour) in [(&scenario.expert, "#3c3"), (plan, "#39f")] {
        let pts: Vec<String> = traj
            .waypoints
            .iter()
            .map(|p| {
                let (x, y) = to_px(p.x, p.y);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Grouped bars of the six reward components per candidate, with the
/// selected candidate outlined.
pub fn reward_bars(rewards: &[RewardVector], selected: usize) -> String {
    const BAR: f64 = 6.0;
    const GAP: f64 = 10.0;
    const HEIGHT: f64 = 120.0;
    let colours = ["#999", "#d33", "#fa0", "#3c3", "#39f", "#a5f"];
    let group = 6.0 * BAR + GAP;
    let w = group * rewards.len() as f64 + GAP;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{}" viewBox="0 0 {w} {}">"#,
        HEIGHT + 20.0,
        HEIGHT + 20.0
    );
    for (i, rv) in rewards.iter().enumerate() {
        let x0 = GAP + i as f64 * group;
        let vals = [rv.r_im, rv.r_nc, rv.r_dac, rv.r_ep, rv.r_ttc, rv.r_comf];
        for (j, v) in vals.iter().enumerate() {
            let bh = v.clamp(0.0, 1.0) * HEIGHT;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{BAR}" height="{bh:.1}" fill="{}"/>"#,
                x0 + j as f64 * BAR,
                HEIGHT - bh,
                colours[j]
            );
        }
        if i == selected {
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="0" width="{:.1}" height="{HEIGHT}" fill="none" stroke="black"/>"#,
                x0 - 1.0,
                6.0 * BAR + 2.0
            );
        }
        let _ = writeln!(s, r#"<text x="{x0:.1}" y="{}" font-size="10">{i}</text>"#, HEIGHT + 14.0);
    }
    s.push_str("</svg>\n");
    s
}
