#![allow(dead_code)]

use wpt::geom::{Footprint, Vec2};
use wpt::grid::{Grid, GridGeometry};
use wpt::kinematics::Trajectory;
use wpt::world::{AgentState, Behavior, Command, Goal, Scenario, Stratum, WorldFrame};

pub const EGO: Footprint = Footprint::new(4.0, 1.8);

pub fn geo(n: usize) -> GridGeometry {
    GridGeometry {
        width: n,
        height: n,
        resolution: 0.5,
        origin: Vec2::ZERO,
    }
}

pub fn frame(n: usize, agents: Vec<AgentState>, t: i64) -> WorldFrame {
    WorldFrame::new(geo(n), Grid::new(n, n, true), agents, t).unwrap()
}

pub fn agent(pos: Vec2, vel: Vec2, behavior: Behavior) -> AgentState {
    AgentState {
        position: pos,
        velocity: vel,
        footprint: Footprint::new(4.0, 1.8),
        heading: if vel.norm() > 0.0 { vel.angle() } else { 0.0 },
        behavior,
    }
}

/// Straight run along +x from `start` at `speed`.
pub fn straight(start: Vec2, speed: f64, steps: usize, dt: f64) -> Trajectory {
    let w = (0..=steps).map(|k| start + Vec2::new(speed * dt * k as f64, 0.0)).collect();
    Trajectory::new(w, dt).unwrap()
}

/// 64 × 64 fully drivable scenario with the ego at (4, 16) heading +x at
/// `speed` and an expert that keeps that speed for 12 steps. The three
/// history frames all hold `agents`.
pub fn scenario(agents: Vec<AgentState>, speed: f64) -> Scenario {
    let start = Vec2::new(4.0, 16.0);
    let frames = (-2..=0).map(|t| frame(64, agents.clone(), t)).collect();
    Scenario {
        id: 0,
        stratum: Stratum::FreeRoad,
        seed: 7,
        initial_frames: frames,
        ego_init: AgentState {
            position: start,
            velocity: Vec2::new(speed, 0.0),
            footprint: EGO,
            heading: 0.0,
            behavior: Behavior::ConstantVelocity,
        },
        expert: straight(start, speed, 12, 0.5),
        command: Command::Keep,
        goal: Goal {
            start,
            direction: 0.0,
            distance: 10.0,
        },
    }
}
