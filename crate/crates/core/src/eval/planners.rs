//! Policies under evaluation.

use crate::error::Result;
use crate::kinematics::Trajectory;
use crate::policy::{constant_velocity_prior, student_plan, Student, Teacher};
use crate::world::{Scenario, WorldConfig};

pub trait Planner: Sync {
    fn name(&self) -> String;
    fn plan(&self, scenario: &Scenario) -> Result<Trajectory>;
}

/// Replays the logged expert.
pub struct ExpertReplay {
    pub steps: usize,
}

impl Planner for ExpertReplay {
    fn name(&self) -> String {
        "expert".into()
    }

    fn plan(&self, scenario: &Scenario) -> Result<Trajectory> {
        scenario.expert.prefix(self.steps)
    }
}

/// Stays where it is.
pub struct Stationary {
    pub steps: usize,
    pub dt: f64,
}

impl Planner for Stationary {
    fn name(&self) -> String {
        "stationary".into()
    }

    fn plan(&self, scenario: &Scenario) -> Result<Trajectory> {
        let p = scenario.ego_init.position;
        Trajectory::with_headings(vec![p; self.steps + 1], self.dt, vec![scenario.ego_init.heading; self.steps + 1])
    }
}

/// Keeps the current velocity.
pub struct ConstantVelocity {
    pub steps: usize,
    pub dt: f64,
}

impl Planner for ConstantVelocity {
    fn name(&self) -> String {
        "constant-velocity".into()
    }

    fn plan(&self, scenario: &Scenario) -> Result<Trajectory> {
        constant_velocity_prior(&scenario.ego_init, self.steps, self.dt)
    }
}

pub struct TeacherPlanner<'a> {
    pub teacher: Teacher<'a>,
    pub label: String,
}

impl Planner for TeacherPlanner<'_> {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn plan(&self, scenario: &Scenario) -> Result<Trajectory> {
        Ok(self.teacher.plan(scenario)?.tau_star)
    }
}

pub struct StudentPlanner {
    pub student: Student,
    pub world: WorldConfig,
    pub label: String,
}

impl Planner for StudentPlanner {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn plan(&self, scenario: &Scenario) -> Result<Trajectory> {
        Ok(student_plan(&self.student, scenario, &self.world)?.0)
    }
}
