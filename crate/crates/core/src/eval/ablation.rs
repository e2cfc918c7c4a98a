//! One-axis ablations over the teacher and the student.

use super::closed_loop::{closed_loop_eval, ClosedLoopReport};
use super::open_loop::{open_loop_eval, OpenLoopReport};
use super::planners::{Planner, StudentPlanner, TeacherPlanner};
use super::suite::Suite;
use super::REPORT_SCHEMA_VERSION;
use crate::config::{RewardSource, RunConfig};
use crate::error::{Error, Result};
use crate::learned::RewardHeadParams;
use crate::pipeline::{distill, make_teacher, teacher_records, train_reward};
use crate::policy::{DistillTerms, Interaction, Student};
use crate::reward::SignalMask;
use crate::world::{MicroWorld, Scenario};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Reward source and composition at selection time.
    Reward,
    /// Drop one simulation signal at a time.
    Signals,
    /// Ground-truth versus world-model interaction futures.
    Interaction,
    /// Subsets of the distillation terms.
    Distill,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::Reward, Axis::Signals, Axis::Interaction, Axis::Distill];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Reward => "reward",
            Axis::Signals => "signals",
            Axis::Interaction => "interaction",
            Axis::Distill => "distill",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown ablation axis {s:?} (expected reward, signals, interaction or distill)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub open_loop: OpenLoopReport,
    pub closed_loop: ClosedLoopReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub schema_version: u32,
    pub axis: Axis,
    /// Which scenarios the rows were evaluated on.
    pub split: String,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn row(&self, label: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Markdown table with L2 and collision columns per horizon.
    pub fn to_markdown(&self) -> String {
        let Some(first) = self.rows.first() else {
            return String::new();
        };
        let hs = &first.open_loop.horizons;
        let mut s = String::from("| Config |");
        for h in hs {
            s.push_str(&format!(" L2 {h}s |"));
        }
        s.push_str(" L2 Avg |");
        for h in hs {
            s.push_str(&format!(" Col. {h}s (%) |"));
        }
        s.push_str(" Col. Avg (%) | DS | CL Col. (%) |\n|---|");
        s.push_str(&"---|".repeat(2 * hs.len() + 4));
        s.push('\n');
        for r in &self.rows {
            let o = &r.open_loop;
            s.push_str(&format!("| {} |", r.label));
            for v in &o.l2 {
                s.push_str(&format!(" {v:.3} |"));
            }
            s.push_str(&format!(" {:.3} |", o.l2_avg));
            for v in &o.collision_rate {
                s.push_str(&format!(" {v:.2} |"));
            }
            s.push_str(&format!(
                " {:.2} | {:.2} | {:.1} |\n",
                o.collision_avg, r.closed_loop.driving_score, r.closed_loop.collision_rate
            ));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,l2_avg,collision_avg,driving_score,closed_loop_collision");
        if let Some(first) = self.rows.first() {
            for h in &first.open_loop.horizons {
                s.push_str(&format!(",l2_{h}s,collision_{h}s"));
            }
        }
        s.push('\n');
        for r in &self.rows {
            let o = &r.open_loop;
            s.push_str(&format!(
                "{},{},{},{},{}",
                r.label, o.l2_avg, o.collision_avg, r.closed_loop.driving_score, r.closed_loop.collision_rate
            ));
            for (l, c) in o.l2.iter().zip(&o.collision_rate) {
                s.push_str(&format!(",{l},{c}"));
            }
            s.push('\n');
        }
        s
    }
}

fn evaluate(policy: &dyn Planner, scenarios: &[&Scenario], cfg: &RunConfig, label: &str) -> Result<AblationRow> {
    let world = cfg.world_config();
    Ok(AblationRow {
        label: label.to_string(),
        open_loop: open_loop_eval(policy, scenarios, &world, &cfg.open_loop)?,
        closed_loop: closed_loop_eval(policy, scenarios, &world, &cfg.closed_loop, cfg.suite.horizon)?,
    })
}

fn teacher_row(cfg: &RunConfig, scenarios: &[&Scenario], learned: Option<&RewardHeadParams>, label: &str) -> Result<AblationRow> {
    let world = MicroWorld::new(cfg.world_config());
    let teacher = make_teacher(cfg, &world, learned)?;
    let planner = TeacherPlanner {
        teacher,
        label: label.to_string(),
    };
    evaluate(&planner, scenarios, cfg, label)
}

/// Runs every configuration of `axis` on `suite`.
///
/// Teacher axes use the whole suite. The distillation axis trains on the
/// even half and evaluates on the odd half. `learned` supplies the reward
/// heads for the learned-reward row; they are trained on the even half when
/// absent.
pub fn run_ablation(axis: Axis, suite: &Suite, cfg: &RunConfig, learned: Option<&RewardHeadParams>) -> Result<AblationTable> {
    cfg.validate()?;
    let all: Vec<&Scenario> = suite.scenarios.iter().collect();
    let with = |f: &dyn Fn(&mut RunConfig)| {
        let mut c = cfg.clone();
        f(&mut c);
        c
    };
    let mut rows = Vec::new();
    let split = match axis {
        Axis::Reward => {
            let trained;
            let params = match learned {
                Some(p) => p,
                None => {
                    trained = train_reward(cfg, suite)?.params;
                    &trained
                }
            };
            let engine = |src: RewardSource, signals: SignalMask| {
                with(&|c| {
                    c.teacher.reward_source = src;
                    c.reward.signals = signals;
                })
            };
            let sim_only = SignalMask {
                im: false,
                ..SignalMask::all()
            };
            let variants = [
                ("no-reward", engine(RewardSource::Random, cfg.reward.signals)),
                ("im-only", engine(RewardSource::Engine, SignalMask::imitation_only())),
                ("sim-only", engine(RewardSource::Engine, sim_only)),
                ("im+sim", engine(RewardSource::Engine, SignalMask::all())),
                ("learned-im+sim", engine(RewardSource::Learned, SignalMask::all())),
            ];
            for (label, c) in &variants {
                rows.push(teacher_row(c, &all, Some(params), label)?);
            }
            "all"
        }
        Axis::Signals => {
            let base = cfg.reward.signals;
            let variants: [(&str, SignalMask); 6] = [
                ("full", base),
                ("drop-nc", SignalMask { nc: false, ..base }),
                ("drop-dac", SignalMask { dac: false, ..base }),
                ("drop-ep", SignalMask { ep: false, ..base }),
                ("drop-ttc", SignalMask { ttc: false, ..base }),
                ("drop-comf", SignalMask { comf: false, ..base }),
            ];
            for (label, m) in variants {
                let c = with(&|c| c.reward.signals = m);
                rows.push(teacher_row(&c, &all, learned, label)?);
            }
            "all"
        }
        Axis::Interaction => {
            for (label, i) in [("gt-occ", Interaction::Gt), ("wm-occ", Interaction::Wm)] {
                let c = with(&|c| c.teacher.interaction = i);
                rows.push(teacher_row(&c, &all, learned, label)?);
            }
            "all"
        }
        Axis::Distill => {
            let world = MicroWorld::new(cfg.world_config());
            let teacher = make_teacher(cfg, &world, learned)?;
            let records = teacher_records(&teacher, &suite.train_half())?;
            let test = suite.test_half();
            let variants = [
                DistillTerms::NONE,
                DistillTerms {
                    query: true,
                    ..DistillTerms::NONE
                },
                DistillTerms {
                    query: true,
                    im_reward: true,
                    sim_reward: false,
                },
                DistillTerms {
                    query: true,
                    im_reward: false,
                    sim_reward: true,
                },
                DistillTerms::ALL,
            ];
            for terms in variants {
                let c = with(&|c| c.student.terms = terms);
                let trained = distill(&c, suite, &records)?;
                let planner = StudentPlanner {
                    student: Student::new(trained.params)?,
                    world: c.world_config(),
                    label: terms.label(),
                };
                rows.push(evaluate(&planner, &test, &c, &terms.label())?);
            }
            "test-half"
        }
    };
    Ok(AblationTable {
        schema_version: REPORT_SCHEMA_VERSION,
        axis,
        split: split.to_string(),
        rows,
    })
}
