//! The full pipeline in memory: every file the command-line tool would write
//! for one seed, keyed by file name.

use std::collections::BTreeMap;
use wpt::config::{sha256_hex, RunConfig};
use wpt::eval::{closed_loop_eval, generate_suite, open_loop_eval, Planner, StudentPlanner, Suite, TeacherPlanner};
use wpt::pipeline::{distill, make_teacher, teacher_records, train_reward, with_threads, Artifact, TeacherRecord};
use wpt::policy::{Student, StudentParams};
use wpt::world::{MicroWorld, Scenario};
use wpt::Result;

pub struct PipelineRun {
    pub files: BTreeMap<String, String>,
    pub suite: Suite,
    pub student: StudentParams,
}

fn loss_csv(curve: &[f64]) -> String {
    let mut s = String::from("step,loss\n");
    for (i, l) in curve.iter().enumerate() {
        s.push_str(&format!("{i},{l}\n"));
    }
    s
}

fn reports(
    files: &mut BTreeMap<String, String>,
    cfg: &RunConfig,
    planner: &dyn Planner,
    scenarios: &[&Scenario],
    inputs: &BTreeMap<String, String>,
    prefix: &str,
) -> Result<()> {
    let world = cfg.world_config();
    let ol = open_loop_eval(planner, scenarios, &world, &cfg.open_loop)?;
    let cl = closed_loop_eval(planner, scenarios, &world, &cfg.closed_loop, cfg.suite.horizon)?;
    files.insert(format!("{prefix}_open_loop.csv"), ol.to_csv());
    files.insert(format!("{prefix}_closed_loop.csv"), cl.to_csv());
    files.insert(
        format!("{prefix}_open_loop.json"),
        Artifact::new("open-loop-report", cfg, inputs.clone(), ol).to_json()?,
    );
    files.insert(
        format!("{prefix}_closed_loop.json"),
        Artifact::new("closed-loop-report", cfg, inputs.clone(), cl).to_json()?,
    );
    Ok(())
}

/// Suite, reward heads, teacher cache, student and the teacher and student
/// reports, on a pool of `threads` workers.
pub fn run_pipeline(cfg: &RunConfig, threads: usize) -> Result<PipelineRun> {
    with_threads(Some(threads), || {
        let mut files = BTreeMap::new();
        let mut suite = generate_suite(&cfg.suite, cfg.seed)?;
        suite.config_hash = cfg.hash();
        let suite_json = suite.to_json()?;
        let inputs = BTreeMap::from([("suite".to_string(), sha256_hex(suite_json.as_bytes()))]);
        files.insert("suite.json".into(), suite_json);

        let reward = train_reward(cfg, &suite)?;
        files.insert("reward_loss.csv".into(), loss_csv(&reward.loss_curve));
        files.insert(
            "reward_params.json".into(),
            Artifact::new("reward-params", cfg, inputs.clone(), reward.params).to_json()?,
        );

        let world = MicroWorld::new(cfg.world_config());
        let teacher = make_teacher(cfg, &world, None)?;
        let all: Vec<&Scenario> = suite.scenarios.iter().collect();
        let records = teacher_records(&teacher, &all)?;
        let cache = Artifact::new("teacher-cache", cfg, inputs.clone(), records).to_json()?;
        let mut student_inputs = inputs.clone();
        student_inputs.insert("teacher_cache".into(), sha256_hex(cache.as_bytes()));
        let records = Artifact::<Vec<TeacherRecord>>::from_json(&cache, "teacher-cache")?.body;
        files.insert("teacher_cache.json".into(), cache);
        let planner = TeacherPlanner {
            teacher,
            label: "teacher".into(),
        };
        reports(&mut files, cfg, &planner, &all, &inputs, "teacher")?;

        let trained = distill(cfg, &suite, &records)?;
        files.insert("student_loss.csv".into(), loss_csv(&trained.loss_curve));
        let params_json = Artifact::new("student-params", cfg, student_inputs.clone(), trained.params.clone()).to_json()?;
        let mut eval_inputs = inputs.clone();
        eval_inputs.insert("student_params".into(), sha256_hex(params_json.as_bytes()));
        files.insert("student_params.json".into(), params_json);
        let planner = StudentPlanner {
            student: Student::new(trained.params.clone())?,
            world: cfg.world_config(),
            label: "student".into(),
        };
        reports(&mut files, cfg, &planner, &suite.test_half(), &eval_inputs, "student")?;
        Ok(PipelineRun {
            files,
            suite,
            student: trained.params,
        })
    })?
}
