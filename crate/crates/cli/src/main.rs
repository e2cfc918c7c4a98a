use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wpt::config::{sha256_hex, RewardSource, RunConfig};
use wpt::eval::svg::{reward_bars, trajectory_overlay};
use wpt::eval::{
    closed_loop_eval, generate_suite, open_loop_eval, run_ablation, Axis, ConstantVelocity, ExpertReplay, Planner,
    Stationary, StudentPlanner, Suite, TeacherPlanner,
};
use wpt::learned::RewardHeadParams;
use wpt::pipeline::{distill, make_teacher, teacher_records, train_reward, Artifact, TeacherRecord};
use wpt::policy::{DistillTerms, Interaction, Student, StudentParams};
use wpt::reward::SelectionMode;
use wpt::world::{MicroWorld, Scenario};
use wpt::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "wpt", version, about = "World-model teacher and distilled student planners on a micro occupancy world")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scenario suite file.
    #[arg(long, global = true)]
    suite: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[arg(long, global = true, value_enum)]
    selection_mode: Option<SelectionArg>,
    #[arg(long, global = true, value_enum)]
    reward_source: Option<SourceArg>,
    #[arg(long, global = true, value_enum)]
    interaction: Option<InteractionArg>,
    /// Distillation terms on top of behaviour cloning (repeatable).
    #[arg(long, global = true, value_enum)]
    distill: Vec<DistillArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SelectionArg {
    Linear,
    Logfuse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SourceArg {
    Engine,
    Learned,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InteractionArg {
    Gt,
    Wm,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum DistillArg {
    Query,
    Imreward,
    Simreward,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Expert,
    Stationary,
    ConstantVelocity,
    Teacher,
    Student,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    All,
    Train,
    Test,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate the scenario suite.
    GenScenarios,
    /// Train the learned reward heads on the training half.
    TrainReward,
    /// Run the teacher on the suite; write its cache and reports.
    RunTeacher {
        /// Learned reward heads (needed with --reward-source learned).
        #[arg(long)]
        reward_params: Option<PathBuf>,
    },
    /// Distil a student from a teacher cache.
    DistillStudent {
        #[arg(long)]
        teacher_cache: PathBuf,
    },
    /// Evaluate a policy open- and closed-loop.
    Eval {
        #[arg(long, value_enum)]
        policy: PolicyArg,
        #[arg(long)]
        student_params: Option<PathBuf>,
        #[arg(long)]
        reward_params: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        split: SplitArg,
        /// Also write per-scenario SVG overlays.
        #[arg(long)]
        svg: bool,
    },
    /// Run one ablation axis.
    Ablate {
        #[arg(long)]
        axis: String,
        #[arg(long)]
        reward_params: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat = e.category();
            let report = ErrorReport {
                error: cat.name(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&report).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(cat.exit_code() as u8)
        }
    }
}

fn resolve_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.display().to_string());
    }
    if let Some(p) = c.parallel {
        cfg.parallel = Some(p);
    }
    if let Some(m) = c.selection_mode {
        cfg.reward.selection_mode = match m {
            SelectionArg::Linear => SelectionMode::Linear,
            SelectionArg::Logfuse => SelectionMode::Logfuse,
        };
    }
    if let Some(r) = c.reward_source {
        cfg.teacher.reward_source = match r {
            SourceArg::Engine => RewardSource::Engine,
            SourceArg::Learned => RewardSource::Learned,
            SourceArg::Random => RewardSource::Random,
        };
    }
    if let Some(i) = c.interaction {
        cfg.teacher.interaction = match i {
            InteractionArg::Gt => Interaction::Gt,
            InteractionArg::Wm => Interaction::Wm,
        };
    }
    if !c.distill.is_empty() {
        cfg.student.terms = DistillTerms {
            query: c.distill.contains(&DistillArg::Query),
            im_reward: c.distill.contains(&DistillArg::Imreward),
            sim_reward: c.distill.contains(&DistillArg::Simreward),
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    suite_path: Option<PathBuf>,
}

impl Ctx {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let p = self.out.join(name);
        std::fs::write(&p, contents).map_err(|e| Error::io(&p, e))
    }

    fn write_artifact<T: Serialize + serde::de::DeserializeOwned>(
        &self,
        name: &str,
        kind: &str,
        inputs: &BTreeMap<String, String>,
        body: T,
    ) -> Result<()> {
        self.write(name, &Artifact::new(kind, &self.cfg, inputs.clone(), body).to_json()?)
    }

    /// The suite and its hash; the suite must match the configured seed
    /// and suite section.
    fn suite(&self) -> Result<(Suite, String)> {
        let p = self
            .suite_path
            .as_ref()
            .ok_or_else(|| Error::Config("--suite is required for this command".into()))?;
        let s = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        let suite = Suite::from_json(&s)?;
        if suite.config != self.cfg.suite {
            return Err(Error::Schema("suite was generated with a different suite configuration".into()));
        }
        Ok((suite, sha256_hex(s.as_bytes())))
    }
}

fn read_artifact<T: Serialize + serde::de::DeserializeOwned>(path: &Path, kind: &str) -> Result<(T, String)> {
    let (a, hash) = Artifact::<T>::read(path, kind)?;
    Ok((a.body, hash))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli.common)?;
    let out = PathBuf::from(cfg.out.clone().unwrap_or_else(|| "wpt-out".into()));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let ctx = Ctx {
        out,
        suite_path: cli.common.suite.clone(),
        cfg,
    };
    let threads = ctx.cfg.parallel;
    wpt::pipeline::with_threads(threads, || dispatch(&ctx, cli.cmd))?
}

fn dispatch(ctx: &Ctx, cmd: Cmd) -> Result<()> {
    let cfg = &ctx.cfg;
    match cmd {
        Cmd::GenScenarios => {
            let mut suite = generate_suite(&cfg.suite, cfg.seed)?;
            suite.config_hash = cfg.hash();
            ctx.write("suite.json", &suite.to_json()?)?;
            eprintln!("wrote {} scenarios", suite.scenarios.len());
        }
        Cmd::TrainReward => {
            let (suite, h) = ctx.suite()?;
            let inputs = BTreeMap::from([("suite".to_string(), h)]);
            let trained = train_reward(cfg, &suite)?;
            let mut csv = String::from("step,loss\n");
            for (i, l) in trained.loss_curve.iter().enumerate() {
                csv.push_str(&format!("{i},{l}\n"));
            }
            ctx.write("reward_loss.csv", &csv)?;
            ctx.write_artifact("reward_params.json", "reward-params", &inputs, trained.params)?;
        }
        Cmd::RunTeacher { reward_params } => {
            let (suite, h) = ctx.suite()?;
            let mut inputs = BTreeMap::from([("suite".to_string(), h)]);
            let learned = load_reward(reward_params.as_deref(), &mut inputs)?;
            let world = MicroWorld::new(cfg.world_config());
            let teacher = make_teacher(cfg, &world, learned.as_ref())?;
            let all: Vec<&Scenario> = suite.scenarios.iter().collect();
            let records = teacher_records(&teacher, &all)?;
            ctx.write_artifact("teacher_cache.json", "teacher-cache", &inputs, records)?;
            let planner = TeacherPlanner {
                teacher,
                label: "teacher".into(),
            };
            write_reports(ctx, &planner, &all, &inputs, "teacher")?;
        }
        Cmd::DistillStudent { teacher_cache } => {
            let (suite, h) = ctx.suite()?;
            let (records, ch) = read_artifact::<Vec<TeacherRecord>>(&teacher_cache, "teacher-cache")?;
            let inputs = BTreeMap::from([("suite".to_string(), h), ("teacher_cache".to_string(), ch)]);
            let trained = distill(cfg, &suite, &records)?;
            let mut csv = String::from("step,loss\n");
            for (i, l) in trained.loss_curve.iter().enumerate() {
                csv.push_str(&format!("{i},{l}\n"));
            }
            ctx.write("student_loss.csv", &csv)?;
            let mut terms = String::from("epoch,exp,query,reward,total\n");
            for (i, t) in trained.epoch_terms.iter().enumerate() {
                terms.push_str(&format!("{i},{},{},{},{}\n", t.exp, t.query, t.reward, t.total));
            }
            ctx.write("student_terms.csv", &terms)?;
            ctx.write_artifact("student_params.json", "student-params", &inputs, trained.params)?;
        }
        Cmd::Eval {
            policy,
            student_params,
            reward_params,
            split,
            svg,
        } => {
            let (suite, h) = ctx.suite()?;
            let mut inputs = BTreeMap::from([("suite".to_string(), h)]);
            let scenarios: Vec<&Scenario> = match split {
                SplitArg::All => suite.scenarios.iter().collect(),
                SplitArg::Train => suite.train_half(),
                SplitArg::Test => suite.test_half(),
            };
            let steps = cfg.suite.horizon;
            let dt = cfg.suite.dt;
            let world = MicroWorld::new(cfg.world_config());
            let planner: Box<dyn Planner + '_> = match policy {
                PolicyArg::Expert => Box::new(ExpertReplay { steps }),
                PolicyArg::Stationary => Box::new(Stationary { steps, dt }),
                PolicyArg::ConstantVelocity => Box::new(ConstantVelocity { steps, dt }),
                PolicyArg::Teacher => {
                    let learned = load_reward(reward_params.as_deref(), &mut inputs)?;
                    Box::new(TeacherPlanner {
                        teacher: make_teacher(cfg, &world, learned.as_ref())?,
                        label: "teacher".into(),
                    })
                }
                PolicyArg::Student => {
                    let p = student_params
                        .ok_or_else(|| Error::Config("--student-params is required for the student policy".into()))?;
                    let (params, sh) = read_artifact::<StudentParams>(&p, "student-params")?;
                    inputs.insert("student_params".into(), sh);
                    Box::new(StudentPlanner {
                        student: Student::new(params)?,
                        world: cfg.world_config(),
                        label: "student".into(),
                    })
                }
            };
            write_reports(ctx, planner.as_ref(), &scenarios, &inputs, "eval")?;
            if svg {
                let dir = ctx.out.join("svg");
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                for sc in &scenarios {
                    let plan = planner.plan(sc)?;
                    let p = dir.join(format!("scenario_{:04}.svg", sc.id));
                    std::fs::write(&p, trajectory_overlay(sc, &plan)).map_err(|e| Error::io(&p, e))?;
                    if let PolicyArg::Teacher = policy {
                        let learned = load_reward(reward_params.as_deref(), &mut BTreeMap::new())?;
                        let t = make_teacher(cfg, &world, learned.as_ref())?;
                        let o = t.plan(sc)?;
                        let p = dir.join(format!("rewards_{:04}.svg", sc.id));
                        std::fs::write(&p, reward_bars(&o.rewards, o.index)).map_err(|e| Error::io(&p, e))?;
                    }
                }
            }
        }
        Cmd::Ablate { axis, reward_params } => {
            let axis: Axis = axis.parse()?;
            let (suite, h) = ctx.suite()?;
            let mut inputs = BTreeMap::from([("suite".to_string(), h)]);
            let learned = load_reward(reward_params.as_deref(), &mut inputs)?;
            let table = run_ablation(axis, &suite, cfg, learned.as_ref())?;
            let name = axis.name();
            ctx.write(&format!("ablation_{name}.md"), &table.to_markdown())?;
            ctx.write(&format!("ablation_{name}.csv"), &table.to_csv())?;
            print!("{}", table.to_markdown());
            ctx.write_artifact(&format!("ablation_{name}.json"), "ablation", &inputs, table)?;
        }
    }
    Ok(())
}

fn load_reward(path: Option<&Path>, inputs: &mut BTreeMap<String, String>) -> Result<Option<RewardHeadParams>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let (params, h) = read_artifact::<RewardHeadParams>(p, "reward-params")?;
            inputs.insert("reward_params".into(), h);
            Ok(Some(params))
        }
    }
}

fn write_reports(
    ctx: &Ctx,
    planner: &dyn Planner,
    scenarios: &[&Scenario],
    inputs: &BTreeMap<String, String>,
    prefix: &str,
) -> Result<()> {
    let cfg = &ctx.cfg;
    let world = cfg.world_config();
    let ol = open_loop_eval(planner, scenarios, &world, &cfg.open_loop)?;
    let cl = closed_loop_eval(planner, scenarios, &world, &cfg.closed_loop, cfg.suite.horizon)?;
    ctx.write(&format!("{prefix}_open_loop.csv"), &ol.to_csv())?;
    ctx.write(&format!("{prefix}_closed_loop.csv"), &cl.to_csv())?;
    eprintln!(
        "{}: L2 avg {:.3} m, collision avg {:.2}%, driving score {:.2}, success {:.1}%",
        ol.policy, ol.l2_avg, ol.collision_avg, cl.driving_score, cl.success_rate
    );
    ctx.write_artifact(&format!("{prefix}_open_loop.json"), "open-loop-report", inputs, ol)?;
    ctx.write_artifact(&format!("{prefix}_closed_loop.json"), "closed-loop-report", inputs, cl)?;
    Ok(())
}
