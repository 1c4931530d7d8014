use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dissipative::config::ExperimentConfig;
use dissipative::experiments::{
    baselines_csv, eigen_csv, eigs_at, jensen_demo, jensen_demo_json, run_sweep, run_verify, sweep_report_json,
    verify_json, SCHEMA,
};
use dissipative::{Error, Result};
use serde_json::{json, Value};

/// Batch runner for spectra of `-d²/dx² + q + iγχ_[0,R]` and checks of
/// their bounds. Writes CSV and JSON into `--out`.
#[derive(Debug, Parser)]
#[command(name = "dissipative", version)]
struct Cli {
    #[command(subcommand)]
    command: CommandName,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum CommandName {
    /// Eigenvalues for one R.
    Eigs,
    /// Eigenvalues over a list of R, with a bound report.
    Sweep,
    /// Runs the invariant suites.
    Verify,
    /// The half-disc zero count applied to f_R(z − ia).
    JensenDemo,
    /// Magnitude and count bounds against baseline bounds per R.
    Baselines,
}

impl CommandName {
    fn key(self) -> &'static str {
        match self {
            CommandName::Eigs => "eigs",
            CommandName::Sweep => "sweep",
            CommandName::Verify => "verify",
            CommandName::JensenDemo => "jensen-demo",
            CommandName::Baselines => "baselines",
        }
    }
}

#[derive(Debug, Args)]
struct Overrides {
    /// Flat `key = value` file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    gamma: Option<String>,
    #[arg(long = "R", global = true)]
    r: Option<String>,
    /// Comma-separated list of R.
    #[arg(long = "R-list", global = true)]
    r_list: Option<String>,
    /// Potential spec such as `box:A=1,Q=1` or `expdecay(1,5)`.
    #[arg(long, global = true)]
    potential: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads; 0 or absent uses every core.
    #[arg(long, global = true)]
    threads: Option<String>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("gamma", &self.gamma),
            ("R", &self.r),
            ("R_list", &self.r_list),
            ("potential", &self.potential),
            ("out", &self.out),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("threads", &self.threads),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A runnable experiment. Writes its files under `cfg.out` and returns a
/// short JSON summary for standard output.
trait Command {
    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome>;
}

struct Outcome {
    summary: Value,
    ok: bool,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Self { summary, ok: true }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

struct Eigs;

impl Command for Eigs {
    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let q = cfg.build_potential()?;
        let r = cfg.single_r()?;
        let set = eigs_at(cfg, &q, r)?;
        let path = write(&cfg.out, "eigs.csv", &eigen_csv(&[&set]))?;
        Ok(Outcome::ok(json!({
            "command": "eigs",
            "R": r,
            "count": set.count(),
            "csv": path.display().to_string(),
        })))
    }
}

fn r_tag(r: f64) -> String {
    format!("eigs_R{r}.csv")
}

struct Sweep;

impl Command for Sweep {
    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let sweep = run_sweep(cfg)?;
        for set in &sweep.sets {
            write(&cfg.out, &r_tag(set.problem.r()), &eigen_csv(&[set]))?;
        }
        let report = sweep_report_json(&sweep)?;
        let path = write(&cfg.out, "sweep_report.json", &pretty(&report)?)?;
        Ok(Outcome::ok(json!({
            "command": "sweep",
            "counts": sweep.rows.iter().map(|r| json!({"R": r.r, "count": r.count})).collect::<Vec<_>>(),
            "all_satisfied": report["all_satisfied"],
            "report": path.display().to_string(),
        })))
    }
}

struct Verify;

impl Command for Verify {
    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let suites = run_verify(cfg)?;
        let report = verify_json(&suites, cfg.seed);
        write(&cfg.out, "verify.json", &pretty(&report)?)?;
        let ok = report["failed"] == 0;
        Ok(Outcome { summary: report, ok })
    }
}

struct JensenDemo;

impl Command for JensenDemo {
    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let demo = jensen_demo(cfg)?;
        let report = jensen_demo_json(&demo);
        let path = write(&cfg.out, "jensen_demo.json", &pretty(&report)?)?;
        Ok(Outcome {
            summary: json!({
                "command": "jensen-demo",
                "bound": demo.bound,
                "true_count": demo.true_count,
                "naimark_bound": demo.naimark_bound,
                "report": path.display().to_string(),
            }),
            ok: demo.bound_holds() && demo.below_naimark(),
        })
    }
}

struct Baselines;

impl Command for Baselines {
    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let sweep = run_sweep(cfg)?;
        let path = write(&cfg.out, "baselines.csv", &baselines_csv(&sweep)?)?;
        Ok(Outcome::ok(json!({ "command": "baselines", "csv": path.display().to_string() })))
    }
}

fn registry() -> BTreeMap<&'static str, Box<dyn Command>> {
    let mut commands: BTreeMap<&'static str, Box<dyn Command>> = BTreeMap::new();
    commands.insert("eigs", Box::new(Eigs));
    commands.insert("sweep", Box::new(Sweep));
    commands.insert("verify", Box::new(Verify));
    commands.insert("jensen-demo", Box::new(JensenDemo));
    commands.insert("baselines", Box::new(Baselines));
    commands
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = cli.overrides.load()?;
    let commands = registry();
    let command = commands
        .get(cli.command.key())
        .ok_or_else(|| Error::Config(format!("no runner registered for `{}`", cli.command.key())))?;
    command.run(&cfg)
}

fn error_json(e: &Error) -> Value {
    let mut body = json!({ "kind": e.kind(), "message": e.to_string() });
    if let Error::BudgetExceeded { partial, .. } = e {
        body["partial_count"] = json!(partial.len());
    }
    json!({ "schema": SCHEMA, "error": body })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
