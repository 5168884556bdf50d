use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use contact_bench::config::{parse_integration, parse_mesh};
use contact_bench::run::run;
use contact_bench::studies::{dhat_study, kappa_study, mesh_study, write_study};
use contact_bench::{BenchError, ProblemConfig, ProblemId, Result};

#[derive(Parser)]
#[command(name = "contact-bench", about = "Embedded frictional contact benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark and write its profile, convergence log and summary.
    Run(CommonArgs),
    /// Run a parameter or mesh study.
    Study {
        #[arg(long, value_enum)]
        kind: StudyKind,
        /// Meshes for a mesh study, e.g. `11x11,25x25,51x51`.
        #[arg(long, value_delimiter = ',')]
        meshes: Vec<String>,
        /// Barrier thicknesses for a d_hat study.
        #[arg(long, value_delimiter = ',')]
        dhats: Vec<f64>,
        /// p_opt multiplier of the kappa study variant.
        #[arg(long, default_value_t = 0.5)]
        factor: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyKind {
    Mesh,
    Kappa,
    Dhat,
}

#[derive(Args)]
struct CommonArgs {
    /// horizontal_crack, inclined_crack, two_blocks or inclusion.
    #[arg(long)]
    problem: String,
    /// Key-value file overriding the registry defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mesh: Option<String>,
    /// barrier, penalty or hybrid.
    #[arg(long)]
    method: Option<String>,
    /// standard or averaged.
    #[arg(long)]
    integration: Option<String>,
    #[arg(long)]
    dhat: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl CommonArgs {
    fn config(&self) -> Result<ProblemConfig> {
        let id: ProblemId = self.problem.parse()?;
        let mut cfg = ProblemConfig::registry(id);
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
            if cfg.problem != id {
                return Err(BenchError::Config(format!(
                    "config file is for {} but --problem is {id}",
                    cfg.problem
                )));
            }
        }
        if let Some(m) = &self.mesh {
            (cfg.nx, cfg.ny) = parse_mesh(m)?;
        }
        if let Some(m) = &self.method {
            cfg.method = m.parse()?;
        }
        if let Some(i) = &self.integration {
            cfg.integration = parse_integration(i)?;
        }
        if self.dhat.is_some() {
            cfg.d_hat = self.dhat;
        }
        if let Some(s) = self.steps {
            cfg.steps = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run_command(common: &CommonArgs) -> Result<()> {
    let cfg = common.config()?;
    let outcome = run(&cfg, false)?;
    outcome.write(&common.out)?;
    print!("{}", outcome.summary().to_text());
    println!("wall_time_s={:.3}", outcome.report.wall_time().as_secs_f64());
    outcome.require_converged()
}

fn study_command(kind: StudyKind, meshes: &[String], dhats: &[f64], factor: f64, common: &CommonArgs) -> Result<()> {
    let cfg = common.config()?;
    let out: &Path = &common.out;
    match kind {
        StudyKind::Mesh => {
            let meshes = meshes.iter().map(|m| parse_mesh(m)).collect::<Result<Vec<_>>>()?;
            let study = mesh_study(&cfg, &meshes)?;
            let csv = study.to_csv();
            write_study(out, "mesh_study.csv", &csv, &study.runs.iter().collect::<Vec<_>>())?;
            print!("{csv}");
        }
        StudyKind::Kappa => {
            let study = kappa_study(&cfg, factor)?;
            let text = study.to_text();
            write_study(out, "kappa_study.txt", &text, &[&study.reference, &study.variant])?;
            print!("{text}");
        }
        StudyKind::Dhat => {
            let study = dhat_study(&cfg, dhats)?;
            let csv = study.to_csv();
            write_study(out, "dhat_study.csv", &csv, &study.runs.iter().collect::<Vec<_>>())?;
            print!("{csv}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(common) => run_command(common),
        Command::Study {
            kind,
            meshes,
            dhats,
            factor,
            common,
        } => study_command(*kind, meshes, dhats, *factor, common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
