use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use gaussbath_core::experiment::{
    compare_with_oracle, emit, preset, preset_names, run, write_oracle_csv, RunConfig,
};
use gaussbath_core::Error;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "GAUSSBATH_OUT_DIR";

#[derive(Parser)]
#[command(name = "gaussbath", version, about = "Detector-bath Gaussian dynamics and entropy production")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file and write <stem>.csv and <stem>.json.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one or more built-in figure presets.
    Preset {
        /// Preset names, or "all".
        #[arg(required = true)]
        names: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
        /// Worker threads for independent presets.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// Compare a small configuration against the truncated Fock-space solution.
    #[command(hide = true)]
    Oracle {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args, Clone)]
struct Overrides {
    /// Output directory; falls back to the config, then $GAUSSBATH_OUT_DIR, then ".".
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Integration step, replacing the configured one.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of recorded samples, replacing the configured one.
    #[arg(long)]
    samples: Option<usize>,
}

impl Overrides {
    fn apply(&self, mut config: RunConfig) -> RunConfig {
        if let Some(dt) = self.dt {
            config = config.with_dt(dt);
        }
        if let Some(samples) = self.samples {
            config = config.with_samples(samples);
        }
        config
    }

    fn out_dir(&self, config: &RunConfig) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| config.output.dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Exit statuses, ordered by severity so that the worst one wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Ok = 0,
    Invalid = 2,
    Numerical = 3,
    Io = 4,
}

impl Status {
    fn of(e: &Error) -> Self {
        if e.is_io() {
            Status::Io
        } else if e.is_numerical() {
            Status::Numerical
        } else {
            Status::Invalid
        }
    }
}

fn fail(context: &str, e: &Error) -> Status {
    eprintln!("error: {context}: {e}");
    Status::of(e)
}

fn load(path: &Path) -> Result<RunConfig, Status> {
    RunConfig::from_path(path).map_err(|e| fail(&path.display().to_string(), &e))
}

fn execute(config: &RunConfig, out_dir: &Path) -> Status {
    let name = config.name().to_string();
    let record = match run(config) {
        Ok(r) => r,
        Err(e) => return fail(&name, &e),
    };
    let files = match emit(&record, out_dir) {
        Ok(f) => f,
        Err(e) => return fail(&name, &e),
    };
    let t = &record.telemetry;
    if record.passed() {
        println!(
            "{name}: ok, {} samples, defect {:.1e}, entropy drift {:.1e} -> {}",
            record.samples.len(),
            t.max_symplectic_defect,
            t.max_joint_entropy_drift,
            files.csv.display()
        );
        Status::Ok
    } else {
        for g in t.failed_gates() {
            eprintln!("{name}: gate {} failed: {:e} vs limit {:e}", g.name, g.value, g.limit);
        }
        println!("{name}: FAILED, data written to {}", files.csv.display());
        Status::Numerical
    }
}

fn run_presets(names: &[String], overrides: &Overrides, jobs: usize) -> Status {
    let names: Vec<String> = if names.iter().any(|n| n == "all") {
        preset_names().map(String::from).collect()
    } else {
        names.to_vec()
    };
    let mut configs = Vec::with_capacity(names.len());
    for name in &names {
        match preset(name) {
            Ok(c) => configs.push(overrides.apply(c)),
            Err(e) => return fail(name, &e),
        }
    }
    let next = AtomicUsize::new(0);
    let worst = Mutex::new(Status::Ok);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, configs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(config) = configs.get(i) else { break };
                let status = execute(config, &overrides.out_dir(config));
                let mut w = worst.lock().expect("status lock");
                *w = (*w).max(status);
            });
        }
    });
    worst.into_inner().expect("status lock")
}

fn validate(path: &Path) -> Status {
    let config = match load(path) {
        Ok(c) => c,
        Err(s) => return s,
    };
    let resolved = match config.resolve() {
        Ok(r) => r,
        Err(e) => return fail(&path.display().to_string(), &e),
    };
    println!(
        "{}: valid, {} modes, {} steps, {} samples",
        config.name(),
        resolved.model.n_modes(),
        resolved.grid.steps(),
        resolved.grid.sample_steps().len()
    );
    let labels: Vec<&str> = resolved.columns.iter().map(|c| c.label()).collect();
    println!("columns: t, {}", labels.join(", "));
    if let Ok(assumptions) = config.assumptions() {
        for (key, a) in assumptions {
            println!("assumption {key} = {} ({})", a.value, a.note);
        }
    }
    Status::Ok
}

fn oracle(path: &Path, overrides: &Overrides) -> Status {
    let config = match load(path) {
        Ok(c) => overrides.apply(c),
        Err(s) => return s,
    };
    let cmp = match compare_with_oracle(&config) {
        Ok(c) => c,
        Err(e) => return fail(config.name(), &e),
    };
    let dir = overrides.out_dir(&config);
    let target = dir.join(format!("{}_oracle.csv", config.stem()));
    let written = fs::create_dir_all(&dir)
        .and_then(|_| fs::File::create(&target))
        .map_err(|source| Error::Io {
            path: target.clone(),
            source,
        })
        .and_then(|file| write_oracle_csv(&cmp, file));
    if let Err(e) = written {
        return fail(config.name(), &e);
    }
    let d = &cmp.deviation;
    println!(
        "{}: ensemble {} states, leakage {:.1e}, max deviation {:.2e} (S_sys {:.2e}, MI {:.2e}, zeta {:.2e}) -> {}",
        config.name(),
        cmp.ensemble_size,
        cmp.max_leakage,
        d.max(),
        d.s_sys,
        d.mi_sys_env,
        d.zeta,
        target.display()
    );
    if cmp.passed() {
        Status::Ok
    } else {
        println!("{}: FAILED, tolerance {:e}", config.name(), cmp.tolerance);
        Status::Numerical
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match &cli.command {
        Command::Run { config, overrides } => match load(config) {
            Ok(c) => {
                let c = overrides.apply(c);
                execute(&c, &overrides.out_dir(&c))
            }
            Err(s) => s,
        },
        Command::Preset {
            names,
            overrides,
            jobs,
        } => run_presets(names, overrides, *jobs),
        Command::Validate { config } => validate(config),
        Command::Oracle { config, overrides } => oracle(config, overrides),
    };
    ExitCode::from(status as u8)
}
