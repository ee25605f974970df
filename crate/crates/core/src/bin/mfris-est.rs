use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mfris_est::harness::{
    emit_csv, parse_values, run_suite, run_trial, to_csv_string, SweepSpec, SweepVar, TrialPlan,
};
use mfris_est::scenario::{DespreadMode, Scheme, SystemConfig};
use mfris_est::training::{optimize_amplification, AoOptions, UpdateRule};
use mfris_est::Error;

#[derive(Parser)]
#[command(name = "mfris-est", version, about = "MF-RIS channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Optimize (a_R, a_T) and print one CSV row:
    /// a_R,a_T,epsilon,iterations,converged,closed_form_divergence
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Print the column header first.
        #[arg(long)]
        header: bool,
    },
    /// Sweep power, distance or user count and write CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_var)]
        var: SweepVar,
        /// `a:b:step` (inclusive) or `v1,v2,...`; defaults to the reference grid.
        #[arg(long)]
        values: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Run the property suite; exits nonzero if any check fails.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2_000)]
        trials: usize,
    },
    /// Run one block and dump its channels, beams summary and errors.
    Trial {
        #[command(flatten)]
        common: Common,
        /// Trial stream index.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file; defaults to the reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (CSV for sweep, channel fixture for trial).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated scheme tags.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_enum)]
    fair_comparison: Option<Toggle>,
    #[arg(long, value_enum, default_value = "oracle")]
    update: Update,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ideal,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Update {
    Oracle,
    ClosedForm,
}

fn parse_var(s: &str) -> Result<SweepVar, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Resolved {
    config: SystemConfig,
    schemes: Vec<Scheme>,
    update: UpdateRule,
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> mfris_est::Result<Resolved> {
        let mut config = match &self.config {
            Some(p) => SystemConfig::load(p)?,
            None => SystemConfig::default(),
        };
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(m) = self.mode {
            config.despread_mode = match m {
                Mode::Ideal => DespreadMode::Ideal,
                Mode::Full => DespreadMode::Full,
            };
        }
        if let Some(f) = self.fair_comparison {
            config.fair_comparison = matches!(f, Toggle::On);
        }
        let schemes = match &self.scheme {
            Some(s) => Scheme::parse_list(s)?,
            None => vec![config.scheme],
        };
        if schemes.is_empty() {
            return Err(Error::UnknownScheme(String::new()));
        }
        let update = match self.update {
            Update::Oracle => UpdateRule::Oracle,
            Update::ClosedForm => UpdateRule::ClosedForm,
        };
        Ok(Resolved {
            config: mfris_est::scenario::validate(config)?,
            schemes,
            update,
            out: self.out.clone(),
        })
    }
}

fn run(cli: Cli) -> mfris_est::Result<bool> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.verb {
        Verb::Optimize { common, header } => {
            let r = common.resolve()?;
            let s = optimize_amplification(
                &r.config,
                AoOptions {
                    update: r.update,
                    ..AoOptions::default()
                },
            )?;
            if header {
                writeln!(out, "a_R,a_T,epsilon,iterations,converged,closed_form_divergence")?;
            }
            let div = s.closed_form_divergence.map_or("nan".to_string(), |d| d.to_string());
            writeln!(out, "{},{},{},{},{},{}", s.a_r, s.a_t, s.epsilon, s.iterations, s.converged, div)?;
        }
        Verb::Sweep {
            common,
            var,
            values,
            trials,
        } => {
            let r = common.resolve()?;
            let mut spec = SweepSpec::new(var, r.config);
            if let Some(v) = values {
                spec.values = parse_values(&v)?;
            }
            spec.trials = trials;
            spec.update = r.update;
            if common.scheme.is_some() {
                spec.schemes = r.schemes;
            }
            let result = mfris_est::harness::run_sweep(&spec)?;
            match r.out {
                Some(p) => emit_csv(&result, &p)?,
                None => out.write_all(to_csv_string(&result)?.as_bytes())?,
            }
        }
        Verb::Validate { common, trials } => {
            let r = common.resolve()?;
            let checks = run_suite(&r.config, trials)?;
            let mut all = true;
            for c in &checks {
                all &= c.passed;
                let verdict = if c.passed { "pass" } else { "FAIL" };
                writeln!(out, "{verdict} {}: {}", c.name, c.detail)?;
            }
            return Ok(all);
        }
        Verb::Trial { common, index } => {
            let r = common.resolve()?;
            for scheme in r.schemes {
                let plan = TrialPlan::new(&r.config, scheme, r.update)?;
                let o = run_trial(&plan, r.config.seed, index)?;
                let (a_r, a_t) = plan.reported_amplification();
                writeln!(out, "scheme {scheme}")?;
                writeln!(out, "a_R {a_r}")?;
                writeln!(out, "a_T {a_t}")?;
                writeln!(out, "peak_power {}", o.schedule.peak_power())?;
                for (k, u) in plan.config.users.iter().enumerate() {
                    let f = o.errors.cascaded[k].map_or("unserved".to_string(), |x| x.to_string());
                    writeln!(out, "user {k} {} direct_sq_err {} cascaded_sq_err {f}", u.side, o.errors.direct[k])?;
                }
                writeln!(out, "sum_sq_err {}", o.errors.total())?;
                writeln!(out, "eps_theory {}", plan.theory.total)?;
                if let Some(p) = &r.out {
                    o.channels.write_text(std::fs::File::create(p)?)?;
                }
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error kind={} message={msg:?}", e.kind());
            ExitCode::from(2)
        }
    }
}
