use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcausal::bench::{
    random_bench, run_sweep, summarize, tetra_check, write_csv, write_json, ConfusionMatrix, Grid, SweepOptions,
    SweepRecord, SweepSummary, DEFAULT_RESAMPLES,
};
use qcausal::comb::{make_oracle, Mechanism, Mode, ScenarioSpec};
use qcausal::identify::{identify, AlgoConfig};

#[derive(Parser)]
#[command(name = "qcausal", version, about = "Distinguish direct-cause channels from common-cause states")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// `exact` or `shots=N`.
    #[arg(long, global = true, env = "QCAUSAL_MODE", default_value = "exact")]
    mode: ModeArg,
    #[arg(long, global = true, env = "QCAUSAL_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, env = "QCAUSAL_EPSILON")]
    epsilon: Option<f64>,
    #[arg(long, global = true, env = "QCAUSAL_DELTA")]
    delta: Option<f64>,
    #[arg(long = "epsilon-prime", global = true, env = "QCAUSAL_EPSILON_PRIME")]
    epsilon_prime: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true, env = "QCAUSAL_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "QCAUSAL_FORMAT", value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug)]
enum ModeArg {
    Exact,
    Shots(u64),
}

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "exact" {
            return Ok(ModeArg::Exact);
        }
        let n = s
            .strip_prefix("shots=")
            .ok_or_else(|| format!("expected `exact` or `shots=N`, got `{s}`"))?;
        match n.parse::<u64>() {
            Ok(0) | Err(_) => Err(format!("shot count must be a positive integer, got `{n}`")),
            Ok(n) => Ok(ModeArg::Shots(n)),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Edge,
    Plane,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a scenario family and classify both realizations at every point.
    Sweep {
        #[arg(long, value_enum, default_value = "edge")]
        family: FamilyArg,
        /// Edge grid size.
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Plane lattice denominator.
        #[arg(long, default_value_t = 10)]
        denominator: u32,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        /// Where to write the JSON summary in CSV mode (defaults next to --out).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Classify one scenario read from a JSON file (`-` for stdin).
    ///
    /// Exit status: 0 for a direct cause, 1 for a common cause, 2 on error.
    Identify { scenario: PathBuf },
    /// Classify a random ensemble and print its confusion matrix.
    RandomBench {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Exclude scenarios whose exact decision margin is below this.
        #[arg(long, default_value_t = 1e-3)]
        eta: f64,
    },
    /// Check tetrahedron membership of random channels and states.
    ///
    /// Exit status: 0 if every check passes, 1 otherwise, 2 on error.
    TetraCheck {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

impl Global {
    fn mode(&self) -> Mode {
        match self.mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Shots(shots) => Mode::Sampled { shots, seed: self.seed },
        }
    }

    fn config(&self) -> anyhow::Result<AlgoConfig> {
        let mut cfg = AlgoConfig::default();
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if let Some(e) = self.epsilon_prime {
            cfg.epsilon_prime = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn json_only(&self, command: &str) -> anyhow::Result<()> {
        if self.format == Some(Format::Csv) {
            bail!("{command} only writes JSON");
        }
        Ok(())
    }
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).context("cannot read stdin")?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    }
    Ok(text)
}

#[derive(Serialize)]
struct BenchReport {
    n: usize,
    eta: f64,
    shots: u64,
    seed: u64,
    accuracy: f64,
    matrix: ConfusionMatrix,
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let g = &cli.global;
    let cfg = g.config()?;
    match cli.command {
        Command::Sweep {
            family,
            points,
            denominator,
            resamples,
            summary,
        } => {
            let grid = match family {
                FamilyArg::Edge => Grid::Edge { points },
                FamilyArg::Plane => Grid::Plane { denominator },
            };
            let opts = SweepOptions {
                mode: g.mode(),
                config: cfg,
                resamples,
            };
            let records = run_sweep(grid, &opts)?;
            let sum = summarize(grid.family(), &records, &opts);
            let mut out = g.writer()?;
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    write_csv(&records, &mut out)?;
                    let path = summary.or_else(|| g.out.as_ref().map(|p| p.with_extension("summary.json")));
                    match path {
                        Some(p) => write_json(&sum, File::create(&p).with_context(|| format!("cannot create {}", p.display()))?)?,
                        None => write_json(&sum, io::stderr().lock())?,
                    }
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Full<'a> {
                        summary: &'a SweepSummary,
                        records: &'a [SweepRecord],
                    }
                    write_json(
                        &Full {
                            summary: &sum,
                            records: &records,
                        },
                        &mut out,
                    )?;
                }
            }
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Identify { scenario } => {
            g.json_only("identify")?;
            let text = read_input(&scenario)?;
            let scenario = ScenarioSpec::from_json(&text)
                .and_then(|s| s.to_scenario())
                .context("invalid scenario")?;
            let oracle = make_oracle(scenario, g.mode());
            let result = identify(&oracle, &cfg)?;
            let mut out = g.writer()?;
            write_json(&result, &mut out)?;
            out.flush()?;
            Ok(match result.verdict {
                Mechanism::DirectCause => ExitCode::from(0),
                Mechanism::CommonCause => ExitCode::from(1),
            })
        }
        Command::RandomBench { n, eta } => {
            let mode = g.mode();
            let matrix = random_bench(n, mode, eta, g.seed, &cfg)?;
            let report = BenchReport {
                n,
                eta,
                shots: mode.shots(),
                seed: g.seed,
                accuracy: matrix.accuracy(),
                matrix,
            };
            let mut out = g.writer()?;
            match g.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&report, &mut out)?,
                Format::Csv => {
                    let m = &report.matrix;
                    writeln!(out, "n,eta,N,seed,dc_as_dc,dc_as_cc,cc_as_dc,cc_as_cc,excluded,excluded_errors,accuracy")?;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        n, eta, report.shots, g.seed, m.dc_as_dc, m.dc_as_cc, m.cc_as_dc, m.cc_as_cc, m.excluded,
                        m.excluded_errors, report.accuracy
                    )?;
                }
            }
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::TetraCheck { samples } => {
            g.json_only("tetra-check")?;
            let report = tetra_check(samples, g.seed)?;
            let mut out = g.writer()?;
            write_json(&report, &mut out)?;
            out.flush()?;
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
