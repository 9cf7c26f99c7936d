use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use notezipf::report::{analyze, compare, simulate_report, AnalyzeOptions, InputKind};
use notezipf::simon_fit::{DofConvention, FitOptions, Residuals};
use notezipf::{DurationGrid, SimConfig, SimMode, TokenizeOptions};

#[derive(Parser)]
#[command(
    name = "notezipf",
    version,
    about = "Rank-frequency analysis of note and word streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the rank law to one file and write report.json, ranks.csv and spectrum.csv.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        opts: AnalyzeArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the copy-or-innovate process and check its statistics.
    Simulate {
        #[arg(long, value_enum, default_value_t = ModeArg::Constant)]
        mode: ModeArg,
        /// Innovation rate in constant mode.
        #[arg(long, default_value_t = 0.02)]
        alpha: f64,
        /// Vocabulary growth exponent in sublinear mode.
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long, default_value_t = 200_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the generated stream to tokens.txt.
        #[arg(long)]
        emit_tokens: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Analyze several files and rank them by fitted nu.
    Compare {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        opts: AnalyzeArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input kind; detected from the file when omitted.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Drop notes shorter than this many ticks.
    #[arg(long, default_value_t = 0)]
    min_ticks: u64,
    /// Duration grid file, one ratio to the quarter note per line.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ResidualArg::Log)]
    residuals: ResidualArg,
    /// Degrees of freedom for the chi-square test.
    #[arg(long, default_value = "v-2")]
    dof: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Midi,
    Text,
    Tokens,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResidualArg {
    Log,
    Linear,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Constant,
    Sublinear,
}

impl AnalyzeArgs {
    fn build(&self) -> anyhow::Result<AnalyzeOptions> {
        let grid = match &self.grid {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("reading grid {}", p.display()))?
                .parse::<DurationGrid>()
                .with_context(|| format!("parsing grid {}", p.display()))?,
            None => DurationGrid::default(),
        };
        let dof: DofConvention = self.dof.parse()?;
        Ok(AnalyzeOptions {
            kind: self.kind.map(|k| match k {
                KindArg::Midi => InputKind::Midi,
                KindArg::Text => InputKind::Text,
                KindArg::Tokens => InputKind::Tokens,
            }),
            tokenize: TokenizeOptions {
                min_ticks: self.min_ticks,
                grid,
            },
            grid_path: self.grid.clone(),
            fit: FitOptions {
                residuals: match self.residuals {
                    ResidualArg::Log => Residuals::Log,
                    ResidualArg::Linear => Residuals::Linear,
                },
                dof,
                ..FitOptions::default()
            },
        })
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Analyze { path, opts, out } => {
            let a = analyze(&path, &opts.build()?)?;
            a.write_outputs(&out)?;
            let r = &a.report;
            match (&r.fit, &r.fit_warning) {
                (Some(f), _) => println!(
                    "{}: V={} T={} nu={} z={} chi2={} dof={} p={}",
                    r.source.path, r.distinct, r.total, f.nu, f.z, f.chi2, f.dof, f.p_value
                ),
                (None, Some(w)) => {
                    println!("{}: V={} T={} no fit", r.source.path, r.distinct, r.total);
                    eprintln!("warning: {}: {}", w.kind, w.message);
                }
                (None, None) => {}
            }
        }
        Command::Simulate {
            mode,
            alpha,
            nu,
            steps,
            seed,
            emit_tokens,
            out,
        } => {
            let mode = match mode {
                ModeArg::Constant => SimMode::ConstantRate { alpha },
                ModeArg::Sublinear => SimMode::Sublinear { nu },
            };
            let sim = simulate_report(&SimConfig { mode, steps, seed })?;
            sim.write_outputs(&out, emit_tokens)?;
            let r = &sim.report;
            println!("V={} T={}", r.distinct, r.steps);
            if let Some(v) = &r.verify {
                println!("gamma={} nu={} z={}", v.gamma_hat, v.nu_hat, v.z_hat);
            }
            if let Some(w) = &r.verify_warning {
                eprintln!("warning: {}: {}", w.kind, w.message);
            }
        }
        Command::Compare { paths, opts, out } => {
            let c = compare(&paths, &opts.build()?);
            c.write_outputs(&out)?;
            for row in &c.rows {
                match row.nu {
                    Some(nu) => println!("{}\tnu={}", row.path, nu),
                    None => println!("{}\tno fit", row.path),
                }
            }
            for e in &c.errors {
                eprintln!("error: {}: {}: {}", e.path, e.kind, e.message);
            }
            if c.rows.is_empty() {
                bail!("no file could be analyzed");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
