//! `weakrev` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! failures while running an experiment.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::harness::config::{ExperimentConfig, NoisePreset, StateSpec};
use crate::harness::experiments::{self, run_fig2, run_fig3, run_fig4};
use crate::harness::output::{self, write_file, write_json};
use crate::info::{erasure_check, strategy_dominance_scan, write_scan_csv};
use crate::measurement::PartialCollapseStrength;
use crate::qubit::{fidelity_pure, Cardinal};
use crate::rng;
use crate::tomography::io::matrix_rows;
use crate::tomography::{linear_inversion, mle_state, process_fidelity, read_counts_csv, write_counts_csv, ChiMatrix};

/// Overrides the output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "WEAKREV_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "weakrev",
    version,
    about = "Weak measurement and its reversal on a simulated photonic qubit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseArg {
    Off,
    PaperLike,
    Custom,
}

impl From<NoiseArg> for NoisePreset {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Off => NoisePreset::Off,
            NoiseArg::PaperLike => NoisePreset::PaperLike,
            NoiseArg::Custom => NoisePreset::Custom,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON); defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides $WEAKREV_OUT_DIR and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `custom` keeps the config file's noise block.
    #[arg(long, value_enum, default_value = "custom")]
    noise: NoiseArg,
}

fn parse_state(s: &str) -> Result<StateSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strength(s: &str) -> Result<PartialCollapseStrength, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    PartialCollapseStrength::new(v).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recovery fidelities and Bloch vectors over input states and strengths.
    Fig2(Common),
    /// Process tomography of the success-conditioned channel.
    Fig3(Common),
    /// Estimation fidelity of both guessing strategies.
    Fig4(Common),
    /// Sampled measure-and-reverse runs for one state.
    Trajectory {
        #[command(flatten)]
        common: Common,
        /// `H`, `bloch:x,y,z` or `amp:re_a,im_a,re_b,im_b`.
        #[arg(long, default_value = "D", value_parser = parse_state)]
        state: StateSpec,
        #[arg(long, default_value = "0.5", value_parser = parse_strength)]
        p: PartialCollapseStrength,
        /// Defaults to the config's `trajectory_trials`.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// State tomography of simulated or recorded counts.
    Qst {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "H", value_parser = parse_state)]
        state: StateSpec,
        /// Reconstruct from a `setting,count,shots` CSV instead of simulating.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Process tomography at a single strength.
    Qpt {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0.895", value_parser = parse_strength)]
        p: PartialCollapseStrength,
    },
    /// Analytic strategy comparison and the erasure check.
    Infogain(Common),
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

struct Context {
    config: ExperimentConfig,
    out_dir: PathBuf,
}

fn load(common: &Common) -> Result<Context, Failure> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    config = config.with_noise_preset(common.noise.into());
    config.validate()?;
    let out_dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| config.output_dir.clone());
    Ok(Context { config, out_dir })
}

fn announce(stdout: &mut dyn Write, path: &Path) -> std::io::Result<()> {
    writeln!(stdout, "wrote {}", path.display())
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(Error::Io(e));
    match command {
        Command::Fig2(common) => {
            let ctx = load(&common)?;
            let rows = run_fig2(&ctx.config)?;
            let path = write_file(&ctx.out_dir, "fig2.csv", |w| output::write_fig2_csv(&rows, w))?;
            announce(stdout, &path).map_err(io)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                writeln!(
                    stderr,
                    "warning: {failed} of {} cells failed; see the detail column",
                    rows.len()
                )
                .map_err(io)?;
            }
            let min = rows
                .iter()
                .filter_map(|r| r.outcome.as_ref().ok())
                .map(|v| v.fidelity_initial_vs_recovered)
                .fold(f64::INFINITY, f64::min);
            writeln!(stdout, "min recovery fidelity: {min}").map_err(io)?;
        }
        Command::Fig3(common) => {
            let ctx = load(&common)?;
            let rows = run_fig3(&ctx.config)?;
            let path = write_file(&ctx.out_dir, "fig3_fidelity.csv", |w| output::write_fig3_csv(&rows, w))?;
            announce(stdout, &path).map_err(io)?;
            for r in &rows {
                match &r.outcome {
                    Ok((chi, _)) => {
                        let path = write_file(&ctx.out_dir, &output::chi_file_name(r.p), |w| write_json(chi, w))?;
                        announce(stdout, &path).map_err(io)?;
                    }
                    Err(e) => writeln!(stderr, "warning: p = {} failed: {e}", r.p).map_err(io)?,
                }
            }
            let min = rows
                .iter()
                .filter_map(|r| r.process_fidelity())
                .fold(f64::INFINITY, f64::min);
            writeln!(stdout, "min process fidelity: {min}").map_err(io)?;
        }
        Command::Fig4(common) => {
            let ctx = load(&common)?;
            let rows = run_fig4(&ctx.config)?;
            let path = write_file(&ctx.out_dir, "fig4.csv", |w| output::write_fig4_csv(&rows, w))?;
            announce(stdout, &path).map_err(io)?;
        }
        Command::Trajectory {
            common,
            state,
            p,
            trials,
        } => {
            let ctx = load(&common)?;
            let psi = state.resolve()?;
            let trials = trials.unwrap_or(ctx.config.trajectory_trials);
            if trials == 0 {
                return Err(Failure::Usage("--trials must be positive".into()));
            }
            if !p.is_reversible() {
                return Err(Failure::Usage(format!("--p {p} has no reversal; use p < 1")));
            }
            let s = experiments::run_trajectories(&psi, p, trials, ctx.config.seed)?;
            let path = write_file(&ctx.out_dir, "trajectory.csv", |w| output::write_trajectory_csv(&s, w))?;
            announce(stdout, &path).map_err(io)?;
            writeln!(
                stdout,
                "success frequency: {} (expected {}, sigma {})",
                s.success_frequency(),
                s.expected_success,
                s.success_sigma()
            )
            .map_err(io)?;
        }
        Command::Qst { common, state, counts } => {
            let ctx = load(&common)?;
            let records = match &counts {
                Some(path) => {
                    let file = std::fs::File::open(path)
                        .map_err(|e| Failure::Usage(format!("cannot read counts {}: {e}", path.display())))?;
                    read_counts_csv(file).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
                }
                None => {
                    let psi = state.resolve()?;
                    let records = experiments::qst_counts(&psi.density(), &ctx.config)?;
                    let path = write_file(&ctx.out_dir, "qst_counts.csv", |w| write_counts_csv(&records, w))?;
                    announce(stdout, &path).map_err(io)?;
                    records
                }
            };
            let linear = linear_inversion(&records)?;
            let path = write_file(&ctx.out_dir, "qst_linear.json", |w| {
                write_json(&matrix_rows(&linear), w)
            })?;
            announce(stdout, &path).map_err(io)?;
            let rho = mle_state(&records)?;
            let path = write_file(&ctx.out_dir, "qst_rho.json", |w| write_json(&rho, w))?;
            announce(stdout, &path).map_err(io)?;
            if counts.is_none() {
                let f = fidelity_pure(&state.resolve()?, &rho);
                writeln!(stdout, "fidelity with {state}: {f}").map_err(io)?;
            }
        }
        Command::Qpt { common, p } => {
            let ctx = load(&common)?;
            if !p.is_reversible() {
                return Err(Failure::Usage(format!("--p {p} has no reversal; use p < 1")));
            }
            let (chi, f) = experiments::qpt_cell(p, &ctx.config.effective_noise(), ctx.config.seed, 0)?;
            let path = write_file(&ctx.out_dir, "qpt_chi.json", |w| write_json(&chi, w))?;
            announce(stdout, &path).map_err(io)?;
            debug_assert_eq!(f, process_fidelity(&chi, &ChiMatrix::identity_channel()));
            writeln!(stdout, "process fidelity: {f}").map_err(io)?;
        }
        Command::Infogain(common) => {
            let ctx = load(&common)?;
            let rows = strategy_dominance_scan(&ctx.config.info_p_grid)?;
            let path = write_file(&ctx.out_dir, "infogain.csv", |w| write_scan_csv(&rows, w))?;
            announce(stdout, &path).map_err(io)?;
            let mut states: Vec<_> = Cardinal::ALL.iter().map(|c| c.state()).collect();
            states.extend(rng::haar_states(1000, ctx.config.seed));
            let worst = ctx
                .config
                .info_strengths()?
                .into_iter()
                .filter(|p| p.is_reversible())
                .map(|p| erasure_check(p, &states))
                .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))?;
            writeln!(stdout, "max |P_success - (1-p)|: {worst:e}").map_err(io)?;
        }
    }
    Ok(())
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
