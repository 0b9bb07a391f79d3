//! Command-line front end: parses configuration, dispatches scenarios, and
//! emits figure-reproduction CSVs with reproducibility headers.
//!
//! Exit codes: 0 success, 2 bad configuration, 3 numerical non-convergence,
//! 4 I/O failure. Errors print a single machine-parsable line on stderr.

mod config;
mod output;
mod scenarios;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Config, Resolver};
use scenarios::Ctx;

/// CLI-level error with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError {
            exit_code: 2,
            category: "config",
            message,
        }
    }

    pub fn numerical(message: String) -> Self {
        CliError {
            exit_code: 3,
            category: "numerical",
            message,
        }
    }

    pub fn io(message: String) -> Self {
        CliError {
            exit_code: 4,
            category: "io",
            message,
        }
    }
}

impl From<ensembleq::Error> for CliError {
    fn from(e: ensembleq::Error) -> Self {
        match e {
            ensembleq::Error::GridTooCoarse { .. }
            | ensembleq::Error::QuadratureNonConvergence(_) => CliError::numerical(e.to_string()),
            other => CliError::config(other.to_string()),
        }
    }
}

pub mod args {
    use super::*;

    /// Simulate input/output pulse shapes for both ensemble states.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct PulseSim {
        /// Coupling rate g in MHz (omega/2pi). Config key: `g`.
        #[arg(long)]
        pub g: Option<f64>,
        /// Cavity decay rate kappa in MHz. Config key: `kappa`.
        #[arg(long)]
        pub kappa: Option<f64>,
        /// Atomic decay rate gamma_s in MHz. Config key: `gamma_s`.
        #[arg(long)]
        pub gamma_s: Option<f64>,
        /// Pulse duration T in units of 1/kappa. Config key: `duration`.
        #[arg(long)]
        pub duration: Option<f64>,
        /// Time-grid sample count. Config key: `samples`.
        #[arg(long)]
        pub samples: Option<usize>,
    }

    /// Gate fidelity versus pulse duration.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct FidelitySweep {
        /// Coupling rate g in MHz. Config key: `g`.
        #[arg(long)]
        pub g: Option<f64>,
        /// Cavity decay rate kappa in MHz. Config key: `kappa`.
        #[arg(long)]
        pub kappa: Option<f64>,
        /// Atomic decay rate gamma_s in MHz. Config key: `gamma_s`.
        #[arg(long)]
        pub gamma_s: Option<f64>,
        /// Duration sweep start:stop:count[:log] in 1/kappa. Config key: `t`.
        #[arg(long = "t-sweep", allow_hyphen_values = true)]
        pub t_sweep: Option<String>,
        /// Time-grid sample count per point. Config key: `samples`.
        #[arg(long)]
        pub samples: Option<usize>,
    }

    /// Photon loss versus coupling rate at T = 120/kappa.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct LossSweep {
        /// Cavity decay rate kappa in MHz. Config key: `kappa`.
        #[arg(long)]
        pub kappa: Option<f64>,
        /// Atomic decay rate gamma_s in MHz. Config key: `gamma_s`.
        #[arg(long)]
        pub gamma_s: Option<f64>,
        /// Coupling sweep start:stop:count[:log] in units of kappa. Config key: `g`.
        #[arg(long = "g-sweep", allow_hyphen_values = true)]
        pub g_sweep: Option<String>,
        /// Time-grid sample count per point. Config key: `samples`.
        #[arg(long)]
        pub samples: Option<usize>,
    }

    /// Faraday reflection phases and the twice-reflection gate.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct FaradayPhase {
        /// Coupling in units of kappa. Config key: `g_over_kappa`.
        #[arg(long = "g-over-kappa")]
        pub g_over_kappa: Option<f64>,
        /// Probe detuning (omega_p - omega_c) in units of kappa. Config key: `detuning`.
        #[arg(long)]
        pub detuning: Option<f64>,
        /// Atomic decay in units of kappa. Config key: `gamma_over_kappa`.
        #[arg(long = "gamma-over-kappa")]
        pub gamma_over_kappa: Option<f64>,
        /// Detuning sweep start:stop:count[:log] for a CSV of unwrapped
        /// phases. Config key: `sweep`.
        #[arg(long, allow_hyphen_values = true)]
        pub sweep: Option<String>,
    }

    /// Rydberg pair-potential curve for a configured channel.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct BlockadeCurve {
        /// Channel defect delta in MHz. Config key: `delta`.
        #[arg(long)]
        pub delta: Option<f64>,
        /// Dipole-dipole coefficient C3 in MHz·um^3. Config key: `c3`.
        #[arg(long)]
        pub c3: Option<f64>,
        /// Fine-structure eigenvalue. Config key: `d_phi`.
        #[arg(long = "d-phi")]
        pub d_phi: Option<f64>,
        /// Level label for the output header. Config key: `level`.
        #[arg(long)]
        pub level: Option<String>,
        /// Radius sweep start:stop:count[:log] in micrometers. Config key: `r`.
        #[arg(long = "r-sweep", allow_hyphen_values = true)]
        pub r_sweep: Option<String>,
    }

    /// Compose the three-pulse collective rotation and compare to a target.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct RotationCheck {
        /// Half-area of the middle pulse: a number, `pi`, `pi/2` or `pi/4`.
        /// Config key: `phi`.
        #[arg(long)]
        pub phi: Option<String>,
        /// Drive-phase convention `rotation` or `hadamard`. Config key: `phases`.
        #[arg(long)]
        pub phases: Option<String>,
        /// Comparison target x|hadamard|identity|none|auto. Config key: `compare`.
        #[arg(long)]
        pub compare: Option<String>,
        /// Double-excitation probability for the calibrated error model.
        /// Config key: `p2`.
        #[arg(long)]
        pub p2: Option<f64>,
        /// Baseline fidelity for the error model. Config key: `baseline`.
        #[arg(long)]
        pub baseline: Option<f64>,
    }

    /// Build a cluster chain and verify it against the closed form.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct ClusterBuild {
        /// Chain length (2..=16). Config key: `n`.
        #[arg(long)]
        pub n: Option<usize>,
    }

    /// Monte Carlo build-time scaling across chain lengths.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct ClusterScaling {
        /// Comma-separated success probabilities. Config key: `p`.
        #[arg(long = "p-values")]
        pub p_values: Option<String>,
        /// Comma-separated chain lengths. Config key: `n`.
        #[arg(long = "n-values")]
        pub n_values: Option<String>,
        /// Trials per (p, n) point. Config key: `trials`.
        #[arg(long)]
        pub trials: Option<usize>,
        /// Time per fusion attempt. Config key: `t0`.
        #[arg(long)]
        pub t0: Option<f64>,
        /// Accounting mode `lockstep` or `serial`. Config key: `mode`.
        #[arg(long)]
        pub mode: Option<String>,
    }

    /// Nonlocal CNOT through the shared ancilla pair.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct NonlocalCnot {
        /// Verify all four computational inputs against all four
        /// measurement branches.
        #[arg(long)]
        pub exhaustive: bool,
        /// Input state 00|01|10|11|plus|bell|random for a sampled run.
        /// Config key: `input`.
        #[arg(long)]
        pub input: Option<String>,
    }

    /// Collective-readout signal-to-noise ratio.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct RepeaterSnr {
        /// Number of atoms. Config key: `n_atoms`.
        #[arg(long = "n-atoms")]
        pub n_atoms: Option<f64>,
        /// Coupling rate g in MHz. Config key: `g`.
        #[arg(long)]
        pub g: Option<f64>,
        /// Cavity decay rate kappa in MHz. Config key: `kappa`.
        #[arg(long)]
        pub kappa: Option<f64>,
        /// Atomic decay rate gamma_s in MHz. Config key: `gamma_s`.
        #[arg(long)]
        pub gamma_s: Option<f64>,
    }

    /// Ensemble geometry validity report.
    #[derive(Args, Debug)]
    #[command(allow_negative_numbers = true)]
    pub struct GeometryCheck {
        /// Number of atoms. Config key: `n_atoms`.
        #[arg(long = "n-atoms")]
        pub n_atoms: Option<f64>,
        /// Transverse cloud radius in micrometers. Config key: `delta_r_perp`.
        #[arg(long = "delta-r-perp")]
        pub delta_r_perp: Option<f64>,
        /// Optical wavelength in nanometers. Config key: `lambda`.
        #[arg(long = "lambda-nm")]
        pub lambda_nm: Option<f64>,
        /// Ground-state principal quantum number. Config key: `n_g`.
        #[arg(long = "n-g")]
        pub n_g: Option<f64>,
        /// Atom-number fluctuation for the advisory. Config key: `delta_n`.
        #[arg(long = "delta-n")]
        pub delta_n: Option<f64>,
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    PulseSim(args::PulseSim),
    FidelitySweep(args::FidelitySweep),
    LossSweep(args::LossSweep),
    FaradayPhase(args::FaradayPhase),
    BlockadeCurve(args::BlockadeCurve),
    RotationCheck(args::RotationCheck),
    ClusterBuild(args::ClusterBuild),
    ClusterScaling(args::ClusterScaling),
    NonlocalCnot(args::NonlocalCnot),
    RepeaterSnr(args::RepeaterSnr),
    GeometryCheck(args::GeometryCheck),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::PulseSim(_) => "pulse-sim",
            Command::FidelitySweep(_) => "fidelity-sweep",
            Command::LossSweep(_) => "loss-sweep",
            Command::FaradayPhase(_) => "faraday-phase",
            Command::BlockadeCurve(_) => "blockade-curve",
            Command::RotationCheck(_) => "rotation-check",
            Command::ClusterBuild(_) => "cluster-build",
            Command::ClusterScaling(_) => "cluster-scaling",
            Command::NonlocalCnot(_) => "nonlocal-cnot",
            Command::RepeaterSnr(_) => "repeater-snr",
            Command::GeometryCheck(_) => "geometry-check",
        }
    }
}

/// Simulations of cavity-mediated photonic gates on atomic-ensemble qubits.
#[derive(Parser, Debug)]
#[command(name = "ensembleq", version, about)]
struct Cli {
    /// Configuration file (flat `key = value`, `#` comments). Flags
    /// override config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path (scenario-specific default). Config key: `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for all random sampling. Config key: `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps (0 = available parallelism). Config key:
    /// `threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::parse("")?,
    };
    let mut resolver = Resolver::new(cfg);

    // scenario consistency key: a config written for one scenario may pin it
    let declared = resolver.silent_word("scenario", None, cli.command.name())?;
    if declared != cli.command.name() {
        return Err(CliError::config(format!(
            "config declares scenario `{declared}` but `{}` was invoked",
            cli.command.name()
        )));
    }

    let seed = resolver.silent_count("seed", cli.seed.map(|s| s as usize), 0)? as u64;
    let threads = resolver.silent_count("threads", cli.threads, 0)?;
    if threads > 0 {
        // ignore failure if a pool already exists (e.g. repeated calls in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let ctx = Ctx {
        resolver,
        out: cli.out.clone(),
        seed,
    };
    match &cli.command {
        Command::PulseSim(a) => scenarios::pulse_sim(a, ctx),
        Command::FidelitySweep(a) => scenarios::fidelity_sweep(a, ctx),
        Command::LossSweep(a) => scenarios::loss_sweep(a, ctx),
        Command::FaradayPhase(a) => scenarios::faraday_phase(a, ctx),
        Command::BlockadeCurve(a) => scenarios::blockade_curve(a, ctx),
        Command::RotationCheck(a) => scenarios::rotation_check(a, ctx),
        Command::ClusterBuild(a) => scenarios::cluster_build(a, ctx),
        Command::ClusterScaling(a) => scenarios::cluster_scaling(a, ctx),
        Command::NonlocalCnot(a) => scenarios::nonlocal_cnot_cmd(a, ctx),
        Command::RepeaterSnr(a) => scenarios::repeater_snr_cmd(a, ctx),
        Command::GeometryCheck(a) => scenarios::geometry_check(a, ctx),
    }
}

fn main() {
    let cli = Cli::parse();
    let scenario = cli.command.name();
    if let Err(e) = run(cli) {
        eprintln!(
            "error: exit={} category={} scenario={} msg=\"{}\"",
            e.exit_code, e.category, scenario, e.message
        );
        std::process::exit(e.exit_code);
    }
}
