use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use firstlaw::accounting::{analyze, EnergyLedger, Trajectory};
use firstlaw::io::{write_ledger, FileError, TrajectoryFile};
use firstlaw::scenarios::{build_trajectory, ScenarioError, ScenarioKind, ScenarioSpec};
use firstlaw::verification::{self, Oracles};

#[derive(Debug, Parser)]
#[command(
    name = "firstlaw",
    version,
    about = "Work, heat and coherence-energy ledgers for quantum trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a built-in process and write its energy ledger.
    Run(RunArgs),
    /// Compute the energy ledger of a trajectory file.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks and report PASS/FAIL for each.
    Verify {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fault {
    RabiConstant,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scenario {
    Rabi,
    Se,
    Zeeman,
    Isothermal,
}

impl From<Scenario> for ScenarioKind {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::Rabi => ScenarioKind::Rabi,
            Scenario::Se => ScenarioKind::SpontaneousEmission,
            Scenario::Zeeman => ScenarioKind::Zeeman,
            Scenario::Isothermal => ScenarioKind::Isothermal,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(value_enum)]
    scenario: Scenario,
    /// Ground-state energy E_g.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    eg: f64,
    /// Excited-state energy E_e.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    ee: f64,
    /// Rabi frequency Ω_R.
    #[arg(long)]
    omega: Option<f64>,
    /// Decay rate Γ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Total shift of E_e for the Zeeman ramp.
    #[arg(long, allow_negative_numbers = true)]
    shift: Option<f64>,
    /// Magnetic field; the shift is b_field times the shift coefficient.
    #[arg(long, allow_negative_numbers = true)]
    b_field: Option<f64>,
    /// Shift per unit field (default: Bohr magneton in eV/T).
    #[arg(long)]
    shift_coefficient: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Final E_e of the isothermal ramp.
    #[arg(long)]
    ee_end: Option<f64>,
    /// End time (default 10/Γ for se, 1 otherwise).
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Ledger CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the sampled trajectory as a JSON trajectory file.
    #[arg(long)]
    emit_trajectory: Option<PathBuf>,
}

impl RunArgs {
    fn spec(&self) -> ScenarioSpec {
        let kind = ScenarioKind::from(self.scenario);
        let t_max = self.t_max.unwrap_or(match (kind, self.gamma) {
            (ScenarioKind::SpontaneousEmission, Some(g)) if g > 0.0 => 10.0 / g,
            _ => 1.0,
        });
        ScenarioSpec {
            kind,
            e_g: self.eg,
            e_e: self.ee,
            omega: self.omega,
            gamma: self.gamma,
            shift: self.shift,
            b_field: self.b_field,
            shift_coefficient: self.shift_coefficient,
            temperature: self.temperature,
            e_e_end: self.ee_end,
            t_max,
            steps: self.steps,
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn print_summary(label: &str, traj: &Trajectory, ledger: &EnergyLedger) {
    let last = ledger.last();
    println!(
        "{label}: {} samples, t in [{}, {}]",
        traj.len(),
        ledger.first().t,
        last.t
    );
    println!("W       = {:.12e}", last.w);
    println!("Q_cal   = {:.12e}", last.q_cal);
    println!("C       = {:.12e}", last.c);
    println!("delta_U = {:.12e}", last.delta_u(ledger.first()));
    println!("max closure defect = {:.3e}", ledger.max_closure_defect());
}

fn write_output(out: Option<&Path>, ledger: &EnergyLedger) -> Result<(), CliError> {
    if let Some(path) = out {
        write_ledger(path, ledger)?;
    }
    Ok(())
}

fn print_destination(out: Option<&Path>) {
    if let Some(path) = out {
        println!("ledger written to {}", path.display());
    }
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let spec = args.spec();
    let traj = build_trajectory(&spec)?;
    let ledger = analyze(&traj).map_err(failure)?;
    write_output(args.out.as_deref(), &ledger)?;
    if let Some(path) = &args.emit_trajectory {
        TrajectoryFile::from_trajectory(&traj).write(path)?;
    }
    print_summary(spec.kind.name(), &traj, &ledger);
    print_destination(args.out.as_deref());
    Ok(())
}

fn analyze_file(file: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (_, traj) = TrajectoryFile::read(file)?;
    let ledger = analyze(&traj).map_err(failure)?;
    write_output(out, &ledger)?;
    print_summary(&file.display().to_string(), &traj, &ledger);
    print_destination(out);
    Ok(())
}

fn verify(fault: Option<Fault>) -> Result<(), CliError> {
    let oracles = match fault {
        None => Oracles::default(),
        Some(Fault::RabiConstant) => Oracles::with_corrupted_rabi_constant(),
    };
    let results = verification::run_all(&oracles);
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name)
        .collect();
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Analyze { file, out } => analyze_file(file, out.as_deref()),
        Command::Verify { inject_fault } => verify(*inject_fault),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
