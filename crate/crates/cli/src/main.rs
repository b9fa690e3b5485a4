mod commands;
mod opts;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "gsod", version, about = "Greedy strongly orthogonal decomposition of dense tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the GSOD of a tensor and write it as decomposition JSON.
    Decompose {
        /// Tensor or fixture JSON, "-" for stdin.
        tensor: String,
        #[command(flatten)]
        common: Common,
    },
    /// Check a decomposition against a tensor.
    Verify {
        tensor: String,
        decomposition: String,
        /// Fail (exit 3) when some component is not critical.
        #[arg(long)]
        require_critical: bool,
        #[arg(long, default_value_t = gsod_core::criticality::DEFAULT_TOL_CRIT)]
        tol_crit: f64,
        /// Relative reconstruction tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol_recon: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate the critical points given by the sign orbits of the GSOD.
    Critical {
        tensor: String,
        /// Also run the independent multistart critical-point search.
        #[arg(long)]
        audit: bool,
        #[arg(long, default_value_t = gsod_core::criticality::AUDIT_STARTS)]
        audit_starts: usize,
        /// Local solver for the audit. Power iteration only reaches local
        /// maxima of |A|; Newton also finds saddle points.
        #[arg(long, value_enum, default_value_t = AuditChoice::Power)]
        audit_method: AuditChoice,
        #[command(flatten)]
        common: Common,
    },
    /// Best rank-one approximations.
    Bestrank1 {
        tensor: String,
        #[command(flatten)]
        common: Common,
    },
    /// Write a ground-truth fixture.
    Gen {
        /// Comma-separated dimensions, e.g. 3,3,2.
        #[arg(long, value_delimiter = ',', required_unless_present_any = ["paper_example", "diagonal_example"])]
        shape: Vec<usize>,
        #[arg(long, short, required_unless_present_any = ["paper_example", "diagonal_example"])]
        r: Option<usize>,
        /// The four-term 2×2×2 example with unit weights.
        #[arg(long, conflicts_with_all = ["shape", "r", "diagonal_example"])]
        paper_example: bool,
        /// 3 e1⊗e1⊗e1 + 2 e2⊗e2⊗e2.
        #[arg(long, conflicts_with_all = ["shape", "r"])]
        diagonal_example: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the form, its gradient and the criticality residual at a point.
    Eval {
        tensor: String,
        /// MultiVector JSON {"parts": [...]}.
        point: String,
        #[arg(long, default_value_t = gsod_core::criticality::DEFAULT_TOL_CRIT)]
        tol_crit: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    tol_orth: Option<f64>,
    #[arg(long)]
    sigma_cutoff: Option<f64>,
    /// Solver options file (TOML or JSON) using the option key names.
    #[arg(long)]
    config: Option<String>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Write the main result here instead of stdout.
    #[arg(long, short)]
    output: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum AuditChoice {
    Power,
    Newton,
}

#[derive(ValueEnum, Debug, Clone, Copy, Default, PartialEq, Eq)]
enum ReportFormat {
    #[default]
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "{m}"),
            Failure::Validation(m) => write!(f, "verification failed: {m}"),
            Failure::Infeasible(m) => write!(f, "{m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}
