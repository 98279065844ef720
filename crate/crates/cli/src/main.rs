mod commands;
mod oracle;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use obslab_core::Error;

use problem::{Context, Overrides, Problem};
use report::{Report, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 for a failed verification, 2 for anything wrong with the input.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(
                Error::VerificationFailed(_)
                | Error::ExactnessViolation(_)
                | Error::TorusCoercionFailed { .. }
                | Error::NotCobounding { .. },
            ) => 1,
            _ => 2,
        }
    }

    fn describe(&self) -> String {
        match self {
            CliError::Core(Error::InvalidTable { reason, triple: Some((a, b, c)) }) => {
                format!("invalid group table: {reason}: (g{a} g{b}) g{c} != g{a} (g{b} g{c}) at triple ({a}, {b}, {c})")
            }
            other => other.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "obslab", version, about = "Twisted cohomology and modular obstructions for finite groups")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Seed for sampling-based checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Problem description (TOML).
    #[arg(long, global = true)]
    problem: Option<PathBuf>,
    /// Append wall-clock time to the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// Named configuration: fx1, klein or heisenberg:K.
    #[arg(long)]
    fixture: Option<String>,
    /// Group family, e.g. cyclic:4, heisenberg:2, klein, Z2*Z2.
    #[arg(long)]
    group: Option<String>,
    /// Coefficients, e.g. Z2 or Z2xZ4.
    #[arg(long)]
    module: Option<String>,
    /// Group elements acting by -1.
    #[arg(long, value_delimiter = ',')]
    negated: Option<Vec<usize>>,
    /// Members of L.
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<usize>>,
    /// Members of M.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
}

#[derive(Args, Debug, Default, Clone)]
struct ObstructionArgs {
    /// Use the Heisenberg obstruction mod K.
    #[arg(long)]
    k: Option<usize>,
    /// For the Heisenberg obstruction: injective, zero or an element index.
    #[arg(long)]
    nu: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a multiplication table or group family.
    GroupCheck {
        /// Rows separated by `;`, entries by `,` or spaces; or a path to such a file.
        #[arg(long)]
        table: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Twisted cohomology via Smith normal form.
    Cohomology {
        #[arg(long)]
        degree: usize,
        #[command(flatten)]
        common: Common,
    },
    /// The HJR 3-cocycle of a characteristic cocycle.
    DeltaHjr {
        #[command(flatten)]
        common: Common,
    },
    /// The modular obstruction of a characteristic cocycle.
    DeltaMod {
        #[command(flatten)]
        common: Common,
    },
    /// Image of an obstruction in H^3(G, T).
    Partial {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        obstruction: ObstructionArgs,
    },
    /// Resolution group of a 3-cocycle.
    Resolve {
        /// Also round-trip this many random 3-cocycles.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// A characteristic cocycle realizing an obstruction.
    ResolveObstruction {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        obstruction: ObstructionArgs,
    },
    /// The fiber condition of an obstruction.
    FiberCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        obstruction: ObstructionArgs,
    },
    /// Transport an obstruction to other sections of Q.
    SectionChange {
        /// Section table of the quotient; every section when absent.
        #[arg(long, value_delimiter = ',')]
        target: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        obstruction: ObstructionArgs,
    },
    /// Exactness assertions by full enumeration.
    Exactness {
        #[command(flatten)]
        common: Common,
    },
    /// Splitting test for the Heisenberg obstruction.
    Heisenberg {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "injective")]
        nu: String,
        /// Coefficients; defaults to Z/k.
        #[arg(long)]
        module: Option<String>,
    },
    /// Re-verify the witnesses of a JSON report, or compare cohomology with brute force.
    OracleCompare {
        /// JSON report to re-verify.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Degree for the brute-force comparison; 1 and 2 when absent.
        #[arg(long)]
        degree: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn overrides(common: &Common) -> Overrides {
    Overrides {
        fixture: common.fixture.clone(),
        group: common.group.clone(),
        module: common.module.clone(),
        negated: common.negated.clone(),
        l: common.l.clone(),
        m: common.m.clone(),
        ..Overrides::default()
    }
}

fn run(cli: &Cli, echo: String) -> Result<Report, CliError> {
    let text = match &cli.problem {
        Some(p) => read(p)?,
        None => String::new(),
    };
    let problem: Problem = if text.is_empty() { Problem::default() } else { problem::parse_problem(&text)? };
    let mut input = echo.clone().into_bytes();
    input.push(b'\n');
    input.extend_from_slice(text.as_bytes());
    let mut report = Report::new(echo, &input);
    let seed = cli.seed.or(problem.seed).unwrap_or(0);
    match &cli.cmd {
        Command::GroupCheck { table, common } => {
            let mut ov = overrides(common);
            ov.table = match table {
                Some(t) if std::path::Path::new(t).is_file() => Some(read(&PathBuf::from(t))?),
                other => other.clone(),
            };
            commands::group_check(&Context::new(problem, ov), &mut report)?;
        }
        Command::Cohomology { degree, common } => {
            commands::cohomology(&Context::new(problem, overrides(common)), *degree, &mut report)?;
        }
        Command::DeltaHjr { common } => commands::delta_hjr(&Context::new(problem, overrides(common)), &mut report)?,
        Command::DeltaMod { common } => commands::delta_mod(&Context::new(problem, overrides(common)), &mut report)?,
        Command::Partial { common, obstruction } => {
            commands::partial(&obstruction_context(problem, common, obstruction, None), &mut report)?
        }
        Command::Resolve { samples, common } => {
            commands::resolve(&Context::new(problem, overrides(common)), *samples, seed, &mut report)?
        }
        Command::ResolveObstruction { common, obstruction } => {
            commands::resolve_obstruction(&obstruction_context(problem, common, obstruction, None), &mut report)?
        }
        Command::FiberCheck { common, obstruction } => {
            commands::fiber_check(&obstruction_context(problem, common, obstruction, None), &mut report)?
        }
        Command::SectionChange {
            target,
            common,
            obstruction,
        } => commands::section_change(
            &obstruction_context(problem, common, obstruction, target.clone()),
            &mut report,
        )?,
        Command::Exactness { common } => commands::exactness(&Context::new(problem, overrides(common)), &mut report)?,
        Command::Heisenberg { k, nu, module } => {
            let ov = Overrides {
                module: module.clone(),
                ..Overrides::default()
            };
            commands::heisenberg(&Context::new(problem, ov), *k, nu, &mut report)?
        }
        Command::OracleCompare { report: path, degree, common } => match path {
            Some(p) => commands::oracle_report(&read(p)?, &mut report)?,
            None => commands::oracle_cohomology(&Context::new(problem, overrides(common)), *degree, &mut report)?,
        },
    }
    Ok(report)
}

fn obstruction_context(problem: Problem, common: &Common, o: &ObstructionArgs, target: Option<Vec<usize>>) -> Context {
    let mut ov = overrides(common);
    ov.k = o.k;
    ov.nu = o.nu.clone();
    ov.target = target;
    Context::new(problem, ov)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let start = Instant::now();
    match run(&cli, echo) {
        Ok(mut report) => {
            if cli.timing {
                report.timing_ms = Some(start.elapsed().as_millis() as u64);
            }
            let out = match cli.format {
                Format::Text => report.render_text(),
                Format::Json => report.render_json(),
            };
            print!("{out}");
            match report.status() {
                Status::Ok => ExitCode::SUCCESS,
                Status::Violation => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.describe());
            if cli.format == Format::Json {
                println!("{}", serde_json::json!({ "error": e.describe(), "exit_code": e.exit_code() }));
            }
            ExitCode::from(e.exit_code())
        }
    }
}
