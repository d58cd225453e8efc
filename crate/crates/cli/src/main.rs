use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zcmap::document::{
    map_to_json, map_to_text, parse_assignments, paths_to_json, verify_to_json, verify_to_text,
    whatif_to_json, whatif_to_text,
};
use zcmap::mapper::{DirectionConvention, MapError, MapOptions, MeasurementStrategy};
use zcmap::policy::parse_policy;
use zcmap::topology::parse_topology;
use zcmap::{what_if, Change, Compiled, Error, Options};

const EXIT_INPUT: u8 = 1;
const EXIT_UNREACHABLE: u8 = 2;
const EXIT_FINDINGS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "zcmap",
    version,
    about = "Map zone-to-zone policy onto firewall interfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the policy-to-device map.
    Map {
        #[command(flatten)]
        common: Common,
    },
    /// Audit an existing assignment file against the policy.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Assignment file in either map output format.
        assignments: PathBuf,
    },
    /// Print every valid device path from one zone to another.
    Paths {
        #[command(flatten)]
        common: Common,
        src: String,
        dst: String,
    },
    /// Diff the map before and after changing transitivity or removing devices.
    Whatif {
        #[command(flatten)]
        common: Common,
        #[arg(long = "set-transitive", value_name = "ZONE")]
        set_transitive: Vec<String>,
        #[arg(long = "set-non-transitive", value_name = "ZONE")]
        set_non_transitive: Vec<String>,
        #[arg(long = "drop-device", value_name = "ID")]
        drop_device: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    /// GraphML topology.
    topology: PathBuf,
    /// Policy file.
    policy: PathBuf,
    /// Give each firewall a non-transitive zone of its own.
    #[arg(long)]
    firewall_zones: bool,
    #[arg(long, value_enum, default_value_t = Convention::IngressInbound)]
    direction_convention: Convention,
    #[arg(long, value_enum, default_value_t = Strategy::All)]
    measurement_strategy: Strategy,
    /// Write the document here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    IngressInbound,
    EgressOutbound,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    All,
    First,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: String) -> Self {
        Self {
            code: EXIT_INPUT,
            message,
        }
    }
}

fn classify(err: Error, common: &Common) -> Failure {
    let message = match &err {
        Error::Topology(e) => format!("{}: {e}", common.topology.display()),
        Error::Policy(e) => format!("{}: {e}", common.policy.display()),
        Error::Map(e @ MapError::UnreachablePair(_)) => {
            return Failure {
                code: EXIT_UNREACHABLE,
                message: e.to_string(),
            }
        }
        other => other.to_string(),
    };
    Failure::input(message)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn compile(common: &Common) -> Result<Compiled, Failure> {
    let topology_text = read(&common.topology)?;
    let policy_text = read(&common.policy)?;
    let options = Options {
        firewall_zones: common.firewall_zones,
        map: MapOptions {
            direction: match common.direction_convention {
                Convention::IngressInbound => DirectionConvention::IngressInbound,
                Convention::EgressOutbound => DirectionConvention::EgressOutbound,
            },
            measurement: match common.measurement_strategy {
                Strategy::All => MeasurementStrategy::All,
                Strategy::First => MeasurementStrategy::FirstArbiter,
            },
        },
    };
    let run = || -> Result<Compiled, Error> {
        let topology = parse_topology(topology_text.as_bytes())?;
        let policy = parse_policy(&policy_text)?;
        Compiled::new(topology, policy, options)
    };
    run().map_err(|e| classify(e, common))
}

fn emit(common: &Common, document: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => std::fs::write(path, document)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{document}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Map { common } => {
            let compiled = compile(&common)?;
            let out = compiled.map().map_err(|e| classify(e, &common))?;
            let doc = match common.format {
                Format::Text => map_to_text(&out.assignments, &out.notes),
                Format::Structured => map_to_json(&out.assignments, &out.notes),
            };
            emit(&common, &doc)?;
            Ok(0)
        }
        Command::Verify {
            common,
            assignments,
        } => {
            let compiled = compile(&common)?;
            let existing = parse_assignments(&read(&assignments)?)
                .map_err(|e| Failure::input(format!("{}: {e}", assignments.display())))?;
            let reports = compiled
                .verify(&existing)
                .map_err(|e| classify(e, &common))?;
            let doc = match common.format {
                Format::Text => verify_to_text(&reports),
                Format::Structured => verify_to_json(&reports),
            };
            emit(&common, &doc)?;
            let clean = reports.iter().all(|r| r.is_clean());
            Ok(if clean { 0 } else { EXIT_FINDINGS })
        }
        Command::Paths { common, src, dst } => {
            let compiled = compile(&common)?;
            let paths = compiled
                .paths(&src, &dst)
                .map_err(|e| classify(e, &common))?;
            let doc = match common.format {
                Format::Text => format!("{paths}\n"),
                Format::Structured => paths_to_json(&src, &dst, paths),
            };
            emit(&common, &doc)?;
            Ok(0)
        }
        Command::Whatif {
            common,
            set_transitive,
            set_non_transitive,
            drop_device,
        } => {
            let compiled = compile(&common)?;
            let changes: Vec<Change> = set_transitive
                .into_iter()
                .map(Change::SetTransitive)
                .chain(set_non_transitive.into_iter().map(Change::SetNonTransitive))
                .chain(drop_device.into_iter().map(Change::DropDevice))
                .collect();
            let diff = what_if(&compiled, &changes).map_err(|e| classify(e, &common))?;
            let doc = match common.format {
                Format::Text => whatif_to_text(&diff),
                Format::Structured => whatif_to_json(&diff),
            };
            emit(&common, &doc)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("zcmap: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
