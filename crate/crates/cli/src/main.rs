//! `wmt`: headless access to names, the registry, compositions and the server.
//!
//! Exit status is 0 on success, 1 on a domain failure (bad name, findings,
//! failed run or smoke check) and 2 on a usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wmt_core::coupler::{
    load_composition, run, smoke_test, validate_composition, Catalog, Composition, RunStatus,
};
use wmt_core::registry::{format_citation, ComponentMeta};
use wmt_core::StandardName;
use wmt_server::{Server, ServerConfig};

#[derive(Parser)]
#[command(name = "wmt", version, about = "Component coupling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check standard names, one verdict per argument.
    Names {
        #[arg(required = true)]
        names: Vec<String>,
    },
    /// List registered component classes.
    Components,
    /// Load and validate a composition.
    Validate { composition: PathBuf },
    /// Run a composition, writing outputs to the work directory.
    Run {
        composition: PathBuf,
        #[arg(long, default_value = ".")]
        workdir: PathBuf,
    },
    /// Smoke-test one component class, or every bundled class.
    Smoke {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        class: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Start the HTTP server (WMT_ROOT, WMT_PORT, WMT_WORKERS).
    Serve,
    /// Format the citation for a component metadata file.
    Citation { metadata: PathBuf },
}

const DOMAIN_FAILURE: u8 = 1;
const USAGE: u8 = 2;

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(USAGE)
    })
}

fn load(path: &Path, catalog: &Catalog) -> Result<Composition, ExitCode> {
    let text = read(path)?;
    load_composition(&text, catalog).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(DOMAIN_FAILURE)
    })
}

fn validated(path: &Path, catalog: &Catalog) -> Result<Composition, ExitCode> {
    let composition = load(path, catalog)?;
    let findings = validate_composition(&composition, catalog);
    if findings.is_empty() {
        return Ok(composition);
    }
    for f in &findings {
        println!("{f}");
    }
    Err(ExitCode::from(DOMAIN_FAILURE))
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(DOMAIN_FAILURE)
    }
}

fn names(names: &[String]) -> ExitCode {
    let mut ok = true;
    for n in names {
        match StandardName::parse(n) {
            Ok(name) => println!("OK {}", name.canonical_form()),
            Err(e) => {
                ok = false;
                println!("ERR {}@{}", e.kind, e.position);
            }
        }
    }
    status(ok)
}

fn smoke(class: Option<String>, all: bool) -> ExitCode {
    let catalog = Catalog::builtin().with_test_doubles();
    let classes: Vec<String> = if all {
        Catalog::builtin()
            .constructible_classes()
            .into_iter()
            .map(str::to_string)
            .collect()
    } else {
        class.into_iter().collect()
    };
    let mut ok = true;
    for class in classes {
        let report = smoke_test(&catalog, &class);
        for check in &report.checks {
            let verdict = if check.passed { "PASS" } else { "FAIL" };
            if check.detail.is_empty() || check.passed {
                println!("{class} {} {verdict}", check.name);
            } else {
                println!("{class} {} {verdict} {}", check.name, check.detail);
            }
        }
        ok &= report.passed();
    }
    status(ok)
}

fn execute(command: Command) -> Result<ExitCode, ExitCode> {
    let catalog = Catalog::builtin();
    Ok(match command {
        Command::Names { names: list } => names(&list),
        Command::Components => {
            for meta in catalog.registry().list_components() {
                println!("{}", meta.class);
            }
            ExitCode::SUCCESS
        }
        Command::Validate { composition } => {
            validated(&composition, &catalog)?;
            println!("OK");
            ExitCode::SUCCESS
        }
        Command::Run {
            composition,
            workdir,
        } => {
            let c = validated(&composition, &catalog)?;
            let summary = run(&c, &catalog, &workdir);
            match (summary.status, summary.failure) {
                (RunStatus::Succeeded, _) => {
                    println!("succeeded t_final={}", summary.t_final);
                    ExitCode::SUCCESS
                }
                (RunStatus::Failed, failure) => {
                    let failure = failure.map(|f| f.to_string()).unwrap_or_default();
                    println!("failed {failure}");
                    ExitCode::from(DOMAIN_FAILURE)
                }
            }
        }
        Command::Smoke { class, all } => smoke(class, all),
        Command::Serve => {
            let config = ServerConfig::from_env().map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(USAGE)
            })?;
            let server = Server::bind(&config).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(DOMAIN_FAILURE)
            })?;
            println!("listening on http://{}", server.addr());
            match server.run() {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(DOMAIN_FAILURE)
                }
            }
        }
        Command::Citation { metadata } => {
            let text = read(&metadata)?;
            let citation = ComponentMeta::from_json_str(&text)
                .and_then(|m| format_citation(&m))
                .map_err(|e| {
                    eprintln!("error: {}: {e}", metadata.display());
                    ExitCode::from(DOMAIN_FAILURE)
                })?;
            println!("{citation}");
            ExitCode::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    execute(cli.command).unwrap_or_else(|code| code)
}
