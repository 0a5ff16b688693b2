use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use imasnm::report::{self, ReportError};
use imasnm::simulation::{self, ScenarioError, SimulationError};
use imasnm::{Model, Scenario};

#[derive(Parser)]
#[command(name = "imasnm", version, about = "Hierarchical mobile-agent network management simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (or every *.json scenario in a directory) and print the cost table.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated subset of cs, flatbed, imasnm.
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<Model>>,
        /// Comma-separated polling counts.
        #[arg(long, value_delimiter = ',')]
        pollings: Option<Vec<u64>>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Add the one-time deployment cost to every row.
        #[arg(long)]
        include_deploy: bool,
        /// Print the manager tree and costs at every snapshot.
        #[arg(long)]
        snapshots: bool,
    },
    /// Parse and check a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print the final manager tree of a scenario.
    Explain {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Scenario { path: PathBuf, source: ScenarioError },
    #[error("{0}")]
    Simulation(#[from] SimulationError),
    #[error("{0}")]
    Report(#[from] ReportError),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario {
                source: ScenarioError::Parse { .. } | ScenarioError::Validation { .. },
                ..
            } => 1,
            _ => 2,
        }
    }
}

fn load(path: &Path) -> Result<Scenario, CliError> {
    let wrap = |source| CliError::Scenario {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(|e| wrap(e.into()))?;
    simulation::load_scenario(io::BufReader::new(file)).map_err(wrap)
}

struct SimulateOptions {
    models: Option<Vec<Model>>,
    pollings: Option<Vec<u64>>,
    include_deploy: bool,
    snapshots: bool,
}

fn simulate_one(path: &Path, opts: &SimulateOptions) -> Result<(String, report::CostReport), CliError> {
    let mut scenario = load(path)?;
    if let Some(models) = &opts.models {
        let mut unique = models.clone();
        unique.sort();
        unique.dedup();
        scenario.models = unique;
    }
    if let Some(p) = &opts.pollings {
        let mut unique = p.clone();
        unique.sort_unstable();
        unique.dedup();
        scenario.polling_counts = unique;
    }
    if scenario.models.contains(&Model::Cs) && scenario.params.num_vars == 0 {
        return Err(CliError::Scenario {
            path: path.to_path_buf(),
            source: ScenarioError::Validation {
                path: "params.num_vars".into(),
                message: "must be at least 1 for centralized polling".into(),
            },
        });
    }
    scenario.snapshot_costs |= opts.snapshots;

    let result = simulation::run(&scenario)?;
    let report = report::compare_with(&result, opts.include_deploy)?;

    let mut text = String::new();
    if opts.snapshots {
        for snap in &result.snapshots {
            text.push_str(&format!("snapshot: {}\n", snap.label));
            text.push_str(&report::render_tree(&snap.tree));
            for c in snap.costs.iter().flatten() {
                text.push_str(&format!(
                    "  {} per poll: {} Kb, deployment: {} Kb\n",
                    c.model,
                    report::render_kb(c.per_poll),
                    report::render_kb(c.deploy)
                ));
            }
        }
        text.push('\n');
    }
    text.push_str(&report::render_table(&report));
    Ok((text, report))
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn simulate(scenario: &Path, csv: Option<&Path>, opts: SimulateOptions) -> Result<(), CliError> {
    let stdout = io::stdout();
    if scenario.is_dir() {
        if csv.is_some() {
            return Err(CliError::Usage("--csv needs a single scenario file, not a directory".into()));
        }
        let files = scenario_files(scenario)?;
        let outcomes: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = files.iter().map(|f| s.spawn(|| simulate_one(f, &opts))).collect();
            handles.into_iter().map(|h| h.join().expect("scenario worker panicked")).collect()
        });
        let mut out = stdout.lock();
        let mut first_err = None;
        for (file, outcome) in files.iter().zip(outcomes) {
            match outcome {
                Ok((text, _)) => writeln!(out, "{text}")?,
                Err(e) => {
                    eprintln!("error: {}: {e}", file.display());
                    first_err.get_or_insert(e);
                }
            }
        }
        return first_err.map_or(Ok(()), Err);
    }

    let (text, report) = simulate_one(scenario, &opts)?;
    write!(stdout.lock(), "{text}")?;
    if let Some(path) = csv {
        let mut sink = BufWriter::new(File::create(path)?);
        report::emit_csv(&report, &mut sink)?;
        sink.flush()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            scenario,
            models,
            pollings,
            csv,
            include_deploy,
            snapshots,
        } => simulate(
            &scenario,
            csv.as_deref(),
            SimulateOptions {
                models,
                pollings,
                include_deploy,
                snapshots,
            },
        ),
        Command::Validate { scenario } => {
            let s = load(&scenario)?;
            println!(
                "{}: ok ({} initial nodes, {} events, m_max {})",
                s.name,
                s.nodes.len(),
                s.events.len(),
                s.m_max
            );
            Ok(())
        }
        Command::Explain { scenario } => {
            let s = load(&scenario)?;
            let result = simulation::run(&s)?;
            print!("{}", report::render_tree(&result.final_tree));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
