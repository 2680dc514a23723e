use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdatlas::catalog::{save_snapshot, Lexicon, FALLBACK_LOOP_LENGTH};
use sdatlas::graph::{derive_causal_graph, enumerate_loops, GraphError};
use sdatlas::ingest::ingest_dir;
use sdatlas::model::Severity;
use sdatlas::narrative::{describe, loop_ids, to_structured};
use sdatlas::service::{serve, ServiceConfig};
use sdatlas::xmile::{parse_xmile, validate_model};

#[derive(Parser)]
#[command(name = "sdatlas", version, about = "System-dynamics model repository tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a catalog snapshot from a directory of model files.
    Ingest {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// SDG lexicon JSON to classify with instead of the shipped one.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Validate one model file and print its analysis.
    Analyze {
        file: PathBuf,
        /// Print the feedback-loop table.
        #[arg(long)]
        loops: bool,
        /// Print the narrative description.
        #[arg(long)]
        narrative: bool,
        /// Print the structured diagram as JSON.
        #[arg(long)]
        structured: bool,
    },
    /// Serve the HTTP API over a snapshot.
    Serve {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Ingest { dir, out, lexicon } => ingest(dir, out, lexicon),
        Command::Analyze { file, loops, narrative, structured } => analyze(file, loops, narrative, structured),
        Command::Serve { snapshot, port } => run_server(snapshot, port),
    }
}

fn ingest(dir: PathBuf, out: PathBuf, lexicon: Option<PathBuf>) -> ExitCode {
    let lexicon = match lexicon {
        None => Lexicon::default(),
        Some(path) => match std::fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|s| Lexicon::from_json(&s).map_err(|e| e.to_string())) {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
    };
    let (catalog, report) = match ingest_dir(&dir, &lexicon) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for file in &report.files {
        println!("{}", file.line());
    }
    if let Err(e) = save_snapshot(&catalog, &out) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    eprintln!("indexed {} of {} files into {}", report.indexed(), report.files.len(), out.display());
    if report.indexed() == 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn analyze(file: PathBuf, show_loops: bool, show_narrative: bool, show_structured: bool) -> ExitCode {
    let bytes = match std::fs::read(&file) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return ExitCode::from(1);
        }
    };
    let model = match parse_xmile(&bytes) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error[{}] {}: {e}", e.code(), file.display());
            return ExitCode::from(3);
        }
    };
    let diagnostics = validate_model(&model);
    for d in &diagnostics {
        eprintln!("{d}");
    }
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return ExitCode::from(3);
    }
    if !(show_loops || show_narrative || show_structured) {
        return ExitCode::SUCCESS;
    }

    let graph = derive_causal_graph(&model).expect("model without errors derives a graph");
    let loops = match enumerate_loops(&graph, None) {
        Ok(e) => e.loops,
        Err(GraphError::LoopBudgetExceeded { cap }) => {
            eprintln!("warning: more than {cap} loops; listing loops of up to {FALLBACK_LOOP_LENGTH} variables");
            enumerate_loops(&graph, Some(FALLBACK_LOOP_LENGTH)).expect("bounded enumeration").loops
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    if show_loops {
        println!("id\ttype\tcycle");
        for (id, l) in loop_ids(&loops).iter().zip(&loops) {
            println!("{id}\t{}\t{}", l.loop_type.as_str(), l.cycle.join(" → "));
        }
    }
    if show_narrative {
        print!("{}", describe(&graph, &loops).render());
    }
    if show_structured {
        let diagram = to_structured(&graph, &loops).expect("loops come from the graph");
        println!("{}", serde_json::to_string_pretty(&diagram).expect("diagram serializes"));
    }
    ExitCode::SUCCESS
}

fn run_server(snapshot: Option<PathBuf>, port: Option<u16>) -> ExitCode {
    tracing_subscriber::fmt().with_target(false).with_writer(std::io::stderr).init();
    let mut config = match ServiceConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if snapshot.is_some() {
        config.snapshot = snapshot;
    }
    if let Some(port) = port {
        config.port = port;
    }
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match runtime.block_on(serve(config, shutdown)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
