use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use qdesk_cli::commands::{cmd_diagram, cmd_grover, cmd_run};
use qdesk_cli::diagram::{DiagramStyle, DEFAULT_IMAG_COLOR, DEFAULT_REAL_COLOR};
use qdesk_cli::report::to_json;
use qdesk_cli::{CliError, CliResult, CommonOptions, ProgramSource};
use qdesk_service::ServiceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Statevector quantum circuit simulator.
#[derive(Debug, Parser)]
#[command(name = "qdesk", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Seed for measurement sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Measurement shots; 0 skips sampling.
    #[arg(long, global = true, default_value_t = 0)]
    shots: u64,
    /// Print the state after every stage.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a .qc program from |0...0>.
    Run {
        /// Program file, or `-` for standard input.
        #[arg(required_unless_present = "program", conflicts_with = "program")]
        input: Option<PathBuf>,
        /// Program text given inline.
        #[arg(short = 'e', long)]
        program: Option<String>,
    },
    /// Trace a Grover search over 2^k items.
    Grover {
        /// Data qubits.
        #[arg(long)]
        k: usize,
        /// Index of the marked item.
        #[arg(long)]
        target: usize,
        /// Defaults to 2 for k = 2, otherwise the optimal count.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Draw a state JSON file as an SVG amplitude chart.
    Diagram {
        input: PathBuf,
        /// SVG path; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_REAL_COLOR)]
        real_color: String,
        #[arg(long, default_value = DEFAULT_IMAG_COLOR)]
        imag_color: String,
    },
    /// Start the HTTP session service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8077)]
        port: u16,
        /// Origin allowed to call the service from a browser.
        #[arg(long)]
        cors_origin: Option<String>,
        /// Idle seconds before a session is dropped.
        #[arg(long, default_value_t = 3600)]
        ttl_secs: u64,
    },
}

fn render<T: serde::Serialize>(format: Format, report: &T, text: impl FnOnce(&T) -> String) -> String {
    match format {
        Format::Text => text(report),
        Format::Json => to_json(report),
    }
}

fn serve(config: ServiceConfig) -> CliResult<String> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime.block_on(async {
        let addr = format!("{}:{}", config.host, config.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Input(format!("cannot listen on {addr}: {e}")))?;
        let bound = listener.local_addr().map_err(|e| CliError::Runtime(e.to_string()))?;
        eprintln!("qdesk service listening on http://{bound}");
        qdesk_service::serve_on(listener, &config)
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))
    })?;
    Ok(String::new())
}

fn execute(cli: Cli) -> CliResult<String> {
    let opts = CommonOptions {
        seed: cli.seed,
        shots: cli.shots,
        trace: cli.trace,
    };
    match cli.command {
        Command::Run { input, program } => {
            let source = match (input, program) {
                (_, Some(text)) => ProgramSource::Inline(text),
                (Some(path), None) => ProgramSource::File(path),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let report = cmd_run(&source, &opts)?;
            Ok(render(cli.format, &report, |r| r.to_text()))
        }
        Command::Grover { k, target, iterations } => {
            let report = cmd_grover(k, target, iterations, &opts)?;
            Ok(render(cli.format, &report, |r| r.to_text()))
        }
        Command::Diagram {
            input,
            out,
            real_color,
            imag_color,
        } => {
            let style = DiagramStyle {
                real_color,
                imag_color,
            };
            let (svg, report) = cmd_diagram(&input, out.as_deref(), &style)?;
            Ok(match report {
                Some(r) => render(cli.format, &r, |r| r.to_text()),
                None => svg,
            })
        }
        Command::Serve {
            host,
            port,
            cors_origin,
            ttl_secs,
        } => serve(ServiceConfig {
            host,
            port,
            ttl: Duration::from_secs(ttl_secs),
            cors_origin,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
