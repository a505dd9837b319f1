use crate::service;
use amplikit_core::amp::{DEFAULT_MAX_ASSERTS_PER_MUTANT, DEFAULT_MAX_MUTANTS, DEFAULT_SEED, DEFAULT_VARIANTS_PER_POINT};
use amplikit_core::interp::DEFAULT_BUDGET;
use amplikit_core::select::{CoverageReport, DEFAULT_MAX_RESULTS};
use amplikit_core::session::{
    accept, ignore, load_report, run_job, save_report, JobConfig, JobError, NoProgress, Report, ReportError,
    ReviewError, Status,
};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Ok = 0,
    Failure = 1,
    Usage = 2,
    Parse = 3,
    UnknownTest = 4,
    Io = 5,
    Conflict = 6,
    Bind = 7,
}

#[derive(Parser, Debug)]
#[command(name = "amplikit", version, about = "Amplify a unit test and review the results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Amplify one test and print the added coverage of each candidate.
    Run(RunArgs),
    /// Serve the HTTP API for one program and its test file.
    Serve(ServeArgs),
    /// Accept a candidate from a saved report into the test file.
    Accept(AcceptArgs),
    /// Print a saved report.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tests: PathBuf,
    /// Name of the test to amplify.
    #[arg(long)]
    test: String,
    #[arg(long, env = "AMPLIKIT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Step budget per test execution.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Variants generated per mutation point.
    #[arg(long, default_value_t = DEFAULT_VARIANTS_PER_POINT)]
    variants: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_MUTANTS)]
    max_mutants: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_RESULTS)]
    max_results: usize,
    /// Write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Review candidates one at a time after the run.
    #[arg(long)]
    interactive: bool,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tests: PathBuf,
}

#[derive(Args, Debug)]
struct AcceptArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    candidate: String,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    report: PathBuf,
}

/// Parses `args` and runs the command on the process's standard streams.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = std::io::stdin();
    run_with(args, &mut stdin.lock(), &mut std::io::stdout(), &mut std::io::stderr()) as i32
}

pub fn run_with<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::Usage } else { ExitCode::Ok };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, input, out, err),
        Command::Serve(a) => cmd_serve(a, err),
        Command::Accept(a) => cmd_accept(a, out),
        Command::Report(a) => cmd_report(a, out),
    };
    match result {
        Ok(()) => ExitCode::Ok,
        Err((code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

type CmdResult = Result<(), (ExitCode, String)>;

fn job_error(e: JobError) -> (ExitCode, String) {
    let code = match e {
        JobError::InvalidConfig { .. } => ExitCode::Usage,
        JobError::Parse { .. } => ExitCode::Parse,
        JobError::UnknownTest { .. } => ExitCode::UnknownTest,
        JobError::Io { .. } => ExitCode::Io,
        _ => ExitCode::Failure,
    };
    (code, e.to_string())
}

fn report_error(e: ReportError) -> (ExitCode, String) {
    let code = match e {
        ReportError::Io { .. } => ExitCode::Io,
        ReportError::Malformed { .. } | ReportError::SchemaVersionMismatch { .. } => ExitCode::Parse,
    };
    (code, e.to_string())
}

fn review_error(e: ReviewError) -> (ExitCode, String) {
    let code = match e {
        ReviewError::NotFound { .. } => ExitCode::UnknownTest,
        ReviewError::AlreadyDecided { .. } | ReviewError::Conflict { .. } => ExitCode::Conflict,
        ReviewError::Io { .. } => ExitCode::Io,
    };
    (code, e.to_string())
}

fn cmd_run(a: RunArgs, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let config = JobConfig {
        seed: a.seed,
        step_budget: a.budget,
        variants_per_point: a.variants,
        max_mutants: a.max_mutants,
        max_asserts_per_mutant: DEFAULT_MAX_ASSERTS_PER_MUTANT,
        max_results: a.max_results,
        ..JobConfig::new(&a.src, &a.tests, &a.test)
    };
    config.validate().map_err(job_error)?;
    let mut report = run_job(&config, &mut NoProgress).map_err(job_error)?;

    let io = |e: std::io::Error| (ExitCode::Io, e.to_string());
    write!(out, "{}", report.text()).map_err(io)?;
    out.flush().map_err(io)?;
    if report.candidates.is_empty() {
        let r = &report.rejected;
        let _ = writeln!(
            err,
            "no candidates (rejected: {} without new coverage, {} duplicate, {} failing, {} without a changed value)",
            r.no_new_coverage, r.duplicate, r.failed, r.no_changed_value
        );
    }
    if let Some(path) = &a.json {
        save_report(&report, path).map_err(report_error)?;
    }
    if a.interactive && !report.candidates.is_empty() {
        review_loop(&mut report, &a.tests, a.json.as_deref(), input, err)?;
    }
    Ok(())
}

fn review_loop(
    report: &mut Report,
    tests: &Path,
    json: Option<&Path>,
    input: &mut dyn BufRead,
    err: &mut dyn Write,
) -> CmdResult {
    let io = |e: std::io::Error| (ExitCode::Io, e.to_string());
    let names: Vec<String> = report.candidates.iter().map(|c| c.name.clone()).collect();
    let n = names.len();
    'candidates: for (k, name) in names.iter().enumerate() {
        let c = report.candidate(name).expect("listed above");
        let block = CoverageReport { candidates: vec![c.coverage()] }.text();
        writeln!(err, "\n=== candidate {} of {n} ===", k + 1).map_err(io)?;
        writeln!(err, "{}", c.code).map_err(io)?;
        writeln!(err, "mutation: {}", c.mutation.description).map_err(io)?;
        write!(err, "{block}").map_err(io)?;
        loop {
            write!(err, "[a]ccept / [i]gnore / [s]kip / [q]uit > ").map_err(io)?;
            err.flush().map_err(io)?;
            let mut line = String::new();
            if input.read_line(&mut line).map_err(io)? == 0 {
                writeln!(err).map_err(io)?;
                break 'candidates;
            }
            match line.trim() {
                "a" | "accept" => {
                    match accept(report, name, tests) {
                        Ok(written) => writeln!(err, "accepted as '{written}'").map_err(io)?,
                        Err(e) => writeln!(err, "cannot accept: {e}").map_err(io)?,
                    }
                    break;
                }
                "i" | "ignore" => {
                    ignore(report, name).map_err(review_error)?;
                    writeln!(err, "ignored").map_err(io)?;
                    break;
                }
                "s" | "skip" | "" => break,
                "q" | "quit" => break 'candidates,
                other => writeln!(err, "unknown choice '{other}'").map_err(io)?,
            }
        }
        if let Some(path) = json {
            save_report(report, path).map_err(report_error)?;
        }
    }
    writeln!(
        err,
        "accepted {}, ignored {}, undecided {}",
        report.count(Status::Accepted),
        report.count(Status::Ignored),
        report.count(Status::Proposed)
    )
    .map_err(io)?;
    Ok(())
}

fn cmd_accept(a: AcceptArgs, out: &mut dyn Write) -> CmdResult {
    let mut report = load_report(&a.report).map_err(report_error)?;
    let tests = report.config.tests_path.clone();
    let written = accept(&mut report, &a.candidate, &tests).map_err(review_error)?;
    save_report(&report, &a.report).map_err(report_error)?;
    writeln!(out, "{written}").map_err(|e| (ExitCode::Io, e.to_string()))
}

fn cmd_report(a: ReportArgs, out: &mut dyn Write) -> CmdResult {
    let report = load_report(&a.report).map_err(report_error)?;
    let io = |e: std::io::Error| (ExitCode::Io, e.to_string());
    write!(out, "{}", report.text()).map_err(io)?;
    for c in &report.candidates {
        let status = match (&c.status, &c.written_name) {
            (Status::Accepted, Some(w)) => format!("accepted as '{w}'"),
            (s, _) => s.to_string(),
        };
        writeln!(out, "{}: {status}", c.name).map_err(io)?;
    }
    Ok(())
}

fn cmd_serve(a: ServeArgs, err: &mut dyn Write) -> CmdResult {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| (ExitCode::Failure, e.to_string()))?;
    let state = service::AppState::new(a.src, a.tests);
    let addr = format!("{}:{}", a.host, a.port);
    let served = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| (ExitCode::Bind, format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| (ExitCode::Bind, e.to_string()))?;
        let _ = writeln!(err, "listening on http://{local}");
        let _ = err.flush();
        let shutdown_state = state.clone();
        axum::serve(listener, service::router(state))
            .with_graceful_shutdown(async move {
                let _ = tokio::signal::ctrl_c().await;
                for id in shutdown_state.abort_running() {
                    eprintln!("job {id} aborted");
                }
            })
            .await
            .map_err(|e| (ExitCode::Failure, e.to_string()))
    });
    // a cancelled job stops at its next mutant; do not wait on it for long
    runtime.shutdown_timeout(std::time::Duration::from_secs(2));
    served?;
    let _ = writeln!(err, "shut down");
    Ok(())
}
