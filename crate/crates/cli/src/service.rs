//! HTTP API over jobs, reports and review actions.
//!
//! One server covers one program and one test file. Jobs run on the blocking
//! thread pool; at most one is unfinished at any time. All state lives behind
//! a single mutex, which also serializes review actions and therefore writes
//! to the test file.

use amplikit_core::session::{
    accept, ignore, run_job, JobConfig, JobError, JobState, Phase, ProgressSink, Report, ReviewError,
};
use amplikit_core::syntax::parse_tests_file;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn unknown_job(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "unknown_job", format!("no job with id {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        let status = match e {
            ReviewError::NotFound { .. } => StatusCode::NOT_FOUND,
            ReviewError::AlreadyDecided { .. } | ReviewError::Conflict { .. } => StatusCode::CONFLICT,
            ReviewError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

struct Job {
    config: JobConfig,
    state: JobState,
    report: Option<Report>,
    cancel: Arc<AtomicBool>,
}

#[derive(Default)]
struct Registry {
    next_id: u64,
    jobs: BTreeMap<u64, Job>,
}

struct Inner {
    src: PathBuf,
    tests: PathBuf,
    registry: Mutex<Registry>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(src: impl Into<PathBuf>, tests: impl Into<PathBuf>) -> Self {
        AppState {
            inner: Arc::new(Inner { src: src.into(), tests: tests.into(), registry: Mutex::new(Registry::default()) }),
        }
    }

    fn registry(&self) -> MutexGuard<'_, Registry> {
        // a panic while holding the lock cannot leave the registry half-updated
        self.inner.registry.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn job_state(&self, id: u64) -> Option<JobState> {
        self.registry().jobs.get(&id).map(|j| j.state.clone())
    }

    /// Cancels every unfinished job and marks it failed; returns their ids.
    pub fn abort_running(&self) -> Vec<u64> {
        let mut reg = self.registry();
        let mut aborted = Vec::new();
        for (id, job) in reg.jobs.iter_mut().filter(|(_, j)| !j.state.phase.is_terminal()) {
            job.cancel.store(true, Ordering::SeqCst);
            job.state.fail(&JobError::Cancelled);
            aborted.push(*id);
        }
        aborted
    }

    /// Registers a job unless one is still unfinished.
    fn submit(&self, config: JobConfig) -> ApiResult<(u64, Arc<AtomicBool>)> {
        let mut reg = self.registry();
        if let Some((id, _)) = reg.jobs.iter().find(|(_, j)| !j.state.phase.is_terminal()) {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "job_running",
                format!("job {id} is still running for {}", self.inner.tests.display()),
            ));
        }
        reg.next_id += 1;
        let id = reg.next_id;
        let cancel = Arc::new(AtomicBool::new(false));
        let state = JobState::queued(id, config.test_name.clone());
        reg.jobs.insert(id, Job { config, state, report: None, cancel: cancel.clone() });
        Ok((id, cancel))
    }

    fn execute(&self, id: u64, cancel: Arc<AtomicBool>) {
        let config = self.registry().jobs[&id].config.clone();
        let mut sink = RegistrySink { app: self.clone(), id, cancel };
        let result = run_job(&config, &mut sink);
        let mut reg = self.registry();
        let job = reg.jobs.get_mut(&id).expect("jobs are never removed");
        match result {
            // an aborted job stays aborted even if it raced to completion
            Ok(report) if !job.state.phase.is_terminal() => {
                job.report = Some(report);
                job.state.advance(Phase::Done);
            }
            Ok(_) => {}
            Err(e) => job.state.fail(&e),
        }
    }
}

/// Mirrors pipeline progress into the registry. Terminal phases are set by
/// the worker together with the report, so a client never sees `Done`
/// without one.
struct RegistrySink {
    app: AppState,
    id: u64,
    cancel: Arc<AtomicBool>,
}

impl ProgressSink for RegistrySink {
    fn phase(&mut self, phase: Phase) {
        if !phase.is_terminal() {
            if let Some(j) = self.app.registry().jobs.get_mut(&self.id) {
                j.state.advance(phase);
            }
        }
    }

    fn mutants(&mut self, done: usize, total: usize) {
        if let Some(j) = self.app.registry().jobs.get_mut(&self.id) {
            j.state.progress(done, total);
        }
    }

    fn cancelled(&self) -> bool {
        self.cancel.load(Ordering::SeqCst)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/health", get(health))
        .route("/api/jobs", post(create_job))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/jobs/{id}/report", get(get_report))
        .route("/api/jobs/{id}/candidates/{name}/accept", post(accept_candidate))
        .route("/api/jobs/{id}/candidates/{name}/ignore", post(ignore_candidate))
        .route("/api/jobs/{id}/candidates/{name}/coverage", get(candidate_coverage))
        .route("/api/files", get(get_file))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(state)
}

const INDEX_HTML: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>amplikit</title></head>
<body>
<h1>amplikit</h1>
<p>The review UI is not bundled with this build. The JSON API is available under <code>/api</code>.</p>
</body></html>
";

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "ok": true }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Overrides {
    seed: Option<u64>,
    step_budget: Option<u64>,
    variants_per_point: Option<usize>,
    max_mutants: Option<usize>,
    max_asserts_per_mutant: Option<usize>,
    max_results: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct JobRequest {
    test_name: String,
    #[serde(default)]
    overrides: Option<Overrides>,
}

async fn create_job(
    State(app): State<AppState>,
    body: Result<Json<JobRequest>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(req) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text()))?;
    let tests = &app.inner.tests;
    let text = std::fs::read_to_string(tests)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io", format!("{}: {e}", tests.display())))?;
    let suite = parse_tests_file(&tests.display().to_string(), &text)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "parse", e.to_string()))?;
    if suite.test(&req.test_name).is_none() {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_test",
            format!("no test named `{}` in {}", req.test_name, tests.display()),
        ));
    }
    let mut config = JobConfig::new(&app.inner.src, tests, &req.test_name);
    let o = req.overrides.unwrap_or_default();
    config.seed = o.seed.unwrap_or(config.seed);
    config.step_budget = o.step_budget.unwrap_or(config.step_budget);
    config.variants_per_point = o.variants_per_point.unwrap_or(config.variants_per_point);
    config.max_mutants = o.max_mutants.unwrap_or(config.max_mutants);
    config.max_asserts_per_mutant = o.max_asserts_per_mutant.unwrap_or(config.max_asserts_per_mutant);
    config.max_results = o.max_results.unwrap_or(config.max_results);
    config.validate().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?;

    let (id, cancel) = app.submit(config)?;
    let worker = app.clone();
    tokio::task::spawn_blocking(move || worker.execute(id, cancel));
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": id }))))
}

fn parse_id(id: &str) -> ApiResult<u64> {
    id.parse().map_err(|_| ApiError::unknown_job(id))
}

async fn get_job(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<JobState>> {
    app.job_state(parse_id(&id)?).map(Json).ok_or_else(|| ApiError::unknown_job(&id))
}

/// Runs `f` on the finished report of job `id`.
fn with_report<T>(app: &AppState, id: &str, f: impl FnOnce(&mut Report, &Path) -> ApiResult<T>) -> ApiResult<T> {
    let n = parse_id(id)?;
    let mut reg = app.registry();
    let job = reg.jobs.get_mut(&n).ok_or_else(|| ApiError::unknown_job(id))?;
    match job.report.as_mut() {
        Some(report) => f(report, &app.inner.tests),
        None => Err(ApiError::new(
            StatusCode::CONFLICT,
            "not_done",
            format!("job {id} has no report (phase {:?})", job.state.phase),
        )),
    }
}

async fn get_report(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let body = with_report(&app, &id, |r, _| Ok(r.to_json()))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

fn candidate_json(report: &Report, name: &str) -> serde_json::Value {
    serde_json::to_value(report.candidate(name).expect("decided candidates exist")).expect("candidate serializes")
}

async fn accept_candidate(
    State(app): State<AppState>,
    UrlPath((id, name)): UrlPath<(String, String)>,
) -> ApiResult<Json<serde_json::Value>> {
    with_report(&app, &id, |report, tests| {
        accept(report, &name, tests)?;
        Ok(Json(candidate_json(report, &name)))
    })
}

async fn ignore_candidate(
    State(app): State<AppState>,
    UrlPath((id, name)): UrlPath<(String, String)>,
) -> ApiResult<Json<serde_json::Value>> {
    with_report(&app, &id, |report, _| {
        ignore(report, &name)?;
        Ok(Json(candidate_json(report, &name)))
    })
}

fn read_file(path: &Path) -> ApiResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("{}: {e}", path.display())))
}

async fn candidate_coverage(
    State(app): State<AppState>,
    UrlPath((id, name)): UrlPath<(String, String)>,
) -> ApiResult<Json<serde_json::Value>> {
    let lines = with_report(&app, &id, |report, _| {
        report.candidate(&name).map(|c| c.highlighted_lines()).ok_or_else(|| {
            ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no candidate named `{name}`"))
        })
    })?;
    let src = &app.inner.src;
    Ok(Json(json!({
        "file": src.display().to_string(),
        "content": read_file(src)?,
        "highlighted_lines": lines,
    })))
}

#[derive(Deserialize)]
struct FileQuery {
    path: Option<String>,
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

async fn get_file(State(app): State<AppState>, Query(q): Query<FileQuery>) -> ApiResult<Json<serde_json::Value>> {
    let Some(path) = q.path else {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_request", "missing `path` parameter"));
    };
    let requested = PathBuf::from(&path);
    let (file, language) = if same_file(&requested, &app.inner.src) {
        (&app.inner.src, "mts")
    } else if same_file(&requested, &app.inner.tests) {
        (&app.inner.tests, "mtt")
    } else {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            "forbidden",
            format!("{path} is not one of the served files"),
        ));
    };
    Ok(Json(json!({ "path": path, "content": read_file(file)?, "language": language })))
}
