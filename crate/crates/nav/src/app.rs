//! Shared state, per-session workers and the HTTP routes.

use std::collections::HashMap;
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;
use uuid::Uuid;

use chute_core::{
    estimate_reference_point, parse_instance, BranchAndBound, MomipInstance, ReferencePoint, WeightVector,
};

use crate::error::{ApiError, ErrorBody};
use crate::session::{navigate, now, Caps, FrontView, NavigationRecord, Overrides, RunSettings, Session};
use crate::store::{append, replay, Event, StoreError};

#[derive(Clone, Debug)]
pub struct ServerConfig {
    /// Holds `instances/` and `sessions/`.
    pub data_dir: PathBuf,
    /// Ceiling in seconds on every run budget, including `y*` estimation.
    pub max_tl: f64,
    pub max_gamma: f64,
    /// Largest accepted number of variables.
    pub max_n: usize,
    /// Largest accepted request body in bytes.
    pub body_limit: usize,
    /// Pending navigations per session.
    pub queue_capacity: usize,
    /// Deadline per objective when estimating `y*`.
    pub ty: f64,
    pub epsilon: f64,
    pub defaults: RunSettings,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("chute-data"),
            max_tl: 60.0,
            max_gamma: 100.0,
            max_n: 2000,
            body_limit: 1 << 20,
            queue_capacity: 8,
            ty: 5.0,
            epsilon: chute_core::DEFAULT_EPSILON,
            defaults: RunSettings::default(),
        }
    }
}

impl ServerConfig {
    fn caps(&self) -> Caps {
        Caps {
            max_tl: self.max_tl,
            max_gamma: self.max_gamma,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: Uuid,
    pub session: Uuid,
    pub status: JobStatus,
    pub lambda: Vec<f64>,
    pub settings: RunSettings,
    pub submitted_at: f64,
    pub result: Option<NavigationRecord>,
    pub error: Option<ErrorBody>,
}

struct Request {
    job: Uuid,
    lambda: WeightVector,
    settings: RunSettings,
    submitted_at: f64,
}

struct SessionHandle {
    state: Arc<Mutex<Session>>,
    tx: mpsc::Sender<Request>,
}

pub struct AppState {
    config: ServerConfig,
    instances: RwLock<HashMap<String, Arc<MomipInstance>>>,
    sessions: RwLock<HashMap<Uuid, SessionHandle>>,
    jobs: RwLock<HashMap<Uuid, Job>>,
}

fn instances_dir(config: &ServerConfig) -> PathBuf {
    config.data_dir.join("instances")
}

fn sessions_dir(config: &ServerConfig) -> PathBuf {
    config.data_dir.join("sessions")
}

fn io_error(path: &FsPath) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl AppState {
    /// Loads stored instances, replays every session log and starts the
    /// session workers. Must run inside a Tokio runtime.
    pub async fn open(config: ServerConfig) -> Result<Arc<Self>, StoreError> {
        let (idir, sdir) = (instances_dir(&config), sessions_dir(&config));
        std::fs::create_dir_all(&idir).map_err(io_error(&idir))?;
        std::fs::create_dir_all(&sdir).map_err(io_error(&sdir))?;
        let mut instances = HashMap::new();
        for path in sorted_entries(&idir, "json")? {
            let text = std::fs::read_to_string(&path).map_err(io_error(&path))?;
            let inst = parse_instance(&text).map_err(|e| StoreError::Corrupt {
                path: path.display().to_string(),
                line: 0,
                message: e.to_string(),
            })?;
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            instances.insert(id, Arc::new(inst));
        }
        let app = Arc::new(Self {
            config,
            instances: RwLock::new(instances),
            sessions: RwLock::new(HashMap::new()),
            jobs: RwLock::new(HashMap::new()),
        });
        for path in sorted_entries(&sdir, "jsonl")? {
            let session = replay(&path)?;
            app.start_session(session);
        }
        Ok(app)
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    fn log_path(&self, id: Uuid) -> PathBuf {
        sessions_dir(&self.config).join(format!("{id}.jsonl"))
    }

    fn start_session(self: &Arc<Self>, session: Session) {
        let id = session.id;
        let (tx, rx) = mpsc::channel(self.config.queue_capacity.max(1));
        let state = Arc::new(Mutex::new(session));
        tokio::spawn(worker(self.clone(), state.clone(), rx));
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, SessionHandle { state, tx });
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let uuid = Uuid::parse_str(id).map_err(|_| ApiError::not_found("session", id))?;
        self.sessions
            .read()
            .expect("session map lock")
            .get(&uuid)
            .map(|h| h.state.clone())
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    fn update_job(&self, id: Uuid, f: impl FnOnce(&mut Job)) {
        if let Some(job) = self.jobs.write().expect("job map lock").get_mut(&id) {
            f(job);
        }
    }
}

fn sorted_entries(dir: &FsPath, ext: &str) -> Result<Vec<PathBuf>, StoreError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_error(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(ext))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Sole writer of one session: runs its navigations in order, persists each
/// result before applying it.
async fn worker(app: Arc<AppState>, session: Arc<Mutex<Session>>, mut rx: mpsc::Receiver<Request>) {
    while let Some(req) = rx.recv().await {
        app.update_job(req.job, |j| j.status = JobStatus::Running);
        let (id, inst, y_star, s_u, seq) = {
            let s = session.lock().expect("session lock");
            (s.id, s.instance.clone(), s.y_star.clone(), s.s_u.clone(), s.history.len() + 1)
        };
        let log = app.log_path(id);
        let outcome = tokio::task::spawn_blocking(move || {
            let record = navigate(&inst, &y_star, &s_u, &req.lambda, &req.settings, seq, req.submitted_at)
                .map_err(ApiError::from_core)?;
            append(&log, &Event::Navigated { record: Box::new(record.clone()) })
                .map_err(|e| ApiError::internal(e.to_string()))?;
            Ok::<_, ApiError>(record)
        })
        .await
        .unwrap_or_else(|e| Err(ApiError::internal(format!("navigation panicked: {e}"))));
        match outcome {
            Ok(record) => {
                let applied = session.lock().expect("session lock").apply(record.clone());
                app.update_job(req.job, |j| match applied {
                    Ok(()) => {
                        j.status = JobStatus::Done;
                        j.result = Some(record);
                    }
                    Err(e) => {
                        j.status = JobStatus::Failed;
                        j.error = Some(ApiError::internal(e.to_string()).body());
                    }
                });
            }
            Err(e) => app.update_job(req.job, |j| {
                j.status = JobStatus::Failed;
                j.error = Some(e.body());
            }),
        }
    }
}

pub fn router(app: Arc<AppState>) -> Router {
    let limit = app.config.body_limit;
    Router::new()
        .route("/instances", post(create_instance))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/navigate", post(submit_navigation))
        .route("/sessions/{id}/front", get(get_front))
        .route("/sessions/{id}/history", get(get_history))
        .route("/jobs/{id}", get(get_job))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(DefaultBodyLimit::max(limit))
        .with_state(app)
}

fn body_text(body: Result<Bytes, BytesRejection>) -> Result<String, ApiError> {
    let bytes = body.map_err(|r| {
        let status = r.status();
        if status == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::too_large(r.body_text())
        } else {
            ApiError::new(status, "bad_request", r.body_text())
        }
    })?;
    String::from_utf8(bytes.to_vec()).map_err(|_| ApiError::bad_request("body is not UTF-8"))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ApiError> {
    serde_json::from_str(text).map_err(|e| ApiError::bad_request(format!("malformed request: {e}")))
}

fn checked_instance(app: &AppState, text: &str) -> Result<MomipInstance, ApiError> {
    let inst = parse_instance(text).map_err(|e| ApiError::bad_request(format!("invalid instance: {e}")))?;
    if inst.n() > app.config.max_n {
        return Err(ApiError::too_large(format!(
            "instance has n = {}, the limit is {}",
            inst.n(),
            app.config.max_n
        )));
    }
    if !matches!(inst.k(), 2 | 3) {
        return Err(ApiError::bad_request(format!(
            "invalid instance: k = {}; only 2 or 3 objectives are supported",
            inst.k()
        )));
    }
    Ok(inst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub id: String,
    pub name: String,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub fingerprint: String,
}

async fn create_instance(
    State(app): State<Arc<AppState>>,
    body: Result<Bytes, BytesRejection>,
) -> Result<(StatusCode, Json<InstanceInfo>), ApiError> {
    let text = body_text(body)?;
    let inst = checked_instance(&app, &text)?;
    let id = Uuid::new_v4().to_string();
    let path = instances_dir(&app.config).join(format!("{id}.json"));
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, inst.to_json())
        .and_then(|_| std::fs::rename(&tmp, &path))
        .map_err(|e| ApiError::internal(format!("cannot store instance: {e}")))?;
    let info = InstanceInfo {
        id: id.clone(),
        name: inst.name().to_string(),
        k: inst.k(),
        n: inst.n(),
        m: inst.m(),
        fingerprint: inst.fingerprint(),
    };
    app.instances.write().expect("instance map lock").insert(id, Arc::new(inst));
    Ok((StatusCode::CREATED, Json(info)))
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    instance_id: Option<String>,
    /// Inline instance document.
    instance: Option<serde_json::Value>,
    y_star: Option<Vec<f64>>,
    #[serde(default)]
    defaults: Overrides,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: Uuid,
    pub instance: String,
    pub k: usize,
    pub y_star: ReferencePoint,
    pub defaults: RunSettings,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Result<Bytes, BytesRejection>,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let text = body_text(body)?;
    let req: CreateSession = parse_json(&text)?;
    let inst = match (&req.instance_id, &req.instance) {
        (Some(id), None) => app
            .instances
            .read()
            .expect("instance map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("instance", id))?,
        (None, Some(doc)) => Arc::new(checked_instance(&app, &doc.to_string())?),
        _ => return Err(ApiError::bad_request("give exactly one of instance_id and instance")),
    };
    let defaults = app.config.defaults.apply(&req.defaults);
    defaults
        .capped(&app.config.caps())
        .chute_config()
        .validate()
        .map_err(ApiError::from_core)?;
    let y_star = match req.y_star {
        Some(v) if v.len() != inst.k() => {
            return Err(ApiError::unprocessable(format!(
                "y_star has {} components, instance has k = {}",
                v.len(),
                inst.k()
            )))
        }
        Some(v) => ReferencePoint::supplied(v).map_err(ApiError::from_core)?,
        None => {
            let (inst, ty, eps) = (inst.clone(), app.config.ty.min(app.config.max_tl), app.config.epsilon);
            tokio::task::spawn_blocking(move || estimate_reference_point(&inst, ty, eps, &BranchAndBound))
                .await
                .map_err(|e| ApiError::internal(e.to_string()))?
                .map_err(ApiError::from_core)?
        }
    };
    let id = Uuid::new_v4();
    let created_at = now();
    let event = Event::Created {
        session: id,
        instance: serde_json::from_str(&inst.to_json()).expect("instance json"),
        y_star: y_star.clone(),
        defaults: defaults.clone(),
        created_at,
    };
    let log = app.log_path(id);
    tokio::task::spawn_blocking(move || append(&log, &event))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let info = SessionInfo {
        id,
        instance: inst.name().to_string(),
        k: inst.k(),
        y_star: y_star.clone(),
        defaults: defaults.clone(),
    };
    app.start_session(Session::new(id, inst, y_star, defaults, created_at));
    Ok((StatusCode::CREATED, Json(info)))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NavigateRequest {
    lambda: Vec<f64>,
    #[serde(default)]
    overrides: Overrides,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobTicket {
    pub job: Uuid,
    pub status: JobStatus,
}

async fn submit_navigation(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> Result<(StatusCode, Json<JobTicket>), ApiError> {
    let session = app.session(&id)?;
    let text = body_text(body)?;
    let req: NavigateRequest = parse_json(&text)?;
    let (sid, k, defaults) = {
        let s = session.lock().expect("session lock");
        (s.id, s.instance.k(), s.defaults.clone())
    };
    if req.lambda.len() != k {
        return Err(ApiError::unprocessable(format!(
            "lambda has {} components, the session has k = {k}",
            req.lambda.len()
        )));
    }
    let lambda = WeightVector::new(req.lambda.clone()).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let settings = defaults.apply(&req.overrides).capped(&app.config.caps());
    settings
        .chute_config()
        .validate()
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let job = Job {
        id: Uuid::new_v4(),
        session: sid,
        status: JobStatus::Queued,
        lambda: req.lambda,
        settings: settings.clone(),
        submitted_at: now(),
        result: None,
        error: None,
    };
    let ticket = JobTicket {
        job: job.id,
        status: JobStatus::Queued,
    };
    let request = Request {
        job: job.id,
        lambda,
        settings,
        submitted_at: job.submitted_at,
    };
    app.jobs.write().expect("job map lock").insert(job.id, job);
    let tx = app
        .sessions
        .read()
        .expect("session map lock")
        .get(&sid)
        .map(|h| h.tx.clone())
        .ok_or_else(|| ApiError::not_found("session", sid))?;
    if let Err(e) = tx.try_send(request) {
        app.jobs.write().expect("job map lock").remove(&ticket.job);
        return Err(match e {
            mpsc::error::TrySendError::Full(_) => {
                ApiError::queue_full(format!("session {sid} already has a full queue of navigations"))
            }
            mpsc::error::TrySendError::Closed(_) => ApiError::internal("session worker stopped"),
        });
    }
    Ok((StatusCode::ACCEPTED, Json(ticket)))
}

async fn get_job(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Job>, ApiError> {
    let uuid = Uuid::parse_str(&id).map_err(|_| ApiError::not_found("job", &id))?;
    app.jobs
        .read()
        .expect("job map lock")
        .get(&uuid)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found("job", &id))
}

async fn get_front(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<FrontView>, ApiError> {
    let session = app.session(&id)?;
    let front = session.lock().expect("session lock").front();
    Ok(Json(front))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub session: Uuid,
    pub entries: Vec<NavigationRecord>,
}

async fn get_history(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<History>, ApiError> {
    let session = app.session(&id)?;
    let s = session.lock().expect("session lock");
    Ok(Json(History {
        session: s.id,
        entries: s.history.clone(),
    }))
}
