//! HTTP API over a configuration session, served under `/api` and `/api/v1`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::{Json, State};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use kfix_core::dotconfig::{apply_fix, load_dotconfig, save_dotconfig};
use kfix_core::eval::{choice_visibility, validate, visibility, Configuration, SymbolValue};
use kfix_core::harness::direct_fix;
use kfix_core::kconfig::{LinkedModel, MenuNode, SymId};
use kfix_core::rangefix::{Limits, Resolution, ResolveError, Resolver};
use kfix_core::tristate::Tristate;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::wire::{lookup, parse_value, report_entries, value_text, WireResolution};

pub const SESSION_HEADER: &str = "x-kfix-session";
pub const GENERATION_HEADER: &str = "x-kfix-generation";
const DEFAULT_SESSION: &str = "default";

/// Fixes stamped with the generation they were computed at.
struct StoredFixes {
    generation: u64,
    resolution: Resolution,
}

pub struct Session {
    config: Configuration,
    desired: Vec<(SymId, SymbolValue)>,
    generation: u64,
    fixes: Option<StoredFixes>,
}

impl Session {
    fn new(config: Configuration) -> Session {
        Session {
            config,
            desired: Vec::new(),
            generation: 0,
            fixes: None,
        }
    }

    fn bump(&mut self) {
        self.generation += 1;
        self.fixes = None;
    }
}

#[derive(Default)]
pub struct ServerOptions {
    pub limits: Limits,
    pub multi: bool,
    pub static_dir: Option<PathBuf>,
}

pub struct AppState {
    model: Arc<LinkedModel>,
    initial: Configuration,
    limits: Limits,
    multi: bool,
    next_session: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(model: Arc<LinkedModel>, config: Configuration, opts: &ServerOptions) -> AppState {
        let mut sessions = HashMap::new();
        sessions.insert(DEFAULT_SESSION.to_string(), Arc::new(Mutex::new(Session::new(config.clone()))));
        AppState {
            model,
            initial: config,
            limits: opts.limits,
            multi: opts.multi,
            next_session: AtomicU64::new(1),
            sessions: Mutex::new(sessions),
        }
    }

    fn session(&self, headers: &HeaderMap) -> Result<Arc<Mutex<Session>>, ApiError> {
        let id = headers.get(SESSION_HEADER).and_then(|v| v.to_str().ok()).unwrap_or(DEFAULT_SESSION);
        self.sessions
            .lock()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, None, format!("unknown session {id}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    generation: Option<u64>,
    message: String,
    partial: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, generation: Option<u64>, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            generation,
            message: message.into(),
            partial: None,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "generation": self.generation, "error": self.message });
        if let Some(p) = self.partial {
            body["partial"] = p;
        }
        respond(self.status, self.generation, body)
    }
}

fn respond(status: StatusCode, generation: Option<u64>, body: Value) -> Response {
    let mut resp = (status, Json(body)).into_response();
    if let Some(g) = generation {
        resp.headers_mut().insert(GENERATION_HEADER, HeaderValue::from(g));
    }
    resp
}

fn ok(generation: u64, mut body: Value) -> Response {
    body["generation"] = json!(generation);
    respond(StatusCode::OK, Some(generation), body)
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum TreeNode {
    Symbol {
        name: String,
        #[serde(rename = "type")]
        ty: String,
        prompt: Option<String>,
        visible: Tristate,
        value: String,
        user: Option<String>,
        children: Vec<TreeNode>,
    },
    Menu {
        title: String,
        visible: Tristate,
        children: Vec<TreeNode>,
    },
    Choice {
        name: Option<String>,
        #[serde(rename = "type")]
        ty: String,
        prompt: Option<String>,
        visible: Tristate,
        children: Vec<TreeNode>,
    },
    Comment {
        text: String,
        visible: Tristate,
    },
}

fn prompt_text(cfg: &Configuration, model: &LinkedModel, prompts: &[kfix_core::kconfig::link::Prompt]) -> Option<String> {
    prompts
        .iter()
        .find(|p| cfg.eval(model, &p.cond) != Tristate::No)
        .or(prompts.first())
        .map(|p| p.text.clone())
}

fn tree(model: &LinkedModel, cfg: &Configuration, nodes: &[MenuNode]) -> Vec<TreeNode> {
    nodes
        .iter()
        .map(|n| match n {
            MenuNode::Symbol { id, children } => {
                let s = model.symbol(*id);
                TreeNode::Symbol {
                    name: s.name.clone(),
                    ty: s.ty.to_string(),
                    prompt: prompt_text(cfg, model, &s.prompts),
                    visible: visibility(model, *id, &cfg.effective),
                    value: value_text(cfg.value(*id)),
                    user: cfg.user_value(*id).map(value_text),
                    children: tree(model, cfg, children),
                }
            }
            MenuNode::Menu { title, visible, children } => TreeNode::Menu {
                title: title.clone(),
                visible: cfg.eval(model, visible),
                children: tree(model, cfg, children),
            },
            MenuNode::Choice { id, children } => {
                let c = &model.choices[id.index()];
                TreeNode::Choice {
                    name: c.name.clone(),
                    ty: c.ty.to_string(),
                    prompt: prompt_text(cfg, model, &c.prompts),
                    visible: choice_visibility(model, *id, &cfg.effective),
                    children: tree(model, cfg, children),
                }
            }
            MenuNode::Comment { text, visible } => TreeNode::Comment {
                text: text.clone(),
                visible: cfg.eval(model, visible),
            },
        })
        .collect()
}

async fn get_tree(State(st): State<Arc<AppState>>, headers: HeaderMap) -> Result<Response, ApiError> {
    let s = st.session(&headers)?;
    let s = s.lock();
    let nodes = tree(&st.model, &s.config, &st.model.tree);
    Ok(ok(s.generation, json!({ "mainmenu": st.model.mainmenu, "tree": nodes })))
}

fn values_json(model: &LinkedModel, cfg: &Configuration) -> Value {
    let map: serde_json::Map<String, Value> = model.ids().map(|id| (model.symbol(id).name.clone(), json!(value_text(cfg.value(id))))).collect();
    Value::Object(map)
}

async fn get_config(State(st): State<Arc<AppState>>, headers: HeaderMap) -> Result<Response, ApiError> {
    let s = st.session(&headers)?;
    let s = s.lock();
    Ok(ok(
        s.generation,
        json!({ "dotconfig": save_dotconfig(&s.config, &st.model), "values": values_json(&st.model, &s.config) }),
    ))
}

async fn put_config(State(st): State<Arc<AppState>>, headers: HeaderMap, body: String) -> Result<Response, ApiError> {
    let s = st.session(&headers)?;
    let mut s = s.lock();
    let loaded = load_dotconfig(&body, &st.model).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, Some(s.generation), e.to_string()))?;
    s.config = loaded.config;
    s.bump();
    Ok(ok(s.generation, json!({ "warnings": loaded.warnings })))
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum DesiredOp {
    Add,
    Remove,
    Replace,
    Clear,
}

#[derive(Deserialize)]
struct DesiredEntry {
    symbol: String,
    target: Option<String>,
}

#[derive(Deserialize)]
struct DesiredRequest {
    op: DesiredOp,
    #[serde(default)]
    entries: Vec<DesiredEntry>,
}

fn desired_json(model: &LinkedModel, desired: &[(SymId, SymbolValue)]) -> Value {
    desired
        .iter()
        .map(|(id, v)| json!({ "symbol": model.symbol(*id).name, "target": value_text(v) }))
        .collect()
}

async fn post_desired(State(st): State<Arc<AppState>>, headers: HeaderMap, Json(req): Json<DesiredRequest>) -> Result<Response, ApiError> {
    let s = st.session(&headers)?;
    let mut s = s.lock();
    let g = Some(s.generation);
    let mut parsed = Vec::with_capacity(req.entries.len());
    for e in &req.entries {
        let id = lookup(&st.model, &e.symbol).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, g, format!("unknown symbol {}", e.symbol)))?;
        let v = match (&req.op, &e.target) {
            (DesiredOp::Remove, _) => None,
            (_, Some(t)) => Some(parse_value(&st.model, id, t).map_err(|m| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, g, m))?),
            (_, None) => return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, g, format!("missing target for {}", e.symbol))),
        };
        parsed.push((id, v));
    }
    if matches!(req.op, DesiredOp::Replace | DesiredOp::Clear) {
        s.desired.clear();
    }
    for (id, v) in parsed {
        s.desired.retain(|(d, _)| *d != id);
        if let Some(v) = v {
            s.desired.push((id, v));
        }
    }
    s.bump();
    Ok(ok(s.generation, json!({ "desired": desired_json(&st.model, &s.desired) })))
}

fn resolve_error(e: ResolveError, g: u64) -> ApiError {
    let status = match e {
        ResolveError::NoFixWithinBudget => StatusCode::GATEWAY_TIMEOUT,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    };
    ApiError::new(status, Some(g), e.to_string())
}

async fn post_fixes(State(st): State<Arc<AppState>>, headers: HeaderMap) -> Result<Response, ApiError> {
    let session = st.session(&headers)?;
    let (g, cfg, desired) = {
        let s = session.lock();
        if s.desired.is_empty() {
            return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, Some(s.generation), "no desired changes"));
        }
        (s.generation, s.config.clone(), s.desired.clone())
    };
    let model = st.model.clone();
    let limits = st.limits;
    let res = tokio::task::spawn_blocking(move || Resolver::new(&model)?.resolve_conflict(&cfg, &desired, &limits))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, Some(g), e.to_string()))?
        .map_err(|e| resolve_error(e, g))?;
    let wire = WireResolution::from(&res);
    let mut s = session.lock();
    if s.generation != g {
        return Err(ApiError::new(StatusCode::CONFLICT, Some(s.generation), "desired changes were edited during resolution"));
    }
    let timed_out = res.timed_out;
    s.fixes = Some(StoredFixes { generation: g, resolution: res });
    let body = serde_json::to_value(&wire).expect("serializable");
    if timed_out {
        let mut err = ApiError::new(StatusCode::GATEWAY_TIMEOUT, Some(g), "resolution budget exhausted");
        err.partial = Some(body);
        return Err(err);
    }
    Ok(ok(g, body))
}

#[derive(Deserialize)]
struct ApplyRequest {
    index: usize,
    generation: u64,
}

async fn post_apply(State(st): State<Arc<AppState>>, headers: HeaderMap, Json(req): Json<ApplyRequest>) -> Result<Response, ApiError> {
    let session = st.session(&headers)?;
    let mut s = session.lock();
    let g = s.generation;
    let stale = || ApiError::new(StatusCode::CONFLICT, Some(g), format!("fixes are not current for generation {}", req.generation));
    let stored = s.fixes.as_ref().ok_or_else(stale)?;
    if req.generation != g || stored.generation != g {
        return Err(stale());
    }
    let fix = if stored.resolution.directly_applicable && req.index == 0 {
        direct_fix(&st.model, &kfix_core::rangefix::Conflict {
            desired: s.desired.clone(),
            base_config: s.config.clone(),
        })
    } else {
        stored
            .resolution
            .fixes
            .get(req.index)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, Some(g), format!("no fix with index {}", req.index)))?
    };
    let (after, report) = apply_fix(&s.config, &fix, &st.model).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, Some(g), e.to_string()))?;
    let changes: Vec<Value> = st
        .model
        .ids()
        .filter(|&id| s.config.value(id) != after.value(id))
        .map(|id| json!({ "symbol": st.model.symbol(id).name, "from": value_text(s.config.value(id)), "to": value_text(after.value(id)) }))
        .collect();
    let violations: Vec<String> = validate(&st.model, &after).iter().map(ToString::to_string).collect();
    s.desired.retain(|(id, v)| after.value(*id) != v);
    s.config = after;
    s.bump();
    Ok(ok(
        s.generation,
        json!({
            "changes": changes,
            "report": report_entries(&report),
            "fully_applicable": report.fully_applicable(),
            "violations": violations,
            "desired": desired_json(&st.model, &s.desired),
        }),
    ))
}

async fn post_session(State(st): State<Arc<AppState>>) -> Result<Response, ApiError> {
    if !st.multi {
        return Err(ApiError::new(StatusCode::NOT_FOUND, None, "multiple sessions are disabled"));
    }
    let id = format!("s{}", st.next_session.fetch_add(1, Ordering::Relaxed));
    st.sessions.lock().insert(id.clone(), Arc::new(Mutex::new(Session::new(st.initial.clone()))));
    Ok(ok(0, json!({ "session": id })))
}

const PLACEHOLDER: &str = "<!doctype html><title>kfix</title><p>The configurator UI is not built. The API is served under <code>/api/v1</code>.</p>\n";

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/tree", get(get_tree))
        .route("/config", get(get_config).put(put_config))
        .route("/desired", post(post_desired))
        .route("/fixes", post(post_fixes))
        .route("/apply", post(post_apply))
        .route("/sessions", post(post_session));
    let app = Router::new().nest("/api", api.clone()).nest("/api/v1", api).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

pub fn app(model: LinkedModel, config: Configuration, opts: ServerOptions) -> Router {
    let state = Arc::new(AppState::new(Arc::new(model), config, &opts));
    router(state, opts.static_dir)
}
