//! HTTP service over one project: read endpoints for the authoring UI and
//! write endpoints that append to the mutation log.
//!
//! Reads run concurrently. Writes hold the write lock until the new project
//! file is durably on disk, so an acknowledged mutation survives a crash and
//! mutations are applied one at a time in arrival order.

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequestParts, Path as UrlPath, Query, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use recapit_core::attention::ScarfInterval;
use recapit_core::cards::{
    apply_mutation, keyword_filter, CardError, CropRect, HeatmapOverlay, Mutation, Screenshot, TopicCard,
};
use recapit_core::model::SignalKind;
use recapit_core::notes::NoteEvent;
use recapit_core::segmentation::TopicSegment;
use recapit_core::stream::Utterance;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use crate::error::Error;
use crate::pipeline::Workspace;
use crate::project::save_project;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    NotFound,
    InvalidInput,
    Conflict,
    Io,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ApiError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            detail: None,
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::InvalidInput, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.code {
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::InvalidInput => StatusCode::BAD_REQUEST,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::Io => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self)).into_response()
    }
}

impl From<CardError> for ApiError {
    fn from(e: CardError) -> Self {
        match e {
            CardError::UnknownCard(_) | CardError::UnknownUtterance(_) => Self::not_found(e.to_string()),
            other => Self::invalid(other.to_string()),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::MissingFile { .. } => Self::new(ErrorCode::Io, e.to_string()),
            other => Self::invalid(other.to_string()),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Query-string extractor whose rejections use the API error shape.
struct ApiQuery<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Self(v))
            .map_err(|e| ApiError::invalid(e.body_text()))
    }
}

/// In-memory snapshot served to clients.
#[derive(Debug)]
struct Live {
    ws: Workspace,
    utterances: Vec<Utterance>,
}

#[derive(Debug, Clone)]
pub struct AppState(Arc<RwLock<Live>>);

impl AppState {
    /// Loads the project and whatever derived streams exist.
    pub fn load(path: &Path) -> crate::error::Result<Self> {
        let ws = Workspace::open(path)?;
        let utterances = if ws.derived().path(crate::derived::UTTERANCES).exists() {
            ws.utterances()?
        } else {
            Vec::new()
        };
        Ok(Self(Arc::new(RwLock::new(Live { ws, utterances }))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentView {
    #[serde(flatten)]
    pub segment: TopicSegment,
    pub card: Option<TopicCard>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationAck {
    pub version: u64,
    pub card: TopicCard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapView {
    pub segment: String,
    pub kind: SignalKind,
    pub width: u32,
    pub height: u32,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub keywords: Vec<String>,
    pub segment_ids: Vec<String>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/project", get(get_project))
        .route("/segments", get(get_segments))
        .route("/series", get(get_series))
        .route("/scarf", get(get_scarf))
        .route("/utterances", get(get_utterances))
        .route("/notes", get(get_notes))
        .route("/heatmap", get(get_heatmap))
        .route("/search", get(get_search))
        .route("/segments/{id}/title", post(post_title))
        .route("/cards/{id}/quotes", post(post_quote))
        .route("/cards/{id}/notes", post(post_note))
        .route("/cards/{id}/mark", post(post_mark))
        .route("/cards/{id}/screenshots", post(post_screenshot))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(state)
}

async fn get_project(State(s): State<AppState>) -> ApiResult<recapit_core::WorkshopProject> {
    Ok(Json(s.0.read().await.ws.project.clone()))
}

async fn get_segments(State(s): State<AppState>) -> ApiResult<Vec<SegmentView>> {
    let live = s.0.read().await;
    let a = &live.ws.project.authoring;
    Ok(Json(
        a.segments
            .iter()
            .map(|seg| SegmentView {
                segment: seg.clone(),
                card: a.cards.iter().find(|c| c.segment_id == seg.id).cloned(),
            })
            .collect(),
    ))
}

fn parse_kind(kind: Option<&str>) -> Result<SignalKind, ApiError> {
    match kind.unwrap_or("attention") {
        "attention" => Ok(SignalKind::Attention),
        "activity" => Ok(SignalKind::Activity),
        other => Err(ApiError {
            detail: Some("kind".into()),
            ..ApiError::invalid(format!("unknown series kind '{other}'"))
        }),
    }
}

#[derive(Deserialize)]
struct KindQuery {
    kind: Option<String>,
}

async fn get_series(
    State(s): State<AppState>,
    ApiQuery(q): ApiQuery<KindQuery>,
) -> ApiResult<recapit_core::MultivariateSeries> {
    let kind = parse_kind(q.kind.as_deref())?;
    let live = s.0.read().await;
    live.ws
        .series(kind)?
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no {} series; run ingest", kind.as_str())))
}

#[derive(Deserialize)]
struct ScarfQuery {
    participant: Option<String>,
}

async fn get_scarf(State(s): State<AppState>, ApiQuery(q): ApiQuery<ScarfQuery>) -> ApiResult<Vec<ScarfInterval>> {
    let live = s.0.read().await;
    let all = live.ws.scarfs().map_err(|e| ApiError::not_found(e.to_string()))?;
    Ok(Json(match q.participant {
        Some(p) => all.into_iter().filter(|i| i.participant_id == p).collect(),
        None => all,
    }))
}

#[derive(Deserialize)]
struct RangeQuery {
    from: Option<f64>,
    to: Option<f64>,
}

async fn get_utterances(State(s): State<AppState>, ApiQuery(q): ApiQuery<RangeQuery>) -> ApiResult<Vec<Utterance>> {
    let live = s.0.read().await;
    let from = q.from.unwrap_or(f64::NEG_INFINITY);
    let to = q.to.unwrap_or(f64::INFINITY);
    if from > to {
        return Err(ApiError::invalid("'from' is after 'to'"));
    }
    Ok(Json(
        live.utterances
            .iter()
            .filter(|u| u.span.end > from && u.span.start < to)
            .cloned()
            .collect(),
    ))
}

async fn get_notes(State(s): State<AppState>) -> ApiResult<Vec<NoteEvent>> {
    let live = s.0.read().await;
    live.ws
        .note_events()
        .map(Json)
        .map_err(|e| ApiError::not_found(e.to_string()))
}

#[derive(Deserialize)]
struct HeatmapQuery {
    segment: String,
    kind: Option<String>,
}

async fn get_heatmap(State(s): State<AppState>, ApiQuery(q): ApiQuery<HeatmapQuery>) -> ApiResult<HeatmapView> {
    let kind = parse_kind(q.kind.as_deref())?;
    let live = s.0.read().await;
    if !live.ws.project.authoring.segments.iter().any(|seg| seg.id == q.segment) {
        return Err(ApiError::not_found(format!("unknown segment '{}'", q.segment)));
    }
    let path = live.ws.derived().heatmap_path(&q.segment, kind);
    if !path.exists() {
        return Err(ApiError::not_found(format!(
            "no {} heatmap for '{}'; run stats",
            kind.as_str(),
            q.segment
        )));
    }
    let (width, height, values) = crate::derived::read_heatmap(&path)?;
    Ok(Json(HeatmapView {
        segment: q.segment,
        kind,
        width,
        height,
        values,
    }))
}

#[derive(Deserialize)]
struct SearchQuery {
    q: Option<String>,
}

/// Keywords of a query string: whitespace or comma separated.
pub fn query_keywords(q: &str) -> Vec<String> {
    q.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|k| !k.is_empty())
        .map(String::from)
        .collect()
}

async fn get_search(State(s): State<AppState>, ApiQuery(q): ApiQuery<SearchQuery>) -> ApiResult<SearchResult> {
    let keywords = query_keywords(q.q.as_deref().unwrap_or(""));
    let live = s.0.read().await;
    let refs: Vec<&str> = keywords.iter().map(String::as_str).collect();
    let ids = keyword_filter(&live.ws.project.authoring.segments, &live.utterances, &refs)?;
    Ok(Json(SearchResult {
        keywords,
        segment_ids: ids,
    }))
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ApiError {
            detail: (path != ".").then_some(path),
            ..ApiError::invalid(e.into_inner().to_string())
        }
    })
}

/// Applies one mutation under the write lock and acknowledges only after the
/// project file has been replaced on disk.
async fn commit(state: &AppState, base_version: Option<u64>, mutation: Mutation) -> ApiResult<MutationAck> {
    let mut live = state.0.write().await;
    let current = live.ws.project.authoring.version();
    if let Some(base) = base_version {
        if base != current {
            return Err(ApiError::new(
                ErrorCode::Conflict,
                format!("project is at version {current}, request was based on {base}"),
            ));
        }
    }
    let card_id = mutation.card_id().to_string();
    let next = apply_mutation(&live.ws.project.authoring, mutation, &live.utterances)?;
    let mut project = live.ws.project.clone();
    project.authoring = next;
    let dir = live.ws.dir.clone();
    let project = tokio::task::spawn_blocking(move || save_project(&project, &dir).map(|_| project))
        .await
        .map_err(|e| ApiError::new(ErrorCode::Io, e.to_string()))??;
    live.ws.project = project;
    let a = &live.ws.project.authoring;
    let card = a
        .cards
        .iter()
        .find(|c| c.segment_id == card_id)
        .cloned()
        .expect("mutated card exists");
    Ok(Json(MutationAck {
        version: a.version(),
        card,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TitleBody {
    title: String,
    base_version: Option<u64>,
}

async fn post_title(State(s): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<MutationAck> {
    let b: TitleBody = parse_body(&body)?;
    commit(
        &s,
        b.base_version,
        Mutation::SetTitle {
            card_id: id,
            title: b.title,
        },
    )
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuoteBody {
    utterance_id: String,
    base_version: Option<u64>,
}

async fn post_quote(State(s): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<MutationAck> {
    let b: QuoteBody = parse_body(&body)?;
    commit(
        &s,
        b.base_version,
        Mutation::AddQuote {
            card_id: id,
            utterance_id: b.utterance_id,
        },
    )
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoteBody {
    text: String,
    base_version: Option<u64>,
}

async fn post_note(State(s): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<MutationAck> {
    let b: NoteBody = parse_body(&body)?;
    commit(
        &s,
        b.base_version,
        Mutation::AddNote {
            card_id: id,
            text: b.text,
        },
    )
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkBody {
    marked: bool,
    base_version: Option<u64>,
}

async fn post_mark(State(s): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<MutationAck> {
    let b: MarkBody = parse_body(&body)?;
    commit(
        &s,
        b.base_version,
        Mutation::SetMarked {
            card_id: id,
            marked: b.marked,
        },
    )
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScreenshotBody {
    image_path: String,
    crop: CropRect,
    heatmap_overlay: Option<HeatmapOverlay>,
    base_version: Option<u64>,
}

async fn post_screenshot(
    State(s): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<MutationAck> {
    let b: ScreenshotBody = parse_body(&body)?;
    let full = {
        let live = s.0.read().await;
        live.ws.dir.join(&b.image_path)
    };
    if b.image_path.contains("..") || Path::new(&b.image_path).is_absolute() {
        return Err(ApiError {
            detail: Some("image_path".into()),
            ..ApiError::invalid("image_path must be relative to the project directory")
        });
    }
    let (w, h) = image::image_dimensions(&full).map_err(|e| ApiError {
        detail: Some("image_path".into()),
        ..ApiError::invalid(format!("cannot read image '{}': {e}", b.image_path))
    })?;
    let screenshot = Screenshot {
        image_path: b.image_path,
        image_size: [w, h],
        crop: b.crop,
        heatmap_overlay: b.heatmap_overlay,
    };
    commit(
        &s,
        b.base_version,
        Mutation::AddScreenshot {
            card_id: id,
            screenshot,
        },
    )
    .await
}

/// Binds, reports the bound address on stdout, and serves until Ctrl-C.
pub async fn serve(path: &Path, addr: SocketAddr) -> crate::error::Result<()> {
    let state = AppState::load(path)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(path, e))?;
    let local = listener.local_addr().map_err(|e| Error::io(path, e))?;
    {
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "listening on http://{local}");
        let _ = out.flush();
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(path, e))
}
