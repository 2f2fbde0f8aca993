//! HTTP and WebSocket control service for a running node. The schema is in
//! API.md at the repository root.

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;
use tower_http::services::ServeDir;

use crate::framing::FrameKind;
use crate::link::{Delivered, Engine};
use crate::phy_modes::mode_table;
use crate::stats::LinkStats;

pub const STATS_PUSH_INTERVAL: Duration = Duration::from_millis(500);

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    /// Directory of static console assets served at `/`.
    pub static_dir: Option<PathBuf>,
    pub push_interval: Duration,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions { static_dir: None, push_interval: STATS_PUSH_INTERVAL }
    }
}

/// Messages the service pushes on `/ws`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WsOut {
    Stats(LinkStats),
    Chat { seq: u16, text: String },
    Ack { seqs: Vec<u16> },
    Error { reason: String },
}

/// Messages a client may send on `/ws`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WsIn {
    Chat { text: String },
}

struct AppState {
    engine: Arc<Engine>,
    delivered: broadcast::Sender<Delivered>,
    push_interval: Duration,
}

fn error(status: StatusCode, reason: impl ToString) -> Response {
    (status, Json(serde_json::json!({ "error": reason.to_string() }))).into_response()
}

pub fn router(engine: Arc<Engine>, options: ServiceOptions) -> Router {
    let (delivered, _) = broadcast::channel(1024);
    let feed = engine.subscribe();
    let fwd = delivered.clone();
    // ends when the engine drops its subscribers
    std::thread::spawn(move || {
        while let Ok(d) = feed.recv() {
            let _ = fwd.send(d);
        }
    });
    let state = Arc::new(AppState { engine, delivered, push_interval: options.push_interval });
    let app = Router::new()
        .route("/config", get(get_config).patch(patch_config))
        .route("/modes", get(get_modes))
        .route("/stats", get(get_stats))
        .route("/ws", get(ws_upgrade))
        .with_state(state);
    match options.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    engine: Arc<Engine>,
    options: ServiceOptions,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(engine, options)).with_graceful_shutdown(shutdown).await
}

async fn get_config(State(s): State<Arc<AppState>>) -> Response {
    Json(s.engine.config()).into_response()
}

async fn patch_config(State(s): State<Arc<AppState>>, body: Bytes) -> Response {
    let patch: serde_json::Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed JSON: {e}")),
    };
    match s.engine.reconfigure(patch) {
        Ok(c) => Json(c).into_response(),
        Err(e) => error(StatusCode::UNPROCESSABLE_ENTITY, e),
    }
}

async fn get_modes() -> Response {
    Json(mode_table()).into_response()
}

async fn get_stats(State(s): State<Arc<AppState>>) -> Response {
    match s.engine.stats_snapshot() {
        Ok(st) => Json(st).into_response(),
        Err(e) => error(StatusCode::SERVICE_UNAVAILABLE, e),
    }
}

async fn ws_upgrade(State(s): State<Arc<AppState>>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| ws_session(s, socket))
}

fn text(msg: &WsOut) -> Message {
    Message::Text(serde_json::to_string(msg).expect("serializable").into())
}

async fn ws_session(s: Arc<AppState>, socket: WebSocket) {
    let (mut sink, mut stream) = socket.split();
    let mut delivered = s.delivered.subscribe();
    let mut tick = tokio::time::interval(s.push_interval);
    loop {
        let out = tokio::select! {
            _ = tick.tick() => match s.engine.stats_snapshot() {
                Ok(st) => WsOut::Stats(st),
                Err(_) => break,
            },
            d = delivered.recv() => match d {
                Ok(d) if d.kind == FrameKind::Chat => {
                    WsOut::Chat { seq: d.seq, text: String::from_utf8_lossy(&d.payload).into_owned() }
                }
                Ok(_) | Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => break,
            },
            m = stream.next() => match m {
                Some(Ok(Message::Text(t))) => match serde_json::from_str::<WsIn>(&t) {
                    Ok(WsIn::Chat { text }) => match s.engine.tx_submit(FrameKind::Chat, text.as_bytes()) {
                        Ok(seqs) => WsOut::Ack { seqs },
                        Err(e) => WsOut::Error { reason: e.to_string() },
                    },
                    Err(e) => WsOut::Error { reason: format!("unrecognized message: {e}") },
                },
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => continue,
            },
        };
        if sink.send(text(&out)).await.is_err() {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ws_message_shapes() {
        let m = serde_json::to_value(WsOut::Chat { seq: 3, text: "hola".into() }).unwrap();
        assert_eq!(m, serde_json::json!({"type": "chat", "seq": 3, "text": "hola"}));
        let m = serde_json::to_value(WsOut::Ack { seqs: vec![1] }).unwrap();
        assert_eq!(m["type"], "ack");
        let i: WsIn = serde_json::from_str(r#"{"type":"chat","text":"hi"}"#).unwrap();
        assert_eq!(i, WsIn::Chat { text: "hi".into() });
        assert!(serde_json::from_str::<WsIn>(r#"{"type":"shout"}"#).is_err());
    }
}
