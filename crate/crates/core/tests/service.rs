//! Control service over real sockets: REST endpoints, the /ws push channel
//! and chat relay between two nodes on one in-process medium.

use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio_tungstenite::tungstenite::Message;

use silence::channel::medium::{InprocMedium, SampleSink, SampleSource};
use silence::channel::Scenario;
use silence::framing::FrameKind;
use silence::link::{Engine, EngineOptions, LinkConfig, Pacing, Role};
use silence::service::{serve, ServiceOptions};

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

fn fast() -> ServiceOptions {
    ServiceOptions { push_interval: Duration::from_millis(100), ..Default::default() }
}

async fn spawn_service(engine: Arc<Engine>, opts: ServiceOptions) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    tokio::spawn(serve(listener, engine, opts, std::future::pending()));
    addr
}

fn node(role: Role, medium: &InprocMedium, cfg: LinkConfig, pacing: Pacing) -> Arc<Engine> {
    let sink = role.transmits().then(|| Box::new(medium.clone()) as Box<dyn SampleSink>);
    let source = role.receives().then(|| Box::new(medium.subscribe()) as Box<dyn SampleSource>);
    let opts = EngineOptions { pacing, probe_interval: None, ..Default::default() };
    Arc::new(Engine::start_with(LinkConfig { role, ..cfg }, opts, sink, source).unwrap())
}

async fn ws(addr: &str) -> Ws {
    tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

/// Next message of the given type, skipping others.
async fn next_of(ws: &mut Ws, kind: &str) -> Value {
    let wait = async {
        loop {
            let m = ws.next().await.expect("socket open").unwrap();
            if let Message::Text(t) = m {
                let v: Value = serde_json::from_str(&t).unwrap();
                if v["type"] == kind {
                    return v;
                }
            }
        }
    };
    tokio::time::timeout(Duration::from_secs(10), wait).await.expect("message in time")
}

/// First stats push satisfying `pred`. Pushes buffered before the state
/// under test are skipped.
async fn push_where(ws: &mut Ws, pred: impl Fn(&Value) -> bool) -> Value {
    let wait = async {
        loop {
            let s = next_of(ws, "stats").await;
            if pred(&s) {
                return s;
            }
        }
    };
    tokio::time::timeout(Duration::from_secs(5), wait).await.expect("matching push in time")
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn rest_endpoints() {
    let medium = InprocMedium::new();
    let cfg = LinkConfig { mode_id: 4, sps: 2, ..Default::default() };
    let e = node(Role::Both, &medium, cfg, Pacing::Virtual);
    let addr = spawn_service(e.clone(), fast()).await;
    let http = reqwest::Client::new();
    let url = |p: &str| format!("http://{addr}{p}");

    let modes: Vec<Value> = http.get(url("/modes")).send().await.unwrap().json().await.unwrap();
    assert_eq!(modes.len(), 9);
    assert_eq!(modes[4]["nominal_rate_bps"], 100_000.0);
    assert_eq!(modes[8]["modulation"], "VPPM");
    assert_eq!(modes[5]["rll"], "4B6B");

    let cfg: Value = http.get(url("/config")).send().await.unwrap().json().await.unwrap();
    assert_eq!(cfg["mode_id"], 4);
    assert_eq!(cfg["role"], "both");
    assert_eq!(cfg["medium"], json!({"kind": "inproc"}));

    let stats: Value = http.get(url("/stats")).send().await.unwrap().json().await.unwrap();
    assert_eq!(stats["frames_tx"], 0);
    assert_eq!(stats["per"], Value::Null, "nothing sent yet");
    assert_eq!(stats["snr_db"], Value::Null, "noiseless channel");

    let r = http.patch(url("/config")).body("{not json").send().await.unwrap();
    assert_eq!(r.status(), 400);
    assert!(r.json::<Value>().await.unwrap()["error"].as_str().unwrap().contains("malformed"));

    for bad in [json!({"mode_id": 12}), json!({"sps": 3}), json!({"role": "tx"}), json!({"channel": {"distance_m": -1}}), json!({"warp": 1})] {
        let r = http.patch(url("/config")).json(&bad).send().await.unwrap();
        assert_eq!(r.status(), 422, "{bad}");
        assert!(r.json::<Value>().await.unwrap()["error"].is_string());
    }
    let after: Value = http.get(url("/config")).send().await.unwrap().json().await.unwrap();
    assert_eq!(after, cfg, "rejected patches leave the config intact");

    let r = http.patch(url("/config")).json(&json!({"mode_id": 2, "channel": {"distance_m": 3.0}})).send().await.unwrap();
    assert_eq!(r.status(), 200);
    let applied: Value = r.json().await.unwrap();
    assert_eq!((applied["mode_id"].clone(), applied["channel"]["distance_m"].clone()), (json!(2), json!(3.0)));
    assert_eq!(e.config().mode_id, 2);

    let missing = http.get(url("/nope")).send().await.unwrap();
    assert_eq!(missing.status(), 404);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn chat_relays_between_nodes() {
    let medium = InprocMedium::new();
    let cfg = LinkConfig { mode_id: 4, sps: 2, ..Default::default() };
    let rx = node(Role::Rx, &medium, cfg.clone(), Pacing::RealTime);
    let tx = node(Role::Tx, &medium, cfg, Pacing::RealTime);
    let rx_addr = spawn_service(rx.clone(), fast()).await;
    let tx_addr = spawn_service(tx.clone(), fast()).await;
    let mut rx_ws = ws(&rx_addr).await;
    let mut tx_ws = ws(&tx_addr).await;

    // stats are pushed without asking
    let s = next_of(&mut rx_ws, "stats").await;
    assert!(s["frames_tx"].is_u64() && s.get("saturated").is_some());

    tx_ws.send(Message::text(json!({"type": "chat", "text": "hola"}).to_string())).await.unwrap();
    assert_eq!(next_of(&mut tx_ws, "ack").await["seqs"], json!([0]));
    let got = next_of(&mut rx_ws, "chat").await;
    assert_eq!((got["seq"].clone(), got["text"].clone()), (json!(0), json!("hola")));

    tx_ws.send(Message::text(json!({"type": "chat", "text": "adeu"}).to_string())).await.unwrap();
    assert_eq!(next_of(&mut rx_ws, "chat").await["text"], "adeu");

    tx_ws.send(Message::text(r#"{"type":"shout"}"#)).await.unwrap();
    assert!(next_of(&mut tx_ws, "error").await["reason"].is_string());

    // a receive-only node cannot send
    rx_ws.send(Message::text(json!({"type": "chat", "text": "x"}).to_string())).await.unwrap();
    assert!(next_of(&mut rx_ws, "error").await["reason"].is_string());

    let s = tokio::task::spawn_blocking(move || rx.drain(Duration::from_secs(5)).unwrap()).await.unwrap();
    assert_eq!((s.frames_tx, s.frames_ok), (2, 2));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn distance_patch_degrades_pushed_per() {
    let sc = Scenario::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/text-8m")).unwrap();
    let medium = InprocMedium::new();
    let cfg = LinkConfig { channel: silence::channel::ChannelParams { distance_m: 1.5, ..sc.channel.clone() }, ..LinkConfig::from_scenario(&sc, "inproc".parse().unwrap(), Role::Both) };
    let e = node(Role::Both, &medium, cfg, Pacing::Virtual);
    let addr = spawn_service(e.clone(), fast()).await;
    let mut sock = ws(&addr).await;

    let burst = |e: Arc<Engine>| async move {
        tokio::task::spawn_blocking(move || {
            for i in 0..60u8 {
                e.tx_submit(FrameKind::Stream, &[i; 64]).unwrap();
            }
            e.drain(Duration::from_secs(30)).unwrap()
        })
        .await
        .unwrap()
    };
    let before = burst(e.clone()).await;
    assert_eq!(before.per, Some(0.0));
    let s = push_where(&mut sock, |s| s["frames_tx"] == 60 && !s["per_window"].is_null()).await;
    assert_eq!(s["per_window"], 0.0);

    let r = reqwest::Client::new().patch(format!("http://{addr}/config")).json(&json!({"channel": {"distance_m": 12.0}})).send().await.unwrap();
    assert_eq!(r.status(), 200);
    burst(e.clone()).await;
    let s = push_where(&mut sock, |s| s["frames_tx"] == 120 && s["per_window"].as_f64().is_some_and(|p| p >= 0.1)).await;
    assert!(s["per"].as_f64().unwrap() >= 0.05, "{s}");
}
