//! Command-line front end. `main` only forwards to [`run`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, Read, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use futures_util::{SinkExt, StreamExt};

use crate::channel::medium::MediumSpec;
use crate::channel::{ChannelError, Scenario};
use crate::framing::{FrameKind, MAX_PAYLOAD};
use crate::link::sim::{run_per_scan, write_scan_csv};
use crate::link::{Engine, EngineOptions, LinkConfig, LinkError, Role};
use crate::phy_modes::{render_csv, render_table};
use crate::service::{serve, ServiceOptions};
use crate::stats::LinkStats;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_SCENARIO_MISSING: i32 = 4;
pub const EXIT_TRANSPORT: i32 = 5;

const AFTER_HELP: &str = "\
Exit codes:
  0  success
  1  runtime failure
  2  usage error (unknown flag, bad value)
  3  invalid configuration (mode, sps, channel parameters)
  4  scenario file not found
  5  transport or bind failure

Scenarios named without a path are looked up in $SILENCE_SCENARIO_DIR, then ./scenarios.";

#[derive(Debug, Parser)]
#[command(name = "silence", version, about = "Visible-light link simulator: PHY-I TX/RX over a simulated optical channel", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the PHY mode table.
    Modes {
        #[arg(long)]
        csv: bool,
    },
    /// Run a transmitting node. Each stdin line is sent as a chat frame.
    Tx(NodeArgs),
    /// Run a receiving node. Chat frames are printed to stdout.
    Rx {
        #[command(flatten)]
        node: NodeArgs,
        /// Append received STREAM payloads to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interactive chat against a node's control service.
    Chat {
        /// Control service address, e.g. 127.0.0.1:8080 or ws://host:port/ws.
        #[arg(long)]
        node: String,
    },
    /// Stream a file as paced STREAM frames, then exit.
    Stream {
        #[arg(long = "in")]
        input: PathBuf,
        /// Target payload rate in bit/s.
        #[arg(long)]
        rate: f64,
        #[command(flatten)]
        node: NodeArgs,
    },
    /// Sweep PER and goodput over distance and write CSV.
    Perscan {
        #[arg(long)]
        mode: u8,
        /// Comma-separated distances in metres.
        #[arg(long, value_delimiter = ',', required = true)]
        distances: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        frames: usize,
        #[arg(long, default_value_t = 64)]
        payload: usize,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        sps: Option<usize>,
    },
    /// Run a node with the control service and static console assets.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Node role: tx, rx or both.
        #[arg(long, default_value = "both")]
        role: String,
        /// Static console directory served at /.
        #[arg(long)]
        ui: Option<PathBuf>,
        #[command(flatten)]
        node: NodeArgs,
    },
}

#[derive(Debug, Args, Clone, Default)]
struct NodeArgs {
    /// Scenario file or name.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    mode: Option<u8>,
    #[arg(long)]
    sps: Option<usize>,
    #[arg(long)]
    distance: Option<f64>,
    /// inproc, udp:HOST:PORT[,HOST:PORT...] or file:PATH.
    #[arg(long, default_value = "inproc")]
    medium: String,
    /// Append a stats row every second to this CSV file.
    #[arg(long)]
    stats_log: Option<PathBuf>,
    /// Also run the control service on this address.
    #[arg(long)]
    serve: Option<String>,
    /// Stop after this many seconds.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    ScenarioMissing(String),
    #[error("{0}")]
    Transport(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::ScenarioMissing(_) => EXIT_SCENARIO_MISSING,
            CliError::Transport(_) => EXIT_TRANSPORT,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<LinkError> for CliError {
    fn from(e: LinkError) -> Self {
        match e {
            LinkError::Channel(ChannelError::Transport(_)) => CliError::Transport(e.to_string()),
            LinkError::Stopped => CliError::Runtime(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        LinkError::from(e).into()
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("silence: {e}");
            e.code()
        }
    }
}

/// Resolves a scenario argument: an existing path, else a name under
/// `$SILENCE_SCENARIO_DIR`, else under `./scenarios`.
pub fn find_scenario(arg: &str) -> Option<PathBuf> {
    let direct = PathBuf::from(arg);
    if direct.is_file() {
        return Some(direct);
    }
    let mut dirs = Vec::new();
    if let Some(d) = std::env::var_os("SILENCE_SCENARIO_DIR") {
        dirs.push(PathBuf::from(d));
    }
    dirs.push(PathBuf::from("scenarios"));
    dirs.into_iter().map(|d| d.join(arg)).find(|p| p.is_file())
}

fn load_scenario(arg: Option<&str>) -> Result<Scenario, CliError> {
    match arg {
        None => Ok(Scenario::default()),
        Some(a) => {
            let path = find_scenario(a).ok_or_else(|| CliError::ScenarioMissing(format!("scenario {a:?} not found")))?;
            Scenario::load(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }
}

fn node_config(node: &NodeArgs, role: Role) -> Result<LinkConfig, CliError> {
    let mut s = load_scenario(node.scenario.as_deref())?;
    if let Some(m) = node.mode {
        s.mode_id = m;
    }
    if let Some(sps) = node.sps {
        s.sps = sps;
    }
    if let Some(d) = node.distance {
        s.channel.distance_m = d;
    }
    let medium: MediumSpec = node.medium.parse()?;
    let c = LinkConfig::from_scenario(&s, medium, role);
    c.validate()?;
    Ok(c)
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Modes { csv } => {
            print!("{}", if csv { render_csv() } else { render_table() });
            Ok(())
        }
        Command::Perscan { mode, distances, frames, payload, out, scenario, sps } => {
            let mut s = load_scenario(scenario.as_deref())?;
            if let Some(v) = sps {
                s.sps = v;
            }
            s.mode_id = mode;
            s.validate()?;
            let rows = run_per_scan(&s, mode, &distances, frames, payload)?;
            match out {
                Some(p) => write_scan_csv(&rows, File::create(p).map_err(io_err)?).map_err(io_err),
                None => write_scan_csv(&rows, std::io::stdout().lock()).map_err(io_err),
            }
        }
        Command::Tx(node) => {
            let cfg = node_config(&node, Role::Tx)?;
            run_node(cfg, &node, None, |engine| {
                // reads until EOF; the node then keeps probing until stopped
                for line in std::io::stdin().lock().lines() {
                    let Ok(line) = line else { break };
                    if let Err(e) = submit_retrying(engine, FrameKind::Chat, line.as_bytes()) {
                        eprintln!("silence: {e}");
                    }
                }
                false
            })
        }
        Command::Rx { node, out } => {
            let cfg = node_config(&node, Role::Rx)?;
            let mut sink = out.map(|p| File::create(p).map_err(io_err)).transpose()?;
            run_node(cfg, &node, None, move |engine| {
                let feed = engine.subscribe_with_backlog();
                let stdout = std::io::stdout();
                while let Ok(d) = feed.recv() {
                    match d.kind {
                        FrameKind::Chat => {
                            let _ = writeln!(stdout.lock(), "[{}] {}", d.seq, String::from_utf8_lossy(&d.payload));
                        }
                        FrameKind::Stream => {
                            if let Some(f) = sink.as_mut() {
                                let _ = f.write_all(&d.payload);
                            }
                        }
                        FrameKind::Probe => {}
                    }
                }
                false
            })
        }
        Command::Stream { input, rate, node } => {
            if rate.is_nan() || rate <= 0.0 {
                return Err(CliError::Config("--rate must be > 0".into()));
            }
            let cfg = node_config(&node, Role::Tx)?;
            let mut file = File::open(&input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
            run_node(cfg, &node, None, move |engine| {
                let start = Instant::now();
                let mut sent_bits = 0f64;
                let mut buf = vec![0u8; MAX_PAYLOAD];
                loop {
                    let n = read_full(&mut file, &mut buf);
                    if n == 0 {
                        break;
                    }
                    let due = Duration::from_secs_f64(sent_bits / rate);
                    if let Some(wait) = due.checked_sub(start.elapsed()) {
                        std::thread::sleep(wait);
                    }
                    if let Err(e) = submit_retrying(engine, FrameKind::Stream, &buf[..n]) {
                        eprintln!("silence: {e}");
                        break;
                    }
                    sent_bits += 8.0 * n as f64;
                }
                true
            })
        }
        Command::Serve { bind, role, ui, node } => {
            let role: Role = role.parse()?;
            let cfg = node_config(&node, role)?;
            run_node(cfg, &node, Some((bind, ui)), |_| false)
        }
        Command::Chat { node } => run_chat(&node),
    }
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> usize {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) | Err(_) => break,
            Ok(n) => got += n,
        }
    }
    got
}

/// Submits, waiting out backpressure.
fn submit_retrying(engine: &Engine, kind: FrameKind, payload: &[u8]) -> Result<Vec<u16>, LinkError> {
    loop {
        match engine.tx_submit(kind, payload) {
            Err(LinkError::Backpressure(_)) => std::thread::sleep(Duration::from_millis(20)),
            other => return other,
        }
    }
}

fn stats_line(s: &LinkStats) -> String {
    serde_json::to_string(s).unwrap_or_default()
}

/// Starts an engine (plus the control service when asked), runs `body` on a
/// blocking thread and waits for Ctrl-C, `--duration`, or `body` returning
/// true.
fn run_node(
    cfg: LinkConfig,
    node: &NodeArgs,
    service: Option<(String, Option<PathBuf>)>,
    body: impl FnOnce(&Engine) -> bool + Send + 'static,
) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(io_err)?;
    let stats_log = node.stats_log.clone();
    let duration = node.duration;
    let bind = service.or_else(|| node.serve.clone().map(|b| (b, None)));
    rt.block_on(async move {
        let engine = Arc::new(Engine::start(cfg, EngineOptions::default())?);
        let (stop_tx, stop_rx) = tokio::sync::watch::channel(false);

        if let Some((addr, ui)) = bind {
            let listener = tokio::net::TcpListener::bind(&addr)
                .await
                .map_err(|e| CliError::Transport(format!("cannot bind {addr}: {e}")))?;
            log::info!("control service on {}", listener.local_addr().map_err(io_err)?);
            let mut rx = stop_rx.clone();
            let opts = ServiceOptions { static_dir: ui, ..Default::default() };
            tokio::spawn(serve(listener, engine.clone(), opts, async move {
                let _ = rx.wait_for(|s| *s).await;
            }));
        }

        if let Some(path) = stats_log {
            let mut f = std::fs::OpenOptions::new().create(true).append(true).open(&path).map_err(io_err)?;
            if f.metadata().map(|m| m.len() == 0).unwrap_or(false) {
                writeln!(f, "{}", LinkStats::CSV_HEADER).map_err(io_err)?;
            }
            let e = engine.clone();
            let mut rx = stop_rx.clone();
            tokio::spawn(async move {
                let mut tick = tokio::time::interval(Duration::from_secs(1));
                loop {
                    tokio::select! {
                        _ = tick.tick() => {}
                        _ = rx.wait_for(|s| *s) => break,
                    }
                    if let Ok(s) = e.stats_snapshot() {
                        let _ = writeln!(f, "{}", s.csv_row(e.now_s()));
                    }
                }
            });
        }

        let deadline = duration.map(|d| tokio::time::Instant::now() + Duration::from_secs_f64(d.max(0.0)));
        let limit = || async move {
            match deadline {
                Some(t) => tokio::time::sleep_until(t).await,
                None => std::future::pending().await,
            }
        };
        let e = engine.clone();
        let mut work = tokio::task::spawn_blocking(move || body(&e));
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = limit() => {}
            done = &mut work => {
                if matches!(done, Ok(false)) {
                    // body finished its input; keep serving until stopped
                    tokio::select! {
                        _ = tokio::signal::ctrl_c() => {}
                        _ = limit() => {}
                    }
                }
            }
        }
        let e = engine.clone();
        let stats = tokio::task::spawn_blocking(move || e.drain(Duration::from_secs(5))).await.map_err(|e| CliError::Runtime(e.to_string()))??;
        let _ = stop_tx.send(true);
        eprintln!("{}", stats_line(&stats));
        engine.shutdown();
        Ok(())
    })
}

fn ws_url(node: &str) -> String {
    if node.starts_with("ws://") || node.starts_with("wss://") {
        node.to_string()
    } else {
        format!("ws://{}/ws", node.trim_end_matches('/'))
    }
}

fn run_chat(node: &str) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(io_err)?;
    let url = ws_url(node);
    rt.block_on(async move {
        let (ws, _) = tokio_tungstenite::connect_async(url.as_str())
            .await
            .map_err(|e| CliError::Transport(format!("cannot reach {url}: {e}")))?;
        let (mut sink, mut stream) = ws.split();
        let reader = tokio::spawn(async move {
            while let Some(Ok(msg)) = stream.next().await {
                let Ok(t) = msg.into_text() else { continue };
                let Ok(v) = serde_json::from_str::<serde_json::Value>(&t) else { continue };
                match v["type"].as_str() {
                    Some("chat") => println!("< [{}] {}", v["seq"], v["text"].as_str().unwrap_or("")),
                    Some("error") => eprintln!("! {}", v["reason"].as_str().unwrap_or("")),
                    _ => {}
                }
            }
        });
        let (line_tx, mut line_rx) = tokio::sync::mpsc::channel::<String>(16);
        std::thread::spawn(move || {
            for line in std::io::stdin().lock().lines() {
                let Ok(line) = line else { break };
                if line_tx.blocking_send(line).is_err() {
                    break;
                }
            }
        });
        while let Some(line) = line_rx.recv().await {
            if line.is_empty() {
                continue;
            }
            let msg = serde_json::json!({"type": "chat", "text": line}).to_string();
            sink.send(tokio_tungstenite::tungstenite::Message::text(msg))
                .await
                .map_err(|e| CliError::Transport(e.to_string()))?;
        }
        let _ = sink.close().await;
        reader.abort();
        Ok(())
    })
}
