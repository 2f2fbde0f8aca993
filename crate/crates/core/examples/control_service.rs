//! A node with the HTTP + WebSocket control service. Try:
//!
//!     cargo run --example control_service
//!     curl localhost:8080/modes
//!     curl -X PATCH localhost:8080/config -d '{"channel":{"distance_m":12}}'
//!     websocat ws://localhost:8080/ws
//!
//! Chat frames sent from /ws loop back through the simulated channel.

use std::sync::Arc;

use silence::link::{Engine, EngineOptions, LinkConfig, Role};
use silence::service::{serve, ServiceOptions};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bind = std::env::args().nth(1).unwrap_or_else(|| "127.0.0.1:8080".into());
    let mut cfg = LinkConfig { mode_id: 2, sps: 2, role: Role::Both, ..Default::default() };
    cfg.channel.distance_m = 1.5;
    cfg.channel.noise_std_a = 7e-8;
    let engine = Arc::new(Engine::start(cfg, EngineOptions::default())?);
    let listener = tokio::net::TcpListener::bind(&bind).await?;
    println!("control service on http://{}", listener.local_addr()?);
    serve(listener, engine, ServiceOptions::default(), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
