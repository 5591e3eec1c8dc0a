use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use cnlproof::provers::{default_provers, parse_config};
use cnlproof_service::{app, Config, DEFAULT_MAX_TEXT};

/// Serve the verifier over HTTP.
#[derive(Debug, Parser)]
#[command(name = "cnlproof-service", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "CNLPROOF_BIND", default_value = "127.0.0.1")]
    bind: std::net::IpAddr,
    #[arg(long, env = "CNLPROOF_PORT", default_value_t = 8080)]
    port: u16,
    /// Library directory.
    #[arg(long, env = "CNLPROOF_LIB", default_value = "lib")]
    lib: PathBuf,
    /// TOML file of `[[prover]]` tables.
    #[arg(long, env = "CNLPROOF_PROVERS")]
    config: Option<PathBuf>,
    /// Directory with the built front-end.
    #[arg(long = "static", env = "CNLPROOF_STATIC")]
    static_dir: Option<PathBuf>,
    /// Verifications running at once.
    #[arg(long, env = "CNLPROOF_MAX_CONCURRENT", default_value_t = 4)]
    max_concurrent: usize,
}

#[tokio::main]
async fn main() {
    let args = Args::parse();
    let provers = match &args.config {
        Some(path) => match std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| parse_config(&t).map_err(|e| e.to_string())) {
            Ok(p) if !p.is_empty() => p,
            Ok(_) => fail(&format!("{}: no provers configured", path.display())),
            Err(e) => fail(&format!("{}: {e}", path.display())),
        },
        None => default_provers(),
    };
    let config = Config { lib_dir: args.lib, provers, max_concurrent: args.max_concurrent, static_dir: args.static_dir, max_text: DEFAULT_MAX_TEXT };
    let addr = SocketAddr::new(args.bind, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await.unwrap_or_else(|e| fail(&format!("{addr}: {e}")));
    eprintln!("listening on http://{addr}");
    axum::serve(listener, app(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .unwrap_or_else(|e| fail(&e.to_string()));
}

fn fail(message: &str) -> ! {
    eprintln!("cnlproof-service: {message}");
    std::process::exit(2);
}
