//! HTTP server for compositions and runs.
//!
//! Compositions and run records live in a file-backed [`store::Store`];
//! submitted runs go through a FIFO queue to a fixed pool of worker threads
//! (see [`executor::Executor`]). Identity is the `X-User` request header.
//!
//! Configuration comes from the environment: `WMT_ROOT` (store directory,
//! default `./wmt-store`), `WMT_PORT` (default 8642) and `WMT_WORKERS`
//! (default 2).

pub mod api;
pub mod executor;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use wmt_core::coupler::Catalog;

pub use api::{router, AppState};
pub use executor::Executor;
pub use store::{RunRecord, RunStatus, Store, StoreError};

pub const DEFAULT_PORT: u16 = 8642;
pub const DEFAULT_WORKERS: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("bad environment variable {name}={value:?}")]
    Env { name: &'static str, value: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub root: PathBuf,
    pub host: [u8; 4],
    pub port: u16,
    pub workers: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            root: PathBuf::from("wmt-store"),
            host: [127, 0, 0, 1],
            port: DEFAULT_PORT,
            workers: DEFAULT_WORKERS,
        }
    }
}

impl ServerConfig {
    pub fn from_env() -> Result<Self, ServerError> {
        Self::from_vars(|name| std::env::var(name).ok())
    }

    pub fn from_vars(var: impl Fn(&str) -> Option<String>) -> Result<Self, ServerError> {
        let mut config = ServerConfig::default();
        if let Some(root) = var("WMT_ROOT").filter(|s| !s.is_empty()) {
            config.root = PathBuf::from(root);
        }
        if let Some(port) = var("WMT_PORT") {
            config.port = port.trim().parse().map_err(|_| ServerError::Env {
                name: "WMT_PORT",
                value: port.clone(),
            })?;
        }
        if let Some(workers) = var("WMT_WORKERS") {
            config.workers = workers
                .trim()
                .parse()
                .ok()
                .filter(|&n: &usize| n >= 1)
                .ok_or_else(|| ServerError::Env {
                    name: "WMT_WORKERS",
                    value: workers.clone(),
                })?;
        }
        Ok(config)
    }
}

/// A bound, not yet serving, server.
pub struct Server {
    runtime: tokio::runtime::Runtime,
    listener: tokio::net::TcpListener,
    app: axum::Router,
    addr: SocketAddr,
}

impl Server {
    /// Opens the store, recovers the run queue, starts the workers and
    /// binds the listener. Port 0 picks a free port.
    pub fn bind(config: &ServerConfig) -> Result<Server, ServerError> {
        Self::bind_with(config, Catalog::builtin())
    }

    pub fn bind_with(config: &ServerConfig, catalog: Catalog) -> Result<Server, ServerError> {
        let store = Arc::new(Store::open(&config.root)?);
        let catalog = Arc::new(catalog);
        let executor = Executor::start(Arc::clone(&store), Arc::clone(&catalog), config.workers)?;
        let state = Arc::new(AppState {
            store,
            catalog,
            executor,
        });
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .map_err(|source| ServerError::Io {
                context: "starting runtime".to_string(),
                source,
            })?;
        let addr = SocketAddr::from((config.host, config.port));
        let listener = runtime
            .block_on(tokio::net::TcpListener::bind(addr))
            .map_err(|source| ServerError::Io {
                context: format!("binding {addr}"),
                source,
            })?;
        let addr = listener.local_addr().map_err(|source| ServerError::Io {
            context: "reading bound address".to_string(),
            source,
        })?;
        Ok(Server {
            runtime,
            listener,
            app: router(state),
            addr,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Serves until the process exits.
    pub fn run(self) -> Result<(), ServerError> {
        let Server {
            runtime,
            listener,
            app,
            ..
        } = self;
        runtime
            .block_on(async move { axum::serve(listener, app).await })
            .map_err(|source| ServerError::Io {
                context: "serving".to_string(),
                source,
            })
    }

    /// Serves on a background thread and returns the bound address.
    pub fn spawn(self) -> SocketAddr {
        let addr = self.addr;
        std::thread::spawn(move || self.run());
        addr
    }
}
