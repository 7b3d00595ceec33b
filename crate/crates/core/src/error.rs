use thiserror::Error;

/// Errors surfaced by the simulation lab.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite {quantity} at t={t:.6} s (tick {tick})")]
    NonFinite { quantity: String, t: f64, tick: u64 },

    #[error("amplitude calibration did not converge after {steps} bisection steps (target {target} N, floor ~{floor:.2} N)")]
    Calibration { steps: u32, target: f64, floor: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("schema error: missing column {0}")]
    Schema(String),

    #[error("config hash mismatch: log {log_hash} vs config {config_hash} (pass --allow-hash-mismatch to override)")]
    HashMismatch { log_hash: String, config_hash: String },

    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SimError {
    pub fn domain(msg: impl Into<String>) -> Self {
        SimError::Domain(msg.into())
    }
}
