use thiserror::Error;

use crate::config::ConfigError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("occupation undefined: bose level energy {energy} is not above mu = {mu}")]
    BoseDomain { energy: f64, mu: f64 },

    #[error("cutoff {cutoff} holds {states} states, need at least {required} (raise cutoff to >= {min_cutoff})")]
    CutoffTooSmall {
        cutoff: f64,
        states: f64,
        required: f64,
        min_cutoff: f64,
    },

    #[error("adaptive cutoff did not meet tail tolerance {tail_tol} below energy {max_energy}")]
    CutoffExhausted { tail_tol: f64, max_energy: f64 },

    #[error("cannot bracket mu for N = {target} at T = {temperature}: reachable N in ({min_count}, {max_count})")]
    NotBracketable {
        target: f64,
        temperature: f64,
        min_count: f64,
        max_count: f64,
    },

    #[error("particle count residual {residual} exceeds tolerance {tolerance} at T = {temperature}")]
    Tolerance {
        residual: f64,
        tolerance: f64,
        temperature: f64,
    },

    #[error("{operation} is not available for trap {trap}")]
    UnsupportedTrap { operation: &'static str, trap: String },

    #[error("root finder: {0}")]
    Root(#[from] crate::roots::RootError),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
