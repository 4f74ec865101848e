use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("joint {joint} out of range: {value:.6} not in [{min:.6}, {max:.6}]")]
    Range {
        joint: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("sample {index} out of calibrated range by {excess_deg:.3} deg")]
    PwmRange { index: usize, excess_deg: f64 },

    #[error("target unreachable: distance {distance:.6} m outside [{min:.6}, {max:.6}] m")]
    Unreachable { distance: f64, min: f64, max: f64 },

    #[error("support set is empty")]
    EmptyStance,

    #[error("servo angle {requested:.6} rad beyond actuation limit; achievable force {achievable_force:.6} N")]
    ActuationLimit {
        requested: f64,
        clamped: f64,
        achievable_force: f64,
    },

    #[error("model file: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
