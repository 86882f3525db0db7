//! `key=value` bound overrides, as accepted by `--bounds` and
//! `LPDIAG_BOUNDS`.

use lpdiag_core::Bounds;
use thiserror::Error;

pub const ENV_VAR: &str = "LPDIAG_BOUNDS";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("bad bound `{0}`: expected key=value")]
    Syntax(String),
    #[error("unknown bound `{0}` (expected max_depth, max_answers or max_steps)")]
    UnknownKey(String),
    #[error("bad value for {key}: `{value}`")]
    Value { key: String, value: String },
    #[error("bounds must be positive")]
    NotPositive,
}

/// Applies comma-separated overrides such as `max_depth=64,max_answers=1`.
pub fn apply(base: Bounds, text: &str) -> Result<Bounds, BoundsError> {
    let (mut depth, mut answers, mut steps) = (base.max_depth, base.max_answers, base.max_steps);
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| BoundsError::Syntax(item.to_string()))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || BoundsError::Value {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "max_depth" => depth = value.parse().map_err(|_| bad())?,
            "max_answers" => answers = value.parse().map_err(|_| bad())?,
            "max_steps" => steps = value.parse().map_err(|_| bad())?,
            _ => return Err(BoundsError::UnknownKey(key.to_string())),
        }
    }
    Bounds::new(depth, answers, steps).ok_or(BoundsError::NotPositive)
}

/// Defaults, then the environment variable, then each flag in order.
pub fn resolve(env: Option<&str>, flags: &[String]) -> Result<Bounds, BoundsError> {
    let mut b = Bounds::default();
    if let Some(e) = env {
        b = apply(b, e)?;
    }
    for f in flags {
        b = apply(b, f)?;
    }
    Ok(b)
}
