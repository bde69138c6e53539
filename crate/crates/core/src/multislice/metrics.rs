use serde::{Deserialize, Serialize};

use crate::circuit::GateCensus;
use crate::error::{Error, Result};
use crate::field::RealField;

/// `sum|x - x_hat| / sum|x_hat|`, with `x_hat` the reference.
pub fn relative_error(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} values", x.len(), x_hat.len())));
    }
    let denom: f64 = x_hat.iter().map(|v| v.abs()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = x.iter().zip(x_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(num / denom)
}

pub fn field_relative_error(x: &RealField, x_hat: &RealField) -> Result<f64> {
    if x.size() != x_hat.size() {
        return Err(Error::ShapeMismatch(format!("{} vs {} grid", x.size(), x_hat.size())));
    }
    relative_error(x.values(), x_hat.values())
}

/// Empirical potential threshold `(128 / 2^n) * 1e-3` for `n` bits per axis.
pub fn tau_v_formula(n: u32) -> f64 {
    128.0 / 2f64.powi(n as i32) * 1e-3
}

/// Kinetic threshold that keeps every nonzero propagator term.
pub const TAU_P_KEEP_ALL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub engine: String,
    pub reference: String,
    pub epsilon: f64,
    pub tau_v: f64,
    pub tau_p: f64,
    pub s_v: Option<usize>,
    pub s_v_total: Option<usize>,
    pub s_p: Option<usize>,
    pub norm_drift: f64,
    pub census_untruncated: Option<GateCensus>,
    pub census_truncated: Option<GateCensus>,
}
