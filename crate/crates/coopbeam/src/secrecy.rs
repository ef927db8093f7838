//! Capacity and secrecy-capacity evaluation for a given weight vector,
//! optional Stage-1 MRC accounting, and the direct-transmission baseline.
//!
//! Cooperative rates carry the 1/2 prefactor of the two-stage protocol;
//! the direct baseline uses a single time slot and the full rate.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::CVector;

#[derive(Debug, Error)]
pub enum SecrecyError {
    #[error("dimension mismatch: weight length {0} vs channel length {1}")]
    DimensionMismatch(usize, usize),
    #[error("direct transmission cannot reach the secrecy target")]
    Infeasible,
}

/// Stage-1 broadcast accounting (MRC combining of both stages).
///
/// When enabled, the destination constant becomes `α = 1 + P̃₀|h₀|²/σ²` and
/// each eavesdropper constant `μ_j = 1 + P̃₀|g₀ⱼ|²/σ²`. Disabled, both are 1
/// and the Stage-1 signal is ignored.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Stage1Accounting {
    pub enabled: bool,
    /// Stage-1 transmit power P̃₀ in watts.
    pub stage1_power: f64,
}

impl Default for Stage1Accounting {
    fn default() -> Self {
        Stage1Accounting { enabled: false, stage1_power: 0.0 }
    }
}

impl Stage1Accounting {
    pub fn off() -> Self {
        Self::default()
    }

    /// MRC constant for a receiver whose Stage-1 channel from the source is `gain0`.
    pub fn mrc_constant(&self, gain0: Complex64, noise_power: f64) -> f64 {
        if self.enabled {
            1.0 + self.stage1_power * gain0.norm_sqr() / noise_power
        } else {
            1.0
        }
    }
}

/// A designed weight vector with its evaluated performance.
#[derive(Debug, Clone)]
pub struct BeamformerSolution {
    pub w: CVector,
    /// ‖w‖² in watts.
    pub transmit_power: f64,
    /// Destination capacity in bits/s/Hz.
    pub c_dest: f64,
    /// Per-eavesdropper capacities in bits/s/Hz.
    pub c_eav: Vec<f64>,
    /// max(0, c_dest − max_j c_eav[j]) in bits/s/Hz.
    pub secrecy_capacity: f64,
    /// Set when `secrecy_capacity` is a Jensen lower bound on the ergodic
    /// secrecy capacity rather than the exact value (imperfect CSI designs).
    pub objective_is_bound: bool,
}

/// Destination capacity `½·log₂(α + |wᴴh|²/σ²)`.
pub fn capacity_destination(
    w: &CVector,
    h: &CVector,
    noise_power: f64,
    stage1: &Stage1Accounting,
    h0: Complex64,
) -> Result<f64, SecrecyError> {
    if w.len() != h.len() {
        return Err(SecrecyError::DimensionMismatch(w.len(), h.len()));
    }
    let snr = w.dotc(h).norm_sqr() / noise_power;
    Ok(0.5 * (stage1.mrc_constant(h0, noise_power) + snr).log2())
}

/// Eavesdropper capacity; same form as the destination with `(g_j, μ_j)`.
pub fn capacity_eavesdropper(
    w: &CVector,
    g_j: &CVector,
    noise_power: f64,
    stage1: &Stage1Accounting,
    g0j: Complex64,
) -> Result<f64, SecrecyError> {
    capacity_destination(w, g_j, noise_power, stage1, g0j)
}

/// `max(0, c_dest − max_j c_eav_j)`; with no eavesdroppers, `c_dest` itself.
pub fn secrecy_capacity(c_dest: f64, c_eav: &[f64]) -> f64 {
    let worst = c_eav.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if worst.is_finite() {
        (c_dest - worst).max(0.0)
    } else {
        c_dest
    }
}

/// Secrecy capacity of direct (non-cooperative) transmission at power `power`.
/// Single time slot, so no 1/2 prefactor.
pub fn direct_secrecy(power: f64, h0: Complex64, g0: &[Complex64], noise_power: f64) -> f64 {
    let c_dest = (1.0 + power * h0.norm_sqr() / noise_power).log2();
    let c_eav = g0
        .iter()
        .map(|g| (1.0 + power * g.norm_sqr() / noise_power).log2())
        .fold(f64::NEG_INFINITY, f64::max);
    if c_eav.is_finite() {
        (c_dest - c_eav).max(0.0)
    } else {
        c_dest
    }
}

/// Smallest power at which direct transmission reaches `target_cs`.
///
/// Solving `log₂(1+Pa/σ²) − log₂(1+Pb/σ²) = C` for `P` with `a = |h₀|²` and
/// `b = max_j |g₀ⱼ|²` gives `P = (2^C − 1)σ² / (a − 2^C b)`, feasible only
/// when `a > 2^C b`.
pub fn direct_min_power(
    target_cs: f64,
    h0: Complex64,
    g0: &[Complex64],
    noise_power: f64,
) -> Result<f64, SecrecyError> {
    let gamma = 2f64.powf(target_cs);
    let a = h0.norm_sqr();
    let b = g0.iter().map(|g| g.norm_sqr()).fold(0.0, f64::max);
    if a <= gamma * b || a == 0.0 {
        return Err(SecrecyError::Infeasible);
    }
    Ok((gamma - 1.0) * noise_power / (a - gamma * b))
}

/// Both readings of the Stage-1 validity condition for the min-power duality.
///
/// The printed form of the condition is `μ·wᴴR_h w > α·wᴴR_g w`; the roles of
/// `α` and `μ` look swapped relative to the capacity definitions, so the
/// swapped ordering `α·wᴴR_h w > μ·wᴴR_g w` is reported alongside rather than
/// silently corrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stage1ValidityCheck {
    /// `μ·a > α·b` with `a = wᴴR_h w`, `b = wᴴR_g w`.
    pub printed_order: bool,
    /// `α·a > μ·b`.
    pub swapped_order: bool,
}

pub fn stage1_validity_check(
    quad_h: f64,
    quad_g: f64,
    alpha: f64,
    mu: f64,
) -> Stage1ValidityCheck {
    Stage1ValidityCheck {
        printed_order: mu * quad_h > alpha * quad_g,
        swapped_order: alpha * quad_h > mu * quad_g,
    }
}
