//! Beamformer weight design: secrecy-capacity maximization and transmit-power
//! minimization for one or many eavesdroppers, with perfect or imperfect
//! eavesdropper CSI.
//!
//! Single-eavesdropper designs solve a Rayleigh-quotient pencil; the
//! min-power problems run the fixed-power maximizer inside a rescaling
//! iteration whose power sequence is non-increasing. Multi-eavesdropper
//! designs null the signal at every eavesdropper and reduce to closed-form
//! least-squares solutions.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{
    is_hermitian, largest_generalized_eigpair, min_norm_solve, normalize_phase, CMatrix, CVector,
    NumericsError,
};
use crate::secrecy::{
    capacity_destination, capacity_eavesdropper, secrecy_capacity, BeamformerSolution,
    SecrecyError, Stage1Accounting,
};

/// Default stopping threshold for the min-power iteration, in watts.
pub const DEFAULT_POWER_THRESHOLD: f64 = 1e-9;
/// Default iteration cap; the iteration converges in a handful of steps.
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("destination channel is zero")]
    DegenerateChannel,
    #[error("secrecy target is unachievable at any transmit power")]
    TargetUnachievable,
    #[error("power iteration did not meet the threshold within the iteration cap")]
    MaxIterationsExceeded,
    #[error("nulling requires N >= J+1 nodes, got N={got} for J={j}")]
    InsufficientNodes { got: usize, j: usize },
    #[error("stacked channel matrix is rank deficient")]
    RankDeficient,
    #[error("error covariance must be Hermitian positive semidefinite")]
    InvalidCovariance,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Secrecy(#[from] SecrecyError),
}

/// Which of the two design problems to solve, with its fixed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaxSecrecyFixedPower,
    MinPowerFixedSecrecy,
}

/// Eavesdropper CSI assumption.
#[derive(Debug, Clone)]
pub enum CsiMode {
    Perfect,
    /// Channel estimates plus a known Hermitian PSD error covariance.
    Imperfect { r_delta: CMatrix },
}

#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub objective: Objective,
    /// P₀ in watts for fixed-power problems, C_s⁰ in bits/s/Hz for
    /// fixed-secrecy problems.
    pub budget: f64,
    pub csi: CsiMode,
    pub stage1: Stage1Accounting,
}

#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub k: usize,
    /// Transmit power P^(k) in watts.
    pub power: f64,
    /// Scale ρ^(k) applied to the fixed-power maximizer at this step.
    pub scale: f64,
}

#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
}

fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

fn quad_form(w: &CVector, m: &CMatrix) -> f64 {
    (w.adjoint() * m * w)[(0, 0)].re
}

/// Evaluate the weight vector against true channels.
pub fn evaluate_solution(
    w: &CVector,
    h: &CVector,
    g_cols: &[CVector],
    noise_power: f64,
    stage1: &Stage1Accounting,
) -> Result<BeamformerSolution, DesignError> {
    let h0 = if h.is_empty() { Complex64::default() } else { h[0] };
    let c_dest = capacity_destination(w, h, noise_power, stage1, h0)?;
    let mut c_eav = Vec::with_capacity(g_cols.len());
    for g in g_cols {
        c_eav.push(capacity_eavesdropper(w, g, noise_power, stage1, g[0])?);
    }
    let cs = secrecy_capacity(c_dest, &c_eav);
    Ok(BeamformerSolution {
        transmit_power: w.norm_squared(),
        w: w.clone(),
        c_dest,
        c_eav,
        secrecy_capacity: cs,
        objective_is_bound: false,
    })
}

/// Evaluate a weight vector under imperfect CSI: each eavesdropper term uses
/// the expected quadratic form `|wᴴĝ_j|² + wᴴR_Δw`, so the secrecy value is
/// the Jensen lower bound on the ergodic secrecy capacity.
pub fn evaluate_bound_solution(
    w: &CVector,
    h: &CVector,
    g_hat_cols: &[CVector],
    r_delta: &CMatrix,
    noise_power: f64,
    stage1: &Stage1Accounting,
) -> Result<BeamformerSolution, DesignError> {
    let h0 = if h.is_empty() { Complex64::default() } else { h[0] };
    let c_dest = capacity_destination(w, h, noise_power, stage1, h0)?;
    let delta_quad = quad_form(w, r_delta);
    let mut c_eav = Vec::with_capacity(g_hat_cols.len());
    for g in g_hat_cols {
        let mu = stage1.mrc_constant(g[0], noise_power);
        let expected = w.dotc(g).norm_sqr() + delta_quad;
        c_eav.push(0.5 * (mu + expected / noise_power).log2());
    }
    let cs = secrecy_capacity(c_dest, &c_eav);
    Ok(BeamformerSolution {
        transmit_power: w.norm_squared(),
        w: w.clone(),
        c_dest,
        c_eav,
        secrecy_capacity: cs,
        objective_is_bound: true,
    })
}

/// Unit-norm direction maximizing `(σ² + wᴴR_h w)/(σ² + wᴴR_g w)` at power
/// `p0`, via the pencil `((σ²/P₀)I + R_h, (σ²/P₀)I + R_g)`.
fn rayleigh_direction(
    r_h: &CMatrix,
    r_g: &CMatrix,
    noise_power: f64,
    p0: f64,
) -> Result<CVector, DesignError> {
    let n = r_h.nrows();
    let reg = CMatrix::identity(n, n).scale(noise_power / p0);
    let a = &reg + r_h;
    let b = &reg + r_g;
    let (_, x) = largest_generalized_eigpair(&a, &b)?;
    Ok(x)
}

/// Single-eavesdropper secrecy maximization at fixed power `p0` (the
/// Rayleigh-quotient design).
pub fn max_secrecy_single(
    h: &CVector,
    g: &CVector,
    noise_power: f64,
    p0: f64,
) -> Result<BeamformerSolution, DesignError> {
    max_secrecy_single_with_rg(h, &outer(g), noise_power, p0, g)
}

fn max_secrecy_single_with_rg(
    h: &CVector,
    r_g: &CMatrix,
    noise_power: f64,
    p0: f64,
    g_for_eval: &CVector,
) -> Result<BeamformerSolution, DesignError> {
    if h.norm() == 0.0 {
        return Err(DesignError::DegenerateChannel);
    }
    let x = rayleigh_direction(&outer(h), r_g, noise_power, p0)?;
    let w = x.scale(p0.sqrt());
    evaluate_solution(&w, h, std::slice::from_ref(&g_for_eval.clone()), noise_power, &Stage1Accounting::off())
}

/// Matched-filter design for the no-eavesdropper case at fixed power.
pub fn matched_filter_max(
    h: &CVector,
    noise_power: f64,
    p0: f64,
) -> Result<BeamformerSolution, DesignError> {
    if h.norm() == 0.0 {
        return Err(DesignError::DegenerateChannel);
    }
    let mut w = h.scale(p0.sqrt() / h.norm());
    normalize_phase(&mut w);
    evaluate_solution(&w, h, &[], noise_power, &Stage1Accounting::off())
}

/// Minimum power reaching destination capacity `target_cs` with no
/// eavesdroppers: a scaled matched filter.
pub fn matched_filter_min_power(
    h: &CVector,
    noise_power: f64,
    target_cs: f64,
) -> Result<BeamformerSolution, DesignError> {
    if h.norm() == 0.0 {
        return Err(DesignError::DegenerateChannel);
    }
    let gamma = 4f64.powf(target_cs);
    let rho2 = (gamma - 1.0) * noise_power / h.norm_squared();
    let mut w = h.scale(rho2.sqrt() / h.norm());
    normalize_phase(&mut w);
    evaluate_solution(&w, h, &[], noise_power, &Stage1Accounting::off())
}

/// Shared S0–S3 rescaling iteration for the min-power problems.
///
/// `maximize(p)` returns the unit-norm fixed-power maximizer direction at
/// power `p`; `quad_h`/`quad_g` evaluate the numerator and (worst-case)
/// denominator quadratic forms for a unit direction. The rescale step solves
/// `(σ² + ρ²a)/(σ² + ρ²b) = γ` in closed form: `ρ² = σ²(γ−1)/(a − γb)`,
/// valid only while `a > γb`.
fn min_power_iteration<M, QA, QB>(
    noise_power: f64,
    gamma: f64,
    threshold: f64,
    max_iter: usize,
    init_direction: CVector,
    maximize: M,
    quad_h: QA,
    quad_g: QB,
) -> Result<(CVector, IterationTrace), DesignError>
where
    M: Fn(f64) -> Result<CVector, DesignError>,
    QA: Fn(&CVector) -> f64,
    QB: Fn(&CVector) -> f64,
{
    let rescaled_power = |u: &CVector| -> Option<f64> {
        let a = quad_h(u);
        let b = quad_g(u);
        if a > gamma * b {
            Some((gamma - 1.0) * noise_power / (a - gamma * b))
        } else {
            None
        }
    };

    // S0: matched-filter start; if its secrecy falls short of the target,
    // fall back to fixed-power maximizer directions at growing powers.
    let mut p_prev = match rescaled_power(&init_direction) {
        Some(p) => p,
        None => {
            let mut found = None;
            for k in 0..=12 {
                let probe = noise_power * 10f64.powi(k);
                let u = maximize(probe)?;
                if let Some(p) = rescaled_power(&u) {
                    found = Some(p);
                    break;
                }
            }
            found.ok_or(DesignError::TargetUnachievable)?
        }
    };
    let mut records = vec![IterationRecord { k: 0, power: p_prev, scale: p_prev.sqrt() }];

    for k in 1..=max_iter {
        let u = maximize(p_prev)?;
        let p_raw = rescaled_power(&u).ok_or(DesignError::TargetUnachievable)?;
        // exact arithmetic guarantees p <= p_prev; clamp away roundoff jitter
        let p = p_raw.min(p_prev);
        records.push(IterationRecord { k, power: p, scale: (p / p_prev).sqrt() });
        if p_prev - p < threshold {
            let trace = IterationTrace { records, converged: true, iterations: k };
            return Ok((u.scale(p.sqrt()), trace));
        }
        p_prev = p;
    }
    Err(DesignError::MaxIterationsExceeded)
}

/// `true` when `h` and `g` are parallel within phase, so the secrecy quotient
/// is bounded by `‖h‖²/‖g‖²` at every power.
fn channels_proportional(h: &CVector, g: &CVector) -> bool {
    let hn = h.norm();
    let gn = g.norm();
    if gn == 0.0 {
        return false;
    }
    h.dotc(g).norm() >= (1.0 - 1e-12) * hn * gn
}

/// Single-eavesdropper transmit-power minimization at fixed secrecy capacity
/// `target_cs`, by iterating the fixed-power maximizer and rescaling.
pub fn min_power_single(
    h: &CVector,
    g: &CVector,
    noise_power: f64,
    target_cs: f64,
    threshold: f64,
    max_iter: usize,
) -> Result<(BeamformerSolution, IterationTrace), DesignError> {
    if h.norm() == 0.0 {
        return Err(DesignError::DegenerateChannel);
    }
    let gamma = 4f64.powf(target_cs);
    // With h ∝ g the quotient never exceeds ‖h‖²/‖g‖², no matter the power.
    if channels_proportional(h, g) && gamma >= h.norm_squared() / g.norm_squared() {
        return Err(DesignError::TargetUnachievable);
    }
    let r_h = outer(h);
    let r_g = outer(g);
    let init = h.scale(1.0 / h.norm());
    let (w, trace) = min_power_iteration(
        noise_power,
        gamma,
        threshold,
        max_iter,
        init,
        |p| rayleigh_direction(&r_h, &r_g, noise_power, p),
        |u| u.dotc(h).norm_sqr(),
        |u| u.dotc(g).norm_sqr(),
    )?;
    let solution = evaluate_solution(&w, h, std::slice::from_ref(&g.clone()), noise_power, &Stage1Accounting::off())?;
    Ok((solution, trace))
}

/// Stacked constraint matrix `G̃ = [h, g_1, …, g_J]ᴴ` of size `(J+1) × N`.
fn stacked_constraints(h: &CVector, g: &CMatrix) -> Result<CMatrix, DesignError> {
    let n = h.len();
    let j = g.ncols();
    if g.nrows() != n {
        return Err(DesignError::Numerics(NumericsError::DimensionMismatch(format!(
            "h length {n} vs G rows {}",
            g.nrows()
        ))));
    }
    if n < j + 1 {
        return Err(DesignError::InsufficientNodes { got: n, j });
    }
    let mut stack = CMatrix::zeros(j + 1, n);
    for i in 0..n {
        stack[(0, i)] = h[i].conj();
    }
    for col in 0..j {
        for i in 0..n {
            stack[(col + 1, i)] = g[(i, col)].conj();
        }
    }
    Ok(stack)
}

fn g_columns(g: &CMatrix) -> Vec<CVector> {
    (0..g.ncols()).map(|j| g.column(j).into_owned()).collect()
}

/// Multi-eavesdropper minimum power at fixed secrecy capacity, nulling the
/// signal at every eavesdropper. Uses the default phase `θ = 0`.
pub fn null_min_power_multi(
    h: &CVector,
    g: &CMatrix,
    noise_power: f64,
    target_cs: f64,
) -> Result<BeamformerSolution, DesignError> {
    null_min_power_multi_with_theta(h, g, noise_power, target_cs, 0.0)
}

/// As [`null_min_power_multi`] with an explicit destination phase `θ`;
/// the transmit power does not depend on `θ`.
pub fn null_min_power_multi_with_theta(
    h: &CVector,
    g: &CMatrix,
    noise_power: f64,
    target_cs: f64,
    theta: f64,
) -> Result<BeamformerSolution, DesignError> {
    let stack = stacked_constraints(h, g)?;
    let j = g.ncols();
    let mut rhs = CVector::zeros(j + 1);
    let amp = ((4f64.powf(target_cs) - 1.0) * noise_power).sqrt();
    rhs[0] = Complex64::from_polar(amp, theta);
    let w = min_norm_solve(&stack, &rhs).map_err(|e| match e {
        NumericsError::RankDeficient => DesignError::RankDeficient,
        other => DesignError::Numerics(other),
    })?;
    evaluate_solution(&w, h, &g_columns(g), noise_power, &Stage1Accounting::off())
}

/// Multi-eavesdropper secrecy maximization at fixed power under the nulling
/// constraint: the min-power direction scaled to spend the full budget.
pub fn null_max_secrecy_multi(
    h: &CVector,
    g: &CMatrix,
    noise_power: f64,
    p0: f64,
) -> Result<BeamformerSolution, DesignError> {
    let stack = stacked_constraints(h, g)?;
    let j = g.ncols();
    let mut e = CVector::zeros(j + 1);
    e[0] = Complex64::new(1.0, 0.0);
    let u = min_norm_solve(&stack, &e).map_err(|err| match err {
        NumericsError::RankDeficient => DesignError::RankDeficient,
        other => DesignError::Numerics(other),
    })?;
    // ‖u‖² = eᴴ(G̃G̃ᴴ)⁻¹e, so β·u = √P₀ · u/‖u‖
    let w = u.scale(p0.sqrt() / u.norm());
    evaluate_solution(&w, h, &g_columns(g), noise_power, &Stage1Accounting::off())
}

fn validate_covariance(r_delta: &CMatrix, n: usize) -> Result<(), DesignError> {
    if r_delta.shape() != (n, n) || !is_hermitian(r_delta) {
        return Err(DesignError::InvalidCovariance);
    }
    let eig = r_delta.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0f64, |m, v| m.max(v.abs()));
    if eig.eigenvalues.iter().any(|&v| v < -1e-10 * max.max(f64::MIN_POSITIVE)) {
        return Err(DesignError::InvalidCovariance);
    }
    Ok(())
}

/// Single-eavesdropper secrecy-bound maximization under imperfect CSI:
/// the fixed-power Rayleigh design with `R_g = ĝĝᴴ + R_Δ`.
pub fn imperfect_single_max(
    h: &CVector,
    g_hat: &CVector,
    r_delta: &CMatrix,
    noise_power: f64,
    p0: f64,
) -> Result<BeamformerSolution, DesignError> {
    validate_covariance(r_delta, h.len())?;
    let r_g = outer(g_hat) + r_delta;
    let exact = max_secrecy_single_with_rg(h, &r_g, noise_power, p0, g_hat)?;
    evaluate_bound_solution(
        &exact.w,
        h,
        std::slice::from_ref(&g_hat.clone()),
        r_delta,
        noise_power,
        &Stage1Accounting::off(),
    )
}

/// Multi-eavesdropper secrecy-bound maximization under imperfect CSI:
/// restrict to the null space of the estimated channels and solve the
/// reduced pencil `(Tᴴ[R_h + (σ²/P₀)I]T, Tᴴ[R_Δ + (σ²/P₀)I]T)`.
pub fn imperfect_multi_max(
    h: &CVector,
    g_hat: &CMatrix,
    r_delta: &CMatrix,
    noise_power: f64,
    p0: f64,
) -> Result<BeamformerSolution, DesignError> {
    let n = h.len();
    let j = g_hat.ncols();
    if n < j + 1 {
        return Err(DesignError::InsufficientNodes { got: n, j });
    }
    validate_covariance(r_delta, n)?;
    if h.norm() == 0.0 {
        return Err(DesignError::DegenerateChannel);
    }

    // Ĝ stacks the estimated channels as rows ĝ_jᴴ.
    let mut ghat_stack = CMatrix::zeros(j, n);
    for col in 0..j {
        for i in 0..n {
            ghat_stack[(col, i)] = g_hat[(i, col)].conj();
        }
    }
    let t = crate::numerics::null_space_basis(&ghat_stack)?;
    if n - t.ncols() != j {
        return Err(DesignError::RankDeficient);
    }

    let reg = CMatrix::identity(n, n).scale(noise_power / p0);
    let a = t.adjoint() * (outer(h) + &reg) * &t;
    let b = t.adjoint() * (r_delta + &reg) * &t;
    let (_, q) = largest_generalized_eigpair(&a, &b)?;
    let mut w = (&t * q).scale(p0.sqrt());
    normalize_phase(&mut w);
    evaluate_bound_solution(&w, h, &g_columns(g_hat), r_delta, noise_power, &Stage1Accounting::off())
}

/// Transmit-power minimization at a fixed Jensen-bound secrecy target under
/// imperfect CSI. Dispatches the inner fixed-power maximizer on the number of
/// estimated eavesdropper channels: the full-space Rayleigh design for one,
/// the null-space design for several.
pub fn imperfect_min_power(
    h: &CVector,
    g_hat: &CMatrix,
    r_delta: &CMatrix,
    noise_power: f64,
    target_bound: f64,
    threshold: f64,
    max_iter: usize,
) -> Result<(BeamformerSolution, IterationTrace), DesignError> {
    let n = h.len();
    let j = g_hat.ncols();
    if h.norm() == 0.0 {
        return Err(DesignError::DegenerateChannel);
    }
    validate_covariance(r_delta, n)?;
    let gamma = 4f64.powf(target_bound);
    let g_hat_cols = g_columns(g_hat);

    // Worst-case expected eavesdropper quadratic form for a unit direction.
    let quad_g = {
        let cols = g_hat_cols.clone();
        let rd = r_delta.clone();
        move |u: &CVector| {
            let delta = quad_form(u, &rd);
            cols.iter()
                .map(|g| u.dotc(g).norm_sqr() + delta)
                .fold(delta, f64::max)
        }
    };
    let quad_h = |u: &CVector| u.dotc(h).norm_sqr();

    // Feasibility: the quotient supremum as P → ∞ is the largest eigenvalue
    // of the pencil (R_h, R_g) on the working subspace; a singular R_g means
    // the supremum is unbounded and any target is reachable.
    let feasibility_pencil: Option<(CMatrix, CMatrix)> = if j == 1 {
        Some((outer(h), outer(&g_hat_cols[0]) + r_delta))
    } else {
        None // null-space case checked through the iteration itself
    };
    if let Some((num, den)) = feasibility_pencil {
        if let Ok((lambda_inf, _)) = largest_generalized_eigpair(&num, &den) {
            if gamma >= lambda_inf {
                return Err(DesignError::TargetUnachievable);
            }
        }
    }

    let maximize: Box<dyn Fn(f64) -> Result<CVector, DesignError>> = if j == 1 {
        let r_h = outer(h);
        let r_g = outer(&g_hat_cols[0]) + r_delta;
        Box::new(move |p| rayleigh_direction(&r_h, &r_g, noise_power, p))
    } else {
        let h = h.clone();
        let g_hat = g_hat.clone();
        let rd = r_delta.clone();
        Box::new(move |p| {
            let sol = imperfect_multi_max(&h, &g_hat, &rd, noise_power, p)?;
            Ok(sol.w.scale(1.0 / sol.w.norm()))
        })
    };

    let init = h.scale(1.0 / h.norm());
    let (w, trace) = min_power_iteration(
        noise_power,
        gamma,
        threshold,
        max_iter,
        init,
        maximize,
        quad_h,
        quad_g,
    )?;
    let solution =
        evaluate_bound_solution(&w, h, &g_hat_cols, r_delta, noise_power, &Stage1Accounting::off())?;
    Ok((solution, trace))
}
