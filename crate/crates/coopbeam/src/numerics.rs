//! Dense complex linear algebra used by the beamformer solvers: Hermitian
//! generalized eigenpairs, minimum-norm least squares and SVD-grade null
//! spaces.
//!
//! All routines operate on `nalgebra` dynamic matrices over `Complex<f64>`
//! and are pure functions of their inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance below which a singular value counts as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Relative tolerance for the Hermitian-symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian within tolerance")]
    NotHermitian,
    #[error("matrix is not positive definite (Cholesky failed)")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is rank deficient")]
    RankDeficient,
}

/// Largest entry magnitude, used as the scale for relative tolerances.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `true` when `m` equals its conjugate transpose within `HERMITIAN_TOL`
/// relative to the largest entry.
pub fn is_hermitian(m: &CMatrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let n = m.nrows();
    for i in 0..n {
        for k in i..n {
            if (m[(i, k)] - m[(k, i)].conj()).norm() > HERMITIAN_TOL * scale {
                return false;
            }
        }
    }
    true
}

/// Rotate `v` so its first entry of non-negligible magnitude is real and
/// non-negative. Makes eigenvectors and null-space columns deterministic.
pub fn normalize_phase(v: &mut CVector) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    for i in 0..v.len() {
        let z = v[i];
        if z.norm() > 1e-12 * scale {
            let phase = z / z.norm();
            let rot = phase.conj();
            for k in 0..v.len() {
                v[k] *= rot;
            }
            return;
        }
    }
}

/// Largest eigenpair of the Hermitian-definite pencil `A x = λ B x`.
///
/// Both matrices must be Hermitian and `B` positive definite. The pencil is
/// reduced to a standard Hermitian problem through the Cholesky factor of
/// `B`: with `B = L Lᴴ`, the eigenvalues of `L⁻¹ A L⁻ᴴ` are those of the
/// pencil and the eigenvectors map back through `L⁻ᴴ`.
///
/// Returns the largest eigenvalue (real) and a unit-norm, phase-normalized
/// eigenvector.
pub fn largest_generalized_eigpair(
    a: &CMatrix,
    b: &CMatrix,
) -> Result<(f64, CVector), NumericsError> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(NumericsError::DimensionMismatch(format!(
            "pencil shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if !is_hermitian(a) || !is_hermitian(b) {
        return Err(NumericsError::NotHermitian);
    }
    let chol = nalgebra::Cholesky::new(b.clone()).ok_or(NumericsError::NotPositiveDefinite)?;
    let l = chol.l();
    // nalgebra's complex Cholesky tolerates negative pivots via complex sqrt;
    // a genuine factor of a positive definite matrix has a real positive diagonal.
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0 && d.im.abs() <= 1e-12 * d.re) {
            return Err(NumericsError::NotPositiveDefinite);
        }
    }

    // C = L⁻¹ A L⁻ᴴ, re-symmetrized to absorb roundoff.
    let y = l
        .solve_lower_triangular(a)
        .ok_or(NumericsError::NotPositiveDefinite)?;
    let z = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or(NumericsError::NotPositiveDefinite)?;
    let mut c = z.adjoint();
    let ch = c.adjoint();
    c = (c + ch).scale(0.5);

    let eig = c.symmetric_eigen();
    let (idx, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (i, &v)| {
            if v > acc.1 {
                (i, v)
            } else {
                acc
            }
        });
    let y_vec: CVector = eig.eigenvectors.column(idx).into_owned();
    let mut x = l
        .adjoint()
        .solve_upper_triangular(&y_vec)
        .ok_or(NumericsError::NotPositiveDefinite)?;
    let norm = x.norm();
    if norm == 0.0 {
        return Err(NumericsError::RankDeficient);
    }
    x /= Complex64::new(norm, 0.0);
    normalize_phase(&mut x);
    Ok((lambda, x))
}

/// Singular values of `m` (unsorted).
fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Minimum-norm solution of the underdetermined system `M w = b`
/// (`m ≤ n`, full row rank), computed as `Mᴴ (M Mᴴ)⁻¹ b`.
pub fn min_norm_solve(m: &CMatrix, b: &CVector) -> Result<CVector, NumericsError> {
    let (rows, cols) = m.shape();
    if rows > cols {
        return Err(NumericsError::DimensionMismatch(format!(
            "expected a wide matrix, got {rows}x{cols}"
        )));
    }
    if b.len() != rows {
        return Err(NumericsError::DimensionMismatch(format!(
            "rhs length {} for {rows}x{cols} matrix",
            b.len()
        )));
    }
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin <= RANK_TOL * smax {
        return Err(NumericsError::RankDeficient);
    }
    // M Mᴴ is Hermitian positive definite at full row rank.
    let gram = m * m.adjoint();
    let chol = nalgebra::Cholesky::new(gram).ok_or(NumericsError::RankDeficient)?;
    let y = chol.solve(b);
    Ok(m.adjoint() * y)
}

/// Orthonormal basis of the null space of `m`, returned as the columns of an
/// `n × k` matrix with `k = n − rank(m)`.
///
/// Rank is decided from the singular values of `m` at `RANK_TOL` relative to
/// the largest. The basis itself comes from completing an orthonormal basis
/// of the row space (column-pivoted QR of `Mᴴ`) to a full unitary one, which
/// keeps the `M T ≈ 0` residual at machine level.
pub fn null_space_basis(m: &CMatrix) -> Result<CMatrix, NumericsError> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(CMatrix::identity(cols, cols));
    }
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
    };
    let k = cols - rank;
    if k == 0 {
        return Ok(CMatrix::zeros(cols, 0));
    }
    if rank == 0 {
        return Ok(CMatrix::identity(cols, cols));
    }

    // Row-space basis: leading `rank` columns of Q from pivoted QR of Mᴴ.
    let qr = m.adjoint().col_piv_qr();
    let q_thin = qr.q();
    let q_range = q_thin.columns(0, rank).into_owned();

    // Complete [Q_r | I] to a unitary basis; the trailing columns span null(M).
    let mut ext = CMatrix::zeros(cols, rank + cols);
    ext.columns_mut(0, rank).copy_from(&q_range);
    for i in 0..cols {
        ext[(i, rank + i)] = Complex64::new(1.0, 0.0);
    }
    let full_q = ext.qr().q();
    let mut basis = full_q.columns(rank, k).into_owned();
    for c in 0..k {
        let mut col: CVector = basis.column(c).into_owned();
        normalize_phase(&mut col);
        basis.set_column(c, &col);
    }
    Ok(basis)
}
