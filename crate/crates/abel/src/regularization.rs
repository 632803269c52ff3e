//! Zeroth-order Tikhonov regularization with discrepancy-principle
//! parameter selection.
//!
//! For the triangular system `A·k = f` (with `f = q/2`), the regularized
//! solution is `k_α = (αI + AᵀA)⁻¹ Aᵀ f`, computed by a Cholesky
//! factorization of the symmetric positive definite normal matrix. The
//! data residual `‖A k_α − f‖₂` grows monotonically with `α`, so the
//! discrepancy equation `‖A k_α − f‖ = δ` is solved by bisection on
//! `log₁₀ α`.

use nalgebra::{DMatrix, DVector};

use crate::{AbelError, Result};

/// Settings for the discrepancy search.
///
/// `alpha_override`, when set, bypasses the search entirely — pipelines use
/// it to run a fixed regularization strength.
#[derive(Debug, Clone)]
pub struct RegularizationConfig {
    /// The discrepancy level δ the residual should match.
    pub delta: f64,
    /// Lower end of the bracket searched on a log scale.
    pub alpha_min: f64,
    /// Upper end of the bracket.
    pub alpha_max: f64,
    /// Relative residual-matching tolerance, in (0, 1).
    pub rel_tol: f64,
    /// Fixed α that skips the search when present.
    pub alpha_override: Option<f64>,
}

impl RegularizationConfig {
    /// Defaults with the given discrepancy level.
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            ..Self::default()
        }
    }

    /// A configuration that always uses the fixed `alpha`.
    pub fn fixed_alpha(alpha: f64) -> Self {
        Self {
            alpha_override: Some(alpha),
            ..Self::default()
        }
    }
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        Self {
            delta: 0.0,
            alpha_min: 1e-12,
            alpha_max: 1e4,
            rel_tol: 1e-3,
            alpha_override: None,
        }
    }
}

/// How [`choose_alpha`] terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaStatus {
    /// Residual matched δ within the tolerance.
    Converged,
    /// δ below the residual floor at `alpha_min`; that bracket end returned.
    DeltaUnreachableLow,
    /// δ above the residual ceiling at `alpha_max`; that bracket end returned.
    DeltaUnreachableHigh,
    /// Iteration cap hit before the tolerance (should not occur for a
    /// monotone residual).
    MaxIterations,
}

/// Result of a discrepancy search.
#[derive(Debug, Clone, Copy)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub status: AlphaStatus,
    /// Residual at the returned α.
    pub residual: f64,
    pub iterations: usize,
}

/// Solve `(αI + AᵀA) k = Aᵀ f` by Cholesky factorization.
pub fn tikhonov_solve(a: &DMatrix<f64>, f: &DVector<f64>, alpha: f64) -> Result<DVector<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(AbelError::InvalidArgument(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    if a.nrows() != f.len() {
        return Err(AbelError::InvalidArgument(format!(
            "matrix has {} rows but the data vector has {} entries",
            a.nrows(),
            f.len()
        )));
    }
    let mut normal = a.transpose() * a;
    for i in 0..normal.nrows() {
        normal[(i, i)] += alpha;
    }
    let rhs = a.transpose() * f;
    normal
        .cholesky()
        .ok_or(AbelError::SingularSystem(0))
        .map(|ch| ch.solve(&rhs))
}

/// Euclidean norm of `A·k − f`.
pub fn residual_norm(a: &DMatrix<f64>, k: &DVector<f64>, f: &DVector<f64>) -> Result<f64> {
    if a.ncols() != k.len() || a.nrows() != f.len() {
        return Err(AbelError::InvalidArgument(format!(
            "shapes {}×{} · {} vs {}",
            a.nrows(),
            a.ncols(),
            k.len(),
            f.len()
        )));
    }
    Ok((a * k - f).norm())
}

/// Choose α so the residual matches `cfg.delta`, by bisection on `log₁₀ α`.
///
/// The residual is monotone nondecreasing in α, so when δ lies between the
/// residuals at the bracket ends the bisection converges; otherwise the
/// nearer bracket end is returned with an unreachable flag.
pub fn choose_alpha(
    a: &DMatrix<f64>,
    f: &DVector<f64>,
    cfg: &RegularizationConfig,
) -> Result<AlphaChoice> {
    if !(cfg.delta > 0.0) {
        return Err(AbelError::InvalidArgument(format!(
            "delta must be positive, got {}",
            cfg.delta
        )));
    }
    if !(cfg.alpha_min > 0.0) || !(cfg.alpha_min < cfg.alpha_max) {
        return Err(AbelError::InvalidArgument(format!(
            "need 0 < alpha_min < alpha_max, got [{}, {}]",
            cfg.alpha_min, cfg.alpha_max
        )));
    }
    if !(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0) {
        return Err(AbelError::InvalidArgument(format!(
            "rel_tol must lie in (0, 1), got {}",
            cfg.rel_tol
        )));
    }

    let residual_at = |alpha: f64| -> Result<f64> {
        let k = tikhonov_solve(a, f, alpha)?;
        residual_norm(a, &k, f)
    };

    let res_min = residual_at(cfg.alpha_min)?;
    if cfg.delta < res_min {
        return Ok(AlphaChoice {
            alpha: cfg.alpha_min,
            status: AlphaStatus::DeltaUnreachableLow,
            residual: res_min,
            iterations: 0,
        });
    }
    let res_max = residual_at(cfg.alpha_max)?;
    if cfg.delta > res_max {
        return Ok(AlphaChoice {
            alpha: cfg.alpha_max,
            status: AlphaStatus::DeltaUnreachableHigh,
            residual: res_max,
            iterations: 0,
        });
    }

    let mut lo = cfg.alpha_min.log10();
    let mut hi = cfg.alpha_max.log10();
    let mut alpha = 10f64.powf(0.5 * (lo + hi));
    let mut residual = residual_at(alpha)?;
    for it in 1..=200 {
        if (residual - cfg.delta).abs() / cfg.delta <= cfg.rel_tol {
            return Ok(AlphaChoice {
                alpha,
                status: AlphaStatus::Converged,
                residual,
                iterations: it,
            });
        }
        let mid = 0.5 * (lo + hi);
        if residual > cfg.delta {
            hi = mid;
        } else {
            lo = mid;
        }
        alpha = 10f64.powf(0.5 * (lo + hi));
        residual = residual_at(alpha)?;
    }
    Ok(AlphaChoice {
        alpha,
        status: AlphaStatus::MaxIterations,
        residual,
        iterations: 200,
    })
}
