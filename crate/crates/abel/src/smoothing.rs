//! Natural cubic smoothing splines.
//!
//! [`fit_spline`] minimizes `p·Σ(y_i − s(x_i))² + (1−p)·∫(s″)²` over
//! natural cubic splines on the data abscissae. `p = 1` interpolates,
//! `p = 0` degenerates to the least-squares straight line, and values in
//! between trade data fidelity against curvature — the csaps convention.
//!
//! The fit solves the standard band system in the interior second
//! derivatives `m`: with `R` the roughness Gram matrix and `Q` the
//! second-difference operator,
//!
//! ```text
//! (p R + (1−p) QᵀQ) m = p Qᵀ y,     a = y − ((1−p)/p) Q m,
//! ```
//!
//! which enforces the C² continuity equations `R m = Qᵀ a` exactly, so the
//! result is a genuine spline for every `p`.

use nalgebra::{DMatrix, DVector};

use crate::mesh::Mesh;
use crate::{AbelError, Result};

/// A fitted natural cubic smoothing spline.
#[derive(Debug, Clone)]
pub struct SmoothingSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second_derivs: Vec<f64>,
    p: f64,
}

/// Fit a smoothing spline to `(x, y)` with smoothing parameter `p ∈ [0, 1]`.
///
/// Needs at least 4 strictly increasing abscissae.
pub fn fit_spline(x: &[f64], y: &[f64], p: f64) -> Result<SmoothingSpline> {
    if x.len() < 4 {
        return Err(AbelError::InvalidArgument(format!(
            "smoothing spline needs at least 4 points, got {}",
            x.len()
        )));
    }
    if y.len() != x.len() {
        return Err(AbelError::InvalidArgument(format!(
            "{} ordinates for {} abscissae",
            y.len(),
            x.len()
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(AbelError::InvalidArgument(format!(
            "smoothing parameter must lie in [0, 1], got {p}"
        )));
    }
    for w in x.windows(2) {
        if !w[0].is_finite() || !w[1].is_finite() || !(w[1] > w[0]) {
            return Err(AbelError::InvalidArgument(
                "abscissae must be finite and strictly increasing".into(),
            ));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(AbelError::InvalidArgument(
            "ordinates must be finite".into(),
        ));
    }

    let n = x.len();
    if p == 0.0 {
        // least-squares straight line
        let xm = x.iter().sum::<f64>() / n as f64;
        let ym = y.iter().sum::<f64>() / n as f64;
        let sxx: f64 = x.iter().map(|&v| (v - xm) * (v - xm)).sum();
        let sxy: f64 = x.iter().zip(y).map(|(&u, &v)| (u - xm) * (v - ym)).sum();
        let slope = sxy / sxx;
        let values = x.iter().map(|&v| ym + slope * (v - xm)).collect();
        return Ok(SmoothingSpline {
            knots: x.to_vec(),
            values,
            second_derivs: vec![0.0; n],
            p,
        });
    }

    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let ni = n - 2;
    let mut r = DMatrix::zeros(ni, ni);
    for c in 0..ni {
        r[(c, c)] = (h[c] + h[c + 1]) / 3.0;
        if c + 1 < ni {
            r[(c, c + 1)] = h[c + 1] / 6.0;
            r[(c + 1, c)] = h[c + 1] / 6.0;
        }
    }
    let mut q = DMatrix::zeros(n, ni);
    for c in 0..ni {
        q[(c, c)] = 1.0 / h[c];
        q[(c + 1, c)] = -1.0 / h[c] - 1.0 / h[c + 1];
        q[(c + 2, c)] = 1.0 / h[c + 1];
    }
    let yv = DVector::from_column_slice(y);
    let b = &r * p + q.transpose() * &q * (1.0 - p);
    let rhs = q.transpose() * &yv * p;
    let m_in = b
        .cholesky()
        .ok_or(AbelError::SingularSystem(0))?
        .solve(&rhs);
    let a = &yv - &q * &m_in * ((1.0 - p) / p);

    let mut second_derivs = vec![0.0; n];
    second_derivs[1..n - 1].copy_from_slice(m_in.as_slice());
    Ok(SmoothingSpline {
        knots: x.to_vec(),
        values: a.as_slice().to_vec(),
        second_derivs,
        p,
    })
}

impl SmoothingSpline {
    /// The knot abscissae.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// The fitted values at the knots.
    pub fn knot_values(&self) -> &[f64] {
        &self.values
    }

    /// The second derivatives at the knots (zero at both ends).
    pub fn knot_second_derivs(&self) -> &[f64] {
        &self.second_derivs
    }

    /// The smoothing parameter the spline was fitted with.
    pub fn smoothing_parameter(&self) -> f64 {
        self.p
    }

    fn interval_of(&self, x: f64) -> Result<usize> {
        let lo = self.knots[0];
        let hi = *self.knots.last().unwrap();
        if !(lo..=hi).contains(&x) {
            return Err(AbelError::OutOfRange(format!(
                "{x} outside the knot span [{lo}, {hi}]"
            )));
        }
        let i = self.knots.partition_point(|&k| k <= x);
        Ok(i.clamp(1, self.knots.len() - 1) - 1)
    }

    /// Spline value at `x` (inside the knot span).
    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.interval_of(x)?;
        let h = self.knots[i + 1] - self.knots[i];
        let t1 = self.knots[i + 1] - x;
        let t0 = x - self.knots[i];
        let (m0, m1) = (self.second_derivs[i], self.second_derivs[i + 1]);
        let (a0, a1) = (self.values[i], self.values[i + 1]);
        Ok(m0 * t1 * t1 * t1 / (6.0 * h)
            + m1 * t0 * t0 * t0 / (6.0 * h)
            + (a0 / h - m0 * h / 6.0) * t1
            + (a1 / h - m1 * h / 6.0) * t0)
    }

    /// First derivative at `x` (inside the knot span).
    pub fn eval_deriv(&self, x: f64) -> Result<f64> {
        let i = self.interval_of(x)?;
        let h = self.knots[i + 1] - self.knots[i];
        let t1 = self.knots[i + 1] - x;
        let t0 = x - self.knots[i];
        let (m0, m1) = (self.second_derivs[i], self.second_derivs[i + 1]);
        let (a0, a1) = (self.values[i], self.values[i + 1]);
        Ok(
            -m0 * t1 * t1 / (2.0 * h) + m1 * t0 * t0 / (2.0 * h) + (a1 - a0) / h
                - (m1 - m0) * h / 6.0,
        )
    }

    /// Second derivative at `x` (piecewise linear between knots).
    pub fn eval_second_deriv(&self, x: f64) -> Result<f64> {
        let i = self.interval_of(x)?;
        let h = self.knots[i + 1] - self.knots[i];
        let t1 = self.knots[i + 1] - x;
        let t0 = x - self.knots[i];
        Ok((self.second_derivs[i] * t1 + self.second_derivs[i + 1] * t0) / h)
    }

    /// Spline values on the nodes of `mesh` (which must lie inside the span).
    pub fn resample(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        mesh.nodes().iter().map(|&x| self.eval(x)).collect()
    }

    /// The exact curvature integral `∫ (s″)²` over the knot span.
    pub fn roughness(&self) -> f64 {
        let m = &self.second_derivs;
        self.knots
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                (w[1] - w[0]) / 3.0 * (m[i] * m[i] + m[i] * m[i + 1] + m[i + 1] * m[i + 1])
            })
            .sum()
    }
}
