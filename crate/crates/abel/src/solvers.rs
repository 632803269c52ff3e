//! The two direct solvers.
//!
//! The first method back-substitutes the upper-triangular system produced
//! by the p coefficients:
//!
//! ```text
//! k_{n−2} = (q_{n−2}/2) / p_{n−2,n−2}
//! k_i     = (q_i/2 − Σ_{j>i} p_ij k_j) / p_ii        (downward sweep)
//! ```
//!
//! The second method evaluates the analytic inversion formula
//! `k(r) = −(1/π) ∫_r^R q′(x)/√(x² − r²) dx` with the g coefficients; its
//! axis value comes from the first method's axis equation because the
//! logarithmic coefficient is undefined at `r = x = 0`.
//!
//! Neither recursion produces the boundary value `k(R)`; an
//! [`EndpointRule`] appends it.

use crate::mesh::Mesh;
use crate::quadrature::{assemble_matrix, g_coeff, KernelKind};
use crate::smoothing::fit_spline;
use crate::{AbelError, Result};

/// Samples of the source function `q(x)` on the mesh nodes, optionally
/// carrying per-node measurement-error levels `δ_i ≥ 0`.
#[derive(Debug, Clone)]
pub struct SourceSamples {
    values: Vec<f64>,
    noise_levels: Option<Vec<f64>>,
}

impl SourceSamples {
    /// Samples without noise information.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Ok(Self {
            values,
            noise_levels: None,
        })
    }

    /// Samples with per-node noise levels (all must be ≥ 0 and match in length).
    pub fn with_noise_levels(values: Vec<f64>, noise_levels: Vec<f64>) -> Result<Self> {
        if noise_levels.len() != values.len() {
            return Err(AbelError::InvalidArgument(format!(
                "{} noise levels for {} samples",
                noise_levels.len(),
                values.len()
            )));
        }
        if noise_levels.iter().any(|&d| !(d >= 0.0)) {
            return Err(AbelError::InvalidArgument(
                "noise levels must be nonnegative".into(),
            ));
        }
        Ok(Self {
            values,
            noise_levels: Some(noise_levels),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn noise_levels(&self) -> Option<&[f64]> {
        self.noise_levels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Samples of the source derivative `q′(x)` on the mesh nodes.
#[derive(Debug, Clone)]
pub struct DerivativeSamples {
    values: Vec<f64>,
}

impl DerivativeSamples {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How the boundary value `k(R)` — which no recursion reaches — is filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndpointRule {
    /// Linear extrapolation through the last two solved nodes.
    #[default]
    ExtrapolateLinear,
    /// `k(R) = 0` (vanishing absorption outside the object).
    Zero,
    /// `k(R) = k_{n−2}`.
    CopyPrevious,
}

impl EndpointRule {
    /// Append the boundary value to the `n−1` solved values.
    pub fn complete(self, mesh: &Mesh, mut solved: Vec<f64>) -> SolutionVector {
        debug_assert_eq!(solved.len(), mesh.len() - 1);
        let n = mesh.len();
        let r = mesh.nodes();
        let last = match self {
            EndpointRule::ExtrapolateLinear => {
                let (a, b) = (solved[n - 3], solved[n - 2]);
                a + (r[n - 1] - r[n - 3]) / (r[n - 2] - r[n - 3]) * (b - a)
            }
            EndpointRule::Zero => 0.0,
            EndpointRule::CopyPrevious => solved[n - 2],
        };
        solved.push(last);
        SolutionVector::new(solved, self)
    }
}

/// Discrete absorption profile `k(r_j)`, one value per mesh node.
#[derive(Debug, Clone)]
pub struct SolutionVector {
    values: Vec<f64>,
    endpoint_rule: EndpointRule,
}

impl SolutionVector {
    pub fn new(values: Vec<f64>, endpoint_rule: EndpointRule) -> Self {
        Self {
            values,
            endpoint_rule,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn endpoint_rule(&self) -> EndpointRule {
        self.endpoint_rule
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Scheme used by [`estimate_qprime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeScheme {
    /// One-sided difference `(q_{i+1} − q_i)/(x_{i+1} − x_i)`, last node copied.
    ForwardDifference,
    /// Derivative of a cubic smoothing spline fitted with parameter `p`.
    SplineDerivative { p: f64 },
}

/// Which direct solver a pipeline uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Back-substitution of the triangular system (the first method).
    #[default]
    First,
    /// Inversion-formula quadrature over `q′` (the second method).
    Second,
}

/// Solve the triangular system for `k` by back-substitution.
pub fn solve_first(mesh: &Mesh, q: &SourceSamples, rule: EndpointRule) -> Result<SolutionVector> {
    let n = mesh.len();
    if q.len() != n {
        return Err(AbelError::InvalidArgument(format!(
            "{} source samples for a mesh of {} nodes",
            q.len(),
            n
        )));
    }
    let a = assemble_matrix(mesh, KernelKind::Sqrt)?;
    let a = a.entries();
    let qv = q.values();
    let m = n - 1;
    let mut k = vec![0.0; m];
    for i in (0..m).rev() {
        let mut acc = qv[i] / 2.0;
        for j in i + 1..m {
            acc -= a[(i, j)] * k[j];
        }
        let diag = a[(i, i)];
        if diag == 0.0 {
            return Err(AbelError::SingularSystem(i));
        }
        k[i] = acc / diag;
    }
    Ok(rule.complete(mesh, k))
}

/// Solve via the inversion formula: `k_j = −(1/π) Σ_{i≥j} g_ij q′_i` for
/// interior nodes, the axis value from the first method's axis equation.
pub fn solve_second(
    mesh: &Mesh,
    q: &SourceSamples,
    qprime: &DerivativeSamples,
    rule: EndpointRule,
) -> Result<SolutionVector> {
    let n = mesh.len();
    if q.len() != n || qprime.len() != n {
        return Err(AbelError::InvalidArgument(format!(
            "source/derivative lengths {}/{} for a mesh of {} nodes",
            q.len(),
            qprime.len(),
            n
        )));
    }
    let x = mesh.nodes();
    let dq = qprime.values();
    let m = n - 1;
    let mut k = vec![0.0; m];
    for j in 1..m {
        let mut acc = 0.0;
        for i in j..m {
            acc += g_coeff(x[j], x[i], x[i + 1])? * dq[i];
        }
        k[j] = -acc / std::f64::consts::PI;
    }
    // axis node: row 0 of the triangular system, where p_0j = x_{j+1} − x_j
    let mut acc = q.values()[0] / 2.0;
    for j in 1..m {
        acc -= (x[j + 1] - x[j]) * k[j];
    }
    k[0] = acc / x[1];
    Ok(rule.complete(mesh, k))
}

/// Estimate `q′` at the nodes.
pub fn estimate_qprime(
    mesh: &Mesh,
    q: &SourceSamples,
    scheme: DerivativeScheme,
) -> Result<DerivativeSamples> {
    let n = mesh.len();
    if q.len() != n {
        return Err(AbelError::InvalidArgument(format!(
            "{} source samples for a mesh of {} nodes",
            q.len(),
            n
        )));
    }
    let qv = q.values();
    let values = match scheme {
        DerivativeScheme::ForwardDifference => {
            let mut d = vec![0.0; n];
            for i in 0..n - 1 {
                d[i] = (qv[i + 1] - qv[i]) / mesh.step(i);
            }
            d[n - 1] = d[n - 2];
            d
        }
        DerivativeScheme::SplineDerivative { p } => {
            let spline = fit_spline(mesh.nodes(), qv, p)?;
            mesh.nodes()
                .iter()
                .map(|&x| spline.eval_deriv(x))
                .collect::<Result<Vec<f64>>>()?
        }
    };
    Ok(DerivativeSamples::new(values))
}
