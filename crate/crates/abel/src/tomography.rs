//! Infrared-tomography front end.
//!
//! Measured ray intensities `I(x)` relate to the source function through
//! the reference intensity `B` of the ray source: `q(x) = −ln(I(x)/B)`.
//! [`reconstruct`] chains the optional steps of the full pipeline —
//! smoothing-spline resampling of the intensities, conversion to `q`, a
//! direct solve, and an optional Tikhonov pass — and reports the
//! diagnostics needed to audit a run.

use nalgebra::DVector;

use crate::error_analysis::{error_recursion, ErrorEstimate};
use crate::mesh::Mesh;
use crate::quadrature::{assemble_matrix, KernelKind};
use crate::regularization::{
    choose_alpha, residual_norm, tikhonov_solve, AlphaStatus, RegularizationConfig,
};
use crate::smoothing::fit_spline;
use crate::solvers::{
    estimate_qprime, solve_first, solve_second, DerivativeScheme, EndpointRule, Method,
    SolutionVector, SourceSamples,
};
use crate::{AbelError, Result};

/// Measured ray intensities plus the source reference they are normalized by.
///
/// The source temperature is carried as metadata only; the reference
/// intensity `B` is a plain scalar supplied by the caller.
#[derive(Debug, Clone)]
pub struct TomographyInput {
    intensities: Vec<f64>,
    planck_reference: f64,
    source_temperature: Option<f64>,
}

impl TomographyInput {
    pub fn new(intensities: Vec<f64>, planck_reference: f64) -> Result<Self> {
        if !(planck_reference > 0.0) || !planck_reference.is_finite() {
            return Err(AbelError::InvalidMeasurement(format!(
                "reference intensity must be positive and finite, got {planck_reference}"
            )));
        }
        Ok(Self {
            intensities,
            planck_reference,
            source_temperature: None,
        })
    }

    /// Attach the source temperature (°C, metadata only).
    pub fn with_source_temperature(mut self, t0: f64) -> Self {
        self.source_temperature = Some(t0);
        self
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn planck_reference(&self) -> f64 {
        self.planck_reference
    }

    pub fn source_temperature(&self) -> Option<f64> {
        self.source_temperature
    }
}

/// Convert intensities to the equation's right-hand side: `q_i = −ln(I_i/B)`.
pub fn intensity_to_q(input: &TomographyInput) -> Result<SourceSamples> {
    let b = input.planck_reference;
    let q = input
        .intensities
        .iter()
        .map(|&i| {
            if !(i > 0.0) || !i.is_finite() {
                return Err(AbelError::InvalidMeasurement(format!(
                    "intensity must be positive and finite, got {i}"
                )));
            }
            Ok(-(i / b).ln())
        })
        .collect::<Result<Vec<f64>>>()?;
    SourceSamples::new(q)
}

/// Spline smoothing and resampling applied before the inversion.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingOptions {
    /// Smoothing parameter of the spline fitted to the intensities.
    pub p: f64,
    /// Node count of the uniform mesh the intensities are resampled onto.
    pub resample_n: usize,
}

/// Pipeline configuration.
#[derive(Debug, Clone, Default)]
pub struct ReconstructOptions {
    /// Optional intensity smoothing and resampling.
    pub smooth: Option<SmoothingOptions>,
    /// Which direct solver to run.
    pub method: Method,
    /// Derivative scheme for the inversion-formula solver.
    pub qprime_scheme: Option<DerivativeScheme>,
    /// Optional Tikhonov pass; `alpha_override` inside skips the
    /// discrepancy search.
    pub regularization: Option<RegularizationConfig>,
    /// Boundary-value rule for all produced solutions.
    pub endpoint_rule: EndpointRule,
}

/// A finished reconstruction with its diagnostics.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// The mesh the solution lives on (the resampled one when smoothing ran).
    pub mesh: Mesh,
    /// The converted right-hand side used by the solve.
    pub source: SourceSamples,
    /// The pipeline result: regularized when a Tikhonov pass ran, direct
    /// otherwise.
    pub solution: SolutionVector,
    /// The direct solve, kept alongside the regularized one for comparison.
    pub unregularized: Option<SolutionVector>,
    /// Euclidean residual of `solution` in the triangular system.
    pub residual: f64,
    /// Regularization strength of the Tikhonov pass, if one ran.
    pub alpha: Option<f64>,
    /// Search outcome, when the discrepancy search ran.
    pub alpha_status: Option<AlphaStatus>,
    /// Signed error estimates of the direct solve (first method only).
    pub error_estimate: Option<ErrorEstimate>,
}

/// Run the reconstruction pipeline.
pub fn reconstruct(
    input: &TomographyInput,
    mesh: &Mesh,
    options: &ReconstructOptions,
) -> Result<Reconstruction> {
    if input.intensities.len() != mesh.len() {
        return Err(AbelError::InvalidArgument(format!(
            "{} intensities for a mesh of {} nodes",
            input.intensities.len(),
            mesh.len()
        )));
    }

    // optional smoothing/resampling of the intensities
    let (mesh, intensities) = match options.smooth {
        Some(SmoothingOptions { p, resample_n }) => {
            let spline = fit_spline(mesh.nodes(), &input.intensities, p)?;
            let fine = Mesh::uniform(resample_n, mesh.radius())?;
            let values = spline.resample(&fine)?;
            (fine, values)
        }
        None => (mesh.clone(), input.intensities.clone()),
    };
    let stage = TomographyInput {
        intensities,
        planck_reference: input.planck_reference,
        source_temperature: input.source_temperature,
    };
    let q = intensity_to_q(&stage)?;

    // direct solve
    let direct = match options.method {
        Method::First => solve_first(&mesh, &q, options.endpoint_rule)?,
        Method::Second => {
            let scheme = options
                .qprime_scheme
                .unwrap_or(DerivativeScheme::ForwardDifference);
            let dq = estimate_qprime(&mesh, &q, scheme)?;
            solve_second(&mesh, &q, &dq, options.endpoint_rule)?
        }
    };
    let error_estimate = match options.method {
        Method::First => Some(error_recursion(&mesh, &direct)?),
        Method::Second => None,
    };

    let n = mesh.len();
    let a = assemble_matrix(&mesh, KernelKind::Sqrt)?;
    let f = DVector::from_iterator(n - 1, q.values().iter().take(n - 1).map(|&v| v / 2.0));

    // optional Tikhonov pass
    let (solution, unregularized, alpha, alpha_status) = match &options.regularization {
        Some(cfg) => {
            let (alpha, status) = match cfg.alpha_override {
                Some(alpha) => (alpha, None),
                None => {
                    let choice = choose_alpha(a.entries(), &f, cfg)?;
                    (choice.alpha, Some(choice.status))
                }
            };
            let k_alpha = tikhonov_solve(a.entries(), &f, alpha)?;
            let solution = options
                .endpoint_rule
                .complete(&mesh, k_alpha.as_slice().to_vec());
            (solution, Some(direct), Some(alpha), status)
        }
        None => (direct, None, None, None),
    };

    let kv = DVector::from_column_slice(&solution.values()[..n - 1]);
    let residual = residual_norm(a.entries(), &kv, &f)?;

    Ok(Reconstruction {
        mesh,
        source: q,
        solution,
        unregularized,
        residual,
        alpha,
        alpha_status,
        error_estimate,
    })
}
