//! Analytic interval coefficients for the two singular kernels and the
//! discrete forward operator.
//!
//! On a mesh interval `[r_lo, r_hi)` with the unknown held constant, the
//! singular integrals have closed forms:
//!
//! ```text
//! ∫ r/√(r² − x²) dr   =  √(r_hi² − x²) − √(r_lo² − x²)          (p coefficient)
//! ∫ 1/√(x² − r²) dx   =  ln[(x_hi + √(x_hi² − r²)) / (x_lo + √(x_lo² − r²))]   (g coefficient)
//! ```
//!
//! Both are finite for a singularity sitting *on* the left endpoint, which
//! is what lets coinciding meshes work without any shift. Collecting the p
//! coefficients row by row yields an upper-triangular matrix `A` with
//! `A·k = q/2`; applying it is the discrete forward projection.

use nalgebra::DMatrix;

use crate::mesh::Mesh;
use crate::solvers::{SolutionVector, SourceSamples};
use crate::{AbelError, Result};

/// Which singular kernel a [`QuadratureMatrix`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `r/√(r² − x²)` — the forward-projection kernel (p coefficients).
    Sqrt,
    /// `1/√(x² − r²)` — the inversion-formula kernel (g coefficients).
    Log,
}

/// Dense upper-triangular coefficient matrix over a mesh.
///
/// For [`KernelKind::Sqrt`], `entries[(i, j)] = p(x_i; r_j, r_{j+1})` for
/// `j ≥ i`; the diagonal is strictly positive.
///
/// For [`KernelKind::Log`], `entries[(i, j)] = g(r_i; x_j, x_{j+1})` for
/// `j ≥ i`, **except row 0**, which is stored as zeros: its diagonal entry
/// would be `g(0; 0, x_1)`, the undefined ∞·0 node. The axis value is never
/// produced from this matrix — the inversion-formula solver recovers it
/// from the first method's axis equation instead.
#[derive(Debug, Clone)]
pub struct QuadratureMatrix {
    entries: DMatrix<f64>,
    kind: KernelKind,
    mesh: Mesh,
}

impl QuadratureMatrix {
    /// The `(n−1) × (n−1)` coefficient matrix.
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Kernel the matrix was assembled for.
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// The mesh the matrix was built from.
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Matrix dimension, `n − 1`.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Interval coefficient `√(r_hi² − x²) − √(r_lo² − x²)` of the kernel
/// `r/√(r² − x²)`.
///
/// Requires `0 ≤ x ≤ r_lo ≤ r_hi`; `x > r_lo` would put the singularity
/// inside the interval and is rejected. Near `x ≈ r_lo ≈ r_hi` the
/// difference of square roots is evaluated through the quotient
/// `(r_hi² − r_lo²)/(√(r_hi² − x²) + √(r_lo² − x²))` to avoid subtractive
/// cancellation.
pub fn p_coeff(x: f64, r_lo: f64, r_hi: f64) -> Result<f64> {
    check_triple(x, r_lo, r_hi)?;
    if x > r_lo {
        return Err(AbelError::DomainError(format!(
            "kernel singularity at x = {x} lies inside [{r_lo}, {r_hi}]"
        )));
    }
    if r_lo == r_hi {
        return Ok(0.0);
    }
    let s_hi = (r_hi * r_hi - x * x).sqrt();
    let s_lo = (r_lo * r_lo - x * x).sqrt();
    if s_hi - s_lo <= 1e-6 * s_hi {
        // quotient form: exact in reals, stable in floats
        Ok((r_hi * r_hi - r_lo * r_lo) / (s_hi + s_lo))
    } else {
        Ok(s_hi - s_lo)
    }
}

/// Interval coefficient `ln[(x_hi + √(x_hi² − r²)) / (x_lo + √(x_lo² − r²))]`
/// of the kernel `1/√(x² − r²)`.
///
/// Requires `0 ≤ r ≤ x_lo ≤ x_hi` and not `r = x_lo = 0` (the ∞·0 node).
/// Evaluated via `ln_1p` of the increment so that short intervals keep full
/// precision.
pub fn g_coeff(r: f64, x_lo: f64, x_hi: f64) -> Result<f64> {
    check_triple(r, x_lo, x_hi)?;
    if r > x_lo {
        return Err(AbelError::DomainError(format!(
            "kernel singularity at r = {r} lies inside [{x_lo}, {x_hi}]"
        )));
    }
    if x_lo == x_hi {
        return Ok(0.0);
    }
    if r == 0.0 && x_lo == 0.0 {
        return Err(AbelError::DegenerateNode);
    }
    let s_hi = (x_hi * x_hi - r * r).sqrt();
    let s_lo = (x_lo * x_lo - r * r).sqrt();
    // s_hi + s_lo > 0 because x_lo < x_hi; x_lo + s_lo > 0 because the
    // degenerate node was rejected above.
    let ds = (x_hi * x_hi - x_lo * x_lo) / (s_hi + s_lo);
    Ok(((x_hi - x_lo + ds) / (x_lo + s_lo)).ln_1p())
}

fn check_triple(s: f64, lo: f64, hi: f64) -> Result<()> {
    if !s.is_finite() || !lo.is_finite() || !hi.is_finite() || s < 0.0 || lo > hi {
        return Err(AbelError::InvalidArgument(format!(
            "expected finite 0 ≤ s ≤ lo ≤ hi, got s = {s}, lo = {lo}, hi = {hi}"
        )));
    }
    Ok(())
}

/// Assemble the upper-triangular coefficient matrix for `kind` over `mesh`.
pub fn assemble_matrix(mesh: &Mesh, kind: KernelKind) -> Result<QuadratureMatrix> {
    let n = mesh.len();
    let m = n - 1;
    let nodes = mesh.nodes();
    let mut entries = DMatrix::zeros(m, m);
    for i in 0..m {
        if kind == KernelKind::Log && i == 0 {
            continue; // axis row: see QuadratureMatrix docs
        }
        for j in i..m {
            entries[(i, j)] = match kind {
                KernelKind::Sqrt => p_coeff(nodes[i], nodes[j], nodes[j + 1])?,
                KernelKind::Log => g_coeff(nodes[i], nodes[j], nodes[j + 1])?,
            };
        }
    }
    Ok(QuadratureMatrix {
        entries,
        kind,
        mesh: mesh.clone(),
    })
}

/// Discrete forward projection: `q_i = 2 Σ_{j≥i} p_ij k_j` for the first
/// `n−1` chords and `q_{n−1} = 0` (the `x = R` limit).
///
/// `k` must hold one value per mesh node; the boundary value `k_{n−1}` is
/// not consumed by the sum.
pub fn forward_apply(mesh: &Mesh, k: &SolutionVector) -> Result<SourceSamples> {
    let n = mesh.len();
    if k.values().len() != n {
        return Err(AbelError::InvalidArgument(format!(
            "solution has {} values but the mesh has {} nodes",
            k.values().len(),
            n
        )));
    }
    let nodes = mesh.nodes();
    let kv = k.values();
    let mut q = vec![0.0; n];
    for i in 0..n - 1 {
        let mut acc = 0.0;
        for j in i..n - 1 {
            acc += p_coeff(nodes[i], nodes[j], nodes[j + 1])? * kv[j];
        }
        q[i] = 2.0 * acc;
    }
    SourceSamples::new(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::EndpointRule;
    use crate::synthetic::{oracle_integral, SingularIntegrand};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn p_coeff_at_axis_is_interval_width() {
        assert_relative_eq!(p_coeff(0.0, 3.0, 5.0).unwrap(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn p_coeff_empty_interval() {
        assert_eq!(p_coeff(2.0, 3.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn p_coeff_matches_quadrature_oracle() {
        // ∫₄⁵ r/√(r² − 9) dr = 4 − √7
        let oracle =
            oracle_integral(&SingularIntegrand::SqrtKernel { x: 3.0 }, 4.0, 5.0, 1e-12).unwrap();
        let closed = p_coeff(3.0, 4.0, 5.0).unwrap();
        assert!((closed - oracle).abs() < 1e-10);
        assert_relative_eq!(closed, 4.0 - 7.0f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn p_coeff_rejects_interior_singularity() {
        assert!(matches!(
            p_coeff(4.0, 3.0, 5.0),
            Err(AbelError::DomainError(_))
        ));
    }

    #[test]
    fn p_coeff_stable_near_cancellation() {
        // tiny interval far from the singularity: compare with the oracle
        let (x, r_lo, r_hi) = (1.0, 2.0, 2.0 + 1e-9);
        let closed = p_coeff(x, r_lo, r_hi).unwrap();
        let exact =
            (r_hi * r_hi - r_lo * r_lo) / ((r_hi * r_hi - 1.0).sqrt() + (r_lo * r_lo - 1.0).sqrt());
        assert_relative_eq!(closed, exact, max_relative = 1e-12);
    }

    #[test]
    fn g_coeff_at_axis_is_log_ratio() {
        let e = std::f64::consts::E;
        assert_relative_eq!(g_coeff(0.0, 1.0, e).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn g_coeff_empty_interval() {
        assert_eq!(g_coeff(2.0, 3.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn g_coeff_matches_quadrature_oracle() {
        // ∫₄⁵ dx/√(x² − 9) = ln(9/(4 + √7)) = ln(4 − √7)
        let oracle =
            oracle_integral(&SingularIntegrand::LogKernel { r: 3.0 }, 4.0, 5.0, 1e-12).unwrap();
        let closed = g_coeff(3.0, 4.0, 5.0).unwrap();
        assert!((closed - oracle).abs() < 1e-10);
        assert_relative_eq!(closed, (4.0 - 7.0f64.sqrt()).ln(), max_relative = 1e-14);
    }

    #[test]
    fn g_coeff_degenerate_node() {
        assert!(matches!(
            g_coeff(0.0, 0.0, 0.5),
            Err(AbelError::DegenerateNode)
        ));
        assert!(matches!(
            g_coeff(3.0, 2.0, 5.0),
            Err(AbelError::DomainError(_))
        ));
    }

    #[test]
    fn assemble_sqrt_three_nodes() {
        let mesh = Mesh::uniform(3, 1.0).unwrap();
        let qm = assemble_matrix(&mesh, KernelKind::Sqrt).unwrap();
        let a = qm.entries();
        // the x = 0 row equals the step widths
        assert_relative_eq!(a[(0, 0)], 0.5, max_relative = 1e-15);
        assert_relative_eq!(a[(0, 1)], 0.5, max_relative = 1e-15);
        assert_eq!(a[(1, 0)], 0.0);
        assert_relative_eq!(a[(1, 1)], 0.75f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn assemble_log_axis_row_is_zero() {
        let mesh = Mesh::uniform(5, 1.0).unwrap();
        let qm = assemble_matrix(&mesh, KernelKind::Log).unwrap();
        for j in 0..qm.dim() {
            assert_eq!(qm.entries()[(0, j)], 0.0);
        }
        // interior rows hold the log coefficients
        let g = g_coeff(mesh.node(1), mesh.node(1), mesh.node(2)).unwrap();
        assert_relative_eq!(qm.entries()[(1, 1)], g, max_relative = 1e-15);
    }

    #[test]
    fn forward_apply_constant_profile() {
        // k ≡ 1 telescopes to q_i = 2√(R² − x_i²)
        let mesh = Mesh::from_nodes(vec![0.0, 0.2, 0.35, 0.7, 1.0]).unwrap();
        let k = SolutionVector::new(vec![1.0; 5], EndpointRule::CopyPrevious);
        let q = forward_apply(&mesh, &k).unwrap();
        for (i, &x) in mesh.nodes().iter().enumerate().take(4) {
            assert_relative_eq!(
                q.values()[i],
                2.0 * (1.0 - x * x).sqrt(),
                max_relative = 1e-13
            );
        }
        assert_eq!(q.values()[4], 0.0);
    }

    #[test]
    fn forward_apply_zero_profile() {
        let mesh = Mesh::uniform(7, 2.0).unwrap();
        let k = SolutionVector::new(vec![0.0; 7], EndpointRule::Zero);
        let q = forward_apply(&mesh, &k).unwrap();
        assert!(q.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_apply_semicircle_axis_value() {
        // k = √(1 − r²) has q(0) = π/2; the left-rectangle sum is O(h) accurate
        let n = 201;
        let mesh = Mesh::uniform(n, 1.0).unwrap();
        let k: Vec<f64> = mesh.nodes().iter().map(|&r| (1.0 - r * r).sqrt()).collect();
        let k = SolutionVector::new(k, EndpointRule::Zero);
        let q = forward_apply(&mesh, &k).unwrap();
        let h = 1.0 / (n as f64 - 1.0);
        let err = (q.values()[0] - std::f64::consts::FRAC_PI_2).abs();
        assert!(err < 3.0 * h, "axis error {err} not O(h)");
    }

    #[test]
    fn forward_apply_length_mismatch() {
        let mesh = Mesh::uniform(5, 1.0).unwrap();
        let k = SolutionVector::new(vec![1.0; 4], EndpointRule::Zero);
        assert!(matches!(
            forward_apply(&mesh, &k),
            Err(AbelError::InvalidArgument(_))
        ));
    }

    proptest! {
        // closed forms agree with the adaptive quadrature oracle
        #[test]
        fn p_coeff_oracle_equivalence(x in 0.0f64..3.0, lo_off in 0.0f64..2.0, width in 1e-3f64..2.0) {
            let r_lo = x + lo_off;
            let r_hi = r_lo + width;
            let closed = p_coeff(x, r_lo, r_hi).unwrap();
            let oracle = oracle_integral(&SingularIntegrand::SqrtKernel { x }, r_lo, r_hi, 1e-12).unwrap();
            prop_assert!((closed - oracle).abs() <= 1e-8 * closed.abs().max(1.0));
        }

        #[test]
        fn g_coeff_oracle_equivalence(r in 0.0f64..3.0, lo_off in 1e-6f64..2.0, width in 1e-3f64..2.0) {
            let x_lo = r + lo_off;
            let x_hi = x_lo + width;
            let closed = g_coeff(r, x_lo, x_hi).unwrap();
            let oracle = oracle_integral(&SingularIntegrand::LogKernel { r }, x_lo, x_hi, 1e-12).unwrap();
            prop_assert!((closed - oracle).abs() <= 1e-8 * closed.abs().max(1.0));
        }

        // rows telescope to √(R² − x_i²)
        #[test]
        fn row_sums_telescope(seed_nodes in proptest::collection::vec(1e-3f64..1.0, 2..40)) {
            let mut nodes = vec![0.0];
            let mut acc = 0.0;
            for s in seed_nodes {
                acc += s;
                nodes.push(acc);
            }
            let mesh = Mesh::from_nodes(nodes).unwrap();
            let qm = assemble_matrix(&mesh, KernelKind::Sqrt).unwrap();
            let r_max = mesh.radius();
            for i in 0..qm.dim() {
                let x = mesh.node(i);
                let sum: f64 = (i..qm.dim()).map(|j| qm.entries()[(i, j)]).sum();
                let exact = (r_max * r_max - x * x).sqrt();
                prop_assert!((sum - exact).abs() <= 1e-13 * exact.max(1.0));
            }
        }

        // triangularity and nonnegativity hold for every assembled matrix
        #[test]
        fn assembled_matrix_shape(seed_nodes in proptest::collection::vec(1e-3f64..1.0, 2..20)) {
            let mut nodes = vec![0.0];
            let mut acc = 0.0;
            for s in seed_nodes {
                acc += s;
                nodes.push(acc);
            }
            let mesh = Mesh::from_nodes(nodes).unwrap();
            for kind in [KernelKind::Sqrt, KernelKind::Log] {
                let qm = assemble_matrix(&mesh, kind).unwrap();
                for i in 0..qm.dim() {
                    for j in 0..qm.dim() {
                        let v = qm.entries()[(i, j)];
                        if j < i {
                            prop_assert_eq!(v, 0.0);
                        } else {
                            prop_assert!(v >= 0.0);
                        }
                    }
                    if kind == KernelKind::Sqrt {
                        prop_assert!(qm.entries()[(i, i)] > 0.0);
                    }
                }
            }
        }
    }
}
