//! Signed quadrature-error estimates for the triangular solver.
//!
//! Holding the unknown piecewise constant leaves, on every interval, the
//! residual integral `Δε = k′(ξ) ∫ r (r − r_lo)/√(r² − x²) dr`, which has
//! the closed form implemented by [`delta_eps`]. Summing a row's interval
//! errors gives the per-equation residual `ε_i`, and propagating `−ε` back
//! through the same triangular system yields *signed* node errors
//! `Δk ≈ k_true − k_numeric`: adding them to the computed solution refines
//! it, and replacing signs by absolute values (plus measurement levels
//! `δ_i`) gives guaranteed-overstated bounds.
//!
//! The derivative `k′(ξ_j)` is unknowable; the forward difference of the
//! computed solution stands in for it.

use nalgebra::DMatrix;

use crate::mesh::Mesh;
use crate::quadrature::{assemble_matrix, KernelKind};
use crate::solvers::SolutionVector;
use crate::{AbelError, Result};

/// Interval errors, per-equation residuals, and signed node errors for one
/// triangular solve.
#[derive(Debug, Clone)]
pub struct ErrorEstimate {
    interval_errors: DMatrix<f64>,
    row_sums: Vec<f64>,
    node_errors: Vec<f64>,
    derivative_proxy: Vec<f64>,
}

impl ErrorEstimate {
    /// Upper-triangular `(n−1) × (n−1)` matrix of interval errors `Δε_ij`.
    pub fn interval_errors(&self) -> &DMatrix<f64> {
        &self.interval_errors
    }

    /// Row sums `ε_i = Σ_{j≥i} Δε_ij` (exact by construction).
    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// Signed node errors `Δk_j ≈ k_true(r_j) − k_j`, one per mesh node;
    /// the boundary entry repeats the last solved one.
    pub fn node_errors(&self) -> &[f64] {
        &self.node_errors
    }

    /// The forward-difference derivative proxy `k′(ξ_j)`, one per interval.
    pub fn derivative_proxy(&self) -> &[f64] {
        &self.derivative_proxy
    }
}

/// Closed form of the interval quadrature error
/// `kprime · ∫_{r_lo}^{r_hi} r (r − r_lo)/√(r² − x²) dr`:
///
/// ```text
/// (kprime/2) [ (r_hi − 2 r_lo) √(r_hi² − x²) + r_lo √(r_lo² − x²)
///              + x² ln((r_hi + √(r_hi² − x²)) / (r_lo + √(r_lo² − x²))) ]
/// ```
///
/// Requires `0 ≤ x ≤ r_lo ≤ r_hi`. The `x = 0` limit drops the log term.
pub fn delta_eps(x: f64, r_lo: f64, r_hi: f64, kprime: f64) -> Result<f64> {
    if !x.is_finite() || !r_lo.is_finite() || !r_hi.is_finite() || x < 0.0 || r_lo > r_hi {
        return Err(AbelError::InvalidArgument(format!(
            "expected finite 0 ≤ x ≤ r_lo ≤ r_hi, got x = {x}, r_lo = {r_lo}, r_hi = {r_hi}"
        )));
    }
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
    let dr = r_hi - r_lo;
    let ds = (r_hi * r_hi - r_lo * r_lo) / (s_hi + s_lo);
    // (r_hi − 2 r_lo) s_hi + r_lo s_lo regrouped as Δr·s_hi − r_lo·Δs to
    // keep the small-interval cancellation in first-order terms only
    let ln_term = if x == 0.0 {
        0.0
    } else {
        x * x * ((dr + ds) / (r_lo + s_lo)).ln_1p()
    };
    Ok(kprime / 2.0 * (dr * s_hi - r_lo * ds + ln_term))
}

/// Forward-difference proxy for `k′(ξ_j)` on each interval, using the
/// boundary value of `k` for the last one.
pub fn kprime_proxy(mesh: &Mesh, k: &SolutionVector) -> Result<Vec<f64>> {
    let n = mesh.len();
    if k.len() != n {
        return Err(AbelError::InvalidArgument(format!(
            "{} solution values for a mesh of {} nodes",
            k.len(),
            n
        )));
    }
    let kv = k.values();
    Ok((0..n - 1)
        .map(|j| (kv[j + 1] - kv[j]) / mesh.step(j))
        .collect())
}

/// Build the interval errors for a computed solution and propagate them
/// back through the triangular system.
///
/// The node errors solve `A·Δk = −ε` (back-substitution), which orients
/// them as corrections: `k + Δk ≈ k_true`. The boundary node repeats the
/// last solved error.
pub fn error_recursion(mesh: &Mesh, k: &SolutionVector) -> Result<ErrorEstimate> {
    let n = mesh.len();
    if k.len() != n {
        return Err(AbelError::InvalidArgument(format!(
            "{} solution values for a mesh of {} nodes",
            k.len(),
            n
        )));
    }
    let kp = kprime_proxy(mesh, k)?;
    let nodes = mesh.nodes();
    let m = n - 1;
    let mut de = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            de[(i, j)] = delta_eps(nodes[i], nodes[j], nodes[j + 1], kp[j])?;
        }
    }
    let eps: Vec<f64> = (0..m).map(|i| (i..m).map(|j| de[(i, j)]).sum()).collect();

    let a = assemble_matrix(mesh, KernelKind::Sqrt)?;
    let a = a.entries();
    let mut dk = vec![0.0; n];
    for i in (0..m).rev() {
        let mut acc = -eps[i];
        for j in i + 1..m {
            acc -= a[(i, j)] * dk[j];
        }
        dk[i] = acc / a[(i, i)];
    }
    dk[n - 1] = dk[n - 2];

    Ok(ErrorEstimate {
        interval_errors: de,
        row_sums: eps,
        node_errors: dk,
        derivative_proxy: kp,
    })
}

/// The refined solution `k̂ = k + Δk`.
pub fn refined_solution(k: &SolutionVector, err: &ErrorEstimate) -> Result<SolutionVector> {
    if k.len() != err.node_errors.len() {
        return Err(AbelError::InvalidArgument(format!(
            "solution has {} values but the estimate has {} node errors",
            k.len(),
            err.node_errors.len()
        )));
    }
    let values = k
        .values()
        .iter()
        .zip(&err.node_errors)
        .map(|(&v, &d)| v + d)
        .collect();
    Ok(SolutionVector::new(values, k.endpoint_rule()))
}

/// Overstated absolute error bounds that also account for per-node
/// measurement levels `δ_i ≥ 0`:
///
/// ```text
/// |Δk_{n−2}| = (|Δε_{n−2,n−2}| + δ_{n−2}) / p_{n−2,n−2}
/// |Δk_i|     = (|ε_i| + δ_i + Σ_{j>i} p_ij |Δk_j|) / p_ii
/// ```
///
/// `deltas` must hold one level per mesh node; the boundary one is unused
/// (its equation does not exist), matching the unused boundary source
/// sample.
pub fn noisy_bounds(mesh: &Mesh, err: &ErrorEstimate, deltas: &[f64]) -> Result<Vec<f64>> {
    let n = mesh.len();
    if deltas.len() != n {
        return Err(AbelError::InvalidArgument(format!(
            "{} noise levels for a mesh of {} nodes",
            deltas.len(),
            n
        )));
    }
    if deltas.iter().any(|&d| !(d >= 0.0)) {
        return Err(AbelError::InvalidArgument(
            "noise levels must be nonnegative".into(),
        ));
    }
    if err.row_sums.len() != n - 1 {
        return Err(AbelError::InvalidArgument(format!(
            "estimate dimension {} does not match the mesh",
            err.row_sums.len()
        )));
    }
    let a = assemble_matrix(mesh, KernelKind::Sqrt)?;
    let a = a.entries();
    let m = n - 1;
    let mut b = vec![0.0; n];
    b[m - 1] = (err.interval_errors[(m - 1, m - 1)].abs() + deltas[m - 1]) / a[(m - 1, m - 1)];
    for i in (0..m - 1).rev() {
        let mut acc = err.row_sums[i].abs() + deltas[i];
        for j in i + 1..m {
            acc += a[(i, j)] * b[j];
        }
        b[i] = acc / a[(i, i)];
    }
    b[n - 1] = b[m - 1];
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{solve_first, EndpointRule, SourceSamples};
    use crate::synthetic::{oracle_integral, Phantom, SingularIntegrand};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn delta_eps_zero_slope() {
        assert_eq!(delta_eps(1.0, 2.0, 3.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn delta_eps_axis_collapses_to_square() {
        // at x = 0 the expression reduces to (kprime/2)(b − a)²
        let v = delta_eps(0.0, 2.0, 3.5, 2.0).unwrap();
        assert_relative_eq!(v, 1.5 * 1.5, max_relative = 1e-13);
        // r_lo = 0 included
        let v = delta_eps(0.0, 0.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(v, 0.125, max_relative = 1e-13);
    }

    #[test]
    fn delta_eps_matches_integral_oracle() {
        let closed = delta_eps(3.0, 4.0, 5.0, 1.0).unwrap();
        let oracle = oracle_integral(
            &SingularIntegrand::ErrorKernel { x: 3.0, r_lo: 4.0 },
            4.0,
            5.0,
            1e-12,
        )
        .unwrap();
        assert!((closed - oracle).abs() < 1e-10);
    }

    #[test]
    fn delta_eps_rejects_interior_singularity() {
        assert!(matches!(
            delta_eps(4.0, 3.0, 5.0, 1.0),
            Err(AbelError::DomainError(_))
        ));
    }

    #[test]
    fn kprime_proxy_examples() {
        let mesh = Mesh::from_nodes(vec![0.0, 1.0, 3.0]).unwrap();
        let k = SolutionVector::new(vec![1.0, 2.0, 4.0], EndpointRule::CopyPrevious);
        assert_eq!(kprime_proxy(&mesh, &k).unwrap(), vec![1.0, 1.0]);

        let kc = SolutionVector::new(vec![5.0, 5.0, 5.0], EndpointRule::CopyPrevious);
        assert_eq!(kprime_proxy(&mesh, &kc).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn constant_solution_has_zero_errors() {
        let mesh = Mesh::uniform(9, 1.0).unwrap();
        let k = SolutionVector::new(vec![2.0; 9], EndpointRule::CopyPrevious);
        let err = error_recursion(&mesh, &k).unwrap();
        assert!(err.node_errors().iter().all(|&d| d == 0.0));
        let refined = refined_solution(&k, &err).unwrap();
        assert_eq!(refined.values(), k.values());
    }

    #[test]
    fn three_node_recursion_unrolls() {
        let mesh = Mesh::from_nodes(vec![0.0, 0.4, 1.0]).unwrap();
        let k = SolutionVector::new(vec![1.0, 0.7, 0.1], EndpointRule::CopyPrevious);
        let err = error_recursion(&mesh, &k).unwrap();
        let a = assemble_matrix(&mesh, KernelKind::Sqrt).unwrap();
        let a = a.entries();
        let de = err.interval_errors();
        let dk2 = -de[(1, 1)] / a[(1, 1)];
        let dk1 = (-(de[(0, 0)] + de[(0, 1)]) - a[(0, 1)] * dk2) / a[(0, 0)];
        assert_relative_eq!(err.node_errors()[1], dk2, max_relative = 1e-14);
        assert_relative_eq!(err.node_errors()[0], dk1, max_relative = 1e-14);
        assert_eq!(err.node_errors()[2], err.node_errors()[1]);
    }

    #[test]
    fn signs_match_true_error_on_smooth_pair() {
        let n = 51;
        let mesh = Mesh::uniform(n, 1.0).unwrap();
        let ph = Phantom::Semicircle { radius: 1.0 };
        let q =
            SourceSamples::new(mesh.nodes().iter().map(|&x| ph.q(x).unwrap()).collect()).unwrap();
        let k = solve_first(&mesh, &q, EndpointRule::ExtrapolateLinear).unwrap();
        let err = error_recursion(&mesh, &k).unwrap();
        let matches = (1..n - 1)
            .filter(|&j| {
                let truth = ph.k(mesh.node(j)).unwrap() - k.values()[j];
                truth.signum() == err.node_errors()[j].signum()
            })
            .count();
        assert!(
            matches as f64 >= 0.8 * (n - 2) as f64,
            "sign matches {matches}/{}",
            n - 2
        );
    }

    #[test]
    fn refinement_improves_smooth_pair() {
        let ph = Phantom::Parabolic {
            k0: 1.0,
            radius: 1.0,
        };
        for n in [51usize, 101, 201] {
            let mesh = Mesh::uniform(n, 1.0).unwrap();
            let q = SourceSamples::new(mesh.nodes().iter().map(|&x| ph.q(x).unwrap()).collect())
                .unwrap();
            let k = solve_first(&mesh, &q, EndpointRule::ExtrapolateLinear).unwrap();
            let err = error_recursion(&mesh, &k).unwrap();
            let refined = refined_solution(&k, &err).unwrap();
            let max_err = |v: &[f64]| {
                v.iter()
                    .enumerate()
                    .map(|(j, &kj)| (kj - ph.k(mesh.node(j)).unwrap()).abs())
                    .fold(0.0f64, f64::max)
            };
            assert!(
                max_err(refined.values()) < max_err(k.values()),
                "no improvement at n = {n}"
            );
        }
    }

    #[test]
    fn noisy_bounds_three_node_unroll() {
        let mesh = Mesh::from_nodes(vec![0.0, 0.4, 1.0]).unwrap();
        let k = SolutionVector::new(vec![1.0, 0.7, 0.1], EndpointRule::CopyPrevious);
        let err = error_recursion(&mesh, &k).unwrap();
        let a = assemble_matrix(&mesh, KernelKind::Sqrt).unwrap();
        let deltas = [0.3, 0.2, 0.0];
        let b = noisy_bounds(&mesh, &err, &deltas).unwrap();
        let expected_last = (err.interval_errors()[(1, 1)].abs() + 0.2) / a.entries()[(1, 1)];
        assert_relative_eq!(b[1], expected_last, max_relative = 1e-14);
        assert_eq!(b[2], b[1]);
        assert!(b.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn noisy_bounds_reject_negative_delta() {
        let mesh = Mesh::uniform(3, 1.0).unwrap();
        let k = SolutionVector::new(vec![1.0, 1.0, 1.0], EndpointRule::CopyPrevious);
        let err = error_recursion(&mesh, &k).unwrap();
        assert!(matches!(
            noisy_bounds(&mesh, &err, &[0.0, -1.0, 0.0]),
            Err(AbelError::InvalidArgument(_))
        ));
    }

    proptest! {
        // the back-propagated node errors solve the triangular system
        #[test]
        fn recursion_solves_triangular_system(
            steps in proptest::collection::vec(0.05f64..1.0, 3..20),
            kvals in proptest::collection::vec(-2.0f64..2.0, 21),
        ) {
            let mut nodes = vec![0.0];
            let mut acc = 0.0;
            for s in &steps {
                acc += s;
                nodes.push(acc);
            }
            let n = nodes.len();
            let mesh = Mesh::from_nodes(nodes).unwrap();
            let k = SolutionVector::new(kvals[..n].to_vec(), EndpointRule::CopyPrevious);
            let err = error_recursion(&mesh, &k).unwrap();
            let a = assemble_matrix(&mesh, KernelKind::Sqrt).unwrap();
            let eps_max = err.row_sums().iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-30);
            for i in 0..n - 1 {
                let row: f64 = (i..n - 1).map(|j| a.entries()[(i, j)] * err.node_errors()[j]).sum();
                prop_assert!((row + err.row_sums()[i]).abs() <= 1e-12 * eps_max);
            }
        }

        // with zero measurement levels the bounds dominate the signed errors,
        // and raising any level never lowers any bound
        #[test]
        fn bounds_dominate_and_are_monotone(
            steps in proptest::collection::vec(0.05f64..1.0, 3..15),
            kvals in proptest::collection::vec(-2.0f64..2.0, 16),
            bump in 1e-3f64..1.0,
            bump_at in 0usize..15,
        ) {
            let mut nodes = vec![0.0];
            let mut acc = 0.0;
            for s in &steps {
                acc += s;
                nodes.push(acc);
            }
            let n = nodes.len();
            let mesh = Mesh::from_nodes(nodes).unwrap();
            let k = SolutionVector::new(kvals[..n].to_vec(), EndpointRule::CopyPrevious);
            let err = error_recursion(&mesh, &k).unwrap();
            let zero = vec![0.0; n];
            let b0 = noisy_bounds(&mesh, &err, &zero).unwrap();
            for (b, dk) in b0.iter().zip(err.node_errors()) {
                prop_assert!(*b >= dk.abs() - 1e-12 * b.max(1.0));
            }
            let mut bumped = zero.clone();
            bumped[bump_at % n] = bump;
            let b1 = noisy_bounds(&mesh, &err, &bumped).unwrap();
            for (after, before) in b1.iter().zip(&b0) {
                prop_assert!(after >= &(before - 1e-12 * before.max(1.0)));
            }
        }
    }
}
