//! Shared node grids for the radial variable `r` and the chord variable `x`.
//!
//! Both quadrature methods use *coinciding* meshes: the same strictly
//! increasing nodes `0 = r₀ < r₁ < … < r_{n−1} = R` serve as radii and as
//! chord offsets. Meshes may be nonuniform; validity is enforced at
//! construction so every downstream routine can rely on it.

use crate::{AbelError, Result};

/// A validated, strictly increasing node grid starting at zero.
///
/// Invariants (constructor-enforced):
/// * at least 3 nodes,
/// * `nodes[0] == 0`,
/// * strictly increasing, all values finite,
/// * hence `radius() == nodes[n−1] > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
}

impl Mesh {
    /// Uniform mesh with `n` nodes on `[0, radius]`.
    pub fn uniform(n: usize, radius: f64) -> Result<Self> {
        if n < 3 {
            return Err(AbelError::InvalidArgument(format!(
                "mesh needs at least 3 nodes, got {n}"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(AbelError::InvalidArgument(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        let step = radius / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|j| j as f64 * step).collect();
        // pin the last node so radius() is exact; full validation catches
        // pathological radii whose steps underflow
        nodes[n - 1] = radius;
        Self::from_nodes(nodes)
    }

    /// Mesh from an explicit node list.
    ///
    /// Duplicate nodes are rejected outright: exact strict inequality is
    /// required, with no epsilon merging.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(AbelError::InvalidMesh(format!(
                "need at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(AbelError::InvalidMesh(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        for w in nodes.windows(2) {
            if !w[1].is_finite() || !(w[1] > w[0]) {
                return Err(AbelError::InvalidMesh(format!(
                    "nodes must be finite and strictly increasing, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// Number of nodes `n`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `true` is impossible for a valid mesh; provided for API completeness.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The node values.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The node at index `j`.
    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// The boundary radius `R` (last node).
    pub fn radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Step `h_j = nodes[j+1] − nodes[j]`.
    pub fn step(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }
}
