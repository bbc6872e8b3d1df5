//! Dense Laplacian `L = D − A`, a cyclic Jacobi eigensolver and pivoted rank.

use super::TopologyError;
use crate::graph::{NodeId, PropertyGraph};

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    order: usize,
    entries: Vec<f64>,
    node_order: Vec<NodeId>,
}

impl LaplacianMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn node_order(&self) -> &[NodeId] {
        &self.node_order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    /// `xᵀ L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.order, "signal length must match the node count");
        (0..self.order)
            .map(|i| x[i] * self.row(i).iter().zip(x).map(|(l, xj)| l * xj).sum::<f64>())
            .sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, TopologyError> {
        symmetric_eigenvalues(&self.entries, self.order)
    }

    /// Rank by Gaussian elimination with full pivoting; pivots with
    /// magnitude at or below `threshold` count as zero.
    pub fn rank(&self, threshold: f64) -> usize {
        matrix_rank(&self.entries, self.order, threshold)
    }
}

/// Laplacian over the graph's distinct adjacent pairs, rows in node order.
pub fn laplacian(g: &PropertyGraph) -> LaplacianMatrix {
    let n = g.nodes.len();
    let mut entries = vec![0.0; n * n];
    for (i, j) in g.simple_edges() {
        entries[i * n + j] = -1.0;
        entries[j * n + i] = -1.0;
        entries[i * n + i] += 1.0;
        entries[j * n + j] += 1.0;
    }
    LaplacianMatrix {
        order: n,
        entries,
        node_order: g.nodes.iter().map(|v| v.id).collect(),
    }
}

/// Eigenvalues of a symmetric `n×n` row-major matrix by cyclic Jacobi
/// rotations, ascending.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Result<Vec<f64>, TopologyError> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let frobenius = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = 1e-14 * frobenius;
    for _ in 0..MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            let mut diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            diag.sort_by(f64::total_cmp);
            return Ok(diag);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    Err(TopologyError::EigensolveFailure { sweeps: MAX_SWEEPS })
}

pub fn matrix_rank(matrix: &[f64], n: usize, threshold: f64) -> usize {
    let mut a = matrix.to_vec();
    let mut rank = 0;
    for step in 0..n {
        let mut best = (step, step, 0.0f64);
        for r in step..n {
            for c in step..n {
                let v = a[r * n + c].abs();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= threshold {
            break;
        }
        let (pr, pc, _) = best;
        if pr != step {
            for c in 0..n {
                a.swap(step * n + c, pr * n + c);
            }
        }
        if pc != step {
            for r in 0..n {
                a.swap(r * n + step, r * n + pc);
            }
        }
        let pivot = a[step * n + step];
        for r in (step + 1)..n {
            let factor = a[r * n + step] / pivot;
            if factor != 0.0 {
                for c in step..n {
                    a[r * n + c] -= factor * a[step * n + c];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Multiplicity of the zero eigenvalue: eigenvalues below
/// `eps · max(1, λ_max)` are counted as zero.
pub fn component_count_spectral(l: &LaplacianMatrix, eps: f64) -> Result<usize, TopologyError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(TopologyError::InvalidThreshold(eps));
    }
    let values = l.eigenvalues()?;
    let lambda_max = values.last().copied().unwrap_or(0.0);
    let cutoff = eps * lambda_max.max(1.0);
    Ok(values.iter().filter(|&&v| v < cutoff).count())
}
