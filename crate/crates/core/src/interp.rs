//! Barycentric Lagrange interpolation on distinct real nodes.

use crate::poly;

#[derive(Debug, Clone)]
pub struct Barycentric {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl Barycentric {
    /// Weights are `1 / Π_{j≠k} (x_k - x_j)`.
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), values.len());
        let weights = (0..nodes.len())
            .map(|k| 1.0 / poly::node_derivative(&nodes, k))
            .collect();
        Self {
            nodes,
            weights,
            values,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// First (modified Lagrange) form; exact at the nodes.
    pub fn eval(&self, x: f64) -> f64 {
        if let Some(k) = self.nodes.iter().position(|&t| t == x) {
            return self.values[k];
        }
        let ell: f64 = self.nodes.iter().map(|&t| x - t).product();
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((&t, &w), &f)| w * f / (x - t))
            .sum();
        ell * sum
    }

    /// Monomial coefficients (constant first) of the interpolant.
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        for k in 0..n {
            let others: Vec<f64> = self
                .nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &t)| t)
                .collect();
            let basis = poly::from_roots(&others);
            let scale = self.weights[k] * self.values[k];
            for (o, b) in out.iter_mut().zip(&basis) {
                *o += scale * b;
            }
        }
        out
    }

    /// Leading (degree `n-1`) coefficient, the divided difference over all nodes.
    pub fn leading(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(w, f)| w * f)
            .sum()
    }
}

/// Chebyshev points of the second kind on `[a, b]`, ascending.
pub fn chebyshev_nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n)
        .map(|j| {
            let t = -(std::f64::consts::PI * j as f64 / (n - 1) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect()
}
