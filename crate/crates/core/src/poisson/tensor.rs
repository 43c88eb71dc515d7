use num_dual::{Dual64, DualNum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::check_poles_and_residues;
use crate::weyl::{RationalHerglotz, NORMALIZATION_TOL};

/// Which bracket a point is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// All rational Herglotz functions of degree `N`, bracket (ps).
    #[serde(rename = "UnrestrictedRatN")]
    Unrestricted,
    /// The leaf `Σ ρ = 1` with the Dirac-restricted bracket.
    #[serde(rename = "RestrictedRatNPrime")]
    Restricted,
}

/// A point in the `(λ, ρ)` chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub lambdas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub chart: Chart,
}

/// Smallest weight below which a point counts as near the chart boundary.
pub const BOUNDARY_RHO: f64 = 1e-8;

impl ChartPoint {
    pub fn new(lambdas: Vec<f64>, rhos: Vec<f64>, chart: Chart) -> Result<Self> {
        check_poles_and_residues(&lambdas, &rhos)?;
        if chart == Chart::Restricted {
            let total: f64 = rhos.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized(total));
            }
        }
        Ok(Self {
            lambdas,
            rhos,
            chart,
        })
    }

    pub fn from_weyl(w: &RationalHerglotz, chart: Chart) -> Result<Self> {
        Self::new(w.poles().to_vec(), w.residues().to_vec(), chart)
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Coordinates in tensor order `ρ_0..ρ_{N-1}, λ_0..λ_{N-1}`.
    pub fn coords(&self) -> Vec<f64> {
        self.rhos.iter().chain(&self.lambdas).copied().collect()
    }

    /// Same chart with new coordinates. No validation: finite-difference
    /// stencils leave the constraint surface.
    pub(crate) fn with_coords(&self, x: &[f64]) -> Self {
        let n = self.dim();
        Self {
            rhos: x[..n].to_vec(),
            lambdas: x[n..].to_vec(),
            chart: self.chart,
        }
    }

    /// `w(z) = Σ ρ_k / (λ_k - z)`, normalized or not.
    pub fn weyl(&self) -> Result<RationalHerglotz> {
        RationalHerglotz::new(self.lambdas.clone(), self.rhos.clone())
    }

    pub fn near_boundary(&self) -> bool {
        self.rhos.iter().any(|&r| r < BOUNDARY_RHO)
    }
}

/// Antisymmetric `2N × 2N` matrix of coordinate brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonTensor {
    n: usize,
    j: Vec<f64>,
}

impl PoissonTensor {
    /// Number of coordinates, `2N`.
    pub fn size(&self) -> usize {
        2 * self.n
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.j[i * self.size() + k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.j.chunks(self.size()).map(<[f64]>::to_vec).collect()
    }

    /// `J x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.j
            .chunks(self.size())
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `a · J b`.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(self.apply(b)).map(|(x, y)| x * y).sum()
    }

    pub(crate) fn from_entries(n: usize, j: Vec<f64>) -> Self {
        Self { n, j }
    }

    /// `max |J_ik + J_ki|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let m = self.size();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for k in 0..m {
                worst = worst.max((self.get(i, k) + self.get(k, i)).abs());
            }
        }
        worst
    }
}

/// Closed-form tensor entries, generic so that partial derivatives come
/// from dual numbers.
fn entries<D: DualNum<Primitive = f64> + Copy>(lam: &[D], rho: &[D], chart: Chart) -> Vec<D> {
    entries_with(lam, rho, chart, 2.0)
}

/// `rr` is the coupling of the restricted correction `-rr·ρ_kρ_n(S_k - S_n)`.
fn entries_with<D: DualNum<Primitive = f64> + Copy>(
    lam: &[D],
    rho: &[D],
    chart: Chart,
    rr: f64,
) -> Vec<D> {
    let n = lam.len();
    let m = 2 * n;
    let zero = D::from(0.0);
    let mut j = vec![zero; m * m];
    // S_k = Σ_{s≠k} ρ_s / (λ_s - λ_k)
    let s: Vec<D> = (0..n)
        .map(|k| {
            (0..n)
                .filter(|&t| t != k)
                .fold(zero, |acc, t| acc + rho[t] / (lam[t] - lam[k]))
        })
        .collect();

    for k in 0..n {
        for t in (k + 1)..n {
            let mut e = rho[k] * rho[t] * 2.0 / (lam[t] - lam[k]);
            if chart == Chart::Restricted {
                e -= rho[k] * rho[t] * rr * (s[k] - s[t]);
            }
            j[k * m + t] = e;
            j[t * m + k] = -e;
        }
        for t in 0..n {
            let mut e = if k == t { rho[k] } else { zero };
            if chart == Chart::Restricted {
                e -= rho[k] * rho[t];
            }
            j[k * m + n + t] = e;
            j[(n + t) * m + k] = -e;
        }
    }
    j
}

/// The bracket tensor in `(ρ, λ)` coordinates at `pt`.
pub fn tensor_at(pt: &ChartPoint) -> PoissonTensor {
    PoissonTensor::from_entries(pt.dim(), entries(&pt.lambdas, &pt.rhos, pt.chart))
}

/// `∂_l J` for every coordinate `l`, by forward-mode differentiation.
fn tensor_partials(pt: &ChartPoint, rr: f64) -> Vec<Vec<f64>> {
    let x = pt.coords();
    let n = pt.dim();
    (0..x.len())
        .map(|l| {
            let seeded: Vec<Dual64> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| Dual64::new(v, if i == l { 1.0 } else { 0.0 }))
                .collect();
            entries_with(&seeded[n..], &seeded[..n], pt.chart, rr)
                .iter()
                .map(|d| d.eps)
                .collect()
        })
        .collect()
}

/// `max |Σ_l (J_il ∂_l J_jk + J_jl ∂_l J_ki + J_kl ∂_l J_ij)|` over all
/// triples, with exact partials of the closed-form entries.
pub fn jacobi_identity_residual(pt: &ChartPoint) -> f64 {
    jacobi_residual_with(pt, 2.0)
}

fn jacobi_residual_with(pt: &ChartPoint, rr: f64) -> f64 {
    let j =
        PoissonTensor::from_entries(pt.dim(), entries_with(&pt.lambdas, &pt.rhos, pt.chart, rr));
    let d = tensor_partials(pt, rr);
    let m = j.size();
    let dj = |l: usize, a: usize, b: usize| d[l][a * m + b];
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                let r: f64 = (0..m)
                    .map(|l| {
                        j.get(a, l) * dj(l, b, c)
                            + j.get(b, l) * dj(l, c, a)
                            + j.get(c, l) * dj(l, a, b)
                    })
                    .sum();
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1(chart: Chart) -> ChartPoint {
        ChartPoint::new(vec![0.0, 2.0], vec![0.5, 0.5], chart).unwrap()
    }

    #[test]
    fn e1_entries() {
        // Index layout: ρ_0, ρ_1, λ_0, λ_1.
        let r = tensor_at(&e1(Chart::Restricted));
        assert!((r.get(0, 3) + 0.25).abs() < 1e-15);
        assert!((r.get(1, 3) - 0.25).abs() < 1e-15);
        assert_eq!(r.get(2, 3), 0.0);
        let u = tensor_at(&e1(Chart::Unrestricted));
        assert_eq!(u.get(0, 3), 0.0);
        assert!((u.get(1, 3) - 0.5).abs() < 1e-15);
        // {ρ_0, ρ_1} = 2·¼/2.
        assert!((u.get(0, 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn antisymmetric_and_jacobi() {
        let pts = [
            ChartPoint::new(vec![-1.0, 0.3, 2.0], vec![0.2, 0.5, 0.3], Chart::Restricted).unwrap(),
            ChartPoint::new(
                vec![-1.0, 0.3, 2.0, 2.5],
                vec![0.2, 0.5, 0.3, 0.9],
                Chart::Unrestricted,
            )
            .unwrap(),
        ];
        for pt in &pts {
            let j = tensor_at(pt);
            assert_eq!(j.antisymmetry_residual(), 0.0);
            assert!(
                jacobi_identity_residual(pt) < 1e-12,
                "{}",
                jacobi_identity_residual(pt)
            );
        }
    }

    #[test]
    fn wrong_coupling_breaks_jacobi() {
        let pt =
            ChartPoint::new(vec![-1.0, 0.3, 2.0], vec![0.2, 0.5, 0.3], Chart::Restricted).unwrap();
        assert!(
            jacobi_residual_with(&pt, 3.0) > 1e-3,
            "{}",
            jacobi_residual_with(&pt, 3.0)
        );
    }

    #[test]
    fn restricted_point_requires_normalization() {
        assert!(matches!(
            ChartPoint::new(vec![0.0, 2.0], vec![0.5, 1.0 / 3.0], Chart::Restricted),
            Err(Error::NotNormalized(_))
        ));
    }
}
