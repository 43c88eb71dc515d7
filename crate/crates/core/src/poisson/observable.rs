use std::sync::Arc;

use crate::coords::{divisor_and_pis, theta_prime_unnormalized, thetas_unnormalized};
use crate::error::{Error, Result};
use crate::weyl::zeros;

use super::tensor::{tensor_at, ChartPoint};

type EvalFn = Arc<dyn Fn(&ChartPoint) -> Result<f64> + Send + Sync>;
type GradFn = Arc<dyn Fn(&ChartPoint) -> Vec<f64> + Send + Sync>;

/// A real function on the `(λ, ρ)` chart, optionally with its gradient in
/// tensor order `ρ_0..ρ_{N-1}, λ_0..λ_{N-1}`.
///
/// Observables are evaluated off the constraint surface by finite
/// differences, so they must not assume `Σ ρ = 1`.
#[derive(Clone)]
pub struct Observable {
    name: String,
    eval: EvalFn,
    grad: Option<GradFn>,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("analytic_gradient", &self.grad.is_some())
            .finish()
    }
}

/// Relative step for central differences.
pub const FD_STEP: f64 = 1e-6;

impl Observable {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            grad: None,
        }
    }

    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&ChartPoint) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn eval(&self, pt: &ChartPoint) -> Result<f64> {
        (self.eval)(pt)
    }

    /// Analytic gradient if one was supplied, else finite differences.
    pub fn gradient(&self, pt: &ChartPoint) -> Result<Vec<f64>> {
        match &self.grad {
            Some(g) => Ok(g(pt)),
            None => self.fd_gradient(pt),
        }
    }

    /// Central differences at steps `h` and `h/2`, combined by Richardson
    /// extrapolation. `GradientFailure` if the two disagree by more than 10%.
    pub fn fd_gradient(&self, pt: &ChartPoint) -> Result<Vec<f64>> {
        let x = pt.coords();
        let n = pt.dim();
        let mut out = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let mut h = FD_STEP * x[i].abs().max(1.0);
            if i < n {
                h = h.min(0.25 * x[i]);
            }
            let d1 = self.central(pt, &x, i, h)?;
            let d2 = self.central(pt, &x, i, 0.5 * h)?;
            let gap = (d1 - d2).abs();
            if gap > 0.1 * d1.abs().max(d2.abs()) && gap > 1e-6 {
                return Err(Error::GradientFailure(i));
            }
            out.push(d2 + (d2 - d1) / 3.0);
        }
        Ok(out)
    }

    fn central(&self, pt: &ChartPoint, x: &[f64], i: usize, h: f64) -> Result<f64> {
        let mut y = x.to_vec();
        y[i] = x[i] + h;
        let up = self.eval(&pt.with_coords(&y))?;
        y[i] = x[i] - h;
        let down = self.eval(&pt.with_coords(&y))?;
        Ok((up - down) / (2.0 * h))
    }

    pub fn lambda(k: usize) -> Self {
        Self::new(format!("lambda_{k}"), move |pt| coord(&pt.lambdas, k))
            .with_gradient(move |pt| unit(2 * pt.dim(), pt.dim() + k))
    }

    pub fn rho(k: usize) -> Self {
        Self::new(format!("rho_{k}"), move |pt| coord(&pt.rhos, k))
            .with_gradient(move |pt| unit(2 * pt.dim(), k))
    }

    /// `Σ λ_k = -p_0`.
    pub fn casimir() -> Self {
        Self::new("sum_lambda", |pt| Ok(pt.lambdas.iter().sum()))
            .with_gradient(|pt| block(pt.dim(), 0.0, 1.0))
    }

    /// `p_0 = -Σ λ_k`, the `λ^{N-1}` coefficient of `p`.
    pub fn p0() -> Self {
        Self::new("p0", |pt| Ok(-pt.lambdas.iter().sum::<f64>()))
            .with_gradient(|pt| block(pt.dim(), 0.0, -1.0))
    }

    /// `q_0 = Σ ρ_k`.
    pub fn q0() -> Self {
        Self::new("q0", |pt| Ok(pt.rhos.iter().sum())).with_gradient(|pt| block(pt.dim(), 1.0, 0.0))
    }

    pub fn log_q0() -> Self {
        Self::new("log_q0", |pt| Ok(pt.rhos.iter().sum::<f64>().ln())).with_gradient(|pt| {
            let q0: f64 = pt.rhos.iter().sum();
            block(pt.dim(), 1.0 / q0, 0.0)
        })
    }

    /// `w(z)` at a real `z` off the spectrum.
    pub fn weyl_at(z: f64) -> Self {
        Self::new(format!("w({z})"), move |pt| {
            if let Some(&l) = pt.lambdas.iter().find(|&&l| l == z) {
                return Err(Error::AtPole(l));
            }
            Ok(pt
                .lambdas
                .iter()
                .zip(&pt.rhos)
                .map(|(&l, &r)| r / (l - z))
                .sum())
        })
        .with_gradient(move |pt| {
            let n = pt.dim();
            let mut g = vec![0.0; 2 * n];
            for k in 0..n {
                let d = pt.lambdas[k] - z;
                g[k] = 1.0 / d;
                g[n + k] = -pt.rhos[k] / (d * d);
            }
            g
        })
    }

    /// Moment `s_m = Σ ρ_k λ_k^m`.
    pub fn moment(m: u32) -> Self {
        Self::new(format!("s_{m}"), move |pt| {
            Ok(pt
                .lambdas
                .iter()
                .zip(&pt.rhos)
                .map(|(&l, &r)| r * l.powi(m as i32))
                .sum())
        })
        .with_gradient(move |pt| {
            let n = pt.dim();
            let mut g = vec![0.0; 2 * n];
            for k in 0..n {
                let l = pt.lambdas[k];
                g[k] = l.powi(m as i32);
                g[n + k] = if m == 0 {
                    0.0
                } else {
                    m as f64 * pt.rhos[k] * l.powi(m as i32 - 1)
                };
            }
            g
        })
    }

    /// `v_0 = s_1 / s_0`, the first diagonal entry of `L`.
    pub fn v0() -> Self {
        Self::new("v0", |pt| {
            let (s0, s1, _) = low_moments(pt);
            Ok(s1 / s0)
        })
    }

    /// `c_0 = sqrt(s_2/s_0 - (s_1/s_0)^2)`, the first off-diagonal entry.
    pub fn c0() -> Self {
        Self::new("c0", |pt| {
            let (s0, s1, s2) = low_moments(pt);
            let v = s1 / s0;
            Ok((s2 / s0 - v * v).sqrt())
        })
    }

    /// Angle `θ_k`, `1 ≤ k ≤ N-1`.
    pub fn theta(k: usize) -> Self {
        Self::new(format!("theta_{k}"), move |pt| {
            let t = thetas_unnormalized(&pt.lambdas, &pt.rhos);
            coord(&t, k.wrapping_sub(1))
        })
    }

    /// Exponential angle `θ'_k`, `1 ≤ k ≤ N-1`.
    pub fn theta_prime(k: usize) -> Self {
        Self::new(format!("theta_prime_{k}"), move |pt| {
            let t = theta_prime_unnormalized(&pt.weyl()?)?;
            coord(&t, k.wrapping_sub(1))
        })
    }

    /// Divisor point `γ_k`, `1 ≤ k ≤ N-1`.
    pub fn gamma(k: usize) -> Self {
        Self::new(format!("gamma_{k}"), move |pt| {
            coord(&zeros(&pt.weyl()?)?.gammas, k.wrapping_sub(1))
        })
    }

    /// Quasimomentum `π_k`, `1 ≤ k ≤ N-1`.
    pub fn pi(k: usize) -> Self {
        Self::new(format!("pi_{k}"), move |pt| {
            let (_, pis) = divisor_and_pis(&pt.weyl()?)?;
            coord(&pis, k.wrapping_sub(1))
        })
    }

    /// Residue `ρ'_k` of the dual function `-1/w` at `γ_k`, equal to
    /// `1 / w'(γ_k)`.
    pub fn rho_dual(k: usize) -> Self {
        Self::new(format!("rho_dual_{k}"), move |pt| {
            let w = pt.weyl()?;
            let g = coord(&zeros(&w)?.gammas, k.wrapping_sub(1))?;
            Ok(1.0 / w.derivative_real(g))
        })
    }
}

fn coord(xs: &[f64], k: usize) -> Result<f64> {
    xs.get(k)
        .copied()
        .ok_or_else(|| Error::IndexOutOfRange(format!("index {k} with {} entries", xs.len())))
}

fn unit(len: usize, i: usize) -> Vec<f64> {
    let mut g = vec![0.0; len];
    if i < len {
        g[i] = 1.0;
    }
    g
}

fn block(n: usize, rho: f64, lambda: f64) -> Vec<f64> {
    let mut g = vec![rho; 2 * n];
    g[n..].iter_mut().for_each(|x| *x = lambda);
    g
}

fn low_moments(pt: &ChartPoint) -> (f64, f64, f64) {
    pt.lambdas
        .iter()
        .zip(&pt.rhos)
        .fold((0.0, 0.0, 0.0), |(a, b, c), (&l, &r)| {
            (a + r, b + r * l, c + r * l * l)
        })
}

/// `{F, G} = ∇F · J ∇G`.
pub fn bracket(f: &Observable, g: &Observable, pt: &ChartPoint) -> Result<f64> {
    let j = tensor_at(pt);
    Ok(j.contract(&f.gradient(pt)?, &g.gradient(pt)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::tensor::Chart;

    fn e1() -> ChartPoint {
        ChartPoint::new(vec![0.0, 2.0], vec![0.5, 0.5], Chart::Restricted).unwrap()
    }

    #[test]
    fn coordinate_brackets() {
        let pt = e1();
        assert_eq!(
            bracket(&Observable::lambda(0), &Observable::lambda(1), &pt).unwrap(),
            0.0
        );
        assert_eq!(
            bracket(&Observable::casimir(), &Observable::rho(0), &pt).unwrap(),
            0.0
        );
        let b = bracket(&Observable::rho(1), &Observable::lambda(1), &pt).unwrap();
        assert!((b - 0.25).abs() < 1e-15);
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let pt =
            ChartPoint::new(vec![-1.0, 0.4, 2.0], vec![0.3, 0.2, 0.5], Chart::Restricted).unwrap();
        for obs in [
            Observable::lambda(2),
            Observable::rho(1),
            Observable::casimir(),
            Observable::q0(),
            Observable::log_q0(),
            Observable::weyl_at(-1.7),
            Observable::moment(3),
        ] {
            let a = obs.gradient(&pt).unwrap();
            let d = obs.fd_gradient(&pt).unwrap();
            for (x, y) in a.iter().zip(&d) {
                assert!(
                    (x - y).abs() <= 1e-6 * x.abs().max(1.0),
                    "{}: {x} vs {y}",
                    obs.name()
                );
            }
        }
    }

    #[test]
    fn missing_index_is_reported() {
        assert!(matches!(
            Observable::theta(5).eval(&e1()),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(matches!(
            Observable::theta(0).eval(&e1()),
            Err(Error::IndexOutOfRange(_))
        ));
    }
}
