//! Canonical charts on the space of normalized Weyl functions.
//!
//! * action–angle `(λ, θ)` with `θ_k = log((-1)^k q(λ_k) / q(λ_0))`;
//! * the exponential angles `θ'`, built from the Krein shift;
//! * divisor–quasimomentum `(γ, π)` with `π_k = log((-1)^{N+k} p(γ_k))`,
//!   plus the Casimir `Σ λ_k` that fixes the leaf.
//!
//! Every sign is tracked explicitly, so all coordinates are real.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Barycentric;
use crate::poly;
use crate::spectral::{interlaces, strictly_increasing};
use crate::weyl::{zeros, RationalHerglotz};

/// Nodes of the trapezoid rule in [`abel_period_check`].
pub const ABEL_NODES: usize = 256;

/// Full spectrum plus the angles `θ_1..θ_{N-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionAngle {
    pub lambdas: Vec<f64>,
    pub thetas: Vec<f64>,
}

/// Divisor, quasimomenta and the Casimir `Σ λ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDivisorQuasimomentum")]
pub struct DivisorQuasimomentum {
    pub gammas: Vec<f64>,
    pub pis: Vec<f64>,
    pub casimir: f64,
}

#[derive(Deserialize)]
struct RawDivisorQuasimomentum {
    gammas: Vec<f64>,
    pis: Vec<f64>,
    casimir: f64,
}

impl TryFrom<RawDivisorQuasimomentum> for DivisorQuasimomentum {
    type Error = Error;

    fn try_from(raw: RawDivisorQuasimomentum) -> Result<Self> {
        DivisorQuasimomentum::new(raw.gammas, raw.pis, raw.casimir)
    }
}

impl DivisorQuasimomentum {
    pub fn new(gammas: Vec<f64>, pis: Vec<f64>, casimir: f64) -> Result<Self> {
        if gammas.len() != pis.len() {
            return Err(Error::InvalidInput(format!(
                "{} gammas and {} pis",
                gammas.len(),
                pis.len()
            )));
        }
        let finite = gammas.iter().chain(&pis).all(|x| x.is_finite()) && casimir.is_finite();
        if !finite || !strictly_increasing(&gammas) {
            return Err(Error::InvalidInput(
                "gammas must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self {
            gammas,
            pis,
            casimir,
        })
    }

    pub fn dim(&self) -> usize {
        self.gammas.len() + 1
    }
}

/// `Σ_{j≠k} log|x_k - x_j|`, i.e. `log|p'(x_k)|` for `p = Π(λ - x_j)`.
fn log_abs_node_derivative(nodes: &[f64], k: usize) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &x)| (nodes[k] - x).abs().ln())
        .sum()
}

fn require_angles(w: &RationalHerglotz) -> Result<()> {
    if w.dim() < 2 {
        return Err(Error::InvalidInput("angles need N >= 2".into()));
    }
    w.require_normalized()
}

/// Angles `θ_1..θ_{N-1}` of a normalized Weyl function.
///
/// With `q(λ_k) = p'(λ_k) ρ_k` and `sign p'(λ_k) = (-1)^{N-1-k}` the argument
/// of the logarithm is `|p'(λ_k)| ρ_k / (|p'(λ_0)| ρ_0)`.
pub fn theta_from(w: &RationalHerglotz) -> Result<ActionAngle> {
    require_angles(w)?;
    Ok(ActionAngle {
        lambdas: w.poles().to_vec(),
        thetas: thetas_unnormalized(w.poles(), w.residues()),
    })
}

/// The angle formula without the normalization check; `θ` is invariant
/// under rescaling all `ρ` together.
pub(crate) fn thetas_unnormalized(lam: &[f64], rho: &[f64]) -> Vec<f64> {
    let base = rho[0].ln() + log_abs_node_derivative(lam, 0);
    (1..lam.len())
        .map(|k| rho[k].ln() + log_abs_node_derivative(lam, k) - base)
        .collect()
}

/// Inverse of [`theta_from`]; total on `ℝ^{N-1}`.
pub fn w_from_theta(lambdas: &[f64], thetas: &[f64]) -> Result<RationalHerglotz> {
    if lambdas.len() != thetas.len() + 1 || !strictly_increasing(lambdas) {
        return Err(Error::InvalidInput(
            "need N strictly increasing lambdas and N-1 thetas".into(),
        ));
    }
    if thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("thetas must be finite".into()));
    }
    let base = log_abs_node_derivative(lambdas, 0);
    let log_rho: Vec<f64> = (0..lambdas.len())
        .map(|k| {
            let theta = if k == 0 { 0.0 } else { thetas[k - 1] };
            theta + base - log_abs_node_derivative(lambdas, k)
        })
        .collect();
    let top = log_rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_total = top + log_rho.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    let residues = log_rho.iter().map(|l| (l - log_total).exp()).collect();
    RationalHerglotz::new(lambdas.to_vec(), residues)
}

/// Weyl function with poles `λ` and zeros `γ`: `q = Π(λ - γ_s)` and
/// `ρ_n = q(λ_n) / p'(λ_n)`.
pub fn w_from_gamma(lambdas: &[f64], gammas: &[f64]) -> Result<RationalHerglotz> {
    if !strictly_increasing(lambdas) || !interlaces(lambdas, gammas) {
        return Err(Error::InterlacingViolated(format!(
            "lambdas {lambdas:?} and gammas {gammas:?}"
        )));
    }
    let residues = (0..lambdas.len())
        .map(|n| {
            let mut r = 1.0;
            for (j, &l) in lambdas.iter().enumerate() {
                if j != n {
                    r /= lambdas[n] - l;
                }
                if let Some(&g) = gammas.get(j) {
                    r *= lambdas[n] - g;
                }
            }
            r
        })
        .collect();
    RationalHerglotz::new(lambdas.to_vec(), residues)
}

/// `π_k = Σ_j log|γ_k - λ_j|`; the sign `(-1)^{N+k}` of `p(γ_k)` is the
/// parity of the number of poles above `γ_k`.
pub fn pi_from(w: &RationalHerglotz) -> Result<DivisorQuasimomentum> {
    require_angles(w)?;
    let (gammas, pis) = divisor_and_pis(w)?;
    DivisorQuasimomentum::new(gammas, pis, w.poles().iter().sum())
}

pub(crate) fn divisor_and_pis(w: &RationalHerglotz) -> Result<(Vec<f64>, Vec<f64>)> {
    let gammas = zeros(w)?.gammas;
    let pis = gammas
        .iter()
        .map(|&g| w.poles().iter().map(|&l| (g - l).abs().ln()).sum())
        .collect();
    Ok((gammas, pis))
}

/// Inverse of [`pi_from`] on the leaf `Σ λ = casimir`.
///
/// `p = (λ - β) Π(λ - γ_s) + r` where `r` interpolates the targets
/// `(-1)^{N+k} e^{π_k}` at the `γ_k` and `β = casimir - Σ γ`. The targets
/// alternate in sign across the divisor, so `p` has one root below `γ_1`,
/// one in each gap and one above `γ_{N-1}`.
pub fn w_from_divisor(dq: &DivisorQuasimomentum) -> Result<RationalHerglotz> {
    let n = dq.dim();
    let g = &dq.gammas;
    if n == 1 {
        return RationalHerglotz::new(vec![dq.casimir], vec![1.0]);
    }
    let targets: Vec<f64> = dq
        .pis
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            let k = i + 1;
            let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            sign * pi.exp()
        })
        .collect();
    if targets.iter().any(|t| !t.is_finite() || *t == 0.0) {
        return Err(Error::NoHerglotzSolution(
            "quasimomentum out of range".into(),
        ));
    }
    let beta = dq.casimir - g.iter().sum::<f64>();
    let r = Barycentric::new(g.clone(), targets);
    let p = |x: f64| (x - beta) * g.iter().map(|&s| x - s).product::<f64>() + r.eval(x);

    let mut edges = Vec::with_capacity(n + 1);
    edges.push(outer_bracket(&p, g[0], -1.0)?);
    edges.extend_from_slice(g);
    edges.push(outer_bracket(&p, g[n - 2], 1.0)?);

    let mut lambdas = Vec::with_capacity(n);
    for w in edges.windows(2) {
        let (fa, fb) = (p(w[0]), p(w[1]));
        if !((fa < 0.0) != (fb < 0.0)) {
            return Err(Error::NoHerglotzSolution(format!(
                "no sign change of p on ({}, {})",
                w[0], w[1]
            )));
        }
        lambdas.push(poly::bisect(p, w[0], w[1]));
    }
    if !interlaces(&lambdas, g) {
        return Err(Error::NoHerglotzSolution(
            "roots of p do not interlace the divisor".into(),
        ));
    }
    w_from_gamma(&lambdas, g)
}

/// Walk away from `start` in `direction` until `p` changes sign relative to
/// its value at `start`.
fn outer_bracket<F: Fn(f64) -> f64>(p: &F, start: f64, direction: f64) -> Result<f64> {
    let s0 = p(start) < 0.0;
    let mut step = 1.0_f64.max(start.abs() * 1e-3);
    for _ in 0..2000 {
        let x = start + direction * step;
        let fx = p(x);
        if !fx.is_finite() {
            break;
        }
        if (fx < 0.0) != s0 {
            return Ok(x);
        }
        step *= 2.0;
    }
    Err(Error::NoHerglotzSolution("outer root not bracketed".into()))
}

/// Exponential angles `θ'_1..θ'_{N-1}` in the frame `λ_0 = 0`; the spectrum
/// is shifted internally.
///
/// `θ'_k = Σ_{s≠k} log|(γ_s - λ_k)/(λ_s - λ_k)| + log|γ_k - λ_k| - Ξ(0) - log λ_k`
/// with `Ξ(0) = Σ_s log(γ_s / λ_s)`. It differs from `θ_k` by
/// `log Π_{s≠k} |(λ_s - λ_k)/λ_s|`, a function of the spectrum alone.
pub fn theta_prime(w: &RationalHerglotz) -> Result<Vec<f64>> {
    require_angles(w)?;
    theta_prime_unnormalized(w)
}

pub(crate) fn theta_prime_unnormalized(w: &RationalHerglotz) -> Result<Vec<f64>> {
    let shift = w.poles()[0];
    let lam: Vec<f64> = w.poles().iter().map(|l| l - shift).collect();
    let gam: Vec<f64> = zeros(w)?.gammas.iter().map(|g| g - shift).collect();
    let xi0: f64 = gam.iter().zip(&lam[1..]).map(|(&g, &l)| (g / l).ln()).sum();
    Ok((1..lam.len())
        .map(|k| {
            let lk = lam[k];
            let cross: f64 = (1..lam.len())
                .filter(|&s| s != k)
                .map(|s| ((gam[s - 1] - lk) / (lam[s] - lk)).abs().ln())
                .sum();
            cross + (gam[k - 1] - lk).abs().ln() - xi0 - lk.ln()
        })
        .collect())
}

/// `log Π_{s≥1, s≠k} |(λ_s - λ_k)/λ_s|` in the frame `λ_0 = 0`, the
/// spectrum-only gap between `θ_k` and `θ'_k`.
pub fn angle_offset(lambdas: &[f64], k: usize) -> f64 {
    let shift = lambdas[0];
    let lk = lambdas[k] - shift;
    (1..lambdas.len())
        .filter(|&s| s != k)
        .map(|s| {
            let ls = lambdas[s] - shift;
            ((ls - lk) / ls).abs().ln()
        })
        .sum()
}

/// Trapezoid-rule contour integral of `ω_k = [1/(z-λ_k) - 1/(z-λ_0)] dz`
/// counterclockwise around `λ_p`, radius half the distance to the nearest
/// other pole.
pub fn abel_period_check(lambdas: &[f64], k: usize, p: usize) -> Result<Complex64> {
    let n = lambdas.len();
    if !(1..n).contains(&k) || !(1..n).contains(&p) {
        return Err(Error::IndexOutOfRange(format!(
            "k = {k}, p = {p}; both must lie in 1..{}",
            n.saturating_sub(1)
        )));
    }
    if !strictly_increasing(lambdas) {
        return Err(Error::InvalidInput(
            "lambdas must be strictly increasing".into(),
        ));
    }
    let centre = lambdas[p];
    let radius = 0.5
        * lambdas
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != p)
            .map(|(_, &l)| (l - centre).abs())
            .fold(f64::INFINITY, f64::min);
    let (lk, l0) = (lambdas[k], lambdas[0]);
    let h = 2.0 * PI / ABEL_NODES as f64;
    let sum: Complex64 = (0..ABEL_NODES)
        .map(|j| {
            let e = Complex64::from_polar(radius, h * j as f64);
            let z = centre + e;
            let f = 1.0 / (z - lk) - 1.0 / (z - l0);
            f * Complex64::i() * e
        })
        .sum();
    Ok(sum * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rh(poles: &[f64], residues: &[f64]) -> RationalHerglotz {
        RationalHerglotz::new(poles.to_vec(), residues.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn theta_examples() {
        assert!(theta_from(&rh(&[0.0, 2.0], &[0.5, 0.5])).unwrap().thetas[0].abs() < 1e-15);
        assert!(theta_from(&rh(&[-1.0, 1.0], &[0.5, 0.5])).unwrap().thetas[0].abs() < 1e-15);
        let t = theta_from(&rh(&[0.0, 2.0], &[0.25, 0.75])).unwrap().thetas[0];
        assert!((t - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn theta_matches_quotient_definition() {
        // θ_k = log((-1)^k q(λ_k)/q(λ_0)) with q from the polynomial quotient.
        let w = rh(&[-0.5, 0.25, 1.0, 2.5], &[0.1, 0.2, 0.3, 0.4]);
        let pq = crate::weyl::to_quotient(&w);
        let q0 = poly::eval(pq.q(), -0.5);
        let thetas = theta_from(&w).unwrap().thetas;
        for (k, &l) in w.poles().iter().enumerate().skip(1) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let want = (sign * poly::eval(pq.q(), l) / q0).ln();
            assert!((thetas[k - 1] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn w_from_theta_examples() {
        let w = w_from_theta(&[0.0, 2.0], &[0.0]).unwrap();
        assert!(close(w.residues(), &[0.5, 0.5], 1e-15));
        let w = w_from_theta(&[0.0, 2.0], &[3f64.ln()]).unwrap();
        assert!(close(w.residues(), &[0.25, 0.75], 1e-15));
    }

    #[test]
    fn w_from_theta_extreme_angles() {
        let lam = [-1.0, 0.0, 0.5, 2.0];
        let thetas = [50.0, -50.0, 17.0];
        let w = w_from_theta(&lam, &thetas).unwrap();
        assert!(w.is_normalized());
        assert!(close(&theta_from(&w).unwrap().thetas, &thetas, 1e-9));
    }

    #[test]
    fn w_from_gamma_examples() {
        assert!(close(
            w_from_gamma(&[0.0, 2.0], &[1.0]).unwrap().residues(),
            &[0.5, 0.5],
            1e-15
        ));
        assert!(close(
            w_from_gamma(&[0.0, 2.0], &[0.5]).unwrap().residues(),
            &[0.25, 0.75],
            1e-15
        ));
        assert!(close(
            w_from_gamma(&[-1.0, 1.0], &[0.0]).unwrap().residues(),
            &[0.5, 0.5],
            1e-15
        ));
        assert!(matches!(
            w_from_gamma(&[0.0, 2.0], &[3.0]),
            Err(Error::InterlacingViolated(_))
        ));
    }

    #[test]
    fn pi_examples() {
        let dq = pi_from(&rh(&[0.0, 2.0], &[0.5, 0.5])).unwrap();
        assert!(dq.pis[0].abs() < 1e-15 && (dq.casimir - 2.0).abs() < 1e-15);
        assert!(pi_from(&rh(&[-1.0, 1.0], &[0.5, 0.5])).unwrap().pis[0].abs() < 1e-15);
        let dq = pi_from(&rh(&[0.0, 2.0], &[0.25, 0.75])).unwrap();
        assert!((dq.pis[0] - 0.75f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn w_from_divisor_examples() {
        let w =
            w_from_divisor(&DivisorQuasimomentum::new(vec![1.0], vec![0.0], 2.0).unwrap()).unwrap();
        assert!(close(w.poles(), &[0.0, 2.0], 1e-14));
        assert!(close(w.residues(), &[0.5, 0.5], 1e-14));
        let t = 0.7f64;
        let w =
            w_from_divisor(&DivisorQuasimomentum::new(vec![1.0], vec![t], 2.0).unwrap()).unwrap();
        let e = (t / 2.0).exp();
        assert!(close(w.poles(), &[1.0 - e, 1.0 + e], 1e-14));
        let w =
            w_from_divisor(&DivisorQuasimomentum::new(vec![0.0], vec![0.0], 0.0).unwrap()).unwrap();
        assert!(close(w.poles(), &[-1.0, 1.0], 1e-14));
    }

    #[test]
    fn divisor_chart_roundtrip() {
        let w = rh(&[-1.3, -0.2, 0.4, 1.1, 2.6], &[0.15, 0.3, 0.1, 0.25, 0.2]);
        let dq = pi_from(&w).unwrap();
        let back = w_from_divisor(&dq).unwrap();
        assert!(close(back.poles(), w.poles(), 1e-12));
        assert!(close(back.residues(), w.residues(), 1e-12));
    }

    #[test]
    fn theta_prime_examples() {
        let tp = theta_prime(&rh(&[0.0, 2.0], &[0.5, 0.5])).unwrap();
        assert!(tp[0].abs() < 1e-15);

        // λ = (0, 1, 3), γ = (1/2, 2).
        let w = w_from_gamma(&[0.0, 1.0, 3.0], &[0.5, 2.0]).unwrap();
        let theta = theta_from(&w).unwrap().thetas;
        let tp = theta_prime(&w).unwrap();
        for k in 1..3 {
            let offset = angle_offset(w.poles(), k);
            assert!((theta[k - 1] - tp[k - 1] - offset).abs() < 1e-10);
        }
    }

    #[test]
    fn abel_periods() {
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        assert!((abel_period_check(&[0.0, 2.0], 1, 1).unwrap() - two_pi_i).norm() < 1e-10);
        assert!(abel_period_check(&[0.0, 1.0, 3.0], 2, 1).unwrap().norm() < 1e-10);
        assert!(abel_period_check(&[0.0, 1.0, 3.0], 1, 2).unwrap().norm() < 1e-10);
        assert!(abel_period_check(&[0.0, 1.0], 0, 1).is_err());
    }

    #[test]
    fn json_shapes() {
        let dq: DivisorQuasimomentum =
            serde_json::from_str(r#"{"gammas":[1.0],"pis":[0.0],"casimir":2.0}"#).unwrap();
        assert_eq!(dq.dim(), 2);
        let aa = ActionAngle {
            lambdas: vec![0.0, 2.0],
            thetas: vec![0.0],
        };
        assert_eq!(
            serde_json::to_string(&aa).unwrap(),
            r#"{"lambdas":[0.0,2.0],"thetas":[0.0]}"#
        );
    }
}
