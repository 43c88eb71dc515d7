//! The direct spectral problem: eigenvalues and weights of a Jacobi matrix,
//! the divisor, the Weyl function and checks on the Weyl solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;
use crate::weyl::RationalHerglotz;

/// Gap below which a computed spectrum is flagged as ill-conditioned.
pub const CONDITIONING_GAP: f64 = 1e-10;

const BISECTION_REL_TOL: f64 = 1e-14;
const BISECTION_CAP: usize = 200;
const NEWTON_STEPS: usize = 4;

/// Eigenvalues `λ_0 < … < λ_{N-1}` with positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectral")]
pub struct SpectralData {
    pub lambdas: Vec<f64>,
    pub rhos: Vec<f64>,
    /// Set when two eigenvalues are closer than [`CONDITIONING_GAP`].
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub conditioning: bool,
}

#[derive(Deserialize)]
struct RawSpectral {
    lambdas: Vec<f64>,
    rhos: Vec<f64>,
}

impl TryFrom<RawSpectral> for SpectralData {
    type Error = Error;

    fn try_from(raw: RawSpectral) -> Result<Self> {
        SpectralData::new(raw.lambdas, raw.rhos)
    }
}

impl SpectralData {
    pub fn new(lambdas: Vec<f64>, rhos: Vec<f64>) -> Result<Self> {
        check_poles_and_residues(&lambdas, &rhos)?;
        let total: f64 = rhos.iter().sum();
        if (total - 1.0).abs() > crate::weyl::NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        let conditioning = min_gap(&lambdas) < CONDITIONING_GAP;
        Ok(Self {
            lambdas,
            rhos,
            conditioning,
        })
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }
}

/// Zeros `γ_1 < … < γ_{N-1}` of the Weyl function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    pub gammas: Vec<f64>,
}

impl Divisor {
    /// Strict interlacing `λ_{k-1} < γ_k < λ_k`.
    pub fn interlaces(&self, lambdas: &[f64]) -> bool {
        interlaces(lambdas, &self.gammas)
    }
}

pub(crate) fn interlaces(lambdas: &[f64], gammas: &[f64]) -> bool {
    gammas.len() + 1 == lambdas.len()
        && gammas
            .iter()
            .enumerate()
            .all(|(k, &g)| lambdas[k] < g && g < lambdas[k + 1])
}

pub(crate) fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

pub(crate) fn min_gap(xs: &[f64]) -> f64 {
    xs.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn check_poles_and_residues(poles: &[f64], residues: &[f64]) -> Result<()> {
    if poles.is_empty() || poles.len() != residues.len() {
        return Err(Error::InvalidInput(format!(
            "{} poles and {} residues",
            poles.len(),
            residues.len()
        )));
    }
    if poles.iter().any(|x| !x.is_finite()) || !strictly_increasing(poles) {
        return Err(Error::InvalidInput(
            "poles must be finite and strictly increasing".into(),
        ));
    }
    if let Some(k) = residues.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::NotHerglotz(format!(
            "residue {k} = {} is not positive",
            residues[k]
        )));
    }
    Ok(())
}

/// Number of eigenvalues of `L` strictly below `x`.
///
/// This is the sign-change count of the sequence `P_0(x), …, P_N(x)` written
/// through the ratios `d_n = -c_n P_{n+1}/P_n`, which obey
/// `d_n = (v_n - x) - c_{n-1}^2 / d_{n-1}` and never overflow. A negative
/// ratio is an eigenvalue below `x`.
pub fn sturm_count(l: &JacobiMatrix, x: f64) -> usize {
    let (v, c) = (l.diag(), l.off_diag());
    let pivmin = f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
    let mut count = 0;
    let mut d = v[0] - x;
    for n in 0..v.len() {
        if n > 0 {
            d = (v[n] - x) - c[n - 1] * c[n - 1] / d;
        }
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues by Sturm bisection polished with Newton on `P_N`, and weights
/// `ρ_k = 1 / Σ_{n<N} P_n(λ_k)^2`.
pub fn eigen(l: &JacobiMatrix) -> Result<SpectralData> {
    let n = l.dim();
    let (glo, ghi) = l.gershgorin();
    let pad = 1e-12 * (1.0 + glo.abs().max(ghi.abs()));
    let (glo, ghi) = (glo - pad, ghi + pad);

    let mut lambdas = Vec::with_capacity(n);
    for k in 0..n {
        // Invariant: count(lo) <= k < count(hi).
        let (mut lo, mut hi) = (glo, ghi);
        if let Some(&prev) = lambdas.last() {
            lo = lo.max(prev);
        }
        let mut converged = false;
        for _ in 0..BISECTION_CAP {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= BISECTION_REL_TOL * mid.abs().max(1.0) || mid <= lo || mid >= hi {
                converged = true;
                break;
            }
            if sturm_count(l, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if !converged || !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::ConvergenceFailure);
        }
        lambdas.push(newton_polish(l, 0.5 * (lo + hi), lo, hi));
    }
    if !strictly_increasing(&lambdas) {
        return Err(Error::ConvergenceFailure);
    }

    let rhos: Vec<f64> = lambdas
        .iter()
        .map(|&lam| {
            let p = l.eval_p(lam);
            1.0 / p.values[..n].iter().map(|x| x * x).sum::<f64>()
        })
        .collect();
    let conditioning = min_gap(&lambdas) < CONDITIONING_GAP;
    Ok(SpectralData {
        lambdas,
        rhos,
        conditioning,
    })
}

fn newton_polish(l: &JacobiMatrix, mut x: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    for _ in 0..NEWTON_STEPS {
        let (p, d) = l.char_poly_with_derivative(x);
        if p == 0.0 || d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - p / d;
        if (next - x).abs() > width || !next.is_finite() {
            break;
        }
        if l.char_poly_with_derivative(next).0.abs() >= p.abs() {
            break;
        }
        x = next;
    }
    x
}

/// Eigenvalues of `L_{[1,N-1]}`, the zeros of the Weyl function.
pub fn divisor(l: &JacobiMatrix) -> Result<Divisor> {
    let n = l.dim();
    if n < 2 {
        return Err(Error::InvalidInput("divisor needs N >= 2".into()));
    }
    let inner = l.truncate(1, n - 1)?;
    Ok(Divisor {
        gammas: eigen(&inner)?.lambdas,
    })
}

/// `w(λ) = ((L - λ)^{-1} δ(0), δ(0)) = Σ ρ_k / (λ_k - λ)`.
pub fn weyl(l: &JacobiMatrix) -> Result<RationalHerglotz> {
    let sd = eigen(l)?;
    Ok(RationalHerglotz::from_spectral(&sd))
}

fn on_spectrum(lambdas: &[f64], x: f64) -> Result<()> {
    if lambdas.iter().any(|&l| (l - x).abs() <= 1e-12) {
        return Err(Error::OnSpectrum(x));
    }
    Ok(())
}

/// Max-norm of `(L - λ)u - δ(0)` for the Weyl solution `u = Q + w P`.
pub fn weyl_solution_residual(l: &JacobiMatrix, lambda: f64) -> Result<f64> {
    let w = weyl(l)?;
    on_spectrum(w.poles(), lambda)?;
    let wl = w.eval_real(lambda)?;
    let n = l.dim();
    let p = l.eval_p(lambda);
    let q = l.eval_q(lambda);
    let u: Vec<f64> = (0..n).map(|i| q[i] + wl * p[i]).collect();
    let lu = l.apply(&u);
    Ok((0..n)
        .map(|i| {
            let delta = if i == 0 { 1.0 } else { 0.0 };
            (lu[i] - lambda * u[i] - delta).abs()
        })
        .fold(0.0, f64::max))
}

/// Verifies the gluing of `P` with the normalized Weyl solution `(Q + wP)/w`
/// at every eigenvalue, and `Q_N + w P_N = 0` at sample points off the spectrum.
///
/// The value of `(Q_n + w P_n)/w = Q_n/w + P_n` at a pole is taken as a
/// two-sided limit (symmetric average at a distance `h` scaled by the gap
/// and by `ρ_k`), so `1/w(λ_k) = 0` is observed numerically rather than
/// assumed. The identity at sample points
/// is measured relative to `|Q_N| + |w P_N|`. Returns the larger residual.
pub fn gluing_check(l: &JacobiMatrix) -> Result<f64> {
    let n = l.dim();
    if n < 2 {
        return Ok(0.0);
    }
    let w = weyl(l)?;
    let lambdas = w.poles().to_vec();
    let gap = min_gap(&lambdas).min(1.0);

    let mut worst: f64 = 0.0;
    for (k, (&lk, &rk)) in lambdas.iter().zip(w.residues()).enumerate() {
        let h = 1e-6 * gap * rk.min(1.0);
        let p = l.eval_p(lk);
        // 1/w(λ_k + e) = -e / (ρ_k - e R), R the sum over the other poles.
        let side = |e: f64| -> Vec<f64> {
            let x = lk + e;
            let rest: f64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| w.residues()[j] / (lambdas[j] - x))
                .sum();
            let inv_w = -e / (rk - e * rest);
            let (px, qx) = (l.eval_p(x), l.eval_q(x));
            (0..=n).map(|i| qx[i] * inv_w + px[i]).collect()
        };
        let (plus, minus) = (side(h), side(-h));
        for i in 0..=n {
            let limit = 0.5 * (plus[i] + minus[i]);
            let scale = p[i].abs().max(1.0);
            worst = worst.max((p[i] - limit).abs() / scale);
        }
    }

    let (lo, hi) = (lambdas[0] - 1.0, lambdas[n - 1] + 1.0);
    for s in 0..16 {
        let mut x = lo + (hi - lo) * (s as f64 + 0.5) / 16.0;
        while lambdas.iter().any(|&lk| (lk - x).abs() < 1e-3) {
            x += 2e-3;
        }
        let wx = w.eval_real(x)?;
        let (pn, qn) = (l.eval_p(x).last(), l.eval_q(x).last());
        let scale = qn.abs() + (wx * pn).abs();
        worst = worst.max((qn + wx * pn).abs() / scale);
    }
    Ok(worst)
}
