//! Rational Herglotz functions in their three representations:
//!
//! * pole–residue form `w(λ) = Σ ρ_k / (λ_k - λ)`, the master form;
//! * polynomial quotient `w = -q/p` with `p` monic of degree `N`;
//! * the exponential form `w(λ) = -(1/λ) exp Ξ(λ)` built from the Krein
//!   spectral shift, valid after shifting the spectrum so that `λ_0 = 0`.
//!
//! All trace formulas relating the moments `s_n = Σ ρ_k λ_k^n` to the
//! divisor live here as well.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::poly;
use crate::spectral::{check_poles_and_residues, Divisor, SpectralData};

/// Tolerance on `|Σ ρ - 1|` for a function to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Longest series accepted by [`trace_via_delta`].
pub const MAX_SERIES: usize = 12;

/// `w(λ) = Σ ρ_k / (λ_k - λ)` with real increasing poles and positive residues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHerglotz")]
pub struct RationalHerglotz {
    poles: Vec<f64>,
    residues: Vec<f64>,
    #[serde(skip)]
    normalized: bool,
}

#[derive(Deserialize)]
struct RawHerglotz {
    poles: Vec<f64>,
    residues: Vec<f64>,
}

impl TryFrom<RawHerglotz> for RationalHerglotz {
    type Error = Error;

    fn try_from(raw: RawHerglotz) -> Result<Self> {
        RationalHerglotz::new(raw.poles, raw.residues)
    }
}

impl RationalHerglotz {
    pub fn new(poles: Vec<f64>, residues: Vec<f64>) -> Result<Self> {
        check_poles_and_residues(&poles, &residues)?;
        let total: f64 = residues.iter().sum();
        Ok(Self {
            poles,
            residues,
            normalized: (total - 1.0).abs() <= NORMALIZATION_TOL,
        })
    }

    pub fn from_spectral(sd: &SpectralData) -> Self {
        Self {
            poles: sd.lambdas.clone(),
            residues: sd.rhos.clone(),
            normalized: true,
        }
    }

    pub fn to_spectral(&self) -> Result<SpectralData> {
        SpectralData::new(self.poles.clone(), self.residues.clone())
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn residues(&self) -> &[f64] {
        &self.residues
    }

    pub fn dim(&self) -> usize {
        self.poles.len()
    }

    /// Membership in the Weyl-function submanifold `Σ ρ = 1`.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_mass(&self) -> f64 {
        self.residues.iter().sum()
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.total_mass()))
        }
    }

    /// Residues rescaled to sum to one.
    pub fn normalize(&self) -> Self {
        let total = self.total_mass();
        Self {
            poles: self.poles.clone(),
            residues: self.residues.iter().map(|r| r / total).collect(),
            normalized: true,
        }
    }

    /// `w(λ - shift)`'s counterpart: every pole moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            poles: self.poles.iter().map(|p| p + shift).collect(),
            residues: self.residues.clone(),
            normalized: self.normalized,
        }
    }

    fn check_pole(&self, re: f64, im: f64) -> Result<()> {
        for &p in &self.poles {
            if (p - re).hypot(im) <= 1e-14 * p.abs().max(1.0) {
                return Err(Error::AtPole(p));
            }
        }
        Ok(())
    }

    /// `Σ ρ_k / (λ_k - z)`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_pole(z.re, z.im)?;
        Ok(self
            .poles
            .iter()
            .zip(&self.residues)
            .map(|(&p, &r)| r / (p - z))
            .sum())
    }

    pub fn eval_real(&self, x: f64) -> Result<f64> {
        self.check_pole(x, 0.0)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(&p, &r)| r / (p - x))
            .sum()
    }

    /// `w'(x) = Σ ρ_k / (λ_k - x)^2 > 0`.
    pub fn derivative_real(&self, x: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(&p, &r)| r / ((p - x) * (p - x)))
            .sum()
    }

    /// Monic `p(x) = Π (x - λ_n)`.
    pub fn denominator_at(&self, x: f64) -> f64 {
        self.poles.iter().map(|&p| x - p).product()
    }
}

/// `w = -q/p`, coefficients constant term first.
///
/// Quotients built by [`to_quotient`] also carry the rounding error of each
/// coefficient, so that together with the stored value it forms a
/// double-double number. The tails are not serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuotient")]
pub struct PolyQuotient {
    p: Vec<f64>,
    q: Vec<f64>,
    #[serde(skip)]
    p_lo: Vec<f64>,
    #[serde(skip)]
    q_lo: Vec<f64>,
}

#[derive(Deserialize)]
struct RawQuotient {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl TryFrom<RawQuotient> for PolyQuotient {
    type Error = Error;

    fn try_from(raw: RawQuotient) -> Result<Self> {
        PolyQuotient::new(raw.p, raw.q)
    }
}

impl PolyQuotient {
    /// `p` must be monic of degree `N >= 1` and `q` of length `N`.
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() < 2 || q.len() + 1 != p.len() {
            return Err(Error::InvalidInput(format!(
                "p has {} coefficients and q has {}; expected N+1 and N",
                p.len(),
                q.len()
            )));
        }
        if p.iter().chain(&q).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        if (p[p.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("p must be monic".into()));
        }
        Ok(Self {
            p_lo: vec![0.0; p.len()],
            q_lo: vec![0.0; q.len()],
            p,
            q,
        })
    }

    fn from_extended(p: &[TwoFloat], q: &[TwoFloat]) -> Self {
        Self {
            p: p.iter().map(TwoFloat::hi).collect(),
            q: q.iter().map(TwoFloat::hi).collect(),
            p_lo: p.iter().map(TwoFloat::lo).collect(),
            q_lo: q.iter().map(TwoFloat::lo).collect(),
        }
    }

    /// Coefficients of `p` in double-double precision.
    pub fn p_extended(&self) -> Vec<TwoFloat> {
        extended(&self.p, &self.p_lo)
    }

    /// Coefficients of `q` in double-double precision.
    pub fn q_extended(&self) -> Vec<TwoFloat> {
        extended(&self.q, &self.q_lo)
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Leading coefficient of `q`, equal to `Σ ρ`.
    pub fn q0(&self) -> f64 {
        self.q[self.q.len() - 1]
    }

    /// Coefficient of `λ^{N-1}` in `p`, equal to `-Σ λ_k`.
    pub fn p0(&self) -> f64 {
        self.p[self.p.len() - 2]
    }

    pub fn is_normalized(&self) -> bool {
        (self.q0() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn eval(&self, x: f64) -> f64 {
        -poly::eval(&self.q, x) / poly::eval(&self.p, x)
    }
}

fn extended(hi: &[f64], lo: &[f64]) -> Vec<TwoFloat> {
    hi.iter()
        .zip(lo)
        .map(|(&h, &l)| TwoFloat::new_add(h, l))
        .collect()
}

/// `p = Π(λ - λ_n)`; `q` is interpolated from its node values
/// `q(λ_k) = p'(λ_k) ρ_k` in barycentric Lagrange form.
///
/// With barycentric weights `1/p'(λ_k)` the interpolant is
/// `q = Σ_k ρ_k Π_{j≠k}(λ - λ_j)`, which is expanded in double-double.
pub fn to_quotient(w: &RationalHerglotz) -> PolyQuotient {
    let n = w.dim();
    let p = dd_from_roots(w.poles.iter().copied());
    let mut q = vec![TwoFloat::from(0.0); n];
    for (k, &rho) in w.residues.iter().enumerate() {
        let others = w
            .poles
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &x)| x);
        for (acc, c) in q.iter_mut().zip(dd_from_roots(others)) {
            *acc += c * rho;
        }
    }
    PolyQuotient::from_extended(&p, &q)
}

fn dd_from_roots(roots: impl Iterator<Item = f64>) -> Vec<TwoFloat> {
    let mut out = vec![TwoFloat::from(1.0)];
    for r in roots {
        let mut next = vec![TwoFloat::from(0.0); out.len() + 1];
        for (i, &a) in out.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        out = next;
    }
    out
}

/// Poles are the roots of `p`, residues `ρ_n = q(λ_n) / p'(λ_n)`.
pub fn from_quotient(pq: &PolyQuotient) -> Result<RationalHerglotz> {
    let roots = poly::real_roots(&pq.p)
        .ok_or_else(|| Error::NotHerglotz("p does not have simple real roots".into()))?;
    let residues: Vec<f64> = (0..roots.len())
        .map(|n| poly::eval(&pq.q, roots[n]) / poly::node_derivative(&roots, n))
        .collect();
    if let Some(k) = residues.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::NotHerglotz(format!(
            "residue at {} is {}",
            roots[k], residues[k]
        )));
    }
    RationalHerglotz::new(roots, residues)
}

/// Zeros of `w`, one in each gap between consecutive poles.
pub fn zeros(w: &RationalHerglotz) -> Result<Divisor> {
    if w.dim() < 2 {
        return Err(Error::InvalidInput("zeros need N >= 2".into()));
    }
    let gammas = w
        .poles
        .windows(2)
        .map(|g| zero_between(w, g[0], g[1]))
        .collect();
    Ok(Divisor { gammas })
}

/// `w` increases from -∞ to +∞ on `(a, b)`.
fn zero_between(w: &RationalHerglotz, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = w.eval_unchecked(mid);
        if f == 0.0 {
            return mid;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let next = x - w.eval_unchecked(x) / w.derivative_real(x);
        if !(next > a && next < b) || w.eval_unchecked(next).abs() >= w.eval_unchecked(x).abs() {
            break;
        }
        x = next;
    }
    x
}

/// Data of the exponential representation after the shift `λ ↦ λ - λ_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KreinData {
    /// The original `λ_0`, subtracted from every pole and zero.
    pub shift: f64,
    pub lambdas0: Vec<f64>,
    pub gammas: Vec<f64>,
    /// `f_k = ∫ z^k ξ(z) dz = Σ_s (γ_s^{k+1} - λ_s^{k+1}) / (k+1)`.
    pub f: Vec<f64>,
}

impl KreinData {
    /// `Ξ(λ) = Σ_s [log(γ_s - λ) - log(λ_s - λ)]` in the shifted frame.
    pub fn xi(&self, lambda: Complex64) -> Complex64 {
        self.gammas
            .iter()
            .zip(&self.lambdas0[1..])
            .map(|(&g, &l)| (g - lambda).ln() - (l - lambda).ln())
            .sum()
    }

    /// `-(1/λ) exp Ξ(λ)`, the Weyl function in the shifted frame.
    pub fn weyl_exp(&self, lambda: Complex64) -> Complex64 {
        -self.xi(lambda).exp() / lambda
    }

    /// Largest relative deviation between `w` and its exponential form over
    /// `samples` real points off the spectrum.
    pub fn reconstruction_residual(&self, w: &RationalHerglotz, samples: usize) -> Result<f64> {
        let poles = w.poles();
        let (lo, hi) = (poles[0] - 1.0, poles[poles.len() - 1] + 1.0);
        let mut worst: f64 = 0.0;
        for s in 0..samples {
            let mut x = lo + (hi - lo) * (s as f64 + 0.5) / samples as f64;
            while poles.iter().any(|&p| (p - x).abs() < 1e-3) {
                x += 2e-3;
            }
            let direct = w.eval_real(x)?;
            let exp_form = self.weyl_exp(Complex64::new(x - self.shift, 0.0));
            worst = worst.max((exp_form - direct).norm() / direct.abs().max(1.0));
        }
        Ok(worst)
    }
}

/// Shift to `λ_0 = 0`, locate the zeros and compute `f_0..f_{n_moments-1}`.
pub fn krein(w: &RationalHerglotz, n_moments: usize) -> Result<KreinData> {
    w.require_normalized()?;
    let shift = w.poles[0];
    let lambdas0: Vec<f64> = w.poles.iter().map(|p| p - shift).collect();
    let gammas: Vec<f64> = if w.dim() >= 2 {
        zeros(w)?.gammas.iter().map(|g| g - shift).collect()
    } else {
        Vec::new()
    };
    let f = (0..n_moments)
        .map(|k| {
            let e = k as i32 + 1;
            gammas
                .iter()
                .zip(&lambdas0[1..])
                .map(|(&g, &l)| (g.powi(e) - l.powi(e)) / e as f64)
                .sum()
        })
        .collect();
    Ok(KreinData {
        shift,
        lambdas0,
        gammas,
        f,
    })
}

/// `s_n = Σ ρ_k λ_k^n` for `n = 0..=n_max`.
pub fn trace_moments(w: &RationalHerglotz, n_max: usize) -> Vec<f64> {
    (0..=n_max)
        .map(|n| {
            w.poles
                .iter()
                .zip(&w.residues)
                .map(|(&l, &r)| r * l.powi(n as i32))
                .sum()
        })
        .collect()
}

/// Moments of the shifted measure from the divisor: the coefficients of
/// `Π_k Σ_p Δ_k^p λ^{-p}` with `Δ_k^0 = 1`, `Δ_k^p = λ_k^{p-1}(λ_k - γ_k)`.
pub fn trace_via_delta(kd: &KreinData, n_max: usize) -> Result<Vec<f64>> {
    if n_max > MAX_SERIES {
        return Err(Error::SeriesTooLong(n_max));
    }
    let mut series = vec![0.0; n_max + 1];
    series[0] = 1.0;
    for (&g, &l) in kd.gammas.iter().zip(&kd.lambdas0[1..]) {
        let factor: Vec<f64> = (0..=n_max)
            .map(|p| {
                if p == 0 {
                    1.0
                } else {
                    l.powi(p as i32 - 1) * (l - g)
                }
            })
            .collect();
        let mut next = vec![0.0; n_max + 1];
        for (i, &a) in series.iter().enumerate() {
            for (j, &b) in factor.iter().enumerate().take(n_max + 1 - i) {
                next[i + j] += a * b;
            }
        }
        series = next;
    }
    Ok(series)
}

/// `(s_0, s_1, s_2, s_3)` of the shifted measure from `f_0, f_1, f_2`.
pub fn trace_via_krein(kd: &KreinData) -> Result<[f64; 4]> {
    if kd.f.len() < 3 {
        return Err(Error::InvalidInput("need f_0, f_1, f_2".into()));
    }
    let (f0, f1, f2) = (kd.f[0], kd.f[1], kd.f[2]);
    Ok([
        1.0,
        -f0,
        f0 * f0 / 2.0 - f1,
        f0 * f1 - f2 - f0 * f0 * f0 / 6.0,
    ])
}

/// Moments about the origin from moments of the measure shifted by `-shift`.
pub fn unshift_moments(shifted: &[f64], shift: f64) -> Vec<f64> {
    (0..shifted.len())
        .map(|n| {
            let mut binom = 1.0;
            let mut acc = 0.0;
            for (j, &s) in shifted.iter().enumerate().take(n + 1) {
                acc += binom * shift.powi((n - j) as i32) * s;
                binom = binom * (n - j) as f64 / (j + 1) as f64;
            }
            acc
        })
        .collect()
}
