//! The inverse spectral problem: recover `L` from its Weyl function.
//!
//! Two independent routes are provided. [`stieltjes_reconstruct`] expands
//! `w = -q/p` as a continued fraction
//!
//! ```text
//! w(λ) = -1 / (λ - v_0 + c_0^2 w̃(λ))
//! ```
//!
//! by repeated polynomial division. [`lanczos_reconstruct`] runs the Stieltjes
//! procedure on the discrete measure `Σ ρ_k δ_{λ_k}`.

use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;
use crate::poly;
use crate::spectral::{eigen, weyl, SpectralData};
use crate::weyl::{to_quotient, PolyQuotient};
use twofloat::TwoFloat;

/// Above this size the division runs in the Chebyshev basis.
const MONOMIAL_MAX: usize = 12;

const BREAKDOWN_TOL: f64 = 1e-13;

/// Continued-fraction expansion of a normalized quotient.
///
/// ```
/// use toda_core::{inverse::stieltjes_reconstruct, PolyQuotient};
///
/// let pq = PolyQuotient::new(vec![0.0, -2.0, 1.0], vec![-1.0, 1.0]).unwrap();
/// let l = stieltjes_reconstruct(&pq).unwrap();
/// assert!((l.diag()[0] - 1.0).abs() < 1e-14);
/// assert!((l.off_diag()[0] - 1.0).abs() < 1e-14);
/// ```
pub fn stieltjes_reconstruct(pq: &PolyQuotient) -> Result<JacobiMatrix> {
    if !pq.is_normalized() {
        return Err(Error::NotNormalized(pq.q0()));
    }
    let n = pq.dim();
    let (center, scale) = frame(pq.p());
    let p = scaled(&pq.p_extended(), center, scale);
    let q = scaled(&pq.q_extended(), center, scale);

    let (v, c2) = if n <= MONOMIAL_MAX {
        divide_all(Monomial, p, q)?
    } else {
        let (p, q) = (Chebyshev.from_monomial(&p), Chebyshev.from_monomial(&q));
        divide_all(Chebyshev, p, q)?
    };

    let v = v.iter().map(|x| center + scale * x).collect();
    let c = c2.iter().map(|x| scale * x.sqrt()).collect();
    JacobiMatrix::new(v, c)
}

/// Midpoint of an interval containing every root of `p` and a power of two
/// at least its half-width.
///
/// Newton's method started outside the roots of a real-rooted polynomial
/// approaches the extreme root monotonically, so every iterate is a bound.
fn frame(p: &[f64]) -> (f64, f64) {
    let n = p.len() - 1;
    let mean = -p[n - 1] / n as f64;
    if n == 1 {
        return (mean, 1.0);
    }
    // Laguerre–Samuelson bound on the spread about the mean.
    let a1 = p[n - 1];
    let a2 = p[n - 2];
    let nf = n as f64;
    let spread = (nf - 1.0) / nf * (a1 * a1 - 2.0 * nf / (nf - 1.0) * a2).max(0.0).sqrt();
    let dp = poly::derivative(p);
    let outer = |mut x: f64| {
        for _ in 0..100 {
            let d = poly::eval(&dp, x);
            if d == 0.0 {
                break;
            }
            let next = x - poly::eval(p, x) / d;
            if !next.is_finite() || (next - x).abs() <= 1e-3 * spread {
                break;
            }
            x = next;
        }
        x
    };
    let hi = outer(mean + spread);
    let lo = outer(mean - spread);
    let half = 0.5 * (hi - lo) * 1.05;
    // Power-of-two scale.
    let scale = if half > 0.0 {
        2f64.powi(half.log2().ceil() as i32)
    } else {
        1.0
    };
    (0.5 * (hi + lo), scale)
}

/// Coefficients of `t ↦ f(center + scale·t) / scale^{deg f}`, which keeps
/// monic polynomials monic.
fn scaled(f: &[TwoFloat], center: f64, scale: f64) -> Vec<TwoFloat> {
    let mut out = f.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let carry = out[j + 1] * center;
            out[j] += carry;
        }
    }
    let d = n as i32 - 1;
    out.iter()
        .enumerate()
        .map(|(k, &a)| a * scale.powi(k as i32 - d))
        .collect()
}

/// A polynomial basis in which the division step is carried out.
trait Basis {
    /// Multiply by `t`; the result has one more coefficient.
    fn mul_t(&self, f: &[TwoFloat]) -> Vec<TwoFloat>;
    /// Monomial coefficient of `t^j` in `f` for `j ∈ {deg, deg-1}`, where
    /// `deg = f.len() - 1`.
    fn top(&self, f: &[TwoFloat], j: usize) -> TwoFloat;
}

struct Monomial;

impl Basis for Monomial {
    fn mul_t(&self, f: &[TwoFloat]) -> Vec<TwoFloat> {
        let mut out = vec![TwoFloat::from(0.0)];
        out.extend_from_slice(f);
        out
    }

    fn top(&self, f: &[TwoFloat], j: usize) -> TwoFloat {
        f[j]
    }
}

/// Chebyshev expansion `Σ a_n T_n(t)` on `[-1, 1]`.
struct Chebyshev;

impl Chebyshev {
    /// Horner's rule with multiplication by `t` done in the Chebyshev basis.
    fn from_monomial(&self, f: &[TwoFloat]) -> Vec<TwoFloat> {
        let mut acc = vec![f[f.len() - 1]];
        for &a in f.iter().rev().skip(1) {
            acc = self.mul_t(&acc);
            acc[0] += a;
        }
        acc
    }
}

impl Basis for Chebyshev {
    fn mul_t(&self, f: &[TwoFloat]) -> Vec<TwoFloat> {
        // t T_0 = T_1, t T_n = (T_{n+1} + T_{n-1}) / 2.
        let mut out = vec![TwoFloat::from(0.0); f.len() + 1];
        for (n, &a) in f.iter().enumerate() {
            if n == 0 {
                out[1] += a;
            } else {
                out[n + 1] += a * 0.5;
                out[n - 1] += a * 0.5;
            }
        }
        out
    }

    fn top(&self, f: &[TwoFloat], j: usize) -> TwoFloat {
        // By parity only T_j contributes to t^j when deg f <= j + 1.
        if j == 0 {
            f[0]
        } else {
            f[j] * 2f64.powi(j as i32 - 1)
        }
    }
}

/// Run the division `p = (t - v_0) q - c_0^2 q̃` down to depth one.
fn divide_all<B: Basis>(
    basis: B,
    mut p: Vec<TwoFloat>,
    mut q: Vec<TwoFloat>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = q.len();
    let mut v = Vec::with_capacity(n);
    let mut c2 = Vec::with_capacity(n.saturating_sub(1));
    for depth in 0..n {
        let deg = q.len();
        // Renormalize q to unit mass.
        let lead_q = basis.top(&q, deg - 1);
        q.iter_mut().for_each(|x| *x /= lead_q);
        let sub_q = if deg >= 2 {
            basis.top(&q, deg - 2)
        } else {
            TwoFloat::from(0.0)
        };
        let vk = sub_q - basis.top(&p, deg - 1);
        v.push(vk.hi());
        if deg == 1 {
            break;
        }
        // r = p - (t - v_k) q, of degree deg - 2 after cancellation.
        let tq = basis.mul_t(&q);
        let r: Vec<TwoFloat> = (0..deg - 1).map(|i| p[i] - tq[i] + vk * q[i]).collect();
        let ck2 = -basis.top(&r, deg - 2);
        if !(ck2 > 0.0) {
            return Err(Error::NotHerglotzInput(ck2.hi(), depth));
        }
        c2.push(ck2.hi());
        p = q;
        q = r.iter().map(|&x| -x / ck2).collect();
    }
    Ok((v, c2))
}

/// Three-term recurrence for polynomials orthonormal with respect to
/// `Σ ρ_k δ_{λ_k}`, with full reorthogonalization.
///
/// ```
/// use toda_core::{inverse::lanczos_reconstruct, SpectralData};
///
/// let sd = SpectralData::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
/// let l = lanczos_reconstruct(&sd).unwrap();
/// assert!(l.diag().iter().all(|v| v.abs() < 1e-14));
/// assert!((l.off_diag()[0] - 1.0).abs() < 1e-14);
/// ```
pub fn lanczos_reconstruct(sd: &SpectralData) -> Result<JacobiMatrix> {
    let n = sd.dim();
    let lam = &sd.lambdas;
    let norm = sd.rhos.iter().sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = vec![sd.rhos.iter().map(|r| r.sqrt() / norm).collect()];
    let mut v = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n {
        let cur = &basis[step];
        let vk: f64 = cur.iter().zip(lam).map(|(x, l)| l * x * x).sum();
        v.push(vk);
        if step + 1 == n {
            break;
        }
        let mut u: Vec<f64> = cur.iter().zip(lam).map(|(x, l)| (l - vk) * x).collect();
        if step > 0 {
            let ck = c[step - 1];
            for (ui, pi) in u.iter_mut().zip(&basis[step - 1]) {
                *ui -= ck * pi;
            }
        }
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
                for (ui, bi) in u.iter_mut().zip(b) {
                    *ui -= dot * bi;
                }
            }
        }
        let ck = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if ck < BREAKDOWN_TOL {
            return Err(Error::Breakdown(step));
        }
        c.push(ck);
        basis.push(u.iter().map(|x| x / ck).collect());
    }
    JacobiMatrix::new(v, c)
}

/// Largest entry deviation of either reconstruction from `L`.
pub fn roundtrip_error(l: &JacobiMatrix) -> Result<f64> {
    let via_cf = stieltjes_reconstruct(&to_quotient(&weyl(l)?))?;
    let via_lanczos = lanczos_reconstruct(&eigen(l)?)?;
    Ok(l.max_abs_diff(&via_cf).max(l.max_abs_diff(&via_lanczos)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::RationalHerglotz;

    fn jm(v: &[f64], c: &[f64]) -> JacobiMatrix {
        JacobiMatrix::new(v.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn continued_fraction_examples() {
        let cases = [
            (
                vec![0.0, -2.0, 1.0],
                vec![-1.0, 1.0],
                jm(&[1.0, 1.0], &[1.0]),
            ),
            (vec![-0.7, 1.0], vec![1.0], jm(&[0.7], &[])),
            (
                vec![-1.0, 0.0, 1.0],
                vec![0.0, 1.0],
                jm(&[0.0, 0.0], &[1.0]),
            ),
        ];
        for (p, q, want) in cases {
            let got = stieltjes_reconstruct(&PolyQuotient::new(p, q).unwrap()).unwrap();
            assert!(got.max_abs_diff(&want) < 1e-14, "{got:?}");
        }
    }

    #[test]
    fn continued_fraction_rejects_non_weyl_quotient() {
        // -q/p with q = λ + 3 has a negative residue at 0.
        let pq = PolyQuotient::new(vec![0.0, -2.0, 1.0], vec![3.0, 1.0]).unwrap();
        assert!(matches!(
            stieltjes_reconstruct(&pq),
            Err(Error::NotHerglotzInput(_, 0))
        ));
    }

    #[test]
    fn lanczos_examples() {
        let sd = SpectralData::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(
            lanczos_reconstruct(&sd)
                .unwrap()
                .max_abs_diff(&jm(&[1.0, 1.0], &[1.0]))
                < 1e-14
        );
        let sd = SpectralData::new(vec![0.3], vec![1.0]).unwrap();
        assert_eq!(lanczos_reconstruct(&sd).unwrap(), jm(&[0.3], &[]));
    }

    #[test]
    fn roundtrip_small() {
        assert!(roundtrip_error(&jm(&[1.0, 1.0], &[1.0])).unwrap() <= 1e-12);
        assert_eq!(roundtrip_error(&jm(&[0.4], &[])).unwrap(), 0.0);
    }

    #[test]
    fn chebyshev_path_matches_monomial_path() {
        let n = 16;
        let poles: Vec<f64> = (0..n).map(|k| k as f64 / 4.0 - 2.0).collect();
        let w = RationalHerglotz::new(poles, vec![1.0 / n as f64; n]).unwrap();
        let cf = stieltjes_reconstruct(&to_quotient(&w)).unwrap();
        let lz = lanczos_reconstruct(&w.to_spectral().unwrap()).unwrap();
        assert!(cf.max_abs_diff(&lz) < 1e-6, "{}", cf.max_abs_diff(&lz));
    }

    #[test]
    fn shift_covariance() {
        let l = jm(&[0.2, -0.5, 0.9, 0.1], &[0.7, 1.2, 0.4]);
        let a = 1.75;
        let w = weyl(&l).unwrap().shifted(a);
        let back = stieltjes_reconstruct(&to_quotient(&w)).unwrap();
        assert!(back.max_abs_diff(&l.shifted(a)) < 1e-10);
    }
}
