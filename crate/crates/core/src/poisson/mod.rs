//! The quadratic bracket on rational Herglotz functions,
//!
//! ```text
//! {w(λ), w(μ)} = (w(λ) - w(μ))^2 / (λ - μ),
//! ```
//!
//! its Dirac restriction to the leaf `Σ ρ = 1`, the explicit tensors in the
//! `(λ, ρ)` chart, and numerical checks of the canonical relations.

mod observable;
mod tensor;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::weyl::RationalHerglotz;

pub use observable::{bracket, Observable, FD_STEP};
pub use tensor::{
    jacobi_identity_residual, tensor_at, Chart, ChartPoint, PoissonTensor, BOUNDARY_RHO,
};

/// Minimal separation of `λ` and `μ` in the closed formulas.
pub const MIN_SEPARATION: f64 = 1e-6;

/// Named residuals of a family of checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub residuals: BTreeMap<String, f64>,
    /// Set when some evaluation point had a weight below [`BOUNDARY_RHO`].
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub near_boundary: bool,
}

impl Report {
    pub fn record(&mut self, name: impl Into<String>, residual: f64) {
        let entry = self.residuals.entry(name.into()).or_insert(0.0);
        *entry = entry.max(residual);
    }

    pub fn merge(&mut self, other: Report) {
        for (k, v) in other.residuals {
            self.record(k, v);
        }
        self.near_boundary |= other.near_boundary;
    }

    pub fn max(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

fn weyl_pair(w: &RationalHerglotz, lam: f64, mu: f64) -> Result<(f64, f64)> {
    if (lam - mu).abs() < MIN_SEPARATION {
        return Err(Error::CoincidentArguments((lam - mu).abs()));
    }
    Ok((w.eval_real(lam)?, w.eval_real(mu)?))
}

/// `{w(λ), w(μ)}` from the closed formula: the unrestricted bracket or,
/// with `restricted`, its Dirac restriction
/// `(w(λ) - w(μ)) [(w(λ) - w(μ))/(λ - μ) - w(λ) w(μ)]`.
pub fn ah_formula(w: &RationalHerglotz, lam: f64, mu: f64, restricted: bool) -> Result<f64> {
    Ok(ah_terms(w, lam, mu, restricted)?.0)
}

/// The formula and the largest magnitude among its terms.
fn ah_terms(w: &RationalHerglotz, lam: f64, mu: f64, restricted: bool) -> Result<(f64, f64)> {
    let (a, b) = weyl_pair(w, lam, mu)?;
    let d = a - b;
    let quad = d * d / (lam - mu);
    Ok(if restricted {
        let cubic = d * a * b;
        (quad - cubic, quad.abs().max(cubic.abs()))
    } else {
        (quad, quad.abs())
    })
}

/// `{Ξ(λ), Ξ(μ)}` on the restricted leaf, where `w = -(1/λ) e^Ξ`:
/// `(w(λ) - w(μ))^2 / ((λ - μ) w(λ) w(μ)) - w(λ) + w(μ)`.
pub fn xi_bracket(w: &RationalHerglotz, lam: f64, mu: f64) -> Result<f64> {
    let (a, b) = weyl_pair(w, lam, mu)?;
    let d = a - b;
    Ok(d * d / ((lam - mu) * a * b) - a + b)
}

/// Gap between the tensor bracket of `w(λ), w(μ)` and the closed formula
/// for the point's chart, relative to the largest term of the formula.
pub fn verify_formula_vs_tensor(pt: &ChartPoint, lam: f64, mu: f64) -> Result<f64> {
    let w = pt.weyl()?;
    let (formula, scale) = ah_terms(&w, lam, mu, pt.chart == Chart::Restricted)?;
    let tensor = bracket(&Observable::weyl_at(lam), &Observable::weyl_at(mu), pt)?;
    Ok((tensor - formula).abs() / scale.max(1e-12))
}

fn require_unrestricted(pt: &ChartPoint) -> Result<()> {
    if pt.chart != Chart::Unrestricted {
        return Err(Error::InvalidInput(
            "Dirac reduction starts from the unrestricted chart".into(),
        ));
    }
    Ok(())
}

/// `{p_0, log q_0}`, the constraint bracket of the reduction.
fn constraint_bracket(pt: &ChartPoint) -> Result<f64> {
    let c = bracket(&Observable::p0(), &Observable::log_q0(), pt)?;
    if !(c.abs() > 1e-12) {
        return Err(Error::ConstraintDegenerate);
    }
    Ok(c)
}

/// Dirac bracket for the constraints `p_0 = const`, `log q_0 = const`:
/// `{F,G}' = {F,G} + ({F,p_0}{log q_0,G} - {F,log q_0}{p_0,G}) / {p_0, log q_0}`.
pub fn dirac_reduce(pt: &ChartPoint, f: &Observable, g: &Observable) -> Result<f64> {
    require_unrestricted(pt)?;
    let c = constraint_bracket(pt)?;
    let (p0, lq) = (Observable::p0(), Observable::log_q0());
    let fg = bracket(f, g, pt)?;
    let f_p0 = bracket(f, &p0, pt)?;
    let lq_g = bracket(&lq, g, pt)?;
    let f_lq = bracket(f, &lq, pt)?;
    let p0_g = bracket(&p0, g, pt)?;
    Ok(fg + (f_p0 * lq_g - f_lq * p0_g) / c)
}

/// The reduced tensor `J' = J + (b aᵀ - a bᵀ) / c` with `a = J∇p_0`,
/// `b = J∇log q_0`, `c = {p_0, log q_0}`.
pub fn dirac_reduced_tensor(pt: &ChartPoint) -> Result<PoissonTensor> {
    require_unrestricted(pt)?;
    let c = constraint_bracket(pt)?;
    let j = tensor_at(pt);
    let a = j.apply(&Observable::p0().gradient(pt)?);
    let b = j.apply(&Observable::log_q0().gradient(pt)?);
    let m = j.size();
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for k in 0..m {
            out.push(j.get(i, k) + (b[i] * a[k] - a[i] * b[k]) / c);
        }
    }
    Ok(PoissonTensor::from_entries(pt.dim(), out))
}

/// `max |J'_ik - J^restricted_ik|` at a point with `q_0 = 1`.
pub fn dirac_vs_restricted(pt: &ChartPoint) -> Result<f64> {
    let reduced = dirac_reduced_tensor(pt)?;
    let restricted = tensor_at(&ChartPoint::new(
        pt.lambdas.clone(),
        pt.rhos.clone(),
        Chart::Restricted,
    )?);
    let m = reduced.size();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for k in 0..m {
            worst = worst.max((reduced.get(i, k) - restricted.get(i, k)).abs());
        }
    }
    Ok(worst)
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Brackets of the dual function `-1/w` data on the unrestricted chart:
/// `{ρ'_k, γ_n} = ρ'_k δ`, `{γ_k, γ_n} = 0`, `{q_0, γ_s} = {q_0, ρ'_k} = 0`,
/// `{ρ'_k, p_0} = ρ'_k`, `{p_0, γ_s} = 0`, `{p_0, q_0} = q_0`.
pub fn dual_identities(pt: &ChartPoint) -> Result<Report> {
    require_unrestricted(pt)?;
    let n = pt.dim();
    if n < 2 {
        return Err(Error::InvalidInput("dual identities need N >= 2".into()));
    }
    let mut report = Report {
        near_boundary: pt.near_boundary(),
        ..Report::default()
    };
    let (p0, q0) = (Observable::p0(), Observable::q0());
    let q0_value = q0.eval(pt)?;
    for k in 1..n {
        let rd = Observable::rho_dual(k);
        let rd_value = rd.eval(pt)?;
        for s in 1..n {
            let g = Observable::gamma(s);
            report.record(
                "rho_dual_gamma",
                (bracket(&rd, &g, pt)? - rd_value * delta(k, s)).abs(),
            );
            if s > k {
                report.record("gamma_gamma", bracket(&Observable::gamma(k), &g, pt)?.abs());
            }
        }
        let g = Observable::gamma(k);
        report.record("q0_gamma", bracket(&q0, &g, pt)?.abs());
        report.record("q0_rho_dual", bracket(&q0, &rd, pt)?.abs());
        report.record("rho_dual_p0", (bracket(&rd, &p0, pt)? - rd_value).abs());
        report.record("p0_gamma", bracket(&p0, &g, pt)?.abs());
    }
    report.record("p0_q0", (bracket(&p0, &q0, pt)? - q0_value).abs());
    Ok(report)
}

/// Canonical relations on the restricted leaf:
/// `{θ_k, λ_n} = δ_k^n - δ_0^n`, `{θ_k, θ_n} = 0`, `{π_n, γ_k} = δ_n^k`,
/// `{γ, γ} = {π, π} = 0`, `{θ'_k, λ_n} = δ_k^n`, and `Σ λ` commuting with
/// `θ, γ, π, ρ`.
pub fn canonical_report(pt: &ChartPoint) -> Result<Report> {
    if pt.chart != Chart::Restricted {
        return Err(Error::InvalidInput(
            "canonical relations live on the restricted chart".into(),
        ));
    }
    let n = pt.dim();
    if n < 2 {
        return Err(Error::InvalidInput(
            "canonical relations need N >= 2".into(),
        ));
    }
    let mut report = Report {
        near_boundary: pt.near_boundary(),
        ..Report::default()
    };
    let casimir = Observable::casimir();
    for k in 1..n {
        let theta = Observable::theta(k);
        let theta_p = Observable::theta_prime(k);
        let gamma = Observable::gamma(k);
        let pi = Observable::pi(k);
        for m in 0..n {
            let lam = Observable::lambda(m);
            let want = delta(k, m) - delta(0, m);
            report.record("theta_lambda", (bracket(&theta, &lam, pt)? - want).abs());
            if m >= 1 {
                report.record(
                    "theta_prime_lambda",
                    (bracket(&theta_p, &lam, pt)? - delta(k, m)).abs(),
                );
            }
        }
        for m in 1..n {
            report.record(
                "pi_gamma",
                (bracket(&Observable::pi(m), &gamma, pt)? - delta(m, k)).abs(),
            );
            if m > k {
                report.record(
                    "theta_theta",
                    bracket(&theta, &Observable::theta(m), pt)?.abs(),
                );
                report.record(
                    "gamma_gamma",
                    bracket(&gamma, &Observable::gamma(m), pt)?.abs(),
                );
                report.record("pi_pi", bracket(&pi, &Observable::pi(m), pt)?.abs());
            }
        }
        for obs in [&theta, &gamma, &pi] {
            report.record("casimir", bracket(&casimir, obs, pt)?.abs());
        }
    }
    for k in 0..n {
        report.record("casimir", bracket(&casimir, &Observable::rho(k), pt)?.abs());
    }
    Ok(report)
}

/// `|{c_0, v_0} + c_0/2|` on the restricted leaf, the linear bracket of
/// the matrix entries recovered from the rational one.
pub fn linear_bracket_residual(pt: &ChartPoint) -> Result<f64> {
    let c0 = Observable::c0();
    let b = bracket(&c0, &Observable::v0(), pt)?;
    Ok((b + 0.5 * c0.eval(pt)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1_w() -> RationalHerglotz {
        RationalHerglotz::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap()
    }

    fn pt(l: &[f64], r: &[f64], chart: Chart) -> ChartPoint {
        ChartPoint::new(l.to_vec(), r.to_vec(), chart).unwrap()
    }

    #[test]
    fn closed_form_spot_values() {
        let w = e1_w();
        assert!((ah_formula(&w, -1.0, 3.0, false).unwrap() + 4.0 / 9.0).abs() < 1e-15);
        assert!((ah_formula(&w, -1.0, 3.0, true).unwrap() - 4.0 / 27.0).abs() < 1e-15);
        assert!(matches!(
            ah_formula(&w, 1.0, 1.0 + 1e-8, true),
            Err(Error::CoincidentArguments(_))
        ));
        assert!(matches!(
            ah_formula(&w, 2.0, 3.0, true),
            Err(Error::AtPole(_))
        ));
    }

    #[test]
    fn xi_form_matches_restricted_formula() {
        let w = RationalHerglotz::new(vec![-0.5, 1.0, 2.5], vec![0.2, 0.5, 0.3]).unwrap();
        for (l, m) in [(-1.0, 3.0), (0.2, 1.7), (4.0, -2.0)] {
            let a = w.eval_real(l).unwrap();
            let b = w.eval_real(m).unwrap();
            let want = ah_formula(&w, l, m, true).unwrap() / (a * b);
            assert!((xi_bracket(&w, l, m).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_matches_formulas() {
        let r =
            verify_formula_vs_tensor(&pt(&[0.0, 2.0], &[0.5, 0.5], Chart::Restricted), -1.0, 3.0);
        assert!(r.unwrap() < 1e-12);
        let u = pt(&[0.0, 2.0], &[0.5, 1.0 / 3.0], Chart::Unrestricted);
        assert!(verify_formula_vs_tensor(&u, -1.0, 3.0).unwrap() < 1e-12);
    }

    #[test]
    fn dirac_examples() {
        let p = pt(&[0.0, 2.0], &[0.5, 0.5], Chart::Unrestricted);
        let b = dirac_reduce(&p, &Observable::weyl_at(-1.0), &Observable::weyl_at(3.0)).unwrap();
        assert!((b - 4.0 / 27.0).abs() < 1e-12);
        let f = Observable::weyl_at(0.7);
        assert!(dirac_reduce(&p, &f, &f).unwrap().abs() < 1e-15);
        assert!(
            dirac_reduce(&p, &Observable::casimir(), &Observable::rho(1))
                .unwrap()
                .abs()
                < 1e-15
        );
        assert!(dirac_vs_restricted(&p).unwrap() < 1e-14);
    }

    #[test]
    fn dual_identities_example() {
        let p = pt(&[0.0, 2.0], &[0.5, 1.0 / 3.0], Chart::Unrestricted);
        let b = bracket(&Observable::p0(), &Observable::q0(), &p).unwrap();
        assert!((b - 5.0 / 6.0).abs() < 1e-14);
        assert!(dual_identities(&p).unwrap().max() < 1e-5);
    }

    #[test]
    fn canonical_e1() {
        let p = pt(&[0.0, 2.0], &[0.5, 0.5], Chart::Restricted);
        let b = bracket(&Observable::theta(1), &Observable::lambda(1), &p).unwrap();
        assert!((b - 1.0).abs() < 1e-8);
        let b = bracket(&Observable::pi(1), &Observable::gamma(1), &p).unwrap();
        assert!((b - 1.0).abs() < 1e-8);
        assert!(canonical_report(&p).unwrap().max() < 1e-6);
    }

    #[test]
    fn canonical_n4() {
        let p = pt(
            &[-1.2, -0.1, 0.8, 2.0],
            &[0.1, 0.4, 0.3, 0.2],
            Chart::Restricted,
        );
        let r = canonical_report(&p).unwrap();
        assert!(r.max() < 1e-6, "{r:?}");
    }

    #[test]
    fn linear_bracket() {
        let p = pt(
            &[-1.2, -0.1, 0.8, 2.0],
            &[0.1, 0.4, 0.3, 0.2],
            Chart::Restricted,
        );
        assert!(linear_bracket_residual(&p).unwrap() < 1e-6);
    }
}
