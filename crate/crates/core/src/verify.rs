//! Named invariant suites over seed-generated instances.
//!
//! Every check records the worst residual it saw together with its
//! threshold. A suite passes when no residual exceeds its threshold.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::coords::{pi_from, theta_from, w_from_divisor};
use crate::error::{Error, Result};
use crate::flows::{flow_h, flow_t, lax_integrate, LAX_TIME_SIGN};
use crate::inverse::{lanczos_reconstruct, stieltjes_reconstruct};
use crate::jacobi::JacobiMatrix;
use crate::poisson::{
    ah_formula, canonical_report, dirac_vs_restricted, dual_identities, jacobi_identity_residual,
    linear_bracket_residual, tensor_at, verify_formula_vs_tensor, xi_bracket, Chart, ChartPoint,
};
use crate::poly;
use crate::random::{self, InstanceRng};
use crate::spectral::{divisor, eigen, gluing_check, weyl, weyl_solution_residual};
use crate::weyl::{
    krein, to_quotient, trace_moments, trace_via_delta, trace_via_krein, unshift_moments,
    RationalHerglotz,
};

/// Random instances drawn per suite.
pub const INSTANCES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Roundtrip,
    Traces,
    Brackets,
    Canonical,
    Dual,
    Flows,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Roundtrip,
        Suite::Traces,
        Suite::Brackets,
        Suite::Canonical,
        Suite::Dual,
        Suite::Flows,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Roundtrip => "roundtrip",
            Suite::Traces => "traces",
            Suite::Brackets => "brackets",
            Suite::Canonical => "canonical",
            Suite::Dual => "dual",
            Suite::Flows => "flows",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub residuals: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub near_boundary: bool,
}

impl VerifyReport {
    pub fn record(&mut self, name: &str, residual: f64, threshold: f64) {
        let entry = self.residuals.entry(name.to_string()).or_insert(0.0);
        if residual.is_nan() || *entry < residual {
            *entry = residual;
        }
        self.thresholds.insert(name.to_string(), threshold);
    }

    /// Checks whose residual exceeds the threshold (or is NaN).
    pub fn failures(&self) -> Vec<(&str, f64, f64)> {
        self.residuals
            .iter()
            .filter_map(|(k, &r)| {
                let t = self.thresholds[k];
                (r.is_nan() || r > t).then_some((k.as_str(), r, t))
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    /// Replaces every threshold.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.thresholds.values_mut().for_each(|t| *t = tol);
        self
    }
}

/// `|Σ_n q(λ_n)/p'(λ_n) - 1|` for a normalized `w`.
pub fn quotient_identity_residual(w: &RationalHerglotz) -> f64 {
    let pq = to_quotient(w);
    let poles = w.poles();
    let total: f64 = (0..poles.len())
        .map(|n| poly::eval(pq.q(), poles[n]) / poly::node_derivative(poles, n))
        .sum();
    (total - 1.0).abs()
}

/// Points of `[λ_0 - 1, λ_{N-1} + 1]` on two staggered grids of `k` values.
pub fn bracket_grid(lambdas: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = (lambdas[0] - 1.0, lambdas[lambdas.len() - 1] + 1.0);
    let h = (hi - lo) / k as f64;
    let grid = |off: f64| (0..k).map(|i| lo + (i as f64 + off) * h).collect();
    (grid(0.3), grid(0.7))
}

/// A restricted point from [`random::weyl`], and the same poles with
/// weights rescaled by a factor in `[0.5, 2]` for the unrestricted chart.
pub fn random_points(rng: &mut InstanceRng, n: usize) -> (ChartPoint, ChartPoint) {
    let w = random::weyl(rng, n);
    let s = random::uniform(rng, 0.5, 2.0);
    let restricted = ChartPoint::from_weyl(&w, Chart::Restricted).expect("normalized instance");
    let rhos = w.residues().iter().map(|r| r * s).collect();
    let unrestricted =
        ChartPoint::new(w.poles().to_vec(), rhos, Chart::Unrestricted).expect("valid instance");
    (restricted, unrestricted)
}

fn require_dim(n: usize, min: usize, suite: Suite) -> Result<()> {
    if n < min {
        return Err(Error::InvalidInput(format!(
            "suite {suite} needs N >= {min}"
        )));
    }
    Ok(())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn roundtrip(seed: u64, n: usize) -> Result<VerifyReport> {
    require_dim(n, 1, Suite::Roundtrip)?;
    let mut rng = random::rng(seed);
    let mut r = VerifyReport::default();
    for _ in 0..INSTANCES {
        let l = random::jacobi(&mut rng, n);
        let sd = eigen(&l)?;
        let w = RationalHerglotz::from_spectral(&sd);
        let cf = stieltjes_reconstruct(&to_quotient(&w))?;
        let lz = lanczos_reconstruct(&sd)?;
        r.record("roundtrip_cf", cf.max_abs_diff(&l), 1e-8);
        r.record("roundtrip_lanczos", lz.max_abs_diff(&l), 1e-8);
        r.record("cf_vs_lanczos", cf.max_abs_diff(&lz), 1e-8);
        r.record(
            "normalization",
            (sd.rhos.iter().sum::<f64>() - 1.0).abs(),
            1e-12,
        );
        r.record("quotient_identity", quotient_identity_residual(&w), 1e-10);
        if n >= 2 {
            let ok = divisor(&l)?.interlaces(&sd.lambdas);
            r.record("interlacing", if ok { 0.0 } else { 1.0 }, 0.0);
        }
    }
    Ok(r)
}

pub fn traces(seed: u64, n: usize) -> Result<VerifyReport> {
    require_dim(n, 1, Suite::Traces)?;
    let mut rng = random::rng(seed);
    let mut r = VerifyReport::default();
    for _ in 0..INSTANCES {
        let l = random::jacobi(&mut rng, n);
        let w = weyl(&l)?;
        let direct = trace_moments(&w, 3);
        let kd = krein(&w, 3)?;
        let delta = unshift_moments(&trace_via_delta(&kd, 3)?, kd.shift);
        let kf = unshift_moments(&trace_via_krein(&kd)?, kd.shift);
        r.record("trace_delta", max_diff(&direct[1..], &delta[1..]), 1e-10);
        r.record("trace_krein", max_diff(&direct[1..], &kf[1..]), 1e-10);
        let (v0, c0) = (l.diag()[0], l.off_diag().first().copied().unwrap_or(0.0));
        r.record("recurrence_s1", (direct[1] - v0).abs(), 1e-10);
        r.record(
            "recurrence_s2",
            (direct[2] - v0 * v0 - c0 * c0).abs(),
            1e-10,
        );
        r.record(
            "krein_exponential",
            kd.reconstruction_residual(&w, 16)?,
            1e-10,
        );
        let (xs, _) = bracket_grid(w.poles(), 5);
        for x in xs {
            r.record("weyl_solution", weyl_solution_residual(&l, x)?, 1e-9);
        }
        r.record("gluing", gluing_check(&l)?, 1e-9);
    }
    Ok(r)
}

pub fn brackets(seed: u64, n: usize) -> Result<VerifyReport> {
    require_dim(n, 1, Suite::Brackets)?;
    let mut rng = random::rng(seed);
    let mut r = VerifyReport::default();
    let e1 = RationalHerglotz::new(vec![0.0, 2.0], vec![0.5, 0.5])?;
    r.record(
        "spot_4_27",
        (ah_formula(&e1, -1.0, 3.0, true)? - 4.0 / 27.0).abs(),
        1e-8,
    );
    let e1_pt = ChartPoint::from_weyl(&e1, Chart::Restricted)?;
    let tensor_spot = verify_formula_vs_tensor(&e1_pt, -1.0, 3.0)? * 4.0 / 27.0;
    r.record("spot_4_27_tensor", tensor_spot, 1e-8);
    for _ in 0..INSTANCES {
        let (res, unres) = random_points(&mut rng, n);
        let (xs, ys) = bracket_grid(&res.lambdas, 5);
        let w = res.weyl()?;
        for &x in &xs {
            for &y in &ys {
                r.record(
                    "formula_vs_tensor_restricted",
                    verify_formula_vs_tensor(&res, x, y)?,
                    1e-6,
                );
                r.record(
                    "formula_vs_tensor_unrestricted",
                    verify_formula_vs_tensor(&unres, x, y)?,
                    1e-6,
                );
                let (a, b) = (w.eval_real(x)?, w.eval_real(y)?);
                let want = ah_formula(&w, x, y, true)? / (a * b);
                let got = xi_bracket(&w, x, y)?;
                let scale = ((a - b).powi(2) / ((x - y) * a * b))
                    .abs()
                    .max(a.abs())
                    .max(b.abs());
                r.record("xi_form", (got - want).abs() / scale, 1e-10);
            }
        }
        for pt in [&res, &unres] {
            r.record("antisymmetry", tensor_at(pt).antisymmetry_residual(), 0.0);
            r.record("jacobi_identity", jacobi_identity_residual(pt), 1e-10);
            r.near_boundary |= pt.near_boundary();
        }
        let on_leaf = ChartPoint::new(res.lambdas.clone(), res.rhos.clone(), Chart::Unrestricted)?;
        r.record("dirac_vs_restricted", dirac_vs_restricted(&on_leaf)?, 1e-6);
    }
    Ok(r)
}

pub fn canonical(seed: u64, n: usize) -> Result<VerifyReport> {
    require_dim(n, 2, Suite::Canonical)?;
    let mut rng = random::rng(seed);
    let mut r = VerifyReport::default();
    for _ in 0..INSTANCES {
        let (pt, _) = random_points(&mut rng, n);
        let rep = canonical_report(&pt)?;
        for (k, v) in rep.residuals {
            r.record(&k, v, 1e-6);
        }
        r.near_boundary |= rep.near_boundary;
        r.record("linear_bracket", linear_bracket_residual(&pt)?, 1e-6);
    }
    Ok(r)
}

pub fn dual(seed: u64, n: usize) -> Result<VerifyReport> {
    require_dim(n, 2, Suite::Dual)?;
    let mut rng = random::rng(seed);
    let mut r = VerifyReport::default();
    for _ in 0..INSTANCES {
        let (_, pt) = random_points(&mut rng, n);
        let rep = dual_identities(&pt)?;
        for (k, v) in rep.residuals {
            r.record(&k, v, 1e-5);
        }
        r.near_boundary |= rep.near_boundary;
    }
    Ok(r)
}

/// Closed forms of the two-point example at a few times.
pub fn two_point_flows(r: &mut VerifyReport) -> Result<()> {
    let e1 = RationalHerglotz::new(vec![0.0, 2.0], vec![0.5, 0.5])?;
    let dq = pi_from(&e1)?;
    for t in [-1.0, 0.25, 1.0, 3.0] {
        let w = flow_h(&e1, 2, t)?;
        let e = (2.0 * t).exp();
        r.record("e1_rho", (w.residues()[1] - e / (1.0 + e)).abs(), 1e-9);
        r.record(
            "e1_theta",
            (theta_from(&w)?.thetas[0] - 2.0 * t).abs(),
            1e-9,
        );
        let moved = w_from_divisor(&flow_t(&dq, 1, t)?)?;
        let l = lanczos_reconstruct(&moved.to_spectral()?)?;
        r.record("t1_c0", (l.off_diag()[0] - (0.5 * t).exp()).abs(), 1e-9);
    }
    Ok(())
}

pub fn flows(seed: u64, n: usize) -> Result<VerifyReport> {
    require_dim(n, 2, Suite::Flows)?;
    let mut rng = random::rng(seed);
    let mut r = VerifyReport::default();
    two_point_flows(&mut r)?;
    for _ in 0..INSTANCES {
        let l = random::jacobi(&mut rng, n);
        let t = random::uniform(&mut rng, 0.2, 1.0);
        lax_and_commutation(&l, t, &mut r)?;
        let w = weyl(&l)?;
        angle_linearization(&w, &mut r)?;
        let dq = pi_from(&w)?;
        for j in 1..n {
            let moved = flow_t(&dq, j, t)?;
            let want: Vec<f64> = dq
                .gammas
                .iter()
                .zip(&dq.pis)
                .map(|(&g, &p)| p + t * g.powi(j as i32 - 1))
                .collect();
            r.record("pi_linearization", max_diff(&moved.pis, &want), 0.0);
            r.record("t_flow_casimir", (moved.casimir - dq.casimir).abs(), 0.0);
            r.record("t_flow_gammas", max_diff(&moved.gammas, &dq.gammas), 0.0);
        }
    }
    Ok(r)
}

/// Lax RK4 against the `H_2` flow, spectral drift, and `H_j` commutation.
pub fn lax_and_commutation(l: &JacobiMatrix, t: f64, r: &mut VerifyReport) -> Result<()> {
    let lax = lax_integrate(l, t, 1e-3)?;
    let w = weyl(l)?;
    let exact = lanczos_reconstruct(&flow_h(&w, 2, LAX_TIME_SIGN * t)?.to_spectral()?)?;
    r.record("lax_vs_h2", lax.max_abs_diff(&exact), 1e-6);
    r.record(
        "lax_drift",
        max_diff(&eigen(&lax)?.lambdas, w.poles()),
        1e-8,
    );
    let n = l.dim();
    for j in 1..=n.min(3) {
        for k in (j + 1)..=n.min(3) {
            let a = flow_h(&flow_h(&w, j, 0.6 * t)?, k, t)?;
            let b = flow_h(&flow_h(&w, k, t)?, j, 0.6 * t)?;
            r.record("commutativity", max_diff(a.residues(), b.residues()), 1e-9);
        }
    }
    Ok(())
}

/// `θ_k(t) - θ_k(0) = t(λ_k^{j-1} - λ_0^{j-1})` for every `j ≤ N`, with
/// `t ≤ 5` shortened to stay inside the exponent range.
pub fn angle_linearization(w: &RationalHerglotz, r: &mut VerifyReport) -> Result<()> {
    let n = w.dim();
    if n < 2 {
        return Ok(());
    }
    let th0 = theta_from(w)?.thetas;
    let lam = w.poles();
    for j in 1..=n {
        let pw: Vec<f64> = lam.iter().map(|l| l.powi(j as i32 - 1)).collect();
        let spread = pw.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - pw.iter().copied().fold(f64::INFINITY, f64::min);
        let t = if spread > 0.0 {
            5.0f64.min(600.0 / spread)
        } else {
            5.0
        };
        let th = theta_from(&flow_h(w, j, t)?)?.thetas;
        for k in 1..n {
            let want = th0[k - 1] + t * (pw[k] - pw[0]);
            r.record("angle_linearization", (th[k - 1] - want).abs(), 1e-8);
        }
    }
    Ok(())
}

pub fn run(suite: Suite, seed: u64, n: usize) -> Result<VerifyReport> {
    match suite {
        Suite::Roundtrip => roundtrip(seed, n),
        Suite::Traces => traces(seed, n),
        Suite::Brackets => brackets(seed, n),
        Suite::Canonical => canonical(seed, n),
        Suite::Dual => dual(seed, n),
        Suite::Flows => flows(seed, n),
        Suite::All => {
            let mut all = VerifyReport::default();
            for s in Suite::EACH {
                let part = run(s, seed, n)?;
                for (k, v) in part.residuals {
                    let t = part.thresholds[&k];
                    all.record(&format!("{s}.{k}"), v, t);
                }
                all.near_boundary |= part.near_boundary;
            }
            Ok(all)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("dual".parse::<Suite>().unwrap(), Suite::Dual);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn all_suites_pass_n4() {
        let r = run(Suite::All, 7, 4).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert!(r.residuals.contains_key("brackets.spot_4_27"));
    }

    #[test]
    fn small_sizes() {
        for n in [1, 2] {
            for s in [Suite::Roundtrip, Suite::Traces, Suite::Brackets] {
                let r = run(s, 3, n).unwrap();
                assert!(r.passed(), "{s} N={n}: {:?}", r.failures());
            }
        }
        assert!(flows(3, 2).unwrap().passed());
        assert!(canonical(1, 1).is_err());
        assert!(flows(1, 1).is_err());
    }

    #[test]
    fn nan_is_a_failure() {
        let mut r = VerifyReport::default();
        r.record("x", 0.0, 1.0);
        r.record("x", f64::NAN, 1.0);
        r.record("x", 0.5, 1.0);
        assert!(!r.passed());
    }
}
