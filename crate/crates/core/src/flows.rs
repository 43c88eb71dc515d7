//! Commuting Hamiltonian flows.
//!
//! `H_j = (1/j) Σ λ_n^j` moves the weights with the spectrum fixed and is
//! linear in the angles `θ`. `T_j = (1/j) Σ γ_n^j` moves the quasimomenta
//! with the divisor fixed. The Lax equation for the matrix entries is
//! integrated directly as an independent check of `H_2`.

use serde::{Deserialize, Serialize};

use crate::coords::{pi_from, theta_from, w_from_divisor, DivisorQuasimomentum};
use crate::error::{Error, Result};
use crate::inverse::lanczos_reconstruct;
use crate::jacobi::JacobiMatrix;
use crate::spectral::eigen;
use crate::weyl::RationalHerglotz;

/// Largest exponent spread `max - min` of `t λ_k^{j-1}` accepted by [`flow_h`].
pub const MAX_EXPONENT_SPREAD: f64 = 700.0;

/// Largest eigenvalue drift per step accepted by [`lax_integrate`].
pub const MAX_STEP_DRIFT: f64 = 1e-6;

/// Ratio between the Lax time and the `H_2` flow time, fixed by the
/// two-point example `ρ_1(t) = e^{2t}/(1 + e^{2t})`.
pub const LAX_TIME_SIGN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    H,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub family: Family,
    pub j: usize,
    pub t: f64,
}

impl FlowSpec {
    /// Checks `1 ≤ j ≤ N` for `H` and `1 ≤ j ≤ N-1` for `T`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let top = match self.family {
            Family::H => n,
            Family::T => n.saturating_sub(1),
        };
        if self.j == 0 || self.j > top {
            return Err(Error::IndexOutOfRange(format!(
                "{:?}_{} with N = {n}",
                self.family, self.j
            )));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidInput(format!("flow time {}", self.t)));
        }
        Ok(())
    }
}

/// Time `t` of `H_j`: `ρ_k(t) ∝ ρ_k(0) e^{t λ_k^{j-1}}`, renormalized.
pub fn flow_h(w0: &RationalHerglotz, j: usize, t: f64) -> Result<RationalHerglotz> {
    w0.require_normalized()?;
    FlowSpec {
        family: Family::H,
        j,
        t,
    }
    .validate(w0.dim())?;
    let exps: Vec<f64> = w0
        .poles()
        .iter()
        .map(|&l| t * l.powi(j as i32 - 1))
        .collect();
    let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bottom = exps.iter().copied().fold(f64::INFINITY, f64::min);
    if top - bottom > MAX_EXPONENT_SPREAD {
        return Err(Error::Overflow(top - bottom));
    }
    let raw: Vec<f64> = w0
        .residues()
        .iter()
        .zip(&exps)
        .map(|(&r, &e)| r * (e - top).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    RationalHerglotz::new(w0.poles().to_vec(), raw.iter().map(|r| r / total).collect())
}

/// Time `t` of `T_j`: `π_k(t) = π_k(0) + t γ_k^{j-1}`.
pub fn flow_t(dq0: &DivisorQuasimomentum, j: usize, t: f64) -> Result<DivisorQuasimomentum> {
    FlowSpec {
        family: Family::T,
        j,
        t,
    }
    .validate(dq0.dim())?;
    let pis = dq0
        .gammas
        .iter()
        .zip(&dq0.pis)
        .map(|(&g, &p)| p + t * g.powi(j as i32 - 1))
        .collect();
    DivisorQuasimomentum::new(dq0.gammas.clone(), pis, dq0.casimir)
}

fn lax_field(v: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let sq = |k: isize| {
        if k < 0 || k as usize >= c.len() {
            0.0
        } else {
            c[k as usize] * c[k as usize]
        }
    };
    let dv = (0..n)
        .map(|k| sq(k as isize) - sq(k as isize - 1))
        .collect();
    let dc = (0..c.len())
        .map(|k| 0.5 * c[k] * (v[k + 1] - v[k]))
        .collect();
    (dv, dc)
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| x + a * y).collect()
}

/// RK4 for `v̇_k = c_k² - c_{k-1}²`, `ċ_k = c_k (v_{k+1} - v_k) / 2` up to
/// time `t` with step at most `dt`. Eigenvalues are compared after every step.
pub fn lax_integrate(l0: &JacobiMatrix, t: f64, dt: f64) -> Result<JacobiMatrix> {
    if !(dt > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("t = {t}, dt = {dt}")));
    }
    if t.abs() / dt > 1e7 {
        return Err(Error::InvalidInput(format!(
            "{} steps exceed 1e7",
            t.abs() / dt
        )));
    }
    let steps = (t.abs() / dt).ceil() as usize;
    if steps == 0 {
        return Ok(l0.clone());
    }
    let h = t / steps as f64;
    let mut v = l0.diag().to_vec();
    let mut c = l0.off_diag().to_vec();
    let mut lambdas = eigen(l0)?.lambdas;
    for _ in 0..steps {
        let (k1v, k1c) = lax_field(&v, &c);
        let (k2v, k2c) = lax_field(&axpy(&v, 0.5 * h, &k1v), &axpy(&c, 0.5 * h, &k1c));
        let (k3v, k3c) = lax_field(&axpy(&v, 0.5 * h, &k2v), &axpy(&c, 0.5 * h, &k2c));
        let (k4v, k4c) = lax_field(&axpy(&v, h, &k3v), &axpy(&c, h, &k3c));
        for k in 0..v.len() {
            v[k] += h / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
        }
        for k in 0..c.len() {
            c[k] += h / 6.0 * (k1c[k] + 2.0 * k2c[k] + 2.0 * k3c[k] + k4c[k]);
        }
        let next = eigen(&JacobiMatrix::new(v.clone(), c.clone())?)?.lambdas;
        let drift = next
            .iter()
            .zip(&lambdas)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if drift > MAX_STEP_DRIFT {
            return Err(Error::StepTooLarge(drift));
        }
        lambdas = next;
    }
    JacobiMatrix::new(v, c)
}

/// `c_k = exp((q_k - q_{k+1})/2)`, `v_k = -p_k`.
pub fn flaschka(q: &[f64], p: &[f64]) -> Result<JacobiMatrix> {
    if q.len() != p.len() {
        return Err(Error::InvalidInput(format!(
            "{} positions and {} momenta",
            q.len(),
            p.len()
        )));
    }
    let c = q.windows(2).map(|w| (0.5 * (w[0] - w[1])).exp()).collect();
    JacobiMatrix::new(p.iter().map(|x| -x).collect(), c)
}

/// `Σ v_k²/2 + Σ c_k² = ½ tr L²`.
pub fn hamiltonian(l: &JacobiMatrix) -> f64 {
    0.5 * l.diag().iter().map(|v| v * v).sum::<f64>()
        + l.off_diag().iter().map(|c| c * c).sum::<f64>()
}

/// `Σ p_k²/2 + Σ exp(q_k - q_{k+1})`.
pub fn toda_hamiltonian(q: &[f64], p: &[f64]) -> f64 {
    0.5 * p.iter().map(|x| x * x).sum::<f64>()
        + q.windows(2).map(|w| (w[0] - w[1]).exp()).sum::<f64>()
}

/// One sample of a trajectory, written as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub matrix: JacobiMatrix,
    pub lambdas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub thetas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub pis: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn new(t: f64, w: &RationalHerglotz) -> Result<Self> {
        let matrix = lanczos_reconstruct(&w.to_spectral()?)?;
        let (thetas, gammas, pis) = if w.dim() < 2 {
            (Vec::new(), Vec::new(), Vec::new())
        } else {
            let dq = pi_from(w)?;
            (theta_from(w)?.thetas, dq.gammas, dq.pis)
        };
        Ok(Self {
            t,
            matrix,
            lambdas: w.poles().to_vec(),
            rhos: w.residues().to_vec(),
            thetas,
            gammas,
            pis,
        })
    }
}

/// State of the flow `family_j` from `w0` at time `t`.
pub fn flow_state(
    w0: &RationalHerglotz,
    family: Family,
    j: usize,
    t: f64,
) -> Result<RationalHerglotz> {
    match family {
        Family::H => flow_h(w0, j, t),
        Family::T => {
            w0.require_normalized()?;
            w_from_divisor(&flow_t(&pi_from(w0)?, j, t)?)
        }
    }
}

/// Records at every time in `times`.
pub fn trajectory(
    w0: &RationalHerglotz,
    family: Family,
    j: usize,
    times: &[f64],
) -> Result<Vec<TrajectoryRecord>> {
    times
        .iter()
        .map(|&t| TrajectoryRecord::new(t, &flow_state(w0, family, j, t)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::spectral::weyl;

    fn e1() -> RationalHerglotz {
        RationalHerglotz::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn h2_on_two_points() {
        for t in [-1.5, 0.0, 0.3, 2.0] {
            let w = flow_h(&e1(), 2, t).unwrap();
            let e = (2.0 * t).exp();
            assert!((w.residues()[1] - e / (1.0 + e)).abs() < 1e-15);
            let th = theta_from(&w).unwrap().thetas[0];
            assert!((th - 2.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn h_flow_satisfies_its_ode() {
        let w0 = RationalHerglotz::new(vec![-1.0, 0.2, 1.5], vec![0.3, 0.5, 0.2]).unwrap();
        let (t, h) = (0.4, 1e-5);
        for j in 1..=3 {
            let w = flow_h(&w0, j, t).unwrap();
            let up = flow_h(&w0, j, t + h).unwrap();
            let down = flow_h(&w0, j, t - h).unwrap();
            let pw = |l: f64| l.powi(j as i32 - 1);
            let mean: f64 = w
                .poles()
                .iter()
                .zip(w.residues())
                .map(|(&l, &r)| pw(l) * r)
                .sum();
            for k in 0..3 {
                let d = (up.residues()[k] - down.residues()[k]) / (2.0 * h);
                let want = (pw(w.poles()[k]) - mean) * w.residues()[k];
                assert!((d - want).abs() < 1e-8);
            }
        }
        assert_eq!(flow_h(&w0, 1, 3.0).unwrap().residues(), w0.residues());
        assert_eq!(flow_h(&w0, 2, 0.0).unwrap(), w0);
    }

    #[test]
    fn h_flow_errors() {
        assert!(matches!(flow_h(&e1(), 2, 400.0), Err(Error::Overflow(_))));
        assert!(matches!(
            flow_h(&e1(), 3, 1.0),
            Err(Error::IndexOutOfRange(_))
        ));
        let raw = RationalHerglotz::new(vec![0.0, 2.0], vec![0.5, 0.6]).unwrap();
        assert!(matches!(flow_h(&raw, 2, 1.0), Err(Error::NotNormalized(_))));
        let w = flow_h(&e1(), 2, 300.0).unwrap();
        assert_eq!(w.residues()[1], 1.0);
    }

    #[test]
    fn t1_on_two_points() {
        let dq = DivisorQuasimomentum::new(vec![1.0], vec![0.0], 2.0).unwrap();
        for t in [-0.7, 0.5, 1.3] {
            let moved = flow_t(&dq, 1, t).unwrap();
            assert_eq!(moved.pis, vec![t]);
            assert_eq!(moved.gammas, dq.gammas);
            let w = w_from_divisor(&moved).unwrap();
            let s = (0.5 * t).exp();
            assert!((w.poles()[0] - (1.0 - s)).abs() < 1e-12);
            assert!((w.poles()[1] - (1.0 + s)).abs() < 1e-12);
            let l = lanczos_reconstruct(&w.to_spectral().unwrap()).unwrap();
            assert!(l.max_abs_diff(&JacobiMatrix::new(vec![1.0, 1.0], vec![s]).unwrap()) < 1e-12);
        }
        let sym = DivisorQuasimomentum::new(vec![0.0], vec![0.25], 0.0).unwrap();
        assert_eq!(flow_t(&sym, 1, 1.0).unwrap().pis, vec![1.25]);
        assert_eq!(
            flow_t(&dq, 2, 1.0),
            Err(Error::IndexOutOfRange("T_2 with N = 2".into()))
        );
    }

    #[test]
    fn lax_examples() {
        let l = JacobiMatrix::new(vec![1.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(lax_integrate(&l, 0.0, 1e-3).unwrap(), l);
        let moved = lax_integrate(&l, 0.5, 1e-3).unwrap();
        let sd = eigen(&moved).unwrap();
        assert!(sd.lambdas[0].abs() < 1e-9 && (sd.lambdas[1] - 2.0).abs() < 1e-9);
        let odd = lax_integrate(
            &JacobiMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap(),
            0.8,
            1e-3,
        )
        .unwrap();
        assert!((odd.diag()[0] + odd.diag()[1]).abs() < 1e-14);
        assert!(matches!(
            lax_integrate(&l, 1.0, 0.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            lax_integrate(&l, 2.0, 1.0),
            Err(Error::StepTooLarge(_))
        ));
    }

    #[test]
    fn lax_matches_h2_flow() {
        let mut rng = random::rng(11);
        for n in 2..=6 {
            let l = random::jacobi(&mut rng, n);
            let t = 0.7;
            let lax = lax_integrate(&l, t, 1e-3).unwrap();
            let w = flow_h(&weyl(&l).unwrap(), 2, LAX_TIME_SIGN * t).unwrap();
            let exact = lanczos_reconstruct(&w.to_spectral().unwrap()).unwrap();
            assert!(
                lax.max_abs_diff(&exact) < 1e-6,
                "N = {n}: {}",
                lax.max_abs_diff(&exact)
            );
        }
    }

    #[test]
    fn flaschka_examples() {
        let l = flaschka(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(l, JacobiMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap());
        let l = flaschka(&[1.0, 0.0], &[-1.0, -1.0]).unwrap();
        assert_eq!(l.diag(), &[1.0, 1.0]);
        assert!((l.off_diag()[0] - 0.5f64.exp()).abs() < 1e-15);
        let (q, p) = ([0.3, -0.2, 0.5], [0.1, 0.7, -0.4]);
        let l = flaschka(&q, &p).unwrap();
        assert!((hamiltonian(&l) - toda_hamiltonian(&q, &p)).abs() < 1e-14);
        // ½ tr L² computed from L² applied to the basis.
        let n = l.dim();
        let mut tr = 0.0;
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            tr += l.apply(&l.apply(&e))[i];
        }
        assert!((hamiltonian(&l) - 0.5 * tr).abs() < 1e-14);
    }

    #[test]
    fn trajectory_records() {
        let recs = trajectory(&e1(), Family::T, 1, &[0.0, 1.0]).unwrap();
        assert_eq!(recs.len(), 2);
        assert!((recs[1].pis[0] - 1.0).abs() < 1e-10);
        assert!((recs[1].matrix.off_diag()[0] - 0.5f64.exp()).abs() < 1e-10);
        let single = RationalHerglotz::new(vec![0.5], vec![1.0]).unwrap();
        let rec = &trajectory(&single, Family::H, 1, &[2.0]).unwrap()[0];
        assert!(rec.thetas.is_empty() && rec.gammas.is_empty());
        let json = serde_json::to_string(&recs[0]).unwrap();
        assert!(json.starts_with("{\"t\":0.0,\"matrix\":{\"v\":"));
    }
}
