//! Finite Jacobi matrices and their orthogonal polynomials of the first
//! (`P`) and second (`Q`) kind.
//!
//! A Jacobi matrix of size `N` is stored by its diagonal `v_0..v_{N-1}` and
//! its strictly positive off-diagonal `c_0..c_{N-2}`. The polynomials solve
//! the eigenvalue recurrence
//!
//! ```text
//! c_{n-1} y_{n-1} + v_n y_n + c_n y_{n+1} = λ y_n
//! ```
//!
//! with `P_{-1} = 0, P_0 = 1` and `Q_0 = 0, Q_1 = 1/c_0`. The last step uses
//! the closure coefficient `c_{N-1} = Π c_k^{-1}`, which makes `P_N` the monic
//! characteristic polynomial and `Q_N` the monic characteristic polynomial of
//! the matrix with its first row and column removed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJacobi")]
pub struct JacobiMatrix {
    v: Vec<f64>,
    c: Vec<f64>,
}

#[derive(Deserialize)]
struct RawJacobi {
    v: Vec<f64>,
    c: Vec<f64>,
}

impl TryFrom<RawJacobi> for JacobiMatrix {
    type Error = Error;

    fn try_from(raw: RawJacobi) -> Result<Self> {
        JacobiMatrix::new(raw.v, raw.c)
    }
}

impl JacobiMatrix {
    pub fn new(v: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidMatrix("empty diagonal".into()));
        }
        if c.len() + 1 != v.len() {
            return Err(Error::InvalidMatrix(format!(
                "diagonal has {} entries but off-diagonal has {}",
                v.len(),
                c.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite diagonal entry".into()));
        }
        if let Some(k) = c.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidMatrix(format!(
                "c[{k}] = {} is not positive",
                c[k]
            )));
        }
        Ok(Self { v, c })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.v
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.c
    }

    /// `c_{N-1} = Π_{k<N-1} c_k^{-1}`; only used for the last step of the recurrences.
    pub fn closure_coefficient(&self) -> f64 {
        self.c.iter().map(|c| c.recip()).product()
    }

    /// Off-diagonal coefficient including the virtual `c_{N-1}`.
    fn coupling(&self, n: usize) -> f64 {
        if n + 1 == self.dim() {
            self.closure_coefficient()
        } else {
            self.c[n]
        }
    }

    /// `P_0(λ), …, P_N(λ)` by the three-term recurrence.
    pub fn eval_p(&self, lambda: f64) -> PolySequence {
        let n = self.dim();
        let mut values = Vec::with_capacity(n + 1);
        values.push(1.0);
        let mut prev = 0.0;
        for k in 0..n {
            let back = if k == 0 { 0.0 } else { self.c[k - 1] * prev };
            let next = ((lambda - self.v[k]) * values[k] - back) / self.coupling(k);
            prev = values[k];
            values.push(next);
        }
        PolySequence { values }
    }

    /// `Q_0(λ), …, Q_N(λ)` by the same recurrence started from `Q_0 = 0, Q_1 = 1/c_0`.
    ///
    /// For `N = 1` the single step uses the closure coefficient (which is 1),
    /// giving `Q_1 = 1`.
    pub fn eval_q(&self, lambda: f64) -> PolySequence {
        let n = self.dim();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        values.push(1.0 / self.coupling(0));
        for k in 1..n {
            let next = ((lambda - self.v[k]) * values[k] - self.c[k - 1] * values[k - 1])
                / self.coupling(k);
            values.push(next);
        }
        PolySequence { values }
    }

    /// `P_N(λ)` and its derivative, the monic characteristic polynomial.
    pub fn char_poly_with_derivative(&self, lambda: f64) -> (f64, f64) {
        let (mut p_prev, mut p) = (0.0, 1.0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        for k in 0..self.dim() {
            let back = if k == 0 { 0.0 } else { self.c[k - 1] };
            let ck = self.coupling(k);
            let p_next = ((lambda - self.v[k]) * p - back * p_prev) / ck;
            let d_next = (p + (lambda - self.v[k]) * d - back * d_prev) / ck;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d)
    }

    /// The principal block `L_{[k,p]}` with diagonal `v_k..v_p`.
    pub fn truncate(&self, k: usize, p: usize) -> Result<JacobiMatrix> {
        if k > p || p >= self.dim() {
            return Err(Error::IndexOutOfRange(format!(
                "truncate [{k}, {p}] of a {}x{} matrix",
                self.dim(),
                self.dim()
            )));
        }
        Ok(JacobiMatrix {
            v: self.v[k..=p].to_vec(),
            c: self.c[k..p].to_vec(),
        })
    }

    /// `L x` for a vector of length `N`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.v[i] * x[i];
                if i > 0 {
                    acc += self.c[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.c[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Moments `s_k = (L^k δ(0), δ(0))` for `k = 0..=count`.
    pub fn moments(&self, count: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        x[0] = 1.0;
        let mut out = Vec::with_capacity(count + 1);
        out.push(1.0);
        for _ in 0..count {
            x = self.apply(&x);
            out.push(x[0]);
        }
        out
    }

    /// `L + shift·I`.
    pub fn shifted(&self, shift: f64) -> JacobiMatrix {
        JacobiMatrix {
            v: self.v.iter().map(|v| v + shift).collect(),
            c: self.c.clone(),
        }
    }

    /// Largest absolute entrywise difference; `∞` if the sizes differ.
    pub fn max_abs_diff(&self, other: &JacobiMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.v
            .iter()
            .zip(&other.v)
            .chain(self.c.iter().zip(&other.c))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum.
    pub(crate) fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r =
                if i > 0 { self.c[i - 1] } else { 0.0 } + if i + 1 < n { self.c[i] } else { 0.0 };
            lo = lo.min(self.v[i] - r);
            hi = hi.max(self.v[i] + r);
        }
        (lo, hi)
    }
}

/// Values of `P_0..P_N` (or `Q_0..Q_N`) at a fixed argument.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySequence {
    pub values: Vec<f64>,
}

impl PolySequence {
    /// The last entry, `P_N` or `Q_N`.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("sequence has N+1 >= 2 entries")
    }
}

impl std::ops::Index<usize> for PolySequence {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> JacobiMatrix {
        JacobiMatrix::new(vec![1.0, 1.0], vec![1.0]).unwrap()
    }

    /// det(T - λI) of a tridiagonal block by the continuant recursion.
    fn tridiag_det(v: &[f64], c: &[f64], lambda: f64) -> f64 {
        let (mut prev, mut cur) = (1.0, 1.0);
        for i in 0..v.len() {
            let back = if i == 0 {
                0.0
            } else {
                c[i - 1] * c[i - 1] * prev
            };
            let next = (v[i] - lambda) * cur - back;
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn p_examples() {
        assert_eq!(e1().eval_p(0.0).values, vec![1.0, -1.0, 0.0]);
        assert_eq!(e1().eval_p(2.0).values, vec![1.0, 1.0, 0.0]);
        let l = JacobiMatrix::new(vec![0.3, -2.0, 5.0], vec![0.5, 2.0]).unwrap();
        assert_eq!(l.eval_p(17.0)[0], 1.0);
    }

    #[test]
    fn q_examples() {
        // Q_2(0) = -det(L_[1,1])/(c_0 c_1) = -1 for E1.
        assert_eq!(e1().eval_q(0.0).values, vec![0.0, 1.0, -1.0]);
        let sym = JacobiMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(sym.eval_q(0.0).values, vec![0.0, 1.0, 0.0]);
        assert_eq!(sym.eval_q(3.0)[0], 0.0);
    }

    #[test]
    fn p_and_q_match_determinants() {
        let l =
            JacobiMatrix::new(vec![0.3, -0.7, 0.1, 0.9, -0.2], vec![0.4, 1.5, 0.8, 1.1]).unwrap();
        for &lambda in &[-2.0, -0.35, 0.0, 0.77, 2.4] {
            let p = l.eval_p(lambda);
            let q = l.eval_q(lambda);
            let mut prod = 1.0;
            for n in 1..=l.dim() {
                prod *= l.coupling(n - 1);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let dp = sign * tridiag_det(&l.v[..n], &l.c, lambda) / prod;
                assert!((p[n] - dp).abs() <= 1e-10 * dp.abs().max(1.0), "P_{n}");
                let dq = -sign * tridiag_det(&l.v[1..n], &l.c[1..], lambda) / prod;
                assert!((q[n] - dq).abs() <= 1e-10 * dq.abs().max(1.0), "Q_{n}");
            }
        }
    }

    #[test]
    fn recurrence_residual() {
        let l = JacobiMatrix::new(vec![0.3, -0.7, 0.1, 0.9], vec![0.4, 1.5, 0.8]).unwrap();
        let lambda = 0.61;
        let p = l.eval_p(lambda);
        for n in 0..l.dim() {
            let back = if n == 0 { 0.0 } else { l.c[n - 1] * p[n - 1] };
            let r = back + l.v[n] * p[n] + l.coupling(n) * p[n + 1] - lambda * p[n];
            assert!(r.abs() <= 1e-12 * (lambda * p[n]).abs().max(1.0));
        }
    }

    #[test]
    fn char_poly_derivative() {
        let l = JacobiMatrix::new(vec![0.3, -0.7, 0.1], vec![0.4, 1.5]).unwrap();
        let x = 0.37;
        let h = 1e-6;
        let (p, d) = l.char_poly_with_derivative(x);
        assert!((p - l.eval_p(x).last()).abs() < 1e-14);
        let fd = (l.eval_p(x + h).last() - l.eval_p(x - h).last()) / (2.0 * h);
        assert!((d - fd).abs() < 1e-8);
    }

    #[test]
    fn truncation() {
        let l = JacobiMatrix::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(
            l.truncate(1, 2).unwrap(),
            JacobiMatrix::new(vec![2.0, 3.0], vec![2.0]).unwrap()
        );
        assert_eq!(
            e1().truncate(1, 1).unwrap(),
            JacobiMatrix::new(vec![1.0], vec![]).unwrap()
        );
        assert_eq!(l.truncate(0, 2).unwrap(), l);
        assert!(matches!(l.truncate(2, 1), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(l.truncate(0, 3), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn moment_examples() {
        assert_eq!(e1().moments(3), vec![1.0, 1.0, 2.0, 4.0]);
        assert_eq!(e1().moments(0), vec![1.0]);
        let sym = JacobiMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(sym.moments(2), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_invalid() {
        assert!(JacobiMatrix::new(vec![], vec![]).is_err());
        assert!(JacobiMatrix::new(vec![1.0, 2.0], vec![0.0]).is_err());
        assert!(JacobiMatrix::new(vec![1.0, 2.0], vec![-1.0]).is_err());
        assert!(JacobiMatrix::new(vec![1.0, 2.0], vec![]).is_err());
    }

    #[test]
    fn json_shape() {
        let l: JacobiMatrix = serde_json::from_str(r#"{"v":[1.0,1.0],"c":[1.0]}"#).unwrap();
        assert_eq!(l, e1());
        assert!(serde_json::from_str::<JacobiMatrix>(r#"{"v":[1.0,1.0],"c":[-1.0]}"#).is_err());
    }
}
