//! Dense real polynomials stored by coefficients, constant term first.

/// Horner evaluation.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| i as f64 * a)
        .collect()
}

/// Monic polynomial `Π (x - r)`.
pub fn from_roots(roots: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    for &r in roots {
        out = mul_linear(&out, r);
    }
    out
}

/// Multiply by `(x - r)`.
pub fn mul_linear(coeffs: &[f64], r: f64) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len() + 1];
    for (i, &a) in coeffs.iter().enumerate() {
        out[i + 1] += a;
        out[i] -= r * a;
    }
    out
}

/// Coefficients of `x ↦ p(x + shift)`.
pub fn taylor_shift(coeffs: &[f64], shift: f64) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += shift * out[j + 1];
        }
    }
    out
}

/// Degree after dropping exact trailing zeros.
pub fn degree(coeffs: &[f64]) -> Option<usize> {
    coeffs.iter().rposition(|&a| a != 0.0)
}

/// Product `Π_{j≠k} (x_k - x_j)`, i.e. the derivative of `Π (x - x_j)` at `x_k`.
pub fn node_derivative(nodes: &[f64], k: usize) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &x)| nodes[k] - x)
        .product()
}

/// Bisection for a sign change of `f` on `[lo, hi]`; the endpoints must have
/// opposite signs. Stops once the bracket is at rounding level.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    let lo_negative = f_lo < 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All roots of a real-rooted polynomial with simple roots, ascending.
///
/// Roots of `p'` separate the roots of `p`, so the roots are found degree by
/// degree from the top derivative down, each by bisection on a certified sign
/// change. Returns `None` when some bracket shows no sign change, which means
/// `p` has a multiple or a non-real root.
pub fn real_roots(coeffs: &[f64]) -> Option<Vec<f64>> {
    let deg = degree(coeffs)?;
    let coeffs = &coeffs[..=deg];
    if deg == 0 {
        return Some(Vec::new());
    }
    if deg == 1 {
        return Some(vec![-coeffs[0] / coeffs[1]]);
    }
    let critical = real_roots(&derivative(coeffs))?;
    if critical.len() != deg - 1 {
        return None;
    }
    let lead = coeffs[deg];
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .map(|a| (a / lead).abs())
            .fold(0.0, f64::max);
    let mut edges = Vec::with_capacity(deg + 1);
    edges.push(-bound);
    edges.extend_from_slice(&critical);
    edges.push(bound);

    let f = |x: f64| eval(coeffs, x);
    let mut roots = Vec::with_capacity(deg);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 || fb == 0.0 || (fa < 0.0) == (fb < 0.0) {
            return None;
        }
        roots.push(polish(coeffs, bisect(f, a, b), a, b));
    }
    Some(roots)
}

/// A few guarded Newton steps inside `[lo, hi]`.
fn polish(coeffs: &[f64], mut x: f64, lo: f64, hi: f64) -> f64 {
    let d = derivative(coeffs);
    for _ in 0..3 {
        let fx = eval(coeffs, x);
        let dx = eval(&d, x);
        if fx == 0.0 || dx == 0.0 {
            break;
        }
        let next = x - fx / dx;
        if !(next > lo && next < hi) || eval(coeffs, next).abs() >= fx.abs() {
            break;
        }
        x = next;
    }
    x
}
