//! Seeded random instances.
//!
//! Matrices have `v_k` uniform in `[-1, 1]` and `c_k` uniform in `[0.1, 2]`.
//! The generator is ChaCha8, so a seed fixes every instance on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jacobi::JacobiMatrix;
use crate::weyl::RationalHerglotz;

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn jacobi(rng: &mut InstanceRng, n: usize) -> JacobiMatrix {
    let v = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let c = (0..n.saturating_sub(1))
        .map(|_| rng.gen_range(0.1..=2.0))
        .collect();
    JacobiMatrix::new(v, c).expect("generated entries are valid")
}

/// Sorted spectrum with gaps uniform in `[0.2, 1.2]`, starting in `[-2, 0]`.
pub fn spectrum(rng: &mut InstanceRng, n: usize) -> Vec<f64> {
    let mut x = rng.gen_range(-2.0..0.0);
    (0..n)
        .map(|_| {
            let out = x;
            x += rng.gen_range(0.2..1.2);
            out
        })
        .collect()
}

/// One point drawn uniformly from each cell `(λ_{k-1}, λ_k)`.
pub fn interlacing(rng: &mut InstanceRng, lambdas: &[f64]) -> Vec<f64> {
    lambdas
        .windows(2)
        .map(|w| {
            let t: f64 = rng.gen_range(0.05..0.95);
            w[0] + t * (w[1] - w[0])
        })
        .collect()
}

/// Normalized Weyl function with weights bounded away from zero.
pub fn weyl(rng: &mut InstanceRng, n: usize) -> RationalHerglotz {
    let poles = spectrum(rng, n);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    RationalHerglotz::new(poles, raw.iter().map(|r| r / total).collect())
        .expect("generated data is valid")
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform(rng: &mut InstanceRng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_instances_repeat() {
        let a = jacobi(&mut rng(7), 5);
        let b = jacobi(&mut rng(7), 5);
        assert_eq!(a, b);
        assert!(a.diag().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(a.off_diag().iter().all(|c| (0.1..=2.0).contains(c)));
    }

    #[test]
    fn interlacing_cells() {
        let mut r = rng(3);
        let l = spectrum(&mut r, 6);
        let g = interlacing(&mut r, &l);
        assert!(crate::spectral::interlaces(&l, &g));
    }
}
