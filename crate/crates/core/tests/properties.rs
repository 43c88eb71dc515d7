use proptest::prelude::*;
use toda_core::coords::{
    pi_from, theta_from, theta_prime, w_from_divisor, w_from_gamma, w_from_theta,
};
use toda_core::inverse::{lanczos_reconstruct, stieltjes_reconstruct};
use toda_core::random;
use toda_core::spectral::{divisor, eigen, weyl};
use toda_core::weyl::{from_quotient, to_quotient, zeros};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_transform_roundtrip(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = random::rng(seed);
        if n <= 8 {
            let l = random::jacobi(&mut rng, n);
            let sd = eigen(&l).unwrap();
            let w = weyl(&l).unwrap();
            let cf = stieltjes_reconstruct(&to_quotient(&w)).unwrap();
            let lz = lanczos_reconstruct(&sd).unwrap();
            prop_assert!(cf.max_abs_diff(&l) <= 1e-8);
            prop_assert!(lz.max_abs_diff(&l) <= 1e-8);
            prop_assert!(cf.off_diag().iter().all(|&c| c > 0.0));
            let back = from_quotient(&to_quotient(&w)).unwrap();
            prop_assert!(max_diff(back.poles(), w.poles()) <= 1e-10);
            prop_assert!(max_diff(back.residues(), w.residues()) <= 1e-10);
            if n >= 2 {
                let g = divisor(&l).unwrap().gammas;
                prop_assert!(max_diff(&g, &zeros(&w).unwrap().gammas) <= 1e-10);
            }
        } else {
            let w = random::weyl(&mut rng, n);
            let cf = stieltjes_reconstruct(&to_quotient(&w)).unwrap();
            let lz = lanczos_reconstruct(&w.to_spectral().unwrap()).unwrap();
            prop_assert!(cf.max_abs_diff(&lz) <= 1e-6, "{}", cf.max_abs_diff(&lz));
        }
    }

    #[test]
    fn coordinate_charts_roundtrip(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = random::rng(seed);
        let lambdas = random::spectrum(&mut rng, n);
        let thetas: Vec<f64> = (1..n).map(|_| random::uniform(&mut rng, -50.0, 50.0)).collect();
        let w = w_from_theta(&lambdas, &thetas).unwrap();
        prop_assert!(max_diff(&theta_from(&w).unwrap().thetas, &thetas) <= 1e-9);

        let g1 = random::interlacing(&mut rng, &lambdas);
        let g2 = random::interlacing(&mut rng, &lambdas);
        let w1 = w_from_gamma(&lambdas, &g1).unwrap();
        prop_assert!(max_diff(&zeros(&w1).unwrap().gammas, &g1) <= 1e-9);

        let dq = pi_from(&w1).unwrap();
        let again = pi_from(&w_from_divisor(&dq).unwrap()).unwrap();
        prop_assert!(max_diff(&again.gammas, &dq.gammas) <= 1e-9);
        prop_assert!(max_diff(&again.pis, &dq.pis) <= 1e-9);

        // θ - θ' depends on the spectrum only.
        let w2 = w_from_gamma(&lambdas, &g2).unwrap();
        let gap = |w| -> Vec<f64> {
            let t = theta_from(w).unwrap().thetas;
            let tp = theta_prime(w).unwrap();
            t.iter().zip(&tp).map(|(a, b)| a - b).collect()
        };
        prop_assert!(max_diff(&gap(&w1), &gap(&w2)) <= 1e-10);
    }
}
