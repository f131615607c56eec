use maass_universality::fit::*;
use maass_universality::lfunc::DiscK;
use maass_universality::special::primes::primes_up_to;
use maass_universality::{Complex64, Error};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn quick() -> FitOptions {
    FitOptions { restarts: 3, seed: 5, max_sweeps: 200 }
}

#[test]
fn target_examples() {
    let t = TargetSpec::new(vec![0.0, 0.3]).unwrap();
    let v = t.log_target(c(0.75, 0.1));
    assert!((v - c(0.0, 0.03)).norm() < 1e-16);
    assert!(TargetSpec::new(vec![f64::NAN]).is_err());
}

#[test]
fn g_z_example() {
    // log(1 + 2^{-3/2}) + log(1 + 3^{-3/2})
    let v = g_z(&TargetSpec::one(), 3, c(0.75, 0.0));
    assert!((v - c(0.478_743_365_042_090_5, 0.0)).norm() < 1e-14);
}

#[test]
fn tail_bound_examples() {
    assert!(matches!(tail_bound(5, 0.15), Err(Error::Divergence { q: 7, .. })));
    let t7 = tail_bound(7, 0.15).unwrap();
    assert!(t7.is_finite() && t7 > 0.0);
    for z in [7u64, 100, 10_000, 1_000_000] {
        assert!(tail_bound(2 * z, 0.15).unwrap() < tail_bound(z, 0.15).unwrap());
    }
    assert_eq!(min_admissible_z(0.15).unwrap(), 7);
    assert!(tail_bound(7, 0.3).is_err());
}

#[test]
fn tail_bound_dominates_partial_sums() {
    // The exact sum over Z < p <= 2^22 is a lower bound for the full tail.
    let a = 0.65;
    for z in [7u64, 1000] {
        let partial: f64 = primes_up_to(1 << 22)
            .into_iter()
            .filter(|&p| p > z)
            .map(|p| {
                let q = 4.0 * (p as f64).powf(-a);
                2.0 * q * q / (1.0 - q)
            })
            .sum();
        let b = tail_bound(z, 0.15).unwrap();
        assert!(b >= partial && b < 2.0 * partial, "Z = {z}: {b} vs {partial}");
    }
}

#[test]
fn choose_z_monotone() {
    let zs: Vec<u64> = [2.0, 1.0, 0.4].iter().map(|&e| choose_z(0.15, e).unwrap()).collect();
    assert!(zs.windows(2).all(|w| w[0] <= w[1]), "{zs:?}");
    assert!(zs.iter().all(|&z| z >= 7));
    for (&eps, &z) in [2.0, 1.0, 0.4].iter().zip(&zs) {
        assert!(tail_bound(z, 0.15).unwrap() < eps / 2.0);
    }
    assert!(choose_z(0.15, 0.0).is_err());
}

#[test]
fn fit_improves_on_zero() {
    let k = DiscK::new(0.1, 32).unwrap();
    let t = TargetSpec::one();
    let zero = fit_objective(&t, &OmegaAssignment::zeros(30), &k);
    let fit = fit_omegas(&t, &k, 0.1, 30, &quick()).unwrap();
    assert!(fit.achieved_error < zero);
    assert_eq!(fit.achieved_error, fit_objective(&t, &fit.omega, &k));
    assert_eq!(fit.converged, fit.achieved_error < 0.1);
    assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(fit.restart_objectives.len(), 3);
    assert!(fit.omega.values.iter().all(|&(_, w)| w.abs() <= 2.0));
    // Same seed, same answer.
    assert_eq!(fit_omegas(&t, &k, 0.1, 30, &quick()).unwrap(), fit);
}

#[test]
fn fit_argument_errors() {
    let k = DiscK::new(0.1, 16).unwrap();
    let t = TargetSpec::one();
    assert!(fit_omegas(&t, &k, 0.0, 30, &quick()).is_err());
    assert!(fit_omegas(&t, &k, 0.1, 1, &quick()).is_err());
    assert!(fit_omegas(&t, &k, 0.1, 30, &FitOptions { restarts: 0, ..quick() }).is_err());
    assert!(fit_omegas_structured(&t, &k, 0.1, 30, 5, &quick()).is_err());
    assert!(fit_omegas_structured(&t, &k, 0.1, 30, 31, &quick()).is_err());
}

#[test]
fn grid_refinement() {
    let t = TargetSpec::new(vec![0.0, 0.3]).unwrap();
    let coarse = DiscK::new(0.1, 64).unwrap();
    let fine = DiscK::new(0.1, 256).unwrap();
    let fit = fit_omegas(&t, &coarse, 0.1, 30, &quick()).unwrap();
    let diff = (fit_objective(&t, &fit.omega, &fine) - fit.achieved_error).abs();
    assert!(diff < 1e-3, "{diff}");
}

#[test]
fn structured_split_triangle() {
    let k = DiscK::new(0.1, 32).unwrap();
    let t = TargetSpec::new(vec![0.0, 0.3]).unwrap();
    let s = fit_omegas_structured(&t, &k, 0.1, 100, 7, &quick()).unwrap();
    assert!(s.initial_omega.values.iter().filter(|&&(p, _)| p <= 7).all(|&(_, w)| w == 0.0));
    assert!(s.initial_objective <= s.linear_residual + s.tail_bound);
    assert!(s.linear_residual <= s.initial_objective + s.tail_bound);
    assert!(s.fit.achieved_error <= s.initial_objective);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_conjugation(w in prop::collection::vec(-2.0f64..=2.0, 10), x in 0.55f64..0.95, y in 0.0f64..0.2) {
        let omega = OmegaAssignment::new(29, primes_up_to(29).into_iter().zip(w).collect()).unwrap();
        let t = TargetSpec::new(vec![0.1, -0.4, 0.2]).unwrap();
        let s = c(x, y);
        let a = fit_residual(&t, &omega, s);
        let b = fit_residual(&t, &omega, s.conj());
        prop_assert!((a - b.conj()).norm() < 1e-13);
    }

    #[test]
    fn objective_is_lipschitz(
        w in prop::collection::vec(-2.0f64..=2.0, 10),
        d in prop::collection::vec(-0.2f64..=0.2, 10),
    ) {
        // |1 - w x + x^2| = |1 - alpha x| |1 - beta x| >= (1 - |x|)^2 with |alpha| = |beta| = 1.
        let k = DiscK::new(0.1, 32).unwrap();
        let t = TargetSpec::one();
        let primes = primes_up_to(29);
        let a = OmegaAssignment::new(29, primes.iter().copied().zip(w.iter().copied()).collect()).unwrap();
        let moved: Vec<(u64, f64)> =
            primes.iter().zip(w.iter().zip(&d)).map(|(&p, (&x, &dx))| (p, (x + dx).clamp(-2.0, 2.0))).collect();
        let b = OmegaAssignment::new(29, moved.clone()).unwrap();
        let lip: f64 = primes
            .iter()
            .zip(w.iter().zip(&moved))
            .map(|(&p, (&x, &(_, y)))| {
                let m = (p as f64).powf(-0.65);
                (x - y).abs() * m / ((1.0 - m) * (1.0 - m))
            })
            .sum();
        let delta = (fit_objective(&t, &a, &k) - fit_objective(&t, &b, &k)).abs();
        prop_assert!(delta <= lip * (1.0 + 1e-12) + 1e-15);
    }
}
