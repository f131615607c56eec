use maass_universality::hecke::*;
use maass_universality::io::{bundled_fixture, load_dataset};
use maass_universality::special::primes::{divisor_count, primes_up_to};
use maass_universality::Error;
use proptest::prelude::*;

fn form_from(values: &[f64], cap: u64) -> MaassFormData {
    let pairs = primes_up_to(cap)
        .into_iter()
        .zip(values.iter().cycle())
        .map(|(p, &u)| (p, u * hecke_norm(p)))
        .collect();
    MaassFormData::new("random", 5.0, Parity::Even, pairs, Source::Synthetic).unwrap()
}

fn constant(value: f64, cap: u64) -> MaassFormData {
    let pairs = primes_up_to(cap).into_iter().map(|p| (p, value)).collect();
    MaassFormData::new("constant", 5.0, Parity::Odd, pairs, Source::Synthetic).unwrap()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn unit_vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 62)
}

proptest! {
    #[test]
    fn multiplicative_on_coprime_pairs(u in unit_vector(), m in 1u64..=300, n in 1u64..=300) {
        prop_assume!(gcd(m, n) == 1);
        let f = form_from(&u, 300);
        let lhs = hecke_eigenvalue_n(&f, m * n).unwrap();
        let rhs = hecke_eigenvalue_n(&f, m).unwrap() * hecke_eigenvalue_n(&f, n).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn hecke_relation(u in unit_vector(), n in 1u64..=60, k in 1u64..=60) {
        let f = form_from(&u, 60);
        let lhs = hecke_eigenvalue_n(&f, n).unwrap() * hecke_eigenvalue_n(&f, k).unwrap();
        let g = gcd(n, k);
        let rhs: f64 = (1..=g)
            .filter(|d| g % d == 0)
            .map(|d| hecke_eigenvalue_n(&f, n * k / (d * d)).unwrap())
            .sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn satake_consistency(u in -1.0f64..=1.0, idx in 0usize..25) {
        let p = primes_up_to(100)[idx];
        let lambda = u * hecke_norm(p);
        let s = satake(lambda, p).unwrap();
        prop_assert!(((s.alpha + s.beta).re - lambda).abs() < 1e-12);
        prop_assert!((s.alpha + s.beta).im.abs() < 1e-12);
        prop_assert!(((s.alpha * s.beta) - 1.0).norm() < 1e-12);
        prop_assert!(s.alpha.norm() >= s.beta.norm() - 1e-15);
        prop_assert!(s.alpha.norm() <= (p as f64).sqrt() * (1.0 + 1e-12));
        if lambda.abs() <= 2.0 {
            prop_assert!((s.alpha.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn prime_power_growth(u in -1.0f64..=1.0, idx in 0usize..25, k in 0u32..=12) {
        let p = primes_up_to(100)[idx];
        let v = prime_power(u * hecke_norm(p), k);
        prop_assert!(v.abs() <= (k as f64 + 1.0) * (p as f64).powf(k as f64 / 2.0) * (1.0 + 1e-12));
    }

    #[test]
    fn table_matches_factorization(u in unit_vector(), n in 1u64..=500) {
        let f = form_from(&u, 500);
        let t = CoefficientTable::build(&f, 500).unwrap();
        let direct = hecke_eigenvalue_n(&f, n).unwrap();
        prop_assert!((t.get(n) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }
}

#[test]
fn coefficient_examples() {
    let d = constant(2.0, 100);
    assert_eq!(hecke_eigenvalue_n(&d, 12).unwrap(), 6.0);
    for n in 1..=100 {
        assert_eq!(hecke_eigenvalue_n(&d, n).unwrap(), divisor_count(n) as f64);
    }
    let z = constant(0.0, 100);
    for p in primes_up_to(100) {
        assert_eq!(hecke_eigenvalue_n(&z, p * p).unwrap(), -1.0);
        assert_eq!(hecke_eigenvalue_n(&z, p * p * p).unwrap(), 0.0);
    }
    assert!((ramanujan_average(&z, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn bound_violations_name_the_prime() {
    let n2 = hecke_norm(2);
    assert!((n2 - 2.121_320_343_559_642_4).abs() < 1e-15);
    assert!((hecke_norm(3) - 2.309_401_076_758_503).abs() < 1e-15);
    let err = MaassFormData::new("bad", 3.0, Parity::Even, vec![(2, 0.1), (3, 2.4)], Source::Lmfdb).unwrap_err();
    assert!(matches!(err, Error::BoundViolation { p: 3, .. }), "{err}");
    assert!(err.to_string().contains("bad"));
    assert!(MaassFormData::new("edge", 3.0, Parity::Even, vec![(2, n2)], Source::Lmfdb).is_ok());
}

#[test]
fn fixture_forms_are_tempered_in_practice() {
    let forms = load_dataset(&bundled_fixture()).unwrap();
    assert!(forms.len() >= 4);
    for f in &forms {
        assert!(f.p_cap() >= 1000);
        let avg = ramanujan_average(f, 10_000).unwrap();
        assert!((0.1..=10.0).contains(&avg), "{}: {avg}", f.label);
        // Ramanujan on the computed range.
        assert!(f.eigenvalues().iter().all(|v| v.abs() <= 2.0 + 1e-6));
    }
}

#[test]
fn truncation_keeps_prefix() {
    let f = constant(1.0, 100);
    let t = f.truncated(30);
    assert_eq!(t.p_cap(), 29);
    assert_eq!(t.primes(), &primes_up_to(30)[..]);
    assert!(matches!(t.lambda_p(31), Err(Error::CoefficientCap { p: 31, cap: 29, .. })));
}
