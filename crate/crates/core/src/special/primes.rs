//! Prime sieves and small-integer arithmetic.

/// All primes p <= x, ascending.
pub fn primes_up_to(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let n = x as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(estimate_count(x));
    let mut i = 2usize;
    while i <= n {
        if !composite[i] {
            out.push(i as u64);
            if let Some(sq) = i.checked_mul(i) {
                let mut j = sq;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        i += 1;
    }
    out
}

fn estimate_count(x: u64) -> usize {
    let xf = x as f64;
    if xf < 20.0 {
        8
    } else {
        (1.26 * xf / xf.ln()) as usize
    }
}

/// Calls `f(p)` for every prime in (lo, hi], ascending, in O(sqrt(hi) + segment) memory.
pub fn for_each_prime_in(lo: u64, hi: u64, mut f: impl FnMut(u64)) {
    if hi <= lo || hi < 2 {
        return;
    }
    let base = primes_up_to((hi as f64).sqrt() as u64 + 1);
    const SEG: u64 = 1 << 20;
    let mut mark = vec![false; SEG as usize];
    let mut seg_lo = lo + 1;
    while seg_lo <= hi {
        let seg_hi = (seg_lo + SEG - 1).min(hi);
        let len = (seg_hi - seg_lo + 1) as usize;
        mark[..len].fill(false);
        for &p in &base {
            if p * p > seg_hi {
                break;
            }
            let mut j = (p * p).max(seg_lo.div_ceil(p) * p);
            while j <= seg_hi {
                mark[(j - seg_lo) as usize] = true;
                j += p;
            }
        }
        for (k, &m) in mark[..len].iter().enumerate() {
            let v = seg_lo + k as u64;
            if !m && v >= 2 {
                f(v);
            }
        }
        seg_lo = seg_hi + 1;
    }
}

/// Primes in (lo, hi] by a segmented sieve.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for_each_prime_in(lo, hi, |p| out.push(p));
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization as (p, k) pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Smallest prime factor for every 0 <= n <= x (0 and 1 map to themselves).
pub fn smallest_prime_factors(x: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..=x as u32).collect();
    let mut i = 2;
    while i * i <= x {
        if spf[i] == i as u32 {
            let mut j = i * i;
            while j <= x {
                if spf[j] == j as u32 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        i += 1;
    }
    spf
}

/// Number of divisors.
pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, k)| k as u64 + 1).product()
}

/// Moebius function.
pub fn mobius(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(100).len(), 25);
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
    }

    #[test]
    fn segmented_matches_plain() {
        let all = primes_up_to(3_000_000);
        let lo = 1_234_567;
        let seg = primes_in_range(lo, 3_000_000);
        let want: Vec<u64> = all.into_iter().filter(|&p| p > lo).collect();
        assert_eq!(seg, want);
        assert_eq!(primes_in_range(0, 10), vec![2, 3, 5, 7]);
    }

    #[test]
    fn factor_and_spf() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(999_983), vec![(999_983, 1)]);
        let spf = smallest_prime_factors(1000);
        for n in 2..=1000u64 {
            assert_eq!(spf[n as usize] as u64, factorize(n)[0].0);
        }
        assert_eq!(divisor_count(360), 24);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(1), 1);
    }
}
