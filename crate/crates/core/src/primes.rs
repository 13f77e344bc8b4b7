//! Deterministic 64-bit primality and the short prime window below `k - 1`.

/// Window exponent: the interval `[x - x^0.525, x]` with `x = k - 1`.
pub const WINDOW_EXPONENT: f64 = 0.525;

/// Miller-Rabin bases that are a deterministic test for every `n < 2^64`.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if m == p {
            return true;
        }
        if m % p == 0 {
            return false;
        }
    }
    let s = (m - 1).trailing_zeros();
    let d = (m - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, m);
        if x == 1 || x == m - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, m);
            if x == m - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn largest_prime_leq(m: u64) -> Option<u64> {
    (2..=m).rev().find(|&q| is_prime(q))
}

/// Sieve of Eratosthenes: `out[i]` is true iff `i` is prime, for `i <= limit`.
pub fn sieve(limit: usize) -> Vec<bool> {
    let mut out = vec![true; limit + 1];
    out[0] = false;
    if limit >= 1 {
        out[1] = false;
    }
    let mut i = 2;
    while i * i <= limit {
        if out[i] {
            for j in (i * i..=limit).step_by(i) {
                out[j] = false;
            }
        }
        i += 1;
    }
    out
}

/// Primes in `[ceil(lo), hi]` for `hi = k - 1`, `lo = hi - hi^0.525`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeWindow {
    pub k: u64,
    pub lo: f64,
    pub hi: u64,
    pub primes_found: Vec<u64>,
    pub p_star: Option<u64>,
}

impl PrimeWindow {
    pub fn is_empty(&self) -> bool {
        self.primes_found.is_empty()
    }

    /// First integer in the window.
    pub fn lo_ceil(&self) -> u64 {
        self.lo.ceil().max(0.0) as u64
    }
}

/// Lower window end, rounded down one ulp so the window only ever widens.
pub fn window_lower_end(x: u64) -> f64 {
    let x = x as f64;
    (x - x.powf(WINDOW_EXPONENT)).next_down()
}

/// Scans the window below `k - 1` for primes. An empty window is returned as
/// data, not an error.
pub fn bhp_window(k: u64) -> PrimeWindow {
    let hi = k.saturating_sub(1);
    let lo = window_lower_end(hi);
    let start = lo.ceil().max(0.0) as u64;
    let primes_found: Vec<u64> = (start..=hi).filter(|&q| is_prime(q)).collect();
    let p_star = primes_found.last().copied();
    PrimeWindow {
        k,
        lo,
        hi,
        primes_found,
        p_star,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(m: u64) -> bool {
        if m < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= m {
            if m % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn small_values() {
        assert!(is_prime(2));
        assert!(is_prime(97));
        assert!(trial_division(97));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(!is_prime(91));
    }

    #[test]
    fn agrees_with_trial_division_to_a_million() {
        for m in 0..=1_000_000u64 {
            assert_eq!(is_prime(m), trial_division(m), "m={m}");
        }
    }

    #[test]
    fn sieve_agrees() {
        let s = sieve(10_000);
        for (m, &p) in s.iter().enumerate() {
            assert_eq!(p, is_prime(m as u64));
        }
    }

    #[test]
    fn large_known_values() {
        // Largest prime below 2^64, a strong pseudoprime to several bases,
        // and Carmichael numbers.
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(!is_prime(561));
        assert!(is_prime(999_999_937));
        assert!(!is_prime(18_446_744_073_709_551_615));
    }

    #[test]
    fn largest_prime_examples() {
        assert_eq!(largest_prime_leq(99), Some(97));
        assert_eq!(largest_prime_leq(2), Some(2));
        assert_eq!(largest_prime_leq(1), None);
        assert_eq!(largest_prime_leq(0), None);
    }

    #[test]
    fn window_k100() {
        let w = bhp_window(100);
        assert_eq!(w.hi, 99);
        assert!((w.lo - 87.84).abs() < 0.01, "lo={}", w.lo);
        assert_eq!(w.primes_found, vec![89, 97]);
        assert_eq!(w.p_star, Some(97));
    }

    #[test]
    fn window_k4() {
        let w = bhp_window(4);
        assert!(w.lo < 2.0);
        assert_eq!(w.primes_found, vec![2, 3]);
        assert_eq!(w.p_star, Some(3));
    }

    #[test]
    fn window_k10000() {
        let w = bhp_window(10_000);
        assert_eq!(w.hi, 9999);
        let width = 9999.0 - w.lo;
        assert!((width - 125.9).abs() < 0.1, "width={width}");
        assert_eq!(w.p_star, Some(9973));
        assert!(w.p_star.unwrap() as f64 >= w.lo);
    }

    #[test]
    fn lower_end_is_rounded_down() {
        let x = 12345u64;
        let exact = x as f64 - (x as f64).powf(WINDOW_EXPONENT);
        assert!(window_lower_end(x) < exact);
    }
}
