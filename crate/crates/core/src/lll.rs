//! Resampling construction of colorings of `[N]`, `N = floor(r^(k-1) / 8k)`,
//! with no monochromatic k-AP.
//!
//! The sampler starts from a uniformly random coloring and repeatedly
//! re-randomizes the first violated progression (enumeration order) until
//! none is left or the budget runs out. Everything is driven by a seeded
//! ChaCha stream, so a run is a pure function of its [`ElParams`].

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ap::{self, Coloring};
use crate::error::{Error, Result};

/// Smallest k for which the interval length formula is certified.
pub const K1: usize = 10;

pub const DEFAULT_MAX_RESAMPLES: u64 = 1_000_000;

/// `floor(r^(k-1) / (8k))`, exactly.
pub fn el_interval_length(r: u32, k: usize) -> Result<u128> {
    if r < 2 || k < 2 {
        return Err(Error::invalid(format!(
            "el_interval_length needs r >= 2, k >= 2 (got r={r}, k={k})"
        )));
    }
    let exp = u32::try_from(k - 1).map_err(|_| Error::invalid("k too large"))?;
    let pow = (r as u128).checked_pow(exp).ok_or_else(|| {
        let bits = (k - 1) as f64 * (r as f64).log2();
        Error::Overflow(format!(
            "{r}^{} needs about {:.0} bits, more than the 128 available",
            k - 1,
            bits.ceil()
        ))
    })?;
    Ok(pow / (8 * k as u128))
}

/// The symmetric local-lemma condition `e * p * (d + 1) <= 1` for
/// `p = r^(1-k)`, `d = 2kn`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LllCheck {
    pub p: f64,
    pub d: f64,
    /// Left-hand side, rounded upwards.
    pub lhs: f64,
    pub satisfied: bool,
}

fn up(x: f64) -> f64 {
    x.next_up()
}

/// Float evaluation with every operation nudged up one ulp, so `satisfied`
/// never errs towards true.
pub fn lll_condition(r: u32, k: usize, n: u64) -> Result<LllCheck> {
    if r < 2 || k < 2 || n < 1 {
        return Err(Error::invalid(format!(
            "lll_condition needs r >= 2, k >= 2, n >= 1 (got r={r}, k={k}, n={n})"
        )));
    }
    // r^(1-k) = 1 / r^(k-1): round the power down, then the quotient up.
    let pow = (r as f64).powi(k as i32 - 1).next_down();
    let p = up(1.0 / pow).min(1.0);
    let d = 2.0 * k as f64 * n as f64;
    let d_up = if d < 9.0e15 { d } else { up(d) };
    let lhs = up(up(up(std::f64::consts::E) * p) * up(d_up + 1.0));
    Ok(LllCheck {
        p,
        d,
        lhs,
        satisfied: lhs <= 1.0,
    })
}

/// Exact decision of `e (2kn + 1) <= r^(k-1)`, bracketing `e` between
/// partial sums of `sum 1/j!` until the comparison is decided.
pub fn lll_condition_exact(r: u32, k: usize, n: u64) -> Result<bool> {
    if r < 2 || k < 2 || n < 1 {
        return Err(Error::invalid(format!(
            "lll_condition needs r >= 2, k >= 2, n >= 1 (got r={r}, k={k}, n={n})"
        )));
    }
    let rhs = BigUint::from(r).pow((k - 1) as u32);
    let events = BigUint::from(2u32) * BigUint::from(k) * BigUint::from(n) + BigUint::one();
    // sum_{j<=m} 1/j! = num / m!, and the tail is below 1 / (m * m!).
    let mut num = BigUint::one();
    let mut fact = BigUint::one();
    for m in 1u32..10_000 {
        let m_big = BigUint::from(m);
        num = num * &m_big + BigUint::one();
        fact *= &m_big;
        let scaled_rhs = &rhs * &fact;
        if &num * &events > scaled_rhs {
            return Ok(false);
        }
        if (&num * &m_big + BigUint::one()) * &events <= scaled_rhs * &m_big {
            return Ok(true);
        }
    }
    Err(Error::invalid("exact local-lemma comparison did not resolve"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `k >= 10` and `n_target = el_interval_length(r, k)`.
    Certified,
    /// Any `k >= 2` and any `n_target`; success is not guaranteed.
    Freeform,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElParams {
    pub r: u32,
    pub k: usize,
    pub n_target: usize,
    pub seed: u64,
    pub max_resamples: u64,
    pub mode: Mode,
}

impl ElParams {
    /// Certified parameters with `n_target` taken from the interval formula.
    pub fn certified(r: u32, k: usize, seed: u64) -> Result<Self> {
        let n = el_interval_length(r, k)?;
        let n_target = usize::try_from(n)
            .map_err(|_| Error::Overflow(format!("interval length {n} does not fit in memory")))?;
        let p = ElParams {
            r,
            k,
            n_target,
            seed,
            max_resamples: DEFAULT_MAX_RESAMPLES,
            mode: Mode::Certified,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn freeform(r: u32, k: usize, n_target: usize, seed: u64) -> Self {
        ElParams {
            r,
            k,
            n_target,
            seed,
            max_resamples: DEFAULT_MAX_RESAMPLES,
            mode: Mode::Freeform,
        }
    }

    pub fn with_max_resamples(mut self, max: u64) -> Self {
        self.max_resamples = max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid("k must be >= 2"));
        }
        if self.mode == Mode::Certified && self.k < K1 {
            return Err(Error::RegimeRefused(format!(
                "certified sampling needs k >= {K1} (got {})",
                self.k
            )));
        }
        if self.n_target < 1 {
            return Err(Error::invalid("n_target must be >= 1"));
        }
        if self.r < 1 {
            return Err(Error::invalid("r must be >= 1"));
        }
        if self.mode == Mode::Certified {
            if self.r < 2 {
                return Err(Error::invalid("certified mode needs r >= 2"));
            }
            let n = el_interval_length(self.r, self.k)?;
            if n != self.n_target as u128 {
                return Err(Error::RegimeRefused(format!(
                    "certified sampling needs n = {n} (got {})",
                    self.n_target
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSuccess {
    pub coloring: Coloring,
    pub resamples: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureReport {
    pub resamples: u64,
    /// Monochromatic progressions left in the final coloring.
    pub violated: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SampleOutcome {
    Success(SampleSuccess),
    Failure(FailureReport),
}

impl SampleOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, SampleOutcome::Success(_))
    }

    pub fn success(self) -> Option<SampleSuccess> {
        match self {
            SampleOutcome::Success(s) => Some(s),
            SampleOutcome::Failure(_) => None,
        }
    }
}

/// Order key matching `ap::enumerate_kaps`: `d` first, then `a`.
type Key = (usize, usize);

/// Cell storage: bytes for small palettes keep the working set in cache.
trait Cell: Copy + Eq {
    fn from_color(c: u32) -> Self;
    fn color(self) -> u32;
}

impl Cell for u8 {
    fn from_color(c: u32) -> Self {
        c as u8
    }
    fn color(self) -> u32 {
        self as u32
    }
}

impl Cell for u32 {
    fn from_color(c: u32) -> Self {
        c
    }
    fn color(self) -> u32 {
        self
    }
}

struct Resampler<T> {
    colors: Vec<T>,
    k: usize,
}

impl<T: Cell> Resampler<T> {
    /// 0-based start `a0`, difference `d`.
    fn is_mono(&self, a0: usize, d: usize) -> bool {
        let c = self.colors[a0];
        (1..self.k).all(|j| self.colors[a0 + j * d] == c)
    }

    /// Pushes every monochromatic AP through 0-based position `x`.
    fn collect_through(&self, x: usize, out: &mut BTreeSet<Key>) {
        let n = self.colors.len();
        let k = self.k;
        let dmax = (n - 1) / (k - 1);
        let c = self.colors[x];
        for d in 1..=dmax {
            // An AP through x either has x at an end or contains both x - d
            // and x + d, so two reads rule most differences out.
            let left = x >= d && self.colors[x - d] == c;
            let right = x + d < n && self.colors[x + d] == c;
            if !left && !right {
                continue;
            }
            // x = a0 + j d with a0 >= 0 and a0 + (k-1) d <= n - 1
            let hi = (x / d).min(k - 1);
            let lo = (k - 1).saturating_sub((n - 1 - x) / d);
            for j in lo..=hi {
                if (j > 0 && !left) || (j < k - 1 && !right) {
                    continue;
                }
                let a0 = x - j * d;
                if (0..k).all(|i| self.colors[a0 + i * d] == c) {
                    out.insert((d, a0));
                }
            }
        }
    }
}

/// Runs the resampling search. Success is re-verified with
/// [`ap::find_mono_kap`] before it is returned.
pub fn sample_mono_free(params: &ElParams) -> Result<SampleOutcome> {
    params.validate()?;
    let (r, k, n) = (params.r, params.k, params.n_target);

    if r == 1 && n >= k {
        return Ok(SampleOutcome::Failure(FailureReport {
            resamples: 0,
            violated: ap::count_kaps(n as u64, k as u64)? as usize,
            reason: "a single color makes every progression monochromatic".into(),
        }));
    }
    if r <= u8::MAX as u32 {
        run::<u8>(params)
    } else {
        run::<u32>(params)
    }
}

fn run<T: Cell>(params: &ElParams) -> Result<SampleOutcome> {
    let (r, k, n) = (params.r, params.k, params.n_target);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let draw = |rng: &mut ChaCha8Rng| T::from_color(rng.gen_range(1..=r));

    let colors: Vec<T> = (0..n).map(|_| draw(&mut rng)).collect();
    let mut state = Resampler { colors, k };

    let mut pending: BTreeSet<Key> = BTreeSet::new();
    if n >= k {
        let initial = Coloring::new(r, state.colors.iter().map(|c| c.color()).collect())?;
        pending.extend(ap::all_mono_kaps(&initial, k)?.iter().map(|p| (p.d, p.a - 1)));
    }

    let mut resamples = 0u64;
    // `pending` always contains every violated AP (plus possibly stale
    // entries), so its least still-violated entry is the first violated AP.
    while let Some((d, a0)) = pending.pop_first() {
        if !state.is_mono(a0, d) {
            continue;
        }
        if resamples == params.max_resamples {
            pending.insert((d, a0));
            let violated = pending.iter().filter(|&&(d, a0)| state.is_mono(a0, d)).count();
            return Ok(SampleOutcome::Failure(FailureReport {
                resamples,
                violated,
                reason: format!("resample budget of {} exhausted", params.max_resamples),
            }));
        }
        resamples += 1;
        for j in 0..k {
            state.colors[a0 + j * d] = draw(&mut rng);
        }
        for j in 0..k {
            state.collect_through(a0 + j * d, &mut pending);
        }
    }

    let coloring = Coloring::new(r, state.colors.iter().map(|c| c.color()).collect())?;
    if n >= k {
        if let Some(p) = ap::find_mono_kap(&coloring, k)? {
            return Err(Error::SamplerFailed(format!(
                "internal: post-hoc verification found {p}"
            )));
        }
    }
    Ok(SampleOutcome::Success(SampleSuccess { coloring, resamples }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_length_examples() {
        assert_eq!(5u128.pow(5) / 48, 65);
        assert_eq!(el_interval_length(5, 6).unwrap(), 65);
        assert_eq!(el_interval_length(2, 10).unwrap(), 6);
        assert_eq!(el_interval_length(2, 7).unwrap(), 1);
        assert_eq!(el_interval_length(2, 3).unwrap(), 0);
        assert!(el_interval_length(1, 3).is_err());
    }

    #[test]
    fn interval_length_overflow_names_width() {
        let err = el_interval_length(1000, 100).unwrap_err();
        match err {
            Error::Overflow(msg) => assert!(msg.contains("bits"), "{msg}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn lll_condition_examples() {
        let c = lll_condition(5, 6, 65).unwrap();
        let direct = std::f64::consts::E * 781.0 / 3125.0;
        assert!((c.lhs - direct).abs() < 1e-12);
        assert!((c.lhs - 0.679).abs() < 1e-3);
        assert!(c.satisfied);

        assert!(!lll_condition(2, 3, 1_000_000).unwrap().satisfied);

        let c = lll_condition(2, 10, 6).unwrap();
        assert!((c.lhs - std::f64::consts::E * 121.0 / 512.0).abs() < 1e-12);
        assert!((c.lhs - 0.642).abs() < 1e-3);
        assert!(c.satisfied);
    }

    #[test]
    fn lll_condition_rounds_up() {
        let c = lll_condition(3, 10, 246).unwrap();
        let plain = std::f64::consts::E * (3f64).powi(-9) * (2.0 * 10.0 * 246.0 + 1.0);
        assert!(c.lhs >= plain);
    }

    #[test]
    fn exact_condition_agrees() {
        for &(r, k, n) in &[(5u32, 6usize, 65u64), (2, 3, 1_000_000), (2, 10, 6), (6, 10, 125_971)] {
            assert_eq!(
                lll_condition_exact(r, k, n).unwrap(),
                lll_condition(r, k, n).unwrap().satisfied,
                "r={r} k={k} n={n}"
            );
        }
        // e * (2*1*... ) borderline: r^(k-1) = 2^1 = 2 vs e*(2*2*n+1) -> false
        assert!(!lll_condition_exact(2, 2, 1).unwrap());
    }

    #[test]
    fn exact_condition_at_the_boundary() {
        // 2^(k-1) >= e (2kn + 1): pick n just on either side.
        let k = 20usize;
        let rhs = 2f64.powi(19);
        let n_edge = ((rhs / std::f64::consts::E - 1.0) / (2.0 * k as f64)).floor() as u64;
        assert!(lll_condition_exact(2, k, n_edge).unwrap());
        assert!(!lll_condition_exact(2, k, n_edge + 1).unwrap());
    }

    #[test]
    fn samples_r5_k6() {
        for seed in 0..5 {
            let params = ElParams::freeform(5, 6, 65, seed);
            let s = sample_mono_free(&params).unwrap().success().expect("success");
            assert_eq!(s.coloring.len(), 65);
            assert_eq!(ap::find_mono_kap(&s.coloring, 6).unwrap(), None);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let params = ElParams::freeform(3, 5, 60, 42);
        let a = sample_mono_free(&params).unwrap();
        let b = sample_mono_free(&params).unwrap();
        assert_eq!(a, b);
        let other = sample_mono_free(&ElParams::freeform(3, 5, 60, 43)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn impossible_instance_fails() {
        let params = ElParams::freeform(2, 3, 9, 7).with_max_resamples(10_000);
        match sample_mono_free(&params).unwrap() {
            SampleOutcome::Failure(f) => {
                assert_eq!(f.resamples, 10_000);
                assert!(f.violated >= 1);
            }
            SampleOutcome::Success(_) => panic!("W(2,3) = 9 forbids success"),
        }
    }

    #[test]
    fn single_color_fails_immediately() {
        let out = sample_mono_free(&ElParams::freeform(1, 3, 5, 0)).unwrap();
        match out {
            SampleOutcome::Failure(f) => assert_eq!(f.resamples, 0),
            _ => panic!(),
        }
        assert!(sample_mono_free(&ElParams::freeform(1, 3, 2, 0)).unwrap().is_success());
    }

    #[test]
    fn certified_mode_gates() {
        assert!(matches!(ElParams::certified(2, 9, 0), Err(Error::RegimeRefused(_))));
        let mut p = ElParams::certified(3, 10, 0).unwrap();
        assert_eq!(p.n_target, 246);
        p.n_target = 300;
        assert!(matches!(sample_mono_free(&p), Err(Error::RegimeRefused(_))));
    }
}
