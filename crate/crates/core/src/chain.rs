//! Log-space evaluation of the lower-bound chain
//!
//! ```text
//! H(k) >= p*^(p* - r0) * r0^(k-1) / (16k),     r0 = floor(k / ln k),
//! ```
//!
//! with `p*` the largest prime in the window below `k - 1`, its k-th-root
//! factorization `H(k)^(1/k) / k >= factor1 * factor2 * factor3`, the
//! analytic per-factor lower bounds, the separation function `f(k)`, and the
//! `R(r0)` landscape. Nothing astronomically large is ever materialized.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::primes::{bhp_window, largest_prime_leq, WINDOW_EXPONENT};

/// Separation threshold: `f(k) > 0` is established from here on.
pub const K_SEP: u64 = 10_000;
/// Threshold of the interval-length formula.
pub const K1: u64 = 10;
/// Default constant in the combined factor-3 bound.
pub const DEFAULT_C1: f64 = 3.0;

/// `1 - WINDOW_EXPONENT`, the decay exponent of the error terms.
const DECAY: f64 = 1.0 - WINDOW_EXPONENT;

#[derive(Clone, Debug, PartialEq)]
pub enum ChainStatus {
    Certified,
    /// Arithmetic is still meaningful but at least one regime gate fails.
    Heuristic(Vec<String>),
}

impl ChainStatus {
    pub fn is_certified(&self) -> bool {
        matches!(self, ChainStatus::Certified)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ChainStatus::Certified => "certified",
            ChainStatus::Heuristic(_) => "heuristic",
        }
    }
}

/// Where `p_star` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeSource {
    Window,
    /// Window empty; fell back to the largest prime `<= k - 1`.
    Fallback,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub k: u64,
    pub r0: u64,
    pub p_star: u64,
    pub prime_source: PrimeSource,
    pub log_a_r0_lower: f64,
    pub log_chain_lower: f64,
    pub ratio_lower: f64,
    pub factor1: f64,
    pub factor2: f64,
    pub factor3: f64,
    pub f_k: f64,
    /// `c * k^-0.475 * ln k`, with `c` recorded in `eps_constant`.
    pub eps_k_bound: f64,
    pub eps_constant: f64,
    pub status: ChainStatus,
}

impl ChainReport {
    /// `ratio_lower * e * ln k / k`; tends to 1 from below.
    pub fn normalized_ratio(&self) -> f64 {
        let k = self.k as f64;
        self.ratio_lower * E * k.ln() / k
    }

    pub const CSV_HEADER: &'static str = "k,r0,p_star,factor1,factor2,factor3,ratio_lower,f_k,status";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.6},{}",
            self.k,
            self.r0,
            self.p_star,
            self.factor1,
            self.factor2,
            self.factor3,
            self.ratio_lower,
            self.f_k,
            self.status.label()
        )
    }
}

/// `floor(k / ln k)`.
pub fn r0_of(k: u64) -> u64 {
    let k = k as f64;
    (k / k.ln()).floor() as u64
}

/// `f(k) = k - 1 - k^0.525 - k / ln k`.
pub fn separation(k: f64) -> f64 {
    k - 1.0 - k.powf(WINDOW_EXPONENT) - k / k.ln()
}

/// `f'(k) = 1 - 0.525 k^-0.475 - (ln k - 1) / (ln k)^2`.
pub fn separation_derivative(k: f64) -> f64 {
    let l = k.ln();
    1.0 - WINDOW_EXPONENT * k.powf(-DECAY) - (l - 1.0) / (l * l)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Separation {
    pub k: u64,
    pub f: f64,
    pub f_prime: f64,
    pub positive: bool,
}

pub fn separation_check(k: u64) -> Result<Separation> {
    if k < 3 {
        return Err(Error::invalid(format!("separation_check needs k >= 3 (got {k})")));
    }
    let f = separation(k as f64);
    Ok(Separation {
        k,
        f,
        f_prime: separation_derivative(k as f64),
        positive: f > 0.0,
    })
}

pub fn chain_lower_bound(k: u64) -> Result<ChainReport> {
    chain_lower_bound_with(k, DEFAULT_C1)
}

/// As [`chain_lower_bound`], with the constant of the reported error term
/// set explicitly.
pub fn chain_lower_bound_with(k: u64, eps_constant: f64) -> Result<ChainReport> {
    if k < 3 {
        return Err(Error::invalid(format!("chain_lower_bound needs k >= 3 (got {k})")));
    }
    let kf = k as f64;
    let r0 = r0_of(k);
    let window = bhp_window(k);
    let mut gates = Vec::new();
    let (p_star, prime_source) = match window.p_star {
        Some(p) => (p, PrimeSource::Window),
        None => {
            gates.push("prime window is empty".to_string());
            let p = largest_prime_leq(k - 1)
                .ok_or_else(|| Error::invalid(format!("no prime <= {}", k - 1)))?;
            (p, PrimeSource::Fallback)
        }
    };
    if k < K_SEP {
        gates.push(format!("k < {K_SEP}"));
    }
    if k < K1 {
        gates.push(format!("k < {K1}"));
    }
    if r0 < 2 {
        gates.push("r0 < 2".to_string());
    }
    if r0 >= p_star {
        gates.push(format!("r0 = {r0} is not below p* = {p_star}"));
    }

    let ln_r0 = (r0 as f64).ln();
    let ln_p = (p_star as f64).ln();
    let steps = p_star as f64 - r0 as f64;
    let log_a_r0_lower = (kf - 1.0) * ln_r0 - (16.0 * kf).ln();
    let log_chain_lower = steps * ln_p + log_a_r0_lower;
    let ratio_lower = (log_chain_lower / kf).exp() / kf;
    let factor1 = (-(16.0 * kf).ln() / kf).exp();
    let factor2 = ((kf - 1.0) / kf * ln_r0).exp();
    let factor3 = (steps / kf * ln_p).exp() / kf;
    let f_k = separation(kf);
    let eps_k_bound = eps_constant * kf.powf(-DECAY) * kf.ln();

    if !(log_chain_lower.is_finite() && ratio_lower.is_finite()) {
        return Err(Error::invalid(format!("non-finite chain value at k={k}")));
    }
    let status = if gates.is_empty() {
        ChainStatus::Certified
    } else {
        ChainStatus::Heuristic(gates)
    };
    Ok(ChainReport {
        k,
        r0,
        p_star,
        prime_source,
        log_a_r0_lower,
        log_chain_lower,
        ratio_lower,
        factor1,
        factor2,
        factor3,
        f_k,
        eps_k_bound,
        eps_constant,
        status,
    })
}

/// Computed quantities next to their analytic lower bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorBounds {
    pub k: u64,
    pub log_p_star: f64,
    /// `ln k - 4 k^-0.475`
    pub log_p_star_bound: f64,
    pub steps_ratio: f64,
    /// `1 - 1/ln k - 2 k^-0.475`
    pub steps_ratio_bound: f64,
    pub product: f64,
    /// `ln k - 1 - c1 k^-0.475 ln k`
    pub product_bound: f64,
    pub c1: f64,
}

impl FactorBounds {
    pub fn log_p_star_holds(&self) -> bool {
        self.log_p_star >= self.log_p_star_bound
    }

    pub fn steps_ratio_holds(&self) -> bool {
        self.steps_ratio >= self.steps_ratio_bound
    }

    /// Advisory: the constant is only claimed for large k.
    pub fn product_holds(&self) -> bool {
        self.product >= self.product_bound
    }
}

pub fn factor_bounds(k: u64) -> Result<FactorBounds> {
    factor_bounds_with(k, DEFAULT_C1)
}

pub fn factor_bounds_with(k: u64, c1: f64) -> Result<FactorBounds> {
    if k < K_SEP {
        return Err(Error::RegimeRefused(format!(
            "factor bounds are only established for k >= {K_SEP} (got {k})"
        )));
    }
    let report = chain_lower_bound(k)?;
    if report.prime_source != PrimeSource::Window {
        return Err(Error::RegimeRefused(format!("prime window below {} is empty", k - 1)));
    }
    let kf = k as f64;
    let l = kf.ln();
    let x = kf.powf(-DECAY);
    let log_p_star = (report.p_star as f64).ln();
    let steps_ratio = (report.p_star as f64 - report.r0 as f64) / kf;
    Ok(FactorBounds {
        k,
        log_p_star,
        log_p_star_bound: l - 4.0 * x,
        steps_ratio,
        steps_ratio_bound: 1.0 - 1.0 / l - 2.0 * x,
        product: steps_ratio * log_p_star,
        product_bound: l - 1.0 - c1 * x * l,
        c1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RSweepPoint {
    pub r0_candidate: f64,
    pub log_r: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RSweep {
    pub k: u64,
    pub points: Vec<RSweepPoint>,
    pub argmax: usize,
}

impl RSweep {
    pub fn best(&self) -> &RSweepPoint {
        &self.points[self.argmax]
    }
}

/// `ln R(r0) = ln r0 - r0 ln k / k`.
pub fn log_r_of(k: f64, r0: f64) -> f64 {
    r0.ln() - r0 * k.ln() / k
}

/// Continuous optimizer `k / ln k` of `R`.
pub fn r0_opt(k: f64) -> f64 {
    k / k.ln()
}

/// Evenly spaced candidates on `[2, k - 1]`, `steps + 1` of them.
pub fn linear_grid(k: u64, steps: usize) -> Vec<f64> {
    let (lo, hi) = (2.0, k as f64 - 1.0);
    let steps = steps.max(1);
    (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect()
}

pub fn sweep_r(k: u64, grid: &[f64]) -> Result<RSweep> {
    if k < 3 {
        return Err(Error::invalid(format!("sweep_r needs k >= 3 (got {k})")));
    }
    if grid.is_empty() {
        return Err(Error::invalid("empty r0 grid"));
    }
    if let Some(bad) = grid.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::invalid(format!("grid point {bad} is not a positive number")));
    }
    let kf = k as f64;
    let points: Vec<RSweepPoint> = grid
        .iter()
        .map(|&r0| {
            let log_r = log_r_of(kf, r0);
            RSweepPoint {
                r0_candidate: r0,
                log_r,
                r: log_r.exp(),
            }
        })
        .collect();
    let argmax = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.log_r.total_cmp(&b.1.log_r))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(RSweep { k, points, argmax })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsRow {
    pub k: u64,
    pub normalized: f64,
    pub eps_k_bound: f64,
    pub status: ChainStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsReport {
    pub rows: Vec<EpsRow>,
    pub increasing: bool,
    /// Every normalized ratio lies in `(0, band]`.
    pub within_band: bool,
    pub band: f64,
}

/// Upper sanity band on the normalized ratio.
pub const EPS_BAND: f64 = 1.01;

pub fn eps_report(k_grid: &[u64], eps_constant: f64) -> Result<EpsReport> {
    let rows = k_grid
        .iter()
        .map(|&k| {
            let report = chain_lower_bound_with(k, eps_constant)?;
            Ok(EpsRow {
                k,
                normalized: report.normalized_ratio(),
                eps_k_bound: report.eps_k_bound,
                status: report.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let increasing = rows.windows(2).all(|w| w[1].normalized > w[0].normalized);
    let within_band = rows
        .iter()
        .all(|r| r.normalized > 0.0 && r.normalized <= EPS_BAND);
    Ok(EpsReport {
        rows,
        increasing,
        within_band,
        band: EPS_BAND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_at_base_point() {
        let s = separation_check(10_000).unwrap();
        assert!(s.positive);
        assert!((s.f - 8787.0).abs() < 1.0, "f={}", s.f);
        // 1 - 0.0066 - 0.0968 = 0.8966, i.e. 0.90 to two places
        assert!((s.f_prime - 0.90).abs() < 0.005, "f'={}", s.f_prime);
        assert!((1e4f64 / 1e4f64.ln() - 1085.74).abs() < 0.01);
        assert!((1e4f64.powf(0.525) - 125.9).abs() < 0.1);
    }

    #[test]
    fn separation_at_ten_is_what_arithmetic_says() {
        let s = separation_check(10).unwrap();
        let direct = 10.0 - 1.0 - 10f64.powf(0.525) - 10.0 / 10f64.ln();
        assert_eq!(s.f, direct);
        assert!((s.f - 1.31).abs() < 0.01);
        assert!(s.positive);
    }

    #[test]
    fn chain_at_base_point() {
        let c = chain_lower_bound(10_000).unwrap();
        assert_eq!(c.r0, 1085);
        assert_eq!(c.p_star, 9973);
        assert!(c.status.is_certified());
        let prod = c.factor1 * c.factor2 * c.factor3;
        assert!((c.ratio_lower - prod).abs() <= 1e-9 * c.ratio_lower);
    }

    #[test]
    fn chain_below_k_sep_is_heuristic() {
        let c = chain_lower_bound(100).unwrap();
        assert_eq!(c.p_star, 97);
        assert!(!c.status.is_certified());
        assert!(c.ratio_lower > 0.0);
    }

    #[test]
    fn factor_bounds_refuse_small_k() {
        assert!(matches!(factor_bounds(9_999), Err(Error::RegimeRefused(_))));
    }

    #[test]
    fn factor_bounds_at_base_point() {
        let b = factor_bounds(10_000).unwrap();
        assert!(b.steps_ratio >= 0.86);
        assert!(b.log_p_star >= 9.15);
        assert!(b.log_p_star_holds() && b.steps_ratio_holds() && b.product_holds());
    }

    #[test]
    fn sweep_peak() {
        let k = 1_000_000u64;
        let kf = k as f64;
        let opt = r0_opt(kf);
        let r = log_r_of(kf, opt).exp();
        let expected = kf / (E * kf.ln());
        assert!((r - expected).abs() <= 1e-12 * expected);
        let grid = linear_grid(k, 10_000);
        let sweep = sweep_r(k, &grid).unwrap();
        let step = grid[1] - grid[0];
        assert!((sweep.best().r0_candidate - opt).abs() <= step);
    }

    #[test]
    fn eps_single_point() {
        let rep = eps_report(&[10_000], DEFAULT_C1).unwrap();
        assert!(rep.increasing);
        assert!(rep.within_band);
    }

    #[test]
    fn csv_row_shape() {
        let c = chain_lower_bound(10_000).unwrap();
        assert_eq!(c.csv_row().split(',').count(), ChainReport::CSV_HEADER.split(',').count());
        assert!(c.csv_row().ends_with(",certified"));
    }
}
