//! Prime blow-up: an `(r-1)`-coloring of `[M]` with no monochromatic k-AP
//! becomes an `r`-coloring of `[pM]` with none, for a prime `p` with
//! `r <= p <= k`.
//!
//! Cell `i = (j - 1) p + s + 1` (block `j`, offset `s`) keeps the base color
//! of `j` unless `s == base(j) - 1`, in which case it takes the new color `r`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::ap::{self, Coloring};
use crate::error::{Error, Result};
use crate::primes::is_prime;

/// Above this many output cells the base check is skipped and nothing is
/// materialized.
pub const MATERIALIZE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct BlowupParams {
    pub base: Coloring,
    pub p: u64,
    pub r: u32,
    pub k: usize,
    /// Re-verify that `base` is mono-free before lifting.
    pub check_base: bool,
    /// Skip the `r <= p <= k` and primality checks. Only for probing why the
    /// hypotheses are needed.
    pub unsafe_construction: bool,
}

impl BlowupParams {
    pub fn new(base: Coloring, p: u64, r: u32, k: usize) -> Self {
        let cells = (base.len() as u64).saturating_mul(p);
        BlowupParams {
            base,
            p,
            r,
            k,
            check_base: cells <= MATERIALIZE_LIMIT,
            unsafe_construction: false,
        }
    }

    pub fn unchecked(mut self) -> Self {
        self.check_base = false;
        self
    }

    pub fn unsafe_construction(mut self, on: bool) -> Self {
        self.unsafe_construction = on;
        self
    }
}

fn check_hypotheses(p: u64, r: u32, k: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::Hypothesis(format!("new color count r={r} must be >= 2")));
    }
    if (r as u64) > p {
        return Err(Error::Hypothesis(format!("r={r} exceeds the prime p={p}")));
    }
    if p > k as u64 {
        return Err(Error::Hypothesis(format!("p={p} exceeds the progression length k={k}")));
    }
    if !is_prime(p) {
        return Err(Error::Hypothesis(format!("p={p} is not prime")));
    }
    Ok(())
}

pub fn blow_up(params: &BlowupParams) -> Result<Coloring> {
    let BlowupParams { base, p, r, k, .. } = params;
    let (p, r, k) = (*p, *r, *k);
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    if !params.unsafe_construction {
        check_hypotheses(p, r, k)?;
    } else if r < 2 || p < 1 {
        return Err(Error::Hypothesis("r >= 2 and p >= 1 are needed even when unsafe".into()));
    }
    if let Some(&bad) = base.colors().iter().find(|&&c| c >= r) {
        return Err(Error::Hypothesis(format!(
            "base uses color {bad}, outside 1..={}",
            r - 1
        )));
    }
    if params.unsafe_construction {
        if let Some(&bad) = base.colors().iter().find(|&&c| (c - 1) as u64 >= p) {
            return Err(Error::Hypothesis(format!(
                "block offset {} for base color {bad} does not fit in p={p}",
                bad - 1
            )));
        }
    }
    if params.check_base && base.len() >= k {
        if let Some(w) = ap::find_mono_kap(base, k)? {
            return Err(Error::BaseNotMonoFree(w));
        }
    }

    let p_us = usize::try_from(p).map_err(|_| Error::Overflow(format!("p={p} too large")))?;
    let len = base.len().checked_mul(p_us).ok_or_else(|| {
        Error::Overflow(format!(
            "output length {} * {p} does not fit in memory",
            base.len()
        ))
    })?;
    let mut out = Vec::with_capacity(len);
    for &c in base.colors() {
        let tau = (c - 1) as usize;
        out.extend((0..p_us).map(|s| if s == tau { r } else { c }));
    }
    Coloring::new(r, out)
}

/// One lifting step of a chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlowupStep {
    pub p: u64,
    pub r: u32,
}

/// Result of [`iterate_blowup`]: exact length, a log2 shadow, the steps taken,
/// and the cells when they were materialized.
#[derive(Clone, Debug)]
pub struct Lifted {
    pub length: BigUint,
    pub log2_length: f64,
    pub steps: Vec<BlowupStep>,
    pub coloring: Option<Coloring>,
}

/// Exact length `p^(r_to - r_from) * m` and its log2.
pub fn lifted_length(m: u64, p: u64, steps: u32) -> (BigUint, f64) {
    let len = BigUint::from(p).pow(steps) * BigUint::from(m);
    let log2 = steps as f64 * (p as f64).log2() + (m as f64).log2();
    (len, log2)
}

fn chain_steps(p: u64, r_from: u32, r_to: u32, k: usize) -> Result<Vec<BlowupStep>> {
    if r_to < r_from {
        return Err(Error::invalid(format!("r_to={r_to} is below r_from={r_from}")));
    }
    for r in r_from + 1..=r_to {
        check_hypotheses(p, r, k)?;
    }
    Ok((r_from + 1..=r_to).map(|r| BlowupStep { p, r }).collect())
}

/// Length bookkeeping for a chain without building any cells.
pub fn plan_blowup(m: u64, p: u64, r_from: u32, r_to: u32, k: usize) -> Result<Lifted> {
    let steps = chain_steps(p, r_from, r_to, k)?;
    let (length, log2_length) = lifted_length(m, p, steps.len() as u32);
    Ok(Lifted {
        length,
        log2_length,
        steps,
        coloring: None,
    })
}

/// Applies [`blow_up`] for `r = r_from + 1, ..., r_to` at the same prime.
/// Fails with the would-be length (as a power of two) when the output would
/// exceed `max_cells`.
pub fn iterate_blowup(
    base: &Coloring,
    p: u64,
    r_from: u32,
    r_to: u32,
    k: usize,
    max_cells: u64,
) -> Result<Lifted> {
    if r_from < 2 {
        return Err(Error::Hypothesis(format!(
            "chains start from a base with at least 2 colors (got r_from={r_from})"
        )));
    }
    if base.r() > r_from {
        return Err(Error::invalid(format!(
            "base declares {} colors, more than r_from={r_from}",
            base.r()
        )));
    }
    let Lifted {
        length,
        log2_length,
        steps,
        ..
    } = plan_blowup(base.len() as u64, p, r_from, r_to, k)?;
    if steps.is_empty() {
        return Ok(Lifted {
            length,
            log2_length,
            steps,
            coloring: Some(base.clone()),
        });
    }
    if !length.to_u64().is_some_and(|l| l <= max_cells) {
        return Err(Error::Overflow(format!(
            "lifted length 2^{log2_length:.3} exceeds the {max_cells}-cell limit"
        )));
    }

    let mut cur = base.clone();
    for (i, step) in steps.iter().enumerate() {
        let mut params = BlowupParams::new(cur, step.p, step.r, k);
        // Each lift preserves mono-freeness of a checked input, so only the
        // original base needs the exhaustive check.
        if i > 0 {
            params.check_base = false;
        }
        cur = blow_up(&params)?;
    }
    debug_assert_eq!(BigUint::from(cur.len()), length);
    Ok(Lifted {
        length,
        log2_length,
        steps,
        coloring: Some(cur),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w23_witness() -> Coloring {
        Coloring::new(2, vec![1, 1, 2, 2, 1, 1, 2, 2]).unwrap()
    }

    #[test]
    fn first_block_by_hand() {
        let out = blow_up(&BlowupParams::new(w23_witness(), 3, 3, 3)).unwrap();
        assert_eq!(out.len(), 24);
        // j = 1: base color 1, tau = 0 -> offset 0 gets the new color
        assert_eq!(&out.colors()[..3], &[3, 1, 1]);
        // j = 3: base color 2, tau = 1
        assert_eq!(&out.colors()[6..9], &[2, 3, 2]);
        assert_eq!(ap::find_mono_kap(&out, 3).unwrap(), None);
    }

    #[test]
    fn hypothesis_violations() {
        let base = w23_witness();
        assert!(matches!(
            blow_up(&BlowupParams::new(base.clone(), 2, 3, 3)),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            blow_up(&BlowupParams::new(base.clone(), 5, 3, 3)),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            blow_up(&BlowupParams::new(base.clone(), 4, 3, 4)),
            Err(Error::Hypothesis(_))
        ));
        let single = Coloring::new(1, vec![1]).unwrap();
        assert!(matches!(
            blow_up(&BlowupParams::new(single, 2, 1, 2)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn base_with_witness_is_rejected() {
        let bad = Coloring::new(2, vec![1, 1, 1, 2]).unwrap();
        match blow_up(&BlowupParams::new(bad.clone(), 3, 3, 3)) {
            Err(Error::BaseNotMonoFree(w)) => assert_eq!((w.a, w.d), (1, 1)),
            other => panic!("{other:?}"),
        }
        assert!(blow_up(&BlowupParams::new(bad, 3, 3, 3).unchecked()).is_ok());
    }

    #[test]
    fn iterate_lengths() {
        let lifted = iterate_blowup(&w23_witness(), 3, 2, 3, 3, MATERIALIZE_LIMIT).unwrap();
        assert_eq!(lifted.length, BigUint::from(24u32));
        assert_eq!(lifted.coloring.unwrap().len(), 24);

        let same = iterate_blowup(&w23_witness(), 3, 2, 2, 3, MATERIALIZE_LIMIT).unwrap();
        assert_eq!(same.coloring.unwrap(), w23_witness());
        assert!(same.steps.is_empty());

        let single = Coloring::new(1, vec![1]).unwrap();
        assert!(iterate_blowup(&single, 2, 1, 2, 2, MATERIALIZE_LIMIT).is_err());
    }

    #[test]
    fn iterate_past_the_limit() {
        let base = Coloring::new(2, vec![1, 2, 2, 1]).unwrap();
        match iterate_blowup(&base, 7, 2, 7, 7, 1000) {
            Err(Error::Overflow(msg)) => assert!(msg.contains("2^"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let lifted = plan_blowup(4, 7, 2, 7, 7).unwrap();
        assert!(lifted.coloring.is_none());
        assert_eq!(lifted.length, BigUint::from(4u64 * 7u64.pow(5)));
        assert!((lifted.log2_length - (4.0 * 7f64.powi(5)).log2()).abs() < 1e-9);
    }

    #[test]
    fn block_structure() {
        let base = Coloring::new(3, vec![1, 3, 2, 2, 3, 1]).unwrap();
        let out = blow_up(&BlowupParams::new(base.clone(), 5, 4, 5).unchecked()).unwrap();
        for (j, &c) in base.colors().iter().enumerate() {
            let block = &out.colors()[j * 5..(j + 1) * 5];
            assert_eq!(block.iter().filter(|&&x| x == 4).count(), 1);
            assert_eq!(block[(c - 1) as usize], 4);
            assert!(block.iter().enumerate().all(|(s, &x)| s == (c - 1) as usize || x == c));
        }
    }
}
