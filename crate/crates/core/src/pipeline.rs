//! End-to-end witness pipeline: base coloring at `r0` colors, prime
//! blow-ups up to `p` colors, verification, certificate.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::ap::{self, Coloring};
use crate::blowup::{self, BlowupParams, MATERIALIZE_LIMIT};
use crate::certificate::{Certificate, ChainStep, Claims, Payload, PrimeChoice, FORMAT_VERSION};
use crate::chain::r0_of;
use crate::error::{Error, Result};
use crate::lll::{self, ElParams, Mode, SampleOutcome};
use crate::oracle::{self, SearchBudget};
use crate::primes::{bhp_window, largest_prime_leq};

/// Node budget for the oracle fallback inside the pipeline. Node-limited so
/// the outcome does not depend on machine speed.
pub const PIPELINE_ORACLE_NODES: u64 = 20_000_000;
/// Resample budget for each probe of the freeform fallback base.
pub const HEURISTIC_RESAMPLES: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct ConstructOptions {
    pub k: usize,
    /// Base color count; defaults to `floor(k / ln k)`, at least 2.
    pub r0: Option<u32>,
    pub seed: u64,
    /// Final color count; defaults to (and is capped at) the chosen prime.
    pub r_to: Option<u32>,
    pub max_cells: u64,
    pub oracle_nodes: u64,
    pub max_resamples: u64,
}

impl ConstructOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        ConstructOptions {
            k,
            r0: None,
            seed,
            r_to: None,
            max_cells: MATERIALIZE_LIMIT,
            oracle_nodes: PIPELINE_ORACLE_NODES,
            max_resamples: lll::DEFAULT_MAX_RESAMPLES,
        }
    }

    pub fn with_r0(mut self, r0: u32) -> Self {
        self.r0 = Some(r0);
        self
    }

    pub fn with_r_to(mut self, r_to: u32) -> Self {
        self.r_to = Some(r_to);
        self
    }

    pub fn with_max_cells(mut self, max_cells: u64) -> Self {
        self.max_cells = max_cells;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub certificate: Certificate,
    /// Human-readable notes on fallbacks taken.
    pub notes: Vec<String>,
}

/// `floor(r^(k-1) / 8k)` without any width limit.
fn el_length_big(r: u32, k: usize) -> BigUint {
    BigUint::from(r).pow((k - 1) as u32) / BigUint::from(8 * k as u64)
}

/// Prime used for the blow-ups: the window prime when it exceeds `r0`,
/// otherwise the largest prime `<= k - 1`, otherwise the largest `<= k`.
pub fn choose_prime(k: usize, r0: u32) -> Option<(u64, PrimeChoice)> {
    let r0 = r0 as u64;
    let k = k as u64;
    if let Some(p) = bhp_window(k).p_star.filter(|&p| p > r0) {
        return Some((p, PrimeChoice::Window));
    }
    if let Some(p) = largest_prime_leq(k - 1).filter(|&p| p > r0) {
        return Some((p, PrimeChoice::LeqKMinus1));
    }
    largest_prime_leq(k)
        .filter(|&p| p > r0)
        .map(|p| (p, PrimeChoice::LeqK))
}

/// Largest `n` on a doubling schedule from `k` for which the freeform
/// sampler succeeds.
fn heuristic_base(r: u32, k: usize, seed: u64, max_cells: u64) -> Result<(Coloring, ChainStep)> {
    let mut best: Option<(Coloring, usize)> = None;
    let mut n = k;
    while (n as u64) <= max_cells {
        let params = ElParams::freeform(r, k, n, seed).with_max_resamples(HEURISTIC_RESAMPLES);
        match lll::sample_mono_free(&params)? {
            SampleOutcome::Success(s) => best = Some((s.coloring, n)),
            SampleOutcome::Failure(_) => break,
        }
        n *= 2;
    }
    let (coloring, n) = best.ok_or_else(|| {
        Error::SamplerFailed(format!("no freeform base found for r={r}, k={k}"))
    })?;
    let step = ChainStep::ElSample {
        r,
        k,
        n: BigUint::from(n),
        seed,
        mode: Mode::Freeform,
    };
    Ok((coloring, step))
}

enum Base {
    Built(Coloring, ChainStep),
    /// Too large to build; only its length is known.
    Planned(BigUint, ChainStep),
}

fn build_base(opts: &ConstructOptions, r0: u32, notes: &mut Vec<String>) -> Result<Base> {
    let k = opts.k;
    let n_el = el_length_big(r0, k);
    if n_el.is_zero() {
        notes.push(format!(
            "interval length floor({r0}^{}/{}) is 0; falling back",
            k - 1,
            8 * k
        ));
        let res = oracle::exact_w(r0, k, SearchBudget::nodes(opts.oracle_nodes))?;
        if let Some(w) = res.witness {
            notes.push(format!("base: exhaustive W({r0},{k}) witness of length {}", w.len()));
            return Ok(Base::Built(w, ChainStep::OracleWitness { r: r0, k }));
        }
        notes.push(format!("base: W({r0},{k}) search exceeded its budget; using a freeform sample"));
        let (c, step) = heuristic_base(r0, k, opts.seed, opts.max_cells)?;
        return Ok(Base::Built(c, step));
    }

    let mode = if k >= lll::K1 { Mode::Certified } else { Mode::Freeform };
    let step = ChainStep::ElSample {
        r: r0,
        k,
        n: n_el.clone(),
        seed: opts.seed,
        mode,
    };
    match n_el.to_u64().filter(|&n| n <= opts.max_cells) {
        None => {
            notes.push(format!("base length {n_el} exceeds the {}-cell guard", opts.max_cells));
            Ok(Base::Planned(n_el, step))
        }
        Some(n) => {
            let params = ElParams {
                r: r0,
                k,
                n_target: n as usize,
                seed: opts.seed,
                max_resamples: opts.max_resamples,
                mode,
            };
            match lll::sample_mono_free(&params)? {
                SampleOutcome::Success(s) => Ok(Base::Built(s.coloring, step)),
                SampleOutcome::Failure(f) => Err(Error::SamplerFailed(format!(
                    "r={r0}, k={k}, n={n}: {} after {} resamples, {} violated progressions left",
                    f.reason, f.resamples, f.violated
                ))),
            }
        }
    }
}

pub fn construct(opts: &ConstructOptions) -> Result<Construction> {
    let k = opts.k;
    if k < 3 {
        return Err(Error::invalid(format!("construct needs k >= 3 (got {k})")));
    }
    let r0 = opts
        .r0
        .unwrap_or_else(|| u32::try_from(r0_of(k as u64)).unwrap_or(u32::MAX))
        .max(2);
    let mut notes = Vec::new();
    let base = build_base(opts, r0, &mut notes)?;

    let (p, choice) = match choose_prime(k, r0) {
        Some(pc) => pc,
        None => {
            notes.push(format!("no prime p with {r0} < p <= {k}; no blow-up steps"));
            (0, PrimeChoice::LeqK)
        }
    };
    if p > 0 && choice != PrimeChoice::Window {
        notes.push(format!("prime window below {} has no prime above r0={r0}; using p={p}", k - 1));
    }
    let r_to = if p == 0 {
        r0
    } else {
        opts.r_to.unwrap_or(p as u32).clamp(r0, p as u32)
    };

    let (base_len, base_step, base_coloring) = match base {
        Base::Built(c, s) => (c.len() as u64, s, Some(c)),
        Base::Planned(len, s) => (len.to_u64().unwrap_or(u64::MAX), s, None),
    };
    let mut chain = vec![base_step];
    chain.extend((r0 + 1..=r_to).map(|r| ChainStep::BctBlowup { p, r, prime: choice }));

    let plan = if r_to > r0 {
        blowup::plan_blowup(base_len, p, r0, r_to, k)?
    } else {
        blowup::plan_blowup(base_len, 2, r0, r0, k)?
    };
    let n = match &chain[0] {
        ChainStep::ElSample { n, .. } if base_coloring.is_none() => {
            n * BigUint::from(p.max(1)).pow(r_to - r0)
        }
        _ => plan.length.clone(),
    };

    let materialize = base_coloring.is_some() && n.to_u64().is_some_and(|l| l <= opts.max_cells);
    let payload = if materialize {
        let base = base_coloring.expect("checked above");
        let lifted = if r_to > r0 {
            blowup::iterate_blowup(&base, p, r0, r_to, k, opts.max_cells)?
                .coloring
                .expect("within the cell limit")
        } else {
            base
        };
        if let Some(w) = ap::find_mono_kap(&lifted, k)? {
            return Err(Error::InvalidColoring(format!("internal: constructed coloring has mono {w}")));
        }
        Payload::Colors(lifted)
    } else {
        if base_coloring.is_some() {
            notes.push(format!("final length {n} exceeds the {}-cell guard; payload omitted", opts.max_cells));
        }
        Payload::Omitted
    };

    let rainbow_free = match &payload {
        _ if (r_to as usize) < k => true,
        Payload::Colors(c) => ap::find_rainbow_kap(c, k)?.is_none(),
        Payload::Omitted => false,
    };
    let certificate = Certificate {
        format_version: FORMAT_VERSION,
        k,
        r: r_to,
        n,
        chain,
        claims: Claims {
            mono_free: true,
            rainbow_free,
        },
        payload,
    };
    Ok(Construction { certificate, notes })
}

/// Rebuilds the coloring a method chain describes.
pub fn replay(chain: &[ChainStep], k: usize) -> Result<Coloring> {
    let (first, rest) = chain
        .split_first()
        .ok_or_else(|| Error::ReplayMismatch("empty method chain".into()))?;
    let mut cur = match first {
        ChainStep::ElSample { r, k: sk, n, seed, mode } => {
            let n = n
                .to_usize()
                .ok_or_else(|| Error::ReplayMismatch(format!("base length {n} cannot be materialized")))?;
            let params = ElParams {
                r: *r,
                k: *sk,
                n_target: n,
                seed: *seed,
                max_resamples: lll::DEFAULT_MAX_RESAMPLES,
                mode: *mode,
            };
            match lll::sample_mono_free(&params)? {
                SampleOutcome::Success(s) => s.coloring,
                SampleOutcome::Failure(f) => {
                    return Err(Error::ReplayMismatch(format!("sampler replay failed: {}", f.reason)))
                }
            }
        }
        ChainStep::OracleWitness { r, k: sk } => {
            let res = oracle::exact_w(*r, *sk, SearchBudget::nodes(oracle::DEFAULT_NODE_LIMIT))?;
            res.witness
                .ok_or_else(|| Error::ReplayMismatch(format!("W({r},{sk}) search did not finish")))?
        }
        ChainStep::BctBlowup { .. } => {
            return Err(Error::ReplayMismatch("chain must start with a base construction".into()))
        }
    };
    for step in rest {
        match step {
            ChainStep::BctBlowup { p, r, .. } => {
                cur = blowup::blow_up(&BlowupParams::new(cur, *p, *r, k).unchecked())?;
            }
            other => return Err(Error::ReplayMismatch(format!("unexpected step `{other}`"))),
        }
    }
    Ok(cur)
}

/// Replays a certificate's chain and compares checksums.
pub fn replay_matches(cert: &Certificate) -> Result<bool> {
    let Some(recorded) = cert.checksum() else {
        return Err(Error::ReplayMismatch("payload omitted; nothing to compare".into()));
    };
    let rebuilt = Certificate {
        payload: Payload::Colors(replay(&cert.chain, cert.k)?.with_r(cert.r)?),
        ..cert.clone()
    };
    Ok(rebuilt.checksum() == Some(recorded))
}
