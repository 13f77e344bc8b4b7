//! Exhaustive searches for `W(r,k)`, `aw([n],k)` and `H(k)` at desk scale.
//!
//! All three walk colorings position by position and cut a branch as soon as
//! the newest cell closes a forbidden progression. Color permutations are
//! broken by only allowing a new color when it is the next unused label, so
//! each search visits restricted-growth strings rather than raw colorings.
//! A search that hits its budget reports that status and no value.

use std::time::{Duration, Instant};

use crate::ap::{self, Coloring};
use crate::error::{Error, Result};

pub const DEFAULT_NODE_LIMIT: u64 = 100_000_000;
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(60);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            node_limit: DEFAULT_NODE_LIMIT,
            time_limit: Some(DEFAULT_TIME_LIMIT),
        }
    }
}

impl SearchBudget {
    /// Node-limited only; the outcome is then independent of machine speed.
    pub fn nodes(node_limit: u64) -> Self {
        SearchBudget {
            node_limit,
            time_limit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Exact,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub status: Status,
    /// The computed number; `None` unless `status` is `Exact`.
    pub value: Option<u64>,
    /// For `W` and `H`: a coloring of `[value - 1]` avoiding the forced
    /// pattern. For `aw`: a surjective `(value - 1)`-coloring of `[n]` with no
    /// rainbow progression.
    pub witness: Option<Coloring>,
    pub nodes: u64,
}

impl OracleResult {
    fn exhausted(nodes: u64) -> Self {
        OracleResult {
            status: Status::BudgetExhausted,
            value: None,
            witness: None,
            nodes,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.status == Status::Exact
    }
}

struct Meter {
    budget: SearchBudget,
    start: Instant,
    nodes: u64,
    aborted: bool,
}

impl Meter {
    fn new(budget: SearchBudget) -> Self {
        Meter {
            budget,
            start: Instant::now(),
            nodes: 0,
            aborted: false,
        }
    }

    /// Counts one node; returns false once the budget is gone.
    #[inline]
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.node_limit {
            self.aborted = true;
        } else if self.nodes & 0xffff == 0 {
            if let Some(limit) = self.budget.time_limit {
                if self.start.elapsed() > limit {
                    self.aborted = true;
                }
            }
        }
        !self.aborted
    }
}

/// Which patterns end a branch.
#[derive(Clone, Copy)]
struct Forbid {
    mono: bool,
    rainbow: bool,
}

struct Search {
    k: usize,
    forbid: Forbid,
    /// Largest color label allowed.
    max_colors: u32,
    colors: Vec<u32>,
    stamp: Vec<u64>,
    epoch: u64,
}

impl Search {
    fn new(k: usize, forbid: Forbid, max_colors: u32, cap: usize) -> Self {
        Search {
            k,
            forbid,
            max_colors,
            colors: Vec::with_capacity(cap),
            stamp: vec![0; cap + 2],
            epoch: 0,
        }
    }

    /// Does coloring the next cell with `c` close a forbidden progression?
    fn closes(&mut self, c: u32) -> bool {
        let i = self.colors.len();
        let k = self.k;
        for d in 1..=i / (k - 1) {
            if self.forbid.mono && (1..k).all(|j| self.colors[i - j * d] == c) {
                return true;
            }
            if self.forbid.rainbow {
                self.epoch += 1;
                self.stamp[c as usize] = self.epoch;
                let mut distinct = true;
                for j in 1..k {
                    let x = self.colors[i - j * d] as usize;
                    if self.stamp[x] == self.epoch {
                        distinct = false;
                        break;
                    }
                    self.stamp[x] = self.epoch;
                }
                if distinct {
                    return true;
                }
            }
        }
        false
    }
}

/// Depth-first search for the longest extendable coloring. `used` is the
/// largest label present.
struct Longest {
    search: Search,
    best: Vec<u32>,
    limit_len: usize,
}

impl Longest {
    fn dfs(&mut self, used: u32, meter: &mut Meter) {
        if self.search.colors.len() > self.best.len() {
            self.best.clone_from(&self.search.colors);
        }
        if self.search.colors.len() >= self.limit_len {
            return;
        }
        let top = (used + 1).min(self.search.max_colors);
        for c in 1..=top {
            if !meter.tick() {
                return;
            }
            if self.search.closes(c) {
                continue;
            }
            self.search.colors.push(c);
            self.dfs(used.max(c), meter);
            self.search.colors.pop();
            if meter.aborted {
                return;
            }
        }
    }
}

/// Hard cap on search depth; every instance this module is meant for stops
/// well short of it.
const DEPTH_CAP: usize = 4096;

fn longest(k: usize, forbid: Forbid, max_colors: u32, budget: SearchBudget) -> Result<(Option<Vec<u32>>, u64)> {
    let mut run = Longest {
        search: Search::new(k, forbid, max_colors, DEPTH_CAP),
        best: Vec::new(),
        limit_len: DEPTH_CAP,
    };
    let mut meter = Meter::new(budget);
    run.dfs(0, &mut meter);
    if meter.aborted {
        return Ok((None, meter.nodes));
    }
    if run.best.len() >= DEPTH_CAP {
        return Err(Error::BudgetExhausted(format!("search reached the depth cap {DEPTH_CAP}")));
    }
    Ok((Some(run.best), meter.nodes))
}

/// `W(r,k)`: least `N` such that every r-coloring of `[N]` has a
/// monochromatic k-AP, with a mono-free witness on `[W - 1]`.
///
/// The search exhausts the whole tree, so the result is both a witness for
/// `W - 1` and a proof that no coloring of `[W]` survives.
pub fn exact_w(r: u32, k: usize, budget: SearchBudget) -> Result<OracleResult> {
    if r < 2 || k < 2 {
        return Err(Error::invalid(format!("exact_w needs r >= 2, k >= 2 (got r={r}, k={k})")));
    }
    let forbid = Forbid {
        mono: true,
        rainbow: false,
    };
    let (best, nodes) = longest(k, forbid, r, budget)?;
    let Some(best) = best else {
        return Ok(OracleResult::exhausted(nodes));
    };
    let witness = Coloring::new(r, best)?;
    if let Some(p) = ap::find_mono_kap(&witness, k)? {
        return Err(Error::InvalidColoring(format!("internal: W witness fails at {p}")));
    }
    Ok(OracleResult {
        status: Status::Exact,
        value: Some(witness.len() as u64 + 1),
        witness: Some(witness),
        nodes,
    })
}

/// `H(k)`: least `N` such that every coloring of `[N]`, with any number of
/// colors, has a monochromatic or a rainbow k-AP.
pub fn exact_h(k: usize, budget: SearchBudget) -> Result<OracleResult> {
    if k < 3 {
        return Err(Error::invalid(format!("exact_h needs k >= 3 (got {k})")));
    }
    let forbid = Forbid {
        mono: true,
        rainbow: true,
    };
    let (best, nodes) = longest(k, forbid, u32::MAX, budget)?;
    let Some(best) = best else {
        return Ok(OracleResult::exhausted(nodes));
    };
    let witness = Coloring::from_colors(best)?;
    if witness.len() >= k {
        if let Some(p) = ap::find_mono_kap(&witness, k)? {
            return Err(Error::InvalidColoring(format!("internal: H witness has mono {p}")));
        }
        if let Some(p) = ap::find_rainbow_kap(&witness, k)? {
            return Err(Error::InvalidColoring(format!("internal: H witness has rainbow {p}")));
        }
    }
    Ok(OracleResult {
        status: Status::Exact,
        value: Some(witness.len() as u64 + 1),
        witness: Some(witness),
        nodes,
    })
}

/// Searches for a surjective `t`-coloring of `[n]` with no rainbow k-AP.
struct Surjective {
    search: Search,
    n: usize,
    t: u32,
    found: Option<Vec<u32>>,
}

impl Surjective {
    fn dfs(&mut self, used: u32, meter: &mut Meter) {
        let i = self.search.colors.len();
        if i == self.n {
            if used == self.t {
                self.found = Some(self.search.colors.clone());
            }
            return;
        }
        // Not enough cells left to introduce the missing colors.
        if (self.t - used) as usize > self.n - i {
            return;
        }
        let top = (used + 1).min(self.t);
        for c in 1..=top {
            if !meter.tick() {
                return;
            }
            if self.search.closes(c) {
                continue;
            }
            self.search.colors.push(c);
            self.dfs(used.max(c), meter);
            self.search.colors.pop();
            if meter.aborted || self.found.is_some() {
                return;
            }
        }
    }
}

/// `aw([n],k)`: least `t` such that every surjective t-coloring of `[n]` has
/// a rainbow k-AP.
pub fn exact_aw(n: usize, k: usize, budget: SearchBudget) -> Result<OracleResult> {
    if k < 3 || n < k {
        return Err(Error::invalid(format!("exact_aw needs n >= k >= 3 (got n={n}, k={k})")));
    }
    if n > DEPTH_CAP {
        return Err(Error::invalid(format!("n={n} is beyond the search depth cap")));
    }
    let forbid = Forbid {
        mono: false,
        rainbow: true,
    };
    let mut meter = Meter::new(budget);
    // Below k colors nothing can be rainbow; a surjective (k-1)-coloring of
    // [n] exists because n >= k.
    let mut last_free: Vec<u32> = (0..n).map(|i| (i as u32).min(k as u32 - 2) + 1).collect();
    for t in k as u32..=n as u32 {
        let mut run = Surjective {
            search: Search::new(k, forbid, t, n),
            n,
            t,
            found: None,
        };
        run.dfs(0, &mut meter);
        if meter.aborted {
            return Ok(OracleResult::exhausted(meter.nodes));
        }
        match run.found {
            Some(free) => last_free = free,
            None => {
                let witness = Coloring::new_surjective(t - 1, last_free)?;
                if let Some(p) = ap::find_rainbow_kap(&witness, k)? {
                    return Err(Error::InvalidColoring(format!("internal: aw witness has rainbow {p}")));
                }
                return Ok(OracleResult {
                    status: Status::Exact,
                    value: Some(t as u64),
                    witness: Some(witness),
                    nodes: meter.nodes,
                });
            }
        }
    }
    // t = n colors every cell differently, and cells 1..k are then rainbow.
    Err(Error::InvalidParameter(format!("internal: aw([{n}],{k}) search found no threshold")))
}
