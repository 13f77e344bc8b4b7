//! Colorings of `[n]`, k-term arithmetic progressions and the exact
//! monochromatic / rainbow verifier.
//!
//! Positions and colors are 1-based throughout the public surface. The
//! verifier reports the first witness in the fixed enumeration order:
//! ascending common difference `d`, then ascending start `a`.

use std::fmt;

use crate::error::{Error, Result};

/// An assignment of colors `1..=r` to positions `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    r: u32,
    colors: Vec<u32>,
}

impl Coloring {
    /// Builds a coloring; `colors[i]` is the color of position `i + 1`.
    pub fn new(r: u32, colors: Vec<u32>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidColoring("color count r must be >= 1".into()));
        }
        if colors.is_empty() {
            return Err(Error::InvalidColoring("interval length n must be >= 1".into()));
        }
        if let Some((i, &c)) = colors.iter().enumerate().find(|(_, &c)| c == 0 || c > r) {
            return Err(Error::InvalidColoring(format!(
                "position {} has color {c}, outside 1..={r}",
                i + 1
            )));
        }
        Ok(Coloring { r, colors })
    }

    /// Like [`Coloring::new`] but additionally requires every color in
    /// `1..=r` to occur.
    pub fn new_surjective(r: u32, colors: Vec<u32>) -> Result<Self> {
        let c = Coloring::new(r, colors)?;
        if !c.is_surjective() {
            return Err(Error::InvalidColoring(format!(
                "surjective mode: only {} of {r} colors occur",
                c.distinct_colors()
            )));
        }
        Ok(c)
    }

    /// Infers `r` as the largest color present.
    pub fn from_colors(colors: Vec<u32>) -> Result<Self> {
        let r = colors.iter().copied().max().unwrap_or(0).max(1);
        Coloring::new(r, colors)
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    /// Always false: a coloring covers at least one position.
    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn into_colors(self) -> Vec<u32> {
        self.colors
    }

    /// Color at 1-based position `pos`.
    pub fn color(&self, pos: usize) -> u32 {
        self.colors[pos - 1]
    }

    pub fn distinct_colors(&self) -> usize {
        let mut seen = vec![false; self.r as usize + 1];
        let mut count = 0;
        for &c in &self.colors {
            if !seen[c as usize] {
                seen[c as usize] = true;
                count += 1;
            }
        }
        count
    }

    pub fn is_surjective(&self) -> bool {
        self.distinct_colors() == self.r as usize
    }

    /// Restriction to `[m]`.
    pub fn prefix(&self, m: usize) -> Result<Coloring> {
        if m == 0 || m > self.len() {
            return Err(Error::invalid(format!(
                "prefix length {m} outside 1..={}",
                self.len()
            )));
        }
        Ok(Coloring {
            r: self.r,
            colors: self.colors[..m].to_vec(),
        })
    }

    /// Renames colors: old color `c` becomes `perm[c - 1]`. `perm` must be a
    /// permutation of `1..=r`.
    pub fn relabel(&self, perm: &[u32]) -> Result<Coloring> {
        if perm.len() != self.r as usize {
            return Err(Error::invalid(format!(
                "permutation has {} entries, expected {}",
                perm.len(),
                self.r
            )));
        }
        let mut seen = vec![false; perm.len() + 1];
        for &p in perm {
            if p == 0 || p > self.r || seen[p as usize] {
                return Err(Error::invalid("relabeling is not a permutation of 1..=r"));
            }
            seen[p as usize] = true;
        }
        let colors = self.colors.iter().map(|&c| perm[c as usize - 1]).collect();
        Ok(Coloring { r: self.r, colors })
    }

    /// Same colors with a different declared color count.
    pub fn with_r(self, r: u32) -> Result<Coloring> {
        Coloring::new(r, self.colors)
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.colors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The progression `a, a + d, ..., a + (k - 1) d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Progression {
    pub a: usize,
    pub d: usize,
    pub k: usize,
}

impl Progression {
    pub fn new(a: usize, d: usize, k: usize) -> Result<Self> {
        if a < 1 || d < 1 || k < 2 {
            return Err(Error::invalid(format!(
                "progression needs a >= 1, d >= 1, k >= 2 (got a={a}, d={d}, k={k})"
            )));
        }
        Ok(Progression { a, d, k })
    }

    pub fn last(&self) -> usize {
        self.a + (self.k - 1) * self.d
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).map(move |i| self.a + i * self.d)
    }

    pub fn fits(&self, n: usize) -> bool {
        self.last() <= n
    }

    pub fn is_mono(&self, c: &Coloring) -> bool {
        let first = c.color(self.a);
        self.positions().all(|p| c.color(p) == first)
    }

    pub fn is_rainbow(&self, c: &Coloring) -> bool {
        let mut seen: Vec<u32> = self.positions().map(|p| c.color(p)).collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

impl fmt::Display for Progression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} d={} k={}", self.a, self.d, self.k)
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("interval length n must be >= 1"));
    }
    if k < 2 {
        return Err(Error::invalid("progression length k must be >= 2"));
    }
    Ok(())
}

/// Largest common difference of a k-AP inside `[n]`.
fn max_difference(n: usize, k: usize) -> usize {
    (n - 1) / (k - 1)
}

/// Iterator over all k-APs of `[n]`, `d`-major then `a`.
#[derive(Clone, Debug)]
pub struct Progressions {
    n: usize,
    k: usize,
    d: usize,
    a: usize,
    d_max: usize,
}

impl Iterator for Progressions {
    type Item = Progression;

    fn next(&mut self) -> Option<Progression> {
        while self.d <= self.d_max {
            if self.a + (self.k - 1) * self.d <= self.n {
                let p = Progression {
                    a: self.a,
                    d: self.d,
                    k: self.k,
                };
                self.a += 1;
                return Some(p);
            }
            self.d += 1;
            self.a = 1;
        }
        None
    }
}

pub fn enumerate_kaps(n: usize, k: usize) -> Result<Progressions> {
    check_nk(n, k)?;
    Ok(Progressions {
        n,
        k,
        d: 1,
        a: 1,
        d_max: max_difference(n, k),
    })
}

/// Number of k-APs in `[n]`: `sum_{d >= 1, (k-1) d <= n-1} (n - (k-1) d)`.
pub fn count_kaps(n: u64, k: u64) -> Result<u64> {
    if n < 1 || k < 2 {
        return Err(Error::invalid(format!("count_kaps needs n >= 1, k >= 2 (got n={n}, k={k})")));
    }
    let dmax = (n - 1) / (k - 1);
    let overflow = || Error::Overflow(format!("count_kaps({n}, {k}) exceeds u64"));
    // dmax * n - (k-1) * dmax (dmax + 1) / 2
    let total = dmax.checked_mul(n).ok_or_else(overflow)?;
    let tri = if dmax % 2 == 0 {
        (dmax / 2).checked_mul(dmax + 1)
    } else {
        dmax.checked_mul((dmax + 1) / 2)
    }
    .ok_or_else(overflow)?;
    let sub = tri.checked_mul(k - 1).ok_or_else(overflow)?;
    Ok(total - sub)
}

/// Exact maximum, over positions of `[n]`, of the number of k-APs through
/// that position.
pub fn max_degree(n: u64, k: u64) -> Result<u64> {
    if n < 1 || k < 2 {
        return Err(Error::invalid(format!("max_degree needs n >= 1, k >= 2 (got n={n}, k={k})")));
    }
    let dmax = (n - 1) / (k - 1);
    let mut best = 0u64;
    for x in 1..=n {
        let mut deg = 0u64;
        for d in 1..=dmax {
            // x is term j of (a, d): a = x - j d >= 1 and x + (k-1-j) d <= n.
            let hi = ((x - 1) / d).min(k - 1);
            let lo = (k - 1).saturating_sub((n - x) / d);
            if hi >= lo {
                deg += hi - lo + 1;
            }
        }
        best = best.max(deg);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// bitset kernel

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Word `i` of `src >> s` (bit `p` of the result is bit `p + s` of `src`).
#[inline(always)]
fn shifted_word(src: &[u64], i: usize, w: usize, b: u32) -> u64 {
    let lo = src.get(i + w).copied().unwrap_or(0);
    if b == 0 {
        lo
    } else {
        let hi = src.get(i + w + 1).copied().unwrap_or(0);
        (lo >> b) | (hi << (64 - b))
    }
}

/// Calls `op(&mut dst[i], src[i], (src >> s)[i])` for every word of `dst`;
/// `src` must be at least as long as `dst` and reads past its end are zero.
#[inline(always)]
fn for_shifted(dst: &mut [u64], src: &[u64], s: usize, op: impl Fn(&mut u64, u64, u64)) {
    let (w, b) = (s / WORD, (s % WORD) as u32);
    let len = dst.len();
    let fast = src.len().saturating_sub(w + 1).min(len);
    let (head, tail) = dst.split_at_mut(fast);
    let base = &src[..fast];
    let lo = &src[w..w + fast];
    if b == 0 {
        for ((o, &x), &y) in head.iter_mut().zip(base).zip(lo) {
            op(o, x, y);
        }
    } else {
        let hi = &src[w + 1..w + 1 + fast];
        for (((o, &x), &l), &h) in head.iter_mut().zip(base).zip(lo).zip(hi) {
            op(o, x, (l >> b) | (h << (64 - b)));
        }
    }
    for (i, o) in tail.iter_mut().enumerate() {
        let i = fast + i;
        op(o, src[i], shifted_word(src, i, w, b));
    }
}

/// Reusable scratch for the monochromatic-progression kernel.
///
/// For a fixed difference `d`, bit `p` of `eq` marks `col[p] == col[p + d]`
/// (0-based). A monochromatic k-AP starting at `p` is exactly a run of
/// `k - 1` such marks at stride `d`, which is collected with
/// `ceil(log2(k-1))` shift-and-AND passes.
pub(crate) struct MonoKernel<'a> {
    colors: &'a [u32],
    k: usize,
    /// Bit `b` of `color - 1`, one bitset per `b`.
    planes: Vec<Vec<u64>>,
    eq: Vec<u64>,
    scratch: Vec<u64>,
}

impl<'a> MonoKernel<'a> {
    pub(crate) fn new(c: &'a Coloring, k: usize) -> Self {
        let n = c.len();
        let bits = (32 - (c.r() - 1).leading_zeros()).max(1) as usize;
        let mut planes = vec![vec![0u64; words_for(n)]; bits];
        for (p, &col) in c.colors().iter().enumerate() {
            let v = col - 1;
            for (b, plane) in planes.iter_mut().enumerate() {
                plane[p / WORD] |= (((v >> b) & 1) as u64) << (p % WORD);
            }
        }
        MonoKernel {
            colors: c.colors(),
            k,
            planes,
            eq: vec![0; words_for(n)],
            scratch: vec![0; words_for(n)],
        }
    }

    pub(crate) fn max_difference(&self) -> usize {
        if self.colors.len() < self.k {
            0
        } else {
            max_difference(self.colors.len(), self.k)
        }
    }

    /// Computes the start bitset for difference `d` and returns the number of
    /// valid starts; bits `0..starts` of [`Self::starts`] are then meaningful.
    pub(crate) fn run(&mut self, d: usize) -> usize {
        let n = self.colors.len();
        let starts = n - (self.k - 1) * d;
        let eq_words = words_for(n - d);

        // Bits at or above n - d are garbage but only ever feed starts that
        // are masked off at the end.
        let eq = &mut self.eq[..eq_words];
        for (i, plane) in self.planes.iter().enumerate() {
            if i == 0 {
                for_shifted(eq, plane, d, |o, x, y| *o = x ^ y);
            } else {
                for_shifted(eq, plane, d, |o, x, y| *o |= x ^ y);
            }
        }
        for x in eq.iter_mut() {
            *x = !*x;
        }

        // AND together k-1 stride-d shifts by doubling the covered run.
        let need = self.k - 1;
        let mut have = 1;
        let live = words_for(starts);
        let mut cur = eq_words;
        while have < need {
            let step = have.min(need - have);
            let len = words_for(n - d - (have + step - 1) * d).max(live).min(cur);
            for_shifted(&mut self.scratch[..len], &self.eq[..cur], step * d, |o, x, y| *o = x & y);
            std::mem::swap(&mut self.eq, &mut self.scratch);
            cur = len;
            have += step;
        }
        let rem = starts % WORD;
        if rem != 0 {
            self.eq[live - 1] &= (1u64 << rem) - 1;
        }
        starts
    }

    pub(crate) fn starts(&self, starts: usize) -> &[u64] {
        &self.eq[..words_for(starts)]
    }

    /// Smallest 0-based start of a monochromatic AP with difference `d`.
    pub(crate) fn first(&mut self, d: usize) -> Option<usize> {
        let starts = self.run(d);
        self.starts(starts)
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * WORD + w.trailing_zeros() as usize)
    }
}

fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * WORD + t)
            }
        })
    })
}

/// First monochromatic k-AP in enumeration order, if any.
pub fn find_mono_kap(c: &Coloring, k: usize) -> Result<Option<Progression>> {
    check_nk(c.len(), k)?;
    let mut kernel = MonoKernel::new(c, k);
    for d in 1..=kernel.max_difference() {
        if let Some(p) = kernel.first(d) {
            return Ok(Some(Progression { a: p + 1, d, k }));
        }
    }
    Ok(None)
}

/// Every monochromatic k-AP, in enumeration order.
pub fn all_mono_kaps(c: &Coloring, k: usize) -> Result<Vec<Progression>> {
    check_nk(c.len(), k)?;
    let mut kernel = MonoKernel::new(c, k);
    let mut out = Vec::new();
    for d in 1..=kernel.max_difference() {
        let starts = kernel.run(d);
        out.extend(iter_bits(kernel.starts(starts)).map(|p| Progression { a: p + 1, d, k }));
    }
    Ok(out)
}

/// First k-AP with `k` pairwise distinct colors, if any.
pub fn find_rainbow_kap(c: &Coloring, k: usize) -> Result<Option<Progression>> {
    check_nk(c.len(), k)?;
    if c.distinct_colors() < k || c.len() < k {
        return Ok(None);
    }
    let colors = c.colors();
    let n = colors.len();
    let mut stamp = vec![0u64; c.r() as usize + 1];
    let mut epoch = 0u64;
    for d in 1..=max_difference(n, k) {
        'start: for p in 0..n - (k - 1) * d {
            epoch += 1;
            for j in 0..k {
                let col = colors[p + j * d] as usize;
                if stamp[col] == epoch {
                    continue 'start;
                }
                stamp[col] = epoch;
            }
            return Ok(Some(Progression { a: p + 1, d, k }));
        }
    }
    Ok(None)
}
