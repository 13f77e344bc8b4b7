//! Line-oriented certificate files.
//!
//! ```text
//! vdwcert 1
//! k=3
//! r=3
//! n=24
//! chain=oracle-witness{source=exact-w,r=2,k=3};bct-blowup{p=3,r=3,prime=leq-k}
//! claims=mono-free,rainbow-free
//! 3 1 1 3 1 1 2 3 2 ...
//! sha256=<hex of the colors line, without its newline>
//! ```
//!
//! When the coloring is too large to write out, the colors and checksum
//! lines are replaced by a single `payload=omitted` line; `n=` still carries
//! the exact length.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::ap::{self, Coloring, Progression};
use crate::error::{Error, Result};
use crate::lll::Mode;

pub const MAGIC: &str = "vdwcert";
pub const FORMAT_VERSION: u32 = 1;

/// Process exit codes shared by the CLI.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const PROPERTY_FAILED: i32 = 1;
    pub const PARSE_OR_IO: i32 = 2;
    pub const BUDGET_OR_GUARD: i32 = 3;
    pub const REGIME_REFUSED: i32 = 4;
    pub const CHECKSUM_MISMATCH: i32 = 5;
}

/// How the first prime of a blow-up chain was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeChoice {
    /// Largest prime in the short window below `k - 1`.
    Window,
    /// Largest prime `<= k - 1`, outside the window regime.
    LeqKMinus1,
    /// Largest prime `<= k`.
    LeqK,
}

impl PrimeChoice {
    fn as_str(self) -> &'static str {
        match self {
            PrimeChoice::Window => "window",
            PrimeChoice::LeqKMinus1 => "leq-k-1",
            PrimeChoice::LeqK => "leq-k",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "window" => Some(PrimeChoice::Window),
            "leq-k-1" => Some(PrimeChoice::LeqKMinus1),
            "leq-k" => Some(PrimeChoice::LeqK),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainStep {
    ElSample {
        r: u32,
        k: usize,
        n: BigUint,
        seed: u64,
        mode: Mode,
    },
    /// Witness from the exhaustive `W(r,k)` search.
    OracleWitness { r: u32, k: usize },
    BctBlowup { p: u64, r: u32, prime: PrimeChoice },
}

impl ChainStep {
    /// Color count after this step.
    pub fn colors(&self) -> u32 {
        match self {
            ChainStep::ElSample { r, .. } | ChainStep::OracleWitness { r, .. } | ChainStep::BctBlowup { r, .. } => *r,
        }
    }
}

impl fmt::Display for ChainStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainStep::ElSample { r, k, n, seed, mode } => {
                write!(f, "el-sample{{r={r},k={k},n={n},seed={seed}")?;
                if *mode == Mode::Freeform {
                    f.write_str(",mode=freeform")?;
                }
                f.write_str("}")
            }
            ChainStep::OracleWitness { r, k } => write!(f, "oracle-witness{{source=exact-w,r={r},k={k}}}"),
            ChainStep::BctBlowup { p, r, prime } => {
                write!(f, "bct-blowup{{p={p},r={r},prime={}}}", prime.as_str())
            }
        }
    }
}

fn parse_field<T: FromStr>(fields: &[(&str, &str)], key: &str, line: usize) -> Result<T> {
    let raw = fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("chain step lacks `{key}`"),
        })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value `{raw}` for `{key}`"),
    })
}

fn parse_step(s: &str, line: usize) -> Result<ChainStep> {
    let err = |msg: String| Error::Parse { line, msg };
    let open = s.find('{').ok_or_else(|| err(format!("chain step `{s}` lacks `{{`")))?;
    if !s.ends_with('}') {
        return Err(err(format!("chain step `{s}` lacks `}}`")));
    }
    let name = &s[..open];
    let body = &s[open + 1..s.len() - 1];
    let fields: Vec<(&str, &str)> = body
        .split(',')
        .filter(|f| !f.is_empty())
        .map(|f| f.split_once('=').ok_or_else(|| err(format!("field `{f}` is not key=value"))))
        .collect::<Result<_>>()?;
    match name {
        "el-sample" => {
            let mode = match fields.iter().find(|(k, _)| *k == "mode").map(|(_, v)| *v) {
                None | Some("el") => Mode::Certified,
                Some("freeform") => Mode::Freeform,
                Some(other) => return Err(err(format!("unknown sampler mode `{other}`"))),
            };
            Ok(ChainStep::ElSample {
                r: parse_field(&fields, "r", line)?,
                k: parse_field(&fields, "k", line)?,
                n: parse_field(&fields, "n", line)?,
                seed: parse_field(&fields, "seed", line)?,
                mode,
            })
        }
        "oracle-witness" => {
            let source: String = parse_field(&fields, "source", line)?;
            if source != "exact-w" {
                return Err(err(format!("unknown witness source `{source}`")));
            }
            Ok(ChainStep::OracleWitness {
                r: parse_field(&fields, "r", line)?,
                k: parse_field(&fields, "k", line)?,
            })
        }
        "bct-blowup" => {
            let prime = match fields.iter().find(|(k, _)| *k == "prime").map(|(_, v)| *v) {
                None => PrimeChoice::LeqK,
                Some(v) => PrimeChoice::parse(v).ok_or_else(|| err(format!("unknown prime choice `{v}`")))?,
            };
            Ok(ChainStep::BctBlowup {
                p: parse_field(&fields, "p", line)?,
                r: parse_field(&fields, "r", line)?,
                prime,
            })
        }
        other => Err(err(format!("unknown chain step `{other}`"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Claims {
    pub mono_free: bool,
    pub rainbow_free: bool,
}

impl fmt::Display for Claims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.mono_free {
            parts.push("mono-free");
        }
        if self.rainbow_free {
            parts.push("rainbow-free");
        }
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Colors(Coloring),
    Omitted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub format_version: u32,
    pub k: usize,
    pub r: u32,
    pub n: BigUint,
    pub chain: Vec<ChainStep>,
    pub claims: Claims,
    pub payload: Payload,
}

fn colors_line(c: &Coloring) -> String {
    let mut s = String::with_capacity(c.len() * 3);
    for (i, col) in c.colors().iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{col}");
    }
    s
}

pub fn checksum_hex(colors_line: &str) -> String {
    hex::encode(Sha256::digest(colors_line.as_bytes()))
}

impl Certificate {
    pub fn coloring(&self) -> Option<&Coloring> {
        match &self.payload {
            Payload::Colors(c) => Some(c),
            Payload::Omitted => None,
        }
    }

    /// Checksum of the payload, `None` when omitted.
    pub fn checksum(&self) -> Option<String> {
        self.coloring().map(|c| checksum_hex(&colors_line(c)))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {}", self.format_version);
        let _ = writeln!(out, "k={}", self.k);
        let _ = writeln!(out, "r={}", self.r);
        let _ = writeln!(out, "n={}", self.n);
        let chain: Vec<String> = self.chain.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "chain={}", chain.join(";"));
        let _ = writeln!(out, "claims={}", self.claims);
        match &self.payload {
            Payload::Colors(c) => {
                let line = colors_line(c);
                let _ = writeln!(out, "{line}");
                let _ = writeln!(out, "sha256={}", checksum_hex(&line));
            }
            Payload::Omitted => {
                let _ = writeln!(out, "payload=omitted");
            }
        }
        out
    }

    /// Parses a certificate and checks its checksum.
    pub fn parse(text: &str) -> Result<Certificate> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            })
        };
        let perr = |line: usize, msg: String| Error::Parse { line, msg };

        let (ln, header) = next("header")?;
        let version = header
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| perr(ln, format!("expected `{MAGIC} <version>`")))?;
        let format_version: u32 = version
            .parse()
            .map_err(|_| perr(ln, format!("bad version `{version}`")))?;
        if format_version != FORMAT_VERSION {
            return Err(perr(ln, format!("unsupported version {format_version}")));
        }

        fn keyed<'a>(line: (usize, &'a str), key: &str) -> Result<(usize, &'a str)> {
            let (ln, l) = line;
            l.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .map(|v| (ln, v))
                .ok_or_else(|| Error::Parse {
                    line: ln,
                    msg: format!("expected `{key}=`"),
                })
        }
        fn number<T: FromStr>((ln, v): (usize, &str), key: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("bad {key} value `{v}`"),
            })
        }

        let k: usize = number(keyed(next("k=")?, "k")?, "k")?;
        let r: u32 = number(keyed(next("r=")?, "r")?, "r")?;
        let n: BigUint = number(keyed(next("n=")?, "n")?, "n")?;
        let (chain_ln, chain_raw) = keyed(next("chain=")?, "chain")?;
        let chain = chain_raw
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| parse_step(s, chain_ln))
            .collect::<Result<Vec<_>>>()?;
        let (claims_ln, claims_raw) = keyed(next("claims=")?, "claims")?;
        let mut claims = Claims::default();
        for c in claims_raw.split(',').filter(|c| !c.is_empty()) {
            match c {
                "mono-free" => claims.mono_free = true,
                "rainbow-free" => claims.rainbow_free = true,
                other => return Err(perr(claims_ln, format!("unknown claim `{other}`"))),
            }
        }

        let (pay_ln, pay) = next("payload")?;
        let payload = if pay == "payload=omitted" {
            Payload::Omitted
        } else {
            let colors = pay
                .split(' ')
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| perr(pay_ln, format!("bad color `{t}`")))
                })
                .collect::<Result<Vec<u32>>>()?;
            let coloring = Coloring::new(r, colors).map_err(|e| perr(pay_ln, e.to_string()))?;
            let (sum_ln, recorded) = keyed(next("sha256=")?, "sha256")?;
            let computed = checksum_hex(pay);
            if recorded.len() != 64 || !recorded.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(perr(sum_ln, format!("malformed checksum `{recorded}`")));
            }
            if !recorded.eq_ignore_ascii_case(&computed) {
                return Err(Error::ChecksumMismatch {
                    recorded: recorded.to_string(),
                    computed,
                });
            }
            Payload::Colors(coloring)
        };
        if let Some((ln, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(perr(ln, format!("unexpected trailing content `{extra}`")));
        }
        Ok(Certificate {
            format_version,
            k,
            r,
            n,
            chain,
            claims,
            payload,
        })
    }

    /// Structural consistency: lengths, color counts and the chain's
    /// arithmetic. Returns a list of problems (empty when consistent).
    pub fn structure_problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.k < 2 {
            problems.push(format!("k={} is below 2", self.k));
        }
        if self.r < 1 {
            problems.push("r must be >= 1".into());
        }
        if let Some(c) = self.coloring() {
            if BigUint::from(c.len()) != self.n {
                problems.push(format!("n={} but payload has {} cells", self.n, c.len()));
            }
        }
        let Some(first) = self.chain.first() else {
            problems.push("empty method chain".into());
            return problems;
        };
        let mut len = match first {
            ChainStep::ElSample { n, k, .. } => {
                if *k != self.k {
                    problems.push(format!("sampler step uses k={k}, certificate k={}", self.k));
                }
                Some(n.clone())
            }
            ChainStep::OracleWitness { k, .. } => {
                if *k != self.k {
                    problems.push(format!("oracle step uses k={k}, certificate k={}", self.k));
                }
                None
            }
            ChainStep::BctBlowup { .. } => {
                problems.push("chain must start with a base construction".into());
                return problems;
            }
        };
        let mut colors = first.colors();
        for step in &self.chain[1..] {
            match step {
                ChainStep::BctBlowup { p, r, .. } => {
                    if *r != colors + 1 {
                        problems.push(format!("blow-up to r={r} does not follow r={colors}"));
                    }
                    if (*r as u64) > *p || *p > self.k as u64 {
                        problems.push(format!("blow-up r={r}, p={p} violates r <= p <= k"));
                    }
                    colors = *r;
                    len = len.map(|l| l * BigUint::from(*p));
                }
                _ => problems.push(format!("base step `{step}` after the first position")),
            }
        }
        if colors != self.r {
            problems.push(format!("chain ends with {colors} colors, certificate says r={}", self.r));
        }
        if let Some(len) = len {
            if len != self.n {
                problems.push(format!("chain implies n={len}, certificate says n={}", self.n));
            }
        }
        problems
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClaimOutcome {
    Pass,
    /// Rainbow-free because fewer than k colors exist.
    PassByPigeonhole,
    Fail(Progression),
    /// No payload to check.
    Unchecked,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimCheck {
    pub claim: &'static str,
    pub outcome: ClaimOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub structure: Vec<String>,
    pub claims: Vec<ClaimCheck>,
    pub payload_omitted: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.structure.is_empty()
            && !self.payload_omitted
            && self
                .claims
                .iter()
                .all(|c| matches!(c.outcome, ClaimOutcome::Pass | ClaimOutcome::PassByPigeonhole))
    }

    pub fn exit_code(&self) -> i32 {
        let failed = !self.structure.is_empty()
            || self.claims.iter().any(|c| matches!(c.outcome, ClaimOutcome::Fail(_)));
        if failed {
            exit::PROPERTY_FAILED
        } else if self.payload_omitted {
            exit::BUDGET_OR_GUARD
        } else {
            exit::PASS
        }
    }

    /// First failing witness, if any.
    pub fn witness(&self) -> Option<Progression> {
        self.claims.iter().find_map(|c| match c.outcome {
            ClaimOutcome::Fail(p) => Some(p),
            _ => None,
        })
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.structure {
            writeln!(f, "structure: FAIL {p}")?;
        }
        if self.structure.is_empty() {
            writeln!(f, "structure: pass")?;
        }
        for c in &self.claims {
            match &c.outcome {
                ClaimOutcome::Pass => writeln!(f, "{}: pass", c.claim)?,
                ClaimOutcome::PassByPigeonhole => writeln!(f, "{}: pass (by pigeonhole)", c.claim)?,
                ClaimOutcome::Fail(p) => writeln!(f, "{}: FAIL witness {p}", c.claim)?,
                ClaimOutcome::Unchecked => writeln!(f, "{}: unchecked (payload omitted)", c.claim)?,
            }
        }
        if self.payload_omitted {
            writeln!(f, "payload: omitted, metadata checked only")?;
        }
        Ok(())
    }
}

/// Re-runs every claimed property on the payload.
pub fn verify(cert: &Certificate) -> Result<VerifyReport> {
    let structure = cert.structure_problems();
    let mut claims = Vec::new();
    let coloring = cert.coloring();
    if cert.claims.mono_free {
        let outcome = match coloring {
            None => ClaimOutcome::Unchecked,
            Some(_) if cert.k < 2 => ClaimOutcome::Unchecked,
            Some(c) => match ap::find_mono_kap(c, cert.k)? {
                None => ClaimOutcome::Pass,
                Some(p) => ClaimOutcome::Fail(p),
            },
        };
        claims.push(ClaimCheck {
            claim: "mono-free",
            outcome,
        });
    }
    if cert.claims.rainbow_free {
        let outcome = if (cert.r as usize) < cert.k {
            ClaimOutcome::PassByPigeonhole
        } else {
            match coloring {
                None => ClaimOutcome::Unchecked,
                Some(_) if cert.k < 2 => ClaimOutcome::Unchecked,
                Some(c) => match ap::find_rainbow_kap(c, cert.k)? {
                    None => ClaimOutcome::Pass,
                    Some(p) => ClaimOutcome::Fail(p),
                },
            }
        };
        claims.push(ClaimCheck {
            claim: "rainbow-free",
            outcome,
        });
    }
    Ok(VerifyReport {
        structure,
        claims,
        payload_omitted: coloring.is_none(),
    })
}

/// Parses and verifies; parse failures and checksum mismatches surface as
/// errors.
pub fn verify_text(text: &str) -> Result<(Certificate, VerifyReport)> {
    let cert = Certificate::parse(text)?;
    let report = verify(&cert)?;
    Ok((cert, report))
}
