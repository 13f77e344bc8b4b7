use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use vdw_core::blowup::{self, BlowupParams};
use vdw_core::certificate::{self, exit};
use vdw_core::chain::{self, ChainReport};
use vdw_core::lll::{self, ElParams, SampleOutcome};
use vdw_core::oracle::{self, OracleResult, SearchBudget, Status};
use vdw_core::pipeline::{self, ConstructOptions};
use vdw_core::{ap, primes, Coloring};

#[derive(Parser, Debug)]
#[command(name = "vdw", version, about = "Van der Waerden lower-bound witnesses and certificates")]
struct Cli {
    /// Output style; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(flatten)]
    budget: BudgetArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    /// Node limit for exhaustive searches.
    #[arg(long, global = true, env = "VDWCERT_BUDGET_NODES")]
    budget_nodes: Option<u64>,

    /// Wall-clock limit for exhaustive searches, in seconds.
    #[arg(long, global = true, env = "VDWCERT_BUDGET_SECONDS")]
    budget_seconds: Option<f64>,
}

impl BudgetArgs {
    fn search_budget(&self) -> Result<SearchBudget> {
        let mut b = SearchBudget::default();
        if let Some(n) = self.budget_nodes {
            b.node_limit = n;
        }
        if let Some(s) = self.budget_seconds {
            if !(s.is_finite() && s > 0.0) {
                bail!("--budget-seconds must be a positive number (got {s})");
            }
            b.time_limit = Some(Duration::from_secs_f64(s));
        }
        Ok(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Kv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a certified mono-free coloring and write its certificate.
    Construct {
        #[arg(long)]
        k: usize,
        /// Base color count (default floor(k / ln k), at least 2).
        #[arg(long)]
        r0: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stop the blow-up chain at this color count.
        #[arg(long)]
        r_to: Option<u32>,
        /// Largest payload materialized; longer results are metadata-only.
        #[arg(long, default_value_t = blowup::MATERIALIZE_LIMIT)]
        max_cells: u64,
        /// Certificate path; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate file.
    Verify {
        path: PathBuf,
        /// Also rebuild the payload from the recorded method chain.
        #[arg(long)]
        replay: bool,
    },
    /// Exhaustive search for a small exact value.
    Exact {
        #[command(subcommand)]
        which: ExactCommand,
    },
    /// Lower-bound chain in log space, one row per k.
    Bound {
        #[arg(long, required = true, value_delimiter = ',')]
        k: Vec<u64>,
        /// Constant of the reported error term.
        #[arg(long, default_value_t = chain::DEFAULT_C1)]
        c: f64,
        /// Also print the analytic factor bounds (k >= 10000 only).
        #[arg(long)]
        factors: bool,
    },
    /// Primes in the short window below k - 1.
    Primes {
        #[arg(long)]
        k: u64,
    },
    /// R(r0) over an even grid of base color counts.
    SweepR0 {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Normalized chain ratio over a grid of k.
    Eps {
        #[arg(long, value_delimiter = ',', default_values_t = [10_000u64, 100_000, 1_000_000, 10_000_000])]
        k: Vec<u64>,
        #[arg(long, default_value_t = chain::DEFAULT_C1)]
        c: f64,
    },
    /// Resampling search for a mono-free coloring.
    Sample {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: usize,
        /// Interval length; the certified length when absent.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = lll::DEFAULT_MAX_RESAMPLES)]
        max_resamples: u64,
        /// Print the colors on success.
        #[arg(long)]
        show: bool,
    },
    /// Local-lemma condition e * r^(1-k) * (2kn + 1) <= 1.
    LllCheck {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: usize,
        /// Defaults to the certified interval length.
        #[arg(long)]
        n: Option<u64>,
        /// Decide the inequality in exact integer arithmetic.
        #[arg(long)]
        exact_rational: bool,
    },
    /// One blow-up step of a base coloring.
    Blowup {
        /// Space- or comma-separated base colors.
        #[arg(long, conflicts_with = "base_cert")]
        colors: Option<String>,
        /// Take the base from a certificate payload.
        #[arg(long)]
        base_cert: Option<PathBuf>,
        #[arg(long)]
        p: u64,
        /// New color count.
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: usize,
        /// Skip the hypothesis checks and report what happens.
        #[arg(long)]
        unsafe_construction: bool,
        #[arg(long)]
        show: bool,
    },
}

#[derive(Subcommand, Debug)]
enum ExactCommand {
    /// W(r, k).
    W {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: usize,
    },
    /// aw([n], k).
    Aw {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// H(k).
    H {
        #[arg(long)]
        k: usize,
    },
}

/// Accumulates `key=value` lines or one CSV table.
struct Out {
    format: Format,
    text: String,
}

impl Out {
    fn new(format: Format) -> Self {
        Out {
            format,
            text: String::new(),
        }
    }

    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}={value}");
    }

    /// Writes `header` then `rows` in CSV, or each row as `key=value` lines
    /// separated by blank lines.
    fn table(&mut self, header: &[&str], rows: &[Vec<String>]) {
        match self.format {
            Format::Csv => {
                let _ = writeln!(self.text, "{}", header.join(","));
                for row in rows {
                    let _ = writeln!(self.text, "{}", row.join(","));
                }
            }
            Format::Kv => {
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        self.text.push('\n');
                    }
                    for (h, v) in header.iter().zip(row) {
                        self.kv(h, v);
                    }
                }
            }
        }
    }

    fn print(self) {
        print!("{}", self.text);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .chain()
                .find_map(|e| e.downcast_ref::<vdw_core::Error>())
                .map(vdw_core::Error::exit_code)
                .unwrap_or(exit::PARSE_OR_IO);
            ExitCode::from(code as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let fmt_or = |default| cli.format.unwrap_or(default);
    match cli.command {
        Command::Construct {
            k,
            r0,
            seed,
            r_to,
            max_cells,
            out,
        } => {
            let mut opts = ConstructOptions::new(k, seed).with_max_cells(max_cells);
            if let Some(r0) = r0 {
                opts = opts.with_r0(r0);
            }
            if let Some(r_to) = r_to {
                opts = opts.with_r_to(r_to);
            }
            let built = pipeline::construct(&opts)?;
            for note in &built.notes {
                eprintln!("note: {note}");
            }
            let text = built.certificate.to_text();
            match out {
                Some(path) => std::fs::write(&path, &text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            if built.certificate.coloring().is_none() {
                eprintln!("notice: payload omitted (n={}); certificate is metadata-only", built.certificate.n);
                return Ok(exit::BUDGET_OR_GUARD);
            }
            Ok(exit::PASS)
        }

        Command::Verify { path, replay } => {
            let text = std::fs::read_to_string(&path)
                .map_err(vdw_core::Error::from)
                .with_context(|| format!("reading {}", path.display()))?;
            let (cert, report) = certificate::verify_text(&text)?;
            print!("{report}");
            let mut code = report.exit_code();
            if replay && cert.coloring().is_some() {
                if pipeline::replay_matches(&cert)? {
                    println!("replay: pass");
                } else {
                    println!("replay: FAIL payload differs from the method chain");
                    code = exit::PROPERTY_FAILED;
                }
            }
            println!("result={}", if code == exit::PASS { "pass" } else { "fail" });
            Ok(code)
        }

        Command::Exact { which } => {
            let budget = cli.budget.search_budget()?;
            let (kind, r, k, n, res) = match which {
                ExactCommand::W { r, k } => ("w", Some(r), k, None, oracle::exact_w(r, k, budget)?),
                ExactCommand::Aw { n, k } => ("aw", None, k, Some(n), oracle::exact_aw(n, k, budget)?),
                ExactCommand::H { k } => ("h", None, k, None, oracle::exact_h(k, budget)?),
            };
            print_exact(fmt_or(Format::Kv), kind, r, k, n, &res);
            Ok(if res.status == Status::Exact {
                exit::PASS
            } else {
                exit::BUDGET_OR_GUARD
            })
        }

        Command::Bound { k, c, factors } => {
            let format = fmt_or(Format::Csv);
            let mut out = Out::new(format);
            let reports = k
                .iter()
                .map(|&k| chain::chain_lower_bound_with(k, c))
                .collect::<vdw_core::Result<Vec<ChainReport>>>()?;
            let header: Vec<&str> = ChainReport::CSV_HEADER.split(',').collect();
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| r.csv_row().split(',').map(str::to_string).collect())
                .collect();
            out.table(&header, &rows);
            if factors {
                let mut rows = Vec::new();
                for &k in &k {
                    let fb = chain::factor_bounds_with(k, c)?;
                    rows.push(vec![
                        k.to_string(),
                        format!("{:.9}", fb.log_p_star),
                        format!("{:.9}", fb.log_p_star_bound),
                        format!("{:.9}", fb.steps_ratio),
                        format!("{:.9}", fb.steps_ratio_bound),
                        format!("{:.9}", fb.product),
                        format!("{:.9}", fb.product_bound),
                        (fb.log_p_star_holds() && fb.steps_ratio_holds()).to_string(),
                        fb.product_holds().to_string(),
                    ]);
                }
                out.text.push('\n');
                out.table(
                    &[
                        "k",
                        "log_p_star",
                        "log_p_star_bound",
                        "steps_ratio",
                        "steps_ratio_bound",
                        "product",
                        "product_bound",
                        "bounds_hold",
                        "product_bound_holds_advisory",
                    ],
                    &rows,
                );
            }
            out.print();
            Ok(exit::PASS)
        }

        Command::Primes { k } => {
            let w = primes::bhp_window(k);
            let mut out = Out::new(fmt_or(Format::Kv));
            let list = w
                .primes_found
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            let p_star = w.p_star.map_or("none".to_string(), |p| p.to_string());
            out.table(
                &["k", "lo", "hi", "count", "p_star", "primes"],
                &[vec![
                    k.to_string(),
                    format!("{:.6}", w.lo),
                    w.hi.to_string(),
                    w.primes_found.len().to_string(),
                    p_star,
                    list,
                ]],
            );
            out.print();
            Ok(exit::PASS)
        }

        Command::SweepR0 { k, steps } => {
            let sweep = chain::sweep_r(k, &chain::linear_grid(k, steps))?;
            let mut out = Out::new(fmt_or(Format::Csv));
            let rows: Vec<Vec<String>> = sweep
                .points
                .iter()
                .map(|p| {
                    vec![
                        format!("{:.6}", p.r0_candidate),
                        format!("{:.12e}", p.log_r),
                        format!("{:.12e}", p.r),
                    ]
                })
                .collect();
            out.table(&["r0", "log_r", "r"], &rows);
            out.print();
            let best = sweep.best();
            eprintln!(
                "argmax r0={:.6} (continuous optimum {:.6})",
                best.r0_candidate,
                chain::r0_opt(k as f64)
            );
            Ok(exit::PASS)
        }

        Command::Eps { k, c } => {
            let report = chain::eps_report(&k, c)?;
            let mut out = Out::new(fmt_or(Format::Csv));
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        format!("{:.12}", r.normalized),
                        format!("{:.6e}", r.eps_k_bound),
                        r.status.label().to_string(),
                    ]
                })
                .collect();
            out.table(&["k", "normalized_ratio", "eps_bound", "status"], &rows);
            out.print();
            eprintln!("increasing={} within_band={}", report.increasing, report.within_band);
            Ok(if report.increasing && report.within_band {
                exit::PASS
            } else {
                exit::PROPERTY_FAILED
            })
        }

        Command::Sample {
            r,
            k,
            n,
            seed,
            max_resamples,
            show,
        } => {
            let params = match n {
                Some(n) => ElParams::freeform(r, k, n, seed),
                None => ElParams::certified(r, k, seed)?,
            }
            .with_max_resamples(max_resamples);
            let mut out = Out::new(Format::Kv);
            out.kv("n", params.n_target);
            let code = match lll::sample_mono_free(&params)? {
                SampleOutcome::Success(s) => {
                    out.kv("status", "success");
                    out.kv("resamples", s.resamples);
                    if show {
                        out.kv("colors", &s.coloring);
                    }
                    exit::PASS
                }
                SampleOutcome::Failure(f) => {
                    out.kv("status", "failure");
                    out.kv("resamples", f.resamples);
                    out.kv("violated", f.violated);
                    out.kv("reason", &f.reason);
                    exit::PROPERTY_FAILED
                }
            };
            out.print();
            Ok(code)
        }

        Command::LllCheck {
            r,
            k,
            n,
            exact_rational,
        } => {
            let n = match n {
                Some(n) => n,
                None => u64::try_from(lll::el_interval_length(r, k)?)
                    .context("interval length does not fit in 64 bits; pass --n")?,
            };
            let mut out = Out::new(Format::Kv);
            out.kv("n", n);
            let satisfied = if exact_rational {
                let ok = lll::lll_condition_exact(r, k, n)?;
                out.kv("method", "exact-rational");
                ok
            } else {
                let check = lll::lll_condition(r, k, n)?;
                out.kv("method", "float-rounded-up");
                out.kv("p", format!("{:e}", check.p));
                out.kv("d", check.d);
                out.kv("lhs", format!("{:e}", check.lhs));
                check.satisfied
            };
            out.kv("satisfied", satisfied);
            out.print();
            Ok(if satisfied { exit::PASS } else { exit::PROPERTY_FAILED })
        }

        Command::Blowup {
            colors,
            base_cert,
            p,
            r,
            k,
            unsafe_construction,
            show,
        } => {
            let base = match (colors, base_cert) {
                (Some(s), None) => parse_colors(&s)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(vdw_core::Error::from)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let cert = certificate::Certificate::parse(&text)?;
                    cert.coloring()
                        .cloned()
                        .context("certificate has no payload to lift")?
                }
                _ => bail!("give exactly one of --colors or --base-cert"),
            };
            let params = BlowupParams::new(base, p, r, k).unsafe_construction(unsafe_construction);
            let lifted = blowup::blow_up(&params)?;
            let mut out = Out::new(Format::Kv);
            out.kv("n", lifted.len());
            let witness = ap::find_mono_kap(&lifted, k)?;
            match witness {
                None => out.kv("mono_free", true),
                Some(w) => {
                    out.kv("mono_free", false);
                    out.kv("witness", w);
                }
            }
            if show {
                out.kv("colors", &lifted);
            }
            out.print();
            Ok(if witness.is_none() { exit::PASS } else { exit::PROPERTY_FAILED })
        }
    }
}

fn parse_colors(s: &str) -> Result<Coloring> {
    let colors = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u32>().with_context(|| format!("bad color {t:?}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Coloring::from_colors(colors)?)
}

fn print_exact(format: Format, kind: &str, r: Option<u32>, k: usize, n: Option<usize>, res: &OracleResult) {
    let status = match res.status {
        Status::Exact => "exact",
        Status::BudgetExhausted => "budget-exhausted",
    };
    let value = res.value.map_or("none".to_string(), |v| v.to_string());
    let witness = res.witness.as_ref().map_or(String::new(), |w| w.to_string());
    let opt = |x: Option<String>| x.unwrap_or_default();
    let mut out = Out::new(format);
    out.table(
        &["kind", "r", "k", "n", "status", "value", "nodes", "witness"],
        &[vec![
            kind.to_string(),
            opt(r.map(|r| r.to_string())),
            k.to_string(),
            opt(n.map(|n| n.to_string())),
            status.to_string(),
            value,
            res.nodes.to_string(),
            witness,
        ]],
    );
    out.print();
}
