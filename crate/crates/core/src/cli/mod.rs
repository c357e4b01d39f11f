//! Command line front end.

pub mod output;
pub mod selfcheck;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::binding::{binding_suite, dyadic_distances};
use crate::coding::{decode, encode, enumerate_periodic, Word};
use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::Point2;
use crate::manifolds::{build_regions, find_first_tangency, grow_stable, grow_unstable, RegionSet, DEFAULT_BRACKET};
use crate::map::fixed_saddles;
use crate::thermo::{
    conditioned_gibbs, excursion_average, excursion_report, family_orbits, find_t_roots, measure_drop_experiment,
    pressure, t_grid, target_word, zero_block_family, OrbitWeights,
};
use output::{csv_document, fmt_f64, json_document, RunManifest};

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "HENON_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "henon-lab", version, about = "Hénon map laboratory at the first bifurcation parameter")]
pub struct Cli {
    /// Flat `key = value` configuration file; keys mirror the configuration fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key as `key=value`. Repeatable; applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Dissipation `b`.
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Orientation sign, 1 or -1.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s: Option<i8>,
    /// Loss `eps` in the rate `4 - eps`.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Table of first tangency parameters.
    FindAstar {
        #[arg(long, default_value_t = DEFAULT_BRACKET.0)]
        lo: f64,
        #[arg(long, default_value_t = DEFAULT_BRACKET.1)]
        hi: f64,
        /// Comma separated `b` values; defaults to the configured `b`.
        #[arg(long, value_delimiter = ',')]
        b_list: Vec<f64>,
    },
    /// Stable and unstable manifolds of both saddles at `a*`, one CSV per curve.
    GrowManifolds {
        #[arg(long, default_value_t = 4.0)]
        budget: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Saddles, `zeta0`, the regions and their bounding boxes at `a*`.
    BuildRegions,
    /// Symbolic coding of single points.
    Code {
        #[command(subcommand)]
        op: CodeOp,
    },
    /// Every orbit whose period divides `n`, with multipliers.
    PeriodicOrbits {
        #[arg(long)]
        n: usize,
    },
    /// `P_n(t)`, the Gibbs exponent and entropy as CSV.
    PressureCurve {
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Comma separated `t` values; a uniform grid on `[0, t-max]` when absent.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 3.0)]
        t_max: f64,
        #[arg(long, default_value_t = 60)]
        cells: usize,
    },
    /// `t^u`, `t_0` from the curve, the closed-form bound for `t_0` and the Cauchy gap.
    ThermoReport {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 400.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1600)]
        cells: usize,
    },
    /// Critical cocycle growth, contraction scales and recovery checks at `zeta0`.
    BindingCheck {
        #[arg(long, default_value_t = 8)]
        j_lo: u32,
        #[arg(long, default_value_t = 24)]
        j_hi: u32,
        #[arg(long, default_value_t = 4)]
        per_octave: u32,
    },
    /// Excursion averages for the `0^m 1` orbits; `(k, M)` searched when not given.
    Excursions {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long = "m")]
        big_m: Option<usize>,
        #[arg(long, default_value_t = 5)]
        m_lo: usize,
        #[arg(long, default_value_t = 60)]
        m_hi: usize,
    },
    /// Exponent bounds against `V_{k,M}` occupation for the `0^m 1` family and a target grid.
    DropExperiment {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.25, 0.5, 0.75, 1.0])]
        u: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        budget: usize,
        /// Period of the reference Gibbs measure.
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 5)]
        m_lo: usize,
        #[arg(long, default_value_t = 60)]
        m_hi: usize,
    },
    /// Runs the invariant suite; exit status 3 when a check fails.
    Selfcheck,
    /// Resolved configuration as `key = value` lines.
    PrintConfig,
}

#[derive(Subcommand, Debug, Clone)]
pub enum CodeOp {
    /// Point coded by a word such as `10.0110`, or `0110*` for a periodic word.
    Decode {
        word: String,
        #[arg(long, default_value_t = 30)]
        depth: usize,
    },
    /// Itinerary of the first `n` iterates of `(x, y)`.
    Encode {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FindAstar { .. } => "find-astar",
            Command::GrowManifolds { .. } => "grow-manifolds",
            Command::BuildRegions => "build-regions",
            Command::Code { op: CodeOp::Decode { .. } } => "code decode",
            Command::Code { op: CodeOp::Encode { .. } } => "code encode",
            Command::PeriodicOrbits { .. } => "periodic-orbits",
            Command::PressureCurve { .. } => "pressure-curve",
            Command::ThermoReport { .. } => "thermo-report",
            Command::BindingCheck { .. } => "binding-check",
            Command::Excursions { .. } => "excursions",
            Command::DropExperiment { .. } => "drop-experiment",
            Command::Selfcheck => "selfcheck",
            Command::PrintConfig => "print-config",
        }
    }
}

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config_text(text: &str, cfg: &mut MapConfig) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| HenonError::Config(format!("line {}: expected key = value", i + 1)))?;
        cfg.set_kv(k.trim(), v.trim())?;
    }
    Ok(())
}

/// Configuration from defaults, the optional file, `--set` pairs and the dedicated flags, in that order.
pub fn resolve_config(cli: &Cli) -> Result<MapConfig> {
    let mut cfg = MapConfig::default();
    if let Some(path) = &cli.config {
        let text =
            fs::read_to_string(path).map_err(|e| HenonError::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_config_text(&text, &mut cfg)?;
    }
    for pair in &cli.set {
        let (k, v) =
            pair.split_once('=').ok_or_else(|| HenonError::Config(format!("--set expects KEY=VALUE, got {pair:?}")))?;
        cfg.set_kv(k, v)?;
    }
    if let Some(b) = cli.b {
        cfg.b = b;
    }
    if let Some(s) = cli.s {
        cfg.s = s;
    }
    if let Some(e) = cli.eps {
        cfg.eps = e;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Result of one subcommand: the primary document plus any side files.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: String,
    pub files: Vec<(PathBuf, String)>,
    /// Process status when the command itself succeeded; nonzero for failed self checks.
    pub status: i32,
}

fn regions_for(cfg: &MapConfig) -> Result<RegionSet> {
    build_regions(cfg)
}

#[derive(Serialize)]
struct AstarRow {
    b: f64,
    s: i8,
    a_star: f64,
    gap_lo: f64,
    gap_hi: f64,
    xi_star: f64,
    bisections: usize,
}

#[derive(Serialize)]
struct CurveSummary {
    name: String,
    file: String,
    vertices: usize,
    arclength: f64,
    exhausted: bool,
    max_spacing: f64,
}

#[derive(Serialize)]
struct DecodeOut {
    word: String,
    depth: usize,
    point: Point2,
    ambiguous: bool,
}

#[derive(Serialize)]
struct EncodeOut {
    point: Point2,
    word: String,
    ambiguous: Vec<usize>,
}

#[derive(Serialize)]
struct DropOut {
    zero_blocks: crate::thermo::DropReport,
    occupation_grid: crate::thermo::DropReport,
    targets: Vec<f64>,
}

/// Runs a parsed command line and returns its documents without touching the terminal.
/// `argv` is recorded verbatim in the manifest.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<Outcome> {
    let cfg = resolve_config(cli)?;
    let manifest = RunManifest::new(
        cli.command.name(),
        argv.to_vec(),
        &cfg,
        cli.config.as_ref().map(|p| p.display().to_string()),
        cli.out.as_ref().map(|p| p.display().to_string()),
    );
    let mut files = Vec::new();
    let mut status = 0;
    let document = match &cli.command {
        Command::PrintConfig => {
            let mut s = String::new();
            for (k, v) in cfg.to_kv() {
                s.push_str(&format!("{k} = {v}\n"));
            }
            s
        }
        Command::FindAstar { lo, hi, b_list } => {
            let bs = if b_list.is_empty() { vec![cfg.b] } else { b_list.clone() };
            let mut rows = Vec::new();
            for b in bs {
                let mut c = cfg.clone();
                c.b = b;
                c.validate()?;
                let t = find_first_tangency(&c, (*lo, *hi))?;
                rows.push(AstarRow {
                    b,
                    s: c.s,
                    a_star: t.a_star,
                    gap_lo: t.gap_lo,
                    gap_hi: t.gap_hi,
                    xi_star: t.xi_star,
                    bisections: t.bisections,
                });
            }
            json_document(&manifest, &rows)?
        }
        Command::GrowManifolds { budget, out_dir } => {
            let regions = regions_for(&cfg)?;
            let c = &regions.cfg;
            let (p, q) = fixed_saddles(c)?;
            let mut summary = Vec::new();
            for (name, curve) in [
                ("unstable_p", grow_unstable(c, &p, *budget)?),
                ("unstable_q", grow_unstable(c, &q, *budget)?),
                ("stable_p", grow_stable(c, &p, *budget)?),
                ("stable_q", grow_stable(c, &q, *budget)?),
            ] {
                let path = out_dir.join(format!("{name}.csv"));
                let body = format!("# manifest_hash={}\n{}", manifest.hash(), curve.to_csv());
                summary.push(CurveSummary {
                    name: name.to_string(),
                    file: path.display().to_string(),
                    vertices: curve.len(),
                    arclength: curve.arclength,
                    exhausted: curve.exhausted,
                    max_spacing: curve.max_spacing(),
                });
                files.push((path, body));
            }
            json_document(&manifest, &summary)?
        }
        Command::BuildRegions => {
            let regions = regions_for(&cfg)?;
            json_document(&manifest, &regions.summary())?
        }
        Command::Code { op } => {
            let regions = regions_for(&cfg)?;
            match op {
                CodeOp::Decode { word, depth } => {
                    let w = Word::parse(word)?;
                    let d = decode(&regions, &w, *depth)?;
                    json_document(
                        &manifest,
                        &DecodeOut { word: w.to_string(), depth: *depth, point: d.point, ambiguous: d.ambiguous },
                    )?
                }
                CodeOp::Encode { x, y, n } => {
                    let z = Point2::new(*x, *y);
                    let e = encode(&regions, &z, *n)?;
                    json_document(&manifest, &EncodeOut { point: z, word: e.word.to_string(), ambiguous: e.ambiguous })?
                }
            }
        }
        Command::PeriodicOrbits { n } => {
            let regions = regions_for(&cfg)?;
            json_document(&manifest, &enumerate_periodic(&regions, *n)?)?
        }
        Command::PressureCurve { n, t, t_max, cells } => {
            let regions = regions_for(&cfg)?;
            let data = OrbitWeights::from_orbits(&enumerate_periodic(&regions, *n)?.orbits);
            let ts = if t.is_empty() { t_grid(0.0, *t_max, *cells) } else { t.clone() };
            let mut rows = Vec::with_capacity(ts.len());
            for &tv in &ts {
                let s = pressure(&data, *n, tv)?;
                rows.push(vec![
                    fmt_f64(s.t),
                    s.n.to_string(),
                    fmt_f64(s.pressure),
                    fmt_f64(s.lyapunov),
                    fmt_f64(s.entropy),
                ]);
            }
            csv_document(&manifest, &["t", "n", "P_n", "lambda_u", "h"], &rows)
        }
        Command::ThermoReport { n, t_max, cells } => {
            let regions = regions_for(&cfg)?;
            let data = OrbitWeights::from_orbits(&enumerate_periodic(&regions, *n)?.orbits);
            let shorter = if *n > 1 {
                Some(OrbitWeights::from_orbits(&enumerate_periodic(&regions, n - 1)?.orbits))
            } else {
                None
            };
            let rep = find_t_roots(&regions.cfg, &data, *n, shorter.as_ref().map(|d| (d, n - 1)), *t_max, *cells)?;
            json_document(&manifest, &rep)?
        }
        Command::BindingCheck { j_lo, j_hi, per_octave } => {
            if j_lo > j_hi || *per_octave == 0 {
                return Err(HenonError::Config("need j-lo <= j-hi and per-octave >= 1".into()));
            }
            let regions = regions_for(&cfg)?;
            json_document(&manifest, &binding_suite(&regions, &dyadic_distances(*j_lo, *j_hi, *per_octave))?)?
        }
        Command::Excursions { k, big_m, m_lo, m_hi } => {
            let regions = regions_for(&cfg)?;
            let orbits = family_orbits(&regions, &zero_block_family(*m_lo..=*m_hi))?;
            let (k, m, rows) = match (k, big_m) {
                (Some(k), Some(m)) => {
                    let lq = regions.leaves.q.log_multiplier();
                    let rows: Vec<_> = orbits
                        .iter()
                        .map(|o| {
                            (
                                o.word.clone(),
                                o.longest_zero_block(),
                                excursion_average(&regions.cfg, &regions, o, *k, *m, lq),
                            )
                        })
                        .collect();
                    (*k, *m, rows)
                }
                _ => {
                    let rep = excursion_report(&regions, &orbits);
                    let k = rep.k0.unwrap_or(regions.cfg.vk_kmax);
                    let m = rep.m0.unwrap_or(regions.cfg.vk_m);
                    (k, m, rep.rows.into_iter().map(|r| (r.word, r.zero_block, r.excursions)).collect())
                }
            };
            let mut out = Vec::new();
            for (word, zb, exs) in rows {
                for e in exs {
                    out.push(vec![
                        word.clone(),
                        zb.to_string(),
                        k.to_string(),
                        m.to_string(),
                        e.start.to_string(),
                        e.len.to_string(),
                        fmt_f64(e.average),
                        e.pass.to_string(),
                    ]);
                }
            }
            csv_document(&manifest, &["word", "zero_block", "k", "M", "start", "len", "average", "pass"], &out)
        }
        Command::DropExperiment { u, budget, n, t, m_lo, m_hi } => {
            let regions = regions_for(&cfg)?;
            let data = OrbitWeights::from_orbits(&enumerate_periodic(&regions, *n)?.orbits);
            let limit = *n / 4;
            let nu = conditioned_gibbs(&data, *n, *t, |w| longest_zero_run(w) < limit.max(1))?;
            let family = family_orbits(&regions, &zero_block_family(*m_lo..=*m_hi))?;
            let ex = excursion_report(&regions, &family);
            let k = ex.k0.unwrap_or(regions.cfg.vk_kmax);
            let m = ex.m0.unwrap_or(regions.cfg.vk_m);
            let words = u.iter().map(|&x| target_word(x, *budget)).collect::<Result<Vec<_>>>()?;
            let grid = family_orbits(&regions, &words)?;
            json_document(
                &manifest,
                &DropOut {
                    zero_blocks: measure_drop_experiment(&regions, &nu, &family, k, m),
                    occupation_grid: measure_drop_experiment(&regions, &nu, &grid, k, m),
                    targets: u.clone(),
                },
            )?
        }
        Command::Selfcheck => {
            let report = selfcheck::run(&cfg)?;
            if !report.all_pass {
                status = 3;
            }
            json_document(&manifest, &report)?
        }
    };
    Ok(Outcome { document, files, status })
}

/// Longest cyclic run of `0` in a word.
pub fn longest_zero_run(word: &str) -> usize {
    let b = word.as_bytes();
    let n = b.len();
    if b.iter().all(|&c| c == b'0') {
        return n;
    }
    let (mut best, mut run) = (0, 0);
    for i in 0..2 * n {
        if b[i % n] == b'0' {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, body)?;
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| HenonError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        // a pool built earlier in the same process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point used by the binary; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let started = Instant::now();
    let result = configure_threads().and_then(|_| execute(&cli, &argv)).and_then(|outcome| {
        for (path, body) in &outcome.files {
            write_file(path, body)?;
        }
        match &cli.out {
            Some(path) => write_file(path, &outcome.document)?,
            None => print!("{}", outcome.document),
        }
        Ok(outcome.status)
    });
    eprintln!("[{}] wall-clock {:.3} s", cli.command.name(), started.elapsed().as_secs_f64());
    match result {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
