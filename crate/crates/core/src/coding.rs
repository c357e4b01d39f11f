//! Symbolic coding by the full two-shift.
//!
//! A two-sided word is realised as the intersection of the unstable leaf labelled by
//! its past with the stable leaf labelled by its future; both are computed at once by
//! the sign-pattern recurrence. Symbol `0` is the half `R0` left of `zeta0`.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::{Point2, Vec2};
use crate::manifolds::{Piece, RegionSet};
use crate::map::{apply, cocycle_scaled, jacobian};
use crate::shadow::{cyclic_points, newton_cyclic, solve_cyclic, solve_open};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<u8>,
    /// Position of index zero inside `symbols`.
    pub anchor: usize,
    pub periodic: bool,
}

impl Word {
    pub fn new(symbols: Vec<u8>, anchor: usize, periodic: bool) -> Result<Self> {
        if symbols.is_empty() {
            return Err(HenonError::Config("empty word".into()));
        }
        if symbols.iter().any(|&s| s > 1) {
            return Err(HenonError::Config("symbols must be 0 or 1".into()));
        }
        if anchor >= symbols.len() {
            return Err(HenonError::Config("anchor outside the word".into()));
        }
        Ok(Word { symbols, anchor, periodic })
    }

    pub fn periodic(symbols: Vec<u8>) -> Result<Self> {
        Word::new(symbols, 0, true)
    }

    /// Parses `0110` (anchor at the start) or `10.0110` (anchor after the dot).
    /// A trailing `*` marks a periodic word.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let (body, periodic) = match t.strip_suffix('*') {
            Some(b) => (b, true),
            None => (t, false),
        };
        let (past, future) = match body.split_once('.') {
            Some((p, f)) => (p, f),
            None => ("", body),
        };
        let mut symbols = Vec::new();
        for c in past.chars().chain(future.chars()) {
            match c {
                '0' => symbols.push(0),
                '1' => symbols.push(1),
                _ => return Err(HenonError::Config(format!("bad symbol {c:?} in word {text:?}"))),
            }
        }
        Word::new(symbols, past.len(), periodic)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol at signed index `k` relative to the anchor; cyclic for periodic words.
    pub fn at(&self, k: i64) -> Option<u8> {
        let n = self.symbols.len() as i64;
        let i = self.anchor as i64 + k;
        if self.periodic {
            Some(self.symbols[i.rem_euclid(n) as usize])
        } else if (0..n).contains(&i) {
            Some(self.symbols[i as usize])
        } else {
            None
        }
    }

    /// Left shift: index one becomes the new anchor.
    pub fn shift(&self) -> Word {
        let mut w = self.clone();
        if w.periodic {
            w.symbols.rotate_left(1);
        } else {
            w.anchor += 1;
        }
        w
    }

    pub fn minimal_period(&self) -> usize {
        let n = self.symbols.len();
        (1..=n)
            .find(|&d| n.is_multiple_of(d) && (0..n).all(|i| self.symbols[i] == self.symbols[(i + d) % n]))
            .unwrap_or(n)
    }

    /// Lexicographically least rotation.
    pub fn canonical_rotation(&self) -> Word {
        let n = self.symbols.len();
        let best = (0..n)
            .map(|r| {
                let mut s = self.symbols.clone();
                s.rotate_left(r);
                s
            })
            .min()
            .unwrap_or_default();
        Word { symbols: best, anchor: 0, periodic: self.periodic }
    }

    pub fn signs(&self) -> Vec<i8> {
        self.symbols.iter().map(|&s| sign_of(s)).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i == self.anchor && i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        if self.periodic {
            write!(f, "*")?;
        }
        Ok(())
    }
}

pub fn sign_of(symbol: u8) -> i8 {
    if symbol == 0 {
        -1
    } else {
        1
    }
}

/// Symbol of a point: `1` right of `zeta0`.
pub fn symbol_at(regions: &RegionSet, z: &Point2) -> u8 {
    u8::from(z.x > regions.xi_star())
}

/// A point is ambiguous when it lies within tolerance of the split through `zeta0`.
pub fn is_ambiguous(regions: &RegionSet, z: &Point2) -> bool {
    let t = regions.cfg.ambiguity_tol;
    let lo = regions.xi_star().min(0.0) - t;
    let hi = regions.xi_star().max(0.0) + t;
    z.x >= lo && z.x <= hi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub word: String,
    pub period: usize,
    pub points: Vec<Point2>,
    /// `|unstable eigenvalue|` of the period cocycle.
    pub multiplier: f64,
    pub log_multiplier: f64,
    /// `log J^u` at every point, starting from `points[0]`.
    pub log_ju: Vec<f64>,
    pub log_ju_sum: f64,
    pub residual: f64,
    pub ambiguous: bool,
}

impl PeriodicOrbit {
    pub fn longest_zero_block(&self) -> usize {
        longest_cyclic_run(self.word.as_bytes(), b'0')
    }
}

fn longest_cyclic_run(s: &[u8], c: u8) -> usize {
    let n = s.len();
    if s.iter().all(|&x| x == c) {
        return n;
    }
    let mut best = 0;
    let mut run = 0;
    for i in 0..2 * n {
        if s[i % n] == c {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Unstable directions and `log J^u` around a cycle by pushing a horizontal vector
/// around it until it settles.
pub fn cycle_unstable_data(cfg: &MapConfig, points: &[Point2]) -> (Vec<Vec2>, Vec<f64>) {
    let n = points.len();
    let mut v = Vec2::new(1.0, 0.0);
    for _ in 0..3 {
        for z in points {
            v = jacobian(cfg, z) * v;
            v /= v.norm();
        }
    }
    let mut dirs = Vec::with_capacity(n);
    let mut logs = Vec::with_capacity(n);
    for z in points {
        dirs.push(v);
        let w = jacobian(cfg, z) * v;
        let nw = w.norm();
        logs.push(nw.ln());
        v = w / nw;
    }
    (dirs, logs)
}

fn orbit_residual(cfg: &MapConfig, pts: &[Point2]) -> f64 {
    let n = pts.len();
    (0..n).map(|k| (apply(cfg, &pts[k]) - pts[(k + 1) % n]).norm()).fold(0.0, f64::max)
}

/// The periodic orbit realising a periodic word, polished by Newton.
pub fn periodic_point(regions: &RegionSet, word: &Word) -> Result<PeriodicOrbit> {
    let cfg = &regions.cfg;
    if !word.periodic {
        return Err(HenonError::Config(format!("word {word} is not periodic")));
    }
    let signs = word.signs();
    let mut xs = solve_cyclic(cfg, &signs);
    newton_cyclic(cfg, &mut xs)?;
    let points = cyclic_points(cfg, &xs);
    let residual = orbit_residual(cfg, &points);
    let text: String = word.symbols.iter().map(|s| char::from(b'0' + s)).collect();
    if !(residual < 1e-10) {
        return Err(HenonError::NewtonFailure { word: text, residual });
    }
    let got: String = points.iter().map(|z| char::from(b'0' + symbol_at(regions, z))).collect();
    if got != text {
        return Err(HenonError::ItineraryMismatch { word: text, got });
    }
    let ambiguous = points.iter().any(|z| is_ambiguous(regions, z));
    let (_, log_ju) = cycle_unstable_data(cfg, &points);
    let log_ju_sum: f64 = log_ju.iter().sum();
    let log_multiplier = cycle_log_multiplier(cfg, &points)?;
    Ok(PeriodicOrbit {
        word: text,
        period: points.len(),
        multiplier: log_multiplier.exp(),
        points,
        log_multiplier,
        log_ju,
        log_ju_sum,
        residual,
        ambiguous,
    })
}

/// `log |top eigenvalue|` of the cocycle around the cycle through `points[0]`.
pub fn cycle_log_multiplier(cfg: &MapConfig, points: &[Point2]) -> Result<f64> {
    let mut c = cfg.clone();
    c.horizon = c.horizon.max(points.len());
    c.depth_cap = c.depth_cap.max(points.len());
    c.escape_radius = f64::INFINITY;
    let m = cocycle_scaled(&c, &points[0], points.len() as i64)?;
    let u = m.unit;
    let tr = u.trace();
    let det = u.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return Err(HenonError::Numerical("complex multipliers on a periodic orbit".into()));
    }
    let top = (tr.abs() + disc.sqrt()) / 2.0;
    Ok(top.ln() + m.log_scale)
}

/// Rotation-minimal primitive words of length exactly `d`, in lexicographic order.
pub fn necklaces(d: usize) -> Vec<Word> {
    assert!((1..31).contains(&d));
    let mut out = Vec::new();
    for code in 0u32..(1u32 << d) {
        let symbols: Vec<u8> = (0..d).map(|i| ((code >> (d - 1 - i)) & 1) as u8).collect();
        let w = Word { symbols, anchor: 0, periodic: true };
        if w.minimal_period() == d && w.canonical_rotation().symbols == w.symbols {
            out.push(w);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub n: usize,
    pub orbits: Vec<PeriodicOrbit>,
    pub point_count: usize,
    pub max_residual: f64,
    pub duplicates: Vec<(String, String)>,
}

/// Every periodic orbit whose period divides `n`, one per necklace, ordered by
/// period and then word.
pub fn enumerate_periodic(regions: &RegionSet, n: usize) -> Result<Enumeration> {
    let cfg = &regions.cfg;
    if n == 0 || n > cfg.n_max {
        return Err(HenonError::Config(format!("period {n} outside [1, {}]", cfg.n_max)));
    }
    let words: Vec<Word> = (1..=n).filter(|d| n.is_multiple_of(*d)).flat_map(necklaces).collect();
    let results: Vec<Result<PeriodicOrbit>> = words.par_iter().map(|w| periodic_point(regions, w)).collect();
    let mut orbits = Vec::with_capacity(results.len());
    for r in results {
        orbits.push(r?);
    }
    let point_count = orbits.iter().map(|o| o.period).sum();
    let max_residual = orbits.iter().map(|o| o.residual).fold(0.0, f64::max);
    let duplicates = find_duplicates(&orbits);
    if point_count != 1usize << n || !duplicates.is_empty() {
        return Err(HenonError::IncompleteEnumeration { n, found: point_count - duplicates.len(), expected: 1 << n });
    }
    Ok(Enumeration { n, orbits, point_count, max_residual, duplicates })
}

/// Orbits sharing a point up to `1e-9`.
pub fn find_duplicates(orbits: &[PeriodicOrbit]) -> Vec<(String, String)> {
    let mut pts: Vec<(f64, f64, usize)> = Vec::new();
    for (i, o) in orbits.iter().enumerate() {
        for z in &o.points {
            pts.push((z.x, z.y, i));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut dup = BTreeSet::new();
    for i in 0..pts.len() {
        let mut j = i + 1;
        while j < pts.len() && pts[j].0 - pts[i].0 <= 1e-9 {
            if (pts[j].1 - pts[i].1).abs() <= 1e-9 {
                let (a, b) = (pts[i].2.min(pts[j].2), pts[i].2.max(pts[j].2));
                dup.insert((orbits[a].word.clone(), orbits[b].word.clone()));
            }
            j += 1;
        }
    }
    dup.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub point: Point2,
    pub depth: usize,
    pub ambiguous: bool,
    /// Smallest radicand met by the recurrence; negative values mean clamping.
    pub min_radicand: f64,
}

/// Approximates the point with itinerary `word` from the `depth` symbols on each side
/// of the anchor.
pub fn decode(regions: &RegionSet, word: &Word, depth: usize) -> Result<Decoded> {
    let cfg = &regions.cfg;
    if depth > cfg.depth_cap {
        return Err(HenonError::DepthCap { depth, cap: cfg.depth_cap });
    }
    if word.periodic {
        let orbit = periodic_point(regions, word)?;
        let z = orbit.points[word.anchor % orbit.period];
        return Ok(Decoded { point: z, depth, ambiguous: orbit.ambiguous, min_radicand: 0.0 });
    }
    let d = depth as i64;
    let mut signs = Vec::with_capacity(2 * depth + 2);
    for k in -d - 1..=d {
        let s = word.at(k).ok_or_else(|| {
            HenonError::Config(format!("word {word} has fewer than {depth} symbols around the anchor"))
        })?;
        signs.push(sign_of(s));
    }
    let sol = solve_open(cfg, &signs, 0.0, 0.0);
    // sol.xs[0] is index -d-1, so the anchor sits at depth + 1
    let x0 = sol.xs[depth + 1];
    let xm1 = sol.xs[depth];
    let point = Point2::new(x0, cfg.sign() * cfg.sqrt_b() * xm1);
    Ok(Decoded { point, depth, ambiguous: is_ambiguous(regions, &point), min_radicand: sol.min_radicand })
}

/// `|f(decode w) - decode(shift w)|`.
pub fn semi_conjugacy_residual(regions: &RegionSet, word: &Word, depth: usize) -> Result<f64> {
    let a = decode(regions, word, depth)?;
    let b = decode(regions, &word.shift(), depth)?;
    Ok((apply(&regions.cfg, &a.point) - b.point).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub word: Word,
    /// Indices where the orbit passed within tolerance of the split.
    pub ambiguous: Vec<usize>,
}

/// Itinerary of the first `n` iterates of `z`.
pub fn encode(regions: &RegionSet, z: &Point2, n: usize) -> Result<Encoding> {
    let cfg = &regions.cfg;
    let mut w = *z;
    let mut symbols = Vec::with_capacity(n);
    let mut ambiguous = Vec::new();
    for step in 0..n {
        if !regions.in_r(&w) {
            return Err(HenonError::Escape { step, radius: cfg.escape_radius });
        }
        if is_ambiguous(regions, &w) {
            ambiguous.push(step);
        }
        symbols.push(symbol_at(regions, &w));
        w = apply(cfg, &w);
    }
    Ok(Encoding { word: Word::new(symbols, 0, false)?, ambiguous })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderPolygon {
    pub word: String,
    /// Counter-clockwise vertices.
    pub vertices: Vec<Point2>,
    /// Horizontal width at mid-height.
    pub width: f64,
    pub empty: bool,
}

impl CylinderPolygon {
    pub fn contains(&self, z: &Point2) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            if (v[i].y > z.y) != (v[j].y > z.y) {
                let t = (z.y - v[i].y) / (v[j].y - v[i].y);
                if z.x < v[i].x + t * (v[j].x - v[i].x) {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

/// Appends `g(t)` for `t` from `t0` towards `t1` (exclusive), bisecting until every chord
/// is within `1e-8` of the curve. The sides of `R` have square-root tips, hence the
/// adaptive refinement.
fn trace_edge(g: &dyn Fn(f64) -> Point2, t0: f64, t1: f64, out: &mut Vec<Point2>) {
    fn go(g: &dyn Fn(f64) -> Point2, t0: f64, p0: Point2, t1: f64, p1: Point2, depth: u32, out: &mut Vec<Point2>) {
        let tm = 0.5 * (t0 + t1);
        let pm = g(tm);
        let flat = (pm - 0.5 * (p0 + p1)).norm() <= 1e-8;
        if depth >= 40 || (flat && depth >= 3) {
            out.push(p0);
            return;
        }
        go(g, t0, p0, tm, pm, depth + 1, out);
        go(g, tm, pm, t1, p1, depth + 1, out);
    }
    go(g, t0, g(t0), t1, g(t1), 0, out);
}

/// The forward cylinder of a one-sided word as a polygon: two stable boundary leaves
/// joined along the unstable sides of `R`.
pub fn cylinder_rectangle(regions: &RegionSet, word: &Word) -> Result<CylinderPolygon> {
    let cfg = &regions.cfg;
    if word.len() > cfg.depth_cap {
        return Err(HenonError::DepthCap { depth: word.len(), cap: cfg.depth_cap });
    }
    let l = &regions.leaves;
    let future: Vec<i8> = (0..).map_while(|k| word.at(k)).take(word.len() - word.anchor).map(sign_of).collect();
    let (last, head) = future.split_last().expect("nonempty word");
    // boundary patterns of the two halves of R after the last symbol
    let (pa, pb): (Vec<i8>, Vec<i8>) = if *last < 0 { (vec![-1], vec![-1, 1]) } else { (vec![1, 1], vec![1]) };
    let mut ha = head.to_vec();
    ha.extend(pa);
    let mut hb = head.to_vec();
    hb.extend(pb);
    let xa0 = l.stable_x(0.0, &ha, -1);
    let xb0 = l.stable_x(0.0, &hb, -1);
    let (left, right) = if xa0 <= xb0 { (&ha, &hb) } else { (&hb, &ha) };
    // height where a near-vertical stable leaf meets an unstable side of R
    let meet = |head: &[i8], side: &dyn Fn(f64) -> f64| {
        let mut y = 0.0;
        for _ in 0..60 {
            let next = side(l.stable_x(y, head, -1));
            if (next - y).abs() <= 1e-16 {
                return next;
            }
            y = next;
        }
        y
    };
    let top = |x: f64| l.top(x);
    let bottom = |x: f64| l.bottom(x);
    let (r0, r1) = (meet(right, &bottom), meet(right, &top));
    let (l0, l1) = (meet(left, &bottom), meet(left, &top));
    let (xr0, xr1) = (l.stable_x(r0, right, -1), l.stable_x(r1, right, -1));
    let (xl0, xl1) = (l.stable_x(l0, left, -1), l.stable_x(l1, left, -1));
    let mut vertices = Vec::new();
    trace_edge(&|y| Point2::new(l.stable_x(y, right, -1), y), r0, r1, &mut vertices);
    trace_edge(&|x| Point2::new(x, l.top(x)), xr1, xl1, &mut vertices);
    trace_edge(&|y| Point2::new(l.stable_x(y, left, -1), y), l1, l0, &mut vertices);
    trace_edge(&|x| Point2::new(x, l.bottom(x)), xl0, xr0, &mut vertices);
    let width = (xb0 - xa0).abs();
    Ok(CylinderPolygon { word: word.to_string(), vertices, width, empty: !(width > 0.0) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub samples: [usize; 4],
    /// Images inside the lens interior; they leave `R` at the next step and carry no point of the invariant set.
    pub escaped: [usize; 4],
    pub violations: [usize; 4],
    pub examples: Vec<TransitionExample>,
}

/// A sampled piece, the point and the piece its image fell in.
pub type TransitionExample = (Piece, Point2, Option<Piece>);

fn allowed(from: Piece, to: Option<Piece>) -> bool {
    matches!(
        (from, to),
        (Piece::S1 | Piece::S4, Some(Piece::S1 | Piece::S2 | Piece::S3)) | (Piece::S2 | Piece::S3, Some(Piece::S4))
    )
}

/// Samples each of `S1..S4` uniformly and checks where the images land.
pub fn check_transition_diagram(regions: &RegionSet, samples: usize) -> TransitionReport {
    let cfg = &regions.cfg;
    let pieces = [Piece::S1, Piece::S2, Piece::S3, Piece::S4];
    let (ylo, yhi) = regions.y_range;
    let (xlo, xhi) = regions.x_range;
    let results: Vec<(usize, usize, usize, Vec<TransitionExample>)> = pieces
        .par_iter()
        .enumerate()
        .map(|(i, &piece)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let mut got = 0;
            let mut bad = 0;
            let mut escaped = 0;
            let mut examples = Vec::new();
            let mut tries = 0usize;
            while got < samples && tries < samples.saturating_mul(200) {
                tries += 1;
                let z = Point2::new(rng.gen_range(xlo - 0.01..xhi + 0.01), rng.gen_range(ylo..yhi));
                if regions.piece(&z) != Some(piece) {
                    continue;
                }
                got += 1;
                let w = apply(cfg, &z);
                if regions.in_int_s(&w) {
                    escaped += 1;
                    continue;
                }
                let img = regions.piece(&w);
                if !allowed(piece, img) {
                    bad += 1;
                    if examples.len() < 10 {
                        examples.push((piece, z, img));
                    }
                }
            }
            (got, escaped, bad, examples)
        })
        .collect();
    let mut report = TransitionReport { samples: [0; 4], escaped: [0; 4], violations: [0; 4], examples: Vec::new() };
    for (i, (got, esc, bad, ex)) in results.into_iter().enumerate() {
        report.samples[i] = got;
        report.escaped[i] = esc;
        report.violations[i] = bad;
        report.examples.extend(ex);
    }
    report
}

/// Uniformly random two-sided word with `depth + 2` symbols on each side of the anchor.
pub fn random_word<R: Rng>(rng: &mut R, depth: usize) -> Word {
    let symbols: Vec<u8> = (0..2 * depth + 4).map(|_| rng.gen_range(0..2u8)).collect();
    Word { symbols, anchor: depth + 2, periodic: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w = Word::parse("10.0110").unwrap();
        assert_eq!(w.anchor, 2);
        assert_eq!(w.at(-1), Some(0));
        assert_eq!(w.at(0), Some(0));
        assert_eq!(w.to_string(), "10.0110");
        assert_eq!(Word::parse("011*").unwrap().at(5), Some(1));
        assert!(Word::parse("012").is_err());
    }

    #[test]
    fn necklace_counts() {
        // primitive necklaces over two letters: 2, 1, 2, 3, 6, 9
        let counts: Vec<usize> = (1..=6).map(|d| necklaces(d).len()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9]);
        for n in 1..=10usize {
            let total: usize = (1..=n).filter(|d| n % d == 0).map(|d| d * necklaces(d).len()).sum();
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn cyclic_runs() {
        assert_eq!(longest_cyclic_run(b"0010", b'0'), 3);
        assert_eq!(longest_cyclic_run(b"000", b'0'), 3);
        assert_eq!(longest_cyclic_run(b"1", b'0'), 0);
    }
}
