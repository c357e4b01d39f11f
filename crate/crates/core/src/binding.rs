//! Binding to critical orbits: the critical cocycle `w_i`, ratios `d_i`, contraction
//! scales `D_p`, bound and fold periods, and the recovery estimates for returns to
//! `I(delta)`.

use serde::{Deserialize, Serialize};

use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::{slope, Point2, Vec2};
use crate::manifolds::{critical_points_between, return_depth, stable_direction_capped, RegionSet};
use crate::map::{apply, jacobian, jacobian_x};
use crate::shadow::solve_open;

const LEAF_STEP: f64 = 1e-4;
const BOUND_FREE_SCAN: usize = 64;

/// `w_i(zeta) = Df^{i-1}(f zeta) (1, 0)` and the quantities built from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCocycle {
    pub zeta: Point2,
    /// Whether the image of `zeta` sits on the stable side, so that the orbit never leaves `U`.
    pub infinite: bool,
    /// `x_0, ..., x_N` along the critical orbit.
    pub orbit_x: Vec<f64>,
    /// `w_norms[i - 1] = |w_i|` for `i = 1..=N + 1`.
    pub w_norms: Vec<f64>,
    pub w_slopes: Vec<f64>,
    /// `d[i - 1] = d_i = |w_{i+1}| / |w_i|^2`.
    pub d: Vec<f64>,
    /// `big_d[p - 1] = D_p`.
    pub big_d: Vec<f64>,
    pub tau: f64,
}

impl CriticalCocycle {
    /// Largest `p` with `D_p` available.
    pub fn depth(&self) -> usize {
        self.big_d.len()
    }

    pub fn w(&self, i: usize) -> f64 {
        self.w_norms[i - 1]
    }

    /// `|w_{i+1}| / |w_i|` for `i = 1..=N`.
    pub fn ratios(&self) -> Vec<f64> {
        self.w_norms.windows(2).map(|p| p[1] / p[0]).collect()
    }

    /// `D_p`, or `D_0 = +inf`.
    pub fn big_d_at(&self, p: usize) -> f64 {
        if p == 0 {
            f64::INFINITY
        } else {
            self.big_d[p - 1]
        }
    }
}

/// `x`-coordinates `x_0..=x_len` of the forward orbit of `zeta`. The orbit of `zeta0`
/// lies on the stable manifold of `Q`, so it is shadowed rather than iterated.
pub fn critical_orbit(regions: &RegionSet, zeta: &Point2, len: usize, infinite: bool) -> Result<Vec<f64>> {
    let cfg = &regions.cfg;
    if infinite {
        let mut signs = vec![-1i8; len];
        signs[0] = 1;
        let sol = solve_open(cfg, &signs, zeta.x, regions.leaves.q.location.x);
        if !(sol.min_radicand >= -1e-12) {
            return Err(HenonError::Numerical(format!(
                "critical orbit shadow has negative radicand {:e}",
                sol.min_radicand
            )));
        }
        let mut xs = Vec::with_capacity(len + 1);
        xs.push(zeta.x);
        xs.extend(sol.xs);
        return Ok(xs);
    }
    let mut xs = vec![zeta.x];
    let mut w = *zeta;
    for _ in 0..len {
        w = apply(cfg, &w);
        if !w.x.is_finite() || w.x.abs() > cfg.escape_radius || w.y.abs() > cfg.escape_radius {
            break;
        }
        xs.push(w.x);
    }
    Ok(xs)
}

/// Builds the critical cocycle of `zeta`. `horizon` caps the number of steps; for a
/// finite return depth `n(zeta)` the sequences stop at `n(zeta)`.
pub fn critical_cocycle(regions: &RegionSet, zeta: &Point2, horizon: usize) -> Result<CriticalCocycle> {
    let cfg = &regions.cfg;
    let depth = return_depth(regions, zeta);
    let infinite = depth.is_infinite() || (zeta - regions.zeta0()).norm() <= 1e-12;
    let n = if infinite { horizon } else { depth.or_cap(horizon).min(horizon) };
    let orbit_x = critical_orbit(regions, zeta, n.max(1), infinite)?;
    let n = n.min(orbit_x.len() - 1);
    let mut w = Vec2::new(1.0, 0.0);
    let mut log_norm = 0.0f64;
    let mut w_norms = vec![1.0];
    let mut w_slopes = vec![0.0];
    for &x in orbit_x.iter().skip(1).take(n) {
        let next = jacobian_x(cfg, x) * w;
        let r = next.norm();
        log_norm += r.ln();
        w = next / r;
        w_norms.push(log_norm.exp());
        w_slopes.push(slope(&w));
    }
    let tau = regions.tau;
    let d: Vec<f64> = (0..n).map(|i| w_norms[i + 1] / (w_norms[i] * w_norms[i])).collect();
    let mut big_d = Vec::with_capacity(n);
    let mut acc = 0.0;
    for di in &d {
        acc += 1.0 / di;
        big_d.push(tau / acc);
    }
    Ok(CriticalCocycle { zeta: *zeta, infinite, orbit_x, w_norms, w_slopes, d, big_d, tau })
}

/// `D_p(zeta)`.
pub fn contraction_scale(cc: &CriticalCocycle, p: usize) -> Result<f64> {
    if p == 0 || p > cc.depth() {
        return Err(HenonError::DepthCap { depth: p, cap: cc.depth() });
    }
    Ok(cc.big_d[p - 1])
}

/// Two-sided growth of the critical cocycle and horizontality of `w_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub steps: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub ratio_pass: bool,
    pub max_slope: f64,
    pub slope_bound: f64,
    pub slope_pass: bool,
}

pub fn growth_report(cfg: &MapConfig, cc: &CriticalCocycle) -> GrowthReport {
    let ratios = cc.ratios();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_slope = cc.w_slopes.iter().copied().fold(0.0, f64::max);
    let (lower, upper) = (cfg.lambda1(), 5.0);
    GrowthReport {
        steps: ratios.len(),
        min_ratio,
        max_ratio,
        lower,
        upper,
        ratio_pass: min_ratio >= lower && max_ratio <= upper,
        max_slope,
        slope_bound: cfg.sqrt_b(),
        slope_pass: max_slope <= cfg.sqrt_b(),
    }
}

/// Exponential size of `D_p` and its link with `|w_p|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    /// Smallest `p` from which `(lambda2 + eps/2)^{-p} <= D_p <= lambda1^{-p}` holds up to the horizon.
    pub p0: Option<usize>,
    pub horizon: usize,
    pub strictly_decreasing: bool,
    /// Range of `|w_p| D_p / tau` over `p >= p0`.
    pub wd_min: f64,
    pub wd_max: f64,
    pub size_pass: bool,
    pub product_pass: bool,
}

pub fn scale_report(cfg: &MapConfig, cc: &CriticalCocycle) -> ScaleReport {
    let n = cc.depth();
    let lo_base = cfg.lambda2() + cfg.eps / 2.0;
    let holds = |p: usize| {
        let dp = cc.big_d[p - 1];
        let pf = p as f64;
        -pf * lo_base.ln() <= dp.ln() && dp.ln() <= -pf * cfg.lambda1().ln()
    };
    let mut p0 = None;
    for p in (1..=n).rev() {
        if holds(p) {
            p0 = Some(p);
        } else {
            break;
        }
    }
    let strictly_decreasing = cc.big_d.windows(2).all(|w| w[1] < w[0]);
    let start = p0.unwrap_or(n + 1);
    let (mut wd_min, mut wd_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in start..=n {
        let r = cc.w(p) * cc.big_d[p - 1] / cc.tau;
        wd_min = wd_min.min(r);
        wd_max = wd_max.max(r);
    }
    ScaleReport {
        p0,
        horizon: n,
        strictly_decreasing,
        wd_min,
        wd_max,
        size_pass: p0.is_some(),
        product_pass: p0.is_some() && wd_min >= 0.2 && wd_max <= 5.0,
    }
}

/// `x(y)` on the leaf of the contracted-direction field through `from`, by fourth-order
/// integration in `y`.
pub fn stable_leaf_x(cfg: &MapConfig, from: &Point2, y: f64) -> Result<f64> {
    let field = |x: f64, y: f64| -> Result<f64> {
        let (e, _) = stable_direction_capped(cfg, &Point2::new(x, y), cfg.n_contr, 2)?;
        if e.y.abs() < 1e-14 {
            return Err(HenonError::Geometry("stable direction is horizontal".into()));
        }
        Ok(e.x / e.y)
    };
    let span = y - from.y;
    let steps = ((span.abs() / LEAF_STEP).ceil() as usize).max(1);
    let h = span / steps as f64;
    let (mut x, mut yy) = (from.x, from.y);
    for _ in 0..steps {
        let k1 = field(x, yy)?;
        let k2 = field(x + 0.5 * h * k1, yy + 0.5 * h)?;
        let k3 = field(x + 0.5 * h * k2, yy + 0.5 * h)?;
        let k4 = field(x + h * k3, yy + h)?;
        x += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        yy += h;
    }
    Ok(x)
}

/// `|x_0 - x(y_0)|` for `f z = (x_0, y_0)` against the stable leaf through `f zeta`.
pub fn leaf_separation(regions: &RegionSet, cc: &CriticalCocycle, z: &Point2) -> Result<f64> {
    let cfg = &regions.cfg;
    let fz = apply(cfg, z);
    let x_leaf =
        if cc.infinite { regions.leaves.alpha0_plus(fz.y) } else { stable_leaf_x(cfg, &apply(cfg, &cc.zeta), fz.y)? };
    Ok((fz.x - x_leaf).abs())
}

/// The `p` with `D_p < sep <= D_{p-1}`.
pub fn bound_period_for(cc: &CriticalCocycle, separation: f64) -> Result<usize> {
    match cc.big_d.iter().position(|&dp| dp < separation) {
        Some(i) => Ok(i + 1),
        None => Err(HenonError::NoBoundPeriod { separation, floor: cc.big_d.last().copied().unwrap_or(f64::INFINITY) }),
    }
}

pub fn bound_period(regions: &RegionSet, cc: &CriticalCocycle, z: &Point2) -> Result<usize> {
    bound_period_for(cc, leaf_separation(regions, cc, z)?)
}

/// Smallest `1 <= i < p` with `dist^beta |w_{j+1}| >= 1` for every `i <= j < p`;
/// `p - 1` when only the last index qualifies or none does.
pub fn fold_period(cfg: &MapConfig, cc: &CriticalCocycle, dist: f64, p: usize) -> usize {
    if p <= 1 {
        return 0;
    }
    let scale = dist.powf(cfg.beta());
    let mut q = p - 1;
    let mut j = p - 1;
    while j >= 1 && scale * cc.w(j + 1) >= 1.0 {
        q = j;
        j -= 1;
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Check {
    fn closed(value: f64, lower: f64, upper: f64) -> Self {
        Check { pass: value >= lower && value <= upper, value, lower, upper }
    }

    fn below(value: f64, upper: f64) -> Self {
        Check { pass: value < upper, value, lower: f64::NEG_INFINITY, upper }
    }

    fn above(value: f64, lower: f64) -> Self {
        Check { pass: value > lower, value, lower, upper: f64::INFINITY }
    }
}

/// The six recovery items plus the quadratic separation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryChecks {
    /// `p` against `[log d^{-2/log 5}, log d^{-3/log lambda1}]`.
    pub a: Check,
    /// `q` against `[log d^{-beta/log lambda2}, log d^{-beta/log lambda1} + 1]`.
    pub b: Check,
    /// Worst ratio `|Df^i v| / (d |w_i|)` over `q < i <= p`, within `[1/C, C]`.
    pub c: Check,
    /// `max |Df^i v|` over `1 <= i < q`, strictly below 1.
    pub d: Check,
    /// `|Df^p v| / (4 - eps)^{p/2}`, strictly above 1.
    pub e: Check,
    /// Slope of `Df^p v`, strictly below `b^{1/4}`.
    pub f: Check,
    /// `sep / d^2` within `[1/C, C]`.
    pub quadratic: Check,
}

impl RecoveryChecks {
    pub fn all(&self) -> [(&'static str, Check); 7] {
        [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
            ("f", self.f),
            ("quadratic", self.quadratic),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingRecord {
    pub zeta: Point2,
    pub z: Point2,
    pub distance: f64,
    pub separation: f64,
    pub p: usize,
    pub q: usize,
    /// `|w_i|` for `i = 1..=p`.
    pub w_norms: Vec<f64>,
    /// `d_i` for `i = 1..=p`.
    pub d: Vec<f64>,
    /// `D_i` for `i = 1..=p`.
    pub big_d: Vec<f64>,
    /// `|Df^i v(z)|` for `i = 1..=p`.
    pub tangent_norms: Vec<f64>,
    pub checks: RecoveryChecks,
}

/// Bound and fold periods of `z` on a curve through `cc.zeta` with unit tangent `v`,
/// followed by the recovery checks.
pub fn verify_recovery(regions: &RegionSet, cc: &CriticalCocycle, z: &Point2, v: &Vec2) -> Result<BindingRecord> {
    let cfg = &regions.cfg;
    let distance = (z - cc.zeta).norm();
    let separation = leaf_separation(regions, cc, z)?;
    let p = bound_period_for(cc, separation)?;
    let q = fold_period(cfg, cc, distance, p);

    let mut tangent_norms = Vec::with_capacity(p);
    let mut u = v / v.norm();
    let mut log_norm = 0.0f64;
    let mut w = *z;
    for step in 1..=p {
        let next = jacobian(cfg, &w) * u;
        let r = next.norm();
        log_norm += r.ln();
        u = next / r;
        tangent_norms.push(log_norm.exp());
        w = apply(cfg, &w);
        if (!w.x.is_finite() || w.x.abs() > cfg.escape_radius || w.y.abs() > cfg.escape_radius) && step < p {
            return Err(HenonError::Escape { step, radius: cfg.escape_radius });
        }
    }

    let ld = distance.ln();
    let pf = p as f64;
    let c_const = cfg.approx_const;
    let a = Check::closed(pf, -2.0 / 5f64.ln() * ld, -3.0 / cfg.lambda1().ln() * ld);
    let b = Check::closed(q as f64, -cfg.beta() / cfg.lambda2().ln() * ld, -cfg.beta() / cfg.lambda1().ln() * ld + 1.0);
    let mut worst = 1.0f64;
    for i in (q + 1)..=p {
        let r = tangent_norms[i - 1] / (distance * cc.w(i));
        if (r.ln()).abs() > worst.ln().abs() {
            worst = r;
        }
    }
    let c = Check::closed(worst, 1.0 / c_const, c_const);
    let early = (1..q).map(|i| tangent_norms[i - 1]).fold(0.0, f64::max);
    let d = Check::below(early, 1.0);
    let e = Check::above(tangent_norms[p - 1] / (4.0 - cfg.eps).powf(pf / 2.0), 1.0);
    let f = Check::below(slope(&u), cfg.b_quarter());
    let quadratic = Check::closed(separation / (distance * distance), 1.0 / c_const, c_const);

    Ok(BindingRecord {
        zeta: cc.zeta,
        z: *z,
        distance,
        separation,
        p,
        q,
        w_norms: cc.w_norms[..p].to_vec(),
        d: cc.d[..p].to_vec(),
        big_d: cc.big_d[..p].to_vec(),
        tangent_norms,
        checks: RecoveryChecks { a, b, c, d, e, f, quadratic },
    })
}

/// Distances `2^{-(j + h/per_octave)}` for `j_lo <= j <= j_hi`, ending exactly at `2^{-j_hi}`.
pub fn dyadic_distances(j_lo: u32, j_hi: u32, per_octave: u32) -> Vec<f64> {
    let steps = (j_hi - j_lo) * per_octave;
    (0..=steps).map(|k| 2f64.powf(-(f64::from(j_lo) + f64::from(k) / f64::from(per_octave)))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub name: String,
    pub passed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingSuite {
    pub a_star: f64,
    pub b: f64,
    pub s: i8,
    pub eps: f64,
    pub tau: f64,
    /// Constant used for the two-sided `≈` checks.
    pub approx_const: f64,
    pub zeta: Point2,
    pub growth: GrowthReport,
    pub scales: ScaleReport,
    /// Bound period non-increasing in the distance on each side of `zeta`.
    pub p_monotone: bool,
    pub tallies: Vec<CheckTally>,
    pub records: Vec<BindingRecord>,
    pub all_pass: bool,
}

/// Runs every binding check at `zeta0` for points of the bottom side at the given
/// horizontal offsets, on both sides of `zeta0`.
pub fn binding_suite(regions: &RegionSet, offsets: &[f64]) -> Result<BindingSuite> {
    let cfg = &regions.cfg;
    let zeta = regions.zeta0();
    let cc = critical_cocycle(regions, &zeta, cfg.binding_horizon)?;
    let growth = growth_report(cfg, &cc);
    let scales = scale_report(cfg, &cc);
    let host = [-regions.leaves.sigma_top];
    let mut records = Vec::with_capacity(2 * offsets.len());
    let mut p_monotone = true;
    for side in [1.0, -1.0] {
        let mut sorted = offsets.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mut last_p = usize::MAX;
        for off in sorted {
            let (z, v) = regions.leaves.unstable_point_tangent(zeta.x + side * off, &host);
            let rec = verify_recovery(regions, &cc, &z, &v)?;
            if rec.p > last_p {
                p_monotone = false;
            }
            last_p = rec.p;
            records.push(rec);
        }
    }
    let names = ["a", "b", "c", "d", "e", "f", "quadratic"];
    let mut tallies: Vec<CheckTally> =
        names.iter().map(|n| CheckTally { name: n.to_string(), passed: 0, total: 0 }).collect();
    for r in &records {
        for (t, (_, c)) in tallies.iter_mut().zip(r.checks.all()) {
            t.total += 1;
            t.passed += usize::from(c.pass);
        }
    }
    let all_pass = growth.ratio_pass
        && growth.slope_pass
        && scales.size_pass
        && scales.product_pass
        && p_monotone
        && tallies.iter().all(|t| t.passed == t.total);
    Ok(BindingSuite {
        a_star: cfg.a,
        b: cfg.b,
        s: cfg.s,
        eps: cfg.eps,
        tau: regions.tau,
        approx_const: cfg.approx_const,
        zeta,
        growth,
        scales,
        p_monotone,
        tallies,
        records,
        all_pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Bound,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub len: usize,
    /// Critical point bound to, for bound segments.
    pub zeta: Option<Point2>,
    /// `log |Df^len | E^u|` over the segment.
    pub log_growth: f64,
    /// Logarithm of the required lower bound.
    pub log_bound: f64,
    /// Whether the segment ran to its natural end inside the orbit.
    pub complete: bool,
    /// A free segment that ends with a return to `I(delta)`.
    pub ends_at_return: bool,
}

impl Segment {
    pub fn pass(&self) -> bool {
        !self.complete || self.log_growth >= self.log_bound
    }
}

/// Splits `orbit[start..]` into bound and free segments. `E^u` at `orbit[start]` is
/// obtained by pushing a horizontal vector along `orbit[..start]`, and the host leaf of
/// each return is the unstable leaf labelled by the signs of the preceding points.
pub fn bound_free_decompose(regions: &RegionSet, orbit: &[Point2], start: usize) -> Result<Vec<Segment>> {
    let cfg = &regions.cfg;
    let end = orbit.len();
    if start >= end {
        return Ok(Vec::new());
    }
    let mut u = Vec2::new(1.0, 0.0);
    for z in &orbit[..start] {
        let v = jacobian(cfg, z) * u;
        u = v / v.norm();
    }
    let mut step_log = Vec::with_capacity(end - start);
    for z in &orbit[start..] {
        let v = jacobian(cfg, z) * u;
        let r = v.norm();
        step_log.push(r.ln());
        u = v / r;
    }
    let growth = |from: usize, len: usize| -> f64 { step_log[from - start..from - start + len].iter().sum() };

    let mut segments = Vec::new();
    let mut n = start;
    while n < end {
        if regions.in_i_delta(&orbit[n]) {
            let leaf: Vec<i8> = orbit[..n].iter().rev().map(|w| if w.x >= 0.0 { 1 } else { -1 }).collect();
            let found = critical_points_between(regions, &leaf, -cfg.delta, cfg.delta, BOUND_FREE_SCAN)?;
            let zeta = found[0].zeta;
            let cc = critical_cocycle(regions, &zeta, cfg.binding_horizon)?;
            let p = bound_period(regions, &cc, &orbit[n])?;
            let len = p.min(end - n);
            let complete = n + p <= end;
            segments.push(Segment {
                kind: SegmentKind::Bound,
                start: n,
                len,
                zeta: Some(zeta),
                log_growth: growth(n, len),
                log_bound: 0.5 * p as f64 * (4.0 - cfg.eps).ln(),
                complete,
                ends_at_return: false,
            });
            n += len;
        } else {
            let mut m = n;
            while m < end && !regions.in_i_delta(&orbit[m]) {
                m += 1;
            }
            let len = m - n;
            let ends_at_return = m < end;
            let mut log_bound = len as f64 * cfg.sigma().ln();
            if !ends_at_return {
                log_bound += cfg.delta.ln();
            }
            segments.push(Segment {
                kind: SegmentKind::Free,
                start: n,
                len,
                zeta: None,
                log_growth: growth(n, len),
                log_bound,
                complete: true,
                ends_at_return,
            });
            n = m;
        }
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::build_regions;

    #[test]
    fn first_scale_is_tau_times_second_norm() {
        let r = build_regions(&MapConfig::new(2.0, 1e-4, 1)).unwrap();
        let cc = critical_cocycle(&r, &r.zeta0(), 40).unwrap();
        assert!(cc.infinite);
        assert_eq!(cc.w(1), 1.0);
        assert!((contraction_scale(&cc, 1).unwrap() - r.tau * cc.w(2)).abs() < 1e-15);
        assert!(contraction_scale(&cc, 41).is_err());
    }

    #[test]
    fn fold_period_sits_below_bound_period() {
        let r = build_regions(&MapConfig::new(2.0, 1e-4, 1)).unwrap();
        let cc = critical_cocycle(&r, &r.zeta0(), 128).unwrap();
        for p in 2..60 {
            for d in [1e-2, 1e-4, 1e-6] {
                let q = fold_period(&r.cfg, &cc, d, p);
                assert!(q >= 1 && q < p);
            }
        }
    }

    #[test]
    fn dyadic_grid_ends() {
        let g = dyadic_distances(8, 24, 4);
        assert_eq!(g.len(), 65);
        assert_eq!(g[0], 2f64.powi(-8));
        assert_eq!(*g.last().unwrap(), 2f64.powi(-24));
    }
}
