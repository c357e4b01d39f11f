//! Unstable Jacobians, periodic-orbit pressure, Gibbs measures and the thresholds
//! `t^u`, `t_0`; excursions through `V_{k,M}` and the exponent drop experiment.

use serde::{Deserialize, Serialize};

use crate::coding::{periodic_point, Enumeration, PeriodicOrbit, Word};
use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::{line_angle, Point2, Vec2};
use crate::manifolds::RegionSet;
use crate::map::{apply_inverse, in_box, jacobian};

/// Backward steps that must stay in the escape box before a direction is trusted.
const MIN_BACK: usize = 2;
const ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnstableDirection {
    pub dir: Vec2,
    /// Backward steps actually used.
    pub steps: usize,
    /// Angle to the direction obtained with one backward step fewer.
    pub consistency: f64,
}

fn push_along(cfg: &MapConfig, past: &[Point2]) -> Vec2 {
    let mut v = Vec2::new(1.0, 0.0);
    for z in past {
        let w = jacobian(cfg, z) * v;
        v = w / w.norm();
    }
    if v.x < 0.0 {
        -v
    } else {
        v
    }
}

/// `E^u(z)` as `Df^n(f^{-n} z)` applied to a horizontal vector. The backward orbit
/// is followed for up to `n_back` steps and stops once it leaves the escape box;
/// fewer than two usable steps is an escape error.
pub fn unstable_direction(cfg: &MapConfig, z: &Point2, n_back: usize) -> Result<UnstableDirection> {
    let mut past = vec![*z];
    let mut w = *z;
    for step in 1..=n_back {
        let prev = apply_inverse(cfg, &w)?;
        if !in_box(cfg, &prev) || !prev.x.is_finite() {
            if step <= MIN_BACK {
                return Err(HenonError::Escape { step, radius: cfg.escape_radius });
            }
            break;
        }
        past.push(prev);
        w = prev;
    }
    past.reverse();
    // past = [f^{-n} z, ..., f^{-1} z, z]; the pushes use every point but z.
    let n = past.len() - 1;
    let dir = push_along(cfg, &past[..n]);
    let coarse = push_along(cfg, &past[1..n]);
    Ok(UnstableDirection { dir, steps: n, consistency: line_angle(&dir, &coarse) })
}

/// `E^u` along a known orbit segment, pushing a horizontal vector from `orbit[0]`;
/// entry `k` is accurate once `k` exceeds a few steps.
pub fn unstable_directions_along(cfg: &MapConfig, orbit: &[Point2]) -> Vec<Vec2> {
    let mut v = Vec2::new(1.0, 0.0);
    let mut out = Vec::with_capacity(orbit.len());
    for z in orbit {
        out.push(if v.x < 0.0 { -v } else { v });
        let w = jacobian(cfg, z) * v;
        v = w / w.norm();
    }
    out
}

/// `log |Df(z) e|` for a unit `e` spanning `E^u(z)`.
pub fn log_ju(cfg: &MapConfig, z: &Point2, e: &Vec2) -> f64 {
    (jacobian(cfg, z) * (e / e.norm())).norm().ln()
}

/// `log sum exp` of `terms`, accumulated in the given order.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Per-orbit data entering the sums, in enumeration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitWeights {
    pub words: Vec<String>,
    pub periods: Vec<usize>,
    /// `(1/period) sum log J^u` around each orbit.
    pub exponents: Vec<f64>,
}

impl OrbitWeights {
    pub fn from_orbits(orbits: &[PeriodicOrbit]) -> Self {
        OrbitWeights {
            words: orbits.iter().map(|o| o.word.clone()).collect(),
            periods: orbits.iter().map(|o| o.period).collect(),
            exponents: orbits.iter().map(|o| o.log_ju_sum / o.period as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.periods.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureSample {
    pub t: f64,
    pub n: usize,
    pub pressure: f64,
    /// Number of fixed points of `f^n` summed over.
    pub points: usize,
    /// Largest single-orbit share of the sum.
    pub max_share: f64,
    pub lyapunov: f64,
    pub entropy: f64,
}

fn orbit_log_terms(data: &OrbitWeights, n: usize, t: f64) -> Vec<f64> {
    data.periods.iter().zip(&data.exponents).map(|(&d, &lam)| (d as f64).ln() - t * n as f64 * lam).collect()
}

fn check_complete(data: &OrbitWeights, n: usize) -> Result<()> {
    let found = data.point_count();
    if n >= usize::BITS as usize || found != 1usize << n {
        return Err(HenonError::IncompleteEnumeration {
            n,
            found,
            expected: 1usize.checked_shl(n as u32).unwrap_or(0),
        });
    }
    Ok(())
}

/// `P_n(t) = (1/n) log sum_{f^n z = z} exp(-t S_n log J^u(z))`.
pub fn pressure(data: &OrbitWeights, n: usize, t: f64) -> Result<PressureSample> {
    check_complete(data, n)?;
    let terms = orbit_log_terms(data, n, t);
    let total = log_sum_exp(&terms);
    let mu = gibbs_from_terms(data, &terms, total, t, n);
    let lyapunov = mu.lyapunov();
    let pressure = total / n as f64;
    Ok(PressureSample {
        t,
        n,
        pressure,
        points: data.point_count(),
        max_share: mu.orbit_weights.iter().copied().fold(0.0, f64::max),
        lyapunov,
        entropy: pressure + t * lyapunov,
    })
}

pub fn pressure_from(enumeration: &Enumeration, t: f64) -> Result<PressureSample> {
    pressure(&OrbitWeights::from_orbits(&enumeration.orbits), enumeration.n, t)
}

/// Probability measure on period-`n` points, equidistributed on each orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub t: f64,
    pub n: usize,
    pub words: Vec<String>,
    pub periods: Vec<usize>,
    pub exponents: Vec<f64>,
    /// Mass carried by each orbit.
    pub orbit_weights: Vec<f64>,
}

impl AtomicMeasure {
    /// Orbit masses proportional to `raw`, normalised.
    pub fn from_masses(data: &OrbitWeights, n: usize, t: f64, raw: &[f64]) -> Result<Self> {
        if raw.len() != data.len() || raw.iter().any(|w| !(*w >= 0.0)) {
            return Err(HenonError::Config("masses must be nonnegative, one per orbit".into()));
        }
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(HenonError::Config("masses sum to zero".into()));
        }
        Ok(AtomicMeasure {
            t,
            n,
            words: data.words.clone(),
            periods: data.periods.clone(),
            exponents: data.exponents.clone(),
            orbit_weights: raw.iter().map(|w| w / total).collect(),
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.orbit_weights.iter().sum()
    }

    /// `lambda^u(mu) = mu(log J^u)`.
    pub fn lyapunov(&self) -> f64 {
        self.orbit_weights.iter().zip(&self.exponents).map(|(w, l)| w * l).sum()
    }

    /// `-(1/n) sum_z mu(z) log mu(z)` over the period-`n` points.
    pub fn point_entropy(&self) -> f64 {
        let s: f64 = self
            .orbit_weights
            .iter()
            .zip(&self.periods)
            .filter(|(w, _)| **w > 0.0)
            .map(|(&w, &d)| w * (w / d as f64).ln())
            .sum();
        -s / self.n as f64
    }

    /// `h(mu) + mu(phi_t)` with `phi_t = -t log J^u`.
    pub fn free_energy(&self, t: f64) -> f64 {
        self.point_entropy() - t * self.lyapunov()
    }

    /// Mass on the points of the given word.
    pub fn weight_of(&self, word: &str) -> Option<f64> {
        self.words.iter().position(|w| w == word).map(|i| self.orbit_weights[i])
    }
}

fn gibbs_from_terms(data: &OrbitWeights, terms: &[f64], total: f64, t: f64, n: usize) -> AtomicMeasure {
    AtomicMeasure {
        t,
        n,
        words: data.words.clone(),
        periods: data.periods.clone(),
        exponents: data.exponents.clone(),
        orbit_weights: terms.iter().map(|l| (l - total).exp()).collect(),
    }
}

/// Gibbs weights `exp(-t S_n log J^u(z))`, normalised.
pub fn equilibrium_weights(data: &OrbitWeights, n: usize, t: f64) -> Result<AtomicMeasure> {
    check_complete(data, n)?;
    let terms = orbit_log_terms(data, n, t);
    let total = log_sum_exp(&terms);
    Ok(gibbs_from_terms(data, &terms, total, t, n))
}

/// Gibbs weights restricted to the orbits accepted by `keep`.
pub fn conditioned_gibbs(data: &OrbitWeights, n: usize, t: f64, keep: impl Fn(&str) -> bool) -> Result<AtomicMeasure> {
    let mu = equilibrium_weights(data, n, t)?;
    let raw: Vec<f64> =
        mu.orbit_weights.iter().zip(&data.words).map(|(&w, word)| if keep(word) { w } else { 0.0 }).collect();
    AtomicMeasure::from_masses(data, n, t, &raw)
}

pub fn lyapunov(measure: &AtomicMeasure) -> f64 {
    measure.lyapunov()
}

/// `log 2 / ((1/t^u) log 2 - (1/2) log(4 - eps))`, infinite when the denominator is not positive.
pub fn t0_lower_bound(t_u: f64, eps: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let den = ln2 / t_u - 0.5 * (4.0 - eps).ln();
    if den > 0.0 {
        ln2 / den
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub b: f64,
    pub eps: f64,
    pub n: usize,
    pub t_u: f64,
    /// First `t` with `P_n(t) <= -(t/2) log(4 - eps)`; `None` when no crossing in `[0, t_max]`.
    pub t0_curve: Option<f64>,
    pub t0_bound: f64,
    pub t_max: f64,
    pub samples: Vec<PressureSample>,
    /// `|P_n - P_{n-1}|` at `t^u`, when the shorter enumeration was supplied.
    pub cauchy_gap: Option<f64>,
    pub t0_above_tu: bool,
    pub bound_below_curve: bool,
}

fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    while hi - lo > ROOT_TOL * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// First sign change of `f` on the grid, refined by bisection.
fn first_crossing(f: impl Fn(f64) -> Result<f64> + Copy, grid: &[f64]) -> Result<Option<f64>> {
    let mut prev = f(grid[0])?;
    for w in grid.windows(2) {
        let cur = f(w[1])?;
        if prev > 0.0 && cur <= 0.0 {
            return bisect(f, w[0], w[1]).map(Some);
        }
        prev = cur;
    }
    Ok(None)
}

/// Uniform grid of `cells + 1` values on `[lo, hi]`.
pub fn t_grid(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    (0..=cells).map(|i| lo + (hi - lo) * i as f64 / cells as f64).collect()
}

/// `t^u`, `t_0` from the pressure curve and the closed-form lower bound for `t_0`.
pub fn find_t_roots(
    cfg: &MapConfig,
    data: &OrbitWeights,
    n: usize,
    shorter: Option<(&OrbitWeights, usize)>,
    t_max: f64,
    cells: usize,
) -> Result<ThermoReport> {
    let grid = t_grid(0.0, t_max, cells);
    let p = |t: f64| pressure(data, n, t).map(|s| s.pressure);
    let t_u =
        first_crossing(p, &grid)?.ok_or_else(|| HenonError::NoSignChange { what: "P_n".into(), lo: 0.0, hi: t_max })?;
    let slope = 0.5 * (4.0 - cfg.eps).ln();
    let g = |t: f64| p(t).map(|v| v + slope * t);
    let t0_curve = first_crossing(g, &grid)?;
    let t0_bound = t0_lower_bound(t_u, cfg.eps);
    let samples = grid.iter().map(|&t| pressure(data, n, t)).collect::<Result<Vec<_>>>()?;
    let cauchy_gap = match shorter {
        Some((d, m)) => Some((pressure(data, n, t_u)?.pressure - pressure(d, m, t_u)?.pressure).abs()),
        None => None,
    };
    let curve = t0_curve.unwrap_or(f64::INFINITY);
    Ok(ThermoReport {
        b: cfg.b,
        eps: cfg.eps,
        n,
        t_u,
        t0_curve,
        t0_bound,
        t_max,
        samples,
        cauchy_gap,
        t0_above_tu: curve >= t_u,
        bound_below_curve: t0_bound <= curve + 1e-6,
    })
}

/// `(4 - eps)^{n/2} / |Lambda^u|` maximised over the orbits: the constant making the
/// periodic floor hold for every enumerated orbit.
pub fn periodic_floor_constant(cfg: &MapConfig, orbits: &[PeriodicOrbit]) -> f64 {
    let half = 0.5 * (4.0 - cfg.eps).ln();
    orbits.iter().map(|o| (o.period as f64 * half - o.log_multiplier).exp()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub start: usize,
    pub len: usize,
    pub average: f64,
    pub pass: bool,
}

/// Maximal cyclic runs of `V_{k,M}` membership with the average of `log J^u` over each.
/// An orbit entirely inside `V_{k,M}` is one excursion covering the whole period.
pub fn excursion_average(
    cfg: &MapConfig,
    regions: &RegionSet,
    orbit: &PeriodicOrbit,
    k: usize,
    m: usize,
    lambda_q: f64,
) -> Vec<Excursion> {
    let flags = regions.v_km_flags(&orbit.points, k, m, true);
    let n = flags.len();
    let lower = 0.5 * (4.0 - cfg.eps).ln();
    let judge = |start: usize, len: usize| {
        let avg = (0..len).map(|i| orbit.log_ju[(start + i) % n]).sum::<f64>() / len as f64;
        Excursion { start, len, average: avg, pass: avg >= lower && avg <= lambda_q + 1e-12 }
    };
    if flags.iter().all(|&f| f) {
        return vec![judge(0, n)];
    }
    let first_out = flags.iter().position(|&f| !f).unwrap_or(0);
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let j = (first_out + i) % n;
        if flags[j] {
            let mut len = 0;
            while i < n && flags[(first_out + i) % n] {
                len += 1;
                i += 1;
            }
            out.push(judge(j, len));
        } else {
            i += 1;
        }
    }
    out
}

/// Words `0^m 1` for `m` in the range.
pub fn zero_block_family(ms: std::ops::RangeInclusive<usize>) -> Vec<Word> {
    ms.map(|m| {
        let mut s = vec![0u8; m];
        s.push(1);
        Word { symbols: s, anchor: 0, periodic: true }
    })
    .collect()
}

pub fn family_orbits(regions: &RegionSet, words: &[Word]) -> Result<Vec<PeriodicOrbit>> {
    words.iter().map(|w| periodic_point(regions, w)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionReport {
    pub k0: Option<usize>,
    pub m0: Option<usize>,
    pub lower: f64,
    pub upper: f64,
    pub rows: Vec<ExcursionRow>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionRow {
    pub word: String,
    pub zero_block: usize,
    pub excursions: Vec<Excursion>,
}

fn rows_for(
    cfg: &MapConfig,
    regions: &RegionSet,
    orbits: &[PeriodicOrbit],
    k: usize,
    m: usize,
    lq: f64,
) -> Vec<ExcursionRow> {
    orbits
        .iter()
        .map(|o| ExcursionRow {
            word: o.word.clone(),
            zero_block: o.longest_zero_block(),
            excursions: excursion_average(cfg, regions, o, k, m, lq),
        })
        .collect()
}

/// Smallest `(k, M)` (by `k`, then `M`) within the configured caps for which every
/// excursion of every orbit lies in `[(1/2) log(4 - eps), lambda^u(delta_Q)]`, or the
/// rows at the caps when none does. Orbits with no excursion at the chosen `(k, M)` are
/// reported with an empty list.
pub fn excursion_report(regions: &RegionSet, orbits: &[PeriodicOrbit]) -> ExcursionReport {
    let cfg = &regions.cfg;
    let lq = regions.leaves.q.log_multiplier();
    let lower = 0.5 * (4.0 - cfg.eps).ln();
    for k in 1..=cfg.vk_kmax {
        for m in 1..=cfg.vk_m {
            let rows = rows_for(cfg, regions, orbits, k, m, lq);
            let ok = rows.iter().all(|r| r.excursions.iter().all(|e| e.pass));
            let nonempty = rows.iter().any(|r| !r.excursions.is_empty());
            if ok && nonempty {
                return ExcursionReport { k0: Some(k), m0: Some(m), lower, upper: lq, rows, all_pass: true };
            }
        }
    }
    let rows = rows_for(cfg, regions, orbits, cfg.vk_kmax, cfg.vk_m, lq);
    ExcursionReport { k0: None, m0: None, lower, upper: lq, rows, all_pass: false }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRow {
    pub word: String,
    pub period: usize,
    /// Fraction of the orbit's points in `V_{k,M}`.
    pub u: f64,
    pub lyapunov: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub k: usize,
    pub m: usize,
    pub t: f64,
    pub nu_period: usize,
    pub lambda_nu: f64,
    pub lambda_q: f64,
    pub rows: Vec<DropRow>,
    pub violations: usize,
}

/// Checks `(u/2) log(4 - eps) + (1 - u) lambda(nu) <= lambda(mu) <= u lambda(delta_Q) + (1 - u) lambda(nu)`
/// for each orbit measure `mu`, with `u` its measured `V_{k,M}` occupation.
pub fn measure_drop_experiment(
    regions: &RegionSet,
    nu: &AtomicMeasure,
    orbits: &[PeriodicOrbit],
    k: usize,
    m: usize,
) -> DropReport {
    let cfg = &regions.cfg;
    let lq = regions.leaves.q.log_multiplier();
    let lnu = nu.lyapunov();
    let half = 0.5 * (4.0 - cfg.eps).ln();
    let rows: Vec<DropRow> = orbits
        .iter()
        .map(|o| {
            let flags = regions.v_km_flags(&o.points, k, m, true);
            let u = flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64;
            let lam = o.log_ju_sum / o.period as f64;
            let lower = u * half + (1.0 - u) * lnu;
            let upper = u * lq + (1.0 - u) * lnu;
            DropRow {
                word: o.word.clone(),
                period: o.period,
                u,
                lyapunov: lam,
                lower,
                upper,
                lower_margin: lam - lower,
                upper_margin: upper - lam,
                pass: lam >= lower && lam <= upper,
            }
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.pass).count();
    DropReport { k, m, t: nu.t, nu_period: nu.n, lambda_nu: lnu, lambda_q: lq, rows, violations }
}

/// Words `0^m 1^r` with `m / (m + r)` closest to `u` among `m + r <= budget`.
pub fn target_word(u: f64, budget: usize) -> Result<Word> {
    if !(0.0..=1.0).contains(&u) || budget < 2 {
        return Err(HenonError::Config(format!("cannot reach occupation {u} within {budget} symbols")));
    }
    let mut best = (f64::INFINITY, 0, 1);
    for len in 2..=budget {
        for m in 0..len {
            let err = (m as f64 / len as f64 - u).abs();
            if err < best.0 - 1e-15 {
                best = (err, m, len - m);
            }
        }
    }
    let (_, m, r) = best;
    let mut s = vec![0u8; m];
    s.extend(std::iter::repeat_n(1u8, r));
    Word::periodic(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::enumerate_periodic;
    use crate::manifolds::build_regions;

    fn regions() -> RegionSet {
        build_regions(&MapConfig::new(2.0, 1e-4, 1)).unwrap()
    }

    #[test]
    fn pressure_at_zero_counts_points() {
        let r = regions();
        let d = OrbitWeights::from_orbits(&enumerate_periodic(&r, 8).unwrap().orbits);
        let s = pressure(&d, 8, 0.0).unwrap();
        assert!((s.pressure - 2f64.ln()).abs() < 1e-12);
        assert_eq!(s.points, 256);
    }

    #[test]
    fn gibbs_weights_attain_the_pressure() {
        let r = regions();
        let d = OrbitWeights::from_orbits(&enumerate_periodic(&r, 9).unwrap().orbits);
        for t in [0.3, 1.0, 2.5] {
            let mu = equilibrium_weights(&d, 9, t).unwrap();
            let p = pressure(&d, 9, t).unwrap().pressure;
            assert!((mu.total_mass() - 1.0).abs() < 1e-12);
            assert!((mu.free_energy(t) - p).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn t0_bound_closed_form() {
        let want = 2f64.ln() / (2f64.ln() - 0.5 * 3.9f64.ln());
        assert!((t0_lower_bound(1.0, 0.1) - want).abs() < 1e-12);
        assert!(t0_lower_bound(1.5, 0.1).is_infinite());
    }

    #[test]
    fn target_words_approximate_occupation() {
        assert_eq!(target_word(0.5, 8).unwrap().to_string(), "01*");
        let w = target_word(0.75, 16).unwrap();
        let zeros = w.symbols.iter().filter(|&&c| c == 0).count();
        assert_eq!(4 * zeros, 3 * w.len());
        assert!(target_word(1.5, 8).is_err());
    }
}
