//! The invariant suite behind `selfcheck`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::binding::{binding_suite, dyadic_distances};
use crate::coding::{check_transition_diagram, enumerate_periodic, random_word, semi_conjugacy_residual};
use crate::config::MapConfig;
use crate::error::Result;
use crate::linalg::{op_norm, Point2};
use crate::manifolds::{build_regions, RegionSet};
use crate::map::{apply, apply_inverse, cocycle, fixed_saddles, jacobian};
use crate::thermo::{
    conditioned_gibbs, equilibrium_weights, excursion_report, family_orbits, find_t_roots, measure_drop_experiment,
    periodic_floor_constant, pressure, zero_block_family, AtomicMeasure, OrbitWeights,
};

/// Largest period enumerated by the suite.
pub const SUITE_PERIOD: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfcheckReport {
    pub a_star: f64,
    pub b: f64,
    pub s: i8,
    pub checks: Vec<NamedCheck>,
    pub failed: Vec<String>,
    pub all_pass: bool,
}

struct Sink(Vec<NamedCheck>);

impl Sink {
    fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.0.push(NamedCheck { name: name.into(), pass: value <= limit, value, limit });
    }

    fn at_least(&mut self, name: &str, value: f64, limit: f64) {
        self.0.push(NamedCheck { name: name.into(), pass: value >= limit, value, limit });
    }

    fn flag(&mut self, name: &str, pass: bool) {
        self.0.push(NamedCheck { name: name.into(), pass, value: f64::from(u8::from(pass)), limit: 1.0 });
    }
}

fn map_checks(regions: &RegionSet, rng: &mut ChaCha8Rng, out: &mut Sink) -> Result<()> {
    let cfg = &regions.cfg;
    let (mut det_err, mut inv_err) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let z = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.01..0.01));
        det_err = det_err.max((jacobian(cfg, &z).determinant().abs() - cfg.b).abs() / cfg.b);
        inv_err = inv_err.max((apply_inverse(cfg, &apply(cfg, &z))? - z).norm());
    }
    out.at_most("map.determinant", det_err, 1e-12);
    out.at_most("map.inverse", inv_err, 1e-12);

    let mut chain = 0.0f64;
    let data = enumerate_periodic(regions, 6)?;
    for o in data.orbits.iter().filter(|o| o.period == 6) {
        let z = o.points[0];
        let whole = cocycle(cfg, &z, 11)?;
        let split = cocycle(cfg, &o.points[4 % o.period], 7)? * cocycle(cfg, &z, 4)?;
        chain = chain.max((whole - split).norm() / whole.norm());
    }
    out.at_most("map.chain_rule", chain, 1e-10);

    let (_, q) = fixed_saddles(cfg)?;
    let mut worst = 0.0f64;
    for n in 1..=20 {
        let m = cocycle(cfg, &q.location, n)?;
        let want = q.unstable_eigenvalue.abs().powi(n as i32);
        worst = worst.max((op_norm(&m) - want).abs() / want);
    }
    out.at_most("map.q_multiplier_powers", worst, 1e-8);
    Ok(())
}

fn chebyshev_anchor(base: &MapConfig, out: &mut Sink) -> Result<()> {
    let mut cfg = base.clone();
    cfg.b = 1e-6;
    let r = build_regions(&cfg)?;
    out.at_most("anchor.a_star_near_2", (r.cfg.a - 2.0).abs(), 1e-2);
    out.at_most("anchor.q_multiplier_near_4", (r.leaves.q.log_multiplier() - 4f64.ln()).abs(), 1e-2);
    Ok(())
}

fn region_checks(regions: &RegionSet, out: &mut Sink) {
    let t = &regions.tangency;
    out.flag("tangency.gap_changes_sign", t.gap_lo * t.gap_hi < 0.0);
    out.flag(
        "regions.saddles_in_r",
        regions.in_r(&regions.leaves.p.location) && regions.in_r(&regions.leaves.q.location),
    );
    let rep = check_transition_diagram(regions, 1000);
    out.at_most("regions.transition_violations", rep.violations.iter().sum::<usize>() as f64, 0.0);
}

fn coding_checks(regions: &RegionSet, rng: &mut ChaCha8Rng, out: &mut Sink) -> Result<OrbitWeights> {
    let mut worst = 0.0f64;
    let mut last = None;
    for n in 1..=SUITE_PERIOD {
        let e = enumerate_periodic(regions, n)?;
        worst = worst.max(e.max_residual);
        last = Some(e);
    }
    out.at_most("coding.newton_residual", worst, 1e-10);
    let mut sc = 0.0f64;
    for _ in 0..1000 {
        let w = random_word(rng, 30);
        sc = sc.max(semi_conjugacy_residual(regions, &w, 30)?);
    }
    out.at_most("coding.semi_conjugacy", sc, 1e-6);
    Ok(OrbitWeights::from_orbits(&last.expect("at least one period").orbits))
}

fn thermo_checks(regions: &RegionSet, data: &OrbitWeights, rng: &mut ChaCha8Rng, out: &mut Sink) -> Result<()> {
    let cfg = &regions.cfg;
    let n = SUITE_PERIOD;
    out.at_most("thermo.p0_log2", (pressure(data, n, 0.0)?.pressure - 2f64.ln()).abs(), 1e-9);
    out.at_most("thermo.p1_negative", pressure(data, n, 1.0)?.pressure, 0.0);

    let grid: Vec<f64> = (0..=40).map(|i| 0.1 * f64::from(i)).collect();
    let ps = grid.iter().map(|&t| pressure(data, n, t).map(|s| s.pressure)).collect::<Result<Vec<_>>>()?;
    let convex = ps.windows(3).map(|w| w[0] + w[2] - 2.0 * w[1]).fold(f64::INFINITY, f64::min);
    out.at_least("thermo.convexity", convex, -1e-12);

    let h = 1e-4;
    let mut deriv = 0.0f64;
    let mut variational = f64::INFINITY;
    for &t in grid.iter().skip(1).step_by(4) {
        let slope = (pressure(data, n, t + h)?.pressure - pressure(data, n, t - h)?.pressure) / (2.0 * h);
        deriv = deriv.max((-slope - pressure(data, n, t)?.lyapunov).abs());
        let gibbs = equilibrium_weights(data, n, t)?.free_energy(t);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..data.len()).map(|_| rng.gen::<f64>().powi(4)).collect();
            let mu = AtomicMeasure::from_masses(data, n, t, &raw)?;
            variational = variational.min(gibbs - mu.free_energy(t));
        }
    }
    out.at_most("thermo.derivative_is_lyapunov", deriv, 1e-4);
    out.at_least("thermo.gibbs_maximises_free_energy", variational, -1e-12);

    let shorter = OrbitWeights::from_orbits(&enumerate_periodic(regions, n - 1)?.orbits);
    let rep = find_t_roots(cfg, data, n, Some((&shorter, n - 1)), 400.0, 1600)?;
    out.flag("thermo.tu_in_unit_interval", rep.t_u > 0.0 && rep.t_u < 1.0);
    out.flag("thermo.t0_curve_found", rep.t0_curve.is_some());
    out.flag("thermo.t0_above_tu", rep.t0_above_tu);
    out.flag("thermo.t0_bound_below_curve", rep.bound_below_curve);

    let mut coarse = cfg.clone();
    coarse.b = 1e-2;
    let rc = build_regions(&coarse)?;
    let dc = OrbitWeights::from_orbits(&enumerate_periodic(&rc, n)?.orbits);
    let tu_coarse = find_t_roots(&rc.cfg, &dc, n, None, 2.0, 200)?.t_u;
    out.flag("thermo.tu_decreases_with_b", cfg.b >= coarse.b || rep.t_u > tu_coarse);

    let e = enumerate_periodic(regions, n)?;
    out.flag("thermo.periodic_floor_finite", periodic_floor_constant(cfg, &e.orbits).is_finite());

    let family = family_orbits(regions, &zero_block_family(5..=60))?;
    let ex = excursion_report(regions, &family);
    out.flag("thermo.excursion_window", ex.all_pass);
    let nu = conditioned_gibbs(data, n, 0.0, |w| super::longest_zero_run(w) < n / 4)?;
    let drop = measure_drop_experiment(regions, &nu, &family, ex.k0.unwrap_or(cfg.vk_kmax), ex.m0.unwrap_or(cfg.vk_m));
    out.at_most("thermo.drop_violations", drop.violations as f64, 0.0);
    Ok(())
}

fn binding_checks(regions: &RegionSet, out: &mut Sink) -> Result<()> {
    let suite = binding_suite(regions, &dyadic_distances(8, 24, 4))?;
    out.flag("binding.growth_ratios", suite.growth.ratio_pass);
    out.flag("binding.growth_slopes", suite.growth.slope_pass);
    out.flag("binding.scale_size", suite.scales.size_pass);
    out.flag("binding.scale_product", suite.scales.product_pass);
    out.flag("binding.p_monotone", suite.p_monotone);
    for t in &suite.tallies {
        out.at_least(&format!("binding.recovery_{}", t.name), t.passed as f64 / t.total.max(1) as f64, 1.0);
    }
    Ok(())
}

/// Runs every invariant family; a module error aborts the suite.
pub fn run(cfg: &MapConfig) -> Result<SelfcheckReport> {
    let regions = build_regions(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Sink(Vec::new());
    map_checks(&regions, &mut rng, &mut out)?;
    chebyshev_anchor(cfg, &mut out)?;
    region_checks(&regions, &mut out);
    let data = coding_checks(&regions, &mut rng, &mut out)?;
    thermo_checks(&regions, &data, &mut rng, &mut out)?;
    binding_checks(&regions, &mut out)?;
    let failed: Vec<String> = out.0.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    Ok(SelfcheckReport {
        a_star: regions.cfg.a,
        b: regions.cfg.b,
        s: regions.cfg.s,
        all_pass: failed.is_empty(),
        failed,
        checks: out.0,
    })
}
