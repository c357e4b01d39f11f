//! One line per acceptance criterion; exits nonzero when any criterion fails.

use std::process::Command;
use std::time::Instant;

use henon_lab::binding::{binding_suite, dyadic_distances};
use henon_lab::cli::longest_zero_run;
use henon_lab::coding::{enumerate_periodic, random_word, semi_conjugacy_residual};
use henon_lab::manifolds::{build_regions, RegionSet};
use henon_lab::thermo::{
    conditioned_gibbs, equilibrium_weights, excursion_report, family_orbits, find_t_roots, measure_drop_experiment,
    pressure, zero_block_family, AtomicMeasure, OrbitWeights,
};
use henon_lab::{MapConfig, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 12;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn cfg(b: f64) -> MapConfig {
    MapConfig { b, ..MapConfig::default() }
}

fn weights(r: &RegionSet, n: usize) -> Result<OrbitWeights> {
    Ok(OrbitWeights::from_orbits(&enumerate_periodic(r, n)?.orbits))
}

fn chebyshev_anchor() -> Result<Verdict> {
    let t = Instant::now();
    let r = build_regions(&cfg(1e-6))?;
    let da = (r.cfg.a - 2.0).abs();
    let dl = (r.leaves.q.log_multiplier() - 4f64.ln()).abs();
    let secs = t.elapsed().as_secs_f64();
    verdict(
        da < 1e-2 && dl < 1e-2 && secs < 60.0,
        format!("|a*-2| = {da:.3e}, |lambda_Q - log 4| = {dl:.3e}, {secs:.3} s"),
    )
}

fn coding_completeness(r: &RegionSet) -> Result<Verdict> {
    let t = Instant::now();
    let mut ok = true;
    let mut worst = 0.0f64;
    for n in 1..=N {
        let e = enumerate_periodic(r, n)?;
        ok &= e.point_count == 1 << n;
        worst = worst.max(e.max_residual);
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        ok && worst < 1e-10 && secs < 300.0,
        format!("2^n points for n <= {N}, max residual {worst:.3e}, {secs:.3} s"),
    )
}

fn semi_conjugacy(r: &RegionSet) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(r.cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        worst = worst.max(semi_conjugacy_residual(r, &random_word(&mut rng, 30), 30)?);
    }
    verdict(worst < 1e-6, format!("max residual {worst:.3e} over 1000 words"))
}

fn pressure_anchors(r: &RegionSet, d: &OrbitWeights) -> Result<Verdict> {
    let p0 = pressure(d, N, 0.0)?.pressure;
    let p1 = pressure(d, N, 1.0)?.pressure;
    let tu = find_t_roots(&r.cfg, d, N, None, 2.0, 200)?.t_u;
    let coarse = build_regions(&cfg(1e-2))?;
    let tu_coarse = find_t_roots(&coarse.cfg, &weights(&coarse, N)?, N, None, 2.0, 200)?.t_u;
    let pass = (p0 - 2f64.ln()).abs() <= 1e-9 && p1 < 0.0 && tu > 0.0 && tu < 1.0 && tu > tu_coarse;
    verdict(
        pass,
        format!("P(0) - log 2 = {:.3e}, P(1) = {p1:.6}, t_u = {tu:.6}, t_u(1e-2) = {tu_coarse:.6}", p0 - 2f64.ln()),
    )
}

fn thresholds(r: &RegionSet, d: &OrbitWeights) -> Result<Verdict> {
    let rep = find_t_roots(&r.cfg, d, N, None, 400.0, 1600)?;
    let curve = rep.t0_curve.unwrap_or(f64::NAN);
    let pass = curve >= rep.t_u && curve >= rep.t0_bound - 1e-6;
    verdict(pass, format!("t_u = {:.6}, t0_curve = {curve:.6}, t0_bound = {:.6}", rep.t_u, rep.t0_bound))
}

fn binding(r: &RegionSet) -> Result<Verdict> {
    let t = Instant::now();
    let s = binding_suite(r, &dyadic_distances(8, 24, 4))?;
    let secs = t.elapsed().as_secs_f64();
    let failing: Vec<String> = s
        .tallies
        .iter()
        .filter(|t| t.passed < t.total)
        .map(|t| format!("({}) {}/{}", t.name, t.passed, t.total))
        .collect();
    let pass = s.all_pass && secs < 60.0;
    verdict(
        pass,
        format!(
            "ratios {}, slopes {}, p0 = {:?}, scale product {}, items short of 100%: [{}], {secs:.3} s",
            s.growth.ratio_pass,
            s.growth.slope_pass,
            s.scales.p0,
            s.scales.product_pass,
            failing.join(", ")
        ),
    )
}

fn excursions(r: &RegionSet) -> Result<Verdict> {
    let rep = excursion_report(r, &family_orbits(r, &zero_block_family(5..=60))?);
    verdict(rep.all_pass, format!("k0 = {:?}, M0 = {:?}, window [{:.6}, {:.6}]", rep.k0, rep.m0, rep.lower, rep.upper))
}

fn identities(d: &OrbitWeights) -> Result<Verdict> {
    let grid: Vec<f64> = (0..=40).map(|i| 0.1 * f64::from(i)).collect();
    let ps = grid.iter().map(|&t| pressure(d, N, t).map(|s| s.pressure)).collect::<Result<Vec<_>>>()?;
    let convex = ps.windows(3).all(|w| w[1] <= 0.5 * (w[0] + w[2]) + 1e-9);
    let h = 1e-4;
    let mut deriv = 0.0f64;
    let mut beaten = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for &t in &grid[1..grid.len() - 1] {
        let slope = (pressure(d, N, t + h)?.pressure - pressure(d, N, t - h)?.pressure) / (2.0 * h);
        deriv = deriv.max((slope + equilibrium_weights(d, N, t)?.lyapunov()).abs());
        let p = pressure(d, N, t)?.pressure;
        for _ in 0..100 {
            let raw: Vec<f64> = (0..d.len()).map(|_| rng.gen::<f64>().powi(4)).collect();
            if AtomicMeasure::from_masses(d, N, t, &raw)?.free_energy(t) > p + 1e-9 {
                beaten += 1;
            }
        }
    }
    verdict(
        convex && deriv < 1e-4 && beaten == 0,
        format!("convex {convex}, max |P' + lambda| = {deriv:.3e}, competitors above P: {beaten}"),
    )
}

fn drop_bounds(r: &RegionSet, d: &OrbitWeights) -> Result<Verdict> {
    let family = family_orbits(r, &zero_block_family(5..=60))?;
    let ex = excursion_report(r, &family);
    let nu = conditioned_gibbs(d, N, 0.0, |w| longest_zero_run(w) < N / 4)?;
    let rep = measure_drop_experiment(r, &nu, &family, ex.k0.unwrap_or(r.cfg.vk_kmax), ex.m0.unwrap_or(r.cfg.vk_m));
    let lo = rep.rows.iter().map(|x| x.lower_margin).fold(f64::INFINITY, f64::min);
    let hi = rep.rows.iter().map(|x| x.upper_margin).fold(f64::INFINITY, f64::min);
    verdict(rep.violations == 0, format!("{} violations, smallest margins {lo:.4e} / {hi:.4e}", rep.violations))
}

fn determinism() -> Result<Verdict> {
    let go = || Command::new(env!("CARGO_BIN_EXE_henon-lab")).arg("selfcheck").output().expect("binary runs");
    let (a, b) = (go(), go());
    verdict(
        !a.stdout.is_empty() && a.stdout == b.stdout,
        format!("{} bytes, identical {}", a.stdout.len(), a.stdout == b.stdout),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Result<Verdict> + 'a>;

fn main() {
    let r = build_regions(&cfg(1e-4)).expect("regions at b = 1e-4");
    let d = weights(&r, N).expect("period-12 enumeration");
    let criteria: Vec<(&str, Criterion)> = vec![
        ("chebyshev anchor", Box::new(chebyshev_anchor)),
        ("coding completeness", Box::new(|| coding_completeness(&r))),
        ("semi-conjugacy residual", Box::new(|| semi_conjugacy(&r))),
        ("pressure anchors", Box::new(|| pressure_anchors(&r, &d))),
        ("threshold consistency", Box::new(|| thresholds(&r, &d))),
        ("binding suite", Box::new(|| binding(&r))),
        ("excursion window", Box::new(|| excursions(&r))),
        ("thermodynamic identities", Box::new(|| identities(&d))),
        ("drop bounds", Box::new(|| drop_bounds(&r, &d))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check().unwrap_or_else(|e| Verdict { pass: false, detail: format!("error: {e}") });
        failed += usize::from(!v.pass);
        println!("{} criterion {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
