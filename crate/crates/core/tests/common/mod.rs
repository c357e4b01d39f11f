#![allow(dead_code)]

use std::sync::OnceLock;

use henon_lab::coding::enumerate_periodic;
use henon_lab::manifolds::{build_regions, RegionSet};
use henon_lab::thermo::OrbitWeights;
use henon_lab::MapConfig;

pub fn cfg(b: f64, s: i8) -> MapConfig {
    MapConfig { b, s, ..MapConfig::default() }
}

/// Regions at `a*(1e-4)`, orientation reversing.
pub fn regions() -> &'static RegionSet {
    static R: OnceLock<RegionSet> = OnceLock::new();
    R.get_or_init(|| build_regions(&cfg(1e-4, 1)).expect("regions at b = 1e-4"))
}

pub fn regions_minus() -> &'static RegionSet {
    static R: OnceLock<RegionSet> = OnceLock::new();
    R.get_or_init(|| build_regions(&cfg(1e-4, -1)).expect("regions at b = 1e-4, s = -1"))
}

/// Orbit data of period 12 at `a*(1e-4)`.
pub fn weights12() -> &'static OrbitWeights {
    static W: OnceLock<OrbitWeights> = OnceLock::new();
    W.get_or_init(|| OrbitWeights::from_orbits(&enumerate_periodic(regions(), 12).expect("period 12").orbits))
}

/// Relative distance of `got` from `want`.
pub fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}
