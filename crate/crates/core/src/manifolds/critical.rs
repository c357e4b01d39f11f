//! Critical points on unstable leaves crossing the central strip.

use serde::{Deserialize, Serialize};

use super::directions::stable_direction_capped;
use super::regions::RegionSet;
use crate::error::{HenonError, Result};
use crate::linalg::{cross, Point2, Vec2};
use crate::map::{apply, jacobian};

const SCAN_POINTS: usize = 4000;
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReturnDepth {
    Finite(usize),
    Infinite,
}

impl ReturnDepth {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ReturnDepth::Infinite)
    }

    /// Finite value or `cap` for the infinite marker.
    pub fn or_cap(&self, cap: usize) -> usize {
        match self {
            ReturnDepth::Finite(n) => *n,
            ReturnDepth::Infinite => cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub zeta: Point2,
    /// Recent past signs labelling the host leaf.
    pub leaf: Vec<i8>,
    pub tangent: Vec2,
    pub depth: ReturnDepth,
    /// Signed misalignment between `Df` of the tangent and the stable direction at the image.
    pub residual_angle: f64,
}

/// Signed sine of the angle between `Df(z) t(z)` and the contracted direction at `f z`.
pub fn alignment(regions: &RegionSet, leaf: &[i8], x: f64) -> Result<f64> {
    let cfg = &regions.cfg;
    let (z, t) = regions.leaves.unstable_point_tangent(x, leaf);
    let img = jacobian(cfg, &z) * t;
    let (e, _) = stable_direction_capped(cfg, &apply(cfg, &z), cfg.n_contr, 2)?;
    Ok(cross(&(img / img.norm()), &e))
}

/// `n(zeta)`: consecutive returns of the forward orbit to the tube `U`, infinite when
/// the image lies on the right stable side.
pub fn return_depth(regions: &RegionSet, zeta: &Point2) -> ReturnDepth {
    let cfg = &regions.cfg;
    let fz = apply(cfg, zeta);
    let on_side = (regions.leaves.alpha0_plus(fz.y) - fz.x).abs();
    if on_side <= 1e-10 {
        return ReturnDepth::Infinite;
    }
    let mut w = fz;
    let mut n = 0;
    while n < cfg.horizon && regions.in_u(&w) {
        n += 1;
        w = apply(cfg, &w);
    }
    ReturnDepth::Finite(n)
}

/// Roots of [`alignment`] along the leaf labelled `leaf` across the strip between the
/// stable sides of `Theta`. Exactly one root is expected.
pub fn find_critical_points(regions: &RegionSet, leaf: &[i8]) -> Result<Vec<CriticalPoint>> {
    let y = regions.leaves.unstable_y(0.0, leaf);
    let lo = regions.leaves.alpha1_minus(y);
    let hi = regions.leaves.alpha1_plus(y);
    critical_points_between(regions, leaf, lo, hi, SCAN_POINTS)
}

/// Roots of [`alignment`] for `lo <= x <= hi`, located by a uniform scan with `scan`
/// cells followed by bisection. Anything other than one root is a geometry error.
pub fn critical_points_between(
    regions: &RegionSet,
    leaf: &[i8],
    lo: f64,
    hi: f64,
    scan: usize,
) -> Result<Vec<CriticalPoint>> {
    let mut xs = Vec::with_capacity(scan + 1);
    let mut vals = Vec::with_capacity(scan + 1);
    for i in 0..=scan {
        let x = lo + (hi - lo) * i as f64 / scan as f64;
        xs.push(x);
        vals.push(alignment(regions, leaf, x)?);
    }
    let mut out = Vec::new();
    for i in 0..scan {
        if vals[i] == 0.0 || vals[i].signum() != vals[i + 1].signum() {
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            let mut fa = vals[i];
            while b - a > ROOT_TOL {
                let m = 0.5 * (a + b);
                let fm = alignment(regions, leaf, m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            let x = 0.5 * (a + b);
            let (zeta, tangent) = regions.leaves.unstable_point_tangent(x, leaf);
            out.push(CriticalPoint {
                zeta,
                leaf: leaf.to_vec(),
                tangent,
                depth: return_depth(regions, &zeta),
                residual_angle: alignment(regions, leaf, x)?,
            });
        }
    }
    if out.len() != 1 {
        return Err(HenonError::Geometry(format!("{} critical points on leaf {:?}, expected one", out.len(), leaf)));
    }
    Ok(out)
}
