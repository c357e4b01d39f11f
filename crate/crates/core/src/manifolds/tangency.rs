//! The first tangency between the bottom unstable side and the `W^s(Q)` parabola.
//!
//! `G(xi) = 1 - a xi^2 + sqrt(b) Lb(xi) - A(s sqrt(b) xi)` vanishes exactly where the
//! image of the bottom side meets the right stable side, so `-max G / sqrt(b)` is the
//! vertical gap between the parabola and the bottom side. The gap is positive below
//! `a*` and negative (two transverse crossings) above it.

use serde::{Deserialize, Serialize};

use super::leaves::Leaves;
use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clearance {
    pub a: f64,
    /// Signed vertical gap between the parabola and the bottom side.
    pub gap: f64,
    /// Abscissa of the closest approach.
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tangency {
    pub a_star: f64,
    pub bracket: (f64, f64),
    pub gap_lo: f64,
    pub gap_hi: f64,
    pub xi_star: f64,
    pub zeta0: Point2,
    pub bisections: usize,
}

fn g_and_slope(l: &Leaves, xi: f64) -> (f64, f64) {
    let c = &l.cfg;
    let sb = c.sqrt_b();
    let y = c.sign() * sb * xi;
    let a_val = l.alpha0_plus(y);
    let lb = l.bottom(xi);
    let g = 1.0 - c.a * xi * xi + sb * lb - a_val;
    let dg = -2.0 * c.a * xi + sb * l.bottom_slope(xi) - c.sign() * sb * l.alpha0_plus_slope(y);
    (g, dg)
}

/// Closest approach of the parabola to the bottom side at the parameter in `cfg`.
pub fn clearance(cfg: &MapConfig) -> Result<Clearance> {
    let l = Leaves::new(cfg)?;
    let mut xi = 0.0;
    for _ in 0..60 {
        let (_, dg) = g_and_slope(&l, xi);
        let step = dg / (2.0 * cfg.a);
        xi += step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    if !(xi.abs() < cfg.delta) {
        return Err(HenonError::Geometry(format!("fold apex at {xi} outside the critical strip")));
    }
    let (g, _) = g_and_slope(&l, xi);
    Ok(Clearance { a: cfg.a, gap: -g / cfg.sqrt_b(), xi })
}

/// Bisection for `a*` on `bracket`, carried to the resolution of `f64` (the returned
/// bracket is far narrower than `1e-10`).
pub fn find_first_tangency(cfg: &MapConfig, bracket: (f64, f64)) -> Result<Tangency> {
    let (mut lo, mut hi) = bracket;
    let g_lo = clearance(&cfg.with_a(lo))?.gap;
    let g_hi = clearance(&cfg.with_a(hi))?.gap;
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(HenonError::NoSignChange { what: "tangency clearance".into(), lo, hi });
    }
    let mut bisections = 0;
    while bisections < 80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if clearance(&cfg.with_a(mid))?.gap > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        bisections += 1;
    }
    let a_star = 0.5 * (lo + hi);
    let at = cfg.with_a(a_star);
    let c = clearance(&at)?;
    let l = Leaves::new(&at)?;
    Ok(Tangency {
        a_star,
        bracket: (lo, hi),
        gap_lo: g_lo,
        gap_hi: g_hi,
        xi_star: c.xi,
        zeta0: Point2::new(c.xi, l.bottom(c.xi)),
        bisections,
    })
}

pub const DEFAULT_BRACKET: (f64, f64) = (1.9, 2.1);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_value_at_b_1e4() {
        let t = find_first_tangency(&MapConfig::new(2.0, 1e-4, 1), DEFAULT_BRACKET).unwrap();
        assert!(t.bracket.1 - t.bracket.0 <= 1e-10);
        assert!((t.a_star - 2.000224650530109).abs() < 1e-9, "{}", t.a_star);
        assert!(t.gap_lo > 0.0 && t.gap_hi < 0.0);
    }

    #[test]
    fn gap_changes_sign() {
        let c = MapConfig::new(2.0, 1e-3, -1);
        assert!(clearance(&c.with_a(1.99)).unwrap().gap > 0.0);
        assert!(clearance(&c.with_a(2.01)).unwrap().gap < 0.0);
    }
}
