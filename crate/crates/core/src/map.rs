//! The Hénon family, its inverse, derivative cocycles and the fixed saddles.

use serde::{Deserialize, Serialize};

use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::{op_norm, real_eigen, Mat2, Point2, Vec2};

pub fn apply(cfg: &MapConfig, z: &Point2) -> Point2 {
    let sb = cfg.sqrt_b();
    Point2::new(1.0 - cfg.a * z.x * z.x + sb * z.y, cfg.sign() * sb * z.x)
}

pub fn apply_inverse(cfg: &MapConfig, z: &Point2) -> Result<Point2> {
    if cfg.b <= 0.0 {
        return Err(HenonError::DegenerateMap);
    }
    let sb = cfg.sqrt_b();
    let x = z.y / (cfg.sign() * sb);
    let y = (z.x - 1.0 + cfg.a * x * x) / sb;
    Ok(Point2::new(x, y))
}

/// `Df` at a point; it only depends on the first coordinate.
pub fn jacobian_x(cfg: &MapConfig, x: f64) -> Mat2 {
    let sb = cfg.sqrt_b();
    Mat2::new(-2.0 * cfg.a * x, sb, cfg.sign() * sb, 0.0)
}

pub fn jacobian(cfg: &MapConfig, z: &Point2) -> Mat2 {
    jacobian_x(cfg, z.x)
}

pub fn in_box(cfg: &MapConfig, z: &Point2) -> bool {
    z.x.abs() <= cfg.escape_radius && z.y.abs() <= cfg.escape_radius
}

/// `z, f z, ..., f^n z`, failing when the orbit leaves the escape box.
pub fn orbit(cfg: &MapConfig, z: &Point2, n: usize) -> Result<Vec<Point2>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut w = *z;
    out.push(w);
    for step in 1..=n {
        w = apply(cfg, &w);
        if !in_box(cfg, &w) || !w.x.is_finite() {
            return Err(HenonError::Escape { step, radius: cfg.escape_radius });
        }
        out.push(w);
    }
    Ok(out)
}

/// A matrix stored as `exp(log_scale) * unit` with `|unit|` of order one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMat {
    pub unit: Mat2,
    pub log_scale: f64,
}

impl ScaledMat {
    pub fn identity() -> Self {
        ScaledMat { unit: Mat2::identity(), log_scale: 0.0 }
    }

    pub fn log_norm(&self) -> f64 {
        op_norm(&self.unit).ln() + self.log_scale
    }

    pub fn to_mat(&self) -> Result<Mat2> {
        let m = self.unit * self.log_scale.exp();
        if m.iter().all(|v| v.is_finite()) {
            Ok(m)
        } else {
            Err(HenonError::Numerical(format!("cocycle overflow at log-norm {}", self.log_norm())))
        }
    }

    fn renormalize(&mut self) {
        let n = op_norm(&self.unit);
        if n > 0.0 && n.is_finite() {
            self.unit /= n;
            self.log_scale += n.ln();
        }
    }
}

/// Ordered product of Jacobians along the orbit, `Df^n(z)`; negative `n` gives
/// `Df^{-|n|}(z)`.  Products longer than `log_scale_after` are renormalised each step.
/// A point that moves less than `fixed_point_tol` is held fixed instead of
/// iterated, since round-off would otherwise push it off along `E^u`.
pub fn cocycle_scaled(cfg: &MapConfig, z: &Point2, n: i64) -> Result<ScaledMat> {
    let steps = n.unsigned_abs() as usize;
    if steps > cfg.horizon.max(cfg.depth_cap) * 4 {
        return Err(HenonError::DepthCap { depth: steps, cap: cfg.horizon.max(cfg.depth_cap) * 4 });
    }
    let scaled = steps > cfg.log_scale_after;
    let pinned = (apply(cfg, z) - z).norm() <= cfg.fixed_point_tol;
    let mut acc = ScaledMat::identity();
    if n >= 0 {
        let mut w = *z;
        for step in 1..=steps {
            acc.unit = jacobian(cfg, &w) * acc.unit;
            if scaled {
                acc.renormalize();
            }
            if !pinned {
                w = apply(cfg, &w);
            }
            if step < steps && (!in_box(cfg, &w) || !w.x.is_finite()) {
                return Err(HenonError::Escape { step, radius: cfg.escape_radius });
            }
        }
    } else {
        let mut w = *z;
        for step in 1..=steps {
            let prev = if pinned { w } else { apply_inverse(cfg, &w)? };
            if !in_box(cfg, &prev) || !prev.x.is_finite() {
                return Err(HenonError::Escape { step, radius: cfg.escape_radius });
            }
            let inv = jacobian(cfg, &prev).try_inverse().ok_or(HenonError::DegenerateMap)?;
            acc.unit *= inv;
            if scaled {
                acc.renormalize();
            }
            w = prev;
        }
    }
    Ok(acc)
}

pub fn cocycle(cfg: &MapConfig, z: &Point2, n: i64) -> Result<Mat2> {
    cocycle_scaled(cfg, z, n)?.to_mat()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SaddleLabel {
    P,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saddle {
    pub label: SaddleLabel,
    pub location: Point2,
    pub unstable_eigenvalue: f64,
    pub stable_eigenvalue: f64,
    pub unstable_vector: Vec2,
    pub stable_vector: Vec2,
}

impl Saddle {
    /// `log |unstable eigenvalue|`.
    pub fn log_multiplier(&self) -> f64 {
        self.unstable_eigenvalue.abs().ln()
    }
}

/// Picks the float within a few ulps of `x` whose image moves least, so that
/// iterating the stored saddle stays put for as long as possible.
fn snap_fixed(cfg: &MapConfig, x: f64) -> Point2 {
    let at = |x: f64| Point2::new(x, cfg.sign() * cfg.sqrt_b() * x);
    let drift = |z: &Point2| {
        let w = apply(cfg, z);
        (w.x - z.x).abs() + (w.y - z.y).abs()
    };
    let mut best = at(x);
    let mut best_drift = drift(&best);
    let bits = x.to_bits() as i64;
    for k in -64i64..=64 {
        if best_drift == 0.0 {
            break;
        }
        let z = at(f64::from_bits((bits + k) as u64));
        let d = drift(&z);
        if d < best_drift {
            best = z;
            best_drift = d;
        }
    }
    best
}

/// Fixed saddles `(P, Q)` near `(1/2, 0)` and `(-1, 0)`.
pub fn fixed_saddles(cfg: &MapConfig) -> Result<(Saddle, Saddle)> {
    let a = cfg.a;
    let lin = 1.0 - cfg.sign() * cfg.b;
    let disc = lin * lin + 4.0 * a;
    if disc < 0.0 || a <= 0.0 {
        return Err(HenonError::NoSaddle(disc));
    }
    let sq = disc.sqrt();
    // roots of a x^2 + lin x - 1 = 0 without cancellation
    let xq = (-lin - sq) / (2.0 * a);
    let xp = -1.0 / (a * xq);
    let make = |label, x: f64| -> Result<Saddle> {
        let loc = snap_fixed(cfg, x);
        let e = real_eigen(&jacobian(cfg, &loc)).ok_or(HenonError::NoSaddle(disc))?;
        let (lu, vu) = e[0];
        let (ls, vs) = e[1];
        if !(lu.abs() > 1.0 && ls.abs() < 1.0) {
            return Err(HenonError::NoSaddle(disc));
        }
        Ok(Saddle {
            label,
            location: loc,
            unstable_eigenvalue: lu,
            stable_eigenvalue: ls,
            unstable_vector: vu,
            stable_vector: vs,
        })
    };
    Ok((make(SaddleLabel::P, xp)?, make(SaddleLabel::Q, xq)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chebyshev_limit_values() {
        let c = MapConfig::new(2.0, 0.0, 1);
        assert_eq!(apply(&c, &Point2::new(0.0, 0.0)), Point2::new(1.0, 0.0));
        assert_eq!(apply(&c, &Point2::new(-1.0, 0.0)), Point2::new(-1.0, 0.0));
        assert!(matches!(apply_inverse(&c, &Point2::new(1.0, 0.0)), Err(HenonError::DegenerateMap)));
        let j = jacobian(&c, &Point2::new(-1.0, 0.0));
        assert_eq!(j, Mat2::new(4.0, 0.0, 0.0, 0.0));
        let (p, q) = fixed_saddles(&c).unwrap();
        assert_eq!(p.location, Point2::new(0.5, 0.0));
        assert_eq!(q.location, Point2::new(-1.0, 0.0));
        assert_relative_eq!(q.unstable_eigenvalue, 4.0);
        assert_relative_eq!(p.unstable_eigenvalue, -2.0);
    }

    #[test]
    fn hand_evaluation() {
        let c = MapConfig::new(2.0, 1e-4, 1);
        let w = apply(&c, &Point2::new(0.3, 0.1));
        // 1 - 2*0.09 + 0.01*0.1 = 0.821, 0.01*0.3 = 0.003
        assert_relative_eq!(w.x, 0.821, epsilon = 1e-15);
        assert_relative_eq!(w.y, 0.003, epsilon = 1e-15);
        let z = apply_inverse(&c, &Point2::new(1.0, 0.01 * 0.01)).unwrap();
        assert_relative_eq!(z.x, 0.01, epsilon = 1e-15);
        // y = (1 - 1 + 2e-4) / 0.01 = 0.02
        assert_relative_eq!(z.y, 0.02, epsilon = 1e-13);
    }

    #[test]
    fn determinant_is_constant() {
        for s in [1i8, -1] {
            let c = MapConfig::new(1.99, 1e-3, s);
            for x in [-2.0, -0.3, 0.0, 1.7] {
                let d = jacobian(&c, &Point2::new(x, 0.4)).determinant();
                assert_relative_eq!(d, -f64::from(s) * 1e-3, epsilon = 1e-18);
            }
        }
    }

    #[test]
    fn cocycle_at_q_matches_eigenvalue_powers() {
        let c = MapConfig::new(2.0, 1e-4, 1);
        let (_, q) = fixed_saddles(&c).unwrap();
        for n in 1..=20 {
            let m = cocycle(&c, &q.location, n).unwrap();
            let e = real_eigen(&m).unwrap();
            assert_relative_eq!(e[0].0, q.unstable_eigenvalue.powi(n as i32), max_relative = 1e-8);
        }
        let long = cocycle_scaled(&c, &q.location, 50).unwrap();
        assert_relative_eq!(long.log_norm(), 50.0 * q.log_multiplier(), max_relative = 1e-8);
    }

    #[test]
    fn escape_is_reported() {
        let c = MapConfig::new(2.0, 1e-4, 1);
        let e = orbit(&c, &Point2::new(1.2, 0.0), 10).unwrap_err();
        assert!(matches!(e, HenonError::Escape { step: 2, .. }));
    }
}
