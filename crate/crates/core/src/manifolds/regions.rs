//! The rectangle `R`, the lens `S`, the strip `Theta` and their pieces at `a = a*`.

use serde::{Deserialize, Serialize};

use super::curve::Curve;
use super::leaves::Leaves;
use super::tangency::{find_first_tangency, Tangency, DEFAULT_BRACKET};
use crate::config::MapConfig;
use crate::error::Result;
use crate::linalg::Point2;
use crate::map::apply;

/// Half-width of the parabola window; outside it the lens is empty.
const LENS_WINDOW: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Piece {
    S1,
    S2,
    S3,
    S4,
}

#[derive(Debug, Clone)]
pub struct RegionSet {
    pub cfg: MapConfig,
    pub tangency: Tangency,
    pub leaves: Leaves,
    pub tau: f64,
    /// Half-width `22 tau` of the tubes `U-`, `U+`.
    pub tube_radius: f64,
    pub y_range: (f64, f64),
    pub x_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub a_star: f64,
    pub b: f64,
    pub s: i8,
    pub xi_star: f64,
    pub zeta0: [f64; 2],
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub tau: f64,
    pub tube_radius: f64,
    pub delta: f64,
    pub i_delta_height: f64,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub bracket: [f64; 2],
}

/// Locates `a*` in the default bracket and builds the regions there.
pub fn build_regions(cfg: &MapConfig) -> Result<RegionSet> {
    let t = find_first_tangency(cfg, DEFAULT_BRACKET)?;
    RegionSet::at_tangency(cfg, t)
}

impl RegionSet {
    pub fn at_tangency(cfg: &MapConfig, tangency: Tangency) -> Result<Self> {
        let cfg = cfg.with_a(tangency.a_star);
        cfg.validate()?;
        let leaves = Leaves::new(&cfg)?;
        let tau = cfg.tau();
        let x_range = (leaves.alpha0_minus(0.0), leaves.alpha0_plus(0.0));
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=200 {
            let x = x_range.0 - 0.01 + (x_range.1 - x_range.0 + 0.02) * i as f64 / 200.0;
            lo = lo.min(leaves.bottom(x));
            hi = hi.max(leaves.top(x));
        }
        Ok(RegionSet { cfg, tangency, leaves, tau, tube_radius: 22.0 * tau, y_range: (lo, hi), x_range })
    }

    pub fn xi_star(&self) -> f64 {
        self.tangency.xi_star
    }

    pub fn zeta0(&self) -> Point2 {
        self.tangency.zeta0
    }

    pub fn summary(&self) -> RegionSummary {
        let l = &self.leaves;
        RegionSummary {
            a_star: self.cfg.a,
            b: self.cfg.b,
            s: self.cfg.s,
            xi_star: self.xi_star(),
            zeta0: [self.zeta0().x, self.zeta0().y],
            p: [l.p.location.x, l.p.location.y],
            q: [l.q.location.x, l.q.location.y],
            tau: self.tau,
            tube_radius: self.tube_radius,
            delta: self.cfg.delta,
            i_delta_height: self.cfg.b_quarter(),
            x_range: [self.x_range.0, self.x_range.1],
            y_range: [self.y_range.0, self.y_range.1],
            bracket: [self.tangency.bracket.0, self.tangency.bracket.1],
        }
    }

    pub fn in_r(&self, z: &Point2) -> bool {
        let l = &self.leaves;
        let pad = 1e-12;
        if !(z.y >= self.y_range.0 - pad && z.y <= self.y_range.1 + pad) {
            return false;
        }
        if !(z.x >= self.x_range.0 - 0.05 && z.x <= self.x_range.1 + 0.05) {
            return false;
        }
        if z.x < l.alpha0_minus(z.y) - pad || z.x > l.alpha0_plus(z.y) + pad {
            return false;
        }
        z.y >= l.bottom(z.x) - pad && z.y <= l.top(z.x) + pad
    }

    /// Interior of the lens: strictly above the parabola.
    pub fn in_int_s(&self, z: &Point2) -> bool {
        z.x.abs() < LENS_WINDOW && self.in_r(z) && z.y > self.leaves.parabola(z.x)
    }

    fn below_parabola(&self, z: &Point2) -> bool {
        z.x.abs() >= LENS_WINDOW || z.y <= self.leaves.parabola(z.x) + 1e-12
    }

    pub fn in_r0(&self, z: &Point2) -> bool {
        z.x <= self.xi_star() && self.in_r(z) && self.below_parabola(z)
    }

    pub fn in_r1(&self, z: &Point2) -> bool {
        z.x >= self.xi_star() && self.in_r(z) && self.below_parabola(z)
    }

    pub fn in_theta(&self, z: &Point2) -> bool {
        self.in_r(z) && z.x >= self.leaves.alpha1_minus(z.y) && z.x <= self.leaves.alpha1_plus(z.y)
    }

    pub fn piece(&self, z: &Point2) -> Option<Piece> {
        if !self.in_r(z) {
            return None;
        }
        let l = &self.leaves;
        if z.x <= l.alpha1_minus(z.y) {
            Some(Piece::S1)
        } else if z.x >= l.alpha1_plus(z.y) {
            Some(Piece::S4)
        } else if !self.below_parabola(z) {
            None
        } else if z.x <= self.xi_star() {
            Some(Piece::S2)
        } else {
            Some(Piece::S3)
        }
    }

    pub fn in_i_delta(&self, z: &Point2) -> bool {
        z.x.abs() < self.cfg.delta && z.y.abs() < self.cfg.b_quarter()
    }

    fn in_tube(&self, z: &Point2, side: impl Fn(f64) -> f64) -> bool {
        let r = self.tube_radius;
        z.y >= self.y_range.0 - r && z.y <= self.y_range.1 + r && (z.x - side(z.y)).abs() <= r
    }

    pub fn in_u_minus(&self, z: &Point2) -> bool {
        self.in_tube(z, |y| self.leaves.alpha0_minus(y))
    }

    pub fn in_u_plus(&self, z: &Point2) -> bool {
        self.in_tube(z, |y| self.leaves.alpha0_plus(y))
    }

    pub fn in_u(&self, z: &Point2) -> bool {
        self.in_u_minus(z) || self.in_u_plus(z)
    }

    /// Membership in the rectangle bounded by the `k`-th pullback of `alpha1_plus`,
    /// decided along the forward orbit: `z, ..., f^{k-1} z` left of `zeta0` and
    /// `f^k z` left of `alpha1_plus`.
    pub fn in_v_tilde(&self, z: &Point2, k: usize) -> bool {
        let mut w = *z;
        for _ in 0..k {
            if w.x > self.xi_star() || !self.in_r(&w) {
                return false;
            }
            w = apply(&self.cfg, &w);
        }
        self.in_r(&w) && w.x <= self.leaves.alpha1_plus(w.y)
    }

    /// Same test for a point of a known orbit lying in `K`, without recomputing iterates.
    /// `orbit[j]` is taken cyclically when `periodic` is set.
    pub fn in_v_tilde_on_orbit(&self, orbit: &[Point2], j: usize, k: usize, periodic: bool) -> Option<bool> {
        let n = orbit.len();
        let at = |i: usize| -> Option<&Point2> {
            if periodic {
                Some(&orbit[i % n])
            } else {
                orbit.get(i)
            }
        };
        for i in j..j + k {
            if at(i)?.x > self.xi_star() {
                return Some(false);
            }
        }
        let w = at(j + k)?;
        Some(w.x <= self.leaves.alpha1_plus(w.y))
    }

    /// `V_{k,M}` flags along an orbit: `f^{-i} z` in the `2Mk` rectangle for some `i <= Mk`.
    pub fn v_km_flags(&self, orbit: &[Point2], k: usize, m: usize, periodic: bool) -> Vec<bool> {
        let n = orbit.len();
        let deep = 2 * m * k;
        let base: Vec<Option<bool>> = (0..n).map(|j| self.in_v_tilde_on_orbit(orbit, j, deep, periodic)).collect();
        (0..n)
            .map(|j| {
                (0..=m * k).any(|i| {
                    if periodic {
                        base[(j + n * (m * k + 1) - i) % n] == Some(true)
                    } else {
                        j >= i && base[j - i] == Some(true)
                    }
                })
            })
            .collect()
    }

    /// The boundary pieces sampled on `samples` points each.
    pub fn boundary_curves(&self, samples: usize) -> Vec<Curve> {
        let l = &self.leaves;
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let xs = |a: f64, b: f64| (0..=samples).map(move |i| a + (b - a) * i as f64 / samples as f64);
        let mut out = vec![
            Curve::from_graph(
                xs(x0, x1),
                |x| l.top(x),
                |x| {
                    let (_, t) = l.unstable_point_tangent(x, &[]);
                    t.y / t.x
                },
                "top unstable side",
            ),
            Curve::from_graph(xs(x0, x1), |x| l.bottom(x), |x| l.bottom_slope(x), "bottom unstable side"),
        ];
        let stable = |name: &str, head: Vec<i8>, tail: i8| {
            let mut v = Vec::new();
            let mut t = Vec::new();
            for y in xs(y0, y1) {
                v.push(Point2::new(l.stable_x(y, &head, tail), y));
                t.push(l.stable_tangent(y, &head, tail));
            }
            Curve::new(v, t, name)
        };
        out.push(stable("alpha0-", vec![], -1));
        out.push(stable("alpha0+", vec![1], -1));
        out.push(stable("alpha1-", vec![-1], 1));
        out.push(stable("alpha1+", vec![], 1));
        let w = (self.cfg.sqrt_b() * (y1 - y0)).sqrt().max(1e-6) * 2.0 + self.xi_star().abs();
        out.push(Curve::from_graph(
            xs(self.xi_star() - w, self.xi_star() + w),
            |x| l.parabola(x),
            |x| {
                let h = 1e-7;
                (l.parabola(x + h) - l.parabola(x - h)) / (2.0 * h)
            },
            "parabola",
        ));
        out
    }

    /// Unstable leaf over the strip between the stable sides of `Theta`.
    pub fn theta_leaf(&self, recent: &[i8], samples: usize) -> Curve {
        let l = &self.leaves;
        let y = l.unstable_y(0.0, recent);
        let (a, b) = (l.alpha1_minus(y), l.alpha1_plus(y));
        let mut v = Vec::new();
        let mut t = Vec::new();
        for i in 0..=samples {
            let x = a + (b - a) * i as f64 / samples as f64;
            let (p, d) = l.unstable_point_tangent(x, recent);
            v.push(p);
            t.push(d);
        }
        Curve::new(v, t, format!("theta leaf {recent:?}"))
    }

    /// Largest vertical gap over `Theta` between the two unstable sides of the
    /// component of `Theta ∩ f^k R` with recent past `word`.
    pub fn side_gap(&self, word: &[i8], samples: usize) -> f64 {
        let l = &self.leaves;
        let mut lower = word.to_vec();
        lower.push(-l.sigma_top);
        let mut gap: f64 = 0.0;
        for i in 0..=samples {
            let x = -0.45 + 0.9 * i as f64 / samples as f64;
            gap = gap.max((l.unstable_y(x, word) - l.unstable_y(x, &lower)).abs());
        }
        gap
    }
}
