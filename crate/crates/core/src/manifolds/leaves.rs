//! Local graphs of the invariant curves that bound the rectangle and its pieces.
//!
//! Unstable leaves are graphs `y = L(x)` labelled by the signs of the recent past,
//! stable leaves are graphs `x = X(y)` labelled by the signs of the future. Both are
//! evaluated through the sign-pattern recurrence in [`crate::shadow`].

use crate::config::MapConfig;
use crate::error::Result;
use crate::linalg::{perp, top_right_singular, Mat2, Point2, Vec2};
use crate::map::{fixed_saddles, jacobian_x, Saddle};
use crate::shadow::solve_open;

pub const LEAF_DEPTH: usize = 48;

#[derive(Debug, Clone)]
pub struct Leaves {
    pub cfg: MapConfig,
    pub p: Saddle,
    pub q: Saddle,
    /// Sign of the past along the saddle whose unstable manifold bounds the rectangle.
    pub sigma_top: i8,
}

fn push(m: &Mat2, v: &Vec2) -> Vec2 {
    let w = m * v;
    w / w.norm()
}

impl Leaves {
    pub fn new(cfg: &MapConfig) -> Result<Self> {
        let (p, q) = fixed_saddles(cfg)?;
        let sigma_top = if cfg.s > 0 { 1 } else { -1 };
        Ok(Leaves { cfg: cfg.clone(), p, q, sigma_top })
    }

    fn fixed_x(&self, sign: i8) -> f64 {
        if sign > 0 {
            self.p.location.x
        } else {
            self.q.location.x
        }
    }

    /// `x[-1], x[-2], ..., x[-N]` of the backward orbit through a point with first
    /// coordinate `x` on the leaf whose recent past signs are `recent`.
    pub fn unstable_past(&self, x: f64, recent: &[i8]) -> Vec<f64> {
        let mut signs: Vec<i8> = vec![self.sigma_top; LEAF_DEPTH.max(recent.len() + 8)];
        let n = signs.len();
        for (j, &s) in recent.iter().enumerate() {
            signs[n - 1 - j] = s;
        }
        let sol = solve_open(&self.cfg, &signs, self.fixed_x(self.sigma_top), x);
        sol.xs.into_iter().rev().collect()
    }

    pub fn unstable_y(&self, x: f64, recent: &[i8]) -> f64 {
        let past = self.unstable_past(x, recent);
        self.cfg.sign() * self.cfg.sqrt_b() * past[0]
    }

    /// Point and unit tangent of the unstable leaf over `x`.
    pub fn unstable_point_tangent(&self, x: f64, recent: &[i8]) -> (Point2, Vec2) {
        let past = self.unstable_past(x, recent);
        let mut v = Vec2::new(1.0, 0.0);
        for xk in past.iter().rev() {
            v = push(&jacobian_x(&self.cfg, *xk), &v);
        }
        if v.x < 0.0 {
            v = -v;
        }
        (Point2::new(x, self.cfg.sign() * self.cfg.sqrt_b() * past[0]), v)
    }

    /// Top unstable side: the local unstable leaf of the bounding saddle.
    pub fn top(&self, x: f64) -> f64 {
        self.unstable_y(x, &[])
    }

    /// Bottom unstable side, the image of the far half of the top side.
    pub fn bottom(&self, x: f64) -> f64 {
        self.unstable_y(x, &[-self.sigma_top])
    }

    pub fn bottom_slope(&self, x: f64) -> f64 {
        let (_, t) = self.unstable_point_tangent(x, &[-self.sigma_top]);
        t.y / t.x
    }

    /// `x[0], x[1], ...` of the forward orbit through the point at height `y` on the
    /// stable leaf with future signs `head` followed by `tail` forever.
    pub fn stable_future(&self, y: f64, head: &[i8], tail: i8) -> Vec<f64> {
        let mut signs = vec![tail; LEAF_DEPTH.max(head.len() + LEAF_DEPTH)];
        signs[..head.len()].copy_from_slice(head);
        let left = y / (self.cfg.sign() * self.cfg.sqrt_b());
        solve_open(&self.cfg, &signs, left, self.fixed_x(tail)).xs
    }

    pub fn stable_x(&self, y: f64, head: &[i8], tail: i8) -> f64 {
        self.stable_future(y, head, tail)[0]
    }

    /// Unit tangent of the stable leaf through the point at height `y`.
    pub fn stable_tangent(&self, y: f64, head: &[i8], tail: i8) -> Vec2 {
        let fut = self.stable_future(y, head, tail);
        let steps = (head.len() + 30).min(fut.len());
        stable_from_future(&self.cfg, &fut[..steps])
    }

    /// `dX/dy` of the stable leaf graph.
    pub fn stable_slope(&self, y: f64, head: &[i8], tail: i8) -> f64 {
        let t = self.stable_tangent(y, head, tail);
        t.x / t.y
    }

    /// Local stable manifold of `Q`, the left stable side.
    pub fn alpha0_minus(&self, y: f64) -> f64 {
        self.stable_x(y, &[], -1)
    }

    /// Right stable side, the preimage of the left one near `x = 1`.
    pub fn alpha0_plus(&self, y: f64) -> f64 {
        self.stable_x(y, &[1], -1)
    }

    pub fn alpha0_plus_slope(&self, y: f64) -> f64 {
        self.stable_slope(y, &[1], -1)
    }

    /// Component of `W^s(P)` through `P`.
    pub fn alpha1_plus(&self, y: f64) -> f64 {
        self.stable_x(y, &[], 1)
    }

    /// Left preimage of `alpha1_plus`.
    pub fn alpha1_minus(&self, y: f64) -> f64 {
        self.stable_x(y, &[-1], 1)
    }

    /// `k`-th left pullback of `alpha1_plus`; accumulates on `alpha0_minus`.
    pub fn alpha_tilde(&self, k: usize, y: f64) -> f64 {
        self.stable_x(y, &vec![-1; k], 1)
    }

    /// The `W^s(Q)` parabola near the origin written as a graph `y = Par(x)`.
    pub fn parabola(&self, x: f64) -> f64 {
        let c = &self.cfg;
        let sb = c.sqrt_b();
        (self.alpha0_plus(c.sign() * sb * x) - 1.0 + c.a * x * x) / sb
    }
}

/// Most contracted direction of the product of Jacobians along `xs`.
pub fn stable_from_future(cfg: &MapConfig, xs: &[f64]) -> Vec2 {
    let mut m = Mat2::identity();
    for &x in xs {
        m = jacobian_x(cfg, x) * m;
        let n = m.norm();
        if n > 0.0 {
            m /= n;
        }
    }
    let e = perp(&top_right_singular(&m));
    if e.y < 0.0 {
        -e
    } else {
        e
    }
}
