//! Adaptively refined polylines along invariant manifolds.

use serde::{Deserialize, Serialize};

use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::{line_angle, Point2, Vec2};
use crate::map::{apply, apply_inverse, in_box, jacobian, Saddle};

const LINEAR_RADIUS: f64 = 1e-5;
const MAX_VERTICES: usize = 400_000;
const MIN_PARAM_STEP: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Unstable,
    Stable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub vertices: Vec<Point2>,
    pub tangents: Vec<Vec2>,
    pub arclength: f64,
    pub source: String,
    /// Growth stopped on the arclength budget or vertex cap rather than on escape.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C2Report {
    pub max_slope: f64,
    pub max_curvature: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Curve {
    pub fn new(vertices: Vec<Point2>, tangents: Vec<Vec2>, source: impl Into<String>) -> Self {
        let arclength = vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        Curve { vertices, tangents, arclength, source: source.into(), exhausted: false }
    }

    /// Samples a graph `x -> (x, g(x))` with tangents from `slope`.
    pub fn from_graph(
        xs: impl IntoIterator<Item = f64>,
        g: impl Fn(f64) -> f64,
        slope: impl Fn(f64) -> f64,
        source: &str,
    ) -> Self {
        let mut v = Vec::new();
        let mut t = Vec::new();
        for x in xs {
            v.push(Point2::new(x, g(x)));
            let d = Vec2::new(1.0, slope(x));
            t.push(d / d.norm());
        }
        Curve::new(v, t, source)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn max_spacing(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    }

    /// Largest angle between tangents of adjacent vertices.
    pub fn max_turn(&self) -> f64 {
        self.tangents.windows(2).map(|w| line_angle(&w[0], &w[1])).fold(0.0, f64::max)
    }

    /// Slope and discrete curvature against `b^{1/4}`.
    pub fn c2b_report(&self, b: f64) -> C2Report {
        let bound = b.powf(0.25);
        let max_slope = self
            .tangents
            .iter()
            .map(|t| if t.x == 0.0 { f64::INFINITY } else { (t.y / t.x).abs() })
            .fold(0.0, f64::max);
        let mut max_curvature: f64 = 0.0;
        for i in 1..self.vertices.len() {
            let ds = (self.vertices[i] - self.vertices[i - 1]).norm();
            if ds > 0.0 {
                max_curvature = max_curvature.max(line_angle(&self.tangents[i], &self.tangents[i - 1]) / ds);
            }
        }
        C2Report { max_slope, max_curvature, bound, pass: max_slope <= bound && max_curvature <= bound }
    }

    /// Euclidean distance from `z` to the polyline.
    pub fn distance_to(&self, z: &Point2) -> f64 {
        if self.vertices.len() == 1 {
            return (self.vertices[0] - z).norm();
        }
        self.vertices
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                let l2 = d.norm_squared();
                let t = if l2 > 0.0 { ((z - w[0]).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
                (w[0] + d * t - z).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,tx,ty\n");
        for (v, t) in self.vertices.iter().zip(&self.tangents) {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", v.x, v.y, t.x, t.y));
        }
        s
    }
}

struct Grower<'a> {
    cfg: &'a MapConfig,
    saddle: Point2,
    dir: Vec2,
    /// Multiplier of one step of the growth map along `dir`.
    lambda: f64,
    forward: bool,
}

impl Grower<'_> {
    fn step(&self, z: &Point2) -> Result<Point2> {
        if self.forward {
            Ok(apply(self.cfg, z))
        } else {
            apply_inverse(self.cfg, z)
        }
    }

    fn step_jac(&self, z: &Point2) -> Result<crate::linalg::Mat2> {
        if self.forward {
            Ok(jacobian(self.cfg, z))
        } else {
            let pre = apply_inverse(self.cfg, z)?;
            jacobian(self.cfg, &pre).try_inverse().ok_or(HenonError::DegenerateMap)
        }
    }

    /// Point and tangent at parameter `t` on branch `branch`, or `None` once the
    /// orbit leaves the box.
    fn eval(&self, branch: f64, t: f64) -> Result<Option<(Point2, Vec2)>> {
        let m = t.floor();
        let theta = t - m;
        let mu = self.lambda.abs();
        let flip = if self.lambda < 0.0 && (m as i64) % 2 == 1 { -1.0 } else { 1.0 };
        let r = LINEAR_RADIUS * mu.powf(theta - 1.0);
        let mut z = self.saddle + self.dir * (branch * flip * r);
        let mut v = self.dir * (branch * flip);
        for _ in 0..(m as usize) {
            let j = self.step_jac(&z)?;
            v = j * v;
            v /= v.norm();
            z = self.step(&z)?;
            if !in_box(self.cfg, &z) || !z.x.is_finite() {
                return Ok(None);
            }
        }
        Ok(Some((z, v)))
    }

    fn grow_branch(&self, branch: f64, budget: f64) -> Result<(Vec<Point2>, Vec<Vec2>, bool)> {
        let cfg = self.cfg;
        let mut pts = vec![self.saddle];
        let mut tans = vec![self.dir * branch];
        let mut length = 0.0;
        let mut t0 = 0.0;
        let Some(mut prev) = self.eval(branch, t0)? else {
            return Ok((pts, tans, false));
        };
        length += (prev.0 - self.saddle).norm();
        pts.push(prev.0);
        tans.push(prev.1);
        let coarse = 1.0 / 16.0;
        loop {
            let t1 = t0 + coarse;
            let Some(next) = self.eval(branch, t1)? else {
                return Ok((pts, tans, false));
            };
            // refine (t0, t1) depth first, emitting vertices in order
            let mut stack = vec![(t1, next)];
            let mut lo = (t0, prev);
            while let Some(hi) = stack.pop() {
                let gap = (hi.1 .0 - lo.1 .0).norm();
                let turn = line_angle(&hi.1 .1, &lo.1 .1);
                let split = (gap > cfg.max_spacing || turn > cfg.max_turn) && hi.0 - lo.0 > MIN_PARAM_STEP;
                if split {
                    let tm = 0.5 * (lo.0 + hi.0);
                    match self.eval(branch, tm)? {
                        Some(mid) => {
                            stack.push(hi);
                            stack.push((tm, mid));
                        }
                        None => return Ok((pts, tans, false)),
                    }
                } else {
                    length += gap;
                    pts.push(hi.1 .0);
                    let mut tan = hi.1 .1;
                    if tan.dot(&(hi.1 .0 - lo.1 .0)) < 0.0 {
                        tan = -tan;
                    }
                    tans.push(tan);
                    lo = hi;
                    if length >= budget || pts.len() >= MAX_VERTICES {
                        return Ok((pts, tans, true));
                    }
                }
            }
            t0 = t1;
            prev = next;
        }
    }

    fn grow(&self, budget: f64, source: String) -> Result<Curve> {
        let (mut p_neg, mut t_neg, ex_neg) = self.grow_branch(-1.0, budget)?;
        let (p_pos, t_pos, ex_pos) = self.grow_branch(1.0, budget)?;
        p_neg.reverse();
        t_neg.reverse();
        for t in t_neg.iter_mut() {
            *t = -*t;
        }
        p_neg.pop();
        t_neg.pop();
        p_neg.extend(p_pos);
        t_neg.extend(t_pos);
        let mut c = Curve::new(p_neg, t_neg, source);
        c.exhausted = ex_neg && ex_pos;
        Ok(c)
    }
}

/// Both branches of the unstable manifold of `saddle`, each up to `budget` arclength.
pub fn grow_unstable(cfg: &MapConfig, saddle: &Saddle, budget: f64) -> Result<Curve> {
    let g = Grower {
        cfg,
        saddle: saddle.location,
        dir: saddle.unstable_vector,
        lambda: saddle.unstable_eigenvalue,
        forward: true,
    };
    g.grow(budget, format!("unstable {:?}", saddle.label))
}

/// Both branches of the stable manifold of `saddle`, grown with the inverse map.
pub fn grow_stable(cfg: &MapConfig, saddle: &Saddle, budget: f64) -> Result<Curve> {
    if cfg.b <= 0.0 {
        return Err(HenonError::DegenerateMap);
    }
    let g = Grower {
        cfg,
        saddle: saddle.location,
        dir: saddle.stable_vector,
        lambda: 1.0 / saddle.stable_eigenvalue,
        forward: false,
    };
    g.grow(budget, format!("stable {:?}", saddle.label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::fixed_saddles;

    #[test]
    fn unstable_curve_respects_caps() {
        let c = MapConfig::new(2.0002, 1e-4, 1);
        let (p, _) = fixed_saddles(&c).unwrap();
        let w = grow_unstable(&c, &p, 2.0).unwrap();
        assert!(w.max_spacing() <= c.max_spacing * (1.0 + 1e-9));
        assert!(w.vertices.contains(&p.location));
        let i = w.vertices.iter().position(|v| *v == p.location).unwrap();
        assert!(line_angle(&w.tangents[i], &p.unstable_vector) < 1e-6);
    }

    #[test]
    fn stable_curve_is_forward_invariant() {
        let c = MapConfig::new(2.0002, 1e-4, -1);
        let (_, q) = fixed_saddles(&c).unwrap();
        let ws = grow_stable(&c, &q, 0.05).unwrap();
        for v in ws.vertices.iter().step_by(7) {
            assert!(ws.distance_to(&apply(&c, v)) < 1e-6);
        }
    }
}
