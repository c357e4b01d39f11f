//! Orbits with prescribed sign patterns.
//!
//! Eliminating `y` turns the map into the three-term recurrence
//! `x[k+1] = 1 - a x[k]^2 + s b x[k-1]`, with `z[k] = (x[k], s sqrt(b) x[k-1])`.
//! Solving it backwards, `x[k] = sign[k] sqrt((1 + s b x[k-1] - x[k+1]) / a)`, is a
//! contraction whenever the orbit stays away from `x = 0`: the right boundary is
//! forgotten at rate about `1/2` per step and the left one enters only through `b`.

use nalgebra::{DMatrix, DVector};

use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::Point2;

const MAX_OPEN_SWEEPS: usize = 60;
const MAX_CYCLIC_SWEEPS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct OpenSolution {
    /// Unknowns `x[1..=N]`; boundaries are not included.
    pub xs: Vec<f64>,
    pub min_radicand: f64,
    pub sweeps: usize,
}

#[inline]
fn branch(cfg: &MapConfig, sign: i8, prev: f64, next: f64, min_rad: &mut f64) -> f64 {
    let r = (1.0 + cfg.sign() * cfg.b * prev - next) / cfg.a;
    if r < *min_rad {
        *min_rad = r;
    }
    f64::from(sign) * r.max(0.0).sqrt()
}

/// Solves for `x[1..=N]` with `sign(x[k]) = signs[k-1]`, `x[0] = left`, `x[N+1] = right`.
pub fn solve_open(cfg: &MapConfig, signs: &[i8], left: f64, right: f64) -> OpenSolution {
    let n = signs.len();
    let mut x = Vec::with_capacity(n + 2);
    x.push(left);
    x.extend(signs.iter().map(|&s| 0.5 * f64::from(s)));
    x.push(right);
    let mut sweeps = 0;
    let mut min_radicand = f64::INFINITY;
    while sweeps < MAX_OPEN_SWEEPS {
        sweeps += 1;
        min_radicand = f64::INFINITY;
        let mut change: f64 = 0.0;
        for k in (1..=n).rev() {
            let v = branch(cfg, signs[k - 1], x[k - 1], x[k + 1], &mut min_radicand);
            change = change.max((v - x[k]).abs());
            x[k] = v;
        }
        if change <= 1e-16 {
            break;
        }
    }
    x.pop();
    x.remove(0);
    OpenSolution { xs: x, min_radicand, sweeps }
}

/// Gauss-Seidel solution of the cyclic recurrence, indices taken modulo `signs.len()`.
pub fn solve_cyclic(cfg: &MapConfig, signs: &[i8]) -> Vec<f64> {
    let n = signs.len();
    let mut x: Vec<f64> = signs.iter().map(|&s| 0.5 * f64::from(s)).collect();
    let mut unused = f64::INFINITY;
    for _ in 0..MAX_CYCLIC_SWEEPS {
        let mut change: f64 = 0.0;
        for k in (0..n).rev() {
            let v = branch(cfg, signs[k], x[(k + n - 1) % n], x[(k + 1) % n], &mut unused);
            change = change.max((v - x[k]).abs());
            x[k] = v;
        }
        if change <= 1e-15 {
            break;
        }
    }
    x
}

/// Largest recurrence residual `|x[k+1] - 1 + a x[k]^2 - s b x[k-1]|` around the cycle.
pub fn cyclic_residual(cfg: &MapConfig, x: &[f64]) -> f64 {
    let n = x.len();
    (0..n)
        .map(|k| {
            let prev = x[(k + n - 1) % n];
            (x[(k + 1) % n] - 1.0 + cfg.a * x[k] * x[k] - cfg.sign() * cfg.b * prev).abs()
        })
        .fold(0.0, f64::max)
}

/// Newton polish of a cyclic solution. Returns the final residual.
pub fn newton_cyclic(cfg: &MapConfig, x: &mut [f64]) -> Result<f64> {
    let n = x.len();
    let mut res = cyclic_residual(cfg, x);
    for _ in 0..30 {
        if res < 1e-15 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for k in 0..n {
            let prev = (k + n - 1) % n;
            let next = (k + 1) % n;
            rhs[k] = -(x[next] - 1.0 + cfg.a * x[k] * x[k] - cfg.sign() * cfg.b * x[prev]);
            jac[(k, k)] += 2.0 * cfg.a * x[k];
            jac[(k, next)] += 1.0;
            jac[(k, prev)] -= cfg.sign() * cfg.b;
        }
        let step = jac.lu().solve(&rhs).ok_or_else(|| HenonError::Numerical("singular Newton matrix".into()))?;
        for k in 0..n {
            x[k] += step[k];
        }
        let new_res = cyclic_residual(cfg, x);
        if !new_res.is_finite() {
            return Err(HenonError::Numerical("Newton step produced non-finite values".into()));
        }
        if new_res >= res && new_res < 1e-13 {
            res = new_res;
            break;
        }
        res = new_res;
    }
    Ok(res)
}

/// Plane points of a cyclic solution.
pub fn cyclic_points(cfg: &MapConfig, x: &[f64]) -> Vec<Point2> {
    let n = x.len();
    let c = cfg.sign() * cfg.sqrt_b();
    (0..n).map(|k| Point2::new(x[k], c * x[(k + n - 1) % n])).collect()
}

/// Orbit segment following `signs`, obtained from the open recurrence with zero
/// boundary values and `buffer` symbols discarded at each end.
pub fn shadowed_orbit(cfg: &MapConfig, signs: &[i8], buffer: usize) -> Vec<Point2> {
    let sol = solve_open(cfg, signs, 0.0, 0.0);
    let c = cfg.sign() * cfg.sqrt_b();
    let n = sol.xs.len();
    (buffer.max(1)..n.saturating_sub(buffer)).map(|k| Point2::new(sol.xs[k], c * sol.xs[k - 1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{apply, fixed_saddles};

    #[test]
    fn cyclic_fixed_points() {
        let c = MapConfig::new(2.0002, 1e-4, 1);
        let (p, q) = fixed_saddles(&c).unwrap();
        let mut xq = solve_cyclic(&c, &[-1]);
        newton_cyclic(&c, &mut xq).unwrap();
        assert!((xq[0] - q.location.x).abs() < 1e-13);
        let mut xp = solve_cyclic(&c, &[1]);
        newton_cyclic(&c, &mut xp).unwrap();
        assert!((xp[0] - p.location.x).abs() < 1e-13);
    }

    #[test]
    fn cyclic_orbit_is_an_orbit() {
        for s in [1i8, -1] {
            let c = MapConfig::new(2.0002, 1e-4, s);
            let signs = [-1, -1, 1, -1, 1, 1, 1];
            let mut x = solve_cyclic(&c, &signs);
            let r = newton_cyclic(&c, &mut x).unwrap();
            assert!(r < 1e-13);
            let pts = cyclic_points(&c, &x);
            for k in 0..pts.len() {
                let img = apply(&c, &pts[k]);
                assert!((img - pts[(k + 1) % pts.len()]).norm() < 1e-12);
                assert_eq!(pts[k].x.signum() as i8, signs[k]);
            }
        }
    }

    #[test]
    fn open_solution_forgets_right_boundary() {
        let c = MapConfig::new(2.0, 1e-4, 1);
        let signs = vec![-1i8; 40];
        let a = solve_open(&c, &signs, 0.0, 0.0);
        let b = solve_open(&c, &signs, 0.0, 1.0);
        assert!((a.xs[0] - b.xs[0]).abs() < 1e-10);
    }
}
