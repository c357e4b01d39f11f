//! Most contracted directions, a numerical stand-in for the stable foliation.

use crate::config::MapConfig;
use crate::error::{HenonError, Result};
use crate::linalg::{perp, top_right_singular, Mat2, Point2, Vec2};
use crate::map::{apply, in_box, jacobian};

fn contracted(m: &Mat2) -> Vec2 {
    let e = perp(&top_right_singular(m));
    if e.y < 0.0 || (e.y == 0.0 && e.x < 0.0) {
        -e
    } else {
        e
    }
}

/// Forward product over at most `n` steps, stopping before the orbit leaves the box.
fn forward_product(cfg: &MapConfig, z: &Point2, n: usize) -> (Mat2, usize) {
    let mut m = Mat2::identity();
    let mut w = *z;
    let mut used = 0;
    while used < n {
        m = jacobian(cfg, &w) * m;
        m /= m.norm();
        used += 1;
        w = apply(cfg, &w);
        if !in_box(cfg, &w) {
            break;
        }
    }
    (m, used)
}

/// Right singular direction of the smallest singular value of `Df^n(z)`, oriented
/// with nonnegative second component.
pub fn stable_direction(cfg: &MapConfig, z: &Point2, n_contr: usize) -> Result<Vec2> {
    let (m, used) = forward_product(cfg, z, n_contr);
    if used < n_contr {
        return Err(HenonError::Escape { step: used, radius: cfg.escape_radius });
    }
    Ok(contracted(&m))
}

/// Same as [`stable_direction`] but accepts orbits that escape, using the iterates
/// available before escape. At least `min_steps` are required.
pub fn stable_direction_capped(cfg: &MapConfig, z: &Point2, n_contr: usize, min_steps: usize) -> Result<(Vec2, usize)> {
    let (m, used) = forward_product(cfg, z, n_contr);
    if used < min_steps {
        return Err(HenonError::Escape { step: used, radius: cfg.escape_radius });
    }
    Ok((contracted(&m), used))
}
