//! Thin helpers over `nalgebra` 2-vectors and 2x2 matrices.

use nalgebra::{Matrix2, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Point2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

pub fn vec2(x: f64, y: f64) -> Vec2 {
    Vector2::new(x, y)
}

/// Largest singular value.
pub fn op_norm(m: &Mat2) -> f64 {
    let fro2 = m.norm_squared();
    let det = m.determinant();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    ((fro2 + disc.sqrt()) / 2.0).sqrt()
}

/// `|v_y / v_x|`, infinite for vertical vectors.
pub fn slope(v: &Vec2) -> f64 {
    if v.x == 0.0 {
        f64::INFINITY
    } else {
        (v.y / v.x).abs()
    }
}

pub fn cross(u: &Vec2, v: &Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

pub fn perp(v: &Vec2) -> Vec2 {
    Vector2::new(-v.y, v.x)
}

/// Unoriented angle in `[0, pi/2]` between two lines.
pub fn line_angle(u: &Vec2, v: &Vec2) -> f64 {
    let c = cross(u, v).abs();
    let d = u.dot(v).abs();
    c.atan2(d)
}

/// Unit right singular vector of the largest singular value; sign fixed so the
/// larger-magnitude component is positive.
pub fn top_right_singular(m: &Mat2) -> Vec2 {
    let g = m.transpose() * m;
    let (p, q, r) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
    let half = (p - r) / 2.0;
    let lam = (p + r) / 2.0 + (half * half + q * q).sqrt();
    let v = if q.abs() > 0.0 {
        let a = Vector2::new(q, lam - p);
        let b = Vector2::new(lam - r, q);
        if a.norm() >= b.norm() {
            a
        } else {
            b
        }
    } else if p >= r {
        Vector2::new(1.0, 0.0)
    } else {
        Vector2::new(0.0, 1.0)
    };
    canonical(&v.normalize())
}

pub fn canonical(v: &Vec2) -> Vec2 {
    let big = if v.x.abs() >= v.y.abs() { v.x } else { v.y };
    if big < 0.0 {
        -v
    } else {
        *v
    }
}

/// Real eigenvalues and unit eigenvectors of a 2x2 matrix, largest modulus first.
pub fn real_eigen(m: &Mat2) -> Option<[(f64, Vec2); 2]> {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // stable pair of roots
    let l1 = if tr >= 0.0 { tr / 2.0 + sq } else { tr / 2.0 - sq };
    let l2 = if l1 != 0.0 { det / l1 } else { tr / 2.0 - sq };
    let vec_for = |l: f64| {
        let a = Vector2::new(m[(0, 1)], l - m[(0, 0)]);
        let b = Vector2::new(l - m[(1, 1)], m[(1, 0)]);
        let v = if a.norm() >= b.norm() { a } else { b };
        if v.norm() == 0.0 {
            Vector2::new(1.0, 0.0)
        } else {
            canonical(&v.normalize())
        }
    };
    let (big, small) = if l1.abs() >= l2.abs() { (l1, l2) } else { (l2, l1) };
    Some([(big, vec_for(big)), (small, vec_for(small))])
}
