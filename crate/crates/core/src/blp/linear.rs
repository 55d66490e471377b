//! The two local linear solves of bilateration: a global bearing from two known
//! bearings and two measured angles, and a position from two rays.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::Scalar;

/// `|det|` below which two directions count as collinear.
pub const BLP_COLLINEAR_TOL: f64 = 1e-10;

/// Solves `g_ii1' g = b1`, `g_ii2' g = b2` for the global bearing `g` and renormalizes it.
///
/// `b1`, `b2` are the dot products of the local bearings, which equal the global ones
/// because frames are orthogonal.
pub fn fg_solve<T: Scalar>(g_ii1: Point2<T>, g_ii2: Point2<T>, b1: T, b2: T) -> Result<Point2<T>> {
    fg_solve_with(g_ii1, g_ii2, b1, b2, T::lit(BLP_COLLINEAR_TOL))
}

pub fn fg_solve_with<T: Scalar>(
    g_ii1: Point2<T>,
    g_ii2: Point2<T>,
    b1: T,
    b2: T,
    tol: T,
) -> Result<Point2<T>> {
    let det = g_ii1.cross(g_ii2);
    if !(det.abs() > tol) {
        return Err(Error::CollinearBasis(
            det.abs().to_f64().unwrap_or(f64::NAN),
        ));
    }
    let g = Point2::new(
        (b1 * g_ii2.y - b2 * g_ii1.y) / det,
        (g_ii1.x * b2 - g_ii2.x * b1) / det,
    );
    g.normalized().ok_or(Error::CollinearBasis(
        det.abs().to_f64().unwrap_or(f64::NAN),
    ))
}

/// Intersection of the line through `x_i` along `g_ik` with the line through `x_j` along `g_jk`.
pub fn fx_solve<T: Scalar>(
    x_i: Point2<T>,
    x_j: Point2<T>,
    g_ik: Point2<T>,
    g_jk: Point2<T>,
) -> Result<Point2<T>> {
    fx_solve_with(x_i, x_j, g_ik, g_jk, T::lit(BLP_COLLINEAR_TOL))
}

pub fn fx_solve_with<T: Scalar>(
    x_i: Point2<T>,
    x_j: Point2<T>,
    g_ik: Point2<T>,
    g_jk: Point2<T>,
    tol: T,
) -> Result<Point2<T>> {
    // x_i + t g_ik = x_j + s g_jk
    let det = g_ik.cross(g_jk);
    if !(det.abs() > tol) {
        return Err(Error::CollinearRays(det.abs().to_f64().unwrap_or(f64::NAN)));
    }
    let t = (x_j - x_i).cross(g_jk) / det;
    Ok(x_i + g_ik.scale(t))
}
