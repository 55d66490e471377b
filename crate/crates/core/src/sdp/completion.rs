//! Rank-one completion of partially specified 3x3 PSD matrices.

use nalgebra::Matrix3;

use crate::{Error, Result};

/// Relative tolerance on the 2x2 determinants that certify rank one.
pub const RANK1_TOL: f64 = 1e-9;

/// Fills the missing off-diagonal entry `(p, q)` of `m` so that the result is PSD of rank one.
///
/// With `r` the remaining index, the known blocks `{r, p}` and `{r, q}` must be PSD and
/// rank one, and the completion is `m[p][q] = m[r][p] * m[r][q] / m[r][r]`.
pub fn complete_rank1_psd_3x3(m: &Matrix3<f64>, missing: (usize, usize)) -> Result<Matrix3<f64>> {
    let (p, q) = missing;
    if p == q || p > 2 || q > 2 {
        return Err(Error::PreconditionViolated(format!(
            "({p}, {q}) is not an off-diagonal entry of a 3x3 matrix"
        )));
    }
    let r = 3 - p - q;
    if !(m[(r, r)] > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "pivot entry ({r}, {r}) must be positive, got {}",
            m[(r, r)]
        )));
    }
    for s in [p, q] {
        let (a, b, c) = (m[(r, r)], m[(s, s)], m[(r, s)]);
        let det = a * b - c * c;
        let scale = (a * b).abs().max(c * c).max(f64::MIN_POSITIVE);
        if b < 0.0 || det.abs() > RANK1_TOL * scale.max(1.0) {
            return Err(Error::PreconditionViolated(format!(
                "block {{{r}, {s}}} is not rank-one PSD (det = {det:.3e})"
            )));
        }
    }
    let mut out = *m;
    let v = m[(r, p)] * m[(r, q)] / m[(r, r)];
    out[(p, q)] = v;
    out[(q, p)] = v;
    Ok(out)
}
