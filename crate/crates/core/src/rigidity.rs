//! Angle rigidity function, its Jacobian, the infinitesimal rank test and
//! fixability / localizability certification.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{angle_index_set, Framework};
use crate::graphkit::{
    find_nondegenerate_ordering, verify_nondegenerate_ordering, BilaterationOrdering,
};
use crate::network::SensorNetwork;
use crate::scalar::Scalar;

/// Relative singular-value cutoff used by the rank test.
pub const RANK_TOL: f64 = 1e-8;

/// Cosines `g_ij^T g_ik` over the angle index set of `fw.graph`.
pub fn rigidity_function<T: Scalar>(fw: &Framework<T>) -> Result<Vec<T>> {
    angle_index_set(&fw.graph)
        .into_iter()
        .map(|t| fw.angle(t))
        .collect()
}

/// Analytic Jacobian of [`rigidity_function`], `|T| x 2n`, columns `(x_1, y_1, x_2, ...)`.
///
/// With `P(v) = (I - g g^T) / |v|` for `g = v / |v|`:
/// `d f / d p_i = P_ij g_ik + P_ik g_ij`, `d f / d p_j = -P_ij g_ik`, `d f / d p_k = -P_ik g_ij`.
pub fn rigidity_jacobian(fw: &Framework) -> Result<DMatrix<f64>> {
    let triples = angle_index_set(&fw.graph);
    let n = fw.n();
    let mut jac = DMatrix::zeros(triples.len(), 2 * n);
    for (row, &(i, j, k)) in triples.iter().enumerate() {
        let g_ij = fw.bearing(i, j)?;
        let g_ik = fw.bearing(i, k)?;
        let d_ij = (fw.pos(i) - fw.pos(j)).norm();
        let d_ik = (fw.pos(i) - fw.pos(k)).norm();
        // P_ij g_ik and P_ik g_ij
        let c = g_ij.dot(g_ik);
        let a = (g_ik - g_ij * c) * (1.0 / d_ij);
        let b = (g_ij - g_ik * c) * (1.0 / d_ik);
        let mut put = |v: usize, w: crate::geometry::Point2| {
            jac[(row, 2 * (v - 1))] += w.x;
            jac[(row, 2 * (v - 1) + 1)] += w.y;
        };
        put(i, a + b);
        put(j, -a);
        put(k, -b);
    }
    Ok(jac)
}

/// Result of the infinitesimal angle rigidity rank test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport {
    pub jacobian_rank: usize,
    pub required_rank: usize,
    pub infinitesimally_rigid: bool,
    pub singular_values: Vec<f64>,
    pub tolerance_used: f64,
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `tol * sigma_max`.
pub fn numeric_rank(sv: &[f64], tol: f64) -> usize {
    let top = sv.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Rank test: the framework is infinitesimally angle rigid iff the Jacobian has rank `2n - 4`.
pub fn is_infinitesimally_angle_rigid(fw: &Framework, tol: f64) -> Result<RigidityReport> {
    if fw.n() < 3 {
        return Err(Error::PreconditionViolated(format!(
            "rank test needs n >= 3, got {}",
            fw.n()
        )));
    }
    let sv = singular_values(&rigidity_jacobian(fw)?);
    // Jacobian entries scale like 1/length. Anchoring the cutoff at 1/(longest edge) as well
    // keeps a numerically vanishing Jacobian (e.g. collinear points) at rank 0.
    let longest = fw
        .graph
        .edges()
        .map(|(i, j)| (fw.pos(i) - fw.pos(j)).norm())
        .fold(0.0, f64::max);
    let top =
        sv.first()
            .copied()
            .unwrap_or(0.0)
            .max(if longest > 0.0 { 1.0 / longest } else { 0.0 });
    let rank = sv.iter().filter(|&&s| s > tol * top).count();
    let required = 2 * fw.n() - 4;
    Ok(RigidityReport {
        jacobian_rank: rank,
        required_rank: required,
        infinitesimally_rigid: rank == required,
        singular_values: sv,
        tolerance_used: tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixabilityStatus {
    FixableCertified,
    NotFixable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixabilityCertificate {
    pub status: FixabilityStatus,
    #[serde(skip)]
    pub ordering: Option<BilaterationOrdering>,
    pub reason: String,
}

impl FixabilityCertificate {
    /// Placement order of the witnessing ordering, if any.
    pub fn order(&self) -> Option<Vec<usize>> {
        self.ordering.as_ref().map(BilaterationOrdering::order)
    }
}

/// Sufficient test (non-degenerate bilateration ordering) gated by the necessary
/// rank test; anything in between is reported as inconclusive.
pub fn certify_angle_fixability(fw: &Framework) -> FixabilityCertificate {
    let cert = |status, ordering, reason: &str| FixabilityCertificate {
        status,
        ordering,
        reason: reason.to_string(),
    };
    if fw.n() < 3 {
        return cert(
            FixabilityStatus::Inconclusive,
            None,
            "fewer than three vertices",
        );
    }
    let report = match is_infinitesimally_angle_rigid(fw, RANK_TOL) {
        Ok(r) => r,
        Err(e) => return cert(FixabilityStatus::Inconclusive, None, &e.to_string()),
    };
    if !report.infinitesimally_rigid {
        let why = format!(
            "jacobian rank {} below required {}",
            report.jacobian_rank, report.required_rank
        );
        return cert(FixabilityStatus::NotFixable, None, &why);
    }
    match find_nondegenerate_ordering(fw, None) {
        Some(ord) if verify_nondegenerate_ordering(fw, &ord) => cert(
            FixabilityStatus::FixableCertified,
            Some(ord),
            "non-degenerate bilateration ordering",
        ),
        _ => cert(
            FixabilityStatus::Inconclusive,
            None,
            "infinitesimally rigid but no non-degenerate bilateration ordering found",
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalizabilityReason {
    Localizable,
    TooFewAnchors,
    AnchorsCollinear,
    NotFixable,
    FixabilityInconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Localizability {
    pub localizable: bool,
    pub reason: LocalizabilityReason,
    pub certificate: FixabilityCertificate,
}

/// Localizable iff the grounded framework is certified fixable and the anchors span the plane.
pub fn is_angle_localizable(net: &SensorNetwork) -> Localizability {
    let certificate = certify_angle_fixability(&net.grounded_framework());
    let reason = if net.n_anchors() < 3 {
        LocalizabilityReason::TooFewAnchors
    } else if net.anchors_collinear() {
        LocalizabilityReason::AnchorsCollinear
    } else {
        match certificate.status {
            FixabilityStatus::FixableCertified => LocalizabilityReason::Localizable,
            FixabilityStatus::NotFixable => LocalizabilityReason::NotFixable,
            FixabilityStatus::Inconclusive => LocalizabilityReason::FixabilityInconclusive,
        }
    };
    Localizability {
        localizable: reason == LocalizabilityReason::Localizable,
        reason,
        certificate,
    }
}
