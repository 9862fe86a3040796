//! Fisher information aggregation and position error bound.

use std::ops::Add;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Default reciprocal-condition-number floor below which the FIM is treated
/// as singular.
pub const DEFAULT_COND_THRESHOLD: f64 = 1e-12;

/// Symmetric positive semi-definite 2x2 Fisher information, 1/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInfo(pub Matrix2<f64>);

impl FisherInfo {
    pub fn zero() -> Self {
        FisherInfo(Matrix2::zeros())
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
    }

    /// Eigenvalues `(min, max)` of the symmetric matrix.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.0;
        let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
        let half_diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
        let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
        let r = half_diff.hypot(off);
        (half_tr - r, half_tr + r)
    }
}

impl Add for FisherInfo {
    type Output = FisherInfo;

    fn add(self, rhs: FisherInfo) -> FisherInfo {
        FisherInfo(self.0 + rhs.0)
    }
}

impl std::iter::Sum for FisherInfo {
    fn sum<I: Iterator<Item = FisherInfo>>(iter: I) -> FisherInfo {
        iter.fold(FisherInfo::zero(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PebResult {
    /// Meters, `+inf` when ill-conditioned.
    pub peb: f64,
    pub well_conditioned: bool,
}

impl PebResult {
    const ILL: PebResult = PebResult {
        peb: f64::INFINITY,
        well_conditioned: false,
    };
}

/// Draws the GPS-perturbed estimate of an agent position. Only the diagonal
/// of `gps_cov` is used.
pub fn noisy_agent_position<R: Rng + ?Sized>(
    pos: Vector2<f64>,
    gps_cov: &Matrix2<f64>,
    rng: &mut R,
) -> Vector2<f64> {
    debug_assert!(gps_cov[(0, 1)] == 0.0 && gps_cov[(1, 0)] == 0.0);
    let zx: f64 = rng.sample(StandardNormal);
    let zy: f64 = rng.sample(StandardNormal);
    pos + Vector2::new(gps_cov[(0, 0)].sqrt() * zx, gps_cov[(1, 1)].sqrt() * zy)
}

/// Unit vector from `est_pos` towards `target`.
pub fn bearing(target: Vector2<f64>, est_pos: Vector2<f64>) -> Result<Vector2<f64>, Error> {
    let d = target - est_pos;
    let n = d.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::UndefinedBearing);
    }
    Ok(d / n)
}

/// Ranging variance plus the GPS covariance projected on the bearing.
pub fn total_variance(var_range: f64, u: &Vector2<f64>, gps_cov: &Matrix2<f64>) -> f64 {
    var_range + (u.transpose() * gps_cov * u)[(0, 0)]
}

/// Rank-one information contributed by a single ranging agent.
pub fn agent_fim(
    target: Vector2<f64>,
    est_pos: Vector2<f64>,
    var_range: f64,
    gps_cov: &Matrix2<f64>,
) -> Result<FisherInfo, Error> {
    let u = bearing(target, est_pos)?;
    let var = total_variance(var_range, &u, gps_cov);
    Ok(FisherInfo(u * u.transpose() / var))
}

pub fn total_fim<I: IntoIterator<Item = FisherInfo>>(fims: I) -> FisherInfo {
    fims.into_iter().sum()
}

/// `sqrt(trace(J^-1))` via the closed-form 2x2 inverse, or `+inf` when the
/// reciprocal condition number of `J` falls below `cond_threshold`.
pub fn peb(fim: &FisherInfo, cond_threshold: f64) -> PebResult {
    let det = fim.determinant();
    if !(det > 0.0) {
        return PebResult::ILL;
    }
    let (lo, hi) = fim.eigenvalues();
    if !(hi > 0.0) || !(lo / hi >= cond_threshold) {
        return PebResult::ILL;
    }
    // trace of the inverse of [[a, b], [b, d]] is (a + d) / det
    let tr_inv = fim.trace() / det;
    PebResult {
        peb: tr_inv.sqrt(),
        well_conditioned: true,
    }
}

pub fn mission_success(peb: f64, peb_star: f64) -> bool {
    peb <= peb_star
}
