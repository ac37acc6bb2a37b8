//! Closed-form exponent calculus for the polynomial-drift process.
//!
//! Everything here is a pure function of [`ModelParams`]: the growth exponent
//! `chi`, the superdiffusivity condition, the lower-bound ladder used when
//! `alpha < 0`, the moment-exponent contraction `theta -> 1 + max(F, G)`, and
//! the explicit confinement constant that bounds `zeta_n` along every path.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};

pub const DEFAULT_THETA_TOL: f64 = 1e-9;
pub const DEFAULT_THETA_MAX_ITER: usize = 10_000;

/// Drift parameters `(alpha, beta, gamma, rho)` plus the innovation bound `b`
/// and ellipticity constant `delta` of the increment law.
///
/// The drift at time `n` and position `(x, y)` is
/// `rho * |y|^gamma / ((1 + x)^alpha * (1 + n)^beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub b: f64,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, rho: f64, b: f64, delta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            rho,
            b,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.beta, self.gamma, self.rho, self.b, self.delta]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(WalkError::Domain(format!("non-finite parameter in {self:?}")));
        }
        if self.alpha <= -1.0 {
            return Err(WalkError::Domain(format!("alpha must be > -1, got {}", self.alpha)));
        }
        if self.beta < 0.0 {
            return Err(WalkError::Domain(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.gamma < 0.0 {
            return Err(WalkError::Domain(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.rho <= 0.0 {
            return Err(WalkError::Domain(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.b < 0.0 {
            return Err(WalkError::Domain(format!("B must be >= 0, got {}", self.b)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(WalkError::Domain(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// `chi = (2 + gamma - 2 beta) / (2 + 2 alpha)`.
pub fn chi(params: &ModelParams) -> f64 {
    (2.0 + params.gamma - 2.0 * params.beta) / (2.0 + 2.0 * params.alpha)
}

/// Strict condition `1 + gamma > max(0, alpha) + 2 beta`.
pub fn is_superdiffusive(params: &ModelParams) -> bool {
    1.0 + params.gamma > params.alpha.max(0.0) + 2.0 * params.beta
}

/// `chi_k = chi * (1 - (-alpha)^k)`, the k-th lower bound on the growth
/// exponent when `-1 < alpha < 0`.
pub fn chi_ladder(params: &ModelParams, k: u32) -> Result<f64> {
    if !(params.alpha > -1.0 && params.alpha < 0.0) {
        return Err(WalkError::Domain(format!(
            "chi ladder needs alpha in (-1, 0), got {}",
            params.alpha
        )));
    }
    if 1.0 + params.gamma <= 2.0 * params.beta {
        return Err(WalkError::Domain("chi ladder needs 1 + gamma > 2 beta".into()));
    }
    if k == 0 {
        return Err(WalkError::Domain("chi ladder index k must be >= 1".into()));
    }
    Ok(chi(params) * (1.0 - (-params.alpha).powi(k as i32)))
}

fn check_nu(nu: f64, params: &ModelParams) -> Result<()> {
    let floor = 2.0_f64.max(1.0 + params.alpha);
    if !(nu > floor) || !nu.is_finite() {
        return Err(WalkError::Domain(format!(
            "nu must exceed max(2, 1 + alpha) = {floor}, got {nu}"
        )));
    }
    Ok(())
}

/// One step of the moment-exponent recursion: `1 + max(F(theta), G(theta))`
/// with `F(theta) = gamma/2 - beta + (nu - 1 - alpha) theta / nu` and
/// `G(theta) = (nu - 2) theta / nu`.
pub fn theta_next(theta: f64, nu: f64, params: &ModelParams) -> Result<f64> {
    check_nu(nu, params)?;
    Ok(theta_step(theta, nu, params))
}

#[inline]
fn theta_step(theta: f64, nu: f64, params: &ModelParams) -> f64 {
    let f = params.gamma / 2.0 - params.beta + (nu - 1.0 - params.alpha) / nu * theta;
    let g = (nu - 2.0) / nu * theta;
    1.0 + f.max(g)
}

/// Trace of the recursion started from `theta0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaIteration {
    pub nu: f64,
    pub sequence: Vec<f64>,
    /// Analytic fixed point `nu * chi`.
    pub limit: f64,
}

impl ThetaIteration {
    pub fn last(&self) -> f64 {
        *self.sequence.last().expect("sequence holds at least theta0")
    }

    pub fn iterations(&self) -> usize {
        self.sequence.len() - 1
    }
}

/// Iterate [`theta_next`] from `theta0 >= nu * chi` until within `tol` of
/// `nu * chi`.
pub fn theta_iterate(theta0: f64, nu: f64, params: &ModelParams, tol: f64, max_iter: usize) -> Result<ThetaIteration> {
    check_nu(nu, params)?;
    if 1.0 + params.gamma <= params.alpha + 2.0 * params.beta {
        return Err(WalkError::Domain(
            "theta iteration needs 1 + gamma > alpha + 2 beta".into(),
        ));
    }
    let limit = nu * chi(params);
    if !(theta0 >= limit) {
        return Err(WalkError::Domain(format!(
            "theta0 = {theta0} must be >= nu * chi = {limit}"
        )));
    }
    let mut sequence = vec![theta0];
    let mut theta = theta0;
    while (theta - limit).abs() > tol {
        if sequence.len() > max_iter {
            return Err(WalkError::NonConvergence {
                max_iter,
                last: theta,
                limit,
            });
        }
        theta = theta_step(theta, nu, params);
        sequence.push(theta);
    }
    Ok(ThetaIteration { nu, sequence, limit })
}

/// `C0' = 2^(gamma + 1 + alpha) (1 + B)^(1 + alpha) / rho
///        * max(2^(gamma / (1 + alpha)) + B, rho B^gamma)`.
///
/// `0^0` is taken as 1, so `B = gamma = 0` gives `rho B^gamma = rho`.
pub fn confinement_constant(params: &ModelParams) -> f64 {
    let ModelParams {
        alpha, gamma, rho, b, ..
    } = *params;
    let lead = 2.0_f64.powf(gamma + 1.0 + alpha) * (1.0 + b).powf(1.0 + alpha) / rho;
    let b_pow = if gamma == 0.0 { 1.0 } else { b.powf(gamma) };
    lead * (2.0_f64.powf(gamma / (1.0 + alpha)) + b).max(rho * b_pow)
}
