//! The barycentric excluded-volume walk `(W_n, G_n)`.
//!
//! `W` takes unit steps; `G_n` is the mean of `W_1..W_n`. At each step the
//! walker may not move into the cone with apex `W_n` spanned by the rays
//! towards `0` and towards `G_n` (angular span `2 beta_n`). The allowed arc is
//! sampled uniformly: `theta = (pi - beta_n) U` measured from the bisector
//! `v_n` of `W_n` and `T_n = W_n - G_n`. The symmetrized variant also excludes
//! the mirror image of that cone through the line `0 W_n`, so the allowed arc
//! is `|theta| <= pi - 2 beta_n` measured from `W_n / ||W_n||`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::drift_walk::{fit, fit_halves, OVERFLOW_LIMIT};
use crate::error::{Result, WalkError};
use crate::model::ModelKind;
use crate::rng::RngStream;
use crate::statistics::{FinalState, FitWindow, PathSummary, RunningMax};

/// Observables with `2 beta` this close to `pi/2` are flagged instead of
/// evaluating `tan(2 beta)`.
pub const TAN_GUARD: f64 = 1e-6;

/// Tolerance for the per-step unit-norm and excluded-cone checks.
pub const STEP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub e1: f64,
    pub e2: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { e1: 0.0, e2: 0.0 };
    pub const E1: Vec2 = Vec2 { e1: 1.0, e2: 0.0 };

    pub const fn new(e1: f64, e2: f64) -> Self {
        Self { e1, e2 }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.e1 * o.e1 + self.e2 * o.e2
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.e1.hypot(self.e2)
    }

    /// Rotation by `+pi/2`.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.e2, self.e1)
    }

    /// `self / ||self||`; the zero vector maps to itself.
    #[inline]
    pub fn unit(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            Vec2::ZERO
        }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.e1, self.e2]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.e1 + o.e1, self.e2 + o.e2)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.e1 - o.e1, self.e2 - o.e2)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.e1 * s, self.e2 * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.e1, -self.e2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarycentricVariant {
    Original,
    Symmetrized,
}

impl BarycentricVariant {
    pub fn model_kind(self) -> ModelKind {
        match self {
            BarycentricVariant::Original => ModelKind::Barycentric,
            BarycentricVariant::Symmetrized => ModelKind::BarycentricSym,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// `T = W - G`.
    pub t: Vec2,
    /// Unit bisector of `W^` and `T^`, or the reference axis `(1, 0)` when
    /// `||W|| ||T|| = 0`.
    pub v: Vec2,
    pub v_perp: Vec2,
    /// `W^`, or `(1, 0)` when `W = 0`.
    pub w_hat: Vec2,
    pub beta: f64,
    /// `W^ + T^ = 0`: `v` was set to `W^` rotated by `+pi/2` and the caller
    /// is expected to pick its sign.
    pub antipodal: bool,
}

pub fn geometry(w: Vec2, g: Vec2) -> Geometry {
    let t = w - g;
    let (wn, tn) = (w.norm(), t.norm());
    let w_hat = if wn > 0.0 { w * (1.0 / wn) } else { Vec2::E1 };
    if !(wn * tn > 0.0) {
        return Geometry {
            t,
            v: Vec2::E1,
            v_perp: Vec2::E1.perp(),
            w_hat,
            beta: 0.0,
            antipodal: false,
        };
    }
    let cos2b = (w.dot(t) / (wn * tn)).clamp(-1.0, 1.0);
    let beta = 0.5 * cos2b.acos();
    let bisector = w_hat + t * (1.0 / tn);
    let bn = bisector.norm();
    let (v, antipodal) = if bn > 0.0 {
        (bisector * (1.0 / bn), false)
    } else {
        (w_hat.perp(), true)
    };
    Geometry {
        t,
        v,
        v_perp: v.perp(),
        w_hat,
        beta,
        antipodal,
    }
}

/// Unit increment at angle `theta = (pi - beta) u` from `v` (original), or
/// `theta = (pi - 2 beta) u` from `w_hat` (symmetrized).
#[inline]
pub fn sample_increment(beta: f64, v: Vec2, v_perp: Vec2, u: f64, variant: BarycentricVariant, w_hat: Vec2) -> Vec2 {
    let (axis, axis_perp, half_arc) = match variant {
        BarycentricVariant::Original => (v, v_perp, PI - beta),
        BarycentricVariant::Symmetrized => (w_hat, w_hat.perp(), (PI - 2.0 * beta).max(0.0)),
    };
    let (s, c) = (half_arc * u).sin_cos();
    axis * c + axis_perp * s
}

/// `G_{n+1} = (n G_n + W_{n+1}) / (n + 1)`.
#[inline]
pub fn update_center(g: Vec2, n: u64, w_next: Vec2) -> Vec2 {
    let n = n as f64;
    (g * n + w_next) * (1.0 / (n + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarycentricState {
    pub n: u64,
    pub w: Vec2,
    pub g: Vec2,
    pub beta: f64,
}

impl BarycentricState {
    pub fn origin() -> Self {
        Self {
            n: 0,
            w: Vec2::ZERO,
            g: Vec2::ZERO,
            beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// `X = ||W||`.
    pub x: f64,
    /// `|Y| = ||W|| tan(2 beta)`, or `None` when `2 beta` is within
    /// [`TAN_GUARD`] of `pi/2`.
    pub abs_y: Option<f64>,
    pub beta: f64,
}

pub fn observables(state: &BarycentricState) -> Observables {
    let x = state.w.norm();
    let two_beta = 2.0 * state.beta;
    let abs_y = (two_beta < FRAC_PI_2 - TAN_GUARD).then(|| x * two_beta.tan());
    Observables {
        x,
        abs_y,
        beta: state.beta,
    }
}

/// Magnitude of `E(W_{n+1} - W_n | F_n)` for the implemented sampler:
/// `sin(beta) / (pi - beta)` along `v` (original) and
/// `sin(2 beta) / (pi - 2 beta)` along `W^` (symmetrized).
pub fn mean_drift(beta: f64, variant: BarycentricVariant) -> f64 {
    let half_arc = match variant {
        BarycentricVariant::Original => PI - beta,
        BarycentricVariant::Symmetrized => PI - 2.0 * beta,
    };
    if half_arc <= 0.0 {
        // Degenerate arc: the increment is the axis itself.
        1.0
    } else {
        half_arc.sin() / half_arc
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricStep {
    pub increment: Vec2,
    /// Geometry of the state the step was taken from.
    pub geometry: Geometry,
}

/// Step-by-step simulator with per-step invariant bookkeeping.
#[derive(Debug, Clone)]
pub struct BarycentricWalker {
    variant: BarycentricVariant,
    state: BarycentricState,
    geom: Geometry,
    max_step_norm_error: f64,
    cone_violations: u64,
    antipodal_fallbacks: u64,
}

impl BarycentricWalker {
    pub fn new(variant: BarycentricVariant) -> Self {
        let state = BarycentricState::origin();
        Self {
            variant,
            state,
            geom: geometry(state.w, state.g),
            max_step_norm_error: 0.0,
            cone_violations: 0,
            antipodal_fallbacks: 0,
        }
    }

    pub fn state(&self) -> BarycentricState {
        self.state
    }

    pub fn geometry(&self) -> Geometry {
        self.geom
    }

    pub fn max_step_norm_error(&self) -> f64 {
        self.max_step_norm_error
    }

    pub fn cone_violations(&self) -> u64 {
        self.cone_violations
    }

    pub fn antipodal_fallbacks(&self) -> u64 {
        self.antipodal_fallbacks
    }

    pub fn advance(&mut self, stream: &mut RngStream) -> Result<BarycentricStep> {
        let mut geom = self.geom;
        if geom.antipodal {
            self.antipodal_fallbacks += 1;
            if stream.uniform_unit() >= 0.5 {
                geom.v = -geom.v;
                geom.v_perp = -geom.v_perp;
            }
        }
        let u = stream.uniform_signed();
        let inc = sample_increment(geom.beta, geom.v, geom.v_perp, u, self.variant, geom.w_hat);

        let norm_err = (inc.norm() - 1.0).abs();
        if norm_err > self.max_step_norm_error {
            self.max_step_norm_error = norm_err;
        }
        let (axis, half_arc) = match self.variant {
            BarycentricVariant::Original => (geom.v, PI - geom.beta),
            BarycentricVariant::Symmetrized => (geom.w_hat, (PI - 2.0 * geom.beta).max(0.0)),
        };
        if inc.dot(axis) < half_arc.cos() - STEP_TOL {
            self.cone_violations += 1;
        }

        let w = self.state.w + inc;
        if !(w.norm() <= OVERFLOW_LIMIT) {
            return Err(WalkError::Overflow {
                n: self.state.n + 1,
                x: w.norm(),
            });
        }
        let g = update_center(self.state.g, self.state.n, w);
        self.geom = geometry(w, g);
        self.state = BarycentricState {
            n: self.state.n + 1,
            w,
            g,
            beta: self.geom.beta,
        };
        Ok(BarycentricStep {
            increment: inc,
            geometry: geom,
        })
    }
}

/// Checkpoint row (`n,wx,wy,gx,gy,beta,X,absY,absY_flag`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricRow {
    pub state: BarycentricState,
    pub obs: Observables,
}

pub const BARYCENTRIC_CSV_HEADER: &str = "n,wx,wy,gx,gy,beta,X,absY,absY_flag";

impl BarycentricRow {
    pub fn csv_line(&self) -> String {
        let s = &self.state;
        let (abs_y, flag) = match self.obs.abs_y {
            Some(v) => (v, 0),
            None => (f64::NAN, 1),
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            s.n, s.w.e1, s.w.e2, s.g.e1, s.g.e2, s.beta, self.obs.x, abs_y, flag
        )
    }
}

#[derive(Debug, Clone)]
pub struct BarycentricPath {
    pub rows: Vec<BarycentricRow>,
    pub summary: PathSummary,
}

/// Simulate from `W_0 = G_0 = 0`, one signed uniform per step (plus one
/// extra draw on the rare antipodal configuration).
pub fn simulate_barycentric_path(
    variant: BarycentricVariant,
    steps: u64,
    stream: &mut RngStream,
    checkpoints: &[u64],
    fit_window: FitWindow,
) -> Result<BarycentricPath> {
    if steps == 0 {
        return Err(WalkError::Config("steps must be >= 1".into()));
    }
    let mut walker = BarycentricWalker::new(variant);
    let mut max_abs_y = RunningMax::default();
    max_abs_y.push(0.0);
    let mut flagged = 0u64;

    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut xs = Vec::with_capacity(checkpoints.len());
    let mut ys = Vec::with_capacity(checkpoints.len());
    let mut max_ys = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().copied().filter(|&c| c >= 1 && c <= steps).peekable();

    for _ in 0..steps {
        walker.advance(stream)?;
        let s = walker.state();
        let obs = observables(&s);
        match obs.abs_y {
            Some(v) => {
                max_abs_y.push(v);
            }
            None => flagged += 1,
        }
        if next_cp.next_if_eq(&s.n).is_some() {
            rows.push(BarycentricRow { state: s, obs });
            xs.push(obs.x);
            ys.push(obs.abs_y.unwrap_or(f64::NAN));
            max_ys.push(max_abs_y.value());
        }
    }

    let cps: Vec<u64> = rows.iter().map(|r| r.state.n).collect();
    let end = walker.state();
    let summary = PathSummary {
        path_index: stream.path_index(),
        seed: stream.master_seed(),
        model: variant.model_kind(),
        params: None,
        steps,
        final_state: FinalState::Barycentric {
            n: end.n,
            w: end.w.to_array(),
            g: end.g.to_array(),
            beta: end.beta,
        },
        slope_x: fit(&cps, &xs, fit_window),
        slope_x_halves: fit_halves(&cps, &xs, fit_window),
        slope_max_y: fit(&cps, &max_ys, fit_window),
        slope_gamma_sum: None,
        slope_xi: None,
        max_zeta: None,
        zeta_bound: None,
        decomposition_residual: None,
        flagged_abs_y_count: flagged,
        checkpoint_abs_y: ys,
        checkpoints: cps,
        max_step_norm_error: Some(walker.max_step_norm_error()),
        cone_violations: walker.cone_violations(),
        antipodal_fallbacks: walker.antipodal_fallbacks(),
        final_direction: Some(end.w.unit().to_array()),
    };
    Ok(BarycentricPath { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn aligned_geometry() {
        let g = geometry(Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.0));
        assert_eq!(g.t, Vec2::new(1.0, 0.0));
        assert_eq!(g.beta, 0.0);
        assert_eq!(g.v, Vec2::new(1.0, 0.0));
        assert_eq!(g.v_perp, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn right_angle_geometry() {
        let g = geometry(Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0));
        assert_eq!(g.t, Vec2::new(0.0, -1.0));
        assert!((g.beta - FRAC_PI_4).abs() < 1e-15);
        assert!(close(g.v, Vec2::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn degenerate_geometry_uses_reference_axis() {
        let g = geometry(Vec2::ZERO, Vec2::ZERO);
        assert_eq!(g.beta, 0.0);
        assert_eq!(g.v, Vec2::E1);
        let at_first_step = geometry(Vec2::new(0.0, 1.0), Vec2::new(0.0, 1.0));
        assert_eq!(at_first_step.beta, 0.0);
        assert_eq!(at_first_step.v, Vec2::E1);
        assert_eq!(at_first_step.w_hat, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn antipodal_geometry_is_flagged() {
        // G beyond W on the same ray: T points back at the origin.
        let g = geometry(Vec2::new(1.0, 0.0), Vec2::new(3.0, 0.0));
        assert!(g.antipodal);
        assert!((g.beta - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(g.v, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn increment_examples() {
        let v = Vec2::new(0.6, 0.8);
        for beta in [0.0, 0.4, 1.2] {
            let inc = sample_increment(beta, v, v.perp(), 0.0, BarycentricVariant::Original, Vec2::E1);
            assert!(close(inc, v, 1e-15));
        }
        let inc = sample_increment(
            0.0,
            Vec2::E1,
            Vec2::E1.perp(),
            0.5,
            BarycentricVariant::Original,
            Vec2::E1,
        );
        assert!(close(inc, Vec2::new(0.0, 1.0), 1e-15));

        // u = +-1 lands on the boundary rays of the excluded cone.
        let g = geometry(Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0));
        for u in [-1.0, 1.0] {
            let inc = sample_increment(g.beta, g.v, g.v_perp, u, BarycentricVariant::Original, g.w_hat);
            let on_minus_w = close(inc, Vec2::new(-1.0, 0.0), 1e-12);
            let on_minus_t = close(inc, Vec2::new(0.0, 1.0), 1e-12);
            assert!(on_minus_w || on_minus_t, "{inc:?}");
        }
    }

    #[test]
    fn center_updates() {
        assert_eq!(
            update_center(Vec2::new(9.0, 9.0), 0, Vec2::new(3.0, 4.0)),
            Vec2::new(3.0, 4.0)
        );
        assert_eq!(
            update_center(Vec2::new(3.0, 4.0), 1, Vec2::new(1.0, 0.0)),
            Vec2::new(2.0, 2.0)
        );
        let c = Vec2::new(-1.5, 2.25);
        let mut g = Vec2::ZERO;
        for n in 0..1000 {
            g = update_center(g, n, c);
        }
        assert!(close(g, c, 1e-12));
    }

    #[test]
    fn observable_examples() {
        let flat = BarycentricState {
            n: 3,
            w: Vec2::new(5.0, 0.0),
            g: Vec2::new(2.0, 0.0),
            beta: 0.0,
        };
        assert_eq!(observables(&flat).abs_y, Some(0.0));
        let eighth = BarycentricState {
            beta: FRAC_PI_8,
            w: Vec2::new(0.0, 1.0),
            ..flat
        };
        assert!((observables(&eighth).abs_y.unwrap() - 1.0).abs() < 1e-15);
        let quarter = BarycentricState {
            beta: FRAC_PI_4,
            ..flat
        };
        assert_eq!(observables(&quarter).abs_y, None);
    }

    #[test]
    fn mean_drift_values() {
        assert!(mean_drift(0.0, BarycentricVariant::Original).abs() < 1e-15);
        assert!((mean_drift(FRAC_PI_4, BarycentricVariant::Symmetrized) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn mean_drift_matches_monte_carlo() {
        let beta = 0.3;
        let v = Vec2::new(0.0, 1.0);
        let mut rng = RngStream::new(77, 0);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let inc = sample_increment(
                beta,
                v,
                v.perp(),
                rng.uniform_signed(),
                BarycentricVariant::Original,
                Vec2::E1,
            );
            let along = inc.dot(v);
            s += along;
            s2 += along * along;
        }
        let mean = s / n as f64;
        let sd = (s2 / n as f64 - mean * mean).sqrt();
        let expected = mean_drift(beta, BarycentricVariant::Original);
        assert!(
            (mean - expected).abs() <= 3.0 * sd / (n as f64).sqrt(),
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn first_step_is_a_unit_step_from_origin() {
        for seed in 0..10 {
            let mut rng = RngStream::new(seed, 0);
            let p = simulate_barycentric_path(BarycentricVariant::Original, 1, &mut rng, &[1], FitWindow::new(1, 1))
                .unwrap();
            let s = p.rows[0].state;
            assert!((s.w.norm() - 1.0).abs() < 1e-15);
            assert_eq!(s.g, s.w);
        }
    }

    #[test]
    fn paths_are_deterministic() {
        let cps = crate::statistics::log_checkpoints(3000, 50);
        let run = || {
            let mut rng = RngStream::new(1, 2);
            simulate_barycentric_path(
                BarycentricVariant::Symmetrized,
                3000,
                &mut rng,
                &cps,
                FitWindow::new(10, 3000),
            )
            .unwrap()
        };
        assert_eq!(run().rows, run().rows);
    }

    #[test]
    fn center_of_mass_matches_direct_sum() {
        for variant in [BarycentricVariant::Original, BarycentricVariant::Symmetrized] {
            let mut walker = BarycentricWalker::new(variant);
            let mut rng = RngStream::new(21, 0);
            let mut sum = Vec2::ZERO;
            for n in 1..=10_000u64 {
                walker.advance(&mut rng).unwrap();
                let s = walker.state();
                sum = sum + s.w;
                let direct = sum * (1.0 / n as f64);
                assert!(close(s.g, direct, 1e-9), "n={n}");
                assert!((0.0..=FRAC_PI_2).contains(&s.beta));
            }
            assert_eq!(walker.cone_violations(), 0);
            assert!(walker.max_step_norm_error() <= STEP_TOL);
        }
    }

    proptest! {
        #[test]
        fn increments_are_unit_and_outside_cone(
            w in (-50.0f64..50.0, -50.0f64..50.0),
            g in (-50.0f64..50.0, -50.0f64..50.0),
            u in -1.0f64..=1.0,
        ) {
            let geo = geometry(Vec2::new(w.0, w.1), Vec2::new(g.0, g.1));
            prop_assert!((0.0..=FRAC_PI_2).contains(&geo.beta));
            for variant in [BarycentricVariant::Original, BarycentricVariant::Symmetrized] {
                let inc = sample_increment(geo.beta, geo.v, geo.v_perp, u, variant, geo.w_hat);
                prop_assert!((inc.norm() - 1.0).abs() <= STEP_TOL);
            }
            let inc = sample_increment(geo.beta, geo.v, geo.v_perp, u, BarycentricVariant::Original, geo.w_hat);
            prop_assert!(inc.dot(geo.v) >= (PI - geo.beta).cos() - STEP_TOL);
        }

        #[test]
        fn opposite_draws_mirror_across_bisector(
            w in (-50.0f64..50.0, -50.0f64..50.0),
            g in (-50.0f64..50.0, -50.0f64..50.0),
            u in -1.0f64..=1.0,
        ) {
            let geo = geometry(Vec2::new(w.0, w.1), Vec2::new(g.0, g.1));
            let a = sample_increment(geo.beta, geo.v, geo.v_perp, u, BarycentricVariant::Original, geo.w_hat);
            let b = sample_increment(geo.beta, geo.v, geo.v_perp, -u, BarycentricVariant::Original, geo.w_hat);
            prop_assert!((a.dot(geo.v) - b.dot(geo.v)).abs() <= 1e-15);
            prop_assert!((a.dot(geo.v_perp) + b.dot(geo.v_perp)).abs() <= 1e-15);
        }
    }
}
