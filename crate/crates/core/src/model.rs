//! Preference models and the receiver's optimality primitives.
//!
//! A model bundles the sender's utility `V(a,θ)`, its action derivative
//! `v = ∂V/∂a`, the receiver's marginal utility `u(a,θ)`, and `u_a = ∂u/∂a`,
//! together with the rectangle on which they are evaluable. Closed-form
//! families cover the cases used throughout; anything else goes through
//! [`PreferenceModel::custom`].

use std::sync::Arc;

use crate::error::{Bound, Error, Result};
use crate::prior::Posterior;

pub type Bivariate = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Family tag. Drives special-case routing (closed-form best responses,
/// applicability of structure operations).
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// u = θ − a, V depends on a only.
    Simple,
    /// u = θ − a, V arbitrary.
    SimpleReceiver,
    /// V depends on a only, u supermodular.
    SimpleSender,
    /// Simple-sender subcase u(a,θ) = T(θ−a), V = V(a).
    TranslationInvariant,
    /// V = a/θ, u = θ − (1+θ²)a on [lo, hi].
    Contest { lo: f64, hi: f64 },
    /// u = 1{θ ≥ a} − κ. Discontinuous; all root-finding is replaced by
    /// the closed-form sender-favoring tie-break.
    Quantile { kappa: f64 },
    Custom,
}

pub struct PreferenceModel {
    pub family: Family,
    pub a_range: (f64, f64),
    pub theta_range: (f64, f64),
    big_v: Bivariate,
    v: Bivariate,
    u: Bivariate,
    u_a: Bivariate,
    // Optional analytic second-order derivatives; finite differences otherwise.
    v_theta: Option<Bivariate>,
    u_theta: Option<Bivariate>,
    u_a_theta: Option<Bivariate>,
    v_a: Option<Bivariate>,
    u_aa: Option<Bivariate>,
    pub has_analytic_second_order: bool,
}

impl std::fmt::Debug for PreferenceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PreferenceModel")
            .field("family", &self.family)
            .field("a_range", &self.a_range)
            .field("theta_range", &self.theta_range)
            .field("has_analytic_second_order", &self.has_analytic_second_order)
            .finish()
    }
}

const FD_STEP_FRAC: f64 = 1e-5;

impl PreferenceModel {
    pub fn big_v(&self, a: f64, theta: f64) -> f64 {
        (self.big_v)(a, theta)
    }
    pub fn v(&self, a: f64, theta: f64) -> f64 {
        (self.v)(a, theta)
    }
    pub fn u(&self, a: f64, theta: f64) -> f64 {
        (self.u)(a, theta)
    }
    pub fn u_a(&self, a: f64, theta: f64) -> f64 {
        (self.u_a)(a, theta)
    }

    fn fd_step_theta(&self) -> f64 {
        FD_STEP_FRAC * (self.theta_range.1 - self.theta_range.0).max(1e-6)
    }
    fn fd_step_a(&self) -> f64 {
        FD_STEP_FRAC * (self.a_range.1 - self.a_range.0).max(1e-6)
    }

    pub fn v_theta(&self, a: f64, theta: f64) -> f64 {
        match &self.v_theta {
            Some(g) => g(a, theta),
            None => {
                let h = self.fd_step_theta();
                (self.v(a, theta + h) - self.v(a, theta - h)) / (2.0 * h)
            }
        }
    }
    pub fn u_theta(&self, a: f64, theta: f64) -> f64 {
        match &self.u_theta {
            Some(g) => g(a, theta),
            None => {
                let h = self.fd_step_theta();
                (self.u(a, theta + h) - self.u(a, theta - h)) / (2.0 * h)
            }
        }
    }
    pub fn u_a_theta(&self, a: f64, theta: f64) -> f64 {
        match &self.u_a_theta {
            Some(g) => g(a, theta),
            None => {
                let h = self.fd_step_theta();
                (self.u_a(a, theta + h) - self.u_a(a, theta - h)) / (2.0 * h)
            }
        }
    }
    pub fn v_a(&self, a: f64, theta: f64) -> f64 {
        match &self.v_a {
            Some(g) => g(a, theta),
            None => {
                let h = self.fd_step_a();
                (self.v(a + h, theta) - self.v(a - h, theta)) / (2.0 * h)
            }
        }
    }
    pub fn u_aa(&self, a: f64, theta: f64) -> f64 {
        match &self.u_aa {
            Some(g) => g(a, theta),
            None => {
                let h = self.fd_step_a();
                (self.u_a(a + h, theta) - self.u_a(a - h, theta)) / (2.0 * h)
            }
        }
    }

    pub fn is_mean_type(&self) -> bool {
        matches!(self.family, Family::Simple | Family::SimpleReceiver)
    }

    /// Simple case: u = θ − a, V = V(a).
    pub fn simple(
        big_v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let big_v = Arc::new(big_v);
        let v = Arc::new(v);
        Self {
            family: Family::Simple,
            a_range: (0.0, 1.0),
            theta_range: (0.0, 1.0),
            big_v: Arc::new(move |a, _| big_v(a)),
            v: Arc::new(move |a, _| v(a)),
            u: Arc::new(|a, th| th - a),
            u_a: Arc::new(|_, _| -1.0),
            v_theta: Some(Arc::new(|_, _| 0.0)),
            u_theta: Some(Arc::new(|_, _| 1.0)),
            u_a_theta: Some(Arc::new(|_, _| 0.0)),
            v_a: None,
            u_aa: Some(Arc::new(|_, _| 0.0)),
            has_analytic_second_order: false,
        }
    }

    /// Simple receiver: u = θ − a, V(a,θ) arbitrary.
    pub fn simple_receiver(
        big_v: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        v: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            family: Family::SimpleReceiver,
            a_range: (0.0, 1.0),
            theta_range: (0.0, 1.0),
            big_v: Arc::new(big_v),
            v: Arc::new(v),
            u: Arc::new(|a, th| th - a),
            u_a: Arc::new(|_, _| -1.0),
            v_theta: None,
            u_theta: Some(Arc::new(|_, _| 1.0)),
            u_a_theta: Some(Arc::new(|_, _| 0.0)),
            v_a: None,
            u_aa: Some(Arc::new(|_, _| 0.0)),
            has_analytic_second_order: false,
        }
    }

    /// Simple sender: V = V(a) with v > 0, u supermodular but otherwise
    /// caller-supplied.
    pub fn simple_sender(
        big_v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        u: Bivariate,
        u_a: Bivariate,
    ) -> Self {
        let big_v = Arc::new(big_v);
        let v = Arc::new(v);
        Self {
            family: Family::SimpleSender,
            a_range: (0.0, 1.0),
            theta_range: (0.0, 1.0),
            big_v: Arc::new(move |a, _| big_v(a)),
            v: Arc::new(move |a, _| v(a)),
            u,
            u_a,
            v_theta: Some(Arc::new(|_, _| 0.0)),
            u_theta: None,
            u_a_theta: None,
            v_a: None,
            u_aa: None,
            has_analytic_second_order: false,
        }
    }

    /// Translation-invariant simple sender: u(a,θ) = T(θ−a), V = V(a).
    pub fn translation_invariant(
        big_v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let big_v = Arc::new(big_v);
        let v = Arc::new(v);
        let t_fn = Arc::new(t_fn);
        let t_prime = Arc::new(t_prime);
        let t1 = t_fn.clone();
        let tp1 = t_prime.clone();
        let tp2 = t_prime;
        Self {
            family: Family::TranslationInvariant,
            a_range: (0.0, 1.0),
            theta_range: (0.0, 1.0),
            big_v: Arc::new(move |a, _| big_v(a)),
            v: Arc::new(move |a, _| v(a)),
            u: Arc::new(move |a, th| t1(th - a)),
            u_a: Arc::new(move |a, th| -tp1(th - a)),
            v_theta: Some(Arc::new(|_, _| 0.0)),
            u_theta: Some(Arc::new(move |a, th| tp2(th - a))),
            u_a_theta: None,
            v_a: None,
            u_aa: None,
            has_analytic_second_order: false,
        }
    }

    /// Contest model: V = a/θ, u = θ − (1+θ²)a, states in [lo, hi].
    /// The action interval is the normalized [min a*(δθ), max a*(δθ)].
    pub fn contest(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Invalid(format!(
                "contest support must satisfy 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        // a*(δθ) = θ/(1+θ²), increasing below 1 and decreasing above.
        let astar = |th: f64| th / (1.0 + th * th);
        let mut a_lo = astar(lo).min(astar(hi));
        let mut a_hi = astar(lo).max(astar(hi));
        if lo < 1.0 && hi > 1.0 {
            a_hi = 0.5;
            a_lo = astar(lo).min(astar(hi));
        }
        Ok(Self {
            family: Family::Contest { lo, hi },
            a_range: (a_lo, a_hi),
            theta_range: (lo, hi),
            big_v: Arc::new(|a, th| a / th),
            v: Arc::new(|_, th| 1.0 / th),
            u: Arc::new(|a, th| th - (1.0 + th * th) * a),
            u_a: Arc::new(|_, th| -(1.0 + th * th)),
            v_theta: Some(Arc::new(|_, th| -1.0 / (th * th))),
            u_theta: Some(Arc::new(|a, th| 1.0 - 2.0 * th * a)),
            u_a_theta: Some(Arc::new(|_, th| -2.0 * th)),
            v_a: Some(Arc::new(|_, _| 0.0)),
            u_aa: Some(Arc::new(|_, _| 0.0)),
            has_analytic_second_order: true,
        })
    }

    /// Quantile model: u = 1{θ ≥ a} − κ, V = V(a).
    pub fn quantile(
        kappa: f64,
        big_v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Invalid(format!("kappa must be in (0,1), got {kappa}")));
        }
        let big_v = Arc::new(big_v);
        let v = Arc::new(v);
        Ok(Self {
            family: Family::Quantile { kappa },
            a_range: (0.0, 1.0),
            theta_range: (0.0, 1.0),
            big_v: Arc::new(move |a, _| big_v(a)),
            v: Arc::new(move |a, _| v(a)),
            u: Arc::new(move |a, th| if th >= a { 1.0 - kappa } else { -kappa }),
            u_a: Arc::new(|_, _| 0.0),
            v_theta: Some(Arc::new(|_, _| 0.0)),
            u_theta: None,
            u_a_theta: None,
            v_a: None,
            u_aa: None,
            has_analytic_second_order: false,
        })
    }

    /// Fully custom model from closures.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        big_v: Bivariate,
        v: Bivariate,
        u: Bivariate,
        u_a: Bivariate,
        a_range: (f64, f64),
        theta_range: (f64, f64),
    ) -> Self {
        Self {
            family: Family::Custom,
            a_range,
            theta_range,
            big_v,
            v,
            u,
            u_a,
            v_theta: None,
            u_theta: None,
            u_a_theta: None,
            v_a: None,
            u_aa: None,
            has_analytic_second_order: false,
        }
    }

    pub fn with_ranges(mut self, a_range: (f64, f64), theta_range: (f64, f64)) -> Self {
        self.a_range = a_range;
        self.theta_range = theta_range;
        self
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_second_order(
        mut self,
        v_theta: Bivariate,
        u_theta: Bivariate,
        u_a_theta: Bivariate,
        v_a: Bivariate,
        u_aa: Bivariate,
    ) -> Self {
        self.v_theta = Some(v_theta);
        self.u_theta = Some(u_theta);
        self.u_a_theta = Some(u_a_theta);
        self.v_a = Some(v_a);
        self.u_aa = Some(u_aa);
        self.has_analytic_second_order = true;
        self
    }
}

/// Bisection interval-width cap, relative to the span.
const BISECT_WIDTH: f64 = 1e-12;
const BISECT_MAX_ITERS: usize = 200;

fn bisect(mut lo: f64, mut hi: f64, mut f_lo: f64, f: impl Fn(f64) -> f64) -> f64 {
    let width_cap = BISECT_WIDTH * (hi - lo).abs().max(1.0);
    for _ in 0..BISECT_MAX_ITERS {
        if (hi - lo).abs() <= width_cap {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The unique state θ*(a) with u(a, θ*(a)) = 0, by bisection.
///
/// Handles both crossing orientations (u rising or falling in θ); errors
/// with [`Error::NoRoot`] when u(a,·) has constant sign on the interval.
/// The quantile family routes to its closed form θ*(a) = a.
pub fn theta_star(model: &PreferenceModel, a: f64) -> Result<f64> {
    if let Family::Quantile { .. } = model.family {
        return Ok(a);
    }
    let (lo, hi) = model.theta_range;
    let f_lo = model.u(a, lo);
    let f_hi = model.u(a, hi);
    let tol = 1e-10;
    if f_lo.abs() <= tol && f_lo.abs() <= f_hi.abs() {
        return Ok(lo);
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot { a });
    }
    Ok(bisect(lo, hi, f_lo, |th| model.u(a, th)))
}

/// The receiver's optimal action at posterior μ, from the first-order
/// condition ∫ u(a,θ) dμ = 0.
///
/// Mean-type families return the posterior mean directly; the quantile
/// family uses the sender-favoring tie-break a*(μ) = max{a : ∫u(a,θ)dμ ≥ 0}.
pub fn receiver_best_response(model: &PreferenceModel, mu: &Posterior) -> Result<f64> {
    let (a_lo, a_hi) = model.a_range;
    match model.family {
        Family::Simple | Family::SimpleReceiver => {
            let mean = mu.mean();
            if mean < a_lo - 1e-12 {
                return Err(Error::BoundaryOptimum(Bound::Lower));
            }
            if mean > a_hi + 1e-12 {
                return Err(Error::BoundaryOptimum(Bound::Upper));
            }
            Ok(mean.clamp(a_lo, a_hi))
        }
        Family::Quantile { kappa } => {
            // Largest a such that mass at or above a is at least κ; attained
            // at a support point (or the top of the action interval).
            let mut best = None;
            for &(th, _) in mu.points() {
                let tail: f64 = mu
                    .points()
                    .iter()
                    .filter(|&&(t, _)| t >= th)
                    .map(|&(_, w)| w)
                    .sum();
                if tail >= kappa - 1e-12 {
                    best = Some(th);
                }
            }
            best.ok_or(Error::BoundaryOptimum(Bound::Lower))
        }
        _ => {
            let g = |a: f64| -> f64 { mu.points().iter().map(|&(th, w)| w * model.u(a, th)).sum() };
            let g_lo = g(a_lo);
            let g_hi = g(a_hi);
            let tol = 1e-10;
            if g_lo.abs() <= tol {
                return Ok(a_lo);
            }
            if g_hi.abs() <= tol {
                return Ok(a_hi);
            }
            if g_lo < 0.0 && g_hi < 0.0 {
                return Err(Error::BoundaryOptimum(Bound::Lower));
            }
            if g_lo > 0.0 && g_hi > 0.0 {
                return Err(Error::BoundaryOptimum(Bound::Upper));
            }
            Ok(bisect(a_lo, a_hi, g_lo, g))
        }
    }
}

/// Report from the aggregate quasi-concavity grid check.
#[derive(Debug, Clone)]
pub struct QuasiConcavityReport {
    pub pass: bool,
    /// (a, θ, θ') of the first violating triple; θ' = θ for the
    /// root-slope condition.
    pub first_violation: Option<(f64, f64, f64)>,
}

/// Grid check of the signed-ratio characterization of strict aggregate
/// quasi-concavity: u(a,θ)=0 ⇒ u_a(a,θ)<0, and
/// u(a,θ)<0<u(a,θ') ⇒ u(a,θ')u_a(a,θ) − u(a,θ)u_a(a,θ') < 0.
pub fn check_aggregate_quasiconcavity(
    model: &PreferenceModel,
    a_grid: &[f64],
    theta_grid: &[f64],
) -> QuasiConcavityReport {
    let mut max_u: f64 = 0.0;
    let mut uvals = vec![vec![0.0; theta_grid.len()]; a_grid.len()];
    for (i, &a) in a_grid.iter().enumerate() {
        for (j, &th) in theta_grid.iter().enumerate() {
            let u = model.u(a, th);
            uvals[i][j] = u;
            max_u = max_u.max(u.abs());
        }
    }
    let band = 1e-8 * max_u.max(1.0);
    for (i, &a) in a_grid.iter().enumerate() {
        for (j, &th) in theta_grid.iter().enumerate() {
            if uvals[i][j].abs() <= band && model.u_a(a, th) >= 0.0 {
                return QuasiConcavityReport {
                    pass: false,
                    first_violation: Some((a, th, th)),
                };
            }
        }
        for (j, &th) in theta_grid.iter().enumerate() {
            if uvals[i][j] >= -band {
                continue;
            }
            for (k, &th2) in theta_grid.iter().enumerate() {
                if uvals[i][k] <= band {
                    continue;
                }
                let expr = uvals[i][k] * model.u_a(a, th) - uvals[i][j] * model.u_a(a, th2);
                if expr >= 0.0 {
                    return QuasiConcavityReport {
                        pass: false,
                        first_violation: Some((a, th, th2)),
                    };
                }
            }
        }
    }
    QuasiConcavityReport {
        pass: true,
        first_violation: None,
    }
}

#[derive(Debug, Clone)]
pub struct SingleCrossingReport {
    pub pass: bool,
    /// Witness (a, θ, θ') with u(a,θ) = 0 (or > 0) but u(a,θ') not
    /// strictly positive (or negative) for θ' > θ.
    pub witness: Option<(f64, f64, f64)>,
}

/// Grid check of strict single-crossing of u in θ: u(a,θ)=0 ⇒ u(a,θ')>0
/// for θ' > θ, and no sign change from + to −.
pub fn check_strict_single_crossing(
    model: &PreferenceModel,
    a_grid: &[f64],
    theta_grid: &[f64],
) -> SingleCrossingReport {
    let mut max_u: f64 = 0.0;
    let mut uvals = vec![vec![0.0; theta_grid.len()]; a_grid.len()];
    for (i, &a) in a_grid.iter().enumerate() {
        for (j, &th) in theta_grid.iter().enumerate() {
            let u = model.u(a, th);
            uvals[i][j] = u;
            max_u = max_u.max(u.abs());
        }
    }
    let band = 1e-8 * max_u.max(1.0);
    for (i, &a) in a_grid.iter().enumerate() {
        for j in 0..theta_grid.len() {
            let uj = uvals[i][j];
            for k in (j + 1)..theta_grid.len() {
                let uk = uvals[i][k];
                let zero_then_flat = uj.abs() <= band && uk <= band;
                let downward = uj > band && uk < -band;
                if zero_then_flat || downward {
                    return SingleCrossingReport {
                        pass: false,
                        witness: Some((a, theta_grid[j], theta_grid[k])),
                    };
                }
            }
        }
    }
    SingleCrossingReport {
        pass: true,
        witness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::Posterior;
    use approx::assert_abs_diff_eq;

    fn simple_receiver_identity() -> PreferenceModel {
        PreferenceModel::simple_receiver(|a, _| a, |_, _| 1.0)
    }

    #[test]
    fn theta_star_identity_case() {
        let m = simple_receiver_identity();
        assert_abs_diff_eq!(theta_star(&m, 0.37).unwrap(), 0.37, epsilon = 1e-12);
    }

    #[test]
    fn theta_star_contest() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let th = theta_star(&m, 0.4).unwrap();
        assert_abs_diff_eq!(th, 0.5, epsilon = 1e-10);
        assert!(m.u(0.4, th).abs() <= 1e-10);
    }

    #[test]
    fn theta_star_rs_identity() {
        let e = std::f64::consts::E;
        let m = PreferenceModel::simple_receiver(|a, th| a / th, |_, th| 1.0 / th)
            .with_ranges((1.0 / e, e), (1.0 / e, e));
        assert_abs_diff_eq!(theta_star(&m, 1.0).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn theta_star_monotone_and_small_residual() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..50 {
            let a = m.a_range.0 + (m.a_range.1 - m.a_range.0) * k as f64 / 49.0;
            let th = theta_star(&m, a).unwrap();
            assert!(m.u(a, th).abs() <= 1e-10);
            assert!(th >= prev - 1e-12);
            prev = th;
        }
    }

    #[test]
    fn theta_star_no_root() {
        // u = θ + 1 on [0,1]: strictly positive.
        let m = PreferenceModel::custom(
            Arc::new(|a, _| a),
            Arc::new(|_, _| 1.0),
            Arc::new(|_, th| th + 1.0),
            Arc::new(|_, _| 0.0),
            (0.0, 1.0),
            (0.0, 1.0),
        );
        assert!(matches!(theta_star(&m, 0.5), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn best_response_simple_is_mean() {
        let m = PreferenceModel::simple(|a| a * a, |a| 2.0 * a);
        let mu = Posterior::new(vec![(0.2, 0.5), (0.8, 0.5)]).unwrap();
        assert_abs_diff_eq!(receiver_best_response(&m, &mu).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn best_response_contest_closed_form() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let mu = Posterior::new(vec![(0.2, 0.5), (0.4, 0.5)]).unwrap();
        let a = receiver_best_response(&m, &mu).unwrap();
        assert_abs_diff_eq!(a, 0.3 / 1.1, epsilon = 1e-10);
    }

    #[test]
    fn best_response_quantile_tie_break() {
        let m = PreferenceModel::quantile(0.5, |a| a, |_| 1.0).unwrap();
        let mu = Posterior::new(vec![(0.3, 0.4), (0.7, 0.6)]).unwrap();
        assert_abs_diff_eq!(receiver_best_response(&m, &mu).unwrap(), 0.7, epsilon = 0.0);
    }

    #[test]
    fn best_response_point_mass_inverts_theta_star() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let mu = Posterior::new(vec![(0.5, 1.0)]).unwrap();
        let a = receiver_best_response(&m, &mu).unwrap();
        assert!(m.u(a, 0.5).abs() <= 1e-10);
    }

    #[test]
    fn quasiconcavity_simple_passes() {
        let m = simple_receiver_identity();
        let grid: Vec<f64> = (0..21).map(|k| k as f64 / 20.0).collect();
        assert!(check_aggregate_quasiconcavity(&m, &grid, &grid).pass);
    }

    #[test]
    fn quasiconcavity_contest_passes() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let a_grid: Vec<f64> = (0..26).map(|k| 0.5 * k as f64 / 25.0).collect();
        let th_grid: Vec<f64> = (0..26).map(|k| 0.2 + 0.7 * k as f64 / 25.0).collect();
        assert!(check_aggregate_quasiconcavity(&m, &a_grid, &th_grid).pass);
    }

    #[test]
    fn single_crossing_contest_below_one_passes() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let a_grid: Vec<f64> = (0..26).map(|k| 0.19 + (0.5 - 0.19) * k as f64 / 25.0).collect();
        let th_grid: Vec<f64> = (0..26).map(|k| 0.2 + 0.7 * k as f64 / 25.0).collect();
        assert!(check_strict_single_crossing(&m, &a_grid, &th_grid).pass);
    }
}
