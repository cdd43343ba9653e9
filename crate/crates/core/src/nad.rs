//! Negative assortative disclosure as a two-point boundary-value problem.
//!
//! The pooled-pair functions t1, t2 satisfy a 2×2 linear ODE system: the
//! differentiated obedience balance u(a,t1)f(t1)t1' = u(a,t2)f(t2)t2',
//! and consistency of the closed-form multiplier q(a, t1(a), t2(a)) with
//! its own derivative. Shooting integrates backward from the wide end,
//! where the boundary values are fully known, so the degenerate t1 = t2
//! corner is only entered at termination.

use serde::Serialize;

use crate::dual::q_closed_form;
use crate::error::{Error, Result};
use crate::model::{receiver_best_response, theta_star, Family, PreferenceModel};
use crate::prior::{Posterior, Prior};
use crate::problem::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Dipped,
    Peaked,
}

#[derive(Debug, Clone)]
pub struct NadSolution {
    pub orientation: Orientation,
    pub a_lo: f64,
    pub a_hi: f64,
    /// Ascending action mesh from a_lo to a_hi.
    pub mesh: Vec<f64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub q: Vec<f64>,
    pub h: f64,
    /// |t1 − θ*| at the degenerate end of the final shot.
    pub matching_residual: f64,
}

impl NadSolution {
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "a,t1,t2,q")?;
        for i in 0..self.mesh.len() {
            writeln!(w, "{},{},{},{}", self.mesh[i], self.t1[i], self.t2[i], self.q[i])?;
        }
        Ok(())
    }

    fn wide_end(&self) -> usize {
        match self.orientation {
            Orientation::Dipped => self.mesh.len() - 1,
            Orientation::Peaked => 0,
        }
    }

    fn degenerate_end(&self) -> usize {
        match self.orientation {
            Orientation::Dipped => 0,
            Orientation::Peaked => self.mesh.len() - 1,
        }
    }
}

/// Slopes (t1', t2') of the pooled-pair system at (a, t1, t2).
pub fn nad_rhs(
    model: &PreferenceModel,
    prior: &Prior,
    a: f64,
    t1: f64,
    t2: f64,
) -> Result<(f64, f64)> {
    // Intermediate RK stages may poke marginally outside the support;
    // evaluate the density at the clamped state.
    let (s_lo, s_hi) = prior.support();
    let f1 = prior.pdf(t1.clamp(s_lo, s_hi))?;
    let f2 = prior.pdf(t2.clamp(s_lo, s_hi))?;
    if f1 <= 0.0 || f2 <= 0.0 {
        return Err(Error::Invalid(format!(
            "density vanishes at a pooled state (f({t1}) = {f1}, f({t2}) = {f2})"
        )));
    }
    let (_, qp_closed) = q_closed_form(model, a, t1, t2)?;
    let (dpsi_da, dpsi_dt1, dpsi_dt2) = psi_partials(model, a, t1, t2)?;
    let c1 = model.u(a, t1) * f1;
    let c2 = model.u(a, t2) * f2;
    let rhs2 = qp_closed - dpsi_da;
    let det = dpsi_dt2 * c1 + dpsi_dt1 * c2;
    let scale = (dpsi_dt1.abs() + dpsi_dt2.abs()) * (c1.abs() + c2.abs());
    if det.abs() < 1e-12 * scale.max(1e-12) {
        return Err(Error::SingularSystem { a, det });
    }
    Ok((rhs2 * c2 / det, rhs2 * c1 / det))
}

/// Partials of the closed-form multiplier Ψ(a, t1, t2): analytic assembly
/// when the model carries second-order derivatives, central differences
/// with step 1e−6·span otherwise.
fn psi_partials(model: &PreferenceModel, a: f64, t1: f64, t2: f64) -> Result<(f64, f64, f64)> {
    if model.has_analytic_second_order {
        let v1 = model.v(a, t1);
        let v2 = model.v(a, t2);
        let u1 = model.u(a, t1);
        let u2 = model.u(a, t2);
        let ua1 = model.u_a(a, t1);
        let ua2 = model.u_a(a, t2);
        let n = v1 * u2 - v2 * u1;
        let d = u1 * ua2 - u2 * ua1;
        if d == 0.0 {
            return Err(Error::SingularSystem { a, det: d });
        }
        let (vt1, vt2) = (model.v_theta(a, t1), model.v_theta(a, t2));
        let (ut1, ut2) = (model.u_theta(a, t1), model.u_theta(a, t2));
        let (uat1, uat2) = (model.u_a_theta(a, t1), model.u_a_theta(a, t2));
        let (va1, va2) = (model.v_a(a, t1), model.v_a(a, t2));
        let (uaa1, uaa2) = (model.u_aa(a, t1), model.u_aa(a, t2));
        let dn_dt1 = vt1 * u2 - v2 * ut1;
        let dd_dt1 = ut1 * ua2 - u2 * uat1;
        let dn_dt2 = v1 * ut2 - vt2 * u1;
        let dd_dt2 = u1 * uat2 - ut2 * ua1;
        let dn_da = va1 * u2 + v1 * ua2 - va2 * u1 - v2 * ua1;
        let dd_da = u1 * uaa2 - u2 * uaa1;
        let quot = |dn: f64, dd: f64| (dn * d - n * dd) / (d * d);
        Ok((quot(dn_da, dd_da), quot(dn_dt1, dd_dt1), quot(dn_dt2, dd_dt2)))
    } else {
        let span = (model.theta_range.1 - model.theta_range.0).max(1e-6);
        let h = 1e-6 * span;
        let psi = |a: f64, t1: f64, t2: f64| -> Result<f64> {
            Ok(q_closed_form(model, a, t1, t2)?.0)
        };
        let da = (psi(a + h, t1, t2)? - psi(a - h, t1, t2)?) / (2.0 * h);
        let dt1 = (psi(a, t1 + h, t2)? - psi(a, t1 - h, t2)?) / (2.0 * h);
        let dt2 = (psi(a, t1, t2 + h)? - psi(a, t1, t2 - h)?) / (2.0 * h);
        Ok((da, dt1, dt2))
    }
}

const DEFAULT_MESH_STEPS: usize = 2000;
const DELTA_STOP: f64 = 1e-4;

struct Shot {
    /// Samples in integration order (from the wide end inward).
    a: Vec<f64>,
    t1: Vec<f64>,
    t2: Vec<f64>,
    /// θ* matching residual at the stop point.
    residual: f64,
    /// Extrapolated degenerate action.
    a_meet: f64,
}

fn integrate(
    model: &PreferenceModel,
    prior: &Prior,
    a_start: f64,
    direction: f64,
    h: f64,
    max_steps: usize,
    record: bool,
) -> Result<Shot> {
    let (th_min, th_max) = prior.support();
    let mut a = a_start;
    let mut t1 = th_min;
    let mut t2 = th_max;
    let mut samples_a = Vec::new();
    let mut samples_t1 = Vec::new();
    let mut samples_t2 = Vec::new();
    let mut last_slopes = (0.0, 0.0);
    let mut stopped = false;
    let mut inner_guard = 0usize;
    'outer: for _ in 0..max_steps {
        if record {
            samples_a.push(a);
            samples_t1.push(t1);
            samples_t2.push(t2);
        }
        if stopped || t2 - t1 <= DELTA_STOP {
            break;
        }
        // The pair gap closes like a square root at the degenerate end;
        // sub-step so no internal step moves the gap by more than 5%.
        let mut remaining = h;
        while remaining > 0.0 {
            inner_guard += 1;
            if inner_guard > 64 * max_steps {
                break 'outer;
            }
            let rk = |a: f64, t1: f64, t2: f64| nad_rhs(model, prior, a, t1, t2);
            let k1 = match rk(a, t1, t2) {
                Ok(k) => k,
                Err(Error::SingularSystem { .. }) => {
                    stopped = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let gap = t2 - t1;
            let gdot = (k1.1 - k1.0).abs();
            let da = if gdot > 0.0 {
                remaining.min(0.05 * gap / gdot)
            } else {
                remaining
            };
            let step = direction * da;
            let stage = |a2: f64, t1s: f64, t2s: f64| rk(a2, t1s, t2s);
            let k2 = match stage(a + 0.5 * step, t1 + 0.5 * step * k1.0, t2 + 0.5 * step * k1.1)
            {
                Ok(k) => k,
                Err(Error::SingularSystem { .. }) => {
                    stopped = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let k3 = match stage(a + 0.5 * step, t1 + 0.5 * step * k2.0, t2 + 0.5 * step * k2.1)
            {
                Ok(k) => k,
                Err(Error::SingularSystem { .. }) => {
                    stopped = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let k4 = match stage(a + step, t1 + step * k3.0, t2 + step * k3.1) {
                Ok(k) => k,
                Err(Error::SingularSystem { .. }) => {
                    stopped = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let d1 = (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) / 6.0;
            let d2 = (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) / 6.0;
            last_slopes = (d1, d2);
            let n_t1 = t1 + step * d1;
            let n_t2 = t2 + step * d2;
            if n_t2 - n_t1 <= 0.0 || n_t1 < th_min - 1e-9 || n_t2 > th_max + 1e-9 {
                stopped = true;
                break;
            }
            let ts_next = theta_star(model, a + step)?;
            if n_t1 > ts_next || n_t2 < ts_next {
                // Crossed the disclosure diagonal: stop with the state
                // advanced so the mismatch is visible to the caller.
                a += step;
                t1 = n_t1;
                t2 = n_t2;
                stopped = true;
                break;
            }
            a += step;
            t1 = n_t1;
            t2 = n_t2;
            remaining -= da;
            if t2 - t1 <= DELTA_STOP {
                break;
            }
        }
    }
    if record
        && (samples_a.is_empty() || *samples_a.last().unwrap() != a)
        && (t2 - t1 <= DELTA_STOP || stopped)
    {
        samples_a.push(a);
        samples_t1.push(t1);
        samples_t2.push(t2);
    }
    // The gap closes like a square root of the action distance, so the
    // remaining distance to the meet is half the linear-extrapolation step.
    let gap = t2 - t1;
    let slope = (last_slopes.1 - last_slopes.0) * direction;
    let a_meet = if slope.abs() > 1e-14 && gap > 0.0 {
        a + direction * (0.5 * gap / slope.abs()).min(10.0 * h)
    } else {
        a
    };
    let ts_end = theta_star(model, a)?;
    Ok(Shot {
        a: samples_a,
        t1: samples_t1,
        t2: samples_t2,
        residual: t1 - ts_end + 0.5 * gap,
        a_meet,
    })
}

/// Solves the boundary-value problem by shooting on the wide-end action.
///
/// Dipped: integrates backward from a trial ā with (t1,t2) = (θmin,θmax)
/// until the pair degenerates; ā is found by bisection on the signed
/// θ*-matching residual over [a*(φ), a*(δ_{θmax})]. Peaked mirrors this
/// with a forward sweep from a trial a̲ bracketed by [a*(δ_{θmin}), a*(φ)].
/// The quantile family routes to its closed-form construction.
pub fn nad_shoot(
    model: &PreferenceModel,
    prior: &Prior,
    orientation: Orientation,
) -> Result<NadSolution> {
    nad_shoot_with(model, prior, orientation, DEFAULT_MESH_STEPS)
}

pub fn nad_shoot_with(
    model: &PreferenceModel,
    prior: &Prior,
    orientation: Orientation,
    mesh_steps: usize,
) -> Result<NadSolution> {
    if let Family::Quantile { kappa } = model.family {
        return quantile_closed_form(model, prior, kappa, mesh_steps);
    }
    if !prior.is_density() {
        return Err(Error::AtomPrior);
    }
    let (th_min, th_max) = prior.support();
    let phi_star = prior_best_response(model, prior)?;
    let (bracket_lo, bracket_hi, direction) = match orientation {
        Orientation::Dipped => {
            let hi = receiver_best_response(model, &Posterior::point_mass(th_max))?;
            (phi_star, hi, -1.0)
        }
        Orientation::Peaked => {
            let lo = receiver_best_response(model, &Posterior::point_mass(th_min))?;
            (lo, phi_star, 1.0)
        }
    };
    let span = (bracket_hi - bracket_lo).abs().max(1e-9);
    let h = span / mesh_steps as f64;
    let max_steps = 4 * mesh_steps;
    let shoot = |trial: f64| -> Result<f64> {
        Ok(integrate(model, prior, trial, direction, h, max_steps, false)?.residual)
    };

    // Bracket the sign change; refine with a grid scan when the endpoint
    // residuals agree in sign.
    let (mut lo, mut hi) = match orientation {
        Orientation::Dipped => (bracket_lo, bracket_hi),
        Orientation::Peaked => (bracket_lo, bracket_hi),
    };
    let mut r_lo = shoot(lo)?;
    let mut r_hi = shoot(hi)?;
    if r_lo.signum() == r_hi.signum() {
        let mut found = false;
        let mut prev = (lo, r_lo);
        for k in 1..=64 {
            let x = lo + (hi - lo) * k as f64 / 64.0;
            let r = shoot(x)?;
            if r.signum() != prev.1.signum() {
                lo = prev.0;
                r_lo = prev.1;
                hi = x;
                r_hi = r;
                found = true;
                break;
            }
            prev = (x, r);
        }
        if !found {
            return Err(Error::BracketFailure {
                a_lo_end: lo,
                a_hi_end: hi,
                lo: r_lo,
                hi: r_hi,
            });
        }
    }
    for _ in 0..80 {
        if (hi - lo).abs() <= 1e-12 * span.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let r = shoot(mid)?;
        if r.signum() == r_lo.signum() {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
    let _ = r_hi;
    let wide = 0.5 * (lo + hi);

    // Final sweep at the resolved wide end, with the mesh step rescaled to
    // put `mesh_steps` cells on the NAD region.
    let probe = integrate(model, prior, wide, direction, h, max_steps, false)?;
    let region = (wide - probe.a_meet).abs().max(1e-9);
    let h_final = region / mesh_steps as f64;
    let shot = integrate(model, prior, wide, direction, h_final, 4 * mesh_steps, true)?;
    let a_meet = shot.a_meet;
    let ts_meet = theta_star(model, a_meet)?;

    let mut mesh = shot.a;
    let mut t1 = shot.t1;
    let mut t2 = shot.t2;
    mesh.push(a_meet);
    t1.push(ts_meet);
    t2.push(ts_meet);
    if direction < 0.0 {
        mesh.reverse();
        t1.reverse();
        t2.reverse();
    }
    let mut q = Vec::with_capacity(mesh.len());
    for i in 0..mesh.len() {
        let qi = if t2[i] - t1[i] > 1e-10 {
            q_closed_form(model, mesh[i], t1[i], t2[i])?.0
        } else {
            let ts = theta_star(model, mesh[i])?;
            -model.v(mesh[i], ts) / model.u_a(mesh[i], ts)
        };
        q.push(qi);
    }
    let (a_lo, a_hi) = (mesh[0], mesh[mesh.len() - 1]);
    Ok(NadSolution {
        orientation,
        a_lo,
        a_hi,
        mesh,
        t1,
        t2,
        q,
        h: h_final,
        matching_residual: shot.residual.abs(),
    })
}

/// a*(φ) for a density prior, via a fine finite-support stand-in.
fn prior_best_response(model: &PreferenceModel, prior: &Prior) -> Result<f64> {
    let (lo, hi) = prior.support();
    let n = 2001;
    let mut pts = Vec::with_capacity(n);
    for k in 0..n {
        let left = lo + (hi - lo) * k as f64 / n as f64;
        let right = lo + (hi - lo) * (k + 1) as f64 / n as f64;
        let mass = prior.cdf(right) - prior.cdf(left);
        if mass > 0.0 {
            pts.push((0.5 * (left + right), mass));
        }
    }
    let total: f64 = pts.iter().map(|&(_, m)| m).sum();
    for p in &mut pts {
        p.1 /= total;
    }
    receiver_best_response(model, &Posterior::new(pts)?)
}

/// Example-2 construction for the quantile family: t2(a) = a, t1(a) from
/// the tail balance κ·φ([0,t1]) = (1−κ)·φ([a,1]), and the action tail
/// α([a,1]) = φ([a,1])/κ implied by obedience.
fn quantile_closed_form(
    model: &PreferenceModel,
    prior: &Prior,
    kappa: f64,
    mesh_steps: usize,
) -> Result<NadSolution> {
    if !prior.is_density() {
        return Err(Error::AtomPrior);
    }
    let (th_min, th_max) = prior.support();
    let target = 1.0 - kappa;
    let a_lo = invert_cdf(prior, target, th_min, th_max);
    let a_hi = th_max;
    let n = mesh_steps + 1;
    let mut mesh = Vec::with_capacity(n);
    let mut t1 = Vec::with_capacity(n);
    let mut t2 = Vec::with_capacity(n);
    for k in 0..n {
        let a = a_lo + (a_hi - a_lo) * k as f64 / (n - 1) as f64;
        let rhs = (1.0 - kappa) * (1.0 - prior.cdf(a)) / kappa;
        mesh.push(a);
        t1.push(invert_cdf(prior, rhs, th_min, th_max));
        t2.push(a);
    }
    let q = vec![0.0; n];
    let _ = model;
    Ok(NadSolution {
        orientation: Orientation::Dipped,
        a_lo,
        a_hi,
        mesh,
        t1,
        t2,
        q,
        h: (a_hi - a_lo) / mesh_steps as f64,
        matching_residual: 0.0,
    })
}

fn invert_cdf(prior: &Prior, target: f64, lo: f64, hi: f64) -> f64 {
    let mut lo = lo;
    let mut hi = hi;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if prior.cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct NadVerifyReport {
    pub max_obedience_residual: f64,
    pub max_foc_residual: f64,
    /// |t1 −θmin|, |t2 − θmax| at the wide end; |t1 − θ*|, |t2 − θ*| at
    /// the degenerate end.
    pub boundary_residuals: [f64; 4],
    pub pass: bool,
}

/// Residual audit of a NAD solution: discrete obedience balance per mesh
/// cell (density form), sender FOC along both branches with the mesh q,
/// and the four boundary conditions.
pub fn nad_verify(
    sol: &NadSolution,
    model: &PreferenceModel,
    prior: &Prior,
) -> Result<NadVerifyReport> {
    nad_verify_with(sol, model, prior, 1e-3, 1e-3)
}

/// `nad_verify` with explicit obedience and FOC pass tolerances.
pub fn nad_verify_with(
    sol: &NadSolution,
    model: &PreferenceModel,
    prior: &Prior,
    tol_obedience: f64,
    tol_foc: f64,
) -> Result<NadVerifyReport> {
    let n = sol.mesh.len();
    if n < 2 {
        return Err(Error::Invalid("mesh too short".into()));
    }
    let mut max_obed: f64 = 0.0;
    for i in 0..n - 1 {
        let da = sol.mesh[i + 1] - sol.mesh[i];
        if da <= 0.0 {
            continue;
        }
        let am = 0.5 * (sol.mesh[i] + sol.mesh[i + 1]);
        let t1m = 0.5 * (sol.t1[i] + sol.t1[i + 1]);
        let t2m = 0.5 * (sol.t2[i] + sol.t2[i + 1]);
        let df1 = prior.cdf(sol.t1[i + 1]) - prior.cdf(sol.t1[i]);
        let df2 = prior.cdf(sol.t2[i + 1]) - prior.cdf(sol.t2[i]);
        let r = model.u(am, t1m) * (-df1) + model.u(am, t2m) * df2;
        max_obed = max_obed.max((r / da.max(sol.h)).abs());
    }

    let quantile = matches!(model.family, Family::Quantile { .. });
    let mut max_foc: f64 = 0.0;
    if !quantile {
        for i in 0..n {
            let qp = if i == 0 {
                (sol.q[1] - sol.q[0]) / (sol.mesh[1] - sol.mesh[0])
            } else if i + 1 == n {
                (sol.q[n - 1] - sol.q[n - 2]) / (sol.mesh[n - 1] - sol.mesh[n - 2])
            } else {
                (sol.q[i + 1] - sol.q[i - 1]) / (sol.mesh[i + 1] - sol.mesh[i - 1])
            };
            for &th in &[sol.t1[i], sol.t2[i]] {
                let u = model.u(sol.mesh[i], th);
                let r = model.v(sol.mesh[i], th)
                    + sol.q[i] * model.u_a(sol.mesh[i], th)
                    + qp * u;
                max_foc = max_foc.max(r.abs());
            }
        }
    }

    let (th_min, th_max) = prior.support();
    let wi = sol.wide_end();
    let di = sol.degenerate_end();
    let ts = theta_star(model, sol.mesh[di])?;
    let boundary = [
        (sol.t1[wi] - th_min).abs(),
        (sol.t2[wi] - th_max).abs(),
        (sol.t1[di] - ts).abs(),
        (sol.t2[di] - ts).abs(),
    ];
    let pass = max_obed <= tol_obedience
        && max_foc <= tol_foc
        && boundary.iter().all(|&b| b <= 1e-3);
    Ok(NadVerifyReport {
        max_obedience_residual: max_obed,
        max_foc_residual: max_foc,
        boundary_residuals: boundary,
        pass,
    })
}

/// Right-to-left constructive assignment of prior mass to levers: each
/// state in the t2-range is matched to its lever a = t2⁻¹(θ), and the
/// balancing mass u(a,t2)/(−u(a,t1)) × (assigned mass) is drawn from the
/// budget near t1(a). Disclosed states absorb their own mass.
pub fn sand_lever_assign(
    sol: &NadSolution,
    prior: &Prior,
    model: &PreferenceModel,
) -> Result<Outcome> {
    if !prior.is_density() {
        return Err(Error::AtomPrior);
    }
    let (th_min, th_max) = prior.support();
    let k = sol.mesh.len().max(256);
    let mut nodes = Vec::with_capacity(k);
    let mut budget = Vec::with_capacity(k);
    for j in 0..k {
        let left = th_min + (th_max - th_min) * j as f64 / k as f64;
        let right = th_min + (th_max - th_min) * (j + 1) as f64 / k as f64;
        nodes.push(0.5 * (left + right));
        budget.push(prior.cdf(right) - prior.cdf(left));
    }
    let cell = (th_max - th_min) / k as f64;

    // t2 is monotone along the mesh (increasing for dipped, decreasing
    // for peaked); invert by interpolation.
    let di = sol.degenerate_end();
    let t2_disclosed = sol.t2[di];
    let invert_t2 = |th: f64| -> Option<f64> {
        let m = sol.mesh.len();
        let increasing = sol.t2[m - 1] >= sol.t2[0];
        let (lo_v, hi_v) = if increasing {
            (sol.t2[0], sol.t2[m - 1])
        } else {
            (sol.t2[m - 1], sol.t2[0])
        };
        if th < lo_v - 1e-12 || th > hi_v + 1e-12 {
            return None;
        }
        let mut lo = 0usize;
        let mut hi = m - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let below = if increasing {
                sol.t2[mid] <= th
            } else {
                sol.t2[mid] >= th
            };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x0, x1) = (sol.t2[lo], sol.t2[hi]);
        if (x1 - x0).abs() < 1e-15 {
            return Some(sol.mesh[lo]);
        }
        let w = (th - x0) / (x1 - x0);
        Some(sol.mesh[lo] + w * (sol.mesh[hi] - sol.mesh[lo]))
    };
    let interp_t1 = |a: f64| -> f64 {
        let m = sol.mesh.len();
        if a <= sol.mesh[0] {
            return sol.t1[0];
        }
        if a >= sol.mesh[m - 1] {
            return sol.t1[m - 1];
        }
        let mut lo = 0usize;
        let mut hi = m - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if sol.mesh[mid] <= a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (a - sol.mesh[lo]) / (sol.mesh[hi] - sol.mesh[lo]);
        sol.t1[lo] + w * (sol.t1[hi] - sol.t1[lo])
    };

    let mut a_values = Vec::new();
    let mut theta_values = nodes.clone();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut uscale: f64 = 0.0;
    for i in 0..sol.mesh.len() {
        uscale = uscale.max(model.u(sol.mesh[i], sol.t2[i]).abs());
    }
    let uband = 1e-9 * uscale.max(1.0);
    let budget_scale = budget.iter().fold(0.0f64, |m, &b| m.max(b));
    let mut unmet = 0.0f64;
    let mut t1_last_drawn = f64::NAN;

    for j in (0..k).rev() {
        let th = nodes[j];
        let m_node = budget[j];
        if m_node <= 0.0 {
            continue;
        }
        // States weakly below the disclosed point are left-endpoint
        // budgets (dipped); symmetric for peaked where t2 decreases.
        let in_t2_range = match sol.orientation {
            Orientation::Dipped => th > t2_disclosed,
            Orientation::Peaked => th > t2_disclosed,
        };
        if !in_t2_range {
            continue;
        }
        let a = match invert_t2(th) {
            Some(a) => a,
            None => continue,
        };
        let ai = a_values.len();
        a_values.push(a);
        entries.push((ai, j, m_node));
        budget[j] = 0.0;
        let u2 = model.u(a, th);
        if u2.abs() <= uband {
            continue; // effectively disclosed
        }
        let t1 = interp_t1(a);
        t1_last_drawn = t1;
        let u1 = model.u(a, t1);
        if u1 >= 0.0 {
            continue;
        }
        let m_left = m_node * u2 / (-u1);
        // Draw from the two nodes bracketing t1, split by proximity.
        let pos = ((t1 - th_min) / cell - 0.5).clamp(0.0, (k - 1) as f64);
        let j0 = pos.floor() as usize;
        let j1 = (j0 + 1).min(k - 1);
        let w1 = pos - j0 as f64;
        let ti = theta_values.len();
        theta_values.push(t1);
        entries.push((ai, ti, m_left));
        let mut need = m_left;
        for (jj, share) in [(j0, (1.0 - w1) * m_left), (j1, w1 * m_left)] {
            let take = share.min(budget[jj]).min(need);
            budget[jj] -= take;
            need -= take;
        }
        if need > 0.0 {
            // Spill into the nearest nonempty budgets; only a few cells
            // away for a consistent input.
            let mut lo = j0;
            let mut hi = j1;
            while need > 1e-15 && (lo > 0 || hi + 1 < k) {
                if lo > 0 {
                    lo -= 1;
                    let take = need.min(budget[lo]);
                    budget[lo] -= take;
                    need -= take;
                }
                if need > 1e-15 && hi + 1 < k {
                    hi += 1;
                    let take = need.min(budget[hi]);
                    budget[hi] -= take;
                    need -= take;
                }
            }
            unmet += need.max(0.0);
        }
    }
    // An O(cell) aggregate shortfall is quadrature error; anything larger
    // signals an inconsistent (t1, t2, prior) triple.
    let max_f = budget_scale / cell;
    if unmet > 1e-9 + 50.0 * cell * max_f {
        return Err(Error::BudgetExhausted {
            theta: t1_last_drawn,
            deficit: unmet,
        });
    }
    // Leftover budgets are interpolation error in the left region plus
    // the disclosed cell. Route each through the t1-inverse so its lever
    // stays balanced; states at the disclosure point ride alone.
    let invert_t1 = |th: f64| -> Option<f64> {
        let m = sol.mesh.len();
        let increasing = sol.t1[m - 1] >= sol.t1[0];
        let (lo_v, hi_v) = if increasing {
            (sol.t1[0], sol.t1[m - 1])
        } else {
            (sol.t1[m - 1], sol.t1[0])
        };
        if th < lo_v - 1e-12 || th > hi_v + 1e-12 {
            return None;
        }
        let mut lo = 0usize;
        let mut hi = m - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let below = if increasing {
                sol.t1[mid] <= th
            } else {
                sol.t1[mid] >= th
            };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x0, x1) = (sol.t1[lo], sol.t1[hi]);
        if (x1 - x0).abs() < 1e-15 {
            return Some(sol.mesh[lo]);
        }
        let w = (th - x0) / (x1 - x0);
        Some(sol.mesh[lo] + w * (sol.mesh[hi] - sol.mesh[lo]))
    };
    let interp_t2 = |a: f64| -> f64 {
        let m = sol.mesh.len();
        if a <= sol.mesh[0] {
            return sol.t2[0];
        }
        if a >= sol.mesh[m - 1] {
            return sol.t2[m - 1];
        }
        let mut lo = 0usize;
        let mut hi = m - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if sol.mesh[mid] <= a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (a - sol.mesh[lo]) / (sol.mesh[hi] - sol.mesh[lo]);
        sol.t2[lo] + w * (sol.t2[hi] - sol.t2[lo])
    };
    for j in 0..k {
        if budget[j] <= 1e-13 {
            continue;
        }
        let th = nodes[j];
        let m_left = budget[j];
        budget[j] = 0.0;
        if let Some(a) = invert_t1(th) {
            let u1 = model.u(a, th);
            let t2 = interp_t2(a);
            let u2 = model.u(a, t2);
            let ai = a_values.len();
            a_values.push(a);
            entries.push((ai, j, m_left));
            if u1.abs() > uband && u2.abs() > uband && u1 < 0.0 && u2 > 0.0 {
                let m_right = m_left * (-u1) / u2;
                let ti = theta_values.len();
                theta_values.push(t2);
                entries.push((ai, ti, m_right));
            }
        } else {
            // Disclosed-point cell: its own lever, no partner.
            let a = sol.mesh[di];
            let ai = a_values.len();
            a_values.push(a);
            entries.push((ai, j, m_left));
        }
    }
    // The leftover pass creates its balancing partners outside the node
    // budgets; rescale so total mass is exactly one (ratios, and hence
    // per-lever obedience, are unaffected).
    let total: f64 = entries.iter().map(|e| e.2).sum();
    let mut out = Outcome::new(a_values, theta_values);
    for (ai, ti, m) in entries {
        if m > 0.0 {
            out.push(ai, ti, m / total);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::Prior;
    use approx::assert_abs_diff_eq;

    fn rs_model() -> PreferenceModel {
        let e = std::f64::consts::E;
        PreferenceModel::simple_receiver(|a, th| a / th, |_, th| 1.0 / th)
            .with_ranges((1.0 / e, e), (1.0 / e, e))
            .with_second_order(
                std::sync::Arc::new(|_, th| -1.0 / (th * th)),
                std::sync::Arc::new(|_, _| 1.0),
                std::sync::Arc::new(|_, _| 0.0),
                std::sync::Arc::new(|_, _| 0.0),
                std::sync::Arc::new(|_, _| 0.0),
            )
    }

    fn rs_prior() -> Prior {
        let e = std::f64::consts::E;
        Prior::reciprocal(1.0 / e, e)
    }

    #[test]
    fn rhs_matches_rs_closed_form() {
        let model = rs_model();
        let prior = rs_prior();
        let a = 1.2f64;
        let s = (a * a - 1.0).sqrt();
        let (d1, d2) = nad_rhs(&model, &prior, a, a - s, a + s).unwrap();
        assert_abs_diff_eq!(d1, 1.0 - a / s, epsilon = 1e-9);
        assert_abs_diff_eq!(d2, 1.0 + a / s, epsilon = 1e-9);
    }

    #[test]
    fn rhs_matches_rs_closed_form_finite_difference_path() {
        let e = std::f64::consts::E;
        let model = PreferenceModel::simple_receiver(|a, th| a / th, |_, th| 1.0 / th)
            .with_ranges((1.0 / e, e), (1.0 / e, e));
        assert!(!model.has_analytic_second_order);
        let prior = rs_prior();
        let a = 1.2f64;
        let s = (a * a - 1.0).sqrt();
        let (d1, d2) = nad_rhs(&model, &prior, a, a - s, a + s).unwrap();
        assert_abs_diff_eq!(d1, 1.0 - a / s, epsilon = 1e-6);
        assert_abs_diff_eq!(d2, 1.0 + a / s, epsilon = 1e-6);
    }

    #[test]
    fn rhs_symmetric_fixture() {
        // v symmetric about the mean and strictly convex, uniform prior:
        // the slopes mirror at the center.
        let model = PreferenceModel::simple_receiver(
            |a, th| a * (1.0 + (th - 0.5) * (th - 0.5)),
            |_, th| 1.0 + (th - 0.5) * (th - 0.5),
        )
        .with_second_order(
            std::sync::Arc::new(|_, th| 2.0 * (th - 0.5)),
            std::sync::Arc::new(|_, _| 1.0),
            std::sync::Arc::new(|_, _| 0.0),
            std::sync::Arc::new(|_, _| 0.0),
            std::sync::Arc::new(|_, _| 0.0),
        );
        let prior = Prior::uniform(0.0, 1.0);
        let (d1, d2) = nad_rhs(&model, &prior, 0.5, 0.3, 0.7).unwrap();
        assert_abs_diff_eq!(d1, -d2, epsilon = 1e-9);
    }

    #[test]
    fn singular_fails_near_degeneracy() {
        let model = rs_model();
        let prior = rs_prior();
        // Degenerate pair triggers the pair guard upstream.
        assert!(nad_rhs(&model, &prior, 1.0, 1.0 - 1e-12, 1.0 + 1e-12).is_err());
    }

    #[test]
    fn quantile_closed_form_uniform() {
        let model = PreferenceModel::quantile(0.5, |a| a, |_| 1.0).unwrap();
        let prior = Prior::uniform(0.0, 1.0);
        let sol = nad_shoot_with(&model, &prior, Orientation::Dipped, 400).unwrap();
        assert_abs_diff_eq!(sol.a_lo, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.a_hi, 1.0, epsilon = 1e-12);
        for i in 0..sol.mesh.len() {
            assert_abs_diff_eq!(sol.t1[i], 1.0 - sol.mesh[i], epsilon = 1e-9);
            assert_abs_diff_eq!(sol.t2[i], sol.mesh[i], epsilon = 1e-15);
        }
        let rep = nad_verify(&sol, &model, &prior).unwrap();
        assert!(rep.max_obedience_residual <= 1e-6, "{rep:?}");
        assert!(rep.pass);
    }

    #[test]
    fn atom_prior_rejected() {
        let model = rs_model();
        let prior = Prior::atoms(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        assert!(matches!(
            nad_shoot(&model, &prior, Orientation::Dipped),
            Err(Error::AtomPrior)
        ));
    }
}
