//! Dual certificates and the contact-set machinery.
//!
//! Given a price function p on the θ-grid, each action has an interval
//! Q(a) of multipliers r keeping (p, r) feasible in (D1). The selection
//! here mirrors the two-branch rule used to build *the* contact set: take
//! the first-order value −v/u_a at actions whose θ*(a) is a contact point
//! of the price function, and the midpoint of Q(a) otherwise. Everything
//! downstream (Γ, Γ*, FOC residuals, support verification) is computed
//! against that certificate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{theta_star, PreferenceModel};
use crate::problem::{DiscreteProblem, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    Type1Contact,
    Midpoint,
}

#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub a_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub q_lo: Vec<f64>,
    pub q_hi: Vec<f64>,
    pub rule: Vec<SelectionRule>,
}

/// Near-zero cutoff for u when forming the ratio bounds of Q(a).
fn u_zero_band(scale: f64) -> f64 {
    1e-14 * scale.max(1.0)
}

/// Default Γ-membership tolerance, scaled by the sender-utility magnitude.
pub fn default_eps_gamma(max_abs_v: f64) -> f64 {
    1e-7 * (1.0 + max_abs_v)
}

pub fn max_abs_v(model: &PreferenceModel, a_grid: &[f64], theta_grid: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for &a in a_grid {
        for &th in theta_grid {
            m = m.max(model.big_v(a, th).abs());
        }
    }
    m
}

/// The interval Q(a) = [Q_lo, Q_hi] of dual multipliers feasible at `a`
/// given prices `p` on `theta_grid`. Sides without a sign witness are
/// unbounded (±∞). Errors with [`Error::EmptyQ`] when the interval is
/// empty beyond tolerance, which signals that p is not dual-feasible.
pub fn compute_q_interval(
    p: &[f64],
    theta_grid: &[f64],
    model: &PreferenceModel,
    a: f64,
) -> Result<(f64, f64)> {
    let mut uscale: f64 = 0.0;
    for &th in theta_grid {
        uscale = uscale.max(model.u(a, th).abs());
    }
    let band = u_zero_band(uscale);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut zero_gap: f64 = 0.0;
    for (j, &th) in theta_grid.iter().enumerate() {
        let u = model.u(a, th);
        let diff = p[j] - model.big_v(a, th);
        if u < -band {
            lo = lo.max(-diff / (-u));
        } else if u > band {
            hi = hi.min(diff / u);
        } else {
            // (D1) at a u = 0 state pins nothing but requires p ≥ V.
            zero_gap = zero_gap.max(-diff);
        }
    }
    if lo > hi + 1e-8 || zero_gap > 1e-8 {
        return Err(Error::EmptyQ {
            a,
            gap: (lo - hi).max(zero_gap),
        });
    }
    Ok((lo, hi.max(lo)))
}

/// Builds the dual certificate for a price vector on the problem grids.
pub fn select_q(
    p: &[f64],
    model: &PreferenceModel,
    problem: &DiscreteProblem,
    eps_gamma: f64,
) -> Result<DualCertificate> {
    let a_grid = &problem.a_grid;
    let theta_grid = &problem.theta_grid;
    let mut q = Vec::with_capacity(a_grid.len());
    let mut q_lo = Vec::with_capacity(a_grid.len());
    let mut q_hi = Vec::with_capacity(a_grid.len());
    let mut rule = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let (lo, hi) = compute_q_interval(p, theta_grid, model, a)?;
        let ts = theta_star(model, a).ok();
        let mut chosen: Option<f64> = None;
        if let Some(ts) = ts {
            if let Some((node, dist)) = nearest_node(theta_grid, ts) {
                let half_step = half_local_step(theta_grid, node);
                let on_support = problem.prior_mass[node] > 0.0;
                let p_contact =
                    (p[node] - model.big_v(a, theta_grid[node])).abs() <= eps_gamma;
                if dist <= half_step && on_support && p_contact {
                    let ua = model.u_a(a, ts);
                    if ua != 0.0 {
                        chosen = Some((-model.v(a, ts) / ua).clamp(
                            if lo.is_finite() { lo } else { f64::NEG_INFINITY },
                            if hi.is_finite() { hi } else { f64::INFINITY },
                        ));
                    }
                }
            }
        }
        match chosen {
            Some(val) => {
                q.push(val);
                rule.push(SelectionRule::Type1Contact);
            }
            None => {
                // An interior selection: when Q(a) is multivalued no state
                // binds, which is what removes redundant actions from Γ.
                let mid = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0 + lo.abs(),
                    (false, true) => hi - 1.0 - hi.abs(),
                    (false, false) => 0.0,
                };
                q.push(mid);
                rule.push(SelectionRule::Midpoint);
            }
        }
        q_lo.push(lo);
        q_hi.push(hi);
    }
    Ok(DualCertificate {
        a_grid: a_grid.clone(),
        theta_grid: theta_grid.clone(),
        p: p.to_vec(),
        q,
        q_lo,
        q_hi,
        rule,
    })
}

/// Certificate with externally supplied closed-form p and q (fixtures,
/// user-provided certificates). Q-intervals are still computed from p.
pub fn certificate_from_functions(
    model: &PreferenceModel,
    a_grid: &[f64],
    theta_grid: &[f64],
    p_fn: impl Fn(f64) -> f64,
    q_fn: impl Fn(f64) -> f64,
) -> Result<DualCertificate> {
    let p: Vec<f64> = theta_grid.iter().map(|&th| p_fn(th)).collect();
    let mut q_lo = Vec::with_capacity(a_grid.len());
    let mut q_hi = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let (lo, hi) = compute_q_interval(&p, theta_grid, model, a)?;
        q_lo.push(lo);
        q_hi.push(hi);
    }
    Ok(DualCertificate {
        a_grid: a_grid.to_vec(),
        theta_grid: theta_grid.to_vec(),
        p,
        q: a_grid.iter().map(|&a| q_fn(a)).collect(),
        q_lo,
        q_hi,
        rule: vec![SelectionRule::Midpoint; a_grid.len()],
    })
}

fn nearest_node(grid: &[f64], x: f64) -> Option<(usize, f64)> {
    if grid.is_empty() {
        return None;
    }
    let mut best = 0;
    let mut dist = (grid[0] - x).abs();
    for (j, &g) in grid.iter().enumerate().skip(1) {
        let d = (g - x).abs();
        if d < dist {
            dist = d;
            best = j;
        }
    }
    Some((best, dist))
}

fn half_local_step(grid: &[f64], node: usize) -> f64 {
    let mut step = f64::INFINITY;
    if node > 0 {
        step = step.min(grid[node] - grid[node - 1]);
    }
    if node + 1 < grid.len() {
        step = step.min(grid[node + 1] - grid[node]);
    }
    if step.is_finite() {
        0.5 * step
    } else {
        f64::INFINITY
    }
}

impl DualCertificate {
    /// (D1) residual p(θ) − V(a,θ) − q(a)u(a,θ) at grid indices.
    pub fn d1_residual(&self, model: &PreferenceModel, ai: usize, ti: usize) -> f64 {
        let a = self.a_grid[ai];
        let th = self.theta_grid[ti];
        self.p[ti] - model.big_v(a, th) - self.q[ai] * model.u(a, th)
    }

    /// Minimum (D1) residual over all grid pairs; ≥ −1e−8 for a feasible
    /// certificate.
    pub fn min_d1_residual(&self, model: &PreferenceModel) -> f64 {
        let mut worst = f64::INFINITY;
        for ai in 0..self.a_grid.len() {
            for ti in 0..self.theta_grid.len() {
                worst = worst.min(self.d1_residual(model, ai, ti));
            }
        }
        worst
    }

    /// Central-difference derivative of the selected q at a grid index.
    pub fn q_prime(&self, ai: usize) -> f64 {
        let n = self.a_grid.len();
        if n < 2 {
            return 0.0;
        }
        if ai == 0 {
            (self.q[1] - self.q[0]) / (self.a_grid[1] - self.a_grid[0])
        } else if ai + 1 == n {
            (self.q[n - 1] - self.q[n - 2]) / (self.a_grid[n - 1] - self.a_grid[n - 2])
        } else {
            (self.q[ai + 1] - self.q[ai - 1]) / (self.a_grid[ai + 1] - self.a_grid[ai - 1])
        }
    }

    pub fn write_p_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "theta,p")?;
        for (th, p) in self.theta_grid.iter().zip(&self.p) {
            writeln!(w, "{th},{p}")?;
        }
        Ok(())
    }

    pub fn write_q_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "a,q,Q_lo,Q_hi,rule")?;
        for i in 0..self.a_grid.len() {
            let rule = match self.rule[i] {
                SelectionRule::Type1Contact => "type1_contact",
                SelectionRule::Midpoint => "midpoint",
            };
            writeln!(
                w,
                "{},{},{},{},{rule}",
                self.a_grid[i], self.q[i], self.q_lo[i], self.q_hi[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ContactSet {
    pub a_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    /// θ*(a) per action where defined.
    pub theta_star: Vec<Option<f64>>,
    /// Γ_a as θ-grid indices, ascending.
    pub sections: Vec<Vec<usize>>,
    /// Γ*_a ⊆ Γ_a.
    pub star_sections: Vec<Vec<usize>>,
    pub eps_gamma: f64,
}

/// Builds Γ and Γ* from a certificate: membership where the (D1) residual
/// is within ε_Γ, and Γ*_a collapses to {θ*(a)} when θ*(a) sits on the
/// boundary of Γ_a.
pub fn contact_set(
    cert: &DualCertificate,
    model: &PreferenceModel,
    eps_gamma: f64,
) -> ContactSet {
    let mut sections = Vec::with_capacity(cert.a_grid.len());
    let mut star_sections = Vec::with_capacity(cert.a_grid.len());
    let mut tstars = Vec::with_capacity(cert.a_grid.len());
    for (ai, &a) in cert.a_grid.iter().enumerate() {
        let mut gamma: Vec<usize> = Vec::new();
        for ti in 0..cert.theta_grid.len() {
            if cert.d1_residual(model, ai, ti).abs() <= eps_gamma {
                gamma.push(ti);
            }
        }
        let ts = theta_star(model, a).ok();
        tstars.push(ts);
        let star = match (&ts, gamma.first(), gamma.last()) {
            (Some(ts), Some(&first), Some(&last)) => {
                let lo_step = half_local_step(&cert.theta_grid, first);
                let hi_step = half_local_step(&cert.theta_grid, last);
                let at_min = (cert.theta_grid[first] - ts).abs() <= lo_step;
                let at_max = (cert.theta_grid[last] - ts).abs() <= hi_step;
                if at_min && gamma.len() > 1 && !at_max {
                    vec![first]
                } else if at_max && gamma.len() > 1 && !at_min {
                    vec![last]
                } else if at_min && at_max && gamma.len() > 1 {
                    // Degenerate section around a disclosed state.
                    vec![first]
                } else {
                    gamma.clone()
                }
            }
            _ => gamma.clone(),
        };
        sections.push(gamma);
        star_sections.push(star);
    }
    ContactSet {
        a_grid: cert.a_grid.clone(),
        theta_grid: cert.theta_grid.clone(),
        theta_star: tstars,
        sections,
        star_sections,
        eps_gamma,
    }
}

impl ContactSet {
    pub fn contains(&self, ai: usize, ti: usize) -> bool {
        self.sections[ai].binary_search(&ti).is_ok()
    }

    /// All (a, θ) members as coordinates.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (ai, sec) in self.sections.iter().enumerate() {
            for &ti in sec {
                out.push((self.a_grid[ai], self.theta_grid[ti]));
            }
        }
        out
    }

    pub fn star_points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (ai, sec) in self.star_sections.iter().enumerate() {
            for &ti in sec {
                out.push((self.a_grid[ai], self.theta_grid[ti]));
            }
        }
        out
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "a,theta,in_gamma,in_gamma_star")?;
        for (ai, &a) in self.a_grid.iter().enumerate() {
            for (ti, &th) in self.theta_grid.iter().enumerate() {
                let g = self.sections[ai].binary_search(&ti).is_ok();
                let gs = self.star_sections[ai].binary_search(&ti).is_ok();
                if g || gs {
                    writeln!(w, "{a},{th},{},{}", g as u8, gs as u8)?;
                }
            }
        }
        Ok(())
    }
}

/// The first-order-condition residual v + q·u_a + q'·u at (a, θ), with
/// q' taken as a central difference of the selected q and the convention
/// that the q'·u term is dropped at u ≈ 0.
pub fn foc_residual(
    model: &PreferenceModel,
    cert: &DualCertificate,
    a: f64,
    theta: f64,
) -> f64 {
    let (ai, _) = nearest_node(&cert.a_grid, a).expect("nonempty a grid");
    let q = cert.q[ai];
    let qp = cert.q_prime(ai);
    let u = model.u(a, theta);
    let mut uscale: f64 = 0.0;
    for &th in &cert.theta_grid {
        uscale = uscale.max(model.u(a, th).abs());
    }
    let band = 1e-9 * uscale.max(1.0);
    let tail = if u.abs() <= band { 0.0 } else { qp * u };
    model.v(a, theta) + q * model.u_a(a, theta) + tail
}

/// Closed-form (q, q') from the two-state first-order system at states
/// t1 < θ*(a) < t2.
pub fn q_closed_form(
    model: &PreferenceModel,
    a: f64,
    t1: f64,
    t2: f64,
) -> Result<(f64, f64)> {
    if (t2 - t1).abs() < 1e-10 {
        return Err(Error::DegeneratePair((t2 - t1).abs()));
    }
    let v1 = model.v(a, t1);
    let v2 = model.v(a, t2);
    let u1 = model.u(a, t1);
    let u2 = model.u(a, t2);
    let ua1 = model.u_a(a, t1);
    let ua2 = model.u_a(a, t2);
    let den_q = u1 * ua2 - u2 * ua1;
    let den_qp = ua1 * u2 - ua2 * u1;
    let scale = (u1.abs() + u2.abs()) * (ua1.abs() + ua2.abs());
    if den_q.abs() < 1e-12 * scale.max(1e-12) {
        return Err(Error::SingularSystem { a, det: den_q });
    }
    let q = (v1 * u2 - v2 * u1) / den_q;
    let qp = (v1 * ua2 - v2 * ua1) / den_qp;
    Ok((q, qp))
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportVerdict {
    pub pass: bool,
    /// Offending entries as (a, θ, mass, residual).
    pub offending: Vec<(f64, f64, f64, f64)>,
}

/// Support-based optimality check: an implementable outcome is optimal
/// iff all its mass sits in the contact set.
pub fn verify_support_optimality(
    outcome: &Outcome,
    cert: &DualCertificate,
    model: &PreferenceModel,
    eps_gamma: f64,
) -> SupportVerdict {
    let mut offending = Vec::new();
    for &(ai, ti, m) in &outcome.entries {
        let a = outcome.a_values[ai];
        let th = outcome.theta_values[ti];
        let p = match nearest_node(&cert.theta_grid, th) {
            Some((node, d)) if d <= 1e-9 * (1.0 + th.abs()) => cert.p[node],
            _ => {
                offending.push((a, th, m, f64::NAN));
                continue;
            }
        };
        let q = match nearest_node(&cert.a_grid, a) {
            Some((node, d)) if d <= 1e-9 * (1.0 + a.abs()) => cert.q[node],
            _ => {
                offending.push((a, th, m, f64::NAN));
                continue;
            }
        };
        let res = p - model.big_v(a, th) - q * model.u(a, th);
        if res.abs() > eps_gamma {
            offending.push((a, th, m, res));
        }
    }
    SupportVerdict {
        pass: offending.is_empty(),
        offending,
    }
}

/// Σ (p − V − q·u)·mass over the outcome: complementary slackness.
pub fn complementary_slackness(
    outcome: &Outcome,
    cert: &DualCertificate,
    model: &PreferenceModel,
) -> f64 {
    let mut total = 0.0;
    for &(ai, ti, m) in &outcome.entries {
        let a = outcome.a_values[ai];
        let th = outcome.theta_values[ti];
        let p = nearest_node(&cert.theta_grid, th).map(|(j, _)| cert.p[j]).unwrap_or(f64::NAN);
        let q = nearest_node(&cert.a_grid, a).map(|(i, _)| cert.q[i]).unwrap_or(f64::NAN);
        total += m * (p - model.big_v(a, th) - q * model.u(a, th));
    }
    total
}
