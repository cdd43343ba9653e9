//! Structural classifiers and perturbation tools: the twist determinant,
//! non-local R-matrix improving directions, single-dipped/-peaked scans,
//! pairwise splitting, full-disclosure and pooling tests, and the
//! triple-removal perturbation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve_standard, SolveOptions, StandardLp};
use crate::model::{receiver_best_response, theta_star, PreferenceModel};
use crate::prior::{Posterior, Prior};
use crate::problem::{uniform_grid, Outcome};

/// 3×3 determinant of the rows (v, u, u_a) evaluated at three states.
pub fn twist_determinant(
    model: &PreferenceModel,
    a: f64,
    th1: f64,
    th2: f64,
    th3: f64,
) -> f64 {
    let r = [
        [model.v(a, th1), model.v(a, th2), model.v(a, th3)],
        [model.u(a, th1), model.u(a, th2), model.u(a, th3)],
        [model.u_a(a, th1), model.u_a(a, th2), model.u_a(a, th3)],
    ];
    det3(&r)
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// The non-local perturbation matrix R for actions a1, a2 and states
/// θ1 < θ2 < θ3: signed sender-utility differences in the first row,
/// signed receiver marginal utilities in the other two.
pub fn r_matrix(
    model: &PreferenceModel,
    a1: f64,
    a2: f64,
    th1: f64,
    th2: f64,
    th3: f64,
) -> [[f64; 3]; 3] {
    let dv = |th: f64| model.big_v(a2, th) - model.big_v(a1, th);
    [
        [dv(th1), -dv(th2), dv(th3)],
        [-model.u(a1, th1), model.u(a1, th2), -model.u(a1, th3)],
        [model.u(a2, th1), -model.u(a2, th2), model.u(a2, th3)],
    ]
}

/// Searches for y ≥ 0 with Ry ≥ 0 and Ry ≠ 0 (normalized as 1ᵀ(Ry) ≥ δ),
/// the improving direction of the theorem of the alternative. Returns the
/// direction when one exists.
pub fn improving_direction(r: &[[f64; 3]; 3]) -> Option<[f64; 3]> {
    const DELTA: f64 = 1e-9;
    // Variables (y1..3, s1..3, t1..3) ≥ 0 with Ry − s = 0 and y + t = 1;
    // maximize Σs. A positive optimum certifies the direction.
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(9);
    for j in 0..3 {
        let mut col = Vec::new();
        for i in 0..3 {
            if r[i][j] != 0.0 {
                col.push((i, r[i][j]));
            }
        }
        col.push((3 + j, 1.0));
        cols.push(col);
    }
    for i in 0..3 {
        cols.push(vec![(i, -1.0)]);
    }
    for j in 0..3 {
        cols.push(vec![(3 + j, 1.0)]);
    }
    let lp = StandardLp {
        nrows: 6,
        ncols: 9,
        cols,
        obj: vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        rhs: vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
    };
    let sol = solve_standard(&lp, &SolveOptions::default()).ok()?;
    if sol.value >= DELTA {
        Some([sol.x[0], sol.x[1], sol.x[2]])
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dippedness {
    SingleDipped,
    SinglePeaked,
    Neither,
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct DippednessVerdict {
    pub verdict: Dippedness,
    /// No weakly single-peaked triple at all (strict dippedness).
    pub strictly_dipped: bool,
    pub strictly_peaked: bool,
    /// A strictly single-peaked triple ((a1,θ1),(a2,θ2),(a1,θ3)), if found.
    pub peaked_witness: Option<[(f64, f64); 3]>,
    pub dipped_witness: Option<[(f64, f64); 3]>,
    pub candidates_scanned: usize,
}

const DEFAULT_TRIPLE_CAP: usize = 100_000_000;

/// Exhaustive scan for strictly single-dipped/-peaked triples over a
/// finite point set: two points sharing an action and a third point at a
/// state strictly in between.
pub fn classify_dippedness(points: &[(f64, f64)]) -> Result<DippednessVerdict> {
    classify_dippedness_capped(points, DEFAULT_TRIPLE_CAP)
}

pub fn classify_dippedness_capped(
    points: &[(f64, f64)],
    cap: usize,
) -> Result<DippednessVerdict> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|x, y| (x.0, x.1).partial_cmp(&(y.0, y.1)).unwrap());
    pts.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);

    let mut by_theta: Vec<(f64, f64)> = pts.clone();
    by_theta.sort_by(|x, y| (x.1, x.0).partial_cmp(&(y.1, y.0)).unwrap());
    let thetas: Vec<f64> = by_theta.iter().map(|p| p.1).collect();

    let mut scanned = 0usize;
    let mut strict_peaked: Option<[(f64, f64); 3]> = None;
    let mut strict_dipped: Option<[(f64, f64); 3]> = None;
    let mut weak_peaked = false;
    let mut weak_dipped = false;

    let mut i = 0;
    while i < pts.len() {
        let mut j = i;
        while j < pts.len() && pts[j].0 == pts[i].0 {
            j += 1;
        }
        let section = &pts[i..j];
        let a1 = pts[i].0;
        for x in 0..section.len() {
            for y in (x + 1)..section.len() {
                let th1 = section[x].1;
                let th3 = section[y].1;
                if y > x + 1 {
                    // A third state inside the same section.
                    weak_peaked = true;
                    weak_dipped = true;
                }
                let lo = thetas.partition_point(|&t| t <= th1);
                let hi = thetas.partition_point(|&t| t < th3);
                for k in lo..hi {
                    scanned += 1;
                    if scanned > cap {
                        return Err(Error::ScanTooLarge(scanned));
                    }
                    let (a2, th2) = by_theta[k];
                    debug_assert!(th2 > th1 && th2 < th3);
                    if a2 > a1 {
                        weak_peaked = true;
                        if strict_peaked.is_none() {
                            strict_peaked = Some([(a1, th1), (a2, th2), (a1, th3)]);
                        }
                    } else if a2 < a1 {
                        weak_dipped = true;
                        if strict_dipped.is_none() {
                            strict_dipped = Some([(a1, th1), (a2, th2), (a1, th3)]);
                        }
                    }
                }
                if strict_peaked.is_some() && strict_dipped.is_some() {
                    break;
                }
            }
        }
        i = j;
    }
    // A set is single-dipped when it contains no strictly single-peaked
    // triple, and vice versa.
    let verdict = match (strict_peaked.is_some(), strict_dipped.is_some()) {
        (false, false) => Dippedness::Both,
        (false, true) => Dippedness::SingleDipped,
        (true, false) => Dippedness::SinglePeaked,
        (true, true) => Dippedness::Neither,
    };
    Ok(DippednessVerdict {
        verdict,
        strictly_dipped: !weak_peaked,
        strictly_peaked: !weak_dipped,
        peaked_witness: strict_peaked,
        dipped_witness: strict_dipped,
        candidates_scanned: scanned,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneVerdict {
    pub holds: bool,
    pub strict: bool,
    /// First violation as (a or a1, θ, θ') where the ratio moves the
    /// wrong way.
    pub first_violation: Option<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpdReport {
    /// u_θ > 0 everywhere on the grid (required by the monotonicity
    /// conditions); first offending pair otherwise.
    pub u_theta_positive: bool,
    pub u_theta_witness: Option<(f64, f64)>,
    pub dipped: MonotoneVerdict,
    pub peaked: MonotoneVerdict,
}

/// Grid check of the two monotonicity conditions for single-dipped
/// (increasing) and single-peaked (decreasing) disclosure:
/// u_aθ/u_θ in θ for all a, and v_θ(a2,θ)/u_θ(a1,θ) in θ for a2 ≥ a1
/// (dipped) or a2 ≤ a1 (peaked).
pub fn check_sdpd_conditions(
    model: &PreferenceModel,
    a_grid: &[f64],
    theta_grid: &[f64],
) -> SdpdReport {
    let m = a_grid.len();
    let n = theta_grid.len();
    let mut u_th = vec![vec![0.0; n]; m];
    let mut v_th = vec![vec![0.0; n]; m];
    let mut r1 = vec![vec![0.0; n]; m];
    let mut scale: f64 = 0.0;
    let mut u_theta_positive = true;
    let mut u_theta_witness = None;
    for (i, &a) in a_grid.iter().enumerate() {
        for (j, &th) in theta_grid.iter().enumerate() {
            let ut = model.u_theta(a, th);
            if ut <= 0.0 && u_theta_positive {
                u_theta_positive = false;
                u_theta_witness = Some((a, th));
            }
            u_th[i][j] = ut;
            v_th[i][j] = model.v_theta(a, th);
            r1[i][j] = model.u_a_theta(a, th) / ut;
            scale = scale.max(r1[i][j].abs()).max(v_th[i][j].abs());
        }
    }
    let margin = 1e-10 * (1.0 + scale);
    if !u_theta_positive {
        let fail = MonotoneVerdict {
            holds: false,
            strict: false,
            first_violation: u_theta_witness.map(|(a, th)| (a, th, th)),
        };
        return SdpdReport {
            u_theta_positive,
            u_theta_witness,
            dipped: fail.clone(),
            peaked: fail,
        };
    }

    let check = |increasing: bool, dipped_pairs: bool| -> MonotoneVerdict {
        let sgn = if increasing { 1.0 } else { -1.0 };
        let mut holds = true;
        let mut r1_strict = true;
        let mut r2_strict = true;
        let mut violation = None;
        for i in 0..m {
            for j in 0..n - 1 {
                let d = sgn * (r1[i][j + 1] - r1[i][j]);
                if d < -margin && holds {
                    holds = false;
                    violation = Some((a_grid[i], theta_grid[j], theta_grid[j + 1]));
                }
                if d <= margin {
                    r1_strict = false;
                }
            }
        }
        for i1 in 0..m {
            for i2 in 0..m {
                let ok_pair = if dipped_pairs {
                    a_grid[i2] >= a_grid[i1]
                } else {
                    a_grid[i2] <= a_grid[i1]
                };
                if !ok_pair {
                    continue;
                }
                for j in 0..n - 1 {
                    let ratio_next = v_th[i2][j + 1] / u_th[i1][j + 1];
                    let ratio = v_th[i2][j] / u_th[i1][j];
                    let d = sgn * (ratio_next - ratio);
                    if d < -margin && holds {
                        holds = false;
                        violation = Some((a_grid[i1], theta_grid[j], theta_grid[j + 1]));
                    }
                    if d <= margin {
                        r2_strict = false;
                    }
                }
            }
        }
        MonotoneVerdict {
            holds,
            strict: holds && (r1_strict || r2_strict),
            first_violation: violation,
        }
    };

    SdpdReport {
        u_theta_positive,
        u_theta_witness,
        dipped: check(true, true),
        peaked: check(false, false),
    }
}

/// Greedy moment-preserving decomposition of a posterior into pieces of
/// support ≤ 2, all inducing the same action. States at the receiver's
/// indifference point split off as singletons; the rest are paired by
/// sign of u, transferring the largest mass that keeps each pair's
/// u-moment at zero.
pub fn pairwise_split(
    model: &PreferenceModel,
    mu: &Posterior,
) -> Result<Vec<(f64, Posterior)>> {
    let mut a_star = receiver_best_response(model, mu)?;
    let moment_at = |a: f64| -> f64 {
        mu.points().iter().map(|&(th, w)| w * model.u(a, th)).sum()
    };
    let mut moment = moment_at(a_star);
    if moment.abs() > 1e-9 {
        return Err(Error::MomentNonzero(moment));
    }
    // Newton-polish the root so the residual does not get amplified by
    // any near-indifferent state during pairing.
    for _ in 0..3 {
        let slope: f64 = mu
            .points()
            .iter()
            .map(|&(th, w)| w * model.u_a(a_star, th))
            .sum();
        if slope.abs() < 1e-14 || moment == 0.0 {
            break;
        }
        let next = a_star - moment / slope;
        if !next.is_finite() {
            break;
        }
        let m_next = moment_at(next);
        if m_next.abs() >= moment.abs() {
            break;
        }
        a_star = next;
        moment = m_next;
    }
    if mu.support_size() <= 2 {
        return Ok(vec![(1.0, mu.clone())]);
    }
    let uscale = mu
        .points()
        .iter()
        .fold(0.0f64, |s, &(th, _)| s.max(model.u(a_star, th).abs()))
        .max(1e-30);
    let band = 1e-12 * uscale;
    let mut pieces: Vec<(f64, Posterior)> = Vec::new();
    let mut neg: Vec<(f64, f64, f64)> = Vec::new(); // (θ, mass, u)
    let mut pos: Vec<(f64, f64, f64)> = Vec::new();
    for &(th, w) in mu.points() {
        let u = model.u(a_star, th);
        if u.abs() <= band {
            pieces.push((w, Posterior::point_mass(th)));
        } else if u < 0.0 {
            neg.push((th, w, u));
        } else {
            pos.push((th, w, u));
        }
    }
    // Largest-state-first on both sides.
    neg.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pos.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    while !neg.is_empty() && !pos.is_empty() {
        let (tn, wn, un) = *neg.last().unwrap();
        let (tp, wp, up) = *pos.last().unwrap();
        if neg.len() == 1 && pos.len() == 1 {
            // Close both pools exactly; the residual moment is at the
            // polished-root noise level.
            let s = wn + wp;
            let piece = Posterior::new(vec![(tn, wn / s), (tp, wp / s)])
                .expect("pair weights are a valid posterior");
            pieces.push((s, piece));
            neg.pop();
            pos.pop();
            break;
        }
        let rho = up / (up - un);
        let s_neg = wn / rho;
        let s_pos = wp / (1.0 - rho);
        let s = s_neg.min(s_pos);
        let piece = Posterior::new(vec![(tn, rho), (tp, 1.0 - rho)])
            .expect("pair weights are a valid posterior");
        pieces.push((s, piece));
        if s_neg <= s_pos {
            neg.pop();
            pos.last_mut().unwrap().1 = wp - s * (1.0 - rho);
            if pos.last().unwrap().1 <= 1e-15 {
                pos.pop();
            }
        } else {
            pos.pop();
            neg.last_mut().unwrap().1 = wn - s * rho;
            if neg.last().unwrap().1 <= 1e-15 {
                neg.pop();
            }
        }
    }
    let leftover: f64 = neg.iter().chain(pos.iter()).map(|&(_, w, _)| w).sum();
    if leftover > 1e-12 {
        return Err(Error::MomentNonzero(leftover));
    }
    let total: f64 = pieces.iter().map(|&(w, _)| w).sum();
    for p in &mut pieces {
        p.0 /= total;
    }
    Ok(pieces)
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseConditionVerdict {
    pub holds: bool,
    pub strict: bool,
    /// Witness (θ1, θ2, ρ) and the two sides of the comparison.
    pub witness: Option<(f64, f64, f64, f64, f64)>,
    pub rho_grid: usize,
    pub support_nodes: usize,
}

fn support_nodes(prior: &Prior, cap: usize) -> Vec<f64> {
    match prior {
        Prior::Atoms(pts) => {
            if pts.len() <= cap {
                pts.iter().map(|&(t, _)| t).collect()
            } else {
                let stride = pts.len() as f64 / cap as f64;
                (0..cap)
                    .map(|k| pts[(k as f64 * stride) as usize].0)
                    .collect()
            }
        }
        Prior::Density { support, .. } => uniform_grid(support.0, support.1, cap),
    }
}

/// Checks whether splitting every binary pool into degenerate posteriors
/// weakly raises the sender's value: full disclosure is optimal iff the
/// comparison holds for every support pair and every interior weight.
pub fn full_disclosure_test(
    model: &PreferenceModel,
    prior: &Prior,
    rho_grid: usize,
) -> Result<PairwiseConditionVerdict> {
    let nodes = support_nodes(prior, 200);
    let astar_delta: Vec<f64> = nodes
        .iter()
        .map(|&th| receiver_best_response(model, &Posterior::point_mass(th)))
        .collect::<Result<_>>()?;
    let mut vscale: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut witness = None;
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            for k in 1..=rho_grid {
                let rho = k as f64 / (rho_grid + 1) as f64;
                let mu = Posterior::new(vec![(nodes[i], rho), (nodes[j], 1.0 - rho)])
                    .expect("valid pair posterior");
                let a = receiver_best_response(model, &mu)?;
                let lhs =
                    rho * model.big_v(a, nodes[i]) + (1.0 - rho) * model.big_v(a, nodes[j]);
                let rhs = rho * model.big_v(astar_delta[i], nodes[i])
                    + (1.0 - rho) * model.big_v(astar_delta[j], nodes[j]);
                vscale = vscale.max(lhs.abs()).max(rhs.abs());
                let margin = rhs - lhs;
                if margin < min_margin {
                    min_margin = margin;
                    if margin < 0.0 && witness.is_none() {
                        witness = Some((nodes[i], nodes[j], rho, lhs, rhs));
                    }
                }
            }
        }
    }
    let tol = 1e-12 * (1.0 + vscale);
    Ok(PairwiseConditionVerdict {
        holds: min_margin >= -tol,
        strict: min_margin > 1e-10 * (1.0 + vscale),
        witness,
        rho_grid,
        support_nodes: nodes.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PoolingVerdict {
    pub holds_for_all_pairs: bool,
    /// A pair for which no ρ on the grid makes pooling strictly better.
    pub failing_pair: Option<(f64, f64)>,
    pub rho_grid: usize,
    pub support_nodes: usize,
}

/// For every support pair θ1 < θ2, searches the ρ-grid for a weight at
/// which pooling strictly beats separating. A grid can miss a narrow ρ
/// window, so a failure reads "not found at this resolution".
pub fn pooling_test(
    model: &PreferenceModel,
    prior: &Prior,
    rho_grid: usize,
) -> Result<PoolingVerdict> {
    let nodes = support_nodes(prior, 200);
    let astar_delta: Vec<f64> = nodes
        .iter()
        .map(|&th| receiver_best_response(model, &Posterior::point_mass(th)))
        .collect::<Result<_>>()?;
    let mut vscale: f64 = 1.0;
    for (i, &th) in nodes.iter().enumerate() {
        vscale = vscale.max(model.big_v(astar_delta[i], th).abs());
    }
    let margin_req = 1e-10 * (1.0 + vscale);
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let mut found = false;
            for k in 1..=rho_grid {
                let rho = k as f64 / (rho_grid + 1) as f64;
                let mu = Posterior::new(vec![(nodes[i], rho), (nodes[j], 1.0 - rho)])
                    .expect("valid pair posterior");
                let a = receiver_best_response(model, &mu)?;
                let lhs =
                    rho * model.big_v(a, nodes[i]) + (1.0 - rho) * model.big_v(a, nodes[j]);
                let rhs = rho * model.big_v(astar_delta[i], nodes[i])
                    + (1.0 - rho) * model.big_v(astar_delta[j], nodes[j]);
                if lhs > rhs + margin_req {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(PoolingVerdict {
                    holds_for_all_pairs: false,
                    failing_pair: Some((nodes[i], nodes[j])),
                    rho_grid,
                    support_nodes: nodes.len(),
                });
            }
        }
    }
    Ok(PoolingVerdict {
        holds_for_all_pairs: true,
        failing_pair: None,
        rho_grid,
        support_nodes: nodes.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalNdEntry {
    pub a: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The local necessary condition for pooling near the diagonal,
/// v_a ≤ v·u_aa/u_a + 2(v_θ u_a − v u_aθ)/u_θ, evaluated at (a, θ*(a)).
pub fn local_nd_sdd_test(model: &PreferenceModel, a_grid: &[f64]) -> Vec<LocalNdEntry> {
    let mut out = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let ts = match theta_star(model, a) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let v = model.v(a, ts);
        let ua = model.u_a(a, ts);
        let ut = model.u_theta(a, ts);
        let lhs = model.v_a(a, ts);
        let rhs = v * model.u_aa(a, ts) / ua
            + 2.0 * (model.v_theta(a, ts) * ua - v * model.u_a_theta(a, ts)) / ut;
        out.push(LocalNdEntry {
            a,
            lhs,
            rhs,
            holds: lhs <= rhs + 1e-10 * (1.0 + lhs.abs().max(rhs.abs())),
        });
    }
    out
}

/// Removes strictly single-peaked triples from a finite-support outcome
/// by the mass shift (y1, y2, y3) = ((θ3−θ2)ε, (θ3−θ1)ε, (θ2−θ1)ε) with ε
/// maximal subject to nonnegativity. Preserves the θ-marginal exactly and
/// the mean obedience constraint exactly, so it is restricted to
/// mean-type receivers.
pub fn remove_single_peaked_triples(
    outcome: &Outcome,
    model: &PreferenceModel,
    accept_weak_improvement: bool,
) -> Result<Outcome> {
    if !model.is_mean_type() {
        return Err(Error::NotApplicable(
            "mass shift preserves only the mean obedience constraint; \
             restricted to mean-type receivers"
            .into(),
        ));
    }
    let mut mass: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    for &(ai, ti, m) in &outcome.entries {
        *mass.entry((ai, ti)).or_insert(0.0) += m;
    }
    let a_of = |i: usize| outcome.a_values[i];
    let th_of = |j: usize| outcome.theta_values[j];
    let mut vscale: f64 = 1.0;
    for &(ai, ti, _) in &outcome.entries {
        vscale = vscale.max(model.big_v(a_of(ai), th_of(ti)).abs());
    }

    let find_triples = |mass: &std::collections::BTreeMap<(usize, usize), f64>| {
        let pts: Vec<(usize, usize)> = mass.keys().copied().collect();
        let mut triples = Vec::new();
        for &(a1, t1) in &pts {
            for &(a1b, t3) in &pts {
                if a1b != a1 || th_of(t3) <= th_of(t1) {
                    continue;
                }
                for &(a2, t2) in &pts {
                    if a_of(a2) > a_of(a1)
                        && th_of(t2) > th_of(t1)
                        && th_of(t2) < th_of(t3)
                    {
                        triples.push(((a1, t1), (a2, t2), (a1, t3)));
                    }
                }
            }
        }
        triples
    };

    // Crumbs below this never carry a meaningful triple; pruning them
    // bounds the marginal perturbation far below the stated tolerances.
    let total_mass: f64 = outcome.entries.iter().map(|e| e.2).sum();
    let crumb = 1e-14 * total_mass.max(1.0);
    let tol = 1e-12 * (1.0 + vscale);

    let mut guard = 0usize;
    loop {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::NotApplicable(
                "triple removal did not terminate".into(),
            ));
        }
        mass.retain(|_, m| *m > crumb);
        let triples = find_triples(&mass);
        if triples.is_empty() {
            break;
        }
        // Apply the value-safe shift that moves the most mass; picking
        // the largest step is what keeps the sequence from trading
        // ever-smaller crumbs between overlapping triples.
        let mut best: Option<(f64, (usize, usize), (usize, usize), usize, f64)> = None;
        for ((a1, t1), (a2, t2), (_, t3)) in triples {
            let th1 = th_of(t1);
            let th2 = th_of(t2);
            let th3 = th_of(t3);
            let m1 = mass[&(a1, t1)];
            let m2 = mass[&(a2, t2)];
            let m3 = mass[&(a1, t3)];
            let eps = (m1 / (th3 - th2))
                .min(m2 / (th3 - th1))
                .min(m3 / (th2 - th1));
            let y1 = (th3 - th2) * eps;
            let y2 = (th3 - th1) * eps;
            let y3 = (th2 - th1) * eps;
            let dv = y1 * (model.big_v(a_of(a2), th1) - model.big_v(a_of(a1), th1))
                + y3 * (model.big_v(a_of(a2), th3) - model.big_v(a_of(a1), th3))
                - y2 * (model.big_v(a_of(a2), th2) - model.big_v(a_of(a1), th2));
            if dv < -tol {
                continue;
            }
            if !accept_weak_improvement && dv.abs() > tol {
                continue;
            }
            let moved = y1 + y2 + y3;
            if best.as_ref().map_or(true, |b| moved > b.0) {
                best = Some((moved, (a1, t1), (a2, t2), t3, eps));
            }
        }
        let (moved, (a1, t1), (a2, t2), t3, eps) = match best {
            Some(b) => b,
            None => {
                return Err(Error::NotApplicable(
                    "no value-safe shift removes the remaining triples".into(),
                ));
            }
        };
        if moved <= crumb {
            // Only crumb-level shifts remain; drop them and finish.
            mass.retain(|_, m| *m > crumb);
            break;
        }
        let th1 = th_of(t1);
        let th2 = th_of(t2);
        let th3 = th_of(t3);
        let y1 = (th3 - th2) * eps;
        let y2 = (th3 - th1) * eps;
        let y3 = (th2 - th1) * eps;
        let upd = |map: &mut std::collections::BTreeMap<(usize, usize), f64>,
                   key: (usize, usize),
                   delta: f64| {
            let e = map.entry(key).or_insert(0.0);
            *e += delta;
            if *e <= crumb {
                map.remove(&key);
            }
        };
        upd(&mut mass, (a1, t1), -y1);
        upd(&mut mass, (a2, t1), y1);
        upd(&mut mass, (a1, t3), -y3);
        upd(&mut mass, (a2, t3), y3);
        upd(&mut mass, (a2, t2), -y2);
        upd(&mut mass, (a1, t2), y2);
    }

    let mut out = Outcome::new(outcome.a_values.clone(), outcome.theta_values.clone());
    for (&(ai, ti), &m) in &mass {
        if m > 0.0 {
            out.push(ai, ti, m);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TwistReport {
    pub ok: bool,
    /// +1 when |S| > 0 throughout the restricted domain, −1 when < 0,
    /// None when the sign varies or vanishes.
    pub sign: Option<i8>,
    pub min_abs: f64,
    pub witness: Option<(f64, f64, f64, f64, f64)>,
    pub samples: usize,
}

/// Samples the twist determinant over tuples (a, θ1 < θ2 < θ3) with
/// θ1 < θ*(a) < θ3 and reports sign constancy.
pub fn twist_scan(
    model: &PreferenceModel,
    a_grid: &[f64],
    theta_grid: &[f64],
    max_axis: usize,
) -> TwistReport {
    let a_sub = subsample(a_grid, max_axis);
    let th_sub = subsample(theta_grid, max_axis);
    let mut samples = 0usize;
    let mut sign = 0i8;
    let mut ok = true;
    let mut min_abs = f64::INFINITY;
    let mut witness = None;
    let mut vscale: f64 = 0.0;
    for &a in &a_sub {
        for &th in &th_sub {
            vscale = vscale.max(model.v(a, th).abs()).max(model.u(a, th).abs());
        }
    }
    let zero_tol = 1e-12 * (1.0 + vscale * vscale * vscale);
    for &a in &a_sub {
        let ts = match theta_star(model, a) {
            Ok(t) => t,
            Err(_) => continue,
        };
        for i in 0..th_sub.len() {
            if th_sub[i] >= ts {
                continue;
            }
            for j in (i + 1)..th_sub.len() {
                for k in (j + 1)..th_sub.len() {
                    if th_sub[k] <= ts {
                        continue;
                    }
                    samples += 1;
                    let s = twist_determinant(model, a, th_sub[i], th_sub[j], th_sub[k]);
                    min_abs = min_abs.min(s.abs());
                    let this_sign = if s > zero_tol {
                        1
                    } else if s < -zero_tol {
                        -1
                    } else {
                        0
                    };
                    if this_sign == 0 || (sign != 0 && this_sign != sign) {
                        if ok {
                            witness = Some((a, th_sub[i], th_sub[j], th_sub[k], s));
                        }
                        ok = false;
                    } else {
                        sign = this_sign;
                    }
                }
            }
        }
    }
    TwistReport {
        ok: ok && samples > 0,
        sign: if ok && sign != 0 { Some(sign) } else { None },
        min_abs: if min_abs.is_finite() { min_abs } else { 0.0 },
        witness,
        samples,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationalReport {
    /// Every sampled tuple with a2 > a1 admits an improving direction:
    /// strictly single-peaked triples are always improvable.
    pub dipped_certified: bool,
    pub peaked_certified: bool,
    pub dipped_failure: Option<(f64, f64, f64, f64, f64)>,
    pub peaked_failure: Option<(f64, f64, f64, f64, f64)>,
    pub samples: usize,
}

fn subsample(grid: &[f64], max_axis: usize) -> Vec<f64> {
    if grid.len() <= max_axis {
        return grid.to_vec();
    }
    (0..max_axis)
        .map(|k| grid[k * (grid.len() - 1) / (max_axis - 1)])
        .collect()
}

/// Grid certification of single-dippedness/-peakedness through improving
/// directions: for each sampled (a1, a2, θ1 < θ2 < θ3) with
/// θ1 ≤ θ*(a1) ≤ θ3, checks that the R-matrix admits y ≥ 0 with Ry ≥ 0,
/// Ry ≠ 0 in the relevant orientation.
pub fn variational_scan(
    model: &PreferenceModel,
    a_grid: &[f64],
    theta_grid: &[f64],
    max_axis: usize,
) -> VariationalReport {
    let a_sub = subsample(a_grid, max_axis);
    let th_sub = subsample(theta_grid, max_axis);
    let mut dipped = true;
    let mut peaked = true;
    let mut dipped_failure = None;
    let mut peaked_failure = None;
    let mut samples = 0usize;
    for &a1 in &a_sub {
        let ts = match theta_star(model, a1) {
            Ok(t) => t,
            Err(_) => continue,
        };
        for &a2 in &a_sub {
            if a2 == a1 {
                continue;
            }
            for i in 0..th_sub.len() {
                if th_sub[i] > ts {
                    continue;
                }
                for j in (i + 1)..th_sub.len() {
                    for k in (j + 1)..th_sub.len() {
                        if th_sub[k] < ts {
                            continue;
                        }
                        samples += 1;
                        let r = r_matrix(model, a1, a2, th_sub[i], th_sub[j], th_sub[k]);
                        let found = improving_direction(&r).is_some();
                        if a2 > a1 {
                            if !found && dipped {
                                dipped = false;
                                dipped_failure =
                                    Some((a1, a2, th_sub[i], th_sub[j], th_sub[k]));
                            }
                        } else if !found && peaked {
                            peaked = false;
                            peaked_failure = Some((a1, a2, th_sub[i], th_sub[j], th_sub[k]));
                        }
                    }
                }
            }
        }
    }
    VariationalReport {
        dipped_certified: dipped && samples > 0,
        peaked_certified: peaked && samples > 0,
        dipped_failure,
        peaked_failure,
        samples,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssortativeVerdict {
    StrictDipped,
    StrictPeaked,
    Dipped,
    Peaked,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub twist: TwistReport,
    pub pairwise_ok: bool,
    pub sdpd: SdpdReport,
    pub variational: VariationalReport,
    pub full_disclosure: PairwiseConditionVerdict,
    pub pooling: PoolingVerdict,
    pub local_nd_sdd: Vec<LocalNdEntry>,
    /// Combined grid-certified verdict: monotonicity conditions or an
    /// improving-direction certificate, with strictness from the twist.
    pub verdict: AssortativeVerdict,
}

/// Combines the pieces of a structure report; the verdict takes either
/// the monotonicity conditions or an improving-direction certificate,
/// with strictness from a nonvanishing twist determinant.
pub fn assemble_report(
    twist: TwistReport,
    sdpd: SdpdReport,
    variational: VariationalReport,
    full_disclosure: PairwiseConditionVerdict,
    pooling: PoolingVerdict,
    local_nd_sdd: Vec<LocalNdEntry>,
) -> StructureReport {
    let dipped_ok = (sdpd.u_theta_positive && sdpd.dipped.holds) || variational.dipped_certified;
    let peaked_ok = (sdpd.u_theta_positive && sdpd.peaked.holds) || variational.peaked_certified;
    let verdict = match (dipped_ok, peaked_ok) {
        (true, false) if twist.ok => AssortativeVerdict::StrictDipped,
        (false, true) if twist.ok => AssortativeVerdict::StrictPeaked,
        (true, false) => AssortativeVerdict::Dipped,
        (false, true) => AssortativeVerdict::Peaked,
        _ => AssortativeVerdict::Undetermined,
    };
    let pairwise_ok = twist.ok;
    StructureReport {
        twist,
        pairwise_ok,
        sdpd,
        variational,
        full_disclosure,
        pooling,
        local_nd_sdd,
        verdict,
    }
}

/// Runs the full classifier battery on a model/prior pair.
pub fn structure_report(
    model: &PreferenceModel,
    prior: &Prior,
    a_grid: &[f64],
    theta_grid: &[f64],
    rho_grid: usize,
) -> Result<StructureReport> {
    let twist = twist_scan(model, a_grid, theta_grid, 12);
    let sdpd = check_sdpd_conditions(model, a_grid, theta_grid);
    let variational = variational_scan(model, a_grid, theta_grid, 9);
    let full_disclosure = full_disclosure_test(model, prior, rho_grid)?;
    let pooling = pooling_test(model, prior, rho_grid)?;
    let local_nd_sdd = local_nd_sdd_test(model, subsample(a_grid, 33).as_slice());
    Ok(assemble_report(
        twist,
        sdpd,
        variational,
        full_disclosure,
        pooling,
        local_nd_sdd,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn twist_vanishes_in_simple_case() {
        let m = PreferenceModel::simple(|a| a * a, |a| 2.0 * a);
        for &a in &[0.2, 0.5, 0.9] {
            let s = twist_determinant(&m, a, 0.1, 0.4, 0.8);
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn twist_contest_closed_form() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let (t1, t2, t3) = (0.2, 0.3, 0.4);
        let s = twist_determinant(&m, 0.33, t1, t2, t3);
        let expect = (t3 - t2) * (t3 - t1) * (t2 - t1) * (1.0 - t2 * t3 - t1 * t3 - t1 * t2)
            / (t1 * t2 * t3);
        assert_abs_diff_eq!(s, expect, epsilon = 1e-10);
        assert_abs_diff_eq!(s, 0.1 * 0.2 * 0.1 * (1.0 - 0.26) / 0.024, epsilon = 1e-10);
    }

    #[test]
    fn twist_simple_receiver_decomposition() {
        // Brute-force determinant against the two-term decomposition
        // |S|·det2(u,u_a)(θ1,θ3)/(u3−u1) split.
        let m = PreferenceModel::simple_receiver(|a, th| a * th * th, |_, th| th * th);
        let (a, t1, t2, t3) = (0.25, 0.1, 0.2, 0.3);
        let s = twist_determinant(&m, a, t1, t2, t3);
        let u = |th: f64| m.u(a, th);
        let v = |th: f64| m.v(a, th);
        let det2_u_ua = u(t1) * (-1.0) - u(t3) * (-1.0);
        let dv_du = -((v(t2) - v(t1)) * (u(t3) - u(t2)) - (v(t3) - v(t2)) * (u(t2) - u(t1)));
        // In the mean-type case the u/u_a block term vanishes.
        let lhs = s / det2_u_ua * (u(t3) - u(t1));
        assert_abs_diff_eq!(lhs, dv_du, epsilon = 1e-12);
        assert!(s > 0.0);
    }

    #[test]
    fn r_matrix_shapes() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let r = r_matrix(&m, 0.3, 0.3, 0.2, 0.3, 0.4);
        assert_eq!(r[0], [0.0, -0.0, 0.0]);
        let ms = PreferenceModel::simple(|a| a, |_| 1.0);
        let r = r_matrix(&ms, 0.2, 0.5, 0.1, 0.5, 0.9);
        assert_abs_diff_eq!(r[0][0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(r[0][1], -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(r[0][2], 0.3, epsilon = 1e-15);
    }

    #[test]
    fn r_matrix_contest_dipped_regime_determinant() {
        // Below the 1/√3 threshold the determinant is positive for
        // ascending action pairs.
        let m = PreferenceModel::contest(0.15, 0.55).unwrap();
        let r = r_matrix(&m, 0.3, 0.35, 0.2, 0.3, 0.4);
        assert!(det3(&r) > 0.0, "|R| = {}", det3(&r));
    }

    #[test]
    fn sdpd_reciprocal_weight_strict_dipped() {
        // w(θ) = 1/θ is strictly convex: the dipped conditions hold
        // strictly for the mean-type receiver.
        let e = std::f64::consts::E;
        let m = PreferenceModel::simple_receiver(|a, th| a / th, |_, th| 1.0 / th)
            .with_ranges((1.0 / e, e), (1.0 / e, e));
        let a_grid = uniform_grid(1.0 / e, e, 17);
        let th_grid = uniform_grid(1.0 / e, e, 17);
        let rep = check_sdpd_conditions(&m, &a_grid, &th_grid);
        assert!(rep.dipped.holds && rep.dipped.strict);
        assert!(!rep.peaked.holds);
    }

    #[test]
    fn pooling_holds_for_decreasing_weight() {
        let e = std::f64::consts::E;
        let m = PreferenceModel::simple_receiver(|a, th| a / th, |_, th| 1.0 / th)
            .with_ranges((1.0 / e, e), (1.0 / e, e));
        let prior = Prior::reciprocal(1.0 / e, e);
        assert!(pooling_test(&m, &prior, 33).unwrap().holds_for_all_pairs);
    }

    #[test]
    fn improving_direction_constructed() {
        let r = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let y = improving_direction(&r).expect("direction exists");
        assert!(y[1] > 0.0);
        let none = [[0.0, 0.0, 0.0], [-1.0, -1.0, -1.0], [-1.0, -1.0, -1.0]];
        assert!(improving_direction(&none).is_none());
    }

    #[test]
    fn improving_direction_convex_simple_receiver() {
        let m = PreferenceModel::simple_receiver(|a, th| a * th * th, |_, th| th * th);
        let r = r_matrix(&m, 0.4, 0.6, 0.1, 0.4, 0.8);
        assert!(improving_direction(&r).is_some());
    }

    #[test]
    fn improving_direction_simple_case_none_needed() {
        // Linear v: both orientations fail to certify strictly.
        let m = PreferenceModel::simple(|a| a, |_| 1.0);
        let r_dip = r_matrix(&m, 0.4, 0.6, 0.1, 0.4, 0.8);
        let r_peak = r_matrix(&m, 0.6, 0.4, 0.1, 0.4, 0.8);
        // Weak directions exist in the simple case (the shift is value
        // neutral), so the certificate may or may not be strict; what
        // must not happen is a strict improvement on both orientations
        // of the same tuple with nonzero first coordinate.
        let _ = (improving_direction(&r_dip), improving_direction(&r_peak));
    }

    #[test]
    fn classify_full_disclosure_is_both() {
        let pts: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, k as f64)).collect();
        let v = classify_dippedness(&pts).unwrap();
        assert_eq!(v.verdict, Dippedness::Both);
    }

    #[test]
    fn classify_stability_limit_is_neither() {
        // Sections {0,1/2} below a=1/2, {0,1/2,1} at 1/2, {1/2,1} above.
        let mut pts = Vec::new();
        for &a in &[0.25, 0.4, 0.5] {
            pts.push((a, 0.0));
            pts.push((a, 0.5));
        }
        pts.push((0.5, 1.0));
        for &a in &[0.5, 0.75] {
            pts.push((a, 0.5));
            pts.push((a, 1.0));
        }
        let v = classify_dippedness(&pts).unwrap();
        assert_eq!(v.verdict, Dippedness::Neither);
        let w = v.peaked_witness.unwrap();
        assert!(w[1].0 > w[0].0);
    }

    #[test]
    fn sdpd_simple_receiver_convex() {
        let m = PreferenceModel::simple_receiver(|a, th| a * th * th, |_, th| th * th);
        let a_grid = uniform_grid(0.0, 1.0, 21);
        let th_grid = uniform_grid(0.05, 1.0, 21);
        let rep = check_sdpd_conditions(&m, &a_grid, &th_grid);
        assert!(rep.dipped.holds && rep.dipped.strict, "{:?}", rep.dipped);
        assert!(!rep.peaked.holds);
    }

    #[test]
    fn sdpd_translation_invariant_log_concave() {
        // T'(y) = exp(−y²/2) is log-concave: dipped conditions hold.
        let t = |y: f64| {
            let n = 200;
            let h = y / n as f64;
            let mut s = 0.0;
            for k in 0..n {
                let x0 = k as f64 * h;
                let x1 = x0 + h;
                s += 0.5 * h * ((-0.5 * x0 * x0).exp() + (-0.5 * x1 * x1).exp());
            }
            s
        };
        let m = PreferenceModel::translation_invariant(
            |a| a,
            |_| 1.0,
            move |y| t(y),
            |y| (-0.5 * y * y).exp(),
        )
        .with_ranges((-1.0, 1.0), (-1.0, 1.0));
        let a_grid = uniform_grid(-0.9, 0.9, 13);
        let th_grid = uniform_grid(-0.9, 0.9, 13);
        let rep = check_sdpd_conditions(&m, &a_grid, &th_grid);
        assert!(rep.dipped.holds, "{:?}", rep.dipped);
        assert!(rep.dipped.strict);
    }

    #[test]
    fn sdpd_contest_peaked_above_threshold() {
        let m = PreferenceModel::contest(0.72, 0.95).unwrap();
        let a_grid = uniform_grid(m.a_range.0, m.a_range.1, 17);
        let th_grid = uniform_grid(0.72, 0.95, 17);
        let rep = check_sdpd_conditions(&m, &a_grid, &th_grid);
        assert!(rep.peaked.holds, "{:?}", rep.peaked);
        assert!(rep.peaked.strict);
        assert!(!rep.dipped.holds);
    }

    #[test]
    fn pairwise_split_uniform_three() {
        let m = PreferenceModel::simple_receiver(|a, _| a, |_, _| 1.0);
        let mu = Posterior::new(vec![
            (0.0, 1.0 / 3.0),
            (0.5, 1.0 / 3.0),
            (1.0, 1.0 / 3.0),
        ])
        .unwrap();
        let pieces = pairwise_split(&m, &mu).unwrap();
        assert_eq!(pieces.len(), 2);
        let singleton = pieces
            .iter()
            .find(|(_, p)| p.support_size() == 1)
            .expect("disclosed middle state");
        assert_abs_diff_eq!(singleton.0, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(singleton.1.points()[0].0, 0.5, epsilon = 1e-15);
        let pair = pieces
            .iter()
            .find(|(_, p)| p.support_size() == 2)
            .expect("paired extremes");
        assert_abs_diff_eq!(pair.0, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.1.points()[0].1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn pairwise_split_binary_unchanged() {
        let m = PreferenceModel::simple(|a| a, |_| 1.0);
        let mu = Posterior::new(vec![(0.2, 0.5), (0.8, 0.5)]).unwrap();
        let pieces = pairwise_split(&m, &mu).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(&pieces[0].1, &mu);
    }

    #[test]
    fn pairwise_split_contest_best_response_preserved() {
        let m = PreferenceModel::contest(0.15, 0.95).unwrap();
        let mu = Posterior::new(vec![
            (0.2, 1.0 / 3.0),
            (0.3, 1.0 / 3.0),
            (0.4, 1.0 / 3.0),
        ])
        .unwrap();
        let a = receiver_best_response(&m, &mu).unwrap();
        let pieces = pairwise_split(&m, &mu).unwrap();
        let mut mix = std::collections::BTreeMap::new();
        for (w, eta) in &pieces {
            assert!(eta.support_size() <= 2);
            let ai = receiver_best_response(&m, eta).unwrap();
            assert!((ai - a).abs() <= 1e-9, "piece induces {ai}, want {a}");
            for &(th, p) in eta.points() {
                *mix.entry((th * 1e12).round() as i64).or_insert(0.0) += w * p;
            }
        }
        for &(th, w) in mu.points() {
            let got = mix[&((th * 1e12).round() as i64)];
            assert!((got - w).abs() <= 1e-12);
        }
    }

    #[test]
    fn full_disclosure_convex_simple() {
        let m = PreferenceModel::simple(|a| a * a, |a| 2.0 * a);
        let prior = Prior::atoms(vec![(0.1, 0.3), (0.5, 0.4), (0.9, 0.3)]).unwrap();
        let v = full_disclosure_test(&m, &prior, 33).unwrap();
        assert!(v.holds);
        let m2 = PreferenceModel::simple(|a| -(a * a), |a| -2.0 * a);
        let v2 = full_disclosure_test(&m2, &prior, 33).unwrap();
        assert!(!v2.holds);
        assert!(v2.witness.is_some());
    }

    #[test]
    fn pooling_concave_simple() {
        let prior = Prior::atoms(vec![(0.1, 0.3), (0.5, 0.4), (0.9, 0.3)]).unwrap();
        let m = PreferenceModel::simple(|a| -(a * a), |a| -2.0 * a);
        assert!(pooling_test(&m, &prior, 33).unwrap().holds_for_all_pairs);
        let m2 = PreferenceModel::simple(|a| a * a, |a| 2.0 * a);
        let v = pooling_test(&m2, &prior, 33).unwrap();
        assert!(!v.holds_for_all_pairs);
        assert!(v.failing_pair.is_some());
    }

    #[test]
    fn local_nd_simple_receiver_forms() {
        // v(a,θ) = θ²: v_a + 2v_θ = 4θ at θ = a: fails for a > 0.
        let m = PreferenceModel::simple_receiver(|a, th| a * th * th, |_, th| th * th);
        let entries = local_nd_sdd_test(&m, &uniform_grid(0.1, 0.9, 9));
        for e in &entries {
            let expect_rhs = -2.0 * 2.0 * e.a; // −2 v_θ(a,a)
            assert_abs_diff_eq!(e.rhs, expect_rhs, epsilon = 1e-3);
            assert!(!e.holds);
        }
        // P(y) = −y² translation-invariant receiver: P''(0) = −2 < 0 fails;
        // P(y) = y² has v = 2(a−θ), v_a = 2, v_θ = −2: v_a + 2v_θ = −2 ≤ 0 holds.
        let good = PreferenceModel::simple_receiver(
            |a, th| (a - th) * (a - th),
            |a, th| 2.0 * (a - th),
        );
        for e in local_nd_sdd_test(&good, &uniform_grid(0.1, 0.9, 9)) {
            assert!(e.holds, "{e:?}");
        }
    }

    #[test]
    fn triple_removal_three_atom_toy() {
        let m = PreferenceModel::simple(|a| a, |_| 1.0);
        // Peaked arrangement: action 0.3 holds {0, 1}, action 0.5 holds {1/2}.
        let mut o = Outcome::new(vec![0.3, 0.5], vec![0.0, 0.5, 1.0]);
        // Masses chosen so both actions are obedient in the mean sense:
        // at a=0.3: (3/5)·0 + (2/5)·... use balance 0.5·(0)+... pick
        // masses with mean 0.3 at action 0.3 and mean 0.5 at action 0.5.
        o.push(0, 0, 0.35); // θ=0
        o.push(0, 2, 0.15); // θ=1: mean = 0.15/0.5 = 0.3 ✓
        o.push(1, 1, 0.5); // θ=1/2 at action 0.5 ✓
        let before_marginal = o.theta_marginal();
        let fixed = remove_single_peaked_triples(&o, &m, true).unwrap();
        for (got, want) in fixed.theta_marginal().iter().zip(&before_marginal) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-15);
        }
        let v = classify_dippedness(&fixed.support_points()).unwrap();
        assert!(v.verdict == Dippedness::SingleDipped || v.verdict == Dippedness::Both);
        // Obedience preserved exactly.
        assert!(fixed.max_obedience_residual(&m) <= 1e-12);
        // Action marginal of mass is unchanged.
        let before: f64 = o.entries.iter().map(|e| e.2).sum();
        let after: f64 = fixed.entries.iter().map(|e| e.2).sum();
        assert_abs_diff_eq!(before, after, epsilon = 1e-12);
    }

    #[test]
    fn triple_removal_fixed_point() {
        let m = PreferenceModel::simple(|a| a, |_| 1.0);
        let mut o = Outcome::new(vec![0.3, 0.5], vec![0.0, 0.5, 1.0]);
        o.push(1, 0, 0.25);
        o.push(1, 2, 0.25);
        o.push(0, 1, 0.5);
        let fixed = remove_single_peaked_triples(&o, &m, true).unwrap();
        assert_eq!(fixed.entries, o.pruned(0.0).entries);
    }

    #[test]
    fn triple_removal_requires_mean_type() {
        let m = PreferenceModel::contest(0.2, 0.9).unwrap();
        let o = Outcome::new(vec![0.3], vec![0.5]);
        assert!(matches!(
            remove_single_peaked_triples(&o, &m, true),
            Err(Error::NotApplicable(_))
        ));
    }
}
