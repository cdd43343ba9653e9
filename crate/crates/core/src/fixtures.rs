//! Registry of analytic example problems with closed-form expected
//! artifacts, used as oracles by tests and the CLI.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dual::{
    certificate_from_functions, compute_q_interval, contact_set, default_eps_gamma, foc_residual,
    max_abs_v, select_q,
};
use crate::error::{Error, Result};
use crate::lp::{build_primal, duality_gap, solve_lp};
use crate::model::{
    check_aggregate_quasiconcavity, check_strict_single_crossing, PreferenceModel,
};
use crate::nad::{nad_shoot_with, nad_verify, sand_lever_assign, Orientation};
use crate::prior::Prior;
use crate::problem::{uniform_grid, DiscreteProblem};
use crate::structure::{
    classify_dippedness, structure_report, twist_determinant, AssortativeVerdict, Dippedness,
};

/// T(y) = ∫₀ʸ exp(−s²/2) ds, the Gaussian-kernel crossing function of the
/// segment-pairing fixture.
pub fn gauss_t(y: f64) -> f64 {
    (PI / 2.0).sqrt() * libm::erf(y / std::f64::consts::SQRT_2)
}

pub fn gauss_t_prime(y: f64) -> f64 {
    (-0.5 * y * y).exp()
}

type Univariate = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An analytic example with its expected artifacts. Every expected
/// artifact is an evaluator, not a stored number.
pub struct Fixture {
    pub id: String,
    pub note: String,
    pub model: Arc<PreferenceModel>,
    pub prior: Prior,
    pub expected_p: Option<Univariate>,
    pub expected_q: Option<Univariate>,
    pub expected_t1: Option<Univariate>,
    pub expected_t2: Option<Univariate>,
    /// Expected (a_lo, a_hi) of the pooled region.
    pub expected_a_range: Option<(f64, f64)>,
    pub expected_value: Option<Arc<dyn Fn() -> f64 + Send + Sync>>,
    /// Closed-form Γ_a section (list of states) where known.
    pub expected_section: Option<Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
    pub expected_classification: Option<Dippedness>,
    pub orientation: Option<Orientation>,
}

pub const FIXTURE_IDS: &[&str] = &[
    "e1",
    "rs",
    "quantile",
    "segpair",
    "contest",
    "foc_counterexample",
    "no_single_crossing",
    "stability_limit",
    "nad_discrete_fail",
];

/// Looks up a fixture by id. `params` supplies family parameters
/// (contest: lo/hi, quantile: kappa).
pub fn fixture(id: &str, params: &BTreeMap<String, f64>) -> Result<Fixture> {
    match id {
        "e1" => Ok(fixture_e1()),
        "rs" => Ok(fixture_rs()),
        "quantile" => {
            let kappa = params.get("kappa").copied().unwrap_or(0.5);
            fixture_quantile(kappa)
        }
        "segpair" => Ok(fixture_segpair()),
        "contest" => {
            let lo = params.get("lo").copied().unwrap_or(0.2).max(0.05);
            let hi = params.get("hi").copied().unwrap_or(0.5);
            fixture_contest(lo, hi)
        }
        "foc_counterexample" => Ok(fixture_foc_counterexample()),
        "no_single_crossing" => Ok(fixture_no_single_crossing()),
        "stability_limit" => Ok(fixture_stability_limit()),
        "nad_discrete_fail" => Ok(fixture_nad_discrete_fail()),
        other => Err(Error::UnknownFixture(other.into())),
    }
}

fn fixture_e1() -> Fixture {
    let big_v = |a: f64| if a < 0.5 { 0.0 } else { (a - 0.5) * (a - 0.5) };
    let model = Arc::new(PreferenceModel::simple(big_v, |a| {
        if a < 0.5 {
            0.0
        } else {
            2.0 * (a - 0.5)
        }
    }));
    let prior = Prior::atoms(vec![(0.0, 1.0 / 3.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 3.0)]).unwrap();
    let atoms = [0.0, 0.5, 1.0];
    Fixture {
        id: "e1".into(),
        note: "kinked-quadratic sender over a three-state uniform prior; \
               prices, multipliers, contact set, and value in closed form"
            .into(),
        model,
        prior,
        expected_p: Some(Arc::new(move |th| big_v(th))),
        expected_q: Some(Arc::new(|a| if a < 0.5 { 0.0 } else { 2.0 * a - 1.0 })),
        expected_t1: None,
        expected_t2: None,
        expected_a_range: None,
        expected_value: Some(Arc::new(move || {
            atoms.iter().map(|&th| big_v(th) / 3.0).sum()
        })),
        expected_section: Some(Arc::new(|a| {
            if a <= 0.5 {
                vec![0.0, 0.5]
            } else if (a - 1.0).abs() < 1e-12 {
                vec![1.0]
            } else {
                vec![]
            }
        })),
        expected_classification: None,
        orientation: None,
    }
}

fn rs_model() -> Arc<PreferenceModel> {
    Arc::new(
        PreferenceModel::simple_receiver(|a, th| a / th, |_, th| 1.0 / th)
            .with_ranges((1.0 / E, E), (1.0 / E, E))
            .with_second_order(
                Arc::new(|_, th| -1.0 / (th * th)),
                Arc::new(|_, _| 1.0),
                Arc::new(|_, _| 0.0),
                Arc::new(|_, _| 0.0),
                Arc::new(|_, _| 0.0),
            ),
    )
}

fn fixture_rs() -> Fixture {
    Fixture {
        id: "rs".into(),
        note: "reciprocal-weight separable sender on a log-reciprocal \
               density; states pair as (θ, 1/θ) with equal weights and the \
               multiplier is the identity"
            .into(),
        model: rs_model(),
        prior: Prior::reciprocal(1.0 / E, E),
        expected_p: Some(Arc::new(|th| {
            let astar = 0.5 * (th + 1.0 / th);
            astar / th + astar * (th - astar)
        })),
        expected_q: Some(Arc::new(|a| a)),
        expected_t1: Some(Arc::new(|a| a - (a * a - 1.0).max(0.0).sqrt())),
        expected_t2: Some(Arc::new(|a| a + (a * a - 1.0).max(0.0).sqrt())),
        expected_a_range: Some((1.0, E / 2.0 + 1.0 / (2.0 * E))),
        expected_value: None,
        expected_section: None,
        expected_classification: Some(Dippedness::SingleDipped),
        orientation: Some(Orientation::Dipped),
    }
}

fn fixture_quantile(kappa: f64) -> Result<Fixture> {
    let model = Arc::new(PreferenceModel::quantile(kappa, |a| a, |_| 1.0)?);
    Ok(Fixture {
        id: "quantile".into(),
        note: "step-function receiver with sender-favoring ties on a \
               uniform prior; pooled pairs are (t1(a), a) with tail mass \
               balance in closed form"
            .into(),
        model,
        prior: Prior::uniform(0.0, 1.0),
        expected_p: None,
        expected_q: None,
        expected_t1: Some(Arc::new(move |a| {
            // κ·t1 = (1−κ)(1−a) under the uniform prior.
            (1.0 - kappa) * (1.0 - a) / kappa
        })),
        expected_t2: Some(Arc::new(|a| a)),
        expected_a_range: Some((1.0 - kappa, 1.0)),
        expected_value: None,
        expected_section: None,
        expected_classification: Some(Dippedness::SingleDipped),
        orientation: Some(Orientation::Dipped),
    })
}

fn fixture_segpair() -> Fixture {
    let model = Arc::new(
        PreferenceModel::translation_invariant(
            |a| gauss_t(2.0 * a),
            |a| 2.0 * gauss_t_prime(2.0 * a),
            gauss_t,
            gauss_t_prime,
        )
        .with_ranges((-1.0, 3.0), (-1.0, 3.0)),
    );
    // Any density with f(−a) ≥ 3f(3a) on (0,1] works; the strict version
    // exercises the branch where low states randomize between disclosure
    // and pairing.
    let prior = Prior::piecewise_const(vec![-1.0, 0.0, 3.0], vec![0.7, 0.1]).unwrap();
    Fixture {
        id: "segpair".into(),
        note: "Gaussian-kernel supermodular receiver; contact set is three \
               line segments θ ∈ {a on [−1,0], −a and 3a on (0,1]} with an \
               explicit price/multiplier certificate"
            .into(),
        model,
        prior,
        expected_p: Some(Arc::new(|th| {
            if th < 0.0 {
                gauss_t(2.0 * th)
            } else {
                3.0 * gauss_t(2.0 * th / 3.0)
            }
        })),
        expected_q: Some(Arc::new(|a| {
            if a < 0.0 {
                2.0 * gauss_t_prime(2.0 * a) / gauss_t_prime(0.0)
            } else {
                2.0
            }
        })),
        expected_t1: Some(Arc::new(|a| if a <= 0.0 { a } else { -a })),
        expected_t2: Some(Arc::new(|a| if a < 0.0 { a } else { 3.0 * a })),
        expected_a_range: Some((-1.0, 1.0)),
        expected_value: None,
        expected_section: Some(Arc::new(|a| {
            if a < 0.0 {
                vec![a]
            } else if a == 0.0 {
                vec![0.0]
            } else if a <= 1.0 {
                vec![-a, 3.0 * a]
            } else {
                vec![]
            }
        })),
        expected_classification: Some(Dippedness::SingleDipped),
        orientation: Some(Orientation::Dipped),
    }
}

fn fixture_contest(lo: f64, hi: f64) -> Result<Fixture> {
    let model = Arc::new(PreferenceModel::contest(lo, hi)?);
    let classification = if lo >= 1.0 {
        Some(Dippedness::Both)
    } else if hi <= 1.0 / 3.0f64.sqrt() {
        Some(Dippedness::SingleDipped)
    } else if lo >= 1.0 / 3.0f64.sqrt() && hi <= 1.0 {
        Some(Dippedness::SinglePeaked)
    } else {
        None
    };
    let orientation = match classification {
        Some(Dippedness::SingleDipped) => Some(Orientation::Dipped),
        Some(Dippedness::SinglePeaked) => Some(Orientation::Peaked),
        _ => None,
    };
    Ok(Fixture {
        id: "contest".into(),
        note: "effort-contest designer: full disclosure above the unit \
               threshold, dipped pairing below 1/√3, peaked pairing between \
               1/√3 and 1"
            .into(),
        model,
        prior: Prior::uniform(lo, hi),
        expected_p: None,
        expected_q: None,
        expected_t1: None,
        expected_t2: None,
        expected_a_range: None,
        expected_value: None,
        expected_section: None,
        expected_classification: classification,
        orientation,
    })
}

fn fixture_foc_counterexample() -> Fixture {
    let big_v = |a: f64, th: f64| {
        if th < 1.0 / 6.0 {
            -a * a
        } else {
            -a / 3.0 + a * a - 0.75 * a * a * a
        }
    };
    let v = |a: f64, th: f64| {
        if th < 1.0 / 6.0 {
            -2.0 * a
        } else {
            -1.0 / 3.0 + 2.0 * a - 2.25 * a * a
        }
    };
    let model = Arc::new(PreferenceModel::simple_receiver(big_v, v));
    let prior = Prior::atoms(vec![
        (0.0, 1.0 / 3.0),
        (1.0 / 3.0, 1.0 / 3.0),
        (1.0, 1.0 / 3.0),
    ])
    .unwrap();
    Fixture {
        id: "foc_counterexample".into(),
        note: "three-state problem whose optimum reveals the bottom state \
               and pools the rest; the zero action contacts all states but \
               the first-order condition holds only at its disclosed state"
            .into(),
        model,
        prior,
        expected_p: Some(Arc::new(|_| 0.0)),
        expected_q: None,
        expected_t1: None,
        expected_t2: None,
        expected_a_range: None,
        expected_value: Some(Arc::new(|| 0.0)),
        expected_section: None,
        expected_classification: None,
        orientation: None,
    }
}

fn no_single_crossing_model() -> Arc<PreferenceModel> {
    let u = |a: f64, th: f64| -> f64 {
        if th < 1.0 / 6.0 {
            -a
        } else if th < 5.0 / 6.0 {
            0.5 - a
        } else {
            1.0 - a
        }
    };
    let big_v = |a: f64, th: f64| -> f64 {
        if th < 0.5 {
            0.0
        } else if th < 5.0 / 6.0 {
            a - 0.5
        } else {
            a - 1.0
        }
    };
    Arc::new(PreferenceModel::custom(
        Arc::new(big_v),
        Arc::new(move |a, th| if big_v(a, th) == 0.0 { 0.0 } else { 1.0 }),
        Arc::new(u),
        Arc::new(|_, _| -1.0),
        (0.0, 1.0),
        (0.0, 1.0),
    ))
}

fn fixture_no_single_crossing() -> Fixture {
    Fixture {
        id: "no_single_crossing".into(),
        note: "four-state receiver with two states sharing one marginal \
               utility: aggregate quasi-concavity holds but strict single \
               crossing fails at the duplicated pair"
            .into(),
        model: no_single_crossing_model(),
        prior: Prior::atoms(vec![
            (0.0, 0.25),
            (1.0 / 3.0, 0.25),
            (2.0 / 3.0, 0.25),
            (1.0, 0.25),
        ])
        .unwrap(),
        expected_p: Some(Arc::new(|_| 0.0)),
        expected_q: None,
        expected_t1: None,
        expected_t2: None,
        expected_a_range: None,
        expected_value: Some(Arc::new(|| 0.0)),
        expected_section: None,
        expected_classification: None,
        orientation: None,
    }
}

fn fixture_stability_limit() -> Fixture {
    Fixture {
        id: "stability_limit".into(),
        note: "limit of single-dipped section families whose limit set \
               contains a strictly single-peaked triple; classifies as \
               neither"
            .into(),
        model: Arc::new(PreferenceModel::simple(|a| a, |_| 1.0)),
        prior: Prior::atoms(vec![(0.0, 1.0 / 3.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 3.0)]).unwrap(),
        expected_p: None,
        expected_q: None,
        expected_t1: None,
        expected_t2: None,
        expected_a_range: None,
        expected_value: None,
        expected_section: Some(Arc::new(|a| {
            if a < 0.5 {
                vec![0.0, 0.5]
            } else if a == 0.5 {
                vec![0.0, 0.5, 1.0]
            } else {
                vec![0.5, 1.0]
            }
        })),
        expected_classification: Some(Dippedness::Neither),
        orientation: None,
    }
}

fn fixture_nad_discrete_fail() -> Fixture {
    let model = Arc::new(PreferenceModel::simple(
        |a| (3.0 * PI * a).sin(),
        |a| 3.0 * PI * (3.0 * PI * a).cos(),
    ));
    Fixture {
        id: "nad_discrete_fail".into(),
        note: "sine sender over three atoms: the refined contact set \
               {(1/6,0),(1/6,1/2),(5/6,1/2),(5/6,1)} is both dipped and \
               peaked yet not negative assortative; the ODE path must \
               reject the atom prior"
            .into(),
        model,
        prior: Prior::atoms(vec![(0.0, 1.0 / 3.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 3.0)]).unwrap(),
        expected_p: None,
        expected_q: None,
        expected_t1: None,
        expected_t2: None,
        expected_a_range: None,
        expected_value: Some(Arc::new(|| 1.0)),
        expected_section: None,
        expected_classification: Some(Dippedness::Both),
        orientation: None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, observed: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            observed,
            tolerance,
            pass: observed.abs() <= tolerance,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        CheckResult {
            name: name.into(),
            observed: if ok { 0.0 } else { 1.0 },
            tolerance: 0.5,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureReport {
    pub id: String,
    pub resolution: usize,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl FixtureReport {
    fn from_checks(id: &str, resolution: usize, checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        FixtureReport {
            id: id.into(),
            resolution,
            checks,
            pass,
        }
    }
}

/// Runs the pipeline relevant to a fixture at the given resolution and
/// compares against its expected artifacts.
pub fn run_fixture(
    id: &str,
    resolution: usize,
    params: &BTreeMap<String, f64>,
) -> Result<FixtureReport> {
    let fx = fixture(id, params)?;
    let res = resolution.max(3);
    let mut checks = Vec::new();
    match id {
        "e1" => {
            let problem = DiscreteProblem::from_prior(fx.model.clone(), &fx.prior, res, 0)?;
            let built = build_primal(&problem)?;
            let sol = solve_lp(&problem, &built)?;
            let expect = (fx.expected_value.as_ref().unwrap())();
            checks.push(CheckResult::new("lp_value", sol.value - expect, 1e-8));
            checks.push(CheckResult::new("duality_gap", duality_gap(&problem, &sol), 1e-8));
            let p: Vec<f64> = problem
                .theta_grid
                .iter()
                .map(|&th| (fx.expected_p.as_ref().unwrap())(th))
                .collect();
            let (lo, hi) = compute_q_interval(&p, &problem.theta_grid, &fx.model, 0.7)?;
            checks.push(CheckResult::new("q_interval_lo", lo - 0.2, 1e-9));
            checks.push(CheckResult::new("q_interval_hi", hi - 0.7, 1e-9));
            let cert = certificate_from_functions(
                &fx.model,
                &problem.a_grid,
                &problem.theta_grid,
                |th| (fx.expected_p.as_ref().unwrap())(th),
                |a| (fx.expected_q.as_ref().unwrap())(a),
            )?;
            let eps = default_eps_gamma(max_abs_v(&fx.model, &problem.a_grid, &problem.theta_grid));
            let gamma = contact_set(&cert, &fx.model, eps);
            let section_fn = fx.expected_section.as_ref().unwrap();
            let mut section_mismatch = 0usize;
            for (ai, &a) in gamma.a_grid.iter().enumerate() {
                let got: Vec<f64> = gamma.sections[ai]
                    .iter()
                    .map(|&ti| gamma.theta_grid[ti])
                    .collect();
                if got != section_fn(a) {
                    section_mismatch += 1;
                }
            }
            checks.push(CheckResult::new(
                "contact_set_nodes",
                section_mismatch as f64,
                0.0,
            ));
            let verdict =
                crate::dual::verify_support_optimality(&sol.outcome, &cert, &fx.model, eps);
            checks.push(CheckResult::flag("support_in_gamma", verdict.pass));
        }
        "rs" => {
            let sol = nad_shoot_with(&fx.model, &fx.prior, Orientation::Dipped, res)?;
            let tol = if res >= 1000 { 1e-4 } else { 1e-3 };
            let t1f = fx.expected_t1.as_ref().unwrap();
            let t2f = fx.expected_t2.as_ref().unwrap();
            let qf = fx.expected_q.as_ref().unwrap();
            let mut e1: f64 = 0.0;
            let mut e2: f64 = 0.0;
            let mut eq: f64 = 0.0;
            for i in 0..sol.mesh.len() {
                e1 = e1.max((sol.t1[i] - t1f(sol.mesh[i])).abs());
                e2 = e2.max((sol.t2[i] - t2f(sol.mesh[i])).abs());
                eq = eq.max((sol.q[i] - qf(sol.mesh[i])).abs());
            }
            let (alo, ahi) = fx.expected_a_range.unwrap();
            checks.push(CheckResult::new("t1_error", e1, tol));
            checks.push(CheckResult::new("t2_error", e2, tol));
            checks.push(CheckResult::new("q_error", eq, tol));
            checks.push(CheckResult::new("a_lo", sol.a_lo - alo, 1e-4));
            checks.push(CheckResult::new("a_hi", sol.a_hi - ahi, 1e-5));
            let rep = nad_verify(&sol, &fx.model, &fx.prior)?;
            checks.push(CheckResult::flag("nad_verify", rep.pass));
        }
        "quantile" => {
            let kappa = params.get("kappa").copied().unwrap_or(0.5);
            let sol = nad_shoot_with(&fx.model, &fx.prior, Orientation::Dipped, res)?;
            let rep = nad_verify(&sol, &fx.model, &fx.prior)?;
            checks.push(CheckResult::new(
                "obedience_residual",
                rep.max_obedience_residual,
                1e-6,
            ));
            let outcome = sand_lever_assign(&sol, &fx.prior, &fx.model)?;
            // α([a,1]) = φ([a,1])/κ along the lever range.
            let marginal = outcome.action_marginal();
            let mut worst: f64 = 0.0;
            for probe in [0.55, 0.6, 0.7, 0.8, 0.9] {
                if probe <= sol.a_lo {
                    continue;
                }
                let tail: f64 = marginal
                    .iter()
                    .filter(|&&(a, _)| a >= probe)
                    .map(|&(_, m)| m)
                    .sum();
                let expect = (1.0 - fx.prior.cdf(probe)) / kappa;
                worst = worst.max((tail - expect).abs());
            }
            checks.push(CheckResult::new("alpha_tail", worst, 1e-3));
            let t1f = fx.expected_t1.as_ref().unwrap();
            let mut e1: f64 = 0.0;
            for i in 0..sol.mesh.len() {
                e1 = e1.max((sol.t1[i] - t1f(sol.mesh[i])).abs());
            }
            checks.push(CheckResult::new("t1_error", e1, 1e-9));
        }
        "segpair" => {
            let a_grid = uniform_grid(-1.0, 3.0, res);
            let th_grid = uniform_grid(-1.0, 3.0, res);
            let cert = certificate_from_functions(
                &fx.model,
                &a_grid,
                &th_grid,
                |th| (fx.expected_p.as_ref().unwrap())(th),
                |a| (fx.expected_q.as_ref().unwrap())(a),
            )?;
            checks.push(CheckResult::new(
                "d1_min_residual",
                cert.min_d1_residual(&fx.model).min(0.0),
                1e-12,
            ));
            let t1f = fx.expected_t1.as_ref().unwrap();
            let t2f = fx.expected_t2.as_ref().unwrap();
            let mut seg_res: f64 = 0.0;
            for (ai, &a) in a_grid.iter().enumerate() {
                if a > 1.0 {
                    continue;
                }
                for th in [t1f(a), t2f(a)] {
                    if let Some(ti) = th_grid.iter().position(|&x| (x - th).abs() <= 1e-9) {
                        seg_res = seg_res.max(cert.d1_residual(&fx.model, ai, ti).abs());
                    }
                }
            }
            checks.push(CheckResult::new("segment_equality", seg_res, 1e-9));
            // Off-set probes bounded away from the three segments.
            let mut rng = ChaCha8Rng::seed_from_u64(0x5e6_9a1);
            let mut min_slack = f64::INFINITY;
            let mut found = 0usize;
            while found < 1000 {
                let a = rng.gen_range(-1.0..3.0);
                let th = rng.gen_range(-1.0..3.0);
                if distance_to_segpair_gamma(a, th) < 0.08 {
                    continue;
                }
                found += 1;
                let p = (fx.expected_p.as_ref().unwrap())(th);
                let q = (fx.expected_q.as_ref().unwrap())(a);
                let slack = p - fx.model.big_v(a, th) - q * fx.model.u(a, th);
                min_slack = min_slack.min(slack);
            }
            checks.push(CheckResult::flag("off_gamma_slack", min_slack >= 1e-6));
            let mut pts = Vec::new();
            for &a in &a_grid {
                if a <= 1.0 {
                    pts.push((a, t1f(a)));
                    pts.push((a, t2f(a)));
                }
            }
            let verdict = classify_dippedness(&pts)?;
            checks.push(CheckResult::flag(
                "classification_single_dipped",
                verdict.verdict == Dippedness::SingleDipped,
            ));
        }
        "contest" => {
            let lo = params.get("lo").copied().unwrap_or(0.2).max(0.05);
            let hi = params.get("hi").copied().unwrap_or(0.5);
            let problem = DiscreteProblem::from_prior(fx.model.clone(), &fx.prior, res, res)?;
            let report = structure_report(
                &fx.model,
                &fx.prior,
                &problem.a_grid,
                &problem.theta_grid,
                33,
            )?;
            if lo >= 1.0 {
                checks.push(CheckResult::flag(
                    "full_disclosure",
                    report.full_disclosure.holds && report.full_disclosure.strict,
                ));
                let built = build_primal(&problem)?;
                let sol = solve_lp(&problem, &built)?;
                let step = problem.a_grid[1] - problem.a_grid[0];
                let mut worst: f64 = 0.0;
                for &(ai, ti, _) in &sol.outcome.entries {
                    let a = sol.outcome.a_values[ai];
                    let th = sol.outcome.theta_values[ti];
                    let astar = th / (1.0 + th * th);
                    worst = worst.max((a - astar).abs());
                }
                checks.push(CheckResult::new("support_on_diagonal", worst, 1.5 * step));
            } else {
                let want = fx.expected_classification;
                let got = match report.verdict {
                    AssortativeVerdict::StrictDipped | AssortativeVerdict::Dipped => {
                        Some(Dippedness::SingleDipped)
                    }
                    AssortativeVerdict::StrictPeaked | AssortativeVerdict::Peaked => {
                        Some(Dippedness::SinglePeaked)
                    }
                    AssortativeVerdict::Undetermined => None,
                };
                checks.push(CheckResult::flag("assortative_verdict", want == got));
                let built = build_primal(&problem)?;
                let sol = solve_lp(&problem, &built)?;
                let verdict = classify_dippedness(&sol.outcome.pruned(1e-9).support_points())?;
                checks.push(CheckResult::flag(
                    "lp_outcome_classification",
                    Some(verdict.verdict) == want || verdict.verdict == Dippedness::Both,
                ));
            }
            // Twist determinant against its closed form on random triples.
            let mut rng = ChaCha8Rng::seed_from_u64(0xc0e7e57);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let mut t: Vec<f64> = (0..3).map(|_| rng.gen_range(lo..hi)).collect();
                t.sort_by(|x, y| x.partial_cmp(y).unwrap());
                if t[1] - t[0] < 1e-6 || t[2] - t[1] < 1e-6 {
                    continue;
                }
                let a = rng.gen_range(fx.model.a_range.0..fx.model.a_range.1);
                let s = twist_determinant(&fx.model, a, t[0], t[1], t[2]);
                let cf = (t[2] - t[1]) * (t[2] - t[0]) * (t[1] - t[0])
                    * (1.0 - t[1] * t[2] - t[0] * t[2] - t[0] * t[1])
                    / (t[0] * t[1] * t[2]);
                worst = worst.max((s - cf).abs());
            }
            checks.push(CheckResult::new("twist_closed_form", worst, 1e-10));
        }
        "foc_counterexample" => {
            let problem = DiscreteProblem::from_prior(fx.model.clone(), &fx.prior, res, 0)?;
            let built = build_primal(&problem)?;
            let sol = solve_lp(&problem, &built)?;
            checks.push(CheckResult::new("lp_value", sol.value, 1e-8));
            let cert = select_q(
                &vec![0.0; problem.theta_grid.len()],
                &fx.model,
                &problem,
                default_eps_gamma(1.0),
            )?;
            let eps = default_eps_gamma(max_abs_v(&fx.model, &problem.a_grid, &problem.theta_grid));
            let gamma = contact_set(&cert, &fx.model, eps);
            let zero_idx = problem
                .a_grid
                .iter()
                .position(|&a| a.abs() < 1e-12)
                .expect("a = 0 on grid");
            let sec: Vec<f64> = gamma.sections[zero_idx]
                .iter()
                .map(|&ti| gamma.theta_grid[ti])
                .collect();
            checks.push(CheckResult::flag(
                "gamma_zero_section",
                sec == vec![0.0, 1.0 / 3.0, 1.0],
            ));
            let star: Vec<f64> = gamma.star_sections[zero_idx]
                .iter()
                .map(|&ti| gamma.theta_grid[ti])
                .collect();
            checks.push(CheckResult::flag("gamma_star_zero_section", star == vec![0.0]));
            let r_top = foc_residual(&fx.model, &cert, 0.0, 1.0);
            let r_mid = foc_residual(&fx.model, &cert, 0.0, 1.0 / 3.0);
            checks.push(CheckResult::flag(
                "foc_fails_off_star",
                r_top.abs().max(r_mid.abs()) > 0.1,
            ));
            let r_star = foc_residual(&fx.model, &cert, 0.0, 0.0);
            checks.push(CheckResult::new("foc_holds_on_star", r_star, 1e-4));
        }
        "no_single_crossing" => {
            let a_grid = uniform_grid(0.0, 1.0, res);
            let th_grid = vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
            let sc = check_strict_single_crossing(&fx.model, &a_grid, &th_grid);
            checks.push(CheckResult::flag("single_crossing_fails", !sc.pass));
            if let Some((_, th, th2)) = sc.witness {
                checks.push(CheckResult::flag(
                    "witness_duplicated_pair",
                    (th - 1.0 / 3.0).abs() < 1e-9 && (th2 - 2.0 / 3.0).abs() < 1e-9,
                ));
            } else {
                checks.push(CheckResult::flag("witness_duplicated_pair", false));
            }
            let qc = check_aggregate_quasiconcavity(&fx.model, &a_grid, &th_grid);
            checks.push(CheckResult::flag("quasiconcavity_passes", qc.pass));
        }
        "stability_limit" => {
            let section_fn = fx.expected_section.as_ref().unwrap();
            let mut pts = Vec::new();
            for &a in uniform_grid(0.25, 0.75, res.max(5) | 1).iter() {
                for th in section_fn(a) {
                    pts.push((a, th));
                }
            }
            let verdict = classify_dippedness(&pts)?;
            checks.push(CheckResult::flag(
                "classification_neither",
                verdict.verdict == Dippedness::Neither,
            ));
            checks.push(CheckResult::flag(
                "peaked_witness_found",
                verdict.peaked_witness.is_some(),
            ));
        }
        "nad_discrete_fail" => {
            let star_points = [
                (1.0 / 6.0, 0.0),
                (1.0 / 6.0, 0.5),
                (5.0 / 6.0, 0.5),
                (5.0 / 6.0, 1.0),
            ];
            let verdict = classify_dippedness(&star_points)?;
            checks.push(CheckResult::flag(
                "classification_both",
                verdict.verdict == Dippedness::Both,
            ));
            let pooling = crate::structure::pooling_test(&fx.model, &fx.prior, 33)?;
            checks.push(CheckResult::flag("pooling_holds", pooling.holds_for_all_pairs));
            let rejected = matches!(
                crate::nad::nad_shoot(&fx.model, &fx.prior, Orientation::Dipped),
                Err(Error::AtomPrior)
            );
            checks.push(CheckResult::flag("atom_prior_rejected", rejected));
            // The LP reproduces the mixed optimum at value 1 when the grid
            // holds the sixth-fractions exactly.
            let m = if (res - 1) % 6 == 0 { res } else { 601 };
            let problem = DiscreteProblem::from_prior(fx.model.clone(), &fx.prior, m, 0)?;
            let built = build_primal(&problem)?;
            let sol = solve_lp(&problem, &built)?;
            let expect = (fx.expected_value.as_ref().unwrap())();
            checks.push(CheckResult::new("lp_value", sol.value - expect, 1e-6));
        }
        other => return Err(Error::UnknownFixture(other.into())),
    }
    Ok(FixtureReport::from_checks(id, res, checks))
}

/// Distance from (a, θ) to the three contact segments of the
/// segment-pairing fixture.
pub fn distance_to_segpair_gamma(a: f64, th: f64) -> f64 {
    let d1 = dist_to_segment(a, th, (-1.0, -1.0), (0.0, 0.0)); // θ = a
    let d2 = dist_to_segment(a, th, (0.0, 0.0), (1.0, -1.0)); // θ = −a
    let d3 = dist_to_segment(a, th, (0.0, 0.0), (1.0, 3.0)); // θ = 3a
    d1.min(d2).min(d3)
}

fn dist_to_segment(x: f64, y: f64, p0: (f64, f64), p1: (f64, f64)) -> f64 {
    let (dx, dy) = (p1.0 - p0.0, p1.1 - p0.1);
    let len2 = dx * dx + dy * dy;
    let t = (((x - p0.0) * dx + (y - p0.1) * dy) / len2).clamp(0.0, 1.0);
    let (px, py) = (p0.0 + t * dx, p0.1 + t * dy);
    ((x - px) * (x - px) + (y - py) * (y - py)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unknown_fixture_errors() {
        assert!(matches!(
            fixture("bogus", &BTreeMap::new()),
            Err(Error::UnknownFixture(_))
        ));
    }

    #[test]
    fn rs_t1_closed_form() {
        let fx = fixture("rs", &BTreeMap::new()).unwrap();
        let t1 = fx.expected_t1.as_ref().unwrap();
        assert_abs_diff_eq!(t1(1.2), 0.5366750419, epsilon = 1e-9);
    }

    #[test]
    fn e1_value_evaluator() {
        let fx = fixture("e1", &BTreeMap::new()).unwrap();
        let v = (fx.expected_value.as_ref().unwrap())();
        assert_abs_diff_eq!(v, 1.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn segpair_certificate_equality_at_probe() {
        // 3T(1) = T(1) + 2T(1) at (a, θ) = (0.5, 1.5) on the θ = 3a branch.
        let fx = fixture("segpair", &BTreeMap::new()).unwrap();
        let p = (fx.expected_p.as_ref().unwrap())(1.5);
        let q = (fx.expected_q.as_ref().unwrap())(0.5);
        let lhs = p - fx.model.big_v(0.5, 1.5) - q * fx.model.u(0.5, 1.5);
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn segpair_log_concavity_precondition() {
        // T''/T' = −y is strictly decreasing.
        for &y in &[-1.0, -0.3, 0.0, 0.4, 2.0] {
            let ratio = -y * gauss_t_prime(y) / gauss_t_prime(y);
            assert_abs_diff_eq!(ratio, -y, epsilon = 1e-12);
        }
    }

    #[test]
    fn contest_twist_closed_form_samples() {
        let fx = fixture("contest", &BTreeMap::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut t: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..0.5)).collect();
            t.sort_by(|x, y| x.partial_cmp(y).unwrap());
            if t[1] - t[0] < 1e-9 || t[2] - t[1] < 1e-9 {
                continue;
            }
            let a = rng.gen_range(fx.model.a_range.0..fx.model.a_range.1);
            let s = twist_determinant(&fx.model, a, t[0], t[1], t[2]);
            let cf = (t[2] - t[1]) * (t[2] - t[0]) * (t[1] - t[0])
                * (1.0 - t[1] * t[2] - t[0] * t[2] - t[0] * t[1])
                / (t[0] * t[1] * t[2]);
            assert_abs_diff_eq!(s, cf, epsilon = 1e-10);
        }
    }

    #[test]
    fn stability_limit_report() {
        let rep = run_fixture("stability_limit", 9, &BTreeMap::new()).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn nad_discrete_fail_report() {
        let rep = run_fixture("nad_discrete_fail", 601, &BTreeMap::new()).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn no_single_crossing_report() {
        let rep = run_fixture("no_single_crossing", 51, &BTreeMap::new()).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
