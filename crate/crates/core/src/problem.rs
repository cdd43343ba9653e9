//! Discretized problems and sparse outcomes over (action, state) pairs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::PreferenceModel;
use crate::prior::Prior;

/// Uniform grid of `n` nodes on [lo, hi], endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Clone)]
pub struct DiscreteProblem {
    pub a_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    pub prior_mass: Vec<f64>,
    pub model: Arc<PreferenceModel>,
}

impl std::fmt::Debug for DiscreteProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "DiscreteProblem({} actions x {} states, {:?})",
            self.a_grid.len(),
            self.theta_grid.len(),
            self.model.family
        )
    }
}

impl DiscreteProblem {
    pub fn new(
        model: Arc<PreferenceModel>,
        a_grid: Vec<f64>,
        theta_grid: Vec<f64>,
        prior_mass: Vec<f64>,
    ) -> Result<Self> {
        if a_grid.is_empty() || theta_grid.is_empty() {
            return Err(Error::Invalid("grids must be nonempty".into()));
        }
        for w in a_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("a_grid must be strictly increasing".into()));
            }
        }
        for w in theta_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("theta_grid must be strictly increasing".into()));
            }
        }
        if prior_mass.len() != theta_grid.len() {
            return Err(Error::Invalid("prior_mass length must match theta_grid".into()));
        }
        let total: f64 = prior_mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("prior_mass sums to {total}")));
        }
        if prior_mass.iter().any(|&m| m < 0.0) {
            return Err(Error::Invalid("prior_mass must be nonnegative".into()));
        }
        Ok(DiscreteProblem {
            a_grid,
            theta_grid,
            prior_mass,
            model,
        })
    }

    /// Discretizes a prior onto grids of the given sizes over the model's
    /// rectangle. Atom priors become their own θ-grid; density priors get
    /// cell masses from exact cdf differences (Voronoi cells), which sum
    /// to one by construction.
    pub fn from_prior(
        model: Arc<PreferenceModel>,
        prior: &Prior,
        m_actions: usize,
        n_states: usize,
    ) -> Result<Self> {
        let (a_lo, a_hi) = model.a_range;
        let a_grid = uniform_grid(a_lo, a_hi, m_actions);
        match prior {
            Prior::Atoms(pts) => {
                let theta_grid: Vec<f64> = pts.iter().map(|&(t, _)| t).collect();
                let prior_mass: Vec<f64> = pts.iter().map(|&(_, m)| m).collect();
                Self::new(model, a_grid, theta_grid, prior_mass)
            }
            Prior::Density { support, .. } => {
                let (lo, hi) = *support;
                let theta_grid = uniform_grid(lo, hi, n_states);
                let mut prior_mass = Vec::with_capacity(n_states);
                for j in 0..n_states {
                    let left = if j == 0 {
                        lo
                    } else {
                        0.5 * (theta_grid[j - 1] + theta_grid[j])
                    };
                    let right = if j + 1 == n_states {
                        hi
                    } else {
                        0.5 * (theta_grid[j] + theta_grid[j + 1])
                    };
                    prior_mass.push(prior.cdf(right) - prior.cdf(left));
                }
                // Exact cdf telescoping leaves only rounding; renormalize it away.
                let total: f64 = prior_mass.iter().sum();
                for m in &mut prior_mass {
                    *m /= total;
                }
                Self::new(model, a_grid, theta_grid, prior_mass)
            }
        }
    }

    pub fn n_states(&self) -> usize {
        self.theta_grid.len()
    }
    pub fn n_actions(&self) -> usize {
        self.a_grid.len()
    }
}

/// Sparse joint measure over (action, state) pairs. Coordinates live in
/// the `a_values`/`theta_values` dictionaries so that outcomes from grid
/// solves and from the ODE path share one representation.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub a_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    /// (a index, θ index, mass > 0)
    pub entries: Vec<(usize, usize, f64)>,
}

impl Outcome {
    pub fn new(a_values: Vec<f64>, theta_values: Vec<f64>) -> Self {
        Outcome {
            a_values,
            theta_values,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, ai: usize, ti: usize, mass: f64) {
        debug_assert!(mass > 0.0);
        self.entries.push((ai, ti, mass));
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|&(_, _, m)| m).sum()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// Marginal over θ indexed by `theta_values`.
    pub fn theta_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.theta_values.len()];
        for &(_, ti, m) in &self.entries {
            out[ti] += m;
        }
        out
    }

    /// Marginal over actions as (a, mass), ascending in a.
    pub fn action_marginal(&self) -> Vec<(f64, f64)> {
        let mut out = vec![0.0; self.a_values.len()];
        for &(ai, _, m) in &self.entries {
            out[ai] += m;
        }
        let mut pairs: Vec<(f64, f64)> = out
            .into_iter()
            .enumerate()
            .filter(|&(_, m)| m > 0.0)
            .map(|(i, m)| (self.a_values[i], m))
            .collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        pairs
    }

    /// Conditional slices π_a: for each action index in support, the list
    /// of (θ index, conditional probability).
    pub fn conditionals(&self) -> Vec<(usize, Vec<(usize, f64)>)> {
        let mut per_action: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.a_values.len()];
        let mut alpha = vec![0.0; self.a_values.len()];
        for &(ai, ti, m) in &self.entries {
            per_action[ai].push((ti, m));
            alpha[ai] += m;
        }
        per_action
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_empty())
            .map(|(ai, mut v)| {
                for e in &mut v {
                    e.1 /= alpha[ai];
                }
                v.sort_by(|x, y| x.0.cmp(&y.0));
                (ai, v)
            })
            .collect()
    }

    /// Largest per-action |E_{π_a}[u]| over the support (conditional scale).
    pub fn max_obedience_residual(&self, model: &PreferenceModel) -> f64 {
        let mut worst: f64 = 0.0;
        for (ai, cond) in self.conditionals() {
            let a = self.a_values[ai];
            let r: f64 = cond
                .iter()
                .map(|&(ti, p)| p * model.u(a, self.theta_values[ti]))
                .sum();
            worst = worst.max(r.abs());
        }
        worst
    }

    /// Drops entries with mass at or below `tol` and merges duplicates.
    pub fn pruned(&self, tol: f64) -> Outcome {
        let mut map: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for &(ai, ti, m) in &self.entries {
            *map.entry((ai, ti)).or_insert(0.0) += m;
        }
        Outcome {
            a_values: self.a_values.clone(),
            theta_values: self.theta_values.clone(),
            entries: map
                .into_iter()
                .filter(|&(_, m)| m > tol)
                .map(|((ai, ti), m)| (ai, ti, m))
                .collect(),
        }
    }

    /// Support as concrete (a, θ) coordinates.
    pub fn support_points(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .map(|&(ai, ti, _)| (self.a_values[ai], self.theta_values[ti]))
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "a,theta,mass")?;
        let mut rows: Vec<(f64, f64, f64)> = self
            .entries
            .iter()
            .map(|&(ai, ti, m)| (self.a_values[ai], self.theta_values[ti], m))
            .collect();
        rows.sort_by(|x, y| (x.0, x.1).partial_cmp(&(y.0, y.1)).unwrap());
        for (a, th, m) in rows {
            writeln!(w, "{a},{th},{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_masses_sum_to_one() {
        let e = std::f64::consts::E;
        let model = Arc::new(
            crate::model::PreferenceModel::simple_receiver(|a, th| a / th, |_, th| 1.0 / th)
                .with_ranges((1.0 / e, e), (1.0 / e, e)),
        );
        let prior = Prior::reciprocal(1.0 / e, e);
        let p = DiscreteProblem::from_prior(model, &prior, 51, 101).unwrap();
        assert_abs_diff_eq!(p.prior_mass.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert_eq!(p.theta_grid.len(), 101);
    }

    #[test]
    fn atom_prior_becomes_grid() {
        let model = Arc::new(crate::model::PreferenceModel::simple(|a| a, |_| 1.0));
        let prior = Prior::atoms(vec![(0.0, 1.0 / 3.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 3.0)]).unwrap();
        let p = DiscreteProblem::from_prior(model, &prior, 101, 0).unwrap();
        assert_eq!(p.theta_grid, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn outcome_marginals() {
        let mut o = Outcome::new(vec![0.25, 0.75], vec![0.0, 0.5, 1.0]);
        o.push(0, 0, 0.25);
        o.push(0, 1, 0.25);
        o.push(1, 1, 0.25);
        o.push(1, 2, 0.25);
        assert_abs_diff_eq!(o.total_mass(), 1.0, epsilon = 1e-15);
        assert_eq!(o.theta_marginal(), vec![0.25, 0.5, 0.25]);
        let am = o.action_marginal();
        assert_eq!(am.len(), 2);
        assert_abs_diff_eq!(am[0].1, 0.5, epsilon = 1e-15);
    }
}
