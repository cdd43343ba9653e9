//! Priors (atomic or density) and finite-support posteriors.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Built-in density shapes. Each carries a closed-form cdf so that grid
/// discretization and tail computations are exact.
#[derive(Clone)]
pub enum Density {
    Uniform,
    /// f(θ) = c/θ with c = 1/ln(hi/lo).
    Reciprocal,
    /// Piecewise-constant heights between consecutive breaks; heights are
    /// stored as given and normalized by the constructor.
    PiecewiseConst { breaks: Vec<f64>, heights: Vec<f64> },
    Custom {
        name: String,
        pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Density::Uniform => write!(f, "Uniform"),
            Density::Reciprocal => write!(f, "Reciprocal"),
            Density::PiecewiseConst { breaks, .. } => {
                write!(f, "PiecewiseConst({} pieces)", breaks.len().saturating_sub(1))
            }
            Density::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Prior {
    Atoms(Vec<(f64, f64)>),
    Density { kind: Density, support: (f64, f64) },
}

impl Prior {
    pub fn atoms(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("prior needs at least one atom".into()));
        }
        let total: f64 = points.iter().map(|&(_, m)| m).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "atom masses sum to {total}, not 1"
            )));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Invalid("atom states must be strictly increasing".into()));
            }
        }
        if points.iter().any(|&(_, m)| m <= 0.0) {
            return Err(Error::Invalid("atom masses must be positive".into()));
        }
        Ok(Prior::Atoms(points))
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Prior::Density {
            kind: Density::Uniform,
            support: (lo, hi),
        }
    }

    pub fn reciprocal(lo: f64, hi: f64) -> Self {
        Prior::Density {
            kind: Density::Reciprocal,
            support: (lo, hi),
        }
    }

    pub fn piecewise_const(breaks: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if breaks.len() != heights.len() + 1 || heights.is_empty() {
            return Err(Error::Invalid("need k+1 breaks for k heights".into()));
        }
        let mut mass = 0.0;
        for (i, &h) in heights.iter().enumerate() {
            if h < 0.0 || breaks[i + 1] <= breaks[i] {
                return Err(Error::Invalid("breaks must increase, heights be nonnegative".into()));
            }
            mass += h * (breaks[i + 1] - breaks[i]);
        }
        let heights = heights.iter().map(|h| h / mass).collect();
        let support = (breaks[0], *breaks.last().unwrap());
        Ok(Prior::Density {
            kind: Density::PiecewiseConst { breaks, heights },
            support,
        })
    }

    pub fn is_density(&self) -> bool {
        matches!(self, Prior::Density { .. })
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Prior::Atoms(pts) => (pts[0].0, pts[pts.len() - 1].0),
            Prior::Density { support, .. } => *support,
        }
    }

    /// Density value; zero outside the support, errors for atom priors.
    pub fn pdf(&self, theta: f64) -> Result<f64> {
        match self {
            Prior::Atoms(_) => Err(Error::AtomPrior),
            Prior::Density { kind, support } => {
                let (lo, hi) = *support;
                if theta < lo || theta > hi {
                    return Ok(0.0);
                }
                Ok(match kind {
                    Density::Uniform => 1.0 / (hi - lo),
                    Density::Reciprocal => 1.0 / (theta * (hi / lo).ln()),
                    Density::PiecewiseConst { breaks, heights } => {
                        let mut i = 0;
                        while i + 1 < heights.len() && theta >= breaks[i + 1] {
                            i += 1;
                        }
                        heights[i]
                    }
                    Density::Custom { pdf, .. } => pdf(theta),
                })
            }
        }
    }

    /// φ([support_lo, θ]); works for both atom and density priors.
    pub fn cdf(&self, theta: f64) -> f64 {
        match self {
            Prior::Atoms(pts) => pts
                .iter()
                .filter(|&&(t, _)| t <= theta + 1e-15)
                .map(|&(_, m)| m)
                .sum(),
            Prior::Density { kind, support } => {
                let (lo, hi) = *support;
                let th = theta.clamp(lo, hi);
                match kind {
                    Density::Uniform => (th - lo) / (hi - lo),
                    Density::Reciprocal => (th / lo).ln() / (hi / lo).ln(),
                    Density::PiecewiseConst { breaks, heights } => {
                        let mut acc = 0.0;
                        for (i, &h) in heights.iter().enumerate() {
                            if th <= breaks[i] {
                                break;
                            }
                            acc += h * (th.min(breaks[i + 1]) - breaks[i]);
                        }
                        acc
                    }
                    Density::Custom { cdf, .. } => cdf(th),
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Prior::Atoms(pts) => pts.iter().map(|&(t, m)| t * m).sum(),
            Prior::Density { support, .. } => {
                // Composite Simpson on the pdf; exact enough for bracketing uses.
                let (lo, hi) = *support;
                let n = 2048;
                let h = (hi - lo) / n as f64;
                let f = |x: f64| x * self.pdf(x).unwrap_or(0.0);
                let mut s = f(lo) + f(hi);
                for k in 1..n {
                    let x = lo + k as f64 * h;
                    s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
                }
                s * h / 3.0
            }
        }
    }

    /// Verifies the normalization invariant: atom masses sum to 1 within
    /// 1e-12; a density integrates to 1 within 1e-8 under Simpson.
    pub fn check_normalized(&self) -> Result<()> {
        match self {
            Prior::Atoms(pts) => {
                let total: f64 = pts.iter().map(|&(_, m)| m).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Invalid(format!("atom mass total {total}")));
                }
                Ok(())
            }
            Prior::Density { support, .. } => {
                let (lo, hi) = *support;
                let n = 4096;
                let h = (hi - lo) / n as f64;
                let mut s = self.pdf(lo)? + self.pdf(hi)?;
                for k in 1..n {
                    let x = lo + k as f64 * h;
                    s += if k % 2 == 1 { 4.0 } else { 2.0 } * self.pdf(x)?;
                }
                let total = s * h / 3.0;
                if (total - 1.0).abs() > 1e-8 {
                    return Err(Error::Invalid(format!("density integrates to {total}")));
                }
                Ok(())
            }
        }
    }
}

/// Finite-support posterior: states strictly increasing, weights positive
/// and summing to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    points: Vec<(f64, f64)>,
}

impl Posterior {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("posterior needs support".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Invalid("posterior states must be strictly increasing".into()));
            }
        }
        if points.iter().any(|&(_, w)| w <= 0.0) {
            return Err(Error::Invalid("posterior weights must be positive".into()));
        }
        let total: f64 = points.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("posterior weights sum to {total}")));
        }
        Ok(Posterior { points })
    }

    pub fn point_mass(theta: f64) -> Self {
        Posterior {
            points: vec![(theta, 1.0)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().map(|&(t, w)| t * w).sum()
    }

    pub fn support_size(&self) -> usize {
        self.points.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reciprocal_density_normalizes() {
        let e = std::f64::consts::E;
        let p = Prior::reciprocal(1.0 / e, e);
        p.check_normalized().unwrap();
        assert_abs_diff_eq!(p.pdf(1.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.cdf(e), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.cdf(1.0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn piecewise_const_cdf() {
        let p = Prior::piecewise_const(vec![-1.0, 0.0, 3.0], vec![0.7, 0.1]).unwrap();
        assert_abs_diff_eq!(p.cdf(0.0), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p.cdf(3.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pdf(-0.5).unwrap(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pdf(1.0).unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn atom_prior_rejects_bad_mass() {
        assert!(Prior::atoms(vec![(0.0, 0.5), (1.0, 0.6)]).is_err());
        assert!(Prior::atoms(vec![(0.5, 0.5), (0.2, 0.5)]).is_err());
    }

    #[test]
    fn posterior_invariants() {
        assert!(Posterior::new(vec![(0.2, 0.5), (0.2, 0.5)]).is_err());
        assert!(Posterior::new(vec![(0.2, 0.4), (0.8, 0.4)]).is_err());
        let mu = Posterior::new(vec![(0.2, 0.5), (0.8, 0.5)]).unwrap();
        assert_abs_diff_eq!(mu.mean(), 0.5, epsilon = 1e-15);
    }
}
