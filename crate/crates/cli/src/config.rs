//! Problem configuration: a single JSON document with model families
//! referenced by tag and numeric parameters. Custom models are tabulated
//! grids of V, v, u, u_a (bilinear interpolation); there is no embedded
//! expression language.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use persuade_core::model::Bivariate;
use persuade_core::{Prior, PreferenceModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub schema_version: u32,
    pub model: ModelConfig,
    pub prior: PriorConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    /// Polynomial coefficients of V(a) = Σ c_k a^k for action-only senders.
    #[serde(default)]
    pub v_coeffs: Option<Vec<f64>>,
    /// Bivariate polynomial V(a,θ) = Σ b[k][l] a^k θ^l.
    #[serde(default)]
    pub v_matrix: Option<Vec<Vec<f64>>>,
    /// Tabulated custom model.
    #[serde(default)]
    pub tables: Option<Tables>,
    #[serde(default)]
    pub a_range: Option<(f64, f64)>,
    #[serde(default)]
    pub theta_range: Option<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tables {
    pub a_nodes: Vec<f64>,
    pub theta_nodes: Vec<f64>,
    #[serde(rename = "V")]
    pub big_v: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub u_a: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub kind: String,
    #[serde(default)]
    pub atoms: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub density_name: Option<String>,
    #[serde(default)]
    pub support: Option<(f64, f64)>,
    #[serde(default)]
    pub breaks: Option<Vec<f64>>,
    #[serde(default)]
    pub heights: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub m: Option<usize>,
    pub n: Option<usize>,
}

#[derive(Debug, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub eps_gamma: Option<f64>,
    pub foc: Option<f64>,
    pub obedience: Option<f64>,
}

pub struct LoadedProblem {
    pub model: Arc<PreferenceModel>,
    pub prior: Prior,
    pub grids: (usize, usize),
    pub tolerances: ToleranceConfig,
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_deriv(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn bipoly(b: &[Vec<f64>], a: f64, th: f64) -> f64 {
    let mut acc = 0.0;
    let mut apow = 1.0;
    for row in b {
        acc += apow * poly(row, th);
        apow *= a;
    }
    acc
}

fn bipoly_da(b: &[Vec<f64>], a: f64, th: f64) -> f64 {
    let mut acc = 0.0;
    let mut apow = 1.0;
    for (k, row) in b.iter().enumerate().skip(1) {
        acc += k as f64 * apow * poly(row, th);
        apow *= a;
    }
    acc
}

fn interp2(nodes_a: &[f64], nodes_t: &[f64], table: &[Vec<f64>], a: f64, th: f64) -> f64 {
    let locate = |grid: &[f64], x: f64| -> (usize, f64) {
        if x <= grid[0] {
            return (0, 0.0);
        }
        if x >= grid[grid.len() - 1] {
            return (grid.len() - 2, 1.0);
        }
        let mut lo = 0;
        let mut hi = grid.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if grid[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, (x - grid[lo]) / (grid[lo + 1] - grid[lo]))
    };
    let (i, wa) = locate(nodes_a, a);
    let (j, wt) = locate(nodes_t, th);
    (1.0 - wa) * (1.0 - wt) * table[i][j]
        + (1.0 - wa) * wt * table[i][j + 1]
        + wa * (1.0 - wt) * table[i + 1][j]
        + wa * wt * table[i + 1][j + 1]
}

pub fn load(doc: &ConfigDoc) -> Result<LoadedProblem, String> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        ));
    }
    let m = doc.grids.m.unwrap_or(101);
    let n = doc.grids.n.unwrap_or(101);
    if m == 0 || n == 0 || m > 2001 || n > 2001 {
        return Err("grid sizes must be within 1..=2001".into());
    }
    let model = build_model(&doc.model)?;
    let prior = build_prior(&doc.prior)?;
    prior.check_normalized().map_err(|e| e.to_string())?;
    Ok(LoadedProblem {
        model: Arc::new(model),
        prior,
        grids: (m, n),
        tolerances: doc.tolerances.clone(),
    })
}

fn build_model(mc: &ModelConfig) -> Result<PreferenceModel, String> {
    let model = match mc.family.as_str() {
        "simple" | "quantile" => {
            let coeffs = mc
                .v_coeffs
                .clone()
                .ok_or("family needs v_coeffs (V(a) polynomial)")?;
            let d = poly_deriv(&coeffs);
            let c2 = coeffs.clone();
            match mc.family.as_str() {
                "quantile" => {
                    let kappa = *mc
                        .parameters
                        .get("kappa")
                        .ok_or("quantile family needs parameters.kappa")?;
                    PreferenceModel::quantile(
                        kappa,
                        move |a| poly(&c2, a),
                        move |a| poly(&d, a),
                    )
                    .map_err(|e| e.to_string())?
                }
                _ => PreferenceModel::simple(move |a| poly(&c2, a), move |a| poly(&d, a)),
            }
        }
        "simple_receiver" => {
            let b = mc
                .v_matrix
                .clone()
                .ok_or("simple_receiver needs v_matrix (bivariate polynomial)")?;
            let b2 = b.clone();
            PreferenceModel::simple_receiver(
                move |a, th| bipoly(&b, a, th),
                move |a, th| bipoly_da(&b2, a, th),
            )
        }
        "simple_sender" => {
            return Err(
                "simple_sender needs a receiver utility definition: use \
                 translation_invariant (Gaussian kernel) or custom (tables)"
                    .into(),
            );
        }
        "translation_invariant" => {
            let scale = mc.parameters.get("kernel_scale").copied().unwrap_or(1.0);
            let coeffs = mc
                .v_coeffs
                .clone()
                .ok_or("translation_invariant needs v_coeffs")?;
            let d = poly_deriv(&coeffs);
            let c2 = coeffs.clone();
            PreferenceModel::translation_invariant(
                move |a| poly(&c2, a),
                move |a| poly(&d, a),
                move |y| persuade_core::fixtures::gauss_t(y / scale) * scale,
                move |y| persuade_core::fixtures::gauss_t_prime(y / scale),
            )
        }
        "contest" => {
            let lo = *mc.parameters.get("lo").ok_or("contest needs parameters.lo")?;
            let hi = *mc.parameters.get("hi").ok_or("contest needs parameters.hi")?;
            PreferenceModel::contest(lo, hi).map_err(|e| e.to_string())?
        }
        "custom" => {
            let t = mc.tables.as_ref().ok_or("custom family needs tables")?;
            let shape_ok = |tab: &Vec<Vec<f64>>| {
                tab.len() == t.a_nodes.len()
                    && tab.iter().all(|row| row.len() == t.theta_nodes.len())
            };
            if !(shape_ok(&t.big_v) && shape_ok(&t.v) && shape_ok(&t.u) && shape_ok(&t.u_a)) {
                return Err("table shapes must be a_nodes × theta_nodes".into());
            }
            let (an, tn) = (t.a_nodes.clone(), t.theta_nodes.clone());
            let mk = |tab: Vec<Vec<f64>>| -> Bivariate {
                let (an, tn) = (an.clone(), tn.clone());
                Arc::new(move |a, th| interp2(&an, &tn, &tab, a, th))
            };
            let a_range = (t.a_nodes[0], *t.a_nodes.last().unwrap());
            let theta_range = (t.theta_nodes[0], *t.theta_nodes.last().unwrap());
            PreferenceModel::custom(
                mk(t.big_v.clone()),
                mk(t.v.clone()),
                mk(t.u.clone()),
                mk(t.u_a.clone()),
                a_range,
                theta_range,
            )
        }
        other => return Err(format!("unknown model family `{other}`")),
    };
    let model = match (mc.a_range, mc.theta_range) {
        (Some(ar), Some(tr)) => model.with_ranges(ar, tr),
        (Some(ar), None) => {
            let tr = model.theta_range;
            model.with_ranges(ar, tr)
        }
        (None, Some(tr)) => {
            let ar = model.a_range;
            model.with_ranges(ar, tr)
        }
        (None, None) => model,
    };
    Ok(model)
}

fn build_prior(pc: &PriorConfig) -> Result<Prior, String> {
    match pc.kind.as_str() {
        "atoms" => {
            let atoms = pc.atoms.clone().ok_or("atom prior needs atoms")?;
            Prior::atoms(atoms).map_err(|e| e.to_string())
        }
        "density" => {
            let name = pc
                .density_name
                .as_deref()
                .ok_or("density prior needs density_name")?;
            match name {
                "uniform" => {
                    let (lo, hi) = pc.support.ok_or("uniform density needs support")?;
                    Ok(Prior::uniform(lo, hi))
                }
                "reciprocal" => {
                    let (lo, hi) = pc.support.ok_or("reciprocal density needs support")?;
                    Ok(Prior::reciprocal(lo, hi))
                }
                "piecewise_const" => {
                    let breaks = pc.breaks.clone().ok_or("piecewise density needs breaks")?;
                    let heights = pc.heights.clone().ok_or("piecewise density needs heights")?;
                    Prior::piecewise_const(breaks, heights).map_err(|e| e.to_string())
                }
                other => Err(format!("unknown density `{other}`")),
            }
        }
        other => Err(format!("unknown prior kind `{other}`")),
    }
}
