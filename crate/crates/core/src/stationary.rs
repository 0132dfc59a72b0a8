//! Increment-stationary boundary models (south-west and north-east) and the
//! Monte Carlo harness verifying the Burke property.

use serde::{Deserialize, Serialize};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::lattice::{
    add, leq, staircase_path, strictly_above, strictly_below, sub, LatticePath, PathKind, Rect,
    Site, E1, E2,
};
use crate::lpp::{dual_weights, passage_times, InitialIncrements, PassageField, WeightField};
use crate::rng::{replica_seed, site_unit_exp, Stream};
use crate::stats::{exp_cdf, ks_distance, pairwise_corr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    /// Boundary weights on the south and west sides of the padded rectangle
    /// R_{u-e1-e2}^{v}; the corner weight at u-e1-e2 is zero.
    Sw,
    /// Boundary weights on the north and east sides of R_{u}^{v+e1+e2}.
    Ne,
}

/// A stationary boundary model: bulk weights agree with the environment,
/// boundary weights carry rates a_i + z (rows) and b_j - z (columns).
#[derive(Debug, Clone)]
pub struct StationaryModel {
    pub u: Site,
    pub v: Site,
    pub z: f64,
    pub side: BoundarySide,
    pub field: WeightField,
}

/// Builds the model. The boundary parameter must lie strictly inside
/// (-min a_{u1:v1}, min b_{u2:v2}); endpoints are rejected.
pub fn build_stationary(
    env: &Environment,
    u: Site,
    v: Site,
    z: f64,
    side: BoundarySide,
) -> Result<StationaryModel> {
    if !leq(u, v) {
        return Err(Error::Parameter(format!("u {u:?} must be <= v {v:?}")));
    }
    let (a_min, _) = env.a.running_min(u.0, v.0)?;
    let (b_min, _) = env.b.running_min(u.1, v.1)?;
    if z <= -a_min || z >= b_min {
        return Err(Error::Parameter(format!(
            "z = {z} outside the open interval ({}, {})",
            -a_min, b_min
        )));
    }
    let rect = match side {
        BoundarySide::Sw => Rect::new(sub(u, (1, 1)), v)?,
        BoundarySide::Ne => Rect::new(u, add(v, (1, 1)))?,
    };
    // Boundary variates are keyed by (seed, side, z, site) on their own
    // stream, so different boundary parameters share the same bulk weights.
    let side_bits = match side {
        BoundarySide::Sw => 0x5357u64,
        BoundarySide::Ne => 0x4e45u64,
    };
    let stream = Stream::Boundary(side_bits ^ z.to_bits());
    let mut values = Vec::with_capacity(rect.num_sites() as usize);
    for p in rect.sites() {
        let w = match side {
            BoundarySide::Sw => {
                if p == rect.lo {
                    0.0
                } else if p.1 == u.1 - 1 {
                    site_unit_exp(env.seed, stream, p.0, p.1) / (env.a.value_at(p.0)? + z)
                } else if p.0 == u.0 - 1 {
                    site_unit_exp(env.seed, stream, p.0, p.1) / (env.b.value_at(p.1)? - z)
                } else {
                    env.sample_weight(p)?
                }
            }
            BoundarySide::Ne => {
                if p == rect.hi {
                    0.0
                } else if p.1 == v.1 + 1 && p.0 <= v.0 {
                    site_unit_exp(env.seed, stream, p.0, p.1) / (env.a.value_at(p.0)? + z)
                } else if p.0 == v.0 + 1 && p.1 <= v.1 {
                    site_unit_exp(env.seed, stream, p.0, p.1) / (env.b.value_at(p.1)? - z)
                } else {
                    env.sample_weight(p)?
                }
            }
        };
        values.push(w);
    }
    Ok(StationaryModel {
        u,
        v,
        z,
        side,
        field: WeightField::new(rect, values)?,
    })
}

impl StationaryModel {
    /// Passage field from the model's base corner (SW only).
    pub fn passage(&self) -> Result<PassageField> {
        match self.side {
            BoundarySide::Sw => passage_times(&self.field, self.field.rect.lo),
            BoundarySide::Ne => Err(Error::Mode(
                "the NE model measures increments toward its top corner".into(),
            )),
        }
    }

    /// The corner-to-corner down-right path of the Burke partition.
    pub fn default_path(&self) -> LatticePath {
        match self.side {
            BoundarySide::Sw => staircase_path(self.u, self.v),
            BoundarySide::Ne => staircase_path(add(self.u, (1, 1)), add(self.v, (1, 1))),
        }
    }
}

/// One labeled variable of the Burke collection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BurkeVariable {
    pub label: String,
    /// Exact exponential rate of the variable's marginal.
    pub rate: f64,
    pub value: f64,
}

/// The four groups of the Burke collection along a down-right path:
/// horizontal increments, vertical increments, dual weights strictly on one
/// side, bulk weights strictly on the other.
#[derive(Debug, Clone)]
pub struct BurkeCollection {
    pub increments_i: Vec<BurkeVariable>,
    pub increments_j: Vec<BurkeVariable>,
    pub duals: Vec<BurkeVariable>,
    pub bulk: Vec<BurkeVariable>,
}

impl BurkeCollection {
    pub fn all(&self) -> impl Iterator<Item = &BurkeVariable> {
        self.increments_i
            .iter()
            .chain(&self.increments_j)
            .chain(&self.duals)
            .chain(&self.bulk)
    }
}

/// Extracts the Burke collection of a model along a down-right path spanning
/// the rectangle corner to corner.
pub fn burke_increments(
    env: &Environment,
    model: &StationaryModel,
    path: &LatticePath,
) -> Result<BurkeCollection> {
    if path.kind != PathKind::DownRight {
        return Err(Error::Path("down-right path required".into()));
    }
    match model.side {
        BoundarySide::Sw => burke_sw(env, model, path),
        BoundarySide::Ne => burke_ne(env, model, path),
    }
}

fn burke_sw(
    env: &Environment,
    model: &StationaryModel,
    path: &LatticePath,
) -> Result<BurkeCollection> {
    let rect = model.field.rect;
    let expected_start = (model.u.0 - 1, model.v.1);
    let expected_end = (model.v.0, model.u.1 - 1);
    if path.start() != expected_start || path.end() != expected_end {
        return Err(Error::Path(format!(
            "path must run {expected_start:?} -> {expected_end:?}"
        )));
    }
    let pf = passage_times(&model.field, rect.lo)?;
    let duals_field = dual_weights(&model.field)?;
    let mut out = BurkeCollection {
        increments_i: Vec::new(),
        increments_j: Vec::new(),
        duals: Vec::new(),
        bulk: Vec::new(),
    };
    for w in path.sites.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q == add(p, E1) {
            out.increments_i.push(BurkeVariable {
                label: format!("I@({},{})", q.0, q.1),
                rate: env.a.value_at(q.0)? + model.z,
                value: pf.g(q) - pf.g(p),
            });
        } else {
            // Down step: the vertical increment sits at the upper site p.
            out.increments_j.push(BurkeVariable {
                label: format!("J@({},{})", p.0, p.1),
                rate: env.b.value_at(p.1)? - model.z,
                value: pf.g(p) - pf.g(q),
            });
        }
    }
    for x in rect.sites() {
        if strictly_below(path, x) {
            out.duals.push(BurkeVariable {
                label: format!("dual@({},{})", x.0, x.1),
                rate: env.a.value_at(x.0 + 1)? + env.b.value_at(x.1 + 1)?,
                value: duals_field.at(x),
            });
        } else if strictly_above(path, x) {
            out.bulk.push(BurkeVariable {
                label: format!("bulk@({},{})", x.0, x.1),
                rate: env.a.value_at(x.0)? + env.b.value_at(x.1)?,
                value: model.field.at(x),
            });
        }
    }
    Ok(out)
}

fn burke_ne(
    env: &Environment,
    model: &StationaryModel,
    path: &LatticePath,
) -> Result<BurkeCollection> {
    let rect = model.field.rect;
    let expected_start = (model.u.0, model.v.1 + 1);
    let expected_end = (model.v.0 + 1, model.u.1);
    if path.start() != expected_start || path.end() != expected_end {
        return Err(Error::Path(format!(
            "path must run {expected_start:?} -> {expected_end:?}"
        )));
    }
    // Increments with respect to the top corner come from the reflected DP.
    let inc = InitialIncrements::compute(&model.field)?;
    let mut out = BurkeCollection {
        increments_i: Vec::new(),
        increments_j: Vec::new(),
        duals: Vec::new(),
        bulk: Vec::new(),
    };
    for w in path.sites.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q == add(p, E1) {
            out.increments_i.push(BurkeVariable {
                label: format!("I@({},{})", p.0, p.1),
                rate: env.a.value_at(p.0)? + model.z,
                value: inc.i(p).to_f64(),
            });
        } else {
            out.increments_j.push(BurkeVariable {
                label: format!("J@({},{})", q.0, q.1),
                rate: env.b.value_at(q.1)? - model.z,
                value: inc.j(q).to_f64(),
            });
        }
    }
    for x in rect.sites() {
        if strictly_above(path, x) {
            // min of the two increments one step left/below x plays the dual
            // weight role on this side.
            out.duals.push(BurkeVariable {
                label: format!("dual@({},{})", x.0, x.1),
                rate: env.a.value_at(x.0 - 1)? + env.b.value_at(x.1 - 1)?,
                value: inc.i(sub(x, E1)).min(inc.j(sub(x, E2))).to_f64(),
            });
        } else if strictly_below(path, x) {
            out.bulk.push(BurkeVariable {
                label: format!("bulk@({},{})", x.0, x.1),
                rate: env.a.value_at(x.0)? + env.b.value_at(x.1)?,
                value: model.field.at(x),
            });
        }
    }
    Ok(out)
}

/// Aggregated Monte Carlo report for one Burke variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BurkeVariableReport {
    pub variable: String,
    pub theoretical_rate: f64,
    pub ks: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BurkeReport {
    pub variables: Vec<BurkeVariableReport>,
    pub max_ks: f64,
    pub max_abs_corr: f64,
    pub replicas: usize,
    pub ks_threshold: f64,
    pub corr_threshold: f64,
    /// None when the replica count is too small for a meaningful verdict.
    pub pass: Option<bool>,
    pub notes: String,
}

/// Monte Carlo verification of the Burke property: per-variable KS distances
/// against the exact exponential marginals and all pairwise correlations
/// within the collection.
#[allow(clippy::too_many_arguments)]
pub fn burke_test(
    env: &Environment,
    u: Site,
    v: Site,
    z: f64,
    side: BoundarySide,
    replicas: usize,
    ks_threshold: f64,
    corr_threshold: f64,
) -> Result<BurkeReport> {
    use rayon::prelude::*;

    let template = build_stationary(env, u, v, z, side)?;
    let path = template.default_path();
    let first = burke_increments(env, &template, &path)?;
    let labels: Vec<String> = first.all().map(|b| b.label.clone()).collect();
    let rates: Vec<f64> = first.all().map(|b| b.rate).collect();
    let k = labels.len();

    let rows: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let renv = env.with_seed(replica_seed(env.seed, r as u64));
            let model = build_stationary(&renv, u, v, z, side)?;
            let col = burke_increments(&renv, &model, &path)?;
            Ok(col.all().map(|b| b.value).collect::<Vec<f64>>())
        })
        .collect::<Result<_>>()?;

    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(replicas); k];
    for row in &rows {
        for (slot, v) in samples.iter_mut().zip(row) {
            slot.push(*v);
        }
    }

    let mut variables = Vec::with_capacity(k);
    let mut max_ks: f64 = 0.0;
    for idx in 0..k {
        let mut sorted = samples[idx].clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_distance(&sorted, exp_cdf(rates[idx]));
        max_ks = max_ks.max(d);
        variables.push(BurkeVariableReport {
            variable: labels[idx].clone(),
            theoretical_rate: rates[idx],
            ks: d,
            n: replicas,
        });
    }
    let corr = pairwise_corr(&samples)?;
    let max_abs_corr = crate::stats::max_abs_offdiag(&corr);

    let (pass, notes) = if replicas < 100 {
        (None, "insufficient-power: fewer than 100 replicas".to_string())
    } else {
        (
            Some(max_ks < ks_threshold && max_abs_corr < corr_threshold),
            String::new(),
        )
    };
    Ok(BurkeReport {
        variables,
        max_ks,
        max_abs_corr,
        replicas,
        ks_threshold,
        corr_threshold,
        pass,
        notes,
    })
}

/// Horizontal boundary increments along one level of the SW model, for the
/// stationarity check that their joint law does not depend on the level.
pub fn level_increments(model: &StationaryModel, lvl: i64) -> Result<Vec<f64>> {
    if model.side != BoundarySide::Sw {
        return Err(Error::Mode("level increments use the SW model".into()));
    }
    if lvl < model.u.1 - 1 || lvl > model.v.1 {
        return Err(Error::Parameter(format!("level {lvl} outside the model")));
    }
    let pf = model.passage()?;
    Ok((model.u.0..=model.v.0)
        .map(|i| pf.g((i, lvl)) - pf.g((i - 1, lvl)))
        .collect())
}
