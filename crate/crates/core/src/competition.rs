//! Competition interface extraction, the U/V crossing trackers, and the
//! exact limit distributions they converge to.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::lattice::{add, LatticePath, PathKind, Rect, Site, E1, E2};
use crate::lpp::{passage_times, WeightField};
use crate::rng::replica_seed;
use crate::shape::{chi_min, Direction};
use crate::stats::Atom;

/// The dual-lattice interface separating the geodesic subtrees through
/// x + e1 and x + e2. Dual sites are stored by their lower-left lattice
/// corner: the stored site p stands for p + (1/2, 1/2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompetitionInterface {
    pub base: Site,
    pub dual_path: LatticePath,
    /// U(n): first coordinate at the first crossing of height n + 1/2.
    pub u_values: BTreeMap<i64, i64>,
    /// V(m): second coordinate at the first crossing of column m + 1/2.
    pub v_values: BTreeMap<i64, i64>,
    /// Set when a comparison tied exactly (broken toward e1).
    pub tie_flag: bool,
}

impl CompetitionInterface {
    pub fn u_at(&self, n: i64) -> Option<i64> {
        self.u_values.get(&n).copied()
    }

    pub fn v_at(&self, m: i64) -> Option<i64> {
        self.v_values.get(&m).copied()
    }

    /// Largest height the interface has fully crossed.
    pub fn max_level(&self) -> i64 {
        *self.u_values.keys().max().expect("nonempty interface")
    }
}

/// Evolves the interface for `horizon` steps by comparing passage times from
/// the base to the two lattice sites ahead of each dual site.
pub fn competition_interface(
    env: &Environment,
    x: Site,
    horizon: i64,
) -> Result<CompetitionInterface> {
    if horizon < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let rect = Rect::new(x, add(x, (horizon + 1, horizon + 1)))?;
    let w = WeightField::from_environment(env, rect)?;
    let pf = passage_times(&w, x)?;
    let mut sites = Vec::with_capacity(horizon as usize + 1);
    let mut u_values = BTreeMap::new();
    let mut v_values = BTreeMap::new();
    let mut tie_flag = false;
    let mut p = x;
    sites.push(p);
    u_values.insert(p.1, p.0);
    v_values.insert(p.0, p.1);
    for _ in 0..horizon {
        let ge1 = pf.g(add(p, E1));
        let ge2 = pf.g(add(p, E2));
        if ge1 == ge2 {
            tie_flag = true;
        }
        // Step toward the smaller onward passage time; exact ties go to e1.
        p = if ge1 <= ge2 { add(p, E1) } else { add(p, E2) };
        sites.push(p);
        u_values.entry(p.1).or_insert(p.0);
        v_values.entry(p.0).or_insert(p.1);
    }
    Ok(CompetitionInterface {
        base: x,
        dual_path: LatticePath::new(PathKind::Dual, sites)?,
        u_values,
        v_values,
        tie_flag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackerMode {
    U,
    V,
}

/// Exact limit law of the tracker: atoms at the indices where the running
/// minimum of the rate sequence strictly decreases, plus an atom at
/// infinity. Atoms are listed through `range_max`; totals are exact once
/// `range_max` reaches the first attainment of the tail infimum.
pub fn cif_atom_distribution(
    env: &Environment,
    x: Site,
    mode: TrackerMode,
    range_max: i64,
) -> Result<BTreeMap<Atom, f64>> {
    let a_i = env.a.value_at(x.0)?;
    let b_j = env.b.value_at(x.1)?;
    let denom = a_i + b_j;
    let mut pmf = BTreeMap::new();
    match mode {
        TrackerMode::U => {
            for m in x.0..=range_max {
                let (min_here, _) = env.a.running_min(x.0, m)?;
                let (min_next, _) = env.a.running_min(x.0, m + 1)?;
                pmf.insert(Atom::Finite(m), (min_here - min_next) / denom);
            }
            pmf.insert(Atom::Infinity, (env.tail_inf_a(x.0) + b_j) / denom);
        }
        TrackerMode::V => {
            for n in x.1..=range_max {
                let (min_here, _) = env.b.running_min(x.1, n)?;
                let (min_next, _) = env.b.running_min(x.1, n + 1)?;
                pmf.insert(Atom::Finite(n), (min_here - min_next) / denom);
            }
            pmf.insert(Atom::Infinity, (a_i + env.tail_inf_b(x.1)) / denom);
        }
    }
    Ok(pmf)
}

/// CDF of the limiting interface direction: P(xi* <= xi) =
/// (a_i + chi^x(xi)) / (a_i + b_j) for xi in [e2, e1), with atoms only at
/// the two axes.
pub fn cif_direction_cdf(env: &Environment, x: Site, xi: Direction) -> Result<f64> {
    if xi.xi1 >= 1.0 {
        return Ok(1.0);
    }
    let a_i = env.a.value_at(x.0)?;
    let b_j = env.b.value_at(x.1)?;
    let chi = chi_min(env, x, xi)?.chi;
    Ok((a_i + chi) / (a_i + b_j))
}

/// Atom of the direction law at e2 (the interface trapped on a column).
pub fn cif_atom_e2(env: &Environment, x: Site) -> Result<f64> {
    let a_i = env.a.value_at(x.0)?;
    let b_j = env.b.value_at(x.1)?;
    Ok((a_i - env.tail_inf_a(x.0)) / (a_i + b_j))
}

/// Atom of the direction law at e1 (trapped on a row).
pub fn cif_atom_e1(env: &Environment, x: Site) -> Result<f64> {
    let a_i = env.a.value_at(x.0)?;
    let b_j = env.b.value_at(x.1)?;
    Ok((b_j - env.tail_inf_b(x.1)) / (a_i + b_j))
}

/// Per-replica outcome of the Monte Carlo tracker estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrackerSample {
    /// U at the target level; None when the interface ran out of its step
    /// budget before crossing it, which forces U beyond any small cap.
    pub value: Option<i64>,
    /// Unchanged over the final quarter of levels below the target.
    pub stabilized: bool,
    /// End-direction ratio of the interface.
    pub direction_ratio: f64,
}

/// Monte Carlo distribution of U(horizon) and the interface direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McCifReport {
    pub atoms_empirical: BTreeMap<Atom, f64>,
    pub stabilized_fraction: f64,
    pub direction_ratios: Vec<f64>,
    pub replicas: usize,
    pub horizon: i64,
}

pub fn mc_cif_distribution(
    env: &Environment,
    x: Site,
    level: i64,
    replicas: usize,
    finite_cap: i64,
) -> Result<McCifReport> {
    use rayon::prelude::*;
    if replicas < 100 {
        return Err(Error::Domain("at least 100 replicas required".into()));
    }
    let samples: Vec<TrackerSample> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let renv = env.with_seed(replica_seed(env.seed, r as u64));
            tracker_sample(&renv, x, level)
        })
        .collect::<Result<_>>()?;
    let mut counts: BTreeMap<Atom, usize> = BTreeMap::new();
    let mut stab = 0usize;
    let mut ratios = Vec::with_capacity(replicas);
    for s in &samples {
        // Tracker values grow toward the limit; mass beyond the cap, and
        // replicas whose interfaces ran right past the step budget, count
        // as escaping.
        let key = match s.value {
            Some(v) if v <= finite_cap => Atom::Finite(v),
            _ => Atom::Infinity,
        };
        *counts.entry(key).or_insert(0) += 1;
        if s.stabilized {
            stab += 1;
        }
        ratios.push(s.direction_ratio);
    }
    let atoms_empirical = counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / replicas as f64))
        .collect();
    Ok(McCifReport {
        atoms_empirical,
        stabilized_fraction: stab as f64 / replicas as f64,
        direction_ratios: ratios,
        replicas,
        horizon: level,
    })
}

/// One replica: evolve the interface until it crosses the target height and
/// read U there. The step budget is 2.5x the height; interfaces exceeding
/// it sit far right of any small cap.
pub fn tracker_sample(env: &Environment, x: Site, level: i64) -> Result<TrackerSample> {
    let budget = (5 * (level - x.1)) / 2 + 64;
    let cif = competition_interface(env, x, budget)?;
    let value = cif.u_at(level);
    let probe = level - (level - x.1) / 4;
    let stabilized = match (value, cif.u_at(probe)) {
        (Some(v), Some(u)) => u == v,
        _ => false,
    };
    let end = cif.dual_path.end();
    let steps = (end.0 - x.0) + (end.1 - x.1);
    let direction_ratio = if steps > 0 {
        (end.0 - x.0) as f64 / steps as f64
    } else {
        0.5
    };
    Ok(TrackerSample {
        value,
        stabilized,
        direction_ratio,
    })
}

/// Exact indicator of the event {U(level) = first column}: the interface
/// hugs the base column through the target height, equivalently the passage
/// time from x + e2 to (x.0 + 1, k) stays above the one from x + e1 for
/// every k below the level. Runs on the two-column strip in O(level).
pub fn u_stays_at_base_column(env: &Environment, x: Site, level: i64) -> Result<bool> {
    let (i, j) = x;
    if !env.window.contains(x) || !env.window.contains((i + 1, level)) {
        return Err(Error::WindowViolation {
            index: level,
            lo: env.window.lo.1,
            hi: env.window.hi.1,
        });
    }
    let rates = env.rate_table((i, j), (i + 1, level));
    // g1 = G_{x,(i, k)} along the base column, g2 = G_{x,(i+1, k)}.
    let mut g1 = rates.weight((i, j));
    let mut g2 = g1 + rates.weight((i + 1, j));
    for k in (j + 1)..=level {
        let up = g1 + rates.weight((i, k));
        if g2 <= up {
            // The interface steps right at height k - 1.
            return Ok(false);
        }
        g1 = up;
        g2 = g1.max(g2) + rates.weight((i + 1, k));
    }
    Ok(true)
}
