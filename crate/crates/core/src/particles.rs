//! Inhomogeneous TASEP driven by the passage-time coupling, the tracked
//! hole-particle pair encoding the second-class particle, and the tandem
//! queue (zero-range) view with a second-class customer.
//!
//! Dynamics are event-driven off the swap-time table T(i, j) built by the
//! max-plus recursion over the same weights as the passage times: pair
//! (hole i, particle j) interchanges at T(i, j). Time is measured on the
//! table clock, under which the step configuration at time zero has
//! P_j = 1 - j and H_i = i; the tracked configuration with the starred pair
//! at sites (0, 1) is established by the first event at T(1, 1), and starred
//! pair jump times are reported both raw and relative to that birth time.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::rng::replica_seed;
use crate::stats::Atom;

/// Swap-time table over pairs (i, j) in [1, m]^2, row-major in j.
#[derive(Debug, Clone)]
pub struct SwapTable {
    pub m: i64,
    t: Vec<f64>,
}

impl SwapTable {
    #[inline]
    pub fn t(&self, i: i64, j: i64) -> f64 {
        debug_assert!(1 <= i && i <= self.m && 1 <= j && j <= self.m);
        self.t[((j - 1) * self.m + (i - 1)) as usize]
    }

    /// Largest time up to which the finite window determines the infinite
    /// dynamics: the smaller of the two axis passage times.
    pub fn light_cone(&self) -> f64 {
        self.t(self.m, 1).min(self.t(1, self.m))
    }

    /// Number of swaps completed by time `t`.
    pub fn swaps_by(&self, t: f64) -> usize {
        self.t.iter().filter(|&&v| v <= t).count()
    }
}

/// T(i, j) = max(T(i-1, j), T(i, j-1)) + w_{i,j} with zero boundary, over
/// the environment weights; identical to the passage times based at (1, 1).
pub fn rost_swap_times(env: &Environment, m: i64) -> Result<SwapTable> {
    if m < 1 {
        return Err(Error::Domain("window must contain pair (1,1)".into()));
    }
    if !env.window.contains((1, 1)) || !env.window.contains((m, m)) {
        return Err(Error::WindowViolation {
            index: m,
            lo: env.window.lo.0,
            hi: env.window.hi.0,
        });
    }
    let rates = env.rate_table((1, 1), (m, m));
    let mut t = vec![0.0f64; (m * m) as usize];
    for j in 1..=m {
        for i in 1..=m {
            let up = if j > 1 { t[((j - 2) * m + (i - 1)) as usize] } else { 0.0 };
            let left = if i > 1 { t[((j - 1) * m + (i - 2)) as usize] } else { 0.0 };
            t[((j - 1) * m + (i - 1)) as usize] = up.max(left) + rates.weight((i, j));
        }
    }
    Ok(SwapTable { m, t })
}

/// Positions of the tracked holes and particles at one time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TasepState {
    pub time: f64,
    /// H_i for i = 1..m.
    pub holes: Vec<i64>,
    /// P_j for j = 1..m.
    pub particles: Vec<i64>,
}

/// Event-driven TASEP trajectory over an m x m pair window.
#[derive(Debug, Clone)]
pub struct TasepTrajectory {
    pub table: SwapTable,
    pub t_max: f64,
    /// Set when t_max exceeds the window's light cone; quantities beyond it
    /// can be influenced by the truncation.
    pub truncated: bool,
}

pub fn simulate_tasep(env: &Environment, m: i64, t_max: f64) -> Result<TasepTrajectory> {
    let table = rost_swap_times(env, m)?;
    let truncated = t_max > table.light_cone();
    Ok(TasepTrajectory {
        table,
        t_max,
        truncated,
    })
}

impl TasepTrajectory {
    /// Swap events up to `t`, time-sorted.
    pub fn events_by(&self, t: f64) -> Vec<(f64, i64, i64)> {
        let m = self.table.m;
        let mut events = Vec::new();
        for j in 1..=m {
            for i in 1..=m {
                let when = self.table.t(i, j);
                if when <= t {
                    events.push((when, i, j));
                }
            }
        }
        events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        events
    }

    /// State at time `t`: each swap moves its particle one step right and
    /// its hole one step left.
    pub fn state_at(&self, t: f64) -> TasepState {
        let m = self.table.m;
        let mut holes = Vec::with_capacity(m as usize);
        let mut particles = Vec::with_capacity(m as usize);
        for i in 1..=m {
            let crossed = (1..=m).filter(|&j| self.table.t(i, j) <= t).count() as i64;
            holes.push(i - crossed);
        }
        for j in 1..=m {
            let crossed = (1..=m).filter(|&i| self.table.t(i, j) <= t).count() as i64;
            particles.push(1 - j + crossed);
        }
        TasepState {
            time: t,
            holes,
            particles,
        }
    }
}

/// Trajectory of the starred pair: (I, J) starts at (1, 1) when the pair
/// forms at T(1, 1) and steps to (I+1, J) or (I, J+1) at the smaller of the
/// two adjacent swap times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarPair {
    /// (time, I, J) at the birth and after every jump, on the table clock.
    pub jumps: Vec<(f64, i64, i64)>,
    /// Birth time T(1, 1); subtracting it gives the tracked-process clock.
    pub birth: f64,
    /// Set when the walk was stopped by the window edge rather than t_max.
    pub truncated: bool,
}

pub fn star_pair_trajectory(table: &SwapTable, t_max: f64) -> StarPair {
    let birth = table.t(1, 1);
    let mut jumps = vec![(birth, 1i64, 1i64)];
    let (mut i, mut j) = (1i64, 1i64);
    let mut truncated = false;
    loop {
        let right = if i < table.m {
            table.t(i + 1, j)
        } else {
            f64::INFINITY
        };
        let left = if j < table.m {
            table.t(i, j + 1)
        } else {
            f64::INFINITY
        };
        let next = right.min(left);
        if next > t_max {
            if next.is_infinite() {
                truncated = true;
            }
            break;
        }
        if right < left {
            i += 1;
        } else {
            j += 1;
        }
        jumps.push((next, i, j));
    }
    StarPair {
        jumps,
        birth,
        truncated,
    }
}

impl StarPair {
    /// Indices (I, J) at time `t` on the table clock.
    pub fn at(&self, t: f64) -> (i64, i64) {
        let mut cur = (1, 1);
        for &(when, i, j) in &self.jumps {
            if when <= t {
                cur = (i, j);
            } else {
                break;
            }
        }
        cur
    }

    /// Second-class particle position X(t) = I(t) - J(t).
    pub fn second_class_position(&self, t: f64) -> i64 {
        let (i, j) = self.at(t);
        i - j
    }

    /// Starred-pair site sequence (I, J) in jump order.
    pub fn site_sequence(&self) -> Vec<Site> {
        self.jumps.iter().map(|&(_, i, j)| (i, j)).collect()
    }

    /// Time of the last jump, on the table clock.
    pub fn last_jump_time(&self) -> f64 {
        self.jumps.last().map(|&(t, _, _)| t).unwrap_or(self.birth)
    }
}

/// Tandem-queue (zero-range) view; requires row rates identically zero so
/// holes are indistinguishable and stations are served at rates b_j.
#[derive(Debug, Clone)]
pub struct ZrpTrajectory {
    pub tasep: TasepTrajectory,
    pub star: StarPair,
}

pub fn simulate_zrp(env: &Environment, m: i64, t_max: f64) -> Result<ZrpTrajectory> {
    let zero_rows = matches!(
        env.a.spec(),
        crate::environment::RecipeSpec::Constant { value } if *value == 0.0
    );
    if !zero_rows {
        return Err(Error::Mode(
            "the queue view requires row rates identically zero".into(),
        ));
    }
    let tasep = simulate_tasep(env, m, t_max)?;
    let star = star_pair_trajectory(&tasep.table, t_max);
    Ok(ZrpTrajectory { tasep, star })
}

impl ZrpTrajectory {
    /// Station of the second-class customer: Z(t) = J(t) + 1.
    pub fn z_at(&self, t: f64) -> i64 {
        self.star.at(t).1 + 1
    }

    /// First-class customers that have passed the second-class customer.
    pub fn passed_by(&self, t: f64) -> i64 {
        self.star.at(t).0 - 1
    }

    /// Queue length at station j >= 2 (station 1 holds infinitely many).
    pub fn queue_length(&self, j: i64, t: f64) -> Result<i64> {
        if j < 2 || j > self.tasep.table.m {
            return Err(Error::Domain(format!("station {j} outside the window")));
        }
        let state = self.tasep.state_at(t);
        Ok(state.particles[(j - 2) as usize] - state.particles[(j - 1) as usize] - 1)
    }

    /// Time of the last Z-change on the table clock.
    pub fn z_last_change(&self) -> f64 {
        let mut last = self.star.birth;
        let mut j_prev = 1;
        for &(t, _, j) in &self.star.jumps {
            if j != j_prev {
                last = t;
                j_prev = j;
            }
        }
        last
    }
}

/// Exact limit law of the second-class customer's station: atoms at the
/// stations where the running minimum of the service rates strictly
/// decreases, and escape mass inf b_{1:inf} / b_1.
pub fn z_limit_distribution(env: &Environment, range_max: i64) -> Result<BTreeMap<Atom, f64>> {
    let b1 = env.b.value_at(1)?;
    let mut pmf = BTreeMap::new();
    for n in 2..=range_max {
        let (min_prev, _) = env.b.running_min(1, n - 1)?;
        let (min_here, _) = env.b.running_min(1, n)?;
        pmf.insert(Atom::Finite(n), (min_prev - min_here) / b1);
    }
    pmf.insert(Atom::Infinity, env.tail_inf_b(1) / b1);
    Ok(pmf)
}

/// Per-replica classification of the second-class customer at t_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZOutcome {
    /// Z unchanged over the second half of the window.
    Stabilized,
    /// Z(t_max) / t_max above the escape threshold.
    Escaping,
    Ambiguous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZReplica {
    pub z_final: i64,
    pub outcome: ZOutcome,
}

pub fn classify_z(zrp: &ZrpTrajectory, t_max: f64, escape_threshold: f64) -> ZReplica {
    let z_final = zrp.z_at(t_max);
    let outcome = if zrp.z_last_change() <= 0.5 * t_max {
        ZOutcome::Stabilized
    } else if z_final as f64 / t_max >= escape_threshold {
        ZOutcome::Escaping
    } else {
        ZOutcome::Ambiguous
    };
    ZReplica { z_final, outcome }
}

/// Monte Carlo summary of the second-class customer dichotomy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZDichotomyReport {
    pub stuck_at: BTreeMap<i64, f64>,
    pub escaping_fraction: f64,
    pub ambiguous_fraction: f64,
    pub replicas: usize,
    pub t_max: f64,
}

pub fn z_dichotomy(
    env: &Environment,
    m: i64,
    t_max: f64,
    replicas: usize,
    escape_threshold: f64,
) -> Result<ZDichotomyReport> {
    use rayon::prelude::*;
    let outcomes: Vec<ZReplica> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let renv = env.with_seed(replica_seed(env.seed, r as u64));
            let zrp = simulate_zrp(&renv, m, t_max)?;
            Ok(classify_z(&zrp, t_max, escape_threshold))
        })
        .collect::<Result<_>>()?;
    let mut stuck: BTreeMap<i64, usize> = BTreeMap::new();
    let mut escaping = 0usize;
    let mut ambiguous = 0usize;
    for o in &outcomes {
        match o.outcome {
            ZOutcome::Stabilized => *stuck.entry(o.z_final).or_insert(0) += 1,
            ZOutcome::Escaping => escaping += 1,
            ZOutcome::Ambiguous => ambiguous += 1,
        }
    }
    Ok(ZDichotomyReport {
        stuck_at: stuck
            .into_iter()
            .map(|(k, c)| (k, c as f64 / replicas as f64))
            .collect(),
        escaping_fraction: escaping as f64 / replicas as f64,
        ambiguous_fraction: ambiguous as f64 / replicas as f64,
        replicas,
        t_max,
    })
}
