//! Limit-shape calculus: the variational shape function, its minimizer, the
//! direction map, critical directions, linear-segment direction intervals,
//! and the second-class customer speed law.

use serde::{Deserialize, Serialize};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::lattice::Site;

/// A direction xi = (xi1, 1 - xi1) in the closed segment [e2, e1];
/// the ordering is the ordering of xi1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Direction {
    pub xi1: f64,
}

impl Direction {
    pub fn new(xi1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&xi1) {
            return Err(Error::Domain(format!("xi1 = {xi1} outside [0, 1]")));
        }
        Ok(Direction { xi1 })
    }

    pub fn xi2(&self) -> f64 {
        1.0 - self.xi1
    }

    pub const E2: Direction = Direction { xi1: 0.0 };
    pub const E1: Direction = Direction { xi1: 1.0 };
}

/// Result of the shape minimization at one direction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShapeReport {
    pub gamma: f64,
    pub chi: f64,
    pub at_lower_endpoint: bool,
    pub at_upper_endpoint: bool,
}

/// Critical directions bounding the strictly concave region.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalPair {
    pub c1: Direction,
    pub c2: Direction,
}

const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_ITER: usize = 200;
const ENDPOINT_OFFSET: f64 = 1e-12;

/// gamma_z(xi) = xi1 * int (a+z)^-1 alpha(da) + xi2 * int (b-z)^-1 beta(db),
/// possibly infinite at the endpoints of [-ess_inf(alpha), ess_inf(beta)].
pub fn gamma_z(env: &Environment, xi: Direction, z: f64) -> Result<f64> {
    if z < -env.alpha.ess_inf() || z > env.beta.ess_inf() {
        return Err(Error::Domain(format!(
            "z = {z} outside [{}, {}]",
            -env.alpha.ess_inf(),
            env.beta.ess_inf()
        )));
    }
    gamma_weighted(env, xi.xi1, xi.xi2(), z)
}

/// Same integral with arbitrary nonnegative weights (not normalized to the
/// simplex); used by the speed law through 1-homogeneity.
fn gamma_weighted(env: &Environment, w1: f64, w2: f64, z: f64) -> Result<f64> {
    let hor = if w1 > 0.0 {
        w1 * env.alpha.moment(z, 1)?
    } else {
        0.0
    };
    let ver = if w2 > 0.0 {
        w2 * env.beta.moment(-z, 1)?
    } else {
        0.0
    };
    Ok(hor + ver)
}

/// Derivative sign driver for the minimization: d/dz gamma_z(xi) =
/// -w1 * int (a+z)^-2 alpha + w2 * int (b-z)^-2 beta, strictly increasing
/// in z.
fn gamma_deriv(env: &Environment, w1: f64, w2: f64, z: f64) -> Result<f64> {
    let m_a = if w1 > 0.0 {
        env.alpha.moment(z, 2)?
    } else {
        0.0
    };
    let m_b = if w2 > 0.0 { env.beta.moment(-z, 2)? } else { 0.0 };
    if m_a.is_infinite() && m_b.is_infinite() {
        return Err(Error::Unresolvable(
            "both second moments infinite at the same z".into(),
        ));
    }
    if m_a.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    if m_b.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(-w1 * m_a + w2 * m_b)
}

fn chi_weighted(env: &Environment, w1: f64, w2: f64, lo: f64, hi: f64) -> Result<ShapeReport> {
    debug_assert!(lo < hi);
    // Clamp by the derivative sign just inside the endpoints; this avoids
    // evaluating possibly infinite first-moment integrals at the ends.
    if gamma_deriv(env, w1, w2, lo + ENDPOINT_OFFSET)? >= 0.0 {
        return Ok(ShapeReport {
            gamma: gamma_weighted(env, w1, w2, lo)?,
            chi: lo,
            at_lower_endpoint: true,
            at_upper_endpoint: false,
        });
    }
    if gamma_deriv(env, w1, w2, hi - ENDPOINT_OFFSET)? <= 0.0 {
        return Ok(ShapeReport {
            gamma: gamma_weighted(env, w1, w2, hi)?,
            chi: hi,
            at_lower_endpoint: false,
            at_upper_endpoint: true,
        });
    }
    // The derivative is strictly increasing, so bisection is unconditionally
    // robust.
    let mut a = lo + ENDPOINT_OFFSET;
    let mut b = hi - ENDPOINT_OFFSET;
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (a + b);
        if gamma_deriv(env, w1, w2, mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < BISECT_TOL {
            break;
        }
    }
    let chi = 0.5 * (a + b);
    Ok(ShapeReport {
        gamma: gamma_weighted(env, w1, w2, chi)?,
        chi,
        at_lower_endpoint: false,
        at_upper_endpoint: false,
    })
}

/// The minimizer chi^x(xi) of z -> gamma_z(xi) over
/// [-inf a_{i:inf}, inf b_{j:inf}], clamped to an endpoint when the
/// derivative keeps one sign, and the attained shape value.
pub fn chi_min(env: &Environment, x: Site, xi: Direction) -> Result<ShapeReport> {
    let lo = -env.tail_inf_a(x.0);
    let hi = env.tail_inf_b(x.1);
    if lo >= hi {
        return Err(Error::InvalidEnvironment(format!(
            "empty parameter interval at {x:?}"
        )));
    }
    chi_weighted(env, xi.xi1, xi.xi2(), lo, hi)
}

/// The direction in which a boundary parameter z is the shape minimizer:
/// xi1 = int (b-z)^-2 beta / (int (a+z)^-2 alpha + int (b-z)^-2 beta).
pub fn rho(env: &Environment, z: f64) -> Result<Direction> {
    let m_a = env.alpha.moment(z, 2)?;
    let m_b = env.beta.moment(-z, 2)?;
    if !m_a.is_finite() || !m_b.is_finite() {
        return Err(Error::Domain(
            "second moments must be finite strictly inside the interval".into(),
        ));
    }
    Direction::new(m_b / (m_a + m_b))
}

/// Critical directions c1^x, c2^x with the conventions c1 = e2 when
/// int (a - inf a)^-2 alpha diverges and c2 = e1 when int (b - inf b)^-2 beta
/// diverges.
pub fn critical_dirs(env: &Environment, x: Site) -> Result<CriticalPair> {
    let inf_a = env.tail_inf_a(x.0);
    let inf_b = env.tail_inf_b(x.1);
    let c1 = {
        let m_a = env.alpha.moment(-inf_a, 2)?;
        let m_b = env.beta.moment(inf_a, 2)?;
        if m_a.is_infinite() {
            Direction::E2
        } else {
            Direction::new(m_b / (m_a + m_b))?
        }
    };
    let c2 = {
        let m_a = env.alpha.moment(inf_b, 2)?;
        let m_b = env.beta.moment(-inf_b, 2)?;
        if m_b.is_infinite() {
            Direction::E1
        } else {
            Direction::new(m_b / (m_a + m_b))?
        }
    };
    Ok(CriticalPair { c1, c2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThinAxis {
    /// Growth along a fixed set of columns x.e1 ..= m.
    Vertical,
    /// Growth along a fixed set of rows x.e2 ..= n.
    Horizontal,
}

/// Linear growth rate of passage times in a thin rectangle: along columns
/// i..=m the rate is int beta(db) / (b + min a_{i:m}); along rows the
/// symmetric expression.
pub fn thin_limit(env: &Environment, x: Site, axis: ThinAxis, bound: i64) -> Result<f64> {
    match axis {
        ThinAxis::Vertical => {
            let (a_min, _) = env.a.running_min(x.0, bound)?;
            env.beta.moment(a_min, 1)
        }
        ThinAxis::Horizontal => {
            let (b_min, _) = env.b.running_min(x.1, bound)?;
            env.alpha.moment(b_min, 1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearSide {
    C1,
    C2,
}

/// Direction interval (as xi1 values) covered by the linear-segment geodesic
/// on the chosen side, from the Cesaro limsup/liminf of the reciprocal
/// squared gaps. Analytic bounds from the recipe are used when available;
/// otherwise they are estimated over prefix lengths 2^k up to `horizon` and
/// both estimates are returned.
pub fn linear_limit_interval(
    env: &Environment,
    x: Site,
    side: LinearSide,
    horizon: Option<i64>,
) -> Result<(f64, f64)> {
    match side {
        LinearSide::C1 => {
            let inf_a = env.tail_inf_a(x.0);
            let b_cap = env.beta.moment(inf_a, 2)?;
            if !b_cap.is_finite() {
                return Err(Error::HypothesisViolation(
                    "int (b + inf a)^-2 beta must be finite".into(),
                ));
            }
            let (lo_ces, hi_ces) = cesaro_bounds(&env.a, x.0, horizon)?;
            Ok((b_cap / (hi_ces + b_cap), b_cap / (lo_ces + b_cap)))
        }
        LinearSide::C2 => {
            let inf_b = env.tail_inf_b(x.1);
            let a_cap = env.alpha.moment(inf_b, 2)?;
            if !a_cap.is_finite() {
                return Err(Error::HypothesisViolation(
                    "int (a + inf b)^-2 alpha must be finite".into(),
                ));
            }
            let (lo_ces, hi_ces) = cesaro_bounds(&env.b, x.1, horizon)?;
            Ok((lo_ces / (a_cap + lo_ces), hi_ces / (a_cap + hi_ces)))
        }
    }
}

fn cesaro_bounds(
    seq: &crate::environment::ParameterSequence,
    start: i64,
    horizon: Option<i64>,
) -> Result<(f64, f64)> {
    if let Some(bounds) = seq.cesaro_bounds(start) {
        return Ok(bounds);
    }
    let horizon = horizon.unwrap_or(1 << 20);
    let inf = seq.tail_inf(start);
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut next_check = 2i64;
    let mut n = 0i64;
    for i in start..=(start + horizon) {
        let gap = seq.value_at(i)? - inf;
        if gap <= 0.0 {
            return Err(Error::HypothesisViolation(format!(
                "rate attains its tail infimum at index {i}; Cesaro averages diverge"
            )));
        }
        sum += 1.0 / (gap * gap);
        n += 1;
        if n == next_check {
            let avg = sum / n as f64;
            lo = lo.min(avg);
            hi = hi.max(avg);
            next_check *= 2;
        }
    }
    if !hi.is_finite() || hi == 0.0 {
        return Err(Error::HypothesisViolation(
            "Cesaro estimation failed".into(),
        ));
    }
    Ok((lo, hi))
}

/// Law of the limiting second-class customer speed in the tandem-queue
/// specialization (row rates identically zero).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedLaw {
    /// P(v = 0) = 1 - inf b_{1:inf} / b_1.
    pub atom_at_zero: f64,
    /// Maximal speed (int b^-1 beta)^-1.
    pub max_speed: f64,
}

/// Distributional data of the speed law at base station 1.
pub fn speed_law(env: &Environment) -> Result<SpeedLaw> {
    require_zero_rows(env)?;
    let b1 = env.b.value_at(1)?;
    let inf_b = env.tail_inf_b(1);
    let mean_service = env.beta.moment(0.0, 1)?;
    Ok(SpeedLaw {
        atom_at_zero: 1.0 - inf_b / b1,
        max_speed: 1.0 / mean_service,
    })
}

/// CDF of the limiting speed at s in (0, max_speed]: 1 - chi(zeta(s)) / b_1,
/// where zeta(s) is the direction whose shape value matches 1/s along the
/// ray (sigma, 1) and chi is the shape minimizer there (the derivative of
/// the inverse shape).
///
/// The inversion runs over the minimizer itself: for z in [0, inf b), a
/// direction with minimizer z has slope sigma(z) = M2beta(-z) / M2alpha(z)
/// and speed s(z) = 1 / (sigma(z) * M1alpha(z) + M1beta(-z)), strictly
/// decreasing in z. This form is exact at the endpoint s = max_speed.
pub fn speed_cdf(env: &Environment, s: f64) -> Result<f64> {
    require_zero_rows(env)?;
    let law = speed_law(env)?;
    if s <= 0.0 || s > law.max_speed + 1e-12 {
        return Err(Error::Domain(format!(
            "speed s = {s} outside (0, {}]",
            law.max_speed
        )));
    }
    let b1 = env.b.value_at(1)?;
    let inf_b = env.tail_inf_b(1);
    let speed_at = |z: f64| -> Result<f64> {
        if z == 0.0 {
            return Ok(law.max_speed);
        }
        let sigma = env.beta.moment(-z, 2)? / env.alpha.moment(z, 2)?;
        Ok(1.0 / (sigma * env.alpha.moment(z, 1)? + env.beta.moment(-z, 1)?))
    };
    if s >= law.max_speed {
        return Ok(1.0);
    }
    let eps = ENDPOINT_OFFSET * inf_b.max(1.0);
    if s <= speed_at(inf_b - eps)? {
        // Below the slowest positive speed; only the trapped atom sits here.
        return Ok(law.atom_at_zero);
    }
    let mut lo = 0.0;
    let mut hi = inf_b - eps;
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if speed_at(mid)? > s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < BISECT_TOL {
            break;
        }
    }
    Ok(1.0 - 0.5 * (lo + hi) / b1)
}

fn require_zero_rows(env: &Environment) -> Result<()> {
    let zero_rows = matches!(
        env.a.spec(),
        crate::environment::RecipeSpec::Constant { value } if *value == 0.0
    );
    if !zero_rows {
        return Err(Error::Mode(
            "speed law requires the row rates to be identically zero".into(),
        ));
    }
    Ok(())
}
