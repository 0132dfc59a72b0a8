//! Inhomogeneity recipes, the limit measures alpha and beta, and the seeded
//! random weight field omega_{i,j} = tau_{i,j} / (a_i + b_j).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Rect, Site};
use crate::rng::{site_uniform, site_unit_exp, Stream};

/// Which of the two parameter sequences a recipe instantiates. Determines the
/// stream used for iid draws so that row and column draws never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    A,
    B,
}

/// Rate-sequence recipes. Each exposes a deterministic value at every index
/// of the declared window and an analytically declared tail infimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecipeSpec {
    /// a_i = value for all i.
    Constant { value: f64 },
    /// Listed values at indices start, start+1, ...; `tail` elsewhere
    /// (both beyond the list and before `start`).
    ExplicitWithTail {
        values: Vec<f64>,
        tail: f64,
        #[serde(default = "default_start")]
        start: i64,
    },
    /// values[(i mod len)] extended bi-infinitely.
    Periodic { values: Vec<f64> },
    /// Base rate everywhere except on geometrically spaced blocks: for
    /// integers k >= 1 and t^k <= i < t^k + t^{(1-2p)k}, the rate is
    /// sqrt(r) * t^{-p k}. Block values decrease to 0, so the tail infimum
    /// is 0 from every start index.
    GeometricBlocks { t: f64, p: f64, r: f64, base: f64 },
    /// Base rate except on blocks k^2 <= i < k^2 + k^p where the rate is
    /// sqrt(r/2) * k^{-(1-p)/2}. Tail infimum 0.
    QuadraticBlocks { r: f64, p: f64, base: f64 },
    /// Base rate except at indices i = ratio^k (k >= 1) where the rate dips
    /// to `dip`. The dip indices have density zero, so the empirical measure
    /// converges to a point mass at `base` while the tail infimum is `dip`.
    SparseDips { base: f64, dip: f64, ratio: u32 },
    /// iid draws from the density (exponent+1) * x^exponent on (0, 1),
    /// generated from the recipe's own seed so the quenched sequence is
    /// shared across weight replicas. Tail infimum 0 (essential infimum).
    IidPower { exponent: f64, seed: u64 },
}

fn default_start() -> i64 {
    1
}

/// A rate sequence: recipe plus the axis it lives on and the window of valid
/// indices.
#[derive(Debug, Clone)]
pub struct ParameterSequence {
    spec: RecipeSpec,
    axis: Axis,
    window: (i64, i64),
}

impl ParameterSequence {
    pub fn new(spec: RecipeSpec, axis: Axis, window: (i64, i64)) -> Result<Self> {
        if window.0 > window.1 {
            return Err(Error::EmptyRange {
                lo: window.0,
                hi: window.1,
            });
        }
        match &spec {
            RecipeSpec::Constant { value } if *value < 0.0 => {
                return Err(Error::InvalidEnvironment("negative constant rate".into()))
            }
            RecipeSpec::Periodic { values } | RecipeSpec::ExplicitWithTail { values, .. }
                if values.is_empty() =>
            {
                return Err(Error::InvalidEnvironment("empty value list".into()))
            }
            RecipeSpec::GeometricBlocks { t, p, r, .. } => {
                if *t <= 1.0 || *p <= 0.0 || *p >= 0.5 || *r <= 0.0 {
                    return Err(Error::InvalidEnvironment(
                        "geometric blocks need t > 1, p in (0, 1/2), r > 0".into(),
                    ));
                }
            }
            RecipeSpec::QuadraticBlocks { r, p, .. } => {
                if *p <= 0.0 || *p >= 0.5 || *r <= 0.0 {
                    return Err(Error::InvalidEnvironment(
                        "quadratic blocks need p in (0, 1/2), r > 0".into(),
                    ));
                }
            }
            RecipeSpec::SparseDips { base, dip, ratio } => {
                if dip >= base || *ratio < 2 {
                    return Err(Error::InvalidEnvironment(
                        "sparse dips need dip < base and ratio >= 2".into(),
                    ));
                }
            }
            RecipeSpec::IidPower { exponent, .. } if *exponent < 0.0 => {
                return Err(Error::InvalidEnvironment("negative power exponent".into()))
            }
            _ => {}
        }
        Ok(ParameterSequence { spec, axis, window })
    }

    pub fn spec(&self) -> &RecipeSpec {
        &self.spec
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    fn value_unchecked(&self, i: i64) -> f64 {
        match &self.spec {
            RecipeSpec::Constant { value } => *value,
            RecipeSpec::ExplicitWithTail {
                values,
                tail,
                start,
            } => {
                if i < *start || i >= *start + values.len() as i64 {
                    *tail
                } else {
                    values[(i - start) as usize]
                }
            }
            RecipeSpec::Periodic { values } => {
                let len = values.len() as i64;
                values[(i.rem_euclid(len)) as usize]
            }
            RecipeSpec::GeometricBlocks { t, p, r, base } => {
                match geometric_block_index(i, *t, *p) {
                    Some(k) => r.sqrt() * t.powf(-p * k as f64),
                    None => *base,
                }
            }
            RecipeSpec::QuadraticBlocks { r, p, base } => match quadratic_block_index(i, *p) {
                Some(k) => (r / 2.0).sqrt() * (k as f64).powf(-(1.0 - p) / 2.0),
                None => *base,
            },
            RecipeSpec::SparseDips { base, dip, ratio } => {
                if is_power_of(i, *ratio) {
                    *dip
                } else {
                    *base
                }
            }
            RecipeSpec::IidPower { exponent, seed } => {
                let stream = match self.axis {
                    Axis::A => Stream::ParamA,
                    Axis::B => Stream::ParamB,
                };
                let u = site_uniform(*seed, stream, i, 0);
                // Inverse CDF of (k+1) x^k on (0,1).
                u.powf(1.0 / (exponent + 1.0))
            }
        }
    }

    /// Rate at index `i`.
    pub fn value_at(&self, i: i64) -> Result<f64> {
        if i < self.window.0 || i > self.window.1 {
            return Err(Error::WindowViolation {
                index: i,
                lo: self.window.0,
                hi: self.window.1,
            });
        }
        Ok(self.value_unchecked(i))
    }

    /// Running minimum over indices i..=k together with the first index
    /// attaining it.
    pub fn running_min(&self, i: i64, k: i64) -> Result<(f64, i64)> {
        if i > k {
            return Err(Error::EmptyRange { lo: i, hi: k });
        }
        let mut best = self.value_at(i)?;
        let mut arg = i;
        for idx in (i + 1)..=k {
            let v = self.value_at(idx)?;
            if v < best {
                best = v;
                arg = idx;
            }
        }
        Ok((best, arg))
    }

    /// Analytic infimum over indices >= i.
    pub fn tail_inf(&self, i: i64) -> f64 {
        match &self.spec {
            RecipeSpec::Constant { value } => *value,
            RecipeSpec::ExplicitWithTail {
                values,
                tail,
                start,
            } => {
                let mut inf = *tail;
                for (off, v) in values.iter().enumerate() {
                    if *start + off as i64 >= i {
                        inf = inf.min(*v);
                    }
                }
                inf
            }
            RecipeSpec::Periodic { values } => values.iter().copied().fold(f64::INFINITY, f64::min),
            RecipeSpec::GeometricBlocks { .. } | RecipeSpec::QuadraticBlocks { .. } => 0.0,
            RecipeSpec::SparseDips { dip, .. } => *dip,
            RecipeSpec::IidPower { .. } => 0.0,
        }
    }

    /// First index >= i where the tail infimum is attained, if the recipe
    /// attains it at all. `None` means the running minimum keeps changing
    /// forever (the infimum is approached, never reached).
    pub fn first_attainment(&self, i: i64) -> Option<i64> {
        let inf = self.tail_inf(i);
        match &self.spec {
            RecipeSpec::Constant { .. } => Some(i),
            RecipeSpec::ExplicitWithTail {
                values,
                tail,
                start,
            } => {
                for (off, v) in values.iter().enumerate() {
                    let idx = *start + off as i64;
                    if idx >= i && *v == inf {
                        return Some(idx);
                    }
                }
                if *tail == inf {
                    Some((*start + values.len() as i64).max(i))
                } else {
                    None
                }
            }
            RecipeSpec::Periodic { values } => {
                let len = values.len() as i64;
                (i..i + len).find(|&idx| values[idx.rem_euclid(len) as usize] == inf)
            }
            _ => None,
        }
    }

    /// Analytic limsup/liminf Cesaro averages of 1/(a_k - tail_inf)^2 over
    /// prefixes starting at `start`, when the recipe supplies them.
    pub fn cesaro_bounds(&self, _start: i64) -> Option<(f64, f64)> {
        match &self.spec {
            RecipeSpec::GeometricBlocks { t, p: _, r, base } => {
                // Non-block indices contribute 1/base^2 with density one; the
                // blocks contribute t^k / r up to scale t^k, peaking right
                // after each block and thinnest just before the next.
                let c = 1.0 / (base * base);
                let lo = c + 1.0 / (r * (t - 1.0));
                let hi = c + t / (r * (t - 1.0));
                Some((lo, hi))
            }
            RecipeSpec::QuadraticBlocks { r, p: _, base } => {
                // Block k adds ~2k/r over scale k^2; relative jumps vanish.
                let v = 1.0 / (base * base) + 1.0 / r;
                Some((v, v))
            }
            RecipeSpec::IidPower { exponent, .. } => {
                // Law of large numbers: E[x^{-2}] under (k+1) x^k dx,
                // finite iff exponent > 1.
                if *exponent > 1.0 {
                    let v = (exponent + 1.0) / (exponent - 1.0);
                    Some((v, v))
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

fn geometric_block_index(i: i64, t: f64, p: f64) -> Option<usize> {
    if i < 1 {
        return None;
    }
    let x = i as f64;
    // Candidate k with t^k <= i: k = floor(log_t i).
    let k = (x.ln() / t.ln()).floor() as i64;
    for cand in (k - 1).max(1)..=(k + 1) {
        let lo = t.powi(cand as i32);
        let hi = lo + t.powf((1.0 - 2.0 * p) * cand as f64);
        if x >= lo && x < hi {
            return Some(cand as usize);
        }
    }
    None
}

fn quadratic_block_index(i: i64, p: f64) -> Option<usize> {
    if i < 1 {
        return None;
    }
    let x = i as f64;
    let k = x.sqrt().floor() as i64;
    for cand in (k - 1).max(1)..=(k + 1) {
        let lo = (cand * cand) as f64;
        let hi = lo + (cand as f64).powf(p);
        if x >= lo && x < hi {
            return Some(cand as usize);
        }
    }
    None
}

fn is_power_of(i: i64, ratio: u32) -> bool {
    if i < ratio as i64 {
        return false;
    }
    let mut v = ratio as i64;
    while v < i {
        match v.checked_mul(ratio as i64) {
            Some(next) => v = next,
            None => return false,
        }
    }
    v == i
}

/// Number of Gauss-Legendre nodes used for density-measure integrals.
pub const DEFAULT_QUAD_NODES: usize = 4096;

/// A non-zero sub-probability measure on the positive half-line.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Finite list of (atom, mass) pairs.
    Atomic { atoms: Vec<(f64, f64)> },
    /// Density mass * (exponent+1) * (x-lo)^exponent / (hi-lo)^(exponent+1)
    /// on the interval (lo, hi), integrated by fixed Gauss-Legendre
    /// quadrature.
    PowerDensity {
        exponent: f64,
        #[serde(default = "default_mass")]
        mass: f64,
        #[serde(default)]
        lo: f64,
        #[serde(default = "default_hi")]
        hi: f64,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
}

fn default_mass() -> f64 {
    1.0
}
fn default_hi() -> f64 {
    1.0
}
fn default_nodes() -> usize {
    DEFAULT_QUAD_NODES
}

/// Validated measure with cached quadrature nodes for the density case.
#[derive(Debug, Clone)]
pub struct SubProbabilityMeasure {
    spec: MeasureSpec,
    /// (node, weight) pairs on (lo, hi); empty for atomic measures.
    quad: Vec<(f64, f64)>,
}

impl SubProbabilityMeasure {
    pub fn new(spec: MeasureSpec) -> Result<Self> {
        let quad = match &spec {
            MeasureSpec::Atomic { atoms } => {
                let total: f64 = atoms.iter().map(|(_, m)| m).sum();
                if atoms.is_empty() || total <= 0.0 {
                    return Err(Error::InvalidEnvironment("measure is zero".into()));
                }
                if total > 1.0 + 1e-12 {
                    return Err(Error::InvalidEnvironment(format!(
                        "total mass {total} exceeds 1"
                    )));
                }
                if atoms.iter().any(|(_, m)| *m < 0.0) {
                    return Err(Error::InvalidEnvironment("negative atom mass".into()));
                }
                Vec::new()
            }
            MeasureSpec::PowerDensity {
                exponent,
                mass,
                lo,
                hi,
                nodes,
            } => {
                if *mass <= 0.0 || *mass > 1.0 + 1e-12 {
                    return Err(Error::InvalidEnvironment("mass must be in (0, 1]".into()));
                }
                if *exponent < 0.0 || hi <= lo || *nodes == 0 {
                    return Err(Error::InvalidEnvironment(
                        "power density needs exponent >= 0, hi > lo, nodes > 0".into(),
                    ));
                }
                gauss_legendre(*nodes, *lo, *hi)
            }
        };
        Ok(SubProbabilityMeasure { spec, quad })
    }

    pub fn dirac(atom: f64) -> Self {
        SubProbabilityMeasure::new(MeasureSpec::Atomic {
            atoms: vec![(atom, 1.0)],
        })
        .expect("valid point mass")
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn total_mass(&self) -> f64 {
        match &self.spec {
            MeasureSpec::Atomic { atoms } => atoms.iter().map(|(_, m)| m).sum(),
            MeasureSpec::PowerDensity { mass, .. } => *mass,
        }
    }

    /// Essential infimum of the measure.
    pub fn ess_inf(&self) -> f64 {
        match &self.spec {
            MeasureSpec::Atomic { atoms } => atoms
                .iter()
                .filter(|(_, m)| *m > 0.0)
                .map(|(a, _)| *a)
                .fold(f64::INFINITY, f64::min),
            MeasureSpec::PowerDensity { lo, .. } => *lo,
        }
    }

    /// Left limit of the CDF (mass strictly below x).
    pub fn cdf_left(&self, x: f64) -> f64 {
        match &self.spec {
            MeasureSpec::Atomic { atoms } => atoms
                .iter()
                .filter(|(a, _)| *a < x)
                .map(|(_, m)| m)
                .sum(),
            MeasureSpec::PowerDensity { .. } => self.cdf(x),
        }
    }

    /// CDF of the measure (mass of (-inf, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.spec {
            MeasureSpec::Atomic { atoms } => atoms
                .iter()
                .filter(|(a, _)| *a <= x)
                .map(|(_, m)| m)
                .sum(),
            MeasureSpec::PowerDensity {
                exponent,
                mass,
                lo,
                hi,
                ..
            } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    *mass
                } else {
                    mass * ((x - lo) / (hi - lo)).powf(exponent + 1.0)
                }
            }
        }
    }

    /// The integral of (t + z)^(-order) against the measure, with the
    /// convention 1/0 = infinity. `order` is 1 or 2.
    pub fn moment(&self, z: f64, order: u32) -> Result<f64> {
        let ei = self.ess_inf();
        if z < -ei {
            return Err(Error::Domain(format!(
                "z = {z} below -(essential infimum) = {}",
                -ei
            )));
        }
        match &self.spec {
            MeasureSpec::Atomic { atoms } => {
                let mut sum = 0.0;
                for (a, m) in atoms {
                    if *m == 0.0 {
                        continue;
                    }
                    let d = a + z;
                    if d <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    sum += m / d.powi(order as i32);
                }
                Ok(sum)
            }
            MeasureSpec::PowerDensity { exponent, lo, .. } => {
                // At the endpoint z = -lo the integrand behaves like
                // (x - lo)^(exponent - order); divergent iff the exponent
                // drops to -1 or below.
                if z == -lo && *exponent - order as f64 <= -1.0 {
                    return Ok(f64::INFINITY);
                }
                let mut sum = 0.0;
                for &(x, w) in &self.quad {
                    sum += w * self.density(x) / (x + z).powi(order as i32);
                }
                Ok(sum)
            }
        }
    }

    fn density(&self, x: f64) -> f64 {
        match &self.spec {
            MeasureSpec::Atomic { .. } => 0.0,
            MeasureSpec::PowerDensity {
                exponent,
                mass,
                lo,
                hi,
                ..
            } => mass * (exponent + 1.0) * (x - lo).powf(*exponent) / (hi - lo).powf(exponent + 1.0),
        }
    }
}

/// Gauss-Legendre nodes and weights on (a, b), by Newton iteration on the
/// Legendre polynomial recurrence.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((mid - half * x, half * w));
        if n - 1 - i != i {
            out.push((mid + half * x, half * w));
        }
    }
    out.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap());
    out
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached row/column rates over a rectangle; weight evaluation reduces to
/// a hash, a logarithm, and one division.
#[derive(Debug, Clone)]
pub struct RateTable {
    seed: u64,
    lo: Site,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl RateTable {
    #[inline]
    pub fn weight(&self, site: Site) -> f64 {
        let rate = self.a[(site.0 - self.lo.0) as usize] + self.b[(site.1 - self.lo.1) as usize];
        site_unit_exp(self.seed, Stream::Bulk, site.0, site.1) / rate
    }
}

/// The random environment: row and column rate sequences, their declared
/// vague limits, and a master seed for the weight field.
#[derive(Debug, Clone)]
pub struct Environment {
    pub a: ParameterSequence,
    pub b: ParameterSequence,
    pub alpha: SubProbabilityMeasure,
    pub beta: SubProbabilityMeasure,
    pub seed: u64,
    pub window: Rect,
}

/// JSON form of an environment, the `a`/`b`/`alpha`/`beta`/`seed`/`window`
/// schema used by experiment configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub a: RecipeSpec,
    pub b: RecipeSpec,
    pub alpha: MeasureSpec,
    pub beta: MeasureSpec,
    pub seed: u64,
    pub window: ((i64, i64), (i64, i64)),
}

impl Environment {
    pub fn from_spec(spec: EnvironmentSpec) -> Result<Self> {
        let window = Rect::new(spec.window.0, spec.window.1)?;
        let a = ParameterSequence::new(spec.a, Axis::A, (window.lo.0, window.hi.0))?;
        let b = ParameterSequence::new(spec.b, Axis::B, (window.lo.1, window.hi.1))?;
        let alpha = SubProbabilityMeasure::new(spec.alpha)?;
        let beta = SubProbabilityMeasure::new(spec.beta)?;
        let env = Environment {
            a,
            b,
            alpha,
            beta,
            seed: spec.seed,
            window,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn to_spec(&self) -> EnvironmentSpec {
        EnvironmentSpec {
            a: self.a.spec().clone(),
            b: self.b.spec().clone(),
            alpha: self.alpha.spec().clone(),
            beta: self.beta.spec().clone(),
            seed: self.seed,
            window: (self.window.lo, self.window.hi),
        }
    }

    /// Same environment with a different master seed (replicas).
    pub fn with_seed(&self, seed: u64) -> Environment {
        let mut env = self.clone();
        env.seed = seed;
        env
    }

    fn validate(&self) -> Result<()> {
        // Tail-infimum positivity at the window corner; the tail infima are
        // nonincreasing in the start index left of the corner, so checking
        // the lower corner suffices.
        let ai = self.a.tail_inf(self.window.lo.0);
        let bi = self.b.tail_inf(self.window.lo.1);
        if ai + bi <= 0.0 {
            return Err(Error::InvalidEnvironment(format!(
                "tail infima sum to {}; must be positive",
                ai + bi
            )));
        }
        // Declared vague limits can only be checked for recipes whose
        // empirical measure is computable in closed reach: constant,
        // periodic, explicit and sparse-dip lists. Block and iid recipes
        // declare their limits analytically.
        self.check_declared_limit(&self.a, &self.alpha)?;
        self.check_declared_limit(&self.b, &self.beta)?;
        Ok(())
    }

    fn check_declared_limit(
        &self,
        seq: &ParameterSequence,
        declared: &SubProbabilityMeasure,
    ) -> Result<()> {
        let checkable = matches!(
            seq.spec(),
            RecipeSpec::Constant { .. }
                | RecipeSpec::Periodic { .. }
                | RecipeSpec::ExplicitWithTail { .. }
                | RecipeSpec::SparseDips { .. }
        );
        if !checkable {
            return Ok(());
        }
        let n = 10_000i64;
        let lo = seq.window().0.max(1);
        let hi = (lo + n - 1).min(seq.window().1);
        let mut values: Vec<f64> = (lo..=hi).map(|i| seq.value_unchecked(i)).collect();
        values.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let d = crate::stats::ks_distance_mixed(
            &values,
            &|x| declared.cdf(x),
            &|x| declared.cdf_left(x),
        );
        if d >= 0.05 {
            return Err(Error::InvalidEnvironment(format!(
                "declared limit measure is off: empirical KS distance {d:.3} >= 0.05"
            )));
        }
        Ok(())
    }

    /// Rate sum a_i + b_j at a site.
    pub fn rate_sum(&self, site: Site) -> Result<f64> {
        let r = self.a.value_at(site.0)? + self.b.value_at(site.1)?;
        if r <= 0.0 {
            return Err(Error::InvalidEnvironment(format!(
                "rate sum {r} at {site:?} is not positive"
            )));
        }
        Ok(r)
    }

    /// The weight omega_{i,j} = tau_{i,j} / (a_i + b_j), a deterministic
    /// function of (seed, site); strictly positive.
    pub fn sample_weight(&self, site: Site) -> Result<f64> {
        let rate = self.rate_sum(site)?;
        Ok(site_unit_exp(self.seed, Stream::Bulk, site.0, site.1) / rate)
    }

    /// Unchecked fast path for inner DP loops; caller guarantees the window.
    #[inline]
    pub fn weight_unchecked(&self, site: Site) -> f64 {
        let rate = self.a.value_unchecked(site.0) + self.b.value_unchecked(site.1);
        site_unit_exp(self.seed, Stream::Bulk, site.0, site.1) / rate
    }

    /// Precomputed rate sums over a rectangle, for DP inner loops where
    /// recipe evaluation (block lookups, quantile transforms) must not run
    /// per site.
    pub fn rate_table(&self, lo: Site, hi: Site) -> RateTable {
        RateTable {
            seed: self.seed,
            lo,
            a: (lo.0..=hi.0).map(|i| self.a.value_unchecked(i)).collect(),
            b: (lo.1..=hi.1).map(|j| self.b.value_unchecked(j)).collect(),
        }
    }

    /// Tail infimum of the row rates from column i.
    pub fn tail_inf_a(&self, i: i64) -> f64 {
        self.a.tail_inf(i)
    }

    /// Tail infimum of the column rates from row j.
    pub fn tail_inf_b(&self, j: i64) -> f64 {
        self.b.tail_inf(j)
    }
}
