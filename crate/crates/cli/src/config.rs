//! Experiment configuration: environment plus per-subcommand parameter
//! sections. Unknown keys anywhere are rejected before any computation.

use serde::Deserialize;

use icgm_core::busemann::BusemannIndex;
use icgm_core::environment::EnvironmentSpec;
use icgm_core::lattice::Site;
use icgm_core::stationary::BoundarySide;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    #[serde(default)]
    pub shape: Option<ShapeSection>,
    #[serde(default)]
    pub lpp: Option<LppSection>,
    #[serde(default)]
    pub burke: Option<BurkeSection>,
    #[serde(default)]
    pub busemann: Option<BusemannSection>,
    #[serde(default)]
    pub geodesic: Option<GeodesicSection>,
    #[serde(default)]
    pub cif: Option<CifSection>,
    #[serde(default)]
    pub particles: Option<ParticlesSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSection {
    /// Number of directions sampled on the open segment.
    #[serde(default = "d_directions")]
    pub directions: usize,
    #[serde(default = "d_site")]
    pub site: Site,
}

impl Default for ShapeSection {
    fn default() -> Self {
        ShapeSection {
            directions: 99,
            site: (1, 1),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LppSection {
    #[serde(default = "d_size")]
    pub size: i64,
    #[serde(default = "d_site")]
    pub base: Site,
}

impl Default for LppSection {
    fn default() -> Self {
        LppSection {
            size: 12,
            base: (1, 1),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurkeSection {
    #[serde(default = "d_site")]
    pub u: Site,
    #[serde(default = "d_burke_v")]
    pub v: Site,
    #[serde(default)]
    pub z: f64,
    #[serde(default = "d_side")]
    pub side: BoundarySide,
    #[serde(default = "d_replicas")]
    pub replicas: usize,
    #[serde(default = "d_ks")]
    pub ks_threshold: f64,
    #[serde(default = "d_corr")]
    pub corr_threshold: f64,
}

impl Default for BurkeSection {
    fn default() -> Self {
        BurkeSection {
            u: (1, 1),
            v: (10, 10),
            z: 0.0,
            side: BoundarySide::Sw,
            replicas: 10_000,
            ks_threshold: 0.02,
            corr_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusemannSection {
    #[serde(default = "d_site")]
    pub site: Site,
    #[serde(default = "d_index")]
    pub index: BusemannIndex,
    #[serde(default = "d_horizon")]
    pub horizon: i64,
    #[serde(default = "d_replicas_small")]
    pub replicas: usize,
    /// KS threshold for the marginal check; scales with the replica count
    /// when omitted.
    #[serde(default)]
    pub ks_threshold: Option<f64>,
}

impl BusemannSection {
    pub fn effective_ks(&self) -> f64 {
        self.ks_threshold
            .unwrap_or((0.01 + 1.63 / (self.replicas as f64).sqrt()).max(0.03))
    }
}

impl Default for BusemannSection {
    fn default() -> Self {
        BusemannSection {
            site: (1, 1),
            index: d_index(),
            horizon: 400,
            replicas: 2000,
            ks_threshold: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSection {
    #[serde(default = "d_site")]
    pub site: Site,
    #[serde(default = "d_index")]
    pub index: BusemannIndex,
    #[serde(default = "d_horizon")]
    pub horizon: i64,
    #[serde(default)]
    pub window: Option<(i64, i64)>,
    /// Column for the trapping diagnostic.
    #[serde(default)]
    pub trap_column: Option<i64>,
    #[serde(default = "d_replicas_tiny")]
    pub replicas: usize,
}

impl Default for GeodesicSection {
    fn default() -> Self {
        GeodesicSection {
            site: (1, 1),
            index: d_index(),
            horizon: 400,
            window: None,
            trap_column: None,
            replicas: 100,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CifSection {
    #[serde(default = "d_site")]
    pub site: Site,
    #[serde(default = "d_level")]
    pub level: i64,
    #[serde(default = "d_replicas_small")]
    pub replicas: usize,
    #[serde(default = "d_cap")]
    pub finite_cap: i64,
    /// Directions at which the exact CDF is tabulated.
    #[serde(default = "d_directions")]
    pub cdf_points: usize,
}

impl Default for CifSection {
    fn default() -> Self {
        CifSection {
            site: (1, 1),
            level: 200,
            replicas: 2000,
            finite_cap: 8,
            cdf_points: 99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParticlesMode {
    Tasep,
    Zrp,
    CoupleCheck,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticlesSection {
    #[serde(default = "d_mode")]
    pub mode: ParticlesMode,
    #[serde(default = "d_m")]
    pub m: i64,
    #[serde(default = "d_tmax")]
    pub t_max: f64,
    #[serde(default = "d_replicas_small")]
    pub replicas: usize,
    #[serde(default = "d_escape")]
    pub escape_threshold: f64,
}

impl Default for ParticlesSection {
    fn default() -> Self {
        ParticlesSection {
            mode: ParticlesMode::CoupleCheck,
            m: 20,
            t_max: 100.0,
            replicas: 1000,
            escape_threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "d_replicas_small")]
    pub replicas: usize,
    /// When omitted, thresholds scale with the replica count to sit above
    /// the Monte Carlo noise floor.
    #[serde(default)]
    pub ks_threshold: Option<f64>,
    #[serde(default)]
    pub corr_threshold: Option<f64>,
}

impl VerifySection {
    pub fn effective_ks(&self) -> f64 {
        self.ks_threshold
            .unwrap_or(0.02 + 2.0 / (self.replicas as f64).sqrt())
    }

    pub fn effective_corr(&self) -> f64 {
        self.corr_threshold
            .unwrap_or(0.02 + 4.5 / (self.replicas as f64).sqrt())
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            replicas: 1000,
            ks_threshold: None,
            corr_threshold: None,
        }
    }
}

fn d_directions() -> usize {
    99
}
fn d_site() -> Site {
    (1, 1)
}
fn d_size() -> i64 {
    12
}
fn d_burke_v() -> Site {
    (10, 10)
}
fn d_side() -> BoundarySide {
    BoundarySide::Sw
}
fn d_replicas() -> usize {
    10_000
}
fn d_replicas_small() -> usize {
    2000
}
fn d_replicas_tiny() -> usize {
    100
}
fn d_ks() -> f64 {
    0.02
}
fn d_corr() -> f64 {
    0.05
}
fn d_index() -> BusemannIndex {
    BusemannIndex::Direction {
        xi1: 0.5,
        plus: false,
    }
}
fn d_horizon() -> i64 {
    400
}
fn d_level() -> i64 {
    200
}
fn d_cap() -> i64 {
    8
}
fn d_mode() -> ParticlesMode {
    ParticlesMode::CoupleCheck
}
fn d_m() -> i64 {
    20
}
fn d_tmax() -> f64 {
    100.0
}
fn d_escape() -> f64 {
    0.1
}
