//! Counter-based deterministic random streams.
//!
//! Every variate in the simulator is a pure function of (seed, stream, site).
//! This makes any sub-rectangle of a weight field reproducible without
//! generating the rest, and lets replicas run in any order on any number of
//! workers without changing results.

/// Distinct stream tags. Streams with different tags are statistically
/// independent even under the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Bulk weight field omega_{i,j}.
    Bulk,
    /// Parameter draws for iid rate recipes (keyed by the recipe's own seed).
    ParamA,
    ParamB,
    /// Boundary weights of stationary models; the payload distinguishes sides
    /// and boundary parameters.
    Boundary(u64),
    /// Replica seed derivation.
    Replica,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Bulk => 0x01,
            Stream::ParamA => 0x02,
            Stream::ParamB => 0x03,
            Stream::Boundary(h) => 0x100u64 ^ h.rotate_left(17),
            Stream::Replica => 0x05,
        }
    }
}

/// splitmix64 finalizer; full-avalanche 64-bit mixer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of (seed, stream, i, j) with good avalanche in every argument.
#[inline]
pub fn site_bits(seed: u64, stream: Stream, i: i64, j: i64) -> u64 {
    let mut h = mix64(seed ^ stream.tag().wrapping_mul(0x9e37_79b9_7f4a_7c15));
    h = mix64(h ^ (i as u64).wrapping_mul(0xd134_2543_de82_ef95));
    mix64(h ^ (j as u64).wrapping_mul(0x2545_f491_4f6c_dd1d))
}

/// Uniform variate in the open interval (0, 1).
#[inline]
pub fn site_uniform(seed: u64, stream: Stream, i: i64, j: i64) -> f64 {
    // 53 high bits, centered so 0 and 1 are unreachable.
    ((site_bits(seed, stream, i, j) >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Unit-rate exponential variate attached to a site; strictly positive.
#[inline]
pub fn site_unit_exp(seed: u64, stream: Stream, i: i64, j: i64) -> f64 {
    -site_uniform(seed, stream, i, j).ln()
}

/// Seed for replica `index` derived from a master seed. Replicas are
/// independent tasks; aggregation over them is order-independent.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    site_bits(master, Stream::Replica, index as i64, 0x5eed)
}
