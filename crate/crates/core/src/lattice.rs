//! Lattice geometry: sites, rectangles, and nearest-neighbor paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice site (i, j) in Z^2.
pub type Site = (i64, i64);

pub const E1: Site = (1, 0);
pub const E2: Site = (0, 1);

#[inline]
pub fn add(a: Site, b: Site) -> Site {
    (a.0 + b.0, a.1 + b.1)
}

#[inline]
pub fn sub(a: Site, b: Site) -> Site {
    (a.0 - b.0, a.1 - b.1)
}

/// Coordinatewise partial order x <= y.
#[inline]
pub fn leq(a: Site, b: Site) -> bool {
    a.0 <= b.0 && a.1 <= b.1
}

/// Anti-diagonal level of a site: x . (e1 + e2).
#[inline]
pub fn level(a: Site) -> i64 {
    a.0 + a.1
}

/// Dense-storage cap for passage fields.
pub const MAX_DENSE_SITES: u64 = 100_000_000;

/// Rectangle of lattice sites bounded below by `lo` and above by `hi`,
/// nonempty iff lo <= hi coordinatewise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Site,
    pub hi: Site,
}

impl Rect {
    pub fn new(lo: Site, hi: Site) -> Result<Self> {
        if !leq(lo, hi) {
            return Err(Error::EmptyRange {
                lo: lo.0.max(lo.1),
                hi: hi.0.min(hi.1),
            });
        }
        Ok(Rect { lo, hi })
    }

    #[inline]
    pub fn width(&self) -> i64 {
        self.hi.0 - self.lo.0 + 1
    }

    #[inline]
    pub fn height(&self) -> i64 {
        self.hi.1 - self.lo.1 + 1
    }

    #[inline]
    pub fn num_sites(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    #[inline]
    pub fn contains(&self, p: Site) -> bool {
        leq(self.lo, p) && leq(p, self.hi)
    }

    /// Row-major index of a site inside the rectangle.
    #[inline]
    pub fn index(&self, p: Site) -> usize {
        debug_assert!(self.contains(p));
        ((p.1 - self.lo.1) * self.width() + (p.0 - self.lo.0)) as usize
    }

    /// Reflection x -> lo + hi - x, mapping the rectangle onto itself.
    #[inline]
    pub fn reflect(&self, p: Site) -> Site {
        (self.lo.0 + self.hi.0 - p.0, self.lo.1 + self.hi.1 - p.1)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        let r = *self;
        (r.lo.1..=r.hi.1).flat_map(move |j| (r.lo.0..=r.hi.0).map(move |i| (i, j)))
    }
}

/// Step kinds a lattice path may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// Steps in {e1, e2}; indexed so that pi_n . (e1+e2) = n.
    UpRight,
    /// Steps in {e1, -e2}.
    DownRight,
    /// Up-right path on the dual lattice Z^2 + (1/2, 1/2); stored via the
    /// lower-left integer corner of each dual site.
    Dual,
}

/// A nearest-neighbor site sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePath {
    pub kind: PathKind,
    pub sites: Vec<Site>,
}

impl LatticePath {
    pub fn new(kind: PathKind, sites: Vec<Site>) -> Result<Self> {
        let path = LatticePath { kind, sites };
        path.check_steps()?;
        Ok(path)
    }

    fn check_steps(&self) -> Result<()> {
        for w in self.sites.windows(2) {
            let d = sub(w[1], w[0]);
            let ok = match self.kind {
                PathKind::UpRight | PathKind::Dual => d == E1 || d == E2,
                PathKind::DownRight => d == E1 || d == (0, -1),
            };
            if !ok {
                return Err(Error::Path(format!(
                    "step {:?} -> {:?} does not match kind {:?}",
                    w[0], w[1], self.kind
                )));
            }
        }
        Ok(())
    }

    pub fn start(&self) -> Site {
        self.sites[0]
    }

    pub fn end(&self) -> Site {
        *self.sites.last().expect("nonempty path")
    }

    /// Site at anti-diagonal level n (up-right paths only).
    pub fn at_level(&self, n: i64) -> Option<Site> {
        debug_assert_eq!(self.kind, PathKind::UpRight);
        let base = level(self.start());
        if n < base || n > level(self.end()) {
            return None;
        }
        Some(self.sites[(n - base) as usize])
    }
}

/// The maximal down-right staircase from (lo.0 - 1, hi.1) to (hi.0, lo.1 - 1),
/// the standard corner-to-corner path used in boundary-model partitions.
pub fn staircase_path(lo: Site, hi: Site) -> LatticePath {
    let mut sites = Vec::new();
    let mut p = (lo.0 - 1, hi.1);
    sites.push(p);
    while p != (hi.0, lo.1 - 1) {
        if p.0 < hi.0 {
            p = add(p, E1);
            sites.push(p);
        }
        if p.1 > lo.1 - 1 {
            p = (p.0, p.1 - 1);
            sites.push(p);
        }
    }
    LatticePath {
        kind: PathKind::DownRight,
        sites,
    }
}

/// Partition test from the down-right path split: `p` is strictly above `path`
/// iff p - k(e1+e2) lies on the path for some k > 0, strictly below iff
/// p + k(e1+e2) does.
pub fn strictly_above(path: &LatticePath, p: Site) -> bool {
    diag_hits(path, p, -1)
}

pub fn strictly_below(path: &LatticePath, p: Site) -> bool {
    diag_hits(path, p, 1)
}

fn diag_hits(path: &LatticePath, p: Site, dir: i64) -> bool {
    // Walk the diagonal through p toward the path's band of anti-diagonal
    // levels and test membership.
    let levels: Vec<i64> = path.sites.iter().map(|&s| level(s)).collect();
    let min_l = *levels.iter().min().unwrap();
    let max_l = *levels.iter().max().unwrap();
    let mut q = (p.0 + dir, p.1 + dir);
    loop {
        if dir > 0 && level(q) > max_l {
            return false;
        }
        if dir < 0 && level(q) < min_l {
            return false;
        }
        if path.sites.contains(&q) {
            return true;
        }
        q = (q.0 + dir, q.1 + dir);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_reflect_involution() {
        let r = Rect::new((-2, 3), (5, 9)).unwrap();
        for p in r.sites() {
            assert_eq!(r.reflect(r.reflect(p)), p);
            assert!(r.contains(r.reflect(p)));
        }
    }

    #[test]
    fn empty_rect_rejected() {
        assert!(Rect::new((1, 1), (0, 5)).is_err());
    }

    #[test]
    fn staircase_spans_corners() {
        let path = staircase_path((1, 1), (5, 5));
        assert_eq!(path.start(), (0, 5));
        assert_eq!(path.end(), (5, 0));
        let h = path
            .sites
            .windows(2)
            .filter(|w| sub(w[1], w[0]) == E1)
            .count();
        let v = path.sites.len() - 1 - h;
        assert_eq!(h, 5);
        assert_eq!(v, 5);
    }

    #[test]
    fn partition_above_below() {
        let path = staircase_path((1, 1), (3, 3));
        assert!(strictly_above(&path, (2, 3)));
        assert!(strictly_below(&path, (1, 1)));
        assert!(!strictly_above(&path, (1, 1)));
    }
}
