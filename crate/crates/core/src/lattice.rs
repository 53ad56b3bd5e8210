//! Sites, rectangles, infected-set configurations and Bernoulli sampling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

/// A lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    /// Horizontal neighbours x ± e1.
    pub fn horizontal(self) -> [Site; 2] {
        [Site::new(self.x - 1, self.y), Site::new(self.x + 1, self.y)]
    }

    /// Vertical neighbours x ± e2.
    pub fn vertical(self) -> [Site; 2] {
        [Site::new(self.x, self.y - 1), Site::new(self.x, self.y + 1)]
    }

    pub fn neighbours(self) -> [Site; 4] {
        [
            Site::new(self.x - 1, self.y),
            Site::new(self.x + 1, self.y),
            Site::new(self.x, self.y - 1),
            Site::new(self.x, self.y + 1),
        ]
    }
}

/// Integer rectangle with inclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Rect {
    pub x1: i32,
    pub y1: i32,
    pub x2: i32,
    pub y2: i32,
}

impl std::fmt::Display for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "R({},{};{},{})", self.x1, self.y1, self.x2, self.y2)
    }
}

impl Rect {
    pub fn new(x1: i32, y1: i32, x2: i32, y2: i32) -> Result<Self> {
        if x1 > x2 || y1 > y2 {
            return Err(Error::InvalidRect { x1, y1, x2, y2 });
        }
        Ok(Rect { x1, y1, x2, y2 })
    }

    /// The square R(1,1;l,l) used by filling events.
    pub fn unit_square(l: u32) -> Self {
        assert!(l >= 1, "square side must be positive");
        Rect {
            x1: 1,
            y1: 1,
            x2: l as i32,
            y2: l as i32,
        }
    }

    /// Square box of odd side centered on the origin.
    pub fn centered_square(side: u32) -> Self {
        assert!(side % 2 == 1, "centered box needs an odd side");
        let h = (side / 2) as i32;
        Rect {
            x1: -h,
            y1: -h,
            x2: h,
            y2: h,
        }
    }

    pub fn width(&self) -> u32 {
        (self.x2 - self.x1) as u32 + 1
    }

    pub fn height(&self) -> u32 {
        (self.y2 - self.y1) as u32 + 1
    }

    pub fn cells(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains(&self, s: Site) -> bool {
        s.x >= self.x1 && s.x <= self.x2 && s.y >= self.y1 && s.y <= self.y2
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        r.x1 >= self.x1 && r.x2 <= self.x2 && r.y1 >= self.y1 && r.y2 <= self.y2
    }

    pub fn intersects(&self, r: &Rect) -> bool {
        self.x1 <= r.x2 && r.x1 <= self.x2 && self.y1 <= r.y2 && r.y1 <= self.y2
    }

    /// Row-major iteration over the cells.
    pub fn iter(&self) -> impl Iterator<Item = Site> + '_ {
        let r = *self;
        (r.y1..=r.y2).flat_map(move |y| (r.x1..=r.x2).map(move |x| Site::new(x, y)))
    }
}

/// Parameters of a product-Bernoulli sample over a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    pub p: f64,
    pub seed: u64,
    pub region: Rect,
}

impl SampleSpec {
    pub fn new(p: f64, seed: u64, region: Rect) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidProbability { p, range: "[0,1]" });
        }
        Ok(SampleSpec { p, seed, region })
    }
}

/// A finite box together with the set of infected sites inside it.
///
/// Storage is a dense bitset over the box, one bit per cell, so closure
/// kernels get O(1) membership. Sparse constructors cover tiny witness sets.
#[derive(Clone, PartialEq, Eq)]
pub struct Configuration {
    domain: Rect,
    words: Vec<u64>,
    infected: usize,
}

impl std::fmt::Debug for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Configuration")
            .field("domain", &self.domain)
            .field("infected", &self.infected)
            .finish()
    }
}

impl Configuration {
    pub fn empty(domain: Rect) -> Self {
        let cells = domain.cells() as usize;
        Configuration {
            domain,
            words: vec![0; cells.div_ceil(64)],
            infected: 0,
        }
    }

    /// Builds a configuration from explicit sites; all must lie in the box.
    pub fn from_sites<I: IntoIterator<Item = Site>>(domain: Rect, sites: I) -> Result<Self> {
        let mut cfg = Configuration::empty(domain);
        for s in sites {
            if !domain.contains(s) {
                return Err(Error::SiteOutsideBox {
                    x: s.x,
                    y: s.y,
                    domain: domain.to_string(),
                });
            }
            cfg.insert(s);
        }
        Ok(cfg)
    }

    /// Product-Bernoulli sample.
    ///
    /// Each cell's decision is a pure function of (seed, x, y), so identical
    /// specs give identical configurations and a sub-rectangle sampled with
    /// the same seed is exactly the restriction of the full sample.
    pub fn sample(spec: &SampleSpec) -> Self {
        let mut cfg = Configuration::empty(spec.region);
        let r = spec.region;
        let mut idx = 0usize;
        for y in r.y1..=r.y2 {
            for x in r.x1..=r.x2 {
                if rng::cell_decision(spec.seed, x, y, spec.p) {
                    cfg.words[idx >> 6] |= 1u64 << (idx & 63);
                    cfg.infected += 1;
                }
                idx += 1;
            }
        }
        cfg
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn infected_count(&self) -> usize {
        self.infected
    }

    #[inline]
    pub(crate) fn index_of(&self, s: Site) -> usize {
        debug_assert!(self.domain.contains(s));
        (s.y - self.domain.y1) as usize * self.domain.width() as usize
            + (s.x - self.domain.x1) as usize
    }

    #[inline]
    pub(crate) fn site_at(&self, idx: usize) -> Site {
        let w = self.domain.width() as usize;
        Site::new(
            self.domain.x1 + (idx % w) as i32,
            self.domain.y1 + (idx / w) as i32,
        )
    }

    /// Membership; sites outside the box are never infected.
    #[inline]
    pub fn contains(&self, s: Site) -> bool {
        if !self.domain.contains(s) {
            return false;
        }
        let idx = self.index_of(s);
        self.words[idx >> 6] >> (idx & 63) & 1 == 1
    }

    pub fn insert(&mut self, s: Site) {
        assert!(
            self.domain.contains(s),
            "site ({},{}) outside box {}",
            s.x,
            s.y,
            self.domain
        );
        let idx = self.index_of(s);
        let mask = 1u64 << (idx & 63);
        if self.words[idx >> 6] & mask == 0 {
            self.words[idx >> 6] |= mask;
            self.infected += 1;
        }
    }

    pub(crate) fn insert_index(&mut self, idx: usize) {
        let mask = 1u64 << (idx & 63);
        if self.words[idx >> 6] & mask == 0 {
            self.words[idx >> 6] |= mask;
            self.infected += 1;
        }
    }

    /// Iterates infected sites in row-major order.
    pub fn iter_infected(&self) -> impl Iterator<Item = Site> + '_ {
        self.words.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(self.site_at(wi * 64 + b))
            })
        })
    }

    /// True iff every site of `self` is infected in `other` over a common box.
    pub fn is_subset_of(&self, other: &Configuration) -> bool {
        self.iter_infected().all(|s| other.contains(s))
    }

    /// Restriction of the infected set to `rect`, over the same box.
    pub fn restricted_to(&self, rect: &Rect) -> Result<Configuration> {
        self.check_rect(rect)?;
        let mut out = Configuration::empty(self.domain);
        for s in rect.iter() {
            if self.contains(s) {
                out.insert(s);
            }
        }
        Ok(out)
    }

    pub(crate) fn check_rect(&self, rect: &Rect) -> Result<()> {
        if !self.domain.contains_rect(rect) {
            return Err(Error::RectOutsideBox {
                rect: rect.to_string(),
                domain: self.domain.to_string(),
            });
        }
        Ok(())
    }

    /// Bytes held by the dense bitset (the memory contract currency).
    pub fn bitset_bytes(&self) -> usize {
        self.words.len() * 8
    }
}

/// O(R): does the rectangle contain an infected site?
///
/// The negation implements the complementary event.
pub fn is_occupied(config: &Configuration, rect: &Rect) -> Result<bool> {
    config.check_rect(rect)?;
    Ok(occupied_unchecked(config, rect))
}

pub(crate) fn occupied_unchecked(config: &Configuration, rect: &Rect) -> bool {
    for y in rect.y1..=rect.y2 {
        for x in rect.x1..=rect.x2 {
            if config.contains(Site::new(x, y)) {
                return true;
            }
        }
    }
    false
}
