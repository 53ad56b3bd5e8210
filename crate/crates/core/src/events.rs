//! Growth-event calculus: diagonal, sideways and alternating growth events,
//! canonical witnesses, schedule reconstruction and enumeration of good
//! multi-scale schedules.
//!
//! All event geometry lives in the 1-indexed corner R(1,1;...) convention.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{occupied_unchecked, Configuration, Rect, Site};
use crate::rng;

/// Interleaved growth schedule a_1 < b_1 <= a_2 < b_2 <= ... < b_m <= a_{m+1}.
///
/// `pairs[i] = (a_i, b_i)` are the sideways spans; between b_i and the next
/// a the growth is diagonal. A schedule with no pairs denotes the pure
/// diagonal span from `start` to `end` (the degenerate m = 0 case).
///
/// Schedules compare equal by their interleaved point sequence; the optional
/// per-pair scale tags are metadata for goodness checks and do not take part
/// in equality.
#[derive(Debug, Clone, Eq, Serialize)]
pub struct GrowthSchedule {
    start: u32,
    end: u32,
    pairs: Vec<(u32, u32)>,
    scales: Option<Vec<u32>>,
}

impl PartialEq for GrowthSchedule {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start && self.end == other.end && self.pairs == other.pairs
    }
}

impl std::fmt::Display for GrowthSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pts: Vec<String> = self.points().iter().map(u32::to_string).collect();
        write!(f, "({})", pts.join(","))
    }
}

impl GrowthSchedule {
    pub fn new(start: u32, end: u32, pairs: Vec<(u32, u32)>) -> Result<Self> {
        if start < 1 {
            return Err(Error::InvalidSchedule("indices are 1-based".into()));
        }
        if end < start {
            return Err(Error::InvalidSchedule(format!(
                "end {end} precedes start {start}"
            )));
        }
        if let Some(&(a1, _)) = pairs.first() {
            if a1 != start {
                return Err(Error::InvalidSchedule(format!(
                    "first sideways span starts at {a1}, expected a_1 = {start}"
                )));
            }
        }
        let mut prev_b = start;
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if a < prev_b {
                return Err(Error::InvalidSchedule(format!(
                    "a_{} = {a} precedes b_{} = {prev_b}",
                    i + 1,
                    i
                )));
            }
            if b <= a {
                return Err(Error::InvalidSchedule(format!(
                    "require a_{0} < b_{0}, got ({a},{b})",
                    i + 1
                )));
            }
            prev_b = b;
        }
        if prev_b > end {
            return Err(Error::InvalidSchedule(format!(
                "last b = {prev_b} exceeds end {end}"
            )));
        }
        Ok(GrowthSchedule {
            start,
            end,
            pairs,
            scales: None,
        })
    }

    /// Degenerate schedule: the pure diagonal span from `start` to `end`.
    pub fn pure_diagonal(start: u32, end: u32) -> Result<Self> {
        GrowthSchedule::new(start, end, Vec::new())
    }

    /// Builds from the flat interleaved point list (odd length 2m+1).
    pub fn from_points(points: &[u32]) -> Result<Self> {
        if points.is_empty() || points.len().is_multiple_of(2) {
            return Err(Error::InvalidSchedule(format!(
                "interleaved sequence needs odd length, got {}",
                points.len()
            )));
        }
        let start = points[0];
        let end = *points.last().expect("nonempty");
        let pairs = points[..points.len() - 1]
            .chunks(2)
            .map(|c| (c[0], c[1]))
            .collect();
        GrowthSchedule::new(start, end, pairs)
    }

    /// Attaches per-pair scale tags (must be non-decreasing).
    pub fn with_scales(mut self, scales: Vec<u32>) -> Result<Self> {
        if scales.len() != self.pairs.len() {
            return Err(Error::InvalidSchedule(
                "one scale tag per sideways pair required".into(),
            ));
        }
        if scales.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidSchedule("scale tags must be sorted".into()));
        }
        self.scales = Some(scales);
        Ok(self)
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn end(&self) -> u32 {
        self.end
    }

    /// Number of sideways pairs m.
    pub fn len_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn scales(&self) -> Option<&[u32]> {
        self.scales.as_deref()
    }

    /// Flat interleaved view a_1, b_1, a_2, ..., b_m, a_{m+1}.
    pub fn points(&self) -> Vec<u32> {
        let mut pts = Vec::with_capacity(2 * self.pairs.len() + 1);
        for &(a, b) in &self.pairs {
            pts.push(a);
            pts.push(b);
        }
        pts.push(self.end);
        if self.pairs.is_empty() && self.end != self.start {
            // Pure diagonal span keeps both endpoints visible.
            pts.insert(0, self.start);
        }
        pts
    }

    /// Segments of the alternating chain, in growth order.
    pub(crate) fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        if self.pairs.is_empty() {
            if self.end > self.start {
                out.push(Segment::Diagonal(self.start, self.end));
            }
            return out;
        }
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            out.push(Segment::Sideways(a, b));
            let next_a = self
                .pairs
                .get(i + 1)
                .map(|&(a2, _)| a2)
                .unwrap_or(self.end);
            if next_a > b {
                out.push(Segment::Diagonal(b, next_a));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Segment {
    Diagonal(u32, u32),
    Sideways(u32, u32),
}

/// A growth event: the indicator of an intersection of occupancy constraints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EventSpec {
    /// D_a^b, 1 <= a <= b.
    Diagonal { a: u32, b: u32 },
    /// J_a^b, 1 <= a < b.
    Sideways { a: u32, b: u32 },
    /// E(a_1, b_1, ..., b_m, a_{m+1}).
    Alternating(GrowthSchedule),
}

impl EventSpec {
    pub fn diagonal(a: u32, b: u32) -> Result<Self> {
        if a < 1 || a > b {
            return Err(Error::InvalidRange {
                a,
                b,
                requirement: "1 <= a <= b",
            });
        }
        Ok(EventSpec::Diagonal { a, b })
    }

    pub fn sideways(a: u32, b: u32) -> Result<Self> {
        if a < 1 || a >= b {
            return Err(Error::InvalidRange {
                a,
                b,
                requirement: "1 <= a < b",
            });
        }
        Ok(EventSpec::Sideways { a, b })
    }

    /// Largest coordinate the event constrains; the box must cover
    /// R(1,1;m,m) for this m.
    pub fn max_index(&self) -> u32 {
        match self {
            EventSpec::Diagonal { b, .. } => *b,
            EventSpec::Sideways { b, .. } => *b,
            EventSpec::Alternating(s) => s.end(),
        }
    }
}

/// Rectangles required occupied by D_a^b, in index order.
pub(crate) fn diagonal_rects(a: u32, b: u32) -> Vec<Rect> {
    let mut out = Vec::with_capacity(2 * (b - a) as usize);
    for i in (a + 1)..=b {
        let i = i as i32;
        out.push(Rect::new(1, i, i - 1, i).expect("row rect"));
        out.push(Rect::new(i, 1, i, i - 1).expect("column rect"));
    }
    out
}

pub(crate) struct SidewaysParts {
    pub occupied: Vec<Rect>,
    pub empty_row: Rect,
    pub corner: Site,
}

/// The constraint set of J_a^b.
pub(crate) fn sideways_parts(a: u32, b: u32) -> SidewaysParts {
    let (ai, bi) = (a as i32, b as i32);
    let mut occupied = Vec::with_capacity(2 * (b - a - 1) as usize);
    for i in (ai + 1)..=(bi - 1) {
        occupied.push(Rect::new(i, 1, i, ai).expect("column segment"));
        occupied.push(Rect::new(1, i + 1, bi, i + 1).expect("full row"));
    }
    SidewaysParts {
        occupied,
        empty_row: Rect::new(1, ai + 1, bi - 1, ai + 1).expect("empty row"),
        corner: Site::new(bi, ai + 1),
    }
}

fn check_box(config: &Configuration, max_index: u32) -> Result<()> {
    let needed = Rect::unit_square(max_index.max(1));
    if !config.domain().contains_rect(&needed) {
        return Err(Error::BoxTooSmall {
            needed: needed.to_string(),
            domain: config.domain().to_string(),
        });
    }
    Ok(())
}

fn diagonal_holds(config: &Configuration, a: u32, b: u32) -> bool {
    diagonal_rects(a, b)
        .iter()
        .all(|r| occupied_unchecked(config, r))
}

fn sideways_holds(config: &Configuration, a: u32, b: u32) -> bool {
    let parts = sideways_parts(a, b);
    parts.occupied.iter().all(|r| occupied_unchecked(config, r))
        && !occupied_unchecked(config, &parts.empty_row)
        && config.contains(parts.corner)
}

/// Exact indicator of the event on the configuration.
pub fn event_holds(config: &Configuration, spec: &EventSpec) -> Result<bool> {
    check_box(config, spec.max_index())?;
    Ok(match spec {
        EventSpec::Diagonal { a, b } => diagonal_holds(config, *a, *b),
        EventSpec::Sideways { a, b } => sideways_holds(config, *a, *b),
        EventSpec::Alternating(s) => s.segments().iter().all(|seg| match *seg {
            Segment::Diagonal(a, b) => diagonal_holds(config, a, b),
            Segment::Sideways(a, b) => sideways_holds(config, a, b),
        }),
    })
}

/// Where witness seeds land inside each required-occupied rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Bottom-left cell of every rectangle: deterministic fixtures.
    Canonical,
    /// Uniform cell per rectangle, keyed by (seed, rectangle ordinal).
    Seeded(u64),
}

/// Every rectangle the full chain I(1) . D_1^{a_1} . E(schedule) requires
/// occupied, in growth order.
pub(crate) fn required_rects(schedule: &GrowthSchedule) -> Vec<Rect> {
    let mut rects = diagonal_rects(1, schedule.start());
    for seg in schedule.segments() {
        match seg {
            Segment::Diagonal(a, b) => rects.extend(diagonal_rects(a, b)),
            Segment::Sideways(a, b) => rects.extend(sideways_parts(a, b).occupied),
        }
    }
    rects
}

/// Minimal configuration realising I(1), D_1^{a_1} and E(schedule): the site
/// (1,1), one site per required-occupied rectangle, the corner site of each
/// sideways span, and nothing in any required-empty row.
pub fn witness_configuration(schedule: &GrowthSchedule, placement: Placement) -> Configuration {
    let side = schedule.end().max(1);
    let mut cfg = Configuration::empty(Rect::unit_square(side));
    cfg.insert(Site::new(1, 1));
    for (ordinal, rect) in required_rects(schedule).iter().enumerate() {
        let site = match placement {
            Placement::Canonical => Site::new(rect.x1, rect.y1),
            Placement::Seeded(seed) => {
                let pick = rng::pick_index(seed, ordinal as u64, rect.cells());
                let w = rect.width() as u64;
                Site::new(
                    rect.x1 + (pick % w) as i32,
                    rect.y1 + (pick / w) as i32,
                )
            }
        };
        cfg.insert(site);
    }
    for seg in schedule.segments() {
        if let Segment::Sideways(a, b) = seg {
            let parts = sideways_parts(a, b);
            cfg.insert(parts.corner);
            debug_assert!(
                !occupied_unchecked(&cfg, &parts.empty_row),
                "witness site leaked into a required-empty row"
            );
        }
    }
    cfg
}

/// Applies the reconstruction formulas from the uniqueness argument:
/// b_i is the least b' > a_i with (b', a_i + 1) infected, and a_{i+1} is the
/// least a' >= b_i whose row R(1,a'+1;a',a'+1) is free of infections, with
/// the empty minimum defaulting to `b_end`. Returns the unique candidate
/// schedule, or None when the b-formula has no candidate.
pub fn reconstruct_schedule(
    config: &Configuration,
    a_start: u32,
    b_end: u32,
) -> Option<GrowthSchedule> {
    assert!(a_start >= 1 && a_start <= b_end, "need 1 <= a_start <= b_end");
    check_box(config, b_end).expect("box must cover R(1,1;b_end,b_end)");

    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut a = a_start;
    while a < b_end {
        let b = ((a + 1)..=b_end)
            .find(|&b| config.contains(Site::new(b as i32, a as i32 + 1)))?;
        let a_next = (b..b_end)
            .find(|&a2| {
                let row = Rect::new(1, a2 as i32 + 1, a2 as i32, a2 as i32 + 1).expect("row");
                !occupied_unchecked(config, &row)
            })
            .unwrap_or(b_end);
        pairs.push((a, b));
        a = a_next;
    }
    Some(GrowthSchedule::new(a_start, b_end, pairs).expect("formulas preserve ordering"))
}

/// Parameters describing a family of good multi-scale schedules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    /// Scale boundaries l^(0) < l^(1) < ... < l^(N).
    pub levels: Vec<u32>,
    /// Sideways pairs per scale (m). Zero selects the single pure-diagonal
    /// schedule spanning the levels.
    pub pairs_per_scale: u32,
    /// Per-scale width caps; pair widths lie in [1, cap]. Default 2^n.
    pub width_caps: Vec<u32>,
    /// Refuse enumeration when the candidate-count estimate exceeds this.
    pub cap: u64,
}

pub const DEFAULT_ENUMERATION_CAP: u64 = 2_000_000;

impl FamilySpec {
    pub fn new(
        levels: Vec<u32>,
        pairs_per_scale: u32,
        width_caps: Option<Vec<u32>>,
        cap: u64,
    ) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidParameter(
                "need at least two levels".into(),
            ));
        }
        if levels[0] < 1 || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NonIncreasingLevels(levels));
        }
        let n_scales = levels.len() - 1;
        let width_caps = match width_caps {
            Some(c) => {
                if c.len() != n_scales || c.contains(&0) {
                    return Err(Error::InvalidParameter(format!(
                        "need {n_scales} positive width caps"
                    )));
                }
                c
            }
            None => (0..n_scales as u32).map(|n| 1u32 << n.min(31)).collect(),
        };
        Ok(FamilySpec {
            levels,
            pairs_per_scale,
            width_caps,
            cap,
        })
    }

    pub fn n_scales(&self) -> usize {
        self.levels.len() - 1
    }

    /// Upper bound on the schedule count, in log space. Per scale, a
    /// sequence is fixed by its m-1 interior starts (nondecreasing in the
    /// gap, at most C(gap+m-1, m-1) choices) and its m widths (at most
    /// min(cap, gap) each).
    fn log_count_estimate(&self) -> f64 {
        let m = self.pairs_per_scale;
        if m == 0 {
            return 0.0;
        }
        (0..self.n_scales())
            .map(|n| {
                let gap = (self.levels[n + 1] - self.levels[n]) as f64;
                let log_binom: f64 = (0..m - 1)
                    .map(|j| ((gap + (m - 1 - j) as f64) / (j + 1) as f64).ln())
                    .sum();
                let width = (self.width_caps[n] as f64).min(gap).max(1.0);
                log_binom + m as f64 * width.ln()
            })
            .sum()
    }
}

/// Enumerated family: per-scale sequences plus the exact combined count.
#[derive(Debug, Clone)]
pub struct ScheduleFamily {
    spec: FamilySpec,
    per_scale: Vec<Vec<Vec<(u32, u32)>>>,
    count: u128,
}

impl ScheduleFamily {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    /// Exact number of good schedules in the family.
    pub fn count(&self) -> u128 {
        self.count
    }

    /// Sequences of one scale, each a list of (a_i, b_i) pairs.
    pub fn scale_sequences(&self, n: usize) -> &[Vec<(u32, u32)>] {
        &self.per_scale[n]
    }

    /// Number of good per-scale sequences at scale n.
    pub fn scale_count(&self, n: usize) -> u128 {
        self.per_scale[n].len() as u128
    }

    /// The i-th schedule in mixed-radix order (scale 0 most significant).
    pub fn schedule_at(&self, index: u128) -> GrowthSchedule {
        assert!(index < self.count, "schedule index out of range");
        let n_scales = self.per_scale.len();
        let mut digits = vec![0usize; n_scales];
        let mut rem = index;
        for n in (0..n_scales).rev() {
            let radix = self.per_scale[n].len() as u128;
            digits[n] = (rem % radix) as usize;
            rem /= radix;
        }
        let mut pairs = Vec::new();
        let mut scales = Vec::new();
        for (n, &digit) in digits.iter().enumerate() {
            for &pair in &self.per_scale[n][digit] {
                pairs.push(pair);
                scales.push(n as u32);
            }
        }
        let start = self.spec.levels[0];
        let end = *self.spec.levels.last().expect("levels nonempty");
        GrowthSchedule::new(start, end, pairs)
            .expect("per-scale sequences compose into a valid schedule")
            .with_scales(scales)
            .expect("tags aligned")
    }

    /// Lazily yields every schedule in a fixed deterministic order.
    pub fn iter(&self) -> impl Iterator<Item = GrowthSchedule> + '_ {
        (0..self.count).map(move |i| self.schedule_at(i))
    }
}

fn enumerate_scale(lo: u32, hi: u32, m: u32, width_cap: u32) -> Vec<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(m as usize);
    // Pair i (1-based) starting at `a` must leave room for m - i more pairs.
    fn place(
        out: &mut Vec<Vec<(u32, u32)>>,
        pairs: &mut Vec<(u32, u32)>,
        a: u32,
        i: u32,
        m: u32,
        hi: u32,
        width_cap: u32,
    ) {
        let remaining = m - i;
        let b_max = (a + width_cap).min(hi - remaining);
        let mut b = a + 1;
        while b <= b_max {
            pairs.push((a, b));
            if i == m {
                out.push(pairs.clone());
            } else {
                let a_next_max = hi - remaining;
                let mut a_next = b;
                while a_next <= a_next_max {
                    place(out, pairs, a_next, i + 1, m, hi, width_cap);
                    a_next += 1;
                }
            }
            pairs.pop();
            b += 1;
        }
    }
    // The tightest packing a_1=lo, b_i = a_i + 1, a_{i+1} = b_i needs
    // b_m = lo + m <= hi; smaller gaps admit no sequence at all.
    if m >= 1 && hi >= lo + m {
        place(&mut out, &mut pairs, lo, 1, m, hi, width_cap);
    }
    out
}

/// Enumerates exactly the good schedules of the family, or refuses when the
/// cheap count estimate exceeds the configured cap.
pub fn enumerate_good_schedules(spec: &FamilySpec) -> Result<ScheduleFamily> {
    let estimate = spec.log_count_estimate();
    if estimate > (spec.cap as f64).ln() {
        return Err(Error::CapExceeded {
            estimate: estimate.exp(),
            cap: spec.cap,
        });
    }
    if spec.pairs_per_scale == 0 {
        // The family degenerates to the single pure-diagonal schedule.
        return Ok(ScheduleFamily {
            spec: spec.clone(),
            per_scale: vec![vec![Vec::new()]; spec.n_scales()],
            count: 1,
        });
    }
    let mut per_scale = Vec::with_capacity(spec.n_scales());
    let mut count: u128 = 1;
    for n in 0..spec.n_scales() {
        let seqs = enumerate_scale(
            spec.levels[n],
            spec.levels[n + 1],
            spec.pairs_per_scale,
            spec.width_caps[n],
        );
        count = count.saturating_mul(seqs.len() as u128);
        per_scale.push(seqs);
    }
    if count > spec.cap as u128 {
        return Err(Error::CapExceeded {
            estimate: count as f64,
            cap: spec.cap,
        });
    }
    Ok(ScheduleFamily {
        spec: spec.clone(),
        per_scale,
        count,
    })
}
