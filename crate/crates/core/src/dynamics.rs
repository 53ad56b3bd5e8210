//! The modified and classical two-neighbour update rules, closure, infection
//! times, internal filling and the deterministic growth-envelope deduction.
//!
//! Boundary convention everywhere: sites outside the box count as never
//! infected (free boundary).

use serde::Serialize;
use std::collections::BinaryHeap;
use std::cmp::Reverse;

use crate::error::Result;
use crate::lattice::{Configuration, Rect, Site};

/// Which two-neighbour rule drives the growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModelKind {
    /// Needs an infected horizontal neighbour AND an infected vertical one.
    Modified,
    /// Needs at least two infected neighbours among the four.
    Classical,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Modified => write!(f, "modified"),
            ModelKind::Classical => write!(f, "classical"),
        }
    }
}

#[inline]
fn rule_satisfied(cfg: &Configuration, s: Site, model: ModelKind) -> bool {
    match model {
        ModelKind::Modified => {
            let [l, r] = s.horizontal();
            let [d, u] = s.vertical();
            (cfg.contains(l) || cfg.contains(r)) && (cfg.contains(d) || cfg.contains(u))
        }
        ModelKind::Classical => {
            let mut n = 0;
            for nb in s.neighbours() {
                n += cfg.contains(nb) as u32;
            }
            n >= 2
        }
    }
}

/// One synchronous round of the dynamics.
pub fn step(config: &Configuration, model: ModelKind) -> Configuration {
    let mut next = config.clone();
    for s in config.domain().iter() {
        if !config.contains(s) && rule_satisfied(config, s, model) {
            next.insert(s);
        }
    }
    next
}

/// Size statistics of a closure run, used by the performance contract.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosureStats {
    /// Peak number of queued sites.
    pub peak_frontier: usize,
    /// Total sites that became infected (including the initial ones).
    pub infected: usize,
    /// Neighbour rule evaluations performed.
    pub rule_checks: usize,
}

/// Least fixed point of `step` containing the configuration.
///
/// Frontier algorithm: a site is examined only when a neighbour becomes
/// infected, so the work is proportional to the infected sites plus their
/// neighbour inspections, not rounds times box area. The rule is monotone,
/// hence infecting sites as soon as their condition holds reaches the same
/// fixed point as the synchronous iteration.
pub fn closure(config: &Configuration, model: ModelKind) -> Configuration {
    closure_with_stats(config, model).0
}

pub fn closure_with_stats(config: &Configuration, model: ModelKind) -> (Configuration, ClosureStats) {
    let mut out = config.clone();
    let mut stats = ClosureStats::default();
    let mut queue: Vec<u32> = Vec::new();
    for s in config.iter_infected() {
        queue.push(out.index_of(s) as u32);
    }
    stats.peak_frontier = queue.len();
    let domain = out.domain();
    while let Some(idx) = queue.pop() {
        let s = out.site_at(idx as usize);
        for nb in s.neighbours() {
            if !domain.contains(nb) || out.contains(nb) {
                continue;
            }
            stats.rule_checks += 1;
            if rule_satisfied(&out, nb, model) {
                out.insert(nb);
                queue.push(out.index_of(nb) as u32);
                stats.peak_frontier = stats.peak_frontier.max(queue.len());
            }
        }
    }
    stats.infected = out.infected_count();
    (out, stats)
}

const NEVER: u32 = u32::MAX;

/// Synchronous-round infection times; "never" is explicit.
#[derive(Clone, PartialEq, Eq)]
pub struct TimeMap {
    domain: Rect,
    rounds: Vec<u32>,
}

impl std::fmt::Debug for TimeMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeMap").field("domain", &self.domain).finish()
    }
}

impl TimeMap {
    fn never(domain: Rect) -> Self {
        TimeMap {
            domain,
            rounds: vec![NEVER; domain.cells() as usize],
        }
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    /// Round at which the site joined, or None if it never does.
    pub fn get(&self, s: Site) -> Option<u32> {
        if !self.domain.contains(s) {
            return None;
        }
        let w = self.domain.width() as usize;
        let idx = (s.y - self.domain.y1) as usize * w + (s.x - self.domain.x1) as usize;
        match self.rounds[idx] {
            NEVER => None,
            t => Some(t),
        }
    }

    /// Sites that are eventually infected.
    pub fn support(&self) -> impl Iterator<Item = (Site, u32)> + '_ {
        let w = self.domain.width() as usize;
        self.rounds
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t != NEVER)
            .map(move |(idx, &t)| {
                let s = Site::new(
                    self.domain.x1 + (idx % w) as i32,
                    self.domain.y1 + (idx / w) as i32,
                );
                (s, t)
            })
    }

    pub fn max_round(&self) -> Option<u32> {
        self.rounds.iter().copied().filter(|&t| t != NEVER).max()
    }
}

/// Exact infection times by level-by-level synchronous rounds.
pub fn infection_times(config: &Configuration, model: ModelKind) -> TimeMap {
    let domain = config.domain();
    let mut times = TimeMap::never(domain);
    let mut infected = config.clone();
    let mut frontier: Vec<u32> = Vec::new();
    for s in config.iter_infected() {
        let idx = infected.index_of(s);
        times.rounds[idx] = 0;
        frontier.push(idx as u32);
    }
    let mut t = 0u32;
    let mut wave: Vec<u32> = Vec::new();
    while !frontier.is_empty() {
        wave.clear();
        for &idx in &frontier {
            let s = infected.site_at(idx as usize);
            for nb in s.neighbours() {
                if !domain.contains(nb) || infected.contains(nb) {
                    continue;
                }
                let nidx = infected.index_of(nb);
                if times.rounds[nidx] != NEVER {
                    continue; // already queued this round
                }
                // Rule is evaluated against A_t: bits flip only on commit.
                if rule_satisfied(&infected, nb, model) {
                    times.rounds[nidx] = t + 1;
                    wave.push(nidx as u32);
                }
            }
        }
        for &idx in &wave {
            infected.insert_index(idx as usize);
        }
        t += 1;
        std::mem::swap(&mut frontier, &mut wave);
    }
    times
}

/// Infection times by priority-queue relaxation.
///
/// Modified: time(x) = 1 + max(min over horizontal, min over vertical).
/// Classical: time(x) = 1 + second-smallest neighbour time.
/// Both depend only on strictly smaller finalized times, so Dijkstra order
/// is exact and must agree with [`infection_times`].
pub fn infection_times_dijkstra(config: &Configuration, model: ModelKind) -> TimeMap {
    let domain = config.domain();
    let mut times = TimeMap::never(domain);
    let mut finalized = vec![false; domain.cells() as usize];
    let mut heap: BinaryHeap<(Reverse<u32>, u32)> = BinaryHeap::new();
    let probe = Configuration::empty(domain);

    for s in config.iter_infected() {
        let idx = probe.index_of(s);
        times.rounds[idx] = 0;
        heap.push((Reverse(0), idx as u32));
    }

    let candidate = |times: &TimeMap, finalized: &[bool], s: Site| -> u32 {
        let fin_time = |nb: Site| -> u32 {
            if !domain.contains(nb) {
                return NEVER;
            }
            let idx = probe.index_of(nb);
            if finalized[idx] { times.rounds[idx] } else { NEVER }
        };
        match model {
            ModelKind::Modified => {
                let [l, r] = s.horizontal();
                let [d, u] = s.vertical();
                let h = fin_time(l).min(fin_time(r));
                let v = fin_time(d).min(fin_time(u));
                let m = h.max(v);
                if m == NEVER { NEVER } else { m + 1 }
            }
            ModelKind::Classical => {
                let mut ts = [NEVER; 4];
                for (i, nb) in s.neighbours().into_iter().enumerate() {
                    ts[i] = fin_time(nb);
                }
                ts.sort_unstable();
                if ts[1] == NEVER { NEVER } else { ts[1] + 1 }
            }
        }
    };

    while let Some((Reverse(t), idx)) = heap.pop() {
        let idx = idx as usize;
        if finalized[idx] || times.rounds[idx] != t {
            continue;
        }
        finalized[idx] = true;
        let s = probe.site_at(idx);
        for nb in s.neighbours() {
            if !domain.contains(nb) {
                continue;
            }
            let nidx = probe.index_of(nb);
            if finalized[nidx] {
                continue;
            }
            let cand = candidate(&times, &finalized, nb);
            if cand < times.rounds[nidx] {
                times.rounds[nidx] = cand;
                heap.push((Reverse(cand), nidx as u32));
            }
        }
    }
    times
}

/// First round at which `site` is infected, or None.
///
/// Same semantics as `infection_times(config, model).get(site)` but runs the
/// synchronous waves with early exit, which matters on large tau boxes.
pub fn tau_site(config: &Configuration, site: Site, model: ModelKind) -> Option<u32> {
    assert!(
        config.domain().contains(site),
        "target site outside the configuration box"
    );
    if config.contains(site) {
        return Some(0);
    }
    let domain = config.domain();
    let target = config.index_of(site);
    let mut infected = config.clone();
    let mut queued = vec![false; domain.cells() as usize];
    let mut frontier: Vec<u32> = config
        .iter_infected()
        .map(|s| infected.index_of(s) as u32)
        .collect();
    let mut t = 0u32;
    let mut wave: Vec<u32> = Vec::new();
    while !frontier.is_empty() {
        wave.clear();
        for &idx in &frontier {
            let s = infected.site_at(idx as usize);
            for nb in s.neighbours() {
                if !domain.contains(nb) || infected.contains(nb) {
                    continue;
                }
                let nidx = infected.index_of(nb);
                if queued[nidx] {
                    continue;
                }
                if rule_satisfied(&infected, nb, model) {
                    queued[nidx] = true;
                    wave.push(nidx as u32);
                }
            }
        }
        t += 1;
        for &idx in &wave {
            infected.insert_index(idx as usize);
        }
        if queued[target] {
            return Some(t);
        }
        std::mem::swap(&mut frontier, &mut wave);
    }
    None
}

/// Infection time of the origin (0,0), which must lie in the box.
pub fn tau_origin(config: &Configuration, model: ModelKind) -> Option<u32> {
    tau_site(config, Site::ORIGIN, model)
}

/// I-event: is `rect` internally filled, i.e. does the closure of the
/// infected sites inside `rect`, run inside `rect` only, cover all of it?
pub fn internally_filled(config: &Configuration, rect: &Rect, model: ModelKind) -> Result<bool> {
    config.check_rect(rect)?;
    let mut inner = Configuration::empty(*rect);
    for s in rect.iter() {
        if config.contains(s) {
            inner.insert(s);
        }
    }
    Ok(closure(&inner, model).infected_count() as u64 == rect.cells())
}

/// Deterministic deduction scenario: a (B+1)-sided square of diagonal seeds
/// with its lower-left corner at (d,d), plus one seed per length-(B+1)
/// row/column segment flanking the path to the origin, each seed placed at
/// the far end of its segment. Returns whether the origin is infected within
/// (B+1)^2 + B*d rounds.
pub fn growth_envelope_check(b: u32, d: u32, model: ModelKind) -> bool {
    assert!(b >= 1, "square side parameter must be at least 1");
    let b_i = b as i32;
    let d_i = d as i32;
    let domain = Rect::new(0, 0, d_i + b_i, d_i + b_i).expect("valid box");
    let mut sites: Vec<Site> = Vec::new();
    // Diagonal seeds internally fill the square R(d,d; d+B,d+B).
    for k in 0..=b_i {
        sites.push(Site::new(d_i + k, d_i + k));
    }
    // For each row below the square's sliding corner, one seed at the far end
    // of the length-(B+1) segment adjacent to the current square, and the
    // symmetric column seed.
    for j in (0..d_i).rev() {
        sites.push(Site::new(j + 1 + b_i, j));
        sites.push(Site::new(j, j + 1 + b_i));
    }
    let config = Configuration::from_sites(domain, sites).expect("seeds in box");
    let budget = (b as u64 + 1) * (b as u64 + 1) + b as u64 * d as u64;
    match tau_origin(&config, model) {
        Some(t) => t as u64 <= budget,
        None => false,
    }
}
