//! Brute-force exact computations on tiny instances: ground truth for the
//! Monte Carlo and analytic paths.

use std::collections::BTreeSet;

use crate::dynamics::closure;
use crate::error::{Error, Result};
use crate::events::{EventSpec, FamilySpec};
use crate::exec;
use crate::lattice::{Configuration, Rect, Site};
use crate::montecarlo::Predicate;

/// Default ceiling on enumerated support cells (2^28 configurations).
pub const DEFAULT_SUPPORT_CAP: u32 = 28;

/// An exactly enumerated probability.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExactProbability {
    pub value: f64,
    /// Number of support cells; exactly 2^cell_count subsets were summed.
    pub cell_count: u32,
}

/// The cells a predicate can read, in a fixed deterministic order.
fn support_cells(predicate: &Predicate) -> Vec<Site> {
    let mut set: BTreeSet<Site> = BTreeSet::new();
    match predicate {
        Predicate::InternallyFilled { side, .. } => {
            set.extend(Rect::unit_square(*side).iter());
        }
        Predicate::Event(spec) => collect_event_cells(spec, &mut set),
    }
    set.into_iter().collect()
}

fn collect_event_cells(spec: &EventSpec, set: &mut BTreeSet<Site>) {
    use crate::events::{diagonal_rects, sideways_parts};
    match spec {
        EventSpec::Diagonal { a, b } => {
            for r in diagonal_rects(*a, *b) {
                set.extend(r.iter());
            }
        }
        EventSpec::Sideways { a, b } => {
            let parts = sideways_parts(*a, *b);
            for r in &parts.occupied {
                set.extend(r.iter());
            }
            set.extend(parts.empty_row.iter());
            set.insert(parts.corner);
        }
        EventSpec::Alternating(schedule) => {
            for seg in schedule.segments() {
                let sub = match seg {
                    crate::events::Segment::Diagonal(a, b) => EventSpec::Diagonal { a, b },
                    crate::events::Segment::Sideways(a, b) => EventSpec::Sideways { a, b },
                };
                collect_event_cells(&sub, set);
            }
        }
    }
}

/// Occupancy constraints translated to bitmasks over the support cells.
struct MaskedEvent {
    /// Each mask must intersect the subset.
    occupied: Vec<u64>,
    /// Each mask must miss the subset.
    empty: Vec<u64>,
    /// Bits that must all be present (corner sites).
    required: u64,
}

impl MaskedEvent {
    fn build(spec: &EventSpec, cells: &[Site]) -> MaskedEvent {
        use crate::events::{diagonal_rects, sideways_parts, Segment};
        let bit_of = |s: Site| -> u64 {
            let i = cells.binary_search(&s).expect("support covers the event");
            1u64 << i
        };
        let mask_of = |r: &Rect| -> u64 { r.iter().map(bit_of).fold(0, |m, b| m | b) };
        let mut out = MaskedEvent {
            occupied: Vec::new(),
            empty: Vec::new(),
            required: 0,
        };
        let mut add_segment = |seg: Segment| match seg {
            Segment::Diagonal(a, b) => {
                out.occupied.extend(diagonal_rects(a, b).iter().map(&mask_of));
            }
            Segment::Sideways(a, b) => {
                let parts = sideways_parts(a, b);
                out.occupied.extend(parts.occupied.iter().map(&mask_of));
                out.empty.push(mask_of(&parts.empty_row));
                out.required |= bit_of(parts.corner);
            }
        };
        match spec {
            EventSpec::Diagonal { a, b } => add_segment(Segment::Diagonal(*a, *b)),
            EventSpec::Sideways { a, b } => add_segment(Segment::Sideways(*a, *b)),
            EventSpec::Alternating(s) => {
                for seg in s.segments() {
                    add_segment(seg);
                }
            }
        }
        out
    }

    #[inline]
    fn holds(&self, subset: u64) -> bool {
        subset & self.required == self.required
            && self.empty.iter().all(|&m| subset & m == 0)
            && self.occupied.iter().all(|&m| subset & m != 0)
    }
}

fn weight_tables(p: f64, n: u32) -> (Vec<f64>, Vec<f64>) {
    let mut pw = vec![1.0; n as usize + 1];
    let mut qw = vec![1.0; n as usize + 1];
    for k in 1..=n as usize {
        pw[k] = pw[k - 1] * p;
        qw[k] = qw[k - 1] * (1.0 - p);
    }
    (pw, qw)
}

/// Exact P(predicate) by summing p^|S| (1-p)^{n-|S|} over all 2^n subsets S
/// of the predicate's support cells.
///
/// Event predicates evaluate through bitmask occupancy tests; filling
/// predicates run the production closure on each subset, so the oracle and
/// the dynamics share a single implementation of the rule. Subset ranges are
/// partitioned into fixed chunks summed in index order, keeping the float
/// total identical across worker counts.
pub fn exact_probability(p: f64, predicate: &Predicate, cap: u32) -> Result<ExactProbability> {
    exact_probability_impl(p, predicate, cap, false)
}

/// Sequential twin of [`exact_probability`]; same output, for benchmarks.
pub fn exact_probability_seq(
    p: f64,
    predicate: &Predicate,
    cap: u32,
) -> Result<ExactProbability> {
    exact_probability_impl(p, predicate, cap, true)
}

fn exact_probability_impl(
    p: f64,
    predicate: &Predicate,
    cap: u32,
    sequential: bool,
) -> Result<ExactProbability> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability { p, range: "[0,1]" });
    }
    let cells = support_cells(predicate);
    let n = cells.len() as u32;
    if n > cap.min(63) {
        return Err(Error::SupportTooLarge { cells: n, cap });
    }
    let (pw, qw) = weight_tables(p, n);
    let subsets = 1u64 << n;

    let value = match predicate {
        Predicate::Event(spec) => {
            let masks = MaskedEvent::build(spec, &cells);
            let term = |subset: u64| -> f64 {
                if masks.holds(subset) {
                    let k = subset.count_ones() as usize;
                    pw[k] * qw[n as usize - k]
                } else {
                    0.0
                }
            };
            if sequential {
                exec::sum_ordered_seq(subsets, term)
            } else {
                exec::sum_ordered(subsets, term)
            }
        }
        Predicate::InternallyFilled { side, model } => {
            let square = Rect::unit_square(*side);
            let term = |subset: u64| -> f64 {
                let mut cfg = Configuration::empty(square);
                for (i, &cell) in cells.iter().enumerate() {
                    if subset >> i & 1 == 1 {
                        cfg.insert(cell);
                    }
                }
                if closure(&cfg, *model).infected_count() as u64 == square.cells() {
                    let k = subset.count_ones() as usize;
                    pw[k] * qw[n as usize - k]
                } else {
                    0.0
                }
            };
            if sequential {
                exec::sum_ordered_seq(subsets, term)
            } else {
                exec::sum_ordered(subsets, term)
            }
        }
    };
    Ok(ExactProbability {
        value,
        cell_count: n,
    })
}

/// Exact number of good schedules by direct backtracking over the flattened
/// multi-scale sequence. Written independently of the family enumerator and
/// required to agree with it.
pub fn count_schedules_exhaustive(spec: &FamilySpec) -> Result<u128> {
    if spec.pairs_per_scale == 0 {
        return Ok(1);
    }
    let mut nodes: u64 = 0;
    let n_scales = spec.n_scales();
    // Pair index i within scale s, a fixed to `a` (first pair pins a = level).
    fn place_pair(
        spec: &FamilySpec,
        s: usize,
        i: u32,
        a: u32,
        nodes: &mut u64,
    ) -> Result<u128> {
        *nodes += 1;
        if *nodes > spec.cap {
            return Err(Error::CapExceeded {
                estimate: *nodes as f64,
                cap: spec.cap,
            });
        }
        let hi = spec.levels[s + 1];
        let mut total: u128 = 0;
        let b_top = (a.saturating_add(spec.width_caps[s])).min(hi);
        for b in (a + 1)..=b_top {
            total += after_pair(spec, s, i, b, nodes)?;
        }
        Ok(total)
    }
    fn after_pair(
        spec: &FamilySpec,
        s: usize,
        i: u32,
        b: u32,
        nodes: &mut u64,
    ) -> Result<u128> {
        let hi = spec.levels[s + 1];
        if i + 1 == spec.pairs_per_scale {
            // Scale finished; the next point is pinned at the level boundary.
            if s + 1 == spec.n_scales() {
                return Ok(1);
            }
            return place_pair(spec, s + 1, 0, hi, nodes);
        }
        let mut total: u128 = 0;
        for a_next in b..=hi {
            total += place_pair(spec, s, i + 1, a_next, nodes)?;
        }
        Ok(total)
    }
    let _ = n_scales;
    place_pair(spec, 0, 0, spec.levels[0], &mut nodes)
}

/// The per-scale binomial product bound on the number of good schedules:
/// prod_n C(gap_n - m w_n, m-1) * w_n^m for width caps w_n (2^n in the
/// default ladder), with infeasible scales collapsing the factor to zero.
pub fn schedule_count_product_bound(levels: &[u32], m: u32, width_caps: &[u32]) -> u128 {
    assert!(levels.len() >= 2 && m >= 1);
    assert_eq!(width_caps.len(), levels.len() - 1);
    let mut bound: u128 = 1;
    for n in 0..levels.len() - 1 {
        let gap = (levels[n + 1] - levels[n]) as u128;
        let step = width_caps[n] as u128;
        if gap < m as u128 * step {
            // Binomial with a negative upper argument: the scheme is empty.
            return 0;
        }
        bound = bound.saturating_mul(binomial(gap - m as u128 * step, (m - 1) as u128));
        bound = bound.saturating_mul(step.pow(m));
    }
    bound
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for j in 0..k {
        out = out.saturating_mul(n - j) / (j + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ModelKind;
    use crate::events::enumerate_good_schedules;

    #[test]
    fn filling_one_cell_is_p() {
        for &p in &[0.1, 0.5, 0.9] {
            let pred = Predicate::InternallyFilled {
                side: 1,
                model: ModelKind::Modified,
            };
            let e = exact_probability(p, &pred, 28).unwrap();
            assert_eq!(e.cell_count, 1);
            assert!((e.value - p).abs() < 1e-15);
        }
    }

    #[test]
    fn filling_two_square_at_half_is_seven_sixteenths() {
        let pred = Predicate::InternallyFilled {
            side: 2,
            model: ModelKind::Modified,
        };
        let e = exact_probability(0.5, &pred, 28).unwrap();
        assert_eq!(e.cell_count, 4);
        // Dyadic weights are exact in f64: the 7 filling subsets (both
        // diagonal pairs, all 4 triples, the full square) each carry 1/16.
        assert_eq!(e.value, 7.0 / 16.0);
    }

    #[test]
    fn diagonal_1_2_is_p_squared() {
        for &p in &[0.2, 0.5, 0.8] {
            let pred = Predicate::Event(EventSpec::diagonal(1, 2).unwrap());
            let e = exact_probability(p, &pred, 28).unwrap();
            assert_eq!(e.cell_count, 2);
            assert!((e.value - p * p).abs() < 1e-15);
        }
    }

    #[test]
    fn sequential_and_parallel_paths_are_bit_identical() {
        let pred = Predicate::Event(EventSpec::sideways(2, 5).unwrap());
        let a = exact_probability(0.3, &pred, 28).unwrap();
        let b = exact_probability_seq(0.3, &pred, 28).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn support_cap_is_enforced() {
        let pred = Predicate::InternallyFilled {
            side: 6,
            model: ModelKind::Modified,
        };
        assert!(matches!(
            exact_probability(0.5, &pred, 28),
            Err(Error::SupportTooLarge { cells: 36, cap: 28 })
        ));
    }

    #[test]
    fn exhaustive_count_matches_enumerator() {
        let cases = [
            (vec![2u32, 4], 1u32),
            (vec![2, 4], 2),
            (vec![2, 8], 2),
            (vec![3, 9, 17], 1),
            (vec![3, 9, 17], 2),
            (vec![2, 6, 14, 26], 1),
        ];
        for (levels, m) in cases {
            let spec = FamilySpec::new(levels.clone(), m, None, 5_000_000).unwrap();
            let fast = enumerate_good_schedules(&spec).unwrap().count();
            let slow = count_schedules_exhaustive(&spec).unwrap();
            assert_eq!(fast, slow, "levels {levels:?} m {m}");
        }
    }

    #[test]
    fn exhaustive_count_single_scale_example() {
        let spec = FamilySpec::new(vec![2, 4], 1, Some(vec![1]), 1000).unwrap();
        assert_eq!(count_schedules_exhaustive(&spec).unwrap(), 1);
    }

    #[test]
    fn infeasible_constraints_count_zero() {
        let spec = FamilySpec::new(vec![3, 4], 2, None, 1000).unwrap();
        assert_eq!(count_schedules_exhaustive(&spec).unwrap(), 0);
    }

    #[test]
    fn counts_dominate_the_binomial_product_bound() {
        for gap in 2u32..=20 {
            for m in 1u32..=2 {
                let levels = vec![5, 5 + gap];
                let spec = FamilySpec::new(levels.clone(), m, None, 5_000_000).unwrap();
                let count = count_schedules_exhaustive(&spec).unwrap();
                let bound = schedule_count_product_bound(&levels, m, &[1]);
                assert!(
                    count >= bound,
                    "gap {gap} m {m}: count {count} < bound {bound}"
                );
            }
        }
    }

    #[test]
    fn node_cap_is_enforced() {
        let spec = FamilySpec::new(vec![2, 600], 3, Some(vec![64]), 10_000).unwrap();
        assert!(matches!(
            count_schedules_exhaustive(&spec),
            Err(Error::CapExceeded { .. })
        ));
    }
}
