//! Near-linear solver: a single left-to-right sweep over sources that
//! maintains the current solution as a positional encoding and an ordered
//! map of positions where the marginal cost of shifting the solution left
//! changes.
//!
//! # How the sweep works
//!
//! Source `i` occupies the half-open demand interval
//! `[p + S[i], p + S[i+1])`, where `p` is its position and `S` the supply
//! prefix sums. Shrinking `p` slides the occupied interval left; mass
//! crossing a sink boundary moves between sinks. Processing a source means
//! choosing, unit by unit, between sliding the tail of the solution left
//! (marginal cost: the queue value at the current position plus the cost
//! of entering the cursor sink) and opening the next sink to the right
//! (marginal cost: the cost of entering it). Runs of units whose marginal
//! does not change are handled in one step.
//!
//! # Event bookkeeping
//!
//! The queue stores, keyed by position, the accumulated difference between
//! the true slide marginal and the cost of entering the cursor sink:
//!
//! * entering event: when the sweep is at `D[l+1] - S[i]` the left end of
//!   source `i` is about to cross into sink `l`; value
//!   `cost(i, l) - cost(i, l+1)`.
//! * pair event: when the boundary between sources `i-1` and `i` crosses
//!   into sink `l`, the internal displacement marginal changes by
//!   `delta(i-1, l)`. These are inserted only at positions strictly below
//!   the previous source's final position (crossings still ahead of the
//!   sweep); positions already passed are baked into the values carried by
//!   the queue.
//! * leaving adjustment: advancing the cursor from sink `j` to `j+1`
//!   rebases the stored marginal by `cost(i, j) - cost(i, j+1)`,
//!   accumulated at the current sweep position.
//!
//! Consuming an event folds its value into the next event position below,
//! so the value found at the sweep position is always the whole marginal
//! difference. Zero values are never stored. Exact agreement with the
//! reference solvers over large randomized suites is enforced by the
//! acceptance tests.

use crate::encoding::{decode, Flow, PositionalEncoding};
use crate::instance::{Cost, CostModel, Instance};
use std::collections::BTreeMap;

/// Ordered map from position to accumulated cost change. Entries with
/// value zero are dropped eagerly, so "no entry" and "zero change" are the
/// same state. All operations are `O(log len)`.
#[derive(Debug, Default, Clone)]
pub struct CostChangeQueue {
    map: BTreeMap<i64, Cost>,
}

impl CostChangeQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `delta` to the change stored at `position`; removes the entry
    /// if the sum cancels to zero.
    pub fn accumulate(&mut self, position: i64, delta: Cost) {
        if delta == 0 {
            return;
        }
        let slot = self.map.entry(position).or_insert(0);
        *slot += delta;
        if *slot == 0 {
            self.map.remove(&position);
        }
    }

    /// Accumulated change at `position`, zero when absent.
    pub fn value_at(&self, position: i64) -> Cost {
        self.map.get(&position).copied().unwrap_or(0)
    }

    /// Remove and return the change at `position`, zero when absent.
    pub fn remove(&mut self, position: i64) -> Cost {
        self.map.remove(&position).unwrap_or(0)
    }

    /// Largest stored position strictly below `position`.
    pub fn predecessor(&self, position: i64) -> Option<i64> {
        self.map.range(..position).next_back().map(|(&p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Operation counters for one solver run.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FastStats {
    /// Passes through the inner loop (slides plus cursor advances).
    pub inner_iterations: usize,
    /// Entering events stored.
    pub entering_events: usize,
    /// Pair events stored.
    pub delta_events: usize,
    /// Leaving adjustments stored.
    pub leaving_events: usize,
}

/// Solve and return the positional encoding with its exact optimal cost.
pub fn solve_fast(inst: &Instance) -> (PositionalEncoding, Cost) {
    let (enc, cost, _) = solve_fast_with_stats(inst);
    (enc, cost)
}

/// [`solve_fast`] plus operation counters.
pub fn solve_fast_with_stats(inst: &Instance) -> (PositionalEncoding, Cost, FastStats) {
    let n = inst.n();
    let m = inst.m();
    let mut queue = CostChangeQueue::new();
    let mut stats = FastStats::default();
    let mut positions: Vec<i64> = Vec::with_capacity(n);
    let mut total: Cost = 0;
    // current sink; never decreases over the whole run
    let mut cursor = 0usize;
    let mut prev_position = 0i64;

    for i in 0..n {
        let best = inst.best_sink(i);
        let supply_before = inst.supply_prefix(i);
        let supply_after = inst.supply_prefix(i + 1);

        // entering events for the sinks between the cursor and the best
        // sink; each sink gets one over the whole run
        for l in cursor..best {
            let position = inst.demand_prefix(l + 1) - supply_before;
            if position > 0 {
                let delta = inst.cost(i, l) - inst.cost(i, l + 1);
                if delta != 0 {
                    stats.entering_events += 1;
                    queue.accumulate(position, delta);
                }
            }
        }

        // pair events between the previous source and this one, only at
        // positions the sweep has not passed yet
        if i > 0 {
            let range = match inst.nonzero_delta_range(i - 1) {
                Some(range) => range,
                None => 0..m.saturating_sub(1),
            };
            for l in range {
                let position = inst.demand_prefix(l + 1) - supply_before;
                if position > 0 && position < prev_position {
                    let delta = inst.delta(i - 1, l);
                    if delta != 0 {
                        stats.delta_events += 1;
                        queue.accumulate(position, delta);
                    }
                }
            }
        }

        cursor = cursor.max(best);
        let mut p = (inst.demand_prefix(cursor) - supply_before).max(prev_position);

        // mass that lands in the cursor sink immediately
        let initial = (p + supply_after).min(inst.demand_prefix(cursor + 1)) - (p + supply_before);
        debug_assert!((0..=inst.supply(i)).contains(&initial));
        total += inst.cost(i, cursor) * initial as i128;

        while p > inst.demand_prefix(cursor + 1) - supply_after {
            stats.inner_iterations += 1;
            let gamma = queue.value_at(p);
            let advance = if p == 0 {
                // nothing can shift further left; open the next sink
                true
            } else if cursor + 1 == m {
                // no sink remains on the right; shift left
                false
            } else {
                gamma + inst.cost(i, cursor) >= inst.cost(i, cursor + 1)
            };

            if advance {
                debug_assert!(cursor + 1 < m, "feasibility keeps a sink available");
                cursor += 1;
                let entered =
                    (p + supply_after).min(inst.demand_prefix(cursor + 1)) - inst.demand_prefix(cursor);
                debug_assert!(entered > 0);
                total += inst.cost(i, cursor) * entered as i128;
                if p > 0 {
                    let rebase = inst.cost(i, cursor - 1) - inst.cost(i, cursor);
                    if rebase != 0 {
                        stats.leaving_events += 1;
                        queue.accumulate(p, rebase);
                    }
                }
            } else {
                let floor = inst.demand_prefix(cursor + 1) - supply_after;
                let target = queue.predecessor(p).unwrap_or(i64::MIN).max(floor).max(0);
                debug_assert!(target < p);
                queue.remove(p);
                total += (gamma + inst.cost(i, cursor)) * (p - target) as i128;
                p = target;
                queue.accumulate(p, gamma);
            }
        }

        positions.push(p);
        prev_position = p;
    }

    for i in (0..n.saturating_sub(1)).rev() {
        positions[i] = positions[i].min(positions[i + 1]);
    }
    debug_assert!(positions.iter().all(|&p| p >= 0 && p <= inst.surplus()));

    (PositionalEncoding::new(positions), total, stats)
}

/// Solve and return the explicit flow.
///
/// The cost accumulated by the sweep and the cost of the decoded flow are
/// computed along independent routes; any disagreement is a solver bug and
/// panics rather than returning a wrong answer.
pub fn solve(inst: &Instance) -> Flow {
    solve_with_stats(inst).0
}

/// [`solve`] plus operation counters.
pub fn solve_with_stats(inst: &Instance) -> (Flow, FastStats) {
    let (encoding, reported, stats) = solve_fast_with_stats(inst);
    let flow = decode(inst, &encoding).expect("solver produced an invalid encoding");
    assert_eq!(
        flow.total_cost(),
        reported,
        "sweep cost accounting disagrees with the decoded flow"
    );
    (flow, stats)
}

/// Upper bound on inner-loop iterations for an `n x m` instance.
pub fn iteration_bound(n: usize, m: usize) -> usize {
    (3 * m + n).saturating_sub(4)
}

/// Upper bound on pair events for an `n x m` instance under the given
/// cost model.
pub fn delta_event_bound(n: usize, m: usize, model: CostModel) -> usize {
    match model {
        CostModel::Absolute => (n + m).saturating_sub(3),
        _ => n * m,
    }
}
