//! Problem model: validated sources and sinks on the line, exact cost
//! evaluation, prefix sums and the sparse cost-difference queries used by
//! the solvers.
//!
//! All indices in this crate are 0-based. Construction sorts entities by
//! coordinate, merges entities that share a coordinate and drops zero-mass
//! entities; the mapping back to the caller's original indices is kept so
//! flows can be reported against the input as given.

use crate::encoding::FlowTriple;
use std::fmt;
use std::ops::Range;

/// Signed coordinate on the line.
pub type Coord = i64;
/// Supply or demand mass.
pub type Mass = i64;
/// Exact transport cost. Wide enough for every instance accepted by
/// [`build_instance`]; the capacity check rejects anything that could
/// overflow intermediate arithmetic.
pub type Cost = i128;

/// Ground cost between a source and a sink, as a function of the signed
/// coordinate difference `u - v`.
#[derive(Debug, Clone, Copy)]
pub enum CostModel {
    /// `|u - v|`
    Absolute,
    /// `(u - v)^2`
    Squared,
    /// Caller-supplied function of `u - v`. The solvers are only correct
    /// when the function is convex; this contract is not machine-checked.
    Convex(fn(i128) -> Cost),
}

impl CostModel {
    /// True for the absolute-distance model, which admits the sparse
    /// second-difference structure used by the fast solver.
    #[inline]
    pub fn is_absolute(&self) -> bool {
        matches!(self, CostModel::Absolute)
    }

    /// Evaluate the ground cost for a coordinate difference.
    #[inline]
    pub fn eval(&self, diff: i128) -> Cost {
        match self {
            CostModel::Absolute => diff.abs(),
            CostModel::Squared => diff * diff,
            CostModel::Convex(f) => f(diff),
        }
    }

    fn checked_eval(&self, diff: i128) -> Option<Cost> {
        match self {
            CostModel::Absolute => diff.checked_abs(),
            CostModel::Squared => diff.checked_mul(diff),
            CostModel::Convex(f) => Some(f(diff)),
        }
    }
}

/// Rejection reasons for [`build_instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    /// A supply or demand was negative.
    NegativeMass { is_source: bool, index: usize, mass: Mass },
    /// No sources or no sinks remain once zero-mass entities are dropped.
    Empty { sources: bool },
    /// Total supply exceeds total demand, so some supply cannot ship.
    Infeasible { supply: i64, demand: i64 },
    /// The instance could overflow exact integer arithmetic; see the
    /// capacity contract in the crate documentation.
    CapacityExceeded(String),
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::NegativeMass { is_source, index, mass } => write!(
                f,
                "negative mass {} for {} {}",
                mass,
                if *is_source { "source" } else { "sink" },
                index
            ),
            BuildError::Empty { sources } => write!(
                f,
                "no {} left after dropping zero-mass entries",
                if *sources { "sources" } else { "sinks" }
            ),
            BuildError::Infeasible { supply, demand } => {
                write!(f, "infeasible: total supply {} exceeds total demand {}", supply, demand)
            }
            BuildError::CapacityExceeded(msg) => write!(f, "arithmetic capacity exceeded: {}", msg),
        }
    }
}

impl std::error::Error for BuildError {}

/// A validated, sorted and merged transport instance.
///
/// Coordinates are strictly increasing on both sides, all masses are
/// strictly positive, and total supply does not exceed total demand.
#[derive(Debug, Clone)]
pub struct Instance {
    source_pos: Vec<Coord>,
    supplies: Vec<Mass>,
    sink_pos: Vec<Coord>,
    demands: Vec<Mass>,
    /// `supply_prefix[i]` = sum of the first `i` supplies; length `n + 1`.
    supply_prefix: Vec<i64>,
    /// `demand_prefix[j]` = sum of the first `j` demands; length `m + 1`.
    demand_prefix: Vec<i64>,
    cost_model: CostModel,
    /// For each merged source, the original `(index, mass)` entries it
    /// absorbed, in input order. Zero-mass originals are absent.
    source_members: Vec<Vec<(usize, Mass)>>,
    sink_members: Vec<Vec<(usize, Mass)>>,
    original_sources: usize,
    original_sinks: usize,
}

/// Validate and preprocess raw input into an [`Instance`].
///
/// Zero-mass entries are dropped, entries are sorted by coordinate, and
/// entries sharing a coordinate are merged by summing their masses.
pub fn build_instance(
    raw_sources: &[(Coord, Mass)],
    raw_sinks: &[(Coord, Mass)],
    cost_model: CostModel,
) -> Result<Instance, BuildError> {
    let (source_pos, supplies, source_members) = preprocess(raw_sources, true)?;
    let (sink_pos, demands, sink_members) = preprocess(raw_sinks, false)?;
    if source_pos.is_empty() {
        return Err(BuildError::Empty { sources: true });
    }
    if sink_pos.is_empty() {
        return Err(BuildError::Empty { sources: false });
    }

    let supply_prefix = prefix_sums(&supplies, true)?;
    let demand_prefix = prefix_sums(&demands, false)?;
    let total_supply = *supply_prefix.last().unwrap();
    let total_demand = *demand_prefix.last().unwrap();
    if total_supply > total_demand {
        return Err(BuildError::Infeasible { supply: total_supply, demand: total_demand });
    }

    let inst = Instance {
        original_sources: raw_sources.len(),
        original_sinks: raw_sinks.len(),
        source_pos,
        supplies,
        sink_pos,
        demands,
        supply_prefix,
        demand_prefix,
        cost_model,
        source_members,
        sink_members,
    };
    inst.check_capacity()?;
    Ok(inst)
}

fn preprocess(
    raw: &[(Coord, Mass)],
    is_source: bool,
) -> Result<(Vec<Coord>, Vec<Mass>, Vec<Vec<(usize, Mass)>>), BuildError> {
    let mut entries: Vec<(Coord, Mass, usize)> = Vec::with_capacity(raw.len());
    for (index, &(coord, mass)) in raw.iter().enumerate() {
        if mass < 0 {
            return Err(BuildError::NegativeMass { is_source, index, mass });
        }
        if mass > 0 {
            entries.push((coord, mass, index));
        }
    }
    // Stable sort keeps equal coordinates in input order, which fixes the
    // order masses are split back out in `expand_flow`.
    entries.sort_by_key(|&(coord, _, _)| coord);

    let mut pos = Vec::new();
    let mut masses: Vec<Mass> = Vec::new();
    let mut members: Vec<Vec<(usize, Mass)>> = Vec::new();
    for (coord, mass, index) in entries {
        if pos.last() == Some(&coord) {
            let last = masses.last_mut().unwrap();
            *last = last.checked_add(mass).ok_or_else(|| {
                BuildError::CapacityExceeded(format!("merged mass at coordinate {} overflows", coord))
            })?;
            members.last_mut().unwrap().push((index, mass));
        } else {
            pos.push(coord);
            masses.push(mass);
            members.push(vec![(index, mass)]);
        }
    }
    Ok((pos, masses, members))
}

fn prefix_sums(masses: &[Mass], is_source: bool) -> Result<Vec<i64>, BuildError> {
    let mut out = Vec::with_capacity(masses.len() + 1);
    out.push(0i64);
    for &m in masses {
        let next = out.last().unwrap().checked_add(m).ok_or_else(|| {
            BuildError::CapacityExceeded(format!(
                "total {} overflows 64-bit prefix sums",
                if is_source { "supply" } else { "demand" }
            ))
        })?;
        out.push(next);
    }
    Ok(out)
}

impl Instance {
    /// Number of (merged) sources.
    #[inline]
    pub fn n(&self) -> usize {
        self.source_pos.len()
    }

    /// Number of (merged) sinks.
    #[inline]
    pub fn m(&self) -> usize {
        self.sink_pos.len()
    }

    #[inline]
    pub fn source_position(&self, i: usize) -> Coord {
        self.source_pos[i]
    }

    #[inline]
    pub fn sink_position(&self, j: usize) -> Coord {
        self.sink_pos[j]
    }

    #[inline]
    pub fn supply(&self, i: usize) -> Mass {
        self.supplies[i]
    }

    #[inline]
    pub fn demand(&self, j: usize) -> Mass {
        self.demands[j]
    }

    pub fn supplies(&self) -> &[Mass] {
        &self.supplies
    }

    pub fn demands(&self) -> &[Mass] {
        &self.demands
    }

    /// Sum of the first `i` supplies, `0 <= i <= n`.
    #[inline]
    pub fn supply_prefix(&self, i: usize) -> i64 {
        self.supply_prefix[i]
    }

    /// Sum of the first `j` demands, `0 <= j <= m`.
    #[inline]
    pub fn demand_prefix(&self, j: usize) -> i64 {
        self.demand_prefix[j]
    }

    #[inline]
    pub fn total_supply(&self) -> i64 {
        *self.supply_prefix.last().unwrap()
    }

    #[inline]
    pub fn total_demand(&self) -> i64 {
        *self.demand_prefix.last().unwrap()
    }

    /// Demand left over once all supply has shipped.
    #[inline]
    pub fn surplus(&self) -> i64 {
        self.total_demand() - self.total_supply()
    }

    #[inline]
    pub fn is_balanced(&self) -> bool {
        self.surplus() == 0
    }

    #[inline]
    pub fn cost_model(&self) -> CostModel {
        self.cost_model
    }

    /// Number of entries in the original (pre-merge) source list.
    pub fn original_source_count(&self) -> usize {
        self.original_sources
    }

    /// Number of entries in the original (pre-merge) sink list.
    pub fn original_sink_count(&self) -> usize {
        self.original_sinks
    }

    /// Exact cost of shipping one unit from source `i` to sink `j`.
    ///
    /// Panics if an index is out of range.
    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> Cost {
        let diff = self.source_pos[i] as i128 - self.sink_pos[j] as i128;
        self.cost_model.eval(diff)
    }

    /// Second-order cost difference of the adjacent source pair `(i, i+1)`
    /// across the adjacent sink pair `(j, j+1)`:
    /// `cost(i, j+1) + cost(i+1, j) - cost(i, j) - cost(i+1, j+1)`.
    ///
    /// Requires `i < n - 1` and `j < m - 1`.
    #[inline]
    pub fn delta(&self, i: usize, j: usize) -> Cost {
        assert!(i + 1 < self.n() && j + 1 < self.m(), "delta index out of range");
        self.cost(i, j + 1) + self.cost(i + 1, j) - self.cost(i, j) - self.cost(i + 1, j + 1)
    }

    /// Contiguous range of sink indices `j` with `delta(i, j) != 0`, found
    /// by binary search. Only available for the absolute cost model, where
    /// `delta(i, j) != 0` iff `u[i+1] > v[j]` and `u[i] < v[j+1]`; other
    /// models return `None` and callers must scan all `j`.
    pub fn nonzero_delta_range(&self, i: usize) -> Option<Range<usize>> {
        if !self.cost_model.is_absolute() {
            return None;
        }
        assert!(i + 1 < self.n(), "source pair index out of range");
        let m = self.m();
        let u_lo = self.source_pos[i];
        let u_hi = self.source_pos[i + 1];
        // j < end  <=>  v[j] < u[i+1]
        let end = self.sink_pos.partition_point(|&v| v < u_hi).min(m - 1);
        // j >= start  <=>  v[j+1] > u[i]
        let start = self.sink_pos.partition_point(|&v| v <= u_lo).saturating_sub(1);
        if start >= end {
            Some(0..0)
        } else {
            Some(start..end)
        }
    }

    /// Cheapest sink for source `i`; the leftmost one on exact ties.
    ///
    /// The cost profile over sinks is convex for a convex ground cost, so
    /// the leftmost minimizer is the first index where the profile stops
    /// strictly decreasing.
    pub fn best_sink(&self, i: usize) -> usize {
        let (mut lo, mut hi) = (0usize, self.m() - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.cost(i, mid) > self.cost(i, mid + 1) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Split a flow over merged entities back onto the original input
    /// entries, greedily in input order. Returns `(source, sink, amount)`
    /// triples against original 0-based indices, sorted, with positive
    /// amounts only. Merged entities share a coordinate, so the split
    /// never changes the total cost.
    pub fn expand_flow(&self, triples: &[FlowTriple]) -> Vec<(usize, usize, Mass)> {
        let mut sorted: Vec<FlowTriple> = triples.to_vec();
        sorted.sort_by_key(|t| (t.source, t.sink));

        // (member index, remaining capacity) cursors per merged entity
        let mut src_cursor: Vec<(usize, Mass)> =
            self.source_members.iter().map(|m| (0, m[0].1)).collect();
        let mut snk_cursor: Vec<(usize, Mass)> =
            self.sink_members.iter().map(|m| (0, m[0].1)).collect();

        let mut out = Vec::new();
        for t in &sorted {
            let mut left = t.amount;
            while left > 0 {
                let (si, s_rem) = &mut src_cursor[t.source];
                if *s_rem == 0 {
                    *si += 1;
                    *s_rem = self.source_members[t.source][*si].1;
                    continue;
                }
                let (sj, d_rem) = &mut snk_cursor[t.sink];
                if *d_rem == 0 {
                    *sj += 1;
                    *d_rem = self.sink_members[t.sink][*sj].1;
                    continue;
                }
                let amount = left.min(*s_rem).min(*d_rem);
                out.push((
                    self.source_members[t.source][*si].0,
                    self.sink_members[t.sink][*sj].0,
                    amount,
                ));
                *s_rem -= amount;
                snk_cursor[t.sink].1 -= amount;
                left -= amount;
            }
        }
        out.sort();
        out
    }

    /// Merged source index holding the given original source entry, if the
    /// entry carried positive mass.
    pub fn merged_source_of(&self, original: usize) -> Option<usize> {
        self.source_members
            .iter()
            .position(|members| members.iter().any(|&(idx, _)| idx == original))
    }

    /// Merged sink index holding the given original sink entry.
    pub fn merged_sink_of(&self, original: usize) -> Option<usize> {
        self.sink_members
            .iter()
            .position(|members| members.iter().any(|&(idx, _)| idx == original))
    }

    /// Reject instances whose worst-case arithmetic could overflow the
    /// 128-bit cost type: the largest unit cost times total demand plus a
    /// generous event-accumulation margin must fit with 8x headroom.
    fn check_capacity(&self) -> Result<(), BuildError> {
        let lo = *self.source_pos.first().unwrap() as i128 - *self.sink_pos.last().unwrap() as i128;
        let hi = *self.source_pos.last().unwrap() as i128 - *self.sink_pos.first().unwrap() as i128;
        let err = || {
            BuildError::CapacityExceeded(
                "worst-case cost times total mass does not fit 128-bit arithmetic".to_string(),
            )
        };
        let mut worst: i128 = 0;
        for diff in [lo, hi] {
            let c = self.cost_model.checked_eval(diff).ok_or_else(err)?;
            worst = worst.max(c.checked_abs().ok_or_else(err)?);
        }
        let budget = self.total_demand() as i128 + (self.n() + self.m()) as i128 + 1;
        worst
            .checked_mul(budget)
            .and_then(|x| x.checked_mul(8))
            .map(|_| ())
            .ok_or_else(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_instance(u: &[(Coord, Mass)], v: &[(Coord, Mass)]) -> Instance {
        build_instance(u, v, CostModel::Absolute).unwrap()
    }

    #[test]
    fn build_identity_case() {
        let inst = abs_instance(&[(0, 1)], &[(0, 1)]);
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.m(), 1);
        assert_eq!(inst.supply_prefix, vec![0, 1]);
        assert_eq!(inst.demand_prefix, vec![0, 1]);
    }

    #[test]
    fn build_sorts_and_merges() {
        let inst = abs_instance(&[(2, 1), (2, 2), (0, 1)], &[(0, 5)]);
        assert_eq!(inst.source_pos, vec![0, 2]);
        assert_eq!(inst.supplies, vec![1, 3]);
        assert_eq!(inst.supply_prefix, vec![0, 1, 4]);
        // merged members keep input order
        assert_eq!(inst.source_members[1], vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn build_rejects_infeasible() {
        let err = build_instance(&[(0, 3)], &[(0, 2)], CostModel::Absolute).unwrap_err();
        assert_eq!(err, BuildError::Infeasible { supply: 3, demand: 2 });
    }

    #[test]
    fn build_rejects_negative_mass() {
        let err = build_instance(&[(0, -1)], &[(0, 2)], CostModel::Absolute).unwrap_err();
        assert!(matches!(err, BuildError::NegativeMass { is_source: true, index: 0, mass: -1 }));
    }

    #[test]
    fn build_rejects_empty_after_preprocessing() {
        let err = build_instance(&[(0, 0)], &[(0, 2)], CostModel::Absolute).unwrap_err();
        assert_eq!(err, BuildError::Empty { sources: true });
        let err = build_instance(&[(0, 1)], &[], CostModel::Absolute).unwrap_err();
        assert_eq!(err, BuildError::Empty { sources: false });
    }

    #[test]
    fn build_rejects_capacity_overflow() {
        let big = i64::MAX / 2;
        let err = build_instance(&[(-big, 1)], &[(big, 1)], CostModel::Squared).unwrap_err();
        assert!(matches!(err, BuildError::CapacityExceeded(_)));
    }

    #[test]
    fn build_is_idempotent() {
        let inst = abs_instance(&[(5, 2), (1, 1), (5, 3)], &[(0, 4), (9, 9)]);
        let again = build_instance(
            &inst.source_pos.iter().copied().zip(inst.supplies.iter().copied()).collect::<Vec<_>>(),
            &inst.sink_pos.iter().copied().zip(inst.demands.iter().copied()).collect::<Vec<_>>(),
            CostModel::Absolute,
        )
        .unwrap();
        assert_eq!(again.source_pos, inst.source_pos);
        assert_eq!(again.supplies, inst.supplies);
        assert_eq!(again.sink_pos, inst.sink_pos);
        assert_eq!(again.demands, inst.demands);
        assert_eq!(again.supply_prefix, inst.supply_prefix);
        assert_eq!(again.demand_prefix, inst.demand_prefix);
    }

    #[test]
    fn cost_direct_evaluation() {
        let inst = abs_instance(&[(5, 1)], &[(0, 1), (5, 1)]);
        assert_eq!(inst.cost(0, 0), 5);
        assert_eq!(inst.cost(0, 1), 0);
        let sq = build_instance(&[(3, 1)], &[(1, 1)], CostModel::Squared).unwrap();
        assert_eq!(sq.cost(0, 0), 4);
    }

    #[test]
    fn delta_direct_evaluation() {
        let inst = abs_instance(&[(0, 1), (2, 1)], &[(1, 1), (3, 1)]);
        // |0-3| + |2-1| - |0-1| - |2-3|
        assert_eq!(inst.delta(0, 0), 2);
    }

    #[test]
    fn delta_vanishes_outside_overlap() {
        // both sources left of every sink
        let inst = abs_instance(&[(0, 1), (1, 1)], &[(5, 1), (6, 1)]);
        assert_eq!(inst.delta(0, 0), 0);
        // both sources right of every sink
        let inst = abs_instance(&[(7, 1), (9, 1)], &[(5, 1), (6, 1)]);
        assert_eq!(inst.delta(0, 0), 0);
    }

    fn brute_nonzero_delta(inst: &Instance, i: usize) -> Vec<usize> {
        (0..inst.m() - 1).filter(|&j| inst.delta(i, j) != 0).collect()
    }

    #[test]
    fn nonzero_delta_range_examples() {
        let inst = abs_instance(&[(0, 1), (2, 1)], &[(1, 1), (3, 1)]);
        assert_eq!(inst.nonzero_delta_range(0), Some(0..1));
        assert_eq!(brute_nonzero_delta(&inst, 0), vec![0]);

        let inst = abs_instance(&[(0, 1), (1, 1)], &[(5, 1), (6, 1)]);
        assert_eq!(inst.nonzero_delta_range(0), Some(0..0));
        assert!(brute_nonzero_delta(&inst, 0).is_empty());

        let inst = abs_instance(&[(0, 1), (10, 1)], &[(1, 4), (2, 4), (3, 4)]);
        assert_eq!(inst.nonzero_delta_range(0), Some(0..2));
        assert_eq!(brute_nonzero_delta(&inst, 0), vec![0, 1]);
    }

    #[test]
    fn nonzero_delta_range_unsupported_for_squared() {
        let inst = build_instance(&[(0, 1), (2, 1)], &[(1, 1), (3, 1)], CostModel::Squared).unwrap();
        assert_eq!(inst.nonzero_delta_range(0), None);
    }

    #[test]
    fn best_sink_examples() {
        let inst = abs_instance(&[(5, 1)], &[(0, 1), (6, 1)]);
        assert_eq!(inst.best_sink(0), 1);
        let inst = abs_instance(&[(0, 1)], &[(0, 1)]);
        assert_eq!(inst.best_sink(0), 0);
        // exact tie: leftmost minimizer
        let inst = abs_instance(&[(3, 1)], &[(1, 1), (5, 1)]);
        assert_eq!(inst.best_sink(0), 0);
    }

    #[test]
    fn expand_flow_splits_merged_entities_in_input_order() {
        let inst = abs_instance(&[(2, 1), (2, 2), (0, 1)], &[(0, 2), (0, 3)]);
        // merged: source 0 = original 2; source 1 = originals {0, 1}
        // merged sink 0 = originals {0, 1}
        let triples = vec![
            FlowTriple { source: 0, sink: 0, amount: 1 },
            FlowTriple { source: 1, sink: 0, amount: 3 },
        ];
        let expanded = inst.expand_flow(&triples);
        assert_eq!(expanded, vec![(0, 0, 1), (1, 0, 1), (1, 1, 1), (2, 0, 1)]);
        let total: Mass = expanded.iter().map(|&(_, _, x)| x).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn translation_leaves_costs_unchanged() {
        let src = [(0i64, 1i64), (4, 2)];
        let snk = [(-3i64, 2i64), (7, 4)];
        for model in [CostModel::Absolute, CostModel::Squared] {
            let base = build_instance(&src, &snk, model).unwrap();
            for t in [-11i64, 5, 1000] {
                let shifted = build_instance(
                    &src.map(|(c, m)| (c + t, m)),
                    &snk.map(|(c, m)| (c + t, m)),
                    model,
                )
                .unwrap();
                for i in 0..base.n() {
                    for j in 0..base.m() {
                        assert!(base.cost(i, j) >= 0);
                        assert_eq!(base.cost(i, j), shifted.cost(i, j));
                    }
                }
            }
        }
    }
}
