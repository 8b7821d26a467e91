//! Position-based representation of transport solutions.
//!
//! A [`PositionalEncoding`] stores, for each source, how much unmet demand
//! sits before it. Every such encoding describes exactly one solution in
//! which allocations never cross (monotonic) and a source spanning several
//! sinks fills every sink in between (no hole); conversely every such
//! solution admits an encoding. [`decode`] and [`encode`] convert between
//! the two forms in linear time.

use crate::balanced::solve_balanced;
use crate::instance::{Cost, Instance, Mass};
use std::fmt;

/// One allocation: `amount` units from `source` to `sink` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowTriple {
    pub source: usize,
    pub sink: usize,
    pub amount: Mass,
}

/// A sparse transport plan with its exact total cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    triples: Vec<FlowTriple>,
    total_cost: Cost,
}

impl Flow {
    /// Build a flow from triples, sorting them and summing duplicates;
    /// the total cost is recomputed from the instance.
    pub fn from_triples(inst: &Instance, triples: Vec<FlowTriple>) -> Flow {
        let mut triples: Vec<FlowTriple> =
            triples.into_iter().filter(|t| t.amount != 0).collect();
        triples.sort_by_key(|t| (t.source, t.sink));
        triples.dedup_by(|b, a| {
            if a.source == b.source && a.sink == b.sink {
                a.amount += b.amount;
                true
            } else {
                false
            }
        });
        let total_cost = flow_cost(inst, &triples);
        Flow { triples, total_cost }
    }

    pub fn triples(&self) -> &[FlowTriple] {
        &self.triples
    }

    pub fn total_cost(&self) -> Cost {
        self.total_cost
    }
}

/// Nondecreasing positions `p[0] <= ... <= p[n-1]`, each within
/// `[0, total_demand - total_supply]`, one per source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalEncoding {
    positions: Vec<i64>,
}

impl PositionalEncoding {
    pub fn new(positions: Vec<i64>) -> Self {
        PositionalEncoding { positions }
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// Check ordering, range and length against an instance.
    pub fn validate(&self, inst: &Instance) -> Result<(), EncodingError> {
        if self.positions.len() != inst.n() {
            return Err(EncodingError::WrongLength { expected: inst.n(), got: self.positions.len() });
        }
        let max = inst.surplus();
        let mut prev = 0i64;
        for (index, &p) in self.positions.iter().enumerate() {
            if p < prev {
                return Err(EncodingError::Unordered { index });
            }
            if p > max {
                return Err(EncodingError::OutOfRange { index, value: p, max });
            }
            prev = p;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodingError {
    WrongLength { expected: usize, got: usize },
    /// Positions must be nondecreasing and start at or above zero.
    Unordered { index: usize },
    OutOfRange { index: usize, value: i64, max: i64 },
    /// The flow given to [`encode`] has crossing allocations.
    NotMonotonic,
    /// The flow given to [`encode`] leaves a sink between two allocations
    /// of one source partially unfilled.
    Hole { source: usize, sink: usize },
    /// The flow given to [`encode`] violates the marginal constraints.
    InfeasibleFlow(FlowError),
}

impl fmt::Display for EncodingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodingError::WrongLength { expected, got } => {
                write!(f, "encoding has {} positions, expected {}", got, expected)
            }
            EncodingError::Unordered { index } => {
                write!(f, "positions must be nondecreasing and nonnegative (index {})", index)
            }
            EncodingError::OutOfRange { index, value, max } => {
                write!(f, "position {} at index {} exceeds maximum {}", value, index, max)
            }
            EncodingError::NotMonotonic => write!(f, "flow has crossing allocations"),
            EncodingError::Hole { source, sink } => {
                write!(f, "source {} leaves intermediate sink {} unfilled", source, sink)
            }
            EncodingError::InfeasibleFlow(e) => write!(f, "infeasible flow: {}", e),
        }
    }
}

impl std::error::Error for EncodingError {}

/// Feasibility violations of a flow against an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowError {
    IndexOutOfRange { source: usize, sink: usize },
    NonPositiveAmount { source: usize, sink: usize, amount: Mass },
    DuplicatePair { source: usize, sink: usize },
    RowSum { source: usize, expected: Mass, got: i64 },
    ColumnOverflow { sink: usize, capacity: Mass, got: i64 },
    CostMismatch { stated: Cost, computed: Cost },
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::IndexOutOfRange { source, sink } => {
                write!(f, "triple ({}, {}) out of range", source, sink)
            }
            FlowError::NonPositiveAmount { source, sink, amount } => {
                write!(f, "non-positive amount {} on ({}, {})", amount, source, sink)
            }
            FlowError::DuplicatePair { source, sink } => {
                write!(f, "duplicate triple for pair ({}, {})", source, sink)
            }
            FlowError::RowSum { source, expected, got } => {
                write!(f, "source {} ships {} instead of {}", source, got, expected)
            }
            FlowError::ColumnOverflow { sink, capacity, got } => {
                write!(f, "sink {} receives {} over capacity {}", sink, got, capacity)
            }
            FlowError::CostMismatch { stated, computed } => {
                write!(f, "stated cost {} differs from computed {}", stated, computed)
            }
        }
    }
}

impl std::error::Error for FlowError {}

/// Exact total cost of a triple list.
pub fn flow_cost(inst: &Instance, triples: &[FlowTriple]) -> Cost {
    triples.iter().map(|t| inst.cost(t.source, t.sink) * t.amount as i128).sum()
}

/// Check the exact marginal constraints: every source ships its full
/// supply, no sink exceeds its capacity, all amounts positive, no
/// duplicate pairs, stated cost consistent.
pub fn verify_flow(inst: &Instance, flow: &Flow) -> Result<(), FlowError> {
    let mut row = vec![0i64; inst.n()];
    let mut col = vec![0i64; inst.m()];
    let mut seen: Vec<(usize, usize)> = Vec::with_capacity(flow.triples.len());
    for t in &flow.triples {
        if t.source >= inst.n() || t.sink >= inst.m() {
            return Err(FlowError::IndexOutOfRange { source: t.source, sink: t.sink });
        }
        if t.amount <= 0 {
            return Err(FlowError::NonPositiveAmount {
                source: t.source,
                sink: t.sink,
                amount: t.amount,
            });
        }
        seen.push((t.source, t.sink));
        row[t.source] += t.amount;
        col[t.sink] += t.amount;
    }
    seen.sort_unstable();
    for w in seen.windows(2) {
        if w[0] == w[1] {
            return Err(FlowError::DuplicatePair { source: w[0].0, sink: w[0].1 });
        }
    }
    for i in 0..inst.n() {
        if row[i] != inst.supply(i) {
            return Err(FlowError::RowSum { source: i, expected: inst.supply(i), got: row[i] });
        }
    }
    for j in 0..inst.m() {
        if col[j] > inst.demand(j) {
            return Err(FlowError::ColumnOverflow { sink: j, capacity: inst.demand(j), got: col[j] });
        }
    }
    let computed = flow_cost(inst, &flow.triples);
    if computed != flow.total_cost {
        return Err(FlowError::CostMismatch { stated: flow.total_cost, computed });
    }
    Ok(())
}

/// True iff no two allocations cross: a later source never ships to an
/// earlier sink than any earlier source. `O(t log t)` for `t` triples.
pub fn check_monotonic(triples: &[FlowTriple]) -> bool {
    let mut sorted: Vec<(usize, usize)> = triples.iter().map(|t| (t.source, t.sink)).collect();
    sorted.sort_unstable();
    let mut max_sink_before = 0usize;
    let mut group_start = 0;
    while group_start < sorted.len() {
        let source = sorted[group_start].0;
        let mut group_end = group_start;
        let mut group_max = 0usize;
        while group_end < sorted.len() && sorted[group_end].0 == source {
            group_max = group_max.max(sorted[group_end].1);
            group_end += 1;
        }
        // the group's smallest sink is its first entry
        if group_start > 0 && sorted[group_start].1 < max_sink_before {
            return false;
        }
        max_sink_before = max_sink_before.max(group_max);
        group_start = group_end;
    }
    true
}

/// True iff every source that ships to several sinks takes the full
/// capacity of every sink strictly between its first and last.
///
/// Returns an error when the flow is not monotonic, since the property is
/// only defined for monotonic flows.
pub fn check_no_hole(inst: &Instance, triples: &[FlowTriple]) -> Result<bool, EncodingError> {
    if !check_monotonic(triples) {
        return Err(EncodingError::NotMonotonic);
    }
    let mut sorted: Vec<FlowTriple> = triples.to_vec();
    sorted.sort_by_key(|t| (t.source, t.sink));
    let mut group_start = 0;
    while group_start < sorted.len() {
        let source = sorted[group_start].source;
        let mut group_end = group_start;
        while group_end < sorted.len() && sorted[group_end].source == source {
            group_end += 1;
        }
        let group = &sorted[group_start..group_end];
        let last_sink = group[group.len() - 1].sink;
        for w in group.windows(2) {
            // no gap between consecutively used sinks
            if w[1].sink != w[0].sink + 1 {
                return Ok(false);
            }
        }
        for t in group {
            // interior sinks must be taken in full
            if t.sink > group[0].sink && t.sink < last_sink && t.amount != inst.demand(t.sink) {
                return Ok(false);
            }
        }
        group_start = group_end;
    }
    Ok(true)
}

/// Expand an encoding into its flow.
///
/// Interleaves phantom supplies (the gaps between consecutive positions)
/// with the real supplies, solves the resulting balanced problem with the
/// greedy allocator and keeps the triples of real sources. `O(n + m)`.
pub fn decode(inst: &Instance, enc: &PositionalEncoding) -> Result<Flow, EncodingError> {
    enc.validate(inst)?;
    let p = enc.positions();
    let n = inst.n();
    let mut augmented: Vec<Mass> = Vec::with_capacity(2 * n + 1);
    augmented.push(p[0]);
    for i in 0..n {
        augmented.push(inst.supply(i));
        let gap_after = if i + 1 < n { p[i + 1] - p[i] } else { inst.surplus() - p[n - 1] };
        augmented.push(gap_after);
    }
    let balanced = solve_balanced(&augmented, inst.demands())
        .expect("augmented supplies match demands by construction");
    let triples: Vec<FlowTriple> = balanced
        .into_iter()
        .filter(|&(aug_source, _, _)| aug_source % 2 == 1)
        .map(|(aug_source, sink, amount)| FlowTriple {
            source: (aug_source - 1) / 2,
            sink,
            amount,
        })
        .collect();
    let total_cost = flow_cost(inst, &triples);
    Ok(Flow { triples, total_cost })
}

/// Compute the canonical encoding of a monotonic, no-hole flow.
///
/// For a source whose allocation spills over several sinks the position is
/// pinned by its first chunk ending at that sink's boundary; a single-sink
/// source is packed directly after the inflow that precedes it. Decoding
/// the result reproduces the flow exactly.
pub fn encode(inst: &Instance, flow: &Flow) -> Result<PositionalEncoding, EncodingError> {
    verify_flow(inst, flow).map_err(EncodingError::InfeasibleFlow)?;
    if !check_monotonic(flow.triples()) {
        return Err(EncodingError::NotMonotonic);
    }
    let mut sorted: Vec<FlowTriple> = flow.triples().to_vec();
    sorted.sort_by_key(|t| (t.source, t.sink));
    // no-hole check with a precise offender report
    {
        let mut group_start = 0;
        while group_start < sorted.len() {
            let source = sorted[group_start].source;
            let mut group_end = group_start;
            while group_end < sorted.len() && sorted[group_end].source == source {
                group_end += 1;
            }
            let group = &sorted[group_start..group_end];
            let last_sink = group[group.len() - 1].sink;
            for w in group.windows(2) {
                if w[1].sink != w[0].sink + 1 {
                    return Err(EncodingError::Hole { source, sink: w[0].sink + 1 });
                }
            }
            for t in group {
                if t.sink > group[0].sink && t.sink < last_sink && t.amount != inst.demand(t.sink) {
                    return Err(EncodingError::Hole { source, sink: t.sink });
                }
            }
            group_start = group_end;
        }
    }

    let mut inflow = vec![0i64; inst.m()];
    let mut positions = Vec::with_capacity(inst.n());
    let mut cursor = 0usize;
    for i in 0..inst.n() {
        debug_assert!(cursor < sorted.len() && sorted[cursor].source == i, "supply is positive, so every source ships");
        let first = sorted[cursor];
        let mut count = 0;
        while cursor + count < sorted.len() && sorted[cursor + count].source == i {
            count += 1;
        }
        let j = first.sink;
        let start = if count > 1 {
            // spills right: the first chunk must end at the sink boundary
            inst.demand_prefix(j + 1) - first.amount
        } else {
            // packed directly after the inflow already in its sink
            inst.demand_prefix(j) + inflow[j]
        };
        positions.push(start - inst.supply_prefix(i));
        for t in &sorted[cursor..cursor + count] {
            inflow[t.sink] += t.amount;
        }
        cursor += count;
    }
    let enc = PositionalEncoding::new(positions);
    debug_assert!(enc.validate(inst).is_ok());
    Ok(enc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_instance, CostModel};

    fn inst(u: &[(i64, i64)], v: &[(i64, i64)]) -> Instance {
        build_instance(u, v, CostModel::Absolute).unwrap()
    }

    fn triples(list: &[(usize, usize, i64)]) -> Vec<FlowTriple> {
        list.iter().map(|&(source, sink, amount)| FlowTriple { source, sink, amount }).collect()
    }

    #[test]
    fn decode_places_gaps_between_sources() {
        let inst = inst(&[(0, 1), (1, 1)], &[(0, 2), (1, 2)]);
        let flow = decode(&inst, &PositionalEncoding::new(vec![0, 2])).unwrap();
        assert_eq!(flow.triples(), triples(&[(0, 0, 1), (1, 1, 1)]).as_slice());

        let flow = decode(&inst, &PositionalEncoding::new(vec![0, 0])).unwrap();
        assert_eq!(flow.triples(), triples(&[(0, 0, 1), (1, 0, 1)]).as_slice());
    }

    #[test]
    fn decode_single_source() {
        let inst = inst(&[(0, 1)], &[(0, 1)]);
        let flow = decode(&inst, &PositionalEncoding::new(vec![0])).unwrap();
        assert_eq!(flow.triples(), triples(&[(0, 0, 1)]).as_slice());
    }

    #[test]
    fn decode_rejects_invalid_encodings() {
        let inst = inst(&[(0, 1), (1, 1)], &[(0, 2), (1, 2)]);
        assert_eq!(
            decode(&inst, &PositionalEncoding::new(vec![1, 0])).unwrap_err(),
            EncodingError::Unordered { index: 1 }
        );
        assert_eq!(
            decode(&inst, &PositionalEncoding::new(vec![0, 3])).unwrap_err(),
            EncodingError::OutOfRange { index: 1, value: 3, max: 2 }
        );
        assert!(matches!(
            decode(&inst, &PositionalEncoding::new(vec![0])).unwrap_err(),
            EncodingError::WrongLength { .. }
        ));
    }

    #[test]
    fn encode_canonical_examples() {
        let two = inst(&[(0, 1), (1, 1)], &[(0, 2), (1, 2)]);
        let flow = Flow::from_triples(&two, triples(&[(0, 0, 1), (1, 1, 1)]));
        assert_eq!(encode(&two, &flow).unwrap().positions(), &[0, 1]);

        let single = inst(&[(5, 1)], &[(0, 1), (6, 1)]);
        let flow = Flow::from_triples(&single, triples(&[(0, 1, 1)]));
        assert_eq!(encode(&single, &flow).unwrap().positions(), &[1]);
    }

    #[test]
    fn balanced_flows_encode_to_zero() {
        let balanced = inst(&[(0, 2), (3, 1)], &[(1, 1), (2, 2)]);
        let greedy = solve_balanced(balanced.supplies(), balanced.demands()).unwrap();
        let flow = Flow::from_triples(
            &balanced,
            greedy.into_iter().map(|(source, sink, amount)| FlowTriple { source, sink, amount }).collect(),
        );
        assert_eq!(encode(&balanced, &flow).unwrap().positions(), &[0, 0]);
    }

    #[test]
    fn encode_handles_partial_first_sink_with_spill() {
        // the first chunk of a spilling source may leave a gap at the
        // start of its first sink; the pinned formula keeps the round trip
        let inst = inst(&[(0, 2)], &[(0, 2), (1, 2)]);
        let flow = Flow::from_triples(&inst, triples(&[(0, 0, 1), (0, 1, 1)]));
        let enc = encode(&inst, &flow).unwrap();
        assert_eq!(enc.positions(), &[1]);
        assert_eq!(decode(&inst, &enc).unwrap(), flow);
    }

    #[test]
    fn encode_rejects_bad_flows() {
        let two = inst(&[(0, 1), (1, 1)], &[(0, 2), (1, 2)]);
        let crossing = Flow::from_triples(&two, triples(&[(0, 1, 1), (1, 0, 1)]));
        assert_eq!(encode(&two, &crossing).unwrap_err(), EncodingError::NotMonotonic);

        let short = Flow::from_triples(&two, triples(&[(0, 0, 1)]));
        assert!(matches!(encode(&two, &short).unwrap_err(), EncodingError::InfeasibleFlow(_)));

        let holed_inst = inst(&[(0, 3)], &[(0, 1), (1, 1), (2, 1)]);
        let holed = Flow {
            triples: triples(&[(0, 0, 1), (0, 2, 2)]),
            total_cost: 0,
        };
        // fix the stated cost so only the hole trips
        let holed = Flow { total_cost: flow_cost(&holed_inst, holed.triples()), ..holed };
        assert!(matches!(encode(&holed_inst, &holed), Err(EncodingError::Hole { .. })));
    }

    #[test]
    fn flow_cost_examples() {
        let zero = inst(&[(0, 1)], &[(0, 1)]);
        assert_eq!(flow_cost(&zero, &triples(&[(0, 0, 1)])), 0);

        let near = inst(&[(5, 1)], &[(0, 1), (6, 1)]);
        assert_eq!(flow_cost(&near, &triples(&[(0, 1, 1)])), 1);

        let mixed = inst(&[(1, 1), (2, 2)], &[(0, 1), (2, 2), (10, 5)]);
        assert_eq!(flow_cost(&mixed, &triples(&[(0, 0, 1), (1, 1, 2)])), 1);
    }

    #[test]
    fn monotonicity_checks() {
        assert!(!check_monotonic(&triples(&[(0, 1, 1), (1, 0, 1)])));
        assert!(check_monotonic(&triples(&[(0, 0, 1), (1, 1, 1)])));
        assert!(check_monotonic(&[]));
        // sharing a sink does not cross
        assert!(check_monotonic(&triples(&[(0, 1, 1), (1, 1, 1), (1, 2, 1)])));
    }

    #[test]
    fn no_hole_checks() {
        let three = inst(&[(0, 2)], &[(0, 1), (1, 1), (2, 1)]);
        // skips the middle sink entirely
        assert_eq!(check_no_hole(&three, &triples(&[(0, 0, 1), (0, 2, 1)])), Ok(false));
        // middle sink only partially used
        let wide = inst(&[(0, 4)], &[(0, 1), (1, 2), (2, 2)]);
        assert_eq!(check_no_hole(&wide, &triples(&[(0, 0, 1), (0, 1, 1), (0, 2, 2)])), Ok(false));
        // single triple is trivially hole-free
        assert_eq!(check_no_hole(&three, &triples(&[(0, 0, 2)])), Ok(true));
        // non-monotonic input is an error
        let two = inst(&[(0, 1), (1, 1)], &[(0, 2), (1, 2)]);
        assert_eq!(
            check_no_hole(&two, &triples(&[(0, 1, 1), (1, 0, 1)])),
            Err(EncodingError::NotMonotonic)
        );
    }

    #[test]
    fn greedy_outputs_are_monotonic_and_hole_free() {
        let cases: [(&[(i64, i64)], &[(i64, i64)]); 3] = [
            (&[(0, 3), (4, 2)], &[(1, 1), (2, 2), (5, 2)]),
            (&[(0, 1), (1, 1), (2, 1)], &[(0, 3)]),
            (&[(-5, 4)], &[(-6, 1), (0, 2), (3, 1)]),
        ];
        for (u, v) in cases {
            let instance = inst(u, v);
            let greedy = solve_balanced(instance.supplies(), instance.demands());
            if let Ok(list) = greedy {
                let t: Vec<FlowTriple> = list
                    .into_iter()
                    .map(|(source, sink, amount)| FlowTriple { source, sink, amount })
                    .collect();
                assert!(check_monotonic(&t));
                assert_eq!(check_no_hole(&instance, &t), Ok(true));
            }
        }
    }

    #[test]
    fn decode_output_is_always_feasible() {
        let instance = inst(&[(0, 2), (4, 3)], &[(1, 3), (2, 2), (5, 4)]);
        let surplus = instance.surplus();
        for a in 0..=surplus {
            for b in a..=surplus {
                let flow = decode(&instance, &PositionalEncoding::new(vec![a, b])).unwrap();
                verify_flow(&instance, &flow).unwrap();
                assert!(check_monotonic(flow.triples()));
                assert_eq!(check_no_hole(&instance, flow.triples()), Ok(true));
            }
        }
    }

    #[test]
    fn round_trip_both_directions_small() {
        let instance = inst(&[(0, 2), (4, 3)], &[(1, 3), (2, 2), (5, 4)]);
        let surplus = instance.surplus();
        for a in 0..=surplus {
            for b in a..=surplus {
                let enc = PositionalEncoding::new(vec![a, b]);
                let flow = decode(&instance, &enc).unwrap();
                let enc2 = encode(&instance, &flow).unwrap();
                // encodings are not unique, but re-decoding must agree
                assert_eq!(decode(&instance, &enc2).unwrap(), flow);
            }
        }
    }
}
