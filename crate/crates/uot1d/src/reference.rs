//! Correctness anchors: a direct successive-shortest-path solver that
//! works on the line structure, and a generic min-cost-flow oracle on the
//! bipartite graph for desk-scale validation.
//!
//! Neither solver is fast; they exist to be trusted.

use crate::encoding::{Flow, FlowTriple};
use crate::instance::{Cost, Instance, Mass};
use std::collections::VecDeque;
use std::fmt;

/// Result of a traced baseline run.
pub struct BaselineRun {
    pub flow: Flow,
    /// Number of times supply was sent along a path.
    pub send_operations: usize,
}

/// Direct successive-shortest-path solver over the sorted line.
///
/// Sources are processed in coordinate order. While a source has free
/// supply, two candidate paths are compared: the edge to the first sink at
/// or right of its cheapest sink that still has free demand, or the
/// displacement path that enters the sink just left of it and cascades
/// left (shifting each full sink's leftmost occupant one sink down) until
/// free demand absorbs the unit. Ties prefer the displacement path.
///
/// `O(n * m * (n + m))` worst case.
pub fn solve_ssp_baseline(inst: &Instance) -> Flow {
    solve_ssp_baseline_traced(inst, |_| {}).flow
}

/// Same as [`solve_ssp_baseline`], invoking `observe` with the current
/// partial solution after every send.
pub fn solve_ssp_baseline_traced(
    inst: &Instance,
    mut observe: impl FnMut(&[FlowTriple]),
) -> BaselineRun {
    let n = inst.n();
    let m = inst.m();
    let mut remaining: Vec<Mass> = (0..m).map(|j| inst.demand(j)).collect();
    // occupants per sink, leftmost source at the front
    let mut occupants: Vec<VecDeque<(usize, Mass)>> = vec![VecDeque::new(); m];
    let mut send_operations = 0usize;

    let snapshot = |occupants: &[VecDeque<(usize, Mass)>]| -> Vec<FlowTriple> {
        let mut triples = Vec::new();
        for (sink, occ) in occupants.iter().enumerate() {
            for &(source, amount) in occ {
                triples.push(FlowTriple { source, sink, amount });
            }
        }
        triples.sort_by_key(|t| (t.source, t.sink));
        triples
    };

    for i in 0..n {
        let mut free = inst.supply(i);
        let best = inst.best_sink(i);
        while free > 0 {
            // first sink strictly right of the best one with free demand
            let right = (best + 1..m).find(|&j| remaining[j] > 0);
            // entry sink of the displacement path: just left of `right`,
            // or the last sink when nothing to the right is free
            let entry = match right {
                Some(j) => j - 1,
                None => m - 1,
            };
            // the displacement path ends at the first free sink at or left
            // of its entry
            let target = (0..=entry).rev().find(|&l| remaining[l] > 0);

            let send_left = match (right, target) {
                (None, Some(_)) => true,
                (Some(_), None) => false,
                (Some(j), Some(t)) => {
                    let mut path_cost: Cost = 0;
                    for l in (t + 1)..=entry {
                        let (occupant, _) = *occupants[l].front().expect("full sink has an occupant");
                        path_cost += inst.cost(occupant, l - 1) - inst.cost(occupant, l);
                    }
                    path_cost + inst.cost(i, entry) <= inst.cost(i, j)
                }
                (None, None) => {
                    unreachable!("free demand always exists while supply is unplaced")
                }
            };

            if send_left {
                let target = target.expect("left path requires a free sink");
                let mut amount = free;
                if target == entry {
                    amount = amount.min(remaining[entry]);
                } else {
                    amount = amount.min(remaining[target]);
                    for l in (target + 1)..=entry {
                        amount = amount.min(occupants[l].front().unwrap().1);
                    }
                }
                debug_assert!(amount > 0);
                // enter at `entry`; the new source is the rightmost there
                push_back_merged(&mut occupants[entry], i, amount);
                if target == entry {
                    remaining[entry] -= amount;
                } else {
                    // cascade: each full sink's leftmost occupant moves one
                    // sink down, the final unit lands in the free target
                    for l in ((target + 1)..=entry).rev() {
                        let front = occupants[l].front_mut().unwrap();
                        front.1 -= amount;
                        let (occupant, left_over) = *front;
                        if left_over == 0 {
                            occupants[l].pop_front();
                        }
                        push_back_merged(&mut occupants[l - 1], occupant, amount);
                    }
                    remaining[target] -= amount;
                }
                free -= amount;
            } else {
                let j = right.expect("right move requires a free sink on the right");
                let amount = free.min(remaining[j]);
                debug_assert!(amount > 0);
                push_back_merged(&mut occupants[j], i, amount);
                remaining[j] -= amount;
                free -= amount;
            }
            send_operations += 1;
            observe(&snapshot(&occupants));
        }
    }

    let flow = Flow::from_triples(inst, snapshot(&occupants));
    BaselineRun { flow, send_operations }
}

/// Append `amount` for `source` at the back of a sink's occupant queue,
/// merging with the back entry when it is the same source.
fn push_back_merged(queue: &mut VecDeque<(usize, Mass)>, source: usize, amount: Mass) {
    if let Some(back) = queue.back_mut() {
        debug_assert!(back.0 <= source, "occupants stay sorted by source");
        if back.0 == source {
            back.1 += amount;
            return;
        }
    }
    queue.push_back((source, amount));
}

/// Guard for the oracle: refuse instances with more than this many
/// source-sink cells.
pub const ORACLE_MAX_CELLS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    /// `n * m` exceeds [`ORACLE_MAX_CELLS`].
    TooLarge { cells: usize, limit: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { cells, limit } => {
                write!(f, "instance has {} cells, oracle limit is {}", cells, limit)
            }
        }
    }
}

impl std::error::Error for OracleError {}

struct Arc {
    to: usize,
    capacity: Mass,
    cost: Cost,
}

/// Textbook successive shortest paths with label-correcting search on the
/// residual graph of the complete bipartite network. Shares no structure
/// with the line solvers, so agreement is strong evidence of correctness.
///
/// Exact integer arithmetic; guaranteed optimal. Desk-scale only: errors
/// out when `n * m > ORACLE_MAX_CELLS`.
pub fn solve_mincostflow_oracle(inst: &Instance) -> Result<Flow, OracleError> {
    let n = inst.n();
    let m = inst.m();
    let cells = n * m;
    if cells > ORACLE_MAX_CELLS {
        return Err(OracleError::TooLarge { cells, limit: ORACLE_MAX_CELLS });
    }

    // nodes: 0 = super source, 1..=n sources, n+1..=n+m sinks, n+m+1 = tap
    let node_count = n + m + 2;
    let source_node = 0usize;
    let tap = n + m + 1;
    let mut arcs: Vec<Arc> = Vec::with_capacity(2 * (n + m + cells));
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    let add_arc = |arcs: &mut Vec<Arc>, adjacency: &mut Vec<Vec<usize>>, from: usize, to: usize, capacity: Mass, cost: Cost| {
        adjacency[from].push(arcs.len());
        arcs.push(Arc { to, capacity, cost });
        adjacency[to].push(arcs.len());
        arcs.push(Arc { to: from, capacity: 0, cost: -cost });
    };

    for i in 0..n {
        add_arc(&mut arcs, &mut adjacency, source_node, 1 + i, inst.supply(i), 0);
        for j in 0..m {
            add_arc(&mut arcs, &mut adjacency, 1 + i, 1 + n + j, inst.supply(i), inst.cost(i, j));
        }
    }
    for j in 0..m {
        add_arc(&mut arcs, &mut adjacency, 1 + n + j, tap, inst.demand(j), 0);
    }

    let mut shipped: i64 = 0;
    let goal = inst.total_supply();
    while shipped < goal {
        // label-correcting shortest path on the residual graph
        let mut dist: Vec<Option<Cost>> = vec![None; node_count];
        let mut parent_arc: Vec<usize> = vec![usize::MAX; node_count];
        let mut in_queue = vec![false; node_count];
        dist[source_node] = Some(0);
        let mut queue = VecDeque::new();
        queue.push_back(source_node);
        in_queue[source_node] = true;
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            let du = dist[u].unwrap();
            for &a in &adjacency[u] {
                let arc = &arcs[a];
                if arc.capacity == 0 {
                    continue;
                }
                let candidate = du + arc.cost;
                if dist[arc.to].map_or(true, |d| candidate < d) {
                    dist[arc.to] = Some(candidate);
                    parent_arc[arc.to] = a;
                    if !in_queue[arc.to] {
                        queue.push_back(arc.to);
                        in_queue[arc.to] = true;
                    }
                }
            }
        }
        assert!(dist[tap].is_some(), "feasible instance always admits an augmenting path");

        // bottleneck along the path
        let mut bottleneck = goal - shipped;
        let mut node = tap;
        while node != source_node {
            let a = parent_arc[node];
            bottleneck = bottleneck.min(arcs[a].capacity);
            node = arcs[a ^ 1].to;
        }
        debug_assert!(bottleneck > 0);
        let mut node = tap;
        while node != source_node {
            let a = parent_arc[node];
            arcs[a].capacity -= bottleneck;
            arcs[a ^ 1].capacity += bottleneck;
            node = arcs[a ^ 1].to;
        }
        shipped += bottleneck;
    }

    // read the flow off the residual capacities of the reverse arcs
    let mut triples = Vec::new();
    for i in 0..n {
        for &a in &adjacency[1 + i] {
            if a % 2 == 0 {
                let arc = &arcs[a];
                if arc.to > n && arc.to <= n + m {
                    let sent = arcs[a ^ 1].capacity;
                    if sent > 0 {
                        triples.push(FlowTriple { source: i, sink: arc.to - n - 1, amount: sent });
                    }
                }
            }
        }
    }
    Ok(Flow::from_triples(inst, triples))
}
