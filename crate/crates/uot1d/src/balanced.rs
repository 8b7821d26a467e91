//! Linear-time greedy solver for balanced transport on coordinate-sorted
//! inputs. This is the decode primitive for positional encodings and the
//! fast path for balanced instances.

use crate::instance::Mass;
use std::fmt;

/// Error returned when supply and demand totals differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnbalancedTotals {
    pub supply: i64,
    pub demand: i64,
}

impl fmt::Display for UnbalancedTotals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unbalanced totals: supply {} vs demand {}", self.supply, self.demand)
    }
}

impl std::error::Error for UnbalancedTotals {}

/// Two-pointer greedy allocation for a balanced problem: ship
/// `min(remaining supply, remaining demand)` from the current source to
/// the current sink and advance whichever ran out. For coordinate-sorted
/// entities the result is optimal, allocations never cross and every sink
/// between a source's first and last is fully used.
///
/// Zero masses are allowed and skipped without emitting triples; runs in
/// `O(n + m)`.
pub fn solve_balanced(
    supplies: &[Mass],
    demands: &[Mass],
) -> Result<Vec<(usize, usize, Mass)>, UnbalancedTotals> {
    let total_supply: i64 = supplies.iter().sum();
    let total_demand: i64 = demands.iter().sum();
    if total_supply != total_demand {
        return Err(UnbalancedTotals { supply: total_supply, demand: total_demand });
    }

    let mut out = Vec::new();
    let mut i = 0;
    let mut j = 0;
    let mut supply_left = supplies.first().copied().unwrap_or(0);
    let mut demand_left = demands.first().copied().unwrap_or(0);
    while i < supplies.len() && j < demands.len() {
        if supply_left == 0 {
            i += 1;
            if i < supplies.len() {
                supply_left = supplies[i];
            }
            continue;
        }
        if demand_left == 0 {
            j += 1;
            if j < demands.len() {
                demand_left = demands[j];
            }
            continue;
        }
        let amount = supply_left.min(demand_left);
        out.push((i, j, amount));
        supply_left -= amount;
        demand_left -= amount;
    }
    Ok(out)
}
