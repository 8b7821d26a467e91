//! Exact solver for one-dimensional unbalanced optimal transport.
//!
//! Sources with supplies and sinks with demands sit on the real line;
//! every unit of supply must ship, sinks may be left partially unfilled,
//! and the goal is to minimize the total ground cost, by default the
//! absolute coordinate distance. All arithmetic is exact signed integer
//! arithmetic, so solver outputs can be compared bit for bit.
//!
//! The crate provides three solvers over the same [`Instance`] model:
//!
//! * [`fast::solve`] - a sweep over positional encodings with an ordered
//!   event queue, `O((n + m) log(n + m))` for the absolute cost model;
//! * [`reference::solve_ssp_baseline`] - a direct successive-shortest-path
//!   solver on the line, `O(n m (n + m))`;
//! * [`reference::solve_mincostflow_oracle`] - a generic min-cost-flow
//!   solver on the bipartite graph, for desk-scale cross-checks.
//!
//! # Capacity contract
//!
//! Masses and coordinates are `i64`. Construction rejects instances whose
//! prefix sums overflow `i64` or whose worst-case unit cost times total
//! demand (with an 8x margin for internal accumulations) overflows `i128`.
//! Within those bounds every computation is exact.

pub mod balanced;
pub mod encoding;
pub mod fast;
pub mod instance;
pub mod reference;

pub use encoding::{
    check_monotonic, check_no_hole, decode, encode, flow_cost, verify_flow, EncodingError, Flow,
    FlowError, FlowTriple, PositionalEncoding,
};
pub use instance::{build_instance, BuildError, Coord, Cost, CostModel, Instance, Mass};
