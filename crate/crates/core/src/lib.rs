//! Seller-optimal screening outcomes and the consumer-surplus/profit
//! frontier over market compositions.
//!
//! The crate computes, for any buyer-value distribution (stored as its
//! lower quantile) and any convex quality-cost model:
//!
//! * the seller's ironed screening outcome (menu, consumer surplus,
//!   profit, total surplus), via the revenue-curve concavification;
//! * the upstream optimal-market-composition problem for a welfare weight
//!   k on consumer surplus, solved by a reverse-time free-boundary ODE
//!   integration for general convex costs;
//! * closed-form engines for the quadratic, constant-elasticity, linear
//!   (posted-price) and fixed-inventory special cases;
//! * the consumer-surplus/profit Pareto frontier, its radial hull,
//!   segmentation experiments, and mean-preserving-spread generators;
//! * an independent brute-force oracle over discretized monotone
//!   virtual-value profiles that cross-validates the solver.

pub mod closedform;
pub mod config;
pub mod corpus;
pub mod cost;
pub mod error;
pub mod fbvp;
pub mod frontier;
pub mod inventory;
pub mod ironing;
pub mod num;
pub mod oracle;
pub mod piecewise;
pub mod screening;
pub mod types;
pub mod verify;

pub use cost::{make_cost, CostKind, CostModel};
pub use error::{Error, Result};
pub use piecewise::{
    AnalyticForm, QuantileFn, QuantileJson, Segment, SegmentKind, VirtualValueProfile,
};
pub use types::{PayoffPoint, WelfareWeight};
