//! Exact anytime enumeration of Pareto fronts for multiobjective
//! combinatorial optimization, via box decomposition of the objective space.
//!
//! The search maintains a set of half-open boxes covering the region where
//! nondominated points can still exist. Each iteration solves a weighted
//! augmented Tchebycheff ILP for one box: an optimum below one yields a new
//! nondominated point and the boxes are split around it, otherwise the box
//! is discarded. Run long enough this enumerates the complete Pareto front;
//! interrupted at any time it returns an exact, well-spread subset.
//!
//! Modules:
//! - [`geometry`]: points, boxes, dominance, splits, priorities.
//! - [`tchebycheff`]: the scalarized single-objective program.
//! - [`ilp`]: exact branch-and-bound solver plus an enumeration oracle.
//! - [`problems`]: instance model, generators, file formats, Pareto oracle.
//! - [`engine`]: the anytime search loops (alternating-direction partition
//!   search and the full-split baseline).
//! - [`metrics`]: quality indicators and trace evaluation at time cuts.

pub mod engine;
pub mod geometry;
pub mod ilp;
pub mod metrics;
pub mod problems;
pub mod tchebycheff;

pub use geometry::{Dominance, Point, ScalingBounds, SearchBox};
pub use problems::{FrontFile, ProblemClass, ProblemInstance};
