//! Executable set-valued measure theory on finite spaces.
//!
//! The crate provides, bottom to top:
//!
//! - [`convex`]: exact arithmetic and metric geometry on nonempty compact
//!   convex subsets of the line and the plane (Minkowski sums, Hausdorff
//!   distance, the support-function embedding).
//! - [`space`]: finite measurable spaces and the partition-refinement
//!   lattice over which integration nets are evaluated.
//! - [`setfn`]: scalar and convex-body-valued set functions with
//!   classification, variation measures, exhaustions, and related lemmas.
//! - [`gould`]: Gould integration — Riemann-type sums over the partition
//!   net, integrability decisions, integral functions, total measurability,
//!   oscillation bounds, and refinement-chain envelopes.
//! - [`rn`]: the Radon-Nikodym engine — approximate ranges, exhaustivity
//!   checks, the staged derivative construction, and end-to-end
//!   verification.
//! - [`scenario`], [`runner`], [`report`], [`audit`]: batch interface —
//!   JSON scenarios in, JSON/CSV reports out, plus a seeded randomized
//!   property-suite runner.
//!
//! Every value is immutable after construction and every operation is pure,
//! so all types can be shared freely across threads.
//!
//! Start with the `examples/` directory: each file is a runnable tour of one
//! capability (`cargo run --example bodies`, `--example radon_nikodym`, ...).

pub mod audit;
pub mod convex;
pub mod gould;
pub mod rat;
pub mod report;
pub mod rn;
pub mod runner;
pub mod scenario;
pub mod setfn;
pub mod space;

pub use convex::{ConvexBody, ConvexError, Pt2, SupportFn};

pub use rat::{Mag, Rat};


pub use setfn::{Flags, MultiSetFn, ScalarSetFn};
pub use space::{FiniteSpace, Guards, MSet, Partition, TaggedPartition};
