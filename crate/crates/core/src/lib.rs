//! Desk-scale combinatorics around chromatic incompactness.
//!
//! The crate connects four kinds of objects and keeps every connection
//! machine-checkable at small sizes:
//!
//! * finite [`graph::Graph`]s with exact chromatic and colouring-number
//!   solvers,
//! * [`relsys::RelationSystem`]s with the freeness hierarchy (free,
//!   strongly free, weakly free, λ-free),
//! * [`family::Family`]s of functions with transversals and free
//!   decompositions,
//! * labelled [`model::Structure`]s whose successor graphs tie colourings
//!   back to freeness witnesses, including a CEGAR-style chromatic probe.
//!
//! The [`reduce`] module carries objects between these worlds and the
//! [`inc`] module checks incompactness certificates for graph chains.
//!
//! Every decision procedure is exact within configured caps and reports
//! `Undecided` instead of guessing when a cap is hit. All searches are
//! deterministic; with the default `parallel` feature, bulk scans run on
//! rayon but aggregate in a fixed order, so results do not depend on the
//! thread count.

pub mod error;
pub mod family;
pub mod graph;
pub mod inc;
pub mod model;
pub mod par;
pub mod reduce;
pub mod relsys;
pub mod verdict;

pub use error::Error;
pub use verdict::Verdict;
