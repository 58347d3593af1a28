//! Library half of the `incompact` binary: brute-force oracles, the
//! report envelope, the cross-check suite and the end-to-end demo. The
//! binary is a thin argument layer over these; the integration tests
//! call them directly.

pub mod demo;
pub mod oracle;
pub mod report;
pub mod suite;
