//! Exact combinatorics of branched surfaces: sink-disk and removable-disk
//! detection, efficiency reduction, chain and cycle decomposition,
//! interval holonomy, boundary lamination certificates and safe-region
//! splitting.

pub mod complex;
pub mod holonomy;
pub mod io;
pub mod lamination;
pub mod splitting;
