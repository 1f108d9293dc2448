//! Safe regions and the splittings that grow them.
//!
//! A safe region is a set of sectors in which no disk has all its boundary
//! pointing inward and every non-disk pointing inward everywhere carries an
//! asserted essential curve. Closing a safe region under absorption of the
//! branches around qualifying arcs keeps it safe; once it covers the whole
//! complex, the complex is laminar up to the recorded external hypotheses.

mod moves;
mod region;
mod script;

use thiserror::Error;

use crate::complex::{EdgeId, SectorId, SurgeryError};

pub use moves::{
    apply_split_move, classify_move, resolve_site, Necessity, Site, SourcePick, SplitKind,
    SplitMove, SplitOutcome,
};
pub use region::{
    arc_is_interior, certify_laminar, expand_safe_region, expand_safe_region_ordered,
    is_safe_region, ArcOrder, LaminarVerdict, Region, SafetyReport,
};
pub use script::{parse_split_script, run_split_script, Snapshot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitError {
    #[error("unknown sector {0}")]
    UnknownSector(SectorId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("not a safe region; violating sectors: {0:?}")]
    NotSafe(Vec<SectorId>),
    #[error("site {edge} does not match: {reason}")]
    SiteMismatch { edge: EdgeId, reason: String },
    #[error("splitting at {edge} is unnecessary: middle sheet {middle} is already safe")]
    Unnecessary { edge: EdgeId, middle: SectorId },
    #[error("splitting at {edge} would close sector {sector} into a sphere")]
    WouldCreateSphere { edge: EdgeId, sector: SectorId },
    #[error("carried region is no longer safe; violating sectors: {0:?}")]
    UnsafeResult(Vec<SectorId>),
    #[error(transparent)]
    Surgery(SurgeryError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("move {index}: {error}")]
    Abort { index: usize, error: Box<SplitError> },
}
