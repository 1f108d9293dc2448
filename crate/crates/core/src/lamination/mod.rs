//! Laminations carried by a branched surface, built in stages: Cantor
//! products on the collar of the branch locus, regluing along chains of
//! disks, extension over non-disk branches and finally over the cores of
//! the cycles. Every stage is recorded as a step of a certificate that can
//! be re-checked independently.

mod annulus;
mod certificate;
mod collar;
mod pipeline;

use thiserror::Error;

use crate::complex::{DecomposeError, SectorId, SurgeryError};
use crate::holonomy::HoloError;

pub use annulus::{
    moving_intervals, random_annulus_lamination, reglue_to_circles, restore, AnnulusLamination,
    CutRecord, FiberPiece, SpiralAnnotation,
};
pub use certificate::{
    check_certificate, mutate_step_field, AssumptionLedger, CheckReport, CycleCase, CycleData,
    LaminationCertificate, NondiskCase, Step, StepNode, Witness, CERTIFICATE_FORMAT, VERDICT,
};
pub use collar::{
    build_collar, collar_lamination, covers_all_fibers, disk_track, induced_lamination,
    AttachmentPattern, BoundaryTrainTrack, CollarBlock, CollarComplex, CollarComponent,
    CollarGluing, CollarLamination, CollarPiece, SwitchDirection, Tail,
};
pub use pipeline::{
    build_lamination_certificate, classify_cycle, run_chain_pipeline, run_cycle_pipeline,
    ChainRun,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LamError {
    #[error("invalid complex: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("sink disks present: {0:?}")]
    SinkDisk(Vec<SectorId>),
    #[error("missing assertions: {}", .0.join(", "))]
    MissingAssertions(Vec<String>),
    #[error("unknown sector {0}")]
    UnknownSector(SectorId),
    #[error("bad fiber set: {0}")]
    BadFiberSet(String),
    #[error("the fiber over the puncture of {disk} (arc {position}) does not meet the track in a single point")]
    PunctureNotSingle { disk: SectorId, position: usize },
    #[error("step at {disk} modifies the track of {target}, which was already processed")]
    ChainOrder { disk: SectorId, target: SectorId },
    #[error("cycle through {0} has unknown side flags")]
    UnknownSides(SectorId),
    #[error("sector {0} has unknown orientability")]
    UnknownOrientability(SectorId),
    #[error("incoherent spiral directions on the cycle through {0}")]
    IncoherentSpiral(SectorId),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
    #[error(transparent)]
    Holonomy(#[from] HoloError),
    #[error("certificate rejected: {0}")]
    Rejected(String),
}
