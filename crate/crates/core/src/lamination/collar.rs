//! The collar `P(L')` around the branch locus and the boundary train tracks
//! of the disk branches.

use serde::{Deserialize, Serialize};

use crate::complex::{BoundaryEntry, BranchedSurfaceComplex, EdgeId, SectorId, Side, Slot};
use crate::holonomy::rational::{self, int, q, Q};
use crate::holonomy::PlMap;

use super::annulus::{AnnulusLamination, FiberPiece};
use super::LamError;

/// How a merging sheet meets `∂D × I` along one arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttachmentPattern {
    Above,
    Below,
    /// Side not recorded; the tail may come from either.
    Straddle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchDirection {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tail {
    pub position: usize,
    pub pattern: AttachmentPattern,
    pub direction: SwitchDirection,
}

/// The track `D^B ∩ ∂N_B(D)`: the boundary circle of a disk, cut into one
/// position per boundary arc, with a tail at every arc where the branch
/// direction points into the disk. The puncture is the midpoint of the arc
/// at `puncture`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryTrainTrack {
    pub disk: SectorId,
    pub circle_len: usize,
    pub tails: Vec<Tail>,
    pub puncture: usize,
}

impl BoundaryTrainTrack {
    /// The fiber over the puncture meets the track once exactly when no tail
    /// attaches along the punctured arc.
    pub fn check_puncture(&self) -> Result<(), LamError> {
        if self.puncture >= self.circle_len || self.tails.iter().any(|t| t.position == self.puncture) {
            return Err(LamError::PunctureNotSingle { disk: self.disk, position: self.puncture });
        }
        Ok(())
    }

    pub fn switch_directions_coherent(&self) -> bool {
        self.tails.windows(2).all(|w| w[0].direction == w[1].direction)
    }
}

/// Collar piece around one locus edge: the through sheet continues across
/// the edge, the merge sheet joins it on the sink side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollarPiece {
    pub edge: EdgeId,
    pub sink: SectorId,
    pub through: SectorId,
    pub merge: SectorId,
    /// Side on which the merge sheet joins.
    pub merge_side: Side,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollarComponent {
    pub sector: SectorId,
    pub track: Option<BoundaryTrainTrack>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollarComplex {
    pub pieces: Vec<CollarPiece>,
    /// One simple arc of the collar's branch locus per piece; crossings of
    /// the original locus are resolved into separate arcs.
    pub locus_arcs: Vec<EdgeId>,
    pub components: Vec<CollarComponent>,
}

impl CollarComplex {
    pub fn tracks(&self) -> impl Iterator<Item = &BoundaryTrainTrack> {
        self.components.iter().filter_map(|c| c.track.as_ref())
    }

    pub fn track(&self, disk: SectorId) -> Option<&BoundaryTrainTrack> {
        self.tracks().find(|t| t.disk == disk)
    }
}

fn pattern(side: Side) -> AttachmentPattern {
    match side {
        Side::Left => AttachmentPattern::Above,
        Side::Right => AttachmentPattern::Below,
        Side::Unknown => AttachmentPattern::Straddle,
    }
}

fn direction(side: Side) -> SwitchDirection {
    match side {
        Side::Right => SwitchDirection::Backward,
        _ => SwitchDirection::Forward,
    }
}

/// Track of a disk; the puncture goes on the first arc of `out_edge`, or on
/// the first outward arc when none is given.
pub fn disk_track(
    b: &BranchedSurfaceComplex,
    disk: SectorId,
    out_edge: Option<EdgeId>,
) -> Result<BoundaryTrainTrack, LamError> {
    let s = b.sector(disk).ok_or(LamError::UnknownSector(disk))?;
    let circuit = s.boundary_circuits.first().cloned().unwrap_or_default();
    let mut tails = Vec::new();
    let mut puncture = None;
    for (i, e) in circuit.iter().enumerate() {
        match e {
            BoundaryEntry::Arc { slot: Slot::Sink, side, .. } => {
                tails.push(Tail { position: i, pattern: pattern(*side), direction: direction(*side) });
            }
            BoundaryEntry::Arc { edge, .. } if puncture.is_none() => {
                if out_edge.map_or(true, |o| o == *edge) {
                    puncture = Some(i);
                }
            }
            _ => {}
        }
    }
    // A disk without an outward arc keeps its puncture past the circle and
    // fails the puncture check if it is ever reglued.
    Ok(BoundaryTrainTrack { disk, circle_len: circuit.len(), tails, puncture: puncture.unwrap_or(circuit.len()) })
}

pub fn build_collar(b: &BranchedSurfaceComplex) -> Result<CollarComplex, LamError> {
    let violations = b.validate();
    if !violations.is_empty() {
        return Err(LamError::Invalid(violations.iter().map(|v| v.to_string()).collect()));
    }
    let mut pieces = Vec::new();
    for (id, e) in &b.edges {
        let slot = |o| b.entry(o).and_then(BoundaryEntry::slot);
        let [a, c] = e.sources;
        let (through, merge) = if slot(a) == Some(Slot::SourceMerge) { (c, a) } else { (a, c) };
        let merge_side = b.entry(merge).and_then(BoundaryEntry::side).unwrap_or(Side::Unknown);
        pieces.push(CollarPiece {
            edge: *id,
            sink: e.sink.sector,
            through: through.sector,
            merge: merge.sector,
            merge_side,
        });
    }
    let locus_arcs = pieces.iter().map(|p| p.edge).collect();
    let mut components = Vec::new();
    for (id, s) in &b.sectors {
        let track = if s.is_disk() { Some(disk_track(b, *id, None)?) } else { None };
        components.push(CollarComponent { sector: *id, track });
    }
    Ok(CollarComplex { pieces, locus_arcs, components })
}

/// A Cantor block in one sheet of one collar piece.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollarBlock {
    pub edge: EdgeId,
    pub sheet: String,
    #[serde(with = "rational::text")]
    pub lo: Q,
    #[serde(with = "rational::text")]
    pub hi: Q,
}

/// Affine, increasing identification of the merge block with its image in
/// the sink fiber.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollarGluing {
    pub edge: EdgeId,
    #[serde(with = "rational::text")]
    pub to_lo: Q,
    #[serde(with = "rational::text")]
    pub to_hi: Q,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollarLamination {
    pub blocks: Vec<CollarBlock>,
    pub gluings: Vec<CollarGluing>,
}

/// Cantor-set products on every collar piece. On the sink side the fiber
/// carries the through block in one third and the merge block in the
/// opposite third, leaving the cusp between them empty.
pub fn collar_lamination(c: &CollarComplex) -> CollarLamination {
    let mut out = CollarLamination::default();
    for p in &c.pieces {
        let merge_above = p.merge_side != Side::Right;
        let (through, merge) = if merge_above {
            ((int(-1), q(-1, 3)), (q(1, 3), int(1)))
        } else {
            ((q(1, 3), int(1)), (int(-1), q(-1, 3)))
        };
        out.blocks.push(CollarBlock { edge: p.edge, sheet: "through".into(), lo: through.0, hi: through.1 });
        out.blocks.push(CollarBlock { edge: p.edge, sheet: "merge".into(), lo: int(-1), hi: int(1) });
        out.gluings.push(CollarGluing { edge: p.edge, to_lo: merge.0, to_hi: merge.1 });
    }
    out
}

/// Every sheet of every piece meets a block: the through sheet on both
/// sides, the merge sheet in its own coordinate, and the sink fiber in the
/// through block and the glued image, which must be disjoint.
pub fn covers_all_fibers(c: &CollarComplex, lam: &CollarLamination) -> bool {
    c.pieces.iter().all(|p| {
        let through = lam.blocks.iter().find(|b| b.edge == p.edge && b.sheet == "through");
        let merge = lam.blocks.iter().find(|b| b.edge == p.edge && b.sheet == "merge");
        let glue = lam.gluings.iter().find(|g| g.edge == p.edge);
        match (through, merge, glue) {
            (Some(t), Some(m), Some(g)) => {
                t.lo < t.hi && m.lo < m.hi && g.to_lo < g.to_hi && (t.hi < g.to_lo || g.to_hi < t.lo)
            }
            _ => false,
        }
    })
}

/// The boundary lamination a disk track inherits from the collar: one
/// Cantor block whose leaves are pushed once around by every tail.
pub fn induced_lamination(track: &BoundaryTrainTrack) -> AnnulusLamination {
    let mut r = PlMap::identity();
    for (k, t) in track.tails.iter().enumerate() {
        let depth = q(1, 2 + k as i64);
        let push = match t.pattern {
            AttachmentPattern::Above => PlMap::through(int(0), depth),
            AttachmentPattern::Below => PlMap::through(int(0), -depth),
            AttachmentPattern::Straddle => PlMap::through(-depth, int(0)),
        };
        r = push.expect("depth inside the interval").compose(&r);
    }
    let block = FiberPiece::Cantor { lo: int(-1), hi: int(1), label: track.disk.to_string() };
    AnnulusLamination::new(vec![block], r).expect("endpoints fixed")
}
