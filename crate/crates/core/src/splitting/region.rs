use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::complex::{find_bubble_candidates, BoundaryEntry, BranchedSurfaceComplex, EdgeId, SectorId, Slot};

use super::SplitError;

/// A set of sectors of one complex.
pub type Region = BTreeSet<SectorId>;

/// Sectors of a candidate region that break one of the two safety
/// conditions. Empty iff the region is safe.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyReport {
    /// Disks whose every boundary arc points inward.
    pub inward_disks: Vec<SectorId>,
    /// Non-disk sectors pointing inward everywhere with no asserted essential curve.
    pub inessential: Vec<SectorId>,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.inward_disks.is_empty() && self.inessential.is_empty()
    }

    pub fn violators(&self) -> Vec<SectorId> {
        let mut v: Vec<_> = self.inward_disks.iter().chain(&self.inessential).copied().collect();
        v.sort();
        v
    }
}

pub(crate) fn check_ids(b: &BranchedSurfaceComplex, region: &Region) -> Result<(), SplitError> {
    match region.iter().find(|s| !b.sectors.contains_key(s)) {
        Some(s) => Err(SplitError::UnknownSector(*s)),
        None => Ok(()),
    }
}

/// An edge lies in the interior of the region when the region holds its
/// sink sheet and at least one source sheet: locally it is then a smooth
/// sheet or a full branch arc.
pub fn arc_is_interior(b: &BranchedSurfaceComplex, region: &Region, edge: EdgeId) -> bool {
    b.edge_sectors(edge)
        .is_some_and(|(k, x, y)| region.contains(&k) && (region.contains(&x) || region.contains(&y)))
}

/// Direction of one boundary entry relative to the region: arcs on the
/// frontier carry the normal pointing into the region, interior arcs carry
/// their branch direction. Free boundary never points inward.
fn points_inward(b: &BranchedSurfaceComplex, region: &Region, entry: &BoundaryEntry) -> bool {
    match entry {
        BoundaryEntry::Free => false,
        BoundaryEntry::Arc { edge, slot, .. } => !arc_is_interior(b, region, *edge) || *slot == Slot::Sink,
    }
}

pub fn is_safe_region(b: &BranchedSurfaceComplex, region: &Region) -> Result<SafetyReport, SplitError> {
    check_ids(b, region)?;
    let mut report = SafetyReport::default();
    for id in region {
        let s = &b.sectors[id];
        if !s.entries().all(|e| points_inward(b, region, e)) {
            continue;
        }
        if s.is_disk() {
            report.inward_disks.push(*id);
        } else if !s.essential_curve {
            report.inessential.push(*id);
        }
    }
    Ok(report)
}

/// Order in which qualifying arcs are absorbed during closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcOrder {
    LowestFirst,
    HighestFirst,
}

/// An arc qualifies when it is interior, or on the frontier with branch
/// direction into the region. Both amount to the sink sheet lying in the
/// region; absorbing it adds whichever source sheets are missing.
fn qualifying(b: &BranchedSurfaceComplex, region: &Region, edge: EdgeId) -> Option<[SectorId; 2]> {
    let (k, x, y) = b.edge_sectors(edge)?;
    (region.contains(&k) && !(region.contains(&x) && region.contains(&y))).then_some([x, y])
}

/// Closure: absorb every branch incident to a qualifying arc until none is left.
pub fn expand_safe_region_ordered(
    b: &BranchedSurfaceComplex,
    region: &Region,
    order: ArcOrder,
) -> Result<Region, SplitError> {
    let before = is_safe_region(b, region)?;
    if !before.is_safe() {
        return Err(SplitError::NotSafe(before.violators()));
    }
    let mut out = region.clone();
    loop {
        let mut edges = b.edges.keys();
        let pick = |e: &&EdgeId| qualifying(b, &out, **e).is_some();
        let next = match order {
            ArcOrder::LowestFirst => edges.find(pick),
            ArcOrder::HighestFirst => edges.rev().find(pick),
        };
        let Some(&edge) = next else { break };
        out.extend(qualifying(b, &out, edge).expect("picked"));
    }
    let after = is_safe_region(b, &out)?;
    if !after.is_safe() {
        return Err(SplitError::NotSafe(after.violators()));
    }
    Ok(out)
}

pub fn expand_safe_region(b: &BranchedSurfaceComplex, region: &Region) -> Result<Region, SplitError> {
    expand_safe_region_ordered(b, region, ArcOrder::LowestFirst)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LaminarVerdict {
    /// The closure covers every sector and every external hypothesis is asserted.
    LaminarConditional { region: Region },
    Incomplete { region: Region, uncovered: Region, missing: Vec<String> },
    NotSafe { violators: Vec<SectorId> },
}

impl LaminarVerdict {
    pub fn is_laminar(&self) -> bool {
        matches!(self, LaminarVerdict::LaminarConditional { .. })
    }
}

pub fn certify_laminar(b: &BranchedSurfaceComplex, region: &Region) -> Result<LaminarVerdict, SplitError> {
    let report = is_safe_region(b, region)?;
    if !report.is_safe() {
        return Ok(LaminarVerdict::NotSafe { violators: report.violators() });
    }
    let grown = expand_safe_region(b, region)?;
    let uncovered: Region = b.sectors.keys().filter(|s| !grown.contains(s)).copied().collect();
    let mut missing: Vec<String> = b.flags.missing().into_iter().map(String::from).collect();
    for (x, y) in find_bubble_candidates(b) {
        if !b.trivial_bubbles.contains(&(x, y)) {
            missing.push(format!("trivial_bubble {x} {y}"));
        }
    }
    Ok(if uncovered.is_empty() && missing.is_empty() {
        LaminarVerdict::LaminarConditional { region: grown }
    } else {
        LaminarVerdict::Incomplete { region: grown, uncovered, missing }
    })
}
