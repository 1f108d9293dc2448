//! The two local splittings, written as rewrites of slot data at one edge.
//!
//! A site is a locus edge `e` with sink sheet `K` and source sheets `a`, `b`.
//! The move picks one source as the moving sheet `S`; the other source `P`
//! must already be safe. `K` plays the middle sheet: a move whose middle
//! sheet is safe changes nothing closure could not already reach, so it is
//! unnecessary and refused.
//!
//! Kind 1, `S` slides on the safe region. In the picture the cusp where `S`
//! joins the `P`/`K` sheet is pushed back over `P`, so afterwards `P` is the
//! one-sheeted side of `e` and both `S` and `K` lie on its two-sheeted side.
//! `S` then has an arc pointing out of it and interior to the region.
//!
//! Kind 2, `S` and the safe sheet become one branch. The cusp at `e` is
//! unzipped: `K` comes free along `e` and the two source sheets, which run
//! side by side there, are glued into one sector. When `S` and `P` were
//! already the same sector this closes up a pair of boundary circuits.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::complex::{
    unzip_edge, BoundaryEntry, BranchedSurfaceComplex, EdgeId, Occurrence, SectorId, Slot,
    SurgeryError,
};

use super::region::{check_ids, expand_safe_region, is_safe_region, Region};
use super::SplitError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitKind {
    Slide,
    Merge,
}

impl SplitKind {
    pub fn number(self) -> u8 {
        match self {
            SplitKind::Slide => 1,
            SplitKind::Merge => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(SplitKind::Slide),
            2 => Some(SplitKind::Merge),
            _ => None,
        }
    }
}

/// Which source slot of the edge holds the moving sheet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourcePick {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Necessity {
    Necessary,
    Unnecessary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitMove {
    pub kind: SplitKind,
    pub edge: EdgeId,
    /// `None` picks the first source whose partner is safe, preferring a
    /// moving sheet outside the region.
    pub pick: Option<SourcePick>,
}

impl fmt::Display for SplitMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "split {} @ {}", self.kind.number(), self.edge)?;
        match self.pick {
            Some(SourcePick::A) => write!(f, " a"),
            Some(SourcePick::B) => write!(f, " b"),
            None => Ok(()),
        }
    }
}

impl FromStr for SplitMove {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, String> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let (kind, edge, pick) = match words[..] {
            ["split", k, "@", e] => (k, e, None),
            ["split", k, "@", e, p] => (k, e, Some(p)),
            _ => return Err("expected `split <kind> @ <edge> [a|b]`".into()),
        };
        let kind = kind
            .parse::<u8>()
            .ok()
            .and_then(SplitKind::from_number)
            .ok_or_else(|| format!("unknown split kind `{kind}`"))?;
        let edge = edge.parse::<EdgeId>()?;
        let pick = match pick {
            None => None,
            Some("a") => Some(SourcePick::A),
            Some("b") => Some(SourcePick::B),
            Some(other) => return Err(format!("orientation must be `a` or `b`, got `{other}`")),
        };
        Ok(SplitMove { kind, edge, pick })
    }
}

/// The three sheets of a site once the pick is resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Site {
    pub edge: EdgeId,
    pub middle: Occurrence,
    pub moving: Occurrence,
    pub partner: Occurrence,
}

pub fn resolve_site(b: &BranchedSurfaceComplex, region: &Region, m: &SplitMove) -> Result<Site, SplitError> {
    check_ids(b, region)?;
    let e = b.edges.get(&m.edge).ok_or(SplitError::UnknownEdge(m.edge))?;
    let [a, c] = e.sources;
    let site = |moving: Occurrence, partner: Occurrence| Site { edge: m.edge, middle: e.sink, moving, partner };
    let fits = |s: &Site| region.contains(&s.partner.sector);
    let chosen = match m.pick {
        Some(SourcePick::A) => Some(site(a, c)).filter(fits),
        Some(SourcePick::B) => Some(site(c, a)).filter(fits),
        None => {
            let options: Vec<Site> = [site(a, c), site(c, a)].into_iter().filter(fits).collect();
            options.iter().find(|s| !region.contains(&s.moving.sector)).or(options.first()).copied()
        }
    };
    chosen.ok_or_else(|| SplitError::SiteMismatch {
        edge: m.edge,
        reason: "no source sheet at this edge has its partner in the safe region".into(),
    })
}

pub fn classify_move(b: &BranchedSurfaceComplex, region: &Region, m: &SplitMove) -> Result<Necessity, SplitError> {
    let site = resolve_site(b, region, m)?;
    Ok(if region.contains(&site.middle.sector) { Necessity::Unnecessary } else { Necessity::Necessary })
}

/// A move's effect: the new complex, the grown region and where each old
/// sector went.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitOutcome {
    pub complex: BranchedSurfaceComplex,
    pub region: Region,
    pub image: BTreeMap<SectorId, SectorId>,
}

fn slot_mut(b: &mut BranchedSurfaceComplex, o: Occurrence) -> &mut BoundaryEntry {
    &mut b.sectors.get_mut(&o.sector).expect("site sector").boundary_circuits[o.circuit][o.position]
}

fn set_slot(entry: &mut BoundaryEntry, to: Slot) {
    if let BoundaryEntry::Arc { slot, .. } = entry {
        *slot = to;
    }
}

pub fn apply_split_move(
    b: &BranchedSurfaceComplex,
    region: &Region,
    m: &SplitMove,
) -> Result<SplitOutcome, SplitError> {
    let report = is_safe_region(b, region)?;
    if !report.is_safe() {
        return Err(SplitError::NotSafe(report.violators()));
    }
    let site = resolve_site(b, region, m)?;
    if region.contains(&site.middle.sector) {
        return Err(SplitError::Unnecessary { edge: m.edge, middle: site.middle.sector });
    }
    let (complex, image): (_, BTreeMap<SectorId, SectorId>) = match m.kind {
        SplitKind::Slide => {
            let mut out = b.clone();
            let partner_slot = b.entry(site.partner).and_then(BoundaryEntry::slot).expect("site slot");
            set_slot(slot_mut(&mut out, site.partner), Slot::Sink);
            set_slot(slot_mut(&mut out, site.middle), partner_slot);
            out.rebuild_occurrences();
            let image = b.sectors.keys().map(|s| (*s, *s)).collect();
            (out, image)
        }
        SplitKind::Merge => {
            let (out, outcome) = unzip_edge(b, m.edge, site.middle).map_err(|err| match err {
                SurgeryError::WouldCreateSphere { edge, sector } => SplitError::WouldCreateSphere { edge, sector },
                other => SplitError::Surgery(other),
            })?;
            let image = b.sectors.keys().map(|s| (*s, outcome.image(*s))).collect();
            (out, image)
        }
    };
    let problems = complex.validate();
    if !problems.is_empty() {
        return Err(SplitError::SiteMismatch {
            edge: m.edge,
            reason: problems.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
        });
    }
    let carried: Region = region.iter().map(|s| image[s]).collect();
    let after = is_safe_region(&complex, &carried)?;
    if !after.is_safe() {
        return Err(SplitError::UnsafeResult(after.violators()));
    }
    let grown = expand_safe_region(&complex, &carried)?;
    Ok(SplitOutcome { complex, region: grown, image })
}
