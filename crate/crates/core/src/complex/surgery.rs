//! Deleting removable disks, collapsing bubbles and the efficiency sequence.
//!
//! All three reduce to one primitive: drop a locus edge and glue the two
//! sheets that still meet along it. Identifying two boundary arcs removes
//! one edge and one vertex per merged vertex class, so the Euler
//! characteristic changes by `1 - merges`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::detect::{find_bubble_candidates, find_removable_disks};
use super::{
    ordered_pair, BoundaryEntry, BranchedSurfaceComplex, EdgeEnd, EdgeEnds, EdgeId, LocusVertex,
    Occurrence, Orientability, Sector, SectorId, Side, VertexKind,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurgeryError {
    #[error("sector {0} is not a removable disk")]
    NotRemovable(SectorId),
    #[error("({0}, {1}) is not a bubble candidate")]
    NotBubble(SectorId, SectorId),
    #[error("bubble ({0}, {1}) has not been confirmed trivial")]
    UnconfirmedBubble(SectorId, SectorId),
    #[error("gluing along {edge} would close sector {sector} into a sphere")]
    WouldCreateSphere { edge: EdgeId, sector: SectorId },
    #[error("edge {0} does not have exactly two remaining sheets to glue")]
    NotGluable(EdgeId),
}

/// Bookkeeping of one surgery.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpliceOutcome {
    /// `(absorbed, survivor)` for every pair of distinct sectors glued.
    pub merged: Vec<(SectorId, SectorId)>,
    /// Sectors whose orientability became unknown because a self-gluing
    /// involved an unknown side flag.
    pub unknown_orientation: Vec<SectorId>,
}

impl SpliceOutcome {
    /// Where `id` ended up after all merges.
    pub fn image(&self, id: SectorId) -> SectorId {
        let mut cur = id;
        for (from, to) in &self.merged {
            if *from == cur {
                cur = *to;
            }
        }
        cur
    }
}

/// Finds the current two occurrences of `edge` in circuits.
fn remaining_occurrences(b: &BranchedSurfaceComplex, edge: EdgeId) -> Vec<Occurrence> {
    let mut out = Vec::new();
    for (sid, s) in &b.sectors {
        for (ci, c) in s.boundary_circuits.iter().enumerate() {
            for (pi, e) in c.iter().enumerate() {
                if e.edge() == Some(edge) {
                    out.push(Occurrence::new(*sid, ci, pi));
                }
            }
        }
    }
    out
}

/// Rotation of `c` starting just after position `p`, without `c[p]`.
fn after(c: &[BoundaryEntry], p: usize) -> Vec<BoundaryEntry> {
    c[p + 1..].iter().chain(&c[..p]).copied().collect()
}

/// Tiny union-find over boundary vertices labelled `(circuit tag, index)`.
struct VertexClasses {
    parent: BTreeMap<(u8, usize), (u8, usize)>,
}

impl VertexClasses {
    fn new() -> Self {
        VertexClasses { parent: BTreeMap::new() }
    }

    fn find(&mut self, x: (u8, usize)) -> (u8, usize) {
        let p = *self.parent.entry(x).or_insert(x);
        if p == x {
            x
        } else {
            let r = self.find(p);
            self.parent.insert(x, r);
            r
        }
    }

    /// Returns true when the union merged two distinct classes.
    fn union(&mut self, a: (u8, usize), b: (u8, usize)) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            false
        } else {
            self.parent.insert(ra, rb);
            true
        }
    }
}

/// Endpoints of the arc at position `p` of a circuit of length `len`. The
/// vertex with index `i` sits between entries `i` and `i + 1`.
fn arc_vertices(tag: u8, len: usize, p: usize) -> ((u8, usize), (u8, usize)) {
    ((tag, (p + len - 1) % len), (tag, p))
}

/// Change in Euler characteristic when two boundary arcs are identified:
/// one edge disappears and every merged pair of vertices removes a vertex.
fn euler_change(
    pairs: &[((u8, usize), (u8, usize))],
    vertices: impl IntoIterator<Item = (u8, usize)>,
) -> i64 {
    let mut uf = VertexClasses::new();
    for v in vertices {
        uf.find(v);
    }
    let merges = pairs.iter().filter(|(a, b)| uf.union(*a, *b)).count() as i64;
    1 - merges
}

fn combine_orientability(a: Orientability, b: Orientability) -> Orientability {
    use Orientability::*;
    match (a, b) {
        (NonOrientable, _) | (_, NonOrientable) => NonOrientable,
        (Unknown, _) | (_, Unknown) => Unknown,
        _ => Orientable,
    }
}

/// Removes `edge` and glues the two sheets still meeting along it.
/// Equal side flags on the two occurrences glue orientation-compatibly.
pub(crate) fn splice_edge(
    b: &mut BranchedSurfaceComplex,
    edge: EdgeId,
    outcome: &mut SpliceOutcome,
) -> Result<(), SurgeryError> {
    let occs = remaining_occurrences(b, edge);
    let [p, q] = occs[..] else { return Err(SurgeryError::NotGluable(edge)) };
    let side = |o: Occurrence| b.entry(o).and_then(BoundaryEntry::side).unwrap_or(Side::Unknown);
    let (sp, sq) = (side(p), side(q));
    let compatible = match (sp.sign(), sq.sign()) {
        (Some(x), Some(y)) => Some(x == y),
        _ => None,
    };

    if p.sector != q.sector {
        let x = b.sectors.remove(&p.sector).expect("occurrence sector");
        let y = b.sectors.remove(&q.sector).expect("occurrence sector");
        let cx = &x.boundary_circuits[p.circuit];
        let cy = &y.boundary_circuits[q.circuit];
        let (lx, ly) = (cx.len(), cy.len());
        let (xs, xe) = arc_vertices(0, lx, p.position);
        let (ys, ye) = arc_vertices(1, ly, q.position);
        let delta = euler_change(
            &[(xs, ye), (xe, ys)],
            (0..lx).map(|i| (0, i)).chain((0..ly).map(|i| (1, i))),
        );
        let mut tail = after(cy, q.position);
        if compatible == Some(false) {
            tail.reverse();
        }
        let mut merged = after(cx, p.position);
        merged.extend(tail);
        let mut circuits = Vec::new();
        for (i, c) in x.boundary_circuits.iter().enumerate() {
            if i == p.circuit {
                if !merged.is_empty() {
                    circuits.push(merged.clone());
                }
            } else {
                circuits.push(c.clone());
            }
        }
        for (i, c) in y.boundary_circuits.iter().enumerate() {
            if i != q.circuit {
                circuits.push(c.clone());
            }
        }
        let survivor = p.sector.min(q.sector);
        let absorbed = p.sector.max(q.sector);
        let sector = Sector {
            euler_char: x.euler_char + y.euler_char + delta,
            orientable: combine_orientability(x.orientable, y.orientable),
            essential_curve: x.essential_curve || y.essential_curve,
            boundary_circuits: circuits,
        };
        if sector.euler_char == 2 && sector.boundary_circuits.is_empty() {
            return Err(SurgeryError::WouldCreateSphere { edge, sector: survivor });
        }
        b.sectors.insert(survivor, sector);
        outcome.merged.push((absorbed, survivor));
        b.trivial_bubbles = b
            .trivial_bubbles
            .iter()
            .map(|&(u, v)| {
                let m = |s: SectorId| if s == absorbed { survivor } else { s };
                ordered_pair(m(u), m(v))
            })
            .filter(|(u, v)| u != v)
            .collect();
        return Ok(());
    }

    let sid = p.sector;
    let mut s = b.sectors.remove(&sid).expect("occurrence sector");
    let preserving = compatible.unwrap_or(true);
    let (delta, new_circuits): (i64, Vec<Vec<BoundaryEntry>>) = if p.circuit != q.circuit {
        let cx = &s.boundary_circuits[p.circuit];
        let cy = &s.boundary_circuits[q.circuit];
        let (lx, ly) = (cx.len(), cy.len());
        let (xs, xe) = arc_vertices(0, lx, p.position);
        let (ys, ye) = arc_vertices(1, ly, q.position);
        let delta = euler_change(
            &[(xs, ye), (xe, ys)],
            (0..lx).map(|i| (0, i)).chain((0..ly).map(|i| (1, i))),
        );
        let mut tail = after(cy, q.position);
        if !preserving {
            tail.reverse();
        }
        let mut merged = after(cx, p.position);
        merged.extend(tail);
        let mut circuits = Vec::new();
        for (i, c) in s.boundary_circuits.iter().enumerate() {
            if i == p.circuit {
                if !merged.is_empty() {
                    circuits.push(merged.clone());
                }
            } else if i != q.circuit {
                circuits.push(c.clone());
            }
        }
        (delta, circuits)
    } else {
        let c = &s.boundary_circuits[p.circuit];
        let len = c.len();
        let (lo, hi) = (p.position.min(q.position), p.position.max(q.position));
        let (ls, le) = arc_vertices(0, len, lo);
        let (hs, he) = arc_vertices(0, len, hi);
        let pairs = if preserving { [(ls, he), (le, hs)] } else { [(ls, hs), (le, he)] };
        let delta = euler_change(&pairs, (0..len).map(|i| (0, i)));
        let seg1: Vec<BoundaryEntry> = c[lo + 1..hi].to_vec();
        let seg2: Vec<BoundaryEntry> = c[hi + 1..].iter().chain(&c[..lo]).copied().collect();
        let mut pieces = Vec::new();
        if preserving {
            pieces.extend([seg1, seg2].into_iter().filter(|x| !x.is_empty()));
        } else {
            let mut joined = seg1;
            joined.extend(seg2.into_iter().rev());
            if !joined.is_empty() {
                pieces.push(joined);
            }
        }
        let mut circuits = Vec::new();
        for (i, c) in s.boundary_circuits.iter().enumerate() {
            if i == p.circuit {
                circuits.extend(pieces.iter().cloned());
            } else {
                circuits.push(c.clone());
            }
        }
        (delta, circuits)
    };
    s.euler_char += delta;
    s.boundary_circuits = new_circuits;
    match compatible {
        None => {
            if s.orientable != Orientability::NonOrientable {
                s.orientable = Orientability::Unknown;
                outcome.unknown_orientation.push(sid);
            }
        }
        Some(false) => s.orientable = Orientability::NonOrientable,
        Some(true) => {}
    }
    if s.euler_char == 2 && s.boundary_circuits.is_empty() {
        return Err(SurgeryError::WouldCreateSphere { edge, sector: sid });
    }
    b.sectors.insert(sid, s);
    Ok(())
}

/// Drops the ends of deleted edges from every vertex and repairs valences:
/// four remaining ends keep the crossing, two become a subdivision strand,
/// none deletes the vertex. Odd leftovers (which only arise when circuits
/// and vertices disagree) are re-paired through fresh subdivision vertices.
pub(crate) fn reduce_vertices(b: &mut BranchedSurfaceComplex, deleted: &BTreeSet<EdgeId>) {
    let mut orphans: Vec<EdgeEnd> = Vec::new();
    let ids: Vec<_> = b.vertices.keys().copied().collect();
    for vid in ids {
        let v = &b.vertices[&vid];
        let lost = v.ends().filter(|e| deleted.contains(&e.edge)).count();
        if lost == 0 {
            continue;
        }
        let intact: Vec<[EdgeEnd; 2]> = v
            .strands
            .iter()
            .filter(|s| s.iter().all(|e| !deleted.contains(&e.edge)))
            .copied()
            .collect();
        let loose: Vec<EdgeEnd> = v
            .strands
            .iter()
            .filter(|s| s.iter().any(|e| deleted.contains(&e.edge)))
            .flatten()
            .filter(|e| !deleted.contains(&e.edge))
            .copied()
            .collect();
        match (intact.len(), loose.len()) {
            (0, 0) => {
                b.vertices.remove(&vid);
            }
            (0, 2) => {
                b.vertices.insert(
                    vid,
                    LocusVertex { kind: VertexKind::Subdivision, strands: vec![[loose[0], loose[1]]] },
                );
            }
            (1, _) => {
                b.vertices
                    .insert(vid, LocusVertex { kind: VertexKind::Subdivision, strands: intact });
                orphans.extend(loose);
            }
            _ => {
                b.vertices.remove(&vid);
                orphans.extend(loose);
            }
        }
    }
    for e in deleted {
        b.edges.remove(e);
    }
    orphans.sort();
    for pair in orphans.chunks(2) {
        if let [x, y] = pair {
            let vid = b.next_vertex_id();
            b.vertices
                .insert(vid, LocusVertex { kind: VertexKind::Subdivision, strands: vec![[*x, *y]] });
            for end in [x, y] {
                if let Some(edge) = b.edges.get_mut(&end.edge) {
                    if let EdgeEnds::Arc(ref mut vs) = edge.ends {
                        vs[end.end as usize] = vid;
                    }
                }
            }
        }
    }
}

/// Removes `sector` and glues the remaining sheets along each of its edges.
fn excise(
    b: &BranchedSurfaceComplex,
    sector: SectorId,
) -> Result<(BranchedSurfaceComplex, SpliceOutcome), SurgeryError> {
    let mut out = b.clone();
    let removed = out.sectors.remove(&sector).expect("sector exists");
    out.trivial_bubbles.retain(|(x, y)| *x != sector && *y != sector);
    let mut outcome = SpliceOutcome::default();
    let edges: Vec<EdgeId> = removed.entries().filter_map(BoundaryEntry::edge).collect();
    for e in &edges {
        splice_edge(&mut out, *e, &mut outcome)?;
    }
    reduce_vertices(&mut out, &edges.iter().copied().collect());
    out.rebuild_occurrences();
    Ok((out, outcome))
}

/// Frees the sheet at `detach` from `edge` (its entry becomes free
/// boundary) and glues the two sheets left along the edge.
pub fn unzip_edge(
    b: &BranchedSurfaceComplex,
    edge: EdgeId,
    detach: Occurrence,
) -> Result<(BranchedSurfaceComplex, SpliceOutcome), SurgeryError> {
    let mut out = b.clone();
    let slot = out
        .sectors
        .get_mut(&detach.sector)
        .and_then(|s| s.boundary_circuits.get_mut(detach.circuit))
        .and_then(|c| c.get_mut(detach.position))
        .filter(|e| e.edge() == Some(edge))
        .ok_or(SurgeryError::NotGluable(edge))?;
    *slot = BoundaryEntry::Free;
    let mut outcome = SpliceOutcome::default();
    splice_edge(&mut out, edge, &mut outcome)?;
    reduce_vertices(&mut out, &BTreeSet::from([edge]));
    out.rebuild_occurrences();
    Ok((out, outcome))
}

/// `B - int(S)` for a removable disk `S`.
pub fn delete_removable(
    b: &BranchedSurfaceComplex,
    s: SectorId,
) -> Result<BranchedSurfaceComplex, SurgeryError> {
    delete_removable_traced(b, s).map(|(c, _)| c)
}

pub fn delete_removable_traced(
    b: &BranchedSurfaceComplex,
    s: SectorId,
) -> Result<(BranchedSurfaceComplex, SpliceOutcome), SurgeryError> {
    if !find_removable_disks(b).contains(&s) {
        return Err(SurgeryError::NotRemovable(s));
    }
    excise(b, s)
}

/// Pinches a confirmed trivial bubble: the two disks become one sector,
/// glued to the sink sheet of every edge of their common circuit.
/// `confirmed_trivial` or a recorded confirmation in the complex is required.
pub fn collapse_bubble(
    b: &BranchedSurfaceComplex,
    pair: (SectorId, SectorId),
    confirmed_trivial: bool,
) -> Result<BranchedSurfaceComplex, SurgeryError> {
    let (d1, d2) = ordered_pair(pair.0, pair.1);
    if !find_bubble_candidates(b).contains(&(d1, d2)) {
        return Err(SurgeryError::NotBubble(d1, d2));
    }
    if !confirmed_trivial && !b.trivial_bubbles.contains(&(d1, d2)) {
        return Err(SurgeryError::UnconfirmedBubble(d1, d2));
    }
    // Identifying d2 with d1 leaves d1 as the single source sheet on each
    // shared edge, which is exactly removing d2 and gluing.
    excise(b, d2).map(|(c, _)| c)
}

/// Collapses every recorded trivial bubble that is still a candidate.
pub fn collapse_confirmed_bubbles(
    b: &BranchedSurfaceComplex,
) -> Result<BranchedSurfaceComplex, SurgeryError> {
    let mut cur = b.clone();
    loop {
        let candidates = find_bubble_candidates(&cur);
        let Some(pair) = cur.trivial_bubbles.iter().find(|p| candidates.contains(p)).copied() else {
            return Ok(cur);
        };
        cur = collapse_bubble(&cur, pair, true)?;
    }
}

/// One entry of the efficiency sequence: the complex, and the disk deleted
/// to obtain the next one (`None` on the last entry).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EfficiencyStep {
    pub complex: BranchedSurfaceComplex,
    pub deleted: Option<SectorId>,
}

/// Deletes removable disks (lowest id first) until none remain.
pub fn make_efficient(b: &BranchedSurfaceComplex) -> Result<Vec<EfficiencyStep>, SurgeryError> {
    let mut steps = Vec::new();
    let mut cur = b.clone();
    while let Some(s) = find_removable_disks(&cur).into_iter().next() {
        let next = delete_removable(&cur, s)?;
        steps.push(EfficiencyStep { complex: cur, deleted: Some(s) });
        cur = next;
    }
    steps.push(EfficiencyStep { complex: cur, deleted: None });
    Ok(steps)
}
