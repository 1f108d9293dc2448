use std::collections::{BTreeMap, BTreeSet};

use super::{BoundaryEntry, BranchedSurfaceComplex, EdgeId, SectorId};

/// Unordered pair of disk sectors, stored with the lower id first.
pub type BubblePair = (SectorId, SectorId);

/// Disk sectors whose whole boundary has branch direction pointing in.
pub fn find_sink_disks(b: &BranchedSurfaceComplex) -> BTreeSet<SectorId> {
    b.sectors
        .iter()
        .filter(|(_, s)| s.is_disk() && s.entries().all(BoundaryEntry::is_sink))
        .map(|(id, _)| *id)
        .collect()
}

/// Disk sectors with every boundary arc outward and no edge visited twice.
pub fn find_removable_disks(b: &BranchedSurfaceComplex) -> BTreeSet<SectorId> {
    b.sectors
        .iter()
        .filter(|(_, s)| {
            if !s.is_disk() || !s.entries().all(BoundaryEntry::is_source) {
                return false;
            }
            let mut seen = BTreeSet::new();
            s.entries().all(|e| e.edge().is_some_and(|id| seen.insert(id)))
        })
        .map(|(id, _)| *id)
        .collect()
}

/// Pairs of disks whose circuits run over the same cyclic edge sequence
/// and which fill both source slots of every edge on it. Whether the pair
/// bounds a trivial product region is left to the caller.
pub fn find_bubble_candidates(b: &BranchedSurfaceComplex) -> BTreeSet<BubblePair> {
    // Disks with all-source boundary and distinct edges, keyed by their
    // circuit's edge sequence in canonical dihedral form.
    let mut by_cycle: BTreeMap<Vec<EdgeId>, Vec<SectorId>> = BTreeMap::new();
    for id in find_removable_disks(b) {
        let circuit = &b.sectors[&id].boundary_circuits[0];
        let edges: Vec<EdgeId> = circuit.iter().filter_map(BoundaryEntry::edge).collect();
        by_cycle.entry(dihedral_min(&edges)).or_default().push(id);
    }
    let mut out = BTreeSet::new();
    for (edges, disks) in by_cycle {
        for (i, &d1) in disks.iter().enumerate() {
            for &d2 in &disks[i + 1..] {
                let fills = edges.iter().all(|e| {
                    let (_, a, c) = b.edge_sectors(*e).expect("validated edge");
                    (a == d1 && c == d2) || (a == d2 && c == d1)
                });
                if fills {
                    out.insert((d1, d2));
                }
            }
        }
    }
    out
}

/// Least sequence among all rotations and reflections.
pub(crate) fn dihedral_min<T: Ord + Clone>(seq: &[T]) -> Vec<T> {
    let n = seq.len();
    let mut best: Option<Vec<T>> = None;
    let reversed: Vec<T> = seq.iter().rev().cloned().collect();
    for base in [seq, &reversed[..]] {
        for r in 0..n.max(1) {
            let cand: Vec<T> = base[r.min(n)..].iter().chain(&base[..r.min(n)]).cloned().collect();
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dihedral_min_handles_reflection() {
        assert_eq!(dihedral_min(&[3, 1, 2]), vec![1, 2, 3]);
        assert_eq!(dihedral_min(&[2, 1, 3]), vec![1, 2, 3]);
        assert_eq!(dihedral_min::<u8>(&[]), Vec::<u8>::new());
    }
}
