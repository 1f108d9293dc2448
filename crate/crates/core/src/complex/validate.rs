use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    BoundaryEntry, BranchedSurfaceComplex, EdgeEnd, EdgeEnds, EdgeId, Occurrence, Orientability,
    SectorId, Slot, VertexId, VertexKind,
};

/// A broken structural invariant. Every variant names the offending ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// A circuit mentions an edge that does not exist.
    UnknownEdge { sector: SectorId, edge: EdgeId },
    /// An edge does not have exactly one sink and two source occurrences.
    SlotCount { edge: EdgeId, sinks: usize, sources: usize },
    /// An edge's stored occurrence does not point at a matching circuit entry.
    DanglingOccurrence { edge: EdgeId, occurrence: Occurrence },
    /// Two stored occurrence references of an edge coincide, or a circuit
    /// entry is not referenced by its edge.
    UnreferencedEntry { edge: EdgeId, occurrence: Occurrence },
    SphereSector { sector: SectorId },
    /// Euler characteristic, circuit count and orientability are not
    /// realizable by a compact surface.
    EulerCharacteristic { sector: SectorId, euler_char: i64, circuits: usize },
    EmptyCircuit { sector: SectorId, circuit: usize },
    /// A closed-loop edge must fill a whole circuit on its own.
    ClosedLoopInCircuit { edge: EdgeId, sector: SectorId },
    VertexValence { vertex: VertexId, kind: VertexKind, ends: usize, strands: usize },
    /// The edge lists the vertex but the vertex does not list the edge end,
    /// or the other way round.
    AsymmetricEndpoint { edge: EdgeId, vertex: VertexId },
    UnknownVertex { edge: EdgeId, vertex: VertexId },
    UnknownBubbleSector { sector: SectorId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownEdge { sector, edge } => {
                write!(f, "sector {sector} references unknown edge {edge}")
            }
            Violation::SlotCount { edge, sinks, sources } => write!(
                f,
                "edge {edge} has {sinks} sink and {sources} source occurrences (expected 1 and 2)"
            ),
            Violation::DanglingOccurrence { edge, occurrence } => {
                write!(f, "edge {edge} references dangling occurrence {occurrence}")
            }
            Violation::UnreferencedEntry { edge, occurrence } => {
                write!(f, "occurrence {occurrence} of edge {edge} is not referenced exactly once")
            }
            Violation::SphereSector { sector } => write!(f, "sector {sector} is a sphere"),
            Violation::EulerCharacteristic { sector, euler_char, circuits } => write!(
                f,
                "sector {sector}: euler characteristic {euler_char} with {circuits} boundary circuits is not a surface"
            ),
            Violation::EmptyCircuit { sector, circuit } => {
                write!(f, "sector {sector} circuit {circuit} is empty")
            }
            Violation::ClosedLoopInCircuit { edge, sector } => write!(
                f,
                "closed-loop edge {edge} shares a boundary circuit of sector {sector} with other entries"
            ),
            Violation::VertexValence { vertex, kind, ends, strands } => write!(
                f,
                "vertex {vertex} ({kind:?}) has {ends} edge ends on {strands} strands"
            ),
            Violation::AsymmetricEndpoint { edge, vertex } => {
                write!(f, "endpoint incidence between {edge} and {vertex} is not symmetric")
            }
            Violation::UnknownVertex { edge, vertex } => {
                write!(f, "edge {edge} ends at unknown vertex {vertex}")
            }
            Violation::UnknownBubbleSector { sector } => {
                write!(f, "bubble confirmation names unknown sector {sector}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

/// Non-fatal observations reported alongside violations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagnostic {
    Violation(Violation),
    /// The sector occupies a source slot and the sink slot of the same edge.
    SelfAdjacent { edge: EdgeId, sector: SectorId },
    UnknownOrientability { sector: SectorId },
}

impl Diagnostic {
    pub fn severity(&self) -> Severity {
        match self {
            Diagnostic::Violation(_) => Severity::Error,
            _ => Severity::Warning,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Violation(v) => write!(f, "error: {v}"),
            Diagnostic::SelfAdjacent { edge, sector } => {
                write!(f, "warning: sector {sector} is both source and sink at {edge}")
            }
            Diagnostic::UnknownOrientability { sector } => {
                write!(f, "warning: orientability of sector {sector} is unknown")
            }
        }
    }
}

impl BranchedSurfaceComplex {
    /// Structural invariants; empty iff the complex is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check_sectors(&mut out);
        self.check_edges(&mut out);
        self.check_vertices(&mut out);
        for (a, b) in &self.trivial_bubbles {
            for s in [a, b] {
                if !self.sectors.contains_key(s) {
                    out.push(Violation::UnknownBubbleSector { sector: *s });
                }
            }
        }
        out
    }

    /// Violations plus warnings.
    pub fn diagnose(&self) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> =
            self.validate().into_iter().map(Diagnostic::Violation).collect();
        for (eid, edge) in &self.edges {
            let sink = edge.sink.sector;
            if edge.sources.iter().any(|o| o.sector == sink) {
                out.push(Diagnostic::SelfAdjacent { edge: *eid, sector: sink });
            }
        }
        for (sid, s) in &self.sectors {
            if s.orientable == Orientability::Unknown {
                out.push(Diagnostic::UnknownOrientability { sector: *sid });
            }
        }
        out
    }

    fn check_sectors(&self, out: &mut Vec<Violation>) {
        for (sid, s) in &self.sectors {
            let b = s.boundary_circuits.len() as i64;
            if s.euler_char == 2 && b == 0 {
                out.push(Violation::SphereSector { sector: *sid });
            } else {
                // chi = 2 - 2g - b (orientable), 2 - k - b with k >= 1 otherwise.
                let deficit = 2 - s.euler_char - b;
                let ok = match s.orientable {
                    Orientability::Orientable => deficit >= 0 && deficit % 2 == 0,
                    Orientability::NonOrientable => deficit >= 1,
                    Orientability::Unknown => deficit >= 0,
                };
                if !ok {
                    out.push(Violation::EulerCharacteristic {
                        sector: *sid,
                        euler_char: s.euler_char,
                        circuits: s.boundary_circuits.len(),
                    });
                }
            }
            for (ci, c) in s.boundary_circuits.iter().enumerate() {
                if c.is_empty() {
                    out.push(Violation::EmptyCircuit { sector: *sid, circuit: ci });
                }
                for entry in c {
                    if let BoundaryEntry::Arc { edge, .. } = entry {
                        match self.edges.get(edge) {
                            None => out.push(Violation::UnknownEdge { sector: *sid, edge: *edge }),
                            Some(e) if e.ends == EdgeEnds::ClosedLoop && c.len() != 1 => out
                                .push(Violation::ClosedLoopInCircuit { edge: *edge, sector: *sid }),
                            Some(_) => {}
                        }
                    }
                }
            }
        }
    }

    fn check_edges(&self, out: &mut Vec<Violation>) {
        let scanned = self.scan_occurrences();
        for (eid, edge) in &self.edges {
            let (sinks, sources) = scanned.get(eid).cloned().unwrap_or_default();
            if sinks.len() != 1 || sources.len() != 2 {
                out.push(Violation::SlotCount {
                    edge: *eid,
                    sinks: sinks.len(),
                    sources: sources.len(),
                });
            }
            let mut seen = BTreeSet::new();
            let refs = [(edge.sink, true), (edge.sources[0], false), (edge.sources[1], false)];
            for (occ, want_sink) in refs {
                let matches = match self.entry(occ) {
                    Some(BoundaryEntry::Arc { edge: e, slot, .. }) => {
                        e == eid && (*slot == Slot::Sink) == want_sink
                    }
                    _ => false,
                };
                if !matches {
                    out.push(Violation::DanglingOccurrence { edge: *eid, occurrence: occ });
                } else if !seen.insert(occ) {
                    out.push(Violation::UnreferencedEntry { edge: *eid, occurrence: occ });
                }
            }
            for occ in sinks.iter().chain(&sources) {
                if !seen.contains(occ) && sinks.len() + sources.len() == 3 {
                    out.push(Violation::UnreferencedEntry { edge: *eid, occurrence: *occ });
                }
            }
        }
    }

    fn check_vertices(&self, out: &mut Vec<Violation>) {
        let mut listed: BTreeMap<EdgeEnd, Vec<VertexId>> = BTreeMap::new();
        for (vid, v) in &self.vertices {
            let ends = v.ends().count();
            let ok = match v.kind {
                VertexKind::Crossing => v.strands.len() == 2,
                VertexKind::Subdivision => v.strands.len() == 1,
            };
            if !ok {
                out.push(Violation::VertexValence {
                    vertex: *vid,
                    kind: v.kind,
                    ends,
                    strands: v.strands.len(),
                });
            }
            for end in v.ends() {
                listed.entry(*end).or_default().push(*vid);
            }
        }
        for (eid, edge) in &self.edges {
            if let EdgeEnds::Arc(vs) = edge.ends {
                for (i, vid) in vs.iter().enumerate() {
                    let end = EdgeEnd { edge: *eid, end: i as u8 };
                    if !self.vertices.contains_key(vid) {
                        out.push(Violation::UnknownVertex { edge: *eid, vertex: *vid });
                    } else if listed.get(&end).map(Vec::as_slice) != Some(&[*vid][..]) {
                        out.push(Violation::AsymmetricEndpoint { edge: *eid, vertex: *vid });
                    }
                }
            }
        }
        for (end, vids) in &listed {
            let expected = match self.edges.get(&end.edge).map(|e| e.ends) {
                Some(EdgeEnds::Arc(vs)) if end.end < 2 => Some(vs[end.end as usize]),
                _ => None,
            };
            for vid in vids {
                if expected != Some(*vid) {
                    out.push(Violation::AsymmetricEndpoint { edge: end.edge, vertex: *vid });
                }
            }
        }
    }
}
