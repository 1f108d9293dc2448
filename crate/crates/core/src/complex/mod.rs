//! Combinatorial branched surfaces.
//!
//! A [`BranchedSurfaceComplex`] stores the sectors (branches) of a branched
//! surface together with the arcs of its branch locus. Each sector keeps its
//! boundary as a list of circuits; every circuit entry is either a piece of
//! free boundary or an occurrence of a locus edge tagged with the slot the
//! sector occupies there. An edge has exactly one `Sink` slot (the sheet the
//! branch direction points into) and two source slots (the tangent sheets
//! that merge).
//!
//! Detectors, surgeries and the chain/cycle decomposition live in the
//! submodules and only ever look at these slot tags.

mod decompose;
mod detect;
mod surgery;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use decompose::{
    all_disk_cycle_witness, cycle_core, decompose_chains_cycles, disk_out_graph, Chain,
    ChainCycleDecomposition, ChainTerminal, CoreAnnulus, CoreKind, CycleEdge, DecomposeError,
};
pub use detect::{find_bubble_candidates, find_removable_disks, find_sink_disks, BubblePair};
pub use surgery::{
    collapse_bubble, collapse_confirmed_bubbles, delete_removable, delete_removable_traced,
    make_efficient, unzip_edge, EfficiencyStep, SpliceOutcome, SurgeryError,
};
pub use validate::{Diagnostic, Severity, Violation};

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl std::str::FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let digits = s.strip_prefix($prefix).unwrap_or(s);
                digits
                    .parse::<u32>()
                    .map($name)
                    .map_err(|_| format!("invalid {} id `{}`", $prefix, s))
            }
        }
    };
}

id_type!(SectorId, "s");
id_type!(EdgeId, "e");
id_type!(VertexId, "v");

/// Which slot a sector occupies at a locus edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    /// The branch direction points into this sector.
    Sink,
    /// Source sheet that continues smoothly through the cusp.
    SourceThrough,
    /// Source sheet that merges into the cusp.
    SourceMerge,
}

impl Slot {
    pub fn is_source(self) -> bool {
        !matches!(self, Slot::Sink)
    }
}

/// Side of the sector's local orientation on which the cusp lies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Unknown,
}

impl Side {
    /// +1 for `Left`, -1 for `Right`, `None` when unknown.
    pub fn sign(self) -> Option<i8> {
        match self {
            Side::Left => Some(1),
            Side::Right => Some(-1),
            Side::Unknown => None,
        }
    }

    pub fn flipped(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Unknown => Side::Unknown,
        }
    }
}

/// One entry of a boundary circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryEntry {
    /// A piece of the free boundary of the branched surface.
    Free,
    /// An occurrence of a locus edge.
    Arc { edge: EdgeId, slot: Slot, side: Side },
}

impl BoundaryEntry {
    pub fn arc(edge: EdgeId, slot: Slot, side: Side) -> Self {
        BoundaryEntry::Arc { edge, slot, side }
    }

    pub fn edge(&self) -> Option<EdgeId> {
        match self {
            BoundaryEntry::Free => None,
            BoundaryEntry::Arc { edge, .. } => Some(*edge),
        }
    }

    pub fn slot(&self) -> Option<Slot> {
        match self {
            BoundaryEntry::Free => None,
            BoundaryEntry::Arc { slot, .. } => Some(*slot),
        }
    }

    pub fn side(&self) -> Option<Side> {
        match self {
            BoundaryEntry::Free => None,
            BoundaryEntry::Arc { side, .. } => Some(*side),
        }
    }

    pub fn is_sink(&self) -> bool {
        self.slot() == Some(Slot::Sink)
    }

    pub fn is_source(&self) -> bool {
        self.slot().is_some_and(Slot::is_source)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientability {
    Orientable,
    NonOrientable,
    Unknown,
}

/// A branch of the branched surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sector {
    pub euler_char: i64,
    pub orientable: Orientability,
    /// User assertion: the sector contains a closed curve that is
    /// homotopically nontrivial in the ambient manifold.
    pub essential_curve: bool,
    pub boundary_circuits: Vec<Vec<BoundaryEntry>>,
}

impl Sector {
    pub fn new(euler_char: i64, orientable: Orientability, circuits: Vec<Vec<BoundaryEntry>>) -> Self {
        Sector { euler_char, orientable, essential_curve: false, boundary_circuits: circuits }
    }

    pub fn disk(circuit: Vec<BoundaryEntry>) -> Self {
        Sector::new(1, Orientability::Orientable, vec![circuit])
    }

    pub fn with_essential(mut self, essential: bool) -> Self {
        self.essential_curve = essential;
        self
    }

    pub fn is_disk(&self) -> bool {
        self.euler_char == 1 && self.boundary_circuits.len() == 1
    }

    pub fn entries(&self) -> impl Iterator<Item = &BoundaryEntry> {
        self.boundary_circuits.iter().flatten()
    }

    /// Orientable genus, or the number of cross-caps for non-orientable
    /// sectors. `None` when the orientability is unknown.
    pub fn genus(&self) -> Option<i64> {
        let deficit = 2 - self.euler_char - self.boundary_circuits.len() as i64;
        match self.orientable {
            Orientability::Orientable => Some(deficit / 2),
            Orientability::NonOrientable => Some(deficit),
            Orientability::Unknown => None,
        }
    }
}

/// Position of one boundary entry: `(sector, circuit index, position)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub sector: SectorId,
    pub circuit: usize,
    pub position: usize,
}

impl Occurrence {
    pub fn new(sector: SectorId, circuit: usize, position: usize) -> Self {
        Occurrence { sector, circuit, position }
    }
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.sector, self.circuit, self.position)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeEnds {
    ClosedLoop,
    /// Vertices at end 0 and end 1.
    Arc([VertexId; 2]),
}

/// A component of the branch locus minus its double points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusEdge {
    pub ends: EdgeEnds,
    pub sink: Occurrence,
    pub sources: [Occurrence; 2],
}

impl LocusEdge {
    pub fn occurrences(&self) -> [Occurrence; 3] {
        [self.sink, self.sources[0], self.sources[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeEnd {
    pub edge: EdgeId,
    /// 0 or 1.
    pub end: u8,
}

impl fmt::Display for EdgeEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.edge, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    /// Double point: two transverse strands.
    Crossing,
    /// Valence-two point on a single strand; carries no information.
    Subdivision,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusVertex {
    pub kind: VertexKind,
    pub strands: Vec<[EdgeEnd; 2]>,
}

impl LocusVertex {
    pub fn ends(&self) -> impl Iterator<Item = &EdgeEnd> {
        self.strands.iter().flatten()
    }
}

/// Tri-state user assertion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assertion {
    True,
    False,
    #[default]
    Unknown,
}

/// Embedding-dependent conditions that the toolkit never decides. They are
/// carried verbatim into every verdict.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoFlags {
    pub horizontal_boundary_incompressible: Assertion,
    pub no_monogon: Assertion,
    pub no_reeb_component: Assertion,
    pub complement_irreducible: Assertion,
    pub no_sphere_boundary: Assertion,
}

impl GoFlags {
    pub const NAMES: [&'static str; 5] = [
        "horizontal_boundary_incompressible",
        "no_monogon",
        "no_reeb_component",
        "complement_irreducible",
        "no_sphere_boundary",
    ];

    pub fn all_true() -> Self {
        GoFlags {
            horizontal_boundary_incompressible: Assertion::True,
            no_monogon: Assertion::True,
            no_reeb_component: Assertion::True,
            complement_irreducible: Assertion::True,
            no_sphere_boundary: Assertion::True,
        }
    }

    pub fn values(&self) -> [Assertion; 5] {
        [
            self.horizontal_boundary_incompressible,
            self.no_monogon,
            self.no_reeb_component,
            self.complement_irreducible,
            self.no_sphere_boundary,
        ]
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Assertion> {
        Some(match name {
            "horizontal_boundary_incompressible" => &mut self.horizontal_boundary_incompressible,
            "no_monogon" => &mut self.no_monogon,
            "no_reeb_component" => &mut self.no_reeb_component,
            "complement_irreducible" => &mut self.complement_irreducible,
            "no_sphere_boundary" => &mut self.no_sphere_boundary,
            _ => return None,
        })
    }

    /// Names of flags that are not asserted true.
    pub fn missing(&self) -> Vec<&'static str> {
        Self::NAMES
            .iter()
            .zip(self.values())
            .filter(|(_, v)| *v != Assertion::True)
            .map(|(n, _)| *n)
            .collect()
    }
}

/// The combinatorial branched surface.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchedSurfaceComplex {
    pub name: String,
    pub sectors: BTreeMap<SectorId, Sector>,
    pub edges: BTreeMap<EdgeId, LocusEdge>,
    pub vertices: BTreeMap<VertexId, LocusVertex>,
    pub flags: GoFlags,
    /// Bubble pairs the caller has confirmed to bound trivial product regions.
    pub trivial_bubbles: BTreeSet<(SectorId, SectorId)>,
}

impl BranchedSurfaceComplex {
    pub fn new(name: impl Into<String>) -> Self {
        BranchedSurfaceComplex { name: name.into(), ..Default::default() }
    }

    pub fn sector(&self, id: SectorId) -> Option<&Sector> {
        self.sectors.get(&id)
    }

    pub fn entry(&self, occ: Occurrence) -> Option<&BoundaryEntry> {
        self.sectors
            .get(&occ.sector)?
            .boundary_circuits
            .get(occ.circuit)?
            .get(occ.position)
    }

    pub fn disk_ids(&self) -> impl Iterator<Item = SectorId> + '_ {
        self.sectors.iter().filter(|(_, s)| s.is_disk()).map(|(id, _)| *id)
    }

    pub fn next_sector_id(&self) -> SectorId {
        SectorId(self.sectors.keys().next_back().map_or(0, |s| s.0 + 1))
    }

    pub fn next_edge_id(&self) -> EdgeId {
        EdgeId(self.edges.keys().next_back().map_or(0, |e| e.0 + 1))
    }

    pub fn next_vertex_id(&self) -> VertexId {
        VertexId(self.vertices.keys().next_back().map_or(0, |v| v.0 + 1))
    }

    /// Sector the branch direction of `edge` points into.
    pub fn sink_sector(&self, edge: EdgeId) -> Option<SectorId> {
        self.edges.get(&edge).map(|e| e.sink.sector)
    }

    /// All occurrences recorded in circuits, grouped by edge and slot kind:
    /// `(sinks, sources)`.
    pub(crate) fn scan_occurrences(&self) -> BTreeMap<EdgeId, (Vec<Occurrence>, Vec<Occurrence>)> {
        let mut map: BTreeMap<EdgeId, (Vec<Occurrence>, Vec<Occurrence>)> = BTreeMap::new();
        for (sid, sector) in &self.sectors {
            for (ci, circuit) in sector.boundary_circuits.iter().enumerate() {
                for (pi, entry) in circuit.iter().enumerate() {
                    if let BoundaryEntry::Arc { edge, slot, .. } = entry {
                        let occ = Occurrence::new(*sid, ci, pi);
                        let slot_lists = map.entry(*edge).or_default();
                        if *slot == Slot::Sink {
                            slot_lists.0.push(occ);
                        } else {
                            slot_lists.1.push(occ);
                        }
                    }
                }
            }
        }
        map
    }

    /// Recomputes every edge's occurrence references from the circuits.
    /// Sources are ordered `SourceThrough` before `SourceMerge`, then by
    /// position. Edges that no longer have exactly one sink and two sources
    /// keep their stale references (validation reports them).
    pub fn rebuild_occurrences(&mut self) {
        let scanned = self.scan_occurrences();
        for (eid, edge) in self.edges.iter_mut() {
            let Some((sinks, sources)) = scanned.get(eid) else { continue };
            if sinks.len() != 1 || sources.len() != 2 {
                continue;
            }
            let mut sources = sources.clone();
            let slot_of = |o: &Occurrence| {
                self.sectors[&o.sector].boundary_circuits[o.circuit][o.position].slot()
            };
            sources.sort_by_key(|o| (slot_of(o) != Some(Slot::SourceThrough), *o));
            edge.sink = sinks[0];
            edge.sources = [sources[0], sources[1]];
        }
    }

    /// Sectors occupying the three slots of `edge`: `(sink, source_a, source_b)`.
    pub fn edge_sectors(&self, edge: EdgeId) -> Option<(SectorId, SectorId, SectorId)> {
        let e = self.edges.get(&edge)?;
        Some((e.sink.sector, e.sources[0].sector, e.sources[1].sector))
    }

    /// Renumbers sectors, edges and vertices to `0..n` in id order and
    /// rotates each circuit to its lexicographically least rotation.
    /// Two complexes that differ by an order-preserving relabeling have
    /// equal canonical forms.
    pub fn canonicalize(&self) -> BranchedSurfaceComplex {
        let smap: BTreeMap<SectorId, SectorId> =
            self.sectors.keys().enumerate().map(|(i, s)| (*s, SectorId(i as u32))).collect();
        let emap: BTreeMap<EdgeId, EdgeId> =
            self.edges.keys().enumerate().map(|(i, e)| (*e, EdgeId(i as u32))).collect();
        let vmap: BTreeMap<VertexId, VertexId> =
            self.vertices.keys().enumerate().map(|(i, v)| (*v, VertexId(i as u32))).collect();
        let mut out = BranchedSurfaceComplex::new(self.name.clone());
        out.flags = self.flags;
        for (sid, s) in &self.sectors {
            let circuits = s
                .boundary_circuits
                .iter()
                .map(|c| {
                    let relabeled: Vec<BoundaryEntry> = c
                        .iter()
                        .map(|e| match e {
                            BoundaryEntry::Free => BoundaryEntry::Free,
                            BoundaryEntry::Arc { edge, slot, side } => {
                                BoundaryEntry::arc(emap[edge], *slot, *side)
                            }
                        })
                        .collect();
                    least_rotation(&relabeled)
                })
                .collect();
            out.sectors.insert(
                smap[sid],
                Sector {
                    euler_char: s.euler_char,
                    orientable: s.orientable,
                    essential_curve: s.essential_curve,
                    boundary_circuits: circuits,
                },
            );
        }
        for (eid, e) in &self.edges {
            let ends = match e.ends {
                EdgeEnds::ClosedLoop => EdgeEnds::ClosedLoop,
                EdgeEnds::Arc([a, b]) => EdgeEnds::Arc([vmap[&a], vmap[&b]]),
            };
            let placeholder = Occurrence::new(SectorId(0), 0, 0);
            out.edges.insert(
                emap[eid],
                LocusEdge { ends, sink: placeholder, sources: [placeholder; 2] },
            );
        }
        for (vid, v) in &self.vertices {
            let mut strands: Vec<[EdgeEnd; 2]> = v
                .strands
                .iter()
                .map(|s| {
                    let mut st = s.map(|x| EdgeEnd { edge: emap[&x.edge], end: x.end });
                    st.sort();
                    st
                })
                .collect();
            strands.sort();
            out.vertices.insert(vmap[vid], LocusVertex { kind: v.kind, strands });
        }
        out.trivial_bubbles = self
            .trivial_bubbles
            .iter()
            .filter_map(|(a, b)| Some(ordered_pair(*smap.get(a)?, *smap.get(b)?)))
            .collect();
        out.rebuild_occurrences();
        out
    }
}

pub(crate) fn ordered_pair(a: SectorId, b: SectorId) -> (SectorId, SectorId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn entry_key(e: &BoundaryEntry) -> (u32, u8, u8) {
    match e {
        BoundaryEntry::Free => (u32::MAX, 0, 0),
        BoundaryEntry::Arc { edge, slot, side } => (edge.0, *slot as u8, *side as u8),
    }
}

fn least_rotation(c: &[BoundaryEntry]) -> Vec<BoundaryEntry> {
    if c.is_empty() {
        return Vec::new();
    }
    let keys: Vec<_> = c.iter().map(entry_key).collect();
    let best = (0..c.len())
        .min_by(|&i, &j| {
            let ri = keys[i..].iter().chain(&keys[..i]);
            let rj = keys[j..].iter().chain(&keys[..j]);
            ri.cmp(rj)
        })
        .unwrap_or(0);
    c[best..].iter().chain(&c[..best]).copied().collect()
}
