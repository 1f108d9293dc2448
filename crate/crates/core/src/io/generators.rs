//! Named fixture families and a seeded random generator.
//!
//! Sector numbering used by the named families:
//!
//! * `disk_sink`: `s0` is the sink disk `S`, `s1` the annulus `W`.
//! * `pita`: `s0`, `s1` are the bubble disks `D1`, `D2`; `s2` is the annulus `E`.
//! * `necklace(k)`: `s0..s{k-1}` are the disks, `s{k}` the tail.
//! * `bubbled_sink`: `disk_sink` with an air bubble `s2`, `s3` blown into `S`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{
    BoundaryEntry, BranchedSurfaceComplex, EdgeEnd, EdgeEnds, EdgeId, LocusEdge, LocusVertex,
    Occurrence, Orientability, Sector, SectorId, Side, Slot, VertexId, VertexKind,
};

/// Largest sector count the random generator accepts.
pub const MAX_RANDOM_SECTORS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("unknown generator `{0}`")]
    Unknown(String),
}

fn sid(i: usize) -> SectorId {
    SectorId(i as u32)
}

fn eid(i: usize) -> EdgeId {
    EdgeId(i as u32)
}

fn closed_edge() -> LocusEdge {
    let o = Occurrence::new(SectorId(0), 0, 0);
    LocusEdge { ends: EdgeEnds::ClosedLoop, sink: o, sources: [o; 2] }
}

fn arc_edge(a: VertexId, b: VertexId) -> LocusEdge {
    let o = Occurrence::new(SectorId(0), 0, 0);
    LocusEdge { ends: EdgeEnds::Arc([a, b]), sink: o, sources: [o; 2] }
}

fn finish(mut b: BranchedSurfaceComplex) -> BranchedSurfaceComplex {
    b.rebuild_occurrences();
    debug_assert!(b.validate().is_empty(), "{}: {:?}", b.name, b.validate());
    b
}

use BoundaryEntry as E;
use Side::Left;

/// A disk whose whole boundary is the sink side of one closed locus curve;
/// the two source sheets are the boundary circles of an annulus.
pub fn disk_sink() -> BranchedSurfaceComplex {
    let mut b = BranchedSurfaceComplex::new("disk_sink");
    let e = eid(0);
    b.sectors.insert(sid(0), Sector::disk(vec![E::arc(e, Slot::Sink, Left)]));
    b.sectors.insert(
        sid(1),
        Sector::new(
            0,
            Orientability::Orientable,
            vec![vec![E::arc(e, Slot::SourceThrough, Left)], vec![E::arc(e, Slot::SourceMerge, Left)]],
        )
        .with_essential(true),
    );
    b.edges.insert(e, closed_edge());
    finish(b)
}

/// Two disks meeting an annulus along one closed curve, forming a bubble.
pub fn pita() -> BranchedSurfaceComplex {
    let mut b = BranchedSurfaceComplex::new("pita");
    let e = eid(0);
    b.sectors.insert(sid(0), Sector::disk(vec![E::arc(e, Slot::SourceThrough, Left)]));
    b.sectors.insert(sid(1), Sector::disk(vec![E::arc(e, Slot::SourceMerge, Left)]));
    b.sectors.insert(
        sid(2),
        Sector::new(0, Orientability::Orientable, vec![vec![E::arc(e, Slot::Sink, Left)], vec![E::Free]]),
    );
    b.edges.insert(e, closed_edge());
    finish(b)
}

/// `disk_sink` after blowing an air bubble into the sink disk: the disk
/// becomes an annulus and two new disks bound the bubble.
pub fn bubbled_sink() -> BranchedSurfaceComplex {
    let mut b = BranchedSurfaceComplex::new("bubbled_sink");
    let (e, f) = (eid(0), eid(1));
    b.sectors.insert(
        sid(0),
        Sector::new(
            0,
            Orientability::Orientable,
            vec![vec![E::arc(e, Slot::Sink, Left)], vec![E::arc(f, Slot::Sink, Left)]],
        ),
    );
    b.sectors.insert(
        sid(1),
        Sector::new(
            0,
            Orientability::Orientable,
            vec![vec![E::arc(e, Slot::SourceThrough, Left)], vec![E::arc(e, Slot::SourceMerge, Left)]],
        )
        .with_essential(true),
    );
    b.sectors.insert(sid(2), Sector::disk(vec![E::arc(f, Slot::SourceThrough, Left)]));
    b.sectors.insert(sid(3), Sector::disk(vec![E::arc(f, Slot::SourceMerge, Left)]));
    b.edges.insert(e, closed_edge());
    b.edges.insert(f, closed_edge());
    b.trivial_bubbles.insert((sid(2), sid(3)));
    finish(b)
}

/// A single closed sector with no locus.
pub fn closed_surface(genus: u32) -> Result<BranchedSurfaceComplex, GenError> {
    if genus == 0 {
        return Err(GenError::OutOfRange("a closed sector must not be a sphere".into()));
    }
    let mut b = BranchedSurfaceComplex::new(format!("closed{genus}"));
    b.sectors.insert(
        sid(0),
        Sector::new(2 - 2 * genus as i64, Orientability::Orientable, vec![]).with_essential(true),
    );
    Ok(finish(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailKind {
    /// One essential annulus with a free boundary circle, merging along every edge.
    Annulus,
    /// One disk per edge.
    Disks,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NecklaceOptions {
    /// Side flag of the sink occurrence of `e_i` (inside disk `i + 1`).
    pub sink_sides: Vec<Side>,
    pub tail: TailKind,
}

impl NecklaceOptions {
    pub fn uniform(k: usize) -> Self {
        NecklaceOptions { sink_sides: vec![Left; k], tail: TailKind::Annulus }
    }
}

/// `k` disks in a coherent cycle: disk `i` has circuit `[e_{i-1} sink, e_i source]`
/// and the tail is the second source sheet of every `e_i`.
pub fn necklace_with(k: usize, opts: &NecklaceOptions) -> Result<BranchedSurfaceComplex, GenError> {
    if k < 2 {
        return Err(GenError::OutOfRange(format!("necklace needs k >= 2, got {k}")));
    }
    if opts.sink_sides.len() != k {
        return Err(GenError::OutOfRange("one sink side per edge".into()));
    }
    let mut b = BranchedSurfaceComplex::new(format!("necklace{k}"));
    for i in 0..k {
        let prev = (i + k - 1) % k;
        b.sectors.insert(
            sid(i),
            Sector::disk(vec![
                E::arc(eid(prev), Slot::Sink, opts.sink_sides[prev]),
                E::arc(eid(i), Slot::SourceThrough, Left),
            ]),
        );
    }
    match opts.tail {
        TailKind::Annulus => {
            let circuit = (0..k).map(|i| E::arc(eid(i), Slot::SourceMerge, Left)).collect();
            b.sectors.insert(
                sid(k),
                Sector::new(0, Orientability::Orientable, vec![circuit, vec![E::Free]]).with_essential(true),
            );
        }
        TailKind::Disks => {
            for i in 0..k {
                b.sectors.insert(sid(k + i), Sector::disk(vec![E::arc(eid(i), Slot::SourceMerge, Left)]));
            }
        }
    }
    for i in 0..k {
        let v = VertexId(i as u32);
        let prev = VertexId(((i + k - 1) % k) as u32);
        b.edges.insert(eid(i), arc_edge(prev, v));
        b.vertices.insert(
            v,
            LocusVertex {
                kind: VertexKind::Subdivision,
                strands: vec![[EdgeEnd { edge: eid(i), end: 1 }, EdgeEnd { edge: eid((i + 1) % k), end: 0 }]],
            },
        );
    }
    Ok(finish(b))
}

pub fn necklace(k: usize) -> Result<BranchedSurfaceComplex, GenError> {
    necklace_with(k, &NecklaceOptions::uniform(k))
}

/// Necklace whose core reverses orientation once around.
pub fn coherent_mobius(k: usize) -> Result<BranchedSurfaceComplex, GenError> {
    let mut opts = NecklaceOptions::uniform(k.max(2));
    if let Some(last) = opts.sink_sides.last_mut() {
        *last = Side::Right;
    }
    let mut b = necklace_with(k, &opts)?;
    b.name = format!("mobius{k}");
    Ok(b)
}

/// Knobs for [`random_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandomConfig {
    pub sectors: usize,
    pub max_edges: usize,
    pub disk_probability: f64,
    /// Probability of a free entry (disks) or free circuit (other sectors).
    pub free_probability: f64,
    pub unknown_side_probability: f64,
    pub nonorientable_probability: f64,
    pub essential_probability: f64,
    pub crossing_probability: f64,
    /// Every sector is a disk and there is no free boundary.
    pub all_disks: bool,
}

impl RandomConfig {
    pub fn new(sectors: usize) -> Self {
        RandomConfig {
            sectors,
            max_edges: sectors + 2,
            disk_probability: 0.6,
            free_probability: 0.15,
            unknown_side_probability: 0.0,
            nonorientable_probability: 0.1,
            essential_probability: 0.7,
            crossing_probability: 0.3,
            all_disks: false,
        }
    }

    pub fn all_disks(sectors: usize) -> Self {
        RandomConfig { all_disks: true, free_probability: 0.0, ..RandomConfig::new(sectors) }
    }
}

pub fn random(seed: u64, size: usize) -> Result<BranchedSurfaceComplex, GenError> {
    random_with(seed, &RandomConfig::new(size))
}

/// A random valid complex. Every edge is an arc; edge ends are paired into
/// subdivision vertices, some of which are fused into crossings.
pub fn random_with(seed: u64, cfg: &RandomConfig) -> Result<BranchedSurfaceComplex, GenError> {
    if cfg.sectors == 0 || cfg.sectors > MAX_RANDOM_SECTORS {
        return Err(GenError::OutOfRange(format!(
            "random complexes have 1..={MAX_RANDOM_SECTORS} sectors, got {}",
            cfg.sectors
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.sectors;
    let mut m = rng.gen_range(1..=cfg.max_edges.max(1));
    if cfg.all_disks {
        m = m.max(n.div_ceil(3));
    }

    // Slot owners: 3 per edge (sink, through, merge).
    let mut owners: Vec<usize> = (0..3 * m).map(|_| rng.gen_range(0..n)).collect();
    if cfg.all_disks {
        let mut slots: Vec<usize> = (0..3 * m).collect();
        slots.shuffle(&mut rng);
        for (s, slot) in slots.into_iter().take(n).enumerate() {
            owners[slot] = s;
        }
    }
    let mut entries: Vec<Vec<BoundaryEntry>> = vec![Vec::new(); n];
    for (slot, &owner) in owners.iter().enumerate() {
        let kind = [Slot::Sink, Slot::SourceThrough, Slot::SourceMerge][slot % 3];
        let side = if rng.gen_bool(cfg.unknown_side_probability) {
            Side::Unknown
        } else if rng.gen_bool(0.5) {
            Side::Left
        } else {
            Side::Right
        };
        entries[owner].push(BoundaryEntry::arc(eid(slot / 3), kind, side));
    }

    let mut b = BranchedSurfaceComplex::new(format!("random_{seed}_{n}"));
    for (i, mut list) in entries.into_iter().enumerate() {
        list.shuffle(&mut rng);
        let disk = cfg.all_disks || (!list.is_empty() && rng.gen_bool(cfg.disk_probability));
        let sector = if disk {
            if rng.gen_bool(cfg.free_probability) {
                let at = rng.gen_range(0..=list.len());
                list.insert(at, BoundaryEntry::Free);
            }
            Sector::disk(list)
        } else {
            let b_arc = if list.is_empty() { 0 } else { rng.gen_range(1..=list.len().min(3)) };
            let mut cuts: Vec<usize> = (1..list.len()).collect();
            cuts.shuffle(&mut rng);
            let mut cuts: Vec<usize> = cuts.into_iter().take(b_arc.saturating_sub(1)).collect();
            cuts.sort();
            let mut circuits = Vec::new();
            let mut start = 0;
            for c in cuts.into_iter().chain(std::iter::once(list.len())) {
                if c > start {
                    circuits.push(list[start..c].to_vec());
                }
                start = c;
            }
            if rng.gen_bool(cfg.free_probability) {
                circuits.push(vec![BoundaryEntry::Free]);
            }
            let bcount = circuits.len() as i64;
            let (euler_char, orientable) = if rng.gen_bool(cfg.nonorientable_probability) {
                let crosscaps = rng.gen_range(1..=2);
                (2 - crosscaps - bcount, Orientability::NonOrientable)
            } else {
                let min_genus = if bcount <= 1 { 1 } else { 0 };
                let genus = rng.gen_range(min_genus..=1);
                (2 - 2 * genus - bcount, Orientability::Orientable)
            };
            Sector::new(euler_char, orientable, circuits)
                .with_essential(rng.gen_bool(cfg.essential_probability))
        };
        b.sectors.insert(sid(i), sector);
    }

    let mut ends: Vec<EdgeEnd> =
        (0..m).flat_map(|e| [0u8, 1].map(|end| EdgeEnd { edge: eid(e), end })).collect();
    ends.shuffle(&mut rng);
    let strands: Vec<[EdgeEnd; 2]> = ends.chunks(2).map(|c| [c[0], c[1]]).collect();
    let mut groups: Vec<Vec<[EdgeEnd; 2]>> = Vec::new();
    let mut i = 0;
    while i < strands.len() {
        if i + 1 < strands.len() && rng.gen_bool(cfg.crossing_probability) {
            groups.push(vec![strands[i], strands[i + 1]]);
            i += 2;
        } else {
            groups.push(vec![strands[i]]);
            i += 1;
        }
    }
    let mut endpoint = vec![[VertexId(0); 2]; m];
    for (vi, strands) in groups.into_iter().enumerate() {
        let v = VertexId(vi as u32);
        for end in strands.iter().flatten() {
            endpoint[end.edge.0 as usize][end.end as usize] = v;
        }
        let kind = if strands.len() == 2 { VertexKind::Crossing } else { VertexKind::Subdivision };
        b.vertices.insert(v, LocusVertex { kind, strands });
    }
    for (e, [x, y]) in endpoint.into_iter().enumerate() {
        b.edges.insert(eid(e), arc_edge(x, y));
    }
    Ok(finish(b))
}

/// Builds a complex from a generator expression such as `necklace(4)`,
/// `random(7, 6)` or `pita` (an optional `gen:` prefix is accepted).
pub fn from_expr(expr: &str) -> Result<BranchedSurfaceComplex, GenError> {
    let expr = expr.trim();
    let expr = expr.strip_prefix("gen:").unwrap_or(expr);
    let (name, args) = match expr.split_once('(') {
        Some((n, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| GenError::Unknown(expr.to_string()))?;
            let args = inner
                .split(',')
                .map(|a| a.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| GenError::OutOfRange(format!("non-numeric argument in `{expr}`")))?;
            (n.trim(), args)
        }
        None => (expr, vec![]),
    };
    let arity = |k: usize| {
        if args.len() == k {
            Ok(())
        } else {
            Err(GenError::OutOfRange(format!("`{name}` takes {k} argument(s)")))
        }
    };
    match name {
        "disk_sink" => arity(0).map(|_| disk_sink()),
        "pita" => arity(0).map(|_| pita()),
        "bubbled_sink" => arity(0).map(|_| bubbled_sink()),
        "necklace" => {
            arity(1)?;
            necklace(args[0] as usize)
        }
        "necklace_disks" => {
            arity(1)?;
            let k = args[0] as usize;
            necklace_with(k, &NecklaceOptions { tail: TailKind::Disks, ..NecklaceOptions::uniform(k) })
        }
        "coherent_mobius" => {
            arity(1)?;
            coherent_mobius(args[0] as usize)
        }
        "closed" => {
            arity(1)?;
            closed_surface(args[0] as u32)
        }
        "random" => {
            arity(2)?;
            random(args[0], args[1] as usize)
        }
        _ => Err(GenError::Unknown(name.to_string())),
    }
}
