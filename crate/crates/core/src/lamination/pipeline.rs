//! The construction itself: collar, chains, non-disk branches, cycles.

use std::collections::{BTreeMap, BTreeSet};

use crate::complex::{
    collapse_confirmed_bubbles, cycle_core, decompose_chains_cycles, find_sink_disks, BoundaryEntry,
    BranchedSurfaceComplex, ChainCycleDecomposition, CoreAnnulus, CoreKind, GoFlags, Orientability,
    SectorId, Side,
};
use crate::holonomy::rational::{int, q, Q};
use crate::holonomy::{
    concatenate, genus_factorization, solve_concatenation_i, solve_concatenation_ii, HoloMap,
    Partition, PlMap,
};
use crate::io::serialize;

use super::annulus::{reglue_to_circles, AnnulusLamination};
use super::certificate::{
    AssumptionLedger, CycleCase, CycleData, LaminationCertificate, NondiskCase, Step, StepNode,
    Witness, CERTIFICATE_FORMAT, VERDICT,
};
use super::collar::{build_collar, collar_lamination, disk_track, induced_lamination, CollarComplex};
use super::LamError;

/// Outcome of regluing along the chains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainRun {
    /// One reglue node (with its product extension as child) per chain disk.
    pub steps: Vec<StepNode>,
    /// Boundary lamination of every chain disk after the run.
    pub final_laminations: BTreeMap<SectorId, AnnulusLamination>,
    /// Regluing maps pushed into sectors outside the chains, composed in
    /// processing order.
    pub incoming: BTreeMap<SectorId, PlMap>,
}

/// Reglues every chain disk in `order`, which must list each chain disk
/// once and before its out-neighbour. Regluing at a disk moves the cut
/// into the sheet it feeds and touches no other track.
pub fn run_chain_pipeline(
    b: &BranchedSurfaceComplex,
    collar: &CollarComplex,
    d: &ChainCycleDecomposition,
    order: &[SectorId],
) -> Result<ChainRun, LamError> {
    let chain_disks = d.chain_disks();
    let mut current: BTreeMap<SectorId, AnnulusLamination> = collar
        .tracks()
        .filter(|t| chain_disks.contains(&t.disk))
        .map(|t| (t.disk, induced_lamination(t)))
        .collect();
    let mut run = ChainRun { steps: Vec::new(), final_laminations: BTreeMap::new(), incoming: BTreeMap::new() };
    let mut processed = BTreeSet::new();
    for &disk in order {
        let out_edge = d.out_edge[&disk];
        let target = b.sink_sector(out_edge).ok_or(LamError::UnknownSector(disk))?;
        if processed.contains(&target) || !chain_disks.contains(&disk) || !processed.insert(disk) {
            return Err(LamError::ChainOrder { disk, target });
        }
        let track = disk_track(b, disk, Some(out_edge))?;
        let before = current.remove(&disk).ok_or(LamError::UnknownSector(disk))?;
        let (after, cut) = reglue_to_circles(&before, &track)?;
        if let Some(next) = current.get_mut(&target) {
            *next = AnnulusLamination::new(next.fiber_set.clone(), cut.map.compose(&next.return_map))?;
        } else {
            let acc = run.incoming.entry(target).or_insert_with(PlMap::identity);
            *acc = cut.map.compose(acc);
        }
        run.final_laminations.insert(disk, after.clone());
        let reglue = Step::ChainReglue { disk, out_edge, target, track, before, after, cut };
        run.steps.push(StepNode { step: reglue, children: vec![StepNode::leaf(Step::ProductExtend { disk })] });
    }
    if processed != chain_disks {
        let missing = chain_disks.difference(&processed).next().copied().unwrap_or(SectorId(0));
        return Err(LamError::ChainOrder { disk: missing, target: missing });
    }
    Ok(run)
}

/// `m(-z)` negated: the same holonomy seen from the other side.
fn flip(m: &PlMap) -> PlMap {
    let pts = m.points().iter().rev().map(|p| (-p.x.clone(), -p.y.clone())).collect();
    PlMap::new(pts).expect("reflection of an increasing map")
}

/// `m` restricted to `[a, b]` (both fixed) and rescaled to `[-1, 1]`.
fn restrict(m: &PlMap, a: &Q, b: &Q) -> PlMap {
    let to = |x: &Q| (x - a) * int(2) / (b - a) - int(1);
    let mut pts = vec![(int(-1), int(-1))];
    for p in m.points() {
        if p.x > *a && p.x < *b {
            pts.push((to(&p.x), to(&p.y)));
        }
    }
    pts.push((int(1), int(1)));
    PlMap::new(pts).expect("restriction of an increasing map")
}

fn genus_of(s: &crate::complex::Sector) -> i64 {
    match (s.orientable, s.genus()) {
        (Orientability::Orientable, Some(g)) => g,
        _ => 1,
    }
}

fn planar(b: &BranchedSurfaceComplex, family: &[SectorId]) -> bool {
    family.iter().all(|id| {
        b.sector(*id).is_some_and(|s| s.orientable == Orientability::Orientable && s.genus() == Some(0))
    })
}

fn has_free_boundary(b: &BranchedSurfaceComplex, family: &[SectorId]) -> bool {
    family.iter().any(|id| b.sector(*id).is_some_and(|s| s.entries().any(|e| *e == BoundaryEntry::Free)))
}

/// Case of the annulus gluing. `L1` is the leaf fed by the tails below the
/// core, `L2` the one fed from above. A family is compact planar when all
/// its sectors are orientable of genus zero; it reaches the other side's
/// boundary when the two families share a sector; it has a boundary circle
/// away from the core when one of its sectors has free boundary.
pub fn classify_cycle(b: &BranchedSurfaceComplex, above: &[SectorId], below: &[SectorId]) -> CycleCase {
    let (p1, p2) = (planar(b, below), planar(b, above));
    let shared = below.iter().any(|s| above.contains(s));
    match (p1, p2) {
        (false, false) => CycleCase::C1a,
        (false, true) | (true, false) => {
            if shared {
                CycleCase::C1c
            } else {
                CycleCase::C1b
            }
        }
        (true, true) => {
            if has_free_boundary(b, below) || has_free_boundary(b, above) {
                CycleCase::C2a
            } else {
                CycleCase::C2b
            }
        }
    }
}

fn family_genus(b: &BranchedSurfaceComplex, family: &[SectorId]) -> usize {
    family.iter().filter_map(|id| b.sector(*id)).map(genus_of).max().unwrap_or(1).max(1) as usize
}

fn commutators(target: &PlMap, genus: usize) -> Result<Witness, LamError> {
    Ok(Witness::Commutators { target: target.clone(), pairs: genus_factorization(target, genus)? })
}

fn halves(r: &PlMap) -> (HoloMap, HoloMap) {
    (HoloMap::pl(restrict(r, &int(-1), &int(0))), HoloMap::pl(restrict(r, &int(0), &int(1))))
}

fn concat_i(r: &PlMap) -> Witness {
    let (f, h) = halves(r);
    let g = solve_concatenation_i(Some(f.clone()), Some(h.clone()));
    Witness::ConcatI { f: Some(f), h: Some(h), g }
}

fn concat_ii(r1: &PlMap, r2: &PlMap) -> Witness {
    let ((f, h), (sigma, tau)) = (halves(r1), halves(r2));
    concat_ii_maps(f, h, sigma, tau)
}

fn concat_ii_maps(f: HoloMap, h: HoloMap, sigma: HoloMap, tau: HoloMap) -> Witness {
    let (g, mu) =
        solve_concatenation_ii(Some(f.clone()), Some(h.clone()), Some(sigma.clone()), Some(tau.clone()));
    Witness::ConcatII { f: Some(f), h: Some(h), sigma: Some(sigma), tau: Some(tau), g, mu }
}

/// Return map on one boundary circle of the branched annulus, on the
/// quarters cut by `L = -1/2`, `0`, `H = 1/2`: leaves from the tails below
/// spiral up onto `L`, leaves from above spiral down onto `H`, and the
/// product region between carries `inner` on its lower half.
fn circle_map(spiral_below: bool, spiral_above: bool, inner: &PlMap) -> PlMap {
    let up = if spiral_below { PlMap::through(int(0), q(1, 2)).expect("push") } else { PlMap::identity() };
    let down = if spiral_above { PlMap::through(int(0), q(-1, 2)).expect("push") } else { PlMap::identity() };
    let blocks = [up, inner.clone(), PlMap::identity(), down].map(HoloMap::pl);
    concatenate(&blocks, &Partition::equal(4)).expect("four blocks").as_pl().expect("exact").clone()
}

/// Extension over the branched annulus or Möbius band around one cycle.
pub fn run_cycle_pipeline(
    b: &BranchedSurfaceComplex,
    cycle: &[SectorId],
    core: &CoreAnnulus,
    incoming: &PlMap,
) -> Result<StepNode, LamError> {
    let first = cycle.first().copied().unwrap_or(SectorId(0));
    if core.kind == CoreKind::Unknown {
        return Err(LamError::UnknownSides(first));
    }
    let members: BTreeSet<SectorId> = cycle.iter().copied().collect();
    let (mut above, mut below) = (Vec::new(), Vec::new());
    for e in &core.edges {
        if members.contains(&e.tail.sector) {
            continue;
        }
        let side = b.entry(e.sink).and_then(BoundaryEntry::side).unwrap_or(Side::Unknown);
        match (core.kind, side) {
            (CoreKind::Mobius, _) | (_, Side::Left) => above.push(e.tail.sector),
            (_, Side::Right) => below.push(e.tail.sector),
            (_, Side::Unknown) => return Err(LamError::UnknownSides(first)),
        }
    }
    for family in [&mut above, &mut below] {
        family.sort();
        family.dedup();
    }
    let r1 = circle_map(!below.is_empty(), !above.is_empty(), incoming);
    let r2 = circle_map(!below.is_empty(), !above.is_empty(), &PlMap::identity());
    // Spirals entering from one family must all turn the same way.
    for r in [&r1, &r2] {
        if r.eval(&q(-3, 4)) < q(-3, 4) || r.eval(&q(3, 4)) > q(3, 4) {
            return Err(LamError::IncoherentSpiral(first));
        }
    }
    let (h, l) = (q(1, 2), q(-1, 2));
    if core.kind == CoreKind::Mobius {
        let data = CycleData { tails_above: above, tails_below: below, h, l, boundary: vec![r1.clone()] };
        let witnesses = vec![concat_ii(&r1, &flip(&r1))];
        return Ok(StepNode::leaf(Step::MobiusExtend { cycle: cycle.to_vec(), data, witnesses }));
    }
    let data = CycleData {
        tails_above: above.clone(),
        tails_below: below.clone(),
        h,
        l,
        boundary: vec![r1.clone(), r2.clone()],
    };
    if above.is_empty() && below.is_empty() {
        let step = Step::CycleExtend { cycle: cycle.to_vec(), data, case: None, witnesses: Vec::new() };
        return Ok(StepNode::leaf(step));
    }
    let case = classify_cycle(b, &above, &below);
    let nonplanar_below = !planar(b, &below);
    // The non-planar leaf receives the other circle's holonomy.
    let (np_family, np_target) = if nonplanar_below { (&below, &r2) } else { (&above, &r1) };
    let witnesses = match case {
        CycleCase::C1a => vec![
            commutators(&r2, family_genus(b, &below))?,
            commutators(&r1, family_genus(b, &above))?,
        ],
        CycleCase::C1b => vec![commutators(np_target, family_genus(b, np_family))?],
        CycleCase::C1c => vec![concat_i(&r1), commutators(np_target, family_genus(b, np_family))?],
        CycleCase::C2a => vec![concat_i(&r1)],
        CycleCase::C2b => vec![concat_ii(&r1, &r2)],
    };
    Ok(StepNode::leaf(Step::CycleExtend { cycle: cycle.to_vec(), data, case: Some(case), witnesses }))
}

fn nondisk_step(b: &BranchedSurfaceComplex, id: SectorId, boundary: &PlMap) -> Result<StepNode, LamError> {
    let s = b.sector(id).ok_or(LamError::UnknownSector(id))?;
    let (case, witnesses) = if s.boundary_circuits.is_empty() {
        (NondiskCase::Closed, Vec::new())
    } else {
        match (s.orientable, s.genus()) {
            (Orientability::Unknown, _) => return Err(LamError::UnknownOrientability(id)),
            (Orientability::NonOrientable, _) => {
                let (m, w) = (HoloMap::pl(boundary.clone()), HoloMap::pl(flip(boundary)));
                (NondiskCase::NonOrientable, vec![concat_ii_maps(m.clone(), w.clone(), w, m)])
            }
            (Orientability::Orientable, Some(0)) => (NondiskCase::Planar, Vec::new()),
            (Orientability::Orientable, g) => {
                (NondiskCase::Genus, vec![commutators(boundary, g.unwrap_or(1).max(1) as usize)?])
            }
        }
    };
    let boundary = if case == NondiskCase::Closed { PlMap::identity() } else { boundary.clone() };
    Ok(StepNode::leaf(Step::NondiskExtend { sector: id, case, boundary, witnesses }))
}

const GUARANTEES: [&str; 3] = [
    "no generalized sink disk once sink disks are absent",
    "no disk leaf bounds a nontrivial curve of a non-disk branch",
    "branch directions along every cycle core are coherent",
];

/// Runs the whole construction on `b` and records it.
pub fn build_lamination_certificate(
    b: &BranchedSurfaceComplex,
    epsilon: &Q,
) -> Result<LaminationCertificate, LamError> {
    let violations = b.validate();
    if !violations.is_empty() {
        return Err(LamError::Invalid(violations.iter().map(|v| v.to_string()).collect()));
    }
    let reduced = collapse_confirmed_bubbles(b)?;
    let collapsed: Vec<(SectorId, SectorId)> =
        b.trivial_bubbles.difference(&reduced.trivial_bubbles).copied().collect();
    let sinks = find_sink_disks(&reduced);
    if !sinks.is_empty() {
        return Err(LamError::SinkDisk(sinks.into_iter().collect()));
    }
    let missing: Vec<String> = reduced
        .sectors
        .iter()
        .filter(|(_, s)| !s.is_disk() && !s.essential_curve)
        .map(|(id, _)| format!("essential_curve on {id}"))
        .collect();
    if !missing.is_empty() {
        return Err(LamError::MissingAssertions(missing));
    }
    let d = decompose_chains_cycles(&reduced)?;
    let collar = build_collar(&reduced)?;
    let lamination = collar_lamination(&collar);
    let tracks = collar.tracks().cloned().collect();
    let mut root = StepNode::leaf(Step::Collar { pieces: collar.pieces.clone(), lamination, tracks });

    let run = run_chain_pipeline(&reduced, &collar, &d, &d.chain_order())?;
    root.children.extend(run.steps);
    for (id, s) in &reduced.sectors {
        if !s.is_disk() {
            let boundary = run.incoming.get(id).cloned().unwrap_or_else(PlMap::identity);
            root.children.push(nondisk_step(&reduced, *id, &boundary)?);
        }
    }
    for cycle in &d.cycles {
        let core = cycle_core(&reduced, cycle, &d.out_edge)?;
        let incoming = cycle
            .iter()
            .filter_map(|c| run.incoming.get(c))
            .fold(PlMap::identity(), |acc, m| m.compose(&acc));
        root.children.push(run_cycle_pipeline(&reduced, cycle, &core, &incoming)?);
    }

    let flags = GoFlags::NAMES.iter().map(|n| n.to_string()).zip(reduced.flags.values()).collect();
    let essential_sectors =
        reduced.sectors.iter().filter(|(_, s)| !s.is_disk()).map(|(id, _)| *id).collect();
    Ok(LaminationCertificate {
        format: CERTIFICATE_FORMAT,
        complex: serialize(b),
        epsilon: epsilon.clone(),
        ledger: AssumptionLedger {
            flags,
            essential_sectors,
            collapsed_bubbles: collapsed,
            guarantees: GUARANTEES.iter().map(|g| g.to_string()).collect(),
        },
        root,
        verdict: VERDICT.into(),
    })
}
