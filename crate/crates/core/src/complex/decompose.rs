//! Chains and cycles of disk sectors.
//!
//! Each disk picks one outward edge; the edge's sink sector is its target.
//! Cycles are chosen as a maximum family of vertex-disjoint cycles in the
//! digraph of all available disk-to-disk out-edges, and the remaining disks
//! form chains that end at a cycle disk or at a non-disk sector.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::detect::find_sink_disks;
use super::{BranchedSurfaceComplex, EdgeId, Occurrence, SectorId, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("sink disks present: {0:?}")]
    SinkDisk(Vec<SectorId>),
    #[error("disk {0} has no outward edge")]
    DiskWithoutOutEdge(SectorId),
    #[error("malformed cycle: {0}")]
    MalformedCycle(String),
    #[error("{0} disks are mutually reachable; cycle packing is limited to 64")]
    ComponentTooLarge(usize),
}

/// Where a chain stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainTerminal {
    /// A disk lying on a cycle.
    Cycle(SectorId),
    /// A non-disk sector.
    NonDisk(SectorId),
    /// A disk already listed in an earlier chain (chains form a forest).
    Chain(SectorId),
}

impl ChainTerminal {
    pub fn sector(&self) -> SectorId {
        match *self {
            ChainTerminal::Cycle(s) | ChainTerminal::NonDisk(s) | ChainTerminal::Chain(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub disks: Vec<SectorId>,
    pub terminal: ChainTerminal,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCycleDecomposition {
    pub out_edge: BTreeMap<SectorId, EdgeId>,
    /// Each cycle starts at its lowest disk id.
    pub cycles: Vec<Vec<SectorId>>,
    pub chains: Vec<Chain>,
}

impl ChainCycleDecomposition {
    pub fn cycle_disks(&self) -> BTreeSet<SectorId> {
        self.cycles.iter().flatten().copied().collect()
    }

    pub fn chain_disks(&self) -> BTreeSet<SectorId> {
        self.chains.iter().flat_map(|c| c.disks.iter().copied()).collect()
    }

    /// Chain disks ordered so every disk comes before the disk it feeds.
    pub fn chain_order(&self) -> Vec<SectorId> {
        self.chains.iter().rev().flat_map(|c| c.disks.iter().copied()).collect()
    }
}

/// Every outward edge of every disk with its target: `disk -> [(edge, sink sector)]`,
/// edges in increasing id order without repeats.
pub fn disk_out_graph(b: &BranchedSurfaceComplex) -> BTreeMap<SectorId, Vec<(EdgeId, SectorId)>> {
    let mut out = BTreeMap::new();
    for d in b.disk_ids() {
        let edges: BTreeSet<EdgeId> = b.sectors[&d]
            .entries()
            .filter(|e| e.is_source())
            .filter_map(|e| e.edge())
            .collect();
        let targets = edges
            .into_iter()
            .filter_map(|e| b.sink_sector(e).map(|t| (e, t)))
            .collect();
        out.insert(d, targets);
    }
    out
}

/// Strongly connected components of `adj`, each sorted.
fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn order(adj: &[Vec<usize>], v: usize, seen: &mut [bool], out: &mut Vec<usize>) {
        seen[v] = true;
        for &w in &adj[v] {
            if !seen[w] {
                order(adj, w, seen, out);
            }
        }
        out.push(v);
    }
    fn collect(radj: &[Vec<usize>], v: usize, comp: &mut [Option<usize>], id: usize) {
        comp[v] = Some(id);
        for &w in &radj[v] {
            if comp[w].is_none() {
                collect(radj, w, comp, id);
            }
        }
    }
    let n = adj.len();
    let (mut seen, mut finish) = (vec![false; n], Vec::with_capacity(n));
    for v in 0..n {
        if !seen[v] {
            order(adj, v, &mut seen, &mut finish);
        }
    }
    let mut radj = vec![Vec::new(); n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            radj[w].push(v);
        }
    }
    let mut comp = vec![None; n];
    let mut count = 0;
    for &v in finish.iter().rev() {
        if comp[v].is_none() {
            collect(&radj, v, &mut comp, count);
            count += 1;
        }
    }
    let mut out = vec![Vec::new(); count];
    for (v, c) in comp.into_iter().enumerate() {
        out[c.expect("every vertex is assigned")].push(v);
    }
    out
}

/// Maximum number of vertex-disjoint directed cycles in `adj`, with one
/// optimal packing. Cycles stay inside strongly connected components, so
/// each component is searched on its own, exhaustively and memoized on
/// the set of still-available vertices.
fn max_cycle_packing(adj: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, DecomposeError> {
    let mut packing = Vec::new();
    for comp in components(adj) {
        if comp.len() > 64 {
            return Err(DecomposeError::ComponentTooLarge(comp.len()));
        }
        let local: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let sub: Vec<Vec<usize>> =
            comp.iter().map(|v| adj[*v].iter().filter_map(|w| local.get(w).copied()).collect()).collect();
        packing.extend(pack_component(&sub).into_iter().map(|c| c.into_iter().map(|i| comp[i]).collect()));
    }
    Ok(packing)
}

fn pack_component(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut memo: HashMap<u64, (usize, Option<Vec<usize>>)> = HashMap::new();
    solve(adj, full, &mut memo);
    let mut packing = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let Some((_, choice)) = memo.get(&mask).cloned() else { break };
        let v = mask.trailing_zeros() as usize;
        match choice {
            Some(cycle) => {
                for &u in &cycle {
                    mask &= !(1 << u);
                }
                packing.push(cycle);
            }
            None => mask &= !(1 << v),
        }
    }
    packing
}

fn solve(adj: &[Vec<usize>], mask: u64, memo: &mut HashMap<u64, (usize, Option<Vec<usize>>)>) -> usize {
    if mask == 0 {
        return 0;
    }
    if let Some((best, _)) = memo.get(&mask) {
        return *best;
    }
    let v = mask.trailing_zeros() as usize;
    let mut best = solve(adj, mask & !(1 << v), memo);
    let mut choice = None;
    for cycle in cycles_through(adj, mask, v) {
        let rest = cycle.iter().fold(mask, |m, &u| m & !(1 << u));
        let value = 1 + solve(adj, rest, memo);
        if value > best {
            best = value;
            choice = Some(cycle);
        }
    }
    memo.insert(mask, (best, choice));
    best
}

/// Simple cycles through `start` inside `mask`, as vertex lists from `start`.
fn cycles_through(adj: &[Vec<usize>], mask: u64, start: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![start];
    let mut on_path = 1u64 << start;
    fn dfs(
        adj: &[Vec<usize>],
        mask: u64,
        start: usize,
        path: &mut Vec<usize>,
        on_path: &mut u64,
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().expect("nonempty path");
        let mut seen = 0u64;
        for &w in &adj[v] {
            if mask & (1 << w) == 0 || seen & (1 << w) != 0 {
                continue;
            }
            seen |= 1 << w;
            if w == start {
                out.push(path.clone());
            } else if *on_path & (1 << w) == 0 {
                path.push(w);
                *on_path |= 1 << w;
                dfs(adj, mask, start, path, on_path, out);
                *on_path &= !(1 << w);
                path.pop();
            }
        }
    }
    dfs(adj, mask, start, &mut path, &mut on_path, &mut out);
    out
}

pub fn decompose_chains_cycles(
    b: &BranchedSurfaceComplex,
) -> Result<ChainCycleDecomposition, DecomposeError> {
    let sinks = find_sink_disks(b);
    if !sinks.is_empty() {
        return Err(DecomposeError::SinkDisk(sinks.into_iter().collect()));
    }
    let graph = disk_out_graph(b);
    if let Some((d, _)) = graph.iter().find(|(_, outs)| outs.is_empty()) {
        return Err(DecomposeError::DiskWithoutOutEdge(*d));
    }
    let disks: Vec<SectorId> = graph.keys().copied().collect();
    let index: BTreeMap<SectorId, usize> = disks.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let adj: Vec<Vec<usize>> = disks
        .iter()
        .map(|d| graph[d].iter().filter_map(|(_, t)| index.get(t).copied()).collect())
        .collect();

    let mut out_edge = BTreeMap::new();
    let mut cycles = Vec::new();
    for cycle in max_cycle_packing(&adj)? {
        let ids: Vec<SectorId> = cycle.iter().map(|&i| disks[i]).collect();
        for (k, d) in ids.iter().enumerate() {
            let next = ids[(k + 1) % ids.len()];
            let (e, _) = graph[d].iter().find(|(_, t)| *t == next).expect("cycle arc");
            out_edge.insert(*d, *e);
        }
        cycles.push(ids);
    }
    cycles.sort();

    let on_cycle: BTreeSet<SectorId> = cycles.iter().flatten().copied().collect();
    for d in &disks {
        if !on_cycle.contains(d) {
            out_edge.insert(*d, graph[d][0].0);
        }
    }
    let target = |d: SectorId| b.sink_sector(out_edge[&d]).expect("edge exists");

    let chain_disks: BTreeSet<SectorId> =
        disks.iter().copied().filter(|d| !on_cycle.contains(d)).collect();
    let mut indegree: BTreeMap<SectorId, usize> = chain_disks.iter().map(|d| (*d, 0)).collect();
    for d in &chain_disks {
        if let Some(n) = indegree.get_mut(&target(*d)) {
            *n += 1;
        }
    }
    let mut chains = Vec::new();
    let mut placed = BTreeSet::new();
    let mut starts: Vec<SectorId> =
        indegree.iter().filter(|(_, n)| **n == 0).map(|(d, _)| *d).collect();
    // Longest chains first keeps the forest readable; ties by id.
    let depth = |mut d: SectorId| {
        let mut n = 0;
        while chain_disks.contains(&d) {
            n += 1;
            d = target(d);
        }
        n
    };
    starts.sort_by_key(|d| (std::cmp::Reverse(depth(*d)), *d));
    for start in starts {
        let mut path = Vec::new();
        let mut d = start;
        let terminal = loop {
            if placed.contains(&d) {
                break ChainTerminal::Chain(d);
            }
            if on_cycle.contains(&d) {
                break ChainTerminal::Cycle(d);
            }
            if !chain_disks.contains(&d) {
                break ChainTerminal::NonDisk(d);
            }
            placed.insert(d);
            path.push(d);
            d = target(d);
        };
        chains.push(Chain { disks: path, terminal });
    }
    debug_assert_eq!(placed, chain_disks);
    Ok(ChainCycleDecomposition { out_edge, cycles, chains })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoreKind {
    Annulus,
    Mobius,
    Unknown,
}

/// One traversed edge of a cycle: leaves `from` through a source slot and
/// enters `to` through the sink slot. `tail` is the remaining source sheet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleEdge {
    pub edge: EdgeId,
    pub from: SectorId,
    pub to: SectorId,
    pub source: Occurrence,
    pub sink: Occurrence,
    pub tail: Occurrence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreAnnulus {
    pub kind: CoreKind,
    pub edges: Vec<CycleEdge>,
}

impl CoreAnnulus {
    pub fn tails(&self) -> Vec<Occurrence> {
        self.edges.iter().map(|e| e.tail).collect()
    }
}

/// Core of a cycle: the traversed edges, their tails, and whether going
/// once around reverses the side orientation.
pub fn cycle_core(
    b: &BranchedSurfaceComplex,
    cycle: &[SectorId],
    out_edge: &BTreeMap<SectorId, EdgeId>,
) -> Result<CoreAnnulus, DecomposeError> {
    if cycle.is_empty() {
        return Err(DecomposeError::MalformedCycle("empty cycle".into()));
    }
    let mut edges = Vec::new();
    let mut sign = 1i8;
    let mut unknown = false;
    for (k, d) in cycle.iter().enumerate() {
        let next = cycle[(k + 1) % cycle.len()];
        let e = *out_edge
            .get(d)
            .ok_or_else(|| DecomposeError::MalformedCycle(format!("{d} has no out-edge")))?;
        let edge = b
            .edges
            .get(&e)
            .ok_or_else(|| DecomposeError::MalformedCycle(format!("unknown edge {e}")))?;
        if edge.sink.sector != next {
            return Err(DecomposeError::MalformedCycle(format!("{e} does not lead from {d} to {next}")));
        }
        let (source, tail) = if edge.sources[0].sector == *d {
            (edge.sources[0], edge.sources[1])
        } else if edge.sources[1].sector == *d {
            (edge.sources[1], edge.sources[0])
        } else {
            return Err(DecomposeError::MalformedCycle(format!("{d} is not a source of {e}")));
        };
        for occ in [source, edge.sink] {
            match b.entry(occ).and_then(|x| x.side()).unwrap_or(Side::Unknown).sign() {
                Some(s) => sign *= s,
                None => unknown = true,
            }
        }
        edges.push(CycleEdge { edge: e, from: *d, to: next, source, sink: edge.sink, tail });
    }
    let kind = if unknown {
        CoreKind::Unknown
    } else if sign < 0 {
        CoreKind::Mobius
    } else {
        CoreKind::Annulus
    };
    Ok(CoreAnnulus { kind, edges })
}

/// A cycle of disks if one exists. On complexes made only of disks with no
/// sink disk and no free boundary this always succeeds: every disk has an
/// outward edge into another disk, and a finite functional graph has a cycle.
pub fn all_disk_cycle_witness(b: &BranchedSurfaceComplex) -> Option<Vec<SectorId>> {
    if let Ok(d) = decompose_chains_cycles(b) {
        return d.cycles.into_iter().next();
    }
    // Follow the lowest disk-to-disk out-edge until a disk repeats.
    let graph = disk_out_graph(b);
    let step = |d: SectorId| graph.get(&d)?.iter().map(|(_, t)| *t).find(|t| graph.contains_key(t));
    for start in graph.keys() {
        let mut seen = Vec::new();
        let mut d = *start;
        loop {
            if let Some(pos) = seen.iter().position(|x| *x == d) {
                let mut cycle: Vec<SectorId> = seen[pos..].to_vec();
                let m = cycle.iter().enumerate().min_by_key(|(_, x)| **x).map(|(i, _)| i)?;
                cycle.rotate_left(m);
                return Some(cycle);
            }
            seen.push(d);
            match step(d) {
                Some(t) => d = t,
                None => break,
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_beats_greedy_choice() {
        // 0<->1 is a short cycle but taking 0->2->0 and 1->3->1 gives two.
        let adj = vec![vec![1, 2], vec![0, 3], vec![0], vec![1]];
        assert_eq!(max_cycle_packing(&adj).unwrap().len(), 2);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let adj = vec![vec![0], vec![0]];
        assert_eq!(max_cycle_packing(&adj).unwrap(), vec![vec![0]]);
    }

    #[test]
    fn components_are_packed_separately() {
        // Two rings of 40 joined by a one-way arc: 80 disks, two components.
        let mut adj: Vec<Vec<usize>> = (0..80).map(|i| vec![if i % 40 == 39 { i - 39 } else { i + 1 }]).collect();
        adj[0].push(40);
        assert_eq!(max_cycle_packing(&adj).unwrap().len(), 2);
        let ring: Vec<Vec<usize>> = (0..70).map(|i| vec![(i + 1) % 70]).collect();
        assert_eq!(max_cycle_packing(&ring), Err(DecomposeError::ComponentTooLarge(70)));
    }
}
