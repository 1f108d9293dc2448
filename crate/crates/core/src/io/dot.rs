use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::complex::{BranchedSurfaceComplex, ChainCycleDecomposition};

/// The disk out-edge digraph of a decomposition. Disks are ellipses (cycle
/// disks bold), non-disk targets are boxes, and each arrow is labelled by
/// the chosen outward edge.
pub fn export_dot(b: &BranchedSurfaceComplex, d: &ChainCycleDecomposition) -> String {
    let on_cycle = d.cycle_disks();
    let mut out = String::new();
    let name = if b.name.is_empty() { "complex" } else { &b.name };
    let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "'"));
    for disk in b.disk_ids() {
        let style = if on_cycle.contains(&disk) { ", style=bold" } else { "" };
        let _ = writeln!(out, "  {disk} [shape=ellipse{style}];");
    }
    let disks: BTreeSet<_> = b.disk_ids().collect();
    let mut targets = BTreeSet::new();
    for e in d.out_edge.values() {
        if let Some(t) = b.sink_sector(*e) {
            if !disks.contains(&t) {
                targets.insert(t);
            }
        }
    }
    for t in targets {
        let _ = writeln!(out, "  {t} [shape=box];");
    }
    for (disk, e) in &d.out_edge {
        if let Some(t) = b.sink_sector(*e) {
            let _ = writeln!(out, "  {disk} -> {t} [label=\"{e}\"];");
        }
    }
    out.push_str("}\n");
    out
}
