use std::collections::BTreeSet;
use std::path::Path;

use laminar::complex::*;
use laminar::io::generators::*;
use laminar::io::parse;
use laminar::splitting::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn region(ids: &[u32]) -> Region {
    ids.iter().map(|i| SectorId(*i)).collect()
}

fn fixture(name: &str) -> BranchedSurfaceComplex {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn all(b: &BranchedSurfaceComplex) -> Region {
    b.sectors.keys().copied().collect()
}

#[test]
fn safety_examples() {
    let b = disk_sink();
    assert!(is_safe_region(&b, &Region::new()).unwrap().is_safe());
    let sink: Region = find_sink_disks(&b);
    let report = is_safe_region(&b, &sink).unwrap();
    assert_eq!(report.inward_disks, sink.iter().copied().collect::<Vec<_>>());

    let ladder = fixture("split_ladder");
    assert!(is_safe_region(&ladder, &region(&[0])).unwrap().is_safe());
    let mut bare = ladder.clone();
    bare.sectors.get_mut(&SectorId(0)).unwrap().essential_curve = false;
    assert_eq!(is_safe_region(&bare, &region(&[0])).unwrap().inessential, vec![SectorId(0)]);

    assert_eq!(is_safe_region(&b, &region(&[99])), Err(SplitError::UnknownSector(SectorId(99))));
}

#[test]
fn closure_examples() {
    let b = pita();
    let full = expand_safe_region(&b, &region(&[2])).unwrap();
    assert_eq!(full, all(&b));
    assert_eq!(expand_safe_region(&b, &full).unwrap(), full);

    let n = necklace(3).unwrap();
    assert_eq!(expand_safe_region(&n, &region(&[3])).unwrap(), region(&[3]));
    assert_eq!(expand_safe_region(&n, &region(&[0, 1, 2])).unwrap(), all(&n));
    assert!(matches!(expand_safe_region(&n, &region(&[0])), Err(SplitError::NotSafe(_))));
}

#[test]
fn certify_examples() {
    let g = fixture("genus2");
    assert!(certify_laminar(&g, &all(&g)).unwrap().is_laminar());
    let mut unasserted = g.clone();
    unasserted.flags = GoFlags::default();
    match certify_laminar(&unasserted, &all(&g)).unwrap() {
        LaminarVerdict::Incomplete { uncovered, missing, .. } => {
            assert!(uncovered.is_empty());
            assert_eq!(missing.len(), 5);
        }
        other => panic!("{other:?}"),
    }

    let n = fixture("necklace3");
    assert!(certify_laminar(&n, &region(&[0, 1, 2])).unwrap().is_laminar());
    assert!(!certify_laminar(&n, &region(&[3])).unwrap().is_laminar());

    let d = disk_sink();
    for mask in 0u32..(1 << d.sectors.len()) {
        let r: Region = d.sectors.keys().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, s)| *s).collect();
        assert!(!certify_laminar(&d, &r).unwrap().is_laminar());
    }
}

#[test]
fn slide_absorbs_the_moving_sheet() {
    let b = fixture("split_ladder");
    let start = region(&[0]);
    let m: SplitMove = "split 1 @ e0".parse().unwrap();
    assert_eq!(classify_move(&b, &start, &m).unwrap(), Necessity::Necessary);
    let out = apply_split_move(&b, &start, &m).unwrap();
    assert!(out.region.contains(&SectorId(2)));
    assert!(out.region.is_superset(&start));
    assert!(is_safe_region(&out.complex, &out.region).unwrap().is_safe());
    assert_eq!(classify_move(&out.complex, &out.region, &m).unwrap(), Necessity::Unnecessary);
    assert!(matches!(apply_split_move(&out.complex, &out.region, &m), Err(SplitError::Unnecessary { .. })));
}

#[test]
fn merge_of_one_sector_keeps_it_safe() {
    let b = fixture("split_self");
    let out = apply_split_move(&b, &region(&[0]), &"split 2 @ e0".parse().unwrap()).unwrap();
    let s0 = &out.complex.sectors[&SectorId(0)];
    assert!(s0.boundary_circuits.is_empty() && s0.euler_char == 0 && s0.essential_curve);
    assert!(out.region.contains(&out.image[&SectorId(0)]));
    assert!(out.complex.edges.is_empty());
}

#[test]
fn site_errors() {
    let b = fixture("split_ladder");
    let start = region(&[0]);
    assert_eq!(
        apply_split_move(&b, &start, &"split 1 @ e9".parse().unwrap()).unwrap_err(),
        SplitError::UnknownEdge(EdgeId(9))
    );
    // Picking the safe sheet as the mover leaves no safe partner.
    assert!(matches!(
        apply_split_move(&b, &start, &"split 1 @ e0 a".parse().unwrap()),
        Err(SplitError::SiteMismatch { .. })
    ));
    assert!("split 3 @ e0".parse::<SplitMove>().is_err());
    assert!("split 1 e0".parse::<SplitMove>().is_err());
    assert!("split 1 @ e0 c".parse::<SplitMove>().is_err());
}

#[test]
fn sphere_is_refused_by_unzipping() {
    let mut b = BranchedSurfaceComplex::new("bigon");
    let e = EdgeId(0);
    let arc = |slot| vec![BoundaryEntry::arc(e, slot, Side::Left)];
    b.sectors.insert(SectorId(0), Sector::disk(arc(Slot::SourceThrough)));
    b.sectors.insert(SectorId(1), Sector::disk(arc(Slot::SourceMerge)));
    b.sectors.insert(SectorId(2), Sector::new(0, Orientability::Orientable, vec![arc(Slot::Sink), vec![BoundaryEntry::Free]]));
    b.edges.insert(
        e,
        LocusEdge {
            ends: EdgeEnds::ClosedLoop,
            sink: Occurrence::new(SectorId(2), 0, 0),
            sources: [Occurrence::new(SectorId(0), 0, 0), Occurrence::new(SectorId(1), 0, 0)],
        },
    );
    assert!(b.validate().is_empty());
    let err = unzip_edge(&b, e, Occurrence::new(SectorId(2), 0, 0)).unwrap_err();
    assert!(matches!(err, SurgeryError::WouldCreateSphere { .. }));
}

#[test]
fn scripts() {
    let b = fixture("split_ladder");
    let start = region(&[0]);
    assert_eq!(run_split_script(&b, &start, &[]).unwrap().len(), 1);

    let moves = parse_split_script("# ladder\nsplit 1 @ e0\n\nsplit 1 @ e1 b  # second rung\n").unwrap();
    let trace = run_split_script(&b, &start, &moves).unwrap();
    assert_eq!(trace.len(), 3);
    for w in trace.windows(2) {
        assert!(w[1].region.is_superset(&w[0].region));
    }
    assert_eq!(trace[2].region, all(&trace[2].complex));

    let bad = parse_split_script("split 1 @ e0\nsplit 1 @ e0\n").unwrap();
    match run_split_script(&b, &start, &bad).unwrap_err() {
        SplitError::Abort { index, error } => {
            assert_eq!(index, 2);
            assert!(matches!(*error, SplitError::Unnecessary { .. }));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(parse_split_script("split 1 @ e0\nsplat").unwrap_err(), SplitError::Parse { line: 2, message: "expected `split <kind> @ <edge> [a|b]`".into() });
    for m in &moves {
        assert_eq!(m.to_string().parse::<SplitMove>().unwrap(), *m);
    }
}

fn random_subset(rng: &mut ChaCha8Rng, of: &Region) -> Region {
    of.iter().filter(|_| rng.gen_bool(0.5)).copied().collect()
}

/// Random complexes with a random safe region obtained by dropping
/// violators until the rest is safe.
fn safe_pairs(count: usize) -> Vec<(BranchedSurfaceComplex, Region)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        seed += 1;
        let b = random(seed, 2 + (seed as usize % 7)).unwrap();
        let mut r = random_subset(&mut rng, &all(&b));
        loop {
            let report = is_safe_region(&b, &r).unwrap();
            if report.is_safe() {
                break;
            }
            for v in report.violators() {
                r.remove(&v);
            }
        }
        out.push((b, r));
    }
    out
}

#[test]
fn closure_is_a_closure_operator() {
    for (b, r) in safe_pairs(500) {
        let grown = expand_safe_region(&b, &r).unwrap();
        assert!(grown.is_superset(&r));
        assert_eq!(expand_safe_region(&b, &grown).unwrap(), grown);
        assert_eq!(expand_safe_region_ordered(&b, &r, ArcOrder::HighestFirst).unwrap(), grown);
        let mut rng = ChaCha8Rng::seed_from_u64(r.len() as u64);
        let smaller = random_subset(&mut rng, &r);
        if is_safe_region(&b, &smaller).unwrap().is_safe() {
            assert!(expand_safe_region(&b, &smaller).unwrap().is_subset(&grown));
        }
        if certify_laminar(&b, &r).unwrap().is_laminar() {
            assert!(find_sink_disks(&b).is_empty());
        }
    }
}

#[test]
fn necessary_moves_keep_containment() {
    let mut applied = [0usize; 2];
    for (b, r) in safe_pairs(300) {
        let r = expand_safe_region(&b, &r).unwrap();
        for edge in b.edges.keys() {
            for kind in [SplitKind::Slide, SplitKind::Merge] {
                for pick in [SourcePick::A, SourcePick::B] {
                    let m = SplitMove { kind, edge: *edge, pick: Some(pick) };
                    let Ok(out) = apply_split_move(&b, &r, &m) else { continue };
                    applied[kind.number() as usize - 1] += 1;
                    assert!(r.iter().all(|s| out.region.contains(&out.image[s])));
                    assert!(is_safe_region(&out.complex, &out.region).unwrap().is_safe());
                    assert!(out.complex.validate().is_empty());
                }
            }
        }
    }
    assert!(applied.iter().all(|n| *n > 20), "{applied:?}");
}

#[test]
fn unknown_region_ids_are_reported() {
    let b = pita();
    let bad: BTreeSet<SectorId> = region(&[7]);
    assert!(matches!(expand_safe_region(&b, &bad), Err(SplitError::UnknownSector(_))));
    assert!(matches!(certify_laminar(&b, &bad), Err(SplitError::UnknownSector(_))));
}
