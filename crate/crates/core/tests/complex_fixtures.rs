use laminar::complex::*;
use laminar::io::generators::*;
use laminar::io::{parse, serialize};

fn s(i: u32) -> SectorId {
    SectorId(i)
}

#[test]
fn named_fixtures_validate() {
    for b in [
        disk_sink(),
        pita(),
        bubbled_sink(),
        necklace(2).unwrap(),
        necklace(4).unwrap(),
        coherent_mobius(3).unwrap(),
        closed_surface(2).unwrap(),
        from_expr("necklace_disks(3)").unwrap(),
    ] {
        assert!(b.validate().is_empty(), "{}: {:?}", b.name, b.validate());
        assert_eq!(parse(&serialize(&b)).unwrap(), b);
    }
}

#[test]
fn closed_torus_has_no_violations() {
    let mut b = BranchedSurfaceComplex::new("torus");
    b.sectors.insert(s(0), Sector::new(0, Orientability::Orientable, vec![]));
    assert!(b.validate().is_empty());
}

#[test]
fn double_sink_is_reported_on_its_edge() {
    let mut b = disk_sink();
    let w = b.sectors.get_mut(&s(1)).unwrap();
    w.boundary_circuits[0][0] = BoundaryEntry::arc(EdgeId(0), Slot::Sink, Side::Left);
    let v = b.validate();
    assert!(v.iter().any(|x| matches!(x, Violation::SlotCount { edge: EdgeId(0), sinks: 2, .. })), "{v:?}");
}

#[test]
fn disk_sink_detectors() {
    let b = disk_sink();
    assert_eq!(find_sink_disks(&b), [s(0)].into());
    assert!(find_removable_disks(&b).is_empty());
}

#[test]
fn pita_detectors_and_surgery() {
    let b = pita();
    assert_eq!(find_removable_disks(&b), [s(0), s(1)].into());
    assert_eq!(find_bubble_candidates(&b), [(s(0), s(1))].into());
    assert!(find_sink_disks(&b).is_empty());

    let after = delete_removable(&b, s(1)).unwrap();
    assert!(after.validate().is_empty());
    assert!(after.edges.is_empty());
    assert_eq!(after.sectors.len(), 1);
    let merged = &after.sectors[&s(0)];
    assert_eq!(merged.euler_char, 1);
    assert_eq!(merged.boundary_circuits, vec![vec![BoundaryEntry::Free]]);

    let steps = make_efficient(&b).unwrap();
    assert_eq!(steps.len(), 2);
    assert_eq!(steps[0].deleted, Some(s(0)));

    assert!(matches!(
        collapse_bubble(&b, (s(0), s(1)), false),
        Err(SurgeryError::UnconfirmedBubble(..))
    ));
    let collapsed = collapse_bubble(&b, (s(0), s(1)), true).unwrap();
    assert_eq!(collapsed.sectors.len(), 1);
    assert!(collapsed.edges.is_empty());
    assert!(collapsed.sectors.values().all(Sector::is_disk));
}

#[test]
fn bubble_hides_a_sink_disk() {
    let b = bubbled_sink();
    assert!(find_sink_disks(&b).is_empty());
    let c = collapse_bubble(&b, (s(2), s(3)), true).unwrap();
    assert!(c.validate().is_empty());
    assert_eq!(find_sink_disks(&c).len(), 1);
}

#[test]
fn necklace_decomposes_into_one_cycle() {
    for k in 2..6 {
        let b = necklace(k).unwrap();
        assert_eq!(b.sectors.len(), k + 1);
        assert_eq!(b.edges.len(), k);
        assert!(find_sink_disks(&b).is_empty());
        assert!(find_bubble_candidates(&b).is_empty());
        let d = decompose_chains_cycles(&b).unwrap();
        assert_eq!(d.cycles.len(), 1);
        assert_eq!(d.cycles[0].len(), k);
        assert!(d.chains.is_empty());
        let core = cycle_core(&b, &d.cycles[0], &d.out_edge).unwrap();
        assert_eq!(core.kind, CoreKind::Annulus);
        assert_eq!(core.tails().len(), k);
    }
    let m = coherent_mobius(3).unwrap();
    let d = decompose_chains_cycles(&m).unwrap();
    assert_eq!(cycle_core(&m, &d.cycles[0], &d.out_edge).unwrap().kind, CoreKind::Mobius);
}

#[test]
fn necklace_with_unknown_side_has_unknown_core() {
    let mut opts = NecklaceOptions::uniform(3);
    opts.sink_sides[1] = Side::Unknown;
    let b = necklace_with(3, &opts).unwrap();
    let d = decompose_chains_cycles(&b).unwrap();
    assert_eq!(cycle_core(&b, &d.cycles[0], &d.out_edge).unwrap().kind, CoreKind::Unknown);
}

#[test]
fn disk_feeding_annulus_is_a_chain() {
    let b = pita();
    let free_disk = delete_removable(&b, s(1)).unwrap();
    assert_eq!(decompose_chains_cycles(&free_disk), Err(DecomposeError::DiskWithoutOutEdge(s(0))));
    let d = decompose_chains_cycles(&b).unwrap();
    assert!(d.cycles.is_empty());
    assert_eq!(d.chains.len(), 2);
    assert_eq!(d.chains[0].disks.len(), 1);
    assert_eq!(d.chains[0].terminal, ChainTerminal::NonDisk(s(2)));
}

#[test]
fn tail_disks_give_witness() {
    let b = from_expr("necklace_disks(3)").unwrap();
    assert!(b.sectors.values().all(Sector::is_disk));
    assert!(all_disk_cycle_witness(&b).is_some());
    assert!(all_disk_cycle_witness(&disk_sink()).is_none());
}

#[test]
fn random_complexes_validate_and_round_trip() {
    for seed in 0..300 {
        let b = random(seed, 1 + (seed as usize % 8)).unwrap();
        assert!(b.validate().is_empty(), "seed {seed}: {:?}", b.validate());
        assert_eq!(parse(&serialize(&b)).unwrap(), b, "seed {seed}");
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_is_a_fixed_point(seed in proptest::prelude::any::<u64>(), size in 1usize..12) {
        let b = random(seed, size).unwrap();
        let text = serialize(&b);
        let back = parse(&text).unwrap();
        proptest::prop_assert_eq!(serialize(&back), text);
        proptest::prop_assert_eq!(back, b);
    }
}
