use laminar::complex::decompose_chains_cycles;
use laminar::holonomy::rational::{int, q, ten_to_minus};
use laminar::holonomy::PlMap;
use laminar::io::generators::{closed_surface, coherent_mobius, disk_sink, necklace, necklace_with, pita, NecklaceOptions, TailKind};
use laminar::lamination::*;
use laminar::complex::{GoFlags, SectorId, Side};

fn eps() -> laminar::holonomy::rational::Q {
    ten_to_minus(12)
}

#[test]
fn collar_counts() {
    let c = build_collar(&closed_surface(2).unwrap()).unwrap();
    assert!(c.pieces.is_empty());
    assert_eq!(c.components.len(), 1);

    let c = build_collar(&disk_sink()).unwrap();
    assert_eq!(c.pieces.len(), 1);
    assert_eq!(c.tracks().count(), 1);
    let lam = collar_lamination(&c);
    assert_eq!((lam.blocks.len(), lam.gluings.len()), (2, 1));

    for k in 2..6 {
        let c = build_collar(&necklace(k).unwrap()).unwrap();
        assert_eq!(c.components.len(), k + 1);
        assert_eq!(c.tracks().count(), k);
        assert!(c.tracks().all(|t| t.tails.len() == 1 && t.check_puncture().is_ok()));
        assert!(covers_all_fibers(&c, &collar_lamination(&c)));
    }
}

#[test]
fn reglue_examples() {
    let track = BoundaryTrainTrack { disk: SectorId(0), circle_len: 2, tails: vec![], puncture: 1 };
    let block = FiberPiece::Cantor { lo: int(-1), hi: int(1), label: "b".into() };
    let circles = AnnulusLamination::new(vec![block.clone()], PlMap::identity()).unwrap();
    let (out, cut) = reglue_to_circles(&circles, &track).unwrap();
    assert_eq!(out, circles);
    assert!(cut.map.is_identity());

    let spiral = AnnulusLamination::new(vec![block], PlMap::through(int(0), q(1, 2)).unwrap()).unwrap();
    assert_eq!(spiral.spirals.len(), 1);
    assert_eq!(spiral.spirals[0].limit, int(1));
    let (out, _) = reglue_to_circles(&spiral, &track).unwrap();
    assert!(out.all_circles() && out.return_map.is_identity());
    assert_eq!(out.fiber_set, spiral.fiber_set);

    let bad = BoundaryTrainTrack { puncture: 0, tails: vec![Tail { position: 0, pattern: AttachmentPattern::Above, direction: SwitchDirection::Forward }], ..track };
    assert!(matches!(reglue_to_circles(&spiral, &bad), Err(LamError::PunctureNotSingle { .. })));
}

#[test]
fn reglue_random_round_trips() {
    for seed in 0..300 {
        let (mu, track) = random_annulus_lamination(seed);
        assert!(mu.annotations_consistent());
        let (out, cut) = reglue_to_circles(&mu, &track).unwrap();
        assert!(out.all_circles());
        assert_eq!(out.fiber_set, mu.fiber_set);
        assert_eq!(restore(&out, &cut).unwrap(), mu);
        let (again, cut2) = reglue_to_circles(&out, &track).unwrap();
        assert_eq!(again, out);
        assert!(cut2.map.is_identity());
    }
}

#[test]
fn disk_sink_is_refused() {
    assert!(matches!(build_lamination_certificate(&disk_sink(), &eps()), Err(LamError::SinkDisk(_))));
}

#[test]
fn closed_genus_two_is_one_nondisk_step() {
    let cert = build_lamination_certificate(&closed_surface(2).unwrap(), &eps()).unwrap();
    let steps = cert.steps();
    assert_eq!(steps.len(), 2);
    assert!(matches!(steps[1], Step::NondiskExtend { case: NondiskCase::Closed, .. }));
    check_certificate(&cert, 32).unwrap();
}

#[test]
fn necklace_certificate() {
    let mut b = necklace(3).unwrap();
    b.flags = GoFlags::all_true();
    let cert = build_lamination_certificate(&b, &eps()).unwrap();
    let steps = cert.steps();
    let count = |f: fn(&Step) -> bool| steps.iter().filter(|s| f(s)).count();
    assert_eq!(count(|s| matches!(s, Step::Collar { .. })), 1);
    assert_eq!(count(|s| matches!(s, Step::ChainReglue { .. })), 0);
    assert_eq!(count(|s| matches!(s, Step::NondiskExtend { .. })), 1);
    assert_eq!(count(|s| matches!(s, Step::CycleExtend { case: Some(_), .. })), 1);
    let report = check_certificate(&cert, 32).unwrap();
    assert!(report.witnesses >= 1);
    let text = cert.to_json();
    assert_eq!(LaminationCertificate::from_json(&text).unwrap(), cert);
}

#[test]
fn cycle_cases_and_mobius() {
    let b = necklace_with(2, &NecklaceOptions { sink_sides: vec![Side::Left; 2], tail: TailKind::Disks }).unwrap();
    let d = decompose_chains_cycles(&b).unwrap();
    assert_eq!(d.cycles.len(), 1);
    let cert = build_lamination_certificate(&b, &eps()).unwrap();
    check_certificate(&cert, 32).unwrap();

    let m = coherent_mobius(3).unwrap();
    let cert = build_lamination_certificate(&m, &eps()).unwrap();
    assert!(cert.steps().iter().any(|s| matches!(s, Step::MobiusExtend { .. })));
    check_certificate(&cert, 32).unwrap();
}

#[test]
fn pita_chains_close_up() {
    let mut b = pita();
    assert!(matches!(build_lamination_certificate(&b, &eps()), Err(LamError::MissingAssertions(_))));
    b.sectors.get_mut(&SectorId(2)).unwrap().essential_curve = true;
    let cert = build_lamination_certificate(&b, &eps()).unwrap();
    let reglues: Vec<_> = cert.steps().into_iter().filter_map(|s| match s {
        Step::ChainReglue { after, .. } => Some(after.clone()),
        _ => None,
    }).collect();
    assert_eq!(reglues.len(), 2);
    assert!(reglues.iter().all(AnnulusLamination::all_circles));
    check_certificate(&cert, 32).unwrap();
}

#[test]
fn fuzzed_certificates_are_rejected() {
    let mut b = necklace(3).unwrap();
    b.flags = GoFlags::all_true();
    let text = build_lamination_certificate(&b, &eps()).unwrap().to_json();
    let mut tried = 0;
    for seed in 0..60 {
        let Some((mutated, path)) = mutate_step_field(&text, seed) else { continue };
        tried += 1;
        let verdict = LaminationCertificate::from_json(&mutated).and_then(|c| check_certificate(&c, 16));
        assert!(verdict.is_err(), "mutation at {path} accepted");
    }
    assert!(tried > 40);
}
