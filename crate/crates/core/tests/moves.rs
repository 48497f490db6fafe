use parity_kit::chord::{ChordDiagram, Flavor};
use parity_kit::moves::{
    apply, chain_correspondence, enumerate_moves, random_walk, random_walk_with, MoveKind,
    MoveRecord, WalkOptions,
};
use parity_kit::oracle::{enumerate_diagrams, sample_diagrams};
use parity_kit::surface::trace_faces;

fn free_upto(n: usize) -> Vec<ChordDiagram> {
    (0..=n)
        .flat_map(|k| enumerate_diagrams(k, Flavor::Free).unwrap())
        .collect()
}

fn every_record(d: &ChordDiagram) -> Vec<MoveRecord> {
    enumerate_moves(d)
        .iter()
        .map(|m| apply(d, m).unwrap_or_else(|e| panic!("[{d}] {m}: {e}")))
        .collect()
}

#[test]
fn inverse_moves_round_trip_on_small_free_diagrams() {
    let mut checked = 0;
    for d in free_upto(4) {
        for r in every_record(&d) {
            let back = apply(&r.target, &r.inverse)
                .unwrap_or_else(|e| panic!("[{d}] {} then {}: {e}", r.kind, r.inverse));
            assert!(
                back.target.is_isomorphic(&d),
                "[{d}] {} then {} gave {}",
                r.kind,
                r.inverse,
                back.target
            );
            let composite = chain_correspondence(&[r.clone(), back.clone()]);
            for c in d.chord_ids() {
                if let Some(t) = composite[c.0] {
                    assert_eq!(back.target.label(t), d.label(c), "[{d}] {}", r.kind);
                }
            }
            let kept = composite.iter().flatten().count();
            assert_eq!(kept, d.n_chords() - r.vanished.len(), "[{d}] {}", r.kind);
            checked += 1;
        }
    }
    assert!(checked > 9000);
}

#[test]
fn correspondence_domains() {
    for d in free_upto(4) {
        for r in every_record(&d) {
            let (missing_src, missing_tgt) = (r.vanished.len(), r.created.len());
            let expected = match r.kind {
                MoveKind::R1Remove { .. } => (1, 0),
                MoveKind::R1Add { .. } => (0, 1),
                MoveKind::R2Remove { .. } => (2, 0),
                MoveKind::R2Add { .. } => (0, 2),
                MoveKind::R3 { .. } => (0, 0),
            };
            assert_eq!((missing_src, missing_tgt), expected, "[{d}] {}", r.kind);
            assert_eq!(
                r.correspondence.iter().flatten().count(),
                d.n_chords() - missing_src
            );
            for c in d.chord_ids() {
                if let Some(t) = r.image(c) {
                    assert_eq!(r.preimage(t), Some(c));
                }
            }
        }
    }
}

#[test]
fn r3_keeps_chord_count() {
    for d in free_upto(4) {
        for r in every_record(&d)
            .into_iter()
            .filter(|r| matches!(r.kind, MoveKind::R3 { .. }))
        {
            assert_eq!(r.target.n_chords(), d.n_chords());
            assert!(matches!(r.inverse, MoveKind::R3 { .. }));
        }
    }
}

fn virtual_pool() -> Vec<ChordDiagram> {
    let mut out: Vec<ChordDiagram> = (0..=2)
        .flat_map(|k| enumerate_diagrams(k, Flavor::Virtual).unwrap())
        .collect();
    for n in 3..=5 {
        out.extend(sample_diagrams(n, Flavor::Virtual, 40, 77 + n as u64));
    }
    out
}

#[test]
fn projection_commutes_with_moves() {
    for d in virtual_pool() {
        let flat = d.project(Flavor::Flat).unwrap();
        let free = d.project(Flavor::Free).unwrap();
        for r in every_record(&d) {
            let rf = apply(&flat, &r.kind).unwrap_or_else(|e| panic!("[{flat}] {}: {e}", r.kind));
            assert_eq!(
                rf.target,
                r.target.project(Flavor::Flat).unwrap(),
                "[{d}] {}",
                r.kind
            );
            assert_eq!(rf.correspondence, r.correspondence);
            let rfree = apply(&free, &r.kind.forget_decorations())
                .unwrap_or_else(|e| panic!("[{free}] {}: {e}", r.kind));
            assert_eq!(
                rfree.target,
                r.target.project(Flavor::Free).unwrap(),
                "[{d}] {}",
                r.kind
            );
            assert_eq!(rfree.correspondence, r.correspondence);
        }
    }
}

#[test]
fn oriented_r3_sites_bound_triangular_faces() {
    let mut sites = 0;
    for d in virtual_pool() {
        for r in every_record(&d) {
            let Some((_, gaps)) = r.triangle else {
                continue;
            };
            sites += 1;
            assert!(
                trace_faces(&r.source).unwrap().triangle(gaps).is_some(),
                "[{d}] {}",
                r.kind
            );
            assert!(
                trace_faces(&r.target).unwrap().triangle(gaps).is_some(),
                "[{d}] {}",
                r.kind
            );
            assert_eq!(
                trace_faces(&r.source).unwrap().genus,
                trace_faces(&r.target).unwrap().genus
            );
        }
    }
    assert!(sites > 0);
}

#[test]
fn walks_are_reproducible() {
    let d = ChordDiagram::parse("O1+ U2- O3+ U1+ O2- U3+", Flavor::Virtual).unwrap();
    let a: Vec<String> = random_walk(&d, 20, 9)
        .iter()
        .map(|r| r.kind.to_string())
        .collect();
    let b: Vec<String> = random_walk(&d, 20, 9)
        .iter()
        .map(|r| r.kind.to_string())
        .collect();
    assert_eq!(a, b);
    let mut o = WalkOptions::new(20, 9);
    o.fixed_surface = true;
    let g = trace_faces(&d).unwrap().genus;
    for r in random_walk_with(&d, o) {
        assert_eq!(trace_faces(&r.target).unwrap().genus, g);
    }
}

#[test]
fn walks_respect_the_chord_cap() {
    let d = ChordDiagram::parse("1 2 1 2", Flavor::Free).unwrap();
    let mut o = WalkOptions::new(60, 4);
    o.max_chords = 5;
    for r in random_walk_with(&d, o) {
        assert!(r.target.n_chords() <= 5);
    }
}
