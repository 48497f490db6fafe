//! One PASS/FAIL line per acceptance criterion. Every tolerance is exact.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};

use parity_kit::chord::{parse_corpus, ChordDiagram, Flavor};
use parity_kit::group::FgAbelianGroup;
use parity_kit::invariants::{
    l_odd, linking_multiset_signed, linking_unsigned, oriented_gaussian_z4, LinkingMultiset,
};
use parity_kit::moves::{random_walk, random_walk_with, WalkOptions};
use parity_kit::oracle::{
    axiom_sweep, enumerate_diagrams, odd_chords, sample_diagrams, sweep, verify_class_consistency,
    NamedParity,
};
use parity_kit::parity::{classify_chords, index_parity_assignment, polygons, ChordClass};
use parity_kit::snf::smith_normal_form;
use parity_kit::surface::{homological_parity, trace_faces};

const WALKS_PER_SEED: u64 = 200;
const SEED_DIAGRAMS: usize = 50;
const WALK_LEN: usize = 15;
const MAX_POLYGON: usize = 6;

type Outcome = Result<String, String>;
type Criterion = (u8, &'static str, fn() -> Outcome);

fn virt(code: &str) -> ChordDiagram {
    ChordDiagram::parse(code, Flavor::Virtual).expect("fixture parses")
}

fn criterion_1() -> Outcome {
    let d = virt("O1+ O2+ U1+ U2+");
    let genus = trace_faces(&d).map_err(|e| e.to_string())?.genus;
    let hp = homological_parity(&d).map_err(|e| e.to_string())?;
    let h = hp.abelian();
    let ls = linking_multiset_signed(&d, &hp).map_err(|e| e.to_string())?;
    let opposite = h.is_zero(&h.add(&hp.values[0], &hp.values[1])) && !h.is_zero(&hp.values[0]);
    let summary = format!("genus {genus}, H = {h}, hp = {:?}, LS = {ls}", hp.values);
    if genus == 1 && h == FgAbelianGroup::cyclic(0) && opposite && ls.values() == [2] {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn classical_report(code: &str) -> (bool, String) {
    let d = virt(code);
    let genus = trace_faces(&d).expect("virtual").genus;
    let hp = homological_parity(&d).expect("virtual");
    let h = hp.abelian();
    let ip = index_parity_assignment(&d).expect("virtual");
    let hp_zero = hp.values.iter().all(|v| h.is_zero(v));
    let ip_zero = ip.values.iter().all(|v| v[0] == 0);
    let ok = genus == 0 && h.is_trivial() && hp_zero && ip_zero;
    let ips: Vec<i64> = ip.values.iter().map(|v| v[0]).collect();
    (
        ok,
        format!(
            "{code}: genus {genus}, H = {h}, hp = {:?}, ip = {ips:?}",
            hp.values
        ),
    )
}

fn criterion_2() -> Outcome {
    let trefoil = classical_report("O1+ U2+ O3+ U1+ O2+ U3+");
    let eight = classical_report("O1+ U2+ O3- U4- U1+ O2+ U3- O4-");
    let summary = format!("{}; {}", trefoil.1, eight.1);
    if trefoil.0 && eight.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn criterion_3() -> Outcome {
    let r =
        axiom_sweep(4, Flavor::Free, NamedParity::OrientedGaussian).map_err(|e| e.to_string())?;
    let summary = format!(
        "{} diagrams, {} moves, {} failures",
        r.diagrams,
        r.moves,
        r.failures.len()
    );
    match r.failures.first() {
        None => Ok(summary),
        Some(f) => Err(format!("{summary}; first: {f}")),
    }
}

fn criterion_4() -> Outcome {
    let mut all = enumerate_diagrams(5, Flavor::Free).map_err(|e| e.to_string())?;
    let exhaustive = all.len();
    for n in 6..=8 {
        all.extend(sample_diagrams(n, Flavor::Free, 200, 0x5eed + n as u64));
    }
    let failures: Vec<String> = sweep(&all, |d| {
        verify_class_consistency(d)
            .err()
            .map(|e| format!("[{d}] {e}"))
    })
    .into_iter()
    .flatten()
    .collect();
    let summary = format!(
        "{exhaustive} diagrams at n = 5, {} sampled at n = 6..8, {} failures",
        all.len() - exhaustive,
        failures.len()
    );
    match failures.first() {
        None if exhaustive == 945 => Ok(summary),
        None => Err(summary),
        Some(f) => Err(format!("{summary}; first: {f}")),
    }
}

fn sampled_free() -> Vec<ChordDiagram> {
    (1..=8)
        .flat_map(|n| sample_diagrams(n, Flavor::Free, 150, 0xc1a55 + n as u64))
        .collect()
}

fn linked(d: &ChordDiagram, a: usize, b: usize) -> bool {
    let ends =
        |c: usize| -> Vec<usize> { (0..d.n_slots()).filter(|&s| d.slots()[s].0 == c).collect() };
    let (ea, eb) = (ends(a), ends(b));
    let inside = |s: usize| ea[0] < s && s < ea[1];
    inside(eb[0]) != inside(eb[1])
}

fn criterion_5() -> Outcome {
    let all = sampled_free();
    let mut checked = 0;
    for d in &all {
        let odd = odd_chords(d);
        let z4 = oriented_gaussian_z4(d).map_err(|e| e.to_string())?;
        for c in 0..d.n_chords() {
            if odd[c] {
                continue;
            }
            checked += 1;
            let linked_odd = (0..d.n_chords())
                .filter(|&x| odd[x] && linked(d, c, x))
                .count() as i64;
            let v = z4.values[c][0];
            if !(v == 0 || v == 2) || v != (2 * linked_odd) % 4 {
                return Err(format!(
                    "[{d}] chord {}: value {v}, {linked_odd} linked odd chords",
                    c + 1
                ));
            }
        }
    }
    Ok(format!("{} diagrams, {checked} even chords", all.len()))
}

fn criterion_6() -> Outcome {
    let free = sampled_free();
    let mut count = 0;
    for d in &free {
        let z4 = oriented_gaussian_z4(d).map_err(|e| e.to_string())?;
        for p in polygons(d, MAX_POLYGON) {
            count += 1;
            let s: i64 = p
                .chords
                .iter()
                .zip(&p.eps)
                .map(|(c, e)| e * z4.value(*c)[0])
                .sum();
            if s.rem_euclid(4) != 0 {
                return Err(format!(
                    "[{d}] polygon {:?} eps {:?} sums to {s}",
                    p.chords, p.eps
                ));
            }
        }
    }
    let virt: Vec<ChordDiagram> = (1..=6)
        .flat_map(|n| sample_diagrams(n, Flavor::Virtual, 100, 0xface5 + n as u64))
        .collect();
    let mut faces = 0;
    for d in &virt {
        let hp = homological_parity(d).map_err(|e| e.to_string())?;
        let h = hp.abelian();
        for f in trace_faces(d).map_err(|e| e.to_string())?.faces {
            faces += 1;
            let mut sum = h.zero();
            for (c, e) in f.word() {
                sum = h.add(&sum, &h.scale(e, hp.value(c)));
            }
            if !h.is_zero(&sum) {
                return Err(format!(
                    "[{d}] face word {:?} evaluates to {sum:?}",
                    f.word()
                ));
            }
        }
    }
    Ok(format!(
        "{count} polygons on {} free diagrams, {faces} faces on {} virtual diagrams",
        free.len(),
        virt.len()
    ))
}

type Unsigned = (usize, LinkingMultiset, LinkingMultiset);

fn unsigned_invariants(d: &ChordDiagram) -> Unsigned {
    let u =
        linking_unsigned(d, &oriented_gaussian_z4(d).expect("classifies")).expect("sizes match");
    (
        l_odd(d).expect("classifies"),
        u.ls_inv.nonzero(),
        u.ls_ni.nonzero(),
    )
}

fn signed_invariants(d: &ChordDiagram) -> (LinkingMultiset, FgAbelianGroup) {
    let hp = homological_parity(d).expect("virtual");
    (
        linking_multiset_signed(d, &hp).expect("sizes match"),
        hp.abelian(),
    )
}

fn criterion_7() -> Outcome {
    let free: Vec<ChordDiagram> = (0..SEED_DIAGRAMS)
        .flat_map(|i| sample_diagrams(2 + i % 4, Flavor::Free, 1, 0x1a7 + i as u64))
        .collect();
    let free_steps: Vec<Result<usize, String>> = sweep(&free, |d| {
        let base = unsigned_invariants(d);
        let mut steps = 0;
        for k in 0..WALKS_PER_SEED {
            for r in random_walk(d, WALK_LEN, d.n_slots() as u64 * 1_000_003 + k) {
                steps += 1;
                let now = unsigned_invariants(&r.target);
                if now != base {
                    return Err(format!("[{d}] after {}: {now:?} vs {base:?}", r.kind));
                }
            }
        }
        Ok(steps)
    });
    let virt: Vec<ChordDiagram> = (0..SEED_DIAGRAMS)
        .flat_map(|i| sample_diagrams(2 + i % 3, Flavor::Virtual, 1, 0x2b8 + i as u64))
        .collect();
    let virt_steps: Vec<Result<usize, String>> = sweep(&virt, |d| {
        let base = signed_invariants(d);
        let mut steps = 0;
        for k in 0..WALKS_PER_SEED {
            let mut o = WalkOptions::new(WALK_LEN, d.n_slots() as u64 * 1_000_003 + k);
            o.fixed_surface = true;
            for r in random_walk_with(d, o) {
                steps += 1;
                let now = signed_invariants(&r.target);
                if now != base {
                    return Err(format!("[{d}] after {}: {now:?} vs {base:?}", r.kind));
                }
            }
        }
        Ok(steps)
    });
    let total = |v: Vec<Result<usize, String>>| -> Result<usize, String> { v.into_iter().sum() };
    let f = total(free_steps)?;
    let v = total(virt_steps)?;
    Ok(format!(
        "{} free seeds and {} virtual seeds, {WALKS_PER_SEED} chains each of length {WALK_LEN}: {f} free and {v} virtual moves",
        free.len(),
        virt.len()
    ))
}

fn criterion_8() -> Outcome {
    let all = sampled_free();
    for d in &all {
        let classes = classify_chords(d).map_err(|e| e.to_string())?;
        let e1 = classes.iter().filter(|&&c| c == ChordClass::E1).count();
        if e1 % 2 != 0 {
            return Err(format!("[{d}] |E1| = {e1}"));
        }
    }
    Ok(format!("{} diagrams", all.len()))
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_parity-kit"))
        .args(args)
        .output()
        .expect("binary runs");
    let mut bytes = out.stdout;
    bytes.extend(out.status.code().unwrap_or(-1).to_string().bytes());
    bytes
}

fn criterion_9() -> Outcome {
    let divisors = |m: &[Vec<i64>], cols| -> Vec<i64> {
        smith_normal_form(m, cols)
            .divisors
            .iter()
            .map(|d| i64::try_from(d).expect("small"))
            .collect()
    };
    let snf_ok = divisors(&[vec![2, 0], vec![0, 3]], 2) == [1, 6]
        && smith_normal_form(&[vec![0, 0], vec![0, 0]], 2).rank == 0
        && divisors(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]], 3) == [1, 1, 1];
    if !snf_ok {
        return Err("SNF fixtures disagree".into());
    }
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/corpus.tsv");
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let entries = parse_corpus(&text).map_err(|e| e.to_string())?;
    for e in &entries {
        let d =
            ChordDiagram::parse(&e.code, e.flavor).map_err(|err| format!("{}: {err}", e.name))?;
        if d.serialize() != e.code {
            return Err(format!(
                "{}: {:?} serialized as {:?}",
                e.name,
                e.code,
                d.serialize()
            ));
        }
    }
    if entries.len() != 30 {
        return Err(format!("corpus has {} entries", entries.len()));
    }
    let runs: [&[&str]; 3] = [
        &[
            "fuzz",
            "--seeds",
            "6",
            "--len",
            "8",
            "--chords",
            "3",
            "--rng-seed",
            "11",
        ],
        &["corpus", path],
        &[
            "invariants",
            "--flavor",
            "virtual",
            "O1+ O2+ U1+ U2+",
            "O1- U2+ O3+ U1- O4- U3+ O2+ U4-",
        ],
    ];
    for args in runs {
        if cli(args) != cli(args) {
            return Err(format!("two runs of {args:?} differ"));
        }
    }
    Ok(format!(
        "3 SNF fixtures, {} corpus round trips, {} CLI commands run twice",
        entries.len(),
        runs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "virtual trefoil fixture", criterion_1),
        (2, "classical triviality", criterion_2),
        (3, "axiom sweep, free n <= 4", criterion_3),
        (4, "classification consistency", criterion_4),
        (5, "even-chord law", criterion_5),
        (6, "polygon and face identities", criterion_6),
        (7, "invariance along move chains", criterion_7),
        (8, "|E1| is even", criterion_8),
        (9, "infrastructure", criterion_9),
    ];
    let mut failed = BTreeSet::new();
    for (n, name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(detail) => {
                println!("FAIL criterion {n} ({name}): {detail}");
                failed.insert(n);
            }
        }
    }
    let (ok, detail) = classical_report("O1- U2+ O3+ U1- O4- U3+ O2+ U4-");
    println!(
        "note: planar figure-eight {}: {detail}",
        if ok { "trivial" } else { "NOT trivial" }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
