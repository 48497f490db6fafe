//! Brute-force enumeration, independent recomputations and axiom sweeps.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::chord::{ChordDiagram, ChordId, DiagramError, Flavor, Passage, Sign};
use crate::moves::{apply, enumerate_moves, preserves_surface, MoveRecord};
use crate::parity::{
    check_axioms, classify_chords, gaussian_parity_assignment, index_parity_assignment,
    oriented_gaussian_parity, AxiomCheck, AxiomMode, ChordClass, ParityAssignment, ParityError,
};
use crate::surface::homological_parity;

pub const MAX_ENUMERATED_CHORDS: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{n} chords is past the enumeration limit of {max}")]
    SizeLimit { n: usize, max: usize },
    #[error("unknown parity `{0}` (expected gaussian, index, oriented-gaussian or homological)")]
    UnknownParity(String),
}

/// Every chord diagram with `n` chords on a based circle: all perfect
/// matchings of `2n` slots, `(2n-1)!!` of them, with every decoration for
/// oriented flavors. Chords are labeled `1..n` by first endpoint.
pub fn enumerate_diagrams(n: usize, flavor: Flavor) -> Result<Vec<ChordDiagram>, OracleError> {
    if n > MAX_ENUMERATED_CHORDS {
        return Err(OracleError::SizeLimit {
            n,
            max: MAX_ENUMERATED_CHORDS,
        });
    }
    let mut matchings = Vec::new();
    let mut slots = vec![None; 2 * n];
    matchings_into(&mut slots, 0, &mut matchings);
    let decorations: Vec<Vec<(Sign, Passage)>> = if flavor.is_oriented() {
        let one = [
            (Sign::Plus, Passage::First),
            (Sign::Plus, Passage::Second),
            (Sign::Minus, Passage::First),
            (Sign::Minus, Passage::Second),
        ];
        (0..4usize.pow(n as u32))
            .map(|mut code| {
                (0..n)
                    .map(|_| {
                        let d = one[code % 4];
                        code /= 4;
                        d
                    })
                    .collect()
            })
            .collect()
    } else {
        vec![vec![(Sign::Plus, Passage::First); n]]
    };
    let mut out = Vec::with_capacity(matchings.len() * decorations.len());
    for m in &matchings {
        for dec in &decorations {
            out.push(build(flavor, m, dec));
        }
    }
    Ok(out)
}

fn matchings_into(slots: &mut Vec<Option<usize>>, next: usize, out: &mut Vec<Vec<usize>>) {
    let Some(first) = slots.iter().position(Option::is_none) else {
        out.push(slots.iter().map(|s| s.expect("matched")).collect());
        return;
    };
    for j in first + 1..slots.len() {
        if slots[j].is_none() {
            slots[first] = Some(next);
            slots[j] = Some(next);
            matchings_into(slots, next + 1, out);
            slots[first] = None;
            slots[j] = None;
        }
    }
}

fn build(flavor: Flavor, matching: &[usize], dec: &[(Sign, Passage)]) -> ChordDiagram {
    let decorations = dec
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| ((i + 1).to_string(), s, t))
        .collect();
    ChordDiagram::from_parts(
        flavor,
        matching.iter().map(|&c| ChordId(c)).collect(),
        decorations,
        None,
    )
    .expect("a perfect matching is a valid diagram")
}

/// A uniformly random matching on `2n` slots with random decorations.
pub fn random_diagram<R: Rng>(n: usize, flavor: Flavor, rng: &mut R) -> ChordDiagram {
    let mut pool: Vec<usize> = (0..2 * n).collect();
    pool.shuffle(rng);
    let mut matching = vec![0; 2 * n];
    let mut pairs: Vec<[usize; 2]> = pool
        .chunks(2)
        .map(|p| [p[0].min(p[1]), p[0].max(p[1])])
        .collect();
    pairs.sort();
    for (i, p) in pairs.iter().enumerate() {
        matching[p[0]] = i;
        matching[p[1]] = i;
    }
    let dec: Vec<(Sign, Passage)> = (0..n)
        .map(|_| {
            let s = if rng.gen() { Sign::Plus } else { Sign::Minus };
            let t = if rng.gen() {
                Passage::First
            } else {
                Passage::Second
            };
            (s, t)
        })
        .collect();
    build(flavor, &matching, &dec)
}

pub fn sample_diagrams(n: usize, flavor: Flavor, count: usize, seed: u64) -> Vec<ChordDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_diagram(n, flavor, &mut rng))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NamedParity {
    Gaussian,
    Index,
    OrientedGaussian,
    Homological,
}

impl NamedParity {
    pub fn compute(self, d: &ChordDiagram) -> Result<ParityAssignment, ParityError> {
        Ok(match self {
            NamedParity::Gaussian => gaussian_parity_assignment(d),
            NamedParity::Index => index_parity_assignment(d)?,
            NamedParity::OrientedGaussian => oriented_gaussian_parity(d)?,
            NamedParity::Homological => homological_parity(d)?,
        })
    }

    pub fn mode(self) -> AxiomMode {
        match self {
            NamedParity::Gaussian => AxiomMode::Unoriented,
            _ => AxiomMode::Oriented,
        }
    }

    /// Whether the parity only makes sense for moves inside one surface.
    pub fn needs_fixed_surface(self) -> bool {
        self == NamedParity::Homological
    }
}

impl fmt::Display for NamedParity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamedParity::Gaussian => "gaussian",
            NamedParity::Index => "index",
            NamedParity::OrientedGaussian => "oriented-gaussian",
            NamedParity::Homological => "homological",
        })
    }
}

impl FromStr for NamedParity {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, OracleError> {
        match s {
            "gaussian" => Ok(NamedParity::Gaussian),
            "index" => Ok(NamedParity::Index),
            "oriented-gaussian" | "og" => Ok(NamedParity::OrientedGaussian),
            "homological" => Ok(NamedParity::Homological),
            _ => Err(OracleError::UnknownParity(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomFailure {
    pub diagram: String,
    pub mv: String,
    pub check: Option<AxiomCheck>,
    pub error: Option<String>,
}

impl fmt::Display for AxiomFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: ", self.diagram, self.mv)?;
        match (&self.check, &self.error) {
            (Some(c), _) => write!(f, "{:?} {}", c.axiom, c.detail),
            (None, Some(e)) => f.write_str(e),
            (None, None) => f.write_str("failed"),
        }
    }
}

/// Checks one move record against a parity.
pub fn verify_record(rec: &MoveRecord, parity: NamedParity) -> Vec<AxiomFailure> {
    let fail = |check: Option<AxiomCheck>, error: Option<String>| AxiomFailure {
        diagram: rec.source.serialize(),
        mv: rec.kind.to_string(),
        check,
        error,
    };
    let (a, b) = match (parity.compute(&rec.source), parity.compute(&rec.target)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![fail(None, Some(e.to_string()))],
    };
    match check_axioms(&a, &b, rec, parity.mode()) {
        Ok(report) => report
            .checks
            .into_iter()
            .filter(|c| !c.passed)
            .map(|c| fail(Some(c), None))
            .collect(),
        Err(e) => vec![fail(None, Some(e.to_string()))],
    }
}

/// Applies every enumerated move of `d` and checks the parity axioms on each.
/// Returns the number of moves checked and the failures.
pub fn verify_parity_axioms(d: &ChordDiagram, parity: NamedParity) -> (usize, Vec<AxiomFailure>) {
    let mut checked = 0;
    let mut failures = Vec::new();
    for m in enumerate_moves(d) {
        let rec = match apply(d, &m) {
            Ok(r) => r,
            Err(e) => {
                failures.push(AxiomFailure {
                    diagram: d.serialize(),
                    mv: m.to_string(),
                    check: None,
                    error: Some(e.to_string()),
                });
                continue;
            }
        };
        if parity.needs_fixed_surface() && !preserves_surface(&rec) {
            continue;
        }
        checked += 1;
        failures.extend(verify_record(&rec, parity));
    }
    (checked, failures)
}

/// Chord index per slot, straight from the diagram.
fn matching(d: &ChordDiagram) -> Vec<usize> {
    d.slots().iter().map(|c| c.0).collect()
}

/// Endpoints strictly inside `(lo, hi)`.
fn between(m: &[usize], lo: usize, hi: usize) -> &[usize] {
    &m[lo + 1..hi]
}

/// Gaussian parity recomputed from the slot sequence.
pub fn odd_chords(d: &ChordDiagram) -> Vec<bool> {
    let m = matching(d);
    let n = d.n_chords();
    let mut ends = vec![Vec::new(); n];
    for (i, &c) in m.iter().enumerate() {
        ends[c].push(i);
    }
    ends.iter().map(|e| (e[1] - e[0] - 1) % 2 == 1).collect()
}

/// Every value of `k_e + l_o + 1 (mod 2)` over all choices of two opposite
/// arcs between endpoints of `a` and `b`, recomputed from scratch.
pub fn pair_rule_readings(d: &ChordDiagram, a: usize, b: usize) -> Vec<u8> {
    let m = matching(d);
    let odd = odd_chords(d);
    let mut pts: Vec<usize> = m
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == a || c == b)
        .map(|(i, _)| i)
        .collect();
    pts.sort();
    // the four arcs between consecutive endpoints; arc 3 wraps around
    let arc = |i: usize| -> Vec<usize> {
        if i < 3 {
            between(&m, pts[i], pts[i + 1]).to_vec()
        } else {
            m[pts[3] + 1..]
                .iter()
                .chain(&m[..pts[0]])
                .copied()
                .collect()
        }
    };
    let bounded_by_both = |i: usize| m[pts[i]] != m[pts[(i + 1) % 4]];
    let mut out = Vec::new();
    for i in 0..2 {
        let j = i + 2;
        if !(bounded_by_both(i) && bounded_by_both(j)) {
            continue;
        }
        for (x, y) in [(arc(i), arc(j)), (arc(j), arc(i))] {
            let k_e = x.iter().filter(|&&c| !odd[c]).count();
            let l_o = y.iter().filter(|&&c| odd[c]).count();
            out.push(((k_e + l_o + 1) % 2) as u8);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ClassFailure {
    ArcChoice {
        a: String,
        b: String,
        readings: Vec<u8>,
    },
    NotTransitive {
        a: String,
        b: String,
        c: String,
    },
    TooManyClasses(usize),
    Disagrees {
        chord: String,
        expected: String,
        got: String,
    },
    Error(String),
}

impl fmt::Display for ClassFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassFailure::ArcChoice { a, b, readings } => {
                write!(f, "{a},{b}: arc readings {readings:?}")
            }
            ClassFailure::NotTransitive { a, b, c } => {
                write!(f, "{a}~{b}, {b}~{c} but not {a}~{c}")
            }
            ClassFailure::TooManyClasses(k) => write!(f, "{k} odd classes"),
            ClassFailure::Disagrees {
                chord,
                expected,
                got,
            } => write!(f, "{chord}: expected {expected}, got {got}"),
            ClassFailure::Error(e) => f.write_str(e),
        }
    }
}

/// Recomputes the odd-chord relation pairwise and checks that it is an
/// equivalence with at most two classes, that it never depends on the arc
/// choice, and that `classify_chords` produces the same partition and the
/// same even classes.
pub fn verify_class_consistency(d: &ChordDiagram) -> Result<(), ClassFailure> {
    let odd = odd_chords(d);
    let n = d.n_chords();
    let label = |c: usize| d.label(ChordId(c)).to_string();
    let mut same = vec![vec![true; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            if !(odd[a] && odd[b]) {
                continue;
            }
            let readings: BTreeSet<u8> = pair_rule_readings(d, a, b).into_iter().collect();
            if readings.len() != 1 {
                return Err(ClassFailure::ArcChoice {
                    a: label(a),
                    b: label(b),
                    readings: readings.into_iter().collect(),
                });
            }
            let s = readings.contains(&0);
            same[a][b] = s;
            same[b][a] = s;
        }
    }
    let odds: Vec<usize> = (0..n).filter(|&c| odd[c]).collect();
    for &a in &odds {
        for &b in &odds {
            for &c in &odds {
                if same[a][b] && same[b][c] && !same[a][c] {
                    return Err(ClassFailure::NotTransitive {
                        a: label(a),
                        b: label(b),
                        c: label(c),
                    });
                }
            }
        }
    }
    let mut reps: Vec<usize> = Vec::new();
    for &a in &odds {
        if !reps.iter().any(|&r| same[r][a]) {
            reps.push(a);
        }
    }
    if reps.len() > 2 {
        return Err(ClassFailure::TooManyClasses(reps.len()));
    }
    let got = classify_chords(d).map_err(|e| ClassFailure::Error(e.to_string()))?;
    let m = matching(d);
    for c in 0..n {
        let expected = if odd[c] {
            let first = odds
                .iter()
                .copied()
                .min_by_key(|&o| m.iter().position(|&x| x == o))
                .expect("odd chord");
            if same[first][c] {
                ChordClass::OPrime
            } else {
                ChordClass::ODoublePrime
            }
        } else {
            let linked_odd = odds.iter().filter(|&&o| linked(&m, c, o)).count();
            if linked_odd % 2 == 0 {
                ChordClass::E0
            } else {
                ChordClass::E1
            }
        };
        if got[c] != expected {
            return Err(ClassFailure::Disagrees {
                chord: label(c),
                expected: expected.to_string(),
                got: got[c].to_string(),
            });
        }
    }
    Ok(())
}

fn linked(m: &[usize], a: usize, b: usize) -> bool {
    let mut seq = m.iter().filter(|&&c| c == a || c == b);
    let first = *seq.next().expect("chord a or b");
    let second = *seq.next().expect("four endpoints");
    first != second && {
        let third = *seq.next().expect("four endpoints");
        third == first
    }
}

/// Faces of the Carter surface counted by hand: every half-edge at a
/// crossing gets an angle, and a face leaves a crossing along the half-edge
/// that follows the arriving one counterclockwise.
pub fn face_count(d: &ChordDiagram) -> Result<usize, DiagramError> {
    if !d.flavor().is_oriented() {
        return Err(DiagramError::WrongFlavor {
            expected: "flat or virtual",
            got: d.flavor(),
        });
    }
    let m = d.n_slots();
    if m == 0 {
        return Ok(2);
    }
    // half-edge (slot, outgoing?) -> angle in quarter turns at its crossing
    let angle = |slot: usize, out: bool| -> u8 {
        let c = d.chord(d.chord_at(slot));
        let is_tail = c.tail_slot() == slot;
        match (is_tail, out) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
        }
    };
    let half_edges: Vec<(usize, bool)> = (0..m).flat_map(|s| [(s, true), (s, false)]).collect();
    let ccw_next = |slot: usize, out: bool| -> (usize, bool) {
        let c = d.chord(d.chord_at(slot));
        let target = (angle(slot, out) + 1) % 4;
        [c.ends[0], c.ends[1]]
            .into_iter()
            .flat_map(|s| [(s, true), (s, false)])
            .find(|&(s, o)| angle(s, o) == target)
            .expect("four half-edges per crossing")
    };
    let mut seen = BTreeSet::new();
    let mut faces = 0;
    for &start in &half_edges {
        if seen.contains(&start) {
            continue;
        }
        faces += 1;
        let mut cur = start;
        while seen.insert(cur) {
            // walk along the edge to the half-edge at its far end
            let (slot, out) = cur;
            let far = if out {
                ((slot + 1) % m, false)
            } else {
                ((slot + m - 1) % m, true)
            };
            cur = ccw_next(far.0, far.1);
        }
    }
    Ok(faces)
}

pub fn genus_by_hand(d: &ChordDiagram) -> Result<usize, DiagramError> {
    let f = face_count(d)?;
    Ok((2 + d.n_chords() - f) / 2)
}

/// Runs `f` over `items`, on the rayon pool when the `parallel` feature is on.
pub fn sweep<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sweep_sequential(items, f)
    }
}

pub fn sweep_sequential<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub diagrams: usize,
    pub moves: usize,
    pub failures: Vec<AxiomFailure>,
}

/// Every move of every diagram with `0..=max_chords` chords.
pub fn axiom_sweep(
    max_chords: usize,
    flavor: Flavor,
    parity: NamedParity,
) -> Result<SweepReport, OracleError> {
    let mut all = Vec::new();
    for n in 0..=max_chords {
        all.extend(enumerate_diagrams(n, flavor)?);
    }
    let results = sweep(&all, |d| verify_parity_axioms(d, parity));
    Ok(collect_report(all.len(), results))
}

pub fn axiom_sweep_sequential(
    max_chords: usize,
    flavor: Flavor,
    parity: NamedParity,
) -> Result<SweepReport, OracleError> {
    let mut all = Vec::new();
    for n in 0..=max_chords {
        all.extend(enumerate_diagrams(n, flavor)?);
    }
    let results = sweep_sequential(&all, |d| verify_parity_axioms(d, parity));
    Ok(collect_report(all.len(), results))
}

fn collect_report(diagrams: usize, results: Vec<(usize, Vec<AxiomFailure>)>) -> SweepReport {
    let mut report = SweepReport {
        diagrams,
        ..Default::default()
    };
    for (k, f) in results {
        report.moves += k;
        report.failures.extend(f);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_factorial_counts() {
        let counts: Vec<usize> = (0..=5)
            .map(|n| enumerate_diagrams(n, Flavor::Free).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 1, 3, 15, 105, 945]);
        assert_eq!(
            enumerate_diagrams(2, Flavor::Virtual).unwrap().len(),
            3 * 16
        );
        assert_eq!(
            enumerate_diagrams(7, Flavor::Free),
            Err(OracleError::SizeLimit { n: 7, max: 6 })
        );
    }

    #[test]
    fn hand_genus_matches_known_diagrams() {
        let v = |s| ChordDiagram::parse(s, Flavor::Virtual).unwrap();
        assert_eq!(genus_by_hand(&v("O1+ O2+ U1+ U2+")).unwrap(), 1);
        assert_eq!(genus_by_hand(&v("O1+ U2+ O3+ U1+ O2+ U3+")).unwrap(), 0);
        assert_eq!(face_count(&v("O1+ U1+")).unwrap(), 3);
    }

    #[test]
    fn random_diagrams_are_valid() {
        for d in sample_diagrams(6, Flavor::Virtual, 20, 3) {
            assert_eq!(d.n_chords(), 6);
            assert_eq!(
                ChordDiagram::parse(&d.serialize(), Flavor::Virtual).unwrap(),
                d
            );
        }
    }
}
