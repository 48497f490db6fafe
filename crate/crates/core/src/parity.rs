//! Parities on chord diagrams: Gaussian, index, the oriented Gaussian functor
//! with its four chord classes, and a checker for the parity axioms.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::chord::{ChordDiagram, ChordId, DiagramError, HalfSide};
use crate::group::{Element, FgAbelianGroup};
use crate::moves::{MoveKind, MoveRecord};
use crate::surface::trace_faces;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParityError {
    #[error(
        "chords {a} and {b}: the class rule gives different answers on different separating arcs"
    )]
    ArcChoiceDisagreement { a: String, b: String },
    #[error("cannot compare values in {from} with values in {to}")]
    GroupMismatch { from: String, to: String },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientGroup {
    Trivial,
    Z2,
    /// `E0 -> 0, E1 -> 2, O' -> 1, O'' -> 3`. Which odd class is `O'` is a
    /// per-diagram choice, so the labeling is never canonical.
    Z4WithClasses {
        labeling_canonical: bool,
    },
    Z,
    FgAbelian(FgAbelianGroup),
}

impl CoefficientGroup {
    pub fn abelian(&self) -> FgAbelianGroup {
        match self {
            CoefficientGroup::Trivial => FgAbelianGroup::trivial(),
            CoefficientGroup::Z2 => FgAbelianGroup::cyclic(2),
            CoefficientGroup::Z4WithClasses { .. } => FgAbelianGroup::cyclic(4),
            CoefficientGroup::Z => FgAbelianGroup::cyclic(0),
            CoefficientGroup::FgAbelian(g) => g.clone(),
        }
    }
}

impl fmt::Display for CoefficientGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientGroup::Z4WithClasses { .. } => f.write_str("Z4 (classes)"),
            other => write!(f, "{}", other.abelian()),
        }
    }
}

/// Group-valued parity of every chord of one diagram, indexed by chord id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityAssignment {
    pub group: CoefficientGroup,
    pub values: Vec<Element>,
}

impl ParityAssignment {
    pub fn trivial(d: &ChordDiagram) -> Self {
        ParityAssignment {
            group: CoefficientGroup::Trivial,
            values: vec![Vec::new(); d.n_chords()],
        }
    }

    pub fn value(&self, c: ChordId) -> &Element {
        &self.values[c.0]
    }

    pub fn abelian(&self) -> FgAbelianGroup {
        self.group.abelian()
    }
}

/// Number of endpoints on one side of `c`, mod 2.
pub fn gaussian_parity(d: &ChordDiagram, c: ChordId) -> Result<u8, DiagramError> {
    Ok((d.half(c, HalfSide::Inner)?.len() % 2) as u8)
}

pub fn gaussian_parity_assignment(d: &ChordDiagram) -> ParityAssignment {
    let values = d
        .chord_ids()
        .map(|c| vec![i64::from(gaussian_parity(d, c).expect("own chord"))])
        .collect();
    ParityAssignment {
        group: CoefficientGroup::Z2,
        values,
    }
}

/// Intersection index of the left half of `c` with the rest of the knot.
/// A linked chord `x` contributes `sgn(x)` when its over-to-under arrow ends
/// in the left half of `c` and `-sgn(x)` when it starts there; along the
/// modified arrow that is `+1` for a head and `-1` for a tail.
pub fn index_parity(d: &ChordDiagram, c: ChordId) -> Result<i64, DiagramError> {
    let left = d.half(c, HalfSide::Left)?;
    let mut ip = 0;
    for &s in &left.slots {
        let x = d.chord(d.chord_at(s));
        if x.other_end(s) == s || left.slots.contains(&x.other_end(s)) {
            continue;
        }
        ip += if x.head_slot() == s { 1 } else { -1 };
    }
    Ok(ip)
}

pub fn index_parity_assignment(d: &ChordDiagram) -> Result<ParityAssignment, DiagramError> {
    let values = d
        .chord_ids()
        .map(|c| index_parity(d, c).map(|v| vec![v]))
        .collect::<Result<_, _>>()?;
    Ok(ParityAssignment {
        group: CoefficientGroup::Z,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ChordClass {
    E0,
    E1,
    #[serde(rename = "O'")]
    OPrime,
    #[serde(rename = "O''")]
    ODoublePrime,
}

impl ChordClass {
    pub fn z4(self) -> i64 {
        match self {
            ChordClass::E0 => 0,
            ChordClass::E1 => 2,
            ChordClass::OPrime => 1,
            ChordClass::ODoublePrime => 3,
        }
    }

    pub fn is_odd(self) -> bool {
        matches!(self, ChordClass::OPrime | ChordClass::ODoublePrime)
    }
}

impl fmt::Display for ChordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChordClass::E0 => "E0",
            ChordClass::E1 => "E1",
            ChordClass::OPrime => "O'",
            ChordClass::ODoublePrime => "O''",
        })
    }
}

/// Every reading of `k_e + l_o + 1 (mod 2)` for two odd chords: each
/// separating arc pair, with `k` taken on either arc of the pair.
pub fn odd_pair_readings(
    d: &ChordDiagram,
    odd: &[bool],
    a: ChordId,
    b: ChordId,
) -> Result<Vec<u8>, DiagramError> {
    let mut out = Vec::new();
    for (x, y) in d.separating_arcs(a, b)? {
        for (k_arc, l_arc) in [(&x, &y), (&y, &x)] {
            let k_e = k_arc.count(d, |c| !odd[c.0]);
            let l_o = l_arc.count(d, |c| odd[c.0]);
            out.push(((k_e + l_o + 1) % 2) as u8);
        }
    }
    Ok(out)
}

/// Splits the chords into `E0, E1, O', O''`. `O'` holds the odd chord with
/// the smallest first endpoint; the labeling of the two odd classes is
/// otherwise arbitrary.
pub fn classify_chords(d: &ChordDiagram) -> Result<Vec<ChordClass>, ParityError> {
    let odd: Vec<bool> = d
        .chord_ids()
        .map(|c| gaussian_parity(d, c).map(|g| g == 1))
        .collect::<Result<_, _>>()?;
    let rep = d
        .chord_ids()
        .filter(|c| odd[c.0])
        .min_by_key(|c| d.chord(*c).ends[0]);
    let mut classes = Vec::with_capacity(d.n_chords());
    for c in d.chord_ids() {
        let class = if !odd[c.0] {
            let linked_odd = d
                .chord_ids()
                .filter(|&x| x != c && odd[x.0] && d.linked(c, x).expect("own chords"))
                .count();
            if linked_odd % 2 == 0 {
                ChordClass::E0
            } else {
                ChordClass::E1
            }
        } else {
            let r = rep.expect("an odd chord exists");
            if c == r {
                ChordClass::OPrime
            } else {
                let readings: BTreeSet<u8> =
                    odd_pair_readings(d, &odd, r, c)?.into_iter().collect();
                if readings.len() != 1 {
                    return Err(ParityError::ArcChoiceDisagreement {
                        a: d.label(r).to_string(),
                        b: d.label(c).to_string(),
                    });
                }
                if readings.contains(&0) {
                    ChordClass::OPrime
                } else {
                    ChordClass::ODoublePrime
                }
            }
        };
        classes.push(class);
    }
    Ok(classes)
}

/// Trivial group without odd chords, otherwise `Z4` through the chord classes.
pub fn oriented_gaussian_parity(d: &ChordDiagram) -> Result<ParityAssignment, ParityError> {
    let classes = classify_chords(d)?;
    if !classes.iter().any(|c| c.is_odd()) {
        return Ok(ParityAssignment::trivial(d));
    }
    Ok(ParityAssignment {
        group: CoefficientGroup::Z4WithClasses {
            labeling_canonical: false,
        },
        values: classes.iter().map(|c| vec![c.z4()]).collect(),
    })
}

/// Closed walk `a1' a1'' a2' a2'' ...` through distinct chords, consecutive
/// ends joined by a gap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Polygon {
    pub chords: Vec<ChordId>,
    /// `+1` when the segments entering and leaving the chord run the same way
    /// around the circle.
    pub eps: Vec<i64>,
    pub gaps: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Segment {
    gap: usize,
    forward: bool,
}

impl Segment {
    fn from_end(m: usize, slot: usize, forward: bool) -> Segment {
        let gap = if forward { slot } else { (slot + m - 1) % m };
        Segment { gap, forward }
    }

    fn to_end(self, m: usize) -> usize {
        if self.forward {
            (self.gap + 1) % m
        } else {
            self.gap
        }
    }
}

pub fn polygons(d: &ChordDiagram, max_len: usize) -> Vec<Polygon> {
    let m = d.n_slots();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for gap in 0..m {
        for forward in [true, false] {
            let start = Segment { gap, forward };
            let mut path = vec![start];
            let mut chords = Vec::new();
            extend_polygon(
                d,
                max_len,
                start,
                &mut path,
                &mut chords,
                &mut seen,
                &mut out,
            );
        }
    }
    out
}

fn extend_polygon(
    d: &ChordDiagram,
    max_len: usize,
    start: Segment,
    path: &mut Vec<Segment>,
    chords: &mut Vec<ChordId>,
    seen: &mut BTreeSet<Vec<usize>>,
    out: &mut Vec<Polygon>,
) {
    let m = d.n_slots();
    let last = *path.last().expect("non-empty walk");
    let arrive = last.to_end(m);
    let c = d.chord_at(arrive);
    if chords.contains(&c) || chords.len() == max_len {
        return;
    }
    let leave = d.chord(c).other_end(arrive);
    chords.push(c);
    for forward in [true, false] {
        let next = Segment::from_end(m, leave, forward);
        if next == start {
            let mut key: Vec<usize> = path.iter().map(|s| s.gap).collect();
            key.sort();
            if seen.insert(key) {
                let k = chords.len();
                let eps = (0..k)
                    .map(|i| {
                        let incoming = path[i];
                        let outgoing = if i + 1 < k { path[i + 1] } else { start };
                        if incoming.forward == outgoing.forward {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect();
                out.push(Polygon {
                    chords: chords.clone(),
                    eps,
                    gaps: path.iter().map(|s| s.gap).collect(),
                });
            }
        } else if !path.contains(&next) && !path.iter().any(|s| s.gap == next.gap) {
            path.push(next);
            extend_polygon(d, max_len, start, path, chords, seen, out);
            path.pop();
        }
    }
    chords.pop();
}

/// The polygon running through exactly the given gaps, if there is one.
pub fn polygon_on_gaps(d: &ChordDiagram, gaps: &[usize]) -> Option<Polygon> {
    let mut want = gaps.to_vec();
    want.sort();
    polygons(d, gaps.len()).into_iter().find(|p| {
        let mut g = p.gaps.clone();
        g.sort();
        g == want
    })
}

/// Incidence indices of the three crossings of a triangle: polygon signs on
/// free diagrams, face-word exponents on the surface otherwise.
pub fn triangle_incidence(d: &ChordDiagram, gaps: [usize; 3]) -> Option<Vec<(ChordId, i64)>> {
    if d.flavor().is_oriented() {
        let fd = trace_faces(d).ok()?;
        fd.triangle(gaps).map(|f| f.word())
    } else {
        polygon_on_gaps(d, &gaps).map(|p| p.chords.into_iter().zip(p.eps).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    P0,
    P1,
    P2,
    P3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomMode {
    /// `p(v1) + p(v2) + p(v3) = 0` at a triangle.
    Unoriented,
    /// The triangle relation carries incidence indices.
    Oriented,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, axiom: Axiom, passed: bool, detail: String) {
        self.checks.push(AxiomCheck {
            axiom,
            passed,
            detail,
        });
    }
}

fn is_fixed(g: &CoefficientGroup) -> bool {
    matches!(g, CoefficientGroup::Z2 | CoefficientGroup::Z)
}

fn show(g: &FgAbelianGroup, e: &[i64]) -> String {
    format!("{:?} in {g}", g.reduce(e.to_vec()))
}

/// Checks P0-P3 for one move. Fixed groups (`Z2`, `Z`) must carry values
/// over unchanged; per-diagram groups only need the values of surviving
/// chords to satisfy the same integer relations on both sides, which is
/// exactly when a partial isomorphism between the groups exists.
pub fn check_axioms(
    source: &ParityAssignment,
    target: &ParityAssignment,
    record: &MoveRecord,
    mode: AxiomMode,
) -> Result<AxiomReport, ParityError> {
    let (gs, gt) = (source.abelian(), target.abelian());
    if (is_fixed(&source.group) || is_fixed(&target.group)) && source.group != target.group {
        return Err(ParityError::GroupMismatch {
            from: source.group.to_string(),
            to: target.group.to_string(),
        });
    }
    let mut report = AxiomReport::default();
    let (src, tgt) = (&record.source, &record.target);

    let domain: Vec<(ChordId, ChordId)> = src
        .chord_ids()
        .filter_map(|c| record.image(c).map(|t| (c, t)))
        .collect();
    if is_fixed(&source.group) {
        for &(c, t) in &domain {
            let ok = gs.reduce(source.value(c).clone()) == gt.reduce(target.value(t).clone());
            report.push(
                Axiom::P0,
                ok,
                format!(
                    "{} -> {}: {} vs {}",
                    src.label(c),
                    tgt.label(t),
                    show(&gs, source.value(c)),
                    show(&gt, target.value(t))
                ),
            );
        }
    } else {
        let vs: Vec<Element> = domain
            .iter()
            .map(|&(c, _)| source.value(c).clone())
            .collect();
        let vt: Vec<Element> = domain
            .iter()
            .map(|&(_, t)| target.value(t).clone())
            .collect();
        let forward = gs
            .relations(&vs)
            .iter()
            .all(|r| gt.combination_is_zero(r, &vt));
        let backward = gt
            .relations(&vt)
            .iter()
            .all(|r| gs.combination_is_zero(r, &vs));
        report.push(
            Axiom::P0,
            forward && backward,
            format!(
                "relations among {} surviving chords agree ({gs} vs {gt})",
                domain.len()
            ),
        );
    }

    let (side, group, chords) = match record.kind {
        MoveKind::R1Remove { .. } | MoveKind::R2Remove { .. } => {
            (source, &gs, record.vanished.clone())
        }
        MoveKind::R1Add { .. } | MoveKind::R2Add { .. } => (target, &gt, record.created.clone()),
        MoveKind::R3 { .. } => (source, &gs, Vec::new()),
    };
    let diagram = if record.kind.is_adding() { tgt } else { src };
    match chords.len() {
        1 => {
            let v = side.value(chords[0]);
            report.push(
                Axiom::P1,
                group.is_zero(v),
                format!("{}: {}", diagram.label(chords[0]), show(group, v)),
            );
        }
        2 => {
            let sum = group.add(side.value(chords[0]), side.value(chords[1]));
            report.push(
                Axiom::P2,
                group.is_zero(&sum),
                format!(
                    "{} + {} = {}",
                    diagram.label(chords[0]),
                    diagram.label(chords[1]),
                    show(group, &sum)
                ),
            );
        }
        _ => {}
    }

    if let Some((tri, gaps)) = record.triangle {
        let image: Vec<ChordId> = tri
            .iter()
            .map(|&c| record.image(c).expect("R3 keeps every chord"))
            .collect();
        for (d, p, g, chords) in [(src, source, &gs, tri.to_vec()), (tgt, target, &gt, image)] {
            let eps: Option<Vec<(ChordId, i64)>> = match mode {
                AxiomMode::Unoriented => Some(chords.iter().map(|&c| (c, 1)).collect()),
                AxiomMode::Oriented => triangle_incidence(d, gaps),
            };
            match eps {
                None => report.push(
                    Axiom::P3,
                    false,
                    format!("no triangle along gaps {gaps:?} in {d}"),
                ),
                Some(eps) => {
                    let mut sum = g.zero();
                    for &(c, e) in &eps {
                        sum = g.add(&sum, &g.scale(e, p.value(c)));
                    }
                    let terms: Vec<String> = eps
                        .iter()
                        .map(|&(c, e)| format!("{e:+}*{}", d.label(c)))
                        .collect();
                    report.push(
                        Axiom::P3,
                        g.is_zero(&sum),
                        format!("{} = {} in {d}", terms.join(" "), show(g, &sum)),
                    );
                }
            }
        }
    }
    Ok(report)
}
