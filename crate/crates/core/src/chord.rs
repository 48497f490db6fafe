//! Chord (Gauss) diagrams of free, flat and virtual knots.
//!
//! A diagram is a cyclic sequence of `2n` endpoint slots; every chord occupies
//! exactly two slots. Slot 0 is a distinguished starting point, so two
//! diagrams that differ by a rotation compare unequal under `==`; use
//! [`ChordDiagram::is_isomorphic`] for equality up to rotation and relabeling.
//!
//! Oriented flavors store, per chord, its sign and the *modified arrow*: the
//! arrow runs from the over passage to the under passage for a positive
//! crossing and is reversed for a negative one. With that orientation the
//! pair (tail direction, head direction) is always a positive frame, which is
//! what the surface construction relies on.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Free,
    Flat,
    Virtual,
}

impl Flavor {
    pub fn is_oriented(self) -> bool {
        !matches!(self, Flavor::Free)
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Free => "free",
            Flavor::Flat => "flat",
            Flavor::Virtual => "virtual",
        })
    }
}

impl std::str::FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "free" => Ok(Flavor::Free),
            "flat" => Ok(Flavor::Flat),
            "virtual" => Ok(Flavor::Virtual),
            other => Err(format!(
                "unknown flavor `{other}` (expected free, flat or virtual)"
            )),
        }
    }
}

/// Index of a chord inside one diagram. Not stable across moves; use a
/// [`crate::moves::MoveRecord`] correspondence to track chords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ChordId(pub usize);

impl fmt::Display for ChordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// One of the two passages of a chord, in circle order from slot 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Passage {
    First,
    Second,
}

impl Passage {
    pub fn other(self) -> Passage {
        match self {
            Passage::First => Passage::Second,
            Passage::Second => Passage::First,
        }
    }

    fn index(self) -> usize {
        match self {
            Passage::First => 0,
            Passage::Second => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chord {
    pub label: String,
    /// Slot positions, `ends[0] < ends[1]`.
    pub ends: [usize; 2],
    pub sign: Sign,
    /// Which passage carries the tail of the modified arrow.
    pub tail: Passage,
}

impl Chord {
    pub fn slot(&self, passage: Passage) -> usize {
        self.ends[passage.index()]
    }

    pub fn tail_slot(&self) -> usize {
        self.slot(self.tail)
    }

    pub fn head_slot(&self) -> usize {
        self.slot(self.tail.other())
    }

    /// The passage that goes over, recovered from the modified arrow.
    pub fn over(&self) -> Passage {
        match self.sign {
            Sign::Plus => self.tail,
            Sign::Minus => self.tail.other(),
        }
    }

    pub fn passage_at(&self, slot: usize) -> Option<Passage> {
        if self.ends[0] == slot {
            Some(Passage::First)
        } else if self.ends[1] == slot {
            Some(Passage::Second)
        } else {
            None
        }
    }

    pub fn other_end(&self, slot: usize) -> usize {
        if self.ends[0] == slot {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("malformed token `{token}` at column {column}: {reason}")]
    MalformedToken {
        token: String,
        column: usize,
        reason: String,
    },
    #[error("label `{label}` appears {count} time(s); every chord needs exactly two passages")]
    BadPairing { label: String, count: usize },
    #[error(
        "inconsistent decoration on chord `{label}` (token `{token}` at column {column}): {reason}"
    )]
    InconsistentDecoration {
        label: String,
        token: String,
        column: usize,
        reason: String,
    },
    #[error("unknown chord {0}")]
    UnknownChord(String),
    #[error("operation needs a {expected} diagram, got {got}")]
    WrongFlavor { expected: &'static str, got: Flavor },
    #[error("cannot project a {from} diagram to {to}")]
    IllegalProjection { from: Flavor, to: Flavor },
    #[error("diagram has no basepoint")]
    MissingBasepoint,
}

pub type Result<T> = std::result::Result<T, DiagramError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChordDiagram {
    flavor: Flavor,
    slots: Vec<ChordId>,
    chords: Vec<Chord>,
    basepoint: Option<usize>,
}

/// Side of a chord. `Left`/`Right` need an oriented flavor; `Inner`/`Outer`
/// are the slot ranges strictly inside and outside `(first, second)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfSide {
    Left,
    Right,
    Inner,
    Outer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Half {
    pub chord: ChordId,
    pub side: HalfSide,
    /// Slots strictly between the chord's endpoints on that side, in circle order.
    pub slots: Vec<usize>,
}

impl Half {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Open arc of the circle from slot `from` forward to slot `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub slots: Vec<usize>,
}

impl Arc {
    /// Number of endpoints on the arc whose chord satisfies `pred`.
    pub fn count<F: Fn(ChordId) -> bool>(&self, d: &ChordDiagram, pred: F) -> usize {
        self.slots.iter().filter(|&&s| pred(d.chord_at(s))).count()
    }
}

impl ChordDiagram {
    /// Builds a diagram from a slot sequence and per-chord decorations.
    /// `slots[i]` indexes into `decorations`; each index must occur exactly twice.
    pub fn from_parts(
        flavor: Flavor,
        slots: Vec<ChordId>,
        decorations: Vec<(String, Sign, Passage)>,
        basepoint: Option<usize>,
    ) -> Result<Self> {
        let mut ends: Vec<Vec<usize>> = vec![Vec::new(); decorations.len()];
        for (i, c) in slots.iter().enumerate() {
            match ends.get_mut(c.0) {
                Some(e) => e.push(i),
                None => return Err(DiagramError::UnknownChord(c.to_string())),
            }
        }
        let mut chords = Vec::with_capacity(decorations.len());
        for ((label, sign, tail), e) in decorations.into_iter().zip(ends) {
            if e.len() != 2 {
                return Err(DiagramError::BadPairing {
                    label,
                    count: e.len(),
                });
            }
            let (sign, tail) = if flavor.is_oriented() {
                (sign, tail)
            } else {
                (Sign::Plus, Passage::First)
            };
            chords.push(Chord {
                label,
                ends: [e[0], e[1]],
                sign,
                tail,
            });
        }
        let basepoint = match basepoint {
            Some(_) if slots.is_empty() => Some(0),
            Some(b) => Some(b % slots.len()),
            None => None,
        };
        Ok(ChordDiagram {
            flavor,
            slots,
            chords,
            basepoint,
        })
    }

    pub fn empty(flavor: Flavor) -> Self {
        ChordDiagram {
            flavor,
            slots: Vec::new(),
            chords: Vec::new(),
            basepoint: None,
        }
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn n_chords(&self) -> usize {
        self.chords.len()
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    pub fn with_basepoint(mut self, gap: Option<usize>) -> Self {
        self.basepoint = gap.map(|g| {
            if self.slots.is_empty() {
                0
            } else {
                g % self.slots.len()
            }
        });
        self
    }

    pub fn slots(&self) -> &[ChordId] {
        &self.slots
    }

    pub fn chord_at(&self, slot: usize) -> ChordId {
        self.slots[slot]
    }

    pub fn chord(&self, id: ChordId) -> &Chord {
        &self.chords[id.0]
    }

    pub fn chords(&self) -> &[Chord] {
        &self.chords
    }

    pub fn chord_ids(&self) -> impl Iterator<Item = ChordId> + '_ {
        (0..self.chords.len()).map(ChordId)
    }

    pub fn label(&self, id: ChordId) -> &str {
        &self.chords[id.0].label
    }

    pub fn find(&self, label: &str) -> Result<ChordId> {
        self.chords
            .iter()
            .position(|c| c.label == label)
            .map(ChordId)
            .ok_or_else(|| DiagramError::UnknownChord(label.to_string()))
    }

    pub fn check(&self, id: ChordId) -> Result<&Chord> {
        self.chords
            .get(id.0)
            .ok_or_else(|| DiagramError::UnknownChord(id.to_string()))
    }

    pub fn next_slot(&self, s: usize) -> usize {
        (s + 1) % self.slots.len()
    }

    pub fn prev_slot(&self, s: usize) -> usize {
        (s + self.slots.len() - 1) % self.slots.len()
    }

    /// Slots strictly between `from` and `to`, walking forward.
    pub fn open_arc(&self, from: usize, to: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut s = self.next_slot(from);
        while s != to {
            out.push(s);
            s = self.next_slot(s);
        }
        out
    }

    pub fn writhe_signs(&self) -> impl Iterator<Item = i64> + '_ {
        self.chords.iter().map(|c| c.sign.value())
    }

    pub fn half(&self, id: ChordId, side: HalfSide) -> Result<Half> {
        let c = self.check(id)?;
        let [p, q] = c.ends;
        let slots = match side {
            HalfSide::Inner => (p + 1..q).collect(),
            HalfSide::Outer => self.open_arc(q, p),
            HalfSide::Left | HalfSide::Right => {
                if !self.flavor.is_oriented() {
                    return Err(DiagramError::WrongFlavor {
                        expected: "flat or virtual",
                        got: self.flavor,
                    });
                }
                let (head, tail) = (c.head_slot(), c.tail_slot());
                if side == HalfSide::Left {
                    self.open_arc(head, tail)
                } else {
                    self.open_arc(tail, head)
                }
            }
        };
        Ok(Half {
            chord: id,
            side,
            slots,
        })
    }

    /// True iff exactly one endpoint of `b` lies strictly between the endpoints of `a`.
    pub fn linked(&self, a: ChordId, b: ChordId) -> Result<bool> {
        let ca = self.check(a)?;
        let cb = self.check(b)?;
        let inside = |s: usize| ca.ends[0] < s && s < ca.ends[1];
        Ok(inside(cb.ends[0]) != inside(cb.ends[1]))
    }

    /// Pairs of opposite arcs, each bounded by one endpoint of `a` and one of `b`.
    /// One pair for unlinked chords, two for linked ones.
    pub fn separating_arcs(&self, a: ChordId, b: ChordId) -> Result<Vec<(Arc, Arc)>> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(DiagramError::UnknownChord(format!(
                "{a} paired with itself"
            )));
        }
        let mut pts: Vec<(usize, ChordId)> = self.chords[a.0]
            .ends
            .iter()
            .map(|&s| (s, a))
            .chain(self.chords[b.0].ends.iter().map(|&s| (s, b)))
            .collect();
        pts.sort();
        let arcs: Vec<(Arc, bool)> = (0..4)
            .map(|i| {
                let (from, cf) = pts[i];
                let (to, ct) = pts[(i + 1) % 4];
                (
                    Arc {
                        from,
                        to,
                        slots: self.open_arc(from, to),
                    },
                    cf != ct,
                )
            })
            .collect();
        let mut out = Vec::new();
        for i in 0..2 {
            if arcs[i].1 && arcs[i + 2].1 {
                out.push((arcs[i].0.clone(), arcs[i + 2].0.clone()));
            }
        }
        Ok(out)
    }

    /// Drops decorations down to a weaker flavor.
    pub fn project(&self, target: Flavor) -> Result<ChordDiagram> {
        let ok = match (self.flavor, target) {
            (a, b) if a == b => true,
            (Flavor::Virtual, _) => true,
            (Flavor::Flat, Flavor::Free) => true,
            _ => false,
        };
        if !ok {
            return Err(DiagramError::IllegalProjection {
                from: self.flavor,
                to: target,
            });
        }
        let mut out = self.clone();
        out.flavor = target;
        if !target.is_oriented() {
            for c in &mut out.chords {
                c.sign = Sign::Plus;
                c.tail = Passage::First;
            }
        }
        Ok(out)
    }

    /// Relabels chords `1..=n` in order of first appearance, keeping the slot order.
    pub fn relabeled(&self) -> ChordDiagram {
        let mut order: Vec<usize> = (0..self.chords.len()).collect();
        order.sort_by_key(|&i| self.chords[i].ends[0]);
        let mut new_index = vec![0; self.chords.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let chords = order
            .iter()
            .enumerate()
            .map(|(new, &old)| Chord {
                label: (new + 1).to_string(),
                ..self.chords[old].clone()
            })
            .collect();
        let slots = self.slots.iter().map(|c| ChordId(new_index[c.0])).collect();
        ChordDiagram {
            flavor: self.flavor,
            slots,
            chords,
            basepoint: self.basepoint,
        }
    }

    /// The diagram read starting from slot `k`.
    pub fn rotated(&self, k: usize) -> ChordDiagram {
        let m = self.slots.len();
        if m == 0 {
            return self.clone();
        }
        let slots: Vec<ChordId> = (0..m).map(|i| self.slots[(i + k) % m]).collect();
        let mut decorations: Vec<(String, Sign, Passage)> = Vec::with_capacity(self.chords.len());
        for c in &self.chords {
            // passage order may flip when the rotation crosses one endpoint
            let tail_new = (c.tail_slot() + m - k % m) % m;
            let head_new = (c.head_slot() + m - k % m) % m;
            let tail = if tail_new < head_new {
                Passage::First
            } else {
                Passage::Second
            };
            decorations.push((c.label.clone(), c.sign, tail));
        }
        let bp = self.basepoint.map(|b| (b + m - k % m) % m);
        ChordDiagram::from_parts(self.flavor, slots, decorations, bp)
            .expect("rotation keeps pairing")
    }

    /// Canonical key independent of rotation and labels (basepoint ignored).
    pub fn canonical_key(&self) -> String {
        let m = self.slots.len().max(1);
        (0..m)
            .map(|k| self.rotated(k).relabeled().with_basepoint(None).serialize())
            .min()
            .unwrap_or_default()
    }

    /// Equality up to rotation of the slot sequence and chord relabeling.
    pub fn is_isomorphic(&self, other: &ChordDiagram) -> bool {
        self.flavor == other.flavor
            && self.n_slots() == other.n_slots()
            && self.canonical_key() == other.canonical_key()
    }

    pub fn serialize(&self) -> String {
        let mut tokens: Vec<String> = Vec::with_capacity(self.slots.len() + 1);
        for (i, &id) in self.slots.iter().enumerate() {
            if self.basepoint == Some(i) {
                tokens.push("*".to_string());
            }
            let c = &self.chords[id.0];
            let passage = c.passage_at(i).expect("slot belongs to chord");
            let tok = match self.flavor {
                Flavor::Free => c.label.clone(),
                Flavor::Flat => {
                    let arrow = if passage == c.tail { '>' } else { '<' };
                    format!("{arrow}{}{}", c.label, c.sign.symbol())
                }
                Flavor::Virtual => {
                    let ou = if passage == c.over() { 'O' } else { 'U' };
                    format!("{ou}{}{}", c.label, c.sign.symbol())
                }
            };
            tokens.push(tok);
        }
        if self.slots.is_empty() && self.basepoint.is_some() {
            tokens.push("*".to_string());
        }
        tokens.join(" ")
    }

    pub fn parse(text: &str, flavor: Flavor) -> Result<ChordDiagram> {
        parse_gauss_code(text, flavor)
    }
}

impl fmt::Display for ChordDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &text[s..i],
                    column: text[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &text[s..],
            column: text[..s].chars().count() + 1,
        });
    }
    out
}

fn parse_sign(tok: &Token<'_>, ch: Option<char>) -> Result<Sign> {
    match ch {
        Some('+') => Ok(Sign::Plus),
        Some('-') | Some('\u{2212}') => Ok(Sign::Minus),
        _ => Err(DiagramError::MalformedToken {
            token: tok.text.to_string(),
            column: tok.column,
            reason: "missing trailing sign (+ or -)".into(),
        }),
    }
}

fn check_label(tok: &Token<'_>, label: &str) -> Result<()> {
    if label.is_empty() || !label.chars().all(|c| c.is_alphanumeric()) {
        return Err(DiagramError::MalformedToken {
            token: tok.text.to_string(),
            column: tok.column,
            reason: "label must be non-empty and alphanumeric".into(),
        });
    }
    Ok(())
}

struct Passing<'a> {
    label: String,
    sign: Sign,
    /// Flat: is this the arrow tail. Virtual: is this the over passage.
    marked: bool,
    tok: Token<'a>,
}

/// Parses a whitespace-separated Gauss code in the grammar of `flavor`.
pub fn parse_gauss_code(text: &str, flavor: Flavor) -> Result<ChordDiagram> {
    let mut passings: Vec<Passing<'_>> = Vec::new();
    let mut basepoint: Option<usize> = None;
    for tok in tokenize(text) {
        if tok.text == "*" {
            if basepoint.is_some() {
                return Err(DiagramError::MalformedToken {
                    token: "*".into(),
                    column: tok.column,
                    reason: "more than one basepoint marker".into(),
                });
            }
            basepoint = Some(passings.len());
            continue;
        }
        let p = match flavor {
            Flavor::Free => {
                check_label(&tok, tok.text)?;
                Passing {
                    label: tok.text.to_string(),
                    sign: Sign::Plus,
                    marked: false,
                    tok,
                }
            }
            Flavor::Flat | Flavor::Virtual => {
                let mut chars = tok.text.chars();
                let first = chars.next();
                let marked = match (flavor, first) {
                    (Flavor::Flat, Some('>')) | (Flavor::Virtual, Some('O')) => true,
                    (Flavor::Flat, Some('<')) | (Flavor::Virtual, Some('U')) => false,
                    _ => {
                        let want = if flavor == Flavor::Flat {
                            "> or <"
                        } else {
                            "O or U"
                        };
                        return Err(DiagramError::MalformedToken {
                            token: tok.text.to_string(),
                            column: tok.column,
                            reason: format!("expected leading {want}"),
                        });
                    }
                };
                let last = chars.next_back();
                let sign = parse_sign(&tok, last)?;
                let label: String = chars.collect();
                check_label(&tok, &label)?;
                Passing {
                    label,
                    sign,
                    marked,
                    tok,
                }
            }
        };
        passings.push(p);
    }
    if basepoint == Some(passings.len()) {
        basepoint = Some(0);
    }

    let mut labels: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slots = Vec::with_capacity(passings.len());
    for (i, p) in passings.iter().enumerate() {
        let idx = match labels.iter().position(|l| *l == p.label) {
            Some(k) => k,
            None => {
                labels.push(p.label.clone());
                groups.push(Vec::new());
                labels.len() - 1
            }
        };
        groups[idx].push(i);
        slots.push(ChordId(idx));
    }
    let mut decorations = Vec::with_capacity(labels.len());
    for (label, g) in labels.into_iter().zip(&groups) {
        if g.len() != 2 {
            return Err(DiagramError::BadPairing {
                label,
                count: g.len(),
            });
        }
        let (a, b) = (&passings[g[0]], &passings[g[1]]);
        if !flavor.is_oriented() {
            decorations.push((label, Sign::Plus, Passage::First));
            continue;
        }
        let inconsistent = |reason: String| DiagramError::InconsistentDecoration {
            label: label.clone(),
            token: b.tok.text.to_string(),
            column: b.tok.column,
            reason,
        };
        if a.sign != b.sign {
            return Err(inconsistent(
                "signs disagree between the two passages".into(),
            ));
        }
        if a.marked == b.marked {
            let reason = match (flavor, a.marked) {
                (Flavor::Virtual, true) => "both passages marked O",
                (Flavor::Virtual, false) => "both passages marked U",
                (_, true) => "both passages marked > (arrow tail)",
                (_, false) => "both passages marked < (arrow head)",
            };
            return Err(inconsistent(reason.into()));
        }
        let first_marked = a.marked;
        let tail = match flavor {
            Flavor::Flat => {
                if first_marked {
                    Passage::First
                } else {
                    Passage::Second
                }
            }
            _ => {
                let over = if first_marked {
                    Passage::First
                } else {
                    Passage::Second
                };
                match a.sign {
                    Sign::Plus => over,
                    Sign::Minus => over.other(),
                }
            }
        };
        decorations.push((label, a.sign, tail));
    }
    ChordDiagram::from_parts(flavor, slots, decorations, basepoint)
}

/// One line of a corpus file: `name <TAB> flavor <TAB> code`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub line: usize,
    pub name: String,
    pub flavor: Flavor,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("corpus line {line}: {reason}")]
pub struct CorpusError {
    pub line: usize,
    pub reason: String,
}

/// Splits a corpus file into entries. Blank lines and lines starting with
/// `#` are skipped; codes are not parsed here.
pub fn parse_corpus(text: &str) -> std::result::Result<Vec<CorpusEntry>, CorpusError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.splitn(3, '\t').collect();
        let [name, flavor, code] = fields[..] else {
            return Err(CorpusError {
                line,
                reason: "expected `name<TAB>flavor<TAB>code`".into(),
            });
        };
        let flavor = flavor
            .trim()
            .parse()
            .map_err(|reason| CorpusError { line, reason })?;
        out.push(CorpusEntry {
            line,
            name: name.trim().to_string(),
            flavor,
            code: code.to_string(),
        });
    }
    Ok(out)
}
