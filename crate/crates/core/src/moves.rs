//! Reidemeister moves on chord diagrams.
//!
//! Moves name chords by label and sites by gap index. Gap `g` lies between
//! slot `g` and slot `g + 1` (cyclically); an insertion position `p` puts new
//! endpoints right before slot `p`. A move produces a [`MoveRecord`] holding
//! the partial bijection between the chords of the two diagrams.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::chord::{ChordDiagram, ChordId, DiagramError, Flavor, Passage, Sign};
use crate::surface::genus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoveError {
    #[error("inapplicable move `{kind}`: {reason}")]
    Inapplicable { kind: String, reason: String },
    #[error("cannot parse move `{text}`: {reason}")]
    Syntax { text: String, reason: String },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

pub type MoveResult<T> = std::result::Result<T, MoveError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum R2Pattern {
    /// `a b ... b a`
    Nested,
    /// `a b ... a b`
    Interleaved,
}

/// Which endpoint of a new kink carries the arrow tail: `L` the earlier one
/// in traversal order, `R` the later one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum KinkSide {
    L,
    R,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "move")]
pub enum MoveKind {
    R1Add {
        gap: usize,
        decoration: Option<(KinkSide, Sign)>,
    },
    R1Remove {
        chord: String,
    },
    /// The first new chord gets `sign`, the second the opposite sign; both
    /// pass over at site `over` (1 or 2).
    R2Add {
        gaps: (usize, usize),
        pattern: R2Pattern,
        decoration: Option<(Sign, u8)>,
    },
    R2Remove {
        chords: (String, String),
    },
    R3 {
        chords: [String; 3],
        gaps: [usize; 3],
    },
}

impl MoveKind {
    pub fn name(&self) -> &'static str {
        match self {
            MoveKind::R1Add { .. } => "R1_add",
            MoveKind::R1Remove { .. } => "R1_remove",
            MoveKind::R2Add { .. } => "R2_add",
            MoveKind::R2Remove { .. } => "R2_remove",
            MoveKind::R3 { .. } => "R3",
        }
    }

    pub fn is_removing(&self) -> bool {
        matches!(self, MoveKind::R1Remove { .. } | MoveKind::R2Remove { .. })
    }

    pub fn is_adding(&self) -> bool {
        matches!(self, MoveKind::R1Add { .. } | MoveKind::R2Add { .. })
    }

    /// The same move with decorations dropped, as seen on a free diagram.
    pub fn forget_decorations(&self) -> MoveKind {
        match self {
            MoveKind::R1Add { gap, .. } => MoveKind::R1Add {
                gap: *gap,
                decoration: None,
            },
            MoveKind::R2Add { gaps, pattern, .. } => MoveKind::R2Add {
                gaps: *gaps,
                pattern: *pattern,
                decoration: None,
            },
            other => other.clone(),
        }
    }
}

fn sign_char(s: Sign) -> char {
    match s {
        Sign::Plus => '+',
        Sign::Minus => '-',
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveKind::R1Add { gap, decoration } => {
                write!(f, "R1_add gap={gap}")?;
                if let Some((side, sign)) = decoration {
                    write!(f, " side={side:?} sign={}", sign_char(*sign))?;
                }
                Ok(())
            }
            MoveKind::R1Remove { chord } => write!(f, "R1_remove {chord}"),
            MoveKind::R2Add {
                gaps,
                pattern,
                decoration,
            } => {
                let p = match pattern {
                    R2Pattern::Nested => "nested",
                    R2Pattern::Interleaved => "interleaved",
                };
                write!(f, "R2_add gaps={},{} pattern={p}", gaps.0, gaps.1)?;
                if let Some((sign, over)) = decoration {
                    write!(f, " sign={} over={over}", sign_char(*sign))?;
                }
                Ok(())
            }
            MoveKind::R2Remove { chords } => write!(f, "R2_remove {} {}", chords.0, chords.1),
            MoveKind::R3 { chords, gaps } => write!(
                f,
                "R3 {} {} {} gaps={},{},{}",
                chords[0], chords[1], chords[2], gaps[0], gaps[1], gaps[2]
            ),
        }
    }
}

impl FromStr for MoveKind {
    type Err = MoveError;

    /// Parses the textual form. `R3` may omit `gaps=`; the site is then
    /// resolved against a diagram by [`resolve`].
    fn from_str(text: &str) -> MoveResult<MoveKind> {
        let bad = |reason: &str| MoveError::Syntax {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let mut words = text.split_whitespace();
        let head = words.next().ok_or_else(|| bad("empty move"))?;
        let mut positional = Vec::new();
        let mut keys: Vec<(&str, &str)> = Vec::new();
        for w in words {
            match w.split_once('=') {
                Some((k, v)) => keys.push((k, v)),
                None => positional.push(w.to_string()),
            }
        }
        let key = |name: &str| keys.iter().find(|(k, _)| *k == name).map(|(_, v)| *v);
        for (k, _) in &keys {
            if !["gap", "gaps", "side", "sign", "pattern", "over"].contains(k) {
                return Err(bad(&format!("unknown key `{k}`")));
            }
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(&format!("`{s}` is not a gap index")))
        };
        let nums = |s: &str| s.split(',').map(num).collect::<MoveResult<Vec<usize>>>();
        let sign = |s: &str| match s {
            "+" => Ok(Sign::Plus),
            "-" | "\u{2212}" => Ok(Sign::Minus),
            _ => Err(bad("sign must be + or -")),
        };
        match head {
            "R1_add" => {
                let gap = num(key("gap").ok_or_else(|| bad("missing gap="))?)?;
                let decoration = match (key("side"), key("sign")) {
                    (None, None) => None,
                    (Some(side), Some(s)) => {
                        let side = match side {
                            "L" => KinkSide::L,
                            "R" => KinkSide::R,
                            _ => return Err(bad("side must be L or R")),
                        };
                        Some((side, sign(s)?))
                    }
                    _ => return Err(bad("side= and sign= go together")),
                };
                Ok(MoveKind::R1Add { gap, decoration })
            }
            "R1_remove" => match positional.as_slice() {
                [c] => Ok(MoveKind::R1Remove { chord: c.clone() }),
                _ => Err(bad("expected one chord label")),
            },
            "R2_add" => {
                let g = nums(key("gaps").ok_or_else(|| bad("missing gaps="))?)?;
                if g.len() != 2 {
                    return Err(bad("gaps= needs two indices"));
                }
                let pattern = match key("pattern") {
                    Some("nested") => R2Pattern::Nested,
                    Some("interleaved") => R2Pattern::Interleaved,
                    _ => return Err(bad("pattern must be nested or interleaved")),
                };
                let decoration = match (key("sign"), key("over")) {
                    (None, None) => None,
                    (Some(s), Some(o)) => {
                        let over = match o {
                            "1" => 1,
                            "2" => 2,
                            _ => return Err(bad("over must be 1 or 2")),
                        };
                        Some((sign(s)?, over))
                    }
                    _ => return Err(bad("sign= and over= go together")),
                };
                Ok(MoveKind::R2Add {
                    gaps: (g[0], g[1]),
                    pattern,
                    decoration,
                })
            }
            "R2_remove" => match positional.as_slice() {
                [a, b] => Ok(MoveKind::R2Remove {
                    chords: (a.clone(), b.clone()),
                }),
                _ => Err(bad("expected two chord labels")),
            },
            "R3" => {
                let chords: [String; 3] = positional
                    .clone()
                    .try_into()
                    .map_err(|_| bad("expected three chord labels"))?;
                let gaps = match key("gaps") {
                    Some(g) => {
                        let g = nums(g)?;
                        g.try_into().map_err(|_| bad("gaps= needs three indices"))?
                    }
                    None => [usize::MAX; 3],
                };
                Ok(MoveKind::R3 { chords, gaps })
            }
            other => Err(bad(&format!("unknown move `{other}`"))),
        }
    }
}

/// Fills in an omitted R3 site from the diagram. Other moves pass through.
pub fn resolve(d: &ChordDiagram, m: MoveKind) -> MoveResult<MoveKind> {
    match m {
        MoveKind::R3 { chords, gaps } if gaps[0] == usize::MAX => {
            let mut want = chords.clone();
            want.sort();
            r3_sites(d)
                .into_iter()
                .find(|site| {
                    let mut have = site_labels(d, site);
                    have.sort();
                    have == want
                })
                .map(|site| MoveKind::R3 {
                    chords: site_labels(d, &site),
                    gaps: site.gaps,
                })
                .ok_or_else(|| MoveError::Inapplicable {
                    kind: format!("R3 {} {} {}", chords[0], chords[1], chords[2]),
                    reason: "no legal triangle on these chords".into(),
                })
        }
        other => Ok(other),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub source: ChordDiagram,
    pub target: ChordDiagram,
    pub kind: MoveKind,
    /// A move taking `target` back to a diagram isomorphic to `source`.
    pub inverse: MoveKind,
    /// Image of every source chord, `None` for chords that disappear.
    pub correspondence: Vec<Option<ChordId>>,
    /// Source chords without an image.
    pub vanished: Vec<ChordId>,
    /// Target chords without a preimage.
    pub created: Vec<ChordId>,
    /// For R3: the three source chords and the gaps of the triangle. The
    /// gaps also locate the new triangle in the target.
    pub triangle: Option<([ChordId; 3], [usize; 3])>,
}

impl MoveRecord {
    pub fn image(&self, c: ChordId) -> Option<ChordId> {
        self.correspondence[c.0]
    }

    pub fn preimage(&self, t: ChordId) -> Option<ChordId> {
        self.correspondence
            .iter()
            .position(|&x| x == Some(t))
            .map(ChordId)
    }

    /// Correspondence from this record's source to `next`'s target.
    pub fn compose(first: &[Option<ChordId>], next: &MoveRecord) -> Vec<Option<ChordId>> {
        first
            .iter()
            .map(|c| c.and_then(|c| next.image(c)))
            .collect()
    }
}

/// Composite correspondence of a chain of moves, from the first source.
pub fn chain_correspondence(chain: &[MoveRecord]) -> Vec<Option<ChordId>> {
    let Some(first) = chain.first() else {
        return Vec::new();
    };
    chain[1..]
        .iter()
        .fold(first.correspondence.clone(), |acc, r| {
            MoveRecord::compose(&acc, r)
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    End { chord: usize, tail: bool },
    Base,
}

/// Mutable slot sequence used to assemble move targets.
struct Builder {
    flavor: Flavor,
    items: Vec<Item>,
    decos: Vec<(String, Sign)>,
}

impl Builder {
    fn new(d: &ChordDiagram) -> Self {
        let mut items = Vec::with_capacity(d.n_slots() + 1);
        for (s, &c) in d.slots().iter().enumerate() {
            if d.basepoint() == Some(s) {
                items.push(Item::Base);
            }
            items.push(Item::End {
                chord: c.0,
                tail: d.chord(c).tail_slot() == s,
            });
        }
        if d.basepoint().is_some() && d.n_slots() == 0 {
            items.push(Item::Base);
        }
        let decos = d
            .chords()
            .iter()
            .map(|c| (c.label.clone(), c.sign))
            .collect();
        Builder {
            flavor: d.flavor(),
            items,
            decos,
        }
    }

    /// Index into `items` of the slot numbered `s`.
    fn item_of_slot(&self, s: usize) -> usize {
        let mut seen = 0;
        for (i, it) in self.items.iter().enumerate() {
            if let Item::End { .. } = it {
                if seen == s {
                    return i;
                }
                seen += 1;
            }
        }
        self.items.len()
    }

    fn remove_slots(&mut self, slots: &[usize]) {
        let idx: Vec<usize> = slots.iter().map(|&s| self.item_of_slot(s)).collect();
        let mut keep = Vec::with_capacity(self.items.len());
        for (i, it) in self.items.iter().enumerate() {
            if !idx.contains(&i) {
                keep.push(*it);
            }
        }
        self.items = keep;
    }

    /// Inserts endpoints right before slot `pos` (or at the end when `pos`
    /// equals the slot count).
    fn insert(&mut self, pos: usize, new: &[Item]) {
        let at = self.item_of_slot(pos);
        self.items.splice(at..at, new.iter().copied());
    }

    fn swap_slots(&mut self, a: usize, b: usize) {
        let (i, j) = (self.item_of_slot(a), self.item_of_slot(b));
        self.items.swap(i, j);
    }

    fn add_chord(&mut self, label: String, sign: Sign) -> usize {
        self.decos.push((label, sign));
        self.decos.len() - 1
    }

    /// Builds the diagram; returns it with the map from builder chord
    /// indices to new chord ids.
    fn finish(self) -> (ChordDiagram, Vec<Option<ChordId>>) {
        let mut present = vec![false; self.decos.len()];
        for it in &self.items {
            if let Item::End { chord, .. } = it {
                present[*chord] = true;
            }
        }
        let mut remap = vec![None; self.decos.len()];
        let mut decorations = Vec::new();
        for (i, (label, sign)) in self.decos.iter().enumerate() {
            if present[i] {
                remap[i] = Some(ChordId(decorations.len()));
                decorations.push((label.clone(), *sign, Passage::First));
            }
        }
        let mut slots = Vec::new();
        let mut basepoint = None;
        let mut seen_first = vec![false; self.decos.len()];
        for it in &self.items {
            match *it {
                Item::Base => basepoint = Some(slots.len()),
                Item::End { chord, tail } => {
                    let id = remap[chord].expect("present chord");
                    if tail {
                        decorations[id.0].2 = if seen_first[chord] {
                            Passage::Second
                        } else {
                            Passage::First
                        };
                    }
                    seen_first[chord] = true;
                    slots.push(id);
                }
            }
        }
        let basepoint = basepoint.map(|b| if slots.is_empty() { 0 } else { b % slots.len() });
        let d = ChordDiagram::from_parts(self.flavor, slots, decorations, basepoint)
            .expect("moves keep every chord paired");
        (d, remap)
    }
}

fn fresh_labels(d: &ChordDiagram, k: usize) -> Vec<String> {
    let mut next = d
        .chords()
        .iter()
        .filter_map(|c| c.label.parse::<u64>().ok())
        .max()
        .unwrap_or(0)
        + 1;
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let l = next.to_string();
        if d.find(&l).is_err() {
            out.push(l);
        }
        next += 1;
    }
    out
}

fn gap_ends(m: usize, g: usize) -> (usize, usize) {
    (g, (g + 1) % m)
}

/// Insertion position that recreates gap `g` of the source after the slots
/// in `removed` are deleted. A pair straddling the end of the sequence is
/// recreated at the front, which is the same diagram up to rotation.
fn reinsertion_position(m: usize, g: usize, removed: &[usize]) -> usize {
    if g == m - 1 {
        return 0;
    }
    (0..g).filter(|s| !removed.contains(s)).count()
}

fn inapplicable(m: &MoveKind, reason: impl Into<String>) -> MoveError {
    MoveError::Inapplicable {
        kind: m.to_string(),
        reason: reason.into(),
    }
}

fn check_decoration<T>(d: &ChordDiagram, m: &MoveKind, deco: &Option<T>) -> MoveResult<()> {
    match (d.flavor().is_oriented(), deco.is_some()) {
        (true, false) => Err(inapplicable(m, "oriented diagrams need sign and side/over")),
        (false, true) => Err(inapplicable(m, "free diagrams take no decorations")),
        _ => Ok(()),
    }
}

/// A gap pair where two chords can be cancelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct R2Site {
    gaps: (usize, usize),
}

fn adjacent_ends(d: &ChordDiagram, c: ChordId) -> Option<usize> {
    let m = d.n_slots();
    let [a, b] = d.chord(c).ends;
    if b == a + 1 {
        Some(a)
    } else if a == 0 && b == m - 1 {
        Some(m - 1)
    } else {
        None
    }
}

fn r2_sites(d: &ChordDiagram, a: ChordId, b: ChordId) -> Vec<R2Site> {
    let m = d.n_slots();
    if a == b || m < 4 {
        return Vec::new();
    }
    let pair_gaps: Vec<usize> = (0..m)
        .filter(|&g| {
            let (s, t) = gap_ends(m, g);
            let (x, y) = (d.chord_at(s), d.chord_at(t));
            (x == a && y == b) || (x == b && y == a)
        })
        .collect();
    let mut out = Vec::new();
    for (i, &g1) in pair_gaps.iter().enumerate() {
        for &g2 in &pair_gaps[i + 1..] {
            let (s1, t1) = gap_ends(m, g1);
            let (s2, t2) = gap_ends(m, g2);
            let mut all = [s1, t1, s2, t2];
            all.sort();
            if all.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            if !d.flavor().is_oriented() || r2_decorations_legal(d, a, b, g1) {
                out.push(R2Site { gaps: (g1, g2) });
            }
        }
    }
    out
}

/// Opposite signs, and at each site both strands' passages are over or both under.
fn r2_decorations_legal(d: &ChordDiagram, a: ChordId, b: ChordId, g1: usize) -> bool {
    let (ca, cb) = (d.chord(a), d.chord(b));
    if ca.sign == cb.sign {
        return false;
    }
    let (s, t) = gap_ends(d.n_slots(), g1);
    let over_at = |c: ChordId, slot: usize| {
        d.chord(c).over() == d.chord(c).passage_at(slot).expect("own slot")
    };
    let (sa, sb) = if d.chord_at(s) == a { (s, t) } else { (t, s) };
    over_at(a, sa) == over_at(b, sb)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct R3Site {
    pub gaps: [usize; 3],
    /// Chords in order of appearance in the three gaps.
    pub chords: [ChordId; 3],
}

fn site_labels(d: &ChordDiagram, site: &R3Site) -> [String; 3] {
    site.chords.map(|c| d.label(c).to_string())
}

/// Line arrangement used to decide which decorated triangles are realizable:
/// strand A runs (0,0)->(1,0), B runs (1,0)->(0,1), C runs (0,1)->(0,0).
/// Crossings: 0 = C/A at (0,0), 1 = A/B at (1,0), 2 = B/C at (0,1).
const STRAND_DIR: [(i64, i64); 3] = [(1, 0), (-1, 1), (0, -1)];
const STRAND_ORDER: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
const CROSSING_STRANDS: [(usize, usize); 3] = [(2, 0), (0, 1), (1, 2)];
const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn r3_realizable(d: &ChordDiagram, gaps: [usize; 3]) -> bool {
    let m = d.n_slots();
    for strand_of_gap in PERMS {
        let mut gap_of_strand = [0usize; 3];
        for (gi, &x) in strand_of_gap.iter().enumerate() {
            gap_of_strand[x] = gaps[gi];
        }
        'dirs: for mask in 0..8u8 {
            let forward = |x: usize| mask >> x & 1 == 0;
            // (chord, slot on each of its two strands) per crossing
            let mut at: [Option<ChordId>; 3] = [None; 3];
            let mut slot_on = [[usize::MAX; 3]; 3];
            for x in 0..3 {
                let (s, t) = gap_ends(m, gap_of_strand[x]);
                let mut order = STRAND_ORDER[x];
                if !forward(x) {
                    order.swap(0, 1);
                }
                for (k, slot) in [(order[0], s), (order[1], t)] {
                    let c = d.chord_at(slot);
                    match at[k] {
                        None => at[k] = Some(c),
                        Some(prev) if prev == c => {}
                        Some(_) => continue 'dirs,
                    }
                    slot_on[k][x] = slot;
                }
            }
            let dir = |x: usize| {
                let (a, b) = STRAND_DIR[x];
                if forward(x) {
                    (a, b)
                } else {
                    (-a, -b)
                }
            };
            for heights in PERMS {
                let ok = (0..3).all(|k| {
                    let (x, y) = CROSSING_STRANDS[k];
                    let c = d.chord(at[k].expect("every crossing matched"));
                    let (top, bottom) = if heights[x] > heights[y] {
                        (x, y)
                    } else {
                        (y, x)
                    };
                    let over_slot = c.slot(c.over());
                    let (o, u) = (dir(top), dir(bottom));
                    let sign = if o.0 * u.1 - o.1 * u.0 > 0 {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    };
                    over_slot == slot_on[k][top] && c.sign == sign
                });
                if ok {
                    return true;
                }
            }
        }
    }
    false
}

/// Every gap triple forming a triangle, with flavor-legal decorations.
pub fn r3_sites(d: &ChordDiagram) -> Vec<R3Site> {
    let m = d.n_slots();
    let mut out = Vec::new();
    if d.n_chords() < 3 {
        return out;
    }
    let pair = |g: usize| {
        let (s, t) = gap_ends(m, g);
        (d.chord_at(s), d.chord_at(t))
    };
    for g1 in 0..m {
        let (a, b) = pair(g1);
        if a == b {
            continue;
        }
        for g2 in g1 + 2..m {
            let (c, e) = pair(g2);
            if c == e {
                continue;
            }
            for g3 in g2 + 2..m {
                if (g3 + 1) % m == g1 {
                    continue;
                }
                let (f, h) = pair(g3);
                if f == h {
                    continue;
                }
                let mut all = [a, b, c, e, f, h];
                all.sort();
                // three chords, each once in two different gaps
                if !(all[0] == all[1] && all[2] == all[3] && all[4] == all[5])
                    || all[1] == all[2]
                    || all[3] == all[4]
                {
                    continue;
                }
                let gaps = [g1, g2, g3];
                let in_two_gaps = [[a, b], [c, e], [f, h]].iter().all(|p| p[0] != p[1]);
                if !in_two_gaps {
                    continue;
                }
                if d.flavor().is_oriented() && !r3_realizable(d, gaps) {
                    continue;
                }
                let mut chords = Vec::with_capacity(3);
                for x in [a, b, c, e, f, h] {
                    if !chords.contains(&x) {
                        chords.push(x);
                    }
                }
                out.push(R3Site {
                    gaps,
                    chords: [chords[0], chords[1], chords[2]],
                });
            }
        }
    }
    out
}

/// Applicable removing moves and R3 moves, plus the finite family of adding
/// moves at every gap (pair) with every decoration.
pub fn enumerate_moves(d: &ChordDiagram) -> Vec<MoveKind> {
    let mut out = enumerate_reducing(d);
    out.extend(enumerate_adding(d));
    out
}

/// R1_remove, R2_remove and R3 moves only.
pub fn enumerate_reducing(d: &ChordDiagram) -> Vec<MoveKind> {
    let mut out = Vec::new();
    for c in d.chord_ids() {
        if adjacent_ends(d, c).is_some() {
            out.push(MoveKind::R1Remove {
                chord: d.label(c).to_string(),
            });
        }
    }
    for a in d.chord_ids() {
        for b in d.chord_ids().filter(|b| b.0 > a.0) {
            if !r2_sites(d, a, b).is_empty() {
                out.push(MoveKind::R2Remove {
                    chords: (d.label(a).to_string(), d.label(b).to_string()),
                });
            }
        }
    }
    for site in r3_sites(d) {
        out.push(MoveKind::R3 {
            chords: site_labels(d, &site),
            gaps: site.gaps,
        });
    }
    out
}

pub fn enumerate_adding(d: &ChordDiagram) -> Vec<MoveKind> {
    let m = d.n_slots();
    let positions = m.max(1);
    let mut out = Vec::new();
    let oriented = d.flavor().is_oriented();
    for gap in 0..positions {
        if oriented {
            for side in [KinkSide::L, KinkSide::R] {
                for sign in [Sign::Plus, Sign::Minus] {
                    out.push(MoveKind::R1Add {
                        gap,
                        decoration: Some((side, sign)),
                    });
                }
            }
        } else {
            out.push(MoveKind::R1Add {
                gap,
                decoration: None,
            });
        }
    }
    for p in 0..positions {
        for q in p..positions {
            for pattern in [R2Pattern::Nested, R2Pattern::Interleaved] {
                if oriented {
                    for sign in [Sign::Plus, Sign::Minus] {
                        for over in [1u8, 2] {
                            out.push(MoveKind::R2Add {
                                gaps: (p, q),
                                pattern,
                                decoration: Some((sign, over)),
                            });
                        }
                    }
                } else {
                    out.push(MoveKind::R2Add {
                        gaps: (p, q),
                        pattern,
                        decoration: None,
                    });
                }
            }
        }
    }
    out
}

pub fn apply(d: &ChordDiagram, kind: &MoveKind) -> MoveResult<MoveRecord> {
    let m = d.n_slots();
    let mut b = Builder::new(d);
    let mut triangle = None;
    let mut vanished = Vec::new();
    let mut created_idx = Vec::new();
    let inverse = match kind {
        MoveKind::R1Remove { chord } => {
            let c = d.find(chord)?;
            let g = adjacent_ends(d, c)
                .ok_or_else(|| inapplicable(kind, "endpoints are not adjacent"))?;
            let (s, t) = gap_ends(m, g);
            let ch = d.chord(c);
            let decoration = d.flavor().is_oriented().then(|| {
                let side = if ch.tail_slot() == s {
                    KinkSide::L
                } else {
                    KinkSide::R
                };
                (side, ch.sign)
            });
            b.remove_slots(&[s, t]);
            vanished.push(c);
            MoveKind::R1Add {
                gap: reinsertion_position(m, g, &[s, t]),
                decoration,
            }
        }
        MoveKind::R2Remove { chords: (la, lb) } => {
            let (a, c) = (d.find(la)?, d.find(lb)?);
            let site = *r2_sites(d, a, c)
                .first()
                .ok_or_else(|| inapplicable(kind, "no cancelling bigon on these chords"))?;
            let (g1, g2) = site.gaps;
            let (s1, t1) = gap_ends(m, g1);
            let (s2, t2) = gap_ends(m, g2);
            let removed = [s1, t1, s2, t2];
            let p1 = reinsertion_position(m, g1, &removed);
            let p2 = reinsertion_position(m, g2, &removed);
            // the site that ends up first in the rebuilt sequence comes first
            let wrap1 = g1 == m - 1;
            let wrap2 = g2 == m - 1;
            let ((ga, pa), (gb, pb)) = if (p1, !wrap1) <= (p2, !wrap2) {
                ((g1, p1), (g2, p2))
            } else {
                ((g2, p2), (g1, p1))
            };
            let (sa, ta) = gap_ends(m, ga);
            let (sb, _) = gap_ends(m, gb);
            let first = d.chord_at(sa);
            let pattern = if d.chord_at(sb) == first {
                R2Pattern::Interleaved
            } else {
                R2Pattern::Nested
            };
            let decoration = d.flavor().is_oriented().then(|| {
                let ch = d.chord(first);
                let over = if ch.slot(ch.over()) == sa { 1 } else { 2 };
                (ch.sign, over)
            });
            let _ = ta;
            b.remove_slots(&removed);
            vanished.extend([a, c]);
            MoveKind::R2Add {
                gaps: (pa, pb),
                pattern,
                decoration,
            }
        }
        MoveKind::R1Add { gap, decoration } => {
            check_decoration(d, kind, decoration)?;
            if *gap > m {
                return Err(inapplicable(
                    kind,
                    format!("gap {gap} out of range 0..={m}"),
                ));
            }
            let label = fresh_labels(d, 1).remove(0);
            let (side, sign) = decoration.unwrap_or((KinkSide::L, Sign::Plus));
            let idx = b.add_chord(label.clone(), sign);
            let first_tail = side == KinkSide::L;
            b.insert(
                *gap,
                &[
                    Item::End {
                        chord: idx,
                        tail: first_tail,
                    },
                    Item::End {
                        chord: idx,
                        tail: !first_tail,
                    },
                ],
            );
            created_idx.push(idx);
            MoveKind::R1Remove { chord: label }
        }
        MoveKind::R2Add {
            gaps: (p, q),
            pattern,
            decoration,
        } => {
            check_decoration(d, kind, decoration)?;
            if p > q || *q > m {
                return Err(inapplicable(kind, format!("need gaps p <= q <= {m}")));
            }
            let labels = fresh_labels(d, 2);
            let (sign, over) = decoration.unwrap_or((Sign::Plus, 1));
            let ia = b.add_chord(labels[0].clone(), sign);
            let ib = b.add_chord(labels[1].clone(), sign.flip());
            // tail sits on the over passage iff the sign is positive
            let tail_at_site1 = |s: Sign| (over == 1) == (s == Sign::Plus);
            let ta1 = tail_at_site1(sign);
            let tb1 = tail_at_site1(sign.flip());
            let site1 = [
                Item::End {
                    chord: ia,
                    tail: ta1,
                },
                Item::End {
                    chord: ib,
                    tail: tb1,
                },
            ];
            let site2 = match pattern {
                R2Pattern::Nested => [
                    Item::End {
                        chord: ib,
                        tail: !tb1,
                    },
                    Item::End {
                        chord: ia,
                        tail: !ta1,
                    },
                ],
                R2Pattern::Interleaved => [
                    Item::End {
                        chord: ia,
                        tail: !ta1,
                    },
                    Item::End {
                        chord: ib,
                        tail: !tb1,
                    },
                ],
            };
            b.insert(*q, &site2);
            b.insert(*p, &site1);
            created_idx.extend([ia, ib]);
            MoveKind::R2Remove {
                chords: (labels[0].clone(), labels[1].clone()),
            }
        }
        MoveKind::R3 { chords, gaps } => {
            let resolved = resolve(d, kind.clone())?;
            let MoveKind::R3 { gaps: g, .. } = &resolved else {
                unreachable!()
            };
            let mut sorted = *g;
            sorted.sort();
            let site = r3_sites(d)
                .into_iter()
                .find(|s| s.gaps == sorted)
                .ok_or_else(|| inapplicable(kind, "no legal triangle at these gaps"))?;
            let mut want = chords.clone();
            want.sort();
            let mut have = site_labels(d, &site);
            have.sort();
            if want != have {
                return Err(inapplicable(
                    kind,
                    "chords do not match the triangle at these gaps",
                ));
            }
            let _ = gaps;
            for &gg in &site.gaps {
                let (s, t) = gap_ends(m, gg);
                b.swap_slots(s, t);
            }
            triangle = Some((site.chords, site.gaps));
            MoveKind::R3 {
                chords: site_labels(d, &site),
                gaps: site.gaps,
            }
        }
    };
    let (target, remap) = b.finish();
    let correspondence: Vec<Option<ChordId>> = (0..d.n_chords()).map(|i| remap[i]).collect();
    let created = created_idx
        .iter()
        .map(|&i| remap[i].expect("new chord present"))
        .collect();
    Ok(MoveRecord {
        source: d.clone(),
        target,
        kind: kind.clone(),
        inverse,
        correspondence,
        vanished,
        created,
        triangle,
    })
}

/// Parses a move in text form and applies it.
pub fn apply_text(d: &ChordDiagram, text: &str) -> MoveResult<MoveRecord> {
    let kind = resolve(d, text.parse()?)?;
    apply(d, &kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkOptions {
    pub steps: usize,
    pub seed: u64,
    /// Adding moves are skipped once the diagram has this many chords.
    pub max_chords: usize,
    /// Only take moves that keep the Carter surface (no stabilizations).
    pub fixed_surface: bool,
}

impl WalkOptions {
    pub fn new(steps: usize, seed: u64) -> Self {
        WalkOptions {
            steps,
            seed,
            max_chords: 8,
            fixed_surface: false,
        }
    }
}

/// Whether the move happens inside one surface: same Carter genus on both
/// sides. Always true for free diagrams, which carry no surface.
pub fn preserves_surface(rec: &MoveRecord) -> bool {
    match (genus(&rec.source), genus(&rec.target)) {
        (Ok(a), Ok(b)) => a == b,
        _ => true,
    }
}

/// A seeded chain of legal moves. Each step first picks a move family
/// uniformly among the applicable ones, then a move within it.
pub fn random_walk(d: &ChordDiagram, steps: usize, seed: u64) -> Vec<MoveRecord> {
    random_walk_with(d, WalkOptions::new(steps, seed))
}

pub fn random_walk_with(d: &ChordDiagram, opts: WalkOptions) -> Vec<MoveRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut cur = d.clone();
    let mut chain = Vec::with_capacity(opts.steps);
    for _ in 0..opts.steps {
        let mut moves = enumerate_reducing(&cur);
        if cur.n_chords() < opts.max_chords {
            moves.extend(enumerate_adding(&cur).into_iter().filter(|m| {
                let grows = if matches!(m, MoveKind::R2Add { .. }) {
                    2
                } else {
                    1
                };
                cur.n_chords() + grows <= opts.max_chords
            }));
        }
        let mut families: Vec<&'static str> = moves.iter().map(MoveKind::name).collect();
        families.sort();
        families.dedup();
        let fixed = opts.fixed_surface && cur.flavor().is_oriented();
        let g = if fixed { genus(&cur).ok() } else { None };
        let mut taken = None;
        while !families.is_empty() {
            let f = rng.gen_range(0..families.len());
            let family = families[f];
            let mut pool: Vec<&MoveKind> = moves.iter().filter(|m| m.name() == family).collect();
            if !fixed {
                let pick = pool[rng.gen_range(0..pool.len())];
                taken = Some(apply(&cur, pick).expect("enumerated moves apply"));
                break;
            }
            pool.shuffle(&mut rng);
            // only bigon moves can add or remove a handle
            let stabilizes = |r: &MoveRecord| {
                matches!(r.kind, MoveKind::R2Add { .. } | MoveKind::R2Remove { .. })
                    && genus(&r.target).ok() != g
            };
            taken = pool
                .into_iter()
                .map(|m| apply(&cur, m).expect("enumerated moves apply"))
                .find(|r| !stabilizes(r));
            if taken.is_some() {
                break;
            }
            families.remove(f);
        }
        let Some(rec) = taken else {
            break;
        };
        cur = rec.target.clone();
        chain.push(rec);
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(code: &str) -> ChordDiagram {
        ChordDiagram::parse(code, Flavor::Free).unwrap()
    }

    fn virt(code: &str) -> ChordDiagram {
        ChordDiagram::parse(code, Flavor::Virtual).unwrap()
    }

    #[test]
    fn kink_removal() {
        let d = free("1 1");
        assert!(enumerate_moves(&d).contains(&MoveKind::R1Remove { chord: "1".into() }));
        let r = apply(&d, &"R1_remove 1".parse().unwrap()).unwrap();
        assert!(r.target.is_empty());
        assert_eq!(r.correspondence, vec![None]);
    }

    #[test]
    fn nested_bigon_is_removable() {
        let d = free("1 2 2 1");
        assert!(enumerate_reducing(&d).contains(&MoveKind::R2Remove {
            chords: ("1".into(), "2".into())
        }));
    }

    #[test]
    fn add_then_remove_bigon() {
        let d = free("1 2 1 2");
        let m: MoveKind = "R2_add gaps=0,2 pattern=nested".parse().unwrap();
        let r = apply(&d, &m).unwrap();
        assert_eq!(r.target.n_chords(), 4);
        assert_eq!(r.created.len(), 2);
        let back = apply(&r.target, &r.inverse).unwrap();
        assert_eq!(back.target.serialize(), "1 2 1 2");
    }

    #[test]
    fn virtual_trefoil_has_no_triangle() {
        let d = virt("O1+ O2+ U1+ U2+");
        let err = apply_text(&d, "R3 1 2 3").unwrap_err();
        assert!(matches!(
            err,
            MoveError::Diagram(_) | MoveError::Inapplicable { .. }
        ));
    }

    #[test]
    fn text_form_round_trips() {
        for t in [
            "R1_add gap=3 side=L sign=+",
            "R1_add gap=0",
            "R1_remove 7",
            "R2_add gaps=0,2 pattern=interleaved sign=- over=2",
            "R2_remove 1 2",
            "R3 1 2 3 gaps=0,2,4",
        ] {
            assert_eq!(t.parse::<MoveKind>().unwrap().to_string(), t);
        }
        assert!("R4 1".parse::<MoveKind>().is_err());
        assert!("R1_add gap=1 colour=red".parse::<MoveKind>().is_err());
    }

    #[test]
    fn free_triangle_is_an_involution() {
        let d = free("1 2 3 1 2 3");
        let sites = r3_sites(&d);
        assert_eq!(sites.len(), 2);
        for s in sites {
            let k = MoveKind::R3 {
                chords: site_labels(&d, &s),
                gaps: s.gaps,
            };
            let r = apply(&d, &k).unwrap();
            assert_eq!(r.target.n_chords(), 3);
            assert!(r.correspondence.iter().all(Option::is_some));
            let back = apply(&r.target, &r.inverse).unwrap();
            assert_eq!(back.target, d);
        }
    }

    #[test]
    fn classical_triangle_move() {
        // braid-like R3: one strand over both others
        let d = virt("O1+ O2+ U1+ O3+ U2+ U3+");
        let sites = r3_sites(&d);
        for s in &sites {
            let k = MoveKind::R3 {
                chords: site_labels(&d, s),
                gaps: s.gaps,
            };
            let r = apply(&d, &k).unwrap();
            assert_eq!(apply(&r.target, &r.inverse).unwrap().target, d);
        }
    }

    #[test]
    fn walks_are_deterministic() {
        let d = free("1 2 1 2");
        assert!(random_walk(&d, 0, 1).is_empty());
        let a: Vec<String> = random_walk(&d, 5, 42)
            .iter()
            .map(|r| r.kind.to_string())
            .collect();
        let b: Vec<String> = random_walk(&d, 5, 42)
            .iter()
            .map(|r| r.kind.to_string())
            .collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }
}
