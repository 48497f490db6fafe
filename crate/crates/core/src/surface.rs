//! The Carter surface of a signed Gauss diagram.
//!
//! Crossings are the vertices of a 4-valent graph embedded by a rotation
//! system; the faces of that embedding are the cells of the complement, and
//! every face boundary read through the Gauss diagram gives a word in the
//! crossings. Those words present the parity group of the knot in the surface.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chord::{ChordDiagram, ChordId, DiagramError, Passage, Result};
use crate::group::{abelianize, Abelianization, FgAbelianGroup};
use crate::parity::{CoefficientGroup, ParityAssignment};

pub use crate::snf::{smith_normal_form, Snf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// One of the four half-edges at a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct EdgeEnd {
    pub slot: usize,
    pub dir: Direction,
}

impl EdgeEnd {
    fn index(self) -> usize {
        2 * self.slot + usize::from(self.dir == Direction::In)
    }

    fn from_index(i: usize) -> EdgeEnd {
        EdgeEnd {
            slot: i / 2,
            dir: if i % 2 == 1 {
                Direction::In
            } else {
                Direction::Out
            },
        }
    }
}

/// Counterclockwise order of the edge ends at every crossing.
///
/// The passages are ordered (tail, head) along the modified chord arrow, which
/// always makes their directions a positive frame. The tail passage runs along
/// the x-axis and the head passage along the y-axis, so reading from angle 0
/// the order is: tail out, head out, tail in, head in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RotationSystem {
    pub orders: Vec<[EdgeEnd; 4]>,
}

pub fn rotation_system(d: &ChordDiagram) -> Result<RotationSystem> {
    if !d.flavor().is_oriented() {
        return Err(DiagramError::WrongFlavor {
            expected: "flat or virtual",
            got: d.flavor(),
        });
    }
    let orders = d
        .chords()
        .iter()
        .map(|c| {
            let (t, h) = (c.tail_slot(), c.head_slot());
            [
                EdgeEnd {
                    slot: t,
                    dir: Direction::Out,
                },
                EdgeEnd {
                    slot: h,
                    dir: Direction::Out,
                },
                EdgeEnd {
                    slot: t,
                    dir: Direction::In,
                },
                EdgeEnd {
                    slot: h,
                    dir: Direction::In,
                },
            ]
        })
        .collect();
    Ok(RotationSystem { orders })
}

/// A face turning at a crossing from one passage onto the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Corner {
    pub chord: ChordId,
    pub from: Passage,
    pub to: Passage,
    /// +1 when the jump runs along the modified chord arrow.
    pub exponent: i64,
    /// Circle edge (gap) the face follows after this corner.
    pub edge: usize,
}

pub type Word = Vec<(ChordId, i64)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Face {
    pub corners: Vec<Corner>,
}

impl Face {
    pub fn word(&self) -> Word {
        self.corners.iter().map(|c| (c.chord, c.exponent)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaceData {
    pub faces: Vec<Face>,
    pub genus: usize,
}

impl FaceData {
    pub fn words(&self) -> Vec<Word> {
        self.faces.iter().map(Face::word).collect()
    }

    pub fn corner_count(&self) -> usize {
        self.faces.iter().map(|f| f.corners.len()).sum()
    }

    /// The triangular face running along exactly these three gaps.
    pub fn triangle(&self, gaps: [usize; 3]) -> Option<&Face> {
        let mut want = gaps;
        want.sort();
        self.faces.iter().find(|f| {
            let mut e: Vec<usize> = f.corners.iter().map(|c| c.edge).collect();
            e.sort();
            e == want
        })
    }
}

pub fn trace_faces(d: &ChordDiagram) -> Result<FaceData> {
    let rot = rotation_system(d)?;
    let n = d.n_chords();
    if n == 0 {
        // a plain circle on the sphere bounds two discs
        let faces = vec![
            Face {
                corners: Vec::new(),
            },
            Face {
                corners: Vec::new(),
            },
        ];
        return Ok(FaceData { faces, genus: 0 });
    }
    let m = d.n_slots();
    let mut ccw_next = vec![0usize; 2 * m];
    for order in &rot.orders {
        for i in 0..4 {
            ccw_next[order[i].index()] = order[(i + 1) % 4].index();
        }
    }
    // the far end of the edge leaving (or entering) at this end
    let across = |e: EdgeEnd| match e.dir {
        Direction::Out => EdgeEnd {
            slot: (e.slot + 1) % m,
            dir: Direction::In,
        },
        Direction::In => EdgeEnd {
            slot: (e.slot + m - 1) % m,
            dir: Direction::Out,
        },
    };
    let mut seen = vec![false; 2 * m];
    let mut faces = Vec::new();
    for start in 0..2 * m {
        if seen[start] {
            continue;
        }
        let mut corners = Vec::new();
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            let arrive = across(EdgeEnd::from_index(cur));
            let leave = EdgeEnd::from_index(ccw_next[arrive.index()]);
            let id = d.chord_at(arrive.slot);
            let c = d.chord(id);
            let from = c
                .passage_at(arrive.slot)
                .expect("slot belongs to its chord");
            let to = c
                .passage_at(leave.slot)
                .expect("rotation stays at one crossing");
            let exponent = if from == c.tail { 1 } else { -1 };
            let edge = match leave.dir {
                Direction::Out => leave.slot,
                Direction::In => (leave.slot + m - 1) % m,
            };
            corners.push(Corner {
                chord: id,
                from,
                to,
                exponent,
                edge,
            });
            cur = leave.index();
        }
        faces.push(Face { corners });
    }
    // V - E + F = n - 2n + F = 2 - 2g
    let genus = (2 + n - faces.len()) / 2;
    debug_assert_eq!(2 + n, faces.len() + 2 * genus);
    Ok(FaceData { faces, genus })
}

pub fn genus(d: &ChordDiagram) -> Result<usize> {
    Ok(trace_faces(d)?.genus)
}

/// `< crossings | face words >`
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
}

impl GroupPresentation {
    /// Exponent sums of every relator, one row per relator.
    pub fn relation_matrix(&self) -> Vec<Vec<i64>> {
        self.relators
            .iter()
            .map(|w| {
                let mut row = vec![0; self.generators.len()];
                for &(c, e) in w {
                    row[c.0] += e;
                }
                row
            })
            .collect()
    }

    pub fn abelianize(&self) -> Abelianization {
        abelianize(&self.relation_matrix(), self.generators.len())
    }
}

pub fn presentation(d: &ChordDiagram) -> Result<GroupPresentation> {
    let fd = trace_faces(d)?;
    Ok(GroupPresentation {
        generators: d.chords().iter().map(|c| c.label.clone()).collect(),
        relators: fd.words(),
    })
}

/// First homology of the surface modulo the knot class, with the image of
/// every crossing.
pub fn homological_parity(d: &ChordDiagram) -> Result<ParityAssignment> {
    let ab = presentation(d)?.abelianize();
    Ok(ParityAssignment {
        group: CoefficientGroup::FgAbelian(ab.group),
        values: ab.generator_images,
    })
}

pub fn homology_group(d: &ChordDiagram) -> Result<FgAbelianGroup> {
    Ok(presentation(d)?.abelianize().group)
}

/// Based left half of every crossing as a word in the presentation
/// generators. Circle arcs contribute nothing, so each loop reads as its
/// own chord traversed along the modified arrow.
pub fn homotopical_parity_words(d: &ChordDiagram) -> Result<BTreeMap<ChordId, Word>> {
    if d.is_empty() {
        return Ok(BTreeMap::new());
    }
    rotation_system(d)?;
    if d.basepoint().is_none() {
        return Err(DiagramError::MissingBasepoint);
    }
    Ok(d.chord_ids().map(|c| (c, vec![(c, 1)])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chord::Flavor;

    fn v(code: &str) -> ChordDiagram {
        ChordDiagram::parse(code, Flavor::Virtual).unwrap()
    }

    #[test]
    fn free_diagrams_have_no_rotation() {
        let d = ChordDiagram::parse("1 1", Flavor::Free).unwrap();
        assert!(matches!(
            rotation_system(&d),
            Err(DiagramError::WrongFlavor { .. })
        ));
    }

    #[test]
    fn kink_is_planar_with_a_monogon() {
        let fd = trace_faces(&v("O1+ U1+")).unwrap();
        assert_eq!(fd.genus, 0);
        assert_eq!(fd.faces.len(), 3);
        assert!(fd.faces.iter().any(|f| f.corners.len() == 1));
        assert_eq!(fd.corner_count(), 4);
        let h = homological_parity(&v("O1+ U1+")).unwrap();
        assert!(h.abelian().is_trivial());
    }

    #[test]
    fn virtual_trefoil_lives_on_the_torus() {
        let d = v("O1+ O2+ U1+ U2+");
        let fd = trace_faces(&d).unwrap();
        assert_eq!(fd.genus, 1);
        assert_eq!(fd.faces.len(), 2);
        let h = homological_parity(&d).unwrap();
        let g = h.abelian();
        assert_eq!(
            g,
            FgAbelianGroup {
                rank: 1,
                torsion: vec![]
            }
        );
        assert_eq!(h.values[0], g.neg(&h.values[1]));
        assert!(!g.is_zero(&h.values[0]));
    }

    #[test]
    fn classical_trefoil_is_planar() {
        let d = v("O1+ U2+ O3+ U1+ O2+ U3+");
        let fd = trace_faces(&d).unwrap();
        assert_eq!(fd.genus, 0);
        assert_eq!(fd.faces.len(), 5);
        assert!(homology_group(&d).unwrap().is_trivial());
    }

    #[test]
    fn empty_diagram() {
        let d = ChordDiagram::empty(Flavor::Virtual);
        assert_eq!(genus(&d).unwrap(), 0);
        assert!(homology_group(&d).unwrap().is_trivial());
        assert!(homotopical_parity_words(&d).unwrap().is_empty());
    }

    #[test]
    fn based_words() {
        let d = v("* O1+ U1+");
        let w = homotopical_parity_words(&d).unwrap();
        assert_eq!(w[&ChordId(0)], vec![(ChordId(0), 1)]);
        assert_eq!(
            homotopical_parity_words(&v("O1+ U1+")),
            Err(DiagramError::MissingBasepoint)
        );
    }
}
