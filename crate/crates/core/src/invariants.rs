//! Invariants built from parities: writhe, `L_odd`, the linking invariant
//! and its multisets.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::chord::{ChordDiagram, DiagramError};
use crate::group::{Element, FgAbelianGroup};
use crate::parity::{classify_chords, ChordClass, CoefficientGroup, ParityAssignment, ParityError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InvariantError {
    #[error("parity has {values} values for {chords} chords")]
    SizeMismatch { chords: usize, values: usize },
    #[error(transparent)]
    Parity(#[from] ParityError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

pub fn writhe(d: &ChordDiagram) -> Result<i64, DiagramError> {
    if !d.flavor().is_oriented() {
        return Err(DiagramError::WrongFlavor {
            expected: "flat or virtual",
            got: d.flavor(),
        });
    }
    Ok(d.writhe_signs().sum())
}

/// `| |O'| - |O''| |`
pub fn l_odd(d: &ChordDiagram) -> Result<usize, ParityError> {
    let classes = classify_chords(d)?;
    let count = |k: ChordClass| classes.iter().filter(|&&c| c == k).count();
    Ok(count(ChordClass::OPrime).abs_diff(count(ChordClass::ODoublePrime)))
}

/// Finite integer combination of group elements; zero coefficients are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAlgebraElement {
    pub group: FgAbelianGroup,
    terms: BTreeMap<Element, i64>,
}

impl GroupAlgebraElement {
    pub fn zero(group: FgAbelianGroup) -> Self {
        GroupAlgebraElement {
            group,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, g: &[i64], k: i64) {
        let g = self.group.reduce(g.to_vec());
        let e = self.terms.entry(g.clone()).or_insert(0);
        *e += k;
        if *e == 0 {
            self.terms.remove(&g);
        }
    }

    pub fn coefficient(&self, g: &[i64]) -> i64 {
        self.terms
            .get(&self.group.reduce(g.to_vec()))
            .copied()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Element, i64)> {
        self.terms.iter().map(|(g, &k)| (g, k))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for GroupAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(g, k)| format!("{k}*{g:?}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Serialize for GroupAlgebraElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            element: &'a Element,
            coefficient: i64,
        }
        s.collect_seq(self.terms.iter().map(|(g, &k)| Term {
            element: g,
            coefficient: k,
        }))
    }
}

/// Sorted multiset of integers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct LinkingMultiset(Vec<i64>);

impl LinkingMultiset {
    pub fn new(mut values: Vec<i64>) -> Self {
        values.sort();
        LinkingMultiset(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn nonzero(&self) -> LinkingMultiset {
        LinkingMultiset(self.0.iter().copied().filter(|&x| x != 0).collect())
    }
}

impl fmt::Display for LinkingMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn check_size(d: &ChordDiagram, p: &ParityAssignment) -> Result<(), InvariantError> {
    if p.values.len() != d.n_chords() {
        return Err(InvariantError::SizeMismatch {
            chords: d.n_chords(),
            values: p.values.len(),
        });
    }
    Ok(())
}

/// `sum sgn(v) [sgn(v) p(v)] - w(D) [0]`
pub fn linking_invariant(
    d: &ChordDiagram,
    p: &ParityAssignment,
) -> Result<GroupAlgebraElement, InvariantError> {
    let w = writhe(d)?;
    check_size(d, p)?;
    let g = p.abelian();
    let mut lk = GroupAlgebraElement::zero(g.clone());
    for (c, s) in d.chord_ids().zip(d.writhe_signs()) {
        lk.add_term(&g.scale(s, p.value(c)), s);
    }
    lk.add_term(&g.zero(), -w);
    Ok(lk)
}

/// Nonzero `lk_g` over `g != 0`, one entry per element.
pub fn linking_multiset_raw(
    d: &ChordDiagram,
    p: &ParityAssignment,
) -> Result<LinkingMultiset, InvariantError> {
    let lk = linking_invariant(d, p)?;
    let g = &lk.group;
    Ok(LinkingMultiset::new(
        lk.terms()
            .filter(|(e, _)| !g.is_zero(e))
            .map(|(_, k)| k)
            .collect(),
    ))
}

/// Nonzero `lk_g + lk_{-g}` over unordered pairs `{g, -g}` with `g != 0`;
/// an involution forms a pair on its own and contributes `lk_g`.
pub fn linking_multiset_signed(
    d: &ChordDiagram,
    p: &ParityAssignment,
) -> Result<LinkingMultiset, InvariantError> {
    let lk = linking_invariant(d, p)?;
    let g = &lk.group;
    let mut out = Vec::new();
    for (e, k) in lk.terms() {
        if g.is_zero(e) {
            continue;
        }
        let inv = g.neg(e);
        if inv == *e {
            out.push(k);
        } else if *e < inv {
            out.push(k + lk.coefficient(&inv));
        } else if lk.coefficient(&inv) == 0 {
            out.push(k);
        }
    }
    Ok(LinkingMultiset::new(
        out.into_iter().filter(|&x| x != 0).collect(),
    ))
}

/// Linking data for diagrams without signs, where `g` and `-g` cannot be
/// told apart by a crossing sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnsignedLinking {
    /// Count mod 2 of crossings at each involution.
    pub involutive: GroupAlgebraElement,
    /// `|p^-1(g)| - |p^-1(-g)|` at each element of order greater than 2.
    pub noninvolutive: GroupAlgebraElement,
    pub ls_inv: LinkingMultiset,
    /// `| |p^-1(g)| - |p^-1(-g)| |` per unordered pair `{g, -g}`.
    pub ls_ni: LinkingMultiset,
}

/// Involutive and non-involutive parts. Finite groups list every involution
/// and every pair, zeros included; infinite groups list those that occur.
pub fn linking_unsigned(
    d: &ChordDiagram,
    p: &ParityAssignment,
) -> Result<UnsignedLinking, InvariantError> {
    check_size(d, p)?;
    let g = p.abelian();
    let mut counts: BTreeMap<Element, i64> = BTreeMap::new();
    for c in d.chord_ids() {
        *counts.entry(g.reduce(p.value(c).clone())).or_insert(0) += 1;
    }
    let universe: Vec<Element> = match g.elements() {
        Some(all) => all,
        None => {
            let mut seen: Vec<Element> =
                counts.keys().flat_map(|e| [e.clone(), g.neg(e)]).collect();
            seen.sort();
            seen.dedup();
            seen
        }
    };
    let count = |e: &Element| counts.get(e).copied().unwrap_or(0);
    let mut involutive = GroupAlgebraElement::zero(g.clone());
    let mut noninvolutive = GroupAlgebraElement::zero(g.clone());
    let (mut ls_inv, mut ls_ni) = (Vec::new(), Vec::new());
    for e in &universe {
        if g.is_zero(e) {
            continue;
        }
        let inv = g.neg(e);
        if g.is_involution(e) {
            let k = count(e) % 2;
            involutive.add_term(e, k);
            ls_inv.push(k);
        } else {
            let diff = count(e) - count(&inv);
            noninvolutive.add_term(e, diff);
            if *e < inv {
                ls_ni.push(diff.abs());
            }
        }
    }
    Ok(UnsignedLinking {
        involutive,
        noninvolutive,
        ls_inv: LinkingMultiset::new(ls_inv),
        ls_ni: LinkingMultiset::new(ls_ni),
    })
}

/// The oriented Gaussian parity read in `Z4` even without odd chords, where
/// every value is 0 or 2.
pub fn oriented_gaussian_z4(d: &ChordDiagram) -> Result<ParityAssignment, ParityError> {
    let classes = classify_chords(d)?;
    Ok(ParityAssignment {
        group: CoefficientGroup::Z4WithClasses {
            labeling_canonical: false,
        },
        values: classes.iter().map(|c| vec![c.z4()]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chord::Flavor;
    use crate::surface::homological_parity;

    fn v(s: &str) -> ChordDiagram {
        ChordDiagram::parse(s, Flavor::Virtual).unwrap()
    }

    fn free(s: &str) -> ChordDiagram {
        ChordDiagram::parse(s, Flavor::Free).unwrap()
    }

    #[test]
    fn writhe_examples() {
        assert_eq!(writhe(&v("O1+ U1+")), Ok(1));
        assert_eq!(writhe(&v("O1+ O2+ U1+ U2+")), Ok(2));
        assert_eq!(writhe(&v("O1+ U2- U1+ O2-")), Ok(0));
        assert!(writhe(&free("1 1")).is_err());
    }

    #[test]
    fn l_odd_examples() {
        assert_eq!(l_odd(&free("1 2 1 2")), Ok(0));
        assert_eq!(l_odd(&free("1 2 3 1 2 3")), Ok(0));
        assert_eq!(l_odd(&ChordDiagram::empty(Flavor::Free)), Ok(0));
    }

    #[test]
    fn trivial_parity_has_no_linking() {
        let d = v("O1+ U2+ O3- U1+ O2+ U3-");
        assert!(linking_invariant(&d, &ParityAssignment::trivial(&d))
            .unwrap()
            .is_zero());
        assert_eq!(
            linking_multiset_signed(&d, &ParityAssignment::trivial(&d)).unwrap(),
            LinkingMultiset::default()
        );
    }

    #[test]
    fn virtual_trefoil_multiset() {
        let d = v("O1+ O2+ U1+ U2+");
        let hp = homological_parity(&d).unwrap();
        assert_eq!(linking_multiset_signed(&d, &hp).unwrap().values(), &[2]);
        assert_eq!(linking_multiset_raw(&d, &hp).unwrap().values(), &[1, 1]);
        let kink = v("O1+ U1+");
        assert_eq!(
            linking_multiset_signed(&kink, &homological_parity(&kink).unwrap())
                .unwrap()
                .values(),
            &[] as &[i64]
        );
    }

    #[test]
    fn unsigned_on_two_odd_chords() {
        let d = free("1 2 1 2");
        let u = linking_unsigned(&d, &oriented_gaussian_z4(&d).unwrap()).unwrap();
        assert_eq!(u.ls_ni.values(), &[0]);
        assert_eq!(u.ls_inv.values(), &[0]);
    }
}
