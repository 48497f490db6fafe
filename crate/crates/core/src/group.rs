//! Finitely generated abelian groups `Z_{d_1} + ... + Z_{d_t} + Z^r`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::snf::{smith_normal_form, Snf};

/// Coordinates: the torsion components first (reduced into `0..d_i`),
/// then the free components.
pub type Element = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FgAbelianGroup {
    pub rank: usize,
    /// Invariant factors, each at least 2, each dividing the next.
    pub torsion: Vec<u64>,
}

impl FgAbelianGroup {
    pub fn trivial() -> Self {
        FgAbelianGroup {
            rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn cyclic(order: u64) -> Self {
        match order {
            0 => FgAbelianGroup {
                rank: 1,
                torsion: Vec::new(),
            },
            1 => Self::trivial(),
            d => FgAbelianGroup {
                rank: 0,
                torsion: vec![d],
            },
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.rank == 0
    }

    pub fn dim(&self) -> usize {
        self.torsion.len() + self.rank
    }

    pub fn order(&self) -> Option<u64> {
        self.is_finite().then(|| self.torsion.iter().product())
    }

    pub fn zero(&self) -> Element {
        vec![0; self.dim()]
    }

    pub fn reduce(&self, mut e: Element) -> Element {
        for (x, &d) in e.iter_mut().zip(&self.torsion) {
            *x = x.rem_euclid(d as i64);
        }
        e
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Element {
        self.reduce(a.iter().zip(b).map(|(x, y)| x + y).collect())
    }

    pub fn scale(&self, k: i64, a: &[i64]) -> Element {
        self.reduce(a.iter().map(|x| k * x).collect())
    }

    pub fn neg(&self, a: &[i64]) -> Element {
        self.scale(-1, a)
    }

    pub fn is_zero(&self, a: &[i64]) -> bool {
        self.reduce(a.to_vec()).iter().all(|&x| x == 0)
    }

    /// `2a = 0`
    pub fn is_involution(&self, a: &[i64]) -> bool {
        !self.is_zero(a) && self.is_zero(&self.scale(2, a))
    }

    /// All elements of a finite group, in lexicographic coordinate order.
    pub fn elements(&self) -> Option<Vec<Element>> {
        if !self.is_finite() {
            return None;
        }
        let mut out = vec![Vec::new()];
        for &d in &self.torsion {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<i64>| {
                    (0..d as i64).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        Some(out)
    }

    /// Integer relations among `values`: a generating set of the lattice
    /// `{c in Z^k : sum c_i values_i = 0}`.
    pub fn relations(&self, values: &[Element]) -> Vec<Vec<i64>> {
        let k = values.len();
        let mut m: Vec<Vec<i64>> = values.to_vec();
        for (i, &d) in self.torsion.iter().enumerate() {
            let mut row = vec![0; self.dim()];
            row[i] = d as i64;
            m.push(row);
        }
        let snf = smith_normal_form(&m, self.dim());
        snf.left[snf.rank..]
            .iter()
            .map(|row| {
                row[..k]
                    .iter()
                    .map(|x| x.to_i64().expect("relation coefficient fits in i64"))
                    .collect()
            })
            .filter(|r: &Vec<i64>| r.iter().any(|&x| x != 0))
            .collect()
    }

    pub fn combination_is_zero(&self, coeffs: &[i64], values: &[Element]) -> bool {
        let mut acc = self.zero();
        for (&c, v) in coeffs.iter().zip(values) {
            acc = self.add(&acc, &self.scale(c, v));
        }
        self.is_zero(&acc)
    }
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|d| format!("Z{d}")).collect();
        match self.rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Cokernel of a relation matrix (rows are relators over `n` generators),
/// together with the image of every generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abelianization {
    pub group: FgAbelianGroup,
    pub generator_images: Vec<Element>,
}

pub fn abelianize(relators: &[Vec<i64>], n: usize) -> Abelianization {
    let snf: Snf = smith_normal_form(relators, n);
    let mut torsion_idx = Vec::new();
    let mut torsion = Vec::new();
    for (i, d) in snf.divisors.iter().enumerate() {
        if d > &BigInt::from(1) {
            torsion_idx.push(i);
            torsion.push(d.to_u64().expect("torsion coefficient fits in u64"));
        }
    }
    let group = FgAbelianGroup {
        rank: n - snf.rank,
        torsion,
    };
    // generator v maps to row v of the right transform
    let generator_images = (0..n)
        .map(|v| {
            let row = &snf.right[v];
            let mut e: Element = Vec::with_capacity(group.dim());
            for (&i, &d) in torsion_idx.iter().zip(&group.torsion) {
                let r = row[i].mod_floor(&BigInt::from(d));
                e.push(r.to_i64().expect("reduced"));
            }
            for x in &row[snf.rank..] {
                e.push(x.to_i64().expect("free coordinate fits in i64"));
            }
            e
        })
        .collect();
    Abelianization {
        group,
        generator_images,
    }
}
