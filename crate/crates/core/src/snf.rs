//! Smith normal form over the integers with unimodular transforms.
//!
//! Arithmetic is done in `BigInt`; fuzzed relation matrices stay small but
//! intermediate transform entries can grow quickly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    /// Nonzero diagonal entries `d_1 | d_2 | ... | d_rank`, all positive.
    pub divisors: Vec<BigInt>,
    pub rank: usize,
    /// `left * m * right` is diagonal with `divisors` on the diagonal.
    pub left: IntMatrix,
    pub right: IntMatrix,
    pub rows: usize,
    pub cols: usize,
}

pub fn to_big(m: &[Vec<i64>]) -> IntMatrix {
    m.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Smith normal form of an integer matrix given as rows. `cols` is needed
/// because a matrix with no rows still has a column count.
pub fn smith_normal_form(m: &[Vec<i64>], cols: usize) -> Snf {
    smith_normal_form_big(to_big(m), cols)
}

pub fn smith_normal_form_big(mut a: IntMatrix, cols: usize) -> Snf {
    let rows = a.len();
    let mut left = identity(rows);
    let mut right = identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero entry of the trailing block
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && pivot.is_none_or(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        left.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in right.iter_mut() {
            row.swap(t, pj);
        }

        let mut clean = true;
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let q = a[i][t].div_floor(&a[t][t]);
            row_axpy(&mut a, i, t, &q);
            row_axpy(&mut left, i, t, &q);
            if !a[i][t].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..cols {
            if a[t][j].is_zero() {
                continue;
            }
            let q = a[t][j].div_floor(&a[t][t]);
            col_axpy(&mut a, j, t, &q);
            col_axpy(&mut right, j, t, &q);
            if !a[t][j].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // divisibility: fold an offending row into row t and retry
        let offender =
            (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
        if let Some(i) = offender {
            let minus_one = -BigInt::one();
            row_axpy(&mut a, t, i, &minus_one);
            row_axpy(&mut left, t, i, &minus_one);
            continue;
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            for x in left[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    let divisors: Vec<BigInt> = (0..t).map(|i| a[i][i].clone()).collect();
    Snf {
        rank: divisors.len(),
        divisors,
        left,
        right,
        rows,
        cols,
    }
}

/// row[i] -= q * row[k]
fn row_axpy(m: &mut IntMatrix, i: usize, k: usize, q: &BigInt) {
    let src = m[k].clone();
    for (x, s) in m[i].iter_mut().zip(src) {
        *x -= q * s;
    }
}

/// col[j] -= q * col[k]
fn col_axpy(m: &mut IntMatrix, j: usize, k: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let s = row[k].clone();
        row[j] -= q * s;
    }
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix, inner: usize, cols: usize) -> IntMatrix {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Basis of the left kernel `{y : y * m = 0}`, from the rows of the left transform.
pub fn left_kernel(m: &[Vec<i64>], cols: usize) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(m, cols);
    snf.left[snf.rank..].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn divisors(m: &[Vec<i64>], cols: usize) -> Vec<i64> {
        smith_normal_form(m, cols)
            .divisors
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn textbook_examples() {
        assert_eq!(divisors(&[vec![2, 0], vec![0, 3]], 2), vec![1, 6]);
        let z = smith_normal_form(&[vec![0, 0], vec![0, 0]], 2);
        assert_eq!(z.rank, 0);
        assert!(z.divisors.is_empty());
        assert_eq!(
            divisors(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]], 3),
            vec![1, 1, 1]
        );
        assert_eq!(
            divisors(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]], 3),
            vec![2, 6, 12]
        );
    }

    #[test]
    fn transforms_reproduce_diagonal() {
        let m = vec![vec![3, 1, -4], vec![1, 5, 9], vec![2, -6, 5], vec![3, 5, 8]];
        let snf = smith_normal_form(&m, 3);
        let d = mat_mul(&mat_mul(&snf.left, &to_big(&m), 4, 3), &snf.right, 3, 3);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i == j && i < snf.rank {
                    assert_eq!(x, &snf.divisors[i]);
                } else {
                    assert!(x.is_zero());
                }
            }
        }
    }

    #[test]
    fn empty_shapes() {
        let s = smith_normal_form(&[], 3);
        assert_eq!(s.rank, 0);
        assert_eq!(s.right.len(), 3);
        let s = smith_normal_form(&[vec![], vec![]], 0);
        assert_eq!(s.rank, 0);
        assert_eq!(s.left.len(), 2);
    }

    #[test]
    fn left_kernel_annihilates() {
        let m = vec![vec![1, 2], vec![2, 4], vec![0, 1]];
        let k = left_kernel(&m, 2);
        assert_eq!(k.len(), 1);
        let prod = mat_mul(&k, &to_big(&m), 3, 2);
        assert!(prod.iter().flatten().all(|x| x.is_zero()));
    }
}
