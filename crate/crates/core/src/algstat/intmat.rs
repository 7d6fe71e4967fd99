//! Exact integer matrix routines: column-style Hermite reduction and exact
//! rational solves.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, &x) in r.iter().enumerate() {
                m[(i, j)] = BigInt::from(x);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<BigInt>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `col[dst] = a * col[p] + b * col[q]`, `col[q'] = c * col[p] + d * col[q]`.
    fn combine_columns(
        &mut self,
        p: usize,
        q: usize,
        a: &BigInt,
        b: &BigInt,
        c: &BigInt,
        d: &BigInt,
    ) {
        for i in 0..self.rows {
            let x = self[(i, p)].clone();
            let y = self[(i, q)].clone();
            self[(i, p)] = a * &x + b * &y;
            self[(i, q)] = c * &x + d * &y;
        }
    }

    fn negate_column(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    fn sub_column_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * q;
            self[(i, dst)] -= v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of unimodular column reduction `A U = [H | 0]`.
#[derive(Clone, Debug)]
pub struct ColumnEchelon {
    /// `A U`, with nonzero columns `0..rank` in echelon form.
    pub h: IntMatrix,
    /// Unimodular transform.
    pub u: IntMatrix,
    pub rank: usize,
    /// `(row, column)` of each pivot, in column order.
    pub pivots: Vec<(usize, usize)>,
}

/// Column Hermite reduction by extended-gcd column operations.
pub fn column_echelon(a: &IntMatrix) -> ColumnEchelon {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.cols());
    let mut rank = 0;
    let mut pivots = Vec::new();
    for i in 0..a.rows() {
        if rank == a.cols() {
            break;
        }
        for j in rank + 1..a.cols() {
            if h[(i, j)].is_zero() {
                continue;
            }
            if h[(i, rank)].is_zero() {
                let one = BigInt::one();
                let zero = BigInt::zero();
                h.combine_columns(rank, j, &zero, &one, &one, &zero);
                u.combine_columns(rank, j, &zero, &one, &one, &zero);
                continue;
            }
            let x = h[(i, rank)].clone();
            let y = h[(i, j)].clone();
            let eg = x.extended_gcd(&y);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let c = -(&y / &g);
            let d = &x / &g;
            h.combine_columns(rank, j, &s, &t, &c, &d);
            u.combine_columns(rank, j, &s, &t, &c, &d);
        }
        if h[(i, rank)].is_zero() {
            continue;
        }
        if h[(i, rank)].is_negative() {
            h.negate_column(rank);
            u.negate_column(rank);
        }
        // Reduce earlier pivot columns modulo this pivot.
        for p in 0..rank {
            let q = h[(i, p)].div_floor(&h[(i, rank)]);
            if !q.is_zero() {
                h.sub_column_multiple(p, rank, &q);
                u.sub_column_multiple(p, rank, &q);
            }
        }
        pivots.push((i, rank));
        rank += 1;
    }
    ColumnEchelon { h, u, rank, pivots }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pairwise size reduction of a lattice basis: repeatedly subtracts the
/// nearest-integer projection of one vector onto another while it shortens.
pub fn size_reduce(basis: &mut [Vec<BigInt>]) {
    let n = basis.len();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let bj2 = dot(&basis[j], &basis[j]);
                if bj2.is_zero() {
                    continue;
                }
                let num = dot(&basis[i], &basis[j]);
                let q = round_div(&num, &bj2);
                if q.is_zero() {
                    continue;
                }
                let before = dot(&basis[i], &basis[i]);
                let cand: Vec<BigInt> = basis[i]
                    .iter()
                    .zip(&basis[j])
                    .map(|(x, y)| x - &q * y)
                    .collect();
                if dot(&cand, &cand) < before {
                    basis[i] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Reduces `v` by integer multiples of the basis vectors while it shortens.
pub fn reduce_against(v: &mut Vec<BigInt>, basis: &[Vec<BigInt>]) {
    loop {
        let mut changed = false;
        for b in basis {
            let b2 = dot(b, b);
            if b2.is_zero() {
                continue;
            }
            let q = round_div(&dot(v, b), &b2);
            if q.is_zero() {
                continue;
            }
            let cand: Vec<BigInt> = v.iter().zip(b).map(|(x, y)| x - &q * y).collect();
            if dot(&cand, &cand) < dot(v, v) {
                *v = cand;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Nearest integer to `a / b` for `b > 0`, ties rounded up.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (a * &two + b).div_floor(&(b * &two))
}

/// Exact solution of `M x = y` when `M` has full column rank; `None` when the
/// system is inconsistent.
pub fn solve_full_column_rank(m: &IntMatrix, y: &[BigInt]) -> Option<Vec<BigRational>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut aug: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            let mut r: Vec<BigRational> = m
                .row(i)
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            r.push(BigRational::from_integer(y[i].clone()));
            r
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivot_cols = Vec::new();
    for c in 0..cols {
        let Some(p) = (pivot_row..rows).find(|&r| !aug[r][c].is_zero()) else {
            continue;
        };
        aug.swap(pivot_row, p);
        let inv = BigRational::one() / aug[pivot_row][c].clone();
        for x in aug[pivot_row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !aug[r][c].is_zero() {
                let f = aug[r][c].clone();
                let src = aug[pivot_row].clone();
                for (x, s) in aug[r].iter_mut().zip(&src) {
                    *x -= &f * s;
                }
            }
        }
        pivot_cols.push(c);
        pivot_row += 1;
    }
    if aug[pivot_row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    assert_eq!(pivot_cols.len(), cols, "matrix must have full column rank");
    Some((0..cols).map(|c| aug[c][cols].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn echelon_is_unimodular_and_triangular() {
        let a = IntMatrix::from_rows(&[vec![2, 4, 6, 3], vec![1, 0, -1, 5]]);
        let ce = column_echelon(&a);
        assert_eq!(ce.rank, 2);
        // A U == H
        for j in 0..a.cols() {
            assert_eq!(a.mul_vec(&ce.u.column(j)), ce.h.column(j));
        }
        for j in ce.rank..a.cols() {
            assert!(ce.h.column(j).iter().all(Zero::is_zero));
        }
        // Pivot of the first row is gcd(2,4,6,3) = 1.
        assert_eq!(ce.h[(0, 0)], BigInt::one());
        assert!(ce.h[(0, 1)].is_zero());
    }

    #[test]
    fn solve_examples() {
        let m = IntMatrix::from_rows(&[vec![1, 0], vec![0, 2], vec![1, 1]]);
        let x = solve_full_column_rank(&m, &ints(&[1, 4, 3])).unwrap();
        assert_eq!(
            x,
            vec![
                BigRational::from_integer(1.into()),
                BigRational::from_integer(2.into())
            ]
        );
        assert!(solve_full_column_rank(&m, &ints(&[1, 4, 4])).is_none());
    }

    #[test]
    fn size_reduction_shortens() {
        let mut b = vec![ints(&[1, 1, 0]), ints(&[5, 4, 1])];
        size_reduce(&mut b);
        // (5,4,1) - 5 (1,1,0); ties in the rounding go up.
        assert_eq!(b, vec![ints(&[1, 1, 0]), ints(&[0, -1, 1])]);
    }

    #[test]
    fn rounding() {
        assert_eq!(
            round_div(&BigInt::from(7), &BigInt::from(2)),
            BigInt::from(4)
        );
        assert_eq!(
            round_div(&BigInt::from(-7), &BigInt::from(2)),
            BigInt::from(-3)
        );
        assert_eq!(
            round_div(&BigInt::from(5), &BigInt::from(3)),
            BigInt::from(2)
        );
    }
}
