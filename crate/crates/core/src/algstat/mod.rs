//! Reduction of fiber problems `A x = m b, x >= 0, x integer` to model
//! instances over the integer kernel lattice of `A`.
//!
//! With a particular solution `x0` (`A x0 = b`) and a kernel basis `B`, every
//! table in the `m`-fiber is `m x0 + B t` for a unique integer `t`, and the
//! `t` range over `Z^d ∩ mP` with `P = {u : x0 + B u >= 0}`.

pub mod intmat;

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_i64, Halfspace, HalfspaceSystem, OffsetSet, PolytopeSpec, Rational};
use crate::graph::MoveSet;
use crate::instance::ModelInstance;
use intmat::{column_echelon, reduce_against, size_reduce, solve_full_column_rank, IntMatrix};

/// Design matrix `A`, margins `b`, and optionally a Markov basis in `ker A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignProblem {
    a: Vec<Vec<i64>>,
    b: Vec<i64>,
    moves: Option<Vec<Vec<i64>>>,
}

impl DesignProblem {
    pub fn new(a: Vec<Vec<i64>>, b: Vec<i64>, moves: Option<Vec<Vec<i64>>>) -> Result<Self> {
        let cols = a.first().map_or(0, Vec::len);
        if a.is_empty() || cols == 0 {
            return Err(Error::InvalidArgument(
                "design matrix must be nonempty".into(),
            ));
        }
        if let Some(r) = a.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: r.len(),
            });
        }
        if b.len() != a.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let dp = DesignProblem { a, b, moves: None };
        if let Some(ms) = &moves {
            for mv in ms {
                dp.check_move(mv)?;
            }
        }
        Ok(DesignProblem { moves, ..dp })
    }

    pub fn design(&self) -> &[Vec<i64>] {
        &self.a
    }

    pub fn margins(&self) -> &[i64] {
        &self.b
    }

    pub fn moves(&self) -> Option<&[Vec<i64>]> {
        self.moves.as_deref()
    }

    pub fn cols(&self) -> usize {
        self.a[0].len()
    }

    fn check_move(&self, mv: &[i64]) -> Result<()> {
        if mv.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: mv.len(),
            });
        }
        let zero = self.a.iter().all(|row| {
            row.iter()
                .zip(mv)
                .map(|(x, y)| *x as i128 * *y as i128)
                .sum::<i128>()
                == 0
        });
        if zero {
            Ok(())
        } else {
            Err(Error::MoveNotInKernel)
        }
    }

    fn matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(&self.a)
    }
}

/// Affine coordinates `x = m x0 + B t` on the fibers of a design problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberMap {
    pub design: Vec<Vec<i64>>,
    pub margins: Vec<i64>,
    pub x0: Vec<i64>,
    /// Kernel basis vectors (the columns of `B`), each of length `n_cols`.
    pub basis: Vec<Vec<i64>>,
}

impl FiberMap {
    /// Validates `A x0 = b`, `A B = 0`, and that `B` has full column rank.
    pub fn new(
        design: Vec<Vec<i64>>,
        margins: Vec<i64>,
        x0: Vec<i64>,
        basis: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let dp = DesignProblem::new(design, margins, None)?;
        if x0.len() != dp.cols() {
            return Err(Error::DimensionMismatch {
                expected: dp.cols(),
                found: x0.len(),
            });
        }
        let a = dp.matrix();
        if a.mul_vec(&big(&x0)) != big(&dp.b) {
            return Err(Error::InvalidArgument("A x0 != b".into()));
        }
        for col in &basis {
            dp.check_move(col)?;
        }
        let fm = FiberMap {
            design: dp.a,
            margins: dp.b,
            x0,
            basis,
        };
        let ce = column_echelon(&transpose_cols(&fm.basis, fm.x0.len()));
        if ce.rank != fm.basis.len() {
            return Err(Error::InvalidArgument(
                "kernel basis is linearly dependent".into(),
            ));
        }
        Ok(fm)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn basis_matrix(&self) -> IntMatrix {
        let cols: Vec<Vec<BigInt>> = self.basis.iter().map(|c| big(c)).collect();
        IntMatrix::from_columns(&cols, self.x0.len())
    }

    /// `x = m x0 + B t`, rejected when some cell is negative.
    pub fn fiber_to_table(&self, t: &[i64], m: u64) -> Result<Vec<i64>> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: t.len(),
            });
        }
        let m = m as i128;
        let x: Vec<i128> = (0..self.x0.len())
            .map(|i| {
                m * self.x0[i] as i128
                    + self
                        .basis
                        .iter()
                        .zip(t)
                        .map(|(col, tj)| col[i] as i128 * *tj as i128)
                        .sum::<i128>()
            })
            .collect();
        if let Some(cell) = x.iter().position(|v| *v < 0) {
            return Err(Error::NegativeEntry { cell });
        }
        x.into_iter()
            .map(|v| i64::try_from(v).map_err(|_| Error::Overflow(format!("cell value {v}"))))
            .collect()
    }

    /// Inverse of [`FiberMap::fiber_to_table`] on tables of the `m`-fiber.
    pub fn table_to_fiber(&self, x: &[i64], m: u64) -> Result<Vec<i64>> {
        if x.len() != self.x0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.x0.len(),
                found: x.len(),
            });
        }
        if let Some(cell) = x.iter().position(|v| *v < 0) {
            return Err(Error::NegativeEntry { cell });
        }
        let a = IntMatrix::from_rows(&self.design);
        let mb: Vec<BigInt> = self
            .margins
            .iter()
            .map(|b| BigInt::from(*b) * BigInt::from(m))
            .collect();
        if a.mul_vec(&big(x)) != mb {
            return Err(Error::InvalidArgument(format!(
                "table is not in the {m}-fiber"
            )));
        }
        let rhs: Vec<BigInt> = x
            .iter()
            .zip(&self.x0)
            .map(|(xi, x0i)| BigInt::from(*xi) - BigInt::from(*x0i) * BigInt::from(m))
            .collect();
        lattice_coords(&self.basis_matrix(), &rhs)
    }
}

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn small(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter().map(to_i64).collect()
}

fn transpose_cols(cols: &[Vec<i64>], rows: usize) -> IntMatrix {
    let mut m = IntMatrix::zeros(cols.len(), rows);
    for (i, c) in cols.iter().enumerate() {
        for (j, x) in c.iter().enumerate() {
            m[(i, j)] = BigInt::from(*x);
        }
    }
    m
}

/// Integer `tau` with `B tau = v`.
fn lattice_coords(b: &IntMatrix, v: &[BigInt]) -> Result<Vec<i64>> {
    let sol = solve_full_column_rank(b, v).ok_or(Error::NotInLattice)?;
    let ints = sol
        .iter()
        .map(|r| {
            if r.is_integer() {
                Ok(r.to_integer())
            } else {
                Err(Error::NotInLattice)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    small(&ints)
}

/// Flips a vector so its first nonzero entry is positive.
fn orient(v: &mut [BigInt]) {
    if v.iter()
        .find(|x| !x.is_zero())
        .is_some_and(Signed::is_negative)
    {
        v.iter_mut().for_each(|x| *x = -&*x);
    }
}

/// Basis of `{v in Z^n : A v = 0}` as a list of vectors (the columns of `B`).
pub fn kernel_lattice_basis(a: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let mat = IntMatrix::from_rows(a);
    if mat.is_zero() {
        return Err(Error::InvalidArgument("design matrix is zero".into()));
    }
    let ce = column_echelon(&mat);
    if ce.rank == mat.cols() {
        return Err(Error::ZeroKernel);
    }
    let mut basis: Vec<Vec<BigInt>> = (ce.rank..mat.cols()).map(|j| ce.u.column(j)).collect();
    size_reduce(&mut basis);
    basis.iter_mut().for_each(|v| orient(v));
    basis.iter().map(|v| small(v)).collect()
}

/// Some integer `x0` with `A x0 = b`.
pub fn particular_solution(a: &[Vec<i64>], b: &[i64]) -> Result<Vec<i64>> {
    let mat = IntMatrix::from_rows(a);
    if b.len() != mat.rows() {
        return Err(Error::DimensionMismatch {
            expected: mat.rows(),
            found: b.len(),
        });
    }
    let ce = column_echelon(&mat);
    // Forward substitution through the pivots of H, over the rationals.
    let mut y: Vec<Rational> = vec![Rational::zero(); ce.rank];
    let mut next = 0;
    for (i, &bi) in b.iter().enumerate() {
        let partial: Rational = (0..next)
            .map(|c| Rational::from_integer(ce.h[(i, c)].clone()) * &y[c])
            .sum();
        let target = Rational::from_integer(BigInt::from(bi));
        if next < ce.rank && ce.pivots[next].0 == i {
            y[next] = (target - partial) / Rational::from_integer(ce.h[(i, next)].clone());
            next += 1;
        } else if partial != target {
            return Err(Error::NoRationalSolution);
        }
    }
    if y.iter().any(|v| !v.is_integer()) {
        return Err(Error::NoIntegerSolution);
    }
    let mut x = vec![BigInt::zero(); mat.cols()];
    for (c, yc) in y.iter().enumerate() {
        let yc = yc.to_integer();
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += &ce.u[(i, c)] * &yc;
        }
    }
    let kernel: Vec<Vec<BigInt>> = (ce.rank..mat.cols()).map(|j| ce.u.column(j)).collect();
    reduce_against(&mut x, &kernel);
    small(&x)
}

/// Rewrites the problem as `(S = {0}, P)` over the kernel lattice.
pub fn reduce_to_model(dp: &DesignProblem) -> Result<(ModelInstance, FiberMap)> {
    let x0 = particular_solution(&dp.a, &dp.b)?;
    let basis = kernel_lattice_basis(&dp.a)?;
    let d = basis.len();
    let mut rows = Vec::new();
    for (i, &x0i) in x0.iter().enumerate() {
        // x0_i + (B u)_i >= 0  <=>  -(B u)_i <= x0_i
        let a: Vec<i64> = basis.iter().map(|col| -col[i]).collect();
        if a.iter().all(|&c| c == 0) {
            if x0i < 0 {
                return Err(Error::Infeasible(format!(
                    "cell {i} is fixed at a negative value"
                )));
            }
            continue;
        }
        let h = Halfspace::new(a, Rational::from_integer(BigInt::from(x0i)))?;
        // Cells sharing a kernel row give parallel constraints; keep the tightest.
        match rows.iter_mut().find(|r: &&mut Halfspace| r.a == h.a) {
            Some(r) if h.b < r.b => r.b = h.b,
            Some(_) => {}
            None => rows.push(h),
        }
    }
    let system = HalfspaceSystem::new(d, rows)?;
    system.bounding_box()?;
    let polytope = PolytopeSpec::with_found_witness(system)?;
    let instance = ModelInstance::new(None, OffsetSet::origin(d)?, polytope)?;
    let fm = FiberMap::new(dp.a.clone(), dp.b.clone(), x0, basis)?;
    Ok((instance, fm))
}

/// Expresses each move `mu` of the problem as `tau` with `B tau = mu`.
pub fn moves_to_kernel_coords(dp: &DesignProblem, fm: &FiberMap) -> Result<MoveSet> {
    let moves = dp
        .moves()
        .ok_or_else(|| Error::InvalidArgument("design problem carries no moves".into()))?;
    MoveSet::new(
        moves
            .iter()
            .map(|mv| move_to_kernel_coords(dp, fm, mv))
            .collect::<Result<Vec<_>>>()?,
    )
}

pub fn move_to_kernel_coords(dp: &DesignProblem, fm: &FiberMap, mv: &[i64]) -> Result<Vec<i64>> {
    dp.check_move(mv)?;
    lattice_coords(&fm.basis_matrix(), &big(mv))
}

/// Reads a matrix file: a header line `rows cols`, then `rows * cols`
/// whitespace-separated integers.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut tokens = text.split_whitespace();
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what} in matrix header")))?
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad {what} in matrix header")))
    };
    let rows = next_usize("row count")?;
    let cols = next_usize("column count")?;
    let values = tokens
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != rows * cols {
        return Err(Error::Parse(format!(
            "matrix header says {rows}x{cols} but {} entries follow",
            values.len()
        )));
    }
    Ok(values
        .chunks(cols.max(1))
        .take(rows)
        .map(<[i64]>::to_vec)
        .collect())
}

pub fn format_matrix(rows: &[Vec<i64>]) -> String {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out = format!("{} {}\n", rows.len(), cols);
    for r in rows {
        let line: Vec<String> = r.iter().map(i64::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Vec<Vec<i64>>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

/// Reads a vector stored as a `1 x n` or `n x 1` matrix file.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let m = read_matrix(path)?;
    match (m.len(), m.first().map_or(0, Vec::len)) {
        (1, _) => Ok(m.into_iter().next().unwrap()),
        (_, 1) => Ok(m.into_iter().map(|r| r[0]).collect()),
        (r, c) => Err(Error::Parse(format!(
            "expected a vector, found a {r}x{c} matrix"
        ))),
    }
}

/// Design matrix of `r x c` tables with all row and column sums.
pub fn two_way_margins(r: usize, c: usize) -> Vec<Vec<i64>> {
    let mut a = Vec::new();
    for i in 0..r {
        a.push((0..r * c).map(|k| i64::from(k / c == i)).collect());
    }
    for j in 0..c {
        a.push((0..r * c).map(|k| i64::from(k % c == j)).collect());
    }
    a
}
