//! Fourier-Motzkin elimination over exact rationals.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{HalfspaceSystem, Rational, RationalPoint};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Row {
    a: Vec<BigInt>,
    b: Rational,
}

impl Row {
    /// Divides out the content of `a`. Returns `None` for a zero normal.
    fn primitive(mut self) -> Option<Row> {
        let g = self.a.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if g.is_zero() {
            return None;
        }
        if !g.is_one() {
            for c in &mut self.a {
                *c /= &g;
            }
            self.b /= Rational::from_integer(g);
        }
        Some(self)
    }
}

/// Keeps the tightest right-hand side per normal; fails on `0 <= b < 0`.
fn insert(rows: &mut HashMap<Vec<BigInt>, Rational>, row: Row) -> Result<()> {
    match row.primitive() {
        None => Ok(()),
        Some(r) => {
            rows.entry(r.a)
                .and_modify(|b| {
                    if r.b < *b {
                        *b = r.b.clone();
                    }
                })
                .or_insert(r.b);
            Ok(())
        }
    }
}

fn check_trivial(row: &Row) -> Result<()> {
    if row.a.iter().all(Zero::is_zero) && row.b.is_negative() {
        return Err(Error::Infeasible("polyhedron is empty".into()));
    }
    Ok(())
}

fn eliminate(rows: &[Row], var: usize) -> Result<Vec<Row>> {
    let mut kept: HashMap<Vec<BigInt>, Rational> = HashMap::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for r in rows {
        match r.a[var].sign() {
            num_bigint::Sign::Plus => pos.push(r),
            num_bigint::Sign::Minus => neg.push(r),
            num_bigint::Sign::NoSign => insert(&mut kept, r.clone())?,
        }
    }
    for p in &pos {
        for n in &neg {
            let cp = -&n.a[var];
            let cn = p.a[var].clone();
            let a: Vec<BigInt> =
                p.a.iter()
                    .zip(&n.a)
                    .map(|(x, y)| x * &cp + y * &cn)
                    .collect();
            let b = &p.b * Rational::from_integer(cp.clone()) + &n.b * Rational::from_integer(cn);
            let row = Row { a, b };
            check_trivial(&row)?;
            insert(&mut kept, row)?;
        }
    }
    let mut out: Vec<Row> = kept.into_iter().map(|(a, b)| Row { a, b }).collect();
    // Deterministic order regardless of hashing.
    out.sort_by(|x, y| x.a.cmp(&y.a).then_with(|| x.b.cmp(&y.b)));
    Ok(out)
}

fn rows_of(sys: &HalfspaceSystem) -> Vec<Row> {
    sys.rows()
        .iter()
        .map(|r| Row {
            a: r.a.iter().map(|&x| BigInt::from(x)).collect(),
            b: r.b.clone(),
        })
        .collect()
}

/// Interval of `var` allowed by rows in which it is the only variable left
/// among those not yet fixed. `fixed` holds values for the other variables.
fn bounds_for(
    rows: &[Row],
    var: usize,
    fixed: &[Option<Rational>],
) -> Result<(Option<Rational>, Option<Rational>)> {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for r in rows {
        let mut rhs = r.b.clone();
        for (j, c) in r.a.iter().enumerate() {
            if j != var && !c.is_zero() {
                match &fixed[j] {
                    Some(v) => rhs -= v * Rational::from_integer(c.clone()),
                    None => unreachable!("variable {j} should have been eliminated"),
                }
            }
        }
        let coef = &r.a[var];
        if coef.is_zero() {
            if rhs.is_negative() {
                return Err(Error::Infeasible("polyhedron is empty".into()));
            }
            continue;
        }
        let bound = rhs / Rational::from_integer(coef.clone());
        if coef.is_positive() {
            if hi.as_ref().is_none_or(|h| bound < *h) {
                hi = Some(bound);
            }
        } else if lo.as_ref().is_none_or(|l| bound > *l) {
            lo = Some(bound);
        }
    }
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l > h {
            return Err(Error::Infeasible("polyhedron is empty".into()));
        }
    }
    Ok((lo, hi))
}

pub(super) fn bounding_box(sys: &HalfspaceSystem) -> Result<Vec<(Rational, Rational)>> {
    let d = sys.dim();
    let base = rows_of(sys);
    for r in &base {
        check_trivial(r)?;
    }
    let mut out = Vec::with_capacity(d);
    for target in 0..d {
        let mut rows = base.clone();
        for var in (0..d).filter(|&v| v != target) {
            rows = eliminate(&rows, var)?;
        }
        let fixed = vec![None; d];
        let (lo, hi) = bounds_for(&rows, target, &fixed)?;
        match (lo, hi) {
            (Some(l), Some(h)) => out.push((l, h)),
            _ => return Err(Error::Unbounded { coord: target }),
        }
    }
    Ok(out)
}

/// Finds a point satisfying every row strictly, or `None` when the system has
/// empty interior.
///
/// Maximizes a common slack `s <= 1` in `a.x + s <= b` by eliminating the
/// coordinates one at a time, fixes `s` at half its optimum, and recovers the
/// coordinates by back-substitution through the stored elimination stages.
pub fn interior_point(sys: &HalfspaceSystem) -> Result<Option<RationalPoint>> {
    let d = sys.dim();
    let slack = d;
    let mut rows: Vec<Row> = rows_of(sys)
        .into_iter()
        .map(|mut r| {
            r.a.push(BigInt::one());
            r
        })
        .collect();
    let mut cap = vec![BigInt::zero(); d + 1];
    cap[slack] = BigInt::one();
    rows.push(Row {
        a: cap,
        b: Rational::one(),
    });

    let mut stages = vec![rows];
    for var in 0..d {
        let next = match eliminate(stages.last().unwrap(), var) {
            Ok(r) => r,
            Err(Error::Infeasible(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        stages.push(next);
    }

    let mut fixed: Vec<Option<Rational>> = vec![None; d + 1];
    let (_, s_max) = match bounds_for(stages.last().unwrap(), slack, &fixed) {
        Ok(b) => b,
        Err(Error::Infeasible(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let s_max = s_max.expect("slack is capped at 1");
    if !s_max.is_positive() {
        return Ok(None);
    }
    fixed[slack] = Some(s_max / Rational::from_integer(BigInt::from(2)));

    for var in (0..d).rev() {
        let (lo, hi) = bounds_for(&stages[var], var, &fixed)?;
        let v = match (lo, hi) {
            (Some(l), Some(h)) => (l + h) / Rational::from_integer(BigInt::from(2)),
            (Some(l), None) => l,
            (None, Some(h)) => h,
            (None, None) => Rational::zero(),
        };
        fixed[var] = Some(v);
    }
    let coords = fixed[..d].iter().map(|v| v.clone().unwrap()).collect();
    Ok(Some(RationalPoint::new(coords)))
}

#[cfg(test)]
mod tests {
    use super::super::{rat, ratio};
    use super::*;

    #[test]
    fn interior_point_of_triangle_is_strict() {
        let sys = HalfspaceSystem::from_rows(
            2,
            vec![
                (vec![-1, 0], rat(0)),
                (vec![0, -1], rat(0)),
                (vec![1, 1], rat(1)),
            ],
        )
        .unwrap();
        let w = interior_point(&sys).unwrap().unwrap();
        assert!(sys.contains(&w, true).unwrap());
    }

    #[test]
    fn flat_polytope_has_no_interior() {
        // x <= 0, -x <= 0, 0 <= y <= 1
        let sys = HalfspaceSystem::from_rows(
            2,
            vec![
                (vec![1, 0], rat(0)),
                (vec![-1, 0], rat(0)),
                (vec![0, 1], rat(1)),
                (vec![0, -1], rat(0)),
            ],
        )
        .unwrap();
        assert_eq!(interior_point(&sys).unwrap(), None);
    }

    #[test]
    fn empty_system_is_reported() {
        let sys =
            HalfspaceSystem::from_rows(1, vec![(vec![1], rat(0)), (vec![-1], rat(-1))]).unwrap();
        assert_eq!(interior_point(&sys).unwrap(), None);
        assert!(matches!(sys.bounding_box(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn interior_point_in_unbounded_region() {
        let sys = HalfspaceSystem::from_rows(2, vec![(vec![1, 1], ratio(1, 3))]).unwrap();
        let w = interior_point(&sys).unwrap().unwrap();
        assert!(sys.contains(&w, true).unwrap());
    }
}
