//! Exact rational polytopes: halfspace systems, dilation and inflation,
//! lattice-point enumeration.
//!
//! All arithmetic is exact. Boundaries are inclusive unless a strict test is
//! requested explicitly. Every enumeration is returned in lexicographic order
//! so that indices into the result are stable identifiers.

mod fourier_motzkin;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use fourier_motzkin::interior_point;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    Rational::from_str(t).map_err(|_| Error::Parse(format!("not a rational number: {s:?}")))
}

pub(crate) fn to_i64(n: &BigInt) -> Result<i64> {
    n.to_i64()
        .ok_or_else(|| Error::Overflow(format!("{n} does not fit in 64 bits")))
}

/// A point of Q^d, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalPoint(pub Vec<Rational>);

impl RationalPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        RationalPoint(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RationalPoint(coords.iter().map(|&c| rat(c)).collect())
    }

    pub fn parse(coords: &[impl AsRef<str>]) -> Result<Self> {
        coords
            .iter()
            .map(|c| parse_rational(c.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(RationalPoint)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        RationalPoint(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|c| c.to_string()).collect()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// One inequality `a . x <= b` with a primitive integer normal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub a: Vec<i64>,
    pub b: Rational,
}

impl Halfspace {
    /// Builds a halfspace from an integer normal, dividing out its content.
    pub fn new(a: Vec<i64>, b: Rational) -> Result<Self> {
        let a: Vec<Rational> = a.into_iter().map(rat).collect();
        let (a, b) = normalize(&a, &b)?;
        Ok(Halfspace { a, b })
    }

    pub fn value(&self, p: &[Rational]) -> Rational {
        dot_int_rat(&self.a, p)
    }
}

pub(crate) fn dot_int_rat(a: &[i64], p: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (ai, pi) in a.iter().zip(p) {
        if *ai != 0 {
            acc += pi * BigInt::from(*ai);
        }
    }
    acc
}

/// Rescales `a . x <= b` so that `a` is integral with content one.
pub fn normalize(a: &[Rational], b: &Rational) -> Result<(Vec<i64>, Rational)> {
    if a.iter().all(Zero::is_zero) {
        return Err(Error::ZeroNormal);
    }
    let lcm = a.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled: Vec<BigInt> = a.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let content = scaled.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let ints = scaled
        .iter()
        .map(|c| to_i64(&(c / &content)))
        .collect::<Result<Vec<_>>>()?;
    let rhs = b * Rational::new(lcm, content);
    Ok((ints, rhs))
}

/// `{x : a . x <= b for every row}` in dimension `dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfspaceSystem {
    dim: usize,
    rows: Vec<Halfspace>,
}

impl HalfspaceSystem {
    pub fn new(dim: usize, rows: Vec<Halfspace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "dimension must be at least 1".into(),
            ));
        }
        for row in &rows {
            if row.a.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.a.len(),
                });
            }
        }
        Ok(HalfspaceSystem { dim, rows })
    }

    /// Convenience constructor from integer normals and rational bounds.
    pub fn from_rows(dim: usize, rows: Vec<(Vec<i64>, Rational)>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|(a, b)| Halfspace::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, rows)
    }

    /// The box `lo <= x <= hi` componentwise.
    pub fn boxed(lo: &[Rational], hi: &[Rational]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        let d = lo.len();
        let mut rows = Vec::with_capacity(2 * d);
        for j in 0..d {
            let mut e = vec![0; d];
            e[j] = 1;
            rows.push(Halfspace {
                a: e.clone(),
                b: hi[j].clone(),
            });
            e[j] = -1;
            rows.push(Halfspace {
                a: e,
                b: -lo[j].clone(),
            });
        }
        Self::new(d, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn contains(&self, p: &RationalPoint, strict: bool) -> Result<bool> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        Ok(self.contains_coords(p.coords(), strict))
    }

    pub(crate) fn contains_coords(&self, p: &[Rational], strict: bool) -> bool {
        self.rows.iter().all(|row| {
            let v = row.value(p);
            if strict {
                v < row.b
            } else {
                v <= row.b
            }
        })
    }

    /// The dilation `m P`: every right-hand side multiplied by `m`.
    pub fn dilate(&self, m: u64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidArgument(
                "dilation factor must be at least 1".into(),
            ));
        }
        let factor = Rational::from_integer(BigInt::from(m));
        let rows = self
            .rows
            .iter()
            .map(|r| Halfspace {
                a: r.a.clone(),
                b: &r.b * &factor,
            })
            .collect();
        Ok(HalfspaceSystem {
            dim: self.dim,
            rows,
        })
    }

    /// Exact per-coordinate bounds, by Fourier-Motzkin projection onto each axis.
    pub fn bounding_box(&self) -> Result<Vec<(Rational, Rational)>> {
        fourier_motzkin::bounding_box(self)
    }
}

pub fn contains(sys: &HalfspaceSystem, p: &RationalPoint, strict: bool) -> Result<bool> {
    sys.contains(p, strict)
}

pub fn dilate(sys: &HalfspaceSystem, m: u64) -> Result<HalfspaceSystem> {
    sys.dilate(m)
}

pub fn bounding_box(sys: &HalfspaceSystem) -> Result<Vec<(Rational, Rational)>> {
    sys.bounding_box()
}

/// A full-dimensional polytope together with a strict interior point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolytopeSpec {
    system: HalfspaceSystem,
    witness: RationalPoint,
}

impl PolytopeSpec {
    pub fn new(system: HalfspaceSystem, witness: RationalPoint) -> Result<Self> {
        if !system.contains(&witness, true)? {
            return Err(Error::BadWitness(witness.to_string()));
        }
        Ok(PolytopeSpec { system, witness })
    }

    /// Like [`PolytopeSpec::new`], searching for the witness instead of taking one.
    pub fn with_found_witness(system: HalfspaceSystem) -> Result<Self> {
        let witness = interior_point(&system)?.ok_or(Error::NotFullDimensional)?;
        Self::new(system, witness)
    }

    pub fn system(&self) -> &HalfspaceSystem {
        &self.system
    }

    pub fn witness(&self) -> &RationalPoint {
        &self.witness
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }
}

/// The finite offset set `S`, a subset of `[0,1)^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OffsetSet {
    offsets: Vec<RationalPoint>,
}

impl OffsetSet {
    pub fn new(offsets: Vec<RationalPoint>) -> Result<Self> {
        let first = offsets
            .first()
            .ok_or_else(|| Error::InvalidArgument("offset set must be nonempty".into()))?;
        let d = first.dim();
        if d == 0 {
            return Err(Error::InvalidArgument(
                "offsets must have dimension >= 1".into(),
            ));
        }
        let one = Rational::one();
        for (i, s) in offsets.iter().enumerate() {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.dim(),
                });
            }
            if s.coords().iter().any(|c| c.is_negative() || *c >= one) {
                return Err(Error::InvalidArgument(format!(
                    "offset {s} has a coordinate outside [0,1)"
                )));
            }
            if offsets[..i].contains(s) {
                return Err(Error::InvalidArgument(format!("duplicate offset {s}")));
            }
        }
        Ok(OffsetSet { offsets })
    }

    /// `S = {0}` in dimension `d`.
    pub fn origin(d: usize) -> Result<Self> {
        Self::new(vec![RationalPoint::from_ints(&vec![0; d])])
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.offsets[0].dim()
    }

    pub fn get(&self, h: usize) -> &RationalPoint {
        &self.offsets[h]
    }

    pub fn iter(&self) -> impl Iterator<Item = &RationalPoint> {
        self.offsets.iter()
    }
}

/// Least nonnegative integer `c` with `c^2 >= d * |a|^2 / 2`.
pub fn inflation_margin(d: usize, a: &[i64]) -> u64 {
    let norm2: u128 = a.iter().map(|&x| (x as i128 * x as i128) as u128).sum();
    let need = d as u128 * norm2; // want 2 c^2 >= need
    let mut c = ((need as f64 / 2.0).sqrt()) as u128;
    while c > 0 && 2 * (c - 1) * (c - 1) >= need {
        c -= 1;
    }
    while 2 * c * c < need {
        c += 1;
    }
    c as u64
}

/// Pushes every facet outwards by at least `sqrt(d/2)` in Euclidean distance.
pub fn inflate(p: &PolytopeSpec) -> HalfspaceSystem {
    let d = p.dim();
    let rows = p
        .system()
        .rows()
        .iter()
        .map(|r| {
            let c = inflation_margin(d, &r.a);
            Halfspace {
                a: r.a.clone(),
                b: &r.b + Rational::from_integer(BigInt::from(c)),
            }
        })
        .collect();
    HalfspaceSystem { dim: d, rows }
}

fn ceil_i64(r: &Rational) -> Result<i64> {
    to_i64(&r.ceil().to_integer())
}

fn floor_i64(r: &Rational) -> Result<i64> {
    to_i64(&r.floor().to_integer())
}

/// Calls `f` on every integer vector in the product of inclusive ranges, in
/// lexicographic order.
pub(crate) fn for_each_lattice_point(ranges: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut z: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&z);
        let mut j = ranges.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if z[j] < ranges[j].1 {
                z[j] += 1;
                for (zk, rk) in z[j + 1..].iter_mut().zip(&ranges[j + 1..]) {
                    *zk = rk.0;
                }
                break;
            }
        }
    }
}

/// All `z` in `Z^d` with `z + (1/2,...,1/2)` in `q`, sorted lexicographically.
pub fn center_lattice_points(q: &HalfspaceSystem) -> Result<Vec<Vec<i64>>> {
    let bbox = q.bounding_box()?;
    let half = ratio(1, 2);
    let ranges = bbox
        .iter()
        .map(|(lo, hi)| Ok((ceil_i64(&(lo - &half))?, floor_i64(&(hi - &half))?)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let mut center = vec![Rational::zero(); q.dim()];
    for_each_lattice_point(&ranges, |z| {
        for (c, zi) in center.iter_mut().zip(z) {
            *c = rat(*zi) + &half;
        }
        if q.contains_coords(&center, false) {
            out.push(z.to_vec());
        }
    });
    if out.is_empty() {
        return Err(Error::EmptyCenters);
    }
    Ok(out)
}

/// Brute-force enumeration of `(S + Z^d) ∩ mP`, sorted lexicographically.
pub fn enumerate_fiber(s: &OffsetSet, p: &PolytopeSpec, m: u64) -> Result<Vec<RationalPoint>> {
    if s.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: s.dim(),
        });
    }
    let mp = p.system().dilate(m)?;
    let bbox = mp.bounding_box()?;
    let mut out = Vec::new();
    for offset in s.iter() {
        let ranges = bbox
            .iter()
            .zip(offset.coords())
            .map(|((lo, hi), sj)| Ok((ceil_i64(&(lo - sj))?, floor_i64(&(hi - sj))?)))
            .collect::<Result<Vec<_>>>()?;
        let mut point = offset.coords().to_vec();
        for_each_lattice_point(&ranges, |z| {
            for ((c, sj), zj) in point.iter_mut().zip(offset.coords()).zip(z) {
                *c = sj + rat(*zj);
            }
            if mp.contains_coords(&point, false) {
                out.push(RationalPoint(point.clone()));
            }
        });
    }
    out.sort();
    Ok(out)
}

/// Replaces `P` by `m' P`, scaling the witness along with it.
pub fn prescale(s: &OffsetSet, p: &PolytopeSpec, factor: u64) -> Result<(OffsetSet, PolytopeSpec)> {
    let system = p.system().dilate(factor)?;
    let witness = p
        .witness()
        .scale(&Rational::from_integer(BigInt::from(factor)));
    Ok((s.clone(), PolytopeSpec::new(system, witness)?))
}
