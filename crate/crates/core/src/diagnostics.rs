//! Mixing diagnostics: the slow-mixing witness vector, baseline move walks on
//! the fiber itself, hyperplane cut fractions, total-variation distance, and a
//! gap report comparing baseline walks with zig-zag samplers over `m`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    dot_int_rat, enumerate_fiber, rat, OffsetSet, PolytopeSpec, Rational, RationalPoint,
};
use crate::graph::{is_connected, moves_graph_with, MoveSet, RotationGraph};
use crate::instance::ModelInstance;
use crate::sampler::{build_sampler, prepare_base, Strategy};
use crate::spectral::{second_eigenvalue, transition_apply};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub w: Vec<f64>,
    /// `||T w - w||_2` with `||w||_2 = 1`.
    pub residual: f64,
    /// `|<w, 1/sqrt(n)>|`.
    pub overlap: f64,
    /// Lower median of the weights, as an exact rational string.
    pub threshold: String,
}

/// Builds the `±1` witness split at the lower median `r` of `omega(p_v)`
/// (`+1` above, `-1` below, `0` on ties), normalizes it and measures how
/// nearly `T` fixes it.
///
/// With `project_uniform` the uniform component is removed before
/// normalizing, so that `residual >= 1 - lambda(G)` holds exactly.
pub fn slow_mixing_witness(
    g: &RotationGraph,
    points: &[RationalPoint],
    omega: &[Rational],
    project_uniform: bool,
) -> Result<WitnessReport> {
    if points.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: points.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| p.dim() != omega.len()) {
        return Err(Error::DimensionMismatch {
            expected: omega.len(),
            found: p.dim(),
        });
    }
    let weights: Vec<Rational> = points
        .iter()
        .map(|p| p.coords().iter().zip(omega).map(|(x, o)| x * o).sum())
        .collect();
    let mut sorted = weights.clone();
    sorted.sort();
    let r = sorted[(sorted.len() - 1) / 2].clone();
    let mut w: Vec<f64> = weights
        .iter()
        .map(|x| match x.cmp(&r) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Less => -1.0,
            std::cmp::Ordering::Equal => 0.0,
        })
        .collect();
    if project_uniform {
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        w.iter_mut().for_each(|x| *x -= mean);
    }
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::Degenerate(
            "all weights are equal; the witness vector vanishes".into(),
        ));
    }
    w.iter_mut().for_each(|x| *x /= norm);
    let tw = transition_apply(g, &w)?;
    let residual = tw
        .iter()
        .zip(&w)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let overlap = (w.iter().sum::<f64>() / (w.len() as f64).sqrt())
        .abs()
        .min(1.0);
    Ok(WitnessReport {
        w,
        residual,
        overlap,
        threshold: r.to_string(),
    })
}

/// A move walk directly on `(S + Z^d) ∩ mP`.
#[derive(Clone, Debug)]
pub struct BaselineWalk {
    pub graph: RotationGraph,
    pub points: Vec<RationalPoint>,
    /// False when the moves do not connect this fiber.
    pub connected: bool,
}

pub fn baseline_fiber_walk(
    s: &OffsetSet,
    p: &PolytopeSpec,
    m: u64,
    moves: &MoveSet,
) -> Result<BaselineWalk> {
    if moves.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: moves.dim(),
        });
    }
    let points = enumerate_fiber(s, p, m)?;
    if points.is_empty() {
        return Err(Error::Degenerate(format!("fiber at m = {m} is empty")));
    }
    let index: HashMap<&RationalPoint, usize> =
        points.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let steps: Vec<Vec<Rational>> = moves
        .moves()
        .iter()
        .map(|mv| mv.iter().map(|&c| rat(c)).collect())
        .collect();
    let graph = moves_graph_with(points.len(), moves.len(), |v, t, sign| {
        let moved = RationalPoint::new(
            points[v]
                .coords()
                .iter()
                .zip(&steps[t])
                .map(|(x, mv)| if sign > 0 { x + mv } else { x - mv })
                .collect(),
        );
        index.get(&moved).copied()
    });
    let connected = is_connected(&graph);
    Ok(BaselineWalk {
        graph,
        points,
        connected,
    })
}

/// Fraction of points within Euclidean distance `ell` of `{a.x = c}`,
/// compared exactly as `(a.p - c)^2 <= ell^2 |a|^2`.
pub fn cut_fraction(
    points: &[RationalPoint],
    a: &[i64],
    c: &Rational,
    ell: &Rational,
) -> Result<Rational> {
    if ell.is_negative() {
        return Err(Error::InvalidArgument(
            "distance must be nonnegative".into(),
        ));
    }
    cut_fraction_squared(points, a, c, &(ell * ell))
}

/// As [`cut_fraction`], with the squared distance `ell^2` given directly.
pub fn cut_fraction_squared(
    points: &[RationalPoint],
    a: &[i64],
    c: &Rational,
    ell2: &Rational,
) -> Result<Rational> {
    if a.iter().all(|&x| x == 0) {
        return Err(Error::ZeroNormal);
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("point set must be nonempty".into()));
    }
    if ell2.is_negative() {
        return Err(Error::InvalidArgument(
            "squared distance must be nonnegative".into(),
        ));
    }
    let bound = ell2 * rat(a.iter().map(|x| x * x).sum());
    let mut near = 0u64;
    for p in points {
        if p.dim() != a.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: p.dim(),
            });
        }
        let gap = dot_int_rat(a, p.coords()) - c;
        if &gap * &gap <= bound {
            near += 1;
        }
    }
    Ok(Rational::new(
        BigInt::from(near),
        BigInt::from(points.len() as u64),
    ))
}

/// Largest squared move length `max |mu|^2`, the exact square of the edge
/// length bound `ell`.
pub fn max_move_length_squared(moves: &MoveSet) -> i64 {
    moves
        .moves()
        .iter()
        .map(|mv| mv.iter().map(|x| x * x).sum())
        .max()
        .unwrap_or(0)
}

/// Largest Euclidean move length, as an upper bound for the edge length `ell`.
pub fn max_move_length(moves: &MoveSet) -> f64 {
    moves
        .moves()
        .iter()
        .map(|mv| mv.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// `(1/2) sum_p |counts(p)/N - 1/F|` over the fiber.
pub fn tv_distance(counts: &BTreeMap<RationalPoint, u64>, fiber: &[RationalPoint]) -> Result<f64> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    if fiber.is_empty() {
        return Err(Error::InvalidArgument("empty fiber".into()));
    }
    let known: std::collections::BTreeSet<&RationalPoint> = fiber.iter().collect();
    if let Some(p) = counts.keys().find(|p| !known.contains(p)) {
        return Err(Error::InvalidArgument(format!(
            "sample {p} is not in the fiber"
        )));
    }
    let n = total as f64;
    let f = 1.0 / known.len() as f64;
    let tv = known
        .iter()
        .map(|p| (counts.get(*p).copied().unwrap_or(0) as f64 / n - f).abs())
        .sum::<f64>()
        / 2.0;
    Ok(tv)
}

/// Total variation between two empirical distributions.
pub fn tv_between(
    a: &BTreeMap<RationalPoint, u64>,
    b: &BTreeMap<RationalPoint, u64>,
) -> Result<f64> {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let keys: std::collections::BTreeSet<&RationalPoint> = a.keys().chain(b.keys()).collect();
    Ok(keys
        .into_iter()
        .map(|k| {
            let pa = a.get(k).copied().unwrap_or(0) as f64 / na as f64;
            let pb = b.get(k).copied().unwrap_or(0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
        / 2.0)
}

pub fn histogram(samples: &[RationalPoint]) -> BTreeMap<RationalPoint, u64> {
    let mut counts = BTreeMap::new();
    for s in samples {
        *counts.entry(s.clone()).or_insert(0) += 1;
    }
    counts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReportRow {
    pub m: u64,
    pub lambda_zigzag: f64,
    pub lambda_e: f64,
    pub lambda_h: f64,
    pub lambda_baseline: f64,
    pub baseline_connected: bool,
    /// Exact rational as `p/q`.
    pub irrelevant_fraction: String,
    pub fiber_size: usize,
    pub graph_vertices: usize,
}

impl GapReportRow {
    pub fn irrelevant_fraction(&self) -> Result<Rational> {
        crate::geometry::parse_rational(&self.irrelevant_fraction)
    }
}

/// For each `m`: certified `lambda` of the zig-zag sampler and of the baseline
/// move walk on the fiber, with the irrelevant fraction and fiber size.
pub fn gap_report(
    inst: &ModelInstance,
    strategy: Strategy,
    moves: &MoveSet,
    m_list: &[u64],
    seed: u64,
    lambda_target: Option<f64>,
) -> Result<Vec<GapReportRow>> {
    let base = Arc::new(prepare_base(inst, strategy)?);
    m_list
        .iter()
        .map(|&m| {
            let sampler = build_sampler(&base, m, seed, lambda_target)?;
            let zz = second_eigenvalue(sampler.graph());
            let baseline = baseline_fiber_walk(inst.offsets(), inst.polytope(), m, moves)?;
            let bl = second_eigenvalue(&baseline.graph);
            Ok(GapReportRow {
                m,
                lambda_zigzag: zz.lambda,
                lambda_e: sampler.lambda_e(),
                lambda_h: base.lambda_h(),
                lambda_baseline: bl.lambda,
                baseline_connected: baseline.connected,
                irrelevant_fraction: sampler.irrelevant_fraction()?.to_string(),
                fiber_size: baseline.points.len(),
                graph_vertices: sampler.num_vertices(),
            })
        })
        .collect()
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ratio, HalfspaceSystem};
    use crate::graph::{complete_graph, PortEnd};
    use num_traits::Zero;

    fn interval(hi: i64) -> PolytopeSpec {
        let sys =
            HalfspaceSystem::from_rows(1, vec![(vec![1], rat(hi)), (vec![-1], rat(0))]).unwrap();
        PolytopeSpec::new(sys, RationalPoint::new(vec![ratio(hi, 2)])).unwrap()
    }

    fn triangle() -> PolytopeSpec {
        let sys = HalfspaceSystem::from_rows(
            2,
            vec![
                (vec![-1, 0], rat(0)),
                (vec![0, -1], rat(0)),
                (vec![1, 1], rat(1)),
            ],
        )
        .unwrap();
        PolytopeSpec::new(sys, RationalPoint::new(vec![ratio(1, 4), ratio(1, 4)])).unwrap()
    }

    #[test]
    fn path_witness_shows_slow_mixing() {
        let s = OffsetSet::origin(1).unwrap();
        let walk = baseline_fiber_walk(&s, &interval(1), 63, &MoveSet::new(vec![vec![1]]).unwrap())
            .unwrap();
        assert_eq!(walk.points.len(), 64);
        let rep = slow_mixing_witness(&walk.graph, &walk.points, &[rat(1)], false).unwrap();
        assert_eq!(rep.threshold, "31");
        assert!(rep.residual <= 0.1, "{}", rep.residual);
        assert!(rep.overlap <= 0.2, "{}", rep.overlap);
        // Hand value: only the two neighbours of the median move, by 1/2 each.
        assert!((rep.residual - (0.5f64).sqrt() / 63f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_witness_has_large_residual() {
        let g = complete_graph(16).unwrap();
        let pts: Vec<_> = (0..16).map(|i| RationalPoint::from_ints(&[i])).collect();
        let rep = slow_mixing_witness(&g, &pts, &[rat(1)], false).unwrap();
        assert!(rep.residual >= 0.9, "{}", rep.residual);
    }

    #[test]
    fn disconnected_witness_is_exact() {
        let g =
            RotationGraph::from_table(2, 1, vec![PortEnd::new(0, 0), PortEnd::new(1, 0)]).unwrap();
        let pts = vec![
            RationalPoint::from_ints(&[0]),
            RationalPoint::from_ints(&[1]),
        ];
        // The lower median is 0, so only the second vertex is nonzero.
        let rep = slow_mixing_witness(&g, &pts, &[rat(1)], false).unwrap();
        assert_eq!(rep.residual, 0.0);
        let flat = vec![
            RationalPoint::from_ints(&[3]),
            RationalPoint::from_ints(&[3]),
        ];
        assert!(slow_mixing_witness(&g, &flat, &[rat(1)], false).is_err());
    }

    #[test]
    fn baseline_examples() {
        let s = OffsetSet::origin(1).unwrap();
        let walk = baseline_fiber_walk(&s, &interval(1), 5, &MoveSet::new(vec![vec![1]]).unwrap())
            .unwrap();
        assert_eq!(walk.points.len(), 6);
        let lam = second_eigenvalue(&walk.graph).lambda;
        assert!((lam - (std::f64::consts::PI / 6.0).cos()).abs() < 1e-6);

        let tri = baseline_fiber_walk(
            &OffsetSet::origin(2).unwrap(),
            &triangle(),
            4,
            &MoveSet::new(vec![vec![1, 0], vec![0, 1]]).unwrap(),
        )
        .unwrap();
        assert_eq!(tri.points.len(), 15);
        assert!(tri.connected);

        let split = baseline_fiber_walk(&s, &interval(1), 5, &MoveSet::new(vec![vec![2]]).unwrap())
            .unwrap();
        assert!(!split.connected);
    }

    #[test]
    fn cut_fraction_examples() {
        let moves = MoveSet::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let s = OffsetSet::origin(2).unwrap();
        let mut prev = rat(2);
        for m in [4u64, 8, 16] {
            let pts = baseline_fiber_walk(&s, &triangle(), m, &moves)
                .unwrap()
                .points;
            let f = cut_fraction(&pts, &[1, 0], &ratio(m as i64, 2), &rat(1)).unwrap();
            assert!(f < prev, "m = {m}: {f} !< {prev}");
            prev = f;
        }
        let pts = enumerate_fiber(&s, &triangle(), 4).unwrap();
        assert_eq!(
            cut_fraction(&pts, &[1, 0], &rat(2), &rat(100)).unwrap(),
            rat(1)
        );
        assert!(cut_fraction(&pts, &[1, 0], &ratio(1, 3), &rat(0))
            .unwrap()
            .is_zero());
        assert!(matches!(
            cut_fraction(&pts, &[0, 0], &rat(0), &rat(1)),
            Err(Error::ZeroNormal)
        ));
    }

    #[test]
    fn tv_examples() {
        let fiber: Vec<_> = (0..4).map(|i| RationalPoint::from_ints(&[i])).collect();
        let uniform: BTreeMap<_, _> = fiber.iter().map(|p| (p.clone(), 5)).collect();
        assert_eq!(tv_distance(&uniform, &fiber).unwrap(), 0.0);
        let spike: BTreeMap<_, _> = [(fiber[2].clone(), 9)].into_iter().collect();
        assert!((tv_distance(&spike, &fiber).unwrap() - 0.75).abs() < 1e-15);
        assert!(tv_distance(&BTreeMap::new(), &fiber).is_err());
        let stray: BTreeMap<_, _> = [(RationalPoint::from_ints(&[9]), 1)].into_iter().collect();
        assert!(tv_distance(&stray, &fiber).is_err());
        assert_eq!(tv_between(&uniform, &uniform).unwrap(), 0.0);
        assert!((tv_between(&uniform, &spike).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn move_length() {
        let moves = MoveSet::new(vec![vec![1, 0], vec![3, 4]]).unwrap();
        assert_eq!(max_move_length(&moves), 5.0);
        assert_eq!(max_move_length_squared(&moves), 25);
        let pts = enumerate_fiber(&OffsetSet::origin(2).unwrap(), &triangle(), 4).unwrap();
        assert_eq!(
            cut_fraction_squared(&pts, &[1, 0], &rat(2), &rat(25)).unwrap(),
            cut_fraction(&pts, &[1, 0], &rat(2), &rat(5)).unwrap()
        );
    }
}
