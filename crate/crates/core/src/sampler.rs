//! The full sampler: an `m`-independent base graph `H` on the lattice cubes
//! meeting the inflated polytope, an `m`-dependent expander `E`, and their
//! zig-zag product `G_m`, whose vertices decode to candidate points.
//!
//! Vertex layout of `G_m`: `vertex = e * n_H + c` with `c` indexing the cube
//! centers `z` and `e` in `[0, n_S * m^d)`. The expander index `e` is a mixed
//! radix number over `(n_S, m, ..., m)` with the offset index `h` least
//! significant: `e = h + n_S * (x_1 + m * (x_2 + ... ))`. The vertex decodes to
//! `m * z + s_h + x`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    center_lattice_points, inflate, rat, HalfspaceSystem, Rational, RationalPoint,
};
use crate::graph::{
    build_expander, complete_graph, default_lambda_target, is_connected, moves_graph, square,
    zigzag, MoveSet, PortEnd, RotationGraph, DEFAULT_EXPANDER_ATTEMPTS,
};
use crate::instance::ModelInstance;
use crate::spectral::{advisory_check, second_eigenvalue, Advisory, Method, SpectralReport};

/// How the base graph `H` on the cube centers is built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Complete,
    Moves(MoveSet),
    MovesSquared(MoveSet),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Complete => "complete",
            Strategy::Moves(_) => "moves",
            Strategy::MovesSquared(_) => "moves_squared",
        }
    }

    pub fn moves(&self) -> Option<&MoveSet> {
        match self {
            Strategy::Complete => None,
            Strategy::Moves(m) | Strategy::MovesSquared(m) => Some(m),
        }
    }
}

/// Everything that does not depend on `m`.
#[derive(Clone, Debug)]
pub struct PreparedBase {
    instance: ModelInstance,
    strategy: Strategy,
    inflated: HalfspaceSystem,
    centers: Vec<Vec<i64>>,
    h: RotationGraph,
    h_report: SpectralReport,
    advisory: Advisory,
}

impl PreparedBase {
    pub fn instance(&self) -> &ModelInstance {
        &self.instance
    }
    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }
    pub fn inflated(&self) -> &HalfspaceSystem {
        &self.inflated
    }
    pub fn centers(&self) -> &[Vec<i64>] {
        &self.centers
    }
    pub fn h(&self) -> &RotationGraph {
        &self.h
    }
    pub fn h_report(&self) -> &SpectralReport {
        &self.h_report
    }
    pub fn lambda_h(&self) -> f64 {
        self.h_report.lambda
    }
    pub fn n_h(&self) -> usize {
        self.h.n()
    }
    pub fn d_h(&self) -> usize {
        self.h.k()
    }
    pub fn advisory(&self) -> Advisory {
        self.advisory
    }

    /// Reassembles a base from stored parts, checking them against the instance.
    pub(crate) fn from_parts(
        instance: ModelInstance,
        strategy: Strategy,
        h: RotationGraph,
        h_report: SpectralReport,
    ) -> Result<Self> {
        let inflated = inflate(instance.polytope());
        let centers = center_lattice_points(&inflated)?;
        if centers.len() != h.n() {
            return Err(Error::InvalidArgument(format!(
                "stored H has {} vertices but the instance has {} centers",
                h.n(),
                centers.len()
            )));
        }
        let advisory = advisory_check(h_report.lambda, h.n());
        Ok(PreparedBase {
            instance,
            strategy,
            inflated,
            centers,
            h,
            h_report,
            advisory,
        })
    }
}

pub fn prepare_base(instance: &ModelInstance, strategy: Strategy) -> Result<PreparedBase> {
    let inflated = inflate(instance.polytope());
    let centers = center_lattice_points(&inflated)?;
    let h = match &strategy {
        Strategy::Complete => {
            if centers.len() < 2 {
                return Err(Error::Degenerate(
                    "only one cube center; the complete graph needs at least two".into(),
                ));
            }
            complete_graph(centers.len())?
        }
        Strategy::Moves(moves) => moves_graph(&centers, moves)?,
        Strategy::MovesSquared(moves) => square(&moves_graph(&centers, moves)?),
    };
    if !is_connected(&h) {
        return Err(Error::DisconnectedBase);
    }
    let h_report = second_eigenvalue(&h);
    let advisory = advisory_check(h_report.lambda, h.n());
    Ok(PreparedBase {
        instance: instance.clone(),
        strategy,
        inflated,
        centers,
        h,
        h_report,
        advisory,
    })
}

/// `G_m` together with everything needed to decode and filter its vertices.
#[derive(Clone, Debug)]
pub struct SamplerGraph {
    base: Arc<PreparedBase>,
    m: u64,
    seed: u64,
    lambda_target: f64,
    n_e: usize,
    e: RotationGraph,
    e_report: SpectralReport,
    g: RotationGraph,
    dilated: HalfspaceSystem,
}

pub fn expander_size(n_s: usize, m: u64, d: usize) -> Result<usize> {
    let overflow = || Error::Overflow(format!("n_S * m^d overflows for m = {m}, d = {d}"));
    let m = usize::try_from(m).map_err(|_| overflow())?;
    let mut n = n_s;
    for _ in 0..d {
        n = n.checked_mul(m).ok_or_else(overflow)?;
    }
    Ok(n)
}

pub fn build_sampler(
    base: &Arc<PreparedBase>,
    m: u64,
    seed: u64,
    lambda_target: Option<f64>,
) -> Result<SamplerGraph> {
    if m < 1 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let inst = base.instance();
    let n_e = expander_size(inst.offsets().len(), m, inst.dim())?;
    let target = lambda_target.unwrap_or_else(|| default_lambda_target(base.n_h()));
    let (e, e_report) = if n_e == 1 {
        // A single vertex carrying only self-loops: T = [1] has no nontrivial
        // eigenvalue, so lambda_E = 0 exactly and G_1 is H squared.
        let loops = (0..base.n_h()).map(|i| PortEnd::new(0, i)).collect();
        let e = RotationGraph::from_table(1, base.n_h(), loops)?;
        (
            e,
            SpectralReport {
                lambda: 0.0,
                method: Method::Dense,
                residual: 0.0,
            },
        )
    } else {
        build_expander(n_e, base.n_h(), target, seed, DEFAULT_EXPANDER_ATTEMPTS)?
    };
    SamplerGraph::assemble(base.clone(), m, seed, target, e, e_report)
}

impl SamplerGraph {
    pub(crate) fn assemble(
        base: Arc<PreparedBase>,
        m: u64,
        seed: u64,
        lambda_target: f64,
        e: RotationGraph,
        e_report: SpectralReport,
    ) -> Result<Self> {
        let inst = base.instance();
        let n_e = expander_size(inst.offsets().len(), m, inst.dim())?;
        if e.n() != n_e || e.k() != base.n_h() {
            return Err(Error::InvalidArgument(format!(
                "expander is {}-regular on {} vertices, expected {}-regular on {}",
                e.k(),
                e.n(),
                base.n_h(),
                n_e
            )));
        }
        let g = zigzag(&e, base.h())?;
        let dilated = inst.polytope().system().dilate(m)?;
        Ok(SamplerGraph {
            base,
            m,
            seed,
            lambda_target,
            n_e,
            e,
            e_report,
            g,
            dilated,
        })
    }

    pub fn base(&self) -> &Arc<PreparedBase> {
        &self.base
    }
    pub fn m(&self) -> u64 {
        self.m
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn lambda_target(&self) -> f64 {
        self.lambda_target
    }
    pub fn n_e(&self) -> usize {
        self.n_e
    }
    pub fn e(&self) -> &RotationGraph {
        &self.e
    }
    pub fn e_report(&self) -> &SpectralReport {
        &self.e_report
    }
    pub fn lambda_e(&self) -> f64 {
        self.e_report.lambda
    }
    pub fn graph(&self) -> &RotationGraph {
        &self.g
    }
    pub fn dilated(&self) -> &HalfspaceSystem {
        &self.dilated
    }
    pub fn num_vertices(&self) -> usize {
        self.g.n()
    }
    pub fn dim(&self) -> usize {
        self.base.instance().dim()
    }

    /// The certified upper bound `lambda_E + lambda_H` on `lambda(G_m)`.
    pub fn lambda_bound(&self) -> f64 {
        self.lambda_e() + self.base.lambda_h()
    }

    /// Splits a vertex into `(h, x, center index)`.
    pub fn vertex_parts(&self, vertex: usize) -> Result<(usize, Vec<u64>, usize)> {
        if vertex >= self.g.n() {
            return Err(Error::InvalidArgument(format!(
                "vertex {vertex} out of range [0, {})",
                self.g.n()
            )));
        }
        let n_h = self.base.n_h();
        let (mut e, c) = (vertex / n_h, vertex % n_h);
        let n_s = self.base.instance().offsets().len();
        let h = e % n_s;
        e /= n_s;
        let m = self.m as usize;
        let x = (0..self.dim())
            .map(|_| {
                let xi = e % m;
                e /= m;
                xi as u64
            })
            .collect();
        Ok((h, x, c))
    }

    /// Inverse of [`SamplerGraph::vertex_parts`].
    pub fn vertex_of(&self, h: usize, x: &[u64], center: usize) -> usize {
        let n_s = self.base.instance().offsets().len();
        let m = self.m as usize;
        let mut e = 0usize;
        for &xi in x.iter().rev() {
            e = e * m + xi as usize;
        }
        (e * n_s + h) * self.base.n_h() + center
    }

    pub fn decode_vertex(&self, vertex: usize) -> Result<RationalPoint> {
        let (h, x, c) = self.vertex_parts(vertex)?;
        let s = self.base.instance().offsets().get(h);
        let z = &self.base.centers()[c];
        let m = BigInt::from(self.m);
        let coords = s
            .coords()
            .iter()
            .zip(&x)
            .zip(z)
            .map(|((sj, &xj), &zj)| {
                sj + BigRational::from_integer(&m * BigInt::from(zj) + BigInt::from(xj))
            })
            .collect();
        Ok(RationalPoint::new(coords))
    }

    pub fn is_relevant(&self, vertex: usize) -> Result<bool> {
        let p = self.decode_vertex(vertex)?;
        Ok(self.dilated.contains_coords(p.coords(), false))
    }

    /// One step of the walk on `G_m`: a uniformly random port.
    pub fn step(&self, state: WalkState, rng: &mut impl RngCore) -> WalkState {
        let port = rng.random_range(0..self.g.k());
        WalkState(self.g.neighbor(state.0, port))
    }

    /// Walks `steps` from vertex 0, continuing in further blocks of `steps`
    /// until a relevant vertex is reached, and returns its point.
    pub fn sample_one(
        &self,
        steps: u64,
        rng: &mut impl RngCore,
        max_blocks: usize,
    ) -> Result<RationalPoint> {
        if steps < 1 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if max_blocks < 1 {
            return Err(Error::InvalidArgument(
                "max_blocks must be at least 1".into(),
            ));
        }
        let mut state = WalkState(0);
        for _ in 0..max_blocks {
            for _ in 0..steps {
                state = self.step(state, rng);
            }
            let p = self.decode_vertex(state.0)?;
            if self.dilated.contains_coords(p.coords(), false) {
                return Ok(p);
            }
        }
        Err(Error::BlocksExhausted {
            blocks: max_blocks,
            steps,
        })
    }

    /// Exact-uniform oracle: uniform vertices conditioned on relevance.
    pub fn direct_reject_sample(&self, rng: &mut impl RngCore) -> Result<RationalPoint> {
        for _ in 0..MAX_REJECTION_DRAWS {
            let v = rng.random_range(0..self.g.n());
            let p = self.decode_vertex(v)?;
            if self.dilated.contains_coords(p.coords(), false) {
                return Ok(p);
            }
        }
        Err(Error::Degenerate(format!(
            "no relevant vertex in {MAX_REJECTION_DRAWS} uniform draws"
        )))
    }

    /// Exact fraction of vertices whose point falls outside `mP`.
    pub fn irrelevant_fraction(&self) -> Result<Rational> {
        let mut irrelevant = 0u64;
        for v in 0..self.g.n() {
            if !self.is_relevant(v)? {
                irrelevant += 1;
            }
        }
        Ok(Rational::new(
            BigInt::from(irrelevant),
            BigInt::from(self.g.n() as u64),
        ))
    }

    /// Points of all relevant vertices, in vertex order.
    pub fn relevant_points(&self) -> Result<Vec<RationalPoint>> {
        let mut out = Vec::new();
        for v in 0..self.g.n() {
            let p = self.decode_vertex(v)?;
            if self.dilated.contains_coords(p.coords(), false) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Least `T` with `(lambda_E + lambda_H)^T <= 1e-4`.
    pub fn auto_steps(&self) -> Result<u64> {
        auto_steps(self.lambda_bound())
    }

    /// `count` independent samples; sample `i` uses ChaCha stream `i` of `seed`.
    pub fn sample_many(&self, opts: &SampleOptions) -> Result<Vec<RationalPoint>> {
        (0..opts.count)
            .map(|i| {
                let mut rng = chain_rng(opts.seed, i as u64);
                if opts.exact_oracle {
                    self.direct_reject_sample(&mut rng)
                } else {
                    self.sample_one(opts.steps, &mut rng, opts.max_blocks)
                }
            })
            .collect()
    }
}

pub const MAX_REJECTION_DRAWS: usize = 1_000_000;
pub const DEFAULT_MAX_BLOCKS: usize = 10_000;
pub const AUTO_STEPS_TOLERANCE: f64 = 1e-4;

/// A position of the walk on `G_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WalkState(pub usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleOptions {
    pub count: usize,
    pub steps: u64,
    pub seed: u64,
    pub max_blocks: usize,
    pub exact_oracle: bool,
}

pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

pub fn auto_steps(bound: f64) -> Result<u64> {
    // NaN lands here too.
    if bound.is_nan() || bound >= 1.0 {
        return Err(Error::Certification(format!(
            "lambda_E + lambda_H = {bound} >= 1 gives no mixing guarantee; pass an explicit step count"
        )));
    }
    if bound <= 0.0 {
        return Ok(1);
    }
    let mut t = (AUTO_STEPS_TOLERANCE.ln() / bound.ln()).ceil().max(1.0) as u64;
    while t > 1 && bound.powi((t - 1) as i32) <= AUTO_STEPS_TOLERANCE {
        t -= 1;
    }
    while bound.powi(t as i32) > AUTO_STEPS_TOLERANCE {
        t += 1;
    }
    Ok(t)
}

/// Points of `(S + Z^d) ∩ mP` as exact rationals scaled back into `P`.
pub fn unscale(p: &RationalPoint, m: u64) -> RationalPoint {
    p.scale(&(rat(1) / rat(m as i64)))
}
