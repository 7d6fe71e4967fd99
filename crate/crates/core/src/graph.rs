//! Port-labeled regular multigraphs given by rotation maps.
//!
//! A rotation map sends a port-end `(v, i)` to `(w, j)` when the `i`-th edge
//! at `v` is the `j`-th edge at `w`. It is an involution; a fixed point
//! `(v, i) -> (v, i)` is a self-loop occupying a single port.
//!
//! Port flattening conventions:
//! * [`square`]: port `(i, j)` is `i * k + j`, walk `i` then `j`; the returned
//!   port is `j' * k + i'`.
//! * [`zigzag`]: vertex `(v, a)` is `v * H.n + a`; port `(i, j)` is
//!   `i * H.k + j`; the returned port is `j' * H.k + i'`.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{second_eigenvalue, SpectralReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortEnd {
    pub vertex: usize,
    pub port: usize,
}

impl PortEnd {
    pub fn new(vertex: usize, port: usize) -> Self {
        PortEnd { vertex, port }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationGraph {
    n: usize,
    k: usize,
    rot: Vec<PortEnd>,
}

impl RotationGraph {
    /// Builds a graph from a full rotation table, indexed by `v * k + i`.
    pub fn from_table(n: usize, k: usize, rot: Vec<PortEnd>) -> Result<Self> {
        if rot.len() != n * k {
            return Err(Error::InvalidArgument(format!(
                "rotation table has {} entries, expected {}",
                rot.len(),
                n * k
            )));
        }
        let g = RotationGraph { n, k, rot };
        for v in 0..n {
            for i in 0..k {
                let t = g.rot[v * k + i];
                if t.vertex >= n || t.port >= k {
                    return Err(Error::InvalidArgument(format!(
                        "rot({v},{i}) = ({},{}) out of range",
                        t.vertex, t.port
                    )));
                }
                if g.rot(t.vertex, t.port) != PortEnd::new(v, i) {
                    return Err(Error::InvalidArgument(format!(
                        "rotation map is not an involution at ({v},{i})"
                    )));
                }
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn rot(&self, v: usize, i: usize) -> PortEnd {
        self.rot[v * self.k + i]
    }

    #[inline]
    pub fn neighbor(&self, v: usize, i: usize) -> usize {
        self.rot[v * self.k + i].vertex
    }

    pub fn table(&self) -> &[PortEnd] {
        &self.rot
    }

    pub fn is_involution(&self) -> bool {
        (0..self.n).all(|v| {
            (0..self.k).all(|i| {
                let t = self.rot(v, i);
                t.vertex < self.n
                    && t.port < self.k
                    && self.rot(t.vertex, t.port) == PortEnd::new(v, i)
            })
        })
    }

    pub fn is_connected(&self) -> bool {
        is_connected(self)
    }

    /// Text export: header `n k`, then one line `v i w j` per port-end.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rot.len() * 16 + 16);
        writeln!(out, "{} {}", self.n, self.k).unwrap();
        for v in 0..self.n {
            for i in 0..self.k {
                let t = self.rot(v, i);
                writeln!(out, "{v} {i} {} {}", t.vertex, t.port).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty rotation file".into()))?;
        let nums = parse_usizes(header)?;
        let [n, k] = nums[..] else {
            return Err(Error::Parse(format!("bad header line {header:?}")));
        };
        let mut rot = vec![None; n * k];
        for line in lines {
            let nums = parse_usizes(line)?;
            let [v, i, w, j] = nums[..] else {
                return Err(Error::Parse(format!("bad rotation line {line:?}")));
            };
            if v >= n || i >= k {
                return Err(Error::Parse(format!("port-end out of range in {line:?}")));
            }
            if rot[v * k + i].replace(PortEnd::new(w, j)).is_some() {
                return Err(Error::Parse(format!("duplicate port-end in {line:?}")));
            }
        }
        let rot = rot
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Parse("rotation table is incomplete".into()))?;
        Self::from_table(n, k, rot)
    }
}

fn parse_usizes(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad integer {t:?}")))
        })
        .collect()
}

/// Nonzero integer move vectors, pairwise distinct up to sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveSet {
    moves: Vec<Vec<i64>>,
}

impl MoveSet {
    pub fn new(moves: Vec<Vec<i64>>) -> Result<Self> {
        let d = moves
            .first()
            .ok_or_else(|| Error::InvalidArgument("move set must be nonempty".into()))?
            .len();
        for (t, mv) in moves.iter().enumerate() {
            if mv.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: mv.len(),
                });
            }
            if mv.iter().all(|&c| c == 0) {
                return Err(Error::InvalidArgument("zero move".into()));
            }
            let neg: Vec<i64> = mv.iter().map(|c| -c).collect();
            if moves[..t].iter().any(|o| *o == *mv || *o == neg) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate move {mv:?} (up to sign)"
                )));
            }
        }
        Ok(MoveSet { moves })
    }

    pub fn dim(&self) -> usize {
        self.moves[0].len()
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn moves(&self) -> &[Vec<i64>] {
        &self.moves
    }
}

/// `K_n`: port `i` at `v` leads to the `i`-th other vertex in increasing order.
pub fn complete_graph(n: usize) -> Result<RotationGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "complete graph needs at least 2 vertices".into(),
        ));
    }
    let k = n - 1;
    let mut rot = Vec::with_capacity(n * k);
    for v in 0..n {
        for i in 0..k {
            let u = if i < v { i } else { i + 1 };
            let back = if v < u { v } else { v - 1 };
            rot.push(PortEnd::new(u, back));
        }
    }
    Ok(RotationGraph { n, k, rot })
}

/// Move graph over `n` vertices with `2 * moves` ports. `target(v, t, sign)`
/// resolves `v ± move_t` to a vertex, or `None` when it leaves the set.
pub(crate) fn moves_graph_with(
    n: usize,
    moves: usize,
    mut target: impl FnMut(usize, usize, i64) -> Option<usize>,
) -> RotationGraph {
    let k = 2 * moves;
    let mut rot = Vec::with_capacity(n * k);
    for v in 0..n {
        for t in 0..moves {
            rot.push(match target(v, t, 1) {
                Some(w) => PortEnd::new(w, 2 * t + 1),
                None => PortEnd::new(v, 2 * t),
            });
            rot.push(match target(v, t, -1) {
                Some(w) => PortEnd::new(w, 2 * t),
                None => PortEnd::new(v, 2 * t + 1),
            });
        }
    }
    RotationGraph { n, k, rot }
}

/// Port `2t` at `v` tries `v + move_t`, port `2t + 1` tries `v - move_t`;
/// moves that leave `points` become single-port self-loops.
pub fn moves_graph(points: &[Vec<i64>], moves: &MoveSet) -> Result<RotationGraph> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("point set must be nonempty".into()));
    }
    for p in points {
        if p.len() != moves.dim() {
            return Err(Error::DimensionMismatch {
                expected: moves.dim(),
                found: p.len(),
            });
        }
    }
    let index: HashMap<&[i64], usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i))
        .collect();
    let mut buf = vec![0i64; moves.dim()];
    Ok(moves_graph_with(points.len(), moves.len(), |v, t, sign| {
        for ((b, p), mv) in buf.iter_mut().zip(&points[v]).zip(&moves.moves()[t]) {
            *b = p + sign * mv;
        }
        index.get(buf.as_slice()).copied()
    }))
}

pub fn is_connected(g: &RotationGraph) -> bool {
    if g.n == 0 {
        return true;
    }
    let mut seen = vec![false; g.n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for i in 0..g.k {
            let w = g.neighbor(v, i);
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == g.n
}

/// Two-step walks: degree `k^2`, eigenvalues squared.
pub fn square(g: &RotationGraph) -> RotationGraph {
    let k = g.k;
    let kk = k * k;
    let mut rot = Vec::with_capacity(g.n * kk);
    for v in 0..g.n {
        for i in 0..k {
            let mid = g.rot(v, i);
            for j in 0..k {
                let end = g.rot(mid.vertex, j);
                rot.push(PortEnd::new(end.vertex, end.port * k + mid.port));
            }
        }
    }
    RotationGraph { n: g.n, k: kk, rot }
}

/// Zig-zag product of `big` (degree D) with `small` (D vertices, degree d).
///
/// Result has `big.n * D` vertices and degree `d^2`. A step from `(v, a)` on
/// port `(i, j)` takes a small step `i` inside the cloud, crosses along the
/// big graph, and takes a small step `j` in the new cloud.
pub fn zigzag(big: &RotationGraph, small: &RotationGraph) -> Result<RotationGraph> {
    if small.n != big.k {
        return Err(Error::InvalidArgument(format!(
            "zig-zag needs H.n == E.k, got H.n = {} and E.k = {}",
            small.n, big.k
        )));
    }
    let cloud = small.n;
    let d = small.k;
    let dd = d * d;
    let n = big.n * cloud;
    let mut rot = Vec::with_capacity(n * dd);
    for v in 0..big.n {
        for a in 0..cloud {
            for i in 0..d {
                let zig = small.rot(a, i);
                let cross = big.rot(v, zig.vertex);
                for j in 0..d {
                    let zag = small.rot(cross.port, j);
                    rot.push(PortEnd::new(
                        cross.vertex * cloud + zag.vertex,
                        zag.port * d + zig.port,
                    ));
                }
            }
        }
    }
    Ok(RotationGraph { n, k: dd, rot })
}

/// Permutation-model random `k`-regular multigraph, deterministic in `seed`.
///
/// Ports `2t, 2t+1` are paired through a random permutation; for odd `k` the
/// last port follows a random involution whose fixed point (if any) is a
/// self-loop port.
pub fn random_regular(n: usize, k: usize, seed: u64) -> Result<RotationGraph> {
    if n < 2 || k < 1 {
        return Err(Error::InvalidArgument(format!(
            "random regular graph needs n >= 2 and k >= 1, got n = {n}, k = {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rot = vec![PortEnd::new(0, 0); n * k];
    let mut perm: Vec<usize> = (0..n).collect();
    for t in 0..k / 2 {
        perm.shuffle(&mut rng);
        for v in 0..n {
            let w = perm[v];
            rot[v * k + 2 * t] = PortEnd::new(w, 2 * t + 1);
            rot[w * k + 2 * t + 1] = PortEnd::new(v, 2 * t);
        }
    }
    if k % 2 == 1 {
        let last = k - 1;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for pair in order.chunks(2) {
            match *pair {
                [a, b] => {
                    rot[a * k + last] = PortEnd::new(b, last);
                    rot[b * k + last] = PortEnd::new(a, last);
                }
                [a] => rot[a * k + last] = PortEnd::new(a, last),
                _ => unreachable!(),
            }
        }
    }
    Ok(RotationGraph { n, k, rot })
}

/// SplitMix64 finalizer over `(master, index)`; used to derive attempt seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Default second-eigenvalue target for an expander of degree `k`.
pub fn default_lambda_target(k: usize) -> f64 {
    (2.2 / (k as f64).sqrt()).min(0.95)
}

pub const DEFAULT_EXPANDER_ATTEMPTS: usize = 1000;

/// Draws random regular graphs until one is connected with certified
/// `lambda <= target`.
pub fn build_expander(
    n: usize,
    k: usize,
    target: f64,
    seed: u64,
    max_attempts: usize,
) -> Result<(RotationGraph, SpectralReport)> {
    if max_attempts < 1 {
        return Err(Error::InvalidArgument(
            "max_attempts must be at least 1".into(),
        ));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda target {target} not in (0,1)"
        )));
    }
    let mut best = f64::INFINITY;
    for attempt in 0..max_attempts {
        let g = random_regular(n, k, derive_seed(seed, attempt as u64))?;
        if !g.is_connected() {
            best = best.min(1.0);
            continue;
        }
        let report = second_eigenvalue(&g);
        best = best.min(report.lambda);
        if report.lambda <= target && report.is_certified() {
            return Ok((g, report));
        }
    }
    Err(Error::ExpanderNotFound {
        target,
        attempts: max_attempts,
        best,
    })
}
