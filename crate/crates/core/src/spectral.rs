//! Second-eigenvalue certification for rotation graphs.
//!
//! `T` is the normalized adjacency `(1/k) * (port-count adjacency)`. It is
//! symmetric and doubly stochastic for any rotation map, so the uniform vector
//! is its top eigenvector. We report `lambda = max(|mu_2|, |mu_n|)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::RotationGraph;

pub const DENSE_LIMIT: usize = 4000;
pub const DENSE_TOLERANCE: f64 = 1e-9;
pub const ITERATIVE_TOLERANCE: f64 = 1e-8;
pub const MAX_POWER_ITERATIONS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
}

impl Method {
    pub fn tolerance(self) -> f64 {
        match self {
            Method::Dense => DENSE_TOLERANCE,
            Method::Iterative => ITERATIVE_TOLERANCE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda: f64,
    pub method: Method,
    /// `||T v - mu v|| / ||v||` for the eigenpair realizing `lambda`.
    pub residual: f64,
}

impl SpectralReport {
    pub fn is_certified(&self) -> bool {
        self.residual <= self.method.tolerance()
    }
}

/// `T w` for the normalized port-count adjacency of `g`.
pub fn transition_apply(g: &RotationGraph, w: &[f64]) -> Result<Vec<f64>> {
    if w.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: w.len(),
        });
    }
    Ok(apply(g, w))
}

fn apply(g: &RotationGraph, w: &[f64]) -> Vec<f64> {
    let k = g.k();
    let inv = 1.0 / k as f64;
    g.table()
        .chunks_exact(k.max(1))
        .map(|ports| ports.iter().map(|p| w[p.vertex]).sum::<f64>() * inv)
        .collect()
}

pub fn transition_matrix(g: &RotationGraph) -> DMatrix<f64> {
    let n = g.n();
    let inv = 1.0 / g.k() as f64;
    let mut t = DMatrix::zeros(n, n);
    for v in 0..n {
        for i in 0..g.k() {
            t[(v, g.neighbor(v, i))] += inv;
        }
    }
    t
}

/// Certified `lambda`: dense symmetric eigensolver up to [`DENSE_LIMIT`]
/// vertices, deflated power iteration above.
pub fn second_eigenvalue(g: &RotationGraph) -> SpectralReport {
    let method = if g.n() <= DENSE_LIMIT {
        Method::Dense
    } else {
        Method::Iterative
    };
    second_eigenvalue_with(g, method)
}

pub fn second_eigenvalue_with(g: &RotationGraph, method: Method) -> SpectralReport {
    if g.n() <= 1 || g.k() == 0 {
        return SpectralReport {
            lambda: 0.0,
            method,
            residual: 0.0,
        };
    }
    match method {
        Method::Dense => dense(g),
        Method::Iterative => power_iteration(g),
    }
}

fn dense(g: &RotationGraph) -> SpectralReport {
    let n = g.n();
    let t = transition_matrix(g);
    let eig = SymmetricEigen::new(t.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let second = order[1];
    let last = order[n - 1];
    let pick = if eig.eigenvalues[second].abs() >= eig.eigenvalues[last].abs() {
        second
    } else {
        last
    };
    let mu = eig.eigenvalues[pick];
    let v = eig.eigenvectors.column(pick).into_owned();
    let residual = (&t * &v - &v * mu).norm() / v.norm();
    SpectralReport {
        lambda: mu.abs().min(1.0),
        method: Method::Dense,
        residual,
    }
}

fn deflate(w: &mut [f64]) {
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    w.iter_mut().for_each(|x| *x -= mean);
}

fn norm(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Power iteration with `T^2` on the complement of the uniform vector.
///
/// `T^2` has a nonnegative spectrum there, so iterates converge to the span of
/// the `+lambda` and `-lambda` eigenvectors; the pair `lambda w ± T w`
/// separates the two and the larger piece is checked against `T`.
fn power_iteration(g: &RotationGraph) -> SpectralReport {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    deflate(&mut w);
    let nw = norm(&w);
    if nw == 0.0 {
        return SpectralReport {
            lambda: 0.0,
            method: Method::Iterative,
            residual: 0.0,
        };
    }
    w.iter_mut().for_each(|x| *x /= nw);

    let mut best = SpectralReport {
        lambda: 1.0,
        method: Method::Iterative,
        residual: f64::INFINITY,
    };
    for iter in 0..MAX_POWER_ITERATIONS {
        let mut tw = apply(g, &w);
        deflate(&mut tw);
        let mut ttw = apply(g, &tw);
        deflate(&mut ttw);
        let rho = dot(&w, &ttw).max(0.0);
        let lambda = rho.sqrt().min(1.0);

        if iter % 8 == 0 || iter + 1 == MAX_POWER_ITERATIONS {
            let report = split_and_check(g, &w, &tw, lambda);
            if report.residual < best.residual {
                best = report;
            }
            if best.is_certified() {
                return best;
            }
        }

        let nt = norm(&ttw);
        if nt < 1e-300 {
            return SpectralReport {
                lambda: 0.0,
                method: Method::Iterative,
                residual: 0.0,
            };
        }
        w = ttw.into_iter().map(|x| x / nt).collect();
    }
    best
}

fn split_and_check(g: &RotationGraph, w: &[f64], tw: &[f64], lambda: f64) -> SpectralReport {
    let plus: Vec<f64> = w.iter().zip(tw).map(|(a, b)| lambda * a + b).collect();
    let minus: Vec<f64> = w.iter().zip(tw).map(|(a, b)| lambda * a - b).collect();
    let v = if norm(&plus) >= norm(&minus) {
        plus
    } else {
        minus
    };
    let nv = norm(&v);
    if nv == 0.0 {
        return SpectralReport {
            lambda,
            method: Method::Iterative,
            residual: f64::INFINITY,
        };
    }
    let mut tv = apply(g, &v);
    deflate(&mut tv);
    // Rayleigh quotient of the separated vector is the sharper estimate.
    let rq = dot(&v, &tv) / (nv * nv);
    let r: Vec<f64> = tv.iter().zip(&v).map(|(a, b)| a - rq * b).collect();
    SpectralReport {
        lambda: rq.abs().min(1.0),
        method: Method::Iterative,
        residual: norm(&r) / nv,
    }
}

/// Advisory spectral condition on `H`: `lambda_H + 2 / sqrt(n_H) < 0.99`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    pub pass: bool,
    pub margin: f64,
}

pub fn advisory_check(lambda_h: f64, n_h: usize) -> Advisory {
    let margin = 0.99 - (lambda_h + 2.0 / (n_h.max(1) as f64).sqrt());
    Advisory {
        pass: margin > 0.0,
        margin,
    }
}

/// Dense `T` as an nalgebra vector product; used by tests as an independent route.
pub fn dense_apply(g: &RotationGraph, w: &[f64]) -> Vec<f64> {
    let t = transition_matrix(g);
    (t * DVector::from_column_slice(w)).as_slice().to_vec()
}
