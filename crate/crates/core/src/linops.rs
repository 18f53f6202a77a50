//! Dense vectors, dense matrices acting as linear operators, and a
//! deterministic operator-norm estimate.
//!
//! Everything is finite-dimensional `f64` and stored densely; the problems
//! this crate targets are at most a few hundred dimensions.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use crate::{Error, Result};

/// A finite-dimensional real vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn ones(dim: usize) -> Self {
        Vector(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn add(&self, other: &Vector) -> Vector {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * s).collect())
    }

    /// In-place `self += s * other`; used by the ergodic accumulators.
    pub fn axpy_mut(&mut self, s: f64, other: &Vector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.sub(other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Concatenate two block vectors.
    pub fn concat(&self, other: &Vector) -> Vector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Vector(v)
    }

    /// Split into a leading block of `head` entries and the rest.
    pub fn split_at(&self, head: usize) -> (Vector, Vector) {
        let (a, b) = self.0.split_at(head);
        (Vector(a.to_vec()), Vector(b.to_vec()))
    }

    /// Parse a vector from a single line of whitespace-separated decimals.
    pub fn parse_text(line: &str) -> Result<Vector> {
        let entries: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad vector entry `{t}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if entries.is_empty() {
            return Err(Error::EmptyInput("vector text"));
        }
        Ok(Vector(entries))
    }

    /// Full-precision single-line rendering (inverse of [`Vector::parse_text`]).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{v:.16e}");
        }
        s
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

/// Dense real matrix used as the coupling operator `K` with its adjoint and
/// a cached spectral-norm estimate.
///
/// Immutable after construction; the norm cache is populate-once, so shared
/// read-only use across concurrent solver runs is safe.
#[derive(Debug)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    /// Row-major entries, `entries[r * cols + c]`.
    entries: Vec<f64>,
    cached_norm: OnceLock<f64>,
}

impl Clone for LinearMap {
    fn clone(&self) -> Self {
        let cached_norm = OnceLock::new();
        if let Some(&n) = self.cached_norm.get() {
            let _ = cached_norm.set(n);
        }
        LinearMap {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.clone(),
            cached_norm,
        }
    }
}

/// Power-iteration settings fixed for reproducibility: all runs of the same
/// matrix produce the same estimate.
const POWER_REL_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;
const POWER_STAGNATION_STEPS: usize = 5;

impl LinearMap {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput("matrix"));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(LinearMap {
            rows,
            cols,
            entries,
            cached_norm: OnceLock::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("matrix rows"));
        }
        let cols = rows[0].len();
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: cols,
                    actual: r.len(),
                });
            }
        }
        LinearMap::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        LinearMap::new(n, n, entries).expect("n > 0")
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        LinearMap::new(rows, cols, vec![0.0; rows * cols]).expect("nonempty")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn transpose(&self) -> LinearMap {
        let mut entries = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                entries[c * self.rows + r] = self.entries[r * self.cols + c];
            }
        }
        LinearMap::new(self.cols, self.rows, entries).expect("nonempty")
    }

    pub fn scaled(&self, s: f64) -> LinearMap {
        LinearMap::new(
            self.rows,
            self.cols,
            self.entries.iter().map(|v| v * s).collect(),
        )
        .expect("nonempty")
    }

    /// `K x`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "apply",
                expected: self.cols,
                actual: x.dim(),
            });
        }
        let out = self
            .entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(Vector(out))
    }

    /// `K^T y`; the adjoint in the Euclidean inner product.
    pub fn apply_adjoint(&self, y: &Vector) -> Result<Vector> {
        if y.dim() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "apply_adjoint",
                expected: self.rows,
                actual: y.dim(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let yr = y[r];
            let row = &self.entries[r * self.cols..(r + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yr;
            }
        }
        Ok(Vector(out))
    }

    /// Spectral norm `||K|| = sup { ||Kx|| : ||x|| <= 1 }`, estimated by
    /// power iteration on `K^T K` and cached on first use.
    ///
    /// The start vector is the normalized all-ones vector. If the Rayleigh
    /// quotient stays at zero for five steps (start vector inside the
    /// kernel), the iteration restarts once from a deterministic
    /// perturbation: entry `i` gets `+1/(i+1)`. A second stagnation means
    /// the operator is zero.
    pub fn operator_norm(&self) -> f64 {
        *self.cached_norm.get_or_init(|| self.power_iteration())
    }

    fn power_iteration(&self) -> f64 {
        let n = self.cols;
        let mut v = Vector::ones(n).scale(1.0 / (n as f64).sqrt());
        let mut lambda_prev = f64::NAN;
        let mut zero_steps = 0usize;
        let mut restarted = false;

        for _ in 0..POWER_MAX_ITERS {
            // w = K^T K v
            let kv = self.apply(&v).expect("dims fixed");
            let w = self.apply_adjoint(&kv).expect("dims fixed");
            let lambda = v.dot(&w);

            if lambda <= 0.0 {
                zero_steps += 1;
                if zero_steps >= POWER_STAGNATION_STEPS {
                    if restarted {
                        return 0.0;
                    }
                    restarted = true;
                    zero_steps = 0;
                    let mut p = v.clone();
                    for i in 0..n {
                        p[i] += 1.0 / (i as f64 + 1.0);
                    }
                    let norm = p.norm();
                    v = p.scale(1.0 / norm);
                    lambda_prev = f64::NAN;
                    continue;
                }
            } else {
                if !lambda_prev.is_nan()
                    && (lambda - lambda_prev).abs() <= POWER_REL_TOL * lambda.abs()
                {
                    return lambda.sqrt();
                }
                lambda_prev = lambda;
            }

            let wn = w.norm();
            if wn > 0.0 {
                v = w.scale(1.0 / wn);
            }
        }
        if lambda_prev.is_nan() {
            0.0
        } else {
            lambda_prev.max(0.0).sqrt()
        }
    }

    /// Parse the matrix text format: first line `m n`, then `m` lines of
    /// `n` whitespace-separated decimals.
    pub fn parse_text(text: &str) -> Result<LinearMap> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::EmptyInput("matrix text"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad matrix dimension `{t}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if dims.len() != 2 {
            return Err(Error::Parse(format!(
                "matrix header must be `m n`, got `{header}`"
            )));
        }
        let (m, n) = (dims[0], dims[1]);
        let mut entries = Vec::with_capacity(m * n);
        for _ in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("matrix text ended before {m} rows")))?;
            let row = Vector::parse_text(line)?;
            if row.dim() != n {
                return Err(Error::DimensionMismatch {
                    context: "matrix text row",
                    expected: n,
                    actual: row.dim(),
                });
            }
            entries.extend_from_slice(row.as_slice());
        }
        LinearMap::new(m, n, entries)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let row = Vector::from(&self.entries[r * self.cols..(r + 1) * self.cols]);
            s.push_str(&row.to_text());
            s.push('\n');
        }
        s
    }
}
