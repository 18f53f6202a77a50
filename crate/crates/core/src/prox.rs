//! Constraint sets and proximity mappings.
//!
//! The primitive here is the constrained proximity mapping
//! `Prox^C_{a g}(v) = argmin_{x in C} { g(x) + |x - v|^2 / (2a) }`,
//! characterized variationally by
//! `<v - p, x - p> + a g(p) <= a g(x)` for all `x in C`.
//! This module provides the closed-form instances the problem gallery
//! needs plus Dykstra's algorithm for polyhedral sets without a
//! closed-form projection.

use rand::Rng;

use crate::linops::Vector;
use crate::{Error, Result};

/// Feasibility tolerance used by membership predicates unless the caller
/// supplies one.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Default Dykstra controls for the lasso dual ball (no closed form is
/// available for `{ y : |A^T y|_inf <= gamma }`; the resulting prox is
/// inexact at this tolerance, which traces record in their metadata).
pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_SWEEPS: usize = 10_000;

/// A halfspace `{ y : <normal, y> <= bound }`.
#[derive(Clone, Debug)]
pub struct Halfspace {
    pub normal: Vector,
    pub bound: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, bound: f64) -> Self {
        Halfspace { normal, bound }
    }

    /// Amount by which `v` violates the halfspace (0 when feasible).
    pub fn violation(&self, v: &Vector) -> f64 {
        (self.normal.dot(v) - self.bound).max(0.0)
    }

    /// Euclidean projection onto the halfspace.
    pub fn project(&self, v: &Vector) -> Vector {
        let nn = self.normal.dot(&self.normal);
        if nn <= f64::MIN_POSITIVE {
            return v.clone();
        }
        let excess = self.normal.dot(v) - self.bound;
        if excess <= 0.0 {
            v.clone()
        } else {
            v.axpy(-excess / nn, &self.normal)
        }
    }
}

/// The closed convex sets the gallery problems constrain their blocks to.
#[derive(Clone, Debug)]
pub enum ConvexSet {
    /// All of `R^n`.
    Whole(usize),
    /// The nonnegative orthant `R^n_+`.
    NonNeg(usize),
    /// The probability simplex `{ x : sum x_i = 1, x >= 0 }`.
    Simplex(usize),
    /// An intersection of halfspaces, projected with Dykstra's algorithm.
    Polyhedron {
        dim: usize,
        halfspaces: Vec<Halfspace>,
        tol: f64,
        max_sweeps: usize,
    },
}

impl ConvexSet {
    pub fn polyhedron(dim: usize, halfspaces: Vec<Halfspace>) -> Self {
        ConvexSet::Polyhedron {
            dim,
            halfspaces,
            tol: DYKSTRA_TOL,
            max_sweeps: DYKSTRA_MAX_SWEEPS,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Whole(n) | ConvexSet::NonNeg(n) | ConvexSet::Simplex(n) => *n,
            ConvexSet::Polyhedron { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        match self {
            ConvexSet::Whole(_) => true,
            ConvexSet::NonNeg(_) => v.iter().all(|&x| x >= -tol),
            ConvexSet::Simplex(_) => {
                v.iter().all(|&x| x >= -tol) && (v.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            ConvexSet::Polyhedron { halfspaces, .. } => {
                halfspaces.iter().all(|h| h.violation(v) <= tol)
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, v: &Vector) -> Result<Vector> {
        match self {
            ConvexSet::Whole(_) => Ok(v.clone()),
            ConvexSet::NonNeg(_) => Ok(project_nonneg(v)),
            ConvexSet::Simplex(_) => project_simplex(v),
            ConvexSet::Polyhedron {
                halfspaces,
                tol,
                max_sweeps,
                ..
            } => project_polyhedron_dykstra(v, halfspaces, *tol, *max_sweeps),
        }
    }

    /// Deterministic feasible sample: uniform on `[0,1)` per coordinate,
    /// then projected onto the set.
    pub fn sample(&self, rng: &mut impl Rng) -> Vector {
        let raw = Vector::new((0..self.dim()).map(|_| rng.random::<f64>()).collect());
        self.project(&raw).unwrap_or(raw)
    }
}

/// Euclidean projection onto the probability simplex via the sorted
/// threshold rule. Equal entries keep their original order (stable sort),
/// so ties break deterministically.
pub fn project_simplex(v: &Vector) -> Result<Vector> {
    let n = v.dim();
    if n == 0 {
        return Err(Error::EmptyInput("project_simplex"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| v[j].partial_cmp(&v[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        cumulative += v[idx];
        let candidate = (cumulative - 1.0) / (rank as f64 + 1.0);
        if v[idx] - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    Ok(Vector::new(
        v.iter().map(|&x| (x - theta).max(0.0)).collect(),
    ))
}

/// Componentwise clamp onto the nonnegative orthant.
pub fn project_nonneg(v: &Vector) -> Vector {
    Vector::new(v.iter().map(|&x| x.max(0.0)).collect())
}

/// Soft-thresholding: the prox of `step * weight * |.|_1`.
///
/// At the kink `|v_i| = step * weight` the result is exactly 0.
pub fn prox_l1(v: &Vector, weight: f64, step: f64) -> Vector {
    let t = step * weight;
    Vector::new(
        v.iter()
            .map(|&x| {
                let shrunk = x.abs() - t;
                if shrunk > 0.0 {
                    x.signum() * shrunk
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// Prox of `step * (lambda/2) |x - center_z|^2`:
/// `(v + step * lambda * center_z) / (1 + step * lambda)`.
pub fn prox_quadratic(v: &Vector, lambda: f64, center_z: &Vector, step: f64) -> Result<Vector> {
    if v.dim() != center_z.dim() {
        return Err(Error::DimensionMismatch {
            context: "prox_quadratic",
            expected: v.dim(),
            actual: center_z.dim(),
        });
    }
    let denom = 1.0 + step * lambda;
    Ok(v.axpy(step * lambda, center_z).scale(1.0 / denom))
}

/// Prox of a linear function `<gradient, .>` over a set `C`:
/// exactly `P_C(v - step * gradient)`.
pub fn prox_linear_over_set<P>(v: &Vector, gradient: &Vector, step: f64, project: P) -> Result<Vector>
where
    P: Fn(&Vector) -> Result<Vector>,
{
    if v.dim() != gradient.dim() {
        return Err(Error::DimensionMismatch {
            context: "prox_linear_over_set",
            expected: v.dim(),
            actual: gradient.dim(),
        });
    }
    project(&v.axpy(-step, gradient))
}

/// Damped gradient step `v - (step / (1 + step * lambda)) * grad_at_v`.
///
/// For `g` with `grad g(x) - grad g(v) = lambda (x - v)` this equals the
/// prox of `step * g` at `v`; it exists to cross-check [`prox_quadratic`].
pub fn damped_gradient_step_equiv(v: &Vector, lambda: f64, grad_at_v: &Vector, step: f64) -> Vector {
    v.axpy(-step / (1.0 + step * lambda), grad_at_v)
}

/// Dykstra's alternating projections onto an intersection of halfspaces.
///
/// Converges to the Euclidean projection for consistent polyhedra. Returns
/// once every constraint is violated by at most `tol`; errors with the
/// worst remaining violation if `max_sweeps` is exhausted first.
pub fn project_polyhedron_dykstra(
    v: &Vector,
    halfspaces: &[Halfspace],
    tol: f64,
    max_sweeps: usize,
) -> Result<Vector> {
    if halfspaces.is_empty() {
        return Err(Error::EmptyInput("project_polyhedron_dykstra"));
    }
    if !v.is_finite() {
        return Err(Error::InvalidInput(
            "project_polyhedron_dykstra: non-finite input".into(),
        ));
    }
    let mut x = v.clone();
    let mut corrections = vec![Vector::zeros(v.dim()); halfspaces.len()];
    let mut worst = f64::INFINITY;
    for _ in 0..max_sweeps {
        for (h, corr) in halfspaces.iter().zip(corrections.iter_mut()) {
            let y = x.add(corr);
            let projected = h.project(&y);
            *corr = y.sub(&projected);
            x = projected;
        }
        worst = halfspaces
            .iter()
            .map(|h| h.violation(&x))
            .fold(0.0, f64::max);
        if worst <= tol {
            return Ok(x);
        }
    }
    Err(Error::DykstraExhausted {
        tol,
        max_sweeps,
        worst_violation: worst,
    })
}

type EvalFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type ProxFn = dyn Fn(&Vector, f64) -> Result<Vector> + Send + Sync;

/// A constrained proximity mapping `Prox^C_{a g}` packaged with the value
/// of `g` and the membership predicate of `C`.
///
/// Immutable after construction; safe to share across solver runs.
pub struct ProxOracle {
    label: String,
    set: ConvexSet,
    eval_fn: Box<EvalFn>,
    prox_fn: Box<ProxFn>,
}

impl std::fmt::Debug for ProxOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProxOracle")
            .field("label", &self.label)
            .field("set", &self.set)
            .finish()
    }
}

impl ProxOracle {
    pub fn new(
        label: impl Into<String>,
        set: ConvexSet,
        eval_fn: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        prox_fn: impl Fn(&Vector, f64) -> Result<Vector> + Send + Sync + 'static,
    ) -> Self {
        ProxOracle {
            label: label.into(),
            set,
            eval_fn: Box::new(eval_fn),
            prox_fn: Box::new(prox_fn),
        }
    }

    /// `g = 0` over `set`: the prox is the projection, independent of step.
    pub fn zero_over(label: impl Into<String>, set: ConvexSet) -> Self {
        let set_for_prox = set.clone();
        ProxOracle::new(
            label,
            set,
            |_| 0.0,
            move |center, _step| set_for_prox.project(center),
        )
    }

    /// `g = <gradient, .>` over `set`.
    pub fn linear_over(label: impl Into<String>, set: ConvexSet, gradient: Vector) -> Self {
        let set_for_prox = set.clone();
        let grad_for_eval = gradient.clone();
        ProxOracle::new(
            label,
            set,
            move |x| grad_for_eval.dot(x),
            move |center, step| {
                prox_linear_over_set(center, &gradient, step, |v| set_for_prox.project(v))
            },
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    /// Value of `g` at `x`.
    pub fn eval(&self, x: &Vector) -> f64 {
        (self.eval_fn)(x)
    }

    /// `Prox^C_{step * g}(center)`.
    pub fn prox(&self, center: &Vector, step: f64) -> Result<Vector> {
        (self.prox_fn)(center, step)
    }

    pub fn member(&self, x: &Vector, tol: f64) -> bool {
        self.set.contains(x, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from(vec![a, b])
    }

    #[test]
    fn simplex_fixed_point() {
        let p = project_simplex(&vec2(0.5, 0.5)).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn simplex_threshold_case() {
        // Sorted rule gives theta = 1 for (2, 0).
        let p = project_simplex(&vec2(2.0, 0.0)).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn simplex_symmetric_shift() {
        let p = project_simplex(&vec2(0.3, 0.3)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn simplex_empty_input_errors() {
        assert!(project_simplex(&Vector::new(vec![])).is_err());
    }

    /// Brute-force grid minimizer of |p - v| over the simplex.
    fn simplex_grid_argmin(v: &Vector, steps: usize) -> Vector {
        let mut best = Vector::zeros(v.dim());
        let mut best_d = f64::INFINITY;
        match v.dim() {
            2 => {
                for i in 0..=steps {
                    let t = i as f64 / steps as f64;
                    let p = vec2(t, 1.0 - t);
                    let d = p.dist(v);
                    if d < best_d {
                        best_d = d;
                        best = p;
                    }
                }
            }
            3 => {
                for i in 0..=steps {
                    for j in 0..=(steps - i) {
                        let a = i as f64 / steps as f64;
                        let b = j as f64 / steps as f64;
                        let p = Vector::from(vec![a, b, 1.0 - a - b]);
                        let d = p.dist(v);
                        if d < best_d {
                            best_d = d;
                            best = p;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        best
    }

    #[test]
    fn simplex_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let v = vec2(rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0));
            let p = project_simplex(&v).unwrap();
            let q = simplex_grid_argmin(&v, 2000);
            assert!(p.dist(&q) <= 2e-3, "p={:?} grid={:?}", p, q);
        }
        for _ in 0..5 {
            let v = Vector::new((0..3).map(|_| rng.random_range(-1.0..2.0)).collect());
            let p = project_simplex(&v).unwrap();
            let q = simplex_grid_argmin(&v, 400);
            assert!(p.dist(&q) <= 8e-3, "p={:?} grid={:?}", p, q);
        }
    }

    #[test]
    fn simplex_kkt_sampling() {
        // <v - p, x - p> <= 0 for feasible x certifies the projection.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let set = ConvexSet::Simplex(4);
        for _ in 0..20 {
            let v = Vector::new((0..4).map(|_| rng.random_range(-2.0..2.0)).collect());
            let p = project_simplex(&v).unwrap();
            for _ in 0..32 {
                let x = set.sample(&mut rng);
                assert!(v.sub(&p).dot(&x.sub(&p)) <= 1e-10);
            }
        }
    }

    #[test]
    fn nonneg_examples() {
        assert_eq!(project_nonneg(&Vector::from(vec![1.0, -2.0, 0.0])).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(project_nonneg(&vec2(-1.0, -1.0)).as_slice(), &[0.0, 0.0]);
        assert_eq!(project_nonneg(&vec2(3.0, 4.0)).as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn soft_threshold_examples() {
        let p = prox_l1(&vec2(2.0, -2.0), 1.0, 1.0);
        assert_eq!(p.as_slice(), &[1.0, -1.0]);
        let p = prox_l1(&Vector::from(vec![0.5]), 1.0, 1.0);
        assert_eq!(p.as_slice(), &[0.0]);
        // Vanishing regularizer leaves the point unchanged.
        let p = prox_l1(&vec2(0.7, -0.3), 1e-300, 1.0);
        assert!((p[0] - 0.7).abs() < 1e-15 && (p[1] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn soft_threshold_exact_zero_at_kink() {
        let p = prox_l1(&Vector::from(vec![1.0, -1.0]), 1.0, 1.0);
        assert_eq!(p.as_slice(), &[0.0, 0.0]);
    }

    /// 1-D grid minimization of `weight*|x| + (x - v)^2 / (2 step)`.
    fn l1_grid_argmin(v: f64, weight: f64, step: f64) -> f64 {
        let mut best = 0.0;
        let mut best_val = f64::INFINITY;
        let lo = v.min(0.0) - 1.0;
        let hi = v.max(0.0) + 1.0;
        let n = 400_000;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let val = weight * x.abs() + (x - v) * (x - v) / (2.0 * step);
            if val < best_val {
                best_val = val;
                best = x;
            }
        }
        best
    }

    #[test]
    fn soft_threshold_matches_grid_oracle() {
        for &(v, w, s) in &[(2.0, 1.0, 1.0), (0.5, 1.0, 1.0), (-1.7, 0.3, 2.0)] {
            let p = prox_l1(&Vector::from(vec![v]), w, s);
            let q = l1_grid_argmin(v, w, s);
            assert!((p[0] - q).abs() < 2e-5, "prox={} grid={}", p[0], q);
        }
    }

    #[test]
    fn prox_quadratic_toy_coefficient() {
        // g(x) = x^2 is lambda = 2, z = 0; step 0.5 halves the point.
        let p = prox_quadratic(&Vector::from(vec![1.0]), 2.0, &Vector::zeros(1), 0.5).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn prox_quadratic_fixed_point_at_minimizer() {
        let z = vec2(1.5, -0.5);
        let p = prox_quadratic(&z, 3.0, &z, 0.7).unwrap();
        assert!(p.dist(&z) < 1e-15);
    }

    #[test]
    fn prox_quadratic_huge_step_reaches_minimizer() {
        let p = prox_quadratic(&Vector::from(vec![1.0]), 2.0, &Vector::zeros(1), 1e12).unwrap();
        assert!(p[0].abs() < 1e-11);
    }

    #[test]
    fn prox_linear_reduces_to_projection_for_zero_gradient() {
        let set = ConvexSet::NonNeg(2);
        let p = prox_linear_over_set(&vec2(1.0, -1.0), &Vector::zeros(2), 1.0, |v| set.project(v))
            .unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn prox_linear_clamps_after_gradient_step() {
        let set = ConvexSet::NonNeg(2);
        let p = prox_linear_over_set(&vec2(1.0, 1.0), &vec2(2.0, 0.0), 1.0, |v| set.project(v))
            .unwrap();
        assert_eq!(p.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn prox_linear_whole_space_is_gradient_step() {
        let set = ConvexSet::Whole(2);
        let v = vec2(0.3, -0.4);
        let b = vec2(1.0, 2.0);
        let p = prox_linear_over_set(&v, &b, 0.25, |u| set.project(u)).unwrap();
        assert!(p.dist(&v.axpy(-0.25, &b)) < 1e-15);
    }

    #[test]
    fn damped_step_matches_prox_quadratic_example() {
        // g(x) = x^2 at v = 1: gradient 2, lambda 2, step 0.5 -> 0.5.
        let p = damped_gradient_step_equiv(&Vector::from(vec![1.0]), 2.0, &Vector::from(vec![2.0]), 0.5);
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn damped_step_trivial_cases() {
        let v = vec2(1.0, -2.0);
        let p = damped_gradient_step_equiv(&v, 2.0, &Vector::zeros(2), 0.5);
        assert_eq!(p.as_slice(), v.as_slice());
        let grad = vec2(3.0, 1.0);
        let p = damped_gradient_step_equiv(&v, 2.0, &grad, 1e-12);
        assert!(p.dist(&v) < 1e-11);
    }

    #[test]
    fn prox_quadratic_equals_damped_gradient_on_random_inputs() {
        // Appendix identity: both routes agree to 1e-12.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let dim = rng.random_range(1..=8);
            let v = Vector::new((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect());
            let z = Vector::new((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect());
            let lambda = rng.random_range(0.1..4.0);
            let step = rng.random_range(0.01..3.0);
            let grad = v.sub(&z).scale(lambda);
            let a = prox_quadratic(&v, lambda, &z, step).unwrap();
            let b = damped_gradient_step_equiv(&v, lambda, &grad, step);
            assert!(a.dist(&b) <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn dykstra_single_halfspace_is_closed_form() {
        let h = Halfspace::new(vec2(1.0, 0.0), 0.0);
        let p = project_polyhedron_dykstra(&vec2(1.0, 0.0), &[h], 1e-12, 100).unwrap();
        assert!(p.dist(&vec2(0.0, 0.0)) < 1e-12);
    }

    fn unit_box_halfspaces() -> Vec<Halfspace> {
        vec![
            Halfspace::new(vec2(1.0, 0.0), 1.0),
            Halfspace::new(vec2(-1.0, 0.0), 1.0),
            Halfspace::new(vec2(0.0, 1.0), 1.0),
            Halfspace::new(vec2(0.0, -1.0), 1.0),
        ]
    }

    #[test]
    fn dykstra_box_matches_clamp() {
        let p = project_polyhedron_dykstra(&vec2(2.0, 2.0), &unit_box_halfspaces(), 1e-10, 1000)
            .unwrap();
        assert!(p.dist(&vec2(1.0, 1.0)) < 1e-9);
    }

    #[test]
    fn dykstra_feasible_point_unchanged() {
        let v = vec2(0.25, -0.5);
        let p = project_polyhedron_dykstra(&v, &unit_box_halfspaces(), 1e-10, 1000).unwrap();
        assert!(p.dist(&v) < 1e-12);
    }

    #[test]
    fn dykstra_exhaustion_reports_worst_violation() {
        // Inconsistent halfspaces: y <= -1 and -y <= -1 (i.e. y >= 1).
        let hs = vec![
            Halfspace::new(Vector::from(vec![1.0]), -1.0),
            Halfspace::new(Vector::from(vec![-1.0]), -1.0),
        ];
        let err = project_polyhedron_dykstra(&Vector::from(vec![0.0]), &hs, 1e-10, 50).unwrap_err();
        match err {
            Error::DykstraExhausted { worst_violation, .. } => assert!(worst_violation > 0.1),
            other => panic!("unexpected error {other}"),
        }
    }

    fn sample_projections() -> Vec<(ConvexSet, &'static str)> {
        vec![
            (ConvexSet::NonNeg(3), "nonneg"),
            (ConvexSet::Simplex(3), "simplex"),
            (
                ConvexSet::polyhedron(
                    2,
                    vec![
                        Halfspace::new(vec2(1.0, 1.0), 1.0),
                        Halfspace::new(vec2(-1.0, 0.5), 0.5),
                    ],
                ),
                "polyhedron",
            ),
        ]
    }

    #[test]
    fn projections_are_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (set, name) in sample_projections() {
            for _ in 0..20 {
                let v = Vector::new((0..set.dim()).map(|_| rng.random_range(-3.0..3.0)).collect());
                let p = set.project(&v).unwrap();
                let pp = set.project(&p).unwrap();
                assert!(pp.dist(&p) <= 1e-10, "{name}: p={p:?} pp={pp:?}");
            }
        }
    }

    #[test]
    fn projections_are_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for (set, name) in sample_projections() {
            for _ in 0..20 {
                let u = Vector::new((0..set.dim()).map(|_| rng.random_range(-3.0..3.0)).collect());
                let v = Vector::new((0..set.dim()).map(|_| rng.random_range(-3.0..3.0)).collect());
                let pu = set.project(&u).unwrap();
                let pv = set.project(&v).unwrap();
                assert!(
                    pu.dist(&pv) <= u.dist(&v) + 1e-10,
                    "{name}: |Pu-Pv|={} |u-v|={}",
                    pu.dist(&pv),
                    u.dist(&v)
                );
            }
        }
    }

    /// Variational check of the prox characterization at sampled feasible
    /// points: `<center - p, x - p> + a g(p) <= a g(x) + tol`.
    fn check_variational(oracle: &ProxOracle, center: &Vector, step: f64, seed: u64) {
        let p = oracle.prox(center, step).unwrap();
        assert!(oracle.member(&p, FEASIBILITY_TOL), "prox output infeasible");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..64 {
            let x = oracle.set().sample(&mut rng);
            let lhs = center.sub(&p).dot(&x.sub(&p)) + step * oracle.eval(&p);
            let rhs = step * oracle.eval(&x);
            assert!(lhs <= rhs + 1e-8, "variational inequality failed: {lhs} > {rhs}");
        }
    }

    #[test]
    fn oracle_outputs_satisfy_variational_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let oracles = [
            ProxOracle::zero_over("simplex", ConvexSet::Simplex(3)),
            ProxOracle::linear_over("linear/nonneg", ConvexSet::NonNeg(3), Vector::from(vec![1.0, -2.0, 0.5])),
            ProxOracle::new(
                "l1",
                ConvexSet::Whole(3),
                |x| x.norm_l1(),
                |c, a| Ok(prox_l1(c, 1.0, a)),
            ),
            ProxOracle::new(
                "quadratic",
                ConvexSet::Whole(3),
                |x| x.dot(x),
                |c, a| prox_quadratic(c, 2.0, &Vector::zeros(3), a),
            ),
        ];
        for (i, oracle) in oracles.iter().enumerate() {
            for trial in 0..4 {
                let center = Vector::new((0..3).map(|_| rng.random_range(-2.0..2.0)).collect());
                let step = rng.random_range(0.05..2.0);
                check_variational(oracle, &center, step, 100 + (i * 4 + trial) as u64);
            }
        }
    }

    #[test]
    fn prox_linear_matches_dense_grid_on_boxes() {
        // 2-D brute force on a box at pitch 1e-4 (the box is also handed to
        // prox_linear_over_set as a polyhedron).
        let cases = [
            (vec2(0.3, -0.2), vec2(1.0, -0.5), 0.7),
            (vec2(0.9, 0.9), vec2(-2.0, 0.3), 0.5),
            (vec2(-0.8, 0.1), vec2(0.0, 1.5), 1.3),
        ];
        for (v, grad, step) in cases {
            let box_set = ConvexSet::polyhedron(2, unit_box_halfspaces());
            let p = prox_linear_over_set(&v, &grad, step, |u| box_set.project(u)).unwrap();

            let objective = |x0: f64, x1: f64| {
                grad[0] * x0
                    + grad[1] * x1
                    + ((x0 - v[0]).powi(2) + (x1 - v[1]).powi(2)) / (2.0 * step)
            };
            let pitch = 1e-4;
            let n = (2.0 / pitch) as usize;
            let mut best = (0.0, 0.0);
            let mut best_val = f64::INFINITY;
            for i in 0..=n {
                let x0 = -1.0 + pitch * i as f64;
                for j in 0..=n {
                    let x1 = -1.0 + pitch * j as f64;
                    let val = objective(x0, x1);
                    if val < best_val {
                        best_val = val;
                        best = (x0, x1);
                    }
                }
            }
            assert!(
                (p[0] - best.0).abs() <= 1e-4 && (p[1] - best.1).abs() <= 1e-4,
                "prox={p:?} grid={best:?}"
            );
        }
    }
}
