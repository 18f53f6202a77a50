//! Saddle-point problem records and the built-in gallery.
//!
//! Two representations coexist:
//!
//! * [`GenericSaddle`] exposes the block proximal maps of an arbitrary
//!   convex-concave `f` directly (argmin/argmax of `f` plus a quadratic
//!   penalty);
//! * [`BilinearSaddle`] stores the pieces of
//!   `f(x, y) = <Kx, y> + g(x) - h(y)` and derives the same block steps
//!   from the proximity mappings of `g` and `h` alone.
//!
//! Both implement [`SaddleProblem`], which is all the solver needs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::diagnostics;
use crate::linops::{LinearMap, Vector};
use crate::prox::{self, ConvexSet, Halfspace, ProxOracle};
use crate::{Error, Result};

/// A known saddle point with its function value.
#[derive(Clone, Debug)]
pub struct SaddleReference {
    pub x: Vector,
    pub y: Vector,
    pub value: f64,
    pub provenance: ReferenceProvenance,
}

/// Where a reference saddle point came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceProvenance {
    ClosedForm,
    Oracle,
}

impl ReferenceProvenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReferenceProvenance::ClosedForm => "closed-form",
            ReferenceProvenance::Oracle => "oracle",
        }
    }
}

/// What the iterate engine needs from a problem.
pub trait SaddleProblem: Send + Sync {
    fn label(&self) -> &str;

    /// `(dim X, dim Y)`.
    fn dims(&self) -> (usize, usize);

    fn x_set(&self) -> &ConvexSet;
    fn y_set(&self) -> &ConvexSet;

    fn f_eval(&self, x: &Vector, y: &Vector) -> f64;

    /// `argmax_{y in Y} { f(x_bar, y) - |y - y_center|^2 / (2 sigma) }`.
    fn prox_in_y(&self, x_bar: &Vector, y_center: &Vector, sigma: f64) -> Result<Vector>;

    /// `argmin_{x in X} { f(x, y_bar) + |x - x_center|^2 / (2 tau) }`.
    fn prox_in_x(&self, y_bar: &Vector, x_center: &Vector, tau: f64) -> Result<Vector>;

    fn reference(&self) -> Option<&SaddleReference>;

    /// The bilinear record behind this problem, when there is one.
    fn as_bilinear(&self) -> Option<&BilinearSaddle> {
        None
    }
}

type GenericProxFn = dyn Fn(&Vector, &Vector, f64) -> Result<Vector> + Send + Sync;
type GenericEvalFn = dyn Fn(&Vector, &Vector) -> f64 + Send + Sync;

/// A saddle problem given by direct block proximal maps.
pub struct GenericSaddle {
    label: String,
    x_set: ConvexSet,
    y_set: ConvexSet,
    prox_in_y: Box<GenericProxFn>,
    prox_in_x: Box<GenericProxFn>,
    f_eval: Box<GenericEvalFn>,
    reference: Option<SaddleReference>,
}

impl GenericSaddle {
    pub fn new(
        label: impl Into<String>,
        x_set: ConvexSet,
        y_set: ConvexSet,
        prox_in_y: impl Fn(&Vector, &Vector, f64) -> Result<Vector> + Send + Sync + 'static,
        prox_in_x: impl Fn(&Vector, &Vector, f64) -> Result<Vector> + Send + Sync + 'static,
        f_eval: impl Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GenericSaddle {
            label: label.into(),
            x_set,
            y_set,
            prox_in_y: Box::new(prox_in_y),
            prox_in_x: Box::new(prox_in_x),
            f_eval: Box::new(f_eval),
            reference: None,
        }
    }

    pub fn with_reference(mut self, reference: SaddleReference) -> Self {
        self.reference = Some(reference);
        self
    }
}

impl std::fmt::Debug for GenericSaddle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GenericSaddle")
            .field("label", &self.label)
            .field("dims", &self.dims())
            .finish()
    }
}

impl SaddleProblem for GenericSaddle {
    fn label(&self) -> &str {
        &self.label
    }

    fn dims(&self) -> (usize, usize) {
        (self.x_set.dim(), self.y_set.dim())
    }

    fn x_set(&self) -> &ConvexSet {
        &self.x_set
    }

    fn y_set(&self) -> &ConvexSet {
        &self.y_set
    }

    fn f_eval(&self, x: &Vector, y: &Vector) -> f64 {
        (self.f_eval)(x, y)
    }

    fn prox_in_y(&self, x_bar: &Vector, y_center: &Vector, sigma: f64) -> Result<Vector> {
        (self.prox_in_y)(x_bar, y_center, sigma)
    }

    fn prox_in_x(&self, y_bar: &Vector, x_center: &Vector, tau: f64) -> Result<Vector> {
        (self.prox_in_x)(y_bar, x_center, tau)
    }

    fn reference(&self) -> Option<&SaddleReference> {
        self.reference.as_ref()
    }
}

/// A saddle problem with bilinear coupling
/// `f(x, y) = <Kx, y> + g(x) - h(y)`.
#[derive(Debug)]
pub struct BilinearSaddle {
    label: String,
    k: LinearMap,
    g_prox: ProxOracle,
    h_prox: ProxOracle,
    reference: Option<SaddleReference>,
    /// For block-structured primal variables (the l1 least-squares problem
    /// concatenates `(x, u)`): the split position inside the x vector.
    x_block_split: Option<usize>,
}

impl BilinearSaddle {
    /// `g_prox` must act over `X` (dimension `K.cols()`), `h_prox` over `Y`
    /// (dimension `K.rows()`).
    pub fn new(
        label: impl Into<String>,
        k: LinearMap,
        g_prox: ProxOracle,
        h_prox: ProxOracle,
    ) -> Result<Self> {
        if g_prox.set().dim() != k.cols() {
            return Err(Error::DimensionMismatch {
                context: "bilinear g oracle",
                expected: k.cols(),
                actual: g_prox.set().dim(),
            });
        }
        if h_prox.set().dim() != k.rows() {
            return Err(Error::DimensionMismatch {
                context: "bilinear h oracle",
                expected: k.rows(),
                actual: h_prox.set().dim(),
            });
        }
        Ok(BilinearSaddle {
            label: label.into(),
            k,
            g_prox,
            h_prox,
            reference: None,
            x_block_split: None,
        })
    }

    pub fn with_reference(mut self, reference: SaddleReference) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_block_split(mut self, split: usize) -> Self {
        self.x_block_split = Some(split);
        self
    }

    pub fn coupling(&self) -> &LinearMap {
        &self.k
    }

    pub fn g_oracle(&self) -> &ProxOracle {
        &self.g_prox
    }

    pub fn h_oracle(&self) -> &ProxOracle {
        &self.h_prox
    }

    pub fn g_eval(&self, x: &Vector) -> f64 {
        self.g_prox.eval(x)
    }

    pub fn h_eval(&self, y: &Vector) -> f64 {
        self.h_prox.eval(y)
    }

    pub fn x_block_split(&self) -> Option<usize> {
        self.x_block_split
    }

    pub fn operator_norm(&self) -> f64 {
        self.k.operator_norm()
    }
}

impl SaddleProblem for BilinearSaddle {
    fn label(&self) -> &str {
        &self.label
    }

    fn dims(&self) -> (usize, usize) {
        (self.k.cols(), self.k.rows())
    }

    fn x_set(&self) -> &ConvexSet {
        self.g_prox.set()
    }

    fn y_set(&self) -> &ConvexSet {
        self.h_prox.set()
    }

    fn f_eval(&self, x: &Vector, y: &Vector) -> f64 {
        let kx = self.k.apply(x).expect("x dim checked at construction");
        kx.dot(y) + self.g_prox.eval(x) - self.h_prox.eval(y)
    }

    // The block prox of f at fixed x_bar reduces to the prox of h shifted
    // by the coupling term, and symmetrically for the x block.

    fn prox_in_y(&self, x_bar: &Vector, y_center: &Vector, sigma: f64) -> Result<Vector> {
        let kx = self.k.apply(x_bar)?;
        self.h_prox.prox(&y_center.axpy(sigma, &kx), sigma)
    }

    fn prox_in_x(&self, y_bar: &Vector, x_center: &Vector, tau: f64) -> Result<Vector> {
        let kty = self.k.apply_adjoint(y_bar)?;
        self.g_prox.prox(&x_center.axpy(-tau, &kty), tau)
    }

    fn reference(&self) -> Option<&SaddleReference> {
        self.reference.as_ref()
    }

    fn as_bilinear(&self) -> Option<&BilinearSaddle> {
        Some(self)
    }
}

/// Desk-scale bound for eagerly computing LP references by vertex
/// enumeration.
fn vertex_enum_tractable(m: usize, n: usize) -> bool {
    if n > 12 || n > m {
        return false;
    }
    let mut combinations = 1.0_f64;
    for i in 0..n {
        combinations *= (m - i) as f64 / (i + 1) as f64;
        if combinations > 1e6 {
            return false;
        }
    }
    true
}

/// Two-player zero-sum matrix game `min_x max_y x^T C y` over probability
/// simplices. `K = C^T`, `g = h = 0`.
///
/// 2x2 games get a closed-form reference; larger desk-scale games get one
/// from the vertex-enumeration oracle on the minimax LP reformulation.
pub fn make_matrix_game(c: &LinearMap) -> Result<BilinearSaddle> {
    let (m, n) = (c.rows(), c.cols());
    let g = ProxOracle::zero_over("game x-simplex", ConvexSet::Simplex(m));
    let h = ProxOracle::zero_over("game y-simplex", ConvexSet::Simplex(n));
    let mut problem = BilinearSaddle::new("matrix_game", c.transpose(), g, h)?;

    let reference = if (m, n) == (2, 2) {
        let (x, y, value) = diagnostics::game_value_2x2(c)?;
        Some(SaddleReference { x, y, value, provenance: ReferenceProvenance::ClosedForm })
    } else {
        diagnostics::game_reference_via_lp(c).ok().map(|(x, y, value)| SaddleReference {
            x,
            y,
            value,
            provenance: ReferenceProvenance::Oracle,
        })
    };
    if let Some(r) = reference {
        problem = problem.with_reference(r);
    }
    Ok(problem)
}

/// Lagrangian of the inequality-form LP `min c^T x  s.t.  Ax <= b`:
/// `f(x, y) = y^T A x + c^T x - b^T y` over `X = R^n`, `Y = R^m_+`.
pub fn make_lp_lagrangian(a: &LinearMap, b: &Vector, c: &Vector) -> Result<BilinearSaddle> {
    let (m, n) = (a.rows(), a.cols());
    if b.dim() != m {
        return Err(Error::DimensionMismatch { context: "lp b", expected: m, actual: b.dim() });
    }
    if c.dim() != n {
        return Err(Error::DimensionMismatch { context: "lp c", expected: n, actual: c.dim() });
    }
    let g = ProxOracle::linear_over("lp objective", ConvexSet::Whole(n), c.clone());
    let h = ProxOracle::linear_over("lp rhs", ConvexSet::NonNeg(m), b.clone());
    let mut problem = BilinearSaddle::new("lp", a.clone(), g, h)?;

    if vertex_enum_tractable(m, n) {
        if let Ok(sol) = diagnostics::lp_oracle_vertex_enum(a, b, c) {
            if let Some(dual) = sol.dual {
                problem = problem.with_reference(SaddleReference {
                    x: sol.x,
                    y: dual,
                    value: sol.value,
                    provenance: ReferenceProvenance::Oracle,
                });
            }
        }
    }
    Ok(problem)
}

/// Lagrangian of l1-regularized least squares
/// `min_x (1/2)|Ax - b|^2 + gamma |x|_1` in its saddle form over the
/// concatenated primal `(x, u)`:
/// `f((x,u), y) = (1/2)|u|^2 + gamma |x|_1 + y^T (Ax - b - u)`,
/// `Y = { y : |A^T y|_inf <= gamma }`.
///
/// The dual-ball projection has no closed form; it runs Dykstra over the
/// `2n` halfspaces `{ +-a_i^T y <= gamma }`, which makes the h-prox inexact
/// at the Dykstra tolerance.
pub fn make_lasso_saddle(a: &LinearMap, b: &Vector, gamma: f64) -> Result<BilinearSaddle> {
    if gamma <= 0.0 {
        return Err(Error::InvalidInput(format!("lasso gamma must be positive, got {gamma}")));
    }
    let (m, n) = (a.rows(), a.cols());
    if b.dim() != m {
        return Err(Error::DimensionMismatch { context: "lasso b", expected: m, actual: b.dim() });
    }

    // K (x, u) = A x - u.
    let mut k_entries = vec![0.0; m * (n + m)];
    for r in 0..m {
        for col in 0..n {
            k_entries[r * (n + m) + col] = a.get(r, col);
        }
        k_entries[r * (n + m) + n + r] = -1.0;
    }
    let k = LinearMap::new(m, n + m, k_entries)?;

    let gamma_for_eval = gamma;
    let g = ProxOracle::new(
        "lasso primal",
        ConvexSet::Whole(n + m),
        move |xu| {
            let (x, u) = xu.split_at(n);
            0.5 * u.dot(&u) + gamma_for_eval * x.norm_l1()
        },
        move |center, tau| {
            let (cx, cu) = center.split_at(n);
            let x = prox::prox_l1(&cx, gamma, tau);
            let u = cu.scale(1.0 / (1.0 + tau));
            Ok(x.concat(&u))
        },
    );

    let mut halfspaces = Vec::with_capacity(2 * n);
    for col in 0..n {
        let a_col = Vector::new((0..m).map(|r| a.get(r, col)).collect());
        halfspaces.push(Halfspace::new(a_col.clone(), gamma));
        halfspaces.push(Halfspace::new(a_col.scale(-1.0), gamma));
    }
    let y_set = ConvexSet::polyhedron(m, halfspaces);
    let h = ProxOracle::linear_over("lasso rhs", y_set.clone(), b.clone());

    let mut problem = BilinearSaddle::new("lasso", k, g, h)?.with_block_split(n);

    let (x_opt, value) = diagnostics::lasso_oracle_ista(a, b, gamma, 1e-10)?;
    let u_opt = a.apply(&x_opt)?.sub(b);
    let y_opt = y_set.project(&u_opt)?;
    problem = problem.with_reference(SaddleReference {
        x: x_opt.concat(&u_opt),
        y: y_opt,
        value,
        provenance: ReferenceProvenance::Oracle,
    });
    Ok(problem)
}

/// The 1x1 separable toy problem `f(x, y) = x^2 - y^2` with closed-form
/// block steps `x -> x/(1+2 tau)`, `y -> y/(1+2 sigma)`; saddle at the
/// origin with value 0.
pub fn make_toy_separable() -> GenericSaddle {
    GenericSaddle::new(
        "toy",
        ConvexSet::Whole(1),
        ConvexSet::Whole(1),
        |_x_bar, y_center, sigma| Ok(y_center.scale(1.0 / (1.0 + 2.0 * sigma))),
        |_y_bar, x_center, tau| Ok(x_center.scale(1.0 / (1.0 + 2.0 * tau))),
        |x, y| x[0] * x[0] - y[0] * y[0],
    )
    .with_reference(SaddleReference {
        x: Vector::zeros(1),
        y: Vector::zeros(1),
        value: 0.0,
        provenance: ReferenceProvenance::ClosedForm,
    })
}

/// The toy problem in bilinear form: `K = 0`, `g(x) = x^2`, `h(y) = y^2`.
pub fn make_toy_bilinear() -> BilinearSaddle {
    let g = ProxOracle::new(
        "toy g",
        ConvexSet::Whole(1),
        |x| x[0] * x[0],
        |center, tau| prox::prox_quadratic(center, 2.0, &Vector::zeros(1), tau),
    );
    let h = ProxOracle::new(
        "toy h",
        ConvexSet::Whole(1),
        |y| y[0] * y[0],
        |center, sigma| prox::prox_quadratic(center, 2.0, &Vector::zeros(1), sigma),
    );
    BilinearSaddle::new("toy", LinearMap::zero(1, 1), g, h)
        .expect("dims consistent")
        .with_reference(SaddleReference {
            x: Vector::zeros(1),
            y: Vector::zeros(1),
            value: 0.0,
            provenance: ReferenceProvenance::ClosedForm,
        })
}

/// Deterministically generate a feasible, bounded inequality-form LP.
///
/// `A` has standard-normal entries; `b = A x_tilde + s` with slack
/// `s >= 0.1` makes `x_tilde` strictly feasible; `c = -A^T y_star` with
/// `y_star >= 0` makes the dual feasible, so the optimum is finite.
pub fn generate_feasible_lp(seed: u64, m: usize, n: usize) -> Result<(LinearMap, Vector, Vector)> {
    if n < 1 || m < n {
        return Err(Error::InvalidInput(format!(
            "generate_feasible_lp needs m >= n >= 1, got m={m} n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let a = LinearMap::new(m, n, entries)?;
    let x_tilde = Vector::new((0..n).map(|_| rng.sample(StandardNormal)).collect());
    let slack = Vector::new((0..m).map(|_| 0.1 + rng.random::<f64>()).collect());
    let b = a.apply(&x_tilde)?.add(&slack);
    let y_star = Vector::new((0..m).map(|_| rng.random::<f64>()).collect());
    let c = a.apply_adjoint(&y_star)?.scale(-1.0);
    Ok((a, b, c))
}

/// Seeded random start: uniform on `[0,1)` per coordinate, projected onto
/// the respective sets.
pub fn seeded_start(x_set: &ConvexSet, y_set: &ConvexSet, seed: u64) -> Result<(Vector, Vector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw_x = Vector::new((0..x_set.dim()).map(|_| rng.random::<f64>()).collect());
    let raw_y = Vector::new((0..y_set.dim()).map(|_| rng.random::<f64>()).collect());
    Ok((x_set.project(&raw_x)?, y_set.project(&raw_y)?))
}

/// JSON problem definition accepted by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// `min_x max_y x^T C y` over simplices.
    MatrixGame { payoff: Vec<Vec<f64>> },
    /// Inequality-form LP Lagrangian: explicit `a`, `b`, `c`, or a seeded
    /// generated instance of shape `m x n`.
    Lp {
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
        #[serde(default)]
        c: Option<Vec<f64>>,
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// l1 least squares: explicit `a`, `b`, or a seeded instance.
    Lasso {
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
        gamma: f64,
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// `f(x, y) = x^2 - y^2` on `R x R`.
    Toy,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("problem spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// A short identity string recorded in trace metadata.
    pub fn identity(&self) -> String {
        match self {
            ProblemSpec::MatrixGame { payoff } => {
                format!("matrix_game[{}x{}]", payoff.len(), payoff.first().map_or(0, Vec::len))
            }
            ProblemSpec::Lp { a: Some(a), .. } => {
                format!("lp[{}x{}]", a.len(), a.first().map_or(0, Vec::len))
            }
            ProblemSpec::Lp { m, n, seed, .. } => format!(
                "lp[gen m={} n={} seed={}]",
                m.unwrap_or(20),
                n.unwrap_or(5),
                seed.map_or("config".into(), |s| s.to_string())
            ),
            ProblemSpec::Lasso { a: Some(a), gamma, .. } => {
                format!("lasso[{}x{} gamma={}]", a.len(), a.first().map_or(0, Vec::len), gamma)
            }
            ProblemSpec::Lasso { m, n, seed, gamma, .. } => format!(
                "lasso[gen m={} n={} gamma={} seed={}]",
                m.unwrap_or(40),
                n.unwrap_or(20),
                gamma,
                seed.map_or("config".into(), |s| s.to_string())
            ),
            ProblemSpec::Toy => "toy".into(),
        }
    }

    /// Instantiate the problem; `fallback_seed` seeds generated instances
    /// whose spec carries no seed of its own.
    pub fn build(&self, fallback_seed: u64) -> Result<BilinearSaddle> {
        match self {
            ProblemSpec::MatrixGame { payoff } => {
                let c = LinearMap::from_rows(payoff)?;
                make_matrix_game(&c)
            }
            ProblemSpec::Lp { a: Some(a), b: Some(b), c: Some(c), .. } => {
                let a = LinearMap::from_rows(a)?;
                make_lp_lagrangian(&a, &Vector::from(b.clone()), &Vector::from(c.clone()))
            }
            ProblemSpec::Lp { a: None, b: None, c: None, m, n, seed } => {
                let (a, b, c) = generate_feasible_lp(
                    seed.unwrap_or(fallback_seed),
                    m.unwrap_or(20),
                    n.unwrap_or(5),
                )?;
                make_lp_lagrangian(&a, &b, &c)
            }
            ProblemSpec::Lp { .. } => Err(Error::InvalidInput(
                "lp spec needs either all of a, b, c or none of them".into(),
            )),
            ProblemSpec::Lasso { a: Some(a), b: Some(b), gamma, .. } => {
                let a = LinearMap::from_rows(a)?;
                make_lasso_saddle(&a, &Vector::from(b.clone()), *gamma)
            }
            ProblemSpec::Lasso { a: None, b: None, gamma, m, n, seed } => {
                let m = m.unwrap_or(40);
                let n = n.unwrap_or(20);
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(fallback_seed));
                let entries: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
                let a = LinearMap::new(m, n, entries)?;
                let b = Vector::new((0..m).map(|_| rng.sample(StandardNormal)).collect());
                make_lasso_saddle(&a, &b, *gamma)
            }
            ProblemSpec::Lasso { .. } => Err(Error::InvalidInput(
                "lasso spec needs either both a and b or neither".into(),
            )),
            ProblemSpec::Toy => Ok(make_toy_bilinear()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game_2x2() -> BilinearSaddle {
        let c = LinearMap::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        make_matrix_game(&c).unwrap()
    }

    #[test]
    fn game_reference_value_and_strategies() {
        let p = game_2x2();
        let r = p.reference().unwrap();
        assert!((r.value - 5.0 / 3.0).abs() < 1e-12);
        assert!(r.x.dist(&Vector::from(vec![2.0 / 3.0, 1.0 / 3.0])) < 1e-12);
        assert!(r.y.dist(&Vector::from(vec![1.0 / 3.0, 2.0 / 3.0])) < 1e-12);
        assert_eq!(r.provenance, ReferenceProvenance::ClosedForm);
    }

    #[test]
    fn zero_game_reference() {
        let c = LinearMap::zero(2, 2);
        let p = make_matrix_game(&c).unwrap();
        assert_eq!(p.reference().unwrap().value, 0.0);
    }

    #[test]
    fn identity_game_reference() {
        let c = LinearMap::identity(2);
        let p = make_matrix_game(&c).unwrap();
        let r = p.reference().unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!(r.x.dist(&Vector::from(vec![0.5, 0.5])) < 1e-12);
        assert!(r.y.dist(&Vector::from(vec![0.5, 0.5])) < 1e-12);
    }

    #[test]
    fn game_f_eval_is_quadratic_form() {
        let p = game_2x2();
        let x = Vector::from(vec![0.25, 0.75]);
        let y = Vector::from(vec![0.6, 0.4]);
        // x^T C y with C = [[1,2],[3,1]]
        let expected = 0.25 * (1.0 * 0.6 + 2.0 * 0.4) + 0.75 * (3.0 * 0.6 + 1.0 * 0.4);
        assert!((p.f_eval(&x, &y) - expected).abs() < 1e-15);
    }

    #[test]
    fn lp_1d_reference_saddle() {
        // f(x, y) = x y - x; saddle (0, 1), value 0.
        let a = LinearMap::from_rows(&[vec![1.0]]).unwrap();
        let p = make_lp_lagrangian(&a, &Vector::from(vec![0.0]), &Vector::from(vec![-1.0])).unwrap();
        let r = p.reference().unwrap();
        assert!(r.x[0].abs() < 1e-12);
        assert!((r.y[0] - 1.0).abs() < 1e-12);
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.provenance, ReferenceProvenance::Oracle);
    }

    #[test]
    fn lp_zero_data_everything_is_a_saddle() {
        let a = LinearMap::zero(2, 2);
        let p = make_lp_lagrangian(&a, &Vector::zeros(2), &Vector::zeros(2)).unwrap();
        let x = Vector::from(vec![3.0, -1.0]);
        let y = Vector::from(vec![0.5, 2.0]);
        assert_eq!(p.f_eval(&x, &y), 0.0);
    }

    #[test]
    fn generated_lp_is_deterministic_and_strictly_feasible() {
        let (a1, b1, c1) = generate_feasible_lp(7, 12, 4).unwrap();
        let (a2, b2, c2) = generate_feasible_lp(7, 12, 4).unwrap();
        assert_eq!(b1.as_slice(), b2.as_slice());
        assert_eq!(c1.as_slice(), c2.as_slice());
        for r in 0..a1.rows() {
            for c in 0..a1.cols() {
                assert_eq!(a1.get(r, c), a2.get(r, c));
            }
        }
        // The construction b = A x_tilde + s leaves slack at least 0.1, so
        // the all-zeros probe of the slack is recoverable: b - A x_tilde >= 0.1.
        // (x_tilde is not exported; probe via the LP itself being feasible.)
        let p = make_lp_lagrangian(&a1, &b1, &c1).unwrap();
        let r = p.reference().expect("desk-scale instance gets an oracle reference");
        let residual = a1.apply(&r.x).unwrap().sub(&b1);
        assert!(residual.iter().all(|&v| v <= 1e-9), "optimal vertex infeasible");
        assert!(r.value.is_finite());
    }

    #[test]
    fn generated_lp_rejects_bad_shape() {
        assert!(generate_feasible_lp(1, 3, 5).is_err());
        assert!(generate_feasible_lp(1, 3, 0).is_err());
    }

    #[test]
    fn generated_lp_is_strictly_feasible() {
        // The construction leaves slack at least 0.1 at its witness point,
        // so shrinking every bound by 0.05 must keep the LP feasible.
        for seed in [0, 1, 2, 3, 4] {
            let (a, b, c) = generate_feasible_lp(seed, 9, 3).unwrap();
            let shrunk = Vector::new(b.iter().map(|&v| v - 0.05).collect());
            assert!(
                diagnostics::lp_oracle_vertex_enum(&a, &shrunk, &c).is_ok(),
                "seed {seed}: interior missing"
            );
        }
    }

    #[test]
    fn lasso_zero_data_reference() {
        let a = LinearMap::identity(2);
        let p = make_lasso_saddle(&a, &Vector::zeros(2), 1.0).unwrap();
        let r = p.reference().unwrap();
        assert!(r.value.abs() < 1e-12);
        assert!(r.x.norm() < 1e-10);
    }

    #[test]
    fn lasso_1d_closed_form_reference() {
        // min (1/2)(x - 10)^2 + |x| -> x* = 9, value 9.5.
        let a = LinearMap::identity(1);
        let p = make_lasso_saddle(&a, &Vector::from(vec![10.0]), 1.0).unwrap();
        let r = p.reference().unwrap();
        assert!((r.value - 9.5).abs() < 1e-6);
        assert!((r.x[0] - 9.0).abs() < 1e-5);
        // u* = Ax* - b = -1, and y* = u*.
        assert!((r.x[1] + 1.0).abs() < 1e-5);
        assert!((r.y[0] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn lasso_f_eval_matches_lagrangian() {
        let a = LinearMap::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let b = Vector::from(vec![1.0, -1.0]);
        let p = make_lasso_saddle(&a, &b, 0.5).unwrap();
        let xu = Vector::from(vec![0.3, -0.2, 0.4, 0.1]);
        let y = Vector::from(vec![0.2, -0.3]);
        let (x, u) = xu.split_at(2);
        let ax = a.apply(&x).unwrap();
        let expected =
            0.5 * u.dot(&u) + 0.5 * x.norm_l1() + y.dot(&ax.sub(&b).sub(&u));
        assert!((p.f_eval(&xu, &y) - expected).abs() < 1e-12);
    }

    #[test]
    fn toy_saddle_inequality() {
        let p = make_toy_separable();
        // f(0, y) = -y^2 <= 0 <= x^2 = f(x, 0)
        for v in [-2.0, -0.5, 0.0, 1.5] {
            assert!(p.f_eval(&Vector::zeros(1), &Vector::from(vec![v])) <= 0.0);
            assert!(p.f_eval(&Vector::from(vec![v]), &Vector::zeros(1)) >= 0.0);
        }
    }

    #[test]
    fn toy_prox_steps() {
        let p = make_toy_separable();
        let y1 = p
            .prox_in_y(&Vector::zeros(1), &Vector::from(vec![1.0]), 0.5)
            .unwrap();
        assert!((y1[0] - 0.5).abs() < 1e-15);
        let x1 = p.prox_in_x(&Vector::zeros(1), &Vector::zeros(1), 0.5).unwrap();
        assert_eq!(x1[0], 0.0);
    }

    #[test]
    fn toy_bilinear_agrees_with_generic_prox() {
        let generic = make_toy_separable();
        let bilinear = make_toy_bilinear();
        for (xc, yc, step) in [(1.0, 1.0, 0.5), (-0.7, 0.3, 0.1), (2.0, -2.0, 3.0)] {
            let xb = Vector::from(vec![xc]);
            let yb = Vector::from(vec![yc]);
            let gy = generic.prox_in_y(&xb, &yb, step).unwrap();
            let by = bilinear.prox_in_y(&xb, &yb, step).unwrap();
            assert!(gy.dist(&by) <= 1e-10);
            let gx = generic.prox_in_x(&yb, &xb, step).unwrap();
            let bx = bilinear.prox_in_x(&yb, &xb, step).unwrap();
            assert!(gx.dist(&bx) <= 1e-10);
        }
    }

    #[test]
    fn saddle_inequality_sampled_at_references() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let problems: Vec<BilinearSaddle> = vec![
            game_2x2(),
            make_toy_bilinear(),
            {
                let (a, b, c) = generate_feasible_lp(3, 8, 3).unwrap();
                make_lp_lagrangian(&a, &b, &c).unwrap()
            },
            {
                let mut inner = ChaCha8Rng::seed_from_u64(6);
                let entries: Vec<f64> = (0..18).map(|_| inner.sample(StandardNormal)).collect();
                let a = LinearMap::new(6, 3, entries).unwrap();
                let b = Vector::new((0..6).map(|_| inner.sample(StandardNormal)).collect());
                make_lasso_saddle(&a, &b, 1.0).unwrap()
            },
        ];
        for p in &problems {
            let r = p.reference().expect("gallery reference");
            let f_star = p.f_eval(&r.x, &r.y);
            for _ in 0..100 {
                let x = p.x_set().sample(&mut rng);
                let y = p.y_set().sample(&mut rng);
                // f(x*, y) <= f(x*, y*) <= f(x, y*)
                assert!(p.f_eval(&r.x, &y) <= f_star + 1e-8, "{}", p.label());
                assert!(p.f_eval(&x, &r.y) >= f_star - 1e-8, "{}", p.label());
                // Equivalent two-point form.
                assert!(p.f_eval(&r.x, &y) - p.f_eval(&x, &r.y) <= 1e-8);
            }
        }
    }

    #[test]
    fn six_point_telescoping_identity() {
        // For bilinear f, the alternating six-term sum collapses to two
        // coupling inner products.
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let (a, b, c) = generate_feasible_lp(5, 6, 3).unwrap();
        let p = make_lp_lagrangian(&a, &b, &c).unwrap();
        let k = p.coupling();
        for _ in 0..50 {
            let us: Vec<Vector> = (0..3)
                .map(|_| Vector::new((0..3).map(|_| rng.random_range(-2.0..2.0)).collect()))
                .collect();
            let vs: Vec<Vector> = (0..3)
                .map(|_| Vector::new((0..6).map(|_| rng.random_range(-2.0..2.0)).collect()))
                .collect();
            let f = |u: &Vector, v: &Vector| p.f_eval(u, v);
            let lhs = f(&us[0], &vs[0]) - f(&us[0], &vs[1]) + f(&us[1], &vs[1])
                - f(&us[1], &vs[2])
                + f(&us[2], &vs[2])
                - f(&us[2], &vs[0]);
            let rhs = k
                .apply(&us[0].sub(&us[1]))
                .unwrap()
                .dot(&vs[2].sub(&vs[1]))
                - k.apply(&us[0].sub(&us[2])).unwrap().dot(&vs[2].sub(&vs[0]));
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn problem_spec_json_round_trip() {
        let spec = ProblemSpec::MatrixGame { payoff: vec![vec![1.0, 2.0], vec![3.0, 1.0]] };
        let rebuilt = ProblemSpec::from_json(&spec.to_json()).unwrap();
        let p = rebuilt.build(0).unwrap();
        assert!((p.reference().unwrap().value - 5.0 / 3.0).abs() < 1e-12);

        let lp = ProblemSpec::from_json(r#"{"kind":"lp","m":6,"n":2,"seed":3}"#).unwrap();
        let p = lp.build(0).unwrap();
        assert_eq!(p.dims(), (2, 6));

        assert!(ProblemSpec::from_json(r#"{"kind":"lp","a":[[1.0]]}"#)
            .unwrap()
            .build(0)
            .is_err());
    }

    #[test]
    fn seeded_start_is_feasible_and_deterministic() {
        let p = game_2x2();
        let (x1, y1) = seeded_start(p.x_set(), p.y_set(), 7).unwrap();
        let (x2, y2) = seeded_start(p.x_set(), p.y_set(), 7).unwrap();
        assert_eq!(x1.as_slice(), x2.as_slice());
        assert_eq!(y1.as_slice(), y2.as_slice());
        assert!(p.x_set().contains(&x1, 1e-9));
        assert!(p.y_set().contains(&y1, 1e-9));
    }
}
