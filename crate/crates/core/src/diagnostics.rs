//! Convergence certificates and independent reference solvers.
//!
//! The certificates are numeric checks of the convergence theory: the
//! partial primal-dual gap over compact evaluation sets, the per-iteration
//! weighted-distance inequality, and direct sampling of the saddle
//! inequality. The reference solvers are deliberately brute-force
//! (vertex enumeration, proximal gradient to a tight duality gap, 2x2
//! closed forms); they are the ground truth the solver is measured
//! against at desk scale, never the production path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linops::{LinearMap, Vector};
use crate::problems::{BilinearSaddle, SaddleProblem};
use crate::schedule::ParamSchedule;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Partial primal-dual gap
// ---------------------------------------------------------------------------

/// A compact evaluation set for one side of the partial gap.
#[derive(Clone, Debug)]
pub enum GapSet {
    /// The probability simplex of the block's dimension.
    Simplex(usize),
    /// Axis-aligned box `[lo, hi]`. The extremum rule used here is exact
    /// only for functions affine along the box; [`partial_gap`] verifies
    /// that and rejects non-affine structure.
    Box { lo: Vector, hi: Vector },
    /// An explicit finite point list, extremized by enumeration.
    Points(Vec<Vector>),
}

impl GapSet {
    pub fn box_around(center: &Vector, radius: f64) -> Result<GapSet> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidGapSet(format!(
                "box radius must be positive and finite, got {radius}"
            )));
        }
        let lo = Vector::new(center.iter().map(|&c| c - radius).collect());
        let hi = Vector::new(center.iter().map(|&c| c + radius).collect());
        Ok(GapSet::Box { lo, hi })
    }

    /// Box around `center` intersected with the nonnegative orthant.
    pub fn box_around_nonneg(center: &Vector, radius: f64) -> Result<GapSet> {
        let GapSet::Box { lo, hi } = GapSet::box_around(center, radius)? else {
            unreachable!()
        };
        let lo = Vector::new(lo.iter().map(|&v| v.max(0.0)).collect());
        let hi = Vector::new(hi.iter().map(|&v| v.max(0.0)).collect());
        Ok(GapSet::Box { lo, hi })
    }

    fn validate(&self, dim: usize, side: &str) -> Result<()> {
        match self {
            GapSet::Simplex(d) => {
                if *d != dim {
                    return Err(Error::InvalidGapSet(format!(
                        "{side}: simplex dimension {d} does not match block dimension {dim}"
                    )));
                }
            }
            GapSet::Box { lo, hi } => {
                if lo.dim() != dim || hi.dim() != dim {
                    return Err(Error::InvalidGapSet(format!(
                        "{side}: box dimension mismatch (block dimension {dim})"
                    )));
                }
                for i in 0..dim {
                    if !(lo[i].is_finite() && hi[i].is_finite()) {
                        return Err(Error::InvalidGapSet(format!("{side}: box must be bounded")));
                    }
                    if lo[i] > hi[i] {
                        return Err(Error::InvalidGapSet(format!(
                            "{side}: empty box (lo > hi at coordinate {i})"
                        )));
                    }
                }
            }
            GapSet::Points(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidGapSet(format!("{side}: empty point list")));
                }
                for p in points {
                    if p.dim() != dim {
                        return Err(Error::InvalidGapSet(format!(
                            "{side}: point dimension {} does not match block dimension {dim}",
                            p.dim()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Evaluation sets for the partial primal-dual gap: `b1` for the x'
/// infimum, `b2` for the y' supremum.
#[derive(Clone, Debug)]
pub struct GapSpec {
    pub b1: GapSet,
    pub b2: GapSet,
}

/// Extremize `value(v)` over the set, exactly for the structures the rule
/// covers: vertices of a simplex, sign-chosen corners of a box (affine
/// values only), or enumeration of a point list.
fn extremize(
    set: &GapSet,
    value: &dyn Fn(&Vector) -> f64,
    maximize: bool,
) -> Result<f64> {
    let best = |a: f64, b: f64| if maximize { a.max(b) } else { a.min(b) };
    match set {
        GapSet::Simplex(d) => {
            let mut out = f64::NAN;
            for j in 0..*d {
                let mut vertex = Vector::zeros(*d);
                vertex[j] = 1.0;
                let v = value(&vertex);
                out = if out.is_nan() { v } else { best(out, v) };
            }
            Ok(out)
        }
        GapSet::Box { lo, hi } => {
            let dim = lo.dim();
            let mid = Vector::new((0..dim).map(|i| 0.5 * (lo[i] + hi[i])).collect());
            let base = value(&mid);
            let mut corner = mid.clone();
            for j in 0..dim {
                let mut plus = mid.clone();
                plus[j] += 1.0;
                let mut minus = mid.clone();
                minus[j] -= 1.0;
                let fp = value(&plus);
                let fm = value(&minus);
                let second_difference = fp + fm - 2.0 * base;
                let scale = base.abs().max(fp.abs()).max(fm.abs()).max(1.0);
                if second_difference.abs() > 1e-9 * scale {
                    return Err(Error::InvalidGapSet(
                        "box extremum rule needs values affine along the box; use a point list"
                            .into(),
                    ));
                }
                let slope = fp - base;
                let take_hi = (slope >= 0.0) == maximize;
                corner[j] = if take_hi { hi[j] } else { lo[j] };
            }
            Ok(value(&corner))
        }
        GapSet::Points(points) => {
            let mut out = value(&points[0]);
            for p in &points[1..] {
                out = best(out, value(p));
            }
            Ok(out)
        }
    }
}

/// Partial primal-dual gap
/// `G(x, y) = sup_{y' in B2} f(x, y') - inf_{x' in B1} f(x', y)`.
///
/// Nonnegative whenever a saddle point lies in `B1 x B2`, and zero at that
/// saddle point.
pub fn partial_gap(
    problem: &BilinearSaddle,
    x: &Vector,
    y: &Vector,
    spec: &GapSpec,
) -> Result<f64> {
    let (dim_x, dim_y) = problem.dims();
    spec.b1.validate(dim_x, "B1")?;
    spec.b2.validate(dim_y, "B2")?;
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidInput("partial_gap: non-finite point".into()));
    }
    let sup = extremize(&spec.b2, &|yp: &Vector| problem.f_eval(x, yp), true)?;
    let inf = extremize(&spec.b1, &|xp: &Vector| problem.f_eval(xp, y), false)?;
    Ok(sup - inf)
}

// ---------------------------------------------------------------------------
// Weighted-distance (Lyapunov) certificate
// ---------------------------------------------------------------------------

/// Per-iteration evaluation of the weighted-distance inequality
///
/// ```text
/// |x* - x^{k+1}|^2 / (2 tau_{k+1})
///   + (1/(2 sigma_{k+1}) - |K|^2 tau_k / 2) |y* - y^{k+1}|^2
///   + sum_{i<k}   (1/(2 tau_i)   - |K|) |x^i - x^{i+1}|^2
///   + sum_{i<=k}  (1/(2 sigma_i) - |K|) |y^i - y^{i+1}|^2
///   <= |x* - x^0|^2 / (2 tau_0) + |y* - y^0|^2 / (2 sigma_0)
/// ```
///
/// which holds when the schedule satisfies both couplings and the tail
/// conditions.
#[derive(Clone, Debug)]
pub struct LyapunovReport {
    /// `(lhs, rhs)` for each k (rhs is constant).
    pub per_k: Vec<(f64, f64)>,
    pub violations: usize,
    /// Maximum of `lhs - rhs` over k (negative when the certificate holds
    /// with room to spare).
    pub max_excess: f64,
    pub tolerance: f64,
}

impl LyapunovReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// `#`-metadata plus per-index `(lhs, rhs)` rows, in the same
    /// convention as solver traces.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str("# apmm-distance-certificate-v1\n");
        s.push_str(&format!("# violations: {}\n", self.violations));
        s.push_str(&format!("# max_excess: {:.16e}\n", self.max_excess));
        s.push_str(&format!("# tolerance: {:.16e}\n", self.tolerance));
        s.push_str("k,lhs,rhs\n");
        for (k, (lhs, rhs)) in self.per_k.iter().enumerate() {
            s.push_str(&format!("{k},{lhs:.16e},{rhs:.16e}\n"));
        }
        s
    }
}

/// Evaluate the inequality along recorded iterates `x^0..x^N`, `y^0..y^N`.
pub fn lyapunov_certificate(
    norm_k: f64,
    xs: &[Vector],
    ys: &[Vector],
    schedule: &ParamSchedule,
    x_star: &Vector,
    y_star: &Vector,
) -> Result<LyapunovReport> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "lyapunov needs matched histories with at least two points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let p0 = schedule.params_at(0);
    let rhs = x_star.dist(&xs[0]).powi(2) / (2.0 * p0.tau)
        + y_star.dist(&ys[0]).powi(2) / (2.0 * p0.sigma);
    let tolerance = 1e-7 * (1.0 + rhs);

    let mut per_k = Vec::with_capacity(xs.len() - 1);
    let mut violations = 0usize;
    let mut max_excess = f64::NEG_INFINITY;
    let mut x_residual_sum = 0.0; // sum over i <= k-1
    let mut y_residual_sum = 0.0; // sum over i <= k

    for k in 0..xs.len() - 1 {
        let here = schedule.params_at(k);
        let next = schedule.params_at(k + 1);
        if k >= 1 {
            let prev = schedule.params_at(k - 1);
            x_residual_sum +=
                (1.0 / (2.0 * prev.tau) - norm_k) * xs[k - 1].dist(&xs[k]).powi(2);
        }
        y_residual_sum += (1.0 / (2.0 * here.sigma) - norm_k) * ys[k].dist(&ys[k + 1]).powi(2);

        let lhs = x_star.dist(&xs[k + 1]).powi(2) / (2.0 * next.tau)
            + (1.0 / (2.0 * next.sigma) - norm_k * norm_k * here.tau / 2.0)
                * y_star.dist(&ys[k + 1]).powi(2)
            + x_residual_sum
            + y_residual_sum;

        let excess = lhs - rhs;
        max_excess = max_excess.max(excess);
        if excess > tolerance {
            violations += 1;
        }
        per_k.push((lhs, rhs));
    }

    Ok(LyapunovReport { per_k, violations, max_excess, tolerance })
}

/// Same certificate resolved against a problem's reference saddle point.
pub fn lyapunov_for_problem(
    problem: &BilinearSaddle,
    xs: &[Vector],
    ys: &[Vector],
    schedule: &ParamSchedule,
) -> Result<LyapunovReport> {
    let reference = problem
        .reference()
        .ok_or(Error::MissingReference("lyapunov_certificate"))?;
    lyapunov_certificate(
        problem.operator_norm(),
        xs,
        ys,
        schedule,
        &reference.x,
        &reference.y,
    )
}

// ---------------------------------------------------------------------------
// Saddle certification by sampling
// ---------------------------------------------------------------------------

/// Result of sampling the saddle inequality at a candidate pair.
#[derive(Clone, Debug)]
pub struct SaddleCertificate {
    /// `max f(x_cand, y) - f(x, y_cand)` over sampled feasible `(x, y)`;
    /// nonpositive (up to tolerance) iff the candidate is a saddle point
    /// with respect to the sampled region.
    pub max_violation: f64,
    pub samples: usize,
    /// Partial gap at the candidate over the natural compact sets, when
    /// the problem has them (both blocks simplices).
    pub gap_at_candidate: Option<f64>,
}

/// Sample feasible pairs and measure how badly the candidate violates
/// `f(x_cand, y) - f(x, y_cand) <= 0`.
pub fn certify_saddle<P: SaddleProblem + ?Sized>(
    problem: &P,
    candidate_x: &Vector,
    candidate_y: &Vector,
    samples: usize,
    seed: u64,
) -> SaddleCertificate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_violation = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x = problem.x_set().sample(&mut rng);
        let y = problem.y_set().sample(&mut rng);
        let violation = problem.f_eval(candidate_x, &y) - problem.f_eval(&x, candidate_y);
        max_violation = max_violation.max(violation);
    }

    let gap_at_candidate = problem.as_bilinear().and_then(|bilinear| {
        use crate::prox::ConvexSet;
        let (dim_x, dim_y) = bilinear.dims();
        match (bilinear.x_set(), bilinear.y_set()) {
            (ConvexSet::Simplex(_), ConvexSet::Simplex(_)) => {
                let spec = GapSpec { b1: GapSet::Simplex(dim_x), b2: GapSet::Simplex(dim_y) };
                partial_gap(bilinear, candidate_x, candidate_y, &spec).ok()
            }
            _ => None,
        }
    });

    SaddleCertificate { max_violation, samples, gap_at_candidate }
}

// ---------------------------------------------------------------------------
// Reference solvers
// ---------------------------------------------------------------------------

/// Solution returned by [`lp_oracle_vertex_enum`].
#[derive(Clone, Debug)]
pub struct LpOracleSolution {
    pub x: Vector,
    pub value: f64,
    /// Dual multipliers recovered from the optimal active set, when the
    /// recovery succeeds with nonnegative entries.
    pub dual: Option<Vector>,
}

/// Solve `min c^T x  s.t.  Ax <= b` by enumerating all `n`-row active sets.
///
/// Exponential on purpose: the independent ground truth at desk scale
/// (`n <= 12`, `C(m, n) <= 1e6`). Requires a bounded feasible problem with
/// at least one vertex.
pub fn lp_oracle_vertex_enum(a: &LinearMap, b: &Vector, c: &Vector) -> Result<LpOracleSolution> {
    let (m, n) = (a.rows(), a.cols());
    if b.dim() != m || c.dim() != n {
        return Err(Error::LpOracle(format!(
            "shape mismatch: A is {m}x{n}, b has {}, c has {}",
            b.dim(),
            c.dim()
        )));
    }
    if n > 12 {
        return Err(Error::LpOracle(format!("n = {n} exceeds the desk-scale bound 12")));
    }
    if n > m {
        return Err(Error::LpOracle(format!("need m >= n for a vertex, got m={m} n={n}")));
    }
    let mut combinations = 1.0_f64;
    for i in 0..n {
        combinations *= (m - i) as f64 / (i + 1) as f64;
    }
    if combinations > 1e6 {
        return Err(Error::LpOracle(format!(
            "C({m},{n}) ~ {combinations:.3e} active sets exceed the desk-scale bound 1e6"
        )));
    }

    let feasibility_tol = 1e-9;
    let mut best: Option<(f64, Vector, Vec<usize>)> = None;
    for_each_combination(m, n, |active| {
        // Solve A_B x = b_B for the candidate vertex.
        let mut system = Vec::with_capacity(n * n);
        let mut rhs = Vec::with_capacity(n);
        for &row in active {
            for col in 0..n {
                system.push(a.get(row, col));
            }
            rhs.push(b[row]);
        }
        let Some(x) = solve_dense(system, n, rhs) else {
            return;
        };
        let x = Vector::new(x);
        let ax = a.apply(&x).expect("dims fixed");
        let feasible = (0..m).all(|r| ax[r] <= b[r] + feasibility_tol);
        if !feasible {
            return;
        }
        let value = c.dot(&x);
        let better = match &best {
            None => true,
            Some((v, _, _)) => value < *v,
        };
        if better {
            best = Some((value, x, active.to_vec()));
        }
    });

    let (value, x, active) = best.ok_or_else(|| {
        Error::LpOracle("no feasible vertex found (infeasible or degenerate problem)".into())
    })?;

    // Dual recovery: A_B^T y_B = -c with y_B >= 0, zeros off the active set.
    let mut system = Vec::with_capacity(n * n);
    for i in 0..n {
        for &row in &active {
            system.push(a.get(row, i));
        }
    }
    let neg_c: Vec<f64> = c.iter().map(|v| -v).collect();
    let dual = solve_dense(system, n, neg_c).and_then(|multipliers| {
        if multipliers.iter().any(|&v| v < -1e-9) {
            return None;
        }
        let mut y = Vector::zeros(m);
        for (i, &row) in active.iter().enumerate() {
            y[row] = multipliers[i].max(0.0);
        }
        Some(y)
    });

    Ok(LpOracleSolution { x, value, dual })
}

/// Visit all `n`-subsets of `0..m` in lexicographic order.
fn for_each_combination(m: usize, n: usize, mut visit: impl FnMut(&[usize])) {
    debug_assert!(n >= 1 && n <= m);
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        visit(&idx);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != m - n + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Gaussian elimination with partial pivoting on a row-major square system.
/// Returns `None` when the matrix is numerically singular.
fn solve_dense(mut a: Vec<f64>, n: usize, mut b: Vec<f64>) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = a[col * n + col].abs();
        for row in col + 1..n {
            let mag = a[row * n + col].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_mag < 1e-12 {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * x[k];
        }
        x[col] = acc / a[col * n + col];
    }
    Some(x)
}

/// Proximal-gradient reference for
/// `min_x (1/2)|Ax - b|^2 + gamma |x|_1`, iterated until the lasso duality
/// gap drops below `tol`. Returns the minimizer and the objective value,
/// which equals the saddle value of the corresponding Lagrangian.
pub fn lasso_oracle_ista(
    a: &LinearMap,
    b: &Vector,
    gamma: f64,
    tol: f64,
) -> Result<(Vector, f64)> {
    if tol <= 0.0 {
        return Err(Error::InvalidInput(format!("lasso oracle tol must be positive, got {tol}")));
    }
    const CAP: usize = 1_000_000;
    let lipschitz = a.operator_norm().powi(2);
    let step = if lipschitz > 0.0 { 1.0 / lipschitz } else { 0.0 };

    let mut x = Vector::zeros(a.cols());
    let mut gap = f64::INFINITY;
    for _ in 0..CAP {
        let residual = a.apply(&x)?.sub(b);
        let gradient = a.apply_adjoint(&residual)?;
        let primal = 0.5 * residual.dot(&residual) + gamma * x.norm_l1();

        // Dual candidate: scale the residual into the dual ball
        // { y : |A^T y|_inf <= gamma } and evaluate -|y|^2/2 - b^T y.
        let grad_inf = gradient.norm_inf();
        let scale = if grad_inf > gamma { gamma / grad_inf } else { 1.0 };
        let y = residual.scale(scale);
        let dual = -0.5 * y.dot(&y) - b.dot(&y);

        gap = primal - dual;
        if gap <= tol {
            return Ok((x, primal));
        }
        x = crate::prox::prox_l1(&x.axpy(-step, &gradient), gamma, step);
    }
    Err(Error::LassoOracleCap { cap: CAP, gap })
}

/// Closed-form value of a 2x2 matrix game `min_x max_y x^T C y` over
/// simplices: a pure-strategy scan first, then the mixed equalization
/// formula. Returns `(x*, y*, value)`.
pub fn game_value_2x2(c: &LinearMap) -> Result<(Vector, Vector, f64)> {
    if c.rows() != 2 || c.cols() != 2 {
        return Err(Error::InvalidInput(format!(
            "game_value_2x2 needs a 2x2 payoff, got {}x{}",
            c.rows(),
            c.cols()
        )));
    }
    // Pure saddle: entry that is the maximum of its row (column player
    // cannot improve) and the minimum of its column (row player cannot).
    for i in 0..2 {
        for j in 0..2 {
            let v = c.get(i, j);
            let row_max = c.get(i, 0).max(c.get(i, 1));
            let col_min = c.get(0, j).min(c.get(1, j));
            if v == row_max && v == col_min {
                let mut x = Vector::zeros(2);
                x[i] = 1.0;
                let mut y = Vector::zeros(2);
                y[j] = 1.0;
                return Ok((x, y, v));
            }
        }
    }
    // Mixed equilibrium: equalize both players' payoffs.
    let (a, b) = (c.get(0, 0), c.get(0, 1));
    let (cc, d) = (c.get(1, 0), c.get(1, 1));
    let denom = a - b - cc + d;
    debug_assert!(denom != 0.0, "no pure saddle implies a nonzero denominator");
    let x = Vector::from(vec![(d - cc) / denom, (a - b) / denom]);
    let y = Vector::from(vec![(d - b) / denom, (a - cc) / denom]);
    let value = (a * d - b * cc) / denom;
    Ok((x, y, value))
}

/// Inequality-form data of the row player's minimax LP for
/// `min_x max_j (C^T x)_j` over the simplex: variables `(x, t)`,
/// minimize `t` subject to `C^T x <= t 1`, `x >= 0`, `sum x = 1`.
pub fn game_minimax_lp(c: &LinearMap) -> (LinearMap, Vector, Vector) {
    let (m, n) = (c.rows(), c.cols());
    let vars = m + 1;
    let rows = n + m + 2;
    let mut entries = vec![0.0; rows * vars];
    let mut rhs = vec![0.0; rows];
    // (C^T x)_j - t <= 0
    for j in 0..n {
        for i in 0..m {
            entries[j * vars + i] = c.get(i, j);
        }
        entries[j * vars + m] = -1.0;
    }
    // -x_i <= 0
    for i in 0..m {
        entries[(n + i) * vars + i] = -1.0;
    }
    // sum x <= 1 and -sum x <= -1
    for i in 0..m {
        entries[(n + m) * vars + i] = 1.0;
        entries[(n + m + 1) * vars + i] = -1.0;
    }
    rhs[n + m] = 1.0;
    rhs[n + m + 1] = -1.0;
    let mut objective = vec![0.0; vars];
    objective[m] = 1.0;
    (
        LinearMap::new(rows, vars, entries).expect("nonempty"),
        Vector::new(rhs),
        Vector::new(objective),
    )
}

/// Reference saddle of a matrix game from the vertex-enumeration oracle on
/// both players' minimax LPs.
pub fn game_reference_via_lp(c: &LinearMap) -> Result<(Vector, Vector, f64)> {
    let (a_lp, b_lp, c_lp) = game_minimax_lp(c);
    let row = lp_oracle_vertex_enum(&a_lp, &b_lp, &c_lp)?;
    let x = clean_strategy(&row.x, c.rows());

    // Column player maximizes min_i (C y)_i; negating the payoff transposes
    // the roles, so reuse the same reformulation on -C^T.
    let neg_ct = c.transpose().scaled(-1.0);
    let (a_lp, b_lp, c_lp) = game_minimax_lp(&neg_ct);
    let col = lp_oracle_vertex_enum(&a_lp, &b_lp, &c_lp)?;
    let y = clean_strategy(&col.x, c.cols());

    Ok((x, y, row.value))
}

fn clean_strategy(z: &Vector, dim: usize) -> Vector {
    let mut s = Vector::new((0..dim).map(|i| z[i].max(0.0)).collect());
    let total: f64 = s.iter().sum();
    if total > 0.0 {
        s = s.scale(1.0 / total);
    }
    s
}
