//! The alternating proximity mapping engine.
//!
//! One iteration runs four updates in order: the y-block prox at the
//! extrapolated `x_bar^k`, the y extrapolation with `beta_k`, the x-block
//! prox at the fresh `y_bar^{k+1}`, and the x extrapolation with
//! `alpha_k`. Initialization sets `x_bar^0 = x^0`, `y_bar^0 = y^0`
//! (equivalently `x^{-1} = x^0`).
//!
//! [`run`] drives the steps off a [`ParamSchedule`], records one
//! [`IterateRecord`] per iteration (values are taken after both blocks
//! update, matching plots indexed from `k = 1`), and aborts with the
//! last good trace if an iterate turns non-finite. There is no stopping
//! rule beyond the iteration budget unless a residual threshold is
//! explicitly configured.

use crate::diagnostics::{partial_gap, GapSpec};
use crate::linops::Vector;
use crate::problems::SaddleProblem;
use crate::prox::FEASIBILITY_TOL;
use crate::schedule::{ParamSchedule, StepParams};
use crate::trace::{IterateTrace, TraceMetadata};
use crate::{Error, Result};

#[cfg(doc)]
use crate::problems::{BilinearSaddle, GenericSaddle};

/// Mutable per-run state: current/previous iterates, extrapolated points,
/// and running ergodic sums.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub k: usize,
    pub x: Vector,
    pub y: Vector,
    pub x_prev: Vector,
    pub y_prev: Vector,
    pub x_bar: Vector,
    pub y_bar: Vector,
    pub xhat_sum: Vector,
    pub yhat_sum: Vector,
}

impl SolverState {
    pub fn new(x0: Vector, y0: Vector) -> Self {
        let xhat_sum = Vector::zeros(x0.dim());
        let yhat_sum = Vector::zeros(y0.dim());
        SolverState {
            k: 0,
            x_prev: x0.clone(),
            y_prev: y0.clone(),
            x_bar: x0.clone(),
            y_bar: y0.clone(),
            x: x0,
            y: y0,
            xhat_sum,
            yhat_sum,
        }
    }

    /// Ergodic average of `x^1..x^k` (the start point itself before any
    /// step has run).
    pub fn ergodic_x(&self) -> Vector {
        if self.k == 0 {
            self.x.clone()
        } else {
            self.xhat_sum.scale(1.0 / self.k as f64)
        }
    }

    pub fn ergodic_y(&self) -> Vector {
        if self.k == 0 {
            self.y.clone()
        } else {
            self.yhat_sum.scale(1.0 / self.k as f64)
        }
    }
}

/// One full iteration of the alternating scheme on any [`SaddleProblem`].
pub fn step_problem<P: SaddleProblem + ?Sized>(
    problem: &P,
    state: &mut SolverState,
    params: StepParams,
) -> Result<()> {
    let at_iteration = |e: Error, k: usize| Error::ProxAtIteration {
        iteration: k,
        source: Box::new(e),
    };

    let y_next = problem
        .prox_in_y(&state.x_bar, &state.y, params.sigma)
        .map_err(|e| at_iteration(e, state.k))?;
    let y_bar_next = y_next.axpy(params.beta, &y_next.sub(&state.y));
    let x_next = problem
        .prox_in_x(&y_bar_next, &state.x, params.tau)
        .map_err(|e| at_iteration(e, state.k))?;
    let x_bar_next = x_next.axpy(params.alpha, &x_next.sub(&state.x));

    state.x_prev = std::mem::replace(&mut state.x, x_next);
    state.y_prev = std::mem::replace(&mut state.y, y_next);
    state.x_bar = x_bar_next;
    state.y_bar = y_bar_next;
    state.xhat_sum.axpy_mut(1.0, &state.x);
    state.yhat_sum.axpy_mut(1.0, &state.y);
    state.k += 1;
    Ok(())
}

/// The scheme applied through direct block proximal maps of `f`.
pub fn step_generic(
    problem: &crate::problems::GenericSaddle,
    state: &mut SolverState,
    params: StepParams,
) -> Result<()> {
    step_problem(problem, state, params)
}

/// The closed-form path for bilinear couplings: the y update becomes
/// `Prox_{sigma h}(sigma K x_bar + y)` and the x update
/// `Prox_{tau g}(x - tau K^T y_bar)`; iterates coincide with
/// [`step_generic`] on the induced problem.
pub fn step_bilinear(
    problem: &crate::problems::BilinearSaddle,
    state: &mut SolverState,
    params: StepParams,
) -> Result<()> {
    step_problem(problem, state, params)
}

/// Values recorded after iteration `k` (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    /// `f(x^k, y^k)`.
    pub f_xy: f64,
    /// `f` at the ergodic averages of `x^1..x^k`, `y^1..y^k`.
    pub f_hat: f64,
    /// `|x^{k-1} - x^k|`.
    pub res_x: f64,
    pub res_y: f64,
    /// Distances to the reference saddle, when one is known.
    pub dist_x: Option<f64>,
    pub dist_y: Option<f64>,
    /// Partial primal-dual gap at `(x^k, y^k)`, when configured.
    pub gap: Option<f64>,
    pub tau: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Why a run stopped before its budget.
#[derive(Clone, Debug, PartialEq)]
pub enum RunAbort {
    /// An iterate or recorded value turned NaN/inf.
    NonFinite { iteration: usize },
    /// A prox oracle failed (e.g. Dykstra sweep exhaustion).
    Prox { iteration: usize, message: String },
}

impl RunAbort {
    pub fn describe(&self) -> String {
        match self {
            RunAbort::NonFinite { iteration } => {
                format!("non-finite value at iteration {iteration}")
            }
            RunAbort::Prox { iteration, message } => {
                format!("prox failure at iteration {iteration}: {message}")
            }
        }
    }
}

/// Diagnostics recorded during a run.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    /// Record distances to the reference saddle (when the problem has one).
    pub record_distances: bool,
    /// Evaluate the partial gap at every iterate (bilinear problems only;
    /// ignored otherwise).
    pub gap: Option<GapSpec>,
    /// Stop early once `max(res_x, res_y)` falls below this threshold.
    /// Off by default: the experiments run fixed budgets.
    pub residual_stop: Option<f64>,
    /// Retain full iterate histories (needed by the distance certificate).
    pub keep_iterates: bool,
}

impl RunConfig {
    pub fn with_distances() -> Self {
        RunConfig { record_distances: true, ..Default::default() }
    }
}

/// Everything a finished run produces.
#[derive(Debug)]
pub struct RunOutput {
    pub trace: IterateTrace,
    pub state: SolverState,
    pub abort: Option<RunAbort>,
    /// `x^0..x^N` when `keep_iterates` was set.
    pub x_history: Option<Vec<Vector>>,
    pub y_history: Option<Vec<Vector>>,
}

impl RunOutput {
    pub fn final_record(&self) -> Option<&IterateRecord> {
        self.trace.records.last()
    }
}

/// Run `iters` iterations from `(x0, y0)` (projected onto the feasible
/// sets on entry if needed). Deterministic given its inputs.
pub fn run<P: SaddleProblem + ?Sized>(
    problem: &P,
    schedule: &ParamSchedule,
    x0: &Vector,
    y0: &Vector,
    iters: usize,
    config: &RunConfig,
) -> Result<RunOutput> {
    let (dim_x, dim_y) = problem.dims();
    if x0.dim() != dim_x {
        return Err(Error::DimensionMismatch { context: "run x0", expected: dim_x, actual: x0.dim() });
    }
    if y0.dim() != dim_y {
        return Err(Error::DimensionMismatch { context: "run y0", expected: dim_y, actual: y0.dim() });
    }
    let x0 = if problem.x_set().contains(x0, FEASIBILITY_TOL) {
        x0.clone()
    } else {
        problem.x_set().project(x0)?
    };
    let y0 = if problem.y_set().contains(y0, FEASIBILITY_TOL) {
        y0.clone()
    } else {
        problem.y_set().project(y0)?
    };

    let reference = problem.reference();
    let mut state = SolverState::new(x0, y0);
    let mut records = Vec::with_capacity(iters);
    let mut abort = None;
    let mut x_history = config.keep_iterates.then(|| vec![state.x.clone()]);
    let mut y_history = config.keep_iterates.then(|| vec![state.y.clone()]);

    for k in 0..iters {
        let params = schedule.params_at(k);
        if let Err(err) = step_problem(problem, &mut state, params) {
            abort = Some(RunAbort::Prox { iteration: k + 1, message: err.to_string() });
            break;
        }

        if !(state.x.is_finite() && state.y.is_finite()) {
            abort = Some(RunAbort::NonFinite { iteration: state.k });
            break;
        }
        let f_xy = problem.f_eval(&state.x, &state.y);
        let f_hat = problem.f_eval(&state.ergodic_x(), &state.ergodic_y());
        if !(f_xy.is_finite() && f_hat.is_finite()) {
            abort = Some(RunAbort::NonFinite { iteration: state.k });
            break;
        }

        let gap = match (&config.gap, problem.as_bilinear()) {
            (Some(spec), Some(bilinear)) => Some(partial_gap(bilinear, &state.x, &state.y, spec)?),
            _ => None,
        };
        let (dist_x, dist_y) = match (config.record_distances, reference) {
            (true, Some(r)) => (Some(state.x.dist(&r.x)), Some(state.y.dist(&r.y))),
            _ => (None, None),
        };
        let record = IterateRecord {
            k: state.k,
            f_xy,
            f_hat,
            res_x: state.x_prev.dist(&state.x),
            res_y: state.y_prev.dist(&state.y),
            dist_x,
            dist_y,
            gap,
            tau: params.tau,
            sigma: params.sigma,
            alpha: params.alpha,
            beta: params.beta,
        };
        if let Some(h) = x_history.as_mut() {
            h.push(state.x.clone());
        }
        if let Some(h) = y_history.as_mut() {
            h.push(state.y.clone());
        }
        let stop = config
            .residual_stop
            .is_some_and(|threshold| record.res_x.max(record.res_y) < threshold);
        records.push(record);
        if stop {
            break;
        }
    }

    let metadata = TraceMetadata {
        problem: problem.label().to_string(),
        schedule: schedule.label(),
        seed: None,
        iters,
        norm_k: problem.as_bilinear().map(|b| b.operator_norm()),
        prox_note: None,
        reference_value: reference.map(|r| r.value),
        reference_provenance: reference.map(|r| r.provenance.as_str().to_string()),
        aborted: abort.as_ref().map(RunAbort::describe),
    };

    Ok(RunOutput {
        trace: IterateTrace { metadata, records },
        state,
        abort,
        x_history,
        y_history,
    })
}
