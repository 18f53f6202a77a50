//! Selector strings for problems and schedules.

use std::collections::HashMap;

use apmm::diagnostics::{GapSet, GapSpec};
use apmm::linops::LinearMap;
use apmm::problems::{BilinearSaddle, ProblemSpec, SaddleProblem};
use apmm::prox::{ConvexSet, DYKSTRA_MAX_SWEEPS, DYKSTRA_TOL};
use apmm::schedule::ParamSchedule;

use crate::Failure;

/// Parse `key=value` options after a selector prefix.
fn parse_options(body: &str, selector: &str) -> Result<HashMap<String, String>, Failure> {
    let mut out = HashMap::new();
    for part in body.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            Failure::Config(format!("`{selector}`: expected key=value, got `{part}`"))
        })?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn option_num<T: std::str::FromStr>(
    options: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    options
        .get(key)
        .map(|v| v.parse::<T>().map_err(|e| Failure::Config(format!("bad {key} `{v}`: {e}"))))
        .transpose()
}

/// Turn a problem selector into its [`ProblemSpec`].
pub fn parse_problem(selector: &str) -> Result<ProblemSpec, Failure> {
    if selector == "game2x2" {
        return Ok(ProblemSpec::MatrixGame { payoff: vec![vec![1.0, 2.0], vec![3.0, 1.0]] });
    }
    if selector == "toy" {
        return Ok(ProblemSpec::Toy);
    }
    if let Some(path) = selector.strip_prefix("game:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read payoff matrix {path}: {e}")))?;
        let c = LinearMap::parse_text(&text).map_err(Failure::config)?;
        let payoff = (0..c.rows())
            .map(|r| (0..c.cols()).map(|j| c.get(r, j)).collect())
            .collect();
        return Ok(ProblemSpec::MatrixGame { payoff });
    }
    if selector == "lp" || selector.starts_with("lp:") {
        let options = parse_options(selector.strip_prefix("lp:").unwrap_or(""), selector)?;
        return Ok(ProblemSpec::Lp {
            a: None,
            b: None,
            c: None,
            m: option_num(&options, "m")?,
            n: option_num(&options, "n")?,
            seed: option_num(&options, "seed")?,
        });
    }
    if selector == "lasso" || selector.starts_with("lasso:") {
        let options = parse_options(selector.strip_prefix("lasso:").unwrap_or(""), selector)?;
        return Ok(ProblemSpec::Lasso {
            a: None,
            b: None,
            gamma: option_num(&options, "gamma")?.unwrap_or(1.0),
            m: option_num(&options, "m")?,
            n: option_num(&options, "n")?,
            seed: option_num(&options, "seed")?,
        });
    }
    let path = selector.strip_prefix("file:").unwrap_or(selector);
    if path.ends_with(".json") || selector.starts_with("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read problem file {path}: {e}")))?;
        return ProblemSpec::from_json(&text).map_err(Failure::config);
    }
    Err(Failure::Config(format!(
        "unknown problem selector `{selector}` (expected game2x2, toy, lp[:...], lasso[:...], game:<path>, or a .json file)"
    )))
}

/// Build the problem and its trace identity string.
pub fn build_problem(selector: &str, seed: u64) -> Result<(BilinearSaddle, String), Failure> {
    let spec = parse_problem(selector)?;
    let identity = spec.identity();
    let problem = spec.build(seed).map_err(Failure::config)?;
    Ok((problem, identity))
}

/// Parse a schedule selector against the problem's operator norm.
///
/// `cp:<eta>` on a zero-norm coupling (the toy problem) falls back to the
/// explicit constant steps `tau = sigma = 1/eta`, which is what the
/// zero-norm error asks callers to do.
pub fn build_schedule(selector: &str, norm_k: f64) -> Result<ParamSchedule, Failure> {
    match selector {
        "paper" | "paper_experiment" => {
            ParamSchedule::paper_experiment(norm_k).map_err(Failure::config)
        }
        "theorem" | "theorem_exact" => ParamSchedule::theorem_exact(norm_k).map_err(Failure::config),
        _ => {
            if let Some(eta_text) = selector.strip_prefix("cp:") {
                let eta: f64 = eta_text
                    .parse()
                    .map_err(|e| Failure::Config(format!("bad cp eta `{eta_text}`: {e}")))?;
                if eta <= 0.0 {
                    return Err(Failure::Config(format!("cp eta must be positive, got {eta}")));
                }
                return if norm_k == 0.0 {
                    ParamSchedule::constant_steps(1.0 / eta, 1.0 / eta, 1.0, 0.0)
                        .map_err(Failure::config)
                } else {
                    ParamSchedule::constant_cp(eta, norm_k).map_err(Failure::config)
                };
            }
            if let Some(rest) = selector.strip_prefix("constant:") {
                let options = parse_options(rest, selector)?;
                let need = |key: &str| -> Result<f64, Failure> {
                    option_num(&options, key)?
                        .ok_or_else(|| Failure::Config(format!("constant schedule needs {key}=")))
                };
                return ParamSchedule::constant_steps(
                    need("tau")?,
                    need("sigma")?,
                    need("alpha")?,
                    need("beta")?,
                )
                .map_err(Failure::config);
            }
            if let Some(path) = selector.strip_prefix("file:") {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Failure::Config(format!("cannot read schedule table {path}: {e}"))
                })?;
                return ParamSchedule::parse_table_csv(&text).map_err(Failure::config);
            }
            Err(Failure::Config(format!(
                "unknown schedule selector `{selector}` (expected paper, theorem, cp:<eta>, constant:tau=..,sigma=..,alpha=..,beta=.., or file:<path>)"
            )))
        }
    }
}

/// Rebuild the schedule a trace was produced with from its metadata label.
pub fn schedule_from_label(label: &str, norm_k: f64) -> Result<ParamSchedule, Failure> {
    if label == "custom" {
        return Err(Failure::Config(
            "trace was produced with a custom schedule table; certify needs the original \
             file (re-run solve with file:<path> and keep the table)"
                .into(),
        ));
    }
    build_schedule(label, norm_k)
}

/// Assemble gap evaluation sets for a problem: simplices where the blocks
/// are simplices, boxes around the reference on affine blocks, point
/// grids on the 1-D toy blocks, and reference singletons otherwise.
pub fn gap_spec_for(problem: &BilinearSaddle, radius: f64) -> Result<GapSpec, Failure> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Failure::Config(format!("gap box radius must be positive, got {radius}")));
    }
    let (dim_x, dim_y) = problem.dims();
    if let (ConvexSet::Simplex(_), ConvexSet::Simplex(_)) = (problem.x_set(), problem.y_set()) {
        return Ok(GapSpec { b1: GapSet::Simplex(dim_x), b2: GapSet::Simplex(dim_y) });
    }
    let reference = problem.reference().ok_or_else(|| {
        Failure::Config("gap over unbounded sets needs a reference saddle to center on".into())
    })?;
    if dim_x == 1 && dim_y == 1 {
        // 1-D blocks (the toy problem): dense symmetric grids capture the
        // non-affine values exactly enough at 201 points.
        let grid = |center: f64| -> GapSet {
            let count = 201;
            GapSet::Points(
                (0..count)
                    .map(|i| {
                        apmm::linops::Vector::from(vec![
                            center - radius + 2.0 * radius * i as f64 / (count - 1) as f64,
                        ])
                    })
                    .collect(),
            )
        };
        return Ok(GapSpec { b1: grid(reference.x[0]), b2: grid(reference.y[0]) });
    }
    let b1 = match problem.x_set() {
        ConvexSet::Whole(_) if problem.x_block_split().is_none() => {
            GapSet::box_around(&reference.x, radius).map_err(Failure::config)?
        }
        // Non-affine g (the l1 block) or constrained x: fall back to the
        // reference singleton, which still certifies via the saddle lemma.
        _ => GapSet::Points(vec![reference.x.clone()]),
    };
    let b2 = match problem.y_set() {
        ConvexSet::NonNeg(_) => {
            GapSet::box_around_nonneg(&reference.y, radius).map_err(Failure::config)?
        }
        ConvexSet::Whole(_) => GapSet::box_around(&reference.y, radius).map_err(Failure::config)?,
        _ => GapSet::Points(vec![reference.y.clone()]),
    };
    Ok(GapSpec { b1, b2 })
}

/// The inexact-prox disclosure recorded in trace metadata for problems
/// whose feasible set is projected by Dykstra sweeps.
pub fn prox_note_for(problem: &BilinearSaddle) -> Option<String> {
    match problem.y_set() {
        ConvexSet::Polyhedron { .. } => Some(format!(
            "dual-ball projection via Dykstra, tol={DYKSTRA_TOL:e}, max_sweeps={DYKSTRA_MAX_SWEEPS}"
        )),
        _ => None,
    }
}
