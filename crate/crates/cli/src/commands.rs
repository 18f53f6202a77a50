//! The four subcommands.

use std::fmt::Write as _;
use std::path::PathBuf;

use apmm::diagnostics::{certify_saddle, lyapunov_for_problem, partial_gap};
use apmm::problems::{seeded_start, BilinearSaddle, SaddleProblem};
use apmm::schedule::ParamSchedule;
use apmm::solver::{run, RunConfig, RunOutput};
use apmm::trace::IterateTrace;

use crate::config::{resolve_iters, resolve_seed, ConfigFile, ScheduleField};
use crate::select;
use crate::{CommonRunArgs, Failure};

struct RunSetup {
    problem: BilinearSaddle,
    identity: String,
    iters: usize,
    seed: u64,
    file: ConfigFile,
}

fn resolve_run(common: &CommonRunArgs) -> Result<RunSetup, Failure> {
    let file = ConfigFile::load(common.config.as_deref())?;
    let selector = common
        .problem
        .clone()
        .or_else(|| file.problem.clone())
        .ok_or_else(|| Failure::Config("missing --problem (or `problem` in the config file)".into()))?;
    let seed = resolve_seed(common.seed, file.seed)?;
    let iters = resolve_iters(common.iters, file.iters)?;
    let (problem, identity) = select::build_problem(&selector, seed)?;
    Ok(RunSetup { problem, identity, iters, seed, file })
}

fn execute(
    setup: &RunSetup,
    schedule: &ParamSchedule,
    config: &RunConfig,
) -> Result<RunOutput, Failure> {
    let (x0, y0) = seeded_start(setup.problem.x_set(), setup.problem.y_set(), setup.seed)
        .map_err(Failure::config)?;
    let mut out = run(&setup.problem, schedule, &x0, &y0, setup.iters, config)
        .map_err(Failure::config)?;
    out.trace.metadata.problem = setup.identity.clone();
    out.trace.metadata.seed = Some(setup.seed);
    out.trace.metadata.prox_note = select::prox_note_for(&setup.problem);
    Ok(out)
}

fn summarize(out: &RunOutput, problem: &BilinearSaddle) -> String {
    let mut s = String::new();
    let meta = &out.trace.metadata;
    let _ = writeln!(s, "problem: {} (iters {}, seed {})", meta.problem, meta.iters, meta.seed.unwrap_or(0));
    let _ = writeln!(s, "schedule: {}", meta.schedule);
    if let Some(norm) = meta.norm_k {
        let _ = writeln!(s, "operator norm |K| = {norm:.9e}");
    }
    match out.final_record() {
        Some(record) => {
            let _ = writeln!(s, "final f(x,y)     = {:.9e}", record.f_xy);
            let _ = writeln!(s, "final f(x^,y^)   = {:.9e}  (ergodic averages)", record.f_hat);
            let _ = writeln!(s, "final residuals  = {:.3e} (x), {:.3e} (y)", record.res_x, record.res_y);
            if let Some(reference) = problem.reference() {
                let _ = writeln!(
                    s,
                    "reference f*     = {:.9e}  ({})",
                    reference.value,
                    reference.provenance.as_str()
                );
                let _ = writeln!(s, "|f(x,y)   - f*|  = {:.6e}", (record.f_xy - reference.value).abs());
                let _ = writeln!(s, "|f(x^,y^) - f*|  = {:.6e}", (record.f_hat - reference.value).abs());
            } else {
                let _ = writeln!(s, "reference f*     = none");
            }
        }
        None => {
            let _ = writeln!(s, "no iterations recorded");
        }
    }
    if let Some(reason) = &meta.aborted {
        let _ = writeln!(s, "aborted: {reason}");
    }
    s
}

pub fn solve(
    common: CommonRunArgs,
    schedule_flag: Option<String>,
    out_flag: Option<PathBuf>,
    gap_radius_flag: Option<f64>,
    lyapunov: bool,
    no_distances: bool,
) -> Result<(), Failure> {
    let setup = resolve_run(&common)?;
    let selectors = schedule_flag
        .map(|s| crate::config::split_schedule_list(&s))
        .or_else(|| setup.file.schedule.clone().map(ScheduleField::into_list))
        .ok_or_else(|| Failure::Config("missing --schedule".into()))?;
    let schedule_selector = match selectors.as_slice() {
        [one] => one.clone(),
        _ => {
            return Err(Failure::Config(
                "solve takes one schedule; use `sweep` for several".into(),
            ))
        }
    };
    let schedule = select::build_schedule(&schedule_selector, setup.problem.operator_norm())?;

    let gap_radius = gap_radius_flag.or(setup.file.gap_box_radius);
    let gap = gap_radius
        .map(|radius| select::gap_spec_for(&setup.problem, radius))
        .transpose()?;
    let want_lyapunov = lyapunov || setup.file.lyapunov.unwrap_or(false);
    let record_distances = !no_distances && setup.file.distances.unwrap_or(true);
    let run_config = RunConfig { record_distances, gap, residual_stop: None, keep_iterates: want_lyapunov };

    let out = execute(&setup, &schedule, &run_config)?;
    let out_path = out_flag
        .or(setup.file.out.clone())
        .unwrap_or_else(|| PathBuf::from("trace.csv"));
    out.trace.write_to(&out_path).map_err(Failure::config)?;
    print!("{}", summarize(&out, &setup.problem));
    println!("trace written to {}", out_path.display());

    if want_lyapunov {
        let report = lyapunov_for_problem(
            &setup.problem,
            out.x_history.as_ref().expect("kept for lyapunov"),
            out.y_history.as_ref().expect("kept for lyapunov"),
            &schedule,
        )
        .map_err(Failure::config)?;
        println!(
            "distance certificate: {} violations over {} iterations (max excess {:.3e}, tol {:.3e})",
            report.violations,
            report.per_k.len(),
            report.max_excess,
            report.tolerance
        );
        if !report.passed() {
            return Err(Failure::Certificate(format!(
                "{} distance-certificate violations",
                report.violations
            )));
        }
    }
    if let Some(reason) = &out.trace.metadata.aborted {
        return Err(Failure::Numerical(reason.clone()));
    }
    Ok(())
}

fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

pub fn sweep(
    common: CommonRunArgs,
    schedule_flag: Option<String>,
    out_dir_flag: Option<PathBuf>,
) -> Result<(), Failure> {
    let setup = resolve_run(&common)?;
    let selectors: Vec<String> = schedule_flag
        .map(|s| crate::config::split_schedule_list(&s))
        .or_else(|| setup.file.schedule.clone().map(ScheduleField::into_list))
        .unwrap_or_default();
    if selectors.len() < 2 {
        return Err(Failure::Config("sweep needs at least two schedules (comma-separated)".into()));
    }
    let norm = setup.problem.operator_norm();
    let schedules: Vec<(String, ParamSchedule)> = selectors
        .iter()
        .map(|sel| select::build_schedule(sel, norm).map(|s| (sel.clone(), s)))
        .collect::<Result<_, _>>()?;

    let out_dir = out_dir_flag
        .or(setup.file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("sweep_out"));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", out_dir.display())))?;

    let run_config = RunConfig { record_distances: true, ..Default::default() };
    // One state per run; the problem and schedules are shared read-only.
    let outputs: Vec<(String, Result<RunOutput, Failure>)> = std::thread::scope(|scope| {
        schedules
            .iter()
            .map(|(selector, schedule)| {
                let setup = &setup;
                let run_config = &run_config;
                let handle = scope.spawn(move || execute(setup, schedule, run_config));
                (selector.clone(), handle)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(selector, handle)| (selector, handle.join().expect("run thread panicked")))
            .collect()
    });

    let mut combined = String::from("schedule,k,f_xy,f_hat,res_x,res_y\n");
    let mut completed = 0usize;
    for (selector, outcome) in &outputs {
        let out = match outcome {
            Ok(out) => out,
            Err(failure) => {
                println!("{selector}: failed ({failure:?})");
                continue;
            }
        };
        let path = out_dir.join(format!("{}.csv", sanitize_label(selector)));
        out.trace.write_to(&path).map_err(Failure::config)?;
        for record in &out.trace.records {
            let _ = writeln!(
                combined,
                "{selector},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                record.k, record.f_xy, record.f_hat, record.res_x, record.res_y
            );
        }
        match (&out.trace.metadata.aborted, out.final_record(), setup.problem.reference()) {
            (Some(reason), _, _) => println!("{selector}: aborted ({reason}), trace {}", path.display()),
            (None, Some(record), Some(reference)) => {
                completed += 1;
                println!(
                    "{selector}: |f_xy-f*|={:.3e} |f_hat-f*|={:.3e}, trace {}",
                    (record.f_xy - reference.value).abs(),
                    (record.f_hat - reference.value).abs(),
                    path.display()
                );
            }
            (None, Some(record), None) => {
                completed += 1;
                println!(
                    "{selector}: f_xy={:.6e} f_hat={:.6e}, trace {}",
                    record.f_xy, record.f_hat,
                    path.display()
                );
            }
            (None, None, _) => println!("{selector}: empty trace"),
        }
    }
    let combined_path = out_dir.join("combined.csv");
    std::fs::write(&combined_path, combined)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", combined_path.display())))?;
    println!("combined long-format CSV written to {}", combined_path.display());
    if completed == 0 {
        return Err(Failure::Numerical("every sweep run aborted".into()));
    }
    Ok(())
}

pub fn validate_schedule(
    selector: String,
    norm_flag: Option<f64>,
    problem_flag: Option<String>,
    horizon: usize,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<(), Failure> {
    let file = ConfigFile::load(config.as_deref())?;
    let horizon = file.horizon.unwrap_or(horizon);
    if horizon < 2 {
        return Err(Failure::Config("horizon must be at least 2".into()));
    }
    let norm = match (norm_flag, problem_flag.or_else(|| file.problem.clone())) {
        (Some(norm), _) => {
            if norm < 0.0 {
                return Err(Failure::Config("norm-k must be nonnegative".into()));
            }
            norm
        }
        (None, Some(problem_selector)) => {
            let seed = resolve_seed(None, file.seed)?;
            let (problem, _) = select::build_problem(&problem_selector, seed)?;
            problem.operator_norm()
        }
        (None, None) => 1.0,
    };
    let schedule = select::build_schedule(&selector, norm)?;
    let report = schedule.validate_couplings(norm, horizon);
    print!("{}", report.summary());
    if let Some(path) = out {
        std::fs::write(&path, report.to_csv())
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
        println!("residual report written to {}", path.display());
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("schedule `{selector}` fails theorem conditions")))
    }
}

pub fn certify(
    trace_path: PathBuf,
    problem_flag: Option<String>,
    samples_flag: Option<usize>,
    cert_tol_flag: Option<f64>,
    config: Option<PathBuf>,
) -> Result<(), Failure> {
    let file = ConfigFile::load(config.as_deref())?;
    let trace = IterateTrace::read_from(&trace_path).map_err(Failure::config)?;
    let selector = problem_flag
        .or_else(|| file.problem.clone())
        .ok_or_else(|| Failure::Config("missing --problem".into()))?;
    let samples = samples_flag.or(file.samples).unwrap_or(100);
    let cert_tol = cert_tol_flag.or(file.cert_tol).unwrap_or(1e-2);

    let seed = trace
        .metadata
        .seed
        .ok_or_else(|| Failure::Config("trace records no seed; cannot reproduce the run".into()))?;
    let (problem, identity) = select::build_problem(&selector, seed)?;
    if identity != trace.metadata.problem {
        return Err(Failure::Config(format!(
            "problem `{identity}` does not match trace metadata `{}`",
            trace.metadata.problem
        )));
    }
    let schedule = select::schedule_from_label(&trace.metadata.schedule, problem.operator_norm())?;

    // Reproduce the run deterministically and check the trace matches it.
    let (x0, y0) =
        seeded_start(problem.x_set(), problem.y_set(), seed).map_err(Failure::config)?;
    let run_config = RunConfig { record_distances: false, gap: None, residual_stop: None, keep_iterates: true };
    let rerun = run(&problem, &schedule, &x0, &y0, trace.metadata.iters, &run_config)
        .map_err(Failure::config)?;
    if rerun.trace.records.len() != trace.records.len() {
        return Err(Failure::Config(format!(
            "trace has {} records but reproducing the run gives {}",
            trace.records.len(),
            rerun.trace.records.len()
        )));
    }
    for (ours, theirs) in rerun.trace.records.iter().zip(&trace.records) {
        let consistent = ours.k == theirs.k
            && ours.f_xy == theirs.f_xy
            && ours.f_hat == theirs.f_hat
            && ours.res_x == theirs.res_x
            && ours.res_y == theirs.res_y;
        if !consistent {
            return Err(Failure::Config(format!(
                "trace record k={} is inconsistent with the reproduced run",
                theirs.k
            )));
        }
    }
    println!("trace consistent: {} records reproduced bit-exactly", trace.records.len());

    let mut failures = Vec::new();

    // 1. Schedule hypotheses.
    let horizon = trace.metadata.iters.clamp(2, 10_000);
    let coupling = schedule.validate_couplings(problem.operator_norm(), horizon);
    let schedule_ok = coupling.all_pass();
    println!(
        "[{}] schedule hypotheses (couplings + step-size tails)",
        if schedule_ok { "pass" } else { "FAIL" }
    );
    if !schedule_ok {
        print!("{}", coupling.summary());
        failures.push("schedule hypotheses");
    }

    // 2. Weighted-distance certificate (needs a reference saddle).
    match (problem.reference(), rerun.x_history.as_ref(), rerun.y_history.as_ref()) {
        (Some(_), Some(xs), Some(ys)) => {
            let report = lyapunov_for_problem(&problem, xs, ys, &schedule)
                .map_err(Failure::config)?;
            println!(
                "[{}] distance certificate: {} violations (max excess {:.3e}, tol {:.3e})",
                if report.passed() { "pass" } else { "FAIL" },
                report.violations,
                report.max_excess,
                report.tolerance
            );
            if !report.passed() {
                failures.push("distance certificate");
            }
        }
        _ => println!("[skip] distance certificate: no reference saddle"),
    }

    // 3. Partial gap at the final averaged point.
    let x_hat = rerun.state.ergodic_x();
    let y_hat = rerun.state.ergodic_y();
    match select::gap_spec_for(&problem, 10.0) {
        Ok(spec) => match partial_gap(&problem, &x_hat, &y_hat, &spec) {
            Ok(gap) => {
                let ok = gap.abs() <= cert_tol;
                println!(
                    "[{}] partial gap at averaged point: {gap:.6e} (tol {cert_tol:.1e})",
                    if ok { "pass" } else { "FAIL" }
                );
                if !ok {
                    failures.push("gap at averaged point");
                }
            }
            Err(e) => println!("[skip] partial gap: {e}"),
        },
        Err(_) => println!("[skip] partial gap: no compact evaluation sets available"),
    }

    // 4. Saddle certification of the final iterate.
    let cert = certify_saddle(&problem, &rerun.state.x, &rerun.state.y, samples, seed ^ 0x5eed);
    let ok = cert.max_violation <= cert_tol;
    println!(
        "[{}] saddle certification of final iterate: max violation {:.6e} over {} samples (tol {cert_tol:.1e})",
        if ok { "pass" } else { "FAIL" },
        cert.max_violation,
        cert.samples
    );
    if !ok {
        failures.push("saddle certification");
    }

    if failures.is_empty() {
        println!("certify: all checks passed");
        Ok(())
    } else {
        Err(Failure::Certificate(failures.join(", ")))
    }
}
