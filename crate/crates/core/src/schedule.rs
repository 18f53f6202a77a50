//! Parameter sequences `(tau_k, sigma_k, alpha_k, beta_k)` and validation
//! of the couplings the convergence theorems require:
//!
//! ```text
//! |K| beta_i^2        = 1/tau_i   - 1/tau_{i+1}
//! |K| (1-alpha_{i-1})^2 = 1/sigma_i - 1/sigma_{i+1}
//! ```
//!
//! together with the tail conditions `|K| limsup tau_i < 1/2` and
//! `|K| limsup sigma_i < 1/2`.
//!
//! The experiment schedule evaluates
//! `tau_k = sigma_k = (1/(4|K|)) (1 - 1/(j+1))` and
//! `beta_k = 2 sqrt(1/(j(j+1)))`, `alpha_k = 1 - beta_k` at the shifted
//! index `j = k + start_index`; the printed formulas are degenerate at
//! `j = 0` (`tau = 0`, `beta` infinite), so `start_index` defaults to 1.
//! That experiment choice of `alpha` misses the sigma-coupling by one
//! index; the `theorem_exact` kind shifts `alpha` so both couplings hold
//! exactly.

use crate::{Error, Result};

/// One iteration's worth of parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepParams {
    pub tau: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Which rule generates the parameters.
#[derive(Clone, Debug)]
pub enum ScheduleKind {
    /// The experiment schedule: `alpha_k = max(1 - beta_k, 0)`. The clamp
    /// applies only at `j = 1` where `beta = sqrt(2) > 1`; clamped indices
    /// are reported by [`ParamSchedule::validate_couplings`].
    PaperExperiment,
    /// Same `tau`, `sigma`, `beta`, but `alpha_k = 1 - 2 sqrt(1/((j+1)(j+2)))`
    /// so both theorem couplings hold at every index.
    TheoremExact,
    /// The classical constant-parameter primal-dual setting
    /// `(1/(eta |K|), 1/(eta |K|), 1, 0)`.
    ConstantCp { eta: f64 },
    /// Explicit rows `(tau, sigma, alpha, beta)`; indices past the end of
    /// the table hold the last row.
    Custom { table: Vec<StepParams> },
}

impl ScheduleKind {
    fn name(&self) -> &'static str {
        match self {
            ScheduleKind::PaperExperiment => "paper_experiment",
            ScheduleKind::TheoremExact => "theorem_exact",
            ScheduleKind::ConstantCp { .. } => "constant_cp",
            ScheduleKind::Custom { .. } => "custom",
        }
    }
}

/// A parameter schedule bound to an operator-norm value.
#[derive(Clone, Debug)]
pub struct ParamSchedule {
    kind: ScheduleKind,
    norm_k: f64,
    start_index: usize,
}

impl ParamSchedule {
    /// The schedule used by the experiments (`start_index = 1`).
    pub fn paper_experiment(norm_k: f64) -> Result<Self> {
        Self::with_start_index(ScheduleKind::PaperExperiment, norm_k, 1)
    }

    /// The schedule satisfying both theorem couplings (`start_index = 1`).
    pub fn theorem_exact(norm_k: f64) -> Result<Self> {
        Self::with_start_index(ScheduleKind::TheoremExact, norm_k, 1)
    }

    /// Constant steps `tau = sigma = 1/(eta |K|)`, `alpha = 1`, `beta = 0`.
    pub fn constant_cp(eta: f64, norm_k: f64) -> Result<Self> {
        if eta <= 0.0 {
            return Err(Error::InvalidInput(format!("cp eta must be positive, got {eta}")));
        }
        Self::with_start_index(ScheduleKind::ConstantCp { eta }, norm_k, 1)
    }

    /// Constant explicit steps; the fallback the zero-norm error points at.
    pub fn constant_steps(tau: f64, sigma: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::custom(vec![StepParams { tau, sigma, alpha, beta }])
    }

    /// Explicit table; rows past the end hold the last row.
    pub fn custom(table: Vec<StepParams>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::EmptyInput("custom schedule table"));
        }
        for (i, row) in table.iter().enumerate() {
            if !(row.tau > 0.0 && row.sigma > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "custom schedule row {i}: tau and sigma must be positive"
                )));
            }
            if row.alpha < 0.0 || row.beta < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "custom schedule row {i}: alpha and beta must be nonnegative"
                )));
            }
        }
        Ok(ParamSchedule {
            kind: ScheduleKind::Custom { table },
            norm_k: 0.0,
            start_index: 1,
        })
    }

    pub fn with_start_index(kind: ScheduleKind, norm_k: f64, start_index: usize) -> Result<Self> {
        if norm_k < 0.0 || !norm_k.is_finite() {
            return Err(Error::InvalidInput(format!("operator norm must be finite and >= 0, got {norm_k}")));
        }
        if norm_k == 0.0 && !matches!(kind, ScheduleKind::Custom { .. }) {
            return Err(Error::ScheduleNormZero { kind: kind.name() });
        }
        if start_index == 0 && !matches!(kind, ScheduleKind::Custom { .. } | ScheduleKind::ConstantCp { .. }) {
            return Err(Error::InvalidInput(
                "start_index 0 makes the printed formulas degenerate (tau_0 = 0)".into(),
            ));
        }
        Ok(ParamSchedule { kind, norm_k, start_index })
    }

    pub fn kind_name(&self) -> &'static str {
        self.kind.name()
    }

    /// A label carrying the constants, for trace metadata.
    pub fn label(&self) -> String {
        match &self.kind {
            ScheduleKind::ConstantCp { eta } => format!("cp:{eta}"),
            ScheduleKind::Custom { table } if table.len() == 1 => format!(
                "constant:tau={},sigma={},alpha={},beta={}",
                table[0].tau, table[0].sigma, table[0].alpha, table[0].beta
            ),
            other => other.name().to_string(),
        }
    }

    pub fn norm_k(&self) -> f64 {
        self.norm_k
    }

    fn varying(&self, k: usize) -> (f64, f64, f64) {
        // (tau = sigma, beta, alpha) at shifted index j = k + start_index.
        let j = k as f64 + self.start_index as f64;
        let tau = (1.0 / (4.0 * self.norm_k)) * (1.0 - 1.0 / (j + 1.0));
        let beta = 2.0 * (1.0 / (j * (j + 1.0))).sqrt();
        (tau, beta, j)
    }

    /// Parameters for iteration `k >= 0`. Pure and total for every `k` that
    /// fits in the index type.
    pub fn params_at(&self, k: usize) -> StepParams {
        match &self.kind {
            ScheduleKind::PaperExperiment => {
                let (tau, beta, _) = self.varying(k);
                StepParams { tau, sigma: tau, alpha: (1.0 - beta).max(0.0), beta }
            }
            ScheduleKind::TheoremExact => {
                let (tau, beta, j) = self.varying(k);
                let alpha = 1.0 - 2.0 * (1.0 / ((j + 1.0) * (j + 2.0))).sqrt();
                StepParams { tau, sigma: tau, alpha, beta }
            }
            ScheduleKind::ConstantCp { eta } => {
                let step = 1.0 / (eta * self.norm_k);
                StepParams { tau: step, sigma: step, alpha: 1.0, beta: 0.0 }
            }
            ScheduleKind::Custom { table } => table[k.min(table.len() - 1)],
        }
    }

    /// `alpha_{-1}` as used by the sigma-coupling at `i = 0`. The iterate
    /// scheme never reads it (`x^{-1} = x^0` kills that term), so it is free
    /// to be defined by the natural extension of each rule.
    fn alpha_before_start(&self) -> Option<f64> {
        match &self.kind {
            // The experiment formula at j = start_index - 1; degenerate at 0.
            ScheduleKind::PaperExperiment => {
                if self.start_index >= 2 {
                    let j = (self.start_index - 1) as f64;
                    Some(1.0 - 2.0 * (1.0 / (j * (j + 1.0))).sqrt())
                } else {
                    None
                }
            }
            ScheduleKind::TheoremExact => {
                let j = (self.start_index - 1) as f64;
                Some(1.0 - 2.0 * (1.0 / ((j + 1.0) * (j + 2.0))).sqrt())
            }
            ScheduleKind::ConstantCp { .. } => Some(1.0),
            ScheduleKind::Custom { table } => Some(table[0].alpha),
        }
    }

    /// Numerically check the theorem couplings and tail conditions over
    /// `k < horizon`. Findings are carried in the report, never raised.
    pub fn validate_couplings(&self, k_norm: f64, horizon: usize) -> CouplingReport {
        let tol = 1e-9;
        let mut rows = Vec::with_capacity(horizon);
        let mut max_beta_residual: f64 = 0.0;
        let mut max_alpha_residual: f64 = 0.0;
        let mut alpha_skipped = false;
        let mut clamped_indices = Vec::new();

        for k in 0..horizon {
            let here = self.params_at(k);
            let next = self.params_at(k + 1);
            let rate = 1.0 / here.tau - 1.0 / next.tau;
            let beta_residual = k_norm * here.beta * here.beta - rate;

            let alpha_prev = if k == 0 {
                self.alpha_before_start()
            } else {
                Some(self.params_at(k - 1).alpha)
            };
            let sigma_rate = 1.0 / here.sigma - 1.0 / next.sigma;
            let alpha_residual = alpha_prev
                .map(|a| k_norm * (1.0 - a) * (1.0 - a) - sigma_rate);
            if alpha_residual.is_none() {
                alpha_skipped = true;
            }

            if matches!(self.kind, ScheduleKind::PaperExperiment) {
                let (_, beta, _) = self.varying(k);
                if 1.0 - beta < 0.0 {
                    clamped_indices.push(k);
                }
            }

            max_beta_residual = max_beta_residual.max(beta_residual.abs());
            if let Some(r) = alpha_residual {
                max_alpha_residual = max_alpha_residual.max(r.abs());
            }
            rows.push(CouplingRow { k, params: here, beta_residual, alpha_residual });
        }

        // Tail conditions: the built-in sequences increase monotonically to
        // their limit, so sampling far indices bounds the limsup.
        let tail_samples = [horizon.max(1), 8 * horizon.max(1), 1 << 24];
        let tail_tau = tail_samples
            .iter()
            .map(|&k| self.params_at(k).tau)
            .fold(0.0, f64::max);
        let tail_sigma = tail_samples
            .iter()
            .map(|&k| self.params_at(k).sigma)
            .fold(0.0, f64::max);
        let tail_tau_ok = k_norm * tail_tau < 0.5;
        let tail_sigma_ok = k_norm * tail_sigma < 0.5;

        let mut notes = Vec::new();
        if !clamped_indices.is_empty() {
            notes.push(format!(
                "alpha clamped to 0 at k in {clamped_indices:?} (raw 1 - beta < 0)"
            ));
        }
        if alpha_skipped {
            notes.push("alpha coupling at k = 0 skipped: alpha_{-1} undefined for this kind".into());
        }
        if matches!(self.kind, ScheduleKind::PaperExperiment) && max_alpha_residual > tol {
            notes.push(
                "alpha coupling fails by an index shift: the experiment setting ties 1 - alpha_k \
                 to beta_k, while the coupling needs 1 - alpha_{k-1} = beta_k"
                    .into(),
            );
        }

        CouplingReport {
            kind: self.kind_name(),
            k_norm,
            horizon,
            rows,
            beta_coupling_ok: max_beta_residual <= tol,
            alpha_coupling_ok: max_alpha_residual <= tol && !alpha_skipped,
            max_beta_residual,
            max_alpha_residual,
            tail_tau,
            tail_sigma,
            tail_tau_ok,
            tail_sigma_ok,
            clamped_indices,
            notes,
        }
    }

    /// Parse a custom schedule table from CSV with columns
    /// `k,tau,sigma,alpha,beta` (header row required; `#` lines ignored).
    pub fn parse_table_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, StepParams)> = Vec::new();
        let mut saw_header = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                let header: Vec<&str> = line.split(',').map(str::trim).collect();
                if header != ["k", "tau", "sigma", "alpha", "beta"] {
                    return Err(Error::Parse(format!(
                        "schedule table header must be `k,tau,sigma,alpha,beta`, got `{line}`"
                    )));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!("schedule table row needs 5 fields: `{line}`")));
            }
            let k: usize = fields[0]
                .parse()
                .map_err(|e| Error::Parse(format!("bad k `{}`: {e}", fields[0])))?;
            let nums: Vec<f64> = fields[1..]
                .iter()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad value `{t}`: {e}"))))
                .collect::<Result<_>>()?;
            rows.push((k, StepParams { tau: nums[0], sigma: nums[1], alpha: nums[2], beta: nums[3] }));
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput("schedule table"));
        }
        rows.sort_by_key(|(k, _)| *k);
        for (expected, (k, _)) in rows.iter().enumerate() {
            if *k != expected {
                return Err(Error::Parse(format!(
                    "schedule table rows must cover k = 0..n contiguously; missing k = {expected}"
                )));
            }
        }
        ParamSchedule::custom(rows.into_iter().map(|(_, p)| p).collect())
    }
}

/// Residuals of both couplings at one index.
#[derive(Clone, Debug)]
pub struct CouplingRow {
    pub k: usize,
    pub params: StepParams,
    /// `|K| beta_k^2 - (1/tau_k - 1/tau_{k+1})`.
    pub beta_residual: f64,
    /// `|K| (1-alpha_{k-1})^2 - (1/sigma_k - 1/sigma_{k+1})`; `None` when
    /// `alpha_{k-1}` has no defined value.
    pub alpha_residual: Option<f64>,
}

/// Outcome of [`ParamSchedule::validate_couplings`].
#[derive(Clone, Debug)]
pub struct CouplingReport {
    pub kind: &'static str,
    pub k_norm: f64,
    pub horizon: usize,
    pub rows: Vec<CouplingRow>,
    pub beta_coupling_ok: bool,
    pub alpha_coupling_ok: bool,
    pub max_beta_residual: f64,
    pub max_alpha_residual: f64,
    pub tail_tau: f64,
    pub tail_sigma: f64,
    pub tail_tau_ok: bool,
    pub tail_sigma_ok: bool,
    pub clamped_indices: Vec<usize>,
    pub notes: Vec<String>,
}

impl CouplingReport {
    /// True when every theorem hypothesis checked here holds.
    pub fn all_pass(&self) -> bool {
        self.beta_coupling_ok && self.alpha_coupling_ok && self.tail_tau_ok && self.tail_sigma_ok
    }

    /// `#`-metadata plus per-index residual rows, in the same convention
    /// as solver traces.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str("# apmm-coupling-report-v1\n");
        s.push_str(&format!("# schedule: {}\n", self.kind));
        s.push_str(&format!("# norm_k: {:.16e}\n", self.k_norm));
        s.push_str(&format!("# horizon: {}\n", self.horizon));
        s.push_str(&format!("# beta_coupling: {}\n", if self.beta_coupling_ok { "pass" } else { "fail" }));
        s.push_str(&format!("# alpha_coupling: {}\n", if self.alpha_coupling_ok { "pass" } else { "fail" }));
        s.push_str(&format!("# tail_tau: {}\n", if self.tail_tau_ok { "pass" } else { "fail" }));
        s.push_str(&format!("# tail_sigma: {}\n", if self.tail_sigma_ok { "pass" } else { "fail" }));
        for note in &self.notes {
            s.push_str(&format!("# note: {note}\n"));
        }
        s.push_str("k,tau,sigma,alpha,beta,beta_residual,alpha_residual\n");
        for row in &self.rows {
            let alpha_res = row.alpha_residual.map(|r| format!("{r:.16e}")).unwrap_or_default();
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                row.k,
                row.params.tau,
                row.params.sigma,
                row.params.alpha,
                row.params.beta,
                row.beta_residual,
                alpha_res
            ));
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "schedule {} vs |K| = {:.6e}, horizon {}\n",
            self.kind, self.k_norm, self.horizon
        ));
        s.push_str(&format!(
            "  beta  coupling: {} (max |residual| {:.3e})\n",
            if self.beta_coupling_ok { "pass" } else { "FAIL" },
            self.max_beta_residual
        ));
        s.push_str(&format!(
            "  alpha coupling: {} (max |residual| {:.3e})\n",
            if self.alpha_coupling_ok { "pass" } else { "FAIL" },
            self.max_alpha_residual
        ));
        s.push_str(&format!(
            "  tail |K| tau   < 1/2: {} (|K| tau   -> {:.6e})\n",
            if self.tail_tau_ok { "pass" } else { "FAIL" },
            self.k_norm * self.tail_tau
        ));
        s.push_str(&format!(
            "  tail |K| sigma < 1/2: {} (|K| sigma -> {:.6e})\n",
            if self.tail_sigma_ok { "pass" } else { "FAIL" },
            self.k_norm * self.tail_sigma
        ));
        for note in &self.notes {
            s.push_str(&format!("  note: {note}\n"));
        }
        s
    }
}
