//! Barnett–Croke ascent on the success probability.
//!
//! Each step picks the outcome `ℓ` with the largest violation
//! `t_ℓ = Tr[ρ_ℓ - Re(L)]_+`, and moves weight towards it along the positive
//! eigenspace `Π_+` of `ρ_ℓ - Re(L)`:
//!
//! ```text
//! M_k <- (1 - X) M_k (1 - X) + δ_kℓ (2X - X²),   X = α Π_+,
//! ```
//!
//! which raises the success probability by at least `t_ℓ²` when `α = t_ℓ`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_psd, pseudo_inverse_sqrt, positive_projection, HermitianMatrix};
use crate::model::{success_probability, Ensemble, Povm, Tolerances};
use crate::optimality::{gap_upper_bound, residuals, GapCertificate, DEFAULT_P_GRID};

/// Slack allowed when checking `0 <= X <= 2`.
const STEP_DIRECTION_TOL: f64 = 1e-10;

/// Completeness drift above which the iterate is renormalized.
const DRIFT_TOL: f64 = 1e-10;

/// Cap on the default iteration budget.
const MAX_ITERS_CAP: usize = 1_000_000;

/// `⌈Δ⁻²⌉`: steps within which some iterate must have `t_max <= Δ`.
pub fn theory_budget(delta: f64) -> u64 {
    (1.0 / (delta * delta)).ceil().min(u64::MAX as f64) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    /// Stop once `max_k t_k <= tol`.
    pub tol: f64,
    /// Defaults to `⌈tol⁻²⌉` capped at 10⁶.
    pub max_iters: Option<usize>,
    /// Exact maximization of the step length over `[0, 2]`.
    pub line_search: bool,
    pub p_grid: Vec<f64>,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: None,
            line_search: true,
            p_grid: DEFAULT_P_GRID.to_vec(),
        }
    }
}

impl IterationConfig {
    pub fn effective_max_iters(&self) -> usize {
        self.max_iters
            .unwrap_or_else(|| (theory_budget(self.tol) as usize).min(MAX_ITERS_CAP))
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.p_grid.is_empty() || self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config(format!(
                "p_grid must be a non-empty subset of [0, 1], got {:?}",
                self.p_grid
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: usize,
    pub p_succ_before: f64,
    pub p_succ_after: f64,
    pub ell: usize,
    /// `max_k Tr[D_k]_+` at the start of the step.
    pub t_max: f64,
    /// Step length actually applied, in `[0, 2]`.
    pub alpha_used: f64,
    pub line_search: bool,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    ToleranceMet,
    MaxIters,
    /// `⌈tol⁻²⌉` steps ran without reaching `tol`, which exact arithmetic
    /// rules out; only round-off can cause it.
    TheoryBoundExhausted,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ToleranceMet => "tolerance_met",
            Self::MaxIters => "max_iters",
            Self::TheoryBoundExhausted => "theory_bound_exhausted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub config: IterationConfig,
    pub steps: Vec<StepRecord>,
    pub final_povm: Povm,
    pub final_p_succ: f64,
    /// `max_k t_k` of `final_povm`.
    pub final_t_max: f64,
    pub certificate: GapCertificate,
    pub termination_reason: TerminationReason,
    /// `⌈tol⁻²⌉`.
    pub theory_budget: u64,
}

impl IterationTrace {
    /// Index of the first step whose starting iterate had `t_max <= delta`,
    /// counting the final iterate as step `steps.len()`.
    pub fn first_step_within(&self, delta: f64) -> Option<usize> {
        self.steps
            .iter()
            .position(|s| s.t_max <= delta)
            .or_else(|| (self.final_t_max <= delta).then_some(self.steps.len()))
    }
}

/// `M_k(X, ℓ) = (1 - X) M_k (1 - X) + δ_kℓ (2X - X²)` for `0 <= X <= 2`.
pub fn bc_modification(m: &Povm, x: &HermitianMatrix, ell: usize) -> Result<Povm> {
    let d = m.dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.dim(),
        });
    }
    if ell >= m.len() {
        return Err(Error::Precondition(format!(
            "outcome index {ell} out of range for {} outcomes",
            m.len()
        )));
    }
    let two = HermitianMatrix::identity(d).scale(2.0);
    if !is_psd(x, STEP_DIRECTION_TOL)? || !is_psd(&(&two - x), STEP_DIRECTION_TOL)? {
        return Err(Error::Precondition(
            "step direction X must satisfy 0 <= X <= 2".into(),
        ));
    }
    let one_minus_x = &HermitianMatrix::identity(d) - x;
    let x_sq = HermitianMatrix::symmetrize(&(x.as_complex() * x.as_complex()));
    let gain = &x.scale(2.0) - &x_sq;
    let elements = m
        .elements()
        .iter()
        .enumerate()
        .map(|(k, mk)| {
            let shrunk = mk.conjugate_by(one_minus_x.as_complex());
            if k == ell {
                &shrunk + &gain
            } else {
                shrunk
            }
        })
        .collect();
    let out = Povm::new_unchecked(elements)?;
    let report = out.validate(&Tolerances::default());
    if !report.passed() {
        let detail = report
            .failures()
            .map(|c| c.detail.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Invalid {
            what: "modified measurement",
            detail,
        });
    }
    Ok(out)
}

/// `P(β) = P_0 + bβ + aβ²` along `X = βΠ_+` at outcome `ℓ`.
struct StepQuadratic {
    linear: f64,
    quadratic: f64,
}

impl StepQuadratic {
    fn new(e: &Ensemble, m: &Povm, proj: &HermitianMatrix, defect: &HermitianMatrix, ell: usize) -> Self {
        let linear = 2.0 * proj.trace_product(defect);
        let mut quadratic = -proj.trace_product(&e.states()[ell]);
        for (mk, rho) in m.elements().iter().zip(e.states()) {
            quadratic += mk.conjugate_by(proj.as_complex()).trace_product(rho);
        }
        Self { linear, quadratic }
    }

    fn gain(&self, beta: f64) -> f64 {
        self.linear * beta + self.quadratic * beta * beta
    }

    /// Maximizer over `[0, 2]`, falling back to `default` when flat.
    fn argmax(&self, default: f64) -> f64 {
        if self.linear.abs() < 1e-15 && self.quadratic.abs() < 1e-15 {
            return default;
        }
        let mut best = default;
        let mut candidates = vec![2.0];
        if self.quadratic < 0.0 {
            candidates.push((-self.linear / (2.0 * self.quadratic)).clamp(0.0, 2.0));
        }
        for beta in candidates {
            if self.gain(beta) > self.gain(best) {
                best = beta;
            }
        }
        best
    }
}

/// One Barnett–Croke step. Returns the iterate and a record with
/// `step_index = 0`.
pub fn iterate_step(e: &Ensemble, m: &Povm, line_search: bool) -> Result<(Povm, StepRecord)> {
    let start = Instant::now();
    let p_before = success_probability(e, m)?;
    let r = residuals(e, m)?;
    let ell = r.argmax_ell;
    let t_max = r.t_max();

    let (next, alpha_used) = if t_max == 0.0 {
        (m.clone(), 0.0)
    } else {
        let proj = positive_projection(&r.defects[ell])?;
        let mut alpha = t_max.clamp(0.0, 1.0);
        if line_search {
            alpha = StepQuadratic::new(e, m, &proj, &r.defects[ell], ell).argmax(alpha);
        }
        (bc_modification(m, &proj.scale(alpha), ell)?, alpha)
    };

    let p_after = success_probability(e, &next)?;
    Ok((
        next,
        StepRecord {
            step_index: 0,
            p_succ_before: p_before,
            p_succ_after: p_after,
            ell,
            t_max,
            alpha_used,
            line_search,
            wall_time: start.elapsed(),
        },
    ))
}

/// Symmetric renormalization `S^{-1/2} M_k S^{-1/2}`, `S = Σ M_k`.
fn renormalize(m: &Povm) -> Result<Povm> {
    let (inv_sqrt, _) = pseudo_inverse_sqrt(&m.total())?;
    Povm::new_unchecked(
        m.elements()
            .iter()
            .map(|mk| mk.conjugate_by(inv_sqrt.as_complex()))
            .collect(),
    )
}

/// Iterates from `m0` until `max_k t_k <= tol` or the step budget runs out,
/// then certifies the final measurement.
pub fn run(e: &Ensemble, m0: &Povm, cfg: &IterationConfig) -> Result<IterationTrace> {
    cfg.validate()?;
    let report = m0.validate_for(e, &Tolerances::default());
    if !report.passed() {
        let detail = report
            .failures()
            .map(|c| c.detail.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Invalid {
            what: "initial measurement",
            detail,
        });
    }

    let max_iters = cfg.effective_max_iters();
    let budget = theory_budget(cfg.tol);
    let mut current = m0.clone();
    let mut steps = Vec::new();

    let (termination_reason, final_report) = loop {
        let r = residuals(e, &current)?;
        if r.t_max() <= cfg.tol {
            break (TerminationReason::ToleranceMet, r);
        }
        if steps.len() as u64 >= budget {
            break (TerminationReason::TheoryBoundExhausted, r);
        }
        if steps.len() >= max_iters {
            break (TerminationReason::MaxIters, r);
        }
        let (mut next, mut record) = iterate_step(e, &current, cfg.line_search)?;
        if next.completeness_residual()? > DRIFT_TOL {
            next = renormalize(&next)?;
            record.p_succ_after = success_probability(e, &next)?;
        }
        record.step_index = steps.len();
        steps.push(record);
        current = next;
    };

    let certificate = gap_upper_bound(e, &current, &final_report, &cfg.p_grid)?;
    Ok(IterationTrace {
        config: cfg.clone(),
        final_p_succ: success_probability(e, &current)?,
        final_t_max: final_report.t_max(),
        steps,
        final_povm: current,
        certificate,
        termination_reason,
        theory_budget: budget,
    })
}
