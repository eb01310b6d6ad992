//! Optimality verdicts for a measurement.
//!
//! A measurement is optimal iff `Re(L) >= ρ_k` for every outcome. The defect
//! matrices `D_k = ρ_k - Re(L)` quantify the violation, and they yield a
//! certified interval for the gap `P_opt - P_succ`:
//!
//! * lower: `(max_k Tr[D_k]_+)^2`, since one modification step gains at
//!   least that much;
//! * upper: `α Tr Π + 4 Σ_k ‖(1 - Π) ρ_k‖_1` for any orthogonal projection
//!   `Π`, where `α` is the smallest scalar with `Re(L) >= ρ_k - α` for all
//!   `k`. Projections are taken from a greedy spectral construction over the
//!   ensemble (see [`p_dimension_projector`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, operator_norm, real_part, trace_norm, HermitianMatrix, ZERO_CUTOFF_REL, C64,
};
use crate::model::{lagrange_operator, Ensemble, Povm};

/// Default projection search grid for [`gap_upper_bound`].
pub const DEFAULT_P_GRID: [f64; 6] = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2];

/// Allowed excess of greedy tail mass over `p`, absorbing summation
/// round-off so that exact breakpoints such as `p = 1/4` are attainable.
const TAIL_SLACK: f64 = 1e-12;

/// Per-outcome violation of the optimality condition.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// `Re(L)`.
    pub real_l: HermitianMatrix,
    /// `D_k = ρ_k - Re(L)`.
    pub defects: Vec<HermitianMatrix>,
    /// `t_k = Tr[D_k]_+`.
    pub t: Vec<f64>,
    /// Largest eigenvalue of `D_k`.
    pub lam: Vec<f64>,
    /// Index attaining `max_k t_k` (lowest on ties).
    pub argmax_ell: usize,
    /// `max_k max(lam_k, 0)`.
    pub alpha_scalar: f64,
}

impl ResidualReport {
    pub fn t_max(&self) -> f64 {
        self.t[self.argmax_ell]
    }
}

/// Two-sided bound on `P_opt - P_succ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub lower: f64,
    pub upper: f64,
    /// Greedy mass threshold of the projection achieving `upper`.
    pub p_used: f64,
    /// Rank of the projection achieving `upper`.
    pub dim_used: usize,
    /// Rank of the ensemble support (the `p = 0` projection).
    pub projector_rank: usize,
}

pub fn residuals(e: &Ensemble, m: &Povm) -> Result<ResidualReport> {
    let l = lagrange_operator(e, m)?;
    let real_l = real_part(&l);
    let mut defects = Vec::with_capacity(e.len());
    let mut t = Vec::with_capacity(e.len());
    let mut lam = Vec::with_capacity(e.len());
    for rho in e.states() {
        let d = rho - &real_l;
        let spec = eigh(&d)?;
        t.push(spec.positive_trace());
        lam.push(spec.max_eigenvalue());
        defects.push(d);
    }
    let mut argmax_ell = 0;
    for (k, &tk) in t.iter().enumerate() {
        if tk > t[argmax_ell] {
            argmax_ell = k;
        }
    }
    let alpha_scalar = lam.iter().fold(0.0, |acc: f64, &l| acc.max(l));
    Ok(ResidualReport {
        real_l,
        defects,
        t,
        lam,
        argmax_ell,
        alpha_scalar,
    })
}

#[derive(Debug, Clone)]
pub struct OptimalityCheck {
    pub optimal: bool,
    /// `‖L - L^H‖_∞`; vanishes at an optimum.
    pub hermiticity_defect: f64,
    pub report: ResidualReport,
}

/// Optimal (to `tol`) iff `max_k Tr[ρ_k - Re(L)]_+ <= tol`.
pub fn check_optimal(e: &Ensemble, m: &Povm, tol: f64) -> Result<OptimalityCheck> {
    let report = residuals(e, m)?;
    let l = lagrange_operator(e, m)?;
    let hermiticity_defect = operator_norm(&(&l - &l.adjoint()))?;
    Ok(OptimalityCheck {
        optimal: report.t_max() <= tol,
        hermiticity_defect,
        report,
    })
}

/// `(max_k t_k)^2`: the success probability is at least this far below optimal.
pub fn gap_lower_bound(r: &ResidualReport) -> f64 {
    let t = r.t_max();
    t * t
}

/// Projection built from the largest eigenpairs of the ensemble.
#[derive(Debug, Clone)]
pub struct PDimension {
    /// Rank of `projector`: an upper bound on the `p`-dimension.
    pub rank: usize,
    pub projector: HermitianMatrix,
    /// `Σ_k ‖(1 - Π) ρ_k‖_1`, computed exactly.
    pub residual_bound: f64,
    /// Eigenvalue mass left out by the greedy prefix; bounds `residual_bound`.
    pub tail_mass: f64,
}

/// All eigenpairs of all states, sorted by eigenvalue descending.
struct PooledSpectrum {
    dim: usize,
    /// `(eigenvalue, eigenvector)`; ties keep state-then-eigen order.
    pairs: Vec<(f64, Vec<C64>)>,
    /// `tails[n]` = mass of `pairs[n..]`.
    tails: Vec<f64>,
}

impl PooledSpectrum {
    fn new(e: &Ensemble) -> Result<Self> {
        let mut pairs = Vec::new();
        for rho in e.states() {
            let spec = eigh(rho)?;
            let cut = spec.zero_cutoff();
            for (i, &l) in spec.eigenvalues().iter().enumerate() {
                if l > cut {
                    pairs.push((l, spec.eigenvector(i)));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut tails = vec![0.0; pairs.len() + 1];
        for n in (0..pairs.len()).rev() {
            tails[n] = tails[n + 1] + pairs[n].0;
        }
        Ok(Self {
            dim: e.dim(),
            pairs,
            tails,
        })
    }

    /// Shortest prefix whose tail mass is at most `p`.
    fn prefix_len(&self, p: f64) -> usize {
        (0..=self.pairs.len())
            .find(|&n| self.tails[n] <= p + TAIL_SLACK)
            .unwrap_or(self.pairs.len())
    }

    /// Projector onto the span of the first `n` eigenvectors, and its rank.
    fn projector(&self, n: usize) -> Result<(HermitianMatrix, usize)> {
        let d = self.dim;
        if n == 0 {
            return Ok((HermitianMatrix::zeros(d), 0));
        }
        let gram = self.pairs[..n]
            .iter()
            .fold(HermitianMatrix::zeros(d), |acc, (_, v)| &acc + &HermitianMatrix::outer(v));
        // unit vectors, so the nonzero spectrum of the frame operator is O(1);
        // anything below ZERO_CUTOFF_REL of its top is linear dependence
        let spec = eigh(&gram)?;
        let cut = spec.zero_cutoff().max(ZERO_CUTOFF_REL);
        let rank = spec.eigenvalues().iter().filter(|&&l| l > cut).count();
        Ok((spec.spectral_sum(|l| (l > cut).then_some(1.0)), rank))
    }

    fn build(&self, e: &Ensemble, n: usize) -> Result<PDimension> {
        let (projector, rank) = self.projector(n)?;
        let complement = &HermitianMatrix::identity(self.dim) - &projector;
        let mut residual_bound = 0.0;
        for rho in e.states() {
            residual_bound += trace_norm(&(complement.as_complex() * rho.as_complex()))?;
        }
        Ok(PDimension {
            rank,
            projector,
            residual_bound,
            tail_mass: self.tails[n],
        })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Precondition(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Greedy projection capturing all but mass `p` of the ensemble.
///
/// Pools the eigenpairs of every `ρ_k`, sorts them by eigenvalue and keeps the
/// shortest prefix whose excluded mass is at most `p`. By the triangle
/// inequality the exact residual `Σ_k ‖(1 - Π) ρ_k‖_1` is at most that
/// excluded mass. `p = 0` gives the projector onto the full ensemble support,
/// `p = 1` may give the zero projector.
pub fn p_dimension_projector(e: &Ensemble, p: f64) -> Result<PDimension> {
    check_p(p)?;
    let pooled = PooledSpectrum::new(e)?;
    pooled.build(e, pooled.prefix_len(p))
}

/// Smallest `α Tr Π + 4 Σ_k ‖(1 - Π) ρ_k‖_1` over greedy projections.
///
/// Candidates are the greedy projections for every `p` in `p_grid`, refined
/// by every greedy breakpoint whose tail mass lies below `max(p_grid)`, since
/// rank only changes at breakpoints. `lower` is taken from `r`.
pub fn gap_upper_bound(
    e: &Ensemble,
    m: &Povm,
    r: &ResidualReport,
    p_grid: &[f64],
) -> Result<GapCertificate> {
    if e.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: m.dim(),
        });
    }
    if p_grid.is_empty() {
        return Err(Error::Config("p_grid must not be empty".into()));
    }
    for &p in p_grid {
        check_p(p)?;
    }
    let alpha = r.alpha_scalar;
    let pooled = PooledSpectrum::new(e)?;

    // (prefix length, p that selects it)
    let mut candidates: Vec<(usize, f64)> = p_grid.iter().map(|&p| (pooled.prefix_len(p), p)).collect();
    let p_max = p_grid.iter().copied().fold(0.0, f64::max);
    for n in 0..=pooled.pairs.len() {
        let tail = pooled.tails[n];
        if tail <= p_max + TAIL_SLACK {
            candidates.push((n, tail.min(1.0)));
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    candidates.dedup_by_key(|c| c.0);

    let support_rank = pooled.projector(pooled.prefix_len(0.0))?.1;
    let mut best: Option<(f64, f64, usize)> = None;
    // longest prefix first so that ties favour the p = 0 end
    for &(n, p) in candidates.iter().rev() {
        let pd = pooled.build(e, n)?;
        let bound = alpha * pd.rank as f64 + 4.0 * pd.residual_bound;
        if best.is_none_or(|(b, _, _)| bound < b) {
            best = Some((bound, p, pd.rank));
        }
    }
    let (upper, p_used, dim_used) = best.expect("at least one candidate");
    Ok(GapCertificate {
        lower: gap_lower_bound(r),
        upper,
        p_used,
        dim_used,
        projector_rank: support_rank,
    })
}

/// Residuals followed by both gap bounds.
pub fn certify(e: &Ensemble, m: &Povm, p_grid: &[f64]) -> Result<(ResidualReport, GapCertificate)> {
    let r = residuals(e, m)?;
    let cert = gap_upper_bound(e, m, &r, p_grid)?;
    Ok((r, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_psd;

    fn orthogonal_optimum() -> (Ensemble, Povm) {
        let e = Ensemble::from_densities(vec![
            (HermitianMatrix::from_real_diagonal(&[1.0, 0.0]), 0.4),
            (HermitianMatrix::from_real_diagonal(&[0.0, 1.0]), 0.6),
        ])
        .unwrap();
        let m = Povm::new(vec![
            HermitianMatrix::from_real_diagonal(&[1.0, 0.0]),
            HermitianMatrix::from_real_diagonal(&[0.0, 1.0]),
        ])
        .unwrap();
        (e, m)
    }

    #[test]
    fn shifted_basis_residuals() {
        let e = Ensemble::shifted_basis(4);
        let r = residuals(&e, &Povm::shifted_basis(4)).unwrap();
        assert_eq!(r.t, vec![0.25; 4]);
        assert_eq!(r.lam, vec![0.25; 4]);
        assert_eq!(r.alpha_scalar, 0.25);
        assert_eq!(r.argmax_ell, 0);
        assert_eq!(gap_lower_bound(&r), 1.0 / 16.0);
    }

    #[test]
    fn optimal_measurement_has_zero_residuals() {
        let (e, m) = orthogonal_optimum();
        let r = residuals(&e, &m).unwrap();
        assert!(r.t.iter().all(|&t| t == 0.0));
        assert_eq!(gap_lower_bound(&r), 0.0);
        let check = check_optimal(&e, &m, 1e-8).unwrap();
        assert!(check.optimal);
        assert!(check.hermiticity_defect < 1e-15);
    }

    #[test]
    fn shifted_basis_is_not_optimal() {
        let e = Ensemble::shifted_basis(4);
        let check = check_optimal(&e, &Povm::shifted_basis(4), 1e-3).unwrap();
        assert!(!check.optimal);
        assert_eq!(check.report.t_max(), 0.25);
    }

    #[test]
    fn uniform_on_nonorthogonal_pair_is_not_optimal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [C64::new(s, 0.0), C64::new(s, 0.0)];
        let e = Ensemble::from_densities(vec![
            (HermitianMatrix::from_real_diagonal(&[1.0, 0.0]), 0.5),
            (HermitianMatrix::outer(&plus), 0.5),
        ])
        .unwrap();
        let check = check_optimal(&e, &Povm::uniform(2, 2).unwrap(), 1e-8).unwrap();
        assert!(!check.optimal);
    }

    #[test]
    fn two_state_shifted_lower_bound() {
        let r = residuals(&Ensemble::shifted_basis(2), &Povm::shifted_basis(2)).unwrap();
        assert_eq!(r.t, vec![0.5, 0.5]);
        assert_eq!(gap_lower_bound(&r), 0.25);
    }

    #[test]
    fn ties_pick_lowest_index() {
        let r = residuals(&Ensemble::shifted_basis(3), &Povm::shifted_basis(3)).unwrap();
        assert_eq!(r.argmax_ell, 0);
    }

    #[test]
    fn defect_cross_check_with_psd_order() {
        let (e, m) = orthogonal_optimum();
        let r = residuals(&e, &m).unwrap();
        for d in &r.defects {
            assert!(is_psd(&-d, 1e-12).unwrap());
        }
    }

    #[test]
    fn p_dimension_drops_one_vector() {
        let e = Ensemble::shifted_basis(4);
        let pd = p_dimension_projector(&e, 0.25).unwrap();
        assert_eq!(pd.rank, 3);
        assert!((pd.residual_bound - 0.25).abs() < 1e-14);
        assert!((pd.projector.trace() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn p_dimension_extremes() {
        let e = Ensemble::shifted_basis(4);
        let full = p_dimension_projector(&e, 1.0).unwrap();
        assert_eq!(full.rank, 0);
        assert_eq!(full.projector.max_abs_entry(), 0.0);
        assert!((full.residual_bound - 1.0).abs() < 1e-14);

        let qubit = Ensemble::from_densities(vec![
            (HermitianMatrix::from_real_diagonal(&[0.6, 0.4]), 0.5),
            (HermitianMatrix::from_real_diagonal(&[0.2, 0.8]), 0.5),
        ])
        .unwrap();
        let pd = p_dimension_projector(&qubit, 0.0).unwrap();
        assert_eq!(pd.rank, 2);
        assert!(pd.residual_bound < 1e-14);
    }

    #[test]
    fn p_dimension_support_of_rank_deficient_ensemble() {
        let e = Ensemble::from_densities(vec![
            (HermitianMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]), 0.5),
            (HermitianMatrix::from_real_diagonal(&[0.0, 1.0, 0.0]), 0.5),
        ])
        .unwrap();
        assert_eq!(p_dimension_projector(&e, 0.0).unwrap().rank, 2);
    }

    #[test]
    fn p_dimension_rejects_bad_p() {
        let e = Ensemble::shifted_basis(2);
        assert!(p_dimension_projector(&e, -0.1).is_err());
        assert!(p_dimension_projector(&e, 1.5).is_err());
    }

    #[test]
    fn upper_bound_examples() {
        let (e, m) = orthogonal_optimum();
        let (_, cert) = certify(&e, &m, &DEFAULT_P_GRID).unwrap();
        assert_eq!(cert.upper, 0.0);
        assert_eq!(cert.lower, 0.0);
        assert_eq!(cert.p_used, 0.0);

        let e = Ensemble::shifted_basis(4);
        let (_, cert) = certify(&e, &Povm::shifted_basis(4), &DEFAULT_P_GRID).unwrap();
        assert!((cert.upper - 1.0).abs() < 1e-14);
        assert_eq!(cert.lower, 0.0625);
        assert_eq!(cert.dim_used, 4);
        assert_eq!(cert.projector_rank, 4);
        assert_eq!(cert.p_used, 0.0);
    }

    #[test]
    fn upper_bound_rejects_bad_grid() {
        let e = Ensemble::shifted_basis(2);
        let m = Povm::shifted_basis(2);
        let r = residuals(&e, &m).unwrap();
        assert!(gap_upper_bound(&e, &m, &r, &[]).is_err());
        assert!(gap_upper_bound(&e, &m, &r, &[0.0, 2.0]).is_err());
    }
}
