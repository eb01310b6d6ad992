//! Problem data: ensembles of prior-weighted states, measurements, the
//! Lagrange operator and the success probability.
//!
//! States are stored prior-weighted, so `Tr ρ_k = p_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, operator_norm, pseudo_inverse_sqrt, ComplexMatrix, HermitianMatrix, C64,
};

/// Tolerances used by [`Ensemble::validate`] and [`Povm::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Smallest admissible eigenvalue is `-psd_tol`.
    pub psd_tol: f64,
    /// Allowed `|Σ_k Tr ρ_k - 1|`.
    pub trace_tol: f64,
    /// Allowed `‖Σ_k M_k - 1‖_∞`.
    pub completeness_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_tol: 1e-9,
            trace_tol: 1e-9,
            completeness_tol: 1e-9,
        }
    }
}

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured violation (0 when the invariant holds exactly).
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn into_result(self, what: &'static str) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        let detail = self
            .failures()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::Invalid { what, detail })
    }
}

fn common_dim(mats: &[HermitianMatrix]) -> Result<usize> {
    let d = mats.first().map(|m| m.dim()).unwrap_or(0);
    for m in mats {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.dim(),
            });
        }
    }
    if d == 0 {
        return Err(Error::Invalid {
            what: "dimension",
            detail: "operators must be at least 1x1".into(),
        });
    }
    Ok(d)
}

/// Finite ensemble of prior-weighted states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    states: Vec<HermitianMatrix>,
    labels: Option<Vec<String>>,
}

impl Ensemble {
    /// Builds and validates with default tolerances.
    pub fn new(states: Vec<HermitianMatrix>) -> Result<Self> {
        let e = Self::new_unchecked(states)?;
        e.validate(&Tolerances::default()).into_result("ensemble")?;
        Ok(e)
    }

    /// Checks only that the states share a dimension; see [`Self::validate`].
    pub fn new_unchecked(states: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = common_dim(&states)?;
        Ok(Self {
            dim,
            states,
            labels: None,
        })
    }

    /// From `(unit-trace density matrix, prior)` pairs.
    pub fn from_densities(pairs: Vec<(HermitianMatrix, f64)>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|(rho, p)| rho.scale(p)).collect())
    }

    /// `ρ_k = |k><k| / m` on `C^m`.
    pub fn shifted_basis(m: usize) -> Self {
        let states = (0..m)
            .map(|k| {
                let mut diag = vec![0.0; m];
                diag[k] = 1.0 / m as f64;
                HermitianMatrix::from_real_diagonal(&diag)
            })
            .collect();
        Self {
            dim: m,
            states,
            labels: None,
        }
    }

    /// Three equiprobable qubit states at 120° on the Bloch sphere.
    pub fn qubit_trine() -> Self {
        let states = (0..3)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let v = [
                    C64::new((theta / 2.0).cos(), 0.0),
                    C64::new((theta / 2.0).sin(), 0.0),
                ];
                HermitianMatrix::outer(&v).scale(1.0 / 3.0)
            })
            .collect();
        Self {
            dim: 2,
            states,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.states.len() {
            return Err(Error::CountMismatch {
                states: self.states.len(),
                outcomes: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[HermitianMatrix] {
        &self.states
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn priors(&self) -> Vec<f64> {
        self.states.iter().map(|r| r.trace()).collect()
    }

    /// `Σ_k ρ_k`.
    pub fn average_state(&self) -> HermitianMatrix {
        sum(&self.states, self.dim)
    }

    /// Conjugates every state by `u`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self {
            dim: self.dim,
            states: self.states.iter().map(|r| r.conjugate_by(u)).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut report = ValidationReport::default();
        let m = self.states.len();
        report.push(
            "state_count",
            if m >= 2 { 0.0 } else { (2 - m) as f64 },
            0.0,
            format!("{m} states (at least 2 required)"),
        );
        for (k, rho) in self.states.iter().enumerate() {
            let min_eig = eigh(rho).map(|s| s.min_eigenvalue()).unwrap_or(f64::NEG_INFINITY);
            report.push(
                format!("psd[{k}]"),
                (-min_eig).max(0.0),
                tol.psd_tol,
                format!("state {k} minimum eigenvalue {min_eig:e}"),
            );
        }
        let total: f64 = self.states.iter().map(|r| r.trace()).sum();
        let deficit = 1.0 - total;
        report.push(
            "trace_sum",
            deficit.abs(),
            tol.trace_tol,
            format!("prior mass sums to {total:.6} (deficit {deficit:.6})"),
        );
        report
    }
}

/// Positive operator-valued measure with one outcome per hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<HermitianMatrix>,
}

impl Povm {
    /// Builds and validates with default tolerances.
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let p = Self::new_unchecked(elements)?;
        p.validate(&Tolerances::default()).into_result("measurement")?;
        Ok(p)
    }

    /// Checks only that the elements share a dimension.
    pub fn new_unchecked(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = common_dim(&elements)?;
        Ok(Self { dim, elements })
    }

    /// `M_k = 1/m` for every outcome.
    pub fn uniform(d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::Invalid {
                what: "measurement",
                detail: format!("uniform POVM needs d >= 1 and m >= 1 (got d={d}, m={m})"),
            });
        }
        let element = HermitianMatrix::identity(d).scale(1.0 / m as f64);
        Ok(Self {
            dim: d,
            elements: vec![element; m],
        })
    }

    /// `M_k = |k+1><k+1|` with addition mod `m`, the worst measurement for
    /// [`Ensemble::shifted_basis`].
    pub fn shifted_basis(m: usize) -> Self {
        let elements = (0..m)
            .map(|k| {
                let mut diag = vec![0.0; m];
                diag[(k + 1) % m] = 1.0;
                HermitianMatrix::from_real_diagonal(&diag)
            })
            .collect();
        Self { dim: m, elements }
    }

    /// Square-root ("pretty good") measurement `S^{-1/2} ρ_k S^{-1/2}` with
    /// `S = Σ ρ_k`, inverted on the range of `S`. Whatever is missing from
    /// completeness (the kernel projector of `S`, plus round-off) is added to
    /// the first outcome.
    pub fn square_root_measurement(e: &Ensemble) -> Result<Self> {
        let (inv_sqrt, _) = pseudo_inverse_sqrt(&e.average_state())?;
        let mut elements: Vec<HermitianMatrix> = e
            .states()
            .iter()
            .map(|rho| rho.conjugate_by(inv_sqrt.as_complex()))
            .collect();
        let residual = &HermitianMatrix::identity(e.dim()) - &sum(&elements, e.dim());
        elements[0] = &elements[0] + &residual;
        Ok(Self {
            dim: e.dim(),
            elements,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<HermitianMatrix> {
        self.elements
    }

    pub fn total(&self) -> HermitianMatrix {
        sum(&self.elements, self.dim)
    }

    /// `‖Σ_k M_k - 1‖_∞`.
    pub fn completeness_residual(&self) -> Result<f64> {
        let defect = &self.total() - &HermitianMatrix::identity(self.dim);
        operator_norm(defect.as_complex())
    }

    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self {
            dim: self.dim,
            elements: self.elements.iter().map(|m| m.conjugate_by(u)).collect(),
        }
    }

    /// Largest entrywise difference between matching elements.
    pub fn max_entry_distance(&self, other: &Self) -> f64 {
        self.elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| (a - b).max_abs_entry())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (k, m) in self.elements.iter().enumerate() {
            let min_eig = eigh(m).map(|s| s.min_eigenvalue()).unwrap_or(f64::NEG_INFINITY);
            report.push(
                format!("psd[{k}]"),
                (-min_eig).max(0.0),
                tol.psd_tol,
                format!("element {k} minimum eigenvalue {min_eig:e}"),
            );
        }
        let residual = self.completeness_residual().unwrap_or(f64::INFINITY);
        report.push(
            "completeness",
            residual,
            tol.completeness_tol,
            format!("‖Σ M_k - 1‖ = {residual:e}"),
        );
        report
    }

    /// [`Self::validate`] plus the outcome-count match against `e`.
    pub fn validate_for(&self, e: &Ensemble, tol: &Tolerances) -> ValidationReport {
        let mut report = self.validate(tol);
        let count_gap = (self.len() as f64 - e.len() as f64).abs();
        report.push(
            "outcome_count",
            count_gap,
            0.0,
            format!("{} outcomes for {} states", self.len(), e.len()),
        );
        let dim_gap = (self.dim as f64 - e.dim() as f64).abs();
        report.push(
            "dimension",
            dim_gap,
            0.0,
            format!("measurement dim {} vs ensemble dim {}", self.dim, e.dim()),
        );
        report
    }
}

fn sum(mats: &[HermitianMatrix], d: usize) -> HermitianMatrix {
    mats.iter()
        .fold(HermitianMatrix::zeros(d), |acc, m| &acc + m)
}

fn check_pair(e: &Ensemble, m: &Povm) -> Result<()> {
    if e.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: m.dim(),
        });
    }
    if e.len() != m.len() {
        return Err(Error::CountMismatch {
            states: e.len(),
            outcomes: m.len(),
        });
    }
    Ok(())
}

/// `L = Σ_k M_k ρ_k` (measurement on the left). Not Hermitian in general.
pub fn lagrange_operator(e: &Ensemble, m: &Povm) -> Result<ComplexMatrix> {
    check_pair(e, m)?;
    Ok(m
        .elements()
        .iter()
        .zip(e.states())
        .fold(ComplexMatrix::zeros(e.dim()), |acc, (mk, rho)| {
            &acc + &(mk.as_complex() * rho.as_complex())
        }))
}

/// `P_succ = Tr L`, with negative round-off clamped to zero.
pub fn success_probability(e: &Ensemble, m: &Povm) -> Result<f64> {
    check_pair(e, m)?;
    let p: f64 = m
        .elements()
        .iter()
        .zip(e.states())
        .map(|(mk, rho)| mk.trace_product(rho))
        .sum();
    Ok(p.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonal_pair() -> Ensemble {
        Ensemble::from_densities(vec![
            (HermitianMatrix::from_real_diagonal(&[1.0, 0.0]), 0.3),
            (HermitianMatrix::from_real_diagonal(&[0.0, 1.0]), 0.7),
        ])
        .unwrap()
    }

    fn computational_basis() -> Povm {
        Povm::new(vec![
            HermitianMatrix::from_real_diagonal(&[1.0, 0.0]),
            HermitianMatrix::from_real_diagonal(&[0.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn shifted_basis_lagrange_operator_vanishes() {
        let e = Ensemble::shifted_basis(2);
        let m = Povm::shifted_basis(2);
        let l = lagrange_operator(&e, &m).unwrap();
        assert_eq!(l.max_abs_entry(), 0.0);
    }

    #[test]
    fn shifted_basis_success_is_zero() {
        for m in [2, 3, 4, 8] {
            let p = success_probability(&Ensemble::shifted_basis(m), &Povm::shifted_basis(m)).unwrap();
            assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn single_outcome_povm_gives_first_state() {
        let e = orthogonal_pair();
        let m = Povm::new(vec![HermitianMatrix::identity(2), HermitianMatrix::zeros(2)]).unwrap();
        let l = lagrange_operator(&e, &m).unwrap();
        assert_eq!(&l, e.states()[0].as_complex());
    }

    #[test]
    fn orthogonal_states_measured_in_own_basis() {
        let e = orthogonal_pair();
        let m = computational_basis();
        let l = lagrange_operator(&e, &m).unwrap();
        assert_eq!(&l, e.average_state().as_complex());
        assert_eq!(l.hermitian_deviation(), 0.0);
        assert!((success_probability(&e, &m).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_povm() {
        let p = Povm::uniform(2, 3).unwrap();
        assert_eq!(p.len(), 3);
        for el in p.elements() {
            assert_eq!(el, &HermitianMatrix::identity(2).scale(1.0 / 3.0));
        }
        assert!(p.completeness_residual().unwrap() < 1e-15);
        assert!(p.validate(&Tolerances::default()).passed());
        let e = Ensemble::qubit_trine();
        let ps = success_probability(&e, &p).unwrap();
        assert!((ps - 1.0 / 3.0).abs() < 1e-15);
        assert!(Povm::uniform(2, 0).is_err());
    }

    #[test]
    fn validate_reports_completeness_deficit() {
        let m = Povm::new_unchecked(vec![
            HermitianMatrix::identity(2).scale(0.45),
            HermitianMatrix::identity(2).scale(0.45),
        ])
        .unwrap();
        let report = m.validate(&Tolerances::default());
        assert!(!report.passed());
        let c = report.find("completeness").unwrap();
        assert!(!c.passed);
        assert!((c.residual - 0.1).abs() < 1e-12);
        assert!(Povm::new(m.into_elements()).is_err());
    }

    #[test]
    fn validate_reports_negative_state() {
        let e = Ensemble::new_unchecked(vec![
            HermitianMatrix::from_real_diagonal(&[0.501, -1e-3]),
            HermitianMatrix::from_real_diagonal(&[0.5, 0.0]),
        ])
        .unwrap();
        let report = e.validate(&Tolerances::default());
        let c = report.find("psd[0]").unwrap();
        assert!(!c.passed);
        assert!((c.residual - 1e-3).abs() < 1e-12);
        assert!(report.find("trace_sum").unwrap().passed);
    }

    #[test]
    fn validate_valid_pair_passes() {
        let e = orthogonal_pair();
        assert!(e.validate(&Tolerances::default()).passed());
        assert!(computational_basis().validate_for(&e, &Tolerances::default()).passed());
    }

    #[test]
    fn validate_flags_prior_deficit() {
        let e = Ensemble::new_unchecked(vec![
            HermitianMatrix::from_real_diagonal(&[0.47, 0.0]),
            HermitianMatrix::from_real_diagonal(&[0.0, 0.5]),
        ])
        .unwrap();
        let c = e.validate(&Tolerances::default()).find("trace_sum").cloned().unwrap();
        assert!(!c.passed);
        assert!((c.residual - 0.03).abs() < 1e-12);
    }

    #[test]
    fn single_state_is_rejected() {
        let e = Ensemble::new(vec![HermitianMatrix::from_real_diagonal(&[1.0, 0.0])]);
        assert!(e.is_err());
    }

    #[test]
    fn mismatched_counts_are_rejected() {
        let e = orthogonal_pair();
        let m = Povm::uniform(2, 3).unwrap();
        assert_eq!(
            lagrange_operator(&e, &m).unwrap_err(),
            Error::CountMismatch { states: 2, outcomes: 3 }
        );
        let m = Povm::uniform(3, 2).unwrap();
        assert!(matches!(
            success_probability(&e, &m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn srm_on_orthogonal_states_is_projective() {
        let e = orthogonal_pair();
        let srm = Povm::square_root_measurement(&e).unwrap();
        assert!(srm.max_entry_distance(&computational_basis()) < 1e-14);
    }

    #[test]
    fn srm_with_zero_state_gives_everything_to_first() {
        let e = Ensemble::new(vec![
            HermitianMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
            HermitianMatrix::zeros(2),
        ])
        .unwrap();
        let srm = Povm::square_root_measurement(&e).unwrap();
        assert!((&srm.elements()[0] - &HermitianMatrix::identity(2)).max_abs_entry() < 1e-14);
        assert_eq!(srm.elements()[1].max_abs_entry(), 0.0);
        assert!(srm.validate(&Tolerances::default()).passed());
    }

    #[test]
    fn srm_on_trine_is_optimal() {
        let e = Ensemble::qubit_trine();
        let srm = Povm::square_root_measurement(&e).unwrap();
        assert!(srm.validate(&Tolerances::default()).passed());
        let p = success_probability(&e, &srm).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-12, "{p}");
    }
}
