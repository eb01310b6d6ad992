//! Independent ground truth for testing the optimizer.
//!
//! Nothing here calls into the iteration or the optimality module; only the
//! spectral routines of [`crate::linalg`] are shared.

use crate::error::{Error, Result};
use crate::linalg::{eigh, positive_projection, trace_norm, ComplexMatrix, HermitianMatrix, C64};
use crate::model::{Ensemble, Povm};

#[derive(Debug, Clone)]
pub struct HelstromOptimum {
    pub p_opt: f64,
    pub povm: Povm,
}

/// Two-hypothesis optimum `½(1 + ‖ρ_1 - ρ_2‖_1)` for prior-weighted states,
/// attained by projecting onto the positive eigenspace of `ρ_1 - ρ_2`.
pub fn helstrom_two_state(rho1: &HermitianMatrix, rho2: &HermitianMatrix) -> Result<HelstromOptimum> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    let total = rho1.trace() + rho2.trace();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid {
            what: "two-state ensemble",
            detail: format!("traces sum to {total}, expected 1"),
        });
    }
    let diff = rho1 - rho2;
    let p_opt = 0.5 * (1.0 + trace_norm(diff.as_complex())?);
    let first = positive_projection(&diff)?;
    let second = &HermitianMatrix::identity(rho1.dim()) - &first;
    Ok(HelstromOptimum {
        p_opt,
        povm: Povm::new_unchecked(vec![first, second])?,
    })
}

/// Quasi-uniform unit vectors on the sphere (Fibonacci lattice), plus the six
/// coordinate axes.
fn sphere_points(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut pts: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut p = [0.0; 3];
            p[axis] = sign;
            pts.push(p);
        }
    }
    pts
}

/// Bloch components `(Tr ρ, Tr ρσ_x, Tr ρσ_y, Tr ρσ_z)` of a qubit operator.
fn bloch(rho: &HermitianMatrix) -> [f64; 4] {
    let a = rho.get(0, 0).re;
    let d = rho.get(1, 1).re;
    let b = rho.get(0, 1);
    [a + d, 2.0 * b.re, -2.0 * b.im, a - d]
}

/// Best success probability over two-outcome projective qubit measurements
/// on a sphere grid, with both projectors assigned any hypothesis labels.
///
/// `angular_resolution` sets the grid spacing to roughly `2π /
/// angular_resolution`. The result is a lower bound on the optimum.
pub fn qubit_grid_search(e: &Ensemble, angular_resolution: usize) -> Result<f64> {
    if e.dim() != 2 {
        return Err(Error::Precondition(format!(
            "grid search needs qubit states, got dimension {}",
            e.dim()
        )));
    }
    let res = angular_resolution.max(1) as f64;
    let n = (res * res / std::f64::consts::PI).ceil() as usize;
    let coeffs: Vec<[f64; 4]> = e.states().iter().map(bloch).collect();

    // Tr(P_± ρ) = (Tr ρ ± n·r) / 2; the best label for each projector is
    // chosen independently.
    let mut best = f64::NEG_INFINITY;
    for p in sphere_points(n) {
        let mut plus = f64::NEG_INFINITY;
        let mut minus = f64::NEG_INFINITY;
        for c in &coeffs {
            let dot = p[0] * c[1] + p[1] * c[2] + p[2] * c[3];
            plus = plus.max(0.5 * (c[0] + dot));
            minus = minus.max(0.5 * (c[0] - dot));
        }
        best = best.max(plus + minus);
    }
    // trivial measurement: always guess the most likely hypothesis
    let trivial = coeffs.iter().map(|c| c[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(best.max(trivial))
}

/// Checks that a claimed optimum has the optimal Lagrange operator's
/// signature: Hermitian, dominating every state, with trace equal to the
/// success probability.
#[derive(Debug, Clone)]
pub struct ConvergedLReport {
    /// `‖L - L^H‖_∞` (max entry modulus).
    pub hermiticity_defect: f64,
    pub hermiticity_ok: bool,
    /// `min_k λ_min(Re(L) - ρ_k)`.
    pub dominance_margin: f64,
    pub dominance_ok: bool,
    /// `Tr L`.
    pub trace_l: f64,
    /// Success probability computed directly from the elements.
    pub p_succ: f64,
    pub trace_ok: bool,
}

impl ConvergedLReport {
    pub fn passed(&self) -> bool {
        self.hermiticity_ok && self.dominance_ok && self.trace_ok
    }
}

pub fn certify_converged_l(e: &Ensemble, m: &Povm, tol: f64) -> Result<ConvergedLReport> {
    if e.dim() != m.dim() || e.len() != m.len() {
        return Err(Error::CountMismatch {
            states: e.len(),
            outcomes: m.len(),
        });
    }
    let d = e.dim();
    let mut l = ComplexMatrix::zeros(d);
    let mut p_succ = 0.0;
    for (mk, rho) in m.elements().iter().zip(e.states()) {
        let prod = mk.as_complex() * rho.as_complex();
        p_succ += prod.trace().re;
        l = &l + &prod;
    }
    let hermiticity_defect = (&l - &l.adjoint()).max_abs_entry();
    let half = C64::new(0.5, 0.0);
    let re_l = HermitianMatrix::symmetrize(&ComplexMatrix::new(
        (l.as_matrix() + l.adjoint().as_matrix()) * half,
    )?);
    let mut dominance_margin = f64::INFINITY;
    for rho in e.states() {
        dominance_margin = dominance_margin.min(eigh(&(&re_l - rho))?.min_eigenvalue());
    }
    let trace_l = l.trace().re;
    Ok(ConvergedLReport {
        hermiticity_defect,
        hermiticity_ok: hermiticity_defect <= d as f64 * tol,
        dominance_margin,
        dominance_ok: dominance_margin >= -tol,
        trace_l,
        p_succ,
        trace_ok: (trace_l - p_succ).abs() <= 1e-10,
    })
}
