//! Random instance generators for test corpora and the CLI.
//!
//! All generators take a caller-supplied RNG so runs are reproducible from a
//! seed.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{pseudo_inverse_sqrt, ComplexMatrix, HermitianMatrix, C64};
use crate::model::{Ensemble, Povm};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix: i.i.d. standard complex normal entries.
pub fn random_complex<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::new(DMatrix::from_fn(d, d, |_, _| gaussian(rng)))
        .expect("gaussian entries are finite")
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::symmetrize(&random_complex(d, rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the R diagonal
/// phases divided out.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let qr = random_complex(d, rng).into_matrix().qr();
    let (q, r) = qr.unpack();
    let mut u = q;
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    ComplexMatrix::new(u).expect("finite")
}

/// Unit-trace density matrix `G G^H / Tr(G G^H)` with `G` a `d x rank`
/// Ginibre block, so its rank is `min(rank, d)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> HermitianMatrix {
    let g = DMatrix::from_fn(d, rank.max(1), |_, _| gaussian(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    HermitianMatrix::symmetrize(&ComplexMatrix::new(w / C64::new(tr, 0.0)).expect("finite"))
}

/// Prior vector drawn uniformly from the simplex.
pub fn random_priors<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..m)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Prior-weighted ensemble of `m` full-rank random states on `C^d`.
pub fn random_ensemble<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Ensemble {
    random_ensemble_with_rank(d, m, d, rng)
}

/// Like [`random_ensemble`] with each state of rank at most `rank`.
pub fn random_ensemble_with_rank<R: Rng + ?Sized>(
    d: usize,
    m: usize,
    rank: usize,
    rng: &mut R,
) -> Ensemble {
    let priors = random_priors(m, rng);
    let pairs: Vec<_> = priors
        .into_iter()
        .map(|p| (random_density(d, rank, rng), p))
        .collect();
    Ensemble::from_densities(pairs).expect("random ensemble is valid")
}

/// Random `m`-outcome POVM: `S^{-1/2} A_k S^{-1/2}` for random positive `A_k`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Povm {
    let raw: Vec<HermitianMatrix> = (0..m)
        .map(|_| random_density(d, 1 + rng.gen_range(0..d), rng))
        .collect();
    let total = raw
        .iter()
        .skip(1)
        .fold(raw[0].clone(), |acc, a| &acc + a);
    let (inv_sqrt, _) = pseudo_inverse_sqrt(&total).expect("eigensolver converges");
    let mut elements: Vec<HermitianMatrix> = raw
        .iter()
        .map(|a| a.conjugate_by(inv_sqrt.as_complex()))
        .collect();
    // low-rank draws may not span C^d; the first outcome absorbs the rest
    let sum = elements.iter().skip(1).fold(elements[0].clone(), |acc, e| &acc + e);
    let residual = &HermitianMatrix::identity(d) - &sum;
    elements[0] = &elements[0] + &residual;
    Povm::new_unchecked(elements).expect("dimensions agree")
}
