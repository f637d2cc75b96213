use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Gaussian matrix,
/// with each column's phase fixed so that the implied R has positive diagonal.
pub fn random_unitary_with(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        // second pass for orthogonality at machine precision
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    ComplexMatrix::from_columns(&cols).expect("square by construction")
}

pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    random_unitary_with(&mut seeded_rng(seed), dim)
}

/// Random probability vector with exactly `rank` nonzero entries (uniform on
/// the simplex), zero-padded to `dim`.
pub fn random_probabilities_with(rng: &mut impl Rng, dim: usize, rank: usize) -> Result<Vec<f64>> {
    if rank == 0 || rank > dim {
        return Err(Error::Parameter {
            name: "rank".into(),
            value: rank as f64,
            reason: format!("must lie in 1..={dim}"),
        });
    }
    let mut p: Vec<f64> = (0..rank)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p.resize(dim, 0.0);
    Ok(p)
}

/// `U diag(p) U^dag` with seeded `U` and `p`.
pub fn random_density_with(rng: &mut impl Rng, dim: usize, rank: usize) -> Result<ComplexMatrix> {
    let p = random_probabilities_with(rng, dim, rank)?;
    let u = random_unitary_with(rng, dim);
    let rho = ComplexMatrix::from_real_diagonal(&p).conjugate_by(&u)?;
    Ok(rho.hermitize())
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<ComplexMatrix> {
    random_density_with(&mut seeded_rng(seed), dim, rank)
}

/// Hermitian matrix with independent Gaussian entries (GUE-like).
pub fn random_hermitian_with(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| gaussian(rng));
    g.hermitize()
}
