//! Entropy and information functionals, all in bits.

use crate::error::{Error, Result};
use crate::matcore::{hermitian_eig, real_diagonal, ComplexMatrix, C64};
use crate::states::DensityOperator;
use crate::tolerances;

/// Shannon entropy in bits of a probability vector; entries at or below the
/// clamp threshold contribute zero.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .map(|&p| p.min(1.0))
        .filter(|&p| p > tolerances::EIGENVALUE_CLAMP)
        .map(|p| -p * p.log2())
        .sum()
}

/// `H2(p) = -p log p - (1-p) log(1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// Eigenvalues of a Hermitian operator clamped into `[0, 1]`.
pub fn clamped_spectrum(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?
        .eigenvalues
        .into_iter()
        .map(|l| if l < tolerances::EIGENVALUE_CLAMP { 0.0 } else { l.min(1.0) })
        .collect())
}

/// Von Neumann entropy of a unit-trace positive operator.
pub fn operator_entropy(m: &ComplexMatrix) -> Result<f64> {
    Ok(shannon_entropy(&clamped_spectrum(m)?))
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    operator_entropy(rho.matrix()).expect("validated states are Hermitian")
}

/// `I = N - S`.
pub fn information(rho: &DensityOperator) -> f64 {
    rho.n_bits() - von_neumann_entropy(rho)
}

/// `-log2 lambda_max` of an operator.
pub fn operator_min_entropy(m: &ComplexMatrix) -> Result<f64> {
    let lmax = hermitian_eig(m)?.max_eigenvalue().clamp(f64::MIN_POSITIVE, 1.0);
    Ok(-lmax.log2())
}

pub fn min_entropy(rho: &DensityOperator) -> f64 {
    operator_min_entropy(rho.matrix()).expect("validated states are Hermitian")
}

/// Diagonal probabilities `<b_i| rho |b_i>` for the columns of `basis`.
pub fn basis_probabilities(rho: &ComplexMatrix, basis: &ComplexMatrix) -> Result<Vec<f64>> {
    if basis.dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "basis dim {} vs state dim {}",
            basis.dim(),
            rho.dim()
        )));
    }
    basis.check_unitary(tolerances::UNITARY)?;
    let rotated = basis.adjoint().matmul(rho)?.matmul(basis)?;
    Ok(real_diagonal(&rotated).into_iter().map(|p| p.max(0.0)).collect())
}

/// `H(rho, B)`: Shannon entropy of the outcome distribution in basis `B`.
pub fn shannon_entropy_in_basis(rho: &DensityOperator, basis: &ComplexMatrix) -> Result<f64> {
    Ok(shannon_entropy(&basis_probabilities(rho.matrix(), basis)?))
}

/// `S(rho || sigma)` in bits; `f64::INFINITY` when the support of `rho` is
/// not contained in that of `sigma`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    relative_entropy_operators(rho.matrix(), sigma.matrix())
}

pub fn relative_entropy_operators(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "relative entropy of dims {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let es = hermitian_eig(sigma)?;
    let mut cross = 0.0;
    for (k, &s) in es.eigenvalues.iter().enumerate() {
        let v = es.eigenvectors.column(k);
        let w = rho.expectation(&v).re;
        if s < tolerances::SUPPORT_SIGMA {
            if w > tolerances::SUPPORT_RHO {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross -= w * s.min(1.0).log2();
    }
    Ok((cross - operator_entropy(rho)?).max(0.0))
}

/// Schmidt decomposition of a bipartite pure state.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    /// Descending, `sum c_i^2 = 1`.
    pub coefficients: Vec<f64>,
    /// Columns are Alice's Schmidt vectors.
    pub alice_basis: ComplexMatrix,
    /// Columns are Bob's Schmidt vectors, completed to a basis.
    pub bob_basis: ComplexMatrix,
}

impl SchmidtForm {
    /// `S_A = H(c_i^2)`.
    pub fn entanglement_entropy(&self) -> f64 {
        shannon_entropy(&self.coefficients.iter().map(|c| c * c).collect::<Vec<_>>())
    }

    /// `sum_i c_i |a_i>|b_i>`.
    pub fn vector(&self) -> Vec<C64> {
        let (da, db) = (self.alice_basis.dim(), self.bob_basis.dim());
        let mut v = vec![C64::new(0.0, 0.0); da * db];
        for (i, &c) in self.coefficients.iter().enumerate() {
            let a = self.alice_basis.column(i);
            let b = self.bob_basis.column(i);
            for x in 0..da {
                for y in 0..db {
                    v[x * db + y] += a[x] * b[y] * c;
                }
            }
        }
        v
    }
}

/// Dominant eigenvector of a pure state.
pub fn state_vector(rho: &DensityOperator) -> Result<Vec<C64>> {
    if !rho.is_pure() {
        return Err(Error::NotPure {
            impurity: 1.0 - rho.purity(),
        });
    }
    let e = hermitian_eig(rho.matrix())?;
    Ok(e.eigenvectors.column(0))
}

/// Completes orthonormal vectors to a full basis (Gram-Schmidt against the
/// computational basis).
pub(crate) fn complete_basis(mut cols: Vec<Vec<C64>>, dim: usize) -> ComplexMatrix {
    let mut k = 0;
    while cols.len() < dim {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[k] = C64::new(1.0, 0.0);
        k += 1;
        for _ in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    ComplexMatrix::from_columns(&cols).expect("square")
}

/// Schmidt form of a pure two-party state.
pub fn schmidt(psi: &DensityOperator) -> Result<SchmidtForm> {
    let parties = psi.split().parties();
    if parties.len() != 2 {
        return Err(Error::Party(format!(
            "Schmidt decomposition needs exactly 2 parties, got {}",
            parties.len()
        )));
    }
    let grouped = psi.grouped_by_party();
    let v = state_vector(&grouped)?;
    let dims = grouped.split().party_dims();
    let (da, db) = (dims[0], dims[1]);
    let rho_a = grouped.reduced(&parties[0])?;
    let ea = hermitian_eig(&rho_a)?;
    let rank = da.min(db);

    let mut coefficients = Vec::with_capacity(rank);
    let mut bob_cols = Vec::new();
    for i in 0..rank {
        let lambda = ea.eigenvalues[i].max(0.0);
        let c = lambda.sqrt();
        coefficients.push(c);
        if c > 1e-7 {
            // (<a_i| (x) I) |psi> / c_i
            let a = ea.eigenvectors.column(i);
            let f: Vec<C64> = (0..db)
                .map(|y| (0..da).map(|x| a[x].conj() * v[x * db + y]).sum::<C64>() / c)
                .collect();
            bob_cols.push(f);
        }
    }
    let norm: f64 = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
    coefficients.iter_mut().for_each(|c| *c /= norm);
    let form = SchmidtForm {
        coefficients,
        alice_basis: ea.eigenvectors,
        bob_basis: complete_basis(bob_cols, db),
    };
    let recon = form.vector();
    let err = recon
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if err > 1e-9 {
        return Err(Error::Dimension(format!("Schmidt reconstruction error {err:.3e}")));
    }
    Ok(form)
}

/// `Tr[P rho]` for a projector `P`, clamped to `[0, 1]`.
pub fn overlap_fidelity(rho: &DensityOperator, projector: &ComplexMatrix) -> Result<f64> {
    if projector.dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "projector dim {} vs state dim {}",
            projector.dim(),
            rho.dim()
        )));
    }
    projector.check_hermitian(tolerances::PROJECTOR)?;
    let sq = projector.matmul(projector)?;
    let deviation = sq.max_abs_diff(projector);
    if deviation > tolerances::PROJECTOR {
        return Err(Error::NotProjector { deviation });
    }
    Ok(projector.matmul(rho.matrix())?.trace().re.clamp(0.0, 1.0))
}
