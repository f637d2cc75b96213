use super::{ComplexMatrix, C64};
use crate::error::Result;
use crate::tolerances;

/// Eigenvalues sorted descending with matching unitary eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `U diag(lambda) U^dag`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.dim();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| u[(i, k)] * self.eigenvalues[k] * u[(j, k)].conj())
                .sum()
        })
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Applies `f` to the spectrum: `U diag(f(lambda)) U^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.dim();
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| (0..n).map(|k| u[(i, k)] * fl[k] * u[(j, k)].conj()).sum())
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then annihilates the now-real pivot with a real plane rotation.
/// Sweep order is fixed (row-major over the upper triangle), so the output
/// is bit-reproducible for identical input.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    m.check_hermitian(tolerances::HERMITIAN)?;
    let n = m.dim();
    let mut a = m.hermitize();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _sweep in 0..tolerances::JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < tolerances::JACOBI_OFF_DIAGONAL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.dim();
    let b = a[(p, q)];
    let abs_b = b.norm();
    if abs_b == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // pivot negligible against both diagonal entries at working precision
    if abs_b < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = b / abs_b;
    let theta = (aqq - app) / (2.0 * abs_b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // V = diag(1, e^{-i phi}) * [[c, s], [-s, c]] on the (p, q) plane
    let ph = phase.conj();
    let v00 = C64::new(c, 0.0);
    let v01 = C64::new(s, 0.0);
    let v10 = ph * -s;
    let v11 = ph * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * v00 + akq * v10;
        a[(k, q)] = akp * v01 + akq * v11;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = v00.conj() * apk + v10.conj() * aqk;
        a[(q, k)] = v01.conj() * apk + v11.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * v00 + vkq * v10;
        v[(k, q)] = vkp * v01 + vkq * v11;
    }
}

/// `exp(i H)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = hermitian_eig(h)?;
    Ok(e.map_spectrum(|l| C64::new(l.cos(), l.sin())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{random_hermitian_with, seeded_rng};

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eig(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
    }

    #[test]
    fn pauli_z_sorted_descending() {
        let z = ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]);
        let e = hermitian_eig(&z).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, -1.0]);
        assert!((e.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        let mut rng = seeded_rng(42);
        for dim in [2, 3, 5, 8, 16, 32, 64] {
            let m = random_hermitian_with(&mut rng, dim);
            let e = hermitian_eig(&m).unwrap();
            assert!(e.reconstruct().max_abs_diff(&m) <= 1e-10, "dim {dim}");
            assert!(e.eigenvectors.unitarity_deviation() <= 1e-10, "dim {dim}");
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn deterministic_output() {
        let mut rng = seeded_rng(9);
        let m = random_hermitian_with(&mut rng, 8);
        let a = hermitian_eig(&m).unwrap();
        let b = hermitian_eig(&m).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn rejects_non_hermitian_naming_entry() {
        let mut m = ComplexMatrix::identity(3);
        m[(0, 2)] = C64::new(0.5, 0.0);
        match hermitian_eig(&m) {
            Err(crate::Error::NotHermitian { row, col, deviation }) => {
                assert_eq!((row, col), (0, 2));
                assert!((deviation - 0.5).abs() < 1e-15);
            }
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn exponential_is_unitary() {
        let mut rng = seeded_rng(4);
        let h = random_hermitian_with(&mut rng, 4);
        let u = expm_i_hermitian(&h).unwrap();
        assert!(u.unitarity_deviation() < 1e-12);
    }
}
