//! Dense complex linear algebra for small operators.
//!
//! Tensor factors are ordered with the first factor as the slowest index:
//! for factors `(d_0, d_1, ..., d_{k-1})` the basis index of the digits
//! `(i_0, ..., i_{k-1})` is `((i_0 * d_1 + i_1) * d_2 + i_2) ...`. Every
//! function in the crate that splits an index into factors uses this order.

mod eig;
mod random;

use std::ops::{Index, IndexMut};

pub use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tolerances;

pub use eig::{expm_i_hermitian, hermitian_eig, EigenDecomposition};
pub use random::{
    random_density, random_density_with, random_hermitian_with, random_probabilities_with,
    random_unitary, random_unitary_with, seeded_rng,
};

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Dimension("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// `|v><v|` for a (not necessarily normalized) vector.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let dim = cols.len();
        if cols.iter().any(|c| c.len() != dim) {
            return Err(Error::Dimension("columns must all have length = count".into()));
        }
        Ok(Self::from_fn(dim, |i, j| cols[j][i]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `U M U^dag`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    /// `<v| M |v>`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|M[i][j] - conj(M[j][i])|` and where it occurs.
    pub fn hermiticity_violation(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let (dev, row, col) = self.hermiticity_violation();
        if dev > tol {
            return Err(Error::NotHermitian {
                row,
                col,
                deviation: dev,
            });
        }
        Ok(())
    }

    /// `max |U^dag U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let g = self.adjoint().matmul(self).expect("same dim");
        g.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tol || !deviation.is_finite() {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    /// Replaces the matrix by `(M + M^dag) / 2`.
    pub fn hermitize(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "operands have dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

// Row-major nested arrays of [re, im] pairs, the interchange format of
// state and protocol files.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .rows()
            .into_iter()
            .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Kronecker product; row `(i_A, i_B)` maps to `i_A * dim_B + i_B`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let db = b.dim;
    ComplexMatrix::from_fn(a.dim * db, |i, j| a[(i / db, j / db)] * b[(i % db, j % db)])
}

/// Tensor product of a list of matrices, left to right.
pub fn tensor_all<'a>(ms: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    ms.into_iter()
        .fold(ComplexMatrix::identity(1), |acc, m| tensor(&acc, m))
}

/// Kronecker product of state vectors.
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Splits a flat index into factor digits.
pub fn index_digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

/// Inverse of [`index_digits`].
pub fn digits_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn check_factor_dims(m: &ComplexMatrix, dims: &[usize]) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::Dimension("factor dimensions must be positive".into()));
    }
    let total: usize = dims.iter().product();
    if total != m.dim {
        return Err(Error::Dimension(format!(
            "factor dims {dims:?} multiply to {total}, matrix has dim {}",
            m.dim
        )));
    }
    Ok(())
}

fn check_factor_subset(subset: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &k in subset {
        if k >= n {
            return Err(Error::Dimension(format!("factor index {k} out of range (< {n})")));
        }
        if seen[k] {
            return Err(Error::Dimension(format!("factor index {k} listed twice")));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Reduced operator on the `keep` factors, in their original order.
pub fn partial_trace(m: &ComplexMatrix, factor_dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    check_factor_dims(m, factor_dims)?;
    check_factor_subset(keep, factor_dims.len())?;
    if keep.is_empty() {
        return Err(Error::Dimension("partial trace must keep at least one factor".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let traced: Vec<usize> = (0..factor_dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| factor_dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| factor_dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();

    // (kept index, traced index) for every full index
    let split: Vec<(usize, usize)> = (0..m.dim)
        .map(|i| {
            let d = index_digits(i, factor_dims);
            let kd: Vec<usize> = keep_sorted.iter().map(|&k| d[k]).collect();
            let td: Vec<usize> = traced.iter().map(|&k| d[k]).collect();
            (digits_index(&kd, &kept_dims), digits_index(&td, &traced_dims))
        })
        .collect();

    let mut out = ComplexMatrix::zeros(out_dim);
    for i in 0..m.dim {
        let (ki, ti) = split[i];
        for j in 0..m.dim {
            let (kj, tj) = split[j];
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Reorders tensor factors: new factor `l` is old factor `perm[l]`.
pub fn permute_factors(m: &ComplexMatrix, factor_dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    check_factor_dims(m, factor_dims)?;
    if perm.len() != factor_dims.len() {
        return Err(Error::Dimension("permutation length differs from factor count".into()));
    }
    check_factor_subset(perm, factor_dims.len())?;
    let new_dims: Vec<usize> = perm.iter().map(|&k| factor_dims[k]).collect();
    let map: Vec<usize> = (0..m.dim)
        .map(|i| {
            let d = index_digits(i, factor_dims);
            let nd: Vec<usize> = perm.iter().map(|&k| d[k]).collect();
            digits_index(&nd, &new_dims)
        })
        .collect();
    let mut out = ComplexMatrix::zeros(m.dim);
    for i in 0..m.dim {
        for j in 0..m.dim {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Full-space operator acting as `op` on the `targets` factors (in the
/// listed order) and as identity elsewhere.
pub fn lift(op: &ComplexMatrix, factor_dims: &[usize], targets: &[usize]) -> Result<ComplexMatrix> {
    check_factor_subset(targets, factor_dims.len())?;
    let target_dims: Vec<usize> = targets.iter().map(|&k| factor_dims[k]).collect();
    let target_total: usize = target_dims.iter().product();
    if target_total != op.dim {
        return Err(Error::Dimension(format!(
            "operator dim {} does not match target factors {target_dims:?}",
            op.dim
        )));
    }
    let total: usize = factor_dims.iter().product();
    let rest: Vec<usize> = (0..factor_dims.len()).filter(|k| !targets.contains(k)).collect();
    let parts: Vec<(usize, Vec<usize>)> = (0..total)
        .map(|i| {
            let d = index_digits(i, factor_dims);
            let td: Vec<usize> = targets.iter().map(|&k| d[k]).collect();
            let rd: Vec<usize> = rest.iter().map(|&k| d[k]).collect();
            (digits_index(&td, &target_dims), rd)
        })
        .collect();
    Ok(ComplexMatrix::from_fn(total, |i, j| {
        if parts[i].1 == parts[j].1 {
            op[(parts[i].0, parts[j].0)]
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Target-factor index of every full basis index.
pub fn target_index_map(factor_dims: &[usize], targets: &[usize]) -> Vec<usize> {
    let target_dims: Vec<usize> = targets.iter().map(|&k| factor_dims[k]).collect();
    let total: usize = factor_dims.iter().product();
    (0..total)
        .map(|i| {
            let d = index_digits(i, factor_dims);
            let td: Vec<usize> = targets.iter().map(|&k| d[k]).collect();
            digits_index(&td, &target_dims)
        })
        .collect()
}

/// Real part of a Hermitian matrix's diagonal.
pub fn real_diagonal(m: &ComplexMatrix) -> Vec<f64> {
    (0..m.dim()).map(|i| m[(i, i)].re).collect()
}

/// Default tolerance check for Hermitian input used across the crate.
pub fn ensure_hermitian(m: &ComplexMatrix) -> Result<()> {
    m.check_hermitian(tolerances::HERMITIAN)
}
