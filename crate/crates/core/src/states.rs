//! Validated density operators with party structure, and the state catalog.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::matcore::{self, hermitian_eig, tensor, ComplexMatrix, C64};
use crate::tolerances;

/// Assignment of tensor factors to named parties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartySplit {
    parties: Vec<String>,
    factor_assignment: Vec<String>,
    factor_dims: Vec<usize>,
}

impl PartySplit {
    /// Parties are ordered by first appearance in `factor_assignment`.
    pub fn new(factor_dims: Vec<usize>, factor_assignment: Vec<String>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::Party("at least one tensor factor is required".into()));
        }
        if factor_dims.len() != factor_assignment.len() {
            return Err(Error::Party(format!(
                "{} factor dims but {} party labels",
                factor_dims.len(),
                factor_assignment.len()
            )));
        }
        if factor_dims.contains(&0) {
            return Err(Error::Party("factor dimensions must be positive".into()));
        }
        let mut parties: Vec<String> = Vec::new();
        for label in &factor_assignment {
            if !parties.contains(label) {
                parties.push(label.clone());
            }
        }
        Ok(Self {
            parties,
            factor_assignment,
            factor_dims,
        })
    }

    /// One factor per party, labelled `A`, `B`, `C`, ...
    pub fn one_factor_each(factor_dims: &[usize]) -> Result<Self> {
        let labels = (0..factor_dims.len()).map(party_label).collect();
        Self::new(factor_dims.to_vec(), labels)
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn factor_assignment(&self) -> &[String] {
        &self.factor_assignment
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// log2 of the total dimension.
    pub fn n_bits(&self) -> f64 {
        self.factor_dims.iter().map(|&d| (d as f64).log2()).sum()
    }

    pub fn has_party(&self, party: &str) -> bool {
        self.parties.iter().any(|p| p == party)
    }

    pub fn factors_of(&self, party: &str) -> Vec<usize> {
        self.factor_assignment
            .iter()
            .enumerate()
            .filter(|(_, p)| *p == party)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn party_dim(&self, party: &str) -> usize {
        self.factors_of(party).iter().map(|&k| self.factor_dims[k]).product()
    }

    pub fn party_dims(&self) -> Vec<usize> {
        self.parties.iter().map(|p| self.party_dim(p)).collect()
    }

    /// Factor permutation that makes every party contiguous, parties in order.
    pub fn party_grouping(&self) -> Vec<usize> {
        self.parties.iter().flat_map(|p| self.factors_of(p)).collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::new(
            perm.iter().map(|&k| self.factor_dims[k]).collect(),
            perm.iter().map(|&k| self.factor_assignment[k].clone()).collect(),
        )
        .expect("permutation of a valid split")
    }

    pub fn without_factor(&self, factor: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.factor_dims.len()).filter(|&k| k != factor).collect();
        if keep.is_empty() {
            return Err(Error::Party("cannot remove the last tensor factor".into()));
        }
        Self::new(
            keep.iter().map(|&k| self.factor_dims[k]).collect(),
            keep.iter().map(|&k| self.factor_assignment[k].clone()).collect(),
        )
    }

    pub fn with_factor(&self, party: &str, dim: usize) -> Result<Self> {
        let mut dims = self.factor_dims.clone();
        let mut labels = self.factor_assignment.clone();
        dims.push(dim);
        labels.push(party.to_string());
        Self::new(dims, labels)
    }

    pub fn relabel_factor(&self, factor: usize, party: &str) -> Self {
        let mut labels = self.factor_assignment.clone();
        labels[factor] = party.to_string();
        Self::new(self.factor_dims.clone(), labels).expect("relabel keeps dims")
    }

    /// Factors of `other` are appended; parties with equal labels merge.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.factor_dims.clone();
        dims.extend(&other.factor_dims);
        let mut labels = self.factor_assignment.clone();
        labels.extend(other.factor_assignment.iter().cloned());
        Self::new(dims, labels).expect("concatenation of valid splits")
    }
}

fn party_label(i: usize) -> String {
    const NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
    NAMES.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("P{i}"))
}

/// Positive, unit-trace Hermitian operator with a party split.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    split: PartySplit,
    n_bits: f64,
}

impl DensityOperator {
    /// Checks every invariant and reports all violations together.
    pub fn validate(matrix: ComplexMatrix, split: PartySplit) -> Result<Self> {
        if matrix.dim() != split.total_dim() {
            return Err(Error::Dimension(format!(
                "matrix dim {} but factor dims {:?} give {}",
                matrix.dim(),
                split.factor_dims(),
                split.total_dim()
            )));
        }
        let mut violations = Vec::new();
        let tr = matrix.trace();
        let trace_dev = (tr - C64::new(1.0, 0.0)).norm();
        if trace_dev > tolerances::TRACE || !trace_dev.is_finite() {
            violations.push(Violation {
                check: "trace",
                value: tr.re,
                tolerance: tolerances::TRACE,
                detail: if tr.im != 0.0 {
                    format!("imaginary part {:.3e}", tr.im)
                } else {
                    String::new()
                },
            });
        }
        let (herm_dev, row, col) = matrix.hermiticity_violation();
        if herm_dev > tolerances::HERMITIAN || !herm_dev.is_finite() {
            violations.push(Violation {
                check: "hermiticity",
                value: herm_dev,
                tolerance: tolerances::HERMITIAN,
                detail: format!("entry ({row}, {col})"),
            });
        }
        if matrix.as_slice().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            let e = hermitian_eig(&matrix.hermitize())?;
            let min = *e.eigenvalues.last().expect("non-empty");
            if min < -tolerances::POSITIVITY {
                violations.push(Violation {
                    check: "positivity",
                    value: min,
                    tolerance: tolerances::POSITIVITY,
                    detail: "smallest eigenvalue".into(),
                });
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidState(violations));
        }
        Ok(Self::from_trusted(matrix, split))
    }

    /// For outputs of operations that preserve validity by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, split: PartySplit) -> Self {
        let n_bits = split.n_bits();
        Self {
            matrix: matrix.hermitize(),
            split,
            n_bits,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn split(&self) -> &PartySplit {
        &self.split
    }

    /// Number of qubits, log2 of the total dimension.
    pub fn n_bits(&self) -> f64 {
        self.n_bits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self) -> bool {
        1.0 - self.purity() <= tolerances::PURITY
    }

    /// Reduced operator of one party.
    pub fn reduced(&self, party: &str) -> Result<ComplexMatrix> {
        let keep = self.split.factors_of(party);
        if keep.is_empty() {
            return Err(Error::Party(format!("unknown party '{party}'")));
        }
        matcore::partial_trace(&self.matrix, self.split.factor_dims(), &keep)
    }

    /// Reduced state on a subset of factors, keeping their labels.
    pub fn reduced_factors(&self, keep: &[usize]) -> Result<DensityOperator> {
        let m = matcore::partial_trace(&self.matrix, self.split.factor_dims(), keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let split = PartySplit::new(
            keep.iter().map(|&k| self.split.factor_dims()[k]).collect(),
            keep.iter().map(|&k| self.split.factor_assignment()[k].clone()).collect(),
        )?;
        Ok(Self::from_trusted(m, split))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_trusted(tensor(&self.matrix, &other.matrix), self.split.tensor(&other.split))
    }

    /// `rho^{(x) k}` with parties merged by label.
    pub fn copies(&self, k: usize) -> Self {
        let mut out = self.clone();
        for _ in 1..k {
            out = out.tensor(self);
        }
        out
    }

    /// Same state with factors reordered so each party is contiguous.
    pub fn grouped_by_party(&self) -> Self {
        let perm = self.split.party_grouping();
        if perm.iter().enumerate().all(|(i, &k)| i == k) {
            return self.clone();
        }
        let m = matcore::permute_factors(&self.matrix, self.split.factor_dims(), &perm)
            .expect("valid permutation");
        Self::from_trusted(m, self.split.permuted(&perm))
    }

    /// Conjugation by a unitary on the whole space.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        u.check_unitary(tolerances::UNITARY)?;
        Ok(Self::from_trusted(self.matrix.conjugate_by(u)?, self.split.clone()))
    }
}

/// Parameter value in a catalog request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
}

pub type Params = BTreeMap<String, ParamValue>;

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: &[&str] = &[
    "bell",
    "ghz",
    "werner",
    "isotropic",
    "classical_correlated",
    "pure_schmidt",
    "domino",
    "domino_mixture",
    "max_mixed",
    "product_pure",
];

fn number(params: &Params, name: &str, default: Option<f64>) -> Result<f64> {
    match params.get(name) {
        Some(ParamValue::Number(x)) => Ok(*x),
        Some(ParamValue::List(v)) if v.len() == 1 => Ok(v[0]),
        Some(ParamValue::List(_)) => Err(Error::Parameter {
            name: name.into(),
            value: f64::NAN,
            reason: "expected a single number".into(),
        }),
        None => default.ok_or_else(|| Error::Parameter {
            name: name.into(),
            value: f64::NAN,
            reason: "required parameter missing".into(),
        }),
    }
}

fn integer(params: &Params, name: &str, default: Option<f64>, range: (usize, usize)) -> Result<usize> {
    let x = number(params, name, default)?;
    if x.fract() != 0.0 || x < range.0 as f64 || x > range.1 as f64 {
        return Err(Error::Parameter {
            name: name.into(),
            value: x,
            reason: format!("expected an integer in {}..={}", range.0, range.1),
        });
    }
    Ok(x as usize)
}

fn unit_interval(params: &Params, name: &str) -> Result<f64> {
    let x = number(params, name, None)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Parameter {
            name: name.into(),
            value: x,
            reason: "must lie in [0, 1]".into(),
        });
    }
    Ok(x)
}

fn dims_param(params: &Params) -> Result<Vec<usize>> {
    let raw = match params.get("dims") {
        Some(ParamValue::List(v)) => v.clone(),
        Some(ParamValue::Number(x)) => vec![*x],
        None => vec![2.0, 2.0],
    };
    raw.iter()
        .map(|&x| {
            if x.fract() != 0.0 || !(1.0..=64.0).contains(&x) {
                Err(Error::Parameter {
                    name: "dims".into(),
                    value: x,
                    reason: "each dimension must be an integer in 1..=64".into(),
                })
            } else {
                Ok(x as usize)
            }
        })
        .collect()
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(1/sqrt d) sum_i |i>|i>`.
pub fn max_entangled_vector(d: usize) -> Vec<C64> {
    let mut v = vec![real(0.0); d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = real(amp);
    }
    v
}

fn basis_vec(d: usize, i: usize) -> Vec<C64> {
    let mut v = vec![real(0.0); d];
    v[i] = real(1.0);
    v
}

fn superpose(d: usize, i: usize, j: usize, sign: f64) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![real(0.0); d];
    v[i] = real(s);
    v[j] = real(sign * s);
    v
}

/// Local factors `(alice, bob)` of the nine 3x3 domino product states:
/// the center `|1>|1>` followed by `|0>|0+-1>`, `|2>|1+-2>`, `|1+-2>|0>`,
/// `|0+-1>|2>`.
pub fn domino_factors() -> Vec<(Vec<C64>, Vec<C64>)> {
    let k = |i| basis_vec(3, i);
    vec![
        (k(1), k(1)),
        (k(0), superpose(3, 0, 1, 1.0)),
        (k(0), superpose(3, 0, 1, -1.0)),
        (k(2), superpose(3, 1, 2, 1.0)),
        (k(2), superpose(3, 1, 2, -1.0)),
        (superpose(3, 1, 2, 1.0), k(0)),
        (superpose(3, 1, 2, -1.0), k(0)),
        (superpose(3, 0, 1, 1.0), k(2)),
        (superpose(3, 0, 1, -1.0), k(2)),
    ]
}

/// The nine domino vectors in the 9-dim product space, after checking that
/// they form an orthonormal basis.
pub fn domino_basis() -> Result<Vec<Vec<C64>>> {
    let vecs: Vec<Vec<C64>> = domino_factors()
        .iter()
        .map(|(a, b)| matcore::tensor_vec(a, b))
        .collect();
    let u = ComplexMatrix::from_columns(&vecs)?;
    let dev = u.unitarity_deviation();
    if dev > 1e-12 {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(vecs)
}

/// Mixture of domino projectors with the given weights.
pub fn domino_mixture(weights: &[f64]) -> Result<DensityOperator> {
    if weights.len() != 9 || weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::Parameter {
            name: "weights".into(),
            value: weights.len() as f64,
            reason: "need nine nonnegative weights".into(),
        });
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Parameter {
            name: "weights".into(),
            value: total,
            reason: "weights must not all vanish".into(),
        });
    }
    let basis = domino_basis()?;
    let mut m = ComplexMatrix::zeros(9);
    for (w, v) in weights.iter().zip(&basis) {
        m = m.add(&ComplexMatrix::outer(v).scale_real(w / total))?;
    }
    DensityOperator::validate(m, PartySplit::one_factor_each(&[3, 3])?)
}

fn pure(v: &[C64], dims: &[usize]) -> Result<DensityOperator> {
    DensityOperator::validate(ComplexMatrix::outer(v), PartySplit::one_factor_each(dims)?)
}

/// Named states.
///
/// Conventions: `werner(p) = p |psi+><psi+| + (1-p) I/4`;
/// `isotropic(F, d) = F P+ + (1-F)/(d^2-1) (I - P+)`;
/// `pure_schmidt(theta) = cos(theta)|00> + sin(theta)|11>`;
/// `classical_correlated(d) = (1/d) sum_i |ii><ii|`.
pub fn catalog(name: &str, params: &Params) -> Result<DensityOperator> {
    match name {
        "bell" => {
            let d = integer(params, "d", Some(2.0), (2, 8))?;
            pure(&max_entangled_vector(d), &[d, d])
        }
        "ghz" => {
            let n = integer(params, "parties", Some(3.0), (2, 6))?;
            let dim = 1 << n;
            let mut v = vec![real(0.0); dim];
            v[0] = real(std::f64::consts::FRAC_1_SQRT_2);
            v[dim - 1] = real(std::f64::consts::FRAC_1_SQRT_2);
            pure(&v, &vec![2; n])
        }
        "werner" => {
            let p = unit_interval(params, "p")?;
            let bell = ComplexMatrix::outer(&max_entangled_vector(2));
            let m = bell
                .scale_real(p)
                .add(&ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0))?;
            DensityOperator::validate(m, PartySplit::one_factor_each(&[2, 2])?)
        }
        "isotropic" => {
            let f = unit_interval(params, "F")?;
            let d = integer(params, "d", Some(2.0), (2, 8))?;
            let p = ComplexMatrix::outer(&max_entangled_vector(d));
            let rest = ComplexMatrix::identity(d * d).sub(&p)?;
            let m = p
                .scale_real(f)
                .add(&rest.scale_real((1.0 - f) / (d * d - 1) as f64))?;
            DensityOperator::validate(m, PartySplit::one_factor_each(&[d, d])?)
        }
        "classical_correlated" => {
            let d = integer(params, "d", Some(2.0), (2, 8))?;
            let mut diag = vec![0.0; d * d];
            for i in 0..d {
                diag[i * d + i] = 1.0 / d as f64;
            }
            DensityOperator::validate(
                ComplexMatrix::from_real_diagonal(&diag),
                PartySplit::one_factor_each(&[d, d])?,
            )
        }
        "pure_schmidt" => {
            let theta = number(params, "theta", None)?;
            if !theta.is_finite() {
                return Err(Error::Parameter {
                    name: "theta".into(),
                    value: theta,
                    reason: "must be finite".into(),
                });
            }
            pure(
                &[real(theta.cos()), real(0.0), real(0.0), real(theta.sin())],
                &[2, 2],
            )
        }
        "domino" => {
            let i = integer(params, "i", None, (0, 8))?;
            let basis = domino_basis()?;
            pure(&basis[i], &[3, 3])
        }
        "domino_mixture" => {
            let weights = match params.get("weights") {
                Some(ParamValue::List(w)) => w.clone(),
                _ => {
                    let seed = integer(params, "seed", Some(0.0), (0, u32::MAX as usize))?;
                    let mut rng = matcore::seeded_rng(seed as u64);
                    matcore::random_probabilities_with(&mut rng, 9, 9)?
                }
            };
            domino_mixture(&weights)
        }
        "max_mixed" => {
            let dims = dims_param(params)?;
            let total: usize = dims.iter().product();
            DensityOperator::validate(
                ComplexMatrix::identity(total).scale_real(1.0 / total as f64),
                PartySplit::one_factor_each(&dims)?,
            )
        }
        "product_pure" => {
            let dims = dims_param(params)?;
            let total: usize = dims.iter().product();
            pure(&basis_vec(total, 0), &dims)
        }
        other => Err(Error::UnknownCatalog(other.to_string())),
    }
}

/// A state reference as found in JSON input files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Catalog {
        catalog: String,
        #[serde(default)]
        params: Params,
    },
    Explicit {
        factor_dims: Vec<usize>,
        /// Party label of each factor.
        parties: Vec<String>,
        matrix: ComplexMatrix,
    },
}

impl StateSpec {
    pub fn resolve(&self) -> Result<DensityOperator> {
        match self {
            StateSpec::Catalog { catalog: name, params } => catalog(name, params),
            StateSpec::Explicit {
                factor_dims,
                parties,
                matrix,
            } => DensityOperator::validate(
                matrix.clone(),
                PartySplit::new(factor_dims.clone(), parties.clone())?,
            ),
        }
    }

    pub fn from_state(rho: &DensityOperator) -> Self {
        StateSpec::Explicit {
            factor_dims: rho.split().factor_dims().to_vec(),
            parties: rho.split().factor_assignment().to_vec(),
            matrix: rho.matrix().clone(),
        }
    }
}

/// Reads and validates a state file.
pub fn load_state_file(path: &Path) -> Result<DensityOperator> {
    let text = std::fs::read_to_string(path)?;
    let spec: StateSpec = serde_json::from_str(&text)?;
    spec.resolve()
}
