//! Noisy operations, the dephasing channel, and scripted NLOCC protocols.
//!
//! Classical communication is a [`ProtocolStep::DephasedSend`]: the factor is
//! dephased in the given basis and handed to the receiving party.
//! Measurements are not primitive; script them as ancilla + unitary +
//! dephasing.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, lift, target_index_map, tensor, ComplexMatrix, C64};
use crate::measures::{self, schmidt};
use crate::states::{DensityOperator, PartySplit, StateSpec};
use crate::tolerances;

/// Inline matrix or a named gate resolved against the target dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Inline(ComplexMatrix),
    Named {
        named: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        params: BTreeMap<String, f64>,
    },
}

impl MatrixSpec {
    pub fn named(name: &str) -> Self {
        MatrixSpec::Named {
            named: name.into(),
            params: BTreeMap::new(),
        }
    }

    /// Matrix for a target of dimension `dim`.
    pub fn resolve(&self, dim: usize) -> Result<ComplexMatrix> {
        let m = match self {
            MatrixSpec::Inline(m) => m.clone(),
            MatrixSpec::Named { named, params } => named_matrix(named, params, dim)?,
        };
        if m.dim() != dim {
            return Err(Error::Dimension(format!(
                "matrix of dim {} applied to a target of dim {dim}",
                m.dim()
            )));
        }
        Ok(m)
    }
}

fn named_matrix(name: &str, params: &BTreeMap<String, f64>, dim: usize) -> Result<ComplexMatrix> {
    let r = |x: f64| C64::new(x, 0.0);
    let qubit = |rows: [[C64; 2]; 2]| {
        if dim != 2 {
            return Err(Error::Dimension(format!("'{name}' is a qubit gate, target dim {dim}")));
        }
        ComplexMatrix::from_rows(rows.iter().map(|row| row.to_vec()).collect())
    };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        "identity" => Ok(ComplexMatrix::identity(dim)),
        "hadamard" => qubit([[r(h), r(h)], [r(h), r(-h)]]),
        "pauli_x" => qubit([[r(0.0), r(1.0)], [r(1.0), r(0.0)]]),
        "pauli_y" => qubit([[r(0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), r(0.0)]]),
        "pauli_z" => qubit([[r(1.0), r(0.0)], [r(0.0), r(-1.0)]]),
        "ry" => {
            let theta = *params.get("theta").ok_or_else(|| Error::Parameter {
                name: "theta".into(),
                value: f64::NAN,
                reason: "ry needs theta".into(),
            })?;
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            qubit([[r(c), r(-s)], [r(s), r(c)]])
        }
        "fourier" => {
            let n = dim as f64;
            Ok(ComplexMatrix::from_fn(dim, |j, k| {
                C64::from_polar(1.0 / n.sqrt(), 2.0 * std::f64::consts::PI * (j * k) as f64 / n)
            }))
        }
        other => Err(Error::Parse(format!("unknown named matrix '{other}'"))),
    }
}

/// One elementary operation of the NLOCC class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolStep {
    /// Unitary on all factors held by `party`, in factor order.
    ApplyLocalUnitary { party: String, unitary: MatrixSpec },
    /// Appends a factor in state `I/dim` held by `party`.
    AddMaxMixedAncilla { party: String, dim: usize },
    /// Discards a factor held by `party`.
    TraceOut { party: String, factor: usize },
    /// Dephases `factor` in `basis` and moves it from `from_party` to `to_party`.
    DephasedSend {
        factor: usize,
        basis: MatrixSpec,
        from_party: String,
        to_party: String,
    },
    /// Dephases the listed factors of `party` jointly in `basis`.
    DephaseLocal {
        party: String,
        factors: Vec<usize>,
        basis: MatrixSpec,
    },
}

impl ProtocolStep {
    pub fn label(&self) -> String {
        match self {
            ProtocolStep::ApplyLocalUnitary { party, .. } => format!("apply_local_unitary({party})"),
            ProtocolStep::AddMaxMixedAncilla { party, dim } => {
                format!("add_max_mixed_ancilla({party}, {dim})")
            }
            ProtocolStep::TraceOut { party, factor } => format!("trace_out({party}, {factor})"),
            ProtocolStep::DephasedSend {
                factor,
                from_party,
                to_party,
                ..
            } => format!("dephased_send({factor}, {from_party} -> {to_party})"),
            ProtocolStep::DephaseLocal { party, factors, .. } => {
                format!("dephase_local({party}, {factors:?})")
            }
        }
    }

    /// Unitary steps leave the entropy unchanged.
    pub fn is_unitary(&self) -> bool {
        matches!(self, ProtocolStep::ApplyLocalUnitary { .. })
    }
}

fn require_party(split: &PartySplit, party: &str) -> Result<()> {
    if split.has_party(party) {
        Ok(())
    } else {
        Err(Error::Party(format!("unknown party '{party}'")))
    }
}

fn require_owned(split: &PartySplit, party: &str, factor: usize) -> Result<()> {
    require_party(split, party)?;
    match split.factor_assignment().get(factor) {
        Some(p) if p == party => Ok(()),
        Some(p) => Err(Error::Party(format!("factor {factor} belongs to '{p}', not '{party}'"))),
        None => Err(Error::Dimension(format!(
            "factor {factor} out of range ({} factors)",
            split.factor_dims().len()
        ))),
    }
}

/// Dephasing of the `targets` factors in `basis` (columns are basis vectors).
pub fn dephase_factors(
    m: &ComplexMatrix,
    factor_dims: &[usize],
    targets: &[usize],
    basis: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    basis.check_unitary(tolerances::UNITARY)?;
    let l = lift(basis, factor_dims, targets)?;
    let mut rotated = l.adjoint().matmul(m)?.matmul(&l)?;
    let idx = target_index_map(factor_dims, targets);
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            if idx[i] != idx[j] {
                rotated[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    l.matmul(&rotated)?.matmul(&l.adjoint())
}

/// `sum_i |b_i><b_i| rho |b_i><b_i|` over the whole space.
pub fn dephase(rho: &DensityOperator, basis: &ComplexMatrix) -> Result<DensityOperator> {
    if basis.dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "basis dim {} vs state dim {}",
            basis.dim(),
            rho.dim()
        )));
    }
    let all: Vec<usize> = (0..rho.split().factor_dims().len()).collect();
    let m = dephase_factors(rho.matrix(), rho.split().factor_dims(), &all, basis)?;
    Ok(DensityOperator::from_trusted(m, rho.split().clone()))
}

/// A map on operators with party structure, used by [`check_pmm`].
pub trait Channel {
    fn apply_raw(&self, m: &ComplexMatrix, split: &PartySplit) -> Result<(ComplexMatrix, PartySplit)>;
}

impl Channel for ProtocolStep {
    fn apply_raw(&self, m: &ComplexMatrix, split: &PartySplit) -> Result<(ComplexMatrix, PartySplit)> {
        let dims = split.factor_dims();
        if m.dim() != split.total_dim() {
            return Err(Error::Dimension(format!(
                "operator dim {} vs split dim {}",
                m.dim(),
                split.total_dim()
            )));
        }
        match self {
            ProtocolStep::ApplyLocalUnitary { party, unitary } => {
                require_party(split, party)?;
                let factors = split.factors_of(party);
                let u = unitary.resolve(split.party_dim(party))?;
                u.check_unitary(tolerances::UNITARY)?;
                let l = lift(&u, dims, &factors)?;
                Ok((m.conjugate_by(&l)?, split.clone()))
            }
            ProtocolStep::AddMaxMixedAncilla { party, dim } => {
                require_party(split, party)?;
                if *dim == 0 {
                    return Err(Error::Dimension("ancilla dimension must be positive".into()));
                }
                let anc = ComplexMatrix::identity(*dim).scale_real(1.0 / *dim as f64);
                Ok((tensor(m, &anc), split.with_factor(party, *dim)?))
            }
            ProtocolStep::TraceOut { party, factor } => {
                require_owned(split, party, *factor)?;
                let keep: Vec<usize> = (0..dims.len()).filter(|k| k != factor).collect();
                let out_split = split.without_factor(*factor)?;
                Ok((matcore::partial_trace(m, dims, &keep)?, out_split))
            }
            ProtocolStep::DephasedSend {
                factor,
                basis,
                from_party,
                to_party,
            } => {
                require_owned(split, from_party, *factor)?;
                require_party(split, to_party)?;
                let b = basis.resolve(dims[*factor])?;
                let out = dephase_factors(m, dims, &[*factor], &b)?;
                Ok((out, split.relabel_factor(*factor, to_party)))
            }
            ProtocolStep::DephaseLocal { party, factors, basis } => {
                if factors.is_empty() {
                    return Err(Error::Dimension("dephase_local needs at least one factor".into()));
                }
                for &f in factors {
                    require_owned(split, party, f)?;
                }
                let target_dim: usize = factors.iter().map(|&f| dims[f]).product();
                let b = basis.resolve(target_dim)?;
                Ok((dephase_factors(m, dims, factors, &b)?, split.clone()))
            }
        }
    }
}

/// Exact action of one step on a state.
pub fn apply_step(rho: &DensityOperator, step: &ProtocolStep) -> Result<DensityOperator> {
    let (m, split) = step.apply_raw(rho.matrix(), rho.split())?;
    Ok(DensityOperator::from_trusted(m, split))
}

/// Ordered composition of steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub name: String,
    #[serde(default)]
    pub provenance: String,
    pub steps: Vec<ProtocolStep>,
}

impl Channel for Protocol {
    fn apply_raw(&self, m: &ComplexMatrix, split: &PartySplit) -> Result<(ComplexMatrix, PartySplit)> {
        let mut cur = (m.clone(), split.clone());
        for (k, step) in self.steps.iter().enumerate() {
            cur = step.apply_raw(&cur.0, &cur.1).map_err(|e| Error::Step {
                step: k + 1,
                reason: e.to_string(),
            })?;
        }
        Ok(cur)
    }
}

/// Outcome of a maximally-mixed preservation check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PmmReport {
    pub pass: bool,
    pub max_deviation: f64,
    pub input_dim: usize,
    pub output_dim: usize,
}

/// Applies the channel to `I/d_in` and measures the max-entry distance to
/// `I/d_out`.
pub fn check_pmm(channel: &impl Channel, input: &PartySplit) -> Result<PmmReport> {
    let d_in = input.total_dim();
    let mixed = ComplexMatrix::identity(d_in).scale_real(1.0 / d_in as f64);
    let (out, out_split) = channel.apply_raw(&mixed, input)?;
    let d_out = out_split.total_dim();
    let target = ComplexMatrix::identity(d_out).scale_real(1.0 / d_out as f64);
    let max_deviation = out.max_abs_diff(&target);
    Ok(PmmReport {
        pass: max_deviation <= tolerances::PMM,
        max_deviation,
        input_dim: d_in,
        output_dim: d_out,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartyDim {
    pub party: String,
    pub dim: usize,
}

/// Information bookkeeping after one step (step 0 is the input).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub step: usize,
    pub label: String,
    pub n_bits: f64,
    pub entropy: f64,
    pub information: f64,
    pub party_dims: Vec<PartyDim>,
    /// Maximally-mixed preservation deviation of the step, absent for the input.
    pub pmm_deviation: Option<f64>,
}

impl LedgerEntry {
    fn of(step: usize, label: String, rho: &DensityOperator, pmm_deviation: Option<f64>) -> Self {
        let entropy = measures::von_neumann_entropy(rho);
        Self {
            step,
            label,
            n_bits: rho.n_bits(),
            entropy,
            information: rho.n_bits() - entropy,
            party_dims: rho
                .split()
                .parties()
                .iter()
                .map(|p| PartyDim {
                    party: p.clone(),
                    dim: rho.split().party_dim(p),
                })
                .collect(),
            pmm_deviation,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub final_state: DensityOperator,
    pub ledger: Vec<LedgerEntry>,
}

/// Runs every step, checking it preserves the maximally mixed state and
/// logging N, S, I and party dimensions after each. Step numbers in errors
/// and in the ledger are 1-based.
pub fn run_protocol(rho: &DensityOperator, protocol: &Protocol) -> Result<ProtocolRun> {
    let mut state = rho.clone();
    let mut ledger = vec![LedgerEntry::of(0, "input".into(), &state, None)];
    for (k, step) in protocol.steps.iter().enumerate() {
        let fail = |e: Error| Error::Step {
            step: k + 1,
            reason: e.to_string(),
        };
        let pmm = check_pmm(step, state.split()).map_err(fail)?;
        if !pmm.pass {
            return Err(Error::Step {
                step: k + 1,
                reason: format!("maximally mixed state not preserved, deviation {:.3e}", pmm.max_deviation),
            });
        }
        state = apply_step(&state, step).map_err(fail)?;
        ledger.push(LedgerEntry::of(k + 1, step.label(), &state, Some(pmm.max_deviation)));
    }
    Ok(ProtocolRun {
        final_state: state,
        ledger,
    })
}

/// Concentration protocol for a bipartite pure state: the first party
/// rotates its Schmidt basis onto the computational basis, then sends every
/// factor through the dephasing channel to the second party.
pub fn pure_state_concentration(psi: &DensityOperator) -> Result<Protocol> {
    let form = schmidt(psi)?;
    let parties = psi.split().parties();
    let (alice, bob) = (&parties[0], &parties[1]);
    let mut steps = vec![ProtocolStep::ApplyLocalUnitary {
        party: alice.clone(),
        unitary: MatrixSpec::Inline(form.alice_basis.adjoint()),
    }];
    for f in psi.split().factors_of(alice) {
        steps.push(ProtocolStep::DephasedSend {
            factor: f,
            basis: MatrixSpec::named("identity"),
            from_party: alice.clone(),
            to_party: bob.clone(),
        });
    }
    Ok(Protocol {
        name: "pure_state_concentration".into(),
        provenance: "Schmidt rotation then dephased send of every factor of the first party".into(),
        steps,
    })
}

/// Protocol file: a protocol plus an optional input state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<StateSpec>,
    #[serde(flatten)]
    pub protocol: Protocol,
}

pub fn load_protocol_file(path: &Path) -> Result<ProtocolFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Random constructible step on the given split, for property suites.
pub fn random_step_with(rng: &mut impl Rng, split: &PartySplit) -> ProtocolStep {
    let parties = split.parties();
    let party = parties[rng.random_range(0..parties.len())].clone();
    let owned = split.factors_of(&party);
    let factor = owned[rng.random_range(0..owned.len())];
    let fdim = split.factor_dims()[factor];
    match rng.random_range(0..5) {
        0 => ProtocolStep::ApplyLocalUnitary {
            unitary: MatrixSpec::Inline(matcore::random_unitary_with(rng, split.party_dim(&party))),
            party,
        },
        1 => ProtocolStep::AddMaxMixedAncilla {
            party,
            dim: rng.random_range(2..=3),
        },
        2 if split.factor_dims().len() > 1 => ProtocolStep::TraceOut { party, factor },
        3 => {
            let to = parties[rng.random_range(0..parties.len())].clone();
            ProtocolStep::DephasedSend {
                factor,
                basis: MatrixSpec::Inline(matcore::random_unitary_with(rng, fdim)),
                from_party: party,
                to_party: to,
            }
        }
        _ => ProtocolStep::DephaseLocal {
            basis: MatrixSpec::Inline(matcore::random_unitary_with(rng, split.party_dim(&party))),
            factors: owned,
            party,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{random_density_with, random_unitary_with, seeded_rng};
    use crate::measures::{shannon_entropy_in_basis, von_neumann_entropy};
    use crate::states::{catalog, Params};

    fn bell() -> DensityOperator {
        catalog("bell", &Params::new()).unwrap()
    }

    fn random_state(seed: u64) -> DensityOperator {
        let mut rng = seeded_rng(seed);
        DensityOperator::validate(
            random_density_with(&mut rng, 4, 3).unwrap(),
            PartySplit::one_factor_each(&[2, 2]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn ancilla_then_trace_is_identity() {
        let rho = random_state(1);
        let with = apply_step(
            &rho,
            &ProtocolStep::AddMaxMixedAncilla {
                party: "A".into(),
                dim: 3,
            },
        )
        .unwrap();
        assert_eq!(with.split().factor_dims(), &[2, 2, 3]);
        let back = apply_step(
            &with,
            &ProtocolStep::TraceOut {
                party: "A".into(),
                factor: 2,
            },
        )
        .unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) <= 1e-12);
        assert_eq!(back.split(), rho.split());
    }

    #[test]
    fn dephased_send_of_bell_half() {
        let out = apply_step(
            &bell(),
            &ProtocolStep::DephasedSend {
                factor: 0,
                basis: MatrixSpec::named("identity"),
                from_party: "A".into(),
                to_party: "B".into(),
            },
        )
        .unwrap();
        // 4x4 hand computation: 1/2 (|00><00| + |11><11|)
        let expected = ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
        assert_eq!(out.split().factors_of("B"), vec![0, 1]);
        assert!(out.split().factors_of("A").is_empty());
    }

    #[test]
    fn local_unitary_preserves_entropy() {
        let rho = random_state(2);
        let mut rng = seeded_rng(3);
        let out = apply_step(
            &rho,
            &ProtocolStep::ApplyLocalUnitary {
                party: "B".into(),
                unitary: MatrixSpec::Inline(random_unitary_with(&mut rng, 2)),
            },
        )
        .unwrap();
        assert!((von_neumann_entropy(&out) - von_neumann_entropy(&rho)).abs() < 1e-9);
    }

    #[test]
    fn step_errors() {
        let rho = bell();
        let bad = ProtocolStep::ApplyLocalUnitary {
            party: "A".into(),
            unitary: MatrixSpec::Inline(ComplexMatrix::identity(2).scale_real(2.0)),
        };
        assert!(matches!(apply_step(&rho, &bad), Err(Error::NotUnitary { .. })));
        let wrong_dim = ProtocolStep::ApplyLocalUnitary {
            party: "A".into(),
            unitary: MatrixSpec::Inline(ComplexMatrix::identity(3)),
        };
        assert!(matches!(apply_step(&rho, &wrong_dim), Err(Error::Dimension(_))));
        let not_owned = ProtocolStep::TraceOut {
            party: "A".into(),
            factor: 1,
        };
        assert!(apply_step(&rho, &not_owned).is_err());
        let bad_basis = ProtocolStep::DephaseLocal {
            party: "A".into(),
            factors: vec![0],
            basis: MatrixSpec::Inline(ComplexMatrix::from_real_diagonal(&[1.0, 0.5])),
        };
        assert!(matches!(apply_step(&rho, &bad_basis), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn dephase_cases() {
        let diag = DensityOperator::validate(
            ComplexMatrix::from_real_diagonal(&[0.1, 0.2, 0.3, 0.4]),
            PartySplit::one_factor_each(&[2, 2]).unwrap(),
        )
        .unwrap();
        let out = dephase(&diag, &ComplexMatrix::identity(4)).unwrap();
        assert!(out.matrix().max_abs_diff(diag.matrix()) <= 1e-12);

        let out = dephase(&bell(), &ComplexMatrix::identity(4)).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);

        let mut rng = seeded_rng(8);
        let rho = random_state(9);
        let b = random_unitary_with(&mut rng, 4);
        let once = dephase(&rho, &b).unwrap();
        let twice = dephase(&once, &b).unwrap();
        assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-12);
        // dephasing identity with the Shannon entropy in the same basis
        let h = shannon_entropy_in_basis(&rho, &b).unwrap();
        assert!((von_neumann_entropy(&once) - h).abs() < 1e-9);
        assert!(von_neumann_entropy(&once) >= von_neumann_entropy(&rho) - 1e-12);
    }

    #[test]
    fn pmm_for_unitary_and_dephasing() {
        let split = PartySplit::one_factor_each(&[2, 3]).unwrap();
        let mut rng = seeded_rng(10);
        let u = ProtocolStep::ApplyLocalUnitary {
            party: "B".into(),
            unitary: MatrixSpec::Inline(random_unitary_with(&mut rng, 3)),
        };
        let r = check_pmm(&u, &split).unwrap();
        assert!(r.pass && r.max_deviation <= 1e-14);
        let d = ProtocolStep::DephaseLocal {
            party: "A".into(),
            factors: vec![0],
            basis: MatrixSpec::Inline(random_unitary_with(&mut rng, 2)),
        };
        assert!(check_pmm(&d, &split).unwrap().pass);
    }

    /// Appends a pure |0> ancilla; not constructible as a ProtocolStep.
    struct PureAncilla;

    impl Channel for PureAncilla {
        fn apply_raw(&self, m: &ComplexMatrix, split: &PartySplit) -> Result<(ComplexMatrix, PartySplit)> {
            let zero = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
            let party = split.parties()[0].clone();
            Ok((tensor(m, &zero), split.with_factor(&party, 2)?))
        }
    }

    #[test]
    fn pure_ancilla_fails_pmm() {
        // trivial input system of dimension 1: output |0><0| against I/2
        let split = PartySplit::new(vec![1], vec!["A".into()]).unwrap();
        let r = check_pmm(&PureAncilla, &split).unwrap();
        assert!(!r.pass);
        assert!((r.max_deviation - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_protocol_returns_input() {
        let rho = random_state(4);
        let p = Protocol {
            name: "empty".into(),
            provenance: String::new(),
            steps: vec![],
        };
        let run = run_protocol(&rho, &p).unwrap();
        assert_eq!(run.final_state, rho);
        assert_eq!(run.ledger.len(), 1);
    }

    #[test]
    fn bell_concentration_ledger() {
        let p = pure_state_concentration(&bell()).unwrap();
        let run = run_protocol(&bell(), &p).unwrap();
        let first = run.ledger.first().unwrap();
        let last = run.ledger.last().unwrap();
        assert!((first.information - 2.0).abs() < 1e-9);
        assert!((last.information - 1.0).abs() < 1e-9);
        let expected = ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
        assert!(run.final_state.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn ghz_two_sends() {
        let ghz = catalog("ghz", &Params::new()).unwrap();
        let send = |f: usize, from: &str| ProtocolStep::DephasedSend {
            factor: f,
            basis: MatrixSpec::named("identity"),
            from_party: from.into(),
            to_party: "C".into(),
        };
        let p = Protocol {
            name: "ghz".into(),
            provenance: String::new(),
            steps: vec![send(0, "A"), send(1, "B")],
        };
        let run = run_protocol(&ghz, &p).unwrap();
        assert!((run.ledger[0].information - 3.0).abs() < 1e-9);
        assert!((run.ledger[2].information - 2.0).abs() < 1e-9);
    }

    #[test]
    fn chain_break_names_step() {
        let p = Protocol {
            name: "broken".into(),
            provenance: String::new(),
            steps: vec![
                ProtocolStep::TraceOut {
                    party: "B".into(),
                    factor: 1,
                },
                ProtocolStep::TraceOut {
                    party: "B".into(),
                    factor: 1,
                },
            ],
        };
        match run_protocol(&bell(), &p) {
            Err(Error::Step { step, .. }) => assert_eq!(step, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dephased_send_commutes_with_relabel() {
        let rho = random_state(12);
        let mut rng = seeded_rng(13);
        let b = random_unitary_with(&mut rng, 2);
        let send = apply_step(
            &rho,
            &ProtocolStep::DephasedSend {
                factor: 0,
                basis: MatrixSpec::Inline(b.clone()),
                from_party: "A".into(),
                to_party: "B".into(),
            },
        )
        .unwrap();
        let relabeled = DensityOperator::from_trusted(rho.matrix().clone(), rho.split().relabel_factor(0, "B"));
        let m = dephase_factors(relabeled.matrix(), relabeled.split().factor_dims(), &[0], &b).unwrap();
        assert_eq!(send.matrix(), &DensityOperator::from_trusted(m, relabeled.split().clone()).matrix().clone());
        assert_eq!(send.split(), relabeled.split());
    }

    #[test]
    fn protocol_file_round_trip() {
        let text = r#"{
            "name": "bell_concentrate",
            "input": {"catalog": "bell"},
            "steps": [
                {"kind": "apply_local_unitary", "party": "A", "unitary": {"named": "identity"}},
                {"kind": "dephased_send", "factor": 0, "basis": {"named": "identity"},
                 "from_party": "A", "to_party": "B"}
            ]
        }"#;
        let file: ProtocolFile = serde_json::from_str(text).unwrap();
        assert_eq!(file.protocol.steps.len(), 2);
        let rho = file.input.unwrap().resolve().unwrap();
        let run = run_protocol(&rho, &file.protocol).unwrap();
        assert!((run.ledger.last().unwrap().information - 1.0).abs() < 1e-9);
    }
}
