//! Bounds on localizable information and the deficit.
//!
//! Upper bound: `I_l <= N - S_inf(rho_X)` for every party `X`.
//! Lower bound: `I_l >= N - inf_B H(rho^{(x) k}, B) / k` over implementable
//! product bases, estimated with [`crate::ipbopt`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{apply_step, MatrixSpec, ProtocolStep};
use crate::error::{Error, Result};
use crate::ipbopt::{self, AdaptiveProductBasis, MinimizeResult, OptimizerConfig};
use crate::matcore::{self, lift, ComplexMatrix};
use crate::measures;
use crate::states::{DensityOperator, PartySplit};
use crate::tolerances;

/// Party attaining the tightest min-entropy bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound {
    pub il_upper: f64,
    pub party: String,
    pub min_entropy: f64,
}

/// `min_X N - S_inf(rho_X)`.
pub fn upper_bound_prop1(rho: &DensityOperator) -> Result<UpperBound> {
    let parties = rho.split().parties();
    if parties.len() < 2 {
        return Err(Error::Party(format!("need at least two parties, found {}", parties.len())));
    }
    let mut best: Option<UpperBound> = None;
    for p in parties {
        let red = rho.reduced(p)?;
        let s_inf = measures::operator_min_entropy(&red.scale_real(1.0 / red.trace().re))?;
        let il = rho.n_bits() - s_inf;
        if best.as_ref().is_none_or(|b| il < b.il_upper) {
            best = Some(UpperBound {
                il_upper: il,
                party: p.clone(),
                min_entropy: s_inf,
            });
        }
    }
    Ok(best.expect("at least two parties"))
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBound {
    pub copies: usize,
    pub il_lower: f64,
    /// `H* / k`.
    pub h_per_copy: f64,
    /// `H* / k - S`.
    pub distance: f64,
    pub best: bool,
    pub minimization: MinimizeResult,
}

/// `N - H*_k / k` for one copy count.
pub fn lower_bound_prop2(rho: &DensityOperator, config: &OptimizerConfig) -> Result<LowerBound> {
    let d = ipbopt::relative_entropy_distance(rho, config)?;
    Ok(LowerBound {
        copies: config.copies,
        il_lower: rho.n_bits() - d.minimization.h_per_copy,
        h_per_copy: d.minimization.h_per_copy,
        distance: d.distance,
        best: true,
        minimization: d.minimization,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PureStateExact {
    pub il: f64,
    pub delta: f64,
}

/// `I_l = N - S_A` and `Delta = S_A` for a pure two-party state.
pub fn pure_state_exact(psi: &DensityOperator) -> Result<PureStateExact> {
    let form = measures::schmidt(psi)?;
    let s_a = form.entanglement_entropy();
    Ok(PureStateExact {
        il: psi.n_bits() - s_a,
        delta: s_a,
    })
}

/// Settings for [`deficit_interval`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsConfig {
    pub optimizer: OptimizerConfig,
    /// Largest copy count for the lower bound; every `k` in `1..=max_copies`
    /// within the dimension cap is evaluated.
    pub max_copies: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            max_copies: 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SkippedCopies {
    pub copies: usize,
    pub dim: usize,
    pub cap: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RestartSummary {
    pub copies: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub unconverged_polish: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub optimizer: Vec<RestartSummary>,
    pub skipped: Vec<SkippedCopies>,
    pub pure: bool,
    pub optimizer_tolerance: f64,
    pub report_tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub n_bits: f64,
    pub entropy: f64,
    #[serde(rename = "I")]
    pub information: f64,
    /// Tightest upper bound: min-entropy bound, or the exact value for pure
    /// two-party states.
    pub il_upper: f64,
    pub il_upper_min_entropy: UpperBound,
    pub il_lower: f64,
    pub lower_bounds: Vec<LowerBound>,
    pub il_exact: Option<f64>,
    pub delta_lower: f64,
    pub delta_upper: f64,
    /// `D_k` at the best `k`.
    pub delta_conjectured: f64,
    pub interval_width: f64,
    #[serde(rename = "M")]
    pub monotone_m: f64,
    pub diagnostics: Diagnostics,
}

impl BoundsReport {
    /// Violated report invariants, empty when consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let tol = tolerances::REPORT_ORDERING;
        let mut out = Vec::new();
        if self.il_lower > self.il_upper + tol {
            out.push(format!("il_lower {} > il_upper {}", self.il_lower, self.il_upper));
        }
        if self.delta_lower > self.delta_upper + tol {
            out.push(format!("delta_lower {} > delta_upper {}", self.delta_lower, self.delta_upper));
        }
        for (name, v) in [
            ("delta_lower", self.delta_lower),
            ("delta_upper", self.delta_upper),
            ("delta_conjectured", self.delta_conjectured),
        ] {
            if v < -1e-9 {
                out.push(format!("{name} = {v} is negative"));
            }
        }
        let finite = [
            self.information,
            self.il_upper,
            self.il_lower,
            self.delta_lower,
            self.delta_upper,
            self.delta_conjectured,
            self.monotone_m,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            out.push("non-finite entry".into());
        }
        out
    }
}

/// Assembles every bound for `rho`.
pub fn deficit_interval(rho: &DensityOperator, config: &BoundsConfig) -> Result<BoundsReport> {
    config.optimizer.validate()?;
    if !(1..=2).contains(&config.max_copies) {
        return Err(Error::Parameter {
            name: "max_copies".into(),
            value: config.max_copies as f64,
            reason: "must be 1 or 2".into(),
        });
    }
    let n = rho.n_bits();
    let s = measures::von_neumann_entropy(rho);
    let info = n - s;
    let upper = upper_bound_prop1(rho)?;

    let pure = rho.is_pure() && rho.split().parties().len() == 2;
    let exact = if pure { Some(pure_state_exact(rho)?) } else { None };

    let mut lower_bounds = Vec::new();
    let mut skipped = Vec::new();
    let mut summaries = Vec::new();
    let mut one_copy: Option<AdaptiveProductBasis> = None;
    for k in 1..=config.max_copies {
        let dim = rho.dim().pow(k as u32);
        if dim > tolerances::OPTIMIZER_DIM_CAP {
            skipped.push(SkippedCopies {
                copies: k,
                dim,
                cap: tolerances::OPTIMIZER_DIM_CAP,
            });
            continue;
        }
        let cfg = config.optimizer.with_copies(k);
        let min = match (&one_copy, k) {
            (Some(b), 2) => ipbopt::minimize_h_from(rho, &cfg, Some(&b.tensor_square()))?,
            _ => ipbopt::minimize_h(rho, &cfg)?,
        };
        if k == 1 {
            one_copy = Some(min.basis.clone());
        }
        summaries.push(RestartSummary {
            copies: k,
            restarts: min.trace.len(),
            best_restart: min.best_restart,
            unconverged_polish: min.trace.iter().filter(|t| !t.polish_converged).count(),
        });
        lower_bounds.push(LowerBound {
            copies: k,
            il_lower: n - min.h_per_copy,
            h_per_copy: min.h_per_copy,
            distance: (min.h_per_copy - s).max(0.0),
            best: false,
            minimization: min,
        });
    }
    if lower_bounds.is_empty() {
        return Err(Error::CapExceeded {
            dim: rho.dim(),
            cap: tolerances::OPTIMIZER_DIM_CAP,
        });
    }
    let best = lower_bounds
        .iter()
        .enumerate()
        .fold(0, |b, (i, lb)| if lb.il_lower > lower_bounds[b].il_lower { i } else { b });
    lower_bounds[best].best = true;
    let il_lower = lower_bounds[best].il_lower;
    let monotone_m = n - lower_bounds[0].h_per_copy;

    let il_upper = match exact {
        Some(e) => upper.il_upper.min(e.il),
        None => upper.il_upper,
    };
    let delta_lower = (info - il_upper).max(0.0);
    let delta_upper = (info - il_lower).max(0.0);
    Ok(BoundsReport {
        n_bits: n,
        entropy: s,
        information: info,
        il_upper,
        il_upper_min_entropy: upper,
        il_lower,
        lower_bounds,
        il_exact: exact.map(|e| e.il),
        delta_lower,
        delta_upper,
        delta_conjectured: delta_upper,
        interval_width: delta_upper - delta_lower,
        monotone_m,
        diagnostics: Diagnostics {
            optimizer: summaries,
            skipped,
            pure,
            optimizer_tolerance: tolerances::OPTIMIZER,
            report_tolerance: tolerances::REPORT_ORDERING,
        },
    })
}

/// Copies `n` and rate `r` in bits per input copy; `m = n r / 2` output pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistRateParams {
    pub n: u64,
    pub r: f64,
}

impl DistRateParams {
    pub fn output_pairs(&self) -> f64 {
        self.n as f64 * self.r / 2.0
    }
}

/// `log2` of `min(1, 2^{n (N - r)} lambda^n)` where `lambda` is the
/// smallest largest-eigenvalue among the party reductions. For two qubits
/// `N = 2`.
pub fn rains_log2_ceiling(rho: &DensityOperator, params: DistRateParams) -> Result<f64> {
    let n_bits = rho.n_bits();
    if !(params.r >= 0.0 && params.r <= n_bits) {
        return Err(Error::Parameter {
            name: "r".into(),
            value: params.r,
            reason: format!("rate must lie in [0, {n_bits}]"),
        });
    }
    if params.n == 0 {
        return Err(Error::Parameter {
            name: "n".into(),
            value: 0.0,
            reason: "need at least one copy".into(),
        });
    }
    let s_inf = upper_bound_prop1(rho)?.min_entropy;
    let n = params.n as f64;
    Ok((n * (n_bits - params.r - s_inf)).min(0.0))
}

pub fn rains_fidelity_ceiling(rho: &DensityOperator, params: DistRateParams) -> Result<f64> {
    Ok(rains_log2_ceiling(rho, params)?.exp2())
}

/// `M = N - inf_B H(rho, B)`.
pub fn monotone_m(rho: &DensityOperator, config: &OptimizerConfig) -> Result<f64> {
    Ok(monotone_with_basis(rho, config, None)?.0)
}

fn monotone_with_basis(
    rho: &DensityOperator,
    config: &OptimizerConfig,
    warm: Option<&AdaptiveProductBasis>,
) -> Result<(f64, AdaptiveProductBasis)> {
    let r = ipbopt::minimize_h_from(rho, &config.with_copies(1), warm)?;
    Ok((rho.n_bits() - r.h_total, r.basis))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStepKind {
    LocalUnitary,
    PartialTrace,
    LocalDephasing,
    DephasedSend,
    MaxMixedAncilla,
}

impl ScanStepKind {
    pub const ALL: [ScanStepKind; 5] = [
        ScanStepKind::LocalUnitary,
        ScanStepKind::PartialTrace,
        ScanStepKind::LocalDephasing,
        ScanStepKind::DephasedSend,
        ScanStepKind::MaxMixedAncilla,
    ];

    /// Steps under which `M` is known not to increase.
    pub fn asserted(self) -> bool {
        matches!(self, ScanStepKind::LocalUnitary | ScanStepKind::PartialTrace)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub trials: usize,
    pub seed: u64,
    /// Trial `t` uses `kinds[t % kinds.len()]`.
    pub kinds: Vec<ScanStepKind>,
    pub optimizer: OptimizerConfig,
    pub tolerance: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            kinds: ScanStepKind::ALL.to_vec(),
            optimizer: OptimizerConfig {
                restarts: 4,
                anneal_steps: 600,
                polish_sweeps: 100,
                ..OptimizerConfig::default()
            },
            tolerance: tolerances::OPTIMIZER,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanTrial {
    pub trial: usize,
    /// Replays this trial alone with `trials = 1`, `seed = replay_seed` and
    /// the same kind.
    pub replay_seed: u64,
    pub kind: ScanStepKind,
    pub step: String,
    pub factor_dims: Vec<usize>,
    pub m_before: f64,
    pub m_after: f64,
    pub delta_m: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KindSummary {
    pub kind: ScanStepKind,
    pub asserted: bool,
    pub trials: usize,
    pub max_delta_m: f64,
    pub min_delta_m: f64,
    pub flagged: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub kinds: Vec<KindSummary>,
    /// Asserted kinds with `Delta M` beyond tolerance.
    pub violations: Vec<ScanTrial>,
    /// Other kinds with `Delta M > tolerance`; reported only.
    pub candidate_counterexamples: Vec<ScanTrial>,
    pub failed_trials: Vec<String>,
}

/// Random states and steps; records `Delta M = M(after) - M(before)`.
pub fn monotonicity_scan(config: &ScanConfig) -> Result<ScanReport> {
    config.optimizer.validate()?;
    if config.kinds.is_empty() {
        return Err(Error::Parameter {
            name: "kinds".into(),
            value: 0.0,
            reason: "need at least one step kind".into(),
        });
    }
    let results: Vec<(usize, Result<ScanTrial>)> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let kind = config.kinds[t % config.kinds.len()];
            (t, scan_trial(t, config.seed.wrapping_add(t as u64), kind, &config.optimizer))
        })
        .collect();

    let mut trials = Vec::new();
    let mut failed = Vec::new();
    for (t, r) in results {
        match r {
            Ok(x) => trials.push(x),
            Err(e) => failed.push(format!("trial {t}: {e}")),
        }
    }
    let mut kinds = Vec::new();
    for &kind in ScanStepKind::ALL.iter().filter(|k| config.kinds.contains(k)) {
        let of: Vec<&ScanTrial> = trials.iter().filter(|t| t.kind == kind).collect();
        let flagged = of
            .iter()
            .filter(|t| exceeds(kind, t.delta_m, config.tolerance))
            .count();
        kinds.push(KindSummary {
            kind,
            asserted: kind.asserted(),
            trials: of.len(),
            max_delta_m: of.iter().map(|t| t.delta_m).fold(f64::NEG_INFINITY, f64::max),
            min_delta_m: of.iter().map(|t| t.delta_m).fold(f64::INFINITY, f64::min),
            flagged,
        });
    }
    let (mut violations, mut candidates) = (Vec::new(), Vec::new());
    for t in trials {
        if exceeds(t.kind, t.delta_m, config.tolerance) {
            if t.kind.asserted() {
                violations.push(t);
            } else {
                candidates.push(t);
            }
        }
    }
    Ok(ScanReport {
        trials: config.trials,
        seed: config.seed,
        tolerance: config.tolerance,
        kinds,
        violations,
        candidate_counterexamples: candidates,
        failed_trials: failed,
    })
}

fn exceeds(kind: ScanStepKind, delta: f64, tol: f64) -> bool {
    match kind {
        ScanStepKind::LocalUnitary => delta.abs() > tol,
        _ => delta > tol,
    }
}

/// Random party-grouped state on at most eight dimensions.
fn scan_state(rng: &mut impl Rng) -> Result<DensityOperator> {
    const LAYOUTS: [&[(usize, &str)]; 4] = [
        &[(2, "A"), (2, "B")],
        &[(2, "A"), (2, "A"), (2, "B")],
        &[(2, "A"), (2, "B"), (2, "B")],
        &[(3, "A"), (2, "B")],
    ];
    let layout = LAYOUTS[rng.random_range(0..LAYOUTS.len())];
    let split = PartySplit::new(
        layout.iter().map(|x| x.0).collect(),
        layout.iter().map(|x| x.1.to_string()).collect(),
    )?;
    let dim = split.total_dim();
    let rank = rng.random_range(1..=dim);
    DensityOperator::validate(matcore::random_density_with(rng, dim, rank)?, split)
}

fn scan_trial(trial: usize, seed: u64, kind: ScanStepKind, opt: &OptimizerConfig) -> Result<ScanTrial> {
    let mut rng = matcore::seeded_rng(seed);
    let rho = scan_state(&mut rng)?;
    let split = rho.split().clone();
    let parties = split.parties().to_vec();
    let pi = rng.random_range(0..parties.len());
    let party = parties[pi].clone();
    let opt = OptimizerConfig {
        seed: seed.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ..opt.clone()
    };

    let (step, m_before, m_after) = match kind {
        ScanStepKind::LocalUnitary => {
            let u = matcore::random_unitary_with(&mut rng, split.party_dim(&party));
            let step = ProtocolStep::ApplyLocalUnitary {
                party: party.clone(),
                unitary: MatrixSpec::Inline(u.clone()),
            };
            let after = apply_step(&rho, &step)?;
            let (mut mb, bb) = monotone_with_basis(&rho, &opt, None)?;
            let (mut ma, ba) = monotone_with_basis(&after, &opt, Some(&rotated(&bb, pi, &u)?))?;
            // exact invariance: each side may start from the other's optimum
            if ma > mb {
                let (m, _) = monotone_with_basis(&rho, &opt, Some(&rotated(&ba, pi, &u.adjoint())?))?;
                mb = mb.max(m);
            } else {
                let (m, _) = monotone_with_basis(&after, &opt, Some(&rotated(&bb, pi, &u)?))?;
                ma = ma.max(m);
            }
            (step, mb, ma)
        }
        ScanStepKind::PartialTrace => {
            let factor = rng.random_range(0..split.factor_dims().len());
            let owner = split.factor_assignment()[factor].clone();
            let step = ProtocolStep::TraceOut { party: owner, factor };
            let after = apply_step(&rho, &step)?;
            let (ma, ba) = monotone_with_basis(&after, &opt, None)?;
            let warm = extended_after_trace(&ba, &split, factor)?;
            let (mb, _) = monotone_with_basis(&rho, &opt, Some(&warm))?;
            (step, mb, ma)
        }
        ScanStepKind::LocalDephasing => {
            let factors = split.factors_of(&party);
            let basis = matcore::random_unitary_with(&mut rng, split.party_dim(&party));
            let step = ProtocolStep::DephaseLocal {
                party: party.clone(),
                factors,
                basis: MatrixSpec::Inline(basis),
            };
            fresh_pair(&rho, step, &opt)?
        }
        ScanStepKind::DephasedSend => {
            let owned = split.factors_of(&party);
            let factor = owned[rng.random_range(0..owned.len())];
            let to = parties[(pi + 1) % parties.len()].clone();
            let basis = matcore::random_unitary_with(&mut rng, split.factor_dims()[factor]);
            let step = ProtocolStep::DephasedSend {
                factor,
                basis: MatrixSpec::Inline(basis),
                from_party: party.clone(),
                to_party: to,
            };
            fresh_pair(&rho, step, &opt)?
        }
        ScanStepKind::MaxMixedAncilla => {
            let step = ProtocolStep::AddMaxMixedAncilla {
                party: party.clone(),
                dim: 2,
            };
            fresh_pair(&rho, step, &opt)?
        }
    };
    Ok(ScanTrial {
        trial,
        replay_seed: seed,
        kind,
        step: step.label(),
        factor_dims: split.factor_dims().to_vec(),
        m_before,
        m_after,
        delta_m: m_after - m_before,
    })
}

fn fresh_pair(rho: &DensityOperator, step: ProtocolStep, opt: &OptimizerConfig) -> Result<(ProtocolStep, f64, f64)> {
    let after = apply_step(rho, &step)?;
    let mb = monotone_m(rho, opt)?;
    let ma = monotone_m(&after, opt)?;
    Ok((step, mb, ma))
}

/// Basis for `(U_X) rho (U_X)^dag` from one for `rho`.
fn rotated(basis: &AdaptiveProductBasis, party: usize, u: &ComplexMatrix) -> Result<AdaptiveProductBasis> {
    let mut levels = basis.levels().to_vec();
    for m in levels[party].iter_mut() {
        *m = u.matmul(m)?;
    }
    AdaptiveProductBasis::new(basis.party_dims().to_vec(), levels)
}

/// Basis for a party-grouped state from a basis of the state with `factor`
/// traced out: the traced factor is measured in the standard basis and later
/// parties ignore its outcome.
fn extended_after_trace(
    after: &AdaptiveProductBasis,
    before: &PartySplit,
    factor: usize,
) -> Result<AdaptiveProductBasis> {
    let owner = &before.factor_assignment()[factor];
    let x = before
        .parties()
        .iter()
        .position(|p| p == owner)
        .expect("owner is a party");
    let local = before.factors_of(owner);
    let local_dims: Vec<usize> = local.iter().map(|&f| before.factor_dims()[f]).collect();
    let t = local.iter().position(|&f| f == factor).expect("owned");
    let kept_local: Vec<usize> = (0..local.len()).filter(|&k| k != t).collect();
    let kept_dims: Vec<usize> = kept_local.iter().map(|&k| local_dims[k]).collect();
    let removed = local.len() == 1;
    let before_dims = before.party_dims();

    // before-prefix index -> after-prefix index
    let map_prefix = |c: usize, l: usize| -> usize {
        let digits = matcore::index_digits(c, &before_dims[..l]);
        let mut out_digits = Vec::new();
        let mut out_dims = Vec::new();
        for (q, &dq) in digits.iter().enumerate() {
            if q == x {
                if removed {
                    continue;
                }
                let ld = matcore::index_digits(dq, &local_dims);
                let kd: Vec<usize> = kept_local.iter().map(|&k| ld[k]).collect();
                out_digits.push(matcore::digits_index(&kd, &kept_dims));
                out_dims.push(kept_dims.iter().product());
            } else {
                out_digits.push(dq);
                out_dims.push(before_dims[q]);
            }
        }
        matcore::digits_index(&out_digits, &out_dims)
    };

    let mut levels = Vec::with_capacity(before_dims.len());
    for l in 0..before_dims.len() {
        let count: usize = before_dims[..l].iter().product();
        let la = if removed && l > x { l - 1 } else { l };
        let level = (0..count)
            .map(|c| {
                let ca = map_prefix(c, l);
                if l == x {
                    if removed {
                        Ok(ComplexMatrix::identity(before_dims[x]))
                    } else {
                        lift(&after.levels()[la][ca], &local_dims, &kept_local)
                    }
                } else {
                    Ok(after.levels()[la][ca].clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(level);
    }
    AdaptiveProductBasis::new(before_dims, levels)
}
