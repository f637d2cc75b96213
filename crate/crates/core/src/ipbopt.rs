//! Implementable product bases and the minimization of `H(rho, B)` over them.
//!
//! The search family is the one-way adaptive chain: the first party picks a
//! local basis, the second party picks a basis conditioned on the first
//! party's outcome, and so on. Any such basis can be reached from the
//! standard basis by local unitaries and dephased communication, so the
//! minimum found here upper-bounds the infimum over all implementable
//! product bases and `N - H*` stays a valid lower bound on localizable
//! information.
//!
//! For a fixed conditional block the Shannon entropy of its diagonal is
//! smallest in the block's eigenbasis, so the last party of the chain is
//! solved in closed form and only the leading parties are annealed.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, expm_i_hermitian, hermitian_eig, ComplexMatrix, C64};
use crate::measures::{self, shannon_entropy};
use crate::states::DensityOperator;
use crate::tolerances;

/// Adaptive product basis over an ordered chain of parties.
///
/// `levels[l][c]` is the local basis (as a unitary whose columns are the
/// basis vectors) of the `l`-th party in the chain, conditioned on the joint
/// outcome index `c` of the earlier parties (first party slowest). The chain
/// order is `party_order`, indices into the state's party list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveProductBasis {
    party_dims: Vec<usize>,
    party_order: Vec<usize>,
    levels: Vec<Vec<ComplexMatrix>>,
}

impl AdaptiveProductBasis {
    /// Chain in the natural party order.
    pub fn new(party_dims: Vec<usize>, levels: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let order = (0..party_dims.len()).collect();
        Self::with_order(party_dims, order, levels)
    }

    /// `party_dims` are in the state's party order; `levels` follow `party_order`.
    pub fn with_order(
        party_dims: Vec<usize>,
        party_order: Vec<usize>,
        levels: Vec<Vec<ComplexMatrix>>,
    ) -> Result<Self> {
        let m = party_dims.len();
        let mut sorted = party_order.clone();
        sorted.sort_unstable();
        if sorted != (0..m).collect::<Vec<_>>() {
            return Err(Error::Dimension(format!("invalid party order {party_order:?}")));
        }
        if levels.len() != m {
            return Err(Error::Dimension(format!("{} levels for {m} parties", levels.len())));
        }
        let mut prefix = 1;
        for (l, level) in levels.iter().enumerate() {
            let d = party_dims[party_order[l]];
            if level.len() != prefix {
                return Err(Error::Dimension(format!(
                    "level {l} has {} unitaries, expected {prefix}",
                    level.len()
                )));
            }
            for u in level {
                if u.dim() != d {
                    return Err(Error::Dimension(format!("level {l} unitary has dim {}, expected {d}", u.dim())));
                }
                u.check_unitary(tolerances::UNITARY)?;
            }
            prefix *= d;
        }
        Ok(Self {
            party_dims,
            party_order,
            levels,
        })
    }

    /// Standard product basis.
    pub fn computational(party_dims: &[usize]) -> Self {
        let mut levels = Vec::new();
        let mut prefix = 1;
        for &d in party_dims {
            levels.push(vec![ComplexMatrix::identity(d); prefix]);
            prefix *= d;
        }
        Self::new(party_dims.to_vec(), levels).expect("identity chain")
    }

    pub fn party_dims(&self) -> &[usize] {
        &self.party_dims
    }

    pub fn party_order(&self) -> &[usize] {
        &self.party_order
    }

    pub fn levels(&self) -> &[Vec<ComplexMatrix>] {
        &self.levels
    }

    pub fn alice_unitary(&self) -> &ComplexMatrix {
        &self.levels[0][0]
    }

    pub fn bob_unitaries(&self) -> &[ComplexMatrix] {
        self.levels.get(1).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Global unitary whose columns are the product vectors, indexed in
    /// chain order and expressed in the state's party-grouped order.
    pub fn basis_vectors(&self) -> ComplexMatrix {
        let chain_dims: Vec<usize> = self.party_order.iter().map(|&p| self.party_dims[p]).collect();
        let total: usize = chain_dims.iter().product();
        // position of each natural party inside the chain
        let mut chain_pos = vec![0; self.party_order.len()];
        for (l, &p) in self.party_order.iter().enumerate() {
            chain_pos[p] = l;
        }
        let perm: Vec<usize> = (0..self.party_dims.len()).map(|p| chain_pos[p]).collect();
        let mut cols = Vec::with_capacity(total);
        for col in 0..total {
            let digits = matcore::index_digits(col, &chain_dims);
            let mut prefix = 0;
            let mut v = vec![C64::new(1.0, 0.0)];
            for (l, &i) in digits.iter().enumerate() {
                let u = &self.levels[l][prefix];
                v = matcore::tensor_vec(&v, &u.column(i));
                prefix = prefix * chain_dims[l] + i;
            }
            cols.push(permute_vector(&v, &chain_dims, &perm));
        }
        ComplexMatrix::from_columns(&cols).expect("square")
    }

    /// Basis for two copies: outcome `(i, i')` of each party uses
    /// `U[c] (x) U[c']` for the matching prefixes. Valid for states grouped
    /// from `rho (x) rho`.
    pub fn tensor_square(&self) -> Self {
        let chain_dims: Vec<usize> = self.party_order.iter().map(|&p| self.party_dims[p]).collect();
        let mut levels = Vec::with_capacity(self.levels.len());
        for l in 0..self.levels.len() {
            let prefix_dims = &chain_dims[..l];
            let sq_dims: Vec<usize> = prefix_dims.iter().map(|d| d * d).collect();
            let count: usize = sq_dims.iter().product();
            let level = (0..count)
                .map(|c| {
                    let digits = matcore::index_digits(c, &sq_dims);
                    let (mut c1, mut c2) = (0, 0);
                    for (k, &x) in digits.iter().enumerate() {
                        c1 = c1 * prefix_dims[k] + x / prefix_dims[k];
                        c2 = c2 * prefix_dims[k] + x % prefix_dims[k];
                    }
                    matcore::tensor(&self.levels[l][c1], &self.levels[l][c2])
                })
                .collect();
            levels.push(level);
        }
        Self {
            party_dims: self.party_dims.iter().map(|d| d * d).collect(),
            party_order: self.party_order.clone(),
            levels,
        }
    }
}

fn permute_vector(v: &[C64], dims: &[usize], perm: &[usize]) -> Vec<C64> {
    let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (i, &x) in v.iter().enumerate() {
        let d = matcore::index_digits(i, dims);
        let nd: Vec<usize> = perm.iter().map(|&k| d[k]).collect();
        out[matcore::digits_index(&nd, &new_dims)] = x;
    }
    out
}

fn check_basis_dims(rho: &DensityOperator, basis: &AdaptiveProductBasis) -> Result<DensityOperator> {
    let grouped = rho.grouped_by_party();
    if grouped.split().party_dims() != basis.party_dims() {
        return Err(Error::Dimension(format!(
            "basis party dims {:?} vs state party dims {:?}",
            basis.party_dims(),
            grouped.split().party_dims()
        )));
    }
    Ok(grouped)
}

/// `H(rho, B)` for an adaptive product basis.
pub fn h_over_ipb(rho: &DensityOperator, basis: &AdaptiveProductBasis) -> Result<f64> {
    let grouped = check_basis_dims(rho, basis)?;
    measures::shannon_entropy_in_basis(&grouped, &basis.basis_vectors())
}

/// Annealing and polish settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Number of copies optimized jointly (1 or 2).
    pub copies: usize,
    pub restarts: usize,
    pub initial_temperature: f64,
    /// Temperature multiplier applied every `cooling_interval` steps.
    pub cooling_factor: f64,
    pub cooling_interval: usize,
    pub anneal_steps: usize,
    pub polish_sweeps: usize,
    /// Standard deviation of a proposal at the initial temperature.
    pub step_size: f64,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            copies: 1,
            restarts: 32,
            initial_temperature: 1.0,
            cooling_factor: 0.97,
            cooling_interval: 50,
            anneal_steps: 5000,
            polish_sweeps: 200,
            step_size: 0.3,
            seed: 0,
            tolerance: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, value: f64, reason: &str| {
            Err(Error::Parameter {
                name: name.into(),
                value,
                reason: reason.into(),
            })
        };
        if !(1..=2).contains(&self.copies) {
            return bad("copies", self.copies as f64, "must be 1 or 2");
        }
        if self.restarts == 0 {
            return bad("restarts", 0.0, "must be positive");
        }
        if self.cooling_interval == 0 {
            return bad("cooling_interval", 0.0, "must be positive");
        }
        if !(self.initial_temperature > 0.0) {
            return bad("initial_temperature", self.initial_temperature, "must be positive");
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor <= 1.0) {
            return bad("cooling_factor", self.cooling_factor, "must lie in (0, 1]");
        }
        if !(self.step_size > 0.0) {
            return bad("step_size", self.step_size, "must be positive");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance", self.tolerance, "must be positive");
        }
        Ok(())
    }

    pub fn with_copies(&self, copies: usize) -> Self {
        Self {
            copies,
            ..self.clone()
        }
    }
}

/// Per-restart record of the optimizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub seed: u64,
    pub warm_start: bool,
    pub initial_h: f64,
    pub annealed_h: f64,
    pub polished_h: f64,
    pub best_so_far: f64,
    pub polish_sweeps: usize,
    pub polish_converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeResult {
    pub copies: usize,
    /// Best basis for `rho^{(x) k}` grouped by party.
    pub basis: AdaptiveProductBasis,
    /// `H*` of the k-copy state.
    pub h_total: f64,
    /// `H* / k`.
    pub h_per_copy: f64,
    pub best_restart: usize,
    pub trace: Vec<RestartTrace>,
}

/// Conditional-block evaluation of `H` for a fixed party-grouped state.
struct Objective {
    rho: ComplexMatrix,
    dims: Vec<usize>,
}

impl Objective {
    /// Eigenbases of the last-level blocks, for the reported basis.
    fn last_level(&self, leading: &[Vec<ComplexMatrix>]) -> Vec<ComplexMatrix> {
        let prefix_count: usize = self.dims[..self.dims.len() - 1].iter().product();
        let last = *self.dims.last().expect("at least one party");
        let mut out = vec![ComplexMatrix::identity(last); prefix_count];
        self.descend(&self.rho, 0, 0, leading, &mut |prefix, block| {
            if let Ok(e) = hermitian_eig(block) {
                out[prefix] = e.eigenvectors;
            }
        });
        out
    }

    fn descend(
        &self,
        block: &ComplexMatrix,
        level: usize,
        prefix: usize,
        leading: &[Vec<ComplexMatrix>],
        visit: &mut impl FnMut(usize, &ComplexMatrix),
    ) {
        if level + 1 == self.dims.len() {
            visit(prefix, block);
            return;
        }
        let d = self.dims[level];
        let u = &leading[level][prefix];
        for i in 0..d {
            let e = u.column(i);
            let sub = conditional_block(block, d, &e);
            if sub.trace().re <= 1e-300 {
                continue;
            }
            self.descend(&sub, level + 1, prefix * d + i, leading, visit);
        }
    }
}

/// `(<e| (x) I) M (|e> (x) I)` where the first factor has dimension `d`.
fn conditional_block(m: &ComplexMatrix, d: usize, e: &[C64]) -> ComplexMatrix {
    let r = m.dim() / d;
    let mut out = ComplexMatrix::zeros(r);
    for a in 0..d {
        let ca = e[a].conj();
        if ca == C64::new(0.0, 0.0) {
            continue;
        }
        for b in 0..d {
            let w = ca * e[b];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            for x in 0..r {
                for y in 0..r {
                    out[(x, y)] += w * m[(a * r + x, b * r + y)];
                }
            }
        }
    }
    out
}

fn block_entropy(block: &ComplexMatrix) -> f64 {
    if block.dim() == 1 {
        return shannon_entropy(&[block[(0, 0)].re]);
    }
    match measures::clamped_spectrum(&block.hermitize()) {
        Ok(p) => shannon_entropy(&p),
        Err(_) => f64::INFINITY,
    }
}

/// Local chart `U = base * exp(i G(params))` for one unitary.
#[derive(Clone)]
struct ChartedUnitary {
    base: ComplexMatrix,
    params: Vec<f64>,
    current: ComplexMatrix,
}

impl ChartedUnitary {
    fn at(base: ComplexMatrix) -> Self {
        let d = base.dim();
        Self {
            current: base.clone(),
            params: vec![0.0; d * d],
            base,
        }
    }

    fn refresh(&mut self) {
        let g = generator(&self.params, self.base.dim());
        let e = expm_i_hermitian(&g).expect("generator is Hermitian");
        self.current = self.base.matmul(&e).expect("same dim");
    }

    fn rebase(&mut self) {
        self.base = self.current.clone();
        self.params.iter_mut().for_each(|p| *p = 0.0);
    }
}

/// Hermitian generator from `d^2` reals: diagonal first, then (re, im) of
/// the strict upper triangle row by row.
fn generator(params: &[f64], d: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(d);
    for i in 0..d {
        g[(i, i)] = C64::new(params[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = C64::new(params[k], params[k + 1]);
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
            k += 2;
        }
    }
    g
}

/// Conditional blocks and subtree entropies for every `(level, prefix)`.
struct Cache {
    blocks: Vec<Vec<Option<ComplexMatrix>>>,
    values: Vec<Vec<f64>>,
}

impl Objective {
    fn cache(&self, leading: &[Vec<ComplexMatrix>]) -> Cache {
        let mut blocks = Vec::with_capacity(self.dims.len());
        let mut values = Vec::with_capacity(self.dims.len());
        let mut count = 1;
        for &d in &self.dims {
            blocks.push(vec![None; count]);
            values.push(vec![0.0; count]);
            count *= d;
        }
        let mut cache = Cache { blocks, values };
        cache.blocks[0][0] = Some(self.rho.clone());
        self.rebuild(&mut cache, 0, 0, leading);
        cache
    }

    /// Recomputes the subtree under `(level, prefix)` from its cached block.
    fn rebuild(&self, cache: &mut Cache, level: usize, prefix: usize, leading: &[Vec<ComplexMatrix>]) -> f64 {
        let Some(block) = cache.blocks[level][prefix].take() else {
            cache.values[level][prefix] = 0.0;
            return 0.0;
        };
        let value = if level + 1 == self.dims.len() {
            block_entropy(&block)
        } else {
            let d = self.dims[level];
            let u = &leading[level][prefix];
            let mut h = 0.0;
            for i in 0..d {
                let sub = conditional_block(&block, d, &u.column(i));
                let child = prefix * d + i;
                cache.blocks[level + 1][child] = (sub.trace().re > 1e-300).then_some(sub);
                h += self.rebuild(cache, level + 1, child, leading);
            }
            h
        };
        cache.blocks[level][prefix] = Some(block);
        cache.values[level][prefix] = value;
        value
    }

    /// Refreshes the ancestors of `(level, prefix)` and returns the total.
    fn propagate(&self, cache: &mut Cache, level: usize, prefix: usize) -> f64 {
        let mut p = prefix;
        for l in (0..level).rev() {
            let d = self.dims[l];
            p /= d;
            cache.values[l][p] = cache.values[l + 1][p * d..(p + 1) * d].iter().sum();
        }
        cache.values[0][0]
    }
}

struct Search<'a> {
    objective: &'a Objective,
    units: Vec<Vec<ChartedUnitary>>,
    leading: Vec<Vec<ComplexMatrix>>,
    cache: Cache,
    /// (level, index) of every parameter slot, with the offset inside it.
    slots: Vec<(usize, usize, usize)>,
}

impl<'a> Search<'a> {
    fn new(objective: &'a Objective, bases: Vec<Vec<ComplexMatrix>>) -> Self {
        let cache = objective.cache(&bases);
        let units: Vec<Vec<ChartedUnitary>> = bases
            .iter()
            .map(|lv| lv.iter().cloned().map(ChartedUnitary::at).collect())
            .collect();
        let mut slots = Vec::new();
        for (l, lv) in units.iter().enumerate() {
            for (c, u) in lv.iter().enumerate() {
                for k in 0..u.params.len() {
                    slots.push((l, c, k));
                }
            }
        }
        Self {
            objective,
            units,
            leading: bases,
            cache,
            slots,
        }
    }

    fn current(&self) -> Vec<Vec<ComplexMatrix>> {
        self.leading.clone()
    }

    fn value(&self) -> f64 {
        self.cache.values[0][0]
    }

    /// Sets one parameter and returns the new objective value.
    fn set(&mut self, slot: usize, value: f64) -> f64 {
        let (l, c, k) = self.slots[slot];
        let u = &mut self.units[l][c];
        u.params[k] = value;
        u.refresh();
        self.leading[l][c] = u.current.clone();
        self.objective.rebuild(&mut self.cache, l, c, &self.leading);
        self.objective.propagate(&mut self.cache, l, c)
    }

    fn get(&self, slot: usize) -> f64 {
        let (l, c, k) = self.slots[slot];
        self.units[l][c].params[k]
    }
}

struct RestartOutcome {
    leading: Vec<Vec<ComplexMatrix>>,
    trace: RestartTrace,
}

fn run_restart(
    objective: &Objective,
    config: &OptimizerConfig,
    restart: usize,
    warm: Option<&[Vec<ComplexMatrix>]>,
) -> RestartOutcome {
    let seed = config.seed.wrapping_add(restart as u64);
    let mut rng = matcore::seeded_rng(seed);
    let leading_dims = &objective.dims[..objective.dims.len() - 1];
    let warm_start = restart == 0 && warm.is_some();
    let bases: Vec<Vec<ComplexMatrix>> = match warm {
        Some(w) if restart == 0 => w.to_vec(),
        _ => {
            let mut prefix = 1;
            leading_dims
                .iter()
                .map(|&d| {
                    let lv = (0..prefix)
                        .map(|_| {
                            if restart == 0 {
                                ComplexMatrix::identity(d)
                            } else {
                                matcore::random_unitary_with(&mut rng, d)
                            }
                        })
                        .collect();
                    prefix *= d;
                    lv
                })
                .collect()
        }
    };
    let mut search = Search::new(objective, bases);
    let initial_h = search.value();
    let mut current_h = initial_h;
    let mut best_h = initial_h;
    let mut best = search.current();
    let n_params = search.slots.len();

    if n_params > 0 {
        let standard = Normal::new(0.0, 1.0).expect("unit normal");
        let mut temperature = config.initial_temperature;
        for step in 0..config.anneal_steps {
            if step > 0 && step % config.cooling_interval == 0 {
                temperature *= config.cooling_factor;
            }
            let slot = rng.random_range(0..n_params);
            let old = search.get(slot);
            let sigma = config.step_size * (temperature / config.initial_temperature).sqrt();
            let proposal = old + sigma * standard.sample(&mut rng);
            let h = search.set(slot, proposal);
            let accept = h <= current_h || rng.random::<f64>() < (-(h - current_h) / temperature).exp();
            if accept {
                current_h = h;
                if h < best_h {
                    best_h = h;
                    best = search.current();
                }
            } else {
                search.set(slot, old);
            }
        }
    }
    let annealed_h = best_h;

    // coordinate-descent polish in a fresh chart around the best point
    let mut search = Search::new(objective, best);
    let mut h_cur = search.value();
    let floor = config.tolerance * 1e-2;
    let mut steps = vec![0.05; n_params];
    let mut sweeps = 0;
    let mut converged = n_params == 0;
    while !converged && sweeps < config.polish_sweeps {
        sweeps += 1;
        for (slot, step) in steps.iter_mut().enumerate() {
            if *step < floor {
                continue;
            }
            let old = search.get(slot);
            let mut moved = false;
            for dir in [1.0, -1.0] {
                let h = search.set(slot, old + dir * *step);
                if h < h_cur {
                    h_cur = h;
                    moved = true;
                    break;
                }
            }
            if moved {
                *step = (*step * 2.0).min(0.5);
            } else {
                search.set(slot, old);
                *step *= 0.5;
            }
        }
        for lv in search.units.iter_mut() {
            for u in lv.iter_mut() {
                u.rebase();
            }
        }
        converged = steps.iter().all(|&s| s < floor);
    }
    let polished = search.current();
    RestartOutcome {
        leading: polished,
        trace: RestartTrace {
            restart,
            seed,
            warm_start,
            initial_h,
            annealed_h,
            polished_h: h_cur,
            best_so_far: h_cur,
            polish_sweeps: sweeps,
            polish_converged: converged,
        },
    }
}

/// Minimizes `H(rho^{(x) k}, B)` over one-way adaptive product bases.
pub fn minimize_h(rho: &DensityOperator, config: &OptimizerConfig) -> Result<MinimizeResult> {
    minimize_h_from(rho, config, None)
}

/// As [`minimize_h`]; restart 0 starts from `warm` when given (a basis for
/// the k-copy grouped state).
pub fn minimize_h_from(
    rho: &DensityOperator,
    config: &OptimizerConfig,
    warm: Option<&AdaptiveProductBasis>,
) -> Result<MinimizeResult> {
    config.validate()?;
    let k = config.copies;
    let total = rho
        .dim()
        .checked_pow(k as u32)
        .unwrap_or(usize::MAX);
    if total > tolerances::OPTIMIZER_DIM_CAP {
        return Err(Error::CapExceeded {
            dim: total,
            cap: tolerances::OPTIMIZER_DIM_CAP,
        });
    }
    let state = rho.copies(k).grouped_by_party();
    let dims = state.split().party_dims();
    let objective = Objective {
        rho: state.matrix().clone(),
        dims: dims.clone(),
    };
    let warm_leading = match warm {
        Some(b) => {
            if b.party_dims() != dims.as_slice() || b.party_order().iter().enumerate().any(|(i, &p)| i != p) {
                return Err(Error::Dimension("warm-start basis does not match the k-copy state".into()));
            }
            Some(b.levels()[..dims.len() - 1].to_vec())
        }
        None => None,
    };

    let mut outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(&objective, config, r, warm_leading.as_deref()))
        .collect();
    outcomes.sort_by_key(|o| o.trace.restart);

    let mut best_idx = 0;
    let mut best_so_far = f64::INFINITY;
    for (i, o) in outcomes.iter_mut().enumerate() {
        if o.trace.polished_h < best_so_far {
            best_so_far = o.trace.polished_h;
            best_idx = i;
        }
        o.trace.best_so_far = best_so_far;
    }
    let leading = outcomes[best_idx].leading.clone();
    let mut levels = leading.clone();
    levels.push(objective.last_level(&leading));
    let basis = AdaptiveProductBasis::new(dims, levels)?;
    let h_total = outcomes[best_idx].trace.polished_h;
    Ok(MinimizeResult {
        copies: k,
        basis,
        h_total,
        h_per_copy: h_total / k as f64,
        best_restart: best_idx,
        trace: outcomes.into_iter().map(|o| o.trace).collect(),
    })
}

/// k-copy estimate of the relative entropy distance to IPB states, per copy.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceEstimate {
    pub copies: usize,
    /// `H*_k / k - S`.
    pub distance: f64,
    pub entropy: f64,
    pub minimization: MinimizeResult,
}

/// `inf_B H = S + inf_sigma S(rho || sigma)`, so `D_k = H*_k / k - S`.
/// For two copies the tensor square of the one-copy optimum seeds restart 0.
pub fn relative_entropy_distance(rho: &DensityOperator, config: &OptimizerConfig) -> Result<DistanceEstimate> {
    let s = measures::von_neumann_entropy(rho);
    let minimization = if config.copies == 1 {
        minimize_h(rho, config)?
    } else {
        let one = minimize_h(rho, &config.with_copies(1))?;
        minimize_h_from(rho, config, Some(&one.basis.tensor_square()))?
    };
    Ok(DistanceEstimate {
        copies: config.copies,
        distance: (minimization.h_per_copy - s).max(0.0),
        entropy: s,
        minimization,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IpbVerdict {
    Yes,
    No,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IpbWitness {
    /// An eigenbasis that is an adaptive product basis.
    Basis { basis: AdaptiveProductBasis },
    /// Eigenvector with Schmidt rank above one.
    EntangledEigenvector {
        index: usize,
        eigenvalue: f64,
        second_schmidt: f64,
    },
    /// Product eigenvectors that fit no one-way adaptive pattern.
    PatternMismatch { detail: String },
    /// Smallest spectral gap when degeneracy blocks a decision.
    DegenerateGap { gap: f64 },
    Unsupported { parties: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IpbCheck {
    pub verdict: IpbVerdict,
    pub witness: IpbWitness,
}

/// Decides whether `sigma` is diagonal in an implementable product basis.
///
/// Works on the eigenbasis returned by the eigensolver. A fully degenerate
/// spectrum is undecided. An entangled eigenvector with an isolated
/// eigenvalue is a definite no; one inside a degenerate eigenspace only
/// makes the answer undecided.
pub fn is_ipb_state(sigma: &DensityOperator, tol: f64) -> Result<IpbCheck> {
    let parties = sigma.split().parties().len();
    if parties != 2 {
        return Ok(IpbCheck {
            verdict: IpbVerdict::Undecided,
            witness: IpbWitness::Unsupported { parties },
        });
    }
    let grouped = sigma.grouped_by_party();
    let dims = grouped.split().party_dims();
    let (da, db) = (dims[0], dims[1]);
    let e = hermitian_eig(grouped.matrix())?;
    let lam = &e.eigenvalues;
    let n = lam.len();
    let spread = lam[0] - lam[n - 1];
    if spread < tolerances::DEGENERACY_GAP {
        return Ok(IpbCheck {
            verdict: IpbVerdict::Undecided,
            witness: IpbWitness::DegenerateGap { gap: spread },
        });
    }
    let isolated = |k: usize| {
        let left = k == 0 || lam[k - 1] - lam[k] >= tolerances::DEGENERACY_GAP;
        let right = k + 1 == n || lam[k] - lam[k + 1] >= tolerances::DEGENERACY_GAP;
        left && right
    };
    let min_gap = lam.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);

    let mut factors = Vec::with_capacity(n);
    let mut entangled_in_degenerate = false;
    for k in 0..n {
        let v = e.eigenvectors.column(k);
        let (a, b, second) = product_factors(&v, da, db)?;
        if second > tol {
            if isolated(k) {
                return Ok(IpbCheck {
                    verdict: IpbVerdict::No,
                    witness: IpbWitness::EntangledEigenvector {
                        index: k,
                        eigenvalue: lam[k],
                        second_schmidt: second,
                    },
                });
            }
            entangled_in_degenerate = true;
        }
        factors.push((a, b));
    }
    if entangled_in_degenerate {
        return Ok(IpbCheck {
            verdict: IpbVerdict::Undecided,
            witness: IpbWitness::DegenerateGap { gap: min_gap },
        });
    }

    let forward = adaptive_pattern(&factors, da, db, false);
    let backward = adaptive_pattern(&factors, da, db, true);
    match (forward, backward) {
        (Ok(levels), _) => Ok(IpbCheck {
            verdict: IpbVerdict::Yes,
            witness: IpbWitness::Basis {
                basis: AdaptiveProductBasis::with_order(vec![da, db], vec![0, 1], levels)?,
            },
        }),
        (Err(_), Ok(levels)) => Ok(IpbCheck {
            verdict: IpbVerdict::Yes,
            witness: IpbWitness::Basis {
                basis: AdaptiveProductBasis::with_order(vec![da, db], vec![1, 0], levels)?,
            },
        }),
        (Err(detail), Err(_)) if min_gap >= tolerances::DEGENERACY_GAP => Ok(IpbCheck {
            verdict: IpbVerdict::No,
            witness: IpbWitness::PatternMismatch { detail },
        }),
        (Err(_), Err(_)) => Ok(IpbCheck {
            verdict: IpbVerdict::Undecided,
            witness: IpbWitness::DegenerateGap { gap: min_gap },
        }),
    }
}

/// Splits a bipartite vector into its dominant Schmidt factors and returns
/// the second Schmidt coefficient.
fn product_factors(v: &[C64], da: usize, db: usize) -> Result<(Vec<C64>, Vec<C64>, f64)> {
    let reshaped = |x: usize, y: usize| v[x * db + y];
    let rho_a = ComplexMatrix::from_fn(da, |x, xp| (0..db).map(|y| reshaped(x, y) * reshaped(xp, y).conj()).sum());
    let e = hermitian_eig(&rho_a)?;
    let second = e.eigenvalues.get(1).copied().unwrap_or(0.0).max(0.0).sqrt();
    let a = e.eigenvectors.column(0);
    let mut b: Vec<C64> = (0..db).map(|y| (0..da).map(|x| a[x].conj() * reshaped(x, y)).sum()).collect();
    let norm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    b.iter_mut().for_each(|z| *z /= norm);
    Ok((a, b, second))
}

/// Groups product vectors by the leading party's factor; each group must
/// hold `d_follow` vectors and the groups' leading vectors must be
/// orthonormal.
fn adaptive_pattern(
    factors: &[(Vec<C64>, Vec<C64>)],
    da: usize,
    db: usize,
    reversed: bool,
) -> std::result::Result<Vec<Vec<ComplexMatrix>>, String> {
    let (d_lead, d_follow) = if reversed { (db, da) } else { (da, db) };
    let pick = |k: usize| -> (&Vec<C64>, &Vec<C64>) {
        let (a, b) = &factors[k];
        if reversed {
            (b, a)
        } else {
            (a, b)
        }
    };
    let overlap = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum::<C64>().norm();
    let tol = tolerances::IPB_PATTERN;
    let mut groups: Vec<(Vec<C64>, Vec<Vec<C64>>)> = Vec::new();
    for k in 0..factors.len() {
        let (lead, follow) = pick(k);
        let mut placed = false;
        for (rep, members) in groups.iter_mut() {
            let o = overlap(rep, lead);
            if o > 1.0 - tol {
                // align the phase of the follower with the representative
                let phase: C64 = rep.iter().zip(lead).map(|(p, q)| p.conj() * q).sum::<C64>() / o;
                members.push(follow.iter().map(|z| z * phase).collect());
                placed = true;
                break;
            } else if o > tol {
                return Err(format!("leading factors of eigenvectors overlap by {o:.3e}"));
            }
        }
        if !placed {
            groups.push((lead.clone(), vec![follow.clone()]));
        }
    }
    if groups.len() != d_lead || groups.iter().any(|(_, m)| m.len() != d_follow) {
        return Err(format!(
            "expected {d_lead} groups of {d_follow}, found sizes {:?}",
            groups.iter().map(|(_, m)| m.len()).collect::<Vec<_>>()
        ));
    }
    let lead_u = ComplexMatrix::from_columns(&groups.iter().map(|(r, _)| r.clone()).collect::<Vec<_>>())
        .map_err(|e| e.to_string())?;
    let follow_us: Vec<ComplexMatrix> = groups
        .iter()
        .map(|(_, m)| ComplexMatrix::from_columns(m))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    if lead_u.unitarity_deviation() > 1e-8 || follow_us.iter().any(|u| u.unitarity_deviation() > 1e-8) {
        return Err("grouped factors are not orthonormal".into());
    }
    Ok(vec![vec![lead_u], follow_us])
}
