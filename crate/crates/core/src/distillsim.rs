//! Typical-subspace distillation at the spectrum level.
//!
//! Projecting `rho^{(x) n}` onto the span of its `K` most likely eigenvector
//! strings keeps a fidelity equal to the total probability of those strings.
//! Strings with the same symbol counts (a type class) are equiprobable, so
//! the fidelity follows from the type classes sorted by per-string
//! probability, with multinomial counts kept in natural-log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, shannon_entropy};
use crate::states::DensityOperator;
use crate::tolerances::FIDELITY_TARGET;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    probabilities: Vec<f64>,
}

impl Spectrum {
    /// Sorts descending; entries must lie in `[0, 1]` and sum to one within `1e-12`.
    pub fn new(mut probabilities: Vec<f64>) -> Result<Self> {
        let bad = |value: f64, reason: &str| Error::Parameter {
            name: "spectrum".into(),
            value,
            reason: reason.into(),
        };
        if probabilities.is_empty() || probabilities.len() > 6 {
            return Err(bad(probabilities.len() as f64, "length must lie in 1..=6"));
        }
        if let Some(&p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(bad(p, "entries must lie in [0, 1]"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(bad(total, "entries must sum to 1"));
        }
        probabilities.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { probabilities })
    }

    pub fn of_state(rho: &DensityOperator) -> Result<Self> {
        let mut p = measures::clamped_spectrum(rho.matrix())?;
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        Self::new(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn dim(&self) -> usize {
        self.probabilities.len()
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probabilities)
    }

    fn support(&self) -> Vec<f64> {
        self.probabilities.iter().copied().filter(|&p| p > 0.0).collect()
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.probabilities
    }
}

/// Largest `n` the type-class enumeration accepts for a support size.
pub fn max_copies(support: usize) -> usize {
    match support {
        0 | 1 => usize::MAX,
        2 => 1_000_000,
        3 | 4 => 200,
        _ => 40,
    }
}

fn check_feasible(support: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Infeasible("need at least one copy".into()));
    }
    if n > max_copies(support) {
        return Err(Error::Infeasible(format!(
            "n = {n} exceeds the limit {} for support size {support}",
            max_copies(support)
        )));
    }
    Ok(())
}

/// Neumaier compensated sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::default();
    out.push(0.0);
    for k in 1..=n {
        acc.add((k as f64).ln());
        out.push(acc.value());
    }
    out
}

/// Type class: `ln` of its string count and of one string's probability.
#[derive(Clone, Copy)]
struct TypeClass {
    ln_count: f64,
    ln_prob: f64,
}

fn type_classes(probs: &[f64], n: usize) -> Vec<TypeClass> {
    let lf = ln_factorials(n);
    let ln_p: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
    let d = probs.len();
    let mut out = Vec::new();
    let mut counts = vec![0usize; d];
    fn recurse(
        k: usize,
        left: usize,
        counts: &mut [usize],
        lf: &[f64],
        ln_p: &[f64],
        n: usize,
        out: &mut Vec<TypeClass>,
    ) {
        let d = counts.len();
        if k + 1 == d {
            counts[k] = left;
            let mut ln_count = lf[n];
            let mut ln_prob = 0.0;
            for (j, &c) in counts.iter().enumerate() {
                ln_count -= lf[c];
                if c > 0 {
                    ln_prob += c as f64 * ln_p[j];
                }
            }
            out.push(TypeClass { ln_count, ln_prob });
            return;
        }
        for c in 0..=left {
            counts[k] = c;
            recurse(k + 1, left - c, counts, lf, ln_p, n, out);
        }
    }
    recurse(0, n, &mut counts, &lf, &ln_p, n, &mut out);
    out.sort_by(|a, b| b.ln_prob.total_cmp(&a.ln_prob));
    out
}

/// `ln(e^a - e^b)` for `a >= b`.
fn ln_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    let x = b - a;
    if x >= 0.0 {
        return f64::NEG_INFINITY;
    }
    a + (-x.exp()).ln_1p()
}

/// `ln(e^a + e^b)`.
fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `floor(2^bits)`, with `bits = log2 K` mapping back to `K` despite rounding.
pub fn subspace_size(bits: f64) -> f64 {
    (bits.exp2() * (1.0 + 1e-12)).floor()
}

/// Fidelity of keeping the `floor(2^noise_bits)` most likely strings of `n` copies.
pub fn typical_fidelity(spectrum: &Spectrum, n: usize, noise_bits: f64) -> Result<f64> {
    let probs = spectrum.support();
    check_feasible(probs.len(), n)?;
    let max_bits = n as f64 * (spectrum.dim() as f64).log2();
    if !(noise_bits >= 0.0 && noise_bits <= max_bits + 1e-9) {
        return Err(Error::Parameter {
            name: "noise_bits".into(),
            value: noise_bits,
            reason: format!("must lie in [0, {max_bits}]"),
        });
    }
    let mut ln_left = if noise_bits < 52.0 {
        subspace_size(noise_bits).ln()
    } else {
        noise_bits * std::f64::consts::LN_2
    };
    let mut mass = CompensatedSum::default();
    for class in type_classes(&probs, n) {
        if ln_left == f64::NEG_INFINITY {
            break;
        }
        if ln_left >= class.ln_count {
            mass.add((class.ln_count + class.ln_prob).exp());
            ln_left = ln_sub_exp(ln_left, class.ln_count);
        } else {
            mass.add((ln_left + class.ln_prob).exp());
            break;
        }
    }
    Ok(mass.value().clamp(0.0, 1.0))
}

/// Smallest subspace reaching a target fidelity at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub n: usize,
    /// `log2 K` for the minimal string count `K`.
    pub noise_bits: f64,
    /// `noise_bits / n`.
    pub rate: f64,
    pub fidelity: f64,
}

/// Minimal noise rate per copy with fidelity at least `target` (up to
/// [`FIDELITY_TARGET`]) for each `n`, by direct inversion of the accumulation.
pub fn rate_curve(spectrum: &Spectrum, n_list: &[usize], target: f64) -> Result<Vec<RatePoint>> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::Parameter {
            name: "target".into(),
            value: target,
            reason: "must lie in (0, 1]".into(),
        });
    }
    let probs = spectrum.support();
    n_list
        .iter()
        .map(|&n| {
            check_feasible(probs.len(), n)?;
            let goal = target - FIDELITY_TARGET;
            let mut mass = CompensatedSum::default();
            let mut ln_k = f64::NEG_INFINITY;
            for class in type_classes(&probs, n) {
                let class_mass = (class.ln_count + class.ln_prob).exp();
                let before = mass.value();
                if before + class_mass >= goal {
                    let needed = ((goal - before).max(0.0) / class.ln_prob.exp()).ceil().max(1.0);
                    let take = needed.ln().min(class.ln_count);
                    mass.add((take + class.ln_prob).exp());
                    ln_k = ln_add_exp(ln_k, take);
                    break;
                }
                mass.add(class_mass);
                ln_k = ln_add_exp(ln_k, class.ln_count);
            }
            let noise_bits = (ln_k / std::f64::consts::LN_2).max(0.0);
            Ok(RatePoint {
                n,
                noise_bits,
                rate: noise_bits / n as f64,
                fidelity: mass.value().min(1.0),
            })
        })
        .collect()
}

/// Resources to create `n` copies: pure qubits `n (N - S)` and noise `n S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CreationCost {
    pub n: usize,
    pub pure_qubits: f64,
    pub noise_qubits: f64,
}

pub fn creation_cost(rho: &DensityOperator, n: usize) -> CreationCost {
    cost(rho.n_bits(), measures::von_neumann_entropy(rho), n)
}

pub fn creation_cost_of_spectrum(spectrum: &Spectrum, n: usize) -> CreationCost {
    cost((spectrum.dim() as f64).log2(), spectrum.entropy(), n)
}

fn cost(n_bits: f64, s: f64, n: usize) -> CreationCost {
    let k = n as f64;
    CreationCost {
        n,
        pure_qubits: k * (n_bits - s),
        noise_qubits: k * s,
    }
}

/// Spectrum, copies and subspace size with the resulting fidelity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistillationRun {
    pub spectrum: Spectrum,
    pub n: usize,
    pub noise_bits: f64,
    pub fidelity: f64,
}

impl DistillationRun {
    pub fn evaluate(spectrum: Spectrum, n: usize, noise_bits: f64) -> Result<Self> {
        let fidelity = typical_fidelity(&spectrum, n, noise_bits)?;
        Ok(Self {
            spectrum,
            n,
            noise_bits,
            fidelity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{catalog, ParamValue, Params};

    /// Sum of the `floor(2^bits)` largest string probabilities by enumeration.
    fn brute_force(probs: &[f64], n: usize, bits: f64) -> f64 {
        let d = probs.len();
        let mut all = vec![1.0f64; d.pow(n as u32)];
        for (idx, v) in all.iter_mut().enumerate() {
            let mut i = idx;
            for _ in 0..n {
                *v *= probs[i % d];
                i /= d;
            }
        }
        all.sort_by(|a, b| b.total_cmp(a));
        let k = (subspace_size(bits) as usize).min(all.len());
        let mut acc = CompensatedSum::default();
        all[..k].iter().for_each(|&x| acc.add(x));
        acc.value()
    }

    fn spec(p: &[f64]) -> Spectrum {
        Spectrum::new(p.to_vec()).unwrap()
    }

    #[test]
    fn pure_spectrum_is_lossless() {
        for n in [1, 10, 1000] {
            assert_eq!(typical_fidelity(&spec(&[1.0]), n, 0.0).unwrap(), 1.0);
            assert_eq!(typical_fidelity(&spec(&[1.0, 0.0]), n, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn uniform_qubit_is_exact() {
        let s = spec(&[0.5, 0.5]);
        for n in [1, 5, 30, 200] {
            for bits in [0.0, 1.0, 2.5, n as f64 / 2.0, n as f64].into_iter().filter(|&b| b <= n as f64) {
                let expected = (bits.exp2().floor() / (n as f64).exp2()).min(1.0);
                let got = typical_fidelity(&s, n, bits).unwrap();
                assert!((got - expected).abs() < 1e-12, "n={n} bits={bits}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn matches_brute_force() {
        let cases: [&[f64]; 4] = [&[0.9, 0.1], &[0.6, 0.4], &[0.5, 0.3, 0.2], &[0.4, 0.4, 0.2]];
        for p in cases {
            let s = spec(p);
            for n in 1..=(if p.len() == 2 { 12 } else { 8 }) {
                let max_bits = n as f64 * (p.len() as f64).log2();
                for step in 0..=10 {
                    let bits = max_bits * step as f64 / 10.0;
                    let dp = typical_fidelity(&s, n, bits).unwrap();
                    let bf = brute_force(s.probabilities(), n, bits);
                    assert!((dp - bf).abs() <= 1e-12, "{p:?} n={n} bits={bits}: {dp} vs {bf}");
                }
            }
        }
    }

    #[test]
    fn thresholds_around_entropy() {
        let s = spec(&[0.9, 0.1]);
        let hi = typical_fidelity(&s, 2000, 0.55 * 2000.0).unwrap();
        let lo = typical_fidelity(&s, 2000, 0.40 * 2000.0).unwrap();
        assert!(hi >= 0.99 && lo <= 0.01, "{hi} {lo}");
    }

    #[test]
    fn non_decreasing_in_noise_bits() {
        let s = spec(&[0.7, 0.2, 0.1]);
        let mut last = 0.0;
        for i in 0..=60 {
            let f = typical_fidelity(&s, 30, 30.0 * 3f64.log2() * i as f64 / 60.0).unwrap();
            assert!(f >= last - 1e-15);
            last = f;
        }
    }

    #[test]
    fn rate_curve_examples() {
        let r = rate_curve(&spec(&[0.5, 0.5]), &[1, 10, 100], 1.0).unwrap();
        assert!(r.iter().all(|p| (p.rate - 1.0).abs() < 1e-12), "{r:?}");
        let r = rate_curve(&spec(&[1.0, 0.0]), &[1, 50], 0.9).unwrap();
        assert!(r.iter().all(|p| p.rate == 0.0));
        let r = rate_curve(&spec(&[0.9, 0.1]), &[100, 1000, 10000], 0.99).unwrap();
        assert!(r[0].rate > r[1].rate && r[1].rate > r[2].rate);
        let h = measures::binary_entropy(0.9);
        assert!(r[2].rate > h && r[2].rate - h < r[0].rate - h);
    }

    #[test]
    fn rate_curve_is_minimal() {
        let s = spec(&[0.8, 0.2]);
        for p in rate_curve(&s, &[8, 12], 0.9).unwrap() {
            let k = p.noise_bits.exp2().round();
            let at = typical_fidelity(&s, p.n, k.log2()).unwrap();
            let below = typical_fidelity(&s, p.n, (k - 1.0).log2()).unwrap();
            assert!(at >= 0.9 - FIDELITY_TARGET && below < 0.9 - FIDELITY_TARGET, "{p:?} k={k} at={at} below={below}");
        }
    }

    #[test]
    fn infeasible_sizes() {
        assert!(typical_fidelity(&spec(&[0.5, 0.3, 0.2]), 201, 1.0).is_err());
        assert!(typical_fidelity(&spec(&[0.5, 0.2, 0.1, 0.1, 0.1]), 41, 1.0).is_err());
        assert!(typical_fidelity(&spec(&[0.9, 0.1]), 10, -1.0).is_err());
        assert!(Spectrum::new(vec![0.5, 0.4]).is_err());
        assert!(Spectrum::new(vec![1.0 / 7.0; 7]).is_err());
    }

    #[test]
    fn creation_cost_examples() {
        let bell = catalog("bell", &Params::new()).unwrap();
        let c = creation_cost(&bell, 10);
        assert!((c.pure_qubits - 20.0).abs() < 1e-9 && c.noise_qubits.abs() < 1e-9);
        let mm = catalog("max_mixed", &Params::new()).unwrap();
        let c = creation_cost(&mm, 10);
        assert!(c.pure_qubits.abs() < 1e-9 && (c.noise_qubits - 20.0).abs() < 1e-9);
        let mut p = Params::new();
        p.insert("p".into(), ParamValue::Number(0.5));
        let w = catalog("werner", &p).unwrap();
        let s = shannon_entropy(&[0.625, 0.125, 0.125, 0.125]);
        assert!((creation_cost(&w, 100).pure_qubits - 100.0 * (2.0 - s)).abs() < 1e-9);
    }
}
