//! End-to-end acceptance checks, one line per criterion.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use locinfo::bounds::{self, BoundsConfig, DistRateParams, ScanConfig, ScanStepKind};
use locinfo::channels::{self, check_pmm, dephase};
use locinfo::distillsim::{rate_curve, subspace_size, typical_fidelity, Spectrum};
use locinfo::ipbopt::{h_over_ipb, AdaptiveProductBasis};
use locinfo::matcore::{random_density_with, random_unitary_with, seeded_rng};
use locinfo::measures::{min_entropy, relative_entropy, von_neumann_entropy};
use locinfo::states::{catalog, DensityOperator, ParamValue, Params, PartySplit};
use rand::Rng;
use serde_json::Value;

const BELL_INFO_TOL: f64 = 1e-9;
const BELL_UPPER_TOL: f64 = 1e-9;
const BELL_LOWER_TOL: f64 = 1e-4;
const BELL_RUNTIME: Duration = Duration::from_secs(30);
const PURE_LAW_TOL: f64 = 2e-3;
const GHZ_TOL: f64 = 1e-3;
const CLASSICAL_TOL: f64 = 1e-6;
const DP_TOL: f64 = 1e-12;
const CURVE_RUNTIME: Duration = Duration::from_secs(60);
const RAINS_TOL: f64 = 1e-12;
const PMM_TOL: f64 = 1e-10;
const ENTROPY_ORDER_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-8;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn locinfo(args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_locinfo"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok(v["report"].clone())
}

fn num(v: &Value, key: &str) -> Result<f64, String> {
    v[key].as_f64().ok_or_else(|| format!("missing {key}"))
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p]
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

fn bell_deficit() -> Outcome {
    let start = Instant::now();
    let r = locinfo(&["bounds", "--catalog", "bell"])?;
    let elapsed = start.elapsed();
    let (i, up, lo) = (num(&r, "I")?, num(&r, "il_upper")?, num(&r, "il_lower")?);
    let (dl, du) = (num(&r, "delta_lower")?, num(&r, "delta_upper")?);
    let ok = (i - 2.0).abs() <= BELL_INFO_TOL
        && (up - 1.0).abs() <= BELL_UPPER_TOL
        && (lo - 1.0).abs() <= BELL_LOWER_TOL
        && (dl - 1.0).abs() <= BELL_LOWER_TOL
        && (du - 1.0).abs() <= BELL_LOWER_TOL
        && elapsed < BELL_RUNTIME;
    check(
        ok,
        format!("I={i} il=[{lo}, {up}] delta=[{dl}, {du}] in {:.1}s", elapsed.as_secs_f64()),
    )
}

fn pure_state_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for j in 0..9 {
        let theta = j as f64 * std::f64::consts::FRAC_PI_2 / 8.0;
        let mut p = Params::new();
        p.insert("theta".into(), ParamValue::Number(theta));
        let rho = catalog("pure_schmidt", &p).map_err(|e| e.to_string())?;
        let r = bounds::deficit_interval(&rho, &BoundsConfig::default()).map_err(|e| e.to_string())?;
        let expected = binary_entropy(theta.cos().powi(2));
        let mid = 0.5 * (r.delta_lower + r.delta_upper);
        worst = worst
            .max((r.delta_conjectured - expected).abs())
            .max((mid - expected).abs());
    }
    check(worst <= PURE_LAW_TOL, format!("9 angles, max deviation {worst:.2e}"))
}

fn ghz_deficit() -> Outcome {
    let r = locinfo(&["bounds", "--catalog", "ghz"])?;
    let (dl, du) = (num(&r, "delta_lower")?, num(&r, "delta_upper")?);
    check(
        (dl - 1.0).abs() <= GHZ_TOL && (du - 1.0).abs() <= GHZ_TOL,
        format!("delta=[{dl}, {du}]"),
    )
}

fn classical_tight() -> Outcome {
    let r = locinfo(&["bounds", "--catalog", "classical_correlated"])?;
    let (up, lo) = (num(&r, "il_upper")?, num(&r, "il_lower")?);
    let (dl, du) = (num(&r, "delta_lower")?, num(&r, "delta_upper")?);
    let ok = [up - 1.0, lo - 1.0, dl, du].iter().all(|x| x.abs() <= CLASSICAL_TOL);
    check(ok, format!("il=[{lo}, {up}] delta=[{dl}, {du}]"))
}

/// Sum of the largest `floor(2^bits)` string probabilities by enumeration.
fn enumerate_fidelity(probs: &[f64], n: usize, bits: f64) -> f64 {
    let d = probs.len();
    let mut strings: Vec<f64> = (0..d.pow(n as u32))
        .map(|mut idx| {
            let mut v = 1.0;
            for _ in 0..n {
                v *= probs[idx % d];
                idx /= d;
            }
            v
        })
        .collect();
    strings.sort_by(|a, b| b.total_cmp(a));
    let k = (subspace_size(bits) as usize).min(strings.len());
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &x in &strings[..k] {
        let t = sum + x;
        carry += if f64::abs(sum) >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

fn distillation_thresholds() -> Outcome {
    let spec = Spectrum::new(vec![0.9, 0.1]).map_err(|e| e.to_string())?;
    let hi = typical_fidelity(&spec, 2000, 0.55 * 2000.0).map_err(|e| e.to_string())?;
    let lo = typical_fidelity(&spec, 2000, 0.40 * 2000.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        for step in 0..=20 {
            let bits = n as f64 * step as f64 / 20.0;
            let dp = typical_fidelity(&spec, n, bits).map_err(|e| e.to_string())?;
            worst = worst.max((dp - enumerate_fidelity(&[0.9, 0.1], n, bits)).abs());
        }
    }
    let start = Instant::now();
    let curve = rate_curve(&spec, &[100, 1000, 10000], 0.99).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let h = binary_entropy(0.9);
    let rates: Vec<f64> = curve.iter().map(|p| p.rate).collect();
    let decreasing = rates.windows(2).all(|w| w[0] > w[1]) && rates.iter().all(|&r| r > h);
    check(
        hi >= 0.99 && lo <= 0.01 && worst <= DP_TOL && decreasing && elapsed < CURVE_RUNTIME,
        format!(
            "F(0.55)={hi:.6} F(0.40)={lo:.2e} dp-vs-enum {worst:.1e} rates {rates:.4?} in {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn rains_ceiling() -> Outcome {
    let bell = catalog("bell", &Params::new()).map_err(|e| e.to_string())?;
    let mut worst_one: f64 = 0.0;
    let mut worst_log: f64 = 0.0;
    for n in 1..=10_000u64 {
        let one = bounds::rains_fidelity_ceiling(&bell, DistRateParams { n, r: 1.0 }).map_err(|e| e.to_string())?;
        worst_one = worst_one.max((one - 1.0).abs());
        let log = bounds::rains_log2_ceiling(&bell, DistRateParams { n, r: 1.2 }).map_err(|e| e.to_string())?;
        worst_log = worst_log.max((log + 0.2 * n as f64).abs());
    }
    check(
        worst_one == 0.0 && worst_log <= RAINS_TOL,
        format!("r=1 max |F-1| {worst_one:.1e}, r=1.2 max log2 error {worst_log:.1e}"),
    )
}

const SPLITS: [&[usize]; 5] = [&[2, 2], &[2, 3], &[3, 2], &[3, 3], &[2, 2, 2]];

fn random_state(rng: &mut impl Rng) -> DensityOperator {
    let dims = SPLITS[rng.random_range(0..SPLITS.len())];
    let total: usize = dims.iter().product();
    let rank = rng.random_range(1..=total);
    let m = random_density_with(rng, total, rank).expect("rank within dim");
    DensityOperator::validate(m, PartySplit::one_factor_each(dims).expect("valid dims")).expect("valid state")
}

fn random_basis(rng: &mut impl Rng, dims: &[usize]) -> AdaptiveProductBasis {
    let mut prefix = 1;
    let mut levels = Vec::new();
    for &d in &dims[..dims.len() - 1] {
        levels.push((0..prefix).map(|_| random_unitary_with(rng, d)).collect());
        prefix *= d;
    }
    let last = *dims.last().expect("non-empty");
    levels.push((0..prefix).map(|_| random_unitary_with(rng, last)).collect());
    AdaptiveProductBasis::new(dims.to_vec(), levels).expect("unitary levels")
}

fn property_suites() -> Outcome {
    let mut rng = seeded_rng(7);
    let mut pmm_worst: f64 = 0.0;
    let mut pmm_errors = 0;
    for _ in 0..500 {
        let dims = SPLITS[rng.random_range(0..SPLITS.len())];
        let parties: Vec<String> = (0..dims.len()).map(|i| ["A", "B", "C"][i].to_string()).collect();
        let split = PartySplit::new(dims.to_vec(), parties).expect("valid split");
        let step = channels::random_step_with(&mut rng, &split);
        match check_pmm(&step, &split) {
            Ok(r) => pmm_worst = pmm_worst.max(r.max_deviation),
            Err(_) => pmm_errors += 1,
        }
    }

    let mut order_failures = 0;
    for _ in 0..500 {
        let rho = random_state(&mut rng);
        let basis = random_basis(&mut rng, rho.split().factor_dims());
        let s = von_neumann_entropy(&rho);
        let h = h_over_ipb(&rho, &basis).map_err(|e| e.to_string())?;
        if h < s - ENTROPY_ORDER_TOL || min_entropy(&rho) > s + ENTROPY_ORDER_TOL {
            order_failures += 1;
        }
    }

    let mut identity_worst: f64 = 0.0;
    for _ in 0..200 {
        let rho = random_state(&mut rng);
        let basis = random_basis(&mut rng, rho.split().factor_dims());
        let h = h_over_ipb(&rho, &basis).map_err(|e| e.to_string())?;
        let dephased = dephase(&rho, &basis.basis_vectors()).map_err(|e| e.to_string())?;
        let d = relative_entropy(&rho, &dephased).map_err(|e| e.to_string())?;
        identity_worst = identity_worst.max((h - von_neumann_entropy(&rho) - d).abs());
    }

    let scan = bounds::monotonicity_scan(&ScanConfig {
        trials: 1000,
        seed: 1,
        kinds: vec![ScanStepKind::LocalUnitary, ScanStepKind::PartialTrace],
        ..ScanConfig::default()
    })
    .map_err(|e| e.to_string())?;

    check(
        pmm_errors == 0
            && pmm_worst <= PMM_TOL
            && order_failures == 0
            && identity_worst <= IDENTITY_TOL
            && scan.violations.is_empty()
            && scan.failed_trials.is_empty(),
        format!(
            "pmm max {pmm_worst:.1e} ({pmm_errors} errors), order failures {order_failures}, \
             identity max {identity_worst:.1e}, scan {} trials {} violations {} failed",
            scan.trials,
            scan.violations.len(),
            scan.failed_trials.len()
        ),
    )
}

fn domino_reports() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("domino_reports");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut mixtures: Vec<(String, Params)> = Vec::new();
    let weighted = |w: Vec<f64>| {
        let mut p = Params::new();
        p.insert("weights".into(), ParamValue::List(w));
        p
    };
    mixtures.push(("uniform".into(), weighted(vec![1.0; 9])));
    mixtures.push((
        "graded".into(),
        weighted(vec![0.2, 0.15, 0.13, 0.1, 0.09, 0.11, 0.06, 0.07, 0.08]),
    ));
    mixtures.push(("center_heavy".into(), weighted(vec![0.6, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05])));
    for seed in 0..5 {
        let mut p = Params::new();
        p.insert("seed".into(), ParamValue::Number(seed as f64));
        mixtures.push((format!("seed{seed}"), p));
    }
    let mut widths = Vec::new();
    for (name, params) in &mixtures {
        let rho = catalog("domino_mixture", params).map_err(|e| e.to_string())?;
        let r = bounds::deficit_interval(&rho, &BoundsConfig::default()).map_err(|e| e.to_string())?;
        let json = serde_json::to_string_pretty(&r).map_err(|e| e.to_string())?;
        std::fs::write(dir.join(format!("{name}.json")), json).map_err(|e| e.to_string())?;
        widths.push(format!("{name}:{:.4}", r.interval_width));
    }
    Ok(format!("{} reports in {}, widths {}", mixtures.len(), dir.display(), widths.join(" ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("bell deficit", bell_deficit),
        ("pure-state law", pure_state_law),
        ("ghz deficit", ghz_deficit),
        ("classically correlated", classical_tight),
        ("distillation thresholds", distillation_thresholds),
        ("rains ceiling", rains_ceiling),
        ("property suites", property_suites),
        ("domino mixtures", domino_reports),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
