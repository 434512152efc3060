//! Seeded verification suites: random instance generation, pointwise
//! checkers, orchestration and counterexample capture.

pub mod checks;
pub mod generate;
mod suite;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::Variant;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, ComparisonTolerance, SymmetricMatrix};
use crate::scalar::ScalarFunctionModel;

pub use checks::{
    check_map_jensen, check_power_mean, check_vector_jensen, classify, compare_estimates,
    ComparisonRecord, JensenMode, StateMargin, Tighter,
};
pub use generate::{
    random_pd_pair_invertible_diff, random_psd, random_unital_map, rng_from_seed, trial_seed,
    TrialRng,
};
pub use suite::{Evaluation, Instance, Reduce, DILATION_IDENTITY_TOL, WITNESS_TOL};

use generate::{
    ordered_pd_pair_from_rng, pd_pair_from_rng, pick, random_contraction, random_orthogonal,
    random_spectrum_matrix, random_unit_vector, unital_map_from_rng,
};
use suite::{rows_of, vec_of};

/// Most counterexamples kept per check.
pub const MAX_COUNTEREXAMPLES: usize = 8;

/// Names of every registered check, in execution order.
pub const CHECK_NAMES: &[&str] = &[
    "thm21",
    "thm25",
    "thm29",
    "cor211_derived",
    "cor211_paper",
    "eq_mp",
    "eq_k",
    "eq_kd",
    "aj_p",
    "sandwich_lower",
    "sandwich_derived",
    "sandwich_paper",
    "unit_conjugation",
    "congruence",
    "dilation",
];

fn specs(list: &[&str]) -> Vec<ScalarFunctionModel> {
    list.iter()
        .map(|s| s.parse().expect("built-in specifier"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub master_seed: u64,
    /// Trials for the theorem-level checks.
    pub trials: usize,
    pub preliminary_trials: usize,
    pub construction_trials: usize,
    pub dilation_trials: usize,
    pub dims: Vec<usize>,
    /// Concave decreasing functions for the concave estimates.
    pub functions: Vec<ScalarFunctionModel>,
    /// Convex increasing functions for the convex estimates.
    pub convex_functions: Vec<ScalarFunctionModel>,
    /// Functions fed to the superquadratic state inequalities.
    pub superquadratic_functions: Vec<ScalarFunctionModel>,
    pub power_mean_p: Vec<f64>,
    pub sandwich_q: Vec<f64>,
    pub alphas: Vec<f64>,
    pub spread: f64,
    /// Lower bound on `σ_min(a − b)` for generated pairs.
    pub gap: f64,
    pub tolerance: ComparisonTolerance,
    pub preliminary_tolerance: ComparisonTolerance,
    /// Restrict the run to these checks; `None` runs all of them.
    pub checks: Option<Vec<String>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            master_seed: 42,
            trials: 500,
            preliminary_trials: 1000,
            construction_trials: 200,
            dilation_trials: 100,
            dims: vec![2, 3, 4, 5, 6],
            functions: specs(&[
                "neg_pow_q:1",
                "neg_pow_q:1.25",
                "neg_pow_q:1.5",
                "neg_pow_q:1.75",
                "neg_pow_q:2",
            ]),
            convex_functions: specs(&["pow_p:2", "pow_p:2.5", "pow_p:3"]),
            superquadratic_functions: specs(&[
                "pow_p:2",
                "pow_p:3",
                "neg_pow_q:1",
                "neg_pow_q:1.5",
                "neg_pow_q:2",
                "x2_log",
                "neg_root_sum:0.5",
                "square",
            ]),
            power_mean_p: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            sandwich_q: vec![1.0, 1.25, 1.5, 1.75, 2.0],
            alphas: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            spread: 10.0,
            gap: 0.1,
            tolerance: ComparisonTolerance::relative(1e-8),
            preliminary_tolerance: ComparisonTolerance::relative(1e-9),
            checks: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be a nonempty list of positive integers".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return bad(format!("alpha {a} outside [0, 1]"));
        }
        if self.alphas.is_empty() {
            return bad("alphas must be nonempty".into());
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return bad(format!("spread must be positive, got {}", self.spread));
        }
        if !(self.gap > 0.0 && self.gap < self.spread) {
            return bad(format!("gap must lie in (0, spread), got {}", self.gap));
        }
        for (name, list) in [
            ("functions", &self.functions),
            ("convex_functions", &self.convex_functions),
            ("superquadratic_functions", &self.superquadratic_functions),
        ] {
            if list.is_empty() {
                return bad(format!("{name} must be nonempty"));
            }
        }
        if let Some(f) = self.functions.iter().find(|f| !f.is_concave_decreasing()) {
            return bad(format!("{f} is not concave decreasing"));
        }
        if let Some(f) = self
            .convex_functions
            .iter()
            .find(|f| !f.is_convex_increasing())
        {
            return bad(format!("{f} is not convex increasing"));
        }
        if let Some(p) = self.power_mean_p.iter().find(|p| p.is_nan() || **p < 1.0) {
            return bad(format!("power mean exponent {p} below 1"));
        }
        if let Some(q) = self.sandwich_q.iter().find(|q| !(1.0..=2.0).contains(*q)) {
            return bad(format!("sandwich exponent {q} outside [1, 2]"));
        }
        if self.power_mean_p.is_empty() || self.sandwich_q.is_empty() {
            return bad("exponent grids must be nonempty".into());
        }
        if let Some(names) = &self.checks {
            if let Some(n) = names.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
                return bad(format!("unknown check {n:?}"));
            }
        }
        Ok(())
    }

    fn enabled(&self, name: &str) -> bool {
        self.checks
            .as_ref()
            .is_none_or(|c| c.iter().any(|n| n == name))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub seed: u64,
    pub margin: f64,
    pub scale: f64,
    pub normalized_margin: f64,
    pub reason: Option<String>,
    pub instance: Instance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Whether failures make the suite fail, as opposed to being collected.
    pub asserted: bool,
    pub tolerance: ComparisonTolerance,
    pub trials_run: usize,
    pub pass_count: usize,
    pub fail_count: usize,
    pub skipped: usize,
    pub skip_reasons: BTreeMap<String, usize>,
    /// Smallest `margin / scale` seen.
    pub worst_margin: Option<f64>,
    pub worst_case_seed: Option<u64>,
    pub counterexamples: Vec<Counterexample>,
    pub extras: BTreeMap<String, f64>,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.fail_count == 0 && self.pass_count > 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonTally {
    pub thm21: usize,
    pub thm25: usize,
    pub tie: usize,
    pub incomparable: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub records: Vec<CheckRecord>,
    pub comparison: Option<ComparisonTally>,
    /// `true` when every asserted check ran and never failed.
    pub passed: bool,
    pub erratum_notes: Vec<String>,
    /// Seconds; the only field that varies between identical runs.
    pub wall_time: f64,
}

impl SuiteReport {
    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

type Generator = fn(&SuiteConfig, &mut TrialRng, usize) -> Result<Instance>;

struct CheckSpec {
    name: &'static str,
    asserted: bool,
    trials: fn(&SuiteConfig) -> usize,
    tol: fn(&SuiteConfig) -> ComparisonTolerance,
    generate: Generator,
}

fn theorem_trials(c: &SuiteConfig) -> usize {
    c.trials
}

fn preliminary_trials(c: &SuiteConfig) -> usize {
    c.preliminary_trials
}

fn construction_trials(c: &SuiteConfig) -> usize {
    c.construction_trials
}

fn dilation_trials(c: &SuiteConfig) -> usize {
    c.dilation_trials
}

fn theorem_tol(c: &SuiteConfig) -> ComparisonTolerance {
    c.tolerance
}

fn preliminary_tol(c: &SuiteConfig) -> ComparisonTolerance {
    c.preliminary_tolerance
}

fn congruence_tol(_: &SuiteConfig) -> ComparisonTolerance {
    ComparisonTolerance::relative(1e-10)
}

fn dim(c: &SuiteConfig, rng: &mut TrialRng) -> usize {
    *pick(rng, &c.dims)
}

fn psd(c: &SuiteConfig, rng: &mut TrialRng, n: usize) -> SymmetricMatrix {
    random_spectrum_matrix(rng, n, 0.0, c.spread)
}

fn gen_thm21(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let f = *pick(rng, &c.functions);
    let alpha = *pick(rng, &c.alphas);
    let a = psd(c, rng, n);
    let b = psd(c, rng, n);
    Ok(Instance::ConcavePair { f, a, b, alpha })
}

fn gen_thm25(c: &SuiteConfig, rng: &mut TrialRng, index: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let f = *pick(rng, &c.functions);
    let map = unital_map_from_rng(rng, n)?;
    let size = if index.is_multiple_of(2) { 2 * n } else { n };
    let a = psd(c, rng, size);
    Ok(Instance::Map { f, a, map })
}

fn convex_pair(
    c: &SuiteConfig,
    rng: &mut TrialRng,
    index: usize,
    n: usize,
) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    if index.is_multiple_of(2) {
        pd_pair_from_rng(rng, n, c.spread, c.gap)
    } else {
        ordered_pd_pair_from_rng(rng, n, c.spread, c.gap)
    }
}

fn gen_thm29(c: &SuiteConfig, rng: &mut TrialRng, index: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let f = *pick(rng, &c.convex_functions);
    let alpha = *pick(rng, &c.alphas);
    let (a, b) = convex_pair(c, rng, index, n)?;
    Ok(Instance::ConvexPair { f, a, b, alpha })
}

fn gen_cor211(
    c: &SuiteConfig,
    rng: &mut TrialRng,
    index: usize,
    variant: Variant,
) -> Result<Instance> {
    let n = dim(c, rng);
    let p = pick(rng, &c.convex_functions).params()[0];
    let (a, b) = convex_pair(c, rng, index, n)?;
    Ok(Instance::PowerConvex { a, b, p, variant })
}

fn gen_cor211_derived(c: &SuiteConfig, rng: &mut TrialRng, index: usize) -> Result<Instance> {
    gen_cor211(c, rng, index, Variant::Derived)
}

fn gen_cor211_paper(c: &SuiteConfig, rng: &mut TrialRng, index: usize) -> Result<Instance> {
    gen_cor211(c, rng, index, Variant::Paper)
}

fn gen_eq_mp(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let f = *pick(rng, &c.convex_functions);
    let a = psd(c, rng, n);
    let x = vec_of(&random_unit_vector(rng, n));
    Ok(Instance::State {
        f,
        a,
        x,
        mode: JensenMode::Convex,
    })
}

fn gen_eq_k(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let f = *pick(rng, &c.superquadratic_functions);
    let a = psd(c, rng, n);
    let x = vec_of(&random_unit_vector(rng, n));
    Ok(Instance::State {
        f,
        a,
        x,
        mode: JensenMode::Superquadratic,
    })
}

fn gen_eq_kd(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let f = *pick(rng, &c.superquadratic_functions);
    let map = unital_map_from_rng(rng, n)?;
    let a = psd(c, rng, n);
    let x = vec_of(&random_unit_vector(rng, n));
    Ok(Instance::MapState { f, a, map, x })
}

fn gen_aj_p(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let p = *pick(rng, &c.power_mean_p);
    let a = psd(c, rng, n);
    let b = psd(c, rng, n);
    Ok(Instance::PowerMean { a, b, p })
}

fn sandwich_inputs(c: &SuiteConfig, rng: &mut TrialRng) -> (SymmetricMatrix, SymmetricMatrix, f64) {
    let n = dim(c, rng);
    let q = *pick(rng, &c.sandwich_q);
    let x = psd(c, rng, n);
    let y = psd(c, rng, n);
    (x, y, q)
}

fn gen_sandwich_lower(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let (x, y, q) = sandwich_inputs(c, rng);
    Ok(Instance::SandwichLower { x, y, q })
}

fn gen_sandwich_derived(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let (x, y, q) = sandwich_inputs(c, rng);
    Ok(Instance::SandwichUpper {
        x,
        y,
        q,
        variant: Variant::Derived,
    })
}

fn gen_sandwich_paper(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let (x, y, q) = sandwich_inputs(c, rng);
    Ok(Instance::SandwichUpper {
        x,
        y,
        q,
        variant: Variant::Paper,
    })
}

/// `k` shares no eigenvectors with `h` but dominates its spectrum entrywise;
/// every fourth trial uses an equal spectrum.
fn gen_unit_conjugation(c: &SuiteConfig, rng: &mut TrialRng, index: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let h = random_spectrum_matrix(rng, n, -c.spread, c.spread);
    let lifted: Vec<f64> = eigenvalues(&h)?
        .into_iter()
        .map(|l| {
            if index.is_multiple_of(4) {
                l
            } else {
                l + rng.random_range(0.0..=c.spread / 2.0)
            }
        })
        .collect();
    let q = random_orthogonal(rng, n);
    let k = SymmetricMatrix::diagonal(&lifted).congruence_t(&q);
    Ok(Instance::UnitConjugation { h, k })
}

fn gen_congruence(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let z = crate::linalg::Matrix::from_fn(n, n, |_, _| {
        c.spread * rng.sample::<f64, _>(rand_distr::StandardNormal)
    });
    Ok(Instance::Congruence { z: rows_of(&z) })
}

fn gen_dilation(c: &SuiteConfig, rng: &mut TrialRng, _: usize) -> Result<Instance> {
    let n = dim(c, rng);
    let f = *pick(rng, &c.convex_functions);
    let x = random_spectrum_matrix(rng, n, c.spread / 100.0, c.spread);
    let contraction = random_contraction(rng, n, 0.1, 0.9);
    Ok(Instance::Dilation {
        f,
        x,
        c: rows_of(&contraction),
    })
}

fn registry() -> Vec<CheckSpec> {
    let spec = |name, asserted, trials, tol, generate| CheckSpec {
        name,
        asserted,
        trials,
        tol,
        generate,
    };
    vec![
        spec(
            "thm21",
            true,
            theorem_trials,
            theorem_tol,
            gen_thm21 as Generator,
        ),
        spec("thm25", true, theorem_trials, theorem_tol, gen_thm25),
        spec("thm29", true, theorem_trials, theorem_tol, gen_thm29),
        spec(
            "cor211_derived",
            true,
            theorem_trials,
            theorem_tol,
            gen_cor211_derived,
        ),
        spec(
            "cor211_paper",
            false,
            theorem_trials,
            theorem_tol,
            gen_cor211_paper,
        ),
        spec(
            "eq_mp",
            true,
            preliminary_trials,
            preliminary_tol,
            gen_eq_mp,
        ),
        spec("eq_k", true, preliminary_trials, preliminary_tol, gen_eq_k),
        spec(
            "eq_kd",
            true,
            preliminary_trials,
            preliminary_tol,
            gen_eq_kd,
        ),
        spec("aj_p", true, preliminary_trials, preliminary_tol, gen_aj_p),
        spec(
            "sandwich_lower",
            true,
            theorem_trials,
            theorem_tol,
            gen_sandwich_lower,
        ),
        spec(
            "sandwich_derived",
            true,
            theorem_trials,
            theorem_tol,
            gen_sandwich_derived,
        ),
        spec(
            "sandwich_paper",
            false,
            theorem_trials,
            theorem_tol,
            gen_sandwich_paper,
        ),
        spec(
            "unit_conjugation",
            true,
            construction_trials,
            theorem_tol,
            gen_unit_conjugation,
        ),
        spec(
            "congruence",
            true,
            construction_trials,
            congruence_tol,
            gen_congruence,
        ),
        spec("dilation", true, dilation_trials, theorem_tol, gen_dilation),
    ]
}

enum Outcome {
    Evaluated {
        seed: u64,
        eval: Evaluation,
        instance: Box<Instance>,
    },
    Skipped {
        reason: String,
    },
}

fn run_trial(config: &SuiteConfig, spec: &CheckSpec, index: usize) -> Outcome {
    let seed = trial_seed(config.master_seed, spec.name, index);
    let mut rng = rng_from_seed(seed);
    let result = (spec.generate)(config, &mut rng, index)
        .and_then(|instance| instance.evaluate().map(|eval| (instance, eval)));
    match result {
        Ok((instance, eval)) => Outcome::Evaluated {
            seed,
            eval,
            instance: Box::new(instance),
        },
        Err(e) => Outcome::Skipped {
            reason: e.kind().to_string(),
        },
    }
}

/// A trial fails when its margin is below `−threshold(scale)` or it carries
/// a defect.
pub fn trial_fails(eval: &Evaluation, tol: ComparisonTolerance) -> bool {
    eval.margin.is_nan() || eval.margin < -tol.threshold(eval.scale) || eval.defect.is_some()
}

fn run_check(config: &SuiteConfig, spec: &CheckSpec) -> CheckRecord {
    let tol = (spec.tol)(config);
    let outcomes: Vec<Outcome> = (0..(spec.trials)(config))
        .into_par_iter()
        .map(|i| run_trial(config, spec, i))
        .collect();
    let mut record = CheckRecord {
        name: spec.name.into(),
        asserted: spec.asserted,
        tolerance: tol,
        trials_run: 0,
        pass_count: 0,
        fail_count: 0,
        skipped: 0,
        skip_reasons: BTreeMap::new(),
        worst_margin: None,
        worst_case_seed: None,
        counterexamples: Vec::new(),
        extras: BTreeMap::new(),
    };
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Outcome::Skipped { reason } => {
                record.skipped += 1;
                *record.skip_reasons.entry(reason).or_default() += 1;
            }
            Outcome::Evaluated {
                seed,
                eval,
                instance,
            } => {
                record.trials_run += 1;
                let normalized = eval.normalized();
                if record.worst_margin.is_none_or(|w| normalized < w) {
                    record.worst_margin = Some(normalized);
                    record.worst_case_seed = Some(seed);
                }
                for (key, how, value) in &eval.extras {
                    let slot = record.extras.entry((*key).to_string());
                    match how {
                        Reduce::Sum => *slot.or_insert(0.0) += value,
                        Reduce::Min => {
                            let v = slot.or_insert(*value);
                            *v = v.min(*value);
                        }
                        Reduce::Max => {
                            let v = slot.or_insert(*value);
                            *v = v.max(*value);
                        }
                    }
                }
                if trial_fails(&eval, tol) {
                    record.fail_count += 1;
                    if record.counterexamples.len() < MAX_COUNTEREXAMPLES {
                        record.counterexamples.push(Counterexample {
                            trial,
                            seed,
                            margin: eval.margin,
                            scale: eval.scale,
                            normalized_margin: normalized,
                            reason: eval.defect.clone(),
                            instance: *instance,
                        });
                    }
                } else {
                    record.pass_count += 1;
                }
            }
        }
    }
    record
}

fn run_comparison(config: &SuiteConfig) -> ComparisonTally {
    let outcomes: Vec<Option<Tighter>> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(config.master_seed, "comparison", i);
            let mut rng = rng_from_seed(seed);
            let Ok(Instance::ConcavePair { f, a, b, alpha }) = gen_thm21(config, &mut rng, i)
            else {
                return None;
            };
            compare_estimates(&format!("trial{i}"), &f, &a, &b, alpha, config.tolerance)
                .ok()
                .map(|r| r.tighter)
        })
        .collect();
    let mut tally = ComparisonTally::default();
    for o in outcomes {
        match o {
            Some(Tighter::Thm21) => tally.thm21 += 1,
            Some(Tighter::Thm25) => tally.thm25 += 1,
            Some(Tighter::Tie) => tally.tie += 1,
            Some(Tighter::Incomparable) => tally.incomparable += 1,
            None => tally.skipped += 1,
        }
    }
    tally
}

fn erratum_notes(records: &[CheckRecord]) -> Vec<String> {
    let mut notes = Vec::new();
    for r in records.iter().filter(|r| !r.asserted && r.fail_count > 0) {
        let what = match r.name.as_str() {
            "sandwich_paper" => {
                "printed subadditivity correction 2(λ1(x+y) − λn(x+y))^q is too small; \
                 the derived correction 2λ1(x+y)^q is used by default"
            }
            "cor211_paper" => {
                "printed Kantorovich coefficient does not bound the reverse-Jensen gap; \
                 the derived coefficient 1/γ is used by default"
            }
            _ => "collected failures",
        };
        notes.push(format!(
            "{}: {} of {} trials fail; {}",
            r.name, r.fail_count, r.trials_run, what
        ));
    }
    notes
}

/// Runs every enabled check. Trials run in parallel but are collected in
/// index order, so the report is identical across runs apart from
/// `wall_time`.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let start = Instant::now();
    let records: Vec<CheckRecord> = registry()
        .iter()
        .filter(|s| config.enabled(s.name))
        .map(|s| run_check(config, s))
        .collect();
    let comparison = config.enabled("thm21").then(|| run_comparison(config));
    let passed = records
        .iter()
        .filter(|r| r.asserted)
        .all(CheckRecord::passed);
    let erratum_notes = erratum_notes(&records);
    Ok(SuiteReport {
        config: config.clone(),
        records,
        comparison,
        passed,
        erratum_notes,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Re-evaluates a stored counterexample.
pub fn replay(counterexample: &Counterexample) -> Result<Evaluation> {
    counterexample.instance.evaluate()
}
