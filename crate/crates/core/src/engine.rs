//! Stochastic counting: solve sampled systems over several primes, vote, and
//! check the result against every combinatorial guard.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::best_bound;
use crate::combinatorics::surplus;
use crate::error::{Error, Result};
use crate::ffield::{stream_rng, PrimeField, DEFAULT_PRIMES};
use crate::groebner::{buchberger_with_limits, quotient_dimension, Limits, MonomialOrder, QuotientDimension};
use crate::instance::Instance;
use crate::polysys::{build_system, SystemOptions};
use crate::reduce::{fully_reduce, reduce_once, ReductionTrail};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    pub trials: usize,
    pub seed: u64,
    /// Trial `t` works modulo `primes[t % primes.len()]`.
    pub primes: Vec<u64>,
    pub system: SystemOptions,
    pub reduce: bool,
    pub limits: Limits,
    /// Minimum share of all trials that must agree, as `(numerator, denominator)`.
    pub agreement: (usize, usize),
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            trials: 5,
            seed: DEFAULT_SEED,
            primes: DEFAULT_PRIMES.to_vec(),
            system: SystemOptions::default(),
            reduce: true,
            limits: Limits::default(),
            agreement: (3, 5),
        }
    }
}

impl CountOptions {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parse("at least one trial is required".into()));
        }
        if self.primes.is_empty() {
            return Err(Error::Parse("at least one prime is required".into()));
        }
        for &p in &self.primes {
            PrimeField::new(p)?;
        }
        let (num, den) = self.agreement;
        if den == 0 || num > den {
            return Err(Error::Parse(format!("agreement threshold {num}/{den} is not a fraction in [0, 1]")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialOutcome {
    Finite { dimension: u64, variables: usize, equations: usize, basis_size: usize },
    Infinite { variables: usize, equations: usize },
    Failed { reason: String, resource_limit: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub prime: u64,
    pub seed: u64,
    pub stream: u64,
    pub outcome: TrialOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountStatus {
    Ok,
    /// Too few trials agree.
    Inconclusive,
    /// A guard was violated.
    Inconsistent,
    /// Every trial hit a resource limit.
    ResourceLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortCircuit {
    /// Also covers markings lying in no constraint, which force the surplus below `r + 1`.
    SurplusFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guard {
    /// Successful trials returned different dimensions.
    Disagreement,
    /// Some trial produced a positive-dimensional solution set.
    InfiniteDimension,
    /// Some trial failed without producing a dimension.
    TrialFailure,
    /// The voted count exceeds the transversal bound.
    BoundExceeded,
    /// Agreement fell below the threshold.
    BelowThreshold,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub schema: u32,
    pub instance: Instance,
    pub reduction: ReductionTrail,
    pub options: CountOptions,
    pub short_circuit: Option<ShortCircuit>,
    pub trials: Vec<TrialRecord>,
    pub count: Option<u64>,
    /// Votes for `count` over all trials.
    pub agreement: (usize, usize),
    pub status: CountStatus,
    #[serde(with = "crate::bigjson")]
    pub bound_direct: BigUint,
    #[serde(with = "crate::bigjson")]
    pub bound_reduced: BigUint,
    pub surplus: i64,
    pub surplus_condition: bool,
    pub uncovered_markings: Vec<usize>,
    /// Whether the result agrees with "surplus condition implies a nonzero
    /// count"; reported only.
    pub conjecture_consistent: Option<bool>,
    pub guards: Vec<Guard>,
}

impl CountReport {
    pub fn best_bound(&self) -> &BigUint {
        (&self.bound_direct).min(&self.bound_reduced)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Counts `inst` by repeated solving over prime fields.
pub fn stochastic_count(inst: &Instance, options: &CountOptions) -> Result<CountReport> {
    inst.validate().map_err(Error::Invalid)?;
    options.validate()?;
    let sigma = surplus(inst)?;
    let surplus_condition = sigma == inst.r() as i64 + 1;
    let bound_direct = best_bound(inst, false)?.best;
    let bound_reduced = best_bound(inst, true)?.best;
    let reduction = if options.reduce {
        fully_reduce(inst)
    } else {
        ReductionTrail { original: inst.clone(), steps: Vec::new(), reduced: inst.clone() }
    };

    let uncovered_markings = inst.uncovered_markings();
    let short_circuit = (!surplus_condition || !uncovered_markings.is_empty()).then_some(ShortCircuit::SurplusFailure);

    let mut report = CountReport {
        schema: SCHEMA_VERSION,
        instance: inst.clone(),
        reduction,
        options: options.clone(),
        short_circuit,
        trials: Vec::new(),
        count: None,
        agreement: (0, options.trials),
        status: CountStatus::Ok,
        bound_direct,
        bound_reduced,
        surplus: sigma,
        surplus_condition,
        uncovered_markings,
        conjecture_consistent: None,
        guards: Vec::new(),
    };

    if short_circuit.is_some() {
        report.count = Some(0);
        report.agreement = (0, 0);
        report.conjecture_consistent = Some(true);
        return Ok(report);
    }

    let target = report.reduction.reduced.clone();
    report.trials = (0..options.trials).into_par_iter().map(|t| run_trial(&target, options, t)).collect();
    assess(&mut report);
    Ok(report)
}

fn run_trial(inst: &Instance, options: &CountOptions, t: usize) -> TrialRecord {
    let prime = options.primes[t % options.primes.len()];
    let stream = t as u64;
    let outcome = solve_once(inst, options, prime, stream).unwrap_or_else(|e| TrialOutcome::Failed {
        resource_limit: matches!(e, Error::ResourceLimit(_) | Error::TooManyVariables { .. }),
        reason: e.to_string(),
    });
    TrialRecord { trial: t, prime, seed: options.seed, stream, outcome }
}

fn solve_once(inst: &Instance, options: &CountOptions, prime: u64, stream: u64) -> Result<TrialOutcome> {
    let field = PrimeField::new(prime)?;
    let mut rng = stream_rng(options.seed, stream);
    let sys = build_system(inst, field, &mut rng, options.system)?;
    let eqs = sys.equations()?;
    let order = MonomialOrder::degrevlex(sys.num_variables());
    let (gb, _) = buchberger_with_limits(&eqs, &order, &options.limits)?;
    let (variables, equations) = (sys.num_variables(), sys.num_equations());
    Ok(match quotient_dimension(&gb) {
        QuotientDimension::Finite(dimension) => {
            TrialOutcome::Finite { dimension, variables, equations, basis_size: gb.len() }
        }
        QuotientDimension::Infinite => TrialOutcome::Infinite { variables, equations },
    })
}

/// Deterministic fold over trial records, in trial order.
fn assess(report: &mut CountReport) {
    let mut votes: BTreeMap<u64, usize> = BTreeMap::new();
    let mut guards = Vec::new();
    let mut all_resource = true;
    for rec in &report.trials {
        match &rec.outcome {
            TrialOutcome::Finite { dimension, .. } => {
                *votes.entry(*dimension).or_default() += 1;
                all_resource = false;
            }
            TrialOutcome::Infinite { .. } => {
                guards.push(Guard::InfiniteDimension);
                all_resource = false;
            }
            TrialOutcome::Failed { resource_limit, .. } => {
                guards.push(Guard::TrialFailure);
                all_resource &= resource_limit;
            }
        }
    }
    if votes.len() > 1 {
        guards.push(Guard::Disagreement);
    }
    let total = report.trials.len();
    // most votes, smallest value on ties
    let winner = votes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&d, &v)| (d, v));
    report.status = match winner {
        None if all_resource => CountStatus::ResourceLimit,
        None => CountStatus::Inconclusive,
        Some((count, v)) => {
            report.count = Some(count);
            report.agreement = (v, total);
            report.conjecture_consistent = Some(!(report.surplus_condition && count == 0));
            let (num, den) = report.options.agreement;
            if BigUint::from(count) > *report.best_bound() {
                guards.push(Guard::BoundExceeded);
                CountStatus::Inconsistent
            } else if v * den < num * total {
                guards.push(Guard::BelowThreshold);
                CountStatus::Inconclusive
            } else {
                CountStatus::Ok
            }
        }
    };
    guards.sort();
    guards.dedup();
    report.guards = guards;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub schema: u32,
    pub unreduced: CountReport,
    pub reduced: CountReport,
    pub consistent: bool,
}

/// Counts the instance and its one-step reduction separately and compares.
pub fn verify_reduction(inst: &Instance, options: &CountOptions) -> Result<ReductionCheck> {
    inst.validate().map_err(Error::Invalid)?;
    let (reduced, _) = reduce_once(inst).ok_or(Error::NotReducible)?;
    let direct = CountOptions { reduce: false, ..options.clone() };
    let unreduced = stochastic_count(inst, &direct)?;
    let reduced = stochastic_count(&reduced, &direct)?;
    let consistent = unreduced.status == CountStatus::Ok
        && reduced.status == CountStatus::Ok
        && unreduced.count == reduced.count;
    Ok(ReductionCheck { schema: SCHEMA_VERSION, unreduced, reduced, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{parse_instance, Format};

    fn compact(s: &str, r: usize) -> Instance {
        parse_instance(s, Format::Compact, Some(r)).unwrap()
    }

    #[test]
    fn small_counts() {
        let opts = CountOptions::default();
        let row1 = stochastic_count(&compact("12345,23456", 3), &opts).unwrap();
        assert_eq!((row1.count, row1.status), (Some(1), CountStatus::Ok));
        assert_eq!(row1.agreement, (5, 5));
        let trivial = stochastic_count(&compact("12345", 3), &opts).unwrap();
        assert_eq!(trivial.count, Some(1));
        let r2 = stochastic_count(&compact("1234,3456,1256", 2), &opts).unwrap();
        assert_eq!(r2.count, Some(2));
    }

    #[test]
    fn surplus_short_circuit() {
        let report = stochastic_count(&compact("1234,1234", 2), &CountOptions::default()).unwrap();
        assert_eq!(report.short_circuit, Some(ShortCircuit::SurplusFailure));
        assert_eq!(report.count, Some(0));
        assert!(report.trials.is_empty());
        assert_eq!(report.surplus, 2);
        assert_eq!(report.uncovered_markings, vec![5]);
    }

    #[test]
    fn reports_are_reproducible() {
        let inst = compact("12347,34567,12567", 3);
        let opts = CountOptions { trials: 3, ..CountOptions::default() };
        let a = stochastic_count(&inst, &opts).unwrap();
        let b = stochastic_count(&inst, &opts).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.count, Some(2));
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["trials"][0]["outcome"]["status"], "finite");
    }

    #[test]
    fn vote_fold() {
        let inst = compact("12345,23456", 3);
        let mut report = stochastic_count(&inst, &CountOptions::default()).unwrap();
        let finite = |d| TrialOutcome::Finite { dimension: d, variables: 1, equations: 1, basis_size: 1 };
        let failed = TrialOutcome::Failed { reason: "limit".into(), resource_limit: true };
        let set = |report: &mut CountReport, outcomes: Vec<TrialOutcome>| {
            report.trials = outcomes
                .into_iter()
                .enumerate()
                .map(|(t, outcome)| TrialRecord { trial: t, prime: 7, seed: 0, stream: t as u64, outcome })
                .collect();
            report.count = None;
            assess(report);
        };
        set(&mut report, vec![finite(1), finite(1), finite(1), finite(0), failed.clone()]);
        assert_eq!((report.count, report.status, report.agreement), (Some(1), CountStatus::Ok, (3, 5)));
        assert_eq!(report.guards, vec![Guard::Disagreement, Guard::TrialFailure]);
        set(&mut report, vec![finite(1), finite(0), failed.clone(), failed.clone(), failed.clone()]);
        assert_eq!((report.count, report.status), (Some(0), CountStatus::Inconclusive));
        set(&mut report, vec![failed.clone(); 5]);
        assert_eq!((report.count, report.status), (None, CountStatus::ResourceLimit));
        set(&mut report, vec![finite(5); 5]);
        assert_eq!(report.status, CountStatus::Inconsistent);
        assert!(report.guards.contains(&Guard::BoundExceeded));
    }

    #[test]
    fn reduction_precondition() {
        let example = compact("12345,34567,56781,78123", 3);
        assert!(matches!(verify_reduction(&example, &CountOptions::default()), Err(Error::NotReducible)));
    }

    #[test]
    fn bad_options() {
        let inst = compact("12345,23456", 3);
        let zero = CountOptions { trials: 0, ..CountOptions::default() };
        assert!(stochastic_count(&inst, &zero).is_err());
        let composite = CountOptions { primes: vec![91], ..CountOptions::default() };
        assert!(matches!(stochastic_count(&inst, &composite), Err(Error::InvalidPrime(91))));
    }
}
