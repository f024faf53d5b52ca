//! Filter Ratio, the exhaustive oracle, and FR curves across algorithms.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CGraph, NodeId};
use crate::placement::{place, Algorithm, FilterSet};
use crate::propagation::{Count, Propagator};

pub const DEFAULT_ORACLE_BUDGET: u128 = 1_000_000;
pub const DEFAULT_RANDOM_RUNS: usize = 25;
/// Repetitions timed for deterministic cells; the median is reported.
pub const TIMING_REPS: usize = 3;
pub const FR_DIGITS: usize = 6;

/// Exact nonnegative ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: BigUint,
    pub den: BigUint,
}

impl Ratio {
    pub fn new(num: BigUint, den: BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let g = num.gcd(&den);
        if g.is_zero() || g.is_one() {
            Ratio { num, den }
        } else {
            Ratio {
                num: num / &g,
                den: den / &g,
            }
        }
    }

    pub fn one() -> Self {
        Ratio {
            num: BigUint::one(),
            den: BigUint::one(),
        }
    }

    /// Decimal expansion rounded half-up to `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigUint::from(10u32).pow(digits as u32);
        let two = BigUint::from(2u32);
        let scaled = (&self.num * &scale * &two + &self.den) / (&self.den * &two);
        let (int, frac) = scaled.div_rem(&scale);
        if digits == 0 {
            int.to_string()
        } else {
            format!("{int}.{:0>width$}", frac.to_string(), width = digits)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_decimal(17).parse().expect("decimal parses")
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(FR_DIGITS))
    }
}

/// F(A) / F(V), or 1 when the graph has no removable redundancy.
pub fn ratio_of(f_a: &Count, f_v: &Count) -> Ratio {
    if f_v.is_zero() {
        Ratio::one()
    } else {
        Ratio::new(f_a.clone(), f_v.clone())
    }
}

/// F(V): the objective with every node filtering.
pub fn max_objective(p: &Propagator<'_>) -> Count {
    p.objective_masked(&vec![true; p.graph().node_count()])
}

pub fn filter_ratio(g: &CGraph, filters: &[NodeId]) -> Result<Ratio> {
    let p = Propagator::new(g)?;
    Ok(ratio_of(&p.objective(filters), &max_objective(&p)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutcome {
    pub filters: FilterSet,
    pub value: Count,
    /// Nonempty subsets evaluated.
    pub evaluated: u64,
}

fn binomial(n: u128, r: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of nonempty subsets of at most `k` out of `m` candidates.
pub fn subsets_up_to(m: usize, k: usize) -> u128 {
    (1..=k.min(m)).fold(0u128, |acc, r| {
        acc.saturating_add(binomial(m as u128, r as u128))
    })
}

/// Exhaustive maximization of F over all subsets of at most `k` non-source
/// nodes. Among optimal sets the smallest one wins, then the
/// lexicographically smallest by node index.
pub fn oracle(g: &CGraph, k: usize, budget: u128) -> Result<OracleOutcome> {
    let p = Propagator::new(g)?;
    let eligible = g.eligible();
    let m = eligible.len();
    let k_eff = k.min(m);
    let needed = subsets_up_to(m, k_eff);
    if needed > budget {
        return Err(Error::BudgetExceeded {
            subsets: needed,
            budget,
        });
    }

    let mut best: (Count, Vec<NodeId>) = (Count::zero(), Vec::new());
    let mut evaluated = 0u64;
    let mut mask = vec![false; g.node_count()];
    for r in 1..=k_eff {
        let mut idx: Vec<usize> = (0..r).collect();
        loop {
            for &i in &idx {
                mask[eligible[i].index()] = true;
            }
            let value = p.objective_masked(&mask);
            for &i in &idx {
                mask[eligible[i].index()] = false;
            }
            evaluated += 1;
            if value > best.0 {
                best = (value, idx.iter().map(|&i| eligible[i]).collect());
            }
            // next combination in lexicographic order
            let Some(pos) = (0..r).rev().find(|&pos| idx[pos] != pos + m - r) else {
                break;
            };
            idx[pos] += 1;
            for j in pos + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(OracleOutcome {
        filters: FilterSet::new(best.1, Algorithm::Oracle, k),
        value: best.0,
        evaluated,
    })
}

/// JSON-ready summary of one placement.
#[derive(Clone, Debug, Serialize)]
pub struct PlacementResult {
    pub algorithm: Algorithm,
    pub k: usize,
    pub seed: Option<u64>,
    pub filters: Vec<String>,
    pub f: serde_json::Number,
    pub f_max: serde_json::Number,
    pub fr: serde_json::Number,
    pub phi_empty: serde_json::Number,
    pub phi_filtered: serde_json::Number,
}

pub(crate) fn json_count(c: &BigUint) -> serde_json::Number {
    serde_json::Number::from_str(&c.to_string()).expect("integer literal")
}

pub(crate) fn json_decimal(r: &Ratio) -> serde_json::Number {
    serde_json::Number::from_str(&r.to_decimal(FR_DIGITS)).expect("decimal literal")
}

impl PlacementResult {
    pub fn evaluate(p: &Propagator<'_>, filters: &FilterSet, f_max: &Count) -> Self {
        let g = p.graph();
        let f = p.objective(filters.nodes());
        let phi_filtered = p.baseline() - &f;
        PlacementResult {
            algorithm: filters.algorithm,
            k: filters.k_requested,
            seed: filters.seed,
            filters: filters.labels(g).into_iter().map(String::from).collect(),
            f: json_count(&f),
            f_max: json_count(f_max),
            fr: json_decimal(&ratio_of(&f, f_max)),
            phi_empty: json_count(p.baseline()),
            phi_filtered: json_count(&phi_filtered),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveOptions {
    /// Trials per cell for randomized algorithms.
    pub runs: usize,
    pub seed: u64,
    /// Worker threads; `0` lets the pool decide.
    pub jobs: usize,
    pub oracle_budget: u128,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            runs: DEFAULT_RANDOM_RUNS,
            seed: 0,
            jobs: 0,
            oracle_budget: DEFAULT_ORACLE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveRow {
    pub algorithm: Algorithm,
    pub k: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub fr: Ratio,
    /// Sum of F over all runs; the FR is this over `runs · F(V)`.
    #[serde(serialize_with = "ser_count")]
    pub f_sum: Count,
    pub runs: usize,
    pub wall_ms: f64,
    pub mean_size: f64,
    pub cells: Vec<PlacementResult>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio, s: S) -> std::result::Result<S::Ok, S::Error> {
    json_decimal(r).serialize(s)
}

fn ser_count<S: serde::Serializer>(c: &Count, s: S) -> std::result::Result<S::Ok, S::Error> {
    json_count(c).serialize(s)
}

/// Filter Ratio per (algorithm, k).
#[derive(Clone, Debug, Serialize)]
pub struct FrCurve {
    #[serde(serialize_with = "ser_count")]
    pub f_max: Count,
    pub rows: Vec<CurveRow>,
}

pub const CSV_HEADER: [&str; 5] = ["algorithm", "k", "fr", "runs", "wall_ms"];

impl FrCurve {
    pub fn row(&self, algorithm: Algorithm, k: usize) -> Option<&CurveRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.k == k)
    }

    /// `algorithm,k,fr,runs,wall_ms`. With `timing` off the wall column is
    /// zeroed so the file is reproducible byte for byte.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            let wall = if timing {
                format!("{:.3}", r.wall_ms)
            } else {
                "0".to_string()
            };
            w.write_record([
                r.algorithm.name().to_string(),
                r.k.to_string(),
                r.fr.to_decimal(FR_DIGITS),
                r.runs.to_string(),
                wall,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one randomized trial, independent of scheduling order.
pub fn trial_seed(master: u64, algorithm: Algorithm, k: usize, trial: usize) -> u64 {
    let name = algorithm
        .name()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
    let mut s = splitmix64(master ^ name);
    s = splitmix64(s ^ k as u64);
    splitmix64(s ^ trial as u64)
}

struct Cell {
    algorithm: Algorithm,
    k: usize,
    trial: usize,
}

struct CellOutcome {
    filters: FilterSet,
    wall_ms: f64,
}

fn run_cell(g: &CGraph, cell: &Cell, opts: &CurveOptions) -> Result<CellOutcome> {
    let seed = trial_seed(opts.seed, cell.algorithm, cell.k, cell.trial);
    let run = || -> Result<FilterSet> {
        match cell.algorithm {
            Algorithm::Oracle => Ok(oracle(g, cell.k, opts.oracle_budget)?.filters),
            a => place(g, a, cell.k, seed),
        }
    };
    let reps = if cell.algorithm.is_randomized() {
        1
    } else {
        TIMING_REPS
    };
    let mut times = Vec::with_capacity(reps);
    let mut result = None;
    for _ in 0..reps {
        let start = Instant::now();
        let fs = run()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        result.get_or_insert(fs);
    }
    times.sort_by(f64::total_cmp);
    Ok(CellOutcome {
        filters: result.expect("at least one rep"),
        wall_ms: times[times.len() / 2],
    })
}

/// FR for every algorithm and `k` in `1..=k_max`. Randomized algorithms are
/// averaged over `opts.runs` seeded trials (F values are summed first and
/// divided once). `optimal-unbounded` contributes a single row at `k = |A|`.
pub fn fr_curve(
    g: &CGraph,
    algorithms: &[Algorithm],
    k_max: usize,
    opts: &CurveOptions,
) -> Result<FrCurve> {
    let p = Propagator::new(g)?;
    let f_max = max_objective(&p);

    let mut cells = Vec::new();
    for &algorithm in algorithms {
        let ks: Vec<usize> = if algorithm == Algorithm::OptimalUnbounded {
            vec![0]
        } else {
            (1..=k_max).collect()
        };
        let trials = if algorithm.is_randomized() {
            opts.runs.max(1)
        } else {
            1
        };
        for k in ks {
            for trial in 0..trials {
                cells.push(Cell {
                    algorithm,
                    k,
                    trial,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<CellOutcome>> =
        pool.install(|| cells.par_iter().map(|c| run_cell(g, c, opts)).collect());

    let mut rows: Vec<CurveRow> = Vec::new();
    for (cell, outcome) in cells.iter().zip(outcomes) {
        let outcome = outcome?;
        let result = PlacementResult::evaluate(&p, &outcome.filters, &f_max);
        let f = p.objective(outcome.filters.nodes());
        let k = if cell.algorithm == Algorithm::OptimalUnbounded {
            outcome.filters.len()
        } else {
            cell.k
        };
        match rows.last_mut() {
            Some(row) if row.algorithm == cell.algorithm && row.k == k && cell.trial > 0 => {
                row.f_sum += f;
                row.runs += 1;
                row.wall_ms += outcome.wall_ms;
                row.mean_size += outcome.filters.len() as f64;
                row.cells.push(result);
            }
            _ => rows.push(CurveRow {
                algorithm: cell.algorithm,
                k,
                fr: Ratio::one(),
                f_sum: f,
                runs: 1,
                wall_ms: outcome.wall_ms,
                mean_size: outcome.filters.len() as f64,
                cells: vec![result],
            }),
        }
    }
    for row in &mut rows {
        let runs = row.runs as f64;
        row.wall_ms /= runs;
        row.mean_size /= runs;
        row.fr = ratio_of(&row.f_sum, &(&f_max * row.runs));
    }
    Ok(FrCurve { f_max, rows })
}

/// An instance on which Greedy_All is beaten by the exhaustive optimum.
#[derive(Clone, Debug)]
pub struct GreedyGap {
    pub graph: CGraph,
    pub k: usize,
    pub greedy: FilterSet,
    pub greedy_value: Count,
    pub optimum: OracleOutcome,
}

/// Random search over small DAGs (`n` up to `n_max` plus the source) for a
/// case where Greedy_All is suboptimal at budget `k`.
pub fn find_greedy_gap(trials: usize, n_max: usize, k: usize, seed: u64) -> Option<GreedyGap> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let n = rng.random_range(3..=n_max.max(3));
        let p = rng.random_range(0.2..0.7);
        let g = crate::synth::random_dag(n, p, rng.random());
        let greedy = crate::placement::greedy_all(&g, k).expect("acyclic");
        let greedy_value = crate::propagation::objective_f(&g, greedy.nodes()).expect("acyclic");
        let optimum = oracle(&g, k, DEFAULT_ORACLE_BUDGET).expect("small instance");
        if greedy_value < optimum.value {
            return Some(GreedyGap {
                graph: g,
                k,
                greedy,
                greedy_value,
                optimum,
            });
        }
    }
    None
}
