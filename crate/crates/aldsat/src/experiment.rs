//! Dataset construction and empirical strategy evaluation.
//!
//! A dataset is a collection of satisfiable random 3-SAT instances, each
//! reduced to the bitset of depth-`d` subtrees that contain a model (plus the
//! bitset of subtrees the mapping search actually entered). Against those
//! bitsets, a visit order is scored by the mean normalized rank at which it
//! first hits a solution-bearing subtree — the empirical counterpart of the
//! tree model's expected goal rank. The module also builds the greedy
//! coverage order, runs split-half generalization comparisons, and sweeps
//! linear probability profiles.

use crate::bits::{BitSet, BitSetError};
use crate::cnf::{generate_uniform_ksat, GeneratorError};
use crate::heuristics::HeuristicConfig;
use crate::rng::Xorshift64Star;
use crate::search::{map_subtrees, visit_order, SearchConfig, SearchError, StrategyKind};
use crate::treemodel::{leaf_probs, optimal_order, DepthProfile, ModelError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Serialized dataset format version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Order(#[from] crate::search::OrderError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bits(#[from] BitSetError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("dataset format version {0} is not supported (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("record {instance_id}: {problem}")]
    InconsistentRecord {
        instance_id: u32,
        problem: &'static str,
    },
    #[error("order length {order} does not match the dataset's {leaves} subtrees")]
    SizeMismatch { order: usize, leaves: usize },
    #[error("order is not a permutation of the subtree indices")]
    NotAPermutation,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("instance size {n} cannot hold ternary clauses")]
    InstanceTooSmall { n: u32 },
}

/// One instance's subtree map: which depth-`d` subtrees contain a model
/// (`bits`) and which the mapping search entered at all (`entered`; dead
/// prefixes are never entered, and `bits ⊆ entered`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubtreeRecordRepr", into = "SubtreeRecordRepr")]
pub struct SubtreeRecord {
    pub instance_id: u32,
    pub seed: u64,
    pub n: u32,
    pub m: u32,
    pub d: u8,
    pub bits: BitSet,
    pub entered: BitSet,
}

/// JSON shape of a record: bitsets as little-endian-nibble hex strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubtreeRecordRepr {
    instance_id: u32,
    seed: u64,
    n: u32,
    m: u32,
    d: u8,
    bits: String,
    entered: String,
}

impl TryFrom<SubtreeRecordRepr> for SubtreeRecord {
    type Error = BitSetError;

    fn try_from(repr: SubtreeRecordRepr) -> Result<Self, BitSetError> {
        let leaves = 1usize << repr.d.min(63);
        Ok(Self {
            instance_id: repr.instance_id,
            seed: repr.seed,
            n: repr.n,
            m: repr.m,
            d: repr.d,
            bits: BitSet::from_hex(leaves, &repr.bits)?,
            entered: BitSet::from_hex(leaves, &repr.entered)?,
        })
    }
}

impl From<SubtreeRecord> for SubtreeRecordRepr {
    fn from(record: SubtreeRecord) -> Self {
        Self {
            instance_id: record.instance_id,
            seed: record.seed,
            n: record.n,
            m: record.m,
            d: record.d,
            bits: record.bits.to_hex(),
            entered: record.entered.to_hex(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub n: u32,
    pub m: u32,
    pub ratio: f64,
    pub d: u8,
    /// First candidate seed; instances are drawn from consecutive seeds.
    pub seed0: u64,
    pub heuristic: HeuristicConfig,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub version: u32,
    pub meta: DatasetMeta,
    pub records: Vec<SubtreeRecord>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn leaves(&self) -> usize {
        1 << self.meta.d
    }

    /// Structural checks: supported version, homogeneous shape, every record
    /// satisfiable, solution bits inside entered bits.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.version != FORMAT_VERSION {
            return Err(ExperimentError::UnsupportedVersion(self.version));
        }
        self.meta
            .heuristic
            .validate()
            .map_err(SearchError::Weights)?;
        let leaves = self.leaves();
        for record in &self.records {
            let bad = |problem| ExperimentError::InconsistentRecord {
                instance_id: record.instance_id,
                problem,
            };
            if record.d != self.meta.d {
                return Err(bad("depth differs from the dataset metadata"));
            }
            if record.n != self.meta.n || record.m != self.meta.m {
                return Err(bad("instance shape differs from the dataset metadata"));
            }
            if record.bits.len() != leaves || record.entered.len() != leaves {
                return Err(bad("bitset length does not match 2^d"));
            }
            if record.bits.count_ones() == 0 {
                return Err(bad("no satisfiable subtree (datasets hold sat instances only)"));
            }
            if record.bits.ones().any(|i| !record.entered.get(i)) {
                return Err(bad("a solution subtree is marked as never entered"));
            }
        }
        Ok(())
    }

    /// Stable serialization; loading and re-saving is byte-identical.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("dataset serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let dataset: Dataset = serde_json::from_str(text)?;
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn save(&self, path: &Path) -> Result<(), ExperimentError> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// A new dataset holding only the records at `indices` (same metadata).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            version: self.version,
            meta: self.meta.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildParams {
    /// Number of satisfiable instances to collect.
    pub count: u32,
    pub n: u32,
    /// Clauses-to-variables ratio; `m = round(ratio · n)`.
    pub ratio: f64,
    pub d: u8,
    pub seed0: u64,
    pub heuristic: HeuristicConfig,
    pub budget: u64,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            count: 200,
            n: 100,
            ratio: 4.26,
            d: 8,
            seed0: 1,
            heuristic: HeuristicConfig::default(),
            budget: SearchConfig::default().budget,
        }
    }
}

/// A dataset plus the seeds that were examined and rejected on the way.
#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub dataset: Dataset,
    pub skipped_unsat: Vec<u64>,
    pub skipped_budget: Vec<u64>,
}

/// Generates instances from consecutive seeds starting at `seed0`, maps each
/// one's subtrees at depth `d`, and keeps the first `count` satisfiable ones
/// (in seed order, independent of worker scheduling). Unsatisfiable instances
/// and instances whose mapping exhausts the budget are skipped and reported.
pub fn build_dataset(params: &BuildParams) -> Result<BuildOutput, ExperimentError> {
    if params.n < 3 {
        return Err(ExperimentError::InstanceTooSmall { n: params.n });
    }
    let m = (params.ratio * f64::from(params.n)).round() as u32;
    let config = SearchConfig {
        heuristic: params.heuristic.clone(),
        budget: params.budget,
        skip_dead_prefixes: true,
    };
    config.heuristic.validate().map_err(SearchError::Weights)?;
    if params.d == 0 || params.d > crate::search::MAX_JUMP_DEPTH {
        // Surface the same guard the mapping itself would raise.
        map_subtrees(
            &generate_uniform_ksat(params.n, m, 3, params.seed0)?,
            &config,
            params.d,
        )
        .map_err(ExperimentError::Search)?;
    }

    let mut records = Vec::with_capacity(params.count as usize);
    let mut skipped_unsat = Vec::new();
    let mut skipped_budget = Vec::new();
    let mut next_seed = params.seed0;
    while records.len() < params.count as usize {
        let missing = params.count as usize - records.len();
        // Roughly half the instances are satisfiable at the phase-transition
        // ratio; over-provision the chunk to keep rounds few.
        let chunk = (missing.saturating_mul(2)).clamp(16, 4096) as u64;
        let outcomes: Vec<(u64, Result<crate::search::SubtreeMap, ExperimentError>)> =
            (next_seed..next_seed + chunk)
                .into_par_iter()
                .map(|seed| {
                    let result = generate_uniform_ksat(params.n, m, 3, seed)
                        .map_err(ExperimentError::from)
                        .and_then(|f| Ok(map_subtrees(&f, &config, params.d)?));
                    (seed, result)
                })
                .collect();
        next_seed += chunk;
        for (seed, outcome) in outcomes {
            if records.len() == params.count as usize {
                break;
            }
            match outcome {
                Ok(map) if map.solution_bits.count_ones() > 0 => {
                    records.push(SubtreeRecord {
                        instance_id: records.len() as u32,
                        seed,
                        n: params.n,
                        m,
                        d: params.d,
                        bits: map.solution_bits,
                        entered: map.entered_bits,
                    });
                }
                Ok(_) => skipped_unsat.push(seed),
                Err(ExperimentError::Search(SearchError::BudgetExhausted(_))) => {
                    skipped_budget.push(seed)
                }
                Err(e) => return Err(e),
            }
        }
    }
    let dataset = Dataset {
        version: FORMAT_VERSION,
        meta: DatasetMeta {
            n: params.n,
            m,
            ratio: params.ratio,
            d: params.d,
            seed0: params.seed0,
            heuristic: params.heuristic.clone(),
            budget: params.budget,
        },
        records,
    };
    dataset.validate()?;
    Ok(BuildOutput {
        dataset,
        skipped_unsat,
        skipped_budget,
    })
}

/// Empirical cost of a visit order on a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCurve {
    /// 1-based rank at which each instance is first solved, aligned with the
    /// dataset's record order.
    pub ranks: Vec<u64>,
    /// Fraction of instances still unsolved after `k = 1..=2^d` visits.
    pub unsolved: Vec<f64>,
    /// Mean rank divided by `2^d`.
    pub e_star: f64,
}

fn check_order(order: &[u32], leaves: usize) -> Result<(), ExperimentError> {
    if order.len() != leaves {
        return Err(ExperimentError::SizeMismatch {
            order: order.len(),
            leaves,
        });
    }
    let mut seen = vec![false; leaves];
    for &code in order {
        match seen.get_mut(code as usize) {
            Some(slot) if !*slot => *slot = true,
            _ => return Err(ExperimentError::NotAPermutation),
        }
    }
    Ok(())
}

/// Scores `order` on the dataset: each instance's rank is the 1-based
/// position of its first solution-bearing subtree in the order. With
/// `skip_dead`, positions count only subtrees the instance's mapping search
/// entered — the cost actually paid by a solver that skips dead prefixes.
pub fn evaluate(
    order: &[u32],
    dataset: &Dataset,
    skip_dead: bool,
) -> Result<EvalCurve, ExperimentError> {
    let leaves = dataset.leaves();
    check_order(order, leaves)?;
    if dataset.is_empty() {
        return Err(ExperimentError::EmptyDataset);
    }
    let mut ranks = Vec::with_capacity(dataset.len());
    for record in &dataset.records {
        let mut rank = 0u64;
        for &code in order {
            if !skip_dead || record.entered.get(code as usize) {
                rank += 1;
            }
            if record.bits.get(code as usize) {
                break;
            }
        }
        ranks.push(rank);
    }
    // unsolved(k) = |{ranks > k}| / N for k = 1..=leaves.
    let mut above = vec![0u64; leaves + 1];
    for &rank in &ranks {
        // rank ≤ leaves always; contribute to every k < rank.
        above[rank as usize] += 1;
    }
    let n = ranks.len() as f64;
    let mut unsolved = Vec::with_capacity(leaves);
    let mut still = ranks.len() as u64;
    for count_at in above.iter().take(leaves + 1).skip(1) {
        still -= count_at;
        unsolved.push(still as f64 / n);
    }
    let e_star = ranks.iter().sum::<u64>() as f64 / n / leaves as f64;
    Ok(EvalCurve {
        ranks,
        unsolved,
        e_star,
    })
}

/// A coverage-greedy visit order and its construction trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOrder {
    pub order: Vec<u32>,
    /// Instances newly covered by each position; zero once every instance is
    /// covered and the remainder is appended.
    pub covered: Vec<u64>,
}

/// Builds an order by repeatedly picking the subtree that solves the most
/// not-yet-covered instances (ties to the lowest index), then appends the
/// never-picked subtrees in ALDS order.
pub fn greedy_construct(dataset: &Dataset) -> Result<GreedyOrder, ExperimentError> {
    let leaves = dataset.leaves();
    let mut order = Vec::with_capacity(leaves);
    let mut covered = Vec::with_capacity(leaves);
    let mut used = vec![false; leaves];
    let mut remaining: Vec<&BitSet> = dataset.records.iter().map(|r| &r.bits).collect();
    while !remaining.is_empty() {
        let mut counts = vec![0u64; leaves];
        for bits in &remaining {
            for i in bits.ones() {
                counts[i] += 1;
            }
        }
        let (best, &best_count) = counts
            .iter()
            .enumerate()
            .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
            .expect("at least one subtree");
        debug_assert!(best_count > 0, "every remaining instance is satisfiable");
        order.push(best as u32);
        covered.push(best_count);
        used[best] = true;
        remaining.retain(|bits| !bits.get(best));
    }
    for code in visit_order(StrategyKind::Alds, dataset.meta.d)? {
        if !used[code as usize] {
            order.push(code);
            covered.push(0);
        }
    }
    Ok(GreedyOrder { order, covered })
}

/// Cross-evaluation of the greedy order against ALDS on a random split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEval {
    pub train_size: usize,
    pub test_size: usize,
    /// e_star values; `None` when the corresponding half is empty.
    pub greedy_on_train: Option<f64>,
    pub alds_on_train: Option<f64>,
    pub greedy_on_test: Option<f64>,
    pub alds_on_test: Option<f64>,
}

/// Shuffles the records with the seeded generator, trains greedy on the
/// first half, and reports both orders' e_star on both halves. An empty
/// training half degenerates greedy to the pure ALDS order.
pub fn split_half_eval(dataset: &Dataset, seed: u64) -> Result<SplitEval, ExperimentError> {
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = Xorshift64Star::new(seed);
    for i in (1..indices.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        indices.swap(i, j);
    }
    let (train_idx, test_idx) = indices.split_at(indices.len() / 2);
    let train = dataset.subset(train_idx);
    let test = dataset.subset(test_idx);
    let greedy = greedy_construct(&train)?;
    let alds = visit_order(StrategyKind::Alds, dataset.meta.d)?;
    let score = |order: &[u32], half: &Dataset| -> Result<Option<f64>, ExperimentError> {
        if half.is_empty() {
            return Ok(None);
        }
        Ok(Some(evaluate(order, half, false)?.e_star))
    };
    Ok(SplitEval {
        train_size: train.len(),
        test_size: test.len(),
        greedy_on_train: score(&greedy.order, &train)?,
        alds_on_train: score(&alds, &train)?,
        greedy_on_test: score(&greedy.order, &test)?,
        alds_on_test: score(&alds, &test)?,
    })
}

/// One point of a linear-profile sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub e_star: f64,
}

/// For each slope `x`, orders the subtrees by the goal probability induced
/// by the profile `p_ℓ = y + x·ℓ` (descending, ties to the lower index) and
/// scores that order on the dataset.
pub fn linear_sweep(
    dataset: &Dataset,
    y: f64,
    xs: &[f64],
) -> Result<Vec<SweepPoint>, ExperimentError> {
    xs.iter()
        .map(|&x| {
            let profile = DepthProfile::linear(y, x, dataset.meta.d)?;
            let order_u = optimal_order(&leaf_probs(&profile));
            let e_star = evaluate(&order_u, dataset, false)?.e_star;
            Ok(SweepPoint { x, e_star })
        })
        .collect()
}
