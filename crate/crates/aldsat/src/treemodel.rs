//! Probabilistic single-goal tree model.
//!
//! A depth-`d` binary tree holds exactly one goal leaf. At each branching
//! level `ℓ` the heuristic picks the child that actually contains the goal
//! with probability `p_ℓ`, so a leaf's goal probability is the product of
//! `p_ℓ` (where its path follows the preference) and `1 − p_ℓ` (where it
//! departs). Evaluating a visit order against that distribution yields the
//! expected fraction of leaves explored before the goal is reached, which is
//! what the traversal strategies compete on.

use crate::search::{visit_order, OrderError, StrategyKind};
use thiserror::Error;

/// Enumeration guard: `2^d` leaf probabilities are materialized.
pub const MAX_MODEL_DEPTH: u8 = 24;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("depth {0} exceeds the model guard {MAX_MODEL_DEPTH}")]
    DepthTooLarge(u8),
    #[error("a profile needs at least one level")]
    EmptyProfile,
    #[error("level {level} probability {value} is outside (0, 1]")]
    LevelProbOutOfRange { level: usize, value: f64 },
    #[error("{0} leaf probabilities do not fill a binary tree (need a power of two)")]
    NotAPowerOfTwo(usize),
    #[error("leaf {index} has invalid probability {value}")]
    BadLeafProb { index: usize, value: f64 },
    #[error("leaf probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("order length {order} does not match {leaves} leaves")]
    SizeMismatch { order: usize, leaves: usize },
    #[error("order is not a permutation of the leaf indices")]
    NotAPermutation,
    #[error("strategy {0} repeats leaves and has no defined expected rank")]
    RepeatingStrategy(StrategyKind),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// Per-level heuristic probabilities `p_1..p_d` (the chance the preferred
/// child contains the goal), each in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile {
    p: Vec<f64>,
}

impl DepthProfile {
    pub fn explicit(levels: &[f64]) -> Result<Self, ModelError> {
        if levels.is_empty() {
            return Err(ModelError::EmptyProfile);
        }
        if levels.len() > MAX_MODEL_DEPTH as usize {
            return Err(ModelError::DepthTooLarge(levels.len() as u8));
        }
        for (i, &value) in levels.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ModelError::LevelProbOutOfRange { level: i + 1, value });
            }
        }
        Ok(Self { p: levels.to_vec() })
    }

    /// Linear profile `p_ℓ = y + x·ℓ` with 1-based level `ℓ = 1..=d`.
    pub fn linear(y: f64, x: f64, d: u8) -> Result<Self, ModelError> {
        if d == 0 {
            return Err(ModelError::EmptyProfile);
        }
        let levels: Vec<f64> = (1..=u32::from(d)).map(|l| y + x * f64::from(l)).collect();
        Self::explicit(&levels)
    }

    pub fn depth(&self) -> u8 {
        self.p.len() as u8
    }

    pub fn levels(&self) -> &[f64] {
        &self.p
    }
}

/// Goal probability per leaf, indexed by path code (MSB = root level,
/// bit 0 = preferred child). Sums to 1: there is exactly one goal.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafProbs {
    depth: u8,
    probs: Vec<f64>,
}

impl LeafProbs {
    /// Wraps an explicit distribution, validating shape and normalization.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, ModelError> {
        let len = probs.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(ModelError::NotAPowerOfTwo(len));
        }
        let depth = len.trailing_zeros() as u8;
        if depth > MAX_MODEL_DEPTH {
            return Err(ModelError::DepthTooLarge(depth));
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ModelError::BadLeafProb { index, value });
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ModelError::NotNormalized(total));
        }
        Ok(Self { depth, probs })
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least 2 leaves by construction
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Expands a profile into the induced leaf distribution, level by level:
/// each node's mass splits into `p_ℓ` for the preferred child and `1 − p_ℓ`
/// for the discrepancy child.
pub fn leaf_probs(profile: &DepthProfile) -> LeafProbs {
    let mut probs = vec![1.0];
    for &p in profile.levels() {
        let mut next = Vec::with_capacity(probs.len() * 2);
        for &mass in &probs {
            next.push(mass * p);
            next.push(mass * (1.0 - p));
        }
        probs = next;
    }
    LeafProbs {
        depth: profile.depth(),
        probs,
    }
}

fn check_permutation(order: &[u32], probs: &LeafProbs) -> Result<(), ModelError> {
    if order.len() != probs.len() {
        return Err(ModelError::SizeMismatch {
            order: order.len(),
            leaves: probs.len(),
        });
    }
    let mut seen = vec![false; order.len()];
    for &code in order {
        match seen.get_mut(code as usize) {
            Some(slot) if !*slot => *slot = true,
            _ => return Err(ModelError::NotAPermutation),
        }
    }
    Ok(())
}

/// Expected normalized rank of the goal leaf under a visit order:
/// `(1/2^d) Σ_v rank(v)·prob(v)` with 1-based ranks. Lower is better; the
/// unreachable ideal is `1/2^d` (goal always first).
pub fn e_goal(order: &[u32], probs: &LeafProbs) -> Result<f64, ModelError> {
    check_permutation(order, probs)?;
    let total: f64 = order
        .iter()
        .enumerate()
        .map(|(i, &code)| (i + 1) as f64 * probs.probs[code as usize])
        .sum();
    Ok(total / probs.len() as f64)
}

/// The provably best order: leaves by goal probability descending, ties by
/// leaf index ascending.
pub fn optimal_order(probs: &LeafProbs) -> Vec<u32> {
    let mut order: Vec<u32> = (0..probs.len() as u32).collect();
    order.sort_by(|&a, &b| {
        probs.probs[b as usize]
            .total_cmp(&probs.probs[a as usize])
            .then(a.cmp(&b))
    });
    order
}

/// Fraction of probability mass still unexplored after each visit:
/// entry `r − 1` (for `r = 1..=2^d`) is `1 − Σ_{i≤r} prob(order_i)`,
/// clamped at 0 against rounding. The expected rank is the area under
/// this curve taken as a left step function starting at height 1.
pub fn unsolved_curve(order: &[u32], probs: &LeafProbs) -> Result<Vec<f64>, ModelError> {
    check_permutation(order, probs)?;
    let mut remaining = 1.0;
    Ok(order
        .iter()
        .map(|&code| {
            remaining -= probs.probs[code as usize];
            remaining.max(0.0)
        })
        .collect())
}

/// Evaluates each strategy's expected normalized goal rank on the profile's
/// induced leaf distribution. `lds` repeats leaves and is rejected.
pub fn strategy_table(
    profile: &DepthProfile,
    strategies: &[StrategyKind],
) -> Result<Vec<(StrategyKind, f64)>, ModelError> {
    let probs = leaf_probs(profile);
    strategies
        .iter()
        .map(|&kind| {
            if kind == StrategyKind::Lds {
                return Err(ModelError::RepeatingStrategy(kind));
            }
            let order = visit_order(kind, profile.depth())?;
            Ok((kind, e_goal(&order, &probs)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xorshift64Star;

    const WORKED_LEAVES: [f64; 8] = [0.504, 0.056, 0.126, 0.014, 0.216, 0.024, 0.054, 0.006];

    fn worked_probs() -> LeafProbs {
        LeafProbs::from_probs(WORKED_LEAVES.to_vec()).unwrap()
    }

    #[test]
    fn profile_validation() {
        assert_eq!(
            DepthProfile::explicit(&[]).unwrap_err(),
            ModelError::EmptyProfile
        );
        assert_eq!(
            DepthProfile::explicit(&[0.7, 0.0]).unwrap_err(),
            ModelError::LevelProbOutOfRange {
                level: 2,
                value: 0.0
            }
        );
        assert_eq!(
            DepthProfile::explicit(&[1.2]).unwrap_err(),
            ModelError::LevelProbOutOfRange {
                level: 1,
                value: 1.2
            }
        );
        assert_eq!(
            DepthProfile::explicit(&[0.5; 25]).unwrap_err(),
            ModelError::DepthTooLarge(25)
        );
        assert!(DepthProfile::explicit(&[1.0, 0.5]).is_ok());
    }

    #[test]
    fn linear_profile_uses_one_based_levels() {
        let profile = DepthProfile::linear(0.56, 0.015, 3).unwrap();
        for (got, want) in profile.levels().iter().zip([0.575, 0.59, 0.605]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(
            DepthProfile::linear(0.5, 0.5, 2).unwrap_err(),
            ModelError::LevelProbOutOfRange {
                level: 2,
                value: 1.5
            }
        );
    }

    #[test]
    fn depth3_profile_produces_worked_leaf_distribution() {
        let profile = DepthProfile::explicit(&[0.7, 0.8, 0.9]).unwrap();
        let probs = leaf_probs(&profile);
        assert_eq!(probs.depth(), 3);
        for (got, want) in probs.probs().iter().zip(WORKED_LEAVES) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn uniform_profile_gives_uniform_leaves() {
        let probs = leaf_probs(&DepthProfile::explicit(&[0.5; 3]).unwrap());
        for &p in probs.probs() {
            assert!((p - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn leaf_probs_normalize_at_depth12() {
        let profile = DepthProfile::linear(0.56, 0.015, 12).unwrap();
        let probs = leaf_probs(&profile);
        assert_eq!(probs.len(), 4096);
        let total: f64 = probs.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_probs_validation() {
        assert_eq!(
            LeafProbs::from_probs(vec![0.5, 0.3, 0.2]).unwrap_err(),
            ModelError::NotAPowerOfTwo(3)
        );
        assert_eq!(
            LeafProbs::from_probs(vec![1.0]).unwrap_err(),
            ModelError::NotAPowerOfTwo(1)
        );
        assert_eq!(
            LeafProbs::from_probs(vec![0.5, 0.4]).unwrap_err(),
            ModelError::NotNormalized(0.9)
        );
        assert_eq!(
            LeafProbs::from_probs(vec![1.5, -0.5]).unwrap_err(),
            ModelError::BadLeafProb {
                index: 1,
                value: -0.5
            }
        );
    }

    #[test]
    fn e_goal_depth3_table() {
        let probs = worked_probs();
        let expect = [
            (StrategyKind::Dfs, 0.3375),
            (StrategyKind::Ilds, 0.31225),
            (StrategyKind::Dds, 0.26375),
            (StrategyKind::Alds, 0.26225),
        ];
        for (kind, want) in expect {
            let order = visit_order(kind, 3).unwrap();
            let got = e_goal(&order, &probs).unwrap();
            assert!((got - want).abs() < 1e-9, "{kind}: {got} vs {want}");
        }
    }

    #[test]
    fn e_goal_rejects_bad_orders() {
        let probs = worked_probs();
        assert_eq!(
            e_goal(&[0, 1, 2], &probs).unwrap_err(),
            ModelError::SizeMismatch { order: 3, leaves: 8 }
        );
        assert_eq!(
            e_goal(&[0, 1, 2, 3, 4, 5, 6, 6], &probs).unwrap_err(),
            ModelError::NotAPermutation
        );
        assert_eq!(
            e_goal(&[0, 1, 2, 3, 4, 5, 6, 8], &probs).unwrap_err(),
            ModelError::NotAPermutation
        );
    }

    #[test]
    fn uniform_leaves_make_every_permutation_equal() {
        let probs = leaf_probs(&DepthProfile::explicit(&[0.5; 3]).unwrap());
        for kind in StrategyKind::PERMUTATIONS {
            let order = visit_order(kind, 3).unwrap();
            let got = e_goal(&order, &probs).unwrap();
            // (2^d + 1) / 2^{d+1}
            assert!((got - 0.5625).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn optimal_matches_best_strategy_on_worked_tree() {
        let probs = worked_probs();
        let order = optimal_order(&probs);
        let got = e_goal(&order, &probs).unwrap();
        assert!((got - 0.26225).abs() < 1e-9);
    }

    #[test]
    fn optimal_order_breaks_ties_by_index() {
        let probs = leaf_probs(&DepthProfile::explicit(&[0.5; 2]).unwrap());
        assert_eq!(optimal_order(&probs), vec![0, 1, 2, 3]);
    }

    #[test]
    fn depth12_linear_model_matches_published_table() {
        let profile = DepthProfile::linear(0.56, 0.015, 12).unwrap();
        let table = strategy_table(&profile, &StrategyKind::PERMUTATIONS).unwrap();
        let expect = [
            (StrategyKind::Dfs, 0.410188),
            (StrategyKind::Ilds, 0.228320),
            (StrategyKind::Dds, 0.267444),
            (StrategyKind::Alds, 0.207261),
        ];
        for (kind, want) in expect {
            let (_, got) = table.iter().find(|(k, _)| *k == kind).copied().unwrap();
            assert!((got - want).abs() < 1e-4, "{kind}: {got} vs {want}");
        }
        let probs = leaf_probs(&profile);
        let best = e_goal(&optimal_order(&probs), &probs).unwrap();
        assert!((best - 0.200357).abs() < 1e-4, "optimal: {best}");
    }

    #[test]
    fn dfs_has_a_closed_form() {
        // Under DFS the rank is the leaf code + 1, so the expectation
        // factorizes per level: E = Σ_ℓ (1 − p_ℓ)·2^{−ℓ} + 2^{−d}.
        let profile = DepthProfile::linear(0.56, 0.015, 12).unwrap();
        let closed: f64 = profile
            .levels()
            .iter()
            .enumerate()
            .map(|(i, &p)| (1.0 - p) / f64::powi(2.0, i as i32 + 1))
            .sum::<f64>()
            + f64::powi(2.0, -12);
        let probs = leaf_probs(&profile);
        let dfs = e_goal(&visit_order(StrategyKind::Dfs, 12).unwrap(), &probs).unwrap();
        assert!((dfs - closed).abs() < 1e-12);
        assert!((closed - 0.410188).abs() < 1e-4);
    }

    #[test]
    fn strategy_table_rejects_repeating_orders() {
        let profile = DepthProfile::explicit(&[0.7, 0.8]).unwrap();
        assert_eq!(
            strategy_table(&profile, &[StrategyKind::Lds]).unwrap_err(),
            ModelError::RepeatingStrategy(StrategyKind::Lds)
        );
    }

    #[test]
    fn depth1_profiles_make_all_strategies_equal() {
        let profile = DepthProfile::explicit(&[0.73]).unwrap();
        let table = strategy_table(&profile, &StrategyKind::PERMUTATIONS).unwrap();
        for (_, value) in &table[1..] {
            assert!((value - table[0].1).abs() < 1e-15);
        }
    }

    fn random_profile(rng: &mut Xorshift64Star, d: u8, low: f64) -> DepthProfile {
        let levels: Vec<f64> = (0..d)
            .map(|_| low + (1.0 - low) * (rng.below(1000) as f64 + 1.0) / 1000.0)
            .collect();
        DepthProfile::explicit(&levels).unwrap()
    }

    #[test]
    fn optimal_lower_bounds_every_strategy() {
        let mut rng = Xorshift64Star::new(7);
        for case in 0..100 {
            let d = 1 + (rng.below(10) as u8).min(9);
            let profile = random_profile(&mut rng, d, 0.0);
            let probs = leaf_probs(&profile);
            let best = e_goal(&optimal_order(&probs), &probs).unwrap();
            for kind in StrategyKind::PERMUTATIONS {
                let got = e_goal(&visit_order(kind, d).unwrap(), &probs).unwrap();
                assert!(best <= got + 1e-12, "case {case} {kind}: {best} > {got}");
            }
        }
    }

    #[test]
    fn descending_probability_order_minimizes_e_goal() {
        let mut rng = Xorshift64Star::new(11);
        for case in 0..100 {
            let d = 1 + (rng.below(6) as u8).min(5);
            let probs = leaf_probs(&random_profile(&mut rng, d, 0.0));
            let best = e_goal(&optimal_order(&probs), &probs).unwrap();
            // Random permutation via Fisher–Yates.
            let mut perm: Vec<u32> = (0..probs.len() as u32).collect();
            for i in (1..perm.len()).rev() {
                let j = rng.below(i as u64 + 1) as usize;
                perm.swap(i, j);
            }
            let shuffled = e_goal(&perm, &probs).unwrap();
            assert!(best <= shuffled + 1e-12, "case {case}");
        }
    }

    #[test]
    fn increasing_confident_profiles_favor_alds_over_dfs() {
        let mut rng = Xorshift64Star::new(13);
        for case in 0..100 {
            let d = 2 + (rng.below(9) as u8).min(8);
            // Strictly increasing levels inside (0.5, 1).
            let mut levels = Vec::with_capacity(d as usize);
            let mut p = 0.5 + (rng.below(100) as f64 + 1.0) / 1000.0;
            for _ in 0..d {
                p += (rng.below(100) as f64 + 1.0) / 2500.0;
                levels.push(p.min(0.999));
            }
            let profile = DepthProfile::explicit(&levels).unwrap();
            let probs = leaf_probs(&profile);
            let alds = e_goal(&visit_order(StrategyKind::Alds, d).unwrap(), &probs).unwrap();
            let dfs = e_goal(&visit_order(StrategyKind::Dfs, d).unwrap(), &probs).unwrap();
            assert!(alds <= dfs + 1e-12, "case {case}: {alds} > {dfs}");
        }
    }

    #[test]
    fn curve_area_recovers_e_goal() {
        let profile = DepthProfile::explicit(&[0.7, 0.8, 0.9]).unwrap();
        let probs = leaf_probs(&profile);
        for kind in StrategyKind::PERMUTATIONS {
            let order = visit_order(kind, 3).unwrap();
            let curve = unsolved_curve(&order, &probs).unwrap();
            assert_eq!(curve.len(), 8);
            assert!(curve[7].abs() < 1e-12, "all mass explored at the end");
            // Left step function: height 1 before the first visit, then the
            // curve value after each visit.
            let area = 1.0 + curve[..7].iter().sum::<f64>();
            let expect = e_goal(&order, &probs).unwrap();
            assert!((area / 8.0 - expect).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn curve_is_monotone_nonincreasing() {
        let probs = worked_probs();
        let order = visit_order(StrategyKind::Dds, 3).unwrap();
        let curve = unsolved_curve(&order, &probs).unwrap();
        for pair in curve.windows(2) {
            assert!(pair[0] >= pair[1] - 1e-15);
        }
    }
}
