//! Ballot strategies: truthful voting, the take-the-X-best and
//! follow-the-leader heuristics, exhaustive best response, and a classifier
//! that labels an observed ballot with every strategy it is consistent with.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::election::{
    Ballot, CandidateId, CandidateSet, ElectionState, Priority, TieBreak, UtilityFunction,
};
use crate::error::{Error, Result};
use crate::exact::{self, ExactUtility};
use crate::uncertainty::{Evaluator, FutureModel};

/// Largest candidate count for exhaustive best-response search.
pub const BEST_RESPONSE_MAX_CANDIDATES: usize = 25;

/// How far take-the-X-best may reach.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum XRange {
    /// `1 <= X < #positive`, as originally defined.
    Strict,
    /// `1 <= X <= #positive`; the top end coincides with truthful voting.
    #[default]
    Permissive,
}

/// Approve every candidate with positive utility.
pub fn truthful(u: &UtilityFunction) -> Ballot {
    above(u, 0)
}

/// Approve every candidate whose utility exceeds `epsilon`.
pub fn truthful_nontrivial(u: &UtilityFunction, epsilon: f64) -> Result<Ballot> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::NegativeThreshold(epsilon));
    }
    let threshold = exact::to_micros(epsilon).unwrap_or(i64::MAX);
    Ok(above(u, threshold))
}

fn above(u: &UtilityFunction, threshold: i64) -> Ballot {
    CandidateSet::from_indices(
        u.micros()
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v > threshold)
            .map(|(i, _)| i),
    )
}

/// Positive-utility candidates from best to worst, utility ties broken by priority.
fn preference_order(u: &UtilityFunction, priority: &Priority) -> Vec<CandidateId> {
    let mut order: Vec<CandidateId> = truthful(u).iter().collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(u.micros_of(c)), priority.rank(c)));
    order
}

/// Approve the `x` highest-utility candidates among those with positive utility.
pub fn take_x_best(
    u: &UtilityFunction,
    x: usize,
    priority: &Priority,
    range: XRange,
) -> Result<Ballot> {
    let order = preference_order(u, priority);
    let max = match range {
        XRange::Strict => order.len().saturating_sub(1),
        XRange::Permissive => order.len(),
    };
    if x < 1 || x > max {
        return Err(Error::XOutOfRange { x, min: 1, max });
    }
    Ok(CandidateSet::from_ids(order.into_iter().take(x)))
}

/// Every candidate currently holding the maximum tally.
pub fn follow_the_leader(state: &ElectionState) -> Ballot {
    let top = state.tallies().iter().copied().max().unwrap_or(0);
    CandidateSet::from_indices(
        state
            .tallies()
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t == top)
            .map(|(i, _)| i),
    )
}

fn priority_of(state: &ElectionState) -> Priority {
    match state.tiebreak() {
        TieBreak::Lexicographic(p) => p.clone(),
        TieBreak::RandomUniform => Priority::identity(state.num_candidates()),
    }
}

/// Ballots combining a non-empty subset of the leaders with the single best
/// candidate, deduplicated and in canonical order. Empty if no candidate has
/// positive utility.
pub fn leader_plus_best(state: &ElectionState, u: &UtilityFunction) -> Vec<Ballot> {
    let Ok(best) = take_x_best(u, 1, &priority_of(state), XRange::Permissive) else {
        return Vec::new();
    };
    let leaders = follow_the_leader(state);
    nonempty_subsets(leaders)
        .map(|s| s.union(best))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn nonempty_subsets(set: CandidateSet) -> impl Iterator<Item = CandidateSet> {
    let members: Vec<CandidateId> = set.iter().collect();
    (1u64..(1 << members.len())).map(move |pick| {
        CandidateSet::from_ids(
            members
                .iter()
                .enumerate()
                .filter(|(i, _)| pick & (1 << i) != 0)
                .map(|(_, &c)| c),
        )
    })
}

/// All ballots attaining the maximum expected utility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestResponse {
    /// Every maximizing ballot, in canonical order.
    pub ballots: Vec<Ballot>,
    pub value: ExactUtility,
    /// How many ballots were searched.
    pub searched: usize,
}

impl BestResponse {
    /// Fewest approvals, then lexicographically earliest.
    pub fn canonical(&self) -> Ballot {
        self.ballots[0]
    }

    /// The maximizer differing from `reference` in the fewest candidates,
    /// ties resolved by canonical order.
    pub fn closest_to(&self, reference: Ballot) -> Ballot {
        *self
            .ballots
            .iter()
            .min_by_key(|b| ((b.mask() ^ reference.mask()).count_ones(), **b))
            .expect("at least one ballot is searched")
    }

    pub fn contains(&self, ballot: Ballot) -> bool {
        self.ballots.binary_search(&ballot).is_ok()
    }

    /// True when every possible ballot is a maximizer, i.e. the vote cannot
    /// change the outcome's value.
    pub fn is_indifferent(&self) -> bool {
        self.ballots.len() == self.searched
    }
}

/// Exhaustive search over all `2^m` ballots for the expected-utility maximizers
/// under the state's tie-break rule and the given future model.
pub fn best_response(
    state: &ElectionState,
    u: &UtilityFunction,
    model: &FutureModel,
) -> Result<BestResponse> {
    let m = state.num_candidates();
    if m > BEST_RESPONSE_MAX_CANDIDATES {
        return Err(Error::Capacity(format!(
            "exhaustive best response supports at most {BEST_RESPONSE_MAX_CANDIDATES} \
             candidates, got {m}; a polynomial-time manipulation algorithm would be needed"
        )));
    }
    let eval = Evaluator::new(state, u, model)?;
    let searched = 1usize << m;
    let values = (0..searched as u64)
        .into_par_iter()
        .map(|mask| eval.evaluate(CandidateSet::from_mask(mask)))
        .collect::<Result<Vec<_>>>()?;
    let value = values
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(ExactUtility::zero);
    let mut ballots: Vec<Ballot> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == value)
        .map(|(mask, _)| CandidateSet::from_mask(mask as u64))
        .collect();
    ballots.sort();
    Ok(BestResponse {
        ballots,
        value,
        searched,
    })
}

/// A named strategy a ballot can be consistent with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    /// Member of the best-response set.
    BestResponse,
    Truthful,
    /// Truthful after discarding utilities at or below the threshold (micros).
    TruthfulNontrivial {
        epsilon_micros: i64,
    },
    TakeXBest(usize),
    FollowTheLeader,
    LeaderPlusBest,
    Abstain,
    Other,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::BestResponse => f.write_str("optimal"),
            StrategyKind::Truthful => f.write_str("truthful"),
            StrategyKind::TruthfulNontrivial { .. } => f.write_str("truthful-nontrivial"),
            StrategyKind::TakeXBest(x) => write!(f, "take-x-best({x})"),
            StrategyKind::FollowTheLeader => f.write_str("follow-the-leader"),
            StrategyKind::LeaderPlusBest => f.write_str("leader-plus-best"),
            StrategyKind::Abstain => f.write_str("abstain"),
            StrategyKind::Other => f.write_str("other"),
        }
    }
}

/// Every label a ballot matches; `Other` only when nothing else does.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationResult {
    pub labels: BTreeSet<StrategyKind>,
}

impl ClassificationResult {
    pub fn contains(&self, kind: StrategyKind) -> bool {
        self.labels.contains(&kind)
    }
}

impl fmt::Display for ClassificationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(";"))
    }
}

/// Threshold used for the `truthful-nontrivial` label.
pub const NONTRIVIAL_EPSILON: f64 = 0.01;

/// Precomputed reference ballots for one election, so many observed ballots
/// can be classified cheaply.
#[derive(Clone, Debug)]
pub struct Classifier {
    truthful: Ballot,
    nontrivial: Option<(Ballot, i64)>,
    take_x: Vec<(usize, Ballot)>,
    leaders: Ballot,
    leader_plus_best: Vec<Ballot>,
    best: BestResponse,
    m: usize,
}

impl Classifier {
    /// Optimality is judged with no remaining voters under the state's own
    /// tie-break rule.
    pub fn new(state: &ElectionState, u: &UtilityFunction) -> Result<Self> {
        let truthful = truthful(u);
        let eps_micros = exact::to_micros(NONTRIVIAL_EPSILON).expect("finite");
        let star = truthful_nontrivial(u, NONTRIVIAL_EPSILON)?;
        let priority = priority_of(state);
        // X = #positive reproduces the truthful ballot and is reported as such.
        let take_x = (1..truthful.len())
            .map(|x| take_x_best(u, x, &priority, XRange::Strict).map(|b| (x, b)))
            .collect::<Result<_>>()?;
        Ok(Classifier {
            truthful,
            nontrivial: (star != truthful).then_some((star, eps_micros)),
            take_x,
            leaders: follow_the_leader(state),
            leader_plus_best: leader_plus_best(state, u),
            best: best_response(state, u, &FutureModel::last_voter())?,
            m: state.num_candidates(),
        })
    }

    pub fn best_response(&self) -> &BestResponse {
        &self.best
    }

    pub fn classify(&self, ballot: Ballot) -> Result<ClassificationResult> {
        if !ballot.fits(self.m) {
            return Err(Error::CandidateOutOfRange {
                index: ballot.iter().last().map_or(0, |c| c.0),
                candidates: self.m,
            });
        }
        let mut labels = BTreeSet::new();
        // An election the vote cannot influence has no optimal ballot to speak of.
        if !self.best.is_indifferent() && self.best.contains(ballot) {
            labels.insert(StrategyKind::BestResponse);
        }
        if ballot == self.truthful {
            labels.insert(StrategyKind::Truthful);
        }
        if let Some((star, epsilon_micros)) = self.nontrivial {
            if ballot == star {
                labels.insert(StrategyKind::TruthfulNontrivial { epsilon_micros });
            }
        }
        for &(x, b) in &self.take_x {
            if ballot == b {
                labels.insert(StrategyKind::TakeXBest(x));
            }
        }
        if !ballot.is_empty() && ballot.is_subset(self.leaders) {
            labels.insert(StrategyKind::FollowTheLeader);
        }
        if self.leader_plus_best.contains(&ballot) {
            labels.insert(StrategyKind::LeaderPlusBest);
        }
        if ballot.is_empty() {
            labels.insert(StrategyKind::Abstain);
        }
        if labels.is_empty() {
            labels.insert(StrategyKind::Other);
        }
        Ok(ClassificationResult { labels })
    }
}

/// Labels `ballot` with every strategy it is consistent with; the seat count
/// of `state` is the winner condition.
pub fn classify(
    ballot: Ballot,
    state: &ElectionState,
    u: &UtilityFunction,
) -> Result<ClassificationResult> {
    Classifier::new(state, u)?.classify(ballot)
}
