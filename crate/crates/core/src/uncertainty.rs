//! Exact expected utilities when `r` unknown voters still cast approval
//! ballots after the focal voter, plus the strategy sweeps built on them.
//!
//! Each remaining voter approves each candidate independently with
//! probability `p`, so the extra approvals a candidate receives are
//! Binomial(r, p) and independent across candidates. The engine enumerates
//! increment vectors in `{0..r}^m` rather than the `(2^m)^r` ballot profiles
//! they summarize. Every weight is an integer over the common denominator
//! `denom(p)^(r*m)`, so results are exact rationals.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::election::{scaled_value, Ballot, ElectionState, TieRule, UtilityFunction};
use crate::error::{Error, Result};
use crate::exact::{ExactUtility, Probability};
use crate::scenario::Scenario;
use crate::strategy::{self, XRange};

/// Bounds that keep enumeration exact and tractable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_remaining_voters: u32,
    /// Only enforced when at least one voter remains.
    pub max_candidates: usize,
    /// Cap on `(r + 1)^m`, the number of increment vectors.
    pub max_terms: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_remaining_voters: 8,
            max_candidates: 12,
            max_terms: 1 << 24,
        }
    }
}

/// Unknown voters still to come after the focal voter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FutureModel {
    remaining_voters: u32,
    approval_prob: Probability,
    limits: EnumerationLimits,
}

impl FutureModel {
    pub fn new(remaining_voters: u32, approval_prob: Probability) -> Result<Self> {
        Self::with_limits(
            remaining_voters,
            approval_prob,
            EnumerationLimits::default(),
        )
    }

    pub fn with_limits(
        remaining_voters: u32,
        approval_prob: Probability,
        limits: EnumerationLimits,
    ) -> Result<Self> {
        if remaining_voters > limits.max_remaining_voters {
            return Err(Error::Capacity(format!(
                "{remaining_voters} remaining voters exceeds the cap of {}",
                limits.max_remaining_voters
            )));
        }
        Ok(FutureModel {
            remaining_voters,
            approval_prob,
            limits,
        })
    }

    /// The focal voter casts the last ballot.
    pub fn last_voter() -> Self {
        FutureModel {
            remaining_voters: 0,
            approval_prob: Probability::HALF,
            limits: EnumerationLimits::default(),
        }
    }

    pub fn remaining_voters(&self) -> u32 {
        self.remaining_voters
    }

    pub fn approval_prob(&self) -> Probability {
        self.approval_prob
    }

    pub fn limits(&self) -> EnumerationLimits {
        self.limits
    }

    fn check_candidates(&self, m: usize) -> Result<()> {
        if self.remaining_voters == 0 {
            return Ok(());
        }
        if m > self.limits.max_candidates {
            return Err(Error::Capacity(format!(
                "{m} candidates exceeds the enumeration cap of {} when voters remain",
                self.limits.max_candidates
            )));
        }
        let terms = (self.remaining_voters as u64 + 1).checked_pow(m as u32);
        match terms {
            Some(t) if t <= self.limits.max_terms => Ok(()),
            _ => Err(Error::Capacity(format!(
                "({} + 1)^{m} increment vectors exceeds the cap of {}",
                self.remaining_voters, self.limits.max_terms
            ))),
        }
    }

    /// `(increment, weight)` pairs for a single candidate, zero weights
    /// dropped. Weights share the denominator `denom(p)^r`.
    fn candidate_weights(&self) -> Vec<(u32, BigInt)> {
        let r = self.remaining_voters;
        let yes = BigInt::from(self.approval_prob.numer());
        let no = BigInt::from(self.approval_prob.denom() - self.approval_prob.numer());
        let mut binom = BigInt::one();
        let mut out = Vec::with_capacity(r as usize + 1);
        for j in 0..=r {
            let w = &binom
                * num_traits::pow(yes.clone(), j as usize)
                * num_traits::pow(no.clone(), (r - j) as usize);
            if !w.is_zero() {
                out.push((j, w));
            }
            binom = binom * BigInt::from(r - j) / BigInt::from(j + 1);
        }
        out
    }

    fn common_denominator(&self, m: usize) -> BigInt {
        num_traits::pow(
            BigInt::from(self.approval_prob.denom()),
            self.remaining_voters as usize * m,
        )
    }
}

/// Exact distribution of the approvals added by the remaining voters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncrementDistribution {
    pub support: Vec<(Vec<u32>, BigRational)>,
}

impl IncrementDistribution {
    pub fn total_probability(&self) -> BigRational {
        self.support.iter().map(|(_, p)| p.clone()).sum()
    }
}

pub fn increment_distribution(model: &FutureModel, m: usize) -> Result<IncrementDistribution> {
    model.check_candidates(m)?;
    let weights = model.candidate_weights();
    let denom = model.common_denominator(m);
    let mut support = Vec::new();
    let mut increments = vec![0u32; m];
    walk_increments(
        &weights,
        0,
        &mut increments,
        &BigInt::one(),
        &mut |inc, w| {
            support.push((inc.to_vec(), BigRational::new(w.clone(), denom.clone())));
        },
    );
    Ok(IncrementDistribution { support })
}

fn walk_increments(
    weights: &[(u32, BigInt)],
    level: usize,
    increments: &mut [u32],
    weight: &BigInt,
    visit: &mut impl FnMut(&[u32], &BigInt),
) {
    if level == increments.len() {
        visit(increments, weight);
        return;
    }
    for (j, w) in weights {
        increments[level] = *j;
        walk_increments(weights, level + 1, increments, &(weight * w), visit);
    }
}

/// Walks tallies directly so the hot loop avoids building increment vectors.
fn walk_tallies(
    weights: &[(u32, BigInt)],
    level: usize,
    base: &[u64],
    tallies: &mut [u64],
    weight: &BigInt,
    visit: &mut impl FnMut(&[u64], &BigInt),
) {
    if level == tallies.len() {
        visit(tallies, weight);
        return;
    }
    for (j, w) in weights {
        tallies[level] = base[level] + *j as u64;
        walk_tallies(weights, level + 1, base, tallies, &(weight * w), visit);
    }
}

/// Evaluates many ballots against one state, utility and future model.
pub(crate) struct Evaluator<'a> {
    state: &'a ElectionState,
    u: &'a UtilityFunction,
    weights: Vec<(u32, BigInt)>,
    denom: BigInt,
    certain: bool,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(
        state: &'a ElectionState,
        u: &'a UtilityFunction,
        model: &FutureModel,
    ) -> Result<Self> {
        let m = state.num_candidates();
        u.check_len(m)?;
        model.check_candidates(m)?;
        Ok(Evaluator {
            state,
            u,
            weights: model.candidate_weights(),
            denom: model.common_denominator(m),
            certain: model.remaining_voters == 0,
        })
    }

    pub(crate) fn evaluate(&self, ballot: Ballot) -> Result<ExactUtility> {
        let after = self.state.apply_ballot(ballot)?;
        if self.certain {
            return after.expected_outcome_utility(self.u);
        }
        let seats = after.seats();
        let tiebreak = after.tiebreak();
        let m = after.num_candidates();
        // Accumulate by the tie denominator so each term stays an integer.
        let mut buckets = vec![BigInt::zero(); m + 1];
        let mut tallies = after.tallies().to_vec();
        walk_tallies(
            &self.weights,
            0,
            after.tallies(),
            &mut tallies,
            &BigInt::one(),
            &mut |t, w| {
                let v = scaled_value(t, seats, tiebreak, self.u);
                if v.numer != 0 {
                    buckets[v.denom as usize] += w * BigInt::from(v.numer);
                }
            },
        );
        let total: BigRational = buckets
            .into_iter()
            .enumerate()
            .filter(|(_, b)| !b.is_zero())
            .map(|(t, b)| BigRational::new(b, BigInt::from(t)))
            .sum();
        Ok(ExactUtility::from_micros_ratio(
            total / BigRational::from_integer(self.denom.clone()),
        ))
    }
}

/// Expected outcome utility of casting `ballot` now, averaged over the
/// remaining voters and the state's tie-break rule.
pub fn expected_utility(
    state: &ElectionState,
    ballot: Ballot,
    u: &UtilityFunction,
    model: &FutureModel,
) -> Result<ExactUtility> {
    Evaluator::new(state, u, model)?.evaluate(ballot)
}

pub const LABEL_TRUTHFUL: &str = "truthful";
pub const LABEL_TRUTH_STAR: &str = "truth*";
pub const LABEL_MAX: &str = "max";
pub const LABEL_MAX_STAR: &str = "max*";

/// Threshold below which a positive utility counts as trivial for `truth*`.
pub const TRIVIAL_UTILITY: f64 = 0.01;

pub fn take_x_best_label(x: usize) -> String {
    format!("take-x-best({x})")
}

/// The fixed ballots tracked across uncertainty levels: truthful, take the
/// 1 and 2 best, the static maximizer `max*` (best response with no
/// remaining voters) and `truth*` when some utility is trivially positive.
///
/// When several ballots maximize with no remaining voters, `max*` is the one
/// closest to the truthful ballot.
pub fn strategy_panel(
    scenario: &Scenario,
    seats: usize,
    rule: TieRule,
) -> Result<Vec<(String, Ballot)>> {
    let state = scenario.state(seats, rule)?;
    let u = scenario.utilities();
    let mut panel = vec![(LABEL_TRUTHFUL.to_string(), strategy::truthful(u))];
    for x in 1..=2 {
        if let Ok(b) = strategy::take_x_best(u, x, scenario.priority(), XRange::Permissive) {
            panel.push((take_x_best_label(x), b));
        }
    }
    let best = strategy::best_response(&state, u, &FutureModel::last_voter())?;
    panel.push((LABEL_MAX_STAR.to_string(), best.closest_to(panel[0].1)));
    let eps = crate::exact::to_micros(TRIVIAL_UTILITY).expect("finite");
    if u.micros().iter().any(|&v| v > 0 && v <= eps) {
        panel.push((
            LABEL_TRUTH_STAR.to_string(),
            strategy::truthful_nontrivial(u, TRIVIAL_UTILITY)?,
        ));
    }
    Ok(panel)
}

/// One point of an expected-utility curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub scenario: String,
    pub seats: usize,
    pub strategy: String,
    pub remaining_voters: u32,
    pub approval_prob: Probability,
    pub expected_utility: ExactUtility,
    /// The ballot evaluated; for `max` the canonical maximizer at this `r`.
    pub ballot: Ballot,
}

/// Evaluates every panel strategy, plus the per-`r` maximum, at each number of
/// remaining voters. Rows come back sorted by `(strategy, r)`.
pub fn sweep(
    scenario: &Scenario,
    seats: usize,
    remaining: &[u32],
    approval_prob: Probability,
    rule: TieRule,
) -> Result<Vec<SweepRow>> {
    let state = scenario.state(seats, rule)?;
    let u = scenario.utilities();
    let panel = strategy_panel(scenario, seats, rule)?;
    let truthful = strategy::truthful(u);
    let mut rows = Vec::with_capacity((panel.len() + 1) * remaining.len());
    for &r in remaining {
        let model = FutureModel::new(r, approval_prob)?;
        let eval = Evaluator::new(&state, u, &model)?;
        let row = |strategy: &str, ballot: Ballot, value: ExactUtility| SweepRow {
            scenario: scenario.id().to_string(),
            seats,
            strategy: strategy.to_string(),
            remaining_voters: r,
            approval_prob,
            expected_utility: value,
            ballot,
        };
        for (label, ballot) in &panel {
            rows.push(row(label, *ballot, eval.evaluate(*ballot)?));
        }
        let best = strategy::best_response(&state, u, &model)?;
        rows.push(row(LABEL_MAX, best.closest_to(truthful), best.value));
    }
    rows.sort_by(|a, b| {
        (a.strategy.as_str(), a.remaining_voters).cmp(&(b.strategy.as_str(), b.remaining_voters))
    });
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str = "scenario,k,strategy,r,p,expected_utility";

/// Sweep rows as CSV, utilities with six decimals.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&row.scenario),
            row.seats,
            csv_field(&row.strategy),
            row.remaining_voters,
            row.approval_prob,
            row.expected_utility
        );
    }
    out
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn no_remaining_voters_is_point_mass() {
        let d = increment_distribution(&FutureModel::last_voter(), 5).unwrap();
        assert_eq!(d.support, vec![(vec![0; 5], rat(1, 1))]);
    }

    #[test]
    fn binomial_two_half() {
        let model = FutureModel::new(2, Probability::HALF).unwrap();
        let d = increment_distribution(&model, 1).unwrap();
        assert_eq!(
            d.support,
            vec![
                (vec![0], rat(1, 4)),
                (vec![1], rat(1, 2)),
                (vec![2], rat(1, 4))
            ]
        );
    }

    #[test]
    fn one_fair_voter_is_uniform_over_ballots() {
        let model = FutureModel::new(1, Probability::HALF).unwrap();
        let d = increment_distribution(&model, 5).unwrap();
        assert_eq!(d.support.len(), 32);
        assert!(d.support.iter().all(|(_, p)| *p == rat(1, 32)));
        assert_eq!(d.total_probability(), rat(1, 1));
    }

    #[test]
    fn degenerate_probabilities_drop_zero_terms() {
        let none = FutureModel::new(3, Probability::ZERO).unwrap();
        let d = increment_distribution(&none, 4).unwrap();
        assert_eq!(d.support, vec![(vec![0; 4], rat(1, 1))]);
        let all = FutureModel::new(3, Probability::ONE).unwrap();
        let d = increment_distribution(&all, 4).unwrap();
        assert_eq!(d.support, vec![(vec![3; 4], rat(1, 1))]);
    }

    #[test]
    fn odd_probability_normalizes() {
        let model = FutureModel::new(3, Probability::new(1, 3).unwrap()).unwrap();
        let d = increment_distribution(&model, 3).unwrap();
        assert_eq!(d.support.len(), 64);
        assert_eq!(d.total_probability(), rat(1, 1));
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            FutureModel::new(9, Probability::HALF),
            Err(Error::Capacity(_))
        ));
        let model = FutureModel::new(1, Probability::HALF).unwrap();
        assert!(matches!(
            increment_distribution(&model, 13),
            Err(Error::Capacity(_))
        ));
        let tight = EnumerationLimits {
            max_terms: 100,
            ..EnumerationLimits::default()
        };
        let model = FutureModel::with_limits(3, Probability::HALF, tight).unwrap();
        assert!(increment_distribution(&model, 3).is_ok());
        assert!(increment_distribution(&model, 4).is_err());
    }

    #[test]
    fn certain_future_reduces_to_outcome_utility() {
        let s = builtin("s4").unwrap();
        let state = s.state(3, TieRule::Random).unwrap();
        let e = s.candidates().parse_set("E").unwrap();
        let v = expected_utility(&state, e, s.utilities(), &FutureModel::last_voter()).unwrap();
        assert_eq!(v, ExactUtility::from_decimal("-0.75").unwrap());

        let s1 = builtin("s1").unwrap();
        let state = s1.state(2, TieRule::Random).unwrap();
        let t = strategy::truthful(s1.utilities());
        let v = expected_utility(&state, t, s1.utilities(), &FutureModel::last_voter()).unwrap();
        // D stays at 3, so A, B, C, E tie at 4 for two seats
        assert_eq!(v, ExactUtility::from_decimal("0.20").unwrap());
    }

    #[test]
    fn always_approving_future_equals_shifted_tallies() {
        let s = builtin("s1").unwrap();
        let state = s.state(2, TieRule::Random).unwrap();
        let ballot = s.candidates().parse_set("B,E").unwrap();
        let model = FutureModel::new(3, Probability::ONE).unwrap();
        let v = expected_utility(&state, ballot, s.utilities(), &model).unwrap();
        let shifted = state
            .apply_ballot(ballot)
            .unwrap()
            .apply_ballot(Ballot::all(5))
            .unwrap()
            .apply_ballot(Ballot::all(5))
            .unwrap()
            .apply_ballot(Ballot::all(5))
            .unwrap();
        assert_eq!(v, shifted.expected_outcome_utility(s.utilities()).unwrap());
    }

    #[test]
    fn panels() {
        let s1 = builtin("s1").unwrap();
        let panel = strategy_panel(&s1, 2, TieRule::Random).unwrap();
        let labels: Vec<_> = panel.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(
            labels,
            ["truthful", "take-x-best(1)", "take-x-best(2)", "max*"]
        );

        let s2 = builtin("s2").unwrap();
        let panel = strategy_panel(&s2, 2, TieRule::Random).unwrap();
        let truth_star = panel.iter().find(|(l, _)| l == LABEL_TRUTH_STAR).unwrap().1;
        assert_eq!(s2.candidates().format_set(truth_star), "A,B,E");
    }

    #[test]
    fn sweep_shape_and_csv() {
        let s1 = builtin("s1").unwrap();
        let rows = sweep(&s1, 2, &[0, 1, 2, 3], Probability::HALF, TieRule::Random).unwrap();
        assert_eq!(rows.len(), 20);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("scenario,k,strategy,r,p,expected_utility\n"));
        assert_eq!(csv.lines().count(), 21);
        assert!(csv.lines().nth(1).unwrap().starts_with("s1,2,max,0,0.5,"));
    }

    #[test]
    fn csv_quotes_awkward_ids() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
