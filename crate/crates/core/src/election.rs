//! Approval elections over aggregate tallies: winning sets, win probabilities
//! and outcome utilities under lexicographic or uniform random tie-breaking.

use std::cmp::{Ordering, Reverse};
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::exact::{self, ExactUtility};

/// Hard limit on candidates, set by the bitset representation of [`CandidateSet`].
pub const MAX_CANDIDATES: usize = 64;

/// Position of a candidate in its election's candidate list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(pub usize);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A subset of candidates, stored as a bitset over candidate indices.
///
/// Ordering is the canonical ballot order: fewer members first, then the
/// lexicographically earliest sorted index sequence.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CandidateSet(u64);

/// An approval ballot is just the set of approved candidates.
pub type Ballot = CandidateSet;

impl CandidateSet {
    pub const EMPTY: CandidateSet = CandidateSet(0);

    pub fn from_mask(mask: u64) -> Self {
        CandidateSet(mask)
    }

    /// Every candidate of an `m`-candidate election.
    pub fn all(m: usize) -> Self {
        if m >= 64 {
            CandidateSet(u64::MAX)
        } else {
            CandidateSet((1u64 << m) - 1)
        }
    }

    pub fn from_ids<I: IntoIterator<Item = CandidateId>>(ids: I) -> Self {
        ids.into_iter().fold(Self::EMPTY, |s, c| s.with(c))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        Self::from_ids(indices.into_iter().map(CandidateId))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, c: CandidateId) -> bool {
        c.0 < 64 && self.0 & (1 << c.0) != 0
    }

    pub fn with(self, c: CandidateId) -> Self {
        assert!(c.0 < MAX_CANDIDATES, "candidate index {} out of range", c.0);
        CandidateSet(self.0 | (1 << c.0))
    }

    pub fn without(self, c: CandidateId) -> Self {
        if c.0 >= 64 {
            return self;
        }
        CandidateSet(self.0 & !(1 << c.0))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        CandidateSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = CandidateId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(CandidateId(i))
        })
    }

    /// True if every member is below `m`.
    pub fn fits(self, m: usize) -> bool {
        self.is_subset(Self::all(m))
    }
}

impl Ord for CandidateSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for CandidateSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|c| c.0)).finish()
    }
}

/// Ordered, uniquely labelled candidate list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidates {
    labels: Vec<String>,
}

impl Candidates {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() > MAX_CANDIDATES {
            return Err(Error::InvalidElection(format!(
                "{} candidates exceeds the limit of {MAX_CANDIDATES}",
                labels.len()
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.trim().is_empty() || label.contains(',') {
                return Err(Error::InvalidElection(format!(
                    "candidate label {label:?} must be non-empty and contain no commas"
                )));
            }
            if labels[..i].contains(label) {
                return Err(Error::DuplicateCandidate(label.clone()));
            }
        }
        Ok(Candidates { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, c: CandidateId) -> &str {
        &self.labels[c.0]
    }

    pub fn find(&self, label: &str) -> Option<CandidateId> {
        self.labels.iter().position(|l| l == label).map(CandidateId)
    }

    pub fn ids(&self) -> impl Iterator<Item = CandidateId> {
        (0..self.labels.len()).map(CandidateId)
    }

    /// Parses a comma-separated label list such as `"B,E"`. Blank means abstain.
    pub fn parse_set(&self, text: &str) -> Result<CandidateSet> {
        let mut set = CandidateSet::EMPTY;
        for token in text.split(',').map(str::trim) {
            if token.is_empty() {
                if text.trim().is_empty() {
                    continue;
                }
                return Err(Error::UnknownCandidate(String::new()));
            }
            let id = self
                .find(token)
                .ok_or_else(|| Error::UnknownCandidate(token.to_string()))?;
            if set.contains(id) {
                return Err(Error::DuplicateCandidate(token.to_string()));
            }
            set = set.with(id);
        }
        Ok(set)
    }

    /// Comma-separated labels in candidate order; empty string for the empty set.
    pub fn format_set(&self, set: CandidateSet) -> String {
        set.iter()
            .map(|c| self.label(c))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Strict priority order used by lexicographic tie-breaking (earlier wins).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Priority {
    order: Vec<CandidateId>,
    rank: Vec<usize>,
}

impl Priority {
    /// Candidate-list order: A > B > C > ...
    pub fn identity(m: usize) -> Self {
        Priority {
            order: (0..m).map(CandidateId).collect(),
            rank: (0..m).collect(),
        }
    }

    pub fn new(order: Vec<CandidateId>, m: usize) -> Result<Self> {
        if order.len() != m {
            return Err(Error::LengthMismatch {
                field: "lex_priority",
                expected: m,
                found: order.len(),
            });
        }
        let mut rank = vec![usize::MAX; m];
        for (pos, c) in order.iter().enumerate() {
            if c.0 >= m || rank[c.0] != usize::MAX {
                return Err(Error::InvalidElection(
                    "lexicographic priority must be a permutation of the candidates".into(),
                ));
            }
            rank[c.0] = pos;
        }
        Ok(Priority { order, rank })
    }

    pub fn order(&self) -> &[CandidateId] {
        &self.order
    }

    pub fn rank(&self, c: CandidateId) -> usize {
        self.rank[c.0]
    }

    pub(crate) fn ranks(&self) -> &[usize] {
        &self.rank
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TieBreak {
    Lexicographic(Priority),
    RandomUniform,
}

/// Tie-break rule without its payload, for configuration surfaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TieRule {
    Lexicographic,
    Random,
}

impl TieBreak {
    pub fn rule(&self) -> TieRule {
        match self {
            TieBreak::Lexicographic(_) => TieRule::Lexicographic,
            TieBreak::RandomUniform => TieRule::Random,
        }
    }
}

/// The focal agent's utility for each candidate, held in micros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UtilityFunction {
    micros: Vec<i64>,
}

impl UtilityFunction {
    pub fn new(values: &[f64]) -> Result<Self> {
        let micros = values
            .iter()
            .enumerate()
            .map(|(i, &v)| exact::to_micros(v).ok_or(Error::NonFiniteUtility(i)))
            .collect::<Result<_>>()?;
        Ok(UtilityFunction { micros })
    }

    pub fn from_micros(micros: Vec<i64>) -> Self {
        UtilityFunction { micros }
    }

    pub fn len(&self) -> usize {
        self.micros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.micros.is_empty()
    }

    pub fn micros(&self) -> &[i64] {
        &self.micros
    }

    pub fn micros_of(&self, c: CandidateId) -> i64 {
        self.micros[c.0]
    }

    pub fn get(&self, c: CandidateId) -> f64 {
        exact::from_micros(self.micros[c.0])
    }

    pub fn values(&self) -> Vec<f64> {
        self.micros.iter().map(|&m| exact::from_micros(m)).collect()
    }

    pub(crate) fn sum_micros(&self, set: CandidateSet) -> i64 {
        set.iter().map(|c| self.micros[c.0]).sum()
    }

    pub(crate) fn check_len(&self, m: usize) -> Result<()> {
        if self.micros.len() != m {
            return Err(Error::LengthMismatch {
                field: "utilities",
                expected: m,
                found: self.micros.len(),
            });
        }
        Ok(())
    }
}

/// Sum of the utilities of the winners.
pub fn outcome_utility(winners: CandidateSet, u: &UtilityFunction) -> ExactUtility {
    ExactUtility::from_micros(u.sum_micros(winners))
}

/// An approval election seen by the last (focal) voter: aggregate tallies,
/// seat count and tie-break rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionState {
    candidates: Candidates,
    tallies: Vec<u64>,
    seats: usize,
    tiebreak: TieBreak,
}

impl ElectionState {
    pub fn new(
        candidates: Candidates,
        tallies: Vec<u64>,
        seats: usize,
        tiebreak: TieBreak,
    ) -> Result<Self> {
        let m = candidates.len();
        if tallies.len() != m {
            return Err(Error::LengthMismatch {
                field: "tallies",
                expected: m,
                found: tallies.len(),
            });
        }
        if seats > m {
            return Err(Error::InvalidElection(format!(
                "{seats} seats but only {m} candidates"
            )));
        }
        if let TieBreak::Lexicographic(p) = &tiebreak {
            if p.order().len() != m {
                return Err(Error::LengthMismatch {
                    field: "lex_priority",
                    expected: m,
                    found: p.order().len(),
                });
            }
        }
        Ok(ElectionState {
            candidates,
            tallies,
            seats,
            tiebreak,
        })
    }

    pub fn candidates(&self) -> &Candidates {
        &self.candidates
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn tallies(&self) -> &[u64] {
        &self.tallies
    }

    pub fn seats(&self) -> usize {
        self.seats
    }

    pub fn tiebreak(&self) -> &TieBreak {
        &self.tiebreak
    }

    /// Same election with a different tie-break rule.
    pub fn with_tiebreak(&self, tiebreak: TieBreak) -> Result<Self> {
        ElectionState::new(
            self.candidates.clone(),
            self.tallies.clone(),
            self.seats,
            tiebreak,
        )
    }

    pub fn with_seats(&self, seats: usize) -> Result<Self> {
        ElectionState::new(
            self.candidates.clone(),
            self.tallies.clone(),
            seats,
            self.tiebreak.clone(),
        )
    }

    pub fn check_ballot(&self, ballot: Ballot) -> Result<()> {
        let m = self.num_candidates();
        if let Some(bad) = ballot.iter().find(|c| c.0 >= m) {
            return Err(Error::CandidateOutOfRange {
                index: bad.0,
                candidates: m,
            });
        }
        Ok(())
    }

    /// Copy of the state with one approval added for each ballot member.
    pub fn apply_ballot(&self, ballot: Ballot) -> Result<Self> {
        self.check_ballot(ballot)?;
        let mut next = self.clone();
        for c in ballot.iter() {
            next.tallies[c.0] += 1;
        }
        Ok(next)
    }

    /// Winning set under lexicographic tie-breaking.
    pub fn winners_lex(&self) -> Result<CandidateSet> {
        match &self.tiebreak {
            TieBreak::Lexicographic(p) => Ok(lex_winners(&self.tallies, self.seats, p.ranks())),
            TieBreak::RandomUniform => Err(Error::NotLexicographic),
        }
    }

    pub fn outcome_distribution(&self) -> OutcomeDistribution {
        let b = Boundary::of(&self.tallies, self.seats);
        let m = self.num_candidates();
        let tied = b.ties.len() as i64;
        let win_prob = (0..m)
            .map(CandidateId)
            .map(|c| {
                if b.sure.contains(c) {
                    Ratio::from_integer(1)
                } else if b.ties.contains(c) {
                    Ratio::new(b.open as i64, tied)
                } else {
                    Ratio::from_integer(0)
                }
            })
            .collect();
        OutcomeDistribution {
            win_prob,
            sure_winners: b.sure,
            boundary_ties: b.ties,
            open_seats: b.open,
        }
    }

    /// Outcome utility under the state's own tie-break rule; an exact
    /// expectation for random tie-breaking.
    pub fn expected_outcome_utility(&self, u: &UtilityFunction) -> Result<ExactUtility> {
        u.check_len(self.num_candidates())?;
        let v = scaled_value(&self.tallies, self.seats, &self.tiebreak, u);
        Ok(ExactUtility::from_scaled_micros(
            BigInt::from(v.numer),
            BigInt::from(v.denom),
        ))
    }
}

/// Per-candidate win probabilities under uniform random tie-breaking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeDistribution {
    pub win_prob: Vec<Ratio<i64>>,
    pub sure_winners: CandidateSet,
    pub boundary_ties: CandidateSet,
    pub open_seats: usize,
}

impl OutcomeDistribution {
    pub fn expected_utility(&self, u: &UtilityFunction) -> ExactUtility {
        let tied = self.boundary_ties.len().max(1) as i64;
        let numer = tied * u.sum_micros(self.sure_winners)
            + self.open_seats as i64 * u.sum_micros(self.boundary_ties);
        ExactUtility::from_scaled_micros(BigInt::from(numer), BigInt::from(tied))
    }

    pub fn total_probability(&self) -> Ratio<i64> {
        self.win_prob.iter().copied().sum()
    }
}

/// Sure winners, candidates tied at the k-th highest tally, and the seats left
/// for them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Boundary {
    pub sure: CandidateSet,
    pub ties: CandidateSet,
    pub open: usize,
}

impl Boundary {
    pub(crate) fn of(tallies: &[u64], seats: usize) -> Self {
        if seats == 0 {
            return Boundary {
                sure: CandidateSet::EMPTY,
                ties: CandidateSet::EMPTY,
                open: 0,
            };
        }
        let mut sorted = tallies.to_vec();
        sorted.sort_unstable_by_key(|&t| Reverse(t));
        let threshold = sorted[seats - 1];
        let mut sure = CandidateSet::EMPTY;
        let mut ties = CandidateSet::EMPTY;
        for (i, &t) in tallies.iter().enumerate() {
            if t > threshold {
                sure = sure.with(CandidateId(i));
            } else if t == threshold {
                ties = ties.with(CandidateId(i));
            }
        }
        Boundary {
            sure,
            ties,
            open: seats - sure.len(),
        }
    }
}

pub(crate) fn lex_winners(tallies: &[u64], seats: usize, rank: &[usize]) -> CandidateSet {
    let mut order: Vec<usize> = (0..tallies.len()).collect();
    order.sort_unstable_by_key(|&c| (Reverse(tallies[c]), rank[c]));
    CandidateSet::from_indices(order.into_iter().take(seats))
}

/// Outcome utility as the exact fraction `numer / denom` micros.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ScaledValue {
    pub numer: i128,
    pub denom: u32,
}

pub(crate) fn scaled_value(
    tallies: &[u64],
    seats: usize,
    tiebreak: &TieBreak,
    u: &UtilityFunction,
) -> ScaledValue {
    match tiebreak {
        TieBreak::Lexicographic(p) => ScaledValue {
            numer: u.sum_micros(lex_winners(tallies, seats, p.ranks())) as i128,
            denom: 1,
        },
        TieBreak::RandomUniform => {
            let b = Boundary::of(tallies, seats);
            let tied = b.ties.len().max(1) as i128;
            ScaledValue {
                numer: tied * u.sum_micros(b.sure) as i128
                    + b.open as i128 * u.sum_micros(b.ties) as i128,
                denom: tied as u32,
            }
        }
    }
}
