//! Multi-winner approval voting from the point of view of a single strategic
//! voter.
//!
//! The focal voter sees the current approval tallies, the number of seats
//! and their own utility for each candidate, and casts the last (or, with
//! uncertainty, not quite last) ballot. This crate evaluates ballots exactly,
//! builds the truthful, take-the-X-best and follow-the-leader ballots, finds
//! best responses by exhaustive search, classifies observed ballots, and
//! sweeps expected utility over the number of voters still to come.

pub mod election;
pub mod error;
pub mod exact;
pub mod scenario;
pub mod strategy;
pub mod uncertainty;

pub use election::{
    outcome_utility, Ballot, CandidateId, CandidateSet, Candidates, ElectionState,
    OutcomeDistribution, Priority, TieBreak, TieRule, UtilityFunction,
};
pub use error::{Error, Result};
pub use exact::{ExactUtility, Probability};
pub use scenario::{builtin, load_scenario, save_scenario, Scenario, BUILTIN_IDS};
pub use strategy::{
    best_response, classify, follow_the_leader, leader_plus_best, take_x_best, truthful,
    truthful_nontrivial, BestResponse, ClassificationResult, Classifier, StrategyKind, XRange,
    NONTRIVIAL_EPSILON,
};
pub use uncertainty::{
    expected_utility, increment_distribution, strategy_panel, sweep, sweep_csv, EnumerationLimits,
    FutureModel, IncrementDistribution, SweepRow,
};
