//! Exact agreement between the engine and the brute-force reference.

mod common;

use approval_heuristics::{
    builtin, expected_utility, CandidateId, CandidateSet, Candidates, ElectionState, FutureModel,
    Priority, Probability, TieBreak, TieRule, UtilityFunction,
};
use common::{brute_expected_utility, outcome_micros, rat, OracleTie};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shuffled(rng: &mut ChaCha8Rng, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    order
}

#[test]
fn builtins_at_half_both_rules() {
    for id in ["s1", "s2", "s3", "s4", "s4-design"] {
        let s = builtin(id).unwrap();
        let rank: Vec<usize> = (0..5).collect();
        for k in [2, 3] {
            for (rule, tie) in [
                (TieRule::Random, OracleTie::Random),
                (TieRule::Lexicographic, OracleTie::Lex(&rank)),
            ] {
                let state = s.state(k, rule).unwrap();
                for r in 0..=1 {
                    let model = FutureModel::new(r, Probability::HALF).unwrap();
                    for mask in 0..32 {
                        let got = expected_utility(
                            &state,
                            CandidateSet::from_mask(mask),
                            s.utilities(),
                            &model,
                        )
                        .unwrap();
                        let want = brute_expected_utility(
                            s.base_tallies(),
                            k,
                            tie,
                            s.utilities().micros(),
                            mask,
                            r,
                            1,
                            2,
                        );
                        assert_eq!(
                            got.as_ratio(),
                            &want,
                            "{id} k={k} {rule:?} r={r} mask={mask}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn random_small_states_varied_p() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let probs = [(0, 1), (1, 3), (1, 4), (2, 3), (3, 5), (1, 1)];
    for _ in 0..60 {
        let m = rng.gen_range(1..=4);
        let tallies: Vec<u64> = (0..m).map(|_| rng.gen_range(0..4)).collect();
        let k = rng.gen_range(0..=m);
        let micros: Vec<i64> = (0..m).map(|_| rng.gen_range(-3..=5) * 50_000).collect();
        let u = UtilityFunction::from_micros(micros.clone());
        let order = shuffled(&mut rng, m);
        let mut rank = vec![0; m];
        for (pos, &c) in order.iter().enumerate() {
            rank[c] = pos;
        }
        let labels: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
        let priority = Priority::new(order.iter().map(|&c| CandidateId(c)).collect(), m).unwrap();
        let lex = ElectionState::new(
            Candidates::new(labels).unwrap(),
            tallies.clone(),
            k,
            TieBreak::Lexicographic(priority),
        )
        .unwrap();
        let random = lex.with_tiebreak(TieBreak::RandomUniform).unwrap();
        let (pn, pd) = probs[rng.gen_range(0..probs.len())];
        let r = rng.gen_range(0..=2);
        let model = FutureModel::new(r, Probability::new(pn, pd).unwrap()).unwrap();
        for mask in 0..(1u64 << m) {
            let ballot = CandidateSet::from_mask(mask);
            for (state, tie) in [(&lex, OracleTie::Lex(&rank)), (&random, OracleTie::Random)] {
                let got = expected_utility(state, ballot, &u, &model).unwrap();
                let want = brute_expected_utility(
                    &tallies, k, tie, &micros, mask, r, pn as i64, pd as i64,
                );
                assert_eq!(
                    got.as_ratio(),
                    &want,
                    "tallies {tallies:?} k={k} r={r} p={pn}/{pd} mask={mask} {tie:?}"
                );
            }
        }
    }
}

#[test]
fn random_outcome_matches_subset_average() {
    // six candidates, no future voters: the closed form against listing every
    // max-score winner set
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let m = rng.gen_range(1..=6);
        let tallies: Vec<u64> = (0..m).map(|_| rng.gen_range(0..3)).collect();
        let k = rng.gen_range(0..=m);
        let micros: Vec<i64> = (0..m)
            .map(|_| rng.gen_range(-1_000_000..=1_000_000))
            .collect();
        let labels: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
        let state = ElectionState::new(
            Candidates::new(labels).unwrap(),
            tallies.clone(),
            k,
            TieBreak::RandomUniform,
        )
        .unwrap();
        let got = state
            .expected_outcome_utility(&UtilityFunction::from_micros(micros.clone()))
            .unwrap();
        let want = outcome_micros(&tallies, k, OracleTie::Random, &micros) / rat(1_000_000, 1);
        assert_eq!(got.as_ratio(), &want, "tallies {tallies:?} k={k}");
    }
}
