//! Brute-force reference computations shared by the integration suites.
//!
//! Nothing here goes through the library's evaluation path: future voters are
//! enumerated ballot by ballot, and random tie-breaking is realised by listing
//! every k-subset with maximal approval score.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, Copy, Debug)]
pub enum OracleTie<'a> {
    /// Rank of each candidate, lower wins.
    Lex(&'a [usize]),
    Random,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// All k-subsets of `0..m` (as bitmasks) maximizing the total approval score.
pub fn max_score_subsets(tallies: &[u64], k: usize) -> Vec<u64> {
    let m = tallies.len();
    let mut best = None;
    let mut out = Vec::new();
    for mask in 0u64..(1 << m) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let score: u64 = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| tallies[i])
            .sum();
        match best {
            Some(b) if score < b => {}
            Some(b) if score == b => out.push(mask),
            _ => {
                best = Some(score);
                out = vec![mask];
            }
        }
    }
    out
}

fn utility_of(mask: u64, micros: &[i64]) -> i64 {
    (0..micros.len())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| micros[i])
        .sum()
}

/// Outcome utility in micros, as an exact rational.
pub fn outcome_micros(tallies: &[u64], k: usize, tie: OracleTie, micros: &[i64]) -> BigRational {
    let winners = max_score_subsets(tallies, k);
    match tie {
        OracleTie::Random => {
            let total: i64 = winners.iter().map(|&w| utility_of(w, micros)).sum();
            rat(total, winners.len() as i64)
        }
        OracleTie::Lex(rank) => {
            // the max-score set whose members, listed by priority, come first
            let key = |w: &u64| {
                let mut ranks: Vec<usize> = (0..tallies.len())
                    .filter(|i| w & (1 << i) != 0)
                    .map(|i| rank[i])
                    .collect();
                ranks.sort();
                ranks
            };
            let chosen = winners.iter().min_by_key(|w| key(w)).unwrap();
            rat(utility_of(*chosen, micros), 1)
        }
    }
}

/// Expected utility (in utility units) of casting `ballot` when `r` voters
/// follow, each approving each candidate independently with probability
/// `p_num / p_den`.
#[allow(clippy::too_many_arguments)]
pub fn brute_expected_utility(
    tallies: &[u64],
    k: usize,
    tie: OracleTie,
    micros: &[i64],
    ballot: u64,
    r: u32,
    p_num: i64,
    p_den: i64,
) -> BigRational {
    let m = tallies.len();
    let p = rat(p_num, p_den);
    let q = BigRational::one() - p.clone();
    let ballot_prob: Vec<BigRational> = (0u64..(1 << m))
        .map(|b| {
            let yes = b.count_ones() as i32;
            pow(&p, yes) * pow(&q, m as i32 - yes)
        })
        .collect();

    let mut base = tallies.to_vec();
    for (i, t) in base.iter_mut().enumerate() {
        if ballot & (1 << i) != 0 {
            *t += 1;
        }
    }

    let mut total = BigRational::zero();
    let profiles = 1u64 << (m as u32 * r);
    for profile in 0..profiles {
        let mut t = base.clone();
        let mut prob = BigRational::one();
        for v in 0..r {
            let b = (profile >> (v as usize * m)) & ((1 << m) - 1);
            prob *= &ballot_prob[b as usize];
            for (i, ti) in t.iter_mut().enumerate() {
                if b & (1 << i) != 0 {
                    *ti += 1;
                }
            }
        }
        if prob.is_zero() {
            continue;
        }
        total += prob * outcome_micros(&t, k, tie, micros);
    }
    total / rat(1_000_000, 1)
}

fn pow(x: &BigRational, e: i32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}
