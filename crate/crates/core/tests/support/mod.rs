#![allow(dead_code)]

//! Independent oracles for the integration and acceptance suites.
//!
//! Nothing here shares logic with the library's evaluators: hands are
//! classified straight from the rules, and equities come from a plain
//! double loop over completions.

use iseval_core::cards::{Card, CanonicalHand, Deck};
use iseval_core::equity::{information_set_size, showdown_value, Showdown};
use iseval_core::handrank::{rank5, Category, HandRank};

/// Category counts over all C(52,5) five-card hands, as enumerated and
/// published many times over.
pub const FIVE_CARD_CATEGORY_COUNTS: [(Category, u64); 9] = [
    (Category::HighCard, 1_302_540),
    (Category::Pair, 1_098_240),
    (Category::TwoPair, 123_552),
    (Category::Trips, 54_912),
    (Category::Straight, 10_200),
    (Category::Flush, 5_108),
    (Category::FullHouse, 3_744),
    (Category::Quads, 624),
    (Category::StraightFlush, 40),
];

/// Classify five cards by checking each rule directly: sorted rank
/// multiplicities, an all-same-suit test, and an explicit run test with
/// the ace-low wheel.
pub fn naive_category(cards: &[Card], num_ranks: u8) -> Category {
    assert_eq!(cards.len(), 5);
    let mut ranks: Vec<u8> = cards.iter().map(|c| c.rank()).collect();
    ranks.sort_unstable();

    let flush = cards.iter().all(|c| c.suit() == cards[0].suit());

    let distinct = {
        let mut d = ranks.clone();
        d.dedup();
        d
    };
    let run = distinct.len() == 5 && ranks[4] - ranks[0] == 4;
    let wheel = distinct.len() == 5
        && ranks[4] == num_ranks - 1
        && ranks[0] == 0
        && ranks[3] == 3;
    let straight = run || wheel;

    if flush && straight {
        return Category::StraightFlush;
    }
    if flush {
        return Category::Flush;
    }
    if straight {
        return Category::Straight;
    }
    let mut counts: Vec<usize> = distinct
        .iter()
        .map(|&r| ranks.iter().filter(|&&x| x == r).count())
        .collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    match counts.as_slice() {
        [4, 1] => Category::Quads,
        [3, 2] => Category::FullHouse,
        [3, 1, 1] => Category::Trips,
        [2, 2, 1] => Category::TwoPair,
        [2, 1, 1, 1] => Category::Pair,
        _ => Category::HighCard,
    }
}

/// Best five-card rank among all 21 subsets of seven cards, using the
/// library's five-card ranker. The reduction is the oracle for rank7.
pub fn rank7_by_subsets(cards: &[Card], deck: &Deck) -> HandRank {
    assert_eq!(cards.len(), 7);
    let mut best: Option<HandRank> = None;
    for skip_a in 0..7 {
        for skip_b in (skip_a + 1)..7 {
            let subset: Vec<Card> = cards
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip_a && *i != skip_b)
                .map(|(_, &c)| c)
                .collect();
            let rank = rank5(&subset, deck).expect("valid subset");
            best = Some(match best {
                Some(b) if b >= rank => b,
                _ => rank,
            });
        }
    }
    best.expect("seven cards have subsets")
}

/// Exact equity by brute force: every villain hand against every board,
/// each showdown resolved through the public showdown evaluator.
pub fn naive_exact_equity(hole: CanonicalHand, deck: &Deck) -> f64 {
    let (a, b) = hole.representative();
    let rest: Vec<Card> = deck
        .cards()
        .iter()
        .copied()
        .filter(|c| *c != a && *c != b)
        .collect();
    let m = rest.len();
    let mut half = 0u64;
    let mut count = 0u64;
    for v0 in 0..m {
        for v1 in (v0 + 1)..m {
            let mut pool: Vec<Card> = Vec::with_capacity(m - 2);
            for (i, &c) in rest.iter().enumerate() {
                if i != v0 && i != v1 {
                    pool.push(c);
                }
            }
            let p = pool.len();
            for b0 in 0..p {
                for b1 in (b0 + 1)..p {
                    for b2 in (b1 + 1)..p {
                        for b3 in (b2 + 1)..p {
                            for b4 in (b3 + 1)..p {
                                let showdown = Showdown {
                                    hero: [a, b],
                                    villain: [rest[v0], rest[v1]],
                                    board: [pool[b0], pool[b1], pool[b2], pool[b3], pool[b4]],
                                };
                                let outcome =
                                    showdown_value(&showdown, deck).expect("valid showdown");
                                half += (outcome.value() * 2.0) as u64;
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert_eq!(count, information_set_size(deck));
    half as f64 / (2.0 * count as f64)
}
