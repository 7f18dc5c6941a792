//! Total-order ranking of 5-card and 7-card poker hands.
//!
//! A [`HandRank`] packs the category and up to five tiebreak ranks into a
//! single `u32` key so comparisons in the enumeration hot path are one
//! integer compare. Straight detection adapts to reduced decks: the ace
//! (always the top rank) may play below the deck's lowest rank.

use crate::cards::{Card, Deck, FULL_RANKS, NUM_SUITS};
use crate::{Error, Result};

/// Hand categories in ascending strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Category {
    HighCard = 0,
    Pair = 1,
    TwoPair = 2,
    Trips = 3,
    Straight = 4,
    Flush = 5,
    FullHouse = 6,
    Quads = 7,
    StraightFlush = 8,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::HighCard,
        Category::Pair,
        Category::TwoPair,
        Category::Trips,
        Category::Straight,
        Category::Flush,
        Category::FullHouse,
        Category::Quads,
        Category::StraightFlush,
    ];

    /// Number of tiebreak ranks this category carries.
    fn tiebreak_len(self) -> usize {
        match self {
            Category::HighCard | Category::Flush => 5,
            Category::Pair => 4,
            Category::TwoPair | Category::Trips => 3,
            Category::FullHouse | Category::Quads => 2,
            Category::Straight | Category::StraightFlush => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::HighCard => "HighCard",
            Category::Pair => "Pair",
            Category::TwoPair => "TwoPair",
            Category::Trips => "Trips",
            Category::Straight => "Straight",
            Category::Flush => "Flush",
            Category::FullHouse => "FullHouse",
            Category::Quads => "Quads",
            Category::StraightFlush => "StraightFlush",
        }
    }
}

/// Packed rank of a poker hand: `category << 20 | tiebreak nibbles`,
/// first tiebreak most significant. Identical multisets of ranks in the
/// same category compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HandRank(u32);

impl HandRank {
    pub fn category(self) -> Category {
        match self.0 >> 20 {
            0 => Category::HighCard,
            1 => Category::Pair,
            2 => Category::TwoPair,
            3 => Category::Trips,
            4 => Category::Straight,
            5 => Category::Flush,
            6 => Category::FullHouse,
            7 => Category::Quads,
            _ => Category::StraightFlush,
        }
    }

    /// Tiebreak ranks in order of significance (deck-relative values).
    pub fn tiebreaks(self) -> Vec<u8> {
        let len = self.category().tiebreak_len();
        (0..len)
            .map(|i| ((self.0 >> (16 - 4 * i)) & 0xF) as u8)
            .collect()
    }

    /// Human-readable form, e.g. `StraightFlush [A]` or `FullHouse [K,A]`.
    pub fn describe(self, deck: &Deck) -> String {
        let symbols: Vec<String> = self
            .tiebreaks()
            .iter()
            .map(|&r| deck.rank_char(r).to_string())
            .collect();
        format!("{} [{}]", self.category().name(), symbols.join(","))
    }
}

/// Rank a 5-card hand.
pub fn rank5(cards: &[Card], deck: &Deck) -> Result<HandRank> {
    rank_exact(cards, deck, 5)
}

/// Rank a 7-card hand: the best 5-card hand contained in it.
pub fn rank7(cards: &[Card], deck: &Deck) -> Result<HandRank> {
    rank_exact(cards, deck, 7)
}

fn rank_exact(cards: &[Card], deck: &Deck, expected: usize) -> Result<HandRank> {
    if cards.len() != expected {
        return Err(Error::InvalidInput(format!(
            "expected exactly {expected} cards, got {}",
            cards.len()
        )));
    }
    let mut masks = Masks::default();
    for &card in cards {
        if !deck.contains(card) {
            return Err(Error::InvalidInput(format!(
                "card rank {} out of range for a {}-rank deck",
                card.rank(),
                deck.num_ranks()
            )));
        }
        if masks.suit_sets[card.suit() as usize] & (1 << card.rank()) != 0 {
            return Err(Error::InvalidInput(format!(
                "duplicate card {}",
                deck.format_card(card)
            )));
        }
        masks.add(card.rank(), card.suit());
    }
    Ok(HandRank(eval_key(
        masks.value_set,
        &masks.suit_sets,
        &masks.count_to_value,
        deck.num_ranks(),
    )))
}

/// Mask/histogram state of a partial hand. The equity enumerator keeps one
/// per board and completes it with hole cards incrementally.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Masks {
    pub value_set: u16,
    pub suit_sets: [u16; NUM_SUITS as usize],
    pub counts: [u8; FULL_RANKS as usize],
    /// `count_to_value[c]` = ranks appearing exactly `c` times.
    pub count_to_value: [u16; 5],
}

impl Masks {
    #[inline]
    pub fn add(&mut self, rank: u8, suit: u8) {
        let bit = 1u16 << rank;
        self.value_set |= bit;
        self.suit_sets[suit as usize] |= bit;
        let old = self.counts[rank as usize];
        self.counts[rank as usize] = old + 1;
        if old > 0 {
            self.count_to_value[old as usize] &= !bit;
        }
        self.count_to_value[old as usize + 1] |= bit;
    }

    #[inline]
    pub fn eval(&self, num_ranks: u8) -> u32 {
        eval_key(self.value_set, &self.suit_sets, &self.count_to_value, num_ranks)
    }
}

#[inline]
fn key(cat: Category, tiebreaks: u32) -> u32 {
    ((cat as u32) << 20) | tiebreaks
}

/// Highest rank of any 5-long run in `mask`, with the ace-low wheel as the
/// weakest straight. `None` if no straight.
#[inline]
fn straight_high(mask: u16, num_ranks: u8) -> Option<u8> {
    let run = mask & (mask << 1) & (mask << 2) & (mask << 3) & (mask << 4);
    if run != 0 {
        return Some(15 - run.leading_zeros() as u8);
    }
    let wheel = (1u16 << (num_ranks - 1)) | 0b1111;
    if mask & wheel == wheel {
        // Ace plays low; the straight is headed by the 4th-lowest rank.
        return Some(3);
    }
    None
}

/// Top `n` set bits of `mask` packed as descending nibbles, left-aligned
/// at the most significant tiebreak slot.
#[inline]
fn top_n_nibbles(mask: u16, n: u32) -> u32 {
    let mut out = 0u32;
    let mut m = mask;
    let mut shift = 16;
    for _ in 0..n {
        let top = 15 - m.leading_zeros();
        out |= top << shift;
        m &= !(1 << top);
        shift -= 4;
    }
    out
}

#[inline]
fn highest(mask: u16) -> u32 {
    15 - mask.leading_zeros()
}

/// Core evaluator over mask state; valid for hands of 5, 6 or 7 cards.
pub(crate) fn eval_key(
    value_set: u16,
    suit_sets: &[u16; 4],
    count_to_value: &[u16; 5],
    num_ranks: u8,
) -> u32 {
    // With at most 7 cards a flush excludes quads and full houses, so the
    // best hand is a flush or straight flush whenever one suit has 5+.
    for &suit_set in suit_sets {
        if suit_set.count_ones() >= 5 {
            return match straight_high(suit_set, num_ranks) {
                Some(high) => key(Category::StraightFlush, (high as u32) << 16),
                None => key(Category::Flush, top_n_nibbles(suit_set, 5)),
            };
        }
    }
    let quads = count_to_value[4];
    if quads != 0 {
        let kicker = highest(value_set & !quads);
        return key(Category::Quads, (highest(quads) << 16) | (kicker << 12));
    }
    let trips = count_to_value[3];
    let pairs = count_to_value[2];
    if trips != 0 {
        if trips.count_ones() >= 2 {
            let hi = highest(trips);
            let lo = highest(trips & !(1 << hi));
            return key(Category::FullHouse, (hi << 16) | (lo << 12));
        }
        if pairs != 0 {
            return key(
                Category::FullHouse,
                (highest(trips) << 16) | (highest(pairs) << 12),
            );
        }
    }
    if let Some(high) = straight_high(value_set, num_ranks) {
        return key(Category::Straight, (high as u32) << 16);
    }
    if trips != 0 {
        let kickers = top_n_nibbles(value_set & !trips, 2) >> 4;
        return key(Category::Trips, (highest(trips) << 16) | kickers);
    }
    match pairs.count_ones() {
        0 => key(Category::HighCard, top_n_nibbles(value_set, 5)),
        1 => {
            let kickers = top_n_nibbles(value_set & !pairs, 3) >> 4;
            key(Category::Pair, (highest(pairs) << 16) | kickers)
        }
        _ => {
            let hi = highest(pairs);
            let second = highest(pairs & !(1 << hi));
            let used = (1u16 << hi) | (1 << second);
            let kicker = highest(value_set & !used);
            key(
                Category::TwoPair,
                (hi << 16) | (second << 12) | (kicker << 8),
            )
        }
    }
}
