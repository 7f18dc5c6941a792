//! The perfect-information evaluator and its information-set aggregates:
//! showdown outcomes, exact heads-up preflop equity, k-sample Monte Carlo
//! estimates, and estimator-error profiling.
//!
//! Exact enumeration comes in two forms. [`exact_equity`] enumerates the
//! information set of a single hole class, canonicalizing boards under the
//! suit permutations that stabilize the hole cards.
//! [`EquityTable::enumerate_exact`] computes all hole classes in one
//! board-major pass: boards are canonicalized under the full suit group
//! and, per board, every remaining two-card combination is ranked once,
//! with win/tie counts against disjoint opponents recovered by
//! inclusion-exclusion. Both routes accumulate outcomes in integer
//! half-points, so results are bit-identical under any parallel schedule,
//! and both are gated in tests by a plain double-loop enumerator on
//! reduced decks.

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

use crate::cards::{canonicalize, Card, CanonicalHand, Deck};
use crate::handrank::Masks;
use crate::rng::{derive_seed, stream_rng, tag};
use crate::{Error, Result};

/// Result of one showdown from the hero's perspective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Loss,
    Tie,
    Win,
}

impl Outcome {
    pub fn value(self) -> f64 {
        match self {
            Outcome::Loss => 0.0,
            Outcome::Tie => 0.5,
            Outcome::Win => 1.0,
        }
    }

    /// Outcomes are multiples of one half, so sums stay exact in integers.
    #[inline]
    pub(crate) fn half_points(self) -> u64 {
        match self {
            Outcome::Loss => 0,
            Outcome::Tie => 1,
            Outcome::Win => 2,
        }
    }

    #[inline]
    fn from_keys(hero: u32, villain: u32) -> Outcome {
        match hero.cmp(&villain) {
            std::cmp::Ordering::Greater => Outcome::Win,
            std::cmp::Ordering::Equal => Outcome::Tie,
            std::cmp::Ordering::Less => Outcome::Loss,
        }
    }
}

/// One fully-determined deal: the hero's view joined with one hidden
/// completion.
#[derive(Debug, Clone, Copy)]
pub struct Showdown {
    pub hero: [Card; 2],
    pub villain: [Card; 2],
    pub board: [Card; 5],
}

impl Showdown {
    fn validate(&self, deck: &Deck) -> Result<()> {
        let mut seen = [false; 52];
        for card in self
            .hero
            .iter()
            .chain(self.villain.iter())
            .chain(self.board.iter())
        {
            if !deck.contains(*card) {
                return Err(Error::InvalidInput(format!(
                    "card rank {} out of range for a {}-rank deck",
                    card.rank(),
                    deck.num_ranks()
                )));
            }
            let idx = card.index();
            if seen[idx] {
                return Err(Error::InvalidInput(format!(
                    "card {} appears twice in showdown",
                    deck.format_card(*card)
                )));
            }
            seen[idx] = true;
        }
        Ok(())
    }
}

/// 1 if the hero's best seven-card hand beats the villain's, 0 if it
/// loses, 0.5 on equal ranks.
pub fn showdown_value(showdown: &Showdown, deck: &Deck) -> Result<Outcome> {
    showdown.validate(deck)?;
    let board = BoardEval::new(&showdown.board, deck.num_ranks());
    let hero = board.rank_two(showdown.hero[0], showdown.hero[1]);
    let villain = board.rank_two(showdown.villain[0], showdown.villain[1]);
    Ok(Outcome::from_keys(hero, villain))
}

/// An information-set mean: exact (full enumeration) or a k-sample Monte
/// Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquityEstimate {
    pub mean: f64,
    pub samples_used: u64,
    pub exact: bool,
}

/// Board state primed for ranking two-card completions.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BoardEval {
    masks: Masks,
    num_ranks: u8,
}

impl BoardEval {
    pub fn new(board: &[Card], num_ranks: u8) -> BoardEval {
        let mut masks = Masks::default();
        for card in board {
            masks.add(card.rank(), card.suit());
        }
        BoardEval { masks, num_ranks }
    }

    /// Rank of `board + {a, b}` as a packed key.
    #[inline]
    pub fn rank_two(&self, a: Card, b: Card) -> u32 {
        let mut masks = self.masks;
        masks.add(a.rank(), a.suit());
        masks.add(b.rank(), b.suit());
        masks.eval(self.num_ranks)
    }
}

/// Number of completions (villain hand + board) behind one hole hand.
pub fn information_set_size(deck: &Deck) -> u64 {
    let n = deck.size() as u64;
    choose(n - 2, 2) * choose(n - 4, 5)
}

pub(crate) fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut num = 1u64;
    for i in 0..k {
        num = num * (n - i) / (i + 1);
    }
    num
}

/// All 24 permutations of the four suits.
fn suit_permutations() -> Vec<[u8; 4]> {
    let mut perms = Vec::with_capacity(24);
    let mut suits = [0u8, 1, 2, 3];
    permute(&mut suits, 4, &mut perms);
    perms
}

fn permute(arr: &mut [u8; 4], k: usize, out: &mut Vec<[u8; 4]>) {
    if k == 1 {
        out.push(*arr);
        return;
    }
    for i in 0..k {
        permute(arr, k - 1, out);
        if k.is_multiple_of(2) {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}

/// Suit permutations that map the hole-card set onto itself.
fn suit_stabilizer(hole: (Card, Card)) -> Vec<[u8; 4]> {
    suit_permutations()
        .into_iter()
        .filter(|perm| {
            let a = (hole.0.rank(), perm[hole.0.suit() as usize]);
            let b = (hole.1.rank(), perm[hole.1.suit() as usize]);
            let orig_a = (hole.0.rank(), hole.0.suit());
            let orig_b = (hole.1.rank(), hole.1.suit());
            (a == orig_a && b == orig_b) || (a == orig_b && b == orig_a)
        })
        .collect()
}

#[inline]
fn card_id(card: Card) -> u8 {
    card.index() as u8
}

#[inline]
fn sort5(v: &mut [u8; 5]) {
    for i in 1..5 {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
}

/// If `board` (sorted card ids) is the lexicographic minimum of its orbit
/// under `perms`, return the orbit size; otherwise `None`.
fn canonical_board_weight(board: &[u8; 5], perms: &[[u8; 4]]) -> Option<u64> {
    let mut images = [[0u8; 5]; 24];
    let mut count = 0;
    for perm in perms {
        let mut image = [0u8; 5];
        for (dst, &id) in image.iter_mut().zip(board.iter()) {
            *dst = (id & !3) | perm[(id & 3) as usize];
        }
        sort5(&mut image);
        if image < *board {
            return None;
        }
        images[count] = image;
        count += 1;
    }
    let images = &mut images[..count];
    images.sort_unstable();
    let mut distinct = 1u64;
    for i in 1..images.len() {
        if images[i] != images[i - 1] {
            distinct += 1;
        }
    }
    Some(distinct)
}

/// Exact information-set mean for one hole class: the average showdown
/// outcome over every arrangement of two villain cards and five board
/// cards drawn from the rest of the deck.
///
/// Boards are enumerated up to the suit symmetries that fix the hole
/// cards (a factor of 6 for suited hands, 4 for pairs, 2 offsuit), and
/// each representative board's villain loop ranks completions
/// incrementally from the shared board state.
pub fn exact_equity(hole: CanonicalHand, deck: &Deck) -> Result<EquityEstimate> {
    let (a, b) = checked_representative(hole, deck)?;
    let stabilizer = suit_stabilizer((a, b));
    let rest: Vec<Card> = deck
        .cards()
        .iter()
        .copied()
        .filter(|c| *c != a && *c != b)
        .collect();
    let num_ranks = deck.num_ranks();
    let m = rest.len();

    let (half, completions) = (0..m)
        .into_par_iter()
        .map(|i0| {
            let mut half = 0u64;
            let mut completions = 0u64;
            let mut villains: Vec<Card> = Vec::with_capacity(m - 5);
            for i1 in (i0 + 1)..m {
                for i2 in (i1 + 1)..m {
                    for i3 in (i2 + 1)..m {
                        for i4 in (i3 + 1)..m {
                            let ids = [
                                card_id(rest[i0]),
                                card_id(rest[i1]),
                                card_id(rest[i2]),
                                card_id(rest[i3]),
                                card_id(rest[i4]),
                            ];
                            let Some(weight) = canonical_board_weight(&ids, &stabilizer) else {
                                continue;
                            };
                            let board = [rest[i0], rest[i1], rest[i2], rest[i3], rest[i4]];
                            let eval = BoardEval::new(&board, num_ranks);
                            let hero_key = eval.rank_two(a, b);
                            villains.clear();
                            let picked = [i0, i1, i2, i3, i4];
                            for (i, &card) in rest.iter().enumerate() {
                                if !picked.contains(&i) {
                                    villains.push(card);
                                }
                            }
                            let mut board_half = 0u64;
                            for (i, &va) in villains.iter().enumerate() {
                                for &vb in &villains[i + 1..] {
                                    let villain_key = eval.rank_two(va, vb);
                                    board_half += if hero_key > villain_key {
                                        2
                                    } else if hero_key == villain_key {
                                        1
                                    } else {
                                        0
                                    };
                                }
                            }
                            let pairs = (villains.len() * (villains.len() - 1) / 2) as u64;
                            half += weight * board_half;
                            completions += weight * pairs;
                        }
                    }
                }
            }
            (half, completions)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));

    assert_eq!(completions, information_set_size(deck));
    Ok(EquityEstimate {
        mean: half as f64 / (2.0 * completions as f64),
        samples_used: completions,
        exact: true,
    })
}

fn checked_representative(hole: CanonicalHand, deck: &Deck) -> Result<(Card, Card)> {
    if deck.size() < 9 {
        return Err(Error::InvalidInput(format!(
            "deck of {} cards cannot host a 9-card showdown",
            deck.size()
        )));
    }
    if hole.high() >= deck.num_ranks() {
        return Err(Error::InvalidInput(format!(
            "hand rank {} out of range for a {}-rank deck",
            hole.high(),
            deck.num_ranks()
        )));
    }
    Ok(hole.representative())
}

/// Draw one uniform completion (villain hand + board) from `rest` and
/// return the hero's outcome. `rest` must hold the deck minus the hero's
/// hole cards; its order is scrambled by the draw.
pub(crate) fn sample_outcome<R: Rng + ?Sized>(
    hero: (Card, Card),
    rest: &mut [Card],
    num_ranks: u8,
    rng: &mut R,
) -> Outcome {
    debug_assert!(rest.len() >= 7);
    for i in 0..7 {
        let j = rng.gen_range(i..rest.len());
        rest.swap(i, j);
    }
    let eval = BoardEval::new(&rest[2..7], num_ranks);
    let hero_key = eval.rank_two(hero.0, hero.1);
    let villain_key = eval.rank_two(rest[0], rest[1]);
    Outcome::from_keys(hero_key, villain_key)
}

/// Unbiased k-sample Monte Carlo estimate of a hole class's equity.
/// Completions are drawn independently (cards distinct within each
/// completion, duplicate completions across samples possible); each
/// sample owns a counter-derived RNG stream, so the estimate is
/// reproducible for a given seed regardless of parallelism.
pub fn mc_equity(hole: CanonicalHand, k: u64, deck: &Deck, seed: u64) -> Result<EquityEstimate> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".to_string()));
    }
    let (a, b) = checked_representative(hole, deck)?;
    let rest: Vec<Card> = deck
        .cards()
        .iter()
        .copied()
        .filter(|c| *c != a && *c != b)
        .collect();
    let num_ranks = deck.num_ranks();
    let half: u64 = if k >= 65_536 {
        (0..k)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, tag::MC_TRIAL, i);
                let mut scratch = rest.clone();
                sample_outcome((a, b), &mut scratch, num_ranks, &mut rng).half_points()
            })
            .sum()
    } else {
        let mut scratch = rest.clone();
        (0..k)
            .map(|i| {
                let mut rng = stream_rng(seed, tag::MC_TRIAL, i);
                sample_outcome((a, b), &mut scratch, num_ranks, &mut rng).half_points()
            })
            .sum()
    };
    Ok(EquityEstimate {
        mean: half as f64 / (2.0 * k as f64),
        samples_used: k,
        exact: false,
    })
}

/// One canonical hand's row in an equity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquityEntry {
    pub equity: f64,
    pub exact: bool,
    pub samples: u64,
}

/// Ground-truth equity per canonical hand; the golden-file format is CSV
/// with header `hand,equity,exact,samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquityTable {
    num_ranks: u8,
    entries: Vec<Option<EquityEntry>>,
}

impl EquityTable {
    pub fn new(num_ranks: u8) -> EquityTable {
        let classes = num_ranks as usize * num_ranks as usize;
        EquityTable {
            num_ranks,
            entries: vec![None; classes],
        }
    }

    pub fn num_ranks(&self) -> u8 {
        self.num_ranks
    }

    pub fn set(&mut self, hand: CanonicalHand, entry: EquityEntry) {
        let idx = hand.index(self.num_ranks);
        self.entries[idx] = Some(entry);
    }

    pub fn get(&self, hand: CanonicalHand) -> Option<&EquityEntry> {
        self.entries[hand.index(self.num_ranks)].as_ref()
    }

    pub fn get_index(&self, index: usize) -> Option<&EquityEntry> {
        self.entries.get(index).and_then(|e| e.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact table for every hole class in one board-major pass.
    pub fn enumerate_exact(deck: &Deck) -> EquityTable {
        let n = deck.size();
        let num_ranks = deck.num_ranks();
        let classes = deck.num_canonical_hands();
        let perms = suit_permutations();

        // Card-pair -> canonical class, precomputed once.
        let mut class_of = vec![0u16; n * n];
        for (a, b) in deck.hole_pairs() {
            let class = canonicalize(a, b).expect("distinct cards").index(num_ranks) as u16;
            class_of[a.index() * n + b.index()] = class;
            class_of[b.index() * n + a.index()] = class;
        }

        let cards = deck.cards().to_vec();
        let (half, completions) = (0..n)
            .into_par_iter()
            .map(|i0| {
                let mut half = vec![0u64; classes];
                let mut completions = vec![0u64; classes];
                let mut scratch = TableScratch::new(n - 5);
                for i1 in (i0 + 1)..n {
                    for i2 in (i1 + 1)..n {
                        for i3 in (i2 + 1)..n {
                            for i4 in (i3 + 1)..n {
                                let ids = [
                                    card_id(cards[i0]),
                                    card_id(cards[i1]),
                                    card_id(cards[i2]),
                                    card_id(cards[i3]),
                                    card_id(cards[i4]),
                                ];
                                let Some(weight) = canonical_board_weight(&ids, &perms) else {
                                    continue;
                                };
                                let board =
                                    [cards[i0], cards[i1], cards[i2], cards[i3], cards[i4]];
                                let picked = [i0, i1, i2, i3, i4];
                                scratch.rest.clear();
                                for (i, &card) in cards.iter().enumerate() {
                                    if !picked.contains(&i) {
                                        scratch.rest.push(card);
                                    }
                                }
                                accumulate_board(
                                    &board,
                                    weight,
                                    num_ranks,
                                    &class_of,
                                    n,
                                    &mut scratch,
                                    &mut half,
                                    &mut completions,
                                );
                            }
                        }
                    }
                }
                (half, completions)
            })
            .reduce(
                || (vec![0u64; classes], vec![0u64; classes]),
                |(mut ha, mut ca), (hb, cb)| {
                    for (x, y) in ha.iter_mut().zip(hb) {
                        *x += y;
                    }
                    for (x, y) in ca.iter_mut().zip(cb) {
                        *x += y;
                    }
                    (ha, ca)
                },
            );

        // Every class must have seen its full information set, and the
        // whole table must be zero-sum.
        let set_size = information_set_size(deck);
        let mut table = EquityTable::new(num_ranks);
        let mut total_half = 0u64;
        let mut total_completions = 0u64;
        for idx in 0..classes {
            let hand = CanonicalHand::from_index(idx, num_ranks).expect("index in range");
            assert_eq!(
                completions[idx],
                hand.class_size() as u64 * set_size,
                "enumeration undercounted class {idx}"
            );
            total_half += half[idx];
            total_completions += completions[idx];
            table.set(
                hand,
                EquityEntry {
                    equity: half[idx] as f64 / (2.0 * completions[idx] as f64),
                    exact: true,
                    samples: set_size,
                },
            );
        }
        assert_eq!(total_half, total_completions, "table is not zero-sum");
        table
    }

    /// Monte Carlo table: `samples` completions per canonical hand.
    pub fn monte_carlo(deck: &Deck, samples: u64, seed: u64) -> Result<EquityTable> {
        let num_ranks = deck.num_ranks();
        let classes = deck.num_canonical_hands();
        let entries: Vec<(usize, EquityEstimate)> = (0..classes)
            .into_par_iter()
            .map(|idx| {
                let hand = CanonicalHand::from_index(idx, num_ranks).expect("index in range");
                let estimate = mc_equity(hand, samples, deck, derive_seed(seed, tag::MC_TRIAL, idx as u64))
                    .expect("valid hand and deck");
                (idx, estimate)
            })
            .collect();
        let mut table = EquityTable::new(num_ranks);
        for (idx, estimate) in entries {
            table.set(
                CanonicalHand::from_index(idx, num_ranks).expect("index in range"),
                EquityEntry {
                    equity: estimate.mean,
                    exact: false,
                    samples: estimate.samples_used,
                },
            );
        }
        Ok(table)
    }

    /// CSV form, rows in canonical index order, equities printed with 9
    /// decimal digits.
    pub fn to_csv_string(&self, deck: &Deck) -> String {
        let mut out = String::from("hand,equity,exact,samples\n");
        for (idx, entry) in self.entries.iter().enumerate() {
            let Some(entry) = entry else { continue };
            let hand = CanonicalHand::from_index(idx, self.num_ranks).expect("index in range");
            out.push_str(&format!(
                "{},{:.9},{},{}\n",
                hand.code(deck),
                entry.equity,
                entry.exact,
                entry.samples
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path, deck: &Deck) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv_string(deck).as_bytes())?;
        Ok(())
    }

    pub fn from_csv_str(text: &str, deck: &Deck) -> Result<EquityTable> {
        let mut lines = text.lines();
        match lines.next() {
            Some("hand,equity,exact,samples") => {}
            other => {
                return Err(Error::Parse(format!(
                    "bad equity table header: {:?}",
                    other.unwrap_or("<empty>")
                )))
            }
        }
        let mut table = EquityTable::new(deck.num_ranks());
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "equity table line {}: expected 4 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let hand = CanonicalHand::parse(fields[0], deck)?;
            let equity: f64 = fields[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad equity '{}'", fields[1])))?;
            let exact: bool = fields[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exact flag '{}'", fields[2])))?;
            let samples: u64 = fields[3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad sample count '{}'", fields[3])))?;
            table.set(
                hand,
                EquityEntry {
                    equity,
                    exact,
                    samples,
                },
            );
        }
        Ok(table)
    }

    pub fn read_csv(path: &Path, deck: &Deck) -> Result<EquityTable> {
        let text = std::fs::read_to_string(path)?;
        EquityTable::from_csv_str(&text, deck)
    }

    /// Content hash of the CSV serialization (hex SHA-256), recorded by
    /// dataset sidecars to pin the table version they validated against.
    pub fn content_hash(&self, deck: &Deck) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_csv_string(deck).as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

/// Per-board scratch buffers for the board-major enumerator.
struct TableScratch {
    rest: Vec<Card>,
    keys: Vec<u32>,
    sorted_keys: Vec<u32>,
    /// Per-card sorted key lists, one fixed-size slot per remaining card.
    card_lists: Vec<u32>,
    card_fill: Vec<usize>,
}

impl TableScratch {
    fn new(rest_len: usize) -> TableScratch {
        let pairs = rest_len * (rest_len - 1) / 2;
        TableScratch {
            rest: Vec::with_capacity(rest_len),
            keys: vec![0; pairs],
            sorted_keys: vec![0; pairs],
            card_lists: vec![0; rest_len * (rest_len - 1)],
            card_fill: vec![0; rest_len],
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn accumulate_board(
    board: &[Card; 5],
    weight: u64,
    num_ranks: u8,
    class_of: &[u16],
    deck_size: usize,
    scratch: &mut TableScratch,
    half: &mut [u64],
    completions: &mut [u64],
) {
    let eval = BoardEval::new(board, num_ranks);
    let m = scratch.rest.len();
    let per_card = m - 1;
    scratch.card_fill.iter_mut().for_each(|f| *f = 0);

    let mut p = 0;
    for i in 0..m {
        for j in (i + 1)..m {
            let key = eval.rank_two(scratch.rest[i], scratch.rest[j]);
            scratch.keys[p] = key;
            scratch.card_lists[i * per_card + scratch.card_fill[i]] = key;
            scratch.card_lists[j * per_card + scratch.card_fill[j]] = key;
            scratch.card_fill[i] += 1;
            scratch.card_fill[j] += 1;
            p += 1;
        }
    }
    scratch.sorted_keys.copy_from_slice(&scratch.keys);
    scratch.sorted_keys.sort_unstable();
    for i in 0..m {
        scratch.card_lists[i * per_card..(i + 1) * per_card].sort_unstable();
    }

    let villain_pairs = ((m - 2) * (m - 3) / 2) as u64;
    let mut p = 0;
    for i in 0..m {
        for j in (i + 1)..m {
            let key = scratch.keys[p];
            p += 1;
            let (below_all, equal_all) = count_below_equal(&scratch.sorted_keys, key);
            let (below_i, equal_i) =
                count_below_equal(&scratch.card_lists[i * per_card..(i + 1) * per_card], key);
            let (below_j, equal_j) =
                count_below_equal(&scratch.card_lists[j * per_card..(j + 1) * per_card], key);
            // Inclusion-exclusion down to villains sharing no card with
            // (i, j); the pair itself sits in both equal counts, hence +1.
            let wins = below_all - below_i - below_j;
            let ties = equal_all + 1 - equal_i - equal_j;
            debug_assert!((wins + ties) as u64 <= villain_pairs);
            let class =
                class_of[scratch.rest[i].index() * deck_size + scratch.rest[j].index()] as usize;
            half[class] += weight * (2 * wins as u64 + ties as u64);
            completions[class] += weight * villain_pairs;
        }
    }
}

/// (#entries < key, #entries == key) in a sorted slice.
#[inline]
fn count_below_equal(sorted: &[u32], key: u32) -> (usize, usize) {
    let below = sorted.partition_point(|&k| k < key);
    let upto = sorted.partition_point(|&k| k <= key);
    (below, upto - below)
}

/// Estimator-error profile: distribution of |estimate - truth| per sample
/// count, aggregated across holes and trials.
#[derive(Debug, Clone)]
pub struct ErrorProfile {
    pub bin_width: f64,
    pub rows: Vec<ErrorProfileRow>,
}

#[derive(Debug, Clone)]
pub struct ErrorProfileRow {
    pub k: u64,
    pub trials: u64,
    pub mean_abs_error: f64,
    /// Counts of |error| per bin of `bin_width`, last bin closed at 1.
    pub histogram: Vec<u64>,
}

impl ErrorProfile {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("k,trials,mae,bin_lo,bin_hi,count\n");
        for row in &self.rows {
            for (b, &count) in row.histogram.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{:.9},{:.3},{:.3},{}\n",
                    row.k,
                    row.trials,
                    row.mean_abs_error,
                    b as f64 * self.bin_width,
                    (b + 1) as f64 * self.bin_width,
                    count
                ));
            }
        }
        out
    }
}

/// Measure |estimate - truth| over `trials` independent k-sample estimates
/// for each hole and each k. Exact equities come from `truth`, which must
/// cover every listed hole.
pub fn error_profile(
    holes: &[CanonicalHand],
    ks: &[u64],
    trials: u64,
    deck: &Deck,
    truth: &EquityTable,
    seed: u64,
    bins: usize,
) -> Result<ErrorProfile> {
    if holes.is_empty() || ks.is_empty() || trials == 0 || bins == 0 {
        return Err(Error::InvalidInput(
            "error profile needs holes, ks, trials and bins".to_string(),
        ));
    }
    let exact: Vec<f64> = holes
        .iter()
        .map(|&h| {
            truth.get(h).map(|e| e.equity).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no ground truth for hole class index {}",
                    h.index(deck.num_ranks())
                ))
            })
        })
        .collect::<Result<_>>()?;
    let bin_width = 1.0 / bins as f64;
    let mut rows = Vec::with_capacity(ks.len());
    for (ki, &k) in ks.iter().enumerate() {
        // One error slot per (hole, trial), filled in place so the final
        // sum is order-independent.
        let mut errors = vec![0.0f64; holes.len() * trials as usize];
        errors
            .par_chunks_mut(trials as usize)
            .enumerate()
            .for_each(|(hi, chunk)| {
                let hole = holes[hi];
                let truth = exact[hi];
                for (t, slot) in chunk.iter_mut().enumerate() {
                    let trial_seed = derive_seed(
                        seed,
                        tag::MC_TRIAL,
                        (((ki * holes.len() + hi) as u64) << 32) | t as u64,
                    );
                    let estimate = mc_equity(hole, k, deck, trial_seed).expect("validated inputs");
                    *slot = (estimate.mean - truth).abs();
                }
            });
        let mut histogram = vec![0u64; bins];
        let mut total = 0.0f64;
        for &err in &errors {
            total += err;
            let bin = ((err / bin_width) as usize).min(bins - 1);
            histogram[bin] += 1;
        }
        rows.push(ErrorProfileRow {
            k,
            trials: trials * holes.len() as u64,
            mean_abs_error: total / errors.len() as f64,
            histogram,
        });
    }
    Ok(ErrorProfile { bin_width, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;
    use crate::handrank::rank7;

    fn showdown(hero: &str, villain: &str, board: &str) -> Showdown {
        let h = parse_cards(hero).unwrap();
        let v = parse_cards(villain).unwrap();
        let b = parse_cards(board).unwrap();
        Showdown {
            hero: [h[0], h[1]],
            villain: [v[0], v[1]],
            board: [b[0], b[1], b[2], b[3], b[4]],
        }
    }

    #[test]
    fn showdown_examples() {
        let deck = Deck::full();
        let aces_up = showdown("AsAh", "KsKh", "2d7c9sJd3c");
        assert_eq!(showdown_value(&aces_up, &deck).unwrap(), Outcome::Win);

        let split = showdown("AsKd", "AcKh", "2d7c9sJd3c");
        assert_eq!(showdown_value(&split, &deck).unwrap(), Outcome::Tie);
    }

    #[test]
    fn showdown_is_antisymmetric() {
        let deck = Deck::full();
        let mut rng = stream_rng(3, tag::MC_TRIAL, 0);
        let mut cards = deck.cards().to_vec();
        for _ in 0..200 {
            for i in 0..9 {
                let j = rng.gen_range(i..cards.len());
                cards.swap(i, j);
            }
            let fwd = Showdown {
                hero: [cards[0], cards[1]],
                villain: [cards[2], cards[3]],
                board: [cards[4], cards[5], cards[6], cards[7], cards[8]],
            };
            let rev = Showdown {
                hero: fwd.villain,
                villain: fwd.hero,
                board: fwd.board,
            };
            let a = showdown_value(&fwd, &deck).unwrap().value();
            let b = showdown_value(&rev, &deck).unwrap().value();
            assert_eq!(a + b, 1.0);
        }
    }

    #[test]
    fn showdown_rejects_collisions() {
        let deck = Deck::full();
        let bad = showdown("AsAh", "AsKh", "2d7c9sJd3c");
        assert!(showdown_value(&bad, &deck).is_err());
    }

    #[test]
    fn showdown_agrees_with_rank7() {
        let deck = Deck::full();
        let s = showdown("AsAh", "KsKh", "2d7c9sJd3c");
        let mut hero = s.hero.to_vec();
        hero.extend_from_slice(&s.board);
        let mut villain = s.villain.to_vec();
        villain.extend_from_slice(&s.board);
        let hr = rank7(&hero, &deck).unwrap();
        let vr = rank7(&villain, &deck).unwrap();
        assert!(hr > vr);
    }

    /// Plain double loop over all villain hands and boards; no symmetry,
    /// no incremental evaluation. The correctness gate for the optimized
    /// enumerators on reduced decks.
    fn naive_exact_equity(hole: CanonicalHand, deck: &Deck) -> f64 {
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
                                    let s = Showdown {
                                        hero: [a, b],
                                        villain: [rest[v0], rest[v1]],
                                        board: [
                                            pool[b0], pool[b1], pool[b2], pool[b3], pool[b4],
                                        ],
                                    };
                                    half += showdown_value(&s, deck).unwrap().half_points();
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

    #[test]
    fn exact_equity_matches_naive_oracle_on_reduced_deck() {
        let deck = Deck::with_ranks(5).unwrap();
        // One class per shape: pair, suited, offsuit.
        for code in ["AA", "AKs", "QJo"] {
            let hole = CanonicalHand::parse(code, &deck).unwrap();
            let fast = exact_equity(hole, &deck).unwrap();
            let naive = naive_exact_equity(hole, &deck);
            assert_eq!(fast.mean, naive, "hole {code}");
            assert!(fast.exact);
            assert_eq!(fast.samples_used, information_set_size(&deck));
        }
    }

    #[test]
    fn board_major_table_matches_hole_major_on_reduced_deck() {
        let deck = Deck::with_ranks(5).unwrap();
        let table = EquityTable::enumerate_exact(&deck);
        for idx in 0..deck.num_canonical_hands() {
            let hand = CanonicalHand::from_index(idx, deck.num_ranks()).unwrap();
            let single = exact_equity(hand, &deck).unwrap();
            let entry = table.get(hand).unwrap();
            assert_eq!(entry.equity, single.mean, "hand {}", hand.code(&deck));
            assert!(entry.exact);
        }
    }

    #[test]
    fn table_is_zero_sum() {
        let deck = Deck::with_ranks(5).unwrap();
        let table = EquityTable::enumerate_exact(&deck);
        let mut weighted = 0.0;
        let mut total = 0u32;
        for idx in 0..deck.num_canonical_hands() {
            let hand = CanonicalHand::from_index(idx, deck.num_ranks()).unwrap();
            weighted += hand.class_size() as f64 * table.get(hand).unwrap().equity;
            total += hand.class_size();
        }
        assert_eq!(total as usize, deck.size() * (deck.size() - 1) / 2);
        assert!((weighted / total as f64 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mc_equity_k1_lands_on_outcome_values() {
        let deck = Deck::full();
        let hole = CanonicalHand::parse("AA", &deck).unwrap();
        for seed in 0..50 {
            let estimate = mc_equity(hole, 1, &deck, seed).unwrap();
            assert!(
                [0.0, 0.5, 1.0].contains(&estimate.mean),
                "got {}",
                estimate.mean
            );
            assert!(!estimate.exact);
            assert_eq!(estimate.samples_used, 1);
        }
    }

    #[test]
    fn mc_equity_is_deterministic() {
        let deck = Deck::full();
        let hole = CanonicalHand::parse("T9o", &deck).unwrap();
        let a = mc_equity(hole, 1000, &deck, 77).unwrap();
        let b = mc_equity(hole, 1000, &deck, 77).unwrap();
        assert_eq!(a.mean, b.mean);
    }

    #[test]
    fn mc_parallel_path_matches_sequential_streams() {
        // The parallel cutoff must not change results: both paths use the
        // same counter-derived per-sample streams.
        let deck = Deck::with_ranks(5).unwrap();
        let hole = CanonicalHand::parse("AA", &deck).unwrap();
        let parallel = mc_equity(hole, 70_000, &deck, 5).unwrap();
        let (a, b) = hole.representative();
        let rest: Vec<Card> = deck
            .cards()
            .iter()
            .copied()
            .filter(|c| *c != a && *c != b)
            .collect();
        let mut half = 0u64;
        for i in 0..70_000u64 {
            let mut rng = stream_rng(5, tag::MC_TRIAL, i);
            let mut scratch = rest.clone();
            half += sample_outcome((a, b), &mut scratch, deck.num_ranks(), &mut rng).half_points();
        }
        assert_eq!(parallel.mean, half as f64 / 140_000.0);
    }

    #[test]
    fn mc_equity_converges_to_exact() {
        let deck = Deck::with_ranks(5).unwrap();
        let hole = CanonicalHand::parse("AA", &deck).unwrap();
        let exact = exact_equity(hole, &deck).unwrap().mean;
        let estimate = mc_equity(hole, 200_000, &deck, 9).unwrap();
        // SE at 200k samples is about 0.001; allow well over 4 sigma.
        assert!(
            (estimate.mean - exact).abs() < 0.005,
            "estimate {} vs exact {}",
            estimate.mean,
            exact
        );
    }

    #[test]
    fn error_profile_k1_errors_take_three_values() {
        let deck = Deck::with_ranks(5).unwrap();
        let table = EquityTable::enumerate_exact(&deck);
        let hole = CanonicalHand::parse("KQs", &deck).unwrap();
        let p = table.get(hole).unwrap().equity;
        let profile = error_profile(&[hole], &[1], 500, &deck, &table, 5, 50).unwrap();
        let row = &profile.rows[0];
        assert_eq!(row.trials, 500);
        let allowed = [p, (p - 0.5).abs(), 1.0 - p];
        let occupied: Vec<usize> = row
            .histogram
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(b, _)| b)
            .collect();
        assert!(occupied.len() <= 3);
        for bin in occupied {
            let lo = bin as f64 * profile.bin_width;
            let hi = (bin + 1) as f64 * profile.bin_width;
            assert!(
                allowed.iter().any(|&a| a >= lo && a < hi + 1e-12),
                "bin [{lo},{hi}) holds none of {allowed:?}"
            );
        }
    }

    #[test]
    fn error_profile_mae_shrinks_with_k() {
        let deck = Deck::with_ranks(5).unwrap();
        let table = EquityTable::enumerate_exact(&deck);
        let holes = [
            CanonicalHand::parse("AA", &deck).unwrap(),
            CanonicalHand::parse("JTs", &deck).unwrap(),
        ];
        let profile = error_profile(&holes, &[1, 4, 16], 2000, &deck, &table, 21, 50).unwrap();
        assert!(profile.rows[0].mean_abs_error > profile.rows[1].mean_abs_error);
        assert!(profile.rows[1].mean_abs_error > profile.rows[2].mean_abs_error);
    }

    #[test]
    fn equity_table_csv_round_trips() {
        let deck = Deck::with_ranks(5).unwrap();
        let table = EquityTable::enumerate_exact(&deck);
        let csv = table.to_csv_string(&deck);
        assert!(csv.starts_with("hand,equity,exact,samples\n"));
        let reparsed = EquityTable::from_csv_str(&csv, &deck).unwrap();
        // 9 decimal digits are not lossless, but re-serializing must be.
        assert_eq!(reparsed.to_csv_string(&deck), csv);
        assert_eq!(reparsed.content_hash(&deck), table.content_hash(&deck));
        assert_eq!(reparsed.len(), deck.num_canonical_hands());
    }

    #[test]
    fn equity_table_rejects_bad_input() {
        let deck = Deck::full();
        assert!(EquityTable::from_csv_str("wrong,header\n", &deck).is_err());
        assert!(
            EquityTable::from_csv_str("hand,equity,exact,samples\nAA,x,true,1\n", &deck).is_err()
        );
        assert!(EquityTable::from_csv_str("hand,equity,exact,samples\nAA,0.5\n", &deck).is_err());
    }

    #[test]
    fn information_set_size_matches_hand_counting() {
        // C(50,2) * C(48,5) completions behind each full-deck hole hand;
        // across all 1326 hole hands that is 2,781,381,002,400.
        let deck = Deck::full();
        assert_eq!(information_set_size(&deck), 2_097_572_400);
        assert_eq!(information_set_size(&deck) * 1326, 2_781_381_002_400u64);
    }

    #[test]
    fn stabilizer_sizes_by_hole_shape() {
        let deck = Deck::full();
        let pair = CanonicalHand::parse("AA", &deck).unwrap().representative();
        let suited = CanonicalHand::parse("AKs", &deck).unwrap().representative();
        let offsuit = CanonicalHand::parse("AKo", &deck).unwrap().representative();
        assert_eq!(suit_stabilizer(pair).len(), 4);
        assert_eq!(suit_stabilizer(suited).len(), 6);
        assert_eq!(suit_stabilizer(offsuit).len(), 2);
    }
}
