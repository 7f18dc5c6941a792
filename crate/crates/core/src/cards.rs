//! Card and deck representation plus canonicalization of hole hands into
//! suit-isomorphism classes.
//!
//! Ranks are deck-relative: a deck with `R` ranks uses rank indices
//! `0..R` where `R-1` is always the ace. Reduced decks keep all four suits
//! and drop low ranks, so a `short:5` deck holds T..A. Card text codes use
//! the standard two-character form, e.g. `"As"`, `"2c"`.

use crate::{Error, Result};

pub const NUM_SUITS: u8 = 4;
pub const FULL_RANKS: u8 = 13;
/// Smallest deck on which flushes and straights stay defined.
pub const MIN_RANKS: u8 = 5;

const RANK_CHARS: [char; 13] = [
    '2', '3', '4', '5', '6', '7', '8', '9', 'T', 'J', 'Q', 'K', 'A',
];
const SUIT_CHARS: [char; 4] = ['c', 'd', 'h', 's'];

/// A playing card: deck-relative rank and suit, both zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card {
    rank: u8,
    suit: u8,
}

impl Card {
    /// Build a card without deck context. `rank` must fit the deck the card
    /// will be used with; `suit` must be `< 4`.
    pub fn new(rank: u8, suit: u8) -> Result<Card> {
        if suit >= NUM_SUITS {
            return Err(Error::InvalidInput(format!("suit {suit} out of range")));
        }
        if rank >= FULL_RANKS {
            return Err(Error::InvalidInput(format!("rank {rank} out of range")));
        }
        Ok(Card { rank, suit })
    }

    #[inline]
    pub fn rank(self) -> u8 {
        self.rank
    }

    #[inline]
    pub fn suit(self) -> u8 {
        self.suit
    }

    /// Dense index within a deck of `num_ranks` ranks, rank-major.
    #[inline]
    pub fn index(self) -> usize {
        self.rank as usize * NUM_SUITS as usize + self.suit as usize
    }
}

/// Parse a two-character card code against the full 52-card deck.
pub fn parse_card(text: &str) -> Result<Card> {
    Deck::full().parse_card(text)
}

/// Format a card using full-deck rank symbols.
pub fn format_card(card: Card) -> String {
    Deck::full().format_card(card)
}

/// Parse a concatenated card list such as `"AsKd"` against the full deck.
pub fn parse_cards(text: &str) -> Result<Vec<Card>> {
    Deck::full().parse_cards(text)
}

/// A deck of `ranks × 4` distinct cards. The full deck has 13 ranks;
/// reduced decks (at least 5 ranks) drop low ranks to make exact
/// enumeration cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deck {
    num_ranks: u8,
    cards: Vec<Card>,
}

impl Deck {
    pub fn full() -> Deck {
        Deck::with_ranks(FULL_RANKS).expect("full deck is valid")
    }

    /// A reduced deck keeping the top `num_ranks` ranks.
    pub fn with_ranks(num_ranks: u8) -> Result<Deck> {
        if !(MIN_RANKS..=FULL_RANKS).contains(&num_ranks) {
            return Err(Error::InvalidInput(format!(
                "deck must have between {MIN_RANKS} and {FULL_RANKS} ranks, got {num_ranks}"
            )));
        }
        let mut cards = Vec::with_capacity(num_ranks as usize * NUM_SUITS as usize);
        for rank in 0..num_ranks {
            for suit in 0..NUM_SUITS {
                cards.push(Card { rank, suit });
            }
        }
        Ok(Deck { num_ranks, cards })
    }

    /// Parse `"full"` or `"short:R"`.
    pub fn parse_spec(spec: &str) -> Result<Deck> {
        if spec == "full" {
            return Ok(Deck::full());
        }
        if let Some(ranks) = spec.strip_prefix("short:") {
            let ranks: u8 = ranks
                .parse()
                .map_err(|_| Error::Parse(format!("bad rank count in deck spec '{spec}'")))?;
            return Deck::with_ranks(ranks);
        }
        Err(Error::Parse(format!(
            "deck spec '{spec}' is neither 'full' nor 'short:R'"
        )))
    }

    pub fn spec(&self) -> String {
        if self.num_ranks == FULL_RANKS {
            "full".to_string()
        } else {
            format!("short:{}", self.num_ranks)
        }
    }

    #[inline]
    pub fn num_ranks(&self) -> u8 {
        self.num_ranks
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.cards.len()
    }

    /// All cards in rank-major order.
    pub fn cards(&self) -> &[Card] {
        &self.cards
    }

    pub fn contains(&self, card: Card) -> bool {
        card.rank < self.num_ranks && card.suit < NUM_SUITS
    }

    /// Standard symbol of a deck-relative rank. Rank `R-1` is always 'A'.
    pub fn rank_char(&self, rank: u8) -> char {
        debug_assert!(rank < self.num_ranks);
        RANK_CHARS[(FULL_RANKS - self.num_ranks + rank) as usize]
    }

    pub fn parse_card(&self, text: &str) -> Result<Card> {
        let mut chars = text.chars();
        let (r, s) = match (chars.next(), chars.next(), chars.next()) {
            (Some(r), Some(s), None) => (r, s),
            _ => {
                return Err(Error::Parse(format!(
                    "card code '{text}' must be exactly two characters"
                )))
            }
        };
        let abs = RANK_CHARS
            .iter()
            .position(|&c| c == r.to_ascii_uppercase())
            .ok_or_else(|| Error::Parse(format!("unknown rank character '{r}' in '{text}'")))?
            as u8;
        let dropped = FULL_RANKS - self.num_ranks;
        if abs < dropped {
            return Err(Error::Parse(format!(
                "rank '{r}' is not in a {}-rank deck",
                self.num_ranks
            )));
        }
        let suit = SUIT_CHARS
            .iter()
            .position(|&c| c == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown suit character '{s}' in '{text}'")))?
            as u8;
        Ok(Card {
            rank: abs - dropped,
            suit,
        })
    }

    pub fn format_card(&self, card: Card) -> String {
        let mut s = String::with_capacity(2);
        s.push(self.rank_char(card.rank));
        s.push(SUIT_CHARS[card.suit as usize]);
        s
    }

    /// Parse concatenated card codes ("AsKd") into distinct cards.
    pub fn parse_cards(&self, text: &str) -> Result<Vec<Card>> {
        let chars: Vec<char> = text.chars().collect();
        if !chars.len().is_multiple_of(2) {
            return Err(Error::Parse(format!(
                "card list '{text}' has an odd number of characters"
            )));
        }
        let mut cards = Vec::with_capacity(chars.len() / 2);
        for pair in chars.chunks(2) {
            let code: String = pair.iter().collect();
            let card = self.parse_card(&code)?;
            if cards.contains(&card) {
                return Err(Error::InvalidInput(format!(
                    "duplicate card '{code}' in '{text}'"
                )));
            }
            cards.push(card);
        }
        Ok(cards)
    }

    pub fn format_cards(&self, cards: &[Card]) -> String {
        cards.iter().map(|&c| self.format_card(c)).collect()
    }

    /// All unordered hole pairs, in deterministic rank-major order.
    pub fn hole_pairs(&self) -> impl Iterator<Item = (Card, Card)> + '_ {
        let n = self.cards.len();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (self.cards[i], self.cards[j])))
    }

    /// Number of canonical hole classes: R pairs + C(R,2) suited + C(R,2)
    /// offsuit = R².
    pub fn num_canonical_hands(&self) -> usize {
        (self.num_ranks as usize) * (self.num_ranks as usize)
    }
}

/// The suit-isomorphism class of a two-card hole hand: the observable part
/// of a deal. A full deck has 169 classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CanonicalHand {
    high: u8,
    low: u8,
    suited: bool,
}

impl CanonicalHand {
    pub fn new(high: u8, low: u8, suited: bool) -> Result<CanonicalHand> {
        if high < low {
            return Err(Error::InvalidInput(format!(
                "canonical hand requires high >= low, got {high} < {low}"
            )));
        }
        if suited && high == low {
            return Err(Error::InvalidInput(
                "a pair cannot be suited".to_string(),
            ));
        }
        Ok(CanonicalHand { high, low, suited })
    }

    #[inline]
    pub fn high(self) -> u8 {
        self.high
    }

    #[inline]
    pub fn low(self) -> u8 {
        self.low
    }

    #[inline]
    pub fn suited(self) -> bool {
        self.suited
    }

    #[inline]
    pub fn is_pair(self) -> bool {
        self.high == self.low
    }

    /// Number of hole pairs that map to this class: 6 for pairs, 4 suited,
    /// 12 offsuit.
    pub fn class_size(self) -> u32 {
        if self.is_pair() {
            6
        } else if self.suited {
            4
        } else {
            12
        }
    }

    /// Dense index in `0..R²`: pairs first, then suited, then offsuit,
    /// each block ordered by triangle index of (high, low).
    pub fn index(self, num_ranks: u8) -> usize {
        let r = num_ranks as usize;
        let pairs = r;
        let nonpair = r * (r - 1) / 2;
        if self.is_pair() {
            self.high as usize
        } else {
            let tri = triangle_index(self.high, self.low);
            if self.suited {
                pairs + tri
            } else {
                pairs + nonpair + tri
            }
        }
    }

    pub fn from_index(index: usize, num_ranks: u8) -> Result<CanonicalHand> {
        let r = num_ranks as usize;
        let nonpair = r * (r - 1) / 2;
        if index < r {
            return CanonicalHand::new(index as u8, index as u8, false);
        }
        let rest = index - r;
        if rest < 2 * nonpair {
            let suited = rest < nonpair;
            let (high, low) = triangle_from_index(rest % nonpair);
            return CanonicalHand::new(high, low, suited);
        }
        Err(Error::InvalidInput(format!(
            "canonical index {index} out of range for {num_ranks}-rank deck"
        )))
    }

    /// Canonical code such as `"AA"`, `"AKs"`, `"T9o"`.
    pub fn code(self, deck: &Deck) -> String {
        let mut s = String::with_capacity(3);
        s.push(deck.rank_char(self.high));
        s.push(deck.rank_char(self.low));
        if !self.is_pair() {
            s.push(if self.suited { 's' } else { 'o' });
        }
        s
    }

    /// Parse a canonical code. Pairs take two characters, non-pairs need an
    /// explicit `s`/`o` qualifier.
    pub fn parse(text: &str, deck: &Deck) -> Result<CanonicalHand> {
        let chars: Vec<char> = text.chars().collect();
        let rank_of = |c: char| -> Result<u8> {
            let abs = RANK_CHARS
                .iter()
                .position(|&r| r == c.to_ascii_uppercase())
                .ok_or_else(|| Error::Parse(format!("unknown rank character '{c}' in '{text}'")))?
                as u8;
            let dropped = FULL_RANKS - deck.num_ranks();
            if abs < dropped {
                return Err(Error::Parse(format!(
                    "rank '{c}' is not in a {}-rank deck",
                    deck.num_ranks()
                )));
            }
            Ok(abs - dropped)
        };
        match chars.as_slice() {
            [a, b] => {
                let (ra, rb) = (rank_of(*a)?, rank_of(*b)?);
                if ra != rb {
                    return Err(Error::Parse(format!(
                        "hand code '{text}' needs a suited/offsuit qualifier"
                    )));
                }
                CanonicalHand::new(ra, rb, false)
            }
            [a, b, q] => {
                let (ra, rb) = (rank_of(*a)?, rank_of(*b)?);
                let suited = match q.to_ascii_lowercase() {
                    's' => true,
                    'o' => false,
                    _ => {
                        return Err(Error::Parse(format!(
                            "qualifier '{q}' in '{text}' must be 's' or 'o'"
                        )))
                    }
                };
                if ra == rb {
                    return Err(Error::Parse(format!(
                        "pair '{text}' cannot carry a suited/offsuit qualifier"
                    )));
                }
                CanonicalHand::new(ra.max(rb), ra.min(rb), suited)
            }
            _ => Err(Error::Parse(format!(
                "hand code '{text}' must be 2 or 3 characters"
            ))),
        }
    }

    /// A concrete hole pair in this class: suits 0/0 for suited hands,
    /// 0/1 otherwise.
    pub fn representative(self) -> (Card, Card) {
        if self.suited {
            (
                Card { rank: self.high, suit: 0 },
                Card { rank: self.low, suit: 0 },
            )
        } else {
            (
                Card { rank: self.high, suit: 0 },
                Card { rank: self.low, suit: 1 },
            )
        }
    }
}

#[inline]
fn triangle_index(high: u8, low: u8) -> usize {
    debug_assert!(high > low);
    let h = high as usize;
    h * (h - 1) / 2 + low as usize
}

fn triangle_from_index(idx: usize) -> (u8, u8) {
    let mut high = 1usize;
    while (high + 1) * high / 2 <= idx {
        high += 1;
    }
    let low = idx - high * (high - 1) / 2;
    (high as u8, low as u8)
}

/// Collapse an unordered hole pair into its suit-isomorphism class.
/// Order-independent and invariant under any permutation of the four suits.
pub fn canonicalize(a: Card, b: Card) -> Result<CanonicalHand> {
    if a == b {
        return Err(Error::InvalidInput(format!(
            "hole cards must be distinct, got {} twice",
            format_card(a)
        )));
    }
    let (hi, lo) = if a.rank >= b.rank { (a, b) } else { (b, a) };
    CanonicalHand::new(hi.rank, lo.rank, hi.rank != lo.rank && hi.suit == lo.suit)
}
