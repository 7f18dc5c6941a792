//! C ABI over the evaluation core: deck handles, hand ranking,
//! canonicalization, and equity queries.
//!
//! Conventions: functions return [`IsevalStatus`] and write results
//! through out-pointers; `IsevalDeck` is an opaque handle created by
//! [`iseval_deck_new`] and released by [`iseval_deck_free`]; all strings
//! are NUL-terminated UTF-8 card or hand codes.

use std::ffi::CStr;
use std::os::raw::c_char;

use iseval_core::cards::{CanonicalHand, Deck};
use iseval_core::equity::{exact_equity, mc_equity, showdown_value, Showdown};
use iseval_core::handrank::{rank5, rank7};

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsevalStatus {
    Ok = 0,
    /// A card or hand code failed to parse.
    ParseError = 1,
    /// Structurally valid input that breaks a precondition (duplicate
    /// cards, wrong card count, out-of-range rank).
    InvalidInput = 2,
    /// A required pointer was NULL.
    NullPointer = 3,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 4,
    /// An output buffer was too small.
    BufferTooSmall = 5,
}

/// Opaque deck handle.
pub struct IsevalDeck {
    deck: Deck,
}

/// Create a deck with the given number of ranks (13 = full deck, down to
/// 5 for reduced decks). Returns NULL if the rank count is unsupported.
#[no_mangle]
pub extern "C" fn iseval_deck_new(num_ranks: u8) -> *mut IsevalDeck {
    match Deck::with_ranks(num_ranks) {
        Ok(deck) => Box::into_raw(Box::new(IsevalDeck { deck })),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Release a deck created by [`iseval_deck_new`].
///
/// # Safety
/// `deck` must be a pointer returned by [`iseval_deck_new`] that has not
/// been freed yet, or NULL.
#[no_mangle]
pub unsafe extern "C" fn iseval_deck_free(deck: *mut IsevalDeck) {
    if !deck.is_null() {
        drop(Box::from_raw(deck));
    }
}

/// Number of cards in the deck.
///
/// # Safety
/// `deck` must be a live pointer from [`iseval_deck_new`].
#[no_mangle]
pub unsafe extern "C" fn iseval_deck_size(deck: *const IsevalDeck) -> u32 {
    match deck.as_ref() {
        Some(handle) => handle.deck.size() as u32,
        None => 0,
    }
}

unsafe fn parse_str<'a>(ptr: *const c_char) -> Result<&'a str, IsevalStatus> {
    if ptr.is_null() {
        return Err(IsevalStatus::NullPointer);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| IsevalStatus::InvalidUtf8)
}

fn classify(err: &iseval_core::Error) -> IsevalStatus {
    match err {
        iseval_core::Error::Parse(_) => IsevalStatus::ParseError,
        _ => IsevalStatus::InvalidInput,
    }
}

/// Rank a 5- or 7-card hand given as concatenated codes ("AsKsQsJsTs").
/// Writes the category (0 = high card .. 8 = straight flush) and up to
/// five tiebreak ranks, most significant first.
///
/// # Safety
/// `deck` must be live; `cards` must be a NUL-terminated string;
/// `category_out` must point to one byte; `tiebreaks_out` must point to
/// `tiebreaks_cap` writable bytes; `tiebreak_len_out` must point to one
/// byte.
#[no_mangle]
pub unsafe extern "C" fn iseval_rank_hand(
    deck: *const IsevalDeck,
    cards: *const c_char,
    category_out: *mut u8,
    tiebreaks_out: *mut u8,
    tiebreaks_cap: usize,
    tiebreak_len_out: *mut u8,
) -> IsevalStatus {
    let Some(handle) = deck.as_ref() else {
        return IsevalStatus::NullPointer;
    };
    if category_out.is_null() || tiebreaks_out.is_null() || tiebreak_len_out.is_null() {
        return IsevalStatus::NullPointer;
    }
    let text = match parse_str(cards) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let parsed = match handle.deck.parse_cards(text) {
        Ok(cards) => cards,
        Err(err) => return classify(&err),
    };
    let rank = match parsed.len() {
        5 => rank5(&parsed, &handle.deck),
        7 => rank7(&parsed, &handle.deck),
        _ => return IsevalStatus::InvalidInput,
    };
    let rank = match rank {
        Ok(rank) => rank,
        Err(err) => return classify(&err),
    };
    let tiebreaks = rank.tiebreaks();
    if tiebreaks.len() > tiebreaks_cap {
        return IsevalStatus::BufferTooSmall;
    }
    *category_out = rank.category() as u8;
    for (i, &t) in tiebreaks.iter().enumerate() {
        *tiebreaks_out.add(i) = t;
    }
    *tiebreak_len_out = tiebreaks.len() as u8;
    IsevalStatus::Ok
}

/// Canonical class index (0..R*R) of a two-card hole hand such as "AsKd".
///
/// # Safety
/// `deck` must be live; `hole` NUL-terminated; `index_out` must point to
/// one u16.
#[no_mangle]
pub unsafe extern "C" fn iseval_canonical_index(
    deck: *const IsevalDeck,
    hole: *const c_char,
    index_out: *mut u16,
) -> IsevalStatus {
    let Some(handle) = deck.as_ref() else {
        return IsevalStatus::NullPointer;
    };
    if index_out.is_null() {
        return IsevalStatus::NullPointer;
    }
    let text = match parse_str(hole) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let cards = match handle.deck.parse_cards(text) {
        Ok(cards) => cards,
        Err(err) => return classify(&err),
    };
    if cards.len() != 2 {
        return IsevalStatus::InvalidInput;
    }
    match iseval_core::cards::canonicalize(cards[0], cards[1]) {
        Ok(hand) => {
            *index_out = hand.index(handle.deck.num_ranks()) as u16;
            IsevalStatus::Ok
        }
        Err(err) => classify(&err),
    }
}

/// Canonical code ("AKs") for a class index; writes a NUL-terminated
/// string of at most 4 bytes into `buf`.
///
/// # Safety
/// `deck` must be live; `buf` must point to `buf_cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn iseval_hand_code(
    deck: *const IsevalDeck,
    index: u16,
    buf: *mut c_char,
    buf_cap: usize,
) -> IsevalStatus {
    let Some(handle) = deck.as_ref() else {
        return IsevalStatus::NullPointer;
    };
    if buf.is_null() {
        return IsevalStatus::NullPointer;
    }
    let hand = match CanonicalHand::from_index(index as usize, handle.deck.num_ranks()) {
        Ok(hand) => hand,
        Err(err) => return classify(&err),
    };
    let code = hand.code(&handle.deck);
    if code.len() + 1 > buf_cap {
        return IsevalStatus::BufferTooSmall;
    }
    for (i, byte) in code.bytes().enumerate() {
        *buf.add(i) = byte as c_char;
    }
    *buf.add(code.len()) = 0;
    IsevalStatus::Ok
}

/// Exact heads-up equity of a canonical hand code ("AA", "AKs"). Full
/// enumeration: fast on reduced decks, minutes of CPU on the full deck.
///
/// # Safety
/// `deck` must be live; `hand` NUL-terminated; `mean_out` must point to
/// one f64; `samples_out` may be NULL or point to one u64.
#[no_mangle]
pub unsafe extern "C" fn iseval_exact_equity(
    deck: *const IsevalDeck,
    hand: *const c_char,
    mean_out: *mut f64,
    samples_out: *mut u64,
) -> IsevalStatus {
    let Some(handle) = deck.as_ref() else {
        return IsevalStatus::NullPointer;
    };
    if mean_out.is_null() {
        return IsevalStatus::NullPointer;
    }
    let text = match parse_str(hand) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let hand = match CanonicalHand::parse(text, &handle.deck) {
        Ok(hand) => hand,
        Err(err) => return classify(&err),
    };
    match exact_equity(hand, &handle.deck) {
        Ok(estimate) => {
            *mean_out = estimate.mean;
            if !samples_out.is_null() {
                *samples_out = estimate.samples_used;
            }
            IsevalStatus::Ok
        }
        Err(err) => classify(&err),
    }
}

/// Monte Carlo equity estimate from k sampled completions; deterministic
/// in `seed`.
///
/// # Safety
/// `deck` must be live; `hand` NUL-terminated; `mean_out` must point to
/// one f64.
#[no_mangle]
pub unsafe extern "C" fn iseval_mc_equity(
    deck: *const IsevalDeck,
    hand: *const c_char,
    k: u64,
    seed: u64,
    mean_out: *mut f64,
) -> IsevalStatus {
    let Some(handle) = deck.as_ref() else {
        return IsevalStatus::NullPointer;
    };
    if mean_out.is_null() {
        return IsevalStatus::NullPointer;
    }
    let text = match parse_str(hand) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let hand = match CanonicalHand::parse(text, &handle.deck) {
        Ok(hand) => hand,
        Err(err) => return classify(&err),
    };
    match mc_equity(hand, k, &handle.deck, seed) {
        Ok(estimate) => {
            *mean_out = estimate.mean;
            IsevalStatus::Ok
        }
        Err(err) => classify(&err),
    }
}

/// Outcome of one fully-determined showdown: hero hole (2 cards), villain
/// hole (2), board (5), concatenated as one 18-character string. Writes
/// 0.0, 0.5 or 1.0 from the hero's perspective.
///
/// # Safety
/// `deck` must be live; `cards` NUL-terminated; `value_out` must point to
/// one f64.
#[no_mangle]
pub unsafe extern "C" fn iseval_showdown_value(
    deck: *const IsevalDeck,
    cards: *const c_char,
    value_out: *mut f64,
) -> IsevalStatus {
    let Some(handle) = deck.as_ref() else {
        return IsevalStatus::NullPointer;
    };
    if value_out.is_null() {
        return IsevalStatus::NullPointer;
    }
    let text = match parse_str(cards) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let parsed = match handle.deck.parse_cards(text) {
        Ok(cards) => cards,
        Err(err) => return classify(&err),
    };
    if parsed.len() != 9 {
        return IsevalStatus::InvalidInput;
    }
    let showdown = Showdown {
        hero: [parsed[0], parsed[1]],
        villain: [parsed[2], parsed[3]],
        board: [parsed[4], parsed[5], parsed[6], parsed[7], parsed[8]],
    };
    match showdown_value(&showdown, &handle.deck) {
        Ok(outcome) => {
            *value_out = outcome.value();
            IsevalStatus::Ok
        }
        Err(err) => classify(&err),
    }
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn iseval_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
