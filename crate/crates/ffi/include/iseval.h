#ifndef ISEVAL_H
#define ISEVAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this ABI.
 */
typedef enum {
  ISEVAL_STATUS_OK = 0,
  /**
   * A card or hand code failed to parse.
   */
  ISEVAL_STATUS_PARSE_ERROR = 1,
  /**
   * Structurally valid input that breaks a precondition (duplicate
   * cards, wrong card count, out-of-range rank).
   */
  ISEVAL_STATUS_INVALID_INPUT = 2,
  /**
   * A required pointer was NULL.
   */
  ISEVAL_STATUS_NULL_POINTER = 3,
  /**
   * A string argument was not valid UTF-8.
   */
  ISEVAL_STATUS_INVALID_UTF8 = 4,
  /**
   * An output buffer was too small.
   */
  ISEVAL_STATUS_BUFFER_TOO_SMALL = 5,
} IsevalStatus;

/**
 * Opaque deck handle.
 */
typedef struct IsevalDeck IsevalDeck;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a deck with the given number of ranks (13 = full deck, down to
 * 5 for reduced decks). Returns NULL if the rank count is unsupported.
 */
IsevalDeck *iseval_deck_new(uint8_t num_ranks);

/**
 * Release a deck created by [`iseval_deck_new`].
 *
 * # Safety
 * `deck` must be a pointer returned by [`iseval_deck_new`] that has not
 * been freed yet, or NULL.
 */
void iseval_deck_free(IsevalDeck *deck);

/**
 * Number of cards in the deck.
 *
 * # Safety
 * `deck` must be a live pointer from [`iseval_deck_new`].
 */
uint32_t iseval_deck_size(const IsevalDeck *deck);

/**
 * Rank a 5- or 7-card hand given as concatenated codes ("AsKsQsJsTs").
 * Writes the category (0 = high card .. 8 = straight flush) and up to
 * five tiebreak ranks, most significant first.
 *
 * # Safety
 * `deck` must be live; `cards` must be a NUL-terminated string;
 * `category_out` must point to one byte; `tiebreaks_out` must point to
 * `tiebreaks_cap` writable bytes; `tiebreak_len_out` must point to one
 * byte.
 */
IsevalStatus iseval_rank_hand(const IsevalDeck *deck,
                              const char *cards,
                              uint8_t *category_out,
                              uint8_t *tiebreaks_out,
                              uintptr_t tiebreaks_cap,
                              uint8_t *tiebreak_len_out);

/**
 * Canonical class index (0..R*R) of a two-card hole hand such as "AsKd".
 *
 * # Safety
 * `deck` must be live; `hole` NUL-terminated; `index_out` must point to
 * one u16.
 */
IsevalStatus iseval_canonical_index(const IsevalDeck *deck, const char *hole, uint16_t *index_out);

/**
 * Canonical code ("AKs") for a class index; writes a NUL-terminated
 * string of at most 4 bytes into `buf`.
 *
 * # Safety
 * `deck` must be live; `buf` must point to `buf_cap` writable bytes.
 */
IsevalStatus iseval_hand_code(const IsevalDeck *deck, uint16_t index, char *buf, uintptr_t buf_cap);

/**
 * Exact heads-up equity of a canonical hand code ("AA", "AKs"). Full
 * enumeration: fast on reduced decks, minutes of CPU on the full deck.
 *
 * # Safety
 * `deck` must be live; `hand` NUL-terminated; `mean_out` must point to
 * one f64; `samples_out` may be NULL or point to one u64.
 */
IsevalStatus iseval_exact_equity(const IsevalDeck *deck,
                                 const char *hand,
                                 double *mean_out,
                                 uint64_t *samples_out);

/**
 * Monte Carlo equity estimate from k sampled completions; deterministic
 * in `seed`.
 *
 * # Safety
 * `deck` must be live; `hand` NUL-terminated; `mean_out` must point to
 * one f64.
 */
IsevalStatus iseval_mc_equity(const IsevalDeck *deck,
                              const char *hand,
                              uint64_t k,
                              uint64_t seed,
                              double *mean_out);

/**
 * Outcome of one fully-determined showdown: hero hole (2 cards), villain
 * hole (2), board (5), concatenated as one 18-character string. Writes
 * 0.0, 0.5 or 1.0 from the hero's perspective.
 *
 * # Safety
 * `deck` must be live; `cards` NUL-terminated; `value_out` must point to
 * one f64.
 */
IsevalStatus iseval_showdown_value(const IsevalDeck *deck, const char *cards, double *value_out);

/**
 * Library version as a static NUL-terminated string; do not free.
 */
const char *iseval_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISEVAL_H */
