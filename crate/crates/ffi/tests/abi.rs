//! Exercises the C ABI exactly as a foreign caller would: NUL-terminated
//! strings in, status codes and out-parameters back.

use std::ffi::CString;

use iseval_ffi::*;

fn c(text: &str) -> CString {
    CString::new(text).unwrap()
}

#[test]
fn deck_lifecycle() {
    unsafe {
        let deck = iseval_deck_new(13);
        assert!(!deck.is_null());
        assert_eq!(iseval_deck_size(deck), 52);
        iseval_deck_free(deck);

        let short = iseval_deck_new(5);
        assert_eq!(iseval_deck_size(short), 20);
        iseval_deck_free(short);

        assert!(iseval_deck_new(3).is_null());
        assert!(iseval_deck_new(14).is_null());
        iseval_deck_free(std::ptr::null_mut());
    }
}

#[test]
fn rank_hand_reports_category_and_tiebreaks() {
    unsafe {
        let deck = iseval_deck_new(13);
        let mut category = 0u8;
        let mut tiebreaks = [0u8; 5];
        let mut len = 0u8;

        let status = iseval_rank_hand(
            deck,
            c("AsKsQsJsTs").as_ptr(),
            &mut category,
            tiebreaks.as_mut_ptr(),
            tiebreaks.len(),
            &mut len,
        );
        assert_eq!(status, IsevalStatus::Ok);
        assert_eq!(category, 8);
        assert_eq!(len, 1);
        assert_eq!(tiebreaks[0], 12);

        // Seven cards work; six do not.
        let status = iseval_rank_hand(
            deck,
            c("AsAdKcKhKd2s3d").as_ptr(),
            &mut category,
            tiebreaks.as_mut_ptr(),
            tiebreaks.len(),
            &mut len,
        );
        assert_eq!(status, IsevalStatus::Ok);
        assert_eq!(category, 6);
        assert_eq!(&tiebreaks[..len as usize], &[11, 12]);

        let status = iseval_rank_hand(
            deck,
            c("AsKsQsJsTs2d").as_ptr(),
            &mut category,
            tiebreaks.as_mut_ptr(),
            tiebreaks.len(),
            &mut len,
        );
        assert_eq!(status, IsevalStatus::InvalidInput);

        let status = iseval_rank_hand(
            deck,
            c("AsKsQsJsT?").as_ptr(),
            &mut category,
            tiebreaks.as_mut_ptr(),
            tiebreaks.len(),
            &mut len,
        );
        assert_eq!(status, IsevalStatus::ParseError);

        let status = iseval_rank_hand(
            deck,
            std::ptr::null(),
            &mut category,
            tiebreaks.as_mut_ptr(),
            tiebreaks.len(),
            &mut len,
        );
        assert_eq!(status, IsevalStatus::NullPointer);

        iseval_deck_free(deck);
    }
}

#[test]
fn canonical_index_and_code_round_trip() {
    unsafe {
        let deck = iseval_deck_new(13);
        let mut index = 0u16;
        assert_eq!(
            iseval_canonical_index(deck, c("AsAh").as_ptr(), &mut index),
            IsevalStatus::Ok
        );
        // AA is the last pair index.
        assert_eq!(index, 12);

        let mut buf = [0i8; 8];
        assert_eq!(
            iseval_hand_code(deck, index, buf.as_mut_ptr(), buf.len()),
            IsevalStatus::Ok
        );
        let code = std::ffi::CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert_eq!(code, "AA");

        assert_eq!(
            iseval_hand_code(deck, index, buf.as_mut_ptr(), 2),
            IsevalStatus::BufferTooSmall
        );
        assert_eq!(
            iseval_canonical_index(deck, c("AsAs").as_ptr(), &mut index),
            IsevalStatus::InvalidInput
        );
        assert_eq!(
            iseval_canonical_index(deck, c("As").as_ptr(), &mut index),
            IsevalStatus::InvalidInput
        );
        iseval_deck_free(deck);
    }
}

#[test]
fn equity_matches_core_library() {
    unsafe {
        let deck = iseval_deck_new(5);
        let mut mean = 0.0f64;
        let mut samples = 0u64;
        assert_eq!(
            iseval_exact_equity(deck, c("AA").as_ptr(), &mut mean, &mut samples),
            IsevalStatus::Ok
        );
        let core_deck = iseval_core::cards::Deck::with_ranks(5).unwrap();
        let hand = iseval_core::cards::CanonicalHand::parse("AA", &core_deck).unwrap();
        let expected = iseval_core::equity::exact_equity(hand, &core_deck).unwrap();
        assert_eq!(mean, expected.mean);
        assert_eq!(samples, expected.samples_used);

        let mut a = 0.0f64;
        let mut b = 0.0f64;
        assert_eq!(
            iseval_mc_equity(deck, c("KQs").as_ptr(), 500, 9, &mut a),
            IsevalStatus::Ok
        );
        assert_eq!(
            iseval_mc_equity(deck, c("KQs").as_ptr(), 500, 9, &mut b),
            IsevalStatus::Ok
        );
        assert_eq!(a, b);
        assert!(a > 0.0 && a < 1.0);

        assert_eq!(
            iseval_mc_equity(deck, c("ZZ").as_ptr(), 10, 0, &mut a),
            IsevalStatus::ParseError
        );
        iseval_deck_free(deck);
    }
}

#[test]
fn showdown_outcomes() {
    unsafe {
        let deck = iseval_deck_new(13);
        let mut value = -1.0f64;
        assert_eq!(
            iseval_showdown_value(deck, c("AsAhKsKh2d7c9sJd3c").as_ptr(), &mut value),
            IsevalStatus::Ok
        );
        assert_eq!(value, 1.0);
        assert_eq!(
            iseval_showdown_value(deck, c("KsKhAsAh2d7c9sJd3c").as_ptr(), &mut value),
            IsevalStatus::Ok
        );
        assert_eq!(value, 0.0);
        assert_eq!(
            iseval_showdown_value(deck, c("AsAhAsKh2d7c9sJd3c").as_ptr(), &mut value),
            IsevalStatus::InvalidInput
        );
        iseval_deck_free(deck);
    }
}

#[test]
fn version_string_is_static() {
    let version = iseval_version();
    assert!(!version.is_null());
    let text = unsafe { std::ffi::CStr::from_ptr(version) }.to_str().unwrap();
    assert_eq!(text, env!("CARGO_PKG_VERSION"));
}
