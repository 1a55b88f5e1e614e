#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let tokens = review_eval::corpus::tokenize(text);
        // no token may be empty or contain whitespace
        for token in &tokens.tokens {
            assert!(!token.is_empty());
            assert!(!token.chars().any(char::is_whitespace));
        }
        // tokenization is idempotent over a re-joined sequence
        let rejoined = tokens.tokens.join(" ");
        assert_eq!(review_eval::corpus::tokenize(&rejoined), tokens);
    }
});
