#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grade) = review_eval::llmjudge::parse_grade(text) {
            assert!((1..=5).contains(&grade.value()));
        }
    }
});
