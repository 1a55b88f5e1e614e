#![no_main]

use libfuzzer_sys::fuzz_target;
use review_eval::embedscore::EmbeddingCache;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = EmbeddingCache::from_lines(text);
    }
});
