#![no_main]

//! The parser must never panic, whatever bytes it is fed.

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = covertt::frontend::parse(text);
        let _ = covertt::frontend::parse_term(text);
    }
});
