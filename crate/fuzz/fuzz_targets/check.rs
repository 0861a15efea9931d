#![no_main]

//! The whole pipeline (parse, elaborate, typecheck, coverage) must reject
//! garbage gracefully rather than panic or hang. A small fuel budget keeps
//! reduction of accepted-but-recursive definitions bounded.

use std::sync::Once;

use libfuzzer_sys::fuzz_target;

static FUEL: Once = Once::new();

fuzz_target!(|data: &[u8]| {
    FUEL.call_once(|| covertt::conversion::set_default_fuel(10_000));
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = covertt::frontend::check_text(text);
    }
});
