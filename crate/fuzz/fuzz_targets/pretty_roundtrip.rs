#![no_main]

//! Anything the parser accepts must print back to a form that parses, and
//! printing must be canonical: print . parse . print = print.

use libfuzzer_sys::fuzz_target;

use covertt::frontend::{parse, pretty_file};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = parse(text) else { return };
    let printed = pretty_file(&file);
    let reparsed = parse(&printed).expect("printed output must parse");
    assert_eq!(
        printed,
        pretty_file(&reparsed),
        "printing must be canonical"
    );
});
