#![no_main]

use libfuzzer_sys::fuzz_target;
use motfourier_core::shell::parse;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    // whatever parses must print to something that parses back the same
    if let Ok(script) = parse(src) {
        let printed = script.to_string();
        let again = parse(&printed).expect("printed script parses");
        assert_eq!(script.stmts(), again.stmts());
    }
});
