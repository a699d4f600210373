#![no_main]

use libfuzzer_sys::fuzz_target;
use motfourier_core::shell::parse_expr;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse_expr(src) {
        let once = parse_expr(&e.to_string()).expect("printed expression parses");
        assert_eq!(once, parse_expr(&once.to_string()).unwrap());
    }
});
