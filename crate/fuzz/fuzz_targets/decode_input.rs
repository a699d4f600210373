#![no_main]

use libfuzzer_sys::fuzz_target;
use motfourier_cli::Input;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(input) = Input::decode(text) {
        let _ = input.need("fn");
        let _ = motfourier_core::shell::parse(&input.prelude());
    }
});
