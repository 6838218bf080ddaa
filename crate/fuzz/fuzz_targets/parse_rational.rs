#![no_main]

use libfuzzer_sys::fuzz_target;
use morava_chern::exactnum::{format_rational, parse_rational};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_rational(s) {
        let text = format_rational(&q);
        assert_eq!(parse_rational(&text).unwrap(), q);
    }
});
