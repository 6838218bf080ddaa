#![no_main]

use libfuzzer_sys::fuzz_target;
use morava_chern::caot::parse_gdata;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_gdata(s) {
        let text = g.to_json_string();
        assert_eq!(parse_gdata(&text).unwrap(), g);
    }
});
