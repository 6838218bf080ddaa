#![no_main]

use libfuzzer_sys::fuzz_target;
use morava_chern::polyring::WeightedPoly;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = WeightedPoly::from_json_str(s) {
        let text = f.to_json_string();
        assert_eq!(WeightedPoly::from_json_str(&text).unwrap(), f);
    }
});
