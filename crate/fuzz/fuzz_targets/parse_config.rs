#![no_main]

use libfuzzer_sys::fuzz_target;
use morava_chern::config::{parse_config, ConfigFile, JobConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(s) {
        let _ = JobConfig::resolve(&ConfigFile::default(), Some(&cfg));
    }
});
