#![no_main]

use libfuzzer_sys::fuzz_target;
use shearback::harness::config::parse_override;
use shearback::harness::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mut cfg = RunConfig::default();
    for line in text.lines() {
        if let Ok((k, v)) = parse_override(line) {
            let _ = cfg.set(&k, &v);
        }
    }
    let _ = cfg.validate();
});
