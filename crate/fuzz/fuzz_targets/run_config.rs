#![no_main]

use libfuzzer_sys::fuzz_target;
use mellinfrac_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_json(text) {
        let _ = cfg.validate();
        let canonical = cfg.to_canonical_json();
        let back = RunConfig::from_json(&canonical).expect("canonical form parses");
        assert_eq!(back.to_canonical_json(), canonical);
    }
});
