#![no_main]

use libfuzzer_sys::fuzz_target;
use mellinfrac::Builtin;
use mellinfrac_cli::config::FunctionSpec;

fuzz_target!(|data: &[u8]| {
    let source = String::from_utf8_lossy(data);

    // Parsing never panics, and a parsed builtin prints back to the same value.
    if let Ok(b) = source.parse::<Builtin>() {
        let printed = b.to_string();
        let again: Builtin = printed.parse().expect("printed form parses");
        assert_eq!(again.to_string(), printed);
        let _ = b.validate();
    }
    let _ = source.parse::<FunctionSpec>();
});
