//! Replays the checked-in fuzz seeds through the same invariants the fuzz
//! targets assert, so they run on stable toolchains too.

use mellinfrac::io::{
    read_field, read_sampled_function, read_samples, read_spectrum, write_samples,
};
use mellinfrac::Builtin;
use mellinfrac_cli::config::FunctionSpec;
use mellinfrac_cli::RunConfig;
use std::fs;
use std::path::PathBuf;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn function_spec_seeds() {
    for (path, data) in seeds("function_spec") {
        let source = String::from_utf8_lossy(&data);
        let parsed = source.parse::<FunctionSpec>();
        assert!(parsed.is_ok(), "{}: {:?}", path.display(), parsed.err());
        if let Ok(b) = source.parse::<Builtin>() {
            let printed = b.to_string();
            assert_eq!(printed.parse::<Builtin>().unwrap().to_string(), printed);
        }
    }
}

#[test]
fn run_config_seeds() {
    for (path, data) in seeds("run_config") {
        let text = std::str::from_utf8(&data).unwrap();
        let cfg = RunConfig::from_json(text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate()
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let canonical = cfg.to_canonical_json();
        assert_eq!(
            RunConfig::from_json(&canonical)
                .unwrap()
                .to_canonical_json(),
            canonical
        );
    }
}

#[test]
fn csv_sample_seeds() {
    let mut accepted = 0;
    for (_, data) in seeds("csv_samples") {
        let _ = read_sampled_function(data.as_slice());
        let _ = read_spectrum(data.as_slice(), 0.5);
        let _ = read_field(data.as_slice());
        if let Ok((xs, vs)) = read_samples(data.as_slice()) {
            let mut buf = Vec::new();
            write_samples(&mut buf, &xs, &vs).unwrap();
            let (xs2, vs2) = read_samples(buf.as_slice()).unwrap();
            assert_eq!((xs, vs), (xs2, vs2));
            accepted += 1;
        }
    }
    assert!(accepted >= 1);
}
