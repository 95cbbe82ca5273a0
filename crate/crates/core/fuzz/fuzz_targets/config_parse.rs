#![no_main]

use levy_units::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::parse(text) {
        // canonical text must parse back to itself
        let canonical = config.canonical_text();
        let again = ExperimentConfig::parse(&canonical).expect("canonical text parses");
        assert_eq!(again.canonical_text(), canonical);
    }
});
