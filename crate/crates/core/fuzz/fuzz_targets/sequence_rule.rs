#![no_main]

use levy_units::sequence::SequenceRule;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rule) = text.parse::<SequenceRule>() {
        let back: SequenceRule = rule.to_string().parse().expect("display output parses");
        assert_eq!(back, rule);
        let _ = rule.generate(16);
    }
});
