#![no_main]

use levy_units::io::{from_binary, to_binary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ensemble) = from_binary(data) {
        assert_eq!(to_binary(&ensemble), data);
    }
});
