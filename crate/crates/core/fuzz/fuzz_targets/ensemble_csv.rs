#![no_main]

use levy_units::io::{from_csv, to_csv};
use levy_units::{LambdaProfile, LevyModel, TimeGrid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let model = LevyModel::skellam(LambdaProfile::new(vec![0.3, 0.8]).unwrap());
    let grid = TimeGrid::new(vec![0.5, 1.0]).unwrap();
    if let Ok(ensemble) = from_csv(text, &model, &grid, 0) {
        let back = from_csv(&to_csv(&ensemble), &model, &grid, 0).expect("export parses");
        assert_eq!(back, ensemble);
    }
});
