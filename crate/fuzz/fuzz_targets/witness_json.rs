#![no_main]
use iepkit::satsearch::Logic;
use iepkit::{parse, WitnessPair};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(w) = WitnessPair::from_json(text) {
        let again = WitnessPair::from_json(&w.to_json()).unwrap();
        assert_eq!(again, w);
        let (a, b) = w.size();
        if a <= 32 && b <= 32 {
            let phi = parse("<><>p & ~<>p").unwrap();
            let psi = parse("<><>~q | q").unwrap();
            // errors (say, a missing variable) are fine, panics are not
            let _ = iepkit::iep::witness_failures(&w, &phi, &psi, Logic::Wk4);
        }
    }
});
