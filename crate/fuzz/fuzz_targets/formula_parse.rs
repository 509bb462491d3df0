#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = iepkit::parse(text) {
        // both renderings must parse back to the same tree
        assert_eq!(iepkit::parse(&f.to_string()).unwrap(), f);
        assert_eq!(iepkit::parse(&f.to_string_full()).unwrap(), f);
        let _ = iepkit::sub_closure(&f, &f);
    }
});
