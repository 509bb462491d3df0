#![no_main]
use iepkit::BisimRelation;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&dims, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let (left, right) = ((dims & 0x0f) as usize, (dims >> 4) as usize);
    if let Ok(r) = BisimRelation::from_json(text, left, right) {
        assert_eq!(BisimRelation::from_json(&r.to_json(), left, right).unwrap(), r);
        assert_eq!(r.transpose().transpose(), r);
    }
});
