#![no_main]
use iepkit::kripke::dot::{model_to_dot, DotOptions};
use iepkit::Model;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((m, root)) = Model::from_json(text) {
        let again = Model::from_json(&m.to_json(root)).unwrap();
        assert_eq!(again, (m.clone(), root));
        if m.len() <= 64 {
            let _ = iepkit::clusters(m.frame());
            let _ = model_to_dot(&m, &DotOptions::default());
        }
    }
});
