#![no_main]
use iepkit::tiling::check_solution;
use iepkit::{generate_formulas, solve_tiling, TilingInstance, TorusSolution};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // an instance and a candidate solution, separated by a newline
    let (inst, sol) = text.split_once('\n').unwrap_or((text, ""));
    let Ok(inst) = TilingInstance::from_json(inst) else {
        return;
    };
    assert_eq!(TilingInstance::from_json(&inst.to_json()).unwrap(), inst);
    if let Ok(sol) = TorusSolution::from_json(sol) {
        let _ = check_solution(&inst, &sol);
    }
    if inst.n == 1 && inst.tiles.len() <= 4 {
        if let Some(sol) = solve_tiling(&inst).unwrap() {
            check_solution(&inst, &sol).unwrap();
        }
        let _ = generate_formulas(&inst).unwrap();
    }
});
