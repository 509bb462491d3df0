mod common;

use iepkit::iep::verify_witness;
use iepkit::satsearch::Logic;
use iepkit::tiling::{build_witness_from_solution, check_solution, witness_size};
use iepkit::{generate_formulas, shared_signature, solve_tiling, TilingInstance};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = TilingInstance> {
    (1usize..4).prop_flat_map(|k| {
        let pairs = proptest::collection::vec((0..k, 0..k), 0..(k * k + 1));
        (Just(k), pairs.clone(), pairs, proptest::collection::vec(0..k, 0..3), 1usize..3)
    })
    .prop_filter("four-by-four needs at most two tiles", |(k, _, _, _, n)| *n == 1 || *k <= 2)
    .prop_map(|(k, h, v, init, n)| {
        let name = |i: usize| format!("t{i}");
        TilingInstance {
            tiles: (0..k).map(name).collect(),
            h: h.into_iter().map(|(a, b)| [name(a), name(b)]).collect(),
            v: v.into_iter().map(|(a, b)| [name(a), name(b)]).collect(),
            init: init.into_iter().map(name).collect(),
            n,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_matches_exhaustive_search(inst in instance()) {
        let sol = solve_tiling(&inst).unwrap();
        prop_assert_eq!(sol.is_some(), common::tiling_solvable(&inst));
        if let Some(s) = sol {
            prop_assert!(check_solution(&inst, &s).is_ok());
        }
    }

    #[test]
    fn instances_roundtrip_through_json(inst in instance()) {
        let back = TilingInstance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), inst.to_json());
    }
}

#[test]
fn hand_picked_instances_are_classified() {
    for text in common::SOLVABLE_TILINGS {
        assert!(common::tiling_solvable(&TilingInstance::from_json(text).unwrap()), "{text}");
    }
    for text in common::UNSOLVABLE_TILINGS {
        assert!(!common::tiling_solvable(&TilingInstance::from_json(text).unwrap()), "{text}");
    }
}

#[test]
fn solution_witnesses_pass_the_oracles() {
    for text in common::SOLVABLE_TILINGS {
        let inst = TilingInstance::from_json(text).unwrap();
        let (phi, psi) = generate_formulas(&inst).unwrap();
        let sol = solve_tiling(&inst).unwrap().unwrap();
        let w = build_witness_from_solution(&inst, &sol).unwrap();
        assert!(verify_witness(&w, &phi, &psi, Logic::Wk4).unwrap());
        assert_eq!(w.size(), witness_size(1));
        let (a, b) = (&w.phi_model, &w.psi_model);
        assert!(common::weakly_transitive(a.model.frame()) && common::weakly_transitive(b.model.frame()));
        assert!(common::rooted(a.model.frame(), a.root) && common::rooted(b.model.frame(), b.root));
        assert!(common::eval(&a.model, a.root, &phi), "{text}");
        assert!(!common::eval(&b.model, b.root, &psi), "{text}");
        let rho = shared_signature(&phi, &psi);
        assert!(common::naive_bisim(&a.model, &b.model, &rho)[a.root][b.root], "{text}");
    }
}

#[test]
fn formulas_share_only_the_grid_vocabulary() {
    let inst = TilingInstance::from_json(common::SOLVABLE_TILINGS[4]).unwrap();
    let (phi, psi) = generate_formulas(&inst).unwrap();
    let rho: Vec<String> = shared_signature(&phi, &psi).iter().map(str::to_string).collect();
    assert_eq!(rho, ["b0", "b1", "e", "tile_a", "tile_b", "tile_c"]);
}
