//! Decision procedures for the interpolant existence problem in weak K4
//! (`wK4`) and difference logic (`DL`).
//!
//! The crate works with finite Kripke models throughout: formulas and their
//! closures ([`formula`]), frames, clusters and model checking ([`kripke`]),
//! ρ-bisimulations ([`bisim`]), bounded satisfiability ([`satsearch`]),
//! witness-pair search ([`iep`]), the mosaic filtration ([`filtration`]) and
//! the tiling reduction ([`tiling`]).

pub mod bisim;
pub mod bits;
pub mod error;
pub mod filtration;
pub mod fixtures;
pub mod harness;
pub mod iep;
pub mod formula;
pub mod kripke;
pub mod satsearch;
pub mod tiling;

pub use bisim::{bisimilar, maximal_bisimulation, verify_bisimulation, BisimRelation};
pub use bits::BitSet;
pub use error::{Error, Result};
pub use formula::{parse, shared_signature, signature_of, sub_closure, Formula, Signature, SubClosure};
pub use kripke::{clusters, model_check, ClusterDecomposition, Frame, Model, PointedModel};
pub use satsearch::{is_valid, sat_dl, sat_wk4, Logic, SatStatus, SatVerdict, Validity};
pub use iep::{decide_iep_dl, decide_iep_wk4, shrink_dl_witness, verify_witness, IepStatus, IepVerdict, WitnessPair};
pub use filtration::{filtrate, filtration_report, Filtration, FiltrationReport};
pub use tiling::{generate_formulas, solve_tiling, TilingInstance, TorusSolution};
