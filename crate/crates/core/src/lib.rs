//! Lookup-table compression that exploits don't-care entries.
//!
//! A table is split into sub-tables, each stored as a bias plus residuals;
//! residual sub-tables that are right shifts of one another share storage.
//! Entries whose inputs are never observed are don't cares and may be
//! rewritten to make more sub-tables shift-similar, shrinking the set of
//! unique sub-tables that has to be stored. The result is emitted as
//! combinational Verilog and as a portable plan file.
//!
//! ```
//! use dclut::{compress, reconstruction_table, CareMask, SearchConfig, Table};
//!
//! let table = Table::from_fn(8, 6, |x| (x * 3) % 64).unwrap();
//! let mask = CareMask::all_care(table.len());
//! let (plan, report) = compress(&table, &mask, &SearchConfig::default()).unwrap();
//! assert!(report.chosen().total_bits <= report.plain().total_bits);
//! assert_eq!(reconstruction_table(&plan), table);
//! ```

pub mod decompose;
pub mod dontcare;
pub mod emit;
mod error;
pub mod mask;
pub mod search;
pub mod synth;
pub mod table;
pub mod verify;

pub use decompose::{
    assemble, select_unique, similarity_matrix, split_bias, Dep, Selection, SimilarityState, Split,
};
pub use dontcare::{match_with_dontcares, reduce_unique, Attempt, FreezeMask, Reducer};
pub use emit::{emit_plan_file, emit_verilog, load_plan_file};
pub use error::{Error, Result};
pub use mask::{care_fraction, mask_from_observations, CareMask};
pub use search::{
    compress, compress_config, cost_bits, cost_pluts, ComponentBits, ConfigCost, ConfigOutcome,
    CostReport, SearchConfig,
};
pub use table::{
    evaluate, reconstruction_table, Decomposition, DecompositionParts, Plan, PlanBody, PlanConfig,
    Table,
};
pub use verify::{oracle_min_ust, verify_plan, VerifyReport};
