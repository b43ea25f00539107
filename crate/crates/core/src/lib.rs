//! Quantum adaptive search (QAGS) for bounded global minimization.
//!
//! Objective values on a uniform qubit grid are encoded into a simulated
//! quantum state with Boltzmann-weighted probabilities. The box is then
//! contracted around the high-probability region and the process repeats on
//! a fresh grid over the smaller box. A bounded quasi-Newton pass finishes
//! the search.
//!
//! ```
//! use qags::{run, Objective, QagsConfig, SearchBox};
//!
//! let f = Objective::sphere(2, None).unwrap();
//! let bounds = SearchBox::cube(2, -5.0, 5.0).unwrap();
//! let report = run(&f, &bounds, &QagsConfig::new(4)).unwrap();
//! assert!(report.found_value < 1e-10);
//! ```

pub mod baseline;
pub mod bench;
pub mod cli;
pub mod contraction;
pub mod driver;
pub mod error;
pub mod grid;
pub mod objective;
pub mod quantum;
pub mod refine;

pub use baseline::{run_ags, AgsConfig};
pub use contraction::{
    contract_bounds, select_region, should_terminate, RegionSelection, TerminationPolicy, Verdict,
};
pub use driver::{run, trace_boxes, trace_jsonl, IterationRecord, Method, QagsConfig, RunReport};
pub use error::{QagsError, Result};
pub use grid::{GridSpec, SearchBox};
pub use objective::Objective;
pub use quantum::{build_distribution, entropy_fraction, sample, EncodingLaw, QuantumDistribution};
pub use refine::{refine, Refinement, RefinerConfig};
