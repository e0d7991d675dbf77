//! Irreducible characters of the wreath product `P = C_p wr C_p` and the
//! constituents of products of faithful ones.
//!
//! Characters of the base group `A = C_p^p` are residue tuples; the
//! non-linear irreducibles of `P` are induced from non-constant tuples and
//! indexed by rotation classes. [`decomposition`] turns tuple arithmetic into
//! constituent counts, [`oracle`] re-derives them from exact character sums
//! in `Z[zeta_p]`, and [`search`] scans faithful pairs for the distribution
//! of counts.

pub mod cli;
pub mod cyclotomic;
pub mod decomposition;
pub mod error;
pub mod oracle;
pub mod prime;
pub mod search;
pub mod tuple;

pub use cyclotomic::{Coefficient, CyclotomicInt};
pub use decomposition::{
    count_distinct, decompose, product_sums, verify_theorem, CharacterId, Decomposition,
    DistinctCounter, TheoremReport,
};
pub use error::{Error, Result};
pub use oracle::Oracle;
pub use prime::Prime;
pub use search::{merge_reports, run_search, SearchConfig, SearchMode, SearchReport, Shard, Symmetry};
pub use tuple::{OrbitRep, Tuple};

/// Cyclotomic integers with machine-word coefficients, the oracle default.
pub type Cyclotomic64 = CyclotomicInt<i64>;
/// Cyclotomic integers with 128-bit coefficients.
pub type Cyclotomic128 = CyclotomicInt<i128>;
/// Cyclotomic integers with arbitrary-precision coefficients.
pub type CyclotomicBig = CyclotomicInt<num_bigint::BigInt>;
