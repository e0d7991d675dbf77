use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("tuple has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("residue {value} out of range for p = {p}")]
    ResidueOutOfRange { value: u64, p: u32 },

    #[error("cannot parse tuple {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("operands live over different primes ({left} vs {right})")]
    PrimeMismatch { left: u32, right: u32 },

    #[error("tuple {0} is constant, so it does not induce an irreducible character")]
    ConstantTuple(String),

    #[error("scale factor {k} is not a unit mod {p}")]
    NotAUnit { k: u64, p: u32 },

    #[error("tuple {0} is not in canonical (least-rotation) form")]
    NotCanonical(String),

    #[error("theorem reproduction needs p >= 5, got {0}")]
    TheoremPrime(u32),

    #[error("p = {p} exceeds the oracle cap of {cap}")]
    OracleCap { p: u32, cap: u32 },

    #[error("integer overflow in cyclotomic arithmetic")]
    Overflow,

    #[error("exhaustive search needs about {estimate} pairs, over the budget of {budget}")]
    BudgetExceeded { estimate: u128, budget: u64 },

    #[error("invalid shard {index}/{total}")]
    BadShard { index: u64, total: u64 },

    #[error("reports cannot be merged: {0}")]
    ConfigMismatch(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that indicate a defect in this crate rather than bad input.
    pub fn is_defect(&self) -> bool {
        matches!(self, Error::Invariant(_) | Error::Overflow)
    }
}
