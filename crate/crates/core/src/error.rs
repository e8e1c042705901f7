use thiserror::Error;

use crate::layered::VertexId;
use crate::perm::Permutation;
use crate::scheme::Inequality;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Infeasible,
    SearchFailure,
    CapExceeded,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown family kind `{0}`")]
    UnknownFamily(String),

    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("inconsistent layered description: {0}")]
    InconsistentLayering(String),

    #[error("radius {n} out of range 0..={radius}")]
    RadiusOutOfRange { n: usize, radius: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {0} is not in the permutation domain")]
    NotInDomain(VertexId),

    #[error("permutations act on different domains")]
    DomainMismatch,

    #[error("vertex set is not fixed setwise (vertex {0} leaves it)")]
    NotSetwiseFixed(VertexId),

    #[error("automorphism group exceeds cap of {cap} elements ({} partial elements kept)", partial.len())]
    CapExceeded { cap: usize, partial: Vec<Permutation> },

    #[error("support of size {size} exceeds enumeration limit {limit}")]
    EnumerationLimit { size: usize, limit: usize },

    #[error("{} element(s) restrict to the identity on the support", elements.len())]
    IdentityOnSupport { elements: Vec<usize> },

    #[error("motion bound not satisfied: motion {motion} <= 2 log|A| = {threshold:.4}")]
    BoundNotSatisfied { motion: usize, threshold: f64 },

    #[error("element {element} preserves every coloring of the support")]
    Unbreakable { element: usize },

    #[error("no breaking coloring exists on a support of {support} vertices")]
    NoBreakingColoring { support: usize },

    #[error("randomized search gave up after {tries} tries (best coloring left {best_survivors} survivors)")]
    RandomizedExhausted { tries: u64, best_survivors: usize },

    #[error("choose_k exceeded ceiling {ceiling}; inequality {last_failed} still fails")]
    ChooseKCeiling { ceiling: u64, last_failed: Inequality },

    #[error("truncation too shallow: need radius {needed}, have {radius}")]
    TruncationTooShallow { needed: usize, radius: usize },

    #[error("only {uncolored} uncolored spheres in window, need at least {required:.2}")]
    TooFewUncolored { uncolored: usize, required: f64 },

    #[error("remainder block has {remainder} spheres, needs more than {required:.2}")]
    RemainderTooSmall { remainder: i64, required: f64 },

    #[error("fixroot coloring leaves {survivors} base-moving automorphism(s) unbroken")]
    FixrootInsufficient { survivors: usize },

    #[error("growth check failed first at radius {first_failure}")]
    GrowthRefused { first_failure: usize },

    #[error("block search failed for class {class} at m = {m}: {reason}")]
    BlockSearchFailed { m: usize, class: usize, reason: String },

    #[error("component tree unavailable: {0}")]
    Levels(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            UnknownFamily(_)
            | InvalidFamily(_)
            | InconsistentLayering(_)
            | RadiusOutOfRange { .. }
            | InvalidParameter(_)
            | NotInDomain(_)
            | DomainMismatch
            | NotSetwiseFixed(_)
            | IdentityOnSupport { .. }
            | EnumerationLimit { .. }
            | Levels(_) => ErrorKind::Config,
            ChooseKCeiling { .. }
            | TruncationTooShallow { .. }
            | TooFewUncolored { .. }
            | RemainderTooSmall { .. }
            | GrowthRefused { .. }
            | BoundNotSatisfied { .. } => ErrorKind::Infeasible,
            Unbreakable { .. }
            | NoBreakingColoring { .. }
            | RandomizedExhausted { .. }
            | FixrootInsufficient { .. }
            | BlockSearchFailed { .. } => ErrorKind::SearchFailure,
            CapExceeded { .. } => ErrorKind::CapExceeded,
            Io(_) | Json(_) => ErrorKind::Io,
        }
    }

    /// Short stable tag for machine-readable error records.
    pub fn tag(&self) -> &'static str {
        use Error::*;
        match self {
            UnknownFamily(_) => "unknown_family",
            InvalidFamily(_) => "invalid_family",
            InconsistentLayering(_) => "inconsistent_layering",
            RadiusOutOfRange { .. } => "radius_out_of_range",
            InvalidParameter(_) => "invalid_parameter",
            NotInDomain(_) => "not_in_domain",
            DomainMismatch => "domain_mismatch",
            NotSetwiseFixed(_) => "not_setwise_fixed",
            CapExceeded { .. } => "cap_exceeded",
            EnumerationLimit { .. } => "enumeration_limit",
            IdentityOnSupport { .. } => "identity_on_support",
            BoundNotSatisfied { .. } => "bound_not_satisfied",
            Unbreakable { .. } => "unbreakable",
            NoBreakingColoring { .. } => "no_breaking_coloring",
            RandomizedExhausted { .. } => "randomized_exhausted",
            ChooseKCeiling { .. } => "choose_k_ceiling",
            TruncationTooShallow { .. } => "truncation_too_shallow",
            TooFewUncolored { .. } => "too_few_uncolored",
            RemainderTooSmall { .. } => "remainder_too_small",
            FixrootInsufficient { .. } => "fixroot_insufficient",
            GrowthRefused { .. } => "growth_refused",
            BlockSearchFailed { .. } => "block_search_failed",
            Levels(_) => "levels",
            Io(_) => "io",
            Json(_) => "json",
        }
    }
}
