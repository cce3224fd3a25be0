//! Exact construction and verification of the dual functions of the
//! Coulter-Matthews bent functions `Tr(a x^{(3^k+1)/2})` over GF(3^n).

pub mod cmdual;
pub mod error;
pub mod gf3;
pub mod limits;
pub mod trits;
pub mod walsh;

pub use cmdual::{
    algebraic_degree, classify_special, derive_params, dual_representation, eval_dual, gen_sets,
    Branch, CmParams, DualRep, IndexSets, ThreeTermDual, ThreeTermVariant, TraceTerm,
    UniversalDual,
};
pub use error::{Error, Result};
pub use gf3::{FieldCtx, FieldElement};
pub use trits::TernaryIndex;
pub use walsh::{EisensteinInt, SpectrumReport};
