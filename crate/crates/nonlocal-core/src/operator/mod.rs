//! Pointwise principal-value evaluation of ℒ u = -(-Δ_p)^s u and its
//! dimension-reduction formulas.

mod caccioppoli;
mod constants;
mod profile1d;
mod pv;
mod radial3d;
mod tail_rule;
mod weights;

pub use caccioppoli::{caccioppoli_gap, CaccioppoliGap};
pub use constants::{dead_variable_constant, record_dead_variable_constant};
pub use profile1d::eval_profile_1d;
pub use pv::{eval_pv, PvContext, PvEvaluation};
pub use radial3d::radial_reduce_3d;
pub use tail_rule::TailRule;
pub use weights::PairWeights;
