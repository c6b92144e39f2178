//! Exact weight enumerating functions of polar and PAC cosets.

mod cache;
pub mod engine;
pub mod oracle;
mod poly;

pub use cache::{CacheKey, WefCache};
pub use engine::{
    calc_coset_wef, code_coset_wef, exact_spectrum, pac_coset_wef, valid_prefix, DEFAULT_MF_BUDGET,
};
pub use oracle::{brute_force_coset_wef, brute_force_pac_coset_wef, enumerate_code_spectrum};
pub use poly::{ln_big, WeightEnumerator};
