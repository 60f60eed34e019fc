//! Matrix product states and operators, AutoMPO and two-site DMRG.

pub mod apply;
pub mod dmrg;
pub mod error;
pub mod mps;
pub mod opsum;
pub mod sitetypes;

pub use apply::{apply_mpo, mpo_contract, ApplyMethod};
pub use dmrg::{dmrg, dmrg_multi, DmrgOptions, DmrgResult, Observer, SweepRecord, Sweeps};
pub use error::{MpsError, Result};
pub use mps::{add, inner_mpo, product_mps, random_mps, random_mps_qn, Chain, Mpo, Mps};
pub use opsum::{heisenberg, OpSum, OpTerm};
pub use sitetypes::{op, register_sitetype, siteinds, state, SiteDef};
