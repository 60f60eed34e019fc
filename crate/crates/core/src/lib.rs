//! Named-index tensors with optional quantum-number block sparsity.

pub mod blocksparse;
pub mod decomp;
pub mod dense;
pub mod error;
pub mod index;
pub mod itensor;
pub mod linalg;
pub mod name;
pub mod qn;
pub mod scalar;

pub use blocksparse::{blocksparse_contract, BlockCoord, BlockSparseTensor};
pub use decomp::{eigen_hermitian, qr, svd, truncate_spectrum, EigenResult, Spectrum, SvdResult, TruncParams};
pub use dense::{dense_contract, permutedims, DenseTensor};
pub use error::{Result, TensorError};
pub use index::{seed_index_ids, Arrow, Index, IndexVal, TagSet};
pub use itensor::{
    combinedind, combiner, commonind, commoninds, contract, delta, diag_itensor, uniqueinds, uniqueinds_of, Data,
    ElType, ITensor, Storage, StorageKind,
};
pub use name::ShortName;
pub use qn::QN;
pub use scalar::{RealScalar, Scalar};

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex<f64>;
