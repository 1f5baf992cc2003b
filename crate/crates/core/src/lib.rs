//! Exact nonequilibrium steady state of the boundary-driven open XXZ chain.
//!
//! The steady state is `ρ = S_n S_n† / tr(S_n S_n†)` with `S_n` a matrix
//! product operator over tridiagonal auxiliary matrices `A_0, A_±`.
//! Observables reduce to products of the tridiagonal transfer matrices
//! `T, V, W` and cost `O(n²)` or less; dense density matrices and a
//! brute-force Liouvillian null-space solver are available for small chains.
//!
//! ```
//! use xxz_ness::{chain_table, build_transfer, Balancing, ChainContraction};
//!
//! let ts = build_transfer(&chain_table(0.5, 1.0, 40)?, Balancing::On)?;
//! let chain = ChainContraction::new(&ts, 40)?;
//! let j = chain.current()?;
//! assert!((j - xxz_ness::closedform::ballistic_current_limit(1.0)).abs() < 1e-3);
//! # Ok::<(), xxz_ness::Error>(())
//! ```
//!
//! Everything except the dense eigen-solvers is generic over the real scalar
//! ([`Real`]); `f64` aliases are provided, and [`dd::Dd`] gives roughly 32
//! significant digits where cancellation matters.

pub mod anisotropy;
pub mod closedform;
pub mod dd;
pub mod density;
pub mod error;
pub mod linalg;
pub mod mpo;
pub mod oracle;
pub mod scalar;
pub mod spin;
pub mod transfer;
pub mod verify;

pub use anisotropy::{
    amplitude_table, chain_table, isotropic_amplitude_table, make_anisotropy, table_for, truncation_dim,
    AmplitudeTable, AnisotropySpec, GaugeChoice, Regime, TauPolicy,
};
pub use closedform::AsymptoticPrediction;
pub use density::{build_cholesky, build_density, ness_density, CholeskyFactor, DensityMatrix};
pub use error::{Error, Result};
pub use mpo::{build_b_matrices, build_mpo, BMatrices, MpoMatrices};
pub use oracle::{build_liouvillian, oracle_density, solve_ness, LiouvillianMatrix, OracleSolution};
pub use scalar::{Cx, Real};
pub use spin::Pauli;
pub use transfer::{build_transfer, observables, Balancing, ChainContraction, ObservableReport, TransferSet};
pub use verify::{AlgebraReport, RelationId};

pub type C64 = Cx<f64>;
pub type AnisotropySpec64 = AnisotropySpec<f64>;
pub type AmplitudeTable64 = AmplitudeTable<f64>;
pub type GaugeChoice64 = GaugeChoice<f64>;
pub type MpoMatrices64 = MpoMatrices<f64>;
pub type BMatrices64 = BMatrices<f64>;
pub type TransferSet64 = TransferSet<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type CholeskyFactor64 = CholeskyFactor<f64>;
pub type LiouvillianMatrix64 = LiouvillianMatrix<f64>;
pub type ObservableReport64 = ObservableReport<f64>;
