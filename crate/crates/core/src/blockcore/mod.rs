pub mod block;
pub mod jacobi;
pub mod lattice;

pub use block::{Block2, C64, ONE, ZERO};
pub use jacobi::{
    blocks_to_lattice, commutator_residual, commutator_residual_rows, lattice_to_blocks,
    operator_norm_bound, power_block, spectrum, BlockJacobi,
};
pub use lattice::{lax_rhs, Coef, LatticeState};
