mod dd;
pub mod poly;
pub mod recurrence;
pub mod weyl;

pub use poly::{pack, unpack, MatrixPoly, ScalarPoly, VectorPoly};
pub use recurrence::{
    five_term_sequence, g_sequence, matrix_sequence, pairing_functional, vector_sequence,
};
pub use weyl::{
    coeffs_from_f, markov_function, pairing_contour, weyl_function, ContourSpec, WeylMethod,
};
