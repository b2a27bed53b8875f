//! Quantization maps, collective-spin ground states, and spin coherent-state
//! diagnostics for the mean-field Curie-Weiss model.
//!
//! The crate is organized around the correspondence between polynomials on
//! the state space of M_k(C) and symmetrized operators on N-fold tensor
//! powers:
//!
//! - [`liealg`]: generator bases of su(k) and structure constants;
//! - [`statespace`]: density matrices, Bloch-style coordinates, membership;
//! - [`poisson`]: polynomial algebra and the Lie-Poisson bracket;
//! - [`tensor`]: symmetrization, quantization, and word operators on
//!   (C^k)^(tensor N);
//! - [`dicke`]: Curie-Weiss ground states in the symmetric sector;
//! - [`coherent`]: spin coherent states, Husimi profiles, sphere quadrature;
//! - [`limits`]: classical-limit sweeps, commutator defects, combinatorial
//!   estimates;
//! - [`numerics`]: shared numerical kernels;
//! - [`acceptance`]: the end-to-end verification suite.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod coherent;
pub mod dicke;
pub mod error;
pub mod liealg;
pub mod limits;
pub mod numerics;
pub mod poisson;
pub mod statespace;
pub mod tensor;

pub use acceptance::{criterion, run_all, CheckLine, CriterionReport, CRITERION_COUNT};
pub use coherent::{
    assumption_c_sup, build_quadrature, coherent_components, default_quadrature,
    delta_family_rate, exact_constant, exact_constant_reference, fwhm_scan, husimi_peaks,
    husimi_profile, overlap_squared, resolution_identity_check, table1_integral,
    table2_integral, table3_integrals, DeltaFamilyResult, HusimiProfile, SpherePoint,
    SphereQuadrature, RESOLUTION_SEED,
};
pub use dicke::{
    cw_hamiltonian_words, dicke_vector_dense, ground_state, q_expectation, u_parity,
    CwHamiltonian, GroundStateResult, PURIFICATION_THRESHOLD,
};
pub use error::{CwqError, Result};
pub use liealg::{CMatrix, CVector, Convention, StructureConstants, SuBasis};
pub use limits::{
    c_n_ratio, classical_expectation, classical_limit_sweep, cw_symbol, dgr_defect, dgr_sweep,
    equivariance_check, hamiltonian_gap_norm, minimize_classical, norm_convergence_sweep,
    p3_fraction, perm_count, ClassicalGroundData, ClassicalSweep, NormConvergence, SweepResult,
    NORM_SEED,
};
pub use poisson::{
    chi, chi_inverse, poisson_bracket, poisson_bracket_signed, sup_norm_estimate, Polynomial,
    SymbolElement, DEFAULT_BRACKET_SIGN,
};
pub use statespace::{
    char_poly_coefficients, f_k, f_k_inverse, f_k_matrix, membership, DensityMatrix,
    MembershipResult, StateCoordinates, MEMBERSHIP_TOL,
};
pub use tensor::{
    commutator, commutator_lemma_residual, embed, inject, operator_norm_dense,
    product_state_functional, product_state_functional_words, quantize, quantize_words,
    symmetrize, word_scaled_sum, DenseOperator, WordOperator, WordOperatorBuilder,
    DENSE_DIM_CAP,
};
