//! Moment-SOS hierarchy for polynomial optimization at desk scale.
//!
//! The pipeline: a polynomial optimization problem (minimize `f` over a basic
//! semialgebraic set `S(g, h)`) is relaxed to a standard-form semidefinite
//! program over block-diagonal moment and localizing matrices, solved with a
//! dense primal-dual interior-point method, and the dual solution is turned
//! into a weighted sum-of-squares certificate. The certificate is rounded to
//! low bit-complexity rationals, the rounding defect is computed exactly, and
//! the final lower bound is re-verified in exact rational arithmetic.
//!
//! Alongside the solve path, the crate ships the diagnostics that make the
//! relaxation well-conditioned in the first place: exact moments of uniform
//! box measures, eigenvalue lower bounds for scaled rational matrices, and
//! ball-radius certifiers for the feasible region (strict-point Lipschitz
//! balls, John-ellipsoid and tubular-neighborhood volume formulas, and the
//! repeated-squaring family of sets that contain no large ball at all).
//!
//! All bound-carrying arithmetic is exact (`num::BigRational`); floating
//! point appears only inside the SDP solver and in measurement-style
//! diagnostics, never in a verified certificate.

pub mod certificate;
pub mod conditioning;
mod error;
pub mod geometry;
pub mod linalg;
pub mod measures;
pub mod par;
pub mod poly;
pub mod pop;
pub mod rational;
pub mod sdp;
pub mod solver;

pub use certificate::{
    extract_sos, power_gap_decompose, round_certificate, verify_certificate, Certificate,
    PowerGapDecomposition, QmSign, QmTerm, QmTermKind, RoundedCertificate, VerificationReport,
};
pub use conditioning::{
    analyze_conditioning, integer_eig_lower_bound, min_nonzero_eig, scaled_eig_bound,
    ConditioningReport, MatrixConditioning,
};
pub use error::Error;
pub use geometry::{
    ball_radius_from_volume, gen_squaring_counterexample, inner_ball_from_strict_point,
    john_ball_radius, tubular_volume_bound, BallCertificate, BallMethod,
};
pub use measures::{
    assemble_localizing_matrix, assemble_moment_matrix, box_functional, box_moment,
    MomentFunctional, SymMatrixQ,
};
pub use poly::{monomials_up_to, ExponentVec, Polynomial};
pub use pop::{detect_explicit_bound, BitComplexity, BoundReport, POPInstance};
pub use rational::{Int, Rat};
pub use sdp::{build_mom_sdp, objective_value, StandardFormSDP};
pub use solver::{solve_sdp, SdpSolution, SolveStatus, SolverConfig};
