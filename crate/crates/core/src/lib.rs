//! Entangled neutral-kaon pairs: joint detection probabilities under unitary
//! time evolution, Bell-CHSH and Wigner-type inequalities, CP violation, and
//! a decoherence model fitted to asymmetry data.
//!
//! All times are proper times in units of `tau_S`.

pub mod chsh;
pub mod constants;
pub mod decoherence;
pub mod error;
pub mod evolution;
pub mod optimize;
pub mod state;
pub mod wigner;

pub use chsh::{
    expectation_qm, kaon_chsh_times, maximize_s, photon_tsirelson, s_correlation_form,
    s_generalized, s_kaon_strangeness, s_photon, ChshSetting, SFunction, CHSH_BOUND,
    GENERALIZED_BOUND,
};
pub use constants::{default_constants, ConstantsOverrides, DecayMode, PhysicalConstants};
pub use decoherence::{
    fit_zeta, modified_asymmetry, modified_like_probability, modified_unlike_probability,
    read_points_csv, AsymmetryPoint, Basis, FitMode, FitResult, ZetaRange,
};
pub use error::{KaonError, Result};
pub use evolution::{
    asymmetry_qm, joint_like_probability, joint_outcome_table, joint_unlike_probability,
    omega_overlap, survival_amplitude, ComplexEigenvalue, EigenLabel, JointOutcomeTable,
    PairEngine,
};
pub use num_complex::Complex64;
pub use optimize::{maximize, Bounds, MaximizationReport, MaximizeOptions};
pub use state::{inner_product, named_state, NamedState, QuasiSpinState};
pub use wigner::{
    h_correction, region_scan, two_times_boundary, violation_threshold, wigner_equal_times,
    wigner_t0, wigner_two_times, zeta_lower_bound, RegionRow, WignerEvaluation, ZetaBound,
};
