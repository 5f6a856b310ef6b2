//! Simulation of quantum illumination with a phase-sensitively amplified idler.
//!
//! A two-mode squeezed vacuum is produced, its idler is amplified, the signal
//! probes a target region, and the returned light is interfered with the idler
//! on a 50:50 beam splitter. The difference of the two photocounts decides
//! whether the target is present.
//!
//! * [`gaussian`]: covariance-matrix algebra for zero-mean two-mode states.
//! * [`illumination`]: receiver statistics, error probabilities and SNRs.
//! * [`fock`]: a truncated number-basis reference used to validate the
//!   Gaussian moment formulas.
//! * [`montecarlo`]: seeded sampling of the decision statistic.
//!
//! ```
//! use qillum::{detection_report, Gain, ScenarioParams};
//!
//! let p = ScenarioParams::new(0.01, 100.0, 1e-3, Gain::from_db(15.0)?, 1_000_000_000)?;
//! let report = detection_report(&p)?;
//! assert!(report.p_error < 0.5);
//! # Ok::<(), qillum::Error>(())
//! ```

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod illumination;
pub mod montecarlo;

pub use error::{Error, Result};
pub use gaussian::{
    amplify_mode, apply_target_channel, balanced_beam_splitter, cross_correlations, log_negativity,
    min_ppt_symplectic_eigenvalue, tmsv_covariance, CrossCorrelations, Gain, Hypothesis,
    TwoModeCovariance,
};
pub use illumination::{
    classify_regime, count_difference_stats, detection_report, error_probability, gain_prefactor,
    hypothesis_covariances, receiver_covariances, snr_csh_closed_form, snr_qi_closed_form,
    CountStats, DetectionReport, Regime, RegimeReport, ScenarioParams,
};

// Runs the code listings of the guide in book/ as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/gaussian-states.md")]
    mod gaussian_states {}
    #[doc = include_str!("../../../book/src/receiver.md")]
    mod receiver {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
    #[doc = include_str!("../../../book/src/fock-oracle.md")]
    mod fock_oracle {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
