//! Receiver statistics and error probabilities for the beam-splitter
//! count-difference receiver.
//!
//! The idler is amplified, the signal passes through the target channel, and
//! the two are combined on a 50:50 beam splitter whose output ports are photon
//! counted. The decision statistic is the total count difference over `M`
//! mode pairs, treated as Gaussian under each hypothesis.

use std::fmt;

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::gaussian::{
    amplify_mode, apply_target_channel, balanced_beam_splitter, tmsv_covariance, Gain, Hypothesis,
    TwoModeCovariance,
};

/// Below this many mode pairs the Gaussian approximation to the totals is
/// flagged as unreliable.
pub const CLT_MIN_MODES: u64 = 100;

const VARIANCE_FLOOR: f64 = 1e-13;

/// Physical parameters of one detection scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Mean signal photons per mode.
    pub n_s: f64,
    /// Mean background photons per mode at the receiver.
    pub n_b: f64,
    /// Target reflectance.
    pub kappa: f64,
    /// Idler amplifier gain.
    pub gain: Gain,
    /// Number of signal–idler mode pairs `M`.
    pub modes: u64,
}

impl ScenarioParams {
    pub fn new(n_s: f64, n_b: f64, kappa: f64, gain: Gain, modes: u64) -> Result<Self> {
        let p = ScenarioParams {
            n_s,
            n_b,
            kappa,
            gain,
            modes,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("n_s", self.n_s, self.n_s >= 0.0, "finite and >= 0")?;
        check_range("n_b", self.n_b, self.n_b >= 0.0, "finite and >= 0")?;
        check_range(
            "kappa",
            self.kappa,
            (0.0..1.0).contains(&self.kappa),
            "0 <= kappa < 1",
        )?;
        Gain::linear(self.gain.value())?;
        check_range("modes", self.modes as f64, self.modes >= 1, "at least 1")?;
        Ok(())
    }

    /// Whether `M` is large enough for the Gaussian treatment of the totals.
    pub fn clt_reliable(&self) -> bool {
        self.modes >= CLT_MIN_MODES
    }

    pub fn with_modes(self, modes: u64) -> Self {
        ScenarioParams { modes, ..self }
    }

    fn symbols(&self) -> Symbols {
        let nu = 2.0 * self.n_s + 1.0;
        let c = 2.0 * (self.n_s * (self.n_s + 1.0)).sqrt();
        let omega = 2.0 * self.n_b + 1.0;
        Symbols {
            nu,
            c,
            omega,
            gamma: 2.0 * self.kappa * self.n_s + omega,
        }
    }
}

struct Symbols {
    nu: f64,
    c: f64,
    omega: f64,
    gamma: f64,
}

/// Per-mode-pair statistics of the count difference `N₊ − N₋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub mean: f64,
    pub variance: f64,
}

impl CountStats {
    pub fn std_dev(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Threshold, SNRs and error probability of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionReport {
    /// Decision threshold on the total count difference; declare the target
    /// present above it.
    pub threshold: f64,
    /// Total error probability with equal priors.
    pub p_error: f64,
    /// Closed-form single-mode SNR, `Δμ²/(σ̃₀ + σ̃₁)²` with symmetrically
    /// ordered variances.
    pub snr_paper: f64,
    /// `Δμ²/(2(σ₀ + σ₁)²)`, for which `p_error = erfc(√(M·snr))/2`.
    pub snr_first_principles: f64,
    pub h0: CountStats,
    pub h1: CountStats,
    pub modes: u64,
    pub clt_reliable: bool,
}

/// Covariances of the received field and idler under H₀ and H₁, before the
/// beam splitter.
pub fn hypothesis_covariances(
    p: &ScenarioParams,
) -> Result<(TwoModeCovariance, TwoModeCovariance)> {
    p.validate()?;
    let source = amplify_mode(&tmsv_covariance(p.n_s)?, 2, p.gain)?;
    let v0 = apply_target_channel(&source, p.kappa, p.n_b, Hypothesis::Absent)?;
    let v1 = apply_target_channel(&source, p.kappa, p.n_b, Hypothesis::Present)?;
    Ok((v0, v1))
}

/// Covariances at the two photodetectors under H₀ and H₁.
pub fn receiver_covariances(p: &ScenarioParams) -> Result<(TwoModeCovariance, TwoModeCovariance)> {
    let (v0, v1) = hypothesis_covariances(p)?;
    Ok((balanced_beam_splitter(&v0)?, balanced_beam_splitter(&v1)?))
}

/// Mean and variance of `N₁ − N₂` for a zero-mean Gaussian state.
///
/// Uses Isserlis factorisation of the fourth quadrature moments:
///
/// * `nⱼ = (V_qq + V_pp − 1)/2`
/// * `Var Nⱼ = (V_qq² + V_pp² + 2V_qp²)/2 − 1/4`
/// * `Cov(N₁, N₂) = (V_q₁q₂² + V_p₁p₂² + V_q₁p₂² + V_p₁q₂²)/2`
pub fn count_difference_stats(v: &TwoModeCovariance) -> Result<CountStats> {
    v.check_physical()?;
    let m = v.matrix();
    // n₁ − n₂ taken entry by entry; the −1/2 offsets cancel exactly.
    let mean = ((m[(0, 0)] - m[(2, 2)]) + (m[(1, 1)] - m[(3, 3)])) / 2.0;
    let scale = v.matrix().amax().max(1.0);
    let mut variance = wigner_count_difference_variance(v) - 0.5;
    // Rounding floor: the vacuum gives ~1e-16 instead of 0.
    if variance < VARIANCE_FLOOR * scale * scale {
        variance = 0.0;
    }
    Ok(CountStats { mean, variance })
}

/// The count-difference variance without the `−1/4` ordering terms, i.e. the
/// variance of the difference of classical Wigner intensities.
pub fn wigner_count_difference_variance(v: &TwoModeCovariance) -> f64 {
    let m = v.matrix();
    let local = |o: usize| {
        (m[(o, o)].powi(2) + m[(o + 1, o + 1)].powi(2) + 2.0 * m[(o, o + 1)].powi(2)) / 2.0
    };
    let cov = (m[(0, 2)].powi(2) + m[(1, 3)].powi(2) + m[(0, 3)].powi(2) + m[(1, 2)].powi(2)) / 2.0;
    local(0) + local(2) - 2.0 * cov
}

pub fn detection_report(p: &ScenarioParams) -> Result<DetectionReport> {
    let (r0, r1) = receiver_covariances(p)?;
    let h0 = count_difference_stats(&r0)?;
    let h1 = count_difference_stats(&r1)?;
    let (s0, s1) = (h0.std_dev(), h1.std_dev());
    let spread = s0 + s1;
    if spread <= 0.0 {
        return Err(Error::Degenerate);
    }
    let m = p.modes as f64;
    let delta = h1.mean - h0.mean;
    let snr_first_principles = delta * delta / (2.0 * spread * spread);
    Ok(DetectionReport {
        threshold: m * (h0.mean * s1 + h1.mean * s0) / spread,
        p_error: error_probability(snr_first_principles, p.modes),
        snr_paper: snr_qi_closed_form(p),
        snr_first_principles,
        h0,
        h1,
        modes: p.modes,
        clt_reliable: p.clt_reliable(),
    })
}

/// `erfc(√(M·snr))/2`.
pub fn error_probability(snr: f64, modes: u64) -> f64 {
    0.5 * erfc((modes as f64 * snr).sqrt())
}

/// Gain-dependent factor `(G − G⁻¹)²/(G² + G⁻²)` of the SNR.
pub fn gain_prefactor(gain: Gain) -> f64 {
    let g = gain.value();
    let inv = g.recip();
    (g - inv).powi(2) / (g * g + inv * inv)
}

/// Single-mode-pair SNR of the amplified-idler receiver.
pub fn snr_qi_closed_form(p: &ScenarioParams) -> f64 {
    let Symbols {
        nu,
        c,
        omega,
        gamma,
    } = p.symbols();
    let kc2 = p.kappa * c * c;
    let denom = ((gamma * nu + kc2).sqrt() + (nu * omega).sqrt()).powi(2);
    gain_prefactor(p.gain) * kc2 / denom
}

/// Single-mode SNR of coherent-state homodyne detection at equal energy.
pub fn snr_csh_closed_form(p: &ScenarioParams) -> f64 {
    p.kappa * p.n_s / (4.0 * p.n_b + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `n_s < 1`: roughly a 3 dB gain over the classical benchmark.
    QuantumAdvantage,
    /// `1 ≤ n_s ≤ n_b/κ`: matches the classical benchmark.
    Parity,
    /// `n_s > n_b/κ`: SNR saturates and falls behind.
    Disadvantage,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::QuantumAdvantage => "QUANTUM_ADVANTAGE",
            Regime::Parity => "PARITY",
            Regime::Disadvantage => "DISADVANTAGE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `snr_qi / snr_csh`; NaN when both vanish.
    pub ratio: f64,
}

/// Labels the scenario by signal brightness and reports the exact SNR ratio.
/// The label uses asymptotic cut points; the ratio is authoritative.
pub fn classify_regime(p: &ScenarioParams) -> RegimeReport {
    let regime = if p.n_s < 1.0 {
        Regime::QuantumAdvantage
    } else if p.n_s <= p.n_b / p.kappa {
        Regime::Parity
    } else {
        Regime::Disadvantage
    };
    RegimeReport {
        regime,
        ratio: snr_qi_closed_form(p) / snr_csh_closed_form(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scenario(n_s: f64, n_b: f64, kappa: f64, g: f64) -> ScenarioParams {
        ScenarioParams::new(n_s, n_b, kappa, Gain::linear(g).unwrap(), 1000).unwrap()
    }

    #[test]
    fn validation() {
        let g = Gain::UNITY;
        assert!(ScenarioParams::new(1.0, 1.0, 1.0, g, 10).is_err());
        assert!(ScenarioParams::new(1.0, 1.0, 0.1, g, 0).is_err());
        assert!(ScenarioParams::new(-1.0, 1.0, 0.1, g, 10).is_err());
        assert!(ScenarioParams::new(1.0, f64::NAN, 0.1, g, 10).is_err());
        assert!(!scenario(1.0, 1.0, 0.1, 1.0).with_modes(99).clt_reliable());
        assert!(scenario(1.0, 1.0, 0.1, 1.0).with_modes(100).clt_reliable());
    }

    #[test]
    fn hypothesis_entries() {
        let (v0, v1) = hypothesis_covariances(&scenario(1.0, 1.0, 0.01, 2.0)).unwrap();
        assert_relative_eq!(v1.matrix()[(0, 0)], 1.51, max_relative = 1e-14);
        assert_relative_eq!(v1.matrix()[(2, 2)], 6.0, max_relative = 1e-14);
        let cc = crate::gaussian::cross_correlations(&v0).unwrap();
        assert_eq!(cc.picc.norm(), 0.0);
        assert_eq!(cc.pscc.norm(), 0.0);

        let (v0, v1) = hypothesis_covariances(&scenario(1.0, 1.0, 0.0, 2.0)).unwrap();
        assert!((v0.matrix() - v1.matrix()).amax() < 1e-15);
    }

    #[test]
    fn vacuum_count_stats() {
        let s = count_difference_stats(&TwoModeCovariance::vacuum()).unwrap();
        assert_eq!(s.mean, 0.0);
        assert!(s.variance.abs() < 1e-15);
    }

    #[test]
    fn background_only_count_stats() {
        // Thermal ⊗ thermal with one photon each: 2n₁n₂ + n₁ + n₂ = 4.
        let (r0, _) = receiver_covariances(&scenario(1.0, 1.0, 0.01, 1.0)).unwrap();
        let s = count_difference_stats(&r0).unwrap();
        assert!(s.mean.abs() < 1e-15);
        assert_relative_eq!(s.variance, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn present_mean_difference() {
        let (_, r1) = receiver_covariances(&scenario(1.0, 1.0, 0.01, 2.0)).unwrap();
        let s = count_difference_stats(&r1).unwrap();
        assert_relative_eq!(s.mean, 0.21213203435596426, max_relative = 1e-13);
    }

    #[test]
    fn coin_flip_without_reflection() {
        let r = detection_report(&scenario(1.0, 1.0, 0.0, 2.0)).unwrap();
        assert_eq!(r.p_error, 0.5);
        assert_eq!(r.snr_first_principles, 0.0);
        assert_eq!(error_probability(0.0, 12345), 0.5);
    }

    #[test]
    fn degenerate_vacuum_scenario() {
        let p = ScenarioParams::new(0.0, 0.0, 0.5, Gain::UNITY, 10).unwrap();
        assert_eq!(detection_report(&p), Err(Error::Degenerate));
    }

    #[test]
    fn erfc_at_two() {
        // √(M·snr) = 2.
        assert_relative_eq!(
            error_probability(4e-4, 10_000),
            2.3388674905235884e-3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn prefactor_values() {
        assert_eq!(gain_prefactor(Gain::UNITY), 0.0);
        let g15 = Gain::from_db(15.0).unwrap();
        assert_relative_eq!(
            gain_prefactor(g15),
            0.9368176291674649,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            gain_prefactor(Gain::linear(1e6).unwrap()),
            1.0,
            max_relative = 1e-11
        );
    }

    #[test]
    fn snr_limits() {
        assert_eq!(snr_qi_closed_form(&scenario(1.0, 1.0, 0.1, 1.0)), 0.0);
        let dim = scenario(1e-4, 100.0, 1e-3, 1e3);
        assert_relative_eq!(snr_qi_closed_form(&dim), 5.0e-10, max_relative = 0.02);
        let bright = scenario(1e9, 100.0, 1e-3, 1e3);
        assert_relative_eq!(snr_qi_closed_form(&bright), 0.5, max_relative = 0.05);
    }

    #[test]
    fn benchmark_snr() {
        assert_relative_eq!(
            snr_csh_closed_form(&scenario(3.0, 0.0, 0.1, 1.0)),
            0.15,
            max_relative = 1e-15
        );
        let p = scenario(1.0, 100.0, 1e-3, 1.0);
        assert_relative_eq!(
            snr_csh_closed_form(&p),
            2.4875621890547264e-6,
            max_relative = 1e-14
        );
        assert_relative_eq!(snr_csh_closed_form(&p), 1e-3 / 400.0, max_relative = 0.01);
    }

    #[test]
    fn regimes() {
        let g = 5.6234;
        let low = classify_regime(&scenario(1e-3, 100.0, 1e-3, g));
        assert_eq!(low.regime, Regime::QuantumAdvantage);
        assert_relative_eq!(low.ratio, 2.0, max_relative = 0.1);
        let mid = classify_regime(&scenario(100.0, 100.0, 1e-3, g));
        assert_eq!(mid.regime, Regime::Parity);
        assert_relative_eq!(mid.ratio, 1.0, max_relative = 0.1);
        let high = classify_regime(&scenario(1e7, 100.0, 1e-3, g));
        assert_eq!(high.regime, Regime::Disadvantage);
        assert!(high.ratio < 1.0);
        assert_eq!(Regime::QuantumAdvantage.to_string(), "QUANTUM_ADVANTAGE");
    }
}
