//! Zero-mean two-mode Gaussian states.
//!
//! States are stored as 4×4 covariance matrices over the quadratures
//! `(q₁, p₁, q₂, p₂)` with `q = (a + a†)/√2` and `p = (a − a†)/(i√2)`, so the
//! vacuum is `I/2`. Every optical element used here is a symplectic
//! congruence `V → S V Sᵀ`, except the lossy, noisy target channel.
//!
//! Mode 1 is the signal (later the received field) and mode 2 the idler.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Relative slack allowed on symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Slack below 1/2 tolerated on symplectic eigenvalues of a physical state.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;
/// Maximum relative mismatch between the two members of a `±ν` eigenvalue pair.
pub const PAIR_TOLERANCE: f64 = 1e-9;

/// Phase-sensitive amplitude gain `G ≥ 1`: `q → G q`, `p → p / G`.
///
/// Decibels follow the amplitude convention, `dB = 20 log₁₀ G`, so 15 dB is
/// `G ≈ 5.6234`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gain(f64);

impl Gain {
    pub const UNITY: Gain = Gain(1.0);

    pub fn linear(g: f64) -> Result<Self> {
        check_range("gain", g, g >= 1.0, "finite linear gain >= 1")?;
        Ok(Gain(g))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        check_range("gain_db", db, db >= 0.0, "finite gain in dB >= 0")?;
        Gain::linear(10f64.powf(db / 20.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        20.0 * self.0.log10()
    }

    /// Squeezing parameter `r = ln G`.
    pub fn squeezing(self) -> f64 {
        self.0.ln()
    }
}

impl TryFrom<f64> for Gain {
    type Error = Error;
    fn try_from(g: f64) -> Result<Self> {
        Gain::linear(g)
    }
}

impl From<Gain> for f64 {
    fn from(g: Gain) -> f64 {
        g.0
    }
}

/// Which of the two detection hypotheses the channel realises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// H₀: only background reaches the receiver.
    Absent,
    /// H₁: a weak reflection of the signal mixes with the background.
    Present,
}

/// Complex cross correlations between the two modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCorrelations {
    /// Phase-insensitive `⟨a₁† a₂⟩`.
    pub picc: Complex64,
    /// Phase-sensitive `⟨a₁ a₂⟩`.
    pub pscc: Complex64,
}

/// Covariance matrix of a zero-mean two-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance(Matrix4<f64>);

impl TwoModeCovariance {
    /// Validates `m` and wraps it.
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let v = TwoModeCovariance(m);
        v.check_physical()?;
        Ok(v)
    }

    /// Wraps a matrix produced by a trusted construction (symplectic image of
    /// a physical state), symmetrising away rounding noise.
    pub(crate) fn from_trusted(m: Matrix4<f64>) -> Self {
        TwoModeCovariance((m + m.transpose()) * 0.5)
    }

    pub fn vacuum() -> Self {
        TwoModeCovariance(Matrix4::identity() * 0.5)
    }

    /// Product of two thermal states with the given mean photon numbers.
    pub fn thermal(n1: f64, n2: f64) -> Result<Self> {
        check_range("n1", n1, n1 >= 0.0, "finite and >= 0")?;
        check_range("n2", n2, n2 >= 0.0, "finite and >= 0")?;
        let (a, b) = (n1 + 0.5, n2 + 0.5);
        Ok(TwoModeCovariance(Matrix4::from_diagonal(
            &nalgebra::Vector4::new(a, a, b, b),
        )))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// The `(q, p)` block of `mode` (1 or 2).
    pub fn local_block(&self, mode: usize) -> Result<Matrix2<f64>> {
        let o = mode_offset(mode)?;
        Ok(self.0.fixed_view::<2, 2>(o, o).into_owned())
    }

    /// Mean photon number `(V_qq + V_pp − 1)/2` of `mode` (1 or 2).
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        let o = mode_offset(mode)?;
        Ok((self.0[(o, o)] + self.0[(o + 1, o + 1)] - 1.0) / 2.0)
    }

    /// `S V Sᵀ`.
    pub fn congruence(&self, s: &Matrix4<f64>) -> Self {
        TwoModeCovariance::from_trusted(s * self.0 * s.transpose())
    }

    /// Symplectic eigenvalues in ascending order.
    pub fn symplectic_eigenvalues(&self) -> Result<[f64; 2]> {
        symplectic_spectrum(&self.0)
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical().is_ok()
    }

    pub fn check_physical(&self) -> Result<()> {
        let m = &self.0;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonPhysical("non-finite entry".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (m - m.transpose()).amax();
        if asym > SYMMETRY_TOLERANCE * scale {
            return Err(Error::NonPhysical(format!("asymmetry {asym:e}")));
        }
        let lowest = SymmetricEigen::new(*m).eigenvalues.min();
        if lowest < -ROUNDING_SLACK * f64::EPSILON * scale {
            return Err(Error::NonPhysical(format!(
                "not positive semidefinite (eigenvalue {lowest:e})"
            )));
        }
        let ([nu_min, _], resolution) = spectrum_with_resolution(m)?;
        if nu_min < 0.5 - PHYSICALITY_TOLERANCE.max(resolution) {
            return Err(Error::NonPhysical(format!(
                "symplectic eigenvalue {nu_min} below 1/2"
            )));
        }
        Ok(())
    }
}

fn mode_offset(mode: usize) -> Result<usize> {
    match mode {
        1 => Ok(0),
        2 => Ok(2),
        other => Err(Error::ModeIndex(other)),
    }
}

/// Symplectic matrices for the elements used in this crate.
pub mod symplectic {
    use nalgebra::Matrix4;

    /// The symplectic form `Ω = ω ⊕ ω` with `ω = [[0, 1], [−1, 0]]`.
    pub fn omega() -> Matrix4<f64> {
        #[rustfmt::skip]
        let m = Matrix4::new(
            0.0, 1.0, 0.0, 0.0,
            -1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, -1.0, 0.0,
        );
        m
    }

    /// Quadrature squeezer on one mode: `q → g q`, `p → p / g`.
    pub fn local_squeezer(mode_offset: usize, g: f64) -> Matrix4<f64> {
        let mut s = Matrix4::identity();
        s[(mode_offset, mode_offset)] = g;
        s[(mode_offset + 1, mode_offset + 1)] = 1.0 / g;
        s
    }

    /// Phase shift `a_j → a_j e^{iθ_j}` on each mode.
    pub fn phase_rotation(theta1: f64, theta2: f64) -> Matrix4<f64> {
        let mut s = Matrix4::zeros();
        for (o, t) in [(0, theta1), (2, theta2)] {
            let (sin, cos) = t.sin_cos();
            s[(o, o)] = cos;
            s[(o, o + 1)] = -sin;
            s[(o + 1, o)] = sin;
            s[(o + 1, o + 1)] = cos;
        }
        s
    }

    /// Mixing rotation `a₁ → cos θ a₁ + sin θ a₂`, `a₂ → −sin θ a₁ + cos θ a₂`.
    pub fn beam_splitter(theta: f64) -> Matrix4<f64> {
        let (s, c) = theta.sin_cos();
        #[rustfmt::skip]
        let m = Matrix4::new(
            c, 0.0, s, 0.0,
            0.0, c, 0.0, s,
            -s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        );
        m
    }

    /// The 50:50 combiner `a± = (a₁ ± a₂)/√2`.
    pub fn balanced_beam_splitter() -> Matrix4<f64> {
        #[rustfmt::skip]
        let m = Matrix4::new(
            1.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 1.0,
            1.0, 0.0, -1.0, 0.0,
            0.0, 1.0, 0.0, -1.0,
        );
        m * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Mirror reflection of the idler momentum, `Λ = diag(1, 1, 1, −1)`.
    pub fn mode2_momentum_reflection() -> Matrix4<f64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0))
    }
}

/// Symplectic eigenvalues of any symmetric positive 4×4 matrix, ascending.
///
/// The matrix is first brought to equal `q`/`p` variances in each mode by a
/// diagonal local squeeze, which leaves the spectrum unchanged but keeps the
/// entries of strongly squeezed states at a common scale. The spectrum is then
/// read off the eigenvalues `±iν` of `ΩV`.
fn symplectic_spectrum(m: &Matrix4<f64>) -> Result<[f64; 2]> {
    Ok(spectrum_with_resolution(m)?.0)
}

/// Multiple of machine epsilon allowed for rounding in derived quantities.
const ROUNDING_SLACK: f64 = 16.0;

/// The spectrum together with the accuracy to which the stored matrix
/// determines it.
///
/// Rounding the entries of `V` by relative `ε` moves the symplectic
/// eigenvalues by up to about `ε‖V‖²/ν`: the symplectic diagonaliser of a
/// state with large entries is ill-conditioned. Two-mode squeezed vacuum with
/// `n_s ≈ 10⁷` is only pure to ~10⁻³ once stored in `f64`. Tolerances are
/// widened to this resolution so that representable states are not rejected.
fn spectrum_with_resolution(m: &Matrix4<f64>) -> Result<([f64; 2], f64)> {
    let mut d = Matrix4::identity();
    for o in [0, 2] {
        let (vq, vp) = (m[(o, o)], m[(o + 1, o + 1)]);
        if vq <= 0.0 || vp <= 0.0 {
            return Err(Error::NonPhysical(
                "non-positive quadrature variance".into(),
            ));
        }
        let f = (vp / vq).powf(0.25);
        d[(o, o)] = f;
        d[(o + 1, o + 1)] = 1.0 / f;
    }
    let balanced = d * m * d;
    let scale = balanced.amax().max(1.0);
    let resolution = ROUNDING_SLACK * f64::EPSILON * scale * scale;
    let mut mags: Vec<f64> = (symplectic::omega() * balanced)
        .complex_eigenvalues()
        .iter()
        .map(|z| {
            if z.re.abs() > (PAIR_TOLERANCE * z.norm().max(1.0)).max(resolution) {
                f64::NAN
            } else {
                z.norm()
            }
        })
        .collect();
    if mags.iter().any(|x| x.is_nan()) {
        return Err(Error::NonPhysical(
            "ΩV has eigenvalues off the imaginary axis".into(),
        ));
    }
    mags.sort_by(f64::total_cmp);
    let mut out = [0.0; 2];
    for (k, pair) in mags.chunks(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if (a - b).abs() > (PAIR_TOLERANCE * a.max(b).max(1.0)).max(resolution) {
            return Err(Error::NonPhysical(format!(
                "unpaired symplectic eigenvalues {a} and {b}"
            )));
        }
        out[k] = 0.5 * (a + b);
    }
    Ok((out, resolution))
}

/// Two-mode squeezed vacuum with `n_s` mean photons in each mode.
pub fn tmsv_covariance(n_s: f64) -> Result<TwoModeCovariance> {
    check_range("n_s", n_s, n_s >= 0.0, "finite and >= 0")?;
    let nu = 2.0 * n_s + 1.0;
    let c = 2.0 * (n_s * (n_s + 1.0)).sqrt();
    #[rustfmt::skip]
    let m = Matrix4::new(
        nu, 0.0, c, 0.0,
        0.0, nu, 0.0, -c,
        c, 0.0, nu, 0.0,
        0.0, -c, 0.0, nu,
    ) * 0.5;
    Ok(TwoModeCovariance(m))
}

/// Phase-sensitive amplification of one mode (1 or 2).
pub fn amplify_mode(v: &TwoModeCovariance, mode: usize, gain: Gain) -> Result<TwoModeCovariance> {
    let o = mode_offset(mode)?;
    v.check_physical()?;
    Ok(v.congruence(&symplectic::local_squeezer(o, gain.value())))
}

/// Sends mode 1 to the target region and back.
///
/// With the target absent, mode 1 is replaced by thermal background with
/// `n_b` mean photons. With it present, mode 1 is mixed on a beam splitter of
/// transmissivity `kappa` with a thermal mode of `n_b / (1 − kappa)` photons,
/// so the received background is `n_b` under either hypothesis.
pub fn apply_target_channel(
    v: &TwoModeCovariance,
    kappa: f64,
    n_b: f64,
    hypothesis: Hypothesis,
) -> Result<TwoModeCovariance> {
    check_range(
        "kappa",
        kappa,
        (0.0..1.0).contains(&kappa),
        "0 <= kappa < 1",
    )?;
    check_range("n_b", n_b, n_b >= 0.0, "finite and >= 0")?;
    v.check_physical()?;
    let mut m = *v.matrix();
    let omega = 2.0 * n_b + 1.0;
    match hypothesis {
        Hypothesis::Absent => {
            let mut block = m.fixed_view_mut::<2, 2>(0, 0);
            block.copy_from(&(Matrix2::identity() * (omega / 2.0)));
            m.fixed_view_mut::<2, 2>(0, 2).fill(0.0);
            m.fixed_view_mut::<2, 2>(2, 0).fill(0.0);
        }
        Hypothesis::Present => {
            // (1 − κ)(2 n_b/(1 − κ) + 1)/2 = (ω − κ)/2
            let noise = Matrix2::identity() * ((omega - kappa) / 2.0);
            let signal = m.fixed_view::<2, 2>(0, 0) * kappa + noise;
            m.fixed_view_mut::<2, 2>(0, 0).copy_from(&signal);
            let root = kappa.sqrt();
            let cross = m.fixed_view::<2, 2>(0, 2) * root;
            m.fixed_view_mut::<2, 2>(0, 2).copy_from(&cross);
            m.fixed_view_mut::<2, 2>(2, 0).copy_from(&cross.transpose());
        }
    }
    Ok(TwoModeCovariance::from_trusted(m))
}

/// Combines the two modes on a 50:50 beam splitter.
pub fn balanced_beam_splitter(v: &TwoModeCovariance) -> Result<TwoModeCovariance> {
    v.check_physical()?;
    Ok(v.congruence(&symplectic::balanced_beam_splitter()))
}

pub fn cross_correlations(v: &TwoModeCovariance) -> Result<CrossCorrelations> {
    v.check_physical()?;
    let m = v.matrix();
    let (v13, v24, v14, v23) = (m[(0, 2)], m[(1, 3)], m[(0, 3)], m[(1, 2)]);
    Ok(CrossCorrelations {
        picc: Complex64::new(v13 + v24, v14 - v23) / 2.0,
        pscc: Complex64::new(v13 - v24, v14 + v23) / 2.0,
    })
}

/// Smallest symplectic eigenvalue of the partially transposed state.
///
/// A value below 1/2 certifies that the two modes are entangled.
pub fn min_ppt_symplectic_eigenvalue(v: &TwoModeCovariance) -> Result<f64> {
    let lambda = symplectic::mode2_momentum_reflection();
    let transposed = lambda * v.matrix() * lambda;
    Ok(symplectic_spectrum(&transposed)?[0])
}

/// Logarithmic negativity `max(0, −log₂ 2ν̃₋)` in bits.
pub fn log_negativity(v: &TwoModeCovariance) -> Result<f64> {
    let nu = min_ppt_symplectic_eigenvalue(v)?;
    Ok((-(2.0 * nu).log2()).max(0.0))
}
