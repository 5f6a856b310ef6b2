//! Brute-force reference in a truncated photon-number basis.
//!
//! Each mode is cut off at `dim` photons, so two-mode operators act on the
//! `dim²` states `|n₁, n₂⟩` stored at index `n₁·dim + n₂`. Probability that
//! would land above the cutoff is dropped and shows up as a trace deficit
//! ("leakage").
//!
//! [`build_oracle_state`] carries the source and the received field in a
//! working space of `2·dim` photons per mode and only truncates to `dim` at
//! the detectors. The amplified idler has a long photon-number tail, and
//! cutting it before the beam splitter would bias the count variance far
//! more than the reported leakage suggests. Mixed states on the way are kept
//! as lists of unnormalised pure components, `ρ = Σⱼ |φⱼ⟩⟨φⱼ|`, which are
//! pushed through the beam splitter one batch at a time.
//!
//! With the phase conventions used here (real squeezing, real beam-splitter
//! amplitudes, real two-mode squeezed vacuum) all amplitudes are real, so
//! states are stored as real matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check_range, Error, Result};
use crate::gaussian::{Gain, Hypothesis};
use crate::illumination::{CountStats, ScenarioParams};

/// Leakage above which an oracle state is flagged as under-resolved.
pub const LEAKAGE_WARNING: f64 = 1e-6;

/// Thermal ancilla populations are kept until the remaining tail is below this.
const THERMAL_TAIL: f64 = 1e-13;

/// Pure components with a smaller squared norm are dropped.
const COMPONENT_FLOOR: f64 = 1e-24;

/// A two-mode density matrix in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDensityMatrix {
    dim: usize,
    entries: DMatrix<f64>,
}

/// Pure two-mode state with amplitudes `amps[(n₁, n₂)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModePure {
    dim: usize,
    amps: DMatrix<f64>,
}

/// Output of [`build_oracle_state`].
#[derive(Debug, Clone)]
pub struct OracleState {
    pub rho: TruncatedDensityMatrix,
    pub leakage: f64,
    /// Set when `leakage` exceeds [`LEAKAGE_WARNING`].
    pub under_resolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCountStats {
    pub stats: CountStats,
    pub leakage: f64,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::Truncation(dim))
    } else {
        Ok(())
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Amplitude `⟨m₁, n₁ + n₂ − m₁| U |n₁, n₂⟩` of the passive two-mode unitary
/// with `U† aᵢ U = Σⱼ T[i][j] aⱼ`.
///
/// `U |n₁, n₂⟩ = (T₁₁a₁† + T₂₁a₂†)^{n₁} (T₁₂a₁† + T₂₂a₂†)^{n₂} |0⟩ / √(n₁! n₂!)`,
/// expanded binomially.
fn passive_amplitude(t: &[[f64; 2]; 2], n1: usize, n2: usize, m1: usize, lf: &[f64]) -> f64 {
    let total = n1 + n2;
    debug_assert!(m1 <= total);
    let m2 = total - m1;
    let norm = 0.5 * (lf[m1] + lf[m2] - lf[n1] - lf[n2]);
    let lo = m1.saturating_sub(n2);
    let hi = m1.min(n1);
    let mut sum = 0.0;
    for j in lo..=hi {
        let l = m1 - j;
        let ln_binom = lf[n1] - lf[j] - lf[n1 - j] + lf[n2] - lf[l] - lf[n2 - l];
        let powers = t[0][0].powi(j as i32)
            * t[1][0].powi((n1 - j) as i32)
            * t[0][1].powi(l as i32)
            * t[1][1].powi((n2 - l) as i32);
        sum += (ln_binom + norm).exp() * powers;
    }
    sum
}

/// Thermal populations `(1 − x) xᵏ`, `x = n/(n + 1)`, up to `cutoff` states.
pub fn thermal_populations(n: f64, cutoff: usize) -> Vec<f64> {
    let x = n / (n + 1.0);
    (0..cutoff).map(|k| (1.0 - x) * x.powi(k as i32)).collect()
}

fn thermal_cutoff(n: f64) -> usize {
    if n <= 0.0 {
        return 1;
    }
    let x = n / (n + 1.0);
    ((THERMAL_TAIL.ln() / x.ln()).ceil() as usize).clamp(1, 4000)
}

/// `exp[(r/2)(a†² − a²)]` on the first `working_dim` number states, with
/// `r = ln G`. This convention stretches `q` by `G`.
pub fn squeezer_matrix(gain: Gain, working_dim: usize) -> DMatrix<f64> {
    let half_r = 0.5 * gain.squeezing();
    let mut k = DMatrix::zeros(working_dim, working_dim);
    for n in 0..working_dim.saturating_sub(2) {
        let a = half_r * (((n + 1) * (n + 2)) as f64).sqrt();
        k[(n + 2, n)] = a;
        k[(n, n + 2)] = -a;
    }
    k.exp()
}

/// The squeezer restricted to inputs and outputs below `dim`. It is built in
/// a larger working space so that the kept columns are not distorted by the
/// cutoff of the generator.
fn kept_squeezer(gain: Gain, dim: usize) -> DMatrix<f64> {
    let g2 = gain.value().powi(2);
    let working = ((dim as f64 * (1.0 + g2)) as usize + 40).min(dim.max(800));
    squeezer_matrix(gain, working)
        .view((0, 0), (dim, dim))
        .into_owned()
}

/// Balanced beam splitter `a± = (a₁ ± a₂)/√2` from an `in_dim` to an
/// `out_dim` truncation, as a sparse list of amplitudes per input state.
struct BalancedSplitter {
    in_dim: usize,
    out_dim: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl BalancedSplitter {
    fn new(in_dim: usize, out_dim: usize) -> Self {
        let lf = ln_factorials(2 * in_dim);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let t = [[h, h], [h, -h]];
        let mut columns = Vec::with_capacity(in_dim * in_dim);
        for n1 in 0..in_dim {
            for n2 in 0..in_dim {
                let total = n1 + n2;
                let lo = total.saturating_sub(out_dim - 1);
                let hi = total.min(out_dim - 1);
                let col = (lo..=hi)
                    .map(|m1| {
                        let amp = passive_amplitude(&t, n1, n2, m1, &lf);
                        (m1 * out_dim + (total - m1), amp)
                    })
                    .collect();
                columns.push(col);
            }
        }
        BalancedSplitter {
            in_dim,
            out_dim,
            columns,
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.out_dim.pow(2), self.in_dim.pow(2));
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, amp) in col {
                u[(r, c)] = amp;
            }
        }
        u
    }

    /// Applies the splitter to every column of `states`.
    fn apply(&self, states: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.out_dim.pow(2), states.ncols());
        for (j, state) in states.column_iter().enumerate() {
            let mut target = out.column_mut(j);
            for (x, col) in state.iter().zip(&self.columns) {
                if *x == 0.0 {
                    continue;
                }
                for &(r, amp) in col {
                    target[r] += amp * x;
                }
            }
        }
        out
    }
}

impl TwoModePure {
    pub fn vacuum(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut amps = DMatrix::zeros(dim, dim);
        amps[(0, 0)] = 1.0;
        Ok(TwoModePure { dim, amps })
    }

    /// `√(1 − λ²) Σₙ λⁿ |n, n⟩` with `λ² = n_s/(n_s + 1)`, cut at `dim`.
    pub fn tmsv(n_s: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        check_range("n_s", n_s, n_s >= 0.0, "finite and >= 0")?;
        let lambda2 = n_s / (n_s + 1.0);
        let lambda = lambda2.sqrt();
        let norm = (1.0 - lambda2).sqrt();
        let mut amps = DMatrix::zeros(dim, dim);
        for n in 0..dim {
            amps[(n, n)] = norm * lambda.powi(n as i32);
        }
        Ok(TwoModePure { dim, amps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &DMatrix<f64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// Phase-sensitive amplification of `mode` (1 or 2).
    pub fn squeeze_mode(&self, mode: usize, gain: Gain) -> Result<Self> {
        let u = kept_squeezer(gain, self.dim);
        let amps = match mode {
            1 => &u * &self.amps,
            2 => &self.amps * u.transpose(),
            other => return Err(Error::ModeIndex(other)),
        };
        Ok(TwoModePure {
            dim: self.dim,
            amps,
        })
    }

    pub fn density(&self) -> TruncatedDensityMatrix {
        let d = self.dim;
        let v = DMatrix::from_fn(d * d, 1, |k, _| self.amps[(k / d, k % d)]);
        TruncatedDensityMatrix::from_components(d, &v)
    }
}

impl TruncatedDensityMatrix {
    fn zeros(dim: usize) -> Self {
        TruncatedDensityMatrix {
            dim,
            entries: DMatrix::zeros(dim * dim, dim * dim),
        }
    }

    fn from_components(dim: usize, components: &DMatrix<f64>) -> Self {
        let mut rho = TruncatedDensityMatrix::zeros(dim);
        rho.accumulate(components);
        rho
    }

    /// `ρ += Σⱼ |φⱼ⟩⟨φⱼ|` over the columns of `components`.
    fn accumulate(&mut self, components: &DMatrix<f64>) {
        self.entries
            .gemm(1.0, components, &components.transpose(), 1.0);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn leakage(&self) -> f64 {
        (1.0 - self.trace()).max(0.0)
    }

    /// Photon-number distribution `P(n₁, n₂)` (unnormalised).
    pub fn populations(&self) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |a, b| self.entries[(a * d + b, a * d + b)])
    }

    /// Normalised `⟨N_mode⟩`.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        if !(1..=2).contains(&mode) {
            return Err(Error::ModeIndex(mode));
        }
        let pop = self.populations();
        let mut acc = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                let n = if mode == 1 { a } else { b };
                acc += pop[(a, b)] * n as f64;
            }
        }
        Ok(acc / pop.sum())
    }

    /// 50:50 beam splitter `a± = (a₁ ± a₂)/√2` in the number basis.
    pub fn balanced_beam_splitter(&self) -> Self {
        let u = BalancedSplitter::new(self.dim, self.dim).dense();
        TruncatedDensityMatrix {
            dim: self.dim,
            entries: &u * &self.entries * u.transpose(),
        }
    }

    /// Transpose on mode 2.
    pub fn partial_transpose(&self) -> Self {
        let d = self.dim;
        let entries = DMatrix::from_fn(d * d, d * d, |r, c| {
            let (s, i) = (r / d, r % d);
            let (s2, i2) = (c / d, c % d);
            self.entries[(s * d + i2, s2 * d + i)]
        });
        TruncatedDensityMatrix { dim: d, entries }
    }

    /// `log₂ ‖ρ^{T₂}‖₁` of the renormalised state, in bits.
    pub fn log_negativity(&self) -> f64 {
        let pt = self.partial_transpose();
        let eig = SymmetricEigen::new(pt.entries);
        let norm: f64 = eig.eigenvalues.iter().map(|x| x.abs()).sum();
        (norm / self.trace()).log2()
    }
}

fn drop_negligible(cols: DMatrix<f64>) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..cols.ncols())
        .filter(|&j| cols.column(j).norm_squared() > COMPONENT_FLOOR)
        .collect();
    cols.select_columns(keep.iter())
}

/// Pure components of the state after mixing mode 1 with a thermal ancilla
/// of `n_b/(1 − κ)` photons on a beam splitter of transmissivity `κ` and
/// tracing the ancilla out. Handed to `sink` one ancilla number state at a
/// time.
///
/// For each ancilla state `|k⟩` the three-mode pure state `U(ψ ⊗ |k⟩)` is
/// formed; its projections onto ancilla outputs `|a⟩` are the components.
fn mixed_signal_components(
    psi: &TwoModePure,
    kappa: f64,
    n_b: f64,
    mut sink: impl FnMut(DMatrix<f64>),
) -> Result<()> {
    check_range(
        "kappa",
        kappa,
        (0.0..1.0).contains(&kappa),
        "0 <= kappa < 1",
    )?;
    check_range("n_b", n_b, n_b >= 0.0, "finite and >= 0")?;
    let d = psi.dim;
    let n_anc = n_b / (1.0 - kappa);
    let ancilla = thermal_populations(n_anc, thermal_cutoff(n_anc));
    let lf = ln_factorials(2 * d + ancilla.len() + 2);
    let (t, r) = (kappa.sqrt(), (1.0 - kappa).sqrt());
    let mixer = [[t, r], [-r, t]];

    for (k, &pk) in ancilla.iter().enumerate() {
        let weight = pk.sqrt();
        let n_out = d + k;
        let mut cols = DMatrix::zeros(d * d, n_out);
        for a in 0..n_out {
            for s_out in 0..d {
                // Photon number is conserved: s_in + k = s_out + a.
                let Some(s_in) = (s_out + a).checked_sub(k) else {
                    continue;
                };
                if s_in >= d {
                    continue;
                }
                let amp = weight * passive_amplitude(&mixer, s_in, k, s_out, &lf);
                if amp == 0.0 {
                    continue;
                }
                for i in 0..d {
                    cols[(s_out * d + i, a)] = amp * psi.amps[(s_in, i)];
                }
            }
        }
        sink(drop_negligible(cols));
    }
    Ok(())
}

/// Pure components of `thermal(n_b) ⊗ Tr₁|ψ⟩⟨ψ|`.
fn replaced_signal_components(
    psi: &TwoModePure,
    n_b: f64,
    mut sink: impl FnMut(DMatrix<f64>),
) -> Result<()> {
    check_range("n_b", n_b, n_b >= 0.0, "finite and >= 0")?;
    let d = psi.dim;
    for (s, &p) in thermal_populations(n_b, d).iter().enumerate() {
        let weight = p.sqrt();
        let mut cols = DMatrix::zeros(d * d, d);
        // Row s' of ψ is the idler state conditioned on s' source photons.
        for src in 0..d {
            for i in 0..d {
                cols[(s * d + i, src)] = weight * psi.amps[(src, i)];
            }
        }
        sink(drop_negligible(cols));
    }
    Ok(())
}

/// Mixes mode 1 of `psi` with thermal background as the target-present
/// channel does, keeping `psi`'s truncation.
pub fn mix_signal_with_background(
    psi: &TwoModePure,
    kappa: f64,
    n_b: f64,
) -> Result<TruncatedDensityMatrix> {
    let mut rho = TruncatedDensityMatrix::zeros(psi.dim);
    mixed_signal_components(psi, kappa, n_b, |cols| rho.accumulate(&cols))?;
    Ok(rho)
}

/// Replaces mode 1 of `psi` with thermal background of `n_b` photons.
pub fn replace_signal_with_background(
    psi: &TwoModePure,
    n_b: f64,
) -> Result<TruncatedDensityMatrix> {
    let mut rho = TruncatedDensityMatrix::zeros(psi.dim);
    replaced_signal_components(psi, n_b, |cols| rho.accumulate(&cols))?;
    Ok(rho)
}

/// Working truncation used upstream of the detectors.
pub fn working_dim(dim: usize) -> usize {
    2 * dim
}

/// Streams the detected field under `hypothesis` into `sink`, one batch of
/// pure components (columns over the `dim²` output basis) at a time.
fn detected_components(
    p: &ScenarioParams,
    hypothesis: Hypothesis,
    dim: usize,
    mut sink: impl FnMut(DMatrix<f64>),
) -> Result<()> {
    check_dim(dim)?;
    p.validate()?;
    let work = working_dim(dim);
    let source = TwoModePure::tmsv(p.n_s, work)?.squeeze_mode(2, p.gain)?;
    let splitter = BalancedSplitter::new(work, dim);
    let through = |cols: DMatrix<f64>| sink(splitter.apply(&cols));
    match hypothesis {
        Hypothesis::Absent => replaced_signal_components(&source, p.n_b, through),
        Hypothesis::Present => mixed_signal_components(&source, p.kappa, p.n_b, through),
    }
}

/// The state at the two photodetectors under `hypothesis`, built entirely in
/// the number basis and truncated to `dim` photons per output port.
pub fn build_oracle_state(
    p: &ScenarioParams,
    hypothesis: Hypothesis,
    dim: usize,
) -> Result<OracleState> {
    let mut rho = TruncatedDensityMatrix::zeros(dim);
    detected_components(p, hypothesis, dim, |cols| rho.accumulate(&cols))?;
    let leakage = rho.leakage();
    Ok(OracleState {
        rho,
        leakage,
        under_resolved: leakage > LEAKAGE_WARNING,
    })
}

/// Photon-number distribution `P(n₁, n₂)` at the detectors, the diagonal of
/// [`build_oracle_state`]'s density matrix without forming the off-diagonal
/// part. Cheap enough for truncations well beyond what the full matrix allows.
pub fn oracle_populations(
    p: &ScenarioParams,
    hypothesis: Hypothesis,
    dim: usize,
) -> Result<DMatrix<f64>> {
    let mut flat = vec![0.0; dim * dim];
    detected_components(p, hypothesis, dim, |cols| {
        for col in cols.column_iter() {
            for (acc, x) in flat.iter_mut().zip(col.iter()) {
                *acc += x * x;
            }
        }
    })?;
    Ok(DMatrix::from_fn(dim, dim, |a, b| flat[a * dim + b]))
}

/// Mean and variance of `N₁ − N₂` from a (possibly unnormalised)
/// photon-number distribution, normalised by its total.
pub fn count_stats_from_populations(pop: &DMatrix<f64>) -> OracleCountStats {
    let tr = pop.sum();
    let (mut m1, mut m2) = (0.0, 0.0);
    for a in 0..pop.nrows() {
        for b in 0..pop.ncols() {
            let diff = a as f64 - b as f64;
            m1 += pop[(a, b)] * diff;
            m2 += pop[(a, b)] * diff * diff;
        }
    }
    let mean = m1 / tr;
    OracleCountStats {
        stats: CountStats {
            mean,
            variance: m2 / tr - mean * mean,
        },
        leakage: (1.0 - tr).max(0.0),
    }
}

/// Mean and variance of `N₁ − N₂`, normalised by the retained trace.
pub fn oracle_count_stats(rho: &TruncatedDensityMatrix) -> OracleCountStats {
    count_stats_from_populations(&rho.populations())
}
