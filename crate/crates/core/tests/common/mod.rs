#![allow(dead_code)]

use nalgebra::Matrix4;
use qillum::gaussian::symplectic;
use qillum::TwoModeCovariance;
use rand::Rng;

/// Thermal product state pushed through a random chain of phase shifts,
/// local squeezers and beam splitters.
pub fn random_physical_state<R: Rng>(rng: &mut R) -> TwoModeCovariance {
    let mut v =
        TwoModeCovariance::thermal(rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)).unwrap();
    for _ in 0..3 {
        let tau = std::f64::consts::TAU;
        let s = symplectic::phase_rotation(rng.random_range(0.0..tau), rng.random_range(0.0..tau));
        v = v.congruence(&s);
        v = v.congruence(&symplectic::local_squeezer(0, rng.random_range(0.5..2.0)));
        v = v.congruence(&symplectic::local_squeezer(2, rng.random_range(0.5..2.0)));
        v = v.congruence(&symplectic::beam_splitter(rng.random_range(0.0..tau)));
    }
    v
}

fn sym(entries: [[f64; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| entries[r][c]) * 0.5
}

pub struct Symbols {
    pub nu: f64,
    pub c: f64,
    pub omega: f64,
    pub gamma: f64,
}

pub fn symbols(n_s: f64, n_b: f64, kappa: f64) -> Symbols {
    let omega = 2.0 * n_b + 1.0;
    Symbols {
        nu: 2.0 * n_s + 1.0,
        c: 2.0 * (n_s * (n_s + 1.0)).sqrt(),
        omega,
        gamma: 2.0 * kappa * n_s + omega,
    }
}

/// Amplified-idler source, written out entry by entry.
pub fn amplified_source(n_s: f64, g: f64) -> Matrix4<f64> {
    let Symbols { nu, c, .. } = symbols(n_s, 0.0, 0.0);
    sym([
        [nu, 0.0, g * c, 0.0],
        [0.0, nu, 0.0, -c / g],
        [g * c, 0.0, g * g * nu, 0.0],
        [0.0, -c / g, 0.0, nu / (g * g)],
    ])
}

pub fn received_absent(n_s: f64, n_b: f64, g: f64) -> Matrix4<f64> {
    let Symbols { nu, omega, .. } = symbols(n_s, n_b, 0.0);
    sym([
        [omega, 0.0, 0.0, 0.0],
        [0.0, omega, 0.0, 0.0],
        [0.0, 0.0, g * g * nu, 0.0],
        [0.0, 0.0, 0.0, nu / (g * g)],
    ])
}

pub fn received_present(n_s: f64, n_b: f64, kappa: f64, g: f64) -> Matrix4<f64> {
    let Symbols { nu, c, gamma, .. } = symbols(n_s, n_b, kappa);
    let k = kappa.sqrt();
    sym([
        [gamma, 0.0, k * g * c, 0.0],
        [0.0, gamma, 0.0, -k * c / g],
        [k * g * c, 0.0, g * g * nu, 0.0],
        [0.0, -k * c / g, 0.0, nu / (g * g)],
    ])
}

pub fn detected_absent(n_s: f64, n_b: f64, g: f64) -> Matrix4<f64> {
    let Symbols { nu, omega, .. } = symbols(n_s, n_b, 0.0);
    let (g2, gi2) = (g * g, 1.0 / (g * g));
    let a = (omega + g2 * nu) / 2.0;
    let b = (omega + gi2 * nu) / 2.0;
    let ac = (omega - g2 * nu) / 2.0;
    let bc = (omega - gi2 * nu) / 2.0;
    sym([
        [a, 0.0, ac, 0.0],
        [0.0, b, 0.0, bc],
        [ac, 0.0, a, 0.0],
        [0.0, bc, 0.0, b],
    ])
}

pub fn detected_present(n_s: f64, n_b: f64, kappa: f64, g: f64) -> Matrix4<f64> {
    let Symbols { nu, c, gamma, .. } = symbols(n_s, n_b, kappa);
    let k = kappa.sqrt();
    let (g2, gi2) = (g * g, 1.0 / (g * g));
    let qc = (gamma - g2 * nu) / 2.0;
    let pc = (gamma - gi2 * nu) / 2.0;
    sym([
        [(gamma + g2 * nu + 2.0 * k * g * c) / 2.0, 0.0, qc, 0.0],
        [0.0, (gamma + nu / g2 - 2.0 * k * c / g) / 2.0, 0.0, pc],
        [qc, 0.0, (gamma + g2 * nu - 2.0 * k * g * c) / 2.0, 0.0],
        [0.0, pc, 0.0, (gamma + nu / g2 + 2.0 * k * c / g) / 2.0],
    ])
}

pub fn max_entry_gap(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

/// A scenario whose analytic error probability is `erfc(2)/2`: the
/// reflectance is bisected until `M · snr = 4` at `modes = M`.
pub fn erfc_two_scenario(modes: u64) -> qillum::ScenarioParams {
    use qillum::{detection_report, Gain, ScenarioParams};
    let at = |kappa: f64| {
        ScenarioParams::new(0.1, 1.0, kappa, Gain::from_db(15.0).unwrap(), modes).unwrap()
    };
    let excess = |kappa: f64| {
        modes as f64 * detection_report(&at(kappa)).unwrap().snr_first_principles - 4.0
    };
    let (mut lo, mut hi) = (0.0, 0.99);
    assert!(excess(hi) > 0.0, "scenario cannot reach the target SNR");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(0.5 * (lo + hi))
}
