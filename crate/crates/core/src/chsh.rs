//! CHSH functions for photons and kaons and the generalized quasi-spin/time
//! Bell-CHSH inequality.
//!
//! Two normalizations appear. The correlation (M) form
//! `|M_ab - M_ac| + |M_db + M_dc| <= 2` uses `M = -1 + 2(P_YY + P_NN)`;
//! the probability form evaluated by [`s_generalized`] is bounded by 1.
//! They are related by `S_M = 2 S_P`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::constants::PhysicalConstants;
use crate::error::{KaonError, Result};
use crate::evolution::PairEngine;
use crate::optimize::{maximize, Bounds, MaximizationReport, MaximizeOptions};
use crate::state::{named_state, NamedState, QuasiSpinState};

/// Local-realistic bound of the correlation form.
pub const CHSH_BOUND: f64 = 2.0;
/// Local-realistic bound of the probability form.
pub const GENERALIZED_BOUND: f64 = 1.0;

/// `|cos f_ab - cos f_ac| + |cos f_db + cos(-f_ab + f_ac + f_db)|`, angles
/// being twice the polarizer angle differences.
pub fn s_photon(phi_ab: f64, phi_ac: f64, phi_db: f64) -> f64 {
    (phi_ab.cos() - phi_ac.cos()).abs() + (phi_db.cos() + (-phi_ab + phi_ac + phi_db).cos()).abs()
}

/// Absolute times `[t_a, t_b, t_c, t_d]` for the kaon CHSH chart, where every
/// angle is `delta_m` times a time difference:
/// `t_b = t_a + f_ab/dm`, `t_c = t_a + f_ac/dm`, `t_d = t_b - f_db/dm`.
pub fn kaon_chsh_times(
    t_a: f64,
    phi_ab: f64,
    phi_ac: f64,
    phi_db: f64,
    constants: &PhysicalConstants,
) -> Result<[f64; 4]> {
    let dm = constants.delta_m();
    let t_b = t_a + phi_ab / dm;
    let t_c = t_a + phi_ac / dm;
    let t_d = t_b - phi_db / dm;
    let times = [t_a, t_b, t_c, t_d];
    if let Some(&bad) = times.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(KaonError::NegativeTime(bad));
    }
    Ok(times)
}

/// CHSH function for the strangeness choice, CP violation neglected.
///
/// Each correlation is damped by `e^{-gamma (t_i + t_j)}` with
/// `gamma = (gamma_S + gamma_L)/2` taken from `constants`; pass constants with
/// [`DecayMode::StableLong`](crate::constants::DecayMode::StableLong) for the
/// `gamma_L = 0` convention in which this equals the generalized inequality
/// exactly.
pub fn s_kaon_strangeness(
    t_a: f64,
    phi_ab: f64,
    phi_ac: f64,
    phi_db: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let [t_a, t_b, t_c, t_d] = kaon_chsh_times(t_a, phi_ab, phi_ac, phi_db, constants)?;
    let g = constants.gamma();
    let damp = |x: f64, y: f64| (-g * (x + y)).exp();
    Ok(
        (phi_ab.cos() * damp(t_a, t_b) - phi_ac.cos() * damp(t_a, t_c)).abs()
            + (phi_db.cos() * damp(t_d, t_b) + (-phi_ab + phi_ac + phi_db).cos() * damp(t_d, t_c))
                .abs(),
    )
}

/// Quantum correlation `M = -1 + 2 (P_YY + P_NN)` for detecting `k_n` on the
/// left at `t_a` and `k_m` on the right at `t_b`.
pub fn expectation_qm(
    k_n: &QuasiSpinState,
    t_a: f64,
    k_m: &QuasiSpinState,
    t_b: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let t = PairEngine::new(constants).table(k_n, t_a, k_m, t_b)?;
    Ok((-1.0 + 2.0 * t.agreement()).clamp(-1.0, 1.0))
}

/// Four quasi-spin states `(k_n, k_m, k_n', k_m')` and four times
/// `(t_a, t_b, t_c, t_d)`. Measured pairs (left, right) are
/// `(k_n t_a, k_m t_b)`, `(k_n t_a, k_n' t_c)`, `(k_m' t_d, k_m t_b)` and
/// `(k_m' t_d, k_n' t_c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshSetting {
    pub k_n: QuasiSpinState,
    pub k_m: QuasiSpinState,
    pub k_n_prime: QuasiSpinState,
    pub k_m_prime: QuasiSpinState,
    pub times: [f64; 4],
}

impl ChshSetting {
    pub fn new(states: [QuasiSpinState; 4], times: [f64; 4]) -> Result<Self> {
        if let Some(&bad) = times.iter().find(|t| t.is_nan() || **t < 0.0) {
            return Err(KaonError::NegativeTime(bad));
        }
        let [k_n, k_m, k_n_prime, k_m_prime] = states;
        Ok(Self {
            k_n,
            k_m,
            k_n_prime,
            k_m_prime,
            times,
        })
    }

    /// Every state `K0bar`.
    pub fn strangeness_choice(times: [f64; 4], constants: &PhysicalConstants) -> Result<Self> {
        let s = named_state(NamedState::K0bar, constants);
        Self::new([s.clone(), s.clone(), s.clone(), s], times)
    }

    /// `k_n = K_S`, `k_m = K0bar`, `k_n' = k_m' = K1`: the choice that turns
    /// the inequality into a Wigner-type inequality sensitive to `epsilon`.
    pub fn wigner_choice(times: [f64; 4], constants: &PhysicalConstants) -> Result<Self> {
        let k1 = named_state(NamedState::K1, constants);
        Self::new(
            [
                named_state(NamedState::KS, constants),
                named_state(NamedState::K0bar, constants),
                k1.clone(),
                k1,
            ],
            times,
        )
    }
}

/// Probability-form generalized Bell-CHSH function (local-realistic bound 1).
pub fn s_generalized(setting: &ChshSetting, constants: &PhysicalConstants) -> Result<f64> {
    let engine = PairEngine::new(constants);
    let [t_a, t_b, t_c, t_d] = setting.times;
    let q = |l: &QuasiSpinState, tl: f64, r: &QuasiSpinState, tr: f64| -> Result<f64> {
        Ok(engine.table(l, tl, r, tr)?.agreement())
    };
    let nm = q(&setting.k_n, t_a, &setting.k_m, t_b)?;
    let nn = q(&setting.k_n, t_a, &setting.k_n_prime, t_c)?;
    let mm = q(&setting.k_m_prime, t_d, &setting.k_m, t_b)?;
    let mn = q(&setting.k_m_prime, t_d, &setting.k_n_prime, t_c)?;
    Ok((nm - nn).abs() + (-1.0 + mm + mn).abs())
}

/// Correlation-form CHSH function built from [`expectation_qm`]; equals
/// `2 * s_generalized` for the same setting.
pub fn s_correlation_form(setting: &ChshSetting, constants: &PhysicalConstants) -> Result<f64> {
    let [t_a, t_b, t_c, t_d] = setting.times;
    let m = |l: &QuasiSpinState, tl: f64, r: &QuasiSpinState, tr: f64| {
        expectation_qm(l, tl, r, tr, constants)
    };
    let ab = m(&setting.k_n, t_a, &setting.k_m, t_b)?;
    let ac = m(&setting.k_n, t_a, &setting.k_n_prime, t_c)?;
    let db = m(&setting.k_m_prime, t_d, &setting.k_m, t_b)?;
    let dc = m(&setting.k_m_prime, t_d, &setting.k_n_prime, t_c)?;
    Ok((ab - ac).abs() + (db + dc).abs())
}

/// Objective for [`maximize_s`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SFunction {
    /// `(f_ab, f_ac, f_db)`.
    Photon,
    /// `(t_a, f_ab, f_ac, f_db)`.
    KaonStrangeness,
    /// [`s_generalized`] with the strangeness choice over `(t_a, t_b, t_c, t_d)`.
    GeneralizedRestricted,
}

impl SFunction {
    pub fn bound(self) -> f64 {
        match self {
            SFunction::GeneralizedRestricted => GENERALIZED_BOUND,
            _ => CHSH_BOUND,
        }
    }

    pub fn default_bounds(self) -> Bounds {
        let ranges = match self {
            SFunction::Photon => vec![(0.0, TAU); 3],
            SFunction::KaonStrangeness => vec![(0.0, 4.0), (0.0, TAU), (0.0, TAU), (0.0, TAU)],
            SFunction::GeneralizedRestricted => vec![(0.0, 4.0); 4],
        };
        Bounds { ranges }
    }

    pub fn dim(self) -> usize {
        match self {
            SFunction::Photon => 3,
            _ => 4,
        }
    }

    fn evaluate(self, x: &[f64], k: &PhysicalConstants, k0bar: &QuasiSpinState) -> Option<f64> {
        match self {
            SFunction::Photon => Some(s_photon(x[0], x[1], x[2])),
            SFunction::KaonStrangeness => s_kaon_strangeness(x[0], x[1], x[2], x[3], k).ok(),
            SFunction::GeneralizedRestricted => {
                let s = k0bar.clone();
                let setting = ChshSetting::new(
                    [s.clone(), s.clone(), s.clone(), s],
                    [x[0], x[1], x[2], x[3]],
                )
                .ok()?;
                s_generalized(&setting, k).ok()
            }
        }
    }
}

/// Grid scan plus pattern-search refinement of the chosen S-function.
pub fn maximize_s(
    function: SFunction,
    bounds: &Bounds,
    opts: &MaximizeOptions,
    constants: &PhysicalConstants,
) -> Result<MaximizationReport> {
    if bounds.dim() != function.dim() {
        return Err(KaonError::InvalidParameter(format!(
            "{function:?} takes {} parameters, bounds have {}",
            function.dim(),
            bounds.dim()
        )));
    }
    let k0bar = named_state(NamedState::K0bar, constants);
    maximize(|x| function.evaluate(x, constants, &k0bar), bounds, opts)
}

/// The photon optimum `2 sqrt 2` reached at `(3pi/4, pi/4, pi/4)`.
pub fn photon_tsirelson() -> (f64, [f64; 3]) {
    (
        2.0 * std::f64::consts::SQRT_2,
        [0.75 * PI, 0.25 * PI, 0.25 * PI],
    )
}
