//! Wigner-type inequality `P(K_S, K0bar) <= P(K_S, K1) + P(K1, K0bar)` and
//! its consequences for CP violation.
//!
//! At `t = 0` the inequality is equivalent to `Re eps <= |eps|^2`, which the
//! measured `eps` violates. Under unitary evolution the time-dependent form
//! picks up the no-detection term [`h_correction`], which closes the window
//! after a small fraction of `tau_S`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{s_generalized, ChshSetting, GENERALIZED_BOUND};
use crate::constants::PhysicalConstants;
use crate::error::{KaonError, Result};
use crate::evolution::PairEngine;
use crate::state::{named_state, NamedState, QuasiSpinState};

/// `lhs - rhs` must exceed this for a probability-route verdict of
/// "violated", so that `eps = 0` (where both sides agree analytically) is not
/// decided by rounding.
pub const VERDICT_TOL: f64 = 1e-14;

/// Default bisection tolerance for [`violation_threshold`], in `tau_S`.
pub const THRESHOLD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerEvaluation {
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
    /// `[t_a, t_b, t_c, t_d]` actually used.
    pub times: [f64; 4],
    /// Value of [`h_correction`] when it enters `rhs`.
    pub h: Option<f64>,
    /// Verdict of `Re eps > |eps|^2`, reported by [`wigner_t0`].
    pub epsilon_violated: Option<bool>,
}

impl WignerEvaluation {
    fn new(lhs: f64, rhs: f64, times: [f64; 4]) -> Self {
        Self {
            lhs,
            rhs,
            violated: lhs - rhs > VERDICT_TOL,
            times,
            h: None,
            epsilon_violated: None,
        }
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

struct Trio {
    engine: PairEngine,
    ks: QuasiSpinState,
    k0bar: QuasiSpinState,
    k1: QuasiSpinState,
}

impl Trio {
    fn new(k: &PhysicalConstants) -> Self {
        Self {
            engine: PairEngine::new(k),
            ks: named_state(NamedState::KS, k),
            k0bar: named_state(NamedState::K0bar, k),
            k1: named_state(NamedState::K1, k),
        }
    }

    /// `(P_YY(KS,K0bar), P_YY(KS,K1) + P_YY(K1,K0bar), h)` at equal times.
    fn equal_times(&self, t: f64) -> Result<(f64, f64, f64)> {
        let e = &self.engine;
        let s_b = e.table(&self.ks, t, &self.k0bar, t)?;
        let s_1 = e.table(&self.ks, t, &self.k1, t)?;
        let one_b = e.table(&self.k1, t, &self.k0bar, t)?;
        let one_one = e.table(&self.k1, t, &self.k1, t)?;
        let h = -s_b.p_nn + s_1.p_nn + one_b.p_nn + one_one.p_nn;
        Ok((s_b.p_yy, s_1.p_yy + one_b.p_yy, h))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        Err(KaonError::NegativeTime(t))
    } else {
        Ok(())
    }
}

/// The inequality at `t = 0`, from the full joint probabilities, together
/// with the independent `Re eps > |eps|^2` verdict.
pub fn wigner_t0(constants: &PhysicalConstants) -> WignerEvaluation {
    let (lhs, rhs, _) = Trio::new(constants)
        .equal_times(0.0)
        .expect("t = 0 with normalized named states");
    let eps = constants.epsilon();
    let mut ev = WignerEvaluation::new(lhs, rhs, [0.0; 4]);
    ev.epsilon_violated = Some(eps.re > eps.norm_sqr());
    ev
}

/// `h(t) = -P_NN(KS,K0bar) + P_NN(KS,K1) + P_NN(K1,K0bar) + P_NN(K1,K1)`, all
/// at equal times `t`.
///
/// At `t = 0` it equals `-(Re eps - |eps|^2) / (2 (1 + |eps|^2))`, small and
/// negative for the measured `eps`; it tends to 2 once every kaon has decayed.
pub fn h_correction(t: f64, constants: &PhysicalConstants) -> Result<f64> {
    check_time(t)?;
    Ok(Trio::new(constants).equal_times(t)?.2)
}

/// `P_YY(KS,K0bar;t,t) <= P_YY(KS,K1;t,t) + P_YY(K1,K0bar;t,t) + h(t)`.
pub fn wigner_equal_times(t: f64, constants: &PhysicalConstants) -> Result<WignerEvaluation> {
    check_time(t)?;
    let (lhs, rhs, h) = Trio::new(constants).equal_times(t)?;
    let mut ev = WignerEvaluation::new(lhs, rhs + h, [t; 4]);
    ev.h = Some(h);
    Ok(ev)
}

/// The equal-time inequality with `h` dropped, i.e. what one concludes when
/// decay products are ignored.
pub fn wigner_equal_times_without_h(
    t: f64,
    constants: &PhysicalConstants,
) -> Result<WignerEvaluation> {
    check_time(t)?;
    let (lhs, rhs, _) = Trio::new(constants).equal_times(t)?;
    Ok(WignerEvaluation::new(lhs, rhs, [t; 4]))
}

/// Largest `t` below which [`wigner_equal_times`] is violated, by bisection
/// to `tol`.
pub fn violation_threshold(constants: &PhysicalConstants, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(KaonError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let trio = Trio::new(constants);
    let margin = |t: f64| -> Result<f64> {
        let (lhs, rhs, h) = trio.equal_times(t)?;
        Ok(lhs - rhs - h)
    };
    if margin(0.0)? <= VERDICT_TOL {
        return Err(KaonError::NoViolation);
    }
    // expand until the violation is gone
    let mut hi = 1e-5;
    while margin(hi)? > 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(KaonError::NoSignChange { lo: 0.0, hi });
        }
    }
    bisect_sign(margin, 0.0, hi, tol)
}

/// Bisection on a function positive at `lo` and non-positive at `hi`.
fn bisect_sign<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    if f(lo)? <= 0.0 || f(hi)? > 0.0 {
        return Err(KaonError::NoSignChange { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The generalized inequality in the Wigner choice at times
/// `t_c = t_d = t_a <= t_b`; `lhs` is the probability-form S, `rhs` is 1.
pub fn wigner_two_times(
    t_a: f64,
    t_b: f64,
    constants: &PhysicalConstants,
) -> Result<WignerEvaluation> {
    check_time(t_a)?;
    check_time(t_b)?;
    if t_a > t_b {
        return Err(KaonError::InvalidParameter(format!(
            "two-times configuration needs t_a <= t_b, got t_a = {t_a}, t_b = {t_b}"
        )));
    }
    let times = [t_a, t_b, t_a, t_a];
    let setting = ChshSetting::wigner_choice(times, constants)?;
    let s = s_generalized(&setting, constants)?;
    Ok(WignerEvaluation::new(s, GENERALIZED_BOUND, times))
}

/// Largest `t_b` in `[t_a, t_b_max]` at which [`wigner_two_times`] is still
/// violated, located by a scan at `step` followed by bisection to `tol`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn two_times_boundary(
    t_a: f64,
    t_b_max: f64,
    step: f64,
    tol: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !(step > 0.0 && tol > 0.0) || !(t_b_max >= t_a) {
        return Err(KaonError::InvalidParameter(format!(
            "bad boundary search: t_a = {t_a}, t_b_max = {t_b_max}, step = {step}, tol = {tol}"
        )));
    }
    let margin = |t_b: f64| wigner_two_times(t_a, t_b, constants).map(|e| e.margin() - VERDICT_TOL);
    if margin(t_a)? <= 0.0 {
        return Err(KaonError::NoViolation);
    }
    let mut lo = t_a;
    while lo < t_b_max {
        let hi = (lo + step).min(t_b_max);
        if margin(hi)? <= 0.0 {
            return bisect_sign(margin, lo, hi, tol);
        }
        lo = hi;
    }
    Err(KaonError::NoSignChange {
        lo: t_a,
        hi: t_b_max,
    })
}

/// One cell of a `(t_a, t_b)` region scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionRow {
    pub t_a: f64,
    pub t_b: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

/// Evaluates [`wigner_two_times`] on the grid `t_a, t_b in {0, step, ...}`
/// up to `t_max`, keeping cells with `t_a <= t_b`. Rows are ordered by
/// `t_a`, then `t_b`.
pub fn region_scan(t_max: f64, step: f64, constants: &PhysicalConstants) -> Result<Vec<RegionRow>> {
    if !(step > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return Err(KaonError::InvalidParameter(format!(
            "bad region scan: t_max = {t_max}, step = {step}"
        )));
    }
    let n = (t_max / step + 1e-9).floor() as usize + 1;
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    cells
        .into_par_iter()
        .map(|(i, j)| {
            let (t_a, t_b) = (i as f64 * step, j as f64 * step);
            let ev = wigner_two_times(t_a, t_b, constants)?;
            Ok(RegionRow {
                t_a,
                t_b,
                lhs: ev.lhs,
                rhs: ev.rhs,
                violated: ev.violated,
            })
        })
        .collect()
}

/// Lower bound on the decoherence parameter from the CP-violation test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ZetaBound {
    Bound(f64),
    /// `Re eps <= |eps|^2`: the inequality gives no constraint.
    Vacuous,
}

impl ZetaBound {
    pub fn value(self) -> Option<f64> {
        match self {
            ZetaBound::Bound(z) => Some(z),
            ZetaBound::Vacuous => None,
        }
    }
}

/// `zeta >= (Re eps - |eps|^2) / (Re eps + 4 Re^2 eps + |eps|^2)`.
pub fn zeta_lower_bound(constants: &PhysicalConstants) -> ZetaBound {
    let eps = constants.epsilon();
    let (re, abs2) = (eps.re, eps.norm_sqr());
    if re <= abs2 {
        return ZetaBound::Vacuous;
    }
    ZetaBound::Bound((re - abs2) / (re + 4.0 * re * re + abs2))
}
