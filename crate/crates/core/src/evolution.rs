//! Time evolution of single kaons and of the entangled pair.
//!
//! A kaon evolves unitarily into the kaon space plus a decay-product sector:
//! `U(t)|K_a> = e^{-i lambda_a t}|K_a> + |Omega_a(t)>`, with the decay
//! products orthogonal to the kaon space. The decay-product vectors are
//! never built; only their overlaps enter, and those follow from
//! `<U K_a|U K_b> = <K_a|K_b>`.
//!
//! The pair starts in the antisymmetric state
//! `(|K0>|K0bar> - |K0bar>|K0>)/sqrt2`, which equals
//! `N^2/(2 sqrt2 p q) (|K_S>|K_L> - |K_L>|K_S>)` for normalized mass states.

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::PhysicalConstants;
use crate::error::{KaonError, Result};
use crate::state::{inner_product, named_state, NamedState, QuasiSpinState};

/// Negative values down to this magnitude are treated as rounding noise.
pub const CLIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EigenLabel {
    S,
    L,
}

impl EigenLabel {
    pub const BOTH: [EigenLabel; 2] = [EigenLabel::S, EigenLabel::L];

    fn index(self) -> usize {
        match self {
            EigenLabel::S => 0,
            EigenLabel::L => 1,
        }
    }

    pub fn state(self, constants: &PhysicalConstants) -> QuasiSpinState {
        match self {
            EigenLabel::S => named_state(NamedState::KS, constants),
            EigenLabel::L => named_state(NamedState::KL, constants),
        }
    }
}

/// `lambda = m - (i/2) gamma`, in units of `1/tau_S`. Only `m_L - m_S` is
/// physical here, so `m_S = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexEigenvalue {
    pub mass: f64,
    pub width: f64,
}

impl ComplexEigenvalue {
    pub fn for_label(label: EigenLabel, constants: &PhysicalConstants) -> Self {
        match label {
            EigenLabel::S => Self {
                mass: 0.0,
                width: constants.gamma_s(),
            },
            EigenLabel::L => Self {
                mass: constants.delta_m(),
                width: constants.gamma_l(),
            },
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.mass, -0.5 * self.width)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        Err(KaonError::NegativeTime(t))
    } else {
        Ok(())
    }
}

fn phase(lambda: Complex64, t: f64) -> Complex64 {
    (Complex64::new(0.0, -1.0) * lambda * t).exp()
}

/// `e^{-i lambda t}` for the given mass eigenstate.
pub fn survival_amplitude(
    label: EigenLabel,
    t: f64,
    constants: &PhysicalConstants,
) -> Result<Complex64> {
    check_time(t)?;
    Ok(phase(
        ComplexEigenvalue::for_label(label, constants).value(),
        t,
    ))
}

/// `<Omega_a(t)|Omega_b(t)> = <K_a|K_b> (1 - e^{i(lambda_a^* - lambda_b) t})`.
pub fn omega_overlap(
    a: EigenLabel,
    b: EigenLabel,
    t: f64,
    constants: &PhysicalConstants,
) -> Result<Complex64> {
    check_time(t)?;
    let ka = a.state(constants);
    let kb = b.state(constants);
    let la = ComplexEigenvalue::for_label(a, constants).value();
    let lb = ComplexEigenvalue::for_label(b, constants).value();
    Ok(omega_overlap_raw(inner_product(&ka, &kb), la, lb, t))
}

fn omega_overlap_raw(gram: Complex64, la: Complex64, lb: Complex64, t: f64) -> Complex64 {
    let x = Complex64::new(0.0, 1.0) * (la.conj() - lb) * t;
    // 1 - e^x without cancellation for small t
    gram * -exp_m1(x)
}

/// `e^z - 1` accurate for small `|z|`.
fn exp_m1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

fn check_pair(t_l: f64, t_r: f64) -> Result<()> {
    check_time(t_l)?;
    check_time(t_r)
}

/// Probability of finding `K0` on the left at `t_l` and `K0` on the right at
/// `t_r`, CP violation neglected. The same value holds for `K0bar K0bar`;
/// the total like-strangeness rate is twice this.
pub fn joint_like_probability(t_l: f64, t_r: f64, constants: &PhysicalConstants) -> Result<f64> {
    check_pair(t_l, t_r)?;
    Ok(strangeness_pair(t_l, t_r, constants, -1.0))
}

/// `K0` on one side, `K0bar` on the other, one ordering.
pub fn joint_unlike_probability(t_l: f64, t_r: f64, constants: &PhysicalConstants) -> Result<f64> {
    check_pair(t_l, t_r)?;
    Ok(strangeness_pair(t_l, t_r, constants, 1.0))
}

fn strangeness_pair(t_l: f64, t_r: f64, k: &PhysicalConstants, sign: f64) -> f64 {
    let (gs, gl) = (k.gamma_s(), k.gamma_l());
    let dt = t_l - t_r;
    0.125
        * ((-gs * t_l - gl * t_r).exp()
            + (-gl * t_l - gs * t_r).exp()
            + sign * 2.0 * (k.delta_m() * dt).cos() * (-k.gamma() * (t_l + t_r)).exp())
}

/// `(P_unlike - P_like)/(P_unlike + P_like) = cos(dm dt) / cosh(dgamma dt / 2)`.
pub fn asymmetry_qm(delta_t: f64, constants: &PhysicalConstants) -> f64 {
    (constants.delta_m() * delta_t).cos() / (0.5 * constants.delta_gamma() * delta_t).cosh()
}

/// Yes/no probabilities for detecting `left` at `t_l` and `right` at `t_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointOutcomeTable {
    pub p_yy: f64,
    pub p_yn: f64,
    pub p_ny: f64,
    pub p_nn: f64,
    pub meta: OutcomeMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeMeta {
    pub left: [Complex64; 2],
    pub t_l: f64,
    pub right: [Complex64; 2],
    pub t_r: f64,
}

impl JointOutcomeTable {
    pub fn total(&self) -> f64 {
        self.p_yy + self.p_yn + self.p_ny + self.p_nn
    }

    /// Probability that the two sides agree (both yes or both no).
    pub fn agreement(&self) -> f64 {
        self.p_yy + self.p_nn
    }
}

type Mat2 = [[Complex64; 2]; 2];

/// Per-constants data shared by every table evaluation.
#[derive(Debug, Clone)]
pub struct PairEngine {
    mass_states: [QuasiSpinState; 2],
    gram: Mat2,
    lambda: [Complex64; 2],
    /// Coefficient of `|K_S>|K_L>` in the initial state; `|K_L>|K_S>` has
    /// the opposite sign.
    coeff: Complex64,
}

impl PairEngine {
    pub fn new(constants: &PhysicalConstants) -> Self {
        let ks = EigenLabel::S.state(constants);
        let kl = EigenLabel::L.state(constants);
        let mut gram = [[Complex64::new(0.0, 0.0); 2]; 2];
        let states = [ks, kl];
        for a in 0..2 {
            for b in 0..2 {
                gram[a][b] = inner_product(&states[a], &states[b]);
            }
        }
        let p = constants.p();
        let q = constants.q();
        let n2 = p.norm_sqr() + q.norm_sqr();
        let coeff = Complex64::new(n2, 0.0) / (2.0 * std::f64::consts::SQRT_2 * p * q);
        let lambda = [
            ComplexEigenvalue::for_label(EigenLabel::S, constants).value(),
            ComplexEigenvalue::for_label(EigenLabel::L, constants).value(),
        ];
        Self {
            mass_states: states,
            gram,
            lambda,
            coeff,
        }
    }

    /// Matrices `<U K_a| P |U K_b>` for the yes projector `|k><k|` and for
    /// its complement (identity on the decay sector).
    fn side(&self, k: &QuasiSpinState, t: f64) -> (Mat2, Mat2) {
        let zero = Complex64::new(0.0, 0.0);
        let e = [phase(self.lambda[0], t), phase(self.lambda[1], t)];
        let amp = [
            e[0] * inner_product(k, &self.mass_states[0]),
            e[1] * inner_product(k, &self.mass_states[1]),
        ];
        let mut yes = [[zero; 2]; 2];
        let mut no = [[zero; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                yes[a][b] = amp[a].conj() * amp[b];
                let kaon = e[a].conj() * e[b] * self.gram[a][b];
                let omega = omega_overlap_raw(self.gram[a][b], self.lambda[a], self.lambda[b], t);
                no[a][b] = kaon - yes[a][b] + omega;
            }
        }
        (yes, no)
    }

    fn contract(&self, left: &Mat2, right: &Mat2) -> f64 {
        // psi = c (|S>|L> - |L>|S>); terms over (a,b),(a',b') in {(S,L),(L,S)}
        let (s, l) = (EigenLabel::S.index(), EigenLabel::L.index());
        let v = left[s][s] * right[l][l] - left[s][l] * right[l][s] - left[l][s] * right[s][l]
            + left[l][l] * right[s][s];
        self.coeff.norm_sqr() * v.re
    }

    pub fn table(
        &self,
        left: &QuasiSpinState,
        t_l: f64,
        right: &QuasiSpinState,
        t_r: f64,
    ) -> Result<JointOutcomeTable> {
        check_pair(t_l, t_r)?;
        for s in [left, right] {
            if !s.is_normalized() {
                return Err(KaonError::NotNormalized(s.norm_sqr()));
            }
        }
        let (ly, ln) = self.side(left, t_l);
        let (ry, rn) = self.side(right, t_r);
        Ok(JointOutcomeTable {
            p_yy: clip(self.contract(&ly, &ry))?,
            p_yn: clip(self.contract(&ly, &rn))?,
            p_ny: clip(self.contract(&ln, &ry))?,
            p_nn: clip(self.contract(&ln, &rn))?,
            meta: OutcomeMeta {
                left: left.components(),
                t_l,
                right: right.components(),
                t_r,
            },
        })
    }
}

fn clip(p: f64) -> Result<f64> {
    if p.is_nan() {
        return Err(KaonError::NegativeProbability(p));
    }
    if p < -CLIP_TOL {
        return Err(KaonError::NegativeProbability(p));
    }
    Ok(p.clamp(0.0, 1.0 + CLIP_TOL).min(1.0))
}

/// Joint yes/no probabilities for the evolved pair, CP violation included.
pub fn joint_outcome_table(
    left: &QuasiSpinState,
    t_l: f64,
    right: &QuasiSpinState,
    t_r: f64,
    constants: &PhysicalConstants,
) -> Result<JointOutcomeTable> {
    PairEngine::new(constants).table(left, t_l, right, t_r)
}
