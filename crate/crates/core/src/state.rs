//! Quasi-spin states over the strangeness basis `{K0, K0bar}`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{KaonError, Result};

/// Tolerance on `|c_k0|^2 + |c_k0bar|^2 - 1` for a stored state.
pub const NORM_TOL: f64 = 1e-12;

/// The physically distinguished quasi-spin states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedState {
    K0,
    K0bar,
    /// Short-lived mass eigenstate.
    KS,
    /// Long-lived mass eigenstate.
    KL,
    /// CP-even eigenstate.
    K1,
    /// CP-odd eigenstate.
    K2,
}

impl NamedState {
    pub const ALL: [NamedState; 6] = [
        NamedState::K0,
        NamedState::K0bar,
        NamedState::KS,
        NamedState::KL,
        NamedState::K1,
        NamedState::K2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedState::K0 => "K0",
            NamedState::K0bar => "K0bar",
            NamedState::KS => "KS",
            NamedState::KL => "KL",
            NamedState::K1 => "K1",
            NamedState::K2 => "K2",
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedState {
    type Err = KaonError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k0" => Ok(NamedState::K0),
            "k0bar" | "antik0" => Ok(NamedState::K0bar),
            "ks" => Ok(NamedState::KS),
            "kl" => Ok(NamedState::KL),
            "k1" => Ok(NamedState::K1),
            "k2" => Ok(NamedState::K2),
            _ => Err(KaonError::InvalidParameter(format!("unknown state '{s}'"))),
        }
    }
}

/// A normalized vector `c_k0 |K0> + c_k0bar |K0bar>`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiSpinState {
    c_k0: Complex64,
    c_k0bar: Complex64,
    label: Option<String>,
}

impl QuasiSpinState {
    /// Normalizes the given coefficients.
    pub fn new(c_k0: Complex64, c_k0bar: Complex64) -> Result<Self> {
        let n2 = c_k0.norm_sqr() + c_k0bar.norm_sqr();
        if !n2.is_finite() || n2 == 0.0 {
            return Err(KaonError::ZeroState);
        }
        let n = n2.sqrt();
        Ok(Self {
            c_k0: c_k0 / n,
            c_k0bar: c_k0bar / n,
            label: None,
        })
    }

    /// Accepts already-normalized coefficients, rejecting anything off by
    /// more than [`NORM_TOL`].
    pub fn from_normalized(c_k0: Complex64, c_k0bar: Complex64) -> Result<Self> {
        let n2 = c_k0.norm_sqr() + c_k0bar.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(KaonError::NotNormalized(n2));
        }
        Ok(Self {
            c_k0,
            c_k0bar,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn c_k0(&self) -> Complex64 {
        self.c_k0
    }

    pub fn c_k0bar(&self) -> Complex64 {
        self.c_k0bar
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn components(&self) -> [Complex64; 2] {
        [self.c_k0, self.c_k0bar]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_k0.norm_sqr() + self.c_k0bar.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }
}

/// Coefficients of a named state for the given CP parameter.
///
/// `K_S = (p|K0> - q|K0bar>)/N`, `K_L = (p|K0> + q|K0bar>)/N` with
/// `p = 1 + eps`, `q = 1 - eps`, `N^2 = |p|^2 + |q|^2`.
pub fn named_state(kind: NamedState, constants: &PhysicalConstants) -> QuasiSpinState {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let (a, b) = match kind {
        NamedState::K0 => (one, zero),
        NamedState::K0bar => (zero, one),
        NamedState::K1 => (h, -h),
        NamedState::K2 => (h, h),
        NamedState::KS | NamedState::KL => {
            let p = constants.p();
            let q = constants.q();
            let n = (p.norm_sqr() + q.norm_sqr()).sqrt();
            let sign = if kind == NamedState::KS { -1.0 } else { 1.0 };
            (p / n, q * sign / n)
        }
    };
    QuasiSpinState {
        c_k0: a,
        c_k0bar: b,
        label: Some(kind.name().to_string()),
    }
}

/// `<a|b>`, antilinear in the first argument.
pub fn inner_product(a: &QuasiSpinState, b: &QuasiSpinState) -> Complex64 {
    a.c_k0.conj() * b.c_k0 + a.c_k0bar.conj() * b.c_k0bar
}
