//! Physical constants of the neutral-kaon system.
//!
//! Constants are stored in SI units. Everything downstream works with
//! dimensionless proper times measured in units of `tau_S`, so the rate
//! accessors (`gamma_s`, `delta_m`, ...) return values in units of `1/tau_S`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KaonError, Result};

/// Short-lived lifetime [s].
pub const TAU_S: f64 = 0.8935e-10;
/// Long-lived lifetime [s].
pub const TAU_L: f64 = 5.17e-8;
/// Mass difference `m_L - m_S` [1/s].
pub const DELTA_M: f64 = 0.5300e10;
/// Default `|epsilon|`.
pub const EPSILON_ABS: f64 = 2.23e-3;
/// Default `arg(epsilon)` in degrees.
pub const EPSILON_ARG_DEG: f64 = 45.0;

/// Which decay widths are switched on.
///
/// `StableLong` puts `gamma_L = 0`, the simplification used for the
/// strangeness CHSH function; `NoDecay` forbids all decays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    #[default]
    Full,
    StableLong,
    NoDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    tau_s: f64,
    tau_l: f64,
    delta_m: f64,
    epsilon: Complex64,
    decay: DecayMode,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        default_constants()
    }
}

/// The measured kaon constants with `|epsilon| = 2.23e-3` at 45 degrees.
pub fn default_constants() -> PhysicalConstants {
    PhysicalConstants {
        tau_s: TAU_S,
        tau_l: TAU_L,
        delta_m: DELTA_M,
        epsilon: Complex64::from_polar(EPSILON_ABS, EPSILON_ARG_DEG.to_radians()),
        decay: DecayMode::Full,
    }
}

impl PhysicalConstants {
    pub fn new(tau_s: f64, tau_l: f64, delta_m: f64, epsilon: Complex64) -> Result<Self> {
        let c = Self {
            tau_s,
            tau_l,
            delta_m,
            epsilon,
            decay: DecayMode::Full,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KaonError::InvalidConstants(msg));
        if !(self.tau_s.is_finite() && self.tau_s > 0.0) {
            return bad(format!("tau_S must be positive, got {}", self.tau_s));
        }
        if !(self.tau_l.is_finite() && self.tau_l > 0.0) {
            return bad(format!("tau_L must be positive, got {}", self.tau_l));
        }
        if self.tau_l <= self.tau_s {
            return bad(format!(
                "tau_L ({}) must exceed tau_S ({})",
                self.tau_l, self.tau_s
            ));
        }
        if !(self.delta_m.is_finite() && self.delta_m > 0.0) {
            return bad(format!("delta_m must be positive, got {}", self.delta_m));
        }
        if !(self.epsilon.re.is_finite() && self.epsilon.im.is_finite()) {
            return bad("epsilon must be finite".into());
        }
        if self.epsilon.norm() >= 0.1 {
            return bad(format!(
                "|epsilon| = {} must be below 0.1",
                self.epsilon.norm()
            ));
        }
        Ok(())
    }

    pub fn with_epsilon(mut self, epsilon: Complex64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_epsilon_polar(self, abs: f64, arg_deg: f64) -> Result<Self> {
        if abs < 0.0 {
            return Err(KaonError::InvalidConstants(format!(
                "|epsilon| must be non-negative, got {abs}"
            )));
        }
        self.with_epsilon(Complex64::from_polar(abs, arg_deg.to_radians()))
    }

    /// CP-conserving copy (`epsilon = 0`).
    pub fn without_cp_violation(mut self) -> Self {
        self.epsilon = Complex64::new(0.0, 0.0);
        self
    }

    pub fn with_decay_mode(mut self, decay: DecayMode) -> Self {
        self.decay = decay;
        self
    }

    pub fn tau_s_seconds(&self) -> f64 {
        self.tau_s
    }

    pub fn tau_l_seconds(&self) -> f64 {
        self.tau_l
    }

    pub fn delta_m_per_second(&self) -> f64 {
        self.delta_m
    }

    pub fn epsilon(&self) -> Complex64 {
        self.epsilon
    }

    pub fn decay_mode(&self) -> DecayMode {
        self.decay
    }

    /// `gamma_S` in units of `1/tau_S` (1, or 0 with decays disabled).
    pub fn gamma_s(&self) -> f64 {
        match self.decay {
            DecayMode::NoDecay => 0.0,
            _ => 1.0,
        }
    }

    /// `gamma_L` in units of `1/tau_S`.
    pub fn gamma_l(&self) -> f64 {
        match self.decay {
            DecayMode::Full => self.tau_s / self.tau_l,
            _ => 0.0,
        }
    }

    /// Mean width `(gamma_S + gamma_L) / 2`.
    pub fn gamma(&self) -> f64 {
        0.5 * (self.gamma_s() + self.gamma_l())
    }

    /// `gamma_L - gamma_S` (negative for kaons).
    pub fn delta_gamma(&self) -> f64 {
        self.gamma_l() - self.gamma_s()
    }

    /// `m_L - m_S` in units of `1/tau_S`.
    pub fn delta_m(&self) -> f64 {
        self.delta_m * self.tau_s
    }

    /// Oscillation-to-decay ratio `2 delta_m / gamma_S` from the stored SI
    /// values; independent of the decay-mode override.
    pub fn x(&self) -> f64 {
        2.0 * self.delta_m * self.tau_s
    }

    pub fn gamma_s_per_second(&self) -> f64 {
        1.0 / self.tau_s
    }

    pub fn gamma_l_per_second(&self) -> f64 {
        1.0 / self.tau_l
    }

    /// `p = 1 + epsilon`.
    pub fn p(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.epsilon
    }

    /// `q = 1 - epsilon`.
    pub fn q(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.epsilon
    }

    /// Converts a time in seconds to units of `tau_S`.
    pub fn to_tau_s_units(&self, seconds: f64) -> f64 {
        seconds / self.tau_s
    }

    pub fn to_seconds(&self, t: f64) -> f64 {
        t * self.tau_s
    }
}

/// Overrides read from a config file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOverrides {
    pub tau_s: Option<f64>,
    pub tau_l: Option<f64>,
    pub delta_m: Option<f64>,
    pub epsilon_abs: Option<f64>,
    pub epsilon_arg_deg: Option<f64>,
    pub decay: Option<DecayMode>,
}

impl ConstantsOverrides {
    /// Parses `key = value` lines (TOML syntax, `#` comments).
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| KaonError::Config(e.message().to_string()))
    }

    /// Fields set in `other` take precedence.
    pub fn merge(&self, other: &Self) -> Self {
        Self {
            tau_s: other.tau_s.or(self.tau_s),
            tau_l: other.tau_l.or(self.tau_l),
            delta_m: other.delta_m.or(self.delta_m),
            epsilon_abs: other.epsilon_abs.or(self.epsilon_abs),
            epsilon_arg_deg: other.epsilon_arg_deg.or(self.epsilon_arg_deg),
            decay: other.decay.or(self.decay),
        }
    }

    pub fn apply(&self, base: PhysicalConstants) -> Result<PhysicalConstants> {
        let abs = self.epsilon_abs.unwrap_or(base.epsilon.norm());
        let arg = self
            .epsilon_arg_deg
            .unwrap_or_else(|| base.epsilon.arg().to_degrees());
        if abs < 0.0 {
            return Err(KaonError::InvalidConstants(format!(
                "|epsilon| must be non-negative, got {abs}"
            )));
        }
        let c = PhysicalConstants::new(
            self.tau_s.unwrap_or(base.tau_s),
            self.tau_l.unwrap_or(base.tau_l),
            self.delta_m.unwrap_or(base.delta_m),
            Complex64::from_polar(abs, arg.to_radians()),
        )?;
        Ok(c.with_decay_mode(self.decay.unwrap_or(base.decay)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_measured_values() {
        let c = default_constants();
        assert_eq!(c.tau_s_seconds(), 0.8935e-10);
        assert_eq!(c.tau_l_seconds(), 5.17e-8);
        assert_eq!(c.delta_m_per_second(), 0.5300e10);
        assert!((c.epsilon().norm() - 2.23e-3).abs() < 1e-15);
        assert!((c.epsilon().arg().to_degrees() - 45.0).abs() < 1e-9);
    }

    #[test]
    fn x_parameter() {
        let c = default_constants();
        assert!((c.x() - 2.0 * 0.5300e10 * 0.8935e-10).abs() < 1e-12);
        assert!((c.x() - 0.947).abs() < 1e-3);
        assert!((0.90..=1.00).contains(&c.x()));
    }

    #[test]
    fn derived_rates() {
        let c = default_constants();
        assert_eq!(c.gamma_s(), 1.0);
        assert!((c.gamma_l() - 0.8935e-10 / 5.17e-8).abs() < 1e-15);
        assert!((c.gamma() - 0.5 * (1.0 + c.gamma_l())).abs() < 1e-15);
        assert!(c.delta_gamma() < 0.0);
        let stable = c.with_decay_mode(DecayMode::StableLong);
        assert_eq!(stable.gamma_l(), 0.0);
        assert_eq!(stable.gamma(), 0.5);
        let frozen = c.with_decay_mode(DecayMode::NoDecay);
        assert_eq!(frozen.gamma(), 0.0);
        assert_eq!(frozen.x(), c.x());
    }

    #[test]
    fn rejects_nonsense() {
        let e = Complex64::new(0.0, 0.0);
        assert!(PhysicalConstants::new(-1.0, 1.0, 1.0, e).is_err());
        assert!(PhysicalConstants::new(1.0, 0.5, 1.0, e).is_err());
        assert!(PhysicalConstants::new(1.0, 2.0, 0.0, e).is_err());
        assert!(PhysicalConstants::new(1.0, 2.0, 1.0, Complex64::new(0.1, 0.0)).is_err());
        assert!(default_constants().with_epsilon_polar(-1e-3, 0.0).is_err());
    }

    #[test]
    fn overrides_from_text() {
        let o = ConstantsOverrides::parse(
            "# comment\ntau_s = 0.9e-10\nepsilon_abs = 0.0\ndecay = \"stable_long\"\n",
        )
        .unwrap();
        let c = o.apply(default_constants()).unwrap();
        assert_eq!(c.tau_s_seconds(), 0.9e-10);
        assert_eq!(c.epsilon().norm(), 0.0);
        assert_eq!(c.decay_mode(), DecayMode::StableLong);
        assert_eq!(c.tau_l_seconds(), TAU_L);
    }

    #[test]
    fn overrides_reject_unknown_keys() {
        assert!(matches!(
            ConstantsOverrides::parse("tau_x = 1.0"),
            Err(KaonError::Config(_))
        ));
        assert!(ConstantsOverrides::parse("tau_s = ").is_err());
    }

    #[test]
    fn merge_prefers_later() {
        let a = ConstantsOverrides {
            tau_s: Some(1.0),
            epsilon_abs: Some(1e-3),
            ..Default::default()
        };
        let b = ConstantsOverrides {
            epsilon_abs: Some(2e-3),
            ..Default::default()
        };
        let m = a.merge(&b);
        assert_eq!(m.tau_s, Some(1.0));
        assert_eq!(m.epsilon_abs, Some(2e-3));
    }
}
