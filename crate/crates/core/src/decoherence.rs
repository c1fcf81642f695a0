//! Decoherence-modified probabilities and asymmetries, and the fit of the
//! decoherence parameter `zeta` to measured asymmetries.
//!
//! `zeta` multiplies the interference term of the two-kaon amplitude by
//! `1 - zeta`: `zeta = 0` is quantum mechanics, `zeta = 1` is complete
//! factorization of the pair into product states. The factorization depends
//! on the basis in which it is imposed. CP violation is neglected throughout.

use std::io::Read;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{KaonError, Result};
use crate::evolution::asymmetry_qm;

/// Search interval for the fit; reaches past 1 so the interval can cover
/// complete factorization.
pub const FIT_RANGE: (f64, f64) = (0.0, 1.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Factorization into `K_S K_L` products.
    Mass,
    /// Factorization into `K0 K0bar` products.
    Strangeness,
}

/// How strictly `zeta` is range-checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZetaRange {
    /// `zeta` in `[0, 1]`.
    #[default]
    Physical,
    /// Any finite value; used while fitting.
    Extended,
}

fn check_zeta(zeta: f64, range: ZetaRange) -> Result<()> {
    let ok = match range {
        ZetaRange::Physical => (0.0..=1.0).contains(&zeta),
        ZetaRange::Extended => zeta.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(KaonError::ZetaOutOfRange(zeta))
    }
}

fn check_times(t_l: f64, t_r: f64) -> Result<()> {
    for t in [t_l, t_r] {
        if t.is_nan() || t < 0.0 {
            return Err(KaonError::NegativeTime(t));
        }
    }
    Ok(())
}

/// `<K0|K0(t)>` and `<K0|K0bar(t)>` without CP violation.
fn strangeness_amplitudes(t: f64, k: &PhysicalConstants) -> (Complex64, Complex64) {
    let e_s = Complex64::new(-0.5 * k.gamma_s() * t, 0.0).exp();
    let e_l = Complex64::new(0.5 * -k.gamma_l() * t, -k.delta_m() * t).exp();
    (0.5 * (e_s + e_l), 0.5 * (e_l - e_s))
}

/// One-ordering like-strangeness probability (`K0` on both sides) with the
/// interference term scaled by `1 - zeta`.
pub fn modified_like_probability(
    basis: Basis,
    t_l: f64,
    t_r: f64,
    zeta: f64,
    range: ZetaRange,
    constants: &PhysicalConstants,
) -> Result<f64> {
    check_times(t_l, t_r)?;
    check_zeta(zeta, range)?;
    Ok(modified_pair(basis, t_l, t_r, zeta, constants, -1.0))
}

/// One-ordering unlike-strangeness probability (`K0` left, `K0bar` right).
pub fn modified_unlike_probability(
    basis: Basis,
    t_l: f64,
    t_r: f64,
    zeta: f64,
    range: ZetaRange,
    constants: &PhysicalConstants,
) -> Result<f64> {
    check_times(t_l, t_r)?;
    check_zeta(zeta, range)?;
    Ok(modified_pair(basis, t_l, t_r, zeta, constants, 1.0))
}

fn modified_pair(
    basis: Basis,
    t_l: f64,
    t_r: f64,
    zeta: f64,
    k: &PhysicalConstants,
    sign: f64,
) -> f64 {
    let keep = 1.0 - zeta;
    match basis {
        Basis::Mass => {
            let (gs, gl) = (k.gamma_s(), k.gamma_l());
            0.125
                * ((-gs * t_l - gl * t_r).exp()
                    + (-gl * t_l - gs * t_r).exp()
                    + sign
                        * 2.0
                        * keep
                        * (k.delta_m() * (t_l - t_r)).cos()
                        * (-k.gamma() * (t_l + t_r)).exp())
        }
        Basis::Strangeness => {
            let (a_l, b_l) = strangeness_amplitudes(t_l, k);
            let (a_r, b_r) = strangeness_amplitudes(t_r, k);
            if sign < 0.0 {
                // |a_l b_r - b_l a_r|^2 / 2
                0.5 * (a_l.norm_sqr() * b_r.norm_sqr() + b_l.norm_sqr() * a_r.norm_sqr()
                    - 2.0 * keep * (a_l * b_r * (b_l * a_r).conj()).re)
            } else {
                // |a_l a_r - b_l b_r|^2 / 2
                0.5 * (a_l.norm_sqr() * a_r.norm_sqr() + b_l.norm_sqr() * b_r.norm_sqr()
                    - 2.0 * keep * (a_l * a_r * (b_l * b_r).conj()).re)
            }
        }
    }
}

/// Decoherence-modified asymmetry `(unlike - like)/(unlike + like)`.
///
/// Mass basis: `A_QM(dt) (1 - zeta)`. Strangeness basis: depends on both
/// `t_l - t_r` and `t_l + t_r` and is not linear in `zeta`.
pub fn modified_asymmetry(
    basis: Basis,
    t_l: f64,
    t_r: f64,
    zeta: f64,
    range: ZetaRange,
    constants: &PhysicalConstants,
) -> Result<f64> {
    check_times(t_l, t_r)?;
    check_zeta(zeta, range)?;
    Ok(asymmetry_unchecked(basis, t_l, t_r, zeta, constants))
}

fn asymmetry_unchecked(basis: Basis, t_l: f64, t_r: f64, zeta: f64, k: &PhysicalConstants) -> f64 {
    let dt = t_l - t_r;
    match basis {
        Basis::Mass => asymmetry_qm(dt, k) * (1.0 - zeta),
        Basis::Strangeness => {
            let sum = t_l + t_r;
            let dm = k.delta_m();
            let hg = 0.5 * k.delta_gamma();
            let num = (dm * dt).cos() - 0.5 * zeta * ((dm * dt).cos() - (dm * sum).cos());
            let den = (hg * dt).cosh() - 0.5 * zeta * ((hg * dt).cosh() - (hg * sum).cosh());
            num / den
        }
    }
}

/// One measured asymmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryPoint {
    pub label: String,
    /// Proper times in units of `tau_S`.
    pub t_l: f64,
    pub t_r: f64,
    pub measured: f64,
    pub sigma: f64,
    /// Apparatus-corrected quantum prediction, if published.
    pub corrected_theory: Option<f64>,
}

impl AsymmetryPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(KaonError::InvalidData(format!(
                "{}: sigma must be positive, got {}",
                self.label, self.sigma
            )));
        }
        if !(-1.5..=1.5).contains(&self.measured) {
            return Err(KaonError::InvalidData(format!(
                "{}: measured asymmetry {} outside [-1.5, 1.5]",
                self.label, self.measured
            )));
        }
        check_times(self.t_l, self.t_r)
            .map_err(|e| KaonError::InvalidData(format!("{}: {e}", self.label)))
    }
}

/// Reads points from CSV with header
/// `label,t_l,t_r,measured,sigma,corrected_theory` (last column may be empty).
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<AsymmetryPoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let expected = [
        "label",
        "t_l",
        "t_r",
        "measured",
        "sigma",
        "corrected_theory",
    ];
    let headers = rdr
        .headers()
        .map_err(|e| KaonError::Parse(e.to_string()))?
        .clone();
    if headers.iter().ne(expected.iter().copied()) {
        return Err(KaonError::Parse(format!(
            "expected header '{}', got '{}'",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    for rec in rdr.deserialize::<AsymmetryPoint>() {
        let p = rec.map_err(|e| KaonError::Parse(e.to_string()))?;
        p.validate()?;
        points.push(p);
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// `model_i = corrected_theory_i * A_zeta / A_0`; for the mass basis this
    /// is `corrected_theory_i * (1 - zeta)`.
    CorrectedTheoryScaling,
    /// `model_i = A_zeta(t_l, t_r)` with no apparatus correction.
    RawModel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub zeta_hat: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub chi2_min: f64,
    pub ndf: usize,
    pub basis: Basis,
    pub mode: FitMode,
    /// The `delta chi2 = 1` crossing fell outside the search range.
    pub lower_clipped: bool,
    pub upper_clipped: bool,
    /// Weighted linear least-squares solution, when the model is linear in
    /// `1 - zeta` (mass basis with corrected-theory scaling). Not
    /// range-restricted.
    pub linear_estimate: Option<f64>,
}

impl FitResult {
    pub fn lower(&self) -> f64 {
        self.zeta_hat - self.sigma_minus
    }

    pub fn upper(&self) -> f64 {
        self.zeta_hat + self.sigma_plus
    }
}

struct Chi2<'a> {
    points: &'a [AsymmetryPoint],
    basis: Basis,
    mode: FitMode,
    constants: &'a PhysicalConstants,
}

impl Chi2<'_> {
    fn model(&self, p: &AsymmetryPoint, zeta: f64) -> f64 {
        let a = asymmetry_unchecked(self.basis, p.t_l, p.t_r, zeta, self.constants);
        match self.mode {
            FitMode::RawModel => a,
            FitMode::CorrectedTheoryScaling => {
                let t = p.corrected_theory.expect("validated");
                match self.basis {
                    Basis::Mass => t * (1.0 - zeta),
                    Basis::Strangeness => {
                        t * a / asymmetry_unchecked(self.basis, p.t_l, p.t_r, 0.0, self.constants)
                    }
                }
            }
        }
    }

    fn eval(&self, zeta: f64) -> f64 {
        self.points
            .iter()
            .map(|p| ((p.measured - self.model(p, zeta)) / p.sigma).powi(2))
            .sum()
    }
}

const SCAN_POINTS: usize = 301;
const ZETA_TOL: f64 = 1e-10;

/// Fits `zeta` by minimizing `sum ((measured - model)/sigma)^2` over
/// [`FIT_RANGE`], with a `delta chi2 = 1` interval on each side.
pub fn fit_zeta(
    points: &[AsymmetryPoint],
    basis: Basis,
    mode: FitMode,
    constants: &PhysicalConstants,
) -> Result<FitResult> {
    if points.is_empty() {
        return Err(KaonError::NoData);
    }
    for p in points {
        p.validate()?;
        if mode == FitMode::CorrectedTheoryScaling {
            if p.corrected_theory.is_none() {
                return Err(KaonError::InvalidData(format!(
                    "{}: corrected_theory required in corrected-theory scaling mode",
                    p.label
                )));
            }
            if basis == Basis::Strangeness
                && asymmetry_unchecked(basis, p.t_l, p.t_r, 0.0, constants).abs() < 1e-9
            {
                return Err(KaonError::InvalidData(format!(
                    "{}: quantum asymmetry vanishes, cannot scale corrected theory",
                    p.label
                )));
            }
        }
    }
    let chi2 = Chi2 {
        points,
        basis,
        mode,
        constants,
    };
    let (lo, hi) = FIT_RANGE;

    // coarse scan, then golden section inside the best bracket
    let h = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let (best_i, _) = (0..SCAN_POINTS)
        .map(|i| (i, chi2.eval(lo + h * i as f64)))
        .fold(
            (0, f64::INFINITY),
            |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
        );
    let a = lo + h * best_i.saturating_sub(1) as f64;
    let b = (lo + h * (best_i + 1) as f64).min(hi);
    let zeta_hat = golden_section_min(|z| chi2.eval(z), a, b, ZETA_TOL);
    let chi2_min = chi2.eval(zeta_hat);

    let target = |z: f64| chi2.eval(z) - chi2_min - 1.0;
    let (lower, lower_clipped) = if target(lo) > 0.0 {
        (bisect(target, lo, zeta_hat, ZETA_TOL), false)
    } else {
        (lo, true)
    };
    let (upper, upper_clipped) = if target(hi) > 0.0 {
        (bisect(target, zeta_hat, hi, ZETA_TOL), false)
    } else {
        (hi, true)
    };

    let linear_estimate =
        (basis == Basis::Mass && mode == FitMode::CorrectedTheoryScaling).then(|| {
            let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), p| {
                let t = p.corrected_theory.expect("validated");
                let w = 1.0 / (p.sigma * p.sigma);
                (n + w * t * p.measured, d + w * t * t)
            });
            1.0 - num / den
        });

    Ok(FitResult {
        zeta_hat,
        sigma_minus: zeta_hat - lower,
        sigma_plus: upper - zeta_hat,
        chi2_min,
        ndf: points.len().saturating_sub(1),
        basis,
        mode,
        lower_clipped,
        upper_clipped,
        linear_estimate,
    })
}

/// `chi2(zeta)` for the given data, exposed for profile plots.
pub fn chi2_profile(
    points: &[AsymmetryPoint],
    basis: Basis,
    mode: FitMode,
    zeta: f64,
    constants: &PhysicalConstants,
) -> f64 {
    Chi2 {
        points,
        basis,
        mode,
        constants,
    }
    .eval(zeta)
}

fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    // the bracket endpoints may beat the interior on a boundary minimum
    [a, m, b]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(m)
}

/// Root of `f` in `[a, b]`, assuming a sign change.
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::default_constants;
    use crate::evolution::{joint_like_probability, joint_unlike_probability};

    fn k() -> PhysicalConstants {
        default_constants().without_cp_violation()
    }

    fn cplear(t0: f64, t5: f64) -> Vec<AsymmetryPoint> {
        vec![
            AsymmetryPoint {
                label: "C(0)".into(),
                t_l: t0,
                t_r: t0,
                measured: 0.81,
                sigma: 0.17,
                corrected_theory: Some(0.93),
            },
            AsymmetryPoint {
                label: "C(5)".into(),
                t_l: t0,
                t_r: t5,
                measured: 0.48,
                sigma: 0.12,
                corrected_theory: Some(0.56),
            },
        ]
    }

    #[test]
    fn zeta_zero_is_quantum_mechanics() {
        let k = k();
        for (tl, tr) in [(0.0, 0.0), (0.5, 2.0), (3.0, 1.2)] {
            for basis in [Basis::Mass, Basis::Strangeness] {
                let like =
                    modified_like_probability(basis, tl, tr, 0.0, ZetaRange::Physical, &k).unwrap();
                let unlike =
                    modified_unlike_probability(basis, tl, tr, 0.0, ZetaRange::Physical, &k)
                        .unwrap();
                let jl = joint_like_probability(tl, tr, &k).unwrap();
                assert!((like - jl).abs() < 1e-15, "{basis:?} {tl} {tr} {like} {jl}");
                assert!((unlike - joint_unlike_probability(tl, tr, &k).unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn furry_limit_mass_basis() {
        let k = k();
        for t in [0.5, 1.0, 2.0] {
            let p =
                modified_like_probability(Basis::Mass, t, t, 1.0, ZetaRange::Physical, &k).unwrap();
            let expected = 0.125 * 2.0 * (-(k.gamma_s() + k.gamma_l()) * t).exp();
            assert!((p - expected).abs() < 1e-15);
            assert!(p > 0.0);
        }
    }

    #[test]
    fn factorization_depends_on_basis() {
        let k = k();
        let m =
            modified_like_probability(Basis::Mass, 1.0, 1.0, 1.0, ZetaRange::Physical, &k).unwrap();
        let s =
            modified_like_probability(Basis::Strangeness, 1.0, 1.0, 1.0, ZetaRange::Physical, &k)
                .unwrap();
        assert!((m - s).abs() > 1e-3);
    }

    #[test]
    fn asymmetry_special_values() {
        let k = k();
        for z in [0.0, 0.13, 0.6, 1.0] {
            let a = modified_asymmetry(Basis::Mass, 1.3, 1.3, z, ZetaRange::Physical, &k).unwrap();
            assert!((a - (1.0 - z)).abs() < 1e-15);
        }
        for (tl, tr) in [(0.3, 2.0), (1.0, 1.0), (4.0, 0.5)] {
            let s = modified_asymmetry(Basis::Strangeness, tl, tr, 0.0, ZetaRange::Physical, &k)
                .unwrap();
            assert!((s - asymmetry_qm(tl - tr, &k)).abs() < 1e-15);
            let m = modified_asymmetry(Basis::Mass, tl, tr, 1.0, ZetaRange::Physical, &k).unwrap();
            assert_eq!(m, 0.0);
        }
    }

    #[test]
    fn zeta_range_checks() {
        let k = k();
        assert_eq!(
            modified_asymmetry(Basis::Mass, 1.0, 1.0, 1.2, ZetaRange::Physical, &k),
            Err(KaonError::ZetaOutOfRange(1.2))
        );
        assert!(modified_asymmetry(Basis::Mass, 1.0, 1.0, 1.2, ZetaRange::Extended, &k).is_ok());
        assert!(
            modified_like_probability(Basis::Mass, -1.0, 1.0, 0.2, ZetaRange::Physical, &k)
                .is_err()
        );
    }

    #[test]
    fn fit_cplear_mass_basis() {
        let pts = cplear(0.68, 2.37);
        let r = fit_zeta(&pts, Basis::Mass, FitMode::CorrectedTheoryScaling, &k()).unwrap();
        // closed form: u = sum(T d / s^2) / sum(T^2 / s^2)
        let num = 0.93 * 0.81 / 0.17f64.powi(2) + 0.56 * 0.48 / 0.12f64.powi(2);
        let den = 0.93f64.powi(2) / 0.17f64.powi(2) + 0.56f64.powi(2) / 0.12f64.powi(2);
        let expected = 1.0 - num / den;
        assert!((r.zeta_hat - expected).abs() < 1e-8);
        assert!((r.linear_estimate.unwrap() - expected).abs() < 1e-14);
        assert!((r.zeta_hat - 0.135).abs() < 1e-3);
        let sigma = 1.0 / den.sqrt();
        // the lower crossing lies below zero
        assert!(r.lower_clipped && !r.upper_clipped);
        assert_eq!(r.sigma_minus, r.zeta_hat);
        assert!((r.sigma_plus - sigma).abs() < 1e-6);
        assert_eq!(r.ndf, 1);
    }

    #[test]
    fn fit_exact_point() {
        let pts = vec![AsymmetryPoint {
            label: "x".into(),
            t_l: 1.0,
            t_r: 1.0,
            measured: 0.9,
            sigma: 0.1,
            corrected_theory: Some(0.9),
        }];
        let r = fit_zeta(&pts, Basis::Mass, FitMode::CorrectedTheoryScaling, &k()).unwrap();
        assert!(r.zeta_hat.abs() < 1e-9);
        assert!(r.chi2_min < 1e-15);
        assert!(r.lower_clipped);
    }

    #[test]
    fn fit_errors() {
        let k = k();
        assert_eq!(
            fit_zeta(&[], Basis::Mass, FitMode::RawModel, &k),
            Err(KaonError::NoData)
        );
        let mut pts = cplear(1.0, 3.0);
        pts[1].sigma = 0.0;
        assert!(matches!(
            fit_zeta(&pts, Basis::Mass, FitMode::RawModel, &k),
            Err(KaonError::InvalidData(_))
        ));
        let mut pts = cplear(1.0, 3.0);
        pts[0].corrected_theory = None;
        assert!(matches!(
            fit_zeta(&pts, Basis::Mass, FitMode::CorrectedTheoryScaling, &k),
            Err(KaonError::InvalidData(_))
        ));
        assert!(fit_zeta(&pts, Basis::Mass, FitMode::RawModel, &k).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let text = "label,t_l,t_r,measured,sigma,corrected_theory\n\
                    # comment\n\
                    C(0),0.68,0.68,0.81,0.17,0.93\n\
                    C(5),0.68,2.37,0.48,0.12,\n";
        let pts = read_points_csv(text.as_bytes()).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].corrected_theory, Some(0.93));
        assert_eq!(pts[1].corrected_theory, None);
        assert_eq!(pts[1].t_r, 2.37);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            read_points_csv("a,b\n1,2\n".as_bytes()),
            Err(KaonError::Parse(_))
        ));
        let bad = "label,t_l,t_r,measured,sigma,corrected_theory\nx,1,1,abc,0.1,\n";
        assert!(matches!(
            read_points_csv(bad.as_bytes()),
            Err(KaonError::Parse(_))
        ));
        let neg = "label,t_l,t_r,measured,sigma,corrected_theory\nx,1,1,0.5,-0.1,\n";
        assert!(matches!(
            read_points_csv(neg.as_bytes()),
            Err(KaonError::InvalidData(_))
        ));
        let empty = "label,t_l,t_r,measured,sigma,corrected_theory\n";
        assert!(read_points_csv(empty.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn golden_section_and_bisect() {
        let x = golden_section_min(|z| (z - 0.42).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.42).abs() < 1e-9);
        let r = bisect(|z| z * z - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }
}
