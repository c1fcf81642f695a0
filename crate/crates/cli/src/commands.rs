use std::path::Path;

use kaonlab::chsh::CHSH_BOUND;
use kaonlab::wigner::{THRESHOLD_TOL, VERDICT_TOL};
use kaonlab::{
    fit_zeta, h_correction, joint_outcome_table, maximize_s, modified_asymmetry, named_state,
    read_points_csv, region_scan, two_times_boundary, violation_threshold, wigner_equal_times,
    wigner_t0, wigner_two_times, zeta_lower_bound, AsymmetryPoint, Basis, Bounds, FitMode,
    MaximizeOptions, NamedState, SFunction, WignerEvaluation, ZetaBound, ZetaRange,
};
use serde::Serialize;

use crate::args::{BasisArg, Command, FitModeArg, SystemArg, WignerCommand};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Report};

pub const BUNDLED_CPLEAR: &str = include_str!("../data/cplear.csv");

const DEFAULT_REGION_STEP: f64 = 0.05;

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Constants => Ok(constants(cfg)),
        Command::AsymmetryScan {
            dt_max,
            steps,
            zeta,
            basis,
            t_l,
        } => asymmetry_scan(cfg, *dt_max, *steps, zeta, *basis, *t_l),
        Command::ChshMax {
            system,
            bounds,
            grid_steps,
            refine_iters,
            seeds,
        } => {
            let mut opts = MaximizeOptions::default();
            if let Some(s) = grid_steps.or(cfg.grid.steps) {
                opts.grid_steps = s;
            }
            if let Some(r) = refine_iters.or(cfg.grid.refine_iters) {
                opts.refine_iters = r;
            }
            if let Some(s) = seeds.or(cfg.grid.seeds) {
                opts.seeds = s;
            }
            chsh_max(cfg, *system, bounds.as_deref(), &opts)
        }
        Command::FitZeta { data, basis, mode } => fit(cfg, data.as_deref(), *basis, *mode),
        Command::Wigner { scenario } => wigner(cfg, scenario),
        Command::Probe {
            left,
            t_l,
            right,
            t_r,
        } => probe(cfg, *left, *t_l, *right, *t_r),
    }
}

fn basis(b: BasisArg) -> Basis {
    match b {
        BasisArg::Mass => Basis::Mass,
        BasisArg::Strangeness => Basis::Strangeness,
    }
}

fn kv_report<T: Serialize>(json: &T, rows: Vec<(&str, Cell)>) -> Report {
    let mut r = Report::new(&["quantity", "value"], json);
    for (k, v) in rows {
        r.row(vec![k.into(), v]);
    }
    r
}

#[derive(Serialize)]
struct ConstantsReport {
    tau_s_seconds: f64,
    tau_l_seconds: f64,
    delta_m_per_second: f64,
    epsilon_abs: f64,
    epsilon_arg_deg: f64,
    epsilon_re: f64,
    epsilon_im: f64,
    gamma_s: f64,
    gamma_l: f64,
    gamma: f64,
    delta_gamma: f64,
    delta_m: f64,
    x: f64,
    tau_l_over_tau_s: f64,
    decay: kaonlab::DecayMode,
}

fn constants(cfg: &RunConfig) -> Report {
    let k = &cfg.constants;
    let eps = k.epsilon();
    let rep = ConstantsReport {
        tau_s_seconds: k.tau_s_seconds(),
        tau_l_seconds: k.tau_l_seconds(),
        delta_m_per_second: k.delta_m_per_second(),
        epsilon_abs: eps.norm(),
        epsilon_arg_deg: eps.arg().to_degrees(),
        epsilon_re: eps.re,
        epsilon_im: eps.im,
        gamma_s: k.gamma_s(),
        gamma_l: k.gamma_l(),
        gamma: k.gamma(),
        delta_gamma: k.delta_gamma(),
        delta_m: k.delta_m(),
        x: k.x(),
        tau_l_over_tau_s: k.tau_l_seconds() / k.tau_s_seconds(),
        decay: k.decay_mode(),
    };
    let mut r = Report::new(&["quantity", "value", "unit"], &rep);
    let rows: [(&str, f64, &str); 14] = [
        ("tau_S", rep.tau_s_seconds, "s"),
        ("tau_L", rep.tau_l_seconds, "s"),
        ("delta_m", rep.delta_m_per_second, "hbar/s"),
        ("|epsilon|", rep.epsilon_abs, ""),
        ("arg(epsilon)", rep.epsilon_arg_deg, "deg"),
        ("Re epsilon", rep.epsilon_re, ""),
        ("Im epsilon", rep.epsilon_im, ""),
        ("gamma_S", rep.gamma_s, "1/tau_S"),
        ("gamma_L", rep.gamma_l, "1/tau_S"),
        ("gamma", rep.gamma, "1/tau_S"),
        ("delta_gamma", rep.delta_gamma, "1/tau_S"),
        ("delta_m", rep.delta_m, "1/tau_S"),
        ("x = 2 delta_m / gamma_S", rep.x, ""),
        ("tau_L / tau_S", rep.tau_l_over_tau_s, ""),
    ];
    for (name, v, unit) in rows {
        r.row(vec![name.into(), v.into(), unit.into()]);
    }
    r.row(vec![
        "decay".into(),
        format!("{:?}", rep.decay).to_lowercase().into(),
        "".into(),
    ]);
    if eps.norm() == 0.0 {
        r.note("epsilon = 0: K_S coincides with K1 and K_L with K2");
    }
    r
}

#[derive(Serialize)]
struct ScanReport {
    basis: Basis,
    t_l: f64,
    zeta: Vec<f64>,
    dt: Vec<f64>,
    asymmetry: Vec<Vec<f64>>,
}

fn asymmetry_scan(
    cfg: &RunConfig,
    dt_max: f64,
    steps: usize,
    zetas: &[f64],
    b: BasisArg,
    t_l: f64,
) -> Result<Report, CliError> {
    if !(dt_max > 0.0 && dt_max.is_finite()) {
        return Err(invalid(format!("dt-max must be positive, got {dt_max}")));
    }
    if steps < 2 {
        return Err(invalid(format!("steps must be at least 2, got {steps}")));
    }
    if zetas.is_empty() {
        return Err(invalid("need at least one zeta".into()));
    }
    let b = basis(b);
    let k = cfg.constants.without_cp_violation();
    let dts: Vec<f64> = (0..steps)
        .map(|i| dt_max * i as f64 / (steps - 1) as f64)
        .collect();
    let mut table = Vec::with_capacity(steps);
    for &dt in &dts {
        let row = zetas
            .iter()
            .map(|&z| modified_asymmetry(b, t_l, t_l + dt, z, ZetaRange::Physical, &k))
            .collect::<Result<Vec<f64>, _>>()?;
        table.push(row);
    }
    let rep = ScanReport {
        basis: b,
        t_l,
        zeta: zetas.to_vec(),
        dt: dts.clone(),
        asymmetry: table.clone(),
    };
    let names: Vec<String> = zetas.iter().map(|z| format!("A(zeta={z})")).collect();
    let mut columns = vec!["dt"];
    columns.extend(names.iter().map(String::as_str));
    let mut r = Report::new(&columns, &rep);
    for (dt, row) in dts.iter().zip(table) {
        let mut cells = vec![Cell::Num(*dt)];
        cells.extend(row.into_iter().map(Cell::Num));
        r.row(cells);
    }
    Ok(r)
}

fn invalid(msg: String) -> CliError {
    CliError::Kaon(kaonlab::KaonError::InvalidParameter(msg))
}

fn parse_bounds(text: &str) -> Result<Bounds, CliError> {
    let ranges = text
        .split(',')
        .map(|part| {
            let part = part.trim();
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad bound '{part}'")))
            };
            match part.split_once(':') {
                Some((lo, hi)) => Ok((parse(lo)?, parse(hi)?)),
                None => {
                    let v = parse(part)?;
                    Ok((v, v))
                }
            }
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Bounds::new(ranges)?)
}

#[derive(Serialize)]
struct ChshReport {
    system: SFunction,
    parameters: Vec<&'static str>,
    bounds: Bounds,
    bound: f64,
    violated: bool,
    report: kaonlab::MaximizationReport,
}

fn chsh_max(
    cfg: &RunConfig,
    system: SystemArg,
    bounds: Option<&str>,
    opts: &MaximizeOptions,
) -> Result<Report, CliError> {
    let (function, names): (SFunction, Vec<&'static str>) = match system {
        SystemArg::Photon => (SFunction::Photon, vec!["phi_ab", "phi_ac", "phi_db"]),
        SystemArg::Kaon => (
            SFunction::KaonStrangeness,
            vec!["t_a", "phi_ab", "phi_ac", "phi_db"],
        ),
        SystemArg::Generalized => (
            SFunction::GeneralizedRestricted,
            vec!["t_a", "t_b", "t_c", "t_d"],
        ),
    };
    let bounds = match bounds {
        Some(s) => parse_bounds(s)?,
        None => function.default_bounds(),
    };
    let report = maximize_s(function, &bounds, opts, &cfg.constants)?;
    let bound = function.bound();
    let violated = report.best_value > bound + VERDICT_TOL;
    let mut r = Report::new(
        &["quantity", "value"],
        &ChshReport {
            system: function,
            parameters: names.clone(),
            bounds: bounds.clone(),
            bound,
            violated,
            report: report.clone(),
        },
    );
    r.row(vec!["max S".into(), report.best_value.into()]);
    for (n, v) in names.iter().zip(&report.argmax) {
        r.row(vec![(*n).into(), (*v).into()]);
    }
    r.row(vec![
        "best grid value".into(),
        report.best_grid_value.into(),
    ]);
    r.row(vec!["grid steps".into(), report.grid_steps.into()]);
    r.row(vec!["evaluations".into(), report.evaluations.into()]);
    r.row(vec!["bound".into(), bound.into()]);
    r.row(vec!["violated".into(), violated.into()]);
    if violated {
        r.note(format!("VIOLATION (bound {bound})"));
    } else {
        r.note(format!("NO VIOLATION (bound {bound})"));
    }
    if function == SFunction::Photon && bound == CHSH_BOUND {
        r.note(format!(
            "quantum maximum 2 sqrt 2 = {}",
            2.0 * std::f64::consts::SQRT_2
        ));
    }
    Ok(r)
}

/// Width of the interval above which the fit is reported as weak.
const WIDE_INTERVAL: f64 = 0.4;

fn fit(
    cfg: &RunConfig,
    data: Option<&Path>,
    b: BasisArg,
    mode: FitModeArg,
) -> Result<Report, CliError> {
    let points: Vec<AsymmetryPoint> = match data {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            read_points_csv(file)?
        }
        None => read_points_csv(BUNDLED_CPLEAR.as_bytes())?,
    };
    let mode = match mode {
        FitModeArg::Scaled => FitMode::CorrectedTheoryScaling,
        FitModeArg::Raw => FitMode::RawModel,
    };
    let res = fit_zeta(
        &points,
        basis(b),
        mode,
        &cfg.constants.without_cp_violation(),
    )?;
    let mut rows = vec![
        ("zeta_hat", Cell::Num(res.zeta_hat)),
        ("sigma_minus", Cell::Num(res.sigma_minus)),
        ("sigma_plus", Cell::Num(res.sigma_plus)),
        ("lower", Cell::Num(res.lower())),
        ("upper", Cell::Num(res.upper())),
        ("chi2_min", Cell::Num(res.chi2_min)),
        ("ndf", Cell::Int(res.ndf)),
        ("points", Cell::Int(points.len())),
    ];
    if let Some(lin) = res.linear_estimate {
        rows.push(("linear_estimate", Cell::Num(lin)));
    }
    let mut r = kv_report(&res, rows);
    r.note(format!(
        "zeta = {:.3} +{:.3} -{:.3} (delta chi2 = 1), {:?} basis",
        res.zeta_hat, res.sigma_plus, res.sigma_minus, res.basis
    ));
    if res.lower_clipped {
        r.note("lower end of the interval clipped at zeta = 0");
    }
    if res.upper_clipped {
        r.note("upper end of the interval clipped at the search limit");
    }
    if res.upper() - res.lower() > WIDE_INTERVAL {
        r.note(format!(
            "warning: wide interval [{:.3}, {:.3}]; the data constrain zeta weakly in this basis",
            res.lower(),
            res.upper()
        ));
    }
    Ok(r)
}

fn wigner_report(ev: &WignerEvaluation) -> Report {
    let mut rows = vec![
        ("lhs", Cell::Num(ev.lhs)),
        ("rhs", Cell::Num(ev.rhs)),
        ("lhs - rhs", Cell::Num(ev.margin())),
        ("violated", Cell::Bool(ev.violated)),
    ];
    if let Some(h) = ev.h {
        rows.push(("h", Cell::Num(h)));
    }
    if let Some(v) = ev.epsilon_violated {
        rows.push(("Re eps > |eps|^2", Cell::Bool(v)));
    }
    for (name, t) in ["t_a", "t_b", "t_c", "t_d"].into_iter().zip(ev.times) {
        rows.push((name, Cell::Num(t)));
    }
    let mut r = kv_report(ev, rows);
    r.note(if ev.violated {
        "violated"
    } else {
        "not violated"
    });
    r
}

#[derive(Serialize)]
struct ThresholdReport {
    threshold: f64,
    tol: f64,
}

#[derive(Serialize)]
struct BoundaryReport {
    t_a: f64,
    t_b_boundary: f64,
}

fn wigner(cfg: &RunConfig, scenario: &WignerCommand) -> Result<Report, CliError> {
    let k = &cfg.constants;
    match scenario {
        WignerCommand::T0 => Ok(wigner_report(&wigner_t0(k))),
        WignerCommand::EqualTimes { t } => Ok(wigner_report(&wigner_equal_times(*t, k)?)),
        WignerCommand::TwoTimes { t_a, t_b } => {
            Ok(wigner_report(&wigner_two_times(*t_a, *t_b, k)?))
        }
        WignerCommand::Threshold { tol } => {
            let t = violation_threshold(k, *tol)?;
            let mut r = kv_report(
                &ThresholdReport {
                    threshold: t,
                    tol: *tol,
                },
                vec![("threshold", t.into()), ("tol", (*tol).into())],
            );
            r.note(format!(
                "equal-time inequality violated for t < {t:.4e} tau_S (h(t) = {:.3e} there)",
                h_correction(t, k)?
            ));
            Ok(r)
        }
        WignerCommand::ZetaBound => {
            let bound = zeta_lower_bound(k);
            let mut r = match bound {
                ZetaBound::Bound(z) => kv_report(&bound, vec![("zeta_min", z.into())]),
                ZetaBound::Vacuous => kv_report(&bound, vec![("zeta_min", "vacuous".into())]),
            };
            r.note(match bound {
                ZetaBound::Bound(z) => format!("zeta >= {z:.4}"),
                ZetaBound::Vacuous => "Re eps <= |eps|^2: no constraint on zeta".into(),
            });
            Ok(r)
        }
        WignerCommand::RegionScan { t_max, step } => {
            let step = step.or(cfg.grid.region_step).unwrap_or(DEFAULT_REGION_STEP);
            let rows = region_scan(*t_max, step, k)?;
            let mut r = Report::new(&["t_a", "t_b", "lhs", "rhs", "violated"], &rows);
            for row in &rows {
                r.row(vec![
                    row.t_a.into(),
                    row.t_b.into(),
                    row.lhs.into(),
                    row.rhs.into(),
                    row.violated.into(),
                ]);
            }
            Ok(r)
        }
        WignerCommand::Boundary { t_a, t_b_max } => {
            let step = cfg.grid.region_step.unwrap_or(DEFAULT_REGION_STEP);
            let b = two_times_boundary(*t_a, *t_b_max, step, THRESHOLD_TOL, k)?;
            let mut r = kv_report(
                &BoundaryReport {
                    t_a: *t_a,
                    t_b_boundary: b,
                },
                vec![("t_a", (*t_a).into()), ("t_b boundary", b.into())],
            );
            r.note(format!("violated for t_b up to {b:.4} tau_S"));
            Ok(r)
        }
    }
}

fn probe(
    cfg: &RunConfig,
    left: NamedState,
    t_l: f64,
    right: NamedState,
    t_r: f64,
) -> Result<Report, CliError> {
    let k = &cfg.constants;
    let table = joint_outcome_table(&named_state(left, k), t_l, &named_state(right, k), t_r, k)?;
    let mut r = Report::new(&["outcome", "probability"], &table);
    for (name, p) in [
        ("YY", table.p_yy),
        ("YN", table.p_yn),
        ("NY", table.p_ny),
        ("NN", table.p_nn),
        ("total", table.total()),
    ] {
        r.row(vec![name.into(), p.into()]);
    }
    r.note(format!(
        "Y: {left} found at t_l = {t_l} (left), {right} at t_r = {t_r} (right)"
    ));
    Ok(r)
}
