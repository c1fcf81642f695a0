//! Deterministic box-constrained maximization: a full grid scan followed by
//! compass (pattern) search from the best grid points.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{KaonError, Result};

/// Closed box `[lo_i, hi_i]` per dimension. `lo == hi` pins a coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    pub ranges: Vec<(f64, f64)>,
}

impl Bounds {
    pub fn new(ranges: Vec<(f64, f64)>) -> Result<Self> {
        if ranges.is_empty() {
            return Err(KaonError::InvalidParameter("empty bounds".into()));
        }
        for &(lo, hi) in &ranges {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(KaonError::InvalidParameter(format!(
                    "empty or non-finite range [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { ranges })
    }

    pub fn point(x: &[f64]) -> Result<Self> {
        Self::new(x.iter().map(|&v| (v, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.ranges) {
            *v = v.clamp(lo, hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaximizeOptions {
    /// Grid points per non-degenerate dimension, endpoints included.
    pub grid_steps: usize,
    /// Maximum compass-search polls per seed.
    pub refine_iters: usize,
    /// Number of best grid points refined.
    pub seeds: usize,
    /// Refinement stops once every step is below this.
    pub step_tol: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            grid_steps: 32,
            refine_iters: 400,
            seeds: 5,
            step_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizationReport {
    pub best_value: f64,
    pub argmax: Vec<f64>,
    /// Largest value seen on the grid (before refinement).
    pub best_grid_value: f64,
    pub grid_steps: usize,
    pub refine_iters: usize,
    pub evaluations: usize,
    /// Refined maximum reached from each seed, best seed first.
    pub seed_values: Vec<f64>,
}

fn grid_axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

/// Maximizes `f` over `bounds`. `f` returns `None` outside its domain.
pub fn maximize<F>(f: F, bounds: &Bounds, opts: &MaximizeOptions) -> Result<MaximizationReport>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    if opts.grid_steps < 8 {
        return Err(KaonError::InvalidParameter(format!(
            "grid_steps must be at least 8, got {}",
            opts.grid_steps
        )));
    }
    if opts.seeds == 0 {
        return Err(KaonError::InvalidParameter("need at least one seed".into()));
    }
    let axes: Vec<Vec<f64>> = bounds
        .ranges
        .iter()
        .map(|&(lo, hi)| grid_axis(lo, hi, opts.grid_steps))
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();

    let point_at = |mut idx: usize| -> Vec<f64> {
        let mut x = vec![0.0; axes.len()];
        for (d, axis) in axes.iter().enumerate().rev() {
            x[d] = axis[idx % axis.len()];
            idx /= axis.len();
        }
        x
    };

    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| {
            f(&point_at(i))
                .filter(|v| !v.is_nan())
                .unwrap_or(f64::NEG_INFINITY)
        })
        .collect();
    let mut evaluations = total;

    let mut order: Vec<usize> = (0..total).filter(|&i| values[i].is_finite()).collect();
    if order.is_empty() {
        return Err(KaonError::InvalidParameter(
            "objective undefined on every grid point".into(),
        ));
    }
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let best_grid_value = values[order[0]];

    let steps0: Vec<f64> = axes
        .iter()
        .zip(&bounds.ranges)
        .map(|(axis, &(lo, hi))| {
            if axis.len() > 1 {
                (hi - lo) / (axis.len() - 1) as f64
            } else {
                0.0
            }
        })
        .collect();

    let mut refined: Vec<(f64, Vec<f64>)> = Vec::new();
    for &seed in order.iter().take(opts.seeds) {
        let (v, x, n) = compass_search(&f, bounds, point_at(seed), values[seed], &steps0, opts);
        evaluations += n;
        refined.push((v, x));
    }

    let seed_values: Vec<f64> = refined.iter().map(|(v, _)| *v).collect();
    let (best_value, argmax) = refined
        .into_iter()
        .fold(None::<(f64, Vec<f64>)>, |acc, (v, x)| match acc {
            Some((bv, bx)) if bv >= v => Some((bv, bx)),
            _ => Some((v, x)),
        })
        .expect("at least one seed");

    Ok(MaximizationReport {
        best_value,
        argmax,
        best_grid_value,
        grid_steps: opts.grid_steps,
        refine_iters: opts.refine_iters,
        evaluations,
        seed_values,
    })
}

fn compass_search<F>(
    f: &F,
    bounds: &Bounds,
    mut x: Vec<f64>,
    mut fx: f64,
    steps0: &[f64],
    opts: &MaximizeOptions,
) -> (f64, Vec<f64>, usize)
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let mut step = steps0.to_vec();
    let mut evals = 0;
    for _ in 0..opts.refine_iters {
        if step.iter().all(|&s| s < opts.step_tol) {
            break;
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for d in 0..x.len() {
            if step[d] == 0.0 {
                continue;
            }
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[d] += dir * step[d];
                bounds.clamp(&mut y);
                if y[d] == x[d] {
                    continue;
                }
                evals += 1;
                if let Some(v) = f(&y).filter(|v| !v.is_nan()) {
                    let improves = v > best.as_ref().map_or(fx, |b| b.0);
                    if improves {
                        best = Some((v, y));
                    }
                }
            }
        }
        match best {
            Some((v, y)) => {
                fx = v;
                x = y;
            }
            None => step.iter_mut().for_each(|s| *s *= 0.5),
        }
    }
    (fx, x, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_smooth_maximum() {
        let b = Bounds::new(vec![(-2.0, 2.0), (-2.0, 2.0)]).unwrap();
        let r = maximize(
            |x| Some(-(x[0] - 0.3137).powi(2) - 2.0 * (x[1] + 0.777).powi(2)),
            &b,
            &MaximizeOptions::default(),
        )
        .unwrap();
        assert!(r.best_value > -1e-14);
        assert!((r.argmax[0] - 0.3137).abs() < 1e-6);
        assert!((r.argmax[1] + 0.777).abs() < 1e-6);
        assert!(r.best_value >= r.best_grid_value);
        assert!(r.evaluations > 32 * 32);
    }

    #[test]
    fn point_domain_returns_point_value() {
        let b = Bounds::point(&[1.5, -0.5]).unwrap();
        let r = maximize(|x| Some(x[0] * x[1]), &b, &MaximizeOptions::default()).unwrap();
        assert_eq!(r.best_value, -0.75);
        assert_eq!(r.argmax, vec![1.5, -0.5]);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn respects_domain_holes() {
        let b = Bounds::new(vec![(0.0, 1.0)]).unwrap();
        let r = maximize(
            |x| if x[0] > 0.5 { None } else { Some(x[0]) },
            &b,
            &MaximizeOptions::default(),
        )
        .unwrap();
        assert!(r.best_value <= 0.5);
        assert!(r.best_value > 0.5 - 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Bounds::new(vec![]).is_err());
        assert!(Bounds::new(vec![(1.0, 0.0)]).is_err());
        assert!(Bounds::new(vec![(0.0, f64::INFINITY)]).is_err());
        let b = Bounds::new(vec![(0.0, 1.0)]).unwrap();
        let opts = MaximizeOptions {
            grid_steps: 4,
            ..Default::default()
        };
        assert!(maximize(|x| Some(x[0]), &b, &opts).is_err());
        assert!(maximize(|_| None, &b, &MaximizeOptions::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let b = Bounds::new(vec![(0.0, 6.0), (0.0, 6.0)]).unwrap();
        let f = |x: &[f64]| Some(x[0].sin() * x[1].cos() + 0.1 * x[0]);
        let a = maximize(f, &b, &MaximizeOptions::default()).unwrap();
        let c = maximize(f, &b, &MaximizeOptions::default()).unwrap();
        assert_eq!(a, c);
    }
}
