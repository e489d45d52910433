//! Derivative-free multistart maximization (Nelder–Mead local searches).

use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct LocalSearch {
    pub initial_step: f64,
    pub max_evals: usize,
    pub ftol: f64,
}

impl Default for LocalSearch {
    fn default() -> Self {
        Self {
            initial_step: 0.3,
            max_evals: 2000,
            ftol: 1e-12,
        }
    }
}

/// Best point of one local search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub start_index: usize,
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Nelder–Mead maximization of `f` from `x0`.
pub fn nelder_mead_max(
    f: &(impl Fn(&[f64]) -> f64 + ?Sized),
    x0: &[f64],
    opts: &LocalSearch,
) -> (Vec<f64>, f64, usize) {
    let dim = x0.len();
    if dim == 0 {
        return (Vec::new(), f(x0), 1);
    }
    // minimize g = -f
    let g = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), g(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += if x[i].abs() > 1e-8 {
            opts.initial_step * x[i].abs().max(0.1)
        } else {
            opts.initial_step
        };
        let v = g(&x);
        simplex.push((x, v));
    }
    let mut evals = dim + 1;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if (worst - best).abs() <= opts.ftol * best.abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(x, _)| x[i]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = g(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = g(&xe);
            evals += 1;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[dim].1 {
                let x = along(0.5);
                let v = g(&x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = g(&x);
                (x, v)
            };
            evals += 1;
            if fc < simplex[dim].1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = g(x);
                }
                evals += dim;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, -v, evals)
}

/// Runs one local search per start (in parallel) and returns the best,
/// ties broken by start index so the result does not depend on scheduling.
pub fn multistart_max<F>(f: &F, starts: &[Vec<f64>], opts: &LocalSearch) -> Option<SearchOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let outcomes: Vec<SearchOutcome> = starts
        .par_iter()
        .enumerate()
        .map(|(start_index, x0)| {
            let (x, value, evals) = nelder_mead_max(f, x0, opts);
            // one restart around the local optimum
            let (x2, value2, evals2) = nelder_mead_max(f, &x, opts);
            if value2 > value {
                SearchOutcome {
                    start_index,
                    x: x2,
                    value: value2,
                    evals: evals + evals2,
                }
            } else {
                SearchOutcome {
                    start_index,
                    x,
                    value,
                    evals: evals + evals2,
                }
            }
        })
        .collect();
    outcomes
        .into_iter()
        .fold(None, |best: Option<SearchOutcome>, o| match best {
            Some(b) if b.value >= o.value => Some(b),
            _ => Some(o),
        })
}
