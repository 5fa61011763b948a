//! Projected gradient descent with Barzilai-Borwein steps and Armijo
//! backtracking along the projection arc.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgdConfig {
    pub max_iters: usize,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Stop when a full step moves no coordinate by more than this fraction
    /// of the feasible-set scale.
    pub step_tol: f64,
    /// Stop when the accepted decrease is below this fraction of `|f|`.
    pub value_tol: f64,
}

impl Default for PgdConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            step_tol: 1e-10,
            value_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgdOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// False when the iteration cap stopped the solve.
    pub converged: bool,
}

/// Minimizes `f` over the set defined by `project`, starting from a
/// feasible `x0`. `f` returns the value and writes the gradient.
/// `scale` is the size of the feasible set, used for the first step and
/// the step tolerance. Accepted iterates never increase `f`.
pub fn minimize<F, P>(x0: &[f64], scale: f64, mut f: F, project: P, cfg: &PgdConfig) -> PgdOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut fx = f(&x, &mut grad);
    if n == 0 {
        return PgdOutcome {
            x,
            value: fx,
            iterations: 0,
            converged: true,
        };
    }
    let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if gmax == 0.0 {
        return PgdOutcome {
            x,
            value: fx,
            iterations: 0,
            converged: true,
        };
    }
    let mut step = 0.1 * scale / gmax;
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];

    for iter in 1..=cfg.max_iters {
        let mut t = step;
        let mut accepted = None;
        for attempt in 0..=cfg.max_backtracks {
            for i in 0..n {
                trial[i] = x[i] - t * grad[i];
            }
            project(&mut trial);
            let mut moved = 0.0f64;
            let mut slope = 0.0;
            for i in 0..n {
                let d = trial[i] - x[i];
                moved = moved.max(d.abs());
                slope += grad[i] * d;
            }
            if attempt == 0 && moved <= cfg.step_tol * scale {
                return PgdOutcome {
                    x,
                    value: fx,
                    iterations: iter - 1,
                    converged: true,
                };
            }
            if slope >= 0.0 {
                break;
            }
            let ft = f(&trial, &mut trial_grad);
            if ft <= fx + cfg.armijo * slope {
                accepted = Some(ft);
                break;
            }
            t *= cfg.backtrack;
        }
        let Some(ft) = accepted else {
            // No decrease available at machine precision.
            return PgdOutcome {
                x,
                value: fx,
                iterations: iter - 1,
                converged: true,
            };
        };
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = trial[i] - x[i];
            ss += s * s;
            sy += s * (trial_grad[i] - grad[i]);
        }
        let decrease = fx - ft;
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        let previous = fx;
        fx = ft;
        step = if sy > 0.0 { ss / sy } else { 4.0 * t };
        if decrease <= cfg.value_tol * previous.abs().max(fx.abs()) {
            return PgdOutcome {
                x,
                value: fx,
                iterations: iter,
                converged: true,
            };
        }
    }
    PgdOutcome {
        x,
        value: fx,
        iterations: cfg.max_iters,
        converged: false,
    }
}
