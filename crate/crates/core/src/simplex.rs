//! Derivative-free Nelder-Mead minimization on an unconstrained space.

#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Stop once `f(worst) - f(best)` over the simplex drops below this.
    pub ftol: f64,
    pub max_evals: usize,
    /// Edge length of the axis-aligned starting simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            ftol: 1e-8,
            max_evals: 20_000,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    pub fn minimize(&self, mut f: impl FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let dim = x0.len();
        let evals = std::cell::Cell::new(0usize);
        let mut eval = |x: &[f64]| {
            evals.set(evals.get() + 1);
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for k in 0..dim {
            let mut x = x0.to_vec();
            x[k] += self.initial_step;
            let fx = eval(&x);
            simplex.push((x, fx));
        }

        let mut iterations = 0;
        let mut converged = false;
        let mut centroid = vec![0.0; dim];
        let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
            c.iter().zip(w).map(|(ci, wi)| ci + t * (ci - wi)).collect()
        };

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            if worst - best < self.ftol {
                converged = true;
                break;
            }
            if evals.get() >= self.max_evals {
                break;
            }
            iterations += 1;

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (x, _) in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim as f64;
                }
            }
            let worst_x = simplex[dim].0.clone();
            let second = simplex[dim - 1].1;

            let xr = point(&centroid, &worst_x, REFLECT);
            let fr = eval(&xr);
            if fr < best {
                let xe = point(&centroid, &worst_x, EXPAND);
                let fe = eval(&xe);
                simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < second {
                simplex[dim] = (xr, fr);
                continue;
            }
            // contraction, outside if the reflection beat the worst point
            let (xc, fc) = if fr < worst {
                let xc = point(&centroid, &worst_x, CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = point(&centroid, &worst_x, -CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[dim] = (xc, fc);
                continue;
            }
            let x_best = simplex[0].0.clone();
            for (x, fx) in simplex.iter_mut().skip(1) {
                for (xi, bi) in x.iter_mut().zip(&x_best) {
                    *xi = bi + SHRINK * (*xi - bi);
                }
                *fx = eval(x);
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, f) = simplex.swap_remove(0);
        Minimum {
            x,
            f,
            evals: evals.get(),
            iterations,
            converged,
        }
    }
}
