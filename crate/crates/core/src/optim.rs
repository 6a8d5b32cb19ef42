//! Derivative-free simplex minimization with restarts.
//!
//! Uses the dimension-adaptive Nelder–Mead coefficients of Gao and Han,
//! which behave noticeably better than the classic ones past a handful of
//! parameters. A run is converged when the best value improved by less than
//! `tolerance` over a full cycle of `n + 1` iterations and the simplex values
//! span less than `tolerance`; the search then restarts around the best
//! vertex and stops once a restart fails to improve by `tolerance`.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub max_evaluations: usize,
    pub tolerance: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evaluations: 20_000,
            tolerance: 1e-9,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

impl NelderMead {
    /// Minimizes `f` starting from `x0`.
    ///
    /// The returned value is never worse than `f(x0)`.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut f = Counted { f, evaluations: 0 };
        let mut best_x = x0.to_vec();
        let mut best = f.eval(x0);
        if n == 0 {
            return Minimum {
                x: best_x,
                value: best,
                evaluations: f.evaluations,
                converged: true,
            };
        }
        loop {
            let before = best;
            let (x, v, local) = self.run(&mut f, &best_x, best);
            if v < best {
                best = v;
                best_x = x;
            }
            let improved = before - best > self.tolerance;
            let done = !local || !improved || f.evaluations >= self.max_evaluations;
            if done {
                return Minimum {
                    x: best_x,
                    value: best,
                    evaluations: f.evaluations,
                    converged: local && !improved,
                };
            }
        }
    }

    /// One simplex descent from `x0`. Returns the best vertex and whether
    /// the local convergence test fired before the budget ran out.
    fn run<F: FnMut(&[f64]) -> f64>(&self, f: &mut Counted<F>, x0: &[f64], f0: f64) -> (Vec<f64>, f64, bool) {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
        // Shrink coefficient degenerates to 0 at n = 1.
        let delta = if n == 1 { 0.5 } else { delta };

        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        vals.push(f0);
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += self.initial_step;
            vals.push(f.eval(&p));
            pts.push(p);
        }

        let mut cycle_start = f64::INFINITY;
        let mut iter = 0usize;
        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            if iter.is_multiple_of(n + 1) {
                let improved = cycle_start - vals[0];
                let spread = vals[n] - vals[0];
                // `improved` is NaN when the best value stayed infinite.
                let stalled = improved.is_nan() || improved <= self.tolerance;
                if iter > 0 && stalled && spread.is_finite() && spread < self.tolerance {
                    return (pts.swap_remove(0), vals[0], true);
                }
                cycle_start = vals[0];
            }
            if f.evaluations >= self.max_evaluations {
                return (pts.swap_remove(0), vals[0], false);
            }
            iter += 1;

            let mut centroid = vec![0.0; n];
            for p in &pts[..n] {
                for (c, x) in centroid.iter_mut().zip(p) {
                    *c += x / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect() };

            let xr = along(alpha);
            let fr = f.eval(&xr);
            if fr < vals[0] {
                let xe = along(alpha * beta);
                let fe = f.eval(&xe);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            let (xc, fc, accept) = if fr < vals[n] {
                let xc = along(alpha * gamma);
                let fc = f.eval(&xc);
                let ok = fc <= fr;
                (xc, fc, ok)
            } else {
                let xc = along(-gamma);
                let fc = f.eval(&xc);
                let ok = fc < vals[n];
                (xc, fc, ok)
            };
            if accept {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            for i in 1..=n {
                let p: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, x)| b + delta * (x - b)).collect();
                vals[i] = f.eval(&p);
                pts[i] = p;
            }
        }
    }
}
