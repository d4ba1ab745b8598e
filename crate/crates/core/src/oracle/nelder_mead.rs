//! Derivative-free local minimisation by the Nelder–Mead simplex method.

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Converged when every vertex lies within this distance (max-norm) of
    /// the best vertex...
    pub x_tol: f64,
    /// ...and the objective spread across the simplex is below this.
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            initial_step: 0.5,
            x_tol: 1e-8,
            f_tol: 1e-15,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
        let mut converged = false;

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diameter = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if diameter <= self.x_tol && spread <= self.f_tol.max(f64::EPSILON * values[0].abs()) {
                converged = true;
                break;
            }

            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = along(1.0);
            let fr = eval(&reflected, &mut evals);
            if fr < values[0] {
                let expanded = along(2.0);
                let fe = eval(&expanded, &mut evals);
                if fe < fr {
                    simplex[n] = expanded;
                    values[n] = fe;
                } else {
                    simplex[n] = reflected;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = reflected;
                values[n] = fr;
                continue;
            }
            let (contracted, fc) = if fr < values[n] {
                let c = along(0.5);
                let fc = eval(&c, &mut evals);
                (c, fc)
            } else {
                let c = along(-0.5);
                let fc = eval(&c, &mut evals);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
                continue;
            }
            // shrink towards the best vertex
            let best = simplex[0].clone();
            for i in 1..=n {
                for (x, b) in simplex[i].iter_mut().zip(&best) {
                    *x = b + 0.5 * (*x - b);
                }
                values[i] = eval(&simplex[i], &mut evals);
            }
        }

        let best = (0..=n)
            .min_by(|&i, &j| values[i].total_cmp(&values[j]))
            .unwrap_or(0);
        Minimum {
            x: simplex[best].clone(),
            f: values[best],
            evals,
            converged,
        }
    }

    /// Repeated restarts from the incumbent with a shrinking simplex, until a
    /// restart no longer improves the value.
    pub fn minimize_polished<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let mut best = self.minimize(&mut f, x0);
        let mut step = self.initial_step;
        let mut evals = best.evals;
        for _ in 0..6 {
            step *= 0.1;
            let stage = NelderMead {
                initial_step: step.max(self.x_tol * 10.0),
                ..*self
            };
            let next = stage.minimize(&mut f, &best.x);
            evals += next.evals;
            let improved = next.f < best.f;
            let gain = best.f - next.f;
            if improved {
                best = Minimum { evals, ..next };
            }
            if !improved || gain <= self.f_tol {
                break;
            }
        }
        best.evals = evals;
        best
    }
}
