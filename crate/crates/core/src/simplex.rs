//! Derivative-free Nelder-Mead simplex search on an unconstrained real vector.

/// Reflection, expansion, contraction and shrink coefficients.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Stop once every vertex is within this distance (max-norm) of the best one.
    pub diameter_tolerance: f64,
    /// Stop once `f(worst) - f(best)` drops below this.
    pub spread_tolerance: f64,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            diameter_tolerance: 1e-9,
            spread_tolerance: 1e-12,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// A tolerance criterion fired before the iteration cap.
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> LocalMinimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        sanitize(f(x))
    };

    let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    vertices.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        vertices.push(v);
    }
    let mut values: Vec<f64> = vertices.iter().map(|v| eval(v, &mut evaluations)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n.saturating_sub(1)];

        let spread = values[worst] - values[best];
        let diameter = vertices
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&vertices[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if n == 0 || diameter < opts.diameter_tolerance || spread.abs() < opts.spread_tolerance {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&vertices[i]) {
                *c += x / n as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&vertices[worst])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = along(REFLECT);
        let f_reflected = eval(&reflected, &mut evaluations);
        if f_reflected < values[best] {
            let expanded = along(REFLECT * EXPAND);
            let f_expanded = eval(&expanded, &mut evaluations);
            if f_expanded < f_reflected {
                vertices[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                vertices[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            vertices[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        let (contracted, f_contracted) = if f_reflected < values[worst] {
            let x = along(REFLECT * CONTRACT);
            let fx = eval(&x, &mut evaluations);
            (x, fx)
        } else {
            let x = along(-CONTRACT);
            let fx = eval(&x, &mut evaluations);
            (x, fx)
        };
        if f_contracted < values[worst].min(f_reflected) {
            vertices[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        // Shrink toward the best vertex.
        let anchor = vertices[best].clone();
        for i in 0..=n {
            if i == best {
                continue;
            }
            for (x, a) in vertices[i].iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            values[i] = eval(&vertices[i], &mut evaluations);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("simplex is nonempty");
    LocalMinimum {
        x: vertices.swap_remove(best),
        value: values[best],
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let f = |x: &[f64]| {
            (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5 * (x[2] - 0.5).powi(2)
        };
        let r = nelder_mead(f, &[0.0, 0.0, 0.0], &SimplexOptions::default());
        assert!(r.converged);
        assert!(r.value < 1e-12);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let opts = SimplexOptions {
            max_iterations: 5000,
            spread_tolerance: 1e-16,
            ..Default::default()
        };
        let r = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(r.value < 1e-10, "{}", r.value);
    }

    #[test]
    fn respects_iteration_cap() {
        let f = |x: &[f64]| x.iter().map(|v| v.abs()).sum::<f64>();
        let opts = SimplexOptions {
            max_iterations: 5,
            ..Default::default()
        };
        let r = nelder_mead(f, &[3.0; 6], &opts);
        assert_eq!(r.iterations, 5);
        assert!(!r.converged);
    }

    #[test]
    fn constant_objective_stops_immediately() {
        let r = nelder_mead(|_| 2.5, &[0.1, 0.2], &SimplexOptions::default());
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.value, 2.5);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let f = |x: &[f64]| {
            if x[0] > 2.0 {
                f64::NAN
            } else {
                (x[0] - 1.0).powi(2)
            }
        };
        let r = nelder_mead(f, &[0.0], &SimplexOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-5);
    }
}
