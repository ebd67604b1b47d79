//! Derivative-free simplex minimizer (Nelder–Mead with the usual
//! reflection, expansion, contraction and shrink steps).

/// Stopping rules and the size of the initial simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    pub max_iter: usize,
    /// Stop once every vertex lies within this sup-norm distance of the best.
    pub x_tol: f64,
    /// Stop once the worst and best values differ by less than this.
    pub f_tol: f64,
    /// Offset of the initial vertices along each coordinate axis.
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            x_tol: 1e-8,
            f_tol: 1e-12,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `start`. Non-finite values are treated as `+inf`.
pub fn nelder_mead_minimize(mut f: impl FnMut(&[f64]) -> f64, start: &[f64], cfg: &NelderMeadConfig) -> Minimum {
    let n = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += cfg.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut centroid = vec![0.0; n];
    let point = |c: &[f64], worst: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
    };

    loop {
        // Stable sort keeps ties in insertion order, so runs are reproducible.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        trace.push(best);
        let spread = simplex[n].1 - best;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < cfg.x_tol || spread < cfg.f_tol || iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let f_worst = simplex[n].1;
        let f_second = simplex[n - 1].1;

        let xr = point(&centroid, &worst, REFLECT);
        let fr = eval(&xr);
        if fr < best {
            let xe = point(&centroid, &worst, REFLECT * EXPAND);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < f_worst {
            let xc = point(&centroid, &worst, REFLECT * CONTRACT);
            let fc = eval(&xc);
            (xc, fc, fc <= fr)
        } else {
            let xc = point(&centroid, &worst, -CONTRACT);
            let fc = eval(&xc);
            (xc, fc, fc < f_worst)
        };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&x_best) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            *v = eval(x);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        iterations,
        evaluations,
        trace,
    }
}
