//! Quadratic programs over `{x >= 0, E x = f}`.
//!
//! The least-squares objective `1/2 |C x - d|^2` is handled by a primal
//! active-set iteration whose face subproblems are solved exactly through
//! an SVD, taking the minimum-norm face solution when it is degenerate.
//! The minimum-norm objective `1/2 |x|^2` is handled through its dual.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Required KKT residual, relative to `max(1, |C|_F^2)` for least squares.
    pub kkt_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            kkt_tol: 1e-10,
            max_iterations: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Problem<'a> {
    c: &'a DMatrix<f64>,
    d: &'a DVector<f64>,
    e: DMatrix<f64>,
    f: DVector<f64>,
}

/// `V Σ⁺ Uᵀ b`, dropping singular values at or below `1e-13 · σ_max`.
fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DVector::zeros(n);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.max();
    let thresh = 1e-13 * smax;
    let mut x = DVector::zeros(n);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > thresh {
            let coef = u.column(k).dot(b) / s;
            x += vt.row(k).transpose() * coef;
        }
    }
    x
}

/// Orthonormal columns spanning `null(a)`.
fn null_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut sq = DMatrix::zeros(n.max(m), n);
    sq.view_mut((0, 0), (m, n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-13 * smax.max(f64::MIN_POSITIVE))
        .count();
    let rank = if smax == 0.0 { 0 } else { rank };
    DMatrix::from_fn(n, n - rank, |i, k| vt[(rank + k, i)])
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.e.ncols()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.c.transpose() * (self.c * x - self.d)
    }

    /// Minimizer over `{x : supp x ⊆ face, E x = f}` with minimum norm.
    fn face_solution(&self, face: &[usize]) -> DVector<f64> {
        let e_face = self.e.select_columns(face);
        let particular = pinv_solve(&e_face, &self.f);
        let null = null_basis(&e_face);
        let local = if null.ncols() == 0 {
            particular
        } else {
            let c_face = self.c.select_columns(face);
            let rhs = self.d - &c_face * &particular;
            let z = pinv_solve(&(&c_face * &null), &rhs);
            particular + null * z
        };
        let mut x = DVector::zeros(self.n());
        for (k, &i) in face.iter().enumerate() {
            x[i] = local[k];
        }
        x
    }

    /// Dual slack `s = g - Eᵀν` with `ν` fitted on the face.
    fn slack(&self, x: &DVector<f64>, face: &[usize]) -> DVector<f64> {
        let g = self.gradient(x);
        let e_face_t = self.e.select_columns(face).transpose();
        let g_face = DVector::from_iterator(face.len(), face.iter().map(|&i| g[i]));
        let nu = pinv_solve(&e_face_t, &g_face);
        g - self.e.transpose() * nu
    }

    fn solve(&self, x0: DVector<f64>, mut face: Vec<usize>, options: &SolverOptions, tol: f64, report_tol: f64) -> Solution {
        let n = self.n();
        let mut x = x0;
        let mut blocked = vec![false; n];
        let mut iterations = 0;
        let mut kkt = f64::INFINITY;
        let mut converged = false;
        'outer: loop {
            // move to the face optimum, dropping coordinates that hit zero
            loop {
                iterations += 1;
                if iterations > options.max_iterations {
                    break 'outer;
                }
                let z = self.face_solution(&face);
                if face.iter().all(|&i| z[i] > 0.0) {
                    if (&z - &x).amax() > 0.0 {
                        blocked.iter_mut().for_each(|b| *b = false);
                    }
                    x = z;
                    break;
                }
                let mut alpha = 1.0_f64;
                let mut hit = face[0];
                for &i in &face {
                    if z[i] <= 0.0 {
                        let a = x[i] / (x[i] - z[i]);
                        if a < alpha {
                            alpha = a;
                            hit = i;
                        }
                    }
                }
                let step = (&z - &x) * alpha;
                if step.amax() > 0.0 {
                    blocked.iter_mut().for_each(|b| *b = false);
                }
                x += step;
                x[hit] = 0.0;
                let before = face.clone();
                face.retain(|&i| i != hit && !(z[i] <= 0.0 && x[i] <= 1e-15));
                for &i in &before {
                    if !face.contains(&i) {
                        x[i] = 0.0;
                    }
                }
                if face.is_empty() {
                    break 'outer;
                }
            }

            let s = self.slack(&x, &face);
            let on_face = face.iter().map(|&i| s[i].abs()).fold(0.0, f64::max);
            let mut best: Option<(usize, f64)> = None;
            let mut off_face: f64 = 0.0;
            for j in 0..n {
                if face.contains(&j) {
                    continue;
                }
                off_face = off_face.max(-s[j]);
                if !blocked[j] && s[j] < best.map_or(0.0, |b| b.1) {
                    best = Some((j, s[j]));
                }
            }
            kkt = on_face.max(off_face);
            match best {
                Some((j, sj)) if sj < -tol => {
                    face.push(j);
                    face.sort_unstable();
                    // a candidate that is dropped again at once stays out until x moves
                    blocked[j] = true;
                }
                _ => {
                    converged = true;
                    break;
                }
            }
        }
        Solution {
            x: x.iter().copied().collect(),
            kkt_residual: kkt,
            iterations,
            converged: converged && kkt <= report_tol,
        }
    }
}

/// `argmin |A x - b|` over the probability simplex.
pub fn simplex_least_squares(a: &DMatrix<f64>, b: &DVector<f64>, options: &SolverOptions) -> Solution {
    let n = a.ncols();
    let scale = a.norm_squared().max(1.0);
    let start = (0..n)
        .min_by(|&i, &j| {
            let ri = (a.column(i) - b).norm_squared();
            let rj = (a.column(j) - b).norm_squared();
            ri.total_cmp(&rj)
        })
        .unwrap_or(0);
    let mut x0 = DVector::zeros(n);
    if n > 0 {
        x0[start] = 1.0;
    }
    let problem = Problem {
        c: a,
        d: b,
        e: DMatrix::from_element(1, n, 1.0),
        f: DVector::from_element(1, 1.0),
    };
    // Coordinates enter down to round-off level: on ill-conditioned designs a
    // gradient of size kkt_tol can still hide a large error in x.
    problem.solve(x0, vec![start], options, 64.0 * f64::EPSILON * scale, options.kkt_tol * scale)
}

/// Minimum-norm point of `{x >= 0 : E x = f}` for a feasible right-hand side.
///
/// Semismooth Newton on the dual `min_ν 1/2 |(Eᵀν)₊|² - fᵀν`, whose
/// minimizer gives `x = (Eᵀν)₊`; `x0` is any feasible point and seeds `ν`.
/// The reported KKT residual is `|E x - f|_∞`, the other conditions holding
/// by construction.
pub fn min_norm_feasible(e: &DMatrix<f64>, f: &DVector<f64>, x0: &[f64], options: &SolverOptions) -> Solution {
    let m = e.nrows();
    let et = e.transpose();
    let tol = options.kkt_tol * f.amax().max(1.0);
    let dual = |nu: &DVector<f64>| {
        let x = (&et * nu).map(|v| v.max(0.0));
        0.5 * x.norm_squared() - f.dot(nu)
    };
    let mut nu = pinv_solve(&et, &DVector::from_column_slice(x0));
    let mut iterations = 0;
    loop {
        let y = &et * &nu;
        let x = y.map(|v| v.max(0.0));
        let g = e * &x - f;
        let kkt = g.amax();
        if kkt <= tol || iterations >= options.max_iterations {
            return Solution {
                x: x.iter().copied().collect(),
                kkt_residual: kkt,
                iterations,
                converged: kkt <= tol,
            };
        }
        iterations += 1;
        let active: Vec<usize> = (0..y.len()).filter(|&i| y[i] > 0.0).collect();
        let e_active = e.select_columns(&active);
        let mut h = &e_active * e_active.transpose();
        let shift = 1e-12 * (1.0 + h.trace() / m as f64);
        for k in 0..m {
            h[(k, k)] += shift;
        }
        let step = match h.cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -g.clone(),
        };
        let phi = dual(&nu);
        let slope = g.dot(&step);
        let mut t = 1.0;
        for _ in 0..80 {
            if dual(&(&nu + &step * t)) <= phi + 1e-4 * t * slope {
                break;
            }
            t *= 0.5;
        }
        nu += step * t;
    }
}
