//! Box-constrained quasi-Newton minimizer: dense BFGS on the inverse Hessian
//! with projected backtracking line search, central-difference gradients that
//! respect the box, and small symmetric-matrix helpers for the Hessian-based
//! standard errors.

/// One accepted iterate of the optimizer.
#[derive(Debug, Clone)]
pub struct TracePoint {
    pub eval: usize,
    pub x: Vec<f64>,
    pub f: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub n_evals: usize,
    pub n_iters: usize,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Relative objective-change tolerance.
    pub tol: f64,
    /// Relative step for central-difference gradients.
    pub grad_step: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-6,
            grad_step: 1e-5,
        }
    }
}

/// Minimize f over the box [lo, hi] starting from x0 (projected into the box).
/// f may return +inf outside its implicit domain; the line search backs off.
pub fn minimize_boxed(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &MinimizeOptions,
) -> MinimizeResult {
    let p = x0.len();
    assert!(lo.len() == p && hi.len() == p);
    let mut n_evals = 0usize;
    let mut eval = |x: &[f64], n_evals: &mut usize| -> f64 {
        *n_evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut x: Vec<f64> = x0
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(&v, (&l, &h))| v.clamp(l, h))
        .collect();
    let mut fx = eval(&x, &mut n_evals);
    let mut trace = vec![TracePoint {
        eval: n_evals,
        x: x.clone(),
        f: fx,
    }];

    if !fx.is_finite() {
        return MinimizeResult {
            x,
            f: fx,
            n_evals,
            n_iters: 0,
            converged: false,
            trace,
        };
    }

    let mut h_inv = identity(p);
    let mut g = gradient_boxed(&mut eval, &mut n_evals, &x, lo, hi, opts.grad_step);
    let mut converged = false;
    let mut n_iters = 0usize;

    for _ in 0..opts.max_iters {
        n_iters += 1;
        // projected gradient: freeze coordinates pressing against their bound
        let pg = project_gradient(&x, &g, lo, hi);
        let pg_norm = pg.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if pg_norm < 1e-8 {
            converged = true;
            break;
        }

        let mut dir = neg_matvec(&h_inv, &pg);
        if dot(&dir, &pg) >= 0.0 {
            // not a descent direction; restart the curvature model
            h_inv = identity(p);
            dir = pg.iter().map(|v| -v).collect();
        }

        // backtracking Armijo search on the projected path
        let mut alpha = 1.0_f64;
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        for _ in 0..40 {
            let cand: Vec<f64> = x
                .iter()
                .zip(dir.iter())
                .zip(lo.iter().zip(hi))
                .map(|((&xi, &di), (&l, &h))| (xi + alpha * di).clamp(l, h))
                .collect();
            let step: Vec<f64> = cand.iter().zip(&x).map(|(c, xi)| c - xi).collect();
            if step.iter().all(|s| s.abs() < 1e-14) {
                break;
            }
            let fc = eval(&cand, &mut n_evals);
            let slope = dot(&g, &step);
            if fc <= fx + 1e-4 * slope.min(0.0) && fc < f64::INFINITY {
                accepted = Some((cand, fc));
                break;
            }
            alpha *= 0.5;
        }

        let Some((x_new, f_new)) = accepted else {
            // no usable step along this direction
            converged = pg_norm < 1e-5;
            break;
        };

        let g_new = gradient_boxed(&mut eval, &mut n_evals, &x_new, lo, hi, opts.grad_step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm2(&s).sqrt() * norm2(&y).sqrt() {
            bfgs_update(&mut h_inv, &s, &y, sy);
        }

        let f_drop = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(TracePoint {
            eval: n_evals,
            x: x.clone(),
            f: fx,
        });

        if f_drop.abs() < opts.tol * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
    }

    MinimizeResult {
        x,
        f: fx,
        n_evals,
        n_iters,
        converged,
        trace,
    }
}

/// Central-difference gradient that keeps evaluation points inside the box;
/// at an active bound the stencil degrades to one-sided.
pub fn gradient_boxed(
    eval: &mut impl FnMut(&[f64], &mut usize) -> f64,
    n_evals: &mut usize,
    x: &[f64],
    lo: &[f64],
    hi: &[f64],
    rel_step: f64,
) -> Vec<f64> {
    let p = x.len();
    let mut g = vec![0.0; p];
    let mut xp = x.to_vec();
    for i in 0..p {
        let h = rel_step * x[i].abs().max(1.0);
        let up = (x[i] + h).min(hi[i]);
        let dn = (x[i] - h).max(lo[i]);
        if up <= dn {
            g[i] = 0.0;
            continue;
        }
        xp[i] = up;
        let fu = eval(&xp, n_evals);
        xp[i] = dn;
        let fd = eval(&xp, n_evals);
        xp[i] = x[i];
        g[i] = (fu - fd) / (up - dn);
        if !g[i].is_finite() {
            g[i] = 0.0;
        }
    }
    g
}

fn project_gradient(x: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(lo.iter().zip(hi))
        .map(|((&xi, &gi), (&l, &h))| {
            let eps = 1e-10 * (h - l).abs().max(1.0);
            let pushes_out =
                ((xi - l).abs() < eps && gi > 0.0) || ((xi - h).abs() < eps && gi < 0.0);
            if pushes_out {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let p = s.len();
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    let c1 = (sy + yhy) / (sy * sy);
    for i in 0..p {
        for j in 0..p {
            h[i][j] += c1 * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
        }
    }
}

fn identity(p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn neg_matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| -dot(row, v)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

// ---------------------------------------------------------------------------
// Symmetric-matrix helpers for Hessian standard errors
// ---------------------------------------------------------------------------

/// Invert a symmetric positive-definite matrix via Cholesky. None if the
/// factorization fails.
pub fn spd_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let l = cholesky(a)?;
    // invert L in place, then A^{-1} = L^{-T} L^{-1}
    let mut linv = vec![vec![0.0; n]; n];
    for i in 0..n {
        linv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let mut sum = 0.0;
            for k in j..i {
                sum -= l[i][k] * linv[k][j];
            }
            linv[i][j] = sum / l[i][i];
        }
    }
    let mut inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = 0.0;
            for k in i.max(j)..n {
                sum += linv[k][i] * linv[k][j];
            }
            inv[i][j] = sum;
            inv[j][i] = sum;
        }
    }
    Some(inv)
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix by Jacobi eigenvalue
/// rotations, keeping only eigenvalues above a relative floor. Fallback for
/// non-positive-definite Hessians.
pub fn sym_pseudo_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let (mut d, v) = jacobi_eigen(a);
    let max_abs = d.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
    let floor = 1e-12 * max_abs.max(1e-300);
    for x in &mut d {
        *x = if x.abs() > floor { 1.0 / *x } else { 0.0 };
    }
    // V diag(d) V^T
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = 0.0;
            for (k, dk) in d.iter().enumerate() {
                sum += v[i][k] * dk * v[j][k];
            }
            out[i][j] = sum;
            out[j][i] = sum;
        }
    }
    out
}

fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = identity(n);
    for _ in 0..100 {
        // largest off-diagonal element
        let mut off = 0.0;
        let (mut p, mut q) = (0, 1);
        for i in 0..n {
            for j in i + 1..n {
                if m[i][j].abs() > off {
                    off = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off < 1e-14 || n < 2 {
            break;
        }
        let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        for k in 0..n {
            let mkp = m[k][p];
            let mkq = m[k][q];
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
        }
        for k in 0..n {
            let mpk = m[p][k];
            let mqk = m[q][k];
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
        }
        for k in 0..n {
            let vkp = v[k][p];
            let vkq = v[k][q];
            v[k][p] = c * vkp - s * vkq;
            v[k][q] = s * vkp + c * vkq;
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), v)
}
