//! Discretized energy minimization over the capped simplex.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

const NEAR_CELLS: usize = 32;

fn g_corner(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        let u2 = u * u;
        0.5 * u2 * u.abs().ln() - 0.75 * u2
    }
}

/// Mean of log|x−y| over x ∈ [x1,x2], y ∈ [y1,y2], from the closed-form
/// double antiderivative.
pub(crate) fn mean_log_exact(x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    let s = g_corner(x2 - y1) - g_corner(x2 - y2) - g_corner(x1 - y1) + g_corner(x1 - y2);
    s / ((x2 - x1) * (y2 - y1))
}

/// The same mean for well separated cells, expanded in the widths over the
/// distance of the centers.
pub(crate) fn mean_log_far(d: f64, hi: f64, hj: f64) -> f64 {
    let (a2, b2) = (hi * hi, hj * hj);
    let m2 = (a2 + b2) / 12.0;
    let m4 = (a2 * a2 + b2 * b2) / 80.0 + a2 * b2 / 24.0;
    let m6 = (a2 * a2 * a2 + b2 * b2 * b2) / 448.0 + 15.0 * a2 * b2 * (a2 + b2) / 960.0;
    let d2 = d * d;
    d.abs().ln() - m2 / (2.0 * d2) - m4 / (4.0 * d2 * d2) - m6 / (6.0 * d2 * d2 * d2)
}

/// Ā_ij = −mean of log|x−y| over cells i and j.
pub(crate) fn kernel_matrix(edges: &[f64]) -> DMatrix<f64> {
    let m = edges.len() - 1;
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let (x1, x2) = (edges[i], edges[i + 1]);
            let hi = x2 - x1;
            let ci = 0.5 * (x1 + x2);
            (0..m)
                .map(|j| {
                    let (y1, y2) = (edges[j], edges[j + 1]);
                    if i == j {
                        -(hi.ln() - 1.5)
                    } else if i.abs_diff(j) < NEAR_CELLS {
                        -mean_log_exact(x1, x2, y1, y2)
                    } else {
                        -mean_log_far(ci - 0.5 * (y1 + y2), hi, y2 - y1)
                    }
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(m, m, |i, j| rows[i][j])
}

fn matvec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    // Aᵀx reads A column by column, and A is symmetric
    a.tr_mul(&DVector::from_column_slice(x)).data.into()
}

/// Euclidean projection onto {0 ≤ m ≤ cap, Σ m = 1} by bisection on the
/// shift τ in m = clamp(y − τ, 0, cap).
pub fn project_capped_simplex(y: &[f64], cap: &[f64]) -> Vec<f64> {
    let mass = |t: f64| -> f64 { y.iter().zip(cap).map(|(v, u)| (v - t).clamp(0.0, *u)).sum() };
    let lo0 = y.iter().zip(cap).map(|(v, u)| v - u).fold(f64::INFINITY, f64::min);
    let hi0 = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (lo0 - 1.0, hi0 + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let mut m: Vec<f64> = y.iter().zip(cap).map(|(v, u)| (v - t).clamp(0.0, *u)).collect();
    // distribute the residual mass over cells strictly inside their bounds
    let resid = 1.0 - m.iter().sum::<f64>();
    let free: Vec<usize> = (0..m.len()).filter(|&i| m[i] > 0.0 && m[i] < cap[i]).collect();
    if !free.is_empty() {
        let share = resid / free.len() as f64;
        for i in free {
            m[i] = (m[i] + share).clamp(0.0, cap[i]);
        }
    }
    m
}

pub(crate) struct Problem<'a> {
    pub a: &'a DMatrix<f64>,
    pub c: f64,
    pub f: &'a [f64],
    pub cap: &'a [f64],
}

pub(crate) struct Outcome {
    pub m: Vec<f64>,
    pub energy_history: Vec<f64>,
    pub iterations: usize,
    pub kkt: f64,
    pub ell: f64,
    pub polished: bool,
}

impl Problem<'_> {
    fn gradient_from(&self, am: &[f64]) -> Vec<f64> {
        am.iter().zip(self.f).map(|(v, f)| 2.0 * self.c * v + f).collect()
    }

    fn energy_from(&self, m: &[f64], am: &[f64]) -> f64 {
        m.iter()
            .zip(am)
            .zip(self.f)
            .map(|((mi, ai), fi)| mi * (self.c * ai + fi))
            .sum()
    }

    pub fn gradient(&self, m: &[f64]) -> Vec<f64> {
        self.gradient_from(&matvec(self.a, m))
    }

    pub fn energy(&self, m: &[f64]) -> f64 {
        self.energy_from(m, &matvec(self.a, m))
    }

    fn bound_tol(&self, i: usize) -> f64 {
        1e-12 * self.cap[i]
    }

    /// (residual, ℓ): ℓ is the mean gradient over free cells.
    pub fn kkt(&self, m: &[f64], g: &[f64]) -> (f64, f64) {
        let n = m.len();
        let free: Vec<usize> = (0..n)
            .filter(|&i| m[i] > self.bound_tol(i) && m[i] < self.cap[i] - self.bound_tol(i))
            .collect();
        let ell = if free.is_empty() {
            let lo = (0..n)
                .filter(|&i| m[i] >= self.cap[i] - self.bound_tol(i))
                .map(|i| g[i])
                .fold(f64::NEG_INFINITY, f64::max);
            let hi = (0..n)
                .filter(|&i| m[i] <= self.bound_tol(i))
                .map(|i| g[i])
                .fold(f64::INFINITY, f64::min);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo,
                (false, true) => hi,
                _ => 0.0,
            }
        } else {
            free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64
        };
        let mut worst = 0.0f64;
        for i in 0..n {
            let v = if m[i] <= self.bound_tol(i) {
                (ell - g[i]).max(0.0)
            } else if m[i] >= self.cap[i] - self.bound_tol(i) {
                (g[i] - ell).max(0.0)
            } else {
                (g[i] - ell).abs()
            };
            worst = worst.max(v);
        }
        (worst, ell)
    }

    fn lipschitz(&self) -> f64 {
        let n = self.f.len();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut lam = 1.0;
        for _ in 0..30 {
            let w = matvec(self.a, &v);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            lam = norm;
            v = w.iter().map(|x| x / norm).collect();
        }
        2.0 * self.c * lam * 1.05
    }

    /// Monotone FISTA with backtracking and adaptive restart.
    pub fn accelerated(
        &self,
        m0: Vec<f64>,
        max_iter: usize,
        tol: f64,
        history: &mut Vec<f64>,
    ) -> (Vec<f64>, usize) {
        let mut lip = self.lipschitz();
        let mut x = project_capped_simplex(&m0, self.cap);
        let mut ax = matvec(self.a, &x);
        let mut fx = self.energy_from(&x, &ax);
        history.push(fx);
        let mut y = x.clone();
        let mut ay = ax.clone();
        let mut t = 1.0f64;
        let mut iters = 0;
        while iters < max_iter {
            iters += 1;
            let gy = self.gradient_from(&ay);
            let fy = self.energy_from(&y, &ay);
            let (z, az, fz) = loop {
                let step: Vec<f64> = y.iter().zip(&gy).map(|(v, g)| v - g / lip).collect();
                let z = project_capped_simplex(&step, self.cap);
                let az = matvec(self.a, &z);
                let fz = self.energy_from(&z, &az);
                let d: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
                let bound = fy
                    + d.iter().zip(&gy).map(|(a, b)| a * b).sum::<f64>()
                    + 0.5 * lip * d.iter().map(|v| v * v).sum::<f64>();
                if fz <= bound + 1e-14 * bound.abs().max(1.0) {
                    break (z, az, fz);
                }
                lip *= 2.0;
            };
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let (x_prev, ax_prev) = (x.clone(), ax.clone());
            let restart;
            if fz <= fx {
                x = z.clone();
                ax = az.clone();
                fx = fz;
                restart = false;
            } else {
                restart = true;
            }
            history.push(fx);
            if restart {
                y = x.clone();
                ay = ax.clone();
                t = 1.0;
            } else {
                let r1 = t / t_next;
                let r2 = (t - 1.0) / t_next;
                // A is linear, so Ay follows from the same combination
                let comb = |u: &[f64], v: &[f64], w: &[f64]| -> Vec<f64> {
                    (0..u.len())
                        .map(|i| u[i] + r1 * (v[i] - u[i]) + r2 * (u[i] - w[i]))
                        .collect()
                };
                y = comb(&x, &z, &x_prev);
                ay = if iters % 50 == 0 {
                    matvec(self.a, &y)
                } else {
                    comb(&ax, &az, &ax_prev)
                };
                t = t_next;
            }
            if iters % 25 == 0 {
                let g = self.gradient_from(&ax);
                if self.kkt(&x, &g).0 < tol {
                    break;
                }
            }
        }
        (x, iters)
    }

    /// Primal-dual active-set iteration from a feasible start; returns the
    /// exact minimizer of the discrete problem when the active sets settle.
    pub fn active_set(&self, m0: &[f64]) -> Option<Vec<f64>> {
        let n = m0.len();
        let g0 = self.gradient(m0);
        let (_, mut ell) = self.kkt(m0, &g0);
        let mut m = m0.to_vec();
        let mut g = g0;
        let sigma = 1.0 / (2.0 * self.c * self.a[(0, 0)].abs().max(1.0));
        // 0 = lower, 1 = free, 2 = upper
        let mut prev: Vec<u8> = Vec::new();
        for _ in 0..60 {
            let sets: Vec<u8> = (0..n)
                .map(|i| {
                    let yv = m[i] - sigma * (g[i] - ell);
                    if yv <= 0.0 {
                        0
                    } else if yv >= self.cap[i] {
                        2
                    } else {
                        1
                    }
                })
                .collect();
            if sets == prev {
                let feasible = (0..n).all(|i| m[i] >= -1e-15 && m[i] <= self.cap[i] * (1.0 + 1e-12));
                return if feasible {
                    Some(m.iter().zip(self.cap).map(|(v, u)| v.clamp(0.0, *u)).collect())
                } else {
                    None
                };
            }
            let free: Vec<usize> = (0..n).filter(|&i| sets[i] == 1).collect();
            let upper: Vec<usize> = (0..n).filter(|&i| sets[i] == 2).collect();
            let upper_mass: f64 = upper.iter().map(|&i| self.cap[i]).sum();
            let mut next = vec![0.0; n];
            for &i in &upper {
                next[i] = self.cap[i];
            }
            if free.is_empty() {
                return None;
            }
            let nf = free.len();
            let h = DMatrix::from_fn(nf, nf, |r, s| 2.0 * self.c * self.a[(free[r], free[s])]);
            let rhs = DVector::from_fn(nf, |r, _| {
                let i = free[r];
                self.f[i]
                    + upper
                        .iter()
                        .map(|&j| 2.0 * self.c * self.a[(i, j)] * self.cap[j])
                        .sum::<f64>()
            });
            let ones = DVector::from_element(nf, 1.0);
            let (y1, y2) = match h.clone().cholesky() {
                Some(ch) => (ch.solve(&ones), ch.solve(&rhs)),
                None => {
                    let lu = h.lu();
                    (lu.solve(&ones)?, lu.solve(&rhs)?)
                }
            };
            let s1 = y1.sum();
            ell = (1.0 - upper_mass + y2.sum()) / s1;
            for (r, &i) in free.iter().enumerate() {
                next[i] = ell * y1[r] - y2[r];
            }
            m = next;
            g = self.gradient(&m);
            prev = sets;
        }
        None
    }
}

pub(crate) fn minimize(p: &Problem, tol: f64, max_iter: usize) -> Outcome {
    let n = p.f.len();
    let start = vec![1.0 / n as f64; n];
    let mut history = Vec::new();
    let (mut m, mut iters) = p.accelerated(start, 4000.min(max_iter), 1e-6, &mut history);
    let mut polished = false;
    if let Some(exact) = p.active_set(&m) {
        let e_new = p.energy(&exact);
        let last = *history.last().unwrap();
        if e_new <= last + 1e-13 * last.abs().max(1.0) {
            let g = p.gradient(&exact);
            if p.kkt(&exact, &g).0 < p.kkt(&m, &p.gradient(&m)).0 {
                m = exact;
                history.push(e_new.min(last));
                polished = true;
            }
        }
    }
    let mut g = p.gradient(&m);
    let (mut kkt, mut ell) = p.kkt(&m, &g);
    if kkt >= tol && iters < max_iter {
        let (m2, more) = p.accelerated(m.clone(), max_iter - iters, tol, &mut history);
        iters += more;
        m = m2;
        g = p.gradient(&m);
        let r = p.kkt(&m, &g);
        kkt = r.0;
        ell = r.1;
    }
    Outcome {
        m,
        energy_history: history,
        iterations: iters,
        kkt,
        ell,
        polished,
    }
}
