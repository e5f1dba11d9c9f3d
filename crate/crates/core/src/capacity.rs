//! Multicast capacity-optimal transmit covariance.
//!
//! Solves `max_W min_i h_iᴴ W h_i` over the spectrahedron
//! `{W ⪰ 0, tr W = 1}`. For any `p` in the probability simplex,
//! `λ_max(Σ p_i h_i h_iᴴ)` bounds the optimum from above (it is the best
//! rank-one ascent value of the `p`-weighted objective), so every iterate
//! carries a duality-gap certificate.
//!
//! The solver runs projected supergradient ascent first. If that has not
//! met the tolerance it switches to a log-barrier Newton method on the dual
//! problem `min_{p ∈ Δ} λ_max(Σ p_i h_i h_iᴴ)`, whose iterates yield both a
//! feasible `W` and a feasible `p`. Eigenvalues that are negligible relative
//! to the largest one are removed from the result when the certificate
//! survives, so the rank of `W` is well defined.

use crate::error::{Error, Result};
use crate::linalg::{
    from_eigen, hermitian_eigen, hermitian_part, hermitian_residual, lambda_max, outer,
    project_simplex, quad_form, real_trace, CMatrix,
};
use crate::sampling::{psd_sqrt, ChannelSet, PsdRoot};
use crate::Complex64;
use nalgebra::{DMatrix, DVector};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Hermitian PSD transmit covariance with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: CMatrix,
}

impl CovarianceMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        let residual = hermitian_residual(&entries);
        if residual > 1e-12 {
            return Err(Error::NotHermitian { residual });
        }
        let (values, _) = hermitian_eigen(&entries);
        if let Some(&min) = values.last() {
            if min < -1e-10 {
                return Err(Error::InvalidParams(format!(
                    "covariance has negative eigenvalue {min:e}"
                )));
            }
        }
        let trace = real_trace(&entries);
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParams(format!("covariance trace must be 1, got {trace}")));
        }
        Ok(CovarianceMatrix { entries })
    }

    /// Scales a Hermitian PSD matrix to unit trace.
    pub fn normalized(entries: CMatrix) -> Result<Self> {
        let t = real_trace(&entries);
        if !(t > 0.0) {
            return Err(Error::InvalidParams("matrix has nonpositive trace".into()));
        }
        Self::new(hermitian_part(&entries.unscale(t)))
    }

    pub fn isotropic(n: usize) -> Self {
        CovarianceMatrix { entries: CMatrix::identity(n, n).scale(1.0 / n as f64) }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        real_trace(&self.entries)
    }

    pub fn sqrt(&self) -> Result<PsdRoot> {
        psd_sqrt(&self.entries)
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.sqrt()?.rank)
    }

    /// Eigenvalues in decreasing order with matching eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.entries)
    }
}

/// Per-user gains `ρ_i = h_iᴴ W h_i` and their minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoValues {
    pub rho: Vec<f64>,
    pub rho_min: f64,
}

pub fn rho_values(w: &CovarianceMatrix, ch: &ChannelSet) -> Result<RhoValues> {
    if w.dim() != ch.n() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: ch.n() });
    }
    // Quadratic forms of a PSD matrix are >= 0 up to rounding; clip.
    let rho: Vec<f64> = ch.channels().iter().map(|h| quad_form(w.entries(), h).max(0.0)).collect();
    let rho_min = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(RhoValues { rho, rho_min })
}

#[derive(Debug, Clone)]
pub struct McSolution {
    /// Best feasible iterate found.
    pub covariance: CovarianceMatrix,
    /// `min_i h_iᴴ W h_i` at `covariance`.
    pub objective: f64,
    /// Best upper bound `λ_max(Σ p_i h_i h_iᴴ)` found.
    pub dual_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl McSolution {
    pub fn gap(&self) -> f64 {
        self.dual_bound - self.objective
    }

    /// `Ok` only when the certificate met the tolerance.
    pub fn into_result(self) -> Result<McSolution> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                gap: self.gap(),
                objective: self.objective,
            })
        }
    }
}

struct Problem {
    outers: Vec<CMatrix>,
    channels: Vec<crate::linalg::CVector>,
    scale: f64,
}

impl Problem {
    fn gains(&self, w: &CMatrix) -> Vec<f64> {
        self.channels.iter().map(|h| quad_form(w, h)).collect()
    }

    fn weighted_outer(&self, p: &[f64]) -> CMatrix {
        let n = self.outers[0].nrows();
        self.outers
            .iter()
            .zip(p)
            .fold(CMatrix::zeros(n, n), |acc, (h, &pi)| acc + h.scale(pi))
    }

    fn dual_bound(&self, p: &[f64]) -> f64 {
        lambda_max(&self.weighted_outer(p))
    }
}

fn project_spectrahedron(y: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(y);
    let projected = project_simplex(&values, 1.0);
    from_eigen(&projected, &vectors)
}

struct Tracker {
    best_w: CMatrix,
    best_obj: f64,
    best_dual: f64,
    /// Best point from the eigenspace recovery, with its objective.
    recovered: Option<(CMatrix, f64)>,
    iterations: usize,
}

impl Tracker {
    fn observe(&mut self, problem: &Problem, w: &CMatrix, a: &[f64], p: &[f64]) {
        let obj = a.iter().cloned().fold(f64::INFINITY, f64::min);
        if obj > self.best_obj {
            self.best_obj = obj;
            self.best_w = w.clone();
        }
        let ub = problem.dual_bound(p);
        if ub < self.best_dual {
            self.best_dual = ub;
        }
    }

    fn done(&self, tol: f64) -> bool {
        self.best_dual - self.best_obj <= tol
    }

    fn recovered_done(&self, tol: f64) -> bool {
        self.recovered.as_ref().is_some_and(|(_, obj)| self.best_dual - obj <= tol)
    }
}

/// Weights that average the ascent directions of all users within `tie` of
/// the minimum.
fn tie_weights(a: &[f64], tie: f64) -> Vec<f64> {
    let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let active: Vec<bool> = a.iter().map(|&x| x <= amin + tie).collect();
    let count = active.iter().filter(|&&b| b).count() as f64;
    active.iter().map(|&b| if b { 1.0 / count } else { 0.0 }).collect()
}

/// Projected supergradient ascent with step `c/√k` (Polyak step when the
/// dual bound is informative), averaging the directions of tied users.
fn supergradient_phase(problem: &Problem, w0: CMatrix, iters: usize, tol: f64, t: &mut Tracker) -> CMatrix {
    let mut w = w0;
    let c = 1.0 / problem.scale;
    for k in 1..=iters {
        let a = problem.gains(&w);
        let p = tie_weights(&a, 1e-9 * problem.scale);
        t.observe(problem, &w, &a, &p);
        t.iterations += 1;
        if t.done(tol) {
            break;
        }
        let g = problem.weighted_outer(&p);
        let gnorm2 = g.norm_squared();
        let obj = a.iter().cloned().fold(f64::INFINITY, f64::min);
        let polyak = (t.best_dual - obj) / gnorm2;
        let step = polyak.min(c / (k as f64).sqrt());
        w = project_spectrahedron(&(w + g.scale(step)));
    }
    w
}

/// Log-barrier Newton method on the dual `min_{p ∈ Δ} λ_max(Σ p_i h_i h_iᴴ)`,
/// written as `min s` subject to `S = sI − Σ p_i h_i h_iᴴ ≻ 0`, `p > 0`,
/// `Σ p = 1`. Along the central path `W = S⁻¹ / tr S⁻¹` is primal feasible;
/// at large barrier weights that formula loses accuracy, so each stage also
/// recovers a primal point from the top eigenspace of the dual matrix.
fn barrier_phase(problem: &Problem, max_iter: usize, tol: f64, t: &mut Tracker) {
    let m = problem.channels.len();
    let n = problem.outers[0].nrows();
    let nvar = m + 1;
    let mut p = vec![1.0 / m as f64; m];
    let mut s = problem.dual_bound(&p) * 1.1 + 1e-3 * problem.scale;
    let mut weight = 10.0 * (n + m) as f64 / problem.scale;
    let slack = |s: f64, p: &[f64]| CMatrix::identity(n, n).scale(s) - problem.weighted_outer(p);

    while t.iterations < max_iter {
        for _ in 0..60 {
            if t.iterations >= max_iter {
                return;
            }
            t.iterations += 1;
            let Some(chol) = slack(s, &p).cholesky() else { return };
            let sinv = chol.inverse();
            let sinv2 = &sinv * &sinv;
            let u: Vec<_> = problem.channels.iter().map(|h| &sinv * h).collect();
            let mut grad = DVector::<f64>::zeros(nvar);
            let mut kkt = DMatrix::<f64>::zeros(nvar + 1, nvar + 1);
            grad[0] = weight - real_trace(&sinv);
            kkt[(0, 0)] = real_trace(&sinv2);
            for i in 0..m {
                let hi = &problem.channels[i];
                grad[i + 1] = hi.dotc(&u[i]).re - 1.0 / p[i];
                kkt[(0, i + 1)] = -u[i].norm_squared();
                kkt[(i + 1, 0)] = kkt[(0, i + 1)];
                for j in 0..=i {
                    let v = hi.dotc(&u[j]).norm_sqr();
                    kkt[(i + 1, j + 1)] = v;
                    kkt[(j + 1, i + 1)] = v;
                }
                kkt[(i + 1, i + 1)] += 1.0 / (p[i] * p[i]);
                kkt[(nvar, i + 1)] = 1.0;
                kkt[(i + 1, nvar)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(nvar + 1);
            rhs.rows_mut(0, nvar).copy_from(&(-&grad));
            let Some(sol) = kkt.lu().solve(&rhs) else { return };
            let step = sol.rows(0, nvar).into_owned();
            let decrement = (-grad.dot(&step)).max(0.0);
            if decrement / 2.0 < 1e-10 {
                break;
            }
            // damped Newton step, halved until the iterate stays interior
            let mut alpha = if decrement.sqrt() < 0.25 { 1.0 } else { 1.0 / (1.0 + decrement.sqrt()) };
            loop {
                let s_new = s + alpha * step[0];
                let p_new: Vec<f64> = p.iter().enumerate().map(|(i, &x)| x + alpha * step[i + 1]).collect();
                if p_new.iter().all(|&x| x > 0.0) && slack(s_new, &p_new).cholesky().is_some() {
                    s = s_new;
                    p = p_new;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-14 {
                    return;
                }
            }
        }
        if let Some(chol) = slack(s, &p).cholesky() {
            let sinv = chol.inverse();
            let w = sinv.unscale(real_trace(&sinv));
            let a = problem.gains(&w);
            t.observe(problem, &w, &a, &p);
        }
        if let Some(w) = recover_primal(problem, &p) {
            let a = problem.gains(&w);
            t.observe(problem, &w, &a, &p);
            let obj = a.iter().cloned().fold(f64::INFINITY, f64::min);
            if t.recovered.as_ref().is_none_or(|(_, best)| obj > *best) {
                t.recovered = Some((w, obj));
            }
        }
        if t.recovered_done(tol) || (n + m) as f64 / weight < 1e-14 * problem.scale {
            return;
        }
        weight *= 8.0;
    }
}

/// Primal point supported on the top eigenspace of `Σ p_i h_i h_iᴴ`.
///
/// At an optimal pair every user with `p_i > 0` attains the common value
/// `λ_max`, which is a linear system for the reduced covariance. It is solved
/// in the least-squares sense and projected back onto the spectrahedron.
fn recover_primal(problem: &Problem, p: &[f64]) -> Option<CMatrix> {
    let (values, vectors) = hermitian_eigen(&problem.weighted_outer(p));
    let lmax = values[0];
    let k = values.iter().filter(|&&v| v >= lmax * (1.0 - 1e-6)).count();
    let v = vectors.columns(0, k).into_owned();
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    let active: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 1e-4 * pmax).collect();
    // real parameters: diagonal entries, then (re, im) of each upper entry
    let npar = k * k;
    let rows = active.len() + 1;
    let mut a = DMatrix::<f64>::zeros(rows, npar);
    let mut b = DVector::<f64>::zeros(rows);
    for (r, &i) in active.iter().enumerate() {
        let g = v.adjoint() * &problem.channels[i];
        let mut col = 0;
        for j in 0..k {
            a[(r, col)] = g[j].norm_sqr();
            col += 1;
        }
        for j in 0..k {
            for l in j + 1..k {
                let c = g[j].conj() * g[l];
                a[(r, col)] = 2.0 * c.re;
                a[(r, col + 1)] = -2.0 * c.im;
                col += 2;
            }
        }
        b[r] = lmax;
    }
    for j in 0..k {
        a[(rows - 1, j)] = 1.0;
    }
    b[rows - 1] = 1.0;
    let x = a.svd(true, true).solve(&b, 1e-12).ok()?;
    let mut xm = CMatrix::zeros(k, k);
    let mut col = 0;
    for j in 0..k {
        xm[(j, j)] = Complex64::new(x[col], 0.0);
        col += 1;
    }
    for j in 0..k {
        for l in j + 1..k {
            xm[(j, l)] = Complex64::new(x[col], x[col + 1]);
            xm[(l, j)] = xm[(j, l)].conj();
            col += 2;
        }
    }
    let xm = project_spectrahedron(&xm);
    Some(hermitian_part(&(&v * xm * v.adjoint())))
}

/// Drops eigenvalues below `1e−7 λ_max` and renormalizes.
fn clean_rank(w: &CMatrix) -> CMatrix {
    let (mut values, vectors) = hermitian_eigen(w);
    let lmax = values[0];
    for v in values.iter_mut() {
        if *v < 1e-7 * lmax {
            *v = 0.0;
        }
    }
    let total: f64 = values.iter().sum();
    for v in values.iter_mut() {
        *v /= total;
    }
    from_eigen(&values, &vectors)
}

/// Maximizes the worst user's gain over unit-trace PSD covariances.
///
/// Stops once `dual_bound − objective ≤ tol` or after `max_iter` iterations;
/// the returned solution records whether the certificate was met.
pub fn solve_mc_covariance(ch: &ChannelSet, tol: f64, max_iter: usize) -> Result<McSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol must be positive, got {tol}")));
    }
    let n = ch.n();
    let problem = Problem {
        outers: ch.channels().iter().map(outer).collect(),
        channels: ch.channels().to_vec(),
        scale: ch.channels().iter().map(|h| h.norm_squared()).fold(0.0, f64::max),
    };
    // Closed form for a single user: matched beamforming.
    if ch.m() == 1 {
        let h = ch.get(0);
        let w = hermitian_part(&outer(h).unscale(h.norm_squared()));
        let objective = quad_form(&w, h);
        return Ok(McSolution {
            covariance: CovarianceMatrix::new(w)?,
            objective,
            dual_bound: h.norm_squared(),
            iterations: 0,
            converged: true,
        });
    }
    let w0 = CMatrix::identity(n, n).scale(1.0 / n as f64);
    let mut tracker = Tracker {
        best_w: w0.clone(),
        best_obj: f64::NEG_INFINITY,
        best_dual: f64::INFINITY,
        recovered: None,
        iterations: 0,
    };
    supergradient_phase(&problem, w0, (max_iter / 20).min(500), tol, &mut tracker);
    barrier_phase(&problem, max_iter, tol, &mut tracker);
    // Prefer the eigenspace-supported point: its rank is exact.
    let candidate = match &tracker.recovered {
        Some((w, _)) if tracker.recovered_done(tol) => w.clone(),
        _ => tracker.best_w.clone(),
    };
    let mut covariance = CovarianceMatrix::normalized(candidate.clone())?;
    let mut objective = rho_values(&covariance, ch)?.rho_min;
    let cleaned = CovarianceMatrix::normalized(clean_rank(&candidate))?;
    let cleaned_objective = rho_values(&cleaned, ch)?.rho_min;
    if tracker.best_dual - cleaned_objective <= tol || cleaned_objective >= objective {
        covariance = cleaned;
        objective = cleaned_objective;
    }
    Ok(McSolution {
        covariance,
        objective,
        dual_bound: tracker.best_dual,
        iterations: tracker.iterations,
        converged: tracker.best_dual - objective <= tol,
    })
}
