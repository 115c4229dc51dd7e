//! Operator splitting on the homogeneous self-dual embedding
//!
//! ```text
//! [s; 0; κ] = [[0, −Aᵀ, c], [A, 0, −b], [−cᵀ, bᵀ, 0]] · [x; y; τ],
//! x ∈ K, s ∈ K*, τ, κ ≥ 0.
//! ```
//!
//! Each iteration solves one linear system with the fixed matrix `I + Q`
//! (reduced to an `m×m` Cholesky factor), projects onto the cone, and
//! updates the dual iterate.

use super::presolve::{independent_rows, Presolved};
use super::sparse::CsrMatrix;
use super::{devectorize, vectorize, Cone, ConicProgram, ConicSolution, SolverOptions, Status};
use crate::error::{Error, Result};
use crate::qmat::herm_eig;

const CHECK_EVERY: usize = 10;
const INFEASIBILITY_RATIO: f64 = 1e6;

pub fn solve(program: &ConicProgram, opts: &SolverOptions) -> Result<ConicSolution> {
    program.validate()?;
    if !(opts.alpha > 0.0 && opts.alpha < 2.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("solver options {opts:?}")));
    }
    let kept = match independent_rows(&program.a, &program.b) {
        Presolved::Rows(r) => r,
        Presolved::Inconsistent => return Ok(inconsistent(program)),
    };
    let a_red = program.a.select_rows(&kept);
    let b_red: Vec<f64> = kept.iter().map(|&i| program.b[i]).collect();
    let mut work = Workspace::new(program, a_red, b_red, opts);
    let mut sol = work.run();
    // scatter the dual back to the original row indexing
    let mut y = vec![0.0; program.num_rows()];
    for (k, &i) in kept.iter().enumerate() {
        y[i] = sol.y[k];
    }
    sol.y = y;
    Ok(sol)
}

fn inconsistent(p: &ConicProgram) -> ConicSolution {
    ConicSolution {
        x: vec![0.0; p.num_vars()],
        y: vec![0.0; p.num_rows()],
        s: vec![0.0; p.num_vars()],
        primal_obj: f64::INFINITY,
        dual_obj: f64::INFINITY,
        gap: f64::NAN,
        primal_residual: f64::INFINITY,
        dual_residual: f64::NAN,
        status: Status::Infeasible,
        iterations: 0,
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense lower Cholesky factor of `I + Ā Āᵀ`.
struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn of_gram_plus_identity(a: &CsrMatrix) -> Self {
        let n = a.rows();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = a.row_dot(i, j) + if i == j { 1.0 } else { 0.0 };
                g[i * n + j] = v;
            }
        }
        for j in 0..n {
            let mut d = g[j * n + j];
            for k in 0..j {
                d -= g[j * n + k] * g[j * n + k];
            }
            let d = d.sqrt();
            g[j * n + j] = d;
            for i in j + 1..n {
                let mut s = g[i * n + j];
                for k in 0..j {
                    s -= g[i * n + k] * g[j * n + k];
                }
                g[i * n + j] = s / d;
            }
        }
        Self { n, l: g }
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
    }
}

struct Workspace<'p> {
    orig: &'p ConicProgram,
    a_orig: CsrMatrix,
    b_orig: Vec<f64>,
    a: CsrMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    cones: Vec<Cone>,
    /// row scaling, column scaling, and the scalar scalings of b and c
    d: Vec<f64>,
    e: Vec<f64>,
    sb: f64,
    sc: f64,
    chol: Cholesky,
    /// `M⁻¹ h` for `h = [c; −b]`, and `hᵀ M⁻¹ h`
    p: Vec<f64>,
    h_p: f64,
    opts: SolverOptions,
    n: usize,
    m: usize,
}

impl<'p> Workspace<'p> {
    fn new(orig: &'p ConicProgram, a: CsrMatrix, b: Vec<f64>, opts: &SolverOptions) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let (d, e) = equilibrate(&a, &orig.cones);
        let mut a_s = a.clone();
        a_s.scale(&d, &e);
        let mut bs: Vec<f64> = b.iter().zip(&d).map(|(x, s)| x * s).collect();
        let mut cs: Vec<f64> = orig.c.iter().zip(&e).map(|(x, s)| x * s).collect();
        let nb = norm(&bs);
        let nc = norm(&cs);
        let sb = if nb > 1e-12 { 1.0 / nb } else { 1.0 };
        let sc = if nc > 1e-12 { 1.0 / nc } else { 1.0 };
        bs.iter_mut().for_each(|x| *x *= sb);
        cs.iter_mut().for_each(|x| *x *= sc);
        let chol = Cholesky::of_gram_plus_identity(&a_s);
        let mut w = Self {
            orig,
            a_orig: a,
            b_orig: b,
            a: a_s,
            b: bs,
            c: cs,
            cones: orig.cones.clone(),
            d,
            e,
            sb,
            sc,
            chol,
            p: Vec::new(),
            h_p: 0.0,
            opts: *opts,
            n,
            m,
        };
        let mut h = w.c.clone();
        h.extend(w.b.iter().map(|x| -x));
        w.p = w.solve_m(&h);
        w.h_p = dot(&w.c, &w.p[..n]) - dot(&w.b, &w.p[n..]);
        w
    }

    /// Solves `[[I, −Āᵀ], [Ā, I]] w = r`.
    fn solve_m(&self, r: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut rhs = vec![0.0; n];
        self.a.mul_t_vec(&r[n..], &mut rhs);
        for i in 0..n {
            rhs[i] += r[i];
        }
        // (I + ĀᵀĀ)⁻¹ = I − Āᵀ (I + ĀĀᵀ)⁻¹ Ā
        let mut t = vec![0.0; m];
        self.a.mul_vec(&rhs, &mut t);
        self.chol.solve_in_place(&mut t);
        let mut corr = vec![0.0; n];
        self.a.mul_t_vec(&t, &mut corr);
        let wx: Vec<f64> = rhs.iter().zip(&corr).map(|(a, b)| a - b).collect();
        let mut aw = vec![0.0; m];
        self.a.mul_vec(&wx, &mut aw);
        let mut out = wx;
        out.extend(r[n..].iter().zip(&aw).map(|(a, b)| a - b));
        out
    }

    /// `(I + Q)⁻¹ z`
    fn solve_iq(&self, z: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut w = self.solve_m(&z[..n + m]);
        let hw = dot(&self.c, &w[..n]) - dot(&self.b, &w[n..]);
        let tau = (z[n + m] + hw) / (1.0 + self.h_p);
        for (wi, pi) in w.iter_mut().zip(&self.p) {
            *wi -= pi * tau;
        }
        w.push(tau);
        w
    }

    fn project_cone(&self, u: &mut [f64]) {
        let mut off = 0;
        for cone in &self.cones {
            let k = cone.dim();
            let block = &mut u[off..off + k];
            match *cone {
                Cone::Free(_) => {}
                Cone::NonNeg(_) => block.iter_mut().for_each(|x| *x = x.max(0.0)),
                Cone::Psd(nb) => project_psd(block, nb),
            }
            off += k;
        }
        let t = self.n + self.m;
        u[t] = u[t].max(0.0);
    }

    fn run(&mut self) -> ConicSolution {
        let (n, m) = (self.n, self.m);
        let len = n + m + 1;
        let mut u = vec![0.0; len];
        let mut v = vec![0.0; len];
        u[len - 1] = 1.0;
        v[len - 1] = 1.0;
        let alpha = self.opts.alpha;
        let mut aa = Anderson::new(self.opts.anderson, 2 * len);
        let mut last = None;
        let mut iter = 0;
        while iter < self.opts.max_iter {
            iter += 1;
            let (u_new, v_new) = self.step(&u, &v, alpha);
            // Anderson extrapolation on the stacked (u, v) iterate, kept
            // only if it lowers the fixed-point residual
            if aa.enabled() {
                let mut g: Vec<f64> = u_new.clone();
                g.extend_from_slice(&v_new);
                let mut x: Vec<f64> = u.clone();
                x.extend_from_slice(&v);
                let res0: f64 = x.iter().zip(&g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let cand = aa.extrapolate(&x, &g);
                let mut accepted = false;
                if let Some(cand) = cand {
                    let (cu, cv) = cand.split_at(len);
                    let mut cu = cu.to_vec();
                    let cv = cv.to_vec();
                    self.project_cone(&mut cu);
                    let (u2, v2) = self.step(&cu, &cv, alpha);
                    let res1: f64 = cu
                        .iter()
                        .chain(&cv)
                        .zip(u2.iter().chain(&v2))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    if res1 < res0 && res1.is_finite() {
                        u = u2;
                        v = v2;
                        accepted = true;
                    }
                }
                if !accepted {
                    aa.reset_if_stale();
                    u = u_new;
                    v = v_new;
                }
            } else {
                u = u_new;
                v = v_new;
            }
            if iter % CHECK_EVERY == 0 || iter == self.opts.max_iter {
                let eval = self.evaluate(&u, &v);
                if let Some(sol) = eval.terminal(&self.opts, iter) {
                    return sol;
                }
                last = Some(eval);
            }
        }
        let eval = last.unwrap_or_else(|| self.evaluate(&u, &v));
        eval.into_solution(Status::MaxIter, iter)
    }

    fn step(&self, u: &[f64], v: &[f64], alpha: f64) -> (Vec<f64>, Vec<f64>) {
        let z: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
        let ut = self.solve_iq(&z);
        let relaxed: Vec<f64> = ut.iter().zip(u).map(|(t, p)| alpha * t + (1.0 - alpha) * p).collect();
        let mut u_new: Vec<f64> = relaxed.iter().zip(v).map(|(r, s)| r - s).collect();
        self.project_cone(&mut u_new);
        let v_new: Vec<f64> = v.iter().zip(&relaxed).zip(&u_new).map(|((s, r), un)| s - r + un).collect();
        (u_new, v_new)
    }

    /// Unscaled primal/dual candidates and certificates for an iterate.
    fn evaluate(&self, u: &[f64], v: &[f64]) -> Evaluation {
        let (n, m) = (self.n, self.m);
        let tau = u[n + m];
        let kappa = v[n + m];
        let x_ray: Vec<f64> = (0..n).map(|i| u[i] * self.e[i] / self.sb).collect();
        let y_ray: Vec<f64> = (0..m).map(|i| u[n + i] * self.d[i] / self.sc).collect();
        let s_ray: Vec<f64> = (0..n).map(|i| v[i] / self.e[i] / self.sc).collect();
        let p = self.orig;
        let nb = norm(&self.b_orig);
        let ncn = norm(&p.c);
        let mut ax = vec![0.0; m];
        let mut aty = vec![0.0; n];
        self.a_orig.mul_vec(&x_ray, &mut ax);
        self.a_orig.mul_t_vec(&y_ray, &mut aty);

        let mut eval = Evaluation {
            x: x_ray.clone(),
            y: y_ray.clone(),
            s: s_ray.clone(),
            tau,
            kappa,
            pres: f64::INFINITY,
            dres: f64::INFINITY,
            pobj: f64::NAN,
            dobj: f64::NAN,
            offset: p.offset,
            infeasible: false,
            unbounded: false,
        };
        if tau > 0.0 {
            let it = 1.0 / tau;
            eval.x.iter_mut().for_each(|z| *z *= it);
            eval.y.iter_mut().for_each(|z| *z *= it);
            eval.s.iter_mut().for_each(|z| *z *= it);
            let r_p: Vec<f64> = ax.iter().zip(&self.b_orig).map(|(a, b)| a * it - b).collect();
            let r_d: Vec<f64> = (0..n).map(|i| aty[i] * it + eval.s[i] - p.c[i]).collect();
            eval.pres = norm(&r_p) / (1.0 + nb);
            eval.dres = norm(&r_d) / (1.0 + ncn);
            eval.pobj = dot(&p.c, &eval.x);
            eval.dobj = dot(&self.b_orig, &eval.y);
        }
        // certificates are homogeneous, so only ratios matter
        let by = dot(&self.b_orig, &y_ray);
        if by > 0.0 {
            let r: Vec<f64> = (0..n).map(|i| aty[i] + s_ray[i]).collect();
            let ratio = by / (norm(&r) * (1.0 + nb) + 1e-300);
            let ny = norm(&y_ray);
            eval.infeasible = ratio > INFEASIBILITY_RATIO && by > 1e-6 * ny * (1.0 + nb);
        }
        let cx = dot(&p.c, &x_ray);
        if cx < 0.0 {
            let ratio = -cx / (norm(&ax) * (1.0 + ncn) + 1e-300);
            let nx = norm(&x_ray);
            eval.unbounded = ratio > INFEASIBILITY_RATIO && -cx > 1e-6 * nx * (1.0 + ncn);
        }
        eval
    }
}

struct Evaluation {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
    pres: f64,
    dres: f64,
    pobj: f64,
    dobj: f64,
    offset: f64,
    infeasible: bool,
    unbounded: bool,
}

impl Evaluation {
    fn gap_rel(&self) -> f64 {
        (self.pobj - self.dobj).abs() / (1.0 + self.pobj.abs() + self.dobj.abs())
    }

    fn terminal(&self, opts: &SolverOptions, iter: usize) -> Option<ConicSolution> {
        if self.tau > 0.0 && self.pres <= opts.tol && self.dres <= opts.tol {
            let p = self.pobj + self.offset;
            let reported_gap = (self.pobj - self.dobj).abs() / (1.0 + p.abs());
            if self.gap_rel() <= opts.tol && reported_gap <= opts.tol {
                return Some(self.clone_into(Status::Optimal, iter));
            }
        }
        if self.tau <= self.kappa || self.tau == 0.0 {
            if self.infeasible {
                return Some(self.clone_into(Status::Infeasible, iter));
            }
            if self.unbounded {
                return Some(self.clone_into(Status::Unbounded, iter));
            }
        }
        None
    }

    fn clone_into(&self, status: Status, iter: usize) -> ConicSolution {
        Evaluation {
            x: self.x.clone(),
            y: self.y.clone(),
            s: self.s.clone(),
            ..*self
        }
        .into_solution(status, iter)
    }

    fn into_solution(self, status: Status, iterations: usize) -> ConicSolution {
        let (primal_obj, dual_obj) = match status {
            Status::Infeasible => (f64::INFINITY, f64::INFINITY),
            Status::Unbounded => (f64::NEG_INFINITY, f64::NEG_INFINITY),
            _ => (self.pobj + self.offset, self.dobj + self.offset),
        };
        let gap = (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs());
        ConicSolution {
            x: self.x,
            y: self.y,
            s: self.s,
            primal_obj,
            dual_obj,
            gap,
            primal_residual: self.pres,
            dual_residual: self.dres,
            status,
            iterations,
        }
    }
}

impl Clone for Evaluation {
    fn clone(&self) -> Self {
        Evaluation { x: self.x.clone(), y: self.y.clone(), s: self.s.clone(), ..*self }
    }
}

/// Ruiz equilibration with a single column factor per PSD block, so the
/// scaled cone is the same cone.
fn equilibrate(a: &CsrMatrix, cones: &[Cone]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (a.rows(), a.cols());
    let mut d = vec![1.0; m];
    let mut e = vec![1.0; n];
    let mut work = a.clone();
    for _ in 0..12 {
        let mut rmax = vec![0.0f64; m];
        let mut cmax = vec![0.0f64; n];
        for (r, c, v) in work.triplets() {
            rmax[r] = rmax[r].max(v.abs());
            cmax[c] = cmax[c].max(v.abs());
        }
        let mut off = 0;
        for cone in cones {
            if let Cone::Psd(_) = cone {
                let k = cone.dim();
                let mx = cmax[off..off + k].iter().fold(0.0f64, |a, &b| a.max(b));
                cmax[off..off + k].iter_mut().for_each(|x| *x = mx);
            }
            off += cone.dim();
        }
        let fr: Vec<f64> = rmax.iter().map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 1.0 }).collect();
        let fc: Vec<f64> = cmax.iter().map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 1.0 }).collect();
        work.scale(&fr, &fc);
        for i in 0..m {
            d[i] = (d[i] * fr[i]).clamp(1e-4, 1e4);
        }
        for j in 0..n {
            e[j] = (e[j] * fc[j]).clamp(1e-4, 1e4);
        }
    }
    (d, e)
}

/// In-place projection of a vectorized Hermitian block onto the PSD cone.
fn project_psd(block: &mut [f64], n: usize) {
    if n == 1 {
        block[0] = block[0].max(0.0);
        return;
    }
    let h = devectorize(block, n);
    let eig = herm_eig(&h).expect("square block");
    let neg = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
    if neg == 0 {
        return;
    }
    let pos = n - neg;
    // rebuild from whichever eigenspace is smaller
    let mut out = if pos <= neg { crate::qmat::CMatrix::zeros(n, n) } else { h.clone() };
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let take = if pos <= neg { l > 0.0 } else { l < 0.0 };
        if !take {
            continue;
        }
        let w = if pos <= neg { l } else { -l };
        let col = eig.vector(k);
        for i in 0..n {
            let ci = col[i] * w;
            for j in 0..n {
                out[(i, j)] += ci * col[j].conj();
            }
        }
    }
    block.copy_from_slice(&vectorize(&out));
}

/// Type-II Anderson acceleration on the fixed-point map `x ↦ g(x)`.
struct Anderson {
    mem: usize,
    dim: usize,
    prev_x: Option<Vec<f64>>,
    prev_f: Option<Vec<f64>>,
    dx: Vec<Vec<f64>>,
    df: Vec<Vec<f64>>,
    rejects: usize,
}

impl Anderson {
    fn new(mem: usize, dim: usize) -> Self {
        Self { mem, dim, prev_x: None, prev_f: None, dx: Vec::new(), df: Vec::new(), rejects: 0 }
    }

    fn enabled(&self) -> bool {
        self.mem > 0
    }

    fn reset_if_stale(&mut self) {
        self.rejects += 1;
        if self.rejects > 2 * self.mem.max(1) {
            self.dx.clear();
            self.df.clear();
            self.rejects = 0;
        }
    }

    /// Given the current point `x` and `g = g(x)`, returns an extrapolated
    /// point once enough history is stored.
    fn extrapolate(&mut self, x: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        debug_assert_eq!(x.len(), self.dim);
        let f: Vec<f64> = g.iter().zip(x).map(|(a, b)| a - b).collect();
        if let (Some(px), Some(pf)) = (&self.prev_x, &self.prev_f) {
            let dx: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
            let df: Vec<f64> = f.iter().zip(pf).map(|(a, b)| a - b).collect();
            if self.dx.len() == self.mem {
                self.dx.remove(0);
                self.df.remove(0);
            }
            self.dx.push(dx);
            self.df.push(df);
        }
        self.prev_x = Some(x.to_vec());
        self.prev_f = Some(f.clone());
        let k = self.df.len();
        if k == 0 {
            return None;
        }
        // least squares min ‖f − ΔF γ‖ via regularized normal equations
        let mut gram = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&self.df[i], &self.df[j]);
                gram[i * k + j] = v;
                gram[j * k + i] = v;
            }
            rhs[i] = dot(&self.df[i], &f);
        }
        let scale = (0..k).map(|i| gram[i * k + i]).fold(0.0f64, f64::max);
        if scale == 0.0 {
            return None;
        }
        for i in 0..k {
            gram[i * k + i] += 1e-10 * scale;
        }
        let gamma = solve_dense(k, &mut gram, &mut rhs)?;
        // x⁺ = g − Σ γ_j ΔG_j with ΔG_j = Δx_j + Δf_j
        let mut out = g.to_vec();
        for (j, gj) in gamma.iter().enumerate() {
            for (o, (a, b)) in out.iter_mut().zip(self.dx[j].iter().zip(&self.df[j])) {
                *o -= gj * (a + b);
            }
        }
        out.iter().all(|z| z.is_finite()).then_some(out)
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(k: usize, a: &mut [f64], b: &mut [f64]) -> Option<Vec<f64>> {
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))?;
        if a[piv * k + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..k {
            let f = a[r * k + col] / a[col * k + col];
            for c in col..k {
                a[r * k + c] -= f * a[col * k + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r * k + c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r * k + r];
    }
    Some(x)
}
