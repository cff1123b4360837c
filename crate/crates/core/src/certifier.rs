//! Decide whether `R + O(ω) ⪰ 0` for some 4-form `ω`.
//!
//! The optimal margin `sup_ω λ_min(R + O(ω))` is found by a log-barrier
//! interior-point method in the variables `(ω, λ)`. Its central path carries
//! the dual matrix `S = μ·(R + O(ω) − λ)⁻¹`, which after projection onto
//! `ker 𝔟` and normalization is an infeasibility witness: for every `ω`,
//! `λ_min(R + O(ω)) ≤ ⟨R + O(ω), S⟩ = ⟨R, S⟩`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{
    fourform_to_operator, hodge_star4, wedge, BivectorFrame, FourForm, SymmetricBivectorOperator,
};
use crate::linalg;
use crate::random::{gaussian_vector, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Feasible,
    Infeasible,
    Undecided,
}

/// A plane found by sampling, with its sectional curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    /// Modifier achieving `margin` (Feasible).
    pub omega: Option<FourForm>,
    /// `λ_min(R + O(ω))`.
    pub margin: Option<f64>,
    /// Unit-trace PSD operator in `ker 𝔟` (Infeasible).
    pub witness: Option<SymmetricBivectorOperator>,
    /// `⟨R, S⟩` for the witness.
    pub bound: Option<f64>,
    /// Dual bound minus best margin (Undecided).
    pub gap: Option<f64>,
    /// Tolerance relative to `‖R‖_F`.
    pub rel_tol: f64,
    /// Absolute tolerance `ε = rel_tol·‖R‖_F` the verdict was decided with.
    pub eps: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub seed: u64,
    /// Negative plane from Grassmannian sampling (dimension-4 route).
    pub negative_plane: Option<PlaneSample>,
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub tol: f64,
    pub budget: usize,
    pub seed: u64,
    pub warm_start: Option<FourForm>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            budget: 10_000,
            seed: 0,
            warm_start: None,
        }
    }
}

/// Largest relative tolerance a certificate may claim and still validate.
pub const MAX_REL_TOL: f64 = 1e-3;

impl Certificate {
    fn blank(opts: &CertifyOptions, eps: f64) -> Self {
        Self {
            verdict: Verdict::Undecided,
            omega: None,
            margin: None,
            witness: None,
            bound: None,
            gap: None,
            rel_tol: opts.tol,
            eps,
            iterations: 0,
            wall_time_s: 0.0,
            seed: opts.seed,
            negative_plane: None,
        }
    }
}

/// `certify` with default seed and no warm start.
pub fn certify(r: &SymmetricBivectorOperator, tol: f64, budget: usize) -> Result<Certificate> {
    certify_with(
        r,
        &CertifyOptions {
            tol,
            budget,
            ..CertifyOptions::default()
        },
    )
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || tol > MAX_REL_TOL {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, {MAX_REL_TOL}], got {tol}"
        )));
    }
    Ok(())
}

/// Project a symmetric operator onto `ker 𝔟`, shift it to be PSD and
/// normalize its trace.
pub fn normalize_witness(
    s: &DMatrix<f64>,
    frame: &BivectorFrame,
) -> Result<SymmetricBivectorOperator> {
    let op = SymmetricBivectorOperator::from_matrix(frame.clone(), s.clone(), "witness")?;
    let b = op.bianchi();
    let mut m = op.entries() - fourform_to_operator(&b, frame)?.entries();
    let lmin = linalg::lambda_min(&m);
    if lmin < 0.0 {
        for i in 0..m.nrows() {
            m[(i, i)] -= lmin;
        }
    }
    let tr = m.trace();
    if !(tr > 0.0) {
        return Err(Error::Numerical("witness has zero trace".into()));
    }
    SymmetricBivectorOperator::from_matrix(frame.clone(), m / tr, "witness")
}

fn eigen_certificate(
    r: &SymmetricBivectorOperator,
    opts: &CertifyOptions,
    eps: f64,
) -> Result<Certificate> {
    let mut cert = Certificate::blank(opts, eps);
    let (vals, vecs) = linalg::sym_eigen(r.entries());
    let lmin = vals[0];
    if lmin >= -eps {
        cert.verdict = Verdict::Feasible;
        cert.margin = Some(lmin);
        cert.omega = Some(FourForm::zero(r.frame()));
    } else {
        let xi = vecs.column(0).into_owned();
        let s = &xi * xi.transpose();
        let w = normalize_witness(&s, r.frame())?;
        cert.bound = Some(r.inner(&w)?);
        cert.witness = Some(w);
        cert.verdict = if cert.bound.unwrap() < -eps {
            Verdict::Infeasible
        } else {
            Verdict::Undecided
        };
        if cert.verdict == Verdict::Undecided {
            cert.gap = Some(cert.bound.unwrap() - lmin);
        }
        cert.margin = Some(lmin);
    }
    cert.iterations = 1;
    Ok(cert)
}

/// Sparse description of `O(e_q)`: the three pair-index couples and signs.
fn four_form_supports(frame: &BivectorFrame) -> Vec<[(usize, usize, f64); 3]> {
    frame
        .quads()
        .into_iter()
        .map(|[i, j, k, l]| {
            [
                (frame.index(i, j), frame.index(k, l), 1.0),
                (frame.index(i, k), frame.index(j, l), -1.0),
                (frame.index(i, l), frame.index(j, k), 1.0),
            ]
        })
        .collect()
}

fn assemble(
    r: &DMatrix<f64>,
    supports: &[[(usize, usize, f64); 3]],
    omega: &[f64],
    lambda: f64,
) -> DMatrix<f64> {
    let mut z = r.clone();
    for (q, sup) in supports.iter().enumerate() {
        let c = omega[q];
        if c == 0.0 {
            continue;
        }
        for &(a, b, s) in sup {
            z[(a, b)] += s * c;
            z[(b, a)] += s * c;
        }
    }
    for i in 0..z.nrows() {
        z[(i, i)] -= lambda;
    }
    z
}

struct IpmOutcome {
    omega: Vec<f64>,
    /// Dual matrix `μZ⁻¹` at the last centered iterate.
    dual: Option<DMatrix<f64>>,
    iterations: usize,
    exhausted: bool,
}

/// Barrier method for `max λ  s.t.  R + Σ ω_q O(e_q) − λ·Id ⪰ 0` on a
/// Frobenius-normalized `R`.
fn barrier_solve(
    r: &DMatrix<f64>,
    supports: &[[(usize, usize, f64); 3]],
    omega0: &[f64],
    budget: usize,
) -> IpmOutcome {
    let nn = r.nrows();
    let m = supports.len();
    let nv = m + 1;
    let mut omega = omega0.to_vec();
    let mut lambda = linalg::lambda_min(&assemble(r, supports, &omega, 0.0)) - 1.0;
    let mut mu = 1.0;
    let mut iterations = 0;
    let mut dual = None;
    let target = 1e-12 / nn as f64;
    let barrier = |om: &[f64], lam: f64, mu: f64| -> Option<f64> {
        let z = assemble(r, supports, om, lam);
        let ch = z.cholesky()?;
        let logdet: f64 = (0..nn).map(|i| ch.l_dirty()[(i, i)].ln()).sum::<f64>() * 2.0;
        Some(-lam - mu * logdet)
    };
    loop {
        // centering at the current μ
        let mut centered = false;
        for _ in 0..60 {
            if iterations >= budget {
                return IpmOutcome {
                    omega,
                    dual,
                    iterations,
                    exhausted: true,
                };
            }
            iterations += 1;
            let z = assemble(r, supports, &omega, lambda);
            let w = match z.clone().cholesky() {
                Some(ch) => ch.inverse(),
                None => break,
            };
            let mut grad = DVector::zeros(nv);
            let mut wow = Vec::with_capacity(m);
            for (q, sup) in supports.iter().enumerate() {
                let mut tr = 0.0;
                for &(a, b, s) in sup {
                    tr += 2.0 * s * w[(a, b)];
                }
                grad[q] = -mu * tr;
                // W O_q W
                let mut acc = DMatrix::zeros(nn, nn);
                for &(a, b, s) in sup {
                    let ca = w.column(a);
                    let cb = w.column(b);
                    acc += (ca * cb.transpose() + cb * ca.transpose()) * s;
                }
                wow.push(acc);
            }
            grad[m] = -1.0 + mu * w.trace();
            let mut h = DMatrix::zeros(nv, nv);
            for i in 0..m {
                for j in i..m {
                    let mut v = 0.0;
                    for &(a, b, s) in &supports[j] {
                        v += 2.0 * s * wow[i][(a, b)];
                    }
                    h[(i, j)] = mu * v;
                    h[(j, i)] = mu * v;
                }
                // A_λ = −Id: tr(W O_i W (−Id)) = −tr(W O_i W)
                let v = -mu * wow[i].trace();
                h[(i, m)] = v;
                h[(m, i)] = v;
            }
            h[(m, m)] = mu * linalg::frobenius(&w, &w);
            let step = match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => match h.lu().solve(&(-&grad)) {
                    Some(s) => s,
                    None => break,
                },
            };
            let decrement = -grad.dot(&step);
            if decrement < 1e-12 {
                centered = true;
                dual = Some(&w * mu);
                break;
            }
            let f0 = barrier(&omega, lambda, mu).unwrap_or(f64::INFINITY);
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let om: Vec<f64> = omega
                    .iter()
                    .zip(step.iter())
                    .map(|(o, d)| o + alpha * d)
                    .collect();
                let lam = lambda + alpha * step[m];
                if let Some(f1) = barrier(&om, lam, mu) {
                    if f1 <= f0 - 0.25 * alpha * decrement {
                        omega = om;
                        lambda = lam;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                // no further progress possible at this precision
                dual = Some(&w * mu);
                centered = true;
                break;
            }
        }
        if !centered || mu <= target {
            break;
        }
        mu *= 0.2;
    }
    IpmOutcome {
        omega,
        dual,
        iterations,
        exhausted: false,
    }
}

/// Decide strong nonnegativity of `R`.
pub fn certify_with(r: &SymmetricBivectorOperator, opts: &CertifyOptions) -> Result<Certificate> {
    check_tol(opts.tol)?;
    let start = Instant::now();
    let frame = r.frame().clone();
    let scale = r.entries().norm();
    let eps = opts.tol * scale;
    if let Some(w) = &opts.warm_start {
        w.frame().check_same(&frame)?;
    }
    let mut cert = if scale == 0.0 {
        let mut c = Certificate::blank(opts, 0.0);
        c.verdict = Verdict::Feasible;
        c.margin = Some(0.0);
        c.omega = Some(FourForm::zero(&frame));
        c
    } else if frame.n() < 4 {
        eigen_certificate(r, opts, eps)?
    } else {
        let rn = r.entries() / scale;
        let supports = four_form_supports(&frame);
        let zero = vec![0.0; supports.len()];
        let warm: Vec<f64> = opts
            .warm_start
            .as_ref()
            .map(|w| w.coeffs().iter().map(|c| c / scale).collect())
            .unwrap_or_else(|| zero.clone());
        let out = barrier_solve(&rn, &supports, &warm, opts.budget);
        let margin_of = |om: &[f64]| linalg::lambda_min(&assemble(&rn, &supports, om, 0.0));
        // best of the solver iterate, the warm start and ω = 0 (ties prefer the simpler one)
        let mut best = out.omega.clone();
        let mut best_margin = margin_of(&best);
        for cand in [&warm, &zero] {
            let mm = margin_of(cand);
            if mm >= best_margin - 1e-13 {
                best = cand.clone();
                best_margin = mm;
            }
        }
        let margin = best_margin * scale;
        let omega = FourForm::from_coeffs(&frame, best.iter().map(|c| c * scale).collect())?;
        let mut c = Certificate::blank(opts, eps);
        c.iterations = out.iterations;
        c.margin = Some(margin);
        if margin >= -eps {
            c.verdict = Verdict::Feasible;
            c.omega = Some(omega);
        } else {
            let dual = out
                .dual
                .unwrap_or_else(|| DMatrix::identity(rn.nrows(), rn.nrows()));
            let w = normalize_witness(&dual, &frame)?;
            let bound = r.inner(&w)?;
            c.bound = Some(bound);
            // a witness with bound < −ε is valid even if the budget ran out
            if bound < -eps {
                c.verdict = Verdict::Infeasible;
                c.witness = Some(w);
            } else {
                c.verdict = Verdict::Undecided;
                c.gap = Some(bound - margin);
                c.omega = Some(omega);
                c.witness = Some(w);
            }
        }
        if out.exhausted && c.verdict == Verdict::Feasible {
            // feasibility is decided, but the margin need not be optimal
            c.gap = Some(f64::NAN);
        }
        c
    };
    cert.wall_time_s = start.elapsed().as_secs_f64();
    Ok(cert)
}

/// Maximum of the concave function `x ↦ λ_min(R + x·⋆)` on dimension 4.
fn golden_max(r: &DMatrix<f64>, star: &DMatrix<f64>, scale: f64) -> (f64, f64) {
    let g = |x: f64| linalg::lambda_min(&(r + star * x));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = -2.0 * scale - 1.0;
    let mut hi = 2.0 * scale + 1.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    while hi - lo > 1e-13 * (1.0 + scale) {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + phi * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - phi * (hi - lo);
            g1 = g(x1);
        }
    }
    let mut best = (0.5 * (lo + hi), g(0.5 * (lo + hi)));
    for x in [x1, x2, 0.0] {
        let v = g(x);
        if v > best.1 || (v == best.1 && x == 0.0) {
            best = (x, v);
        }
    }
    best
}

/// Rank-one decomposable witness from the bottom eigenspace at the optimum.
fn dim4_witness(m: &DMatrix<f64>, star: &DMatrix<f64>, scale: f64) -> Option<DVector<f64>> {
    let (vals, vecs) = linalg::sym_eigen(m);
    for rel in [1e-10, 1e-8, 1e-6, 1e-4] {
        let k = vals
            .iter()
            .take_while(|&&v| v <= vals[0] + rel * scale.max(1e-300))
            .count();
        let e = vecs.columns(0, k).into_owned();
        let red = e.transpose() * star * &e;
        let (mv, mvec) = linalg::sym_eigen(&red);
        let lm = mv[0];
        let lp = mv[k - 1];
        if k == 1 && lm.abs() <= 1e-6 {
            // smooth maximum: the bottom eigenvector is already (nearly) decomposable
            return Some(e.column(0).into_owned());
        }
        if lm > 1e-12 || lp < -1e-12 {
            continue;
        }
        if lp - lm < 1e-12 {
            return Some(e.column(0).into_owned());
        }
        // split the first coordinate bivector with components of both signs
        // of ⋆ on the eigenspace; keeps witnesses aligned with the frame
        let reference = (0..e.nrows()).find_map(|c| {
            let v = e.row(c).transpose();
            let (pos, neg) = split_signs(&v, &mv, &mvec);
            (pos.norm() > 1e-8 && neg.norm() > 1e-8).then_some((pos, neg))
        });
        let (up, um) = match reference {
            Some((p, n)) => (p.normalize(), n.normalize()),
            None => (mvec.column(k - 1).into_owned(), mvec.column(0).into_owned()),
        };
        let ap = (up.transpose() * &red * &up)[0];
        let am = (um.transpose() * &red * &um)[0];
        let p = -am / (ap - am);
        let xi = up * p.sqrt() + um * (1.0 - p).sqrt();
        return Some(&e * xi);
    }
    None
}

/// Components of `v` on the positive and negative eigenspaces of a
/// symmetric matrix with eigen-decomposition `(vals, vecs)`.
fn split_signs(
    v: &DVector<f64>,
    vals: &DVector<f64>,
    vecs: &DMatrix<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let mut pos = DVector::zeros(v.len());
    let mut neg = DVector::zeros(v.len());
    for i in 0..vals.len() {
        let u = vecs.column(i);
        let c = u.dot(v);
        if vals[i] > 1e-12 {
            pos += u * c;
        } else if vals[i] < -1e-12 {
            neg += u * c;
        }
    }
    (pos, neg)
}

/// Dimension-4 decision via `∧⁴ℝ⁴ = span{⋆}`.
pub fn certify_dim4(r: &SymmetricBivectorOperator, opts: &CertifyOptions) -> Result<Certificate> {
    check_tol(opts.tol)?;
    if r.n() != 4 {
        return Err(Error::Dimension(format!(
            "certify_dim4 needs n = 4, got n = {}",
            r.n()
        )));
    }
    let start = Instant::now();
    let frame = r.frame().clone();
    let scale = r.entries().norm();
    let eps = opts.tol * scale;
    let (_, star_op) = hodge_star4();
    let star = star_op.entries().clone();
    let (x, margin) = golden_max(r.entries(), &star, scale);
    let mut cert = Certificate::blank(opts, eps);
    cert.iterations = 1;
    cert.margin = Some(margin);
    let omega = FourForm::from_coeffs(&frame, vec![x])?;
    if margin >= -eps {
        cert.verdict = Verdict::Feasible;
        cert.omega = Some(omega);
    } else {
        let m = r.entries() + &star * x;
        let w = match dim4_witness(&m, &star, scale) {
            Some(xi) => normalize_witness(&(&xi * xi.transpose()), &frame)?,
            None => certify_with(r, opts)?
                .witness
                .ok_or_else(|| Error::Numerical("no witness in the bottom eigenspace".into()))?,
        };
        let bound = r.inner(&w)?;
        cert.bound = Some(bound);
        if bound < -eps {
            cert.verdict = Verdict::Infeasible;
            cert.witness = Some(w);
            let plane = min_sectional_sampled(r, 100_000, opts.seed)?;
            if plane.sec < 0.0 {
                cert.negative_plane = Some(plane);
            }
        } else {
            cert.verdict = Verdict::Undecided;
            cert.gap = Some(bound - margin);
            cert.witness = Some(w);
        }
    }
    cert.wall_time_s = start.elapsed().as_secs_f64();
    Ok(cert)
}

fn sec_of(r: &SymmetricBivectorOperator, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let b = wedge(x, y);
    r.quadratic(&b) / b.norm_squared()
}

/// Descent on orthonormal pairs for the smallest sectional curvature.
fn polish_plane(
    r: &SymmetricBivectorOperator,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, f64) {
    let n = r.n();
    let frame = r.frame();
    let step = 0.2 / r.entries().norm().max(1e-300);
    let orthonormalize = |x: &DVector<f64>, y: &DVector<f64>| {
        let x = x.normalize();
        let y = (y - &x * x.dot(y)).normalize();
        (x, y)
    };
    let (mut x, mut y) = orthonormalize(x0, y0);
    let mut best = sec_of(r, &x, &y);
    for _ in 0..300 {
        let w = r.entries() * wedge(&x, &y);
        let mut gx = DVector::zeros(n);
        let mut gy = DVector::zeros(n);
        for (c, (i, j)) in frame.pairs().into_iter().enumerate() {
            gx[i] += 2.0 * w[c] * y[j];
            gx[j] -= 2.0 * w[c] * y[i];
            gy[j] += 2.0 * w[c] * x[i];
            gy[i] -= 2.0 * w[c] * x[j];
        }
        let (nx, ny) = orthonormalize(&(&x - gx * step), &(&y - gy * step));
        let s = sec_of(r, &nx, &ny);
        if s < best {
            best = s;
            x = nx;
            y = ny;
        } else {
            break;
        }
    }
    (x, y, best)
}

/// Smallest sectional curvature over seeded Gaussian planes, refined by
/// descent from the best few samples.
pub fn min_sectional_sampled(
    r: &SymmetricBivectorOperator,
    samples: usize,
    seed: u64,
) -> Result<PlaneSample> {
    let n = r.n();
    if n < 2 {
        return Err(Error::Dimension("planes need n ≥ 2".into()));
    }
    let mut rng = seeded(seed);
    let mut top: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::new();
    for _ in 0..samples {
        let x = gaussian_vector(&mut rng, n);
        let y = gaussian_vector(&mut rng, n);
        let b = wedge(&x, &y);
        let nn = b.norm_squared();
        if nn < 1e-12 {
            continue;
        }
        let s = r.quadratic(&b) / nn;
        if top.len() < 5 || s < top[top.len() - 1].0 {
            top.push((s, x, y));
            top.sort_by(|a, b| a.0.total_cmp(&b.0));
            top.truncate(5);
        }
    }
    // a few extra random restarts keep the search from a single basin
    for _ in 0..3 {
        let x = gaussian_vector(&mut rng, n);
        let y = gaussian_vector(&mut rng, n);
        top.push((sec_of(r, &x, &y), x, y));
    }
    let mut best = PlaneSample {
        x: vec![],
        y: vec![],
        sec: f64::INFINITY,
    };
    for (_, x, y) in &top {
        let (px, py, s) = polish_plane(r, x, y);
        if s < best.sec {
            best = PlaneSample {
                x: px.iter().copied().collect(),
                y: py.iter().copied().collect(),
                sec: s,
            };
        }
    }
    Ok(best)
}

/// Recheck every invariant of a certificate from scratch, using the
/// independent Jacobi eigensolver.
pub fn validate_certificate(r: &SymmetricBivectorOperator, cert: &Certificate) -> bool {
    validate_inner(r, cert).unwrap_or(false)
}

fn validate_inner(r: &SymmetricBivectorOperator, cert: &Certificate) -> Result<bool> {
    if !(cert.rel_tol > 0.0) || cert.rel_tol > MAX_REL_TOL {
        return Ok(false);
    }
    let scale = r.entries().norm();
    let eps = cert.rel_tol * scale;
    if (cert.eps - eps).abs() > 1e-12 * eps.max(1e-300) && !(scale == 0.0 && cert.eps == 0.0) {
        return Ok(false);
    }
    let frame = r.frame();
    match cert.verdict {
        Verdict::Feasible => {
            let (Some(omega), Some(margin)) = (&cert.omega, cert.margin) else {
                return Ok(false);
            };
            if omega.frame().check_same(frame).is_err() {
                return Ok(false);
            }
            let m = r.plus_form(omega)?;
            let lmin = linalg::jacobi_eigenvalues(m.entries())
                .first()
                .copied()
                .unwrap_or(f64::INFINITY);
            let agree = (lmin - margin).abs() <= 1e-9 * scale.max(1e-300) + 1e-15;
            Ok(agree && margin >= -eps && lmin >= -eps - 1e-9 * scale)
        }
        Verdict::Infeasible => {
            let (Some(s), Some(bound)) = (&cert.witness, cert.bound) else {
                return Ok(false);
            };
            if s.frame().check_same(frame).is_err() {
                return Ok(false);
            }
            let ev = linalg::jacobi_eigenvalues(s.entries());
            if ev.first().copied().unwrap_or(0.0) < -1e-10 {
                return Ok(false);
            }
            if (s.entries().trace() - 1.0).abs() > 1e-12 {
                return Ok(false);
            }
            // ⟨S, O(e_q)⟩ for every basis 4-form
            for sup in four_form_supports(frame) {
                let v: f64 = sup
                    .iter()
                    .map(|&(a, b, sg)| 2.0 * sg * s.entries()[(a, b)])
                    .sum();
                if v.abs() > 1e-10 {
                    return Ok(false);
                }
            }
            let recomputed = linalg::frobenius(r.entries(), s.entries());
            let agree = (recomputed - bound).abs() <= 1e-12 * scale.max(1e-300) + 1e-15;
            Ok(agree && bound < -eps)
        }
        Verdict::Undecided => Ok(cert.gap.is_some_and(|g| g.is_nan() || g >= -1e-12 * scale)),
    }
}

/// One grid point of a threshold scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint {
    pub t: f64,
    pub verdict: Verdict,
    pub margin: Option<f64>,
    pub bound: Option<f64>,
    pub validated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    /// Bracket `[last feasible, first infeasible]` after bisection.
    pub threshold: Option<(f64, f64)>,
    /// Verdicts were not a single Feasible block followed by an Infeasible one.
    pub non_monotone: bool,
    pub bisection_steps: usize,
}

/// Operator at parameter `t` with an optional warm-start modifier.
pub type FamilyMember = (SymmetricBivectorOperator, Option<FourForm>);

fn certify_member(
    member: FamilyMember,
    opts: &CertifyOptions,
) -> Result<(Certificate, SymmetricBivectorOperator)> {
    let (r, warm) = member;
    let o = CertifyOptions {
        warm_start: warm,
        ..opts.clone()
    };
    let c = certify_with(&r, &o)?;
    Ok((c, r))
}

/// Certify a one-parameter family on a grid and bisect the first
/// Feasible → Infeasible transition down to width `1e-6`.
pub fn scan_threshold<F>(
    family: F,
    t_range: (f64, f64),
    step: f64,
    opts: &CertifyOptions,
) -> Result<ScanReport>
where
    F: Fn(f64) -> Result<FamilyMember> + Sync,
{
    let (lo, hi) = t_range;
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidParameter(
            "scan needs lo ≤ hi and a positive step".into(),
        ));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|k| (lo + k as f64 * step).min(hi)).collect();
    let results: Vec<Result<ScanPoint>> = grid
        .par_iter()
        .map(|&t| {
            let (c, r) = certify_member(family(t)?, opts)?;
            Ok(ScanPoint {
                t,
                verdict: c.verdict,
                margin: c.margin,
                bound: c.bound,
                validated: validate_certificate(&r, &c),
            })
        })
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let verdicts: Vec<Verdict> = points.iter().map(|p| p.verdict).collect();
    let first_inf = verdicts.iter().position(|v| *v != Verdict::Feasible);
    let non_monotone = match first_inf {
        None => false,
        Some(k) => verdicts[k..].iter().any(|v| *v != Verdict::Infeasible) || k == 0,
    };
    let mut report = ScanReport {
        points,
        threshold: None,
        non_monotone,
        bisection_steps: 0,
    };
    if non_monotone {
        return Ok(report);
    }
    if let Some(k) = first_inf {
        let mut a = grid[k - 1];
        let mut b = grid[k];
        while b - a > 1e-6 {
            let mid = 0.5 * (a + b);
            let (c, _) = certify_member(family(mid)?, opts)?;
            report.bisection_steps += 1;
            match c.verdict {
                Verdict::Feasible => a = mid,
                Verdict::Infeasible => b = mid,
                Verdict::Undecided => {
                    report.non_monotone = true;
                    return Ok(report);
                }
            }
        }
        report.threshold = Some((a, b));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_feasible_with_zero_modifier() {
        for n in [3, 4, 5] {
            let c = certify(&SymmetricBivectorOperator::identity(n), 1e-8, 10_000).unwrap();
            assert_eq!(c.verdict, Verdict::Feasible);
            assert!((c.margin.unwrap() - 1.0).abs() < 1e-9);
            assert!(c.omega.as_ref().unwrap().max_abs() < 1e-8);
            assert!(validate_certificate(
                &SymmetricBivectorOperator::identity(n),
                &c
            ));
        }
    }

    #[test]
    fn hodge_shift_is_feasible() {
        let (_, star) = hodge_star4();
        let r = SymmetricBivectorOperator::identity(4)
            .add(&star.scaled(2.0))
            .unwrap();
        assert!((r.lambda_min() + 1.0).abs() < 1e-14);
        let c = certify(&r, 1e-8, 10_000).unwrap();
        assert_eq!(c.verdict, Verdict::Feasible);
        assert!((c.margin.unwrap() - 1.0).abs() < 1e-8);
        assert!((c.omega.as_ref().unwrap().coeffs()[0] + 2.0).abs() < 1e-6);
        let d = certify_dim4(&r, &CertifyOptions::default()).unwrap();
        assert!((d.omega.unwrap().coeffs()[0] + 2.0).abs() < 1e-9);
        assert!((d.margin.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minus_identity_witness_is_a_coordinate_plane() {
        let r = SymmetricBivectorOperator::identity(4).scaled(-1.0);
        let c = certify_dim4(&r, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Infeasible);
        assert!((c.bound.unwrap() + 1.0).abs() < 1e-12);
        let s = c.witness.as_ref().unwrap();
        assert!((s.entries()[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(validate_certificate(&r, &c));
        assert!(c.negative_plane.unwrap().sec < 0.0);
    }

    #[test]
    fn zero_operator_is_feasible() {
        let r = SymmetricBivectorOperator::zero(4);
        let c = certify_dim4(&r, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Feasible);
        assert_eq!(c.margin.unwrap(), 0.0);
        assert_eq!(c.omega.unwrap().coeffs()[0], 0.0);
        assert_eq!(certify(&r, 1e-8, 10).unwrap().verdict, Verdict::Feasible);
    }

    #[test]
    fn inconsistent_certificate_is_rejected() {
        let r = SymmetricBivectorOperator::identity(3);
        let mut c = certify(&r, 1e-8, 100).unwrap();
        let mut s = DMatrix::zeros(3, 3);
        s[(0, 0)] = 1.0;
        c.verdict = Verdict::Infeasible;
        c.witness =
            Some(SymmetricBivectorOperator::from_matrix(BivectorFrame::new(3), s, "").unwrap());
        c.bound = Some(1.0);
        assert!(!validate_certificate(&r, &c));
    }

    #[test]
    fn budget_exhaustion_is_undecided() {
        // a non-PSD operator needing a genuine modifier, with a tiny budget
        let five = BivectorFrame::new(5);
        let tau = FourForm::basis(&five, 0).scaled(1.5);
        let r5 = SymmetricBivectorOperator::identity(5)
            .plus_form(&tau)
            .unwrap();
        assert!(r5.lambda_min() < -0.4);
        let c = certify(&r5, 1e-8, 2).unwrap();
        assert_eq!(c.verdict, Verdict::Undecided);
        assert!(c.gap.unwrap() > 0.0);
        let full = certify(&r5, 1e-8, 10_000).unwrap();
        assert_eq!(full.verdict, Verdict::Feasible);
    }
}
