//! Cohomogeneity-one disk bundles `M = G ×_K V` over a singular orbit `G/K`
//! with principal orbit `G/H`, carrying the metric induced by
//! `L + dt² + f(t)²dθ²` on `G × V`.
//!
//! Everything is evaluated along the radial geodesic `t ↦ [e, t·v₀]`.
//! Tangent vectors of `G × V` at `(e, v)` are stored as single columns: the
//! algebra coordinates of the left-trivialized `G` component followed by the
//! `V` component.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::certifier::{certify_with, validate_certificate, Certificate, CertifyOptions, Verdict};
use crate::curvature::{
    left_invariant_r, orbit_metric_c_at, product_r, rotsym_r, scale_up_e, scaled_up_r,
    submersion_r, to_coordinates, SubmersionSpec, WarpingProfile,
};
use crate::error::{Error, Result};
use crate::exterior::{
    fourform_to_operator, sectional_curvature, wedge_map, BivectorFrame, FourForm,
    SymmetricBivectorOperator,
};
use crate::lie::{make_algebra, CMatrix, LieAlgebra, Subspace};
use crate::linalg;
use crate::random::{gaussian_vector, seeded};

/// Residual allowed for the structural conditions on a triple.
pub const TRIPLE_TOL: f64 = 1e-10;

/// `H ⊂ K ⊂ G` with the slice representation of `K` on `V`.
#[derive(Debug, Clone)]
pub struct GroupTriple {
    pub name: String,
    pub g: LieAlgebra,
    pub k: Subspace,
    pub h: Subspace,
    pub slice_dim: usize,
    /// `S_X` (antisymmetric) for each basis vector `X` of `k`.
    slice_gens: Vec<DMatrix<f64>>,
    pub v0: DVector<f64>,
}

/// Residuals of the structural conditions, all expected to be `≤ TRIPLE_TOL`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TripleResiduals {
    pub k_closure: f64,
    pub h_closure: f64,
    pub h_in_k: f64,
    pub antisymmetry: f64,
    pub homomorphism: f64,
    pub isotropy: f64,
    /// `slice_dim − 1 − rank{S_X v₀}`; zero when `K` is transitive on `S(V)`.
    pub transitivity_defect: usize,
}

impl GroupTriple {
    /// Build from explicit data: spanning columns of `𝔨` and `𝔥` (algebra
    /// coordinates), one generator `S_X` per column of `k_vectors`, and the
    /// unit vector `v₀`.
    pub fn explicit(
        name: &str,
        g: LieAlgebra,
        k_vectors: &DMatrix<f64>,
        h_vectors: &DMatrix<f64>,
        slice_gens: &[DMatrix<f64>],
        v0: &DVector<f64>,
    ) -> Result<Self> {
        let q = g.q();
        let slice_dim = v0.len();
        if slice_gens.len() != k_vectors.ncols() {
            return Err(Error::Dimension(format!(
                "{} slice generators for {} spanning vectors of k",
                slice_gens.len(),
                k_vectors.ncols()
            )));
        }
        if slice_gens
            .iter()
            .any(|s| s.nrows() != slice_dim || s.ncols() != slice_dim)
        {
            return Err(Error::Dimension(format!(
                "slice generators must be {slice_dim}×{slice_dim}"
            )));
        }
        if (v0.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "v0 must be a unit vector, |v0| = {}",
                v0.norm()
            )));
        }
        let k = Subspace::new(k_vectors, &q)?;
        if k.dim() != k_vectors.ncols() {
            return Err(Error::InvalidParameter(
                "spanning vectors of k are dependent".into(),
            ));
        }
        let h = Subspace::new(h_vectors, &q)?;
        let normal = k_vectors.transpose() * k_vectors;
        let pinv = normal
            .try_inverse()
            .ok_or_else(|| Error::Numerical("spanning vectors of k are dependent".into()))?
            * k_vectors.transpose();
        let coeffs = pinv * k.basis();
        let gens = (0..k.dim())
            .map(|c| {
                slice_gens
                    .iter()
                    .enumerate()
                    .fold(DMatrix::zeros(slice_dim, slice_dim), |acc, (j, s)| {
                        acc + s * coeffs[(j, c)]
                    })
            })
            .collect();
        let triple = Self {
            name: name.to_string(),
            g,
            k,
            h,
            slice_dim,
            slice_gens: gens,
            v0: v0.clone(),
        };
        triple.check()?;
        Ok(triple)
    }

    /// `S_X`, the derivative of the slice representation, for `X ∈ 𝔨`.
    pub fn slice_action(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let c = self.k.basis().transpose() * x;
        self.slice_gens.iter().zip(c.iter()).fold(
            DMatrix::zeros(self.slice_dim, self.slice_dim),
            |acc, (s, ci)| acc + s * *ci,
        )
    }

    pub fn residuals(&self) -> TripleResiduals {
        let g = &self.g;
        let kb = self.k.basis();
        let mut antisymmetry = 0.0_f64;
        for s in &self.slice_gens {
            antisymmetry = antisymmetry.max(linalg::max_abs(&(s + s.transpose())));
        }
        let mut homomorphism = 0.0_f64;
        for i in 0..self.k.dim() {
            for j in (i + 1)..self.k.dim() {
                let br = g.bracket(&kb.column(i).into_owned(), &kb.column(j).into_owned());
                let lhs = self.slice_action(&br);
                let (si, sj) = (&self.slice_gens[i], &self.slice_gens[j]);
                homomorphism = homomorphism.max(linalg::max_abs(&(lhs - (si * sj - sj * si))));
            }
        }
        let mut isotropy = 0.0_f64;
        for i in 0..self.h.dim() {
            let s = self.slice_action(&self.h.vector(i));
            isotropy = isotropy.max((s * &self.v0).amax());
        }
        let speeds = DMatrix::from_columns(
            &self
                .slice_gens
                .iter()
                .map(|s| s * &self.v0)
                .collect::<Vec<_>>(),
        );
        let rank = if speeds.ncols() == 0 {
            0
        } else {
            linalg::numerical_rank(&speeds, 1e-10)
        };
        TripleResiduals {
            k_closure: self.k.closure_residual(g),
            h_closure: self.h.closure_residual(g),
            h_in_k: self.k.contains(&self.h),
            antisymmetry,
            homomorphism,
            isotropy,
            transitivity_defect: (self.slice_dim - 1).saturating_sub(rank),
        }
    }

    /// Verify subalgebras, isotropy of `v₀` and transitivity on `S(V)`.
    pub fn check(&self) -> Result<TripleResiduals> {
        let r = self.residuals();
        for (what, v) in [
            ("k closed under bracket", r.k_closure),
            ("h closed under bracket", r.h_closure),
            ("h contained in k", r.h_in_k),
            ("slice generators antisymmetric", r.antisymmetry),
            ("slice action is a homomorphism", r.homomorphism),
            ("h fixes v0", r.isotropy),
        ] {
            if v > TRIPLE_TOL {
                return Err(Error::invariant(what, v, TRIPLE_TOL));
            }
        }
        if r.transitivity_defect > 0 {
            return Err(Error::Hypothesis(format!(
                "slice action is not transitive on the unit sphere (rank defect {})",
                r.transitivity_defect
            )));
        }
        Ok(r)
    }

    /// `𝔭`: the `l`-orthogonal complement of `𝔥` in `𝔨`, `l`-orthonormal.
    pub fn p_space(&self, l: &DMatrix<f64>) -> Result<Subspace> {
        let h = self.h.with_metric(l)?;
        let proj = DMatrix::identity(self.g.dim(), self.g.dim()) - h.projector(l);
        let p = Subspace::new(&(proj * self.k.basis()), l)?;
        if p.dim() + self.h.dim() != self.k.dim() {
            return Err(Error::Numerical(
                "complement of h in k has the wrong dimension".into(),
            ));
        }
        Ok(p)
    }

    /// `𝔪`: the `l`-orthogonal complement of `𝔨` in `𝔤`, `l`-orthonormal.
    pub fn m_space(&self, l: &DMatrix<f64>) -> Result<Subspace> {
        crate::lie::orthogonal_complement(&self.k.with_metric(l)?, l)
    }

    /// `𝔥` with an `l`-orthonormal basis.
    pub fn h_space(&self, l: &DMatrix<f64>) -> Result<Subspace> {
        self.h.with_metric(l)
    }

    pub fn dim_p(&self) -> usize {
        self.k.dim() - self.h.dim()
    }

    pub fn dim_m(&self) -> usize {
        self.g.dim() - self.k.dim()
    }
}

/// `max_X ‖ad_Xᵀ L + L ad_X‖` over a basis of `𝔨`: zero iff `L` is `Ad_K`-invariant.
pub fn ad_k_residual(triple: &GroupTriple, l: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..triple.k.dim() {
        let ad = triple.g.ad(&triple.k.vector(i));
        worst = worst.max(linalg::max_abs(&(ad.transpose() * l + l * ad)));
    }
    worst
}

fn support(m: &CMatrix) -> Vec<usize> {
    (0..m.nrows())
        .filter(|&r| (0..m.ncols()).any(|c| m[(r, c)].norm() > 1e-14 || m[(c, r)].norm() > 1e-14))
        .collect()
}

/// Real form of a complex block acting on `ℂʳ ≅ ℝ²ʳ` (real parts first).
fn realify(m: &CMatrix, idx: &[usize]) -> DMatrix<f64> {
    let r = idx.len();
    let mut out = DMatrix::zeros(2 * r, 2 * r);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            let z: Complex<f64> = m[(i, j)];
            out[(a, b)] = z.re;
            out[(a + r, b + r)] = z.re;
            out[(a, b + r)] = -z.im;
            out[(a + r, b)] = z.im;
        }
    }
    out
}

/// Triple of a projective space: basis elements of the realization supported
/// on `last` span `𝔭`, those avoiding it span `𝔥`, and `K` acts on `V` through
/// the block at `last`.
fn projective_triple(name: &str, g: LieAlgebra, last: &[usize]) -> Result<GroupTriple> {
    let (mats, _) = g.realization().ok_or_else(|| {
        Error::InvalidParameter("projective triples need a matrix realization".into())
    })?;
    let mut h_idx = Vec::new();
    let mut p_idx = Vec::new();
    for (i, m) in mats.iter().enumerate() {
        let s = support(m);
        if s.iter().all(|x| last.contains(x)) {
            p_idx.push(i);
        } else if s.iter().all(|x| !last.contains(x)) {
            h_idx.push(i);
        }
    }
    let k_idx: Vec<usize> = h_idx.iter().chain(p_idx.iter()).copied().collect();
    let cols = |idx: &[usize]| {
        let v: Vec<DVector<f64>> = idx.iter().map(|&i| g.basis_vector(i)).collect();
        if v.is_empty() {
            DMatrix::zeros(g.dim(), 0)
        } else {
            DMatrix::from_columns(&v)
        }
    };
    let gens: Vec<DMatrix<f64>> = k_idx.iter().map(|&i| realify(&mats[i], last)).collect();
    let mut v0 = DVector::zeros(2 * last.len());
    v0[0] = 1.0;
    let (kc, hc) = (cols(&k_idx), cols(&h_idx));
    GroupTriple::explicit(name, g, &kc, &hc, &gens, &v0)
}

/// `𝔤 = ℝ²`, `𝔨 = ℝ·e₂` rotating `V = ℝ²` at unit speed, `𝔥 = 0`.
pub fn toy_triple() -> Result<GroupTriple> {
    let g = LieAlgebra::abelian(2, 1.0)?;
    let k = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
    let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let v0 = DVector::from_vec(vec![1.0, 0.0]);
    GroupTriple::explicit("toy", g, &k, &DMatrix::zeros(2, 0), &[j], &v0)
}

/// `CP_n` (`U(n) ⊃ U(n−1)U(1) ⊃ U(n−1)`, `V = ℂ`), `HP_n`
/// (`Sp(n) ⊃ Sp(n−1)Sp(1) ⊃ Sp(n−1)`, `V = ℍ`) or `toy`.
pub fn make_triple(name: &str) -> Result<GroupTriple> {
    if name == "toy" {
        return toy_triple();
    }
    let (kind, n) = name
        .split_once('_')
        .and_then(|(k, n)| n.parse::<usize>().ok().map(|n| (k, n)))
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown triple `{name}` (expected CP_n, HP_n or toy)"
            ))
        })?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "{kind}_n needs n ≥ 2, got {n}"
        )));
    }
    match kind {
        "CP" => projective_triple(name, make_algebra("u", n, 1.0)?, &[n - 1]),
        "HP" => projective_triple(name, make_algebra("sp", n, 1.0)?, &[n - 1, 2 * n - 1]),
        _ => Err(Error::InvalidParameter(format!(
            "unknown triple `{name}` (expected CP_n, HP_n or toy)"
        ))),
    }
}

/// The automorphism `B` of `𝔭` with `L(·, B·) = dθ²`.
#[derive(Debug, Clone)]
pub struct SliceB {
    /// Matrix of `B` in the `L`-orthonormal basis `p`.
    pub matrix: DMatrix<f64>,
    pub p: Subspace,
    /// `b` when `B = b·Id`.
    pub scalar: Option<f64>,
    /// `max |B − (tr B/dim 𝔭)·Id|`.
    pub schur_residual: f64,
}

pub fn compute_slice_b(triple: &GroupTriple, l: &DMatrix<f64>) -> Result<SliceB> {
    let p = triple.p_space(l)?;
    let dp = p.dim();
    let speeds: Vec<DVector<f64>> = (0..dp)
        .map(|i| triple.slice_action(&p.vector(i)) * &triple.v0)
        .collect();
    let matrix = DMatrix::from_fn(dp, dp, |i, j| speeds[i].dot(&speeds[j]));
    let lmin = linalg::lambda_min(&matrix);
    if dp == 0 || lmin <= 1e-12 * linalg::max_abs(&matrix).max(1.0) {
        return Err(Error::Hypothesis(format!(
            "degenerate slice: some nonzero X in p has X*(v0) = 0 (smallest speed² {lmin:e})"
        )));
    }
    let b = matrix.trace() / dp as f64;
    let schur_residual = linalg::max_abs(&(&matrix - DMatrix::identity(dp, dp) * b));
    let scalar = (schur_residual <= TRIPLE_TOL * b.max(1.0)).then_some(b);
    Ok(SliceB {
        matrix,
        p,
        scalar,
        schur_residual,
    })
}

fn sigma(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 / x - 1.0 / (1.0 - x)).exp())
    }
}

fn dsigma(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let s = sigma(x);
    if s == 0.0 || s == 1.0 {
        return 0.0;
    }
    s * (1.0 - s) * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x)))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Golub–Welsch).
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let (vals, vecs) = linalg::sym_eigen(&jac);
    let w = (0..n).map(|i| 2.0 * vecs[(0, i)] * vecs[(0, i)]).collect();
    (vals.iter().copied().collect(), w)
}

const GL_POINTS: usize = 16;
const GL_PANELS: usize = 128;

/// Odd concave warping function: `f′ = 1 − σ((t/t₀)^κ)` on `[0, t₀]` with
/// the smooth step `σ(x) = 1/(1 + exp(1/x − 1/(1−x)))`, `f′ = 0` beyond `t₀`,
/// and `κ` chosen so that `f(t₀) = a`.
#[derive(Debug, Clone)]
pub struct ProfileFunction {
    pub a: f64,
    pub t0: f64,
    pub t_max: f64,
    pub kappa: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ProfileFunction {
    fn integrate(&self, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
        let w = (hi - lo) / GL_PANELS as f64;
        let mut s = 0.0;
        for p in 0..GL_PANELS {
            let c = lo + (p as f64 + 0.5) * w;
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                s += wt * g(c + 0.5 * w * x);
            }
        }
        0.5 * w * s
    }

    fn fprime_k(&self, kappa: f64, t: f64) -> f64 {
        if t >= self.t0 {
            0.0
        } else {
            1.0 - sigma((t / self.t0).powf(kappa))
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        if t >= self.t0 {
            self.a
        } else if t <= 0.0 {
            0.0
        } else {
            self.integrate(0.0, t, |s| self.fprime_k(self.kappa, s))
        }
    }

    pub fn fprime(&self, t: f64) -> f64 {
        self.fprime_k(self.kappa, t.max(0.0))
    }

    pub fn fsecond(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.t0 {
            return 0.0;
        }
        let x = (t / self.t0).powf(self.kappa);
        -dsigma(x) * self.kappa * x / t
    }
}

impl WarpingProfile for ProfileFunction {
    fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !t.is_finite() || t.abs() > self.t_max {
            return Err(Error::InvalidParameter(format!(
                "profile evaluated at t = {t} outside [−{0}, {0}]",
                self.t_max
            )));
        }
        let s = t.abs();
        let sign = t.signum();
        Ok((sign * self.f(s), self.fprime(s), sign * self.fsecond(s)))
    }
}

/// Profile with plateau `a` from `t₀` on, defined on `[0, t_max]`.
pub fn make_profile(a: f64, t0: f64, t_max: f64) -> Result<ProfileFunction> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "plateau a must be positive, got {a}"
        )));
    }
    if !(t0 > a) {
        return Err(Error::InvalidParameter(format!(
            "infeasible profile: f′ ≤ 1 needs t₀ > a, got t₀ = {t0}, a = {a}"
        )));
    }
    if !(t_max > t0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need T > t₀, got T = {t_max}, t₀ = {t0}"
        )));
    }
    let (nodes, weights) = gauss_legendre(GL_POINTS);
    let mut prof = ProfileFunction {
        a,
        t0,
        t_max,
        kappa: 1.0,
        nodes,
        weights,
    };
    // ∫₀^{t₀} f′ increases with κ from 0 to t₀
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let k = mid.exp();
        let area = prof.integrate(0.0, t0, |s| prof.fprime_k(k, s));
        if area < a {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    prof.kappa = (0.5 * (lo + hi)).exp();
    let end = prof.integrate(0.0, t0, |s| prof.fprime_k(prof.kappa, s));
    if (end - a).abs() > 1e-10 * a.max(1.0) {
        return Err(Error::Numerical(format!(
            "profile plateau mismatch: f(t₀) = {end}, a = {a}"
        )));
    }
    prof.check()?;
    Ok(prof)
}

impl ProfileFunction {
    /// `f′(0) = 1`, `f > 0` and `f″ ≤ 1e−12` on 10³ samples, `f ≡ a` past `t₀`.
    pub fn check(&self) -> Result<()> {
        if (self.fprime(0.0) - 1.0).abs() > 1e-14 {
            return Err(Error::invariant(
                "f′(0) = 1",
                (self.fprime(0.0) - 1.0).abs(),
                1e-14,
            ));
        }
        for i in 1..=1000 {
            let t = self.t_max * i as f64 / 1000.0;
            let (f, _, f2) = self.eval(t)?;
            if !(f > 0.0) {
                return Err(Error::Hypothesis(format!(
                    "profile not positive at t = {t}"
                )));
            }
            if f2 > 1e-12 {
                return Err(Error::invariant("concavity of the profile", f2, 1e-12));
            }
            if t >= self.t0 && ((f - self.a).abs() > 0.0 || self.fprime(t) != 0.0) {
                return Err(Error::Hypothesis(format!(
                    "profile not constant at t = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// `n_geometric` points spaced geometrically on `[0.01·t₀, t₀]` followed by
/// `n_plateau` points in `(t₀, t_max)`.
pub fn sweep_points(t0: f64, t_max: f64, n_geometric: usize, n_plateau: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..n_geometric)
        .map(|i| {
            if n_geometric == 1 {
                t0
            } else {
                0.01 * t0 * 100f64.powf(i as f64 / (n_geometric - 1) as f64)
            }
        })
        .collect();
    ts.extend((1..=n_plateau).map(|j| t0 + (t_max - t0) * j as f64 / (n_plateau + 1) as f64));
    ts
}

/// `L + dt² + f²dθ²` on `G × V` with the data needed along the radial geodesic.
#[derive(Debug, Clone)]
pub struct HalfGeometry {
    pub triple: GroupTriple,
    pub l: DMatrix<f64>,
    pub m: Subspace,
    pub h: Subspace,
    pub slice_b: SliceB,
    /// Curvature form of `(G, L)` in algebra coordinates.
    pub r_g: SymmetricBivectorOperator,
    /// The submersion `(G, L) → G/H`.
    pub spec_gh: SubmersionSpec,
    pub r_gh: SymmetricBivectorOperator,
    pub ad_k_residual: f64,
    p_gens: Vec<DMatrix<f64>>,
}

/// Evaluation of the metric on `G ×_K V` at `[e, t·v₀]`.
#[derive(Debug, Clone)]
pub struct DiskBundle {
    pub t: f64,
    /// Curvature operator on `∧²ℋ` in the orthonormal frame `spec.horizontal`.
    pub r: SymmetricBivectorOperator,
    /// `ω_{G/H}(β₁) + 3𝔟(α)(β) − 3𝔟(α_{G/H})(β₁)`.
    pub omega: FourForm,
    pub spec: SubmersionSpec,
    /// `𝔤`-components of the horizontal frame in the `G/H` frame; `∧²` of it is `β ↦ β₁`.
    pub to_base: DMatrix<f64>,
    /// `R^{G/H} + O(ω_{G/H})`.
    pub base_modified: SymmetricBivectorOperator,
}

impl DiskBundle {
    pub fn modified(&self) -> SymmetricBivectorOperator {
        self.r.plus_form(&self.omega).expect("same frame")
    }

    /// `min_β ⟨(R+O(ω))β,β⟩ − ⟨(R^{G/H}+O(ω_{G/H}))β₁,β₁⟩` over unit Gaussian samples.
    pub fn chain_slack(&self, samples: usize, seed: u64) -> f64 {
        let m = self.modified();
        let w = wedge_map(&self.to_base);
        let mut rng = seeded(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let b = gaussian_vector(&mut rng, m.dim()).normalize();
            let b1 = &w * &b;
            let lhs = m.quadratic(&b);
            let rhs = self.base_modified.quadratic(&b1);
            worst = worst.min(lhs - rhs);
        }
        worst
    }
}

const FD_REL_STEP: f64 = 1e-3;

/// Value and partial derivatives (along the coordinate axes of `V`) of a
/// matrix-valued function of `v`, by fourth-order central differences.
fn jet(
    v: &DVector<f64>,
    step: f64,
    f: impl Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let value = f(v)?;
    let mut partials = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let at = |c: f64| {
            let mut w = v.clone();
            w[i] += c * step;
            f(&w)
        };
        let d = (at(-2.0)? - at(2.0)? + (at(1.0)? - at(-1.0)?) * 8.0) / (12.0 * step);
        partials.push(d);
    }
    Ok((value, partials))
}

impl HalfGeometry {
    /// Requires `L` positive-definite and `Ad_K`-invariant.
    pub fn new(triple: &GroupTriple, l: &DMatrix<f64>) -> Result<Self> {
        linalg::check_positive_definite(l)?;
        let ad_res = ad_k_residual(triple, l);
        let tol = TRIPLE_TOL * linalg::max_abs(l).max(1.0);
        if ad_res > tol {
            return Err(Error::invariant("Ad_K-invariance of L", ad_res, tol));
        }
        let m = triple.m_space(l)?;
        let h = triple.h_space(l)?;
        let slice_b = compute_slice_b(triple, l)?;
        let p_gens = (0..slice_b.p.dim())
            .map(|i| triple.slice_action(&slice_b.p.vector(i)))
            .collect();
        let r_g = left_invariant_r(&triple.g, l)?;
        let spec_gh = SubmersionSpec::homogeneous(&triple.g, l, r_g.clone(), h.basis())?;
        let r_gh = submersion_r(&spec_gh)?;
        Ok(Self {
            triple: triple.clone(),
            l: l.clone(),
            m,
            h,
            slice_b,
            r_g,
            spec_gh,
            r_gh,
            ad_k_residual: ad_res,
            p_gens,
        })
    }

    /// `S_X` for the `L`-orthonormal basis of `𝔭`.
    pub fn p_generators(&self) -> &[DMatrix<f64>] {
        &self.p_gens
    }

    fn d(&self) -> usize {
        self.triple.g.dim()
    }

    fn k(&self) -> usize {
        self.triple.slice_dim
    }

    /// `dt² + f²dθ²` at `v` in Euclidean coordinates.
    pub fn g_v(&self, f: &dyn WarpingProfile, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let r = v.norm();
        let (fv, _, _) = f.eval(r)?;
        let u = v / r;
        let radial = &u * u.transpose();
        let k = self.k();
        Ok(&radial + (DMatrix::identity(k, k) - &radial) * (fv / r).powi(2))
    }

    pub fn gram(&self, f: &dyn WarpingProfile, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (d, k) = (self.d(), self.k());
        let mut g = DMatrix::zeros(d + k, d + k);
        g.view_mut((0, 0), (d, d)).copy_from(&self.l);
        g.view_mut((d, d), (k, k)).copy_from(&self.g_v(f, v)?);
        Ok(g)
    }

    /// Columns `(Z, 0)` for `Z ∈ 𝔥` and `(−X, S_X v)` for `X ∈ 𝔭`.
    pub fn vertical(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let (d, k) = (self.d(), self.k());
        let (dh, dp) = (self.h.dim(), self.slice_b.p.dim());
        let mut out = DMatrix::zeros(d + k, dh + dp);
        for i in 0..dh {
            out.view_mut((0, i), (d, 1)).copy_from(&self.h.vector(i));
        }
        for j in 0..dp {
            out.view_mut((0, dh + j), (d, 1))
                .copy_from(&(-self.slice_b.p.vector(j)));
            out.view_mut((d, dh + j), (k, 1))
                .copy_from(&(&self.p_gens[j] * v));
        }
        out
    }

    pub fn horizontal_projector(
        &self,
        f: &dyn WarpingProfile,
        v: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        let n = self.d() + self.k();
        let pv = linalg::metric_projector(&self.vertical(v), &self.gram(f, v)?)?;
        Ok(DMatrix::identity(n, n) - pv)
    }

    /// Natural horizontal fields at `v`: `(m_i, 0)`, the projection of
    /// `(f²B p_j, S_{p_j} v)`, and the radial field `(0, v/|v|)`.
    fn natural_fields(&self, f: &dyn WarpingProfile, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (d, k) = (self.d(), self.k());
        let (dm, dp) = (self.m.dim(), self.slice_b.p.dim());
        let (fv, _, _) = f.eval(v.norm())?;
        let ph = self.horizontal_projector(f, v)?;
        let mut out = DMatrix::zeros(d + k, dm + dp + 1);
        for i in 0..dm {
            out.view_mut((0, i), (d, 1)).copy_from(&self.m.vector(i));
        }
        let p = self.slice_b.p.basis();
        for j in 0..dp {
            let mut w = DVector::zeros(d + k);
            let bp = p * self.slice_b.matrix.column(j) * (fv * fv);
            w.rows_mut(0, d).copy_from(&bp);
            w.rows_mut(d, k).copy_from(&(&self.p_gens[j] * v));
            out.set_column(dm + j, &(&ph * w));
        }
        out.view_mut((d, dm + dp), (k, 1))
            .copy_from(&(v / v.norm()));
        Ok(out)
    }

    /// Vertical and horizontal spaces at `(e, t·v₀)`.
    pub fn vh_split(&self, f: &dyn WarpingProfile, t: f64) -> Result<VhSplit> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {t}"
            )));
        }
        let v = &self.triple.v0 * t;
        let gram = self.gram(f, &v)?;
        let vertical = self.vertical(&v);
        let (fv, _, _) = f.eval(t)?;
        // unprojected natural fields, so that orthogonality is a genuine check
        let (d, k) = (self.d(), self.k());
        let (dm, dp) = (self.m.dim(), self.slice_b.p.dim());
        let mut horizontal = DMatrix::zeros(d + k, dm + dp + 1);
        for i in 0..dm {
            horizontal
                .view_mut((0, i), (d, 1))
                .copy_from(&self.m.vector(i));
        }
        for j in 0..dp {
            let bp = self.slice_b.p.basis() * self.slice_b.matrix.column(j) * (fv * fv);
            horizontal.view_mut((0, dm + j), (d, 1)).copy_from(&bp);
            horizontal
                .view_mut((d, dm + j), (k, 1))
                .copy_from(&(&self.p_gens[j] * &v));
        }
        horizontal
            .view_mut((d, dm + dp), (k, 1))
            .copy_from(&self.triple.v0);
        let orth = linalg::max_abs(&(horizontal.transpose() * &gram * &vertical));
        let scale = linalg::max_abs(&gram).max(1.0) * (1.0 + fv * fv).powi(2);
        if orth > 1e-10 * scale {
            return Err(Error::invariant(
                "vertical ⟂ horizontal",
                orth,
                1e-10 * scale,
            ));
        }
        let total = linalg::numerical_rank(
            &DMatrix::from_columns(
                &vertical
                    .column_iter()
                    .chain(horizontal.column_iter())
                    .map(|c| c.into_owned())
                    .collect::<Vec<_>>(),
            ),
            1e-10,
        );
        if total != d + k {
            return Err(Error::Numerical(format!(
                "vertical ⊕ horizontal has rank {total}, expected {}",
                d + k
            )));
        }
        Ok(VhSplit {
            gram,
            vertical,
            horizontal,
            orthogonality_residual: orth,
            dim_m: dm,
            dim_p: dp,
        })
    }

    /// Curvature form of `G × V` at `(e, t·v₀)` in ambient coordinates.
    fn ambient_r(&self, f: &dyn WarpingProfile, t: f64) -> Result<SymmetricBivectorOperator> {
        let k = self.k();
        let (fv, _, _) = f.eval(t)?;
        let rv = rotsym_r(f, t, k)?;
        // frame {∂t, angular orthonormal}: v₀ then an orthonormal basis of v₀^⟂
        let mut cols = vec![self.triple.v0.clone()];
        for i in 0..k {
            let mut e = DVector::zeros(k);
            e[i] = 1.0;
            cols.push(e);
        }
        let basis = linalg::gram_schmidt(
            &DMatrix::from_columns(&cols),
            &DMatrix::identity(k, k),
            1e-8,
        );
        let mut frame = basis.clone();
        for c in 1..k {
            let col = basis.column(c) * (t / fv);
            frame.set_column(c, &col);
        }
        let rv_coords = to_coordinates(&rv, &frame)?;
        Ok(product_r(&self.r_g, &rv_coords))
    }

    /// Horizontal extensions: brackets of the orthonormal horizontal frame
    /// fields, extended as constant combinations of the natural fields.
    fn frame_brackets(
        &self,
        f: &dyn WarpingProfile,
        v: &DVector<f64>,
        extension: &dyn Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
    ) -> Result<DMatrix<f64>> {
        let (d, k) = (self.d(), self.k());
        let (fields, partials) = jet(v, FD_REL_STEP * v.norm(), extension)?;
        let _ = f;
        let nh = fields.ncols();
        let frame = BivectorFrame::new(nh);
        let mut out = DMatrix::zeros(d + k, frame.dim());
        let dir = |col: usize, w: &DVector<f64>| -> DVector<f64> {
            let mut acc = DVector::zeros(d + k);
            for (i, p) in partials.iter().enumerate() {
                acc += p.column(col) * w[i];
            }
            acc
        };
        for (c, (i, j)) in frame.pairs().into_iter().enumerate() {
            let xi = fields.column(i).into_owned();
            let xj = fields.column(j).into_owned();
            let ui = xi.rows(d, k).into_owned();
            let uj = xj.rows(d, k).into_owned();
            let mut b = dir(j, &ui) - dir(i, &uj);
            let gb = self
                .triple
                .g
                .bracket(&xi.rows(0, d).into_owned(), &xj.rows(0, d).into_owned());
            let top = b.rows(0, d) + gb;
            b.rows_mut(0, d).copy_from(&top);
            out.set_column(c, &b);
        }
        Ok(out)
    }

    /// Orthonormal horizontal frame at `t·v₀` (columns) and its expression
    /// `T` in the natural fields (`frame = natural·T`).
    fn horizontal_frame(
        &self,
        f: &dyn WarpingProfile,
        t: f64,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let v = &self.triple.v0 * t;
        let nat = self.natural_fields(f, &v)?;
        let gram = self.gram(f, &v)?;
        let frame = linalg::gram_schmidt(&nat, &gram, 1e-10);
        if frame.ncols() != nat.ncols() {
            return Err(Error::Numerical(
                "natural horizontal fields are dependent".into(),
            ));
        }
        let nn = nat.transpose() * &gram * &nat;
        let tmat = nn
            .try_inverse()
            .ok_or_else(|| Error::Numerical("natural horizontal fields are dependent".into()))?
            * nat.transpose()
            * &gram
            * &frame;
        Ok((frame, tmat))
    }

    /// The submersion `G × V → G ×_K V` at `(e, t·v₀)` with `A` computed from
    /// the natural horizontal extensions.
    pub fn submersion_at(&self, f: &dyn WarpingProfile, t: f64) -> Result<SubmersionSpec> {
        self.vh_split(f, t)?;
        let v = &self.triple.v0 * t;
        let gram = self.gram(f, &v)?;
        let vertical = self.vertical(&v);
        let (frame, tmat) = self.horizontal_frame(f, t)?;
        let ext =
            |w: &DVector<f64>| -> Result<DMatrix<f64>> { Ok(self.natural_fields(f, w)? * &tmat) };
        let brackets = self.frame_brackets(f, &v, &ext)?;
        let pv = linalg::metric_projector(&vertical, &gram)?;
        let a_values = pv * brackets * 0.5;
        let spec = SubmersionSpec {
            gram,
            ambient_r: self.ambient_r(f, t)?,
            vertical,
            horizontal: frame,
            a_values,
        };
        spec.check()?;
        Ok(spec)
    }

    /// `max |A − A′|` where `A′` uses the extensions `P_H(v)(X + M(v − t·v₀))`
    /// with random `M`, i.e. different horizontal fields through the same point.
    pub fn tensoriality_residual(&self, f: &dyn WarpingProfile, t: f64, seed: u64) -> Result<f64> {
        let spec = self.submersion_at(f, t)?;
        let v = &self.triple.v0 * t;
        let n = self.d() + self.k();
        let nh = spec.base_dim();
        let mut rng = seeded(seed);
        let perturb: Vec<DMatrix<f64>> = (0..nh)
            .map(|_| {
                DMatrix::from_column_slice(
                    n,
                    self.k(),
                    gaussian_vector(&mut rng, n * self.k()).as_slice(),
                )
            })
            .collect();
        let base = spec.horizontal.clone();
        let ext = |w: &DVector<f64>| -> Result<DMatrix<f64>> {
            let ph = self.horizontal_projector(f, w)?;
            let dv = w - &v;
            let mut out = DMatrix::zeros(n, nh);
            for i in 0..nh {
                out.set_column(i, &(&ph * (base.column(i) + &perturb[i] * &dv)));
            }
            Ok(out)
        };
        let brackets = self.frame_brackets(f, &v, &ext)?;
        let pv = linalg::metric_projector(&spec.vertical, &spec.gram)?;
        let a2 = pv * brackets * 0.5;
        Ok(linalg::max_abs(&(a2 - &spec.a_values)))
    }

    /// Curvature and explicit modifier of `G ×_K V` at radius `t`, given a
    /// modifier `ω_{G/H}` for the principal orbit (in the frame of `spec_gh`).
    pub fn disk_bundle(
        &self,
        f: &dyn WarpingProfile,
        t: f64,
        omega_gh: &FourForm,
    ) -> Result<DiskBundle> {
        omega_gh.frame().check_same(self.r_gh.frame())?;
        let spec = self.submersion_at(f, t)?;
        let r = submersion_r(&spec)?;
        let d = self.d();
        let top = spec.horizontal.rows(0, d).into_owned();
        let to_base = self.spec_gh.horizontal.transpose() * &self.l * &top;
        let back = &self.spec_gh.horizontal * &to_base;
        let off = linalg::max_abs(&(back - &top));
        if off > 1e-9 * linalg::max_abs(&top).max(1.0) {
            return Err(Error::invariant(
                "G-components of horizontal vectors lie in m ⊕ p",
                off,
                1e-9,
            ));
        }
        let alpha_gh = self.spec_gh.alpha();
        let base_form = fourform_to_operator(omega_gh, self.r_gh.frame())?
            .sub(&alpha_gh.bianchi().to_operator().scaled(3.0))?;
        let pulled = base_form.pullback(&to_base)?.bianchi();
        let omega = pulled.add(&spec.alpha().bianchi().scaled(3.0))?;
        let base_modified = self.r_gh.plus_form(omega_gh)?;
        Ok(DiskBundle {
            t,
            r,
            omega,
            spec,
            to_base,
            base_modified,
        })
    }

    /// Principal-orbit metric at `f(t) = fv` in the basis `[𝔪, 𝔭]` (`L`-orthonormal).
    pub fn orbit_metric(&self, fv: f64) -> Result<DMatrix<f64>> {
        let n = self.m.dim() + self.slice_b.p.dim();
        orbit_metric_c_at(
            &DMatrix::identity(n, n),
            self.m.dim(),
            &self.slice_b.matrix,
            fv,
        )
    }

    /// `[𝔪, 𝔭]` basis used by [`Self::orbit_metric`], as columns.
    pub fn orbit_basis(&self) -> DMatrix<f64> {
        let mut cols: Vec<DVector<f64>> = (0..self.m.dim()).map(|i| self.m.vector(i)).collect();
        cols.extend((0..self.slice_b.p.dim()).map(|i| self.slice_b.p.vector(i)));
        DMatrix::from_columns(&cols)
    }
}

/// Spaces of `T(G × V)` at `(e, t·v₀)`.
#[derive(Debug, Clone)]
pub struct VhSplit {
    pub gram: DMatrix<f64>,
    /// `(Z, 0)` for `Z ∈ 𝔥`, then `(−X, X*)` for `X ∈ 𝔭`.
    pub vertical: DMatrix<f64>,
    /// `(m_i, 0)`, then `(f²BY, Y*)` for `Y ∈ 𝔭`, then `∂/∂t`.
    pub horizontal: DMatrix<f64>,
    pub orthogonality_residual: f64,
    pub dim_m: usize,
    pub dim_p: usize,
}

pub fn vh_split(
    triple: &GroupTriple,
    l: &DMatrix<f64>,
    f: &dyn WarpingProfile,
    t: f64,
) -> Result<VhSplit> {
    HalfGeometry::new(triple, l)?.vh_split(f, t)
}

/// `(R, ω)` on `∧²ℋ` at radius `t`; requires a Feasible certificate for the
/// principal orbit `(G/H, L)` computed in the frame of `SubmersionSpec::homogeneous`.
pub fn disk_bundle_r(
    triple: &GroupTriple,
    l: &DMatrix<f64>,
    f: &dyn WarpingProfile,
    t: f64,
    gh_certificate: &Certificate,
) -> Result<DiskBundle> {
    let geom = HalfGeometry::new(triple, l)?;
    let omega = gh_omega(&geom, gh_certificate)?;
    geom.disk_bundle(f, t, &omega)
}

fn gh_omega(geom: &HalfGeometry, cert: &Certificate) -> Result<FourForm> {
    if cert.verdict != Verdict::Feasible || !validate_certificate(&geom.r_gh, cert) {
        return Err(Error::Hypothesis(
            "no validated strong-nonnegativity certificate for the principal orbit".into(),
        ));
    }
    match &cert.omega {
        Some(w) => Ok(w.clone()),
        None => Ok(FourForm::zero(geom.r_gh.frame())),
    }
}

/// `L = Q` on `𝔪 ⊕ 𝔥` and `λ·Q` on `𝔭`.
fn l_with_p_scale(triple: &GroupTriple, lambda: f64) -> Result<DMatrix<f64>> {
    let q = triple.g.q();
    let p = triple.p_space(&q)?;
    Ok(&q + p.basis() * p.basis().transpose() * (lambda - 1.0))
}

/// Metric on `𝔤` inducing a constant-curvature metric on `G/H`.
#[derive(Debug, Clone)]
pub struct RoundMetric {
    pub l: DMatrix<f64>,
    /// Factor on `𝔭`.
    pub lambda: f64,
    pub mean_sec: f64,
    pub variance: f64,
    pub ad_k_residual: f64,
}

fn sec_samples(
    triple: &GroupTriple,
    l: &DMatrix<f64>,
    planes: &[(DVector<f64>, DVector<f64>)],
) -> Result<Vec<f64>> {
    let r_g = left_invariant_r(&triple.g, l)?;
    let h = triple.h_space(l)?;
    let spec = SubmersionSpec::homogeneous(&triple.g, l, r_g, h.basis())?;
    let r = submersion_r(&spec)?;
    planes
        .iter()
        .map(|(x, y)| sectional_curvature(&r, x, y))
        .collect()
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (mean, v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

fn random_planes(dim: usize, count: usize, seed: u64) -> Vec<(DVector<f64>, DVector<f64>)> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| {
            (
                gaussian_vector(&mut rng, dim),
                gaussian_vector(&mut rng, dim),
            )
        })
        .collect()
}

/// Scale `𝔭` so that the induced metric on `G/H` has constant sectional
/// curvature: the variance of `sec` over sampled planes is minimized by
/// golden-section search in `log λ ∈ [log 0.1, log 10]`.
pub fn make_round_l(triple: &GroupTriple) -> Result<RoundMetric> {
    let dim = triple.dim_m() + triple.dim_p();
    if dim < 2 {
        return Err(Error::Hypothesis(
            "principal orbit has dimension below 2".into(),
        ));
    }
    let search = random_planes(dim, 64, 11);
    let var_at = |u: f64| -> Result<f64> {
        let l = l_with_p_scale(triple, u.exp())?;
        Ok(mean_var(&sec_samples(triple, &l, &search)?).1)
    };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.1f64.ln(), 10f64.ln());
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (var_at(c)?, var_at(d)?);
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = var_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = var_at(d)?;
        }
    }
    let lambda = (0.5 * (a + b)).exp();
    let l = l_with_p_scale(triple, lambda)?;
    let (mean_sec, variance) = mean_var(&sec_samples(triple, &l, &random_planes(dim, 1000, 12))?);
    if variance > 1e-9 * mean_sec.abs() {
        return Err(Error::Hypothesis(format!(
            "no scaling of p gives constant curvature on G/H (variance {variance:e}, mean {mean_sec:e})"
        )));
    }
    let ad = ad_k_residual(triple, &l);
    if ad > 1e-12 {
        return Err(Error::invariant(
            "Ad_K-invariance of the round metric",
            ad,
            1e-12,
        ));
    }
    Ok(RoundMetric {
        l,
        lambda,
        mean_sec,
        variance,
        ad_k_residual: ad,
    })
}

/// One radius of an assembly sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub t: f64,
    /// `λ_min(R + O(ω))`.
    pub margin: f64,
    /// Worst sampled slack of the lower-bound chain (Cheeger halves).
    pub chain_slack: Option<f64>,
}

fn run_sweep(
    geom: &HalfGeometry,
    f: &ProfileFunction,
    ts: &[f64],
    omega: impl Fn(&HalfGeometry, f64) -> Result<(SymmetricBivectorOperator, Option<f64>)> + Sync,
) -> Result<(Vec<SweepPoint>, Vec<SymmetricBivectorOperator>)> {
    let _ = f;
    let out: Vec<Result<(SweepPoint, SymmetricBivectorOperator)>> = ts
        .par_iter()
        .map(|&t| {
            let (m, slack) = omega(geom, t)?;
            Ok((
                SweepPoint {
                    t,
                    margin: m.lambda_min(),
                    chain_slack: slack,
                },
                m,
            ))
        })
        .collect();
    let mut pts = Vec::with_capacity(ts.len());
    let mut ops = Vec::with_capacity(ts.len());
    for r in out {
        let (p, m) = r?;
        pts.push(p);
        ops.push(m);
    }
    Ok((pts, ops))
}

fn plateau_spread(ts: &[f64], ops: &[SymmetricBivectorOperator], t0: f64) -> f64 {
    let plateau: Vec<&SymmetricBivectorOperator> = ts
        .iter()
        .zip(ops)
        .filter(|(t, _)| **t >= t0)
        .map(|(_, o)| o)
        .collect();
    plateau
        .iter()
        .skip(1)
        .map(|o| linalg::max_abs(&(o.entries() - plateau[0].entries())))
        .fold(0.0, f64::max)
}

/// Report of the codimension-two half with the scaled-up bi-invariant metric.
#[derive(Debug, Clone, Serialize)]
pub struct GzReport {
    pub triple: String,
    pub b: f64,
    pub a: f64,
    pub e: f64,
    pub ad_k_residual: f64,
    pub certificate: Certificate,
    pub certificate_validated: bool,
    /// Curvature operator of `(G, L′)` the certificate refers to.
    #[serde(skip)]
    pub certified: SymmetricBivectorOperator,
    /// Largest deviation of the plateau orbit metric from `Q|𝔪⊕𝔭`.
    pub boundary_residual: f64,
    pub sweep: Vec<SweepPoint>,
    pub min_margin: f64,
    pub plateau_spread: f64,
    pub passed: bool,
    pub failures: Vec<String>,
    /// Plateau orbit metric on `𝔥^⟂`, as a Gram matrix in algebra coordinates.
    #[serde(skip)]
    pub boundary_metric: DMatrix<f64>,
}

/// Half with `L′ = Q(·, E·)`, `E = diag(Id, a²b/(a²b−1), Id)` on `𝔪 ⊕ 𝔭 ⊕ 𝔥`.
pub fn assemble_gz_half(
    triple: &GroupTriple,
    f: &ProfileFunction,
    opts: &CertifyOptions,
) -> Result<GzReport> {
    let q = triple.g.q();
    if triple.dim_p() != 1 {
        return Err(Error::Hypothesis(format!(
            "codimension-two half needs dim p = 1, got {}",
            triple.dim_p()
        )));
    }
    let sb = compute_slice_b(triple, &q)?;
    let p = sb.p.clone();
    p.check_abelian(&triple.g)?;
    let b = sb.scalar.expect("one-dimensional B is scalar");
    let a = f.a;
    if a * a * b < 4.0 * (1.0 - 1e-12) {
        return Err(Error::Hypothesis(format!(
            "plateau a = {a} is below 2/√b = {}",
            2.0 / b.sqrt()
        )));
    }
    let e = scale_up_e(a, b)?;
    let l = &q + p.basis() * p.basis().transpose() * (e - 1.0);
    let geom = HalfGeometry::new(triple, &l)?;
    let mut failures = Vec::new();
    if geom.ad_k_residual > 1e-12 {
        failures.push(format!("Ad_K residual {:e}", geom.ad_k_residual));
    }
    let scaled = scaled_up_r(&triple.g, &p, e)?;
    let certificate = certify_with(
        &scaled.r_t,
        &CertifyOptions {
            warm_start: Some(scaled.omega_t.clone()),
            ..opts.clone()
        },
    )?;
    let validated = validate_certificate(&scaled.r_t, &certificate);
    if certificate.verdict != Verdict::Feasible || !validated {
        failures.push(format!(
            "(G, L′) not certified: {:?}, validated {validated}",
            certificate.verdict
        ));
    }
    let ts = sweep_points(f.t0, f.t_max, 40, 5);
    // plateau orbit metric versus Q on 𝔪 ⊕ 𝔭
    let basis = geom.orbit_basis();
    let target = basis.transpose() * &q * &basis;
    let mut boundary_residual = 0.0_f64;
    let mut boundary_metric = DMatrix::zeros(q.nrows(), q.ncols());
    for &t in ts.iter().filter(|&&t| t >= f.t0) {
        let c = geom.orbit_metric(f.eval(t)?.0)?;
        boundary_residual = boundary_residual.max(linalg::max_abs(&(&c - &target)));
        let inv = basis
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Numerical(e.to_string()))?;
        boundary_metric = inv.transpose() * &c * inv;
    }
    if boundary_residual > 1e-10 {
        failures.push(format!(
            "boundary metric deviates from Q by {boundary_residual:e}"
        ));
    }
    // transfer of the explicit modifier of (G, L′) through G × V → G ×_K V
    let frame_inv = scaled
        .frame
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("scaled frame".into()))?;
    let omega_g =
        fourform_to_operator(&scaled.omega_t, scaled.r_t.frame())?.pullback(&frame_inv)?;
    let (d, k) = (triple.g.dim(), triple.slice_dim);
    let mut embed = DMatrix::zeros(d, d + k);
    embed.view_mut((0, 0), (d, d)).fill_with_identity();
    let ambient_omega = omega_g.pullback(&embed)?.bianchi();
    let (sweep, ops) = run_sweep(&geom, f, &ts, |g, t| {
        let spec = g.submersion_at(f, t)?;
        let r = submersion_r(&spec)?;
        let w = spec.pushed_modifier(&ambient_omega)?;
        Ok((r.plus_form(&w)?, None))
    })?;
    let min_margin = sweep.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    if min_margin < -1e-8 {
        failures.push(format!(
            "modified curvature of the half has λ_min {min_margin:e}"
        ));
    }
    let spread = plateau_spread(&ts, &ops, f.t0);
    if spread > 1e-9 {
        failures.push(format!("plateau operators differ by {spread:e}"));
    }
    Ok(GzReport {
        triple: triple.name.clone(),
        b,
        a,
        e,
        ad_k_residual: geom.ad_k_residual,
        certificate,
        certificate_validated: validated,
        certified: scaled.r_t.clone(),
        boundary_residual,
        sweep,
        min_margin,
        plateau_spread: spread,
        passed: failures.is_empty(),
        failures,
        boundary_metric,
    })
}

/// Boundary data of the codimension-one (exceptional) half: the product
/// `Q + dt²` near `G/H`.
#[derive(Debug, Clone)]
pub struct ExceptionalHalf {
    /// Normal homogeneous metric on `𝔥^⟂` as a Gram matrix in algebra coordinates.
    pub boundary_metric: DMatrix<f64>,
    /// Curvature of `G/H × ℝ`: the principal orbit plus a flat line.
    pub r: SymmetricBivectorOperator,
}

pub fn assemble_exceptional_half(g: &LieAlgebra, h: &Subspace) -> Result<ExceptionalHalf> {
    let q = g.q();
    let spec = SubmersionSpec::homogeneous(g, &q, left_invariant_r(g, &q)?, h.basis())?;
    let r_gh = submersion_r(&spec)?;
    let line = SymmetricBivectorOperator::zero(1);
    let hb = &spec.horizontal;
    Ok(ExceptionalHalf {
        boundary_metric: hb * hb.transpose(),
        r: product_r(&r_gh, &line),
    })
}

/// Settings of the strongly-positive half construction.
#[derive(Debug, Clone)]
pub struct CheegerOptions {
    /// Plateau values tried, as multiples of `1/√b`.
    pub ladder: Vec<f64>,
    /// `t₀ = t0_ratio·a`.
    pub t0_ratio: f64,
    /// `T = t_max_ratio·t₀`.
    pub t_max_ratio: f64,
    pub n_geometric: usize,
    pub n_plateau: usize,
    pub chain_samples: usize,
    pub certify: CertifyOptions,
}

impl Default for CheegerOptions {
    fn default() -> Self {
        Self {
            ladder: vec![2.0, 4.0, 8.0],
            t0_ratio: 1.5,
            t_max_ratio: 2.0,
            n_geometric: 40,
            n_plateau: 5,
            chain_samples: 200,
            certify: CertifyOptions::default(),
        }
    }
}

/// One rung of the plateau ladder.
#[derive(Debug, Clone, Serialize)]
pub struct LadderRung {
    pub a: f64,
    pub e: f64,
    pub verdict: Verdict,
    pub margin: Option<f64>,
    pub eps: f64,
    pub strict: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheegerReport {
    pub triple: String,
    pub lambda: f64,
    pub round_mean_sec: f64,
    pub round_variance: f64,
    pub b: f64,
    pub ladder: Vec<LadderRung>,
    /// Index of the first strictly positive rung.
    pub chosen: Option<usize>,
    pub t0: Option<f64>,
    pub t_max: Option<f64>,
    pub kappa: Option<f64>,
    pub sweep: Vec<SweepPoint>,
    pub min_margin: Option<f64>,
    pub min_chain_slack: Option<f64>,
    pub plateau_spread: Option<f64>,
    /// Largest deviation of the plateau orbit metric from the round one.
    pub boundary_residual: Option<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Strongly nonnegative half, product with a round cylinder near the boundary.
pub fn assemble_cheeger_half(triple: &GroupTriple, opts: &CheegerOptions) -> Result<CheegerReport> {
    let round = make_round_l(triple)?;
    let sb = compute_slice_b(triple, &round.l)?;
    let b = sb.scalar.ok_or_else(|| {
        Error::Hypothesis(format!(
            "B is not scalar (Schur residual {:e})",
            sb.schur_residual
        ))
    })?;
    let p = sb.p.clone();
    let mut ladder = Vec::new();
    let mut chosen = None;
    for (i, c) in opts.ladder.iter().enumerate() {
        let a = c / b.sqrt();
        let e = scale_up_e(a, b)?;
        let l = &round.l + &round.l * p.basis() * p.basis().transpose() * &round.l * (e - 1.0);
        let geom = HalfGeometry::new(triple, &l)?;
        let cert = certify_with(&geom.r_gh, &opts.certify)?;
        let strict = cert.verdict == Verdict::Feasible
            && cert.margin.is_some_and(|m| m > cert.eps)
            && validate_certificate(&geom.r_gh, &cert);
        ladder.push(LadderRung {
            a,
            e,
            verdict: cert.verdict,
            margin: cert.margin,
            eps: cert.eps,
            strict,
        });
        if strict {
            chosen = Some((i, geom, cert));
            break;
        }
    }
    let mut report = CheegerReport {
        triple: triple.name.clone(),
        lambda: round.lambda,
        round_mean_sec: round.mean_sec,
        round_variance: round.variance,
        b,
        ladder,
        chosen: None,
        t0: None,
        t_max: None,
        kappa: None,
        sweep: Vec::new(),
        min_margin: None,
        min_chain_slack: None,
        plateau_spread: None,
        boundary_residual: None,
        passed: false,
        failures: Vec::new(),
    };
    let Some((idx, geom, cert)) = chosen else {
        report
            .failures
            .push("no plateau in the ladder gives a strictly positive principal orbit".into());
        return Ok(report);
    };
    let a = report.ladder[idx].a;
    let t0 = opts.t0_ratio * a;
    let f = make_profile(a, t0, opts.t_max_ratio * t0)?;
    let omega_gh = gh_omega(&geom, &cert)?;
    let ts = sweep_points(t0, f.t_max, opts.n_geometric, opts.n_plateau);
    let (sweep, ops) = run_sweep(&geom, &f, &ts, |g, t| {
        let db = g.disk_bundle(&f, t, &omega_gh)?;
        let slack = db.chain_slack(opts.chain_samples, 7);
        Ok((db.modified(), Some(slack)))
    })?;
    let min_margin = sweep.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    let min_slack = sweep
        .iter()
        .filter_map(|p| p.chain_slack)
        .fold(f64::INFINITY, f64::min);
    if min_margin < -1e-8 {
        report
            .failures
            .push(format!("λ_min(R + O(ω)) = {min_margin:e} on the sweep"));
    }
    if min_slack < -1e-8 {
        report
            .failures
            .push(format!("lower-bound chain violated by {min_slack:e}"));
    }
    let spread = plateau_spread(&ts, &ops, t0);
    if spread > 1e-9 {
        report
            .failures
            .push(format!("plateau operators differ by {spread:e}"));
    }
    let basis = geom.orbit_basis();
    let target = basis.transpose() * &round.l * &basis;
    let mut boundary = 0.0_f64;
    for &t in ts.iter().filter(|&&t| t >= t0) {
        let c = geom.orbit_metric(f.eval(t)?.0)?;
        boundary = boundary.max(linalg::max_abs(&(c - &target)));
    }
    if boundary > 1e-9 {
        report.failures.push(format!(
            "plateau orbit metric deviates from the round one by {boundary:e}"
        ));
    }
    report.chosen = Some(idx);
    report.t0 = Some(t0);
    report.t_max = Some(f.t_max);
    report.kappa = Some(f.kappa);
    report.sweep = sweep;
    report.min_margin = Some(min_margin);
    report.min_chain_slack = Some(min_slack);
    report.plateau_spread = Some(spread);
    report.boundary_residual = Some(boundary);
    report.passed = report.failures.is_empty();
    Ok(report)
}
