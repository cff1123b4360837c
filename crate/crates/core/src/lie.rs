//! Lie algebras in a basis orthonormal for an ad-invariant inner product `Q`,
//! classical matrix families, subspaces and metric complements.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

pub type CMatrix = DMatrix<Complex<f64>>;

/// Residual ceiling for structural identities (Jacobi, ad-invariance, closure).
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Residual ceiling for orthonormality of constructed bases.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// A real Lie algebra stored by structure constants `[e_i, e_j] = Σ_k c_ij^k e_k`
/// in a basis that is orthonormal for its bi-invariant inner product `Q`.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    consts: Vec<f64>,
    labels: Vec<String>,
    family: String,
    /// Matrix realization of the basis together with the trace scale `s`
    /// in `Q(X,Y) = −(s/2)·Re tr(XY)`.
    realization: Option<(Vec<CMatrix>, f64)>,
}

fn cm_zero(n: usize) -> CMatrix {
    DMatrix::from_element(n, n, Complex::new(0.0, 0.0))
}

fn unit(n: usize, i: usize, j: usize, z: Complex<f64>) -> CMatrix {
    let mut m = cm_zero(n);
    m[(i, j)] = z;
    m
}

fn re_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

fn skew_hermitian_basis(n: usize, traceless: bool) -> Vec<CMatrix> {
    let one = Complex::new(1.0, 0.0);
    let i_ = Complex::new(0.0, 1.0);
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(unit(n, i, j, one) - unit(n, j, i, one));
            out.push(unit(n, i, j, i_) + unit(n, j, i, i_));
        }
    }
    if traceless {
        for k in 0..n.saturating_sub(1) {
            out.push(unit(n, k, k, i_) - unit(n, k + 1, k + 1, i_));
        }
    } else {
        for k in 0..n {
            out.push(unit(n, k, k, i_));
        }
    }
    out
}

/// `sp(n)` as complex `2n×2n` matrices `[[A, −B̄], [B, Ā]]`, `A ∈ u(n)`, `B = Bᵀ`.
fn sp_basis(n: usize) -> Vec<CMatrix> {
    let embed = |a: &CMatrix, b: &CMatrix| -> CMatrix {
        let mut m = cm_zero(2 * n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = a[(r, c)];
                m[(r + n, c + n)] = a[(r, c)].conj();
                m[(r + n, c)] = b[(r, c)];
                m[(r, c + n)] = -b[(r, c)].conj();
            }
        }
        m
    };
    let zero = cm_zero(n);
    let mut out: Vec<CMatrix> = skew_hermitian_basis(n, false)
        .iter()
        .map(|a| embed(a, &zero))
        .collect();
    let one = Complex::new(1.0, 0.0);
    let i_ = Complex::new(0.0, 1.0);
    for i in 0..n {
        for j in i..n {
            for z in [one, i_] {
                let b = if i == j {
                    unit(n, i, i, z)
                } else {
                    unit(n, i, j, z) + unit(n, j, i, z)
                };
                out.push(embed(&zero, &b));
            }
        }
    }
    out
}

fn so_basis(n: usize) -> Vec<CMatrix> {
    let one = Complex::new(1.0, 0.0);
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(unit(n, i, j, one) - unit(n, j, i, one));
        }
    }
    if n == 3 {
        // Hodge-dual ordering: [e1, e2] = e3 with e1 = L23, e2 = L13, e3 = L12.
        out.reverse();
    }
    out
}

impl LieAlgebra {
    /// Build from spanning matrices, orthonormalizing for `Q = −(s/2)·Re tr(XY)`.
    pub fn from_matrices(spanning: Vec<CMatrix>, scale: f64, family: &str) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let q = |a: &CMatrix, b: &CMatrix| -0.5 * scale * re_trace_product(a, b);
        let mut basis: Vec<CMatrix> = Vec::new();
        for m in spanning {
            let n0 = q(&m, &m).sqrt();
            let mut v = m;
            for _ in 0..2 {
                for u in &basis {
                    let c = q(u, &v);
                    v -= u * Complex::new(c, 0.0);
                }
            }
            let nn = q(&v, &v);
            if nn <= (1e-10 * n0).powi(2) {
                continue;
            }
            basis.push(v * Complex::new(1.0 / nn.sqrt(), 0.0));
        }
        let dim = basis.len();
        let mut consts = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let br = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                for k in 0..dim {
                    consts[(i * dim + j) * dim + k] = q(&br, &basis[k]);
                }
            }
        }
        let alg = Self {
            dim,
            consts,
            labels: (1..=dim).map(|i| format!("{family}_{i}")).collect(),
            family: family.to_string(),
            realization: Some((basis, scale)),
        };
        alg.validate()?;
        Ok(alg)
    }

    /// Build from explicit structure constants `c[(i·d + j)·d + k]` and a
    /// positive-definite `Q` given in the same basis. The result is expressed
    /// in a `Q`-orthonormal basis obtained by Gram–Schmidt.
    pub fn from_structure_constants(
        dim: usize,
        consts: &[f64],
        q: &DMatrix<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if consts.len() != dim * dim * dim || q.nrows() != dim || q.ncols() != dim {
            return Err(Error::Dimension(format!(
                "structure constants need {} entries and Q must be {dim}×{dim}",
                dim * dim * dim
            )));
        }
        linalg::check_positive_definite(q)?;
        let p = linalg::gram_schmidt(&DMatrix::identity(dim, dim), q, 1e-12);
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("basis change not invertible".into()))?;
        let raw_bracket = |x: &DVector<f64>, y: &DVector<f64>| -> DVector<f64> {
            let mut out = DVector::zeros(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let w = x[i] * y[j];
                    if w == 0.0 {
                        continue;
                    }
                    for k in 0..dim {
                        out[k] += w * consts[(i * dim + j) * dim + k];
                    }
                }
            }
            out
        };
        let mut new_consts = vec![0.0; dim * dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                let br = &pinv * raw_bracket(&p.column(a).into_owned(), &p.column(b).into_owned());
                for k in 0..dim {
                    new_consts[(a * dim + b) * dim + k] = br[k];
                }
            }
        }
        let alg = Self {
            dim,
            consts: new_consts,
            labels: labels.unwrap_or_else(|| (1..=dim).map(|i| format!("x{i}")).collect()),
            family: "explicit".into(),
            realization: None,
        };
        alg.validate()?;
        Ok(alg)
    }

    pub fn abelian(n: usize, scale: f64) -> Result<Self> {
        let i_ = Complex::new(0.0, 1.0);
        let mats = (0..n).map(|k| unit(n, k, k, i_)).collect();
        Self::from_matrices(mats, scale, "abelian")
    }

    /// Orthogonal direct sum; each block keeps its own normalization.
    pub fn direct_sum(blocks: &[LieAlgebra]) -> Self {
        let dim: usize = blocks.iter().map(|b| b.dim).sum();
        let mut consts = vec![0.0; dim * dim * dim];
        let mut labels = Vec::with_capacity(dim);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    for k in 0..b.dim {
                        consts[((off + i) * dim + off + j) * dim + off + k] = b.structure(i, j, k);
                    }
                }
            }
            labels.extend(b.labels.iter().cloned());
            off += b.dim;
        }
        // block-diagonal matrix realization with a common trace scale when possible
        let realization = if blocks.iter().all(|b| b.realization.is_some()) {
            let sizes: Vec<usize> = blocks
                .iter()
                .map(|b| {
                    b.realization
                        .as_ref()
                        .unwrap()
                        .0
                        .first()
                        .map_or(0, |m| m.nrows())
                })
                .collect();
            let total: usize = sizes.iter().sum();
            let mut mats = Vec::with_capacity(dim);
            let mut moff = 0;
            for (b, &sz) in blocks.iter().zip(&sizes) {
                let (bm, s) = b.realization.as_ref().unwrap();
                for m in bm {
                    let mut big = cm_zero(total);
                    // rescale so that Q = −½ Re tr on the big matrices
                    let f = Complex::new(s.sqrt(), 0.0);
                    big.view_mut((moff, moff), (sz, sz)).copy_from(&(m * f));
                    mats.push(big);
                }
                moff += sz;
            }
            Some((mats, 1.0))
        } else {
            None
        };
        let family = blocks
            .iter()
            .map(|b| b.family.as_str())
            .collect::<Vec<_>>()
            .join("+");
        Self {
            dim,
            consts,
            labels,
            family,
            realization,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `c_ij^k`.
    pub fn structure(&self, i: usize, j: usize, k: usize) -> f64 {
        self.consts[(i * self.dim + j) * self.dim + k]
    }

    pub fn structure_constants(&self) -> &[f64] {
        &self.consts
    }

    /// Gram matrix of `Q` in the stored basis (the identity).
    pub fn q(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for k in 0..d {
                    out[k] += w * self.consts[base + k];
                }
            }
        }
        out
    }

    /// Matrix of `ad_x`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.bracket(x, &self.basis_vector(j));
            m.set_column(j, &col);
        }
        m
    }

    pub fn realization(&self) -> Option<(&[CMatrix], f64)> {
        self.realization.as_ref().map(|(m, s)| (m.as_slice(), *s))
    }

    /// Matrix `Σ x_i M_i` of a coordinate vector.
    pub fn to_matrix(&self, x: &DVector<f64>) -> Option<CMatrix> {
        let (mats, _) = self.realization.as_ref()?;
        let n = mats.first().map_or(0, |m| m.nrows());
        let mut out = cm_zero(n);
        for (i, m) in mats.iter().enumerate() {
            if x[i] != 0.0 {
                out += m * Complex::new(x[i], 0.0);
            }
        }
        Some(out)
    }

    /// Coordinates of a matrix lying in the realized algebra.
    pub fn from_matrix(&self, m: &CMatrix) -> Option<DVector<f64>> {
        let (mats, s) = self.realization.as_ref()?;
        Some(DVector::from_iterator(
            self.dim,
            mats.iter().map(|b| -0.5 * s * re_trace_product(m, b)),
        ))
    }

    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (
                        self.basis_vector(i),
                        self.basis_vector(j),
                        self.basis_vector(k),
                    );
                    let s = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max((self.structure(i, j, k) + self.structure(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// `max |Q([X,Y],Z) + Q(Y,[X,Z])|` over basis triples.
    pub fn ad_invariance_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    worst = worst.max((self.structure(x, y, z) + self.structure(x, z, y)).abs());
                }
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.antisymmetry_residual();
        if r > STRUCTURE_TOL {
            return Err(Error::invariant(
                "antisymmetry of the bracket",
                r,
                STRUCTURE_TOL,
            ));
        }
        let r = self.jacobi_residual();
        if r > STRUCTURE_TOL {
            return Err(Error::invariant("Jacobi identity", r, STRUCTURE_TOL));
        }
        let r = self.ad_invariance_residual();
        if r > STRUCTURE_TOL {
            return Err(Error::invariant("ad-invariance of Q", r, STRUCTURE_TOL));
        }
        Ok(())
    }

    /// Dimension of the center, by a rank test on `x ↦ ([e_1,x], …, [e_d,x])`.
    pub fn center_dim(&self) -> usize {
        let d = self.dim;
        let mut m = DMatrix::zeros(d * d, d);
        for i in 0..d {
            let ad = self.ad(&self.basis_vector(i));
            m.view_mut((i * d, 0), (d, d)).copy_from(&ad);
        }
        d - linalg::numerical_rank(&m, 1e-9)
    }
}

/// Classical algebra by family name: `so`, `su`, `sp`, `u` or `abelian`, with
/// `Q(X,Y) = −(scale/2)·Re tr(XY)` on the defining matrix realization.
/// Direct sums are built with [`LieAlgebra::direct_sum`].
pub fn make_algebra(family: &str, n: usize, scale: f64) -> Result<LieAlgebra> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {scale}"
        )));
    }
    match family {
        "so" => LieAlgebra::from_matrices(so_basis(n), scale, "so"),
        "su" => LieAlgebra::from_matrices(skew_hermitian_basis(n, true), scale, "su"),
        "u" => LieAlgebra::from_matrices(skew_hermitian_basis(n, false), scale, "u"),
        "sp" => LieAlgebra::from_matrices(sp_basis(n), scale, "sp"),
        "abelian" => LieAlgebra::abelian(n, scale),
        "direct_sum" => Err(Error::InvalidParameter(
            "direct_sum needs explicit blocks (LieAlgebra::direct_sum)".into(),
        )),
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

/// A subspace of a Lie algebra with a basis orthonormal for `metric`.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: DMatrix<f64>,
    metric: DMatrix<f64>,
}

impl Subspace {
    /// Orthonormalize the given columns (dropping dependent ones) for `metric`.
    pub fn new(vectors: &DMatrix<f64>, metric: &DMatrix<f64>) -> Result<Self> {
        if vectors.nrows() != metric.nrows() {
            return Err(Error::Dimension(
                "subspace vectors and metric differ in size".into(),
            ));
        }
        linalg::check_positive_definite(metric)?;
        let basis = linalg::gram_schmidt(vectors, metric, 1e-10);
        let s = Self {
            basis,
            metric: metric.clone(),
        };
        let r = s.orthonormality_residual();
        if r > ORTHONORMAL_TOL {
            return Err(Error::invariant(
                "orthonormality of subspace basis",
                r,
                ORTHONORMAL_TOL,
            ));
        }
        Ok(s)
    }

    /// Span of vectors, orthonormal for the algebra's `Q`.
    pub fn span(alg: &LieAlgebra, vectors: &[DVector<f64>]) -> Result<Self> {
        let d = alg.dim();
        let m = if vectors.is_empty() {
            DMatrix::zeros(d, 0)
        } else {
            DMatrix::from_columns(vectors)
        };
        Self::new(&m, &alg.q())
    }

    /// Span of the stored basis vectors with the given indices.
    pub fn coordinate(alg: &LieAlgebra, indices: &[usize]) -> Result<Self> {
        let v: Vec<DVector<f64>> = indices.iter().map(|&i| alg.basis_vector(i)).collect();
        Self::span(alg, &v)
    }

    pub fn zero(parent_dim: usize) -> Self {
        Self {
            basis: DMatrix::zeros(parent_dim, 0),
            metric: DMatrix::identity(parent_dim, parent_dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn parent_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// The same span, re-orthonormalized for another metric.
    pub fn with_metric(&self, metric: &DMatrix<f64>) -> Result<Self> {
        Self::new(&self.basis, metric)
    }

    /// Projector onto the span along the `metric`-orthogonal complement.
    pub fn projector(&self, metric: &DMatrix<f64>) -> DMatrix<f64> {
        linalg::metric_projector(&self.basis, metric).expect("positive metric")
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.basis.transpose() * &self.metric * &self.basis;
        linalg::max_abs(&(g - DMatrix::identity(self.dim(), self.dim())))
    }

    /// Largest component of a bracket of basis vectors outside the span.
    pub fn closure_residual(&self, alg: &LieAlgebra) -> f64 {
        let p = self.projector(&alg.q());
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                let b = alg.bracket(&self.vector(i), &self.vector(j));
                worst = worst.max((&b - &p * &b).amax());
            }
        }
        worst
    }

    pub fn commutator_residual(&self, alg: &LieAlgebra) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                worst = worst.max(alg.bracket(&self.vector(i), &self.vector(j)).amax());
            }
        }
        worst
    }

    pub fn is_subalgebra(&self, alg: &LieAlgebra) -> bool {
        self.closure_residual(alg) <= STRUCTURE_TOL
    }

    pub fn is_abelian(&self, alg: &LieAlgebra) -> bool {
        self.commutator_residual(alg) <= ORTHONORMAL_TOL
    }

    pub fn check_subalgebra(&self, alg: &LieAlgebra) -> Result<()> {
        let r = self.closure_residual(alg);
        if r > STRUCTURE_TOL {
            return Err(Error::invariant(
                "bracket closure of subalgebra",
                r,
                STRUCTURE_TOL,
            ));
        }
        Ok(())
    }

    pub fn check_abelian(&self, alg: &LieAlgebra) -> Result<()> {
        let r = self.commutator_residual(alg);
        if r > ORTHONORMAL_TOL {
            return Err(Error::invariant("abelian subalgebra", r, ORTHONORMAL_TOL));
        }
        Ok(())
    }

    /// Whether `other` lies in this span.
    pub fn contains(&self, other: &Subspace) -> f64 {
        let p = self.projector(&self.metric);
        let diff = other.basis() - &p * other.basis();
        linalg::max_abs(&diff)
    }
}

/// `metric`-orthogonal complement of `sub` inside the parent algebra.
pub fn orthogonal_complement(sub: &Subspace, metric: &DMatrix<f64>) -> Result<Subspace> {
    linalg::check_positive_definite(metric)?;
    let d = sub.parent_dim();
    let p = sub.projector(metric);
    let rest = DMatrix::identity(d, d) - p;
    // columns killed by the projector are roundoff; drop them relative to e_i
    let keep: Vec<DVector<f64>> = (0..d)
        .map(|i| rest.column(i).into_owned())
        .enumerate()
        .filter(|(i, c)| (c.transpose() * metric * c)[0].sqrt() > 1e-8 * metric[(*i, *i)].sqrt())
        .map(|(_, c)| c)
        .collect();
    let kept = if keep.is_empty() {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&keep)
    };
    let basis = linalg::gram_schmidt(&kept, metric, 1e-8);
    let out = Subspace {
        basis,
        metric: metric.clone(),
    };
    if out.dim() + sub.dim() != d {
        return Err(Error::Numerical(format!(
            "complement has dimension {} but expected {}",
            out.dim(),
            d - sub.dim()
        )));
    }
    Ok(out)
}
