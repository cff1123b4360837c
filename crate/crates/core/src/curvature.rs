//! Curvature operators of Lie groups, their quotients and warped products.
//!
//! Curvature is handled as a 4-linear form `R(X,Y,Z,W) = ⟨R(X∧Y), Z∧W⟩` with
//! `R(X,Y,Y,X)`-style sign conventions chosen so that sectional curvature is
//! `⟨R(X∧Y), X∧Y⟩` on orthonormal `X, Y`. Forms may live on coordinate
//! frames (not orthonormal) while being assembled; finished operators are
//! always expressed in an orthonormal frame.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{fourform_to_operator, BivectorFrame, FourForm, SymmetricBivectorOperator};
use crate::lie::{orthogonal_complement, LieAlgebra, Subspace};
use crate::linalg;

/// Residual allowed for the Bianchi identity of constructed operators.
pub const BIANCHI_TOL: f64 = 1e-9;

/// Columns indexed by the pairs `i<j` of an `n`-element frame.
fn pair_columns(
    n: usize,
    rows: usize,
    mut f: impl FnMut(usize, usize) -> DVector<f64>,
) -> DMatrix<f64> {
    let frame = BivectorFrame::new(n);
    let mut out = DMatrix::zeros(rows, frame.dim());
    for (c, (i, j)) in frame.pairs().into_iter().enumerate() {
        out.set_column(c, &f(i, j));
    }
    out
}

/// Operator `c·⟨v_ij, v_kl⟩_G` on `∧²` of an `n`-frame.
fn gram_operator(
    n: usize,
    cols: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    c: f64,
    tag: &str,
) -> SymmetricBivectorOperator {
    let m = cols.transpose() * gram * cols * c;
    SymmetricBivectorOperator::from_matrix(BivectorFrame::new(n), m, tag)
        .expect("pair count matches")
}

/// `¼·N([e_i,e_j],[e_k,e_l])` in the stored coordinates of `alg`: the
/// curvature form of a left-invariant metric `N` that is ad-invariant
/// (possibly indefinite).
pub fn bracket_form(alg: &LieAlgebra, metric: &DMatrix<f64>) -> Result<SymmetricBivectorOperator> {
    let d = alg.dim();
    if metric.nrows() != d || metric.ncols() != d {
        return Err(Error::Dimension(format!("metric must be {d}×{d}")));
    }
    let cols = pair_columns(d, d, |i, j| {
        alg.bracket(&alg.basis_vector(i), &alg.basis_vector(j))
    });
    Ok(gram_operator(d, &cols, metric, 0.25, "bracket_form"))
}

/// Curvature operator of the bi-invariant metric `Q`, in the stored
/// `Q`-orthonormal basis.
pub fn biinvariant_r(g: &LieAlgebra) -> SymmetricBivectorOperator {
    let op = bracket_form(g, &g.q()).expect("identity metric");
    let frame = BivectorFrame::with_labels(g.labels().to_vec());
    op.with_frame(frame)
        .expect("same size")
        .with_construction(format!("biinvariant {}", g.family()))
}

/// Express a form given on the frame `frame` (columns in coordinates) as a
/// form on the coordinate basis.
pub fn to_coordinates(
    op: &SymmetricBivectorOperator,
    frame: &DMatrix<f64>,
) -> Result<SymmetricBivectorOperator> {
    let inv = frame
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("frame is not a basis".into()))?;
    op.pullback(&inv)
}

/// Data of a (semi-)Riemannian submersion at one point, in ambient coordinates.
///
/// `gram` may be indefinite on the vertical space. `horizontal` holds a
/// `gram`-orthonormal frame of the horizontal space (the horizontal lifts of an
/// orthonormal frame downstairs) and `a_values` holds `A(h_i, h_j)` for
/// `i<j` in the lexicographic pair order.
#[derive(Debug, Clone)]
pub struct SubmersionSpec {
    pub gram: DMatrix<f64>,
    pub ambient_r: SymmetricBivectorOperator,
    pub vertical: DMatrix<f64>,
    pub horizontal: DMatrix<f64>,
    pub a_values: DMatrix<f64>,
}

/// `A(X,Y) = ½·(vertical part of [X,Y])` on pairs of the horizontal frame,
/// with the vertical projection orthogonal for `metric`.
pub fn canonical_a(
    alg: &LieAlgebra,
    vertical: &DMatrix<f64>,
    metric: &DMatrix<f64>,
    horizontal: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let pv = linalg::metric_projector(vertical, metric)?;
    let h = horizontal.ncols();
    Ok(pair_columns(h, alg.dim(), |i, j| {
        let b = alg.bracket(
            &horizontal.column(i).into_owned(),
            &horizontal.column(j).into_owned(),
        );
        &pv * b * 0.5
    }))
}

/// Residual of `span(vertical)` being closed under the bracket.
fn vertical_closure(
    alg: &LieAlgebra,
    vertical: &DMatrix<f64>,
    metric: &DMatrix<f64>,
) -> Result<f64> {
    let pv = linalg::metric_projector(vertical, metric)?;
    let mut worst = 0.0_f64;
    for i in 0..vertical.ncols() {
        for j in (i + 1)..vertical.ncols() {
            let b = alg.bracket(
                &vertical.column(i).into_owned(),
                &vertical.column(j).into_owned(),
            );
            worst = worst.max((&b - &pv * &b).amax());
        }
    }
    Ok(worst)
}

impl SubmersionSpec {
    /// Quotient of a Lie group with left-invariant metric `metric` (curvature
    /// form `ambient_r` in the algebra's coordinates) by the subgroup with Lie
    /// algebra spanned by `vertical`. The horizontal frame is a
    /// `metric`-orthonormal basis of the complement and `A` is canonical.
    pub fn homogeneous(
        alg: &LieAlgebra,
        metric: &DMatrix<f64>,
        ambient_r: SymmetricBivectorOperator,
        vertical: &DMatrix<f64>,
    ) -> Result<Self> {
        let d = alg.dim();
        let r = vertical_closure(alg, vertical, metric)?;
        if r > crate::lie::STRUCTURE_TOL {
            return Err(Error::invariant(
                "vertical subspace closed under bracket",
                r,
                crate::lie::STRUCTURE_TOL,
            ));
        }
        let pv = linalg::metric_projector(vertical, metric)?;
        let horizontal = linalg::gram_schmidt(&(DMatrix::identity(d, d) - pv), metric, 1e-8);
        if horizontal.ncols() + vertical.ncols() != d {
            return Err(Error::Numerical(
                "horizontal complement has the wrong dimension".into(),
            ));
        }
        let a_values = canonical_a(alg, vertical, metric, &horizontal)?;
        let spec = Self {
            gram: metric.clone(),
            ambient_r,
            vertical: vertical.clone(),
            horizontal,
            a_values,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn ambient_dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn base_dim(&self) -> usize {
        self.horizontal.ncols()
    }

    /// Structural checks: sizes, orthonormal horizontal frame, horizontal ⟂
    /// vertical, `A` vertical.
    pub fn check(&self) -> Result<()> {
        let n = self.ambient_dim();
        let h = self.base_dim();
        if self.ambient_r.n() != n || self.vertical.nrows() != n || self.horizontal.nrows() != n {
            return Err(Error::FrameMismatch {
                expected: n,
                found: self.ambient_r.n(),
            });
        }
        if self.a_values.nrows() != n || self.a_values.ncols() != BivectorFrame::new(h).dim() {
            return Err(Error::Dimension(
                "A-tensor table has the wrong shape".into(),
            ));
        }
        let scale = linalg::max_abs(&self.gram).max(1.0);
        let tol = 1e-10 * scale;
        let hh =
            self.horizontal.transpose() * &self.gram * &self.horizontal - DMatrix::identity(h, h);
        let r = linalg::max_abs(&hh);
        if r > tol {
            return Err(Error::invariant(
                "orthonormality of horizontal frame",
                r,
                tol,
            ));
        }
        let hv = self.horizontal.transpose() * &self.gram * &self.vertical;
        let r = linalg::max_abs(&hv);
        if r > tol {
            return Err(Error::invariant("horizontal ⟂ vertical", r, tol));
        }
        if self.vertical.ncols() > 0 {
            let pv = linalg::metric_projector(&self.vertical, &self.gram)?;
            let r = linalg::max_abs(&(&self.a_values - &pv * &self.a_values));
            let tol = 1e-10 * linalg::max_abs(&self.a_values).max(1.0);
            if r > tol {
                return Err(Error::invariant("A takes vertical values", r, tol));
            }
        } else if linalg::max_abs(&self.a_values) > 0.0 {
            return Err(Error::invariant(
                "A vanishes without vertical space",
                linalg::max_abs(&self.a_values),
                0.0,
            ));
        }
        Ok(())
    }

    /// `α(X∧Y, Z∧W) = ⟨A(X,Y), A(Z,W)⟩` with the (signed) ambient metric.
    pub fn alpha(&self) -> SymmetricBivectorOperator {
        gram_operator(self.base_dim(), &self.a_values, &self.gram, 1.0, "alpha")
    }

    /// Restriction of an ambient 4-form (coordinates) to the horizontal frame.
    pub fn restrict_form(&self, ambient_omega: &FourForm) -> Result<FourForm> {
        let op = fourform_to_operator(ambient_omega, &BivectorFrame::new(self.ambient_dim()))?;
        Ok(op.pullback(&self.horizontal)?.bianchi())
    }

    /// `ω̄|ℋ + 3𝔟(α)`, the modifier carried from the total space to the base.
    pub fn pushed_modifier(&self, ambient_omega: &FourForm) -> Result<FourForm> {
        let restricted = self.restrict_form(ambient_omega)?;
        restricted.add(&self.alpha().bianchi().scaled(3.0))
    }
}

/// Gray–O'Neill: `R = R̄|ℋ + 3α − 3·O(𝔟(α))` on `∧²ℋ`.
pub fn submersion_r(spec: &SubmersionSpec) -> Result<SymmetricBivectorOperator> {
    spec.check()?;
    let restricted = spec.ambient_r.pullback(&spec.horizontal)?;
    let alpha = spec.alpha();
    let b = alpha.bianchi().to_operator();
    let m = restricted.entries() + alpha.entries() * 3.0 - b.entries() * 3.0;
    SymmetricBivectorOperator::from_matrix(BivectorFrame::new(spec.base_dim()), m, "submersion")
}

/// `Q_t = Q|𝔫 ⊕ t·Q|𝔨` on a Lie algebra together with its curvature.
#[derive(Debug, Clone)]
pub struct ScaleUpResult {
    /// Curvature operator in the `Q_t`-orthonormal frame.
    pub r_t: SymmetricBivectorOperator,
    /// `3𝔟(α)` in the same frame.
    pub omega_t: FourForm,
    pub alpha: SymmetricBivectorOperator,
    pub t: f64,
    /// Frame vectors (columns, algebra coordinates): a `Q`-orthonormal basis
    /// of `𝔫` followed by the scaled subalgebra basis `e/√t`.
    pub frame: DMatrix<f64>,
    pub dim_n: usize,
}

impl ScaleUpResult {
    /// `R_t + O(ω_t)`.
    pub fn modified(&self) -> SymmetricBivectorOperator {
        self.r_t.plus_form(&self.omega_t).expect("same frame")
    }

    /// The metric `Q_t` as a Gram matrix in algebra coordinates.
    pub fn metric(&self) -> DMatrix<f64> {
        let inv = self.frame.clone().try_inverse().expect("frame is a basis");
        inv.transpose() * inv
    }
}

/// `Q_t`-orthonormal frame `[𝔫 basis, 𝔨 basis/√t]` and the two projectors.
fn scaled_frame(
    g: &LieAlgebra,
    sub: &Subspace,
    t: f64,
) -> Result<(DMatrix<f64>, usize, DMatrix<f64>, DMatrix<f64>)> {
    let q = g.q();
    let n = orthogonal_complement(sub, &q)?;
    let dn = n.dim();
    let dk = sub.dim();
    let mut frame = DMatrix::zeros(g.dim(), dn + dk);
    frame.view_mut((0, 0), (g.dim(), dn)).copy_from(n.basis());
    frame
        .view_mut((0, dn), (g.dim(), dk))
        .copy_from(&(sub.basis() / t.sqrt()));
    Ok((frame, dn, n.projector(&q), sub.projector(&q)))
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "scale parameter t must be positive, got {t}"
        )));
    }
    Ok(())
}

/// Curvature of `Q_t = Q|𝔫 ⊕ t·Q|𝔞` for an abelian `𝔞`, through the
/// submersion `(G×A, Q + t/(1−t)·Q|𝔞) → (G, Q_t)` with the closed-form lift
/// `X̄ = (X_𝔫 + tX_𝔞, (t−1)X_𝔞)` and `A(X̄,Ȳ) = ½(1−t)([X_𝔫,Y_𝔫]_𝔞, [X_𝔫,Y_𝔫]_𝔞)`.
pub fn scaled_up_r(g: &LieAlgebra, a: &Subspace, t: f64) -> Result<ScaleUpResult> {
    check_t(t)?;
    a.check_abelian(g)?;
    let d = g.dim();
    let k = a.dim();
    let (frame, dim_n, pn, pa) = scaled_frame(g, a, t)?;
    // ambient coordinates: 𝔤 in its own basis, then 𝔞 in the basis of `a`
    let amb = d + k;
    let to_a = a.basis().transpose();
    let mut lifts = DMatrix::zeros(amb, d);
    for c in 0..d {
        let x = frame.column(c).into_owned();
        let xn = &pn * &x;
        let xa = &pa * &x;
        lifts.view_mut((0, c), (d, 1)).copy_from(&(&xn + &xa * t));
        lifts
            .view_mut((d, c), (k, 1))
            .copy_from(&(&to_a * &xa * (t - 1.0)));
    }
    let mut vertical = DMatrix::zeros(amb, k);
    vertical.view_mut((0, 0), (d, k)).copy_from(a.basis());
    vertical.view_mut((d, 0), (k, k)).fill_with_identity();
    // A(X̄,Ȳ) = ½(1−t)([X_𝔫,Y_𝔫]_𝔞, [X_𝔫,Y_𝔫]_𝔞)
    let a_values = pair_columns(d, amb, |i, j| {
        let xn = &pn * frame.column(i);
        let yn = &pn * frame.column(j);
        let c = &pa * g.bracket(&xn, &yn);
        let mut v = DVector::zeros(amb);
        v.rows_mut(0, d).copy_from(&(&c * (0.5 * (1.0 - t))));
        v.rows_mut(d, k)
            .copy_from(&(&to_a * &c * (0.5 * (1.0 - t))));
        v
    });
    let mut gram = DMatrix::identity(amb, amb);
    if t != 1.0 {
        let s = t / (1.0 - t);
        for i in d..amb {
            gram[(i, i)] = s;
        }
    }
    // ambient curvature lives on the 𝔤 factor; the 𝔞 factor is flat
    let g_form = bracket_form(g, &g.q())?;
    let mut emb = DMatrix::zeros(d, amb);
    emb.view_mut((0, 0), (d, d)).fill_with_identity();
    let ambient_r = g_form.pullback(&emb)?;
    let spec = SubmersionSpec {
        gram,
        ambient_r,
        vertical,
        horizontal: lifts,
        a_values,
    };
    if t != 1.0 {
        spec.check()?;
    }
    let restricted = spec.ambient_r.pullback(&spec.horizontal)?;
    // ⟨A,A⟩ with vertical norm (1 + s) = 1/(1−t) on (w, w)
    let alpha = if t == 1.0 {
        SymmetricBivectorOperator::zero(d)
    } else {
        spec.alpha()
    };
    let omega_alpha = alpha.bianchi();
    let m =
        restricted.entries() + alpha.entries() * 3.0 - omega_alpha.to_operator().entries() * 3.0;
    let r_t = SymmetricBivectorOperator::from_matrix(
        BivectorFrame::new(d),
        m,
        format!("scaled_up {} t={t}", g.family()),
    )?;
    let omega_t = omega_alpha.scaled(3.0);
    Ok(ScaleUpResult {
        r_t,
        omega_t,
        alpha,
        t,
        frame,
        dim_n,
    })
}

/// Left-invariant metric `Q|𝔫 ⊕ t·Q|𝔨` for an arbitrary subalgebra `𝔨`.
#[derive(Debug, Clone)]
pub struct ScaledMetric {
    pub r: SymmetricBivectorOperator,
    /// Same layout as [`ScaleUpResult::frame`].
    pub frame: DMatrix<f64>,
    pub dim_n: usize,
    pub t: f64,
    /// The submersion data it was computed from (`None` for `t = 1`).
    pub spec: Option<SubmersionSpec>,
}

impl ScaledMetric {
    pub fn metric(&self) -> DMatrix<f64> {
        let inv = self.frame.clone().try_inverse().expect("frame is a basis");
        inv.transpose() * inv
    }

    /// Curvature form in the algebra's coordinates.
    pub fn coordinate_form(&self) -> SymmetricBivectorOperator {
        to_coordinates(&self.r, &self.frame).expect("frame is a basis")
    }
}

/// Curvature of `Q|𝔫 ⊕ t·Q|𝔨` through the submersion
/// `(G×K, Q ⊕ t/(1−t)·Q|𝔨) → G`, `(g,k) ↦ gk⁻¹`, with horizontal lifts found
/// by solving the lifting equations and `A` read off from brackets in `𝔤⊕𝔨`.
/// For `t > 1` the `K` factor is negative definite.
pub fn scaled_metric_r(g: &LieAlgebra, sub: &Subspace, t: f64) -> Result<ScaledMetric> {
    check_t(t)?;
    sub.check_subalgebra(g)?;
    let (frame, dim_n, _, _) = scaled_frame(g, sub, t)?;
    let d = g.dim();
    let k = sub.dim();
    if t == 1.0 || k == 0 {
        let r = biinvariant_r(g).pullback(&frame)?;
        return Ok(ScaledMetric {
            r: r.with_construction(format!("scaled {} t={t}", g.family())),
            frame,
            dim_n,
            t,
            spec: None,
        });
    }
    // the subalgebra as an abstract Lie algebra in its Q-orthonormal basis
    let sb = sub.basis();
    let mut consts = vec![0.0; k * k * k];
    for i in 0..k {
        for j in 0..k {
            let br =
                sb.transpose() * g.bracket(&sb.column(i).into_owned(), &sb.column(j).into_owned());
            for l in 0..k {
                consts[(i * k + j) * k + l] = br[l];
            }
        }
    }
    let kalg = LieAlgebra::from_structure_constants(k, &consts, &DMatrix::identity(k, k), None)?;
    let total = LieAlgebra::direct_sum(&[g.clone(), kalg]);
    let amb = d + k;
    let s = t / (1.0 - t);
    let mut gram = DMatrix::identity(amb, amb);
    for i in d..amb {
        gram[(i, i)] = s;
    }
    let mut vertical = DMatrix::zeros(amb, k);
    vertical.view_mut((0, 0), (d, k)).copy_from(sb);
    vertical.view_mut((d, 0), (k, k)).fill_with_identity();
    // lifting equations: x − S y = X, Sᵀx + s·y = 0
    let mut sys = DMatrix::zeros(amb, amb);
    sys.view_mut((0, 0), (d, d)).fill_with_identity();
    sys.view_mut((0, d), (d, k)).copy_from(&(-sb));
    sys.view_mut((d, 0), (k, d)).copy_from(&sb.transpose());
    for i in 0..k {
        sys[(d + i, d + i)] = s;
    }
    let lu = sys.lu();
    let mut horizontal = DMatrix::zeros(amb, d);
    for c in 0..d {
        let mut rhs = DVector::zeros(amb);
        rhs.rows_mut(0, d).copy_from(&frame.column(c));
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("lifting equations are singular".into()))?;
        horizontal.set_column(c, &sol);
    }
    let a_values = canonical_a(&total, &vertical, &gram, &horizontal)?;
    let ambient_r = bracket_form(&total, &gram)?;
    let spec = SubmersionSpec {
        gram,
        ambient_r,
        vertical,
        horizontal,
        a_values,
    };
    let r = submersion_r(&spec)?.with_construction(format!("scaled {} t={t}", g.family()));
    Ok(ScaledMetric {
        r,
        frame,
        dim_n,
        t,
        spec: Some(spec),
    })
}

/// The two Gram operators whose sum is `R_t + O(ω_t)`, and the assembly
/// with the third term taken as `t²·Q(mixed, mixed)` with no cross terms.
#[derive(Debug, Clone)]
pub struct ScaleUpDecomposition {
    /// `(4−3t)/4 · ⟨[X_𝔫,Y_𝔫]_𝔞, [Z_𝔫,W_𝔫]_𝔞⟩`.
    pub abelian_part: SymmetricBivectorOperator,
    /// `¼ · Gram of X∧Y ↦ [X_𝔫,Y_𝔫]_𝔫 + t([X_𝔫,Y_𝔞] + [X_𝔞,Y_𝔫])`.
    pub square_part: SymmetricBivectorOperator,
    /// `(4−3t)/4·(𝔞-term) + ¼·Gram([X_𝔫,Y_𝔫]_𝔫) + t²·Gram(mixed)`.
    pub uncoupled: SymmetricBivectorOperator,
}

impl ScaleUpDecomposition {
    pub fn sum(&self) -> SymmetricBivectorOperator {
        self.abelian_part
            .add(&self.square_part)
            .expect("same frame")
    }
}

pub fn scale_up_decomposition(
    g: &LieAlgebra,
    a: &Subspace,
    t: f64,
) -> Result<ScaleUpDecomposition> {
    check_t(t)?;
    a.check_abelian(g)?;
    let d = g.dim();
    let (frame, _, pn, pa) = scaled_frame(g, a, t)?;
    let q = g.q();
    let split = |i: usize| {
        let x = frame.column(i).into_owned();
        (&pn * &x, &pa * &x)
    };
    let mut ab = DMatrix::zeros(d, BivectorFrame::new(d).dim());
    let mut nn = ab.clone();
    let mut mixed = ab.clone();
    for (c, (i, j)) in BivectorFrame::new(d).pairs().into_iter().enumerate() {
        let (xn, xa) = split(i);
        let (yn, ya) = split(j);
        let b = g.bracket(&xn, &yn);
        ab.set_column(c, &(&pa * &b));
        nn.set_column(c, &(&pn * &b));
        mixed.set_column(c, &(g.bracket(&xn, &ya) + g.bracket(&xa, &yn)));
    }
    let abelian_part = gram_operator(d, &ab, &q, (4.0 - 3.0 * t) / 4.0, "abelian_part");
    let square_part = gram_operator(d, &(&nn + &mixed * t), &q, 0.25, "square_part");
    let uncoupled = abelian_part
        .add(&gram_operator(d, &nn, &q, 0.25, ""))?
        .add(&gram_operator(d, &mixed, &q, t * t, ""))?
        .with_construction("uncoupled");
    Ok(ScaleUpDecomposition {
        abelian_part,
        square_part,
        uncoupled,
    })
}

/// Curvature form of an arbitrary left-invariant metric `L` (Gram matrix in
/// the algebra's coordinates) from the Koszul formula
/// `⟨∇_X Y, Z⟩ = ½(⟨[X,Y],Z⟩ − ⟨[Y,Z],X⟩ + ⟨[Z,X],Y⟩)`.
/// The result is `⟨R(e_i,e_j)e_l, e_k⟩` on the coordinate basis.
pub fn left_invariant_r(g: &LieAlgebra, l: &DMatrix<f64>) -> Result<SymmetricBivectorOperator> {
    let d = g.dim();
    if l.nrows() != d || l.ncols() != d {
        return Err(Error::Dimension(format!("metric must be {d}×{d}")));
    }
    linalg::check_positive_definite(l)?;
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular metric".into()))?;
    let br = |i: usize, j: usize| g.bracket(&g.basis_vector(i), &g.basis_vector(j));
    // nabla[i] maps coefficient vectors c to ∇_{e_i}(Σ c_j e_j)
    let nabla: Vec<DMatrix<f64>> = (0..d)
        .map(|i| {
            let mut cols = DMatrix::zeros(d, d);
            for j in 0..d {
                let mut low = DVector::zeros(d);
                for k in 0..d {
                    let a = (br(i, j).transpose() * l * g.basis_vector(k))[0];
                    let b = (br(j, k).transpose() * l * g.basis_vector(i))[0];
                    let c = (br(k, i).transpose() * l * g.basis_vector(j))[0];
                    low[k] = 0.5 * (a - b + c);
                }
                cols.set_column(j, &(&linv * low));
            }
            cols
        })
        .collect();
    let frame = BivectorFrame::new(d);
    let mut m = DMatrix::zeros(frame.dim(), frame.dim());
    for (a, (i, j)) in frame.pairs().into_iter().enumerate() {
        let c = br(i, j);
        let mut rij = &nabla[i] * &nabla[j] - &nabla[j] * &nabla[i];
        for (s, cs) in c.iter().enumerate() {
            rij -= &nabla[s] * *cs;
        }
        let lr = l * rij;
        for (b, (k, ll)) in frame.pairs().into_iter().enumerate() {
            m[(a, b)] = lr[(k, ll)];
        }
    }
    let asym = linalg::max_abs(&(&m - m.transpose()));
    let tol = 1e-10 * linalg::max_abs(&m).max(1.0);
    if asym > tol {
        return Err(Error::invariant(
            "pair symmetry of the curvature form",
            asym,
            tol,
        ));
    }
    SymmetricBivectorOperator::from_matrix(
        frame,
        linalg::symmetrize(&m),
        format!("left-invariant {}", g.family()),
    )
}

/// Riemannian product: `∧²V₁` and `∧²V₂` blocks, mixed bivectors flat.
pub fn product_r(
    r1: &SymmetricBivectorOperator,
    r2: &SymmetricBivectorOperator,
) -> SymmetricBivectorOperator {
    let n1 = r1.n();
    let mut labels: Vec<String> = r1.frame().labels().to_vec();
    labels.extend(r2.frame().labels().iter().cloned());
    let frame = BivectorFrame::with_labels(labels);
    let mut m = DMatrix::zeros(frame.dim(), frame.dim());
    for (a, (i, j)) in r1.frame().pairs().into_iter().enumerate() {
        for (b, (k, l)) in r1.frame().pairs().into_iter().enumerate() {
            m[(frame.index(i, j), frame.index(k, l))] = r1.entries()[(a, b)];
        }
    }
    for (a, (i, j)) in r2.frame().pairs().into_iter().enumerate() {
        for (b, (k, l)) in r2.frame().pairs().into_iter().enumerate() {
            m[(frame.index(n1 + i, n1 + j), frame.index(n1 + k, n1 + l))] = r2.entries()[(a, b)];
        }
    }
    SymmetricBivectorOperator::from_matrix(frame, m, "product").expect("sizes agree")
}

/// A warping function `f` with its first two derivatives.
pub trait WarpingProfile {
    /// `(f(t), f′(t), f″(t))`.
    fn eval(&self, t: f64) -> Result<(f64, f64, f64)>;
}

/// Adapter turning a closure into a [`WarpingProfile`].
pub struct FnProfile<F>(pub F);

impl<F: Fn(f64) -> (f64, f64, f64)> WarpingProfile for FnProfile<F> {
    fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        Ok((self.0)(t))
    }
}

/// Curvature of `dt² + f(t)²·g_{S^{k−1}}` at radius `t`, in the frame
/// `{∂t, angular orthonormal frame}`: radial planes `−f″/f`, angular planes
/// `(1 − f′²)/f²`.
pub fn rotsym_r(f: &dyn WarpingProfile, t: f64, k: usize) -> Result<SymmetricBivectorOperator> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "slice dimension must be at least 2, got {k}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {t}"
        )));
    }
    let (fv, fp, fpp) = f.eval(t)?;
    if !(fv > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "profile must be positive at t={t}, got {fv}"
        )));
    }
    let frame = BivectorFrame::new(k);
    let mut m = DMatrix::zeros(frame.dim(), frame.dim());
    for (a, (i, _)) in frame.pairs().into_iter().enumerate() {
        m[(a, a)] = if i == 0 {
            -fpp / fv
        } else {
            (1.0 - fp * fp) / (fv * fv)
        };
    }
    SymmetricBivectorOperator::from_matrix(frame, m, format!("rotsym k={k} t={t}"))
}

/// Principal-orbit metric `L(·, C·)` with `C = diag(Id, f²B(Id + f²B)⁻¹)` on
/// `𝔪 ⊕ 𝔭`; `l` is the Gram matrix of `L` on `𝔪⊕𝔭` (first `dim_m` rows on `𝔪`)
/// and `b` the matrix of `B` on `𝔭`.
pub fn orbit_metric_c(
    l: &DMatrix<f64>,
    dim_m: usize,
    b: &DMatrix<f64>,
    f: &dyn WarpingProfile,
    t: f64,
) -> Result<DMatrix<f64>> {
    let (fv, _, _) = f.eval(t)?;
    orbit_metric_c_at(l, dim_m, b, fv)
}

/// [`orbit_metric_c`] for a given value `f(t)`.
pub fn orbit_metric_c_at(
    l: &DMatrix<f64>,
    dim_m: usize,
    b: &DMatrix<f64>,
    fv: f64,
) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    let dp = n - dim_m;
    if b.nrows() != dp || b.ncols() != dp {
        return Err(Error::Dimension(format!("B must be {dp}×{dp}")));
    }
    let f2b = b * (fv * fv);
    let inv = (DMatrix::identity(dp, dp) + &f2b)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("Id + f²B is singular".into()))?;
    let mut c = DMatrix::identity(n, n);
    c.view_mut((dim_m, dim_m), (dp, dp)).copy_from(&(f2b * inv));
    Ok(linalg::symmetrize(&(l * c)))
}

/// Factor `f²b/(f²b − 1)` by which `L` is scaled on `𝔨` so that the orbit at
/// radius `t` carries `L|𝔪⊕𝔭`.
pub fn scale_down_d(b: f64, f: &dyn WarpingProfile, t: f64) -> Result<f64> {
    let (fv, _, _) = f.eval(t)?;
    scale_factor(fv * fv * b)
}

/// Factor `a²b/(a²b − 1)` on `𝔭`.
pub fn scale_up_e(a: f64, b: f64) -> Result<f64> {
    scale_factor(a * a * b)
}

fn scale_factor(x: f64) -> Result<f64> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::Hypothesis(format!(
            "need f²b > 1 (resp. a²b > 1), got {x}"
        )));
    }
    Ok(x / (x - 1.0))
}

/// Block-diagonal automorphism with the given factor on each block.
pub fn block_scaling(blocks: &[(usize, f64)]) -> DMatrix<f64> {
    let diag: Vec<f64> = blocks
        .iter()
        .flat_map(|&(n, c)| std::iter::repeat(c).take(n))
        .collect();
    DMatrix::from_diagonal(&DVector::from_vec(diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::make_algebra;

    fn so3_e3(t: f64) -> ScaleUpResult {
        let g = make_algebra("so", 3, 1.0).unwrap();
        let a = Subspace::coordinate(&g, &[2]).unwrap();
        scaled_up_r(&g, &a, t).unwrap()
    }

    #[test]
    fn so3_biinvariant_is_quarter_identity() {
        let r = biinvariant_r(&make_algebra("so", 3, 1.0).unwrap());
        assert!(linalg::max_abs(&(r.entries() - DMatrix::identity(3, 3) * 0.25)) < 1e-15);
    }

    #[test]
    fn so4_has_two_quarter_blocks() {
        let g = LieAlgebra::direct_sum(&[
            make_algebra("so", 3, 1.0).unwrap(),
            make_algebra("so", 3, 1.0).unwrap(),
        ]);
        let r = biinvariant_r(&g);
        let ev = r.eigenvalues();
        assert!(ev[0].abs() < 1e-15);
        assert!((ev[14] - 0.25).abs() < 1e-15);
        assert!(r.bianchi().max_abs() < 1e-12);
    }

    #[test]
    fn so3_scale_up_spectrum() {
        for t in [0.5, 1.0, 4.0 / 3.0, 1.4] {
            let r = so3_e3(t);
            let want = DMatrix::from_diagonal(&DVector::from_vec(vec![
                (4.0 - 3.0 * t) / 4.0,
                t / 4.0,
                t / 4.0,
            ]));
            assert!(linalg::max_abs(&(r.r_t.entries() - want)) < 1e-12, "t={t}");
            assert!(r.omega_t.is_empty());
        }
        assert!((so3_e3(1.4).r_t.lambda_min() + 0.05).abs() < 1e-12);
    }

    #[test]
    fn t_one_matches_biinvariant() {
        let r = so3_e3(1.0);
        let b = biinvariant_r(&make_algebra("so", 3, 1.0).unwrap());
        assert!(linalg::max_abs(&(r.r_t.entries() - b.entries())) < 1e-15);
    }

    #[test]
    fn s2_quotient_has_curvature_one() {
        let g = make_algebra("so", 3, 1.0).unwrap();
        let v = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        let spec =
            SubmersionSpec::homogeneous(&g, &g.q(), bracket_form(&g, &g.q()).unwrap(), &v).unwrap();
        let a = spec.a_values.column(0).into_owned();
        assert!((a.norm() - 0.5).abs() < 1e-15);
        let r = submersion_r(&spec).unwrap();
        assert!((r.entries()[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trivial_vertical_returns_ambient() {
        let g = make_algebra("su", 2, 1.0).unwrap();
        let spec = SubmersionSpec::homogeneous(
            &g,
            &g.q(),
            bracket_form(&g, &g.q()).unwrap(),
            &DMatrix::zeros(3, 0),
        )
        .unwrap();
        let r = submersion_r(&spec).unwrap();
        let amb = bracket_form(&g, &g.q()).unwrap();
        let back = to_coordinates(&r, &spec.horizontal).unwrap();
        assert!(linalg::max_abs(&(back.entries() - amb.entries())) < 1e-14);
    }

    #[test]
    fn non_subalgebra_vertical_rejected() {
        let g = make_algebra("so", 3, 1.0).unwrap();
        let v = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(
            SubmersionSpec::homogeneous(&g, &g.q(), bracket_form(&g, &g.q()).unwrap(), &v).is_err()
        );
    }

    #[test]
    fn product_with_line() {
        let r1 = biinvariant_r(&make_algebra("so", 3, 1.0).unwrap());
        let p = product_r(&r1, &SymmetricBivectorOperator::zero(1));
        let ev = p.eigenvalues();
        assert_eq!(ev.len(), 6);
        for i in 0..3 {
            assert!(ev[i].abs() < 1e-15 && (ev[i + 3] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn rotsym_cases() {
        let sphere = FnProfile(|t: f64| (t.sin(), t.cos(), -t.sin()));
        let r = rotsym_r(&sphere, 1.0, 2).unwrap();
        assert!((r.entries()[(0, 0)] - 1.0).abs() < 1e-15);
        let cone = FnProfile(|t: f64| (t, 1.0, 0.0));
        assert!(linalg::max_abs(rotsym_r(&cone, 0.7, 4).unwrap().entries()) == 0.0);
        let flat = FnProfile(|_t: f64| (2.0, 0.0, 0.0));
        assert!(linalg::max_abs(rotsym_r(&flat, 3.0, 2).unwrap().entries()) == 0.0);
        assert!(rotsym_r(&flat, 3.0, 1).is_err());
    }

    #[test]
    fn scalar_maps() {
        let l = DMatrix::identity(3, 3);
        let b = DMatrix::identity(1, 1);
        let c = orbit_metric_c_at(&l, 2, &b, 1.0).unwrap();
        assert!((c[(2, 2)] - 0.5).abs() < 1e-15);
        let c = orbit_metric_c_at(&l, 2, &b, 10.0).unwrap();
        assert!((c[(2, 2)] - 100.0 / 101.0).abs() < 1e-15);
        assert!(orbit_metric_c_at(&l, 2, &b, 1e-9).unwrap()[(2, 2)] < 1e-17);
        let two = FnProfile(|_t: f64| (2.0, 0.0, 0.0));
        assert!((scale_down_d(1.0, &two, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((scale_down_d(0.5, &two, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(scale_down_d(0.25, &two, 1.0).is_err());
        assert!((scale_up_e(2.0 / 3f64.sqrt(), 3.0).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!((scale_up_e(5f64.sqrt(), 1.0).unwrap() - 1.25).abs() < 1e-14);
        assert!(scale_up_e(1.0, 1.0).is_err());
    }

    #[test]
    fn scale_down_restores_orbit_metric() {
        // L′ = L(·, D·) on 𝔨 gives back L on 𝔪⊕𝔭 at radius with f²b > 1
        let b = 1.5;
        let fv = 1.3;
        let dfac = (fv * fv * b) / (fv * fv * b - 1.0);
        let lp = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, dfac]));
        let c = orbit_metric_c_at(&lp, 2, &DMatrix::from_element(1, 1, b / dfac), fv).unwrap();
        assert!(linalg::max_abs(&(c - DMatrix::identity(3, 3))) < 1e-14);
    }
}
