//! Exterior-algebra substrate: bases of `∧²V` and `∧⁴V`, the embedding of
//! 4-forms as symmetric operators on `∧²V`, the Bianchi projection and
//! sectional curvature.
//!
//! Conventions: `⟨X∧Y, Z∧W⟩ = ⟨X,Z⟩⟨Y,W⟩ − ⟨X,W⟩⟨Y,Z⟩`, so `{e_i∧e_j : i<j}` is
//! orthonormal whenever `{e_i}` is. Both bases are ordered lexicographically.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Number of `r`-element subsets of an `n`-element set.
pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Lexicographic rank of a strictly increasing combination.
fn combination_rank(n: usize, combo: &[usize]) -> usize {
    let r = combo.len();
    let mut rank = 0;
    let mut prev: isize = -1;
    for (p, &c) in combo.iter().enumerate() {
        for v in (prev + 1) as usize..c {
            rank += binomial(n - 1 - v, r - 1 - p);
        }
        prev = c as isize;
    }
    rank
}

/// Sign of the permutation sorting four distinct indices, plus the sorted tuple.
fn sort4(idx: [usize; 4]) -> Option<(f64, [usize; 4])> {
    let mut v = idx;
    let mut sign = 1.0;
    for i in 0..4 {
        for j in 0..3 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    Some((sign, v))
}

/// Orthonormal frame `e_1..e_n` of `V` together with the induced bivector basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivectorFrame {
    n: usize,
    labels: Vec<String>,
}

impl BivectorFrame {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            labels: (1..=n).map(|i| format!("e{i}")).collect(),
        }
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        Self {
            n: labels.len(),
            labels,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Dimension of `∧²V`.
    pub fn dim(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    /// Dimension of `∧⁴V`.
    pub fn four_dim(&self) -> usize {
        binomial(self.n, 4)
    }

    /// Position of `e_i∧e_j`, `i < j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn pair(&self, idx: usize) -> (usize, usize) {
        let mut i = 0;
        let mut start = 0;
        loop {
            let row = self.n - i - 1;
            if idx < start + row {
                return (i, i + 1 + idx - start);
            }
            start += row;
            i += 1;
        }
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect()
    }

    pub fn quads(&self) -> Vec<[usize; 4]> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.four_dim());
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    for l in (k + 1)..n {
                        out.push([i, j, k, l]);
                    }
                }
            }
        }
        out
    }

    /// Position of `e_i∧e_j∧e_k∧e_l` for strictly increasing indices.
    pub fn quad_index(&self, q: [usize; 4]) -> usize {
        combination_rank(self.n, &q)
    }

    pub fn check_same(&self, other: &BivectorFrame) -> Result<()> {
        if self.n != other.n {
            return Err(Error::FrameMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

/// Coordinates of `X∧Y` in the lexicographic basis of `∧²`.
pub fn wedge(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut out = DVector::zeros(n * n.saturating_sub(1) / 2);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            out[idx] = x[i] * y[j] - x[j] * y[i];
            idx += 1;
        }
    }
    out
}

/// Self-adjoint operator on `∧²V`, stored as a dense symmetric matrix in the
/// bivector basis of its frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorRecord", try_from = "OperatorRecord")]
pub struct SymmetricBivectorOperator {
    frame: BivectorFrame,
    entries: DMatrix<f64>,
    construction: String,
}

impl SymmetricBivectorOperator {
    /// Wraps a matrix, symmetrizing it exactly.
    pub fn from_matrix(
        frame: BivectorFrame,
        m: DMatrix<f64>,
        construction: impl Into<String>,
    ) -> Result<Self> {
        let d = frame.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension(format!(
                "operator on ∧² of dimension {d} needs a {d}×{d} matrix, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut entries = m;
        for a in 0..d {
            for b in (a + 1)..d {
                let s = 0.5 * (entries[(a, b)] + entries[(b, a)]);
                entries[(a, b)] = s;
                entries[(b, a)] = s;
            }
        }
        Ok(Self {
            frame,
            entries,
            construction: construction.into(),
        })
    }

    pub fn zero(n: usize) -> Self {
        let frame = BivectorFrame::new(n);
        let d = frame.dim();
        Self {
            frame,
            entries: DMatrix::zeros(d, d),
            construction: "zero".into(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let frame = BivectorFrame::new(n);
        let d = frame.dim();
        Self {
            frame,
            entries: DMatrix::identity(d, d),
            construction: "identity".into(),
        }
    }

    pub fn frame(&self) -> &BivectorFrame {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.frame.n
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn construction(&self) -> &str {
        &self.construction
    }

    pub fn with_construction(mut self, tag: impl Into<String>) -> Self {
        self.construction = tag.into();
        self
    }

    pub fn with_frame(mut self, frame: BivectorFrame) -> Result<Self> {
        self.frame.check_same(&frame)?;
        self.frame = frame;
        Ok(self)
    }

    /// `⟨S(e_a∧e_b), e_c∧e_d⟩` for arbitrary (not necessarily ordered) indices.
    pub fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        if a == b || c == d {
            return 0.0;
        }
        let (s1, r) = if a < b {
            (1.0, self.frame.index(a, b))
        } else {
            (-1.0, self.frame.index(b, a))
        };
        let (s2, col) = if c < d {
            (1.0, self.frame.index(c, d))
        } else {
            (-1.0, self.frame.index(d, c))
        };
        s1 * s2 * self.entries[(r, col)]
    }

    /// `⟨S(X∧Y), Z∧W⟩`.
    pub fn form(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
        w: &DVector<f64>,
    ) -> f64 {
        (wedge(x, y).transpose() * &self.entries * wedge(z, w))[0]
    }

    pub fn quadratic(&self, xi: &DVector<f64>) -> f64 {
        (xi.transpose() * &self.entries * xi)[0]
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> DVector<f64> {
        linalg::sym_eigen(&self.entries).0
    }

    pub fn lambda_min(&self) -> f64 {
        linalg::lambda_min(&self.entries)
    }

    /// Trace pairing `⟨S, T⟩ = tr(S T)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.frame.check_same(&other.frame)?;
        Ok(linalg::frobenius(&self.entries, &other.entries))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.frame.check_same(&other.frame)?;
        Ok(Self {
            frame: self.frame.clone(),
            entries: &self.entries + &other.entries,
            construction: self.construction.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.frame.check_same(&other.frame)?;
        Ok(Self {
            frame: self.frame.clone(),
            entries: &self.entries - &other.entries,
            construction: self.construction.clone(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            frame: self.frame.clone(),
            entries: &self.entries * c,
            construction: self.construction.clone(),
        }
    }

    /// `S + O(ω)`.
    pub fn plus_form(&self, omega: &FourForm) -> Result<Self> {
        self.add(&fourform_to_operator(omega, &self.frame)?)
    }

    pub fn bianchi(&self) -> FourForm {
        bianchi(self)
    }

    /// Pull the 4-linear form back along a linear map whose columns are the
    /// images of the new basis vectors: `(S∘P)(X,Y,Z,W) = S(PX,PY,PZ,PW)`.
    ///
    /// With `P` an isometric embedding this is restriction to a subspace; with
    /// `P` a change of basis it is frame conversion.
    pub fn pullback(&self, p: &DMatrix<f64>) -> Result<Self> {
        if p.nrows() != self.n() {
            return Err(Error::Dimension(format!(
                "pullback map has {} rows, frame has dimension {}",
                p.nrows(),
                self.n()
            )));
        }
        let w = wedge_map(p);
        let m = w.transpose() * &self.entries * &w;
        Self::from_matrix(BivectorFrame::new(p.ncols()), m, self.construction.clone())
    }
}

/// Matrix of `∧²P`: column `(a,b)` holds the coordinates of `P e_a ∧ P e_b`.
pub fn wedge_map(p: &DMatrix<f64>) -> DMatrix<f64> {
    let src = BivectorFrame::new(p.ncols());
    let dst = BivectorFrame::new(p.nrows());
    let mut w = DMatrix::zeros(dst.dim(), src.dim());
    for (col, (a, b)) in src.pairs().into_iter().enumerate() {
        let v = wedge(&p.column(a).into_owned(), &p.column(b).into_owned());
        w.set_column(col, &v);
    }
    w
}

/// A 4-form, stored by its coefficients on `e_i∧e_j∧e_k∧e_l`, `i<j<k<l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourForm {
    frame: BivectorFrame,
    coeffs: Vec<f64>,
}

impl FourForm {
    pub fn zero(frame: &BivectorFrame) -> Self {
        Self {
            frame: frame.clone(),
            coeffs: vec![0.0; frame.four_dim()],
        }
    }

    pub fn basis(frame: &BivectorFrame, idx: usize) -> Self {
        let mut f = Self::zero(frame);
        f.coeffs[idx] = 1.0;
        f
    }

    pub fn from_coeffs(frame: &BivectorFrame, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != frame.four_dim() {
            return Err(Error::Dimension(format!(
                "∧⁴ of dimension {} needs {} coefficients, got {}",
                frame.n(),
                frame.four_dim(),
                coeffs.len()
            )));
        }
        Ok(Self {
            frame: frame.clone(),
            coeffs,
        })
    }

    pub fn frame(&self) -> &BivectorFrame {
        &self.frame
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `ω(e_a, e_b, e_c, e_d)` for arbitrary indices.
    pub fn value(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        match sort4([a, b, c, d]) {
            None => 0.0,
            Some((sign, q)) => sign * self.coeffs[self.frame.quad_index(q)],
        }
    }

    /// Max-abs norm of the coefficients.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.frame.check_same(&other.frame)?;
        Ok(Self {
            frame: self.frame.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            frame: self.frame.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn to_operator(&self) -> SymmetricBivectorOperator {
        fourform_to_operator(self, &self.frame).expect("own frame")
    }
}

/// Embed a 4-form as the symmetric operator with
/// `⟨O(ω)(e_i∧e_j), e_k∧e_l⟩ = ω(e_i, e_j, e_k, e_l)`.
pub fn fourform_to_operator(
    omega: &FourForm,
    frame: &BivectorFrame,
) -> Result<SymmetricBivectorOperator> {
    omega.frame.check_same(frame)?;
    let d = frame.dim();
    let mut m = DMatrix::zeros(d, d);
    for (qi, [i, j, k, l]) in frame.quads().into_iter().enumerate() {
        let c = omega.coeffs[qi];
        if c == 0.0 {
            continue;
        }
        // the three pairings of {i,j,k,l} into two ordered pairs
        let pairings = [
            ((i, j), (k, l), 1.0),
            ((i, k), (j, l), -1.0),
            ((i, l), (j, k), 1.0),
        ];
        for ((a, b), (p, q), s) in pairings {
            let r = frame.index(a, b);
            let col = frame.index(p, q);
            m[(r, col)] = s * c;
            m[(col, r)] = s * c;
        }
    }
    Ok(SymmetricBivectorOperator {
        frame: frame.clone(),
        entries: m,
        construction: "four_form".into(),
    })
}

/// Bianchi map: `𝔟(S)(X,Y,Z,W) = ⅓(⟨S(X∧Y),Z∧W⟩ + ⟨S(Y∧Z),X∧W⟩ + ⟨S(Z∧X),Y∧W⟩)`,
/// the orthogonal projection of `Sym(∧²)` onto `∧⁴`.
pub fn bianchi(s: &SymmetricBivectorOperator) -> FourForm {
    let frame = s.frame.clone();
    let coeffs = frame
        .quads()
        .into_iter()
        .map(|[x, y, z, w]| (s.entry(x, y, z, w) + s.entry(y, z, x, w) + s.entry(z, x, y, w)) / 3.0)
        .collect();
    FourForm { frame, coeffs }
}

/// `⟨S(X∧Y), X∧Y⟩ / |X∧Y|²`.
pub fn sectional_curvature(
    s: &SymmetricBivectorOperator,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    if x.len() != s.n() || y.len() != s.n() {
        return Err(Error::FrameMismatch {
            expected: s.n(),
            found: x.len().max(y.len()),
        });
    }
    let b = wedge(x, y);
    let nn = b.norm_squared();
    let scale = x.norm_squared() * y.norm_squared();
    if nn <= 1e-12 * scale || nn == 0.0 {
        return Err(Error::DegeneratePlane(nn));
    }
    Ok(s.quadratic(&b) / nn)
}

/// The volume form of `ℝ⁴` and its operator, the Hodge star on `∧²ℝ⁴`.
pub fn hodge_star4() -> (FourForm, SymmetricBivectorOperator) {
    hodge_star(4).expect("n = 4")
}

pub fn hodge_star(n: usize) -> Result<(FourForm, SymmetricBivectorOperator)> {
    if n != 4 {
        return Err(Error::Dimension(format!(
            "Hodge star on ∧² is an involution only for n = 4, got n = {n}"
        )));
    }
    let frame = BivectorFrame::new(4);
    let vol = FourForm::basis(&frame, 0);
    let op = vol.to_operator().with_construction("hodge_star");
    Ok((vol, op))
}

/// JSON form of an operator: lower triangle in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRecord {
    pub n: usize,
    pub dim: usize,
    pub frame: Vec<String>,
    pub construction: String,
    pub lower: Vec<f64>,
}

impl From<SymmetricBivectorOperator> for OperatorRecord {
    fn from(op: SymmetricBivectorOperator) -> Self {
        let d = op.dim();
        let mut lower = Vec::with_capacity(d * (d + 1) / 2);
        for r in 0..d {
            for c in 0..=r {
                lower.push(op.entries[(r, c)]);
            }
        }
        OperatorRecord {
            n: op.n(),
            dim: d,
            frame: op.frame.labels.clone(),
            construction: op.construction,
            lower,
        }
    }
}

impl TryFrom<OperatorRecord> for SymmetricBivectorOperator {
    type Error = Error;

    fn try_from(rec: OperatorRecord) -> Result<Self> {
        if rec.frame.len() != rec.n {
            return Err(Error::Dimension(format!(
                "frame has {} labels but n = {}",
                rec.frame.len(),
                rec.n
            )));
        }
        let frame = BivectorFrame::with_labels(rec.frame);
        let d = frame.dim();
        if rec.dim != d || rec.lower.len() != d * (d + 1) / 2 {
            return Err(Error::Dimension(format!(
                "expected dim {d} with {} lower-triangle entries",
                d * (d + 1) / 2
            )));
        }
        let mut m = DMatrix::zeros(d, d);
        let mut it = rec.lower.into_iter();
        for r in 0..d {
            for c in 0..=r {
                let v = it.next().expect("length checked");
                m[(r, c)] = v;
                m[(c, r)] = v;
            }
        }
        Ok(SymmetricBivectorOperator {
            frame,
            entries: m,
            construction: rec.construction,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    /// Brute-force value of `vol(e_a,e_b,e_c,e_d)` on ℝ⁴ via the Leibniz sum
    /// over all 24 permutations of the determinant of the selected columns.
    fn volume_oracle(a: usize, b: usize, c: usize, d: usize) -> f64 {
        let idx = [a, b, c, d];
        let mut total = 0.0;
        let perms = permutations4();
        for (p, sign) in perms {
            let mut prod = 1.0;
            for row in 0..4 {
                prod *= if idx[p[row]] == row { 1.0 } else { 0.0 };
            }
            total += sign * prod;
        }
        total
    }

    fn permutations4() -> Vec<([usize; 4], f64)> {
        let mut out = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let p = [a, b, c, d];
                        let mut seen = [false; 4];
                        if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                            let mut inv = 0;
                            for i in 0..4 {
                                for j in (i + 1)..4 {
                                    if p[i] > p[j] {
                                        inv += 1;
                                    }
                                }
                            }
                            out.push((p, if inv % 2 == 0 { 1.0 } else { -1.0 }));
                        }
                    }
                }
            }
        }
        out
    }

    fn random_operator(seed: u64, n: usize) -> SymmetricBivectorOperator {
        let mut rng = random::seeded(seed);
        let d = BivectorFrame::new(n).dim();
        SymmetricBivectorOperator::from_matrix(
            BivectorFrame::new(n),
            random::gaussian_symmetric(&mut rng, d),
            "random",
        )
        .unwrap()
    }

    #[test]
    fn pair_indexing_round_trips() {
        for n in 2..9 {
            let f = BivectorFrame::new(n);
            for (k, (i, j)) in f.pairs().into_iter().enumerate() {
                assert_eq!(f.index(i, j), k);
                assert_eq!(f.pair(k), (i, j));
            }
            for (k, q) in f.quads().into_iter().enumerate() {
                assert_eq!(f.quad_index(q), k);
            }
        }
    }

    #[test]
    fn zero_form_gives_zero_operator() {
        for n in 0..7 {
            let f = BivectorFrame::new(n);
            let op = FourForm::zero(&f).to_operator();
            assert!(op.entries().iter().all(|&x| x == 0.0));
        }
        let f3 = BivectorFrame::new(3);
        assert!(FourForm::zero(&f3).is_empty());
        assert_eq!(FourForm::zero(&f3).to_operator().dim(), 3);
    }

    #[test]
    fn volume_form_operator_matches_brute_force_expansion() {
        let f = BivectorFrame::new(4);
        let op = FourForm::basis(&f, 0).to_operator();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        assert_eq!(op.entry(a, b, c, d), volume_oracle(a, b, c, d));
                    }
                }
            }
        }
        assert_eq!(op.entries()[(f.index(0, 1), f.index(2, 3))], 1.0);
        assert_eq!(op.entries()[(f.index(0, 2), f.index(1, 3))], -1.0);
        assert_eq!(op.entries()[(f.index(0, 3), f.index(1, 2))], 1.0);
        assert!((0..6).all(|i| op.entries()[(i, i)] == 0.0));
    }

    #[test]
    fn frame_mismatch_is_reported() {
        let w = FourForm::zero(&BivectorFrame::new(5));
        assert!(matches!(
            fourform_to_operator(&w, &BivectorFrame::new(4)),
            Err(Error::FrameMismatch { .. })
        ));
    }

    #[test]
    fn bianchi_of_identity_vanishes() {
        for n in 4..8 {
            let b = bianchi(&SymmetricBivectorOperator::identity(n));
            assert_eq!(b.max_abs(), 0.0);
        }
    }

    #[test]
    fn bianchi_inverts_embedding_on_volume_form() {
        let f = BivectorFrame::new(4);
        let vol = FourForm::basis(&f, 0);
        assert_eq!(bianchi(&vol.to_operator()), vol);
    }

    #[test]
    fn bianchi_is_idempotent_n5() {
        let s = random_operator(11, 5);
        let proj = s.bianchi().to_operator();
        let rest = s.sub(&proj).unwrap();
        assert!(rest.bianchi().max_abs() <= 1e-12);
    }

    #[test]
    fn kernel_and_forms_are_orthogonal() {
        for n in 4..7 {
            let s = random_operator(100 + n as u64, n);
            let rest = s.sub(&s.bianchi().to_operator()).unwrap();
            let f = BivectorFrame::new(n);
            for q in 0..f.four_dim() {
                let tau = FourForm::basis(&f, q).to_operator();
                assert!(rest.inner(&tau).unwrap().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sectional_curvature_of_identity_is_one() {
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let y = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        let s = SymmetricBivectorOperator::identity(4);
        assert_eq!(sectional_curvature(&s, &x, &y).unwrap(), 1.0);
    }

    #[test]
    fn four_forms_do_not_change_sectional_curvature() {
        let mut rng = random::seeded(5);
        let r = random_operator(6, 5);
        let f = BivectorFrame::new(5);
        let w = FourForm::from_coeffs(&f, random::gaussian_vector(&mut rng, 5).as_slice().to_vec())
            .unwrap();
        let rw = r.plus_form(&w).unwrap();
        for _ in 0..50 {
            let x = random::gaussian_vector(&mut rng, 5);
            let y = random::gaussian_vector(&mut rng, 5);
            let a = sectional_curvature(&r, &x, &y).unwrap();
            let b = sectional_curvature(&rw, &x, &y).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let y = &x * 2.0;
        let s = SymmetricBivectorOperator::identity(3);
        assert!(matches!(
            sectional_curvature(&s, &x, &y),
            Err(Error::DegeneratePlane(_))
        ));
    }

    #[test]
    fn hodge_star_is_an_involution_with_split_spectrum() {
        let (_, star) = hodge_star4();
        let f = star.frame().clone();
        let e12 = DVector::from_fn(6, |i, _| if i == f.index(0, 1) { 1.0 } else { 0.0 });
        let image = star.entries() * e12;
        assert_eq!(image[f.index(2, 3)], 1.0);
        let sq = star.entries() * star.entries();
        assert_eq!(sq, DMatrix::identity(6, 6));
        let ev = star.eigenvalues();
        for i in 0..3 {
            assert!((ev[i] + 1.0).abs() < 1e-14 && (ev[i + 3] - 1.0).abs() < 1e-14);
        }
        assert!(hodge_star(5).is_err());
    }

    #[test]
    fn hodge_star_vanishes_on_sampled_decomposables() {
        let (_, star) = hodge_star4();
        let mut rng = random::seeded(7);
        for _ in 0..1000 {
            let x = random::gaussian_vector(&mut rng, 4);
            let y = random::gaussian_vector(&mut rng, 4);
            let xi = wedge(&x, &y);
            let xi = &xi / xi.norm();
            assert!(star.quadratic(&xi).abs() <= 1e-12);
        }
    }

    #[test]
    fn operator_json_round_trip_is_bitwise() {
        let s = random_operator(9, 5);
        let text = serde_json::to_string(&s).unwrap();
        let back: SymmetricBivectorOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let rec: OperatorRecord = s.clone().into();
        assert_eq!(SymmetricBivectorOperator::try_from(rec).unwrap(), s);
    }

    #[test]
    fn pullback_by_identity_is_exact() {
        let s = random_operator(3, 4);
        let p = DMatrix::identity(4, 4);
        assert_eq!(s.pullback(&p).unwrap().entries(), s.entries());
    }
}
