//! Finite-difference curvature from metric components in a chart.
//!
//! Christoffel symbols come from central differences of `g_ij`, the Riemann
//! tensor from central differences of the Christoffel symbols.  Nothing here
//! uses brackets, O'Neill tensors or the curvature constructors, so the
//! numbers are an independent check on all of them.

use nalgebra::{DMatrix, DVector};

use crate::cohom1::HalfGeometry;
use crate::curvature::WarpingProfile;
use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::linalg;

pub const DEFAULT_STEP: f64 = 1e-3;

type Evaluator = Box<dyn Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Send + Sync>;

/// Metric components `x ↦ g_ij(x)` on a coordinate box.
pub struct MetricChart {
    pub dim: usize,
    evaluator: Evaluator,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    pub step: f64,
}

impl std::fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricChart")
            .field("dim", &self.dim)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("step", &self.step)
            .finish()
    }
}

impl MetricChart {
    pub fn new(
        dim: usize,
        evaluator: impl Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Send + Sync + 'static,
        lower: DVector<f64>,
        upper: DVector<f64>,
        step: f64,
    ) -> Result<Self> {
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::Dimension(format!(
                "chart box must have {dim} coordinates"
            )));
        }
        if lower.iter().zip(upper.iter()).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter("empty chart box".into()));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {step}"
            )));
        }
        Ok(Self {
            dim,
            evaluator: Box::new(evaluator),
            lower,
            upper,
            step,
        })
    }

    /// `g_ij(x)`, checked symmetric and positive-definite.
    pub fn metric(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let g = (self.evaluator)(x)?;
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "chart returned a {}×{} metric",
                g.nrows(),
                g.ncols()
            )));
        }
        let asym = linalg::max_abs(&(&g - g.transpose()));
        if asym > 1e-12 * linalg::max_abs(&g).max(1.0) {
            return Err(Error::invariant("symmetry of chart metric", asym, 1e-12));
        }
        let g = linalg::symmetrize(&g);
        linalg::check_positive_definite(&g)?;
        Ok(g)
    }

    fn check_interior(&self, x: &DVector<f64>, h: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, chart has {}",
                x.len(),
                self.dim
            )));
        }
        for i in 0..self.dim {
            if x[i] - 2.0 * h < self.lower[i] || x[i] + 2.0 * h > self.upper[i] {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {i} = {} is within 2h of the chart boundary",
                    x[i]
                )));
            }
        }
        Ok(())
    }
}

/// `Γ^l_jk` stored at `l·d² + j·d + k`.
fn christoffel(chart: &MetricChart, x: &DVector<f64>, h: f64) -> Result<Vec<f64>> {
    let d = chart.dim;
    let g = chart.metric(x)?;
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::Numerical("chart metric singular".into()))?;
    let mut dg = Vec::with_capacity(d);
    for m in 0..d {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[m] += h;
        xm[m] -= h;
        dg.push((chart.metric(&xp)? - chart.metric(&xm)?) / (2.0 * h));
    }
    let mut gam = vec![0.0; d * d * d];
    for l in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut s = 0.0;
                for r in 0..d {
                    s += ginv[(l, r)] * (dg[j][(r, k)] + dg[k][(r, j)] - dg[r][(j, k)]);
                }
                gam[l * d * d + j * d + k] = 0.5 * s;
            }
        }
    }
    Ok(gam)
}

/// Lowered curvature `R_ijkl = g(R(∂_i, ∂_j)∂_k, ∂_l)` at a point, with the
/// metric there.  `sec(X, Y) = R(X, Y, Y, X)/|X∧Y|²`.
#[derive(Debug, Clone)]
pub struct RiemannTensor {
    pub dim: usize,
    pub metric: DMatrix<f64>,
    data: Vec<f64>,
}

impl RiemannTensor {
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn sectional(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let g = &self.metric;
        let xx = (x.transpose() * g * x)[0];
        let yy = (y.transpose() * g * y)[0];
        let xy = (x.transpose() * g * y)[0];
        let area = xx * yy - xy * xy;
        if area <= 1e-14 * xx * yy {
            return Err(Error::DegeneratePlane(area));
        }
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        s += self.get(i, j, k, l) * x[i] * y[j] * y[k] * x[l];
                    }
                }
            }
        }
        Ok(s / area)
    }

    /// `max |R_ijkl − R_klij|`.
    pub fn pair_symmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut w = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        w = w.max((self.get(i, j, k, l) - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        w
    }

    /// `max |R_ijkl + R_jkil + R_kijl|`.
    pub fn bianchi_residual(&self) -> f64 {
        let d = self.dim;
        let mut w = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let c = self.get(i, j, k, l) + self.get(j, k, i, l) + self.get(k, i, j, l);
                        w = w.max(c.abs());
                    }
                }
            }
        }
        w
    }

    /// `max |R_ijkl + R_jikl|` and `max |R_ijkl + R_ijlk|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut w = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let r = self.get(i, j, k, l);
                        w = w
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs());
                    }
                }
            }
        }
        w
    }
}

pub fn fd_riemann(chart: &MetricChart, x: &DVector<f64>, h: f64) -> Result<RiemannTensor> {
    chart.check_interior(x, h)?;
    let d = chart.dim;
    let g = chart.metric(x)?;
    let gam = christoffel(chart, x, h)?;
    let mut dgam = Vec::with_capacity(d);
    for i in 0..d {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let (gp, gm) = (christoffel(chart, &xp, h)?, christoffel(chart, &xm, h)?);
        dgam.push(
            gp.iter()
                .zip(&gm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<f64>>(),
        );
    }
    let c = |l: usize, j: usize, k: usize| gam[l * d * d + j * d + k];
    let dc = |i: usize, l: usize, j: usize, k: usize| dgam[i][l * d * d + j * d + k];
    // R^l_ijk
    let mut up = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut s = dc(i, l, j, k) - dc(j, l, i, k);
                    for m in 0..d {
                        s += c(l, i, m) * c(m, j, k) - c(l, j, m) * c(m, i, k);
                    }
                    up[((i * d + j) * d + k) * d + l] = s;
                }
            }
        }
    }
    let mut data = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    data[((i * d + j) * d + k) * d + l] = (0..d)
                        .map(|m| g[(l, m)] * up[((i * d + j) * d + k) * d + m])
                        .sum();
                }
            }
        }
    }
    Ok(RiemannTensor {
        dim: d,
        metric: g,
        data,
    })
}

pub fn fd_sectional(
    chart: &MetricChart,
    x: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<f64> {
    fd_riemann(chart, x, h)?.sectional(u, v)
}

/// `sec` at steps `h, h/2, h/4` and `|s(h) − s(h/2)| / |s(h/2) − s(h/4)|`,
/// which is near 4 for a second-order scheme.
#[derive(Debug, Clone, Copy)]
pub struct Richardson {
    pub values: [f64; 3],
    pub ratio: f64,
}

pub fn richardson(
    chart: &MetricChart,
    x: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<Richardson> {
    let values = [
        fd_sectional(chart, x, u, v, h)?,
        fd_sectional(chart, x, u, v, h / 2.0)?,
        fd_sectional(chart, x, u, v, h / 4.0)?,
    ];
    let ratio = (values[0] - values[1]).abs() / (values[1] - values[2]).abs();
    Ok(Richardson { values, ratio })
}

pub fn euclidean_chart(dim: usize) -> Result<MetricChart> {
    MetricChart::new(
        dim,
        move |_| Ok(DMatrix::identity(dim, dim)),
        DVector::from_element(dim, -1.0),
        DVector::from_element(dim, 1.0),
        DEFAULT_STEP,
    )
}

/// Stereographic chart of the round `n`-sphere of radius `radius`.
pub fn sphere_chart(n: usize, radius: f64) -> Result<MetricChart> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let r2 = radius * radius;
    MetricChart::new(
        n,
        move |x| {
            let c = 4.0 * r2 * r2 / (r2 + x.norm_squared()).powi(2);
            Ok(DMatrix::identity(x.len(), x.len()) * c)
        },
        DVector::from_element(n, -radius),
        DVector::from_element(n, radius),
        DEFAULT_STEP,
    )
}

/// Matrix exponential: scaling and squaring around a degree-12 Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a / 2f64.powi(s);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=12 {
        term = &term * &b / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Left-trivialized differential of `exp` at `x`: `Σ (−ad_x)^k/(k+1)!`, read
/// off the top-right block of `expm([[−ad_x, I], [0, 0]])`.
pub fn dexp(g: &LieAlgebra, x: &DVector<f64>) -> DMatrix<f64> {
    let d = g.dim();
    let mut block = DMatrix::zeros(2 * d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(&(-g.ad(x)));
    block.view_mut((0, d), (d, d)).fill_with_identity();
    expm(&block).view((0, d), (d, d)).into_owned()
}

/// Exponential coordinates `x ↦ exp(Σ xᵢeᵢ)` on a group with the
/// left-invariant metric `l`.
pub fn left_invariant_chart(g: &LieAlgebra, l: &DMatrix<f64>) -> Result<MetricChart> {
    linalg::check_positive_definite(l)?;
    let d = g.dim();
    let (g, l) = (g.clone(), l.clone());
    MetricChart::new(
        d,
        move |x| {
            let j = dexp(&g, x);
            Ok(j.transpose() * &l * j)
        },
        DVector::from_element(d, -0.5),
        DVector::from_element(d, 0.5),
        DEFAULT_STEP,
    )
}

/// Chart `(x, θ, r) ↦ [exp(Σ xᵢmᵢ), r·expm(Σ θⱼS_{pⱼ})v₀]` of `G ×_K V`
/// around `[e, t·v₀]`, plus the map from coordinate vectors at the centre to
/// the orthonormal horizontal frame used by the algebraic pipeline.
pub struct HalfChart {
    pub chart: MetricChart,
    pub center: DVector<f64>,
    /// Column `a`: coordinates of `∂/∂y_a` at the centre in the horizontal frame.
    pub to_frame: DMatrix<f64>,
    pub dim_m: usize,
    pub dim_p: usize,
}

/// `(v(y), ∂v/∂θⱼ, ∂v/∂r)` for the slice part of the chart.
fn slice_point(
    gens: &[DMatrix<f64>],
    v0: &DVector<f64>,
    theta: &[f64],
    r: f64,
) -> (DVector<f64>, Vec<DVector<f64>>, DVector<f64>) {
    let k = v0.len();
    let a = gens
        .iter()
        .zip(theta)
        .fold(DMatrix::zeros(k, k), |acc, (s, th)| acc + s * *th);
    let e = expm(&a);
    let dirs = gens
        .iter()
        .map(|s| {
            // d/dε expm(A + εS) = top-right block of expm([[A, S], [0, A]])
            let mut block = DMatrix::zeros(2 * k, 2 * k);
            block.view_mut((0, 0), (k, k)).copy_from(&a);
            block.view_mut((k, k), (k, k)).copy_from(&a);
            block.view_mut((0, k), (k, k)).copy_from(s);
            expm(&block).view((0, k), (k, k)) * v0 * r
        })
        .collect();
    let unit = &e * v0;
    (&unit * r, dirs, unit)
}

/// Tangent vectors of the chart in left-trivialized `G × V` coordinates.
fn chart_tangents(geom: &HalfGeometry, y: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let g = &geom.triple.g;
    let (d, k) = (g.dim(), geom.triple.slice_dim);
    let (dm, dp) = (geom.m.dim(), geom.slice_b.p.dim());
    let xm = geom.m.basis() * y.rows(0, dm);
    let jac = dexp(g, &xm);
    let theta: Vec<f64> = y.rows(dm, dp).iter().copied().collect();
    let (v, dtheta, dr) = slice_point(geom.p_generators(), &geom.triple.v0, &theta, y[dm + dp]);
    let mut w = DMatrix::zeros(d + k, dm + dp + 1);
    for i in 0..dm {
        w.view_mut((0, i), (d, 1))
            .copy_from(&(&jac * geom.m.vector(i)));
    }
    for j in 0..dp {
        w.view_mut((d, dm + j), (k, 1)).copy_from(&dtheta[j]);
    }
    w.view_mut((d, dm + dp), (k, 1)).copy_from(&dr);
    (v, w)
}

/// Smallest radius accepted as a chart centre.
pub const HALF_CHART_FLOOR: f64 = 1e-2;

pub fn chart_for_half<F>(geom: &HalfGeometry, profile: &F, t: f64) -> Result<HalfChart>
where
    F: WarpingProfile + Clone + Send + Sync + 'static,
{
    if !(t >= HALF_CHART_FLOOR) {
        return Err(Error::InvalidParameter(format!(
            "chart degenerates: radius {t} below {HALF_CHART_FLOOR}"
        )));
    }
    let (dm, dp) = (geom.m.dim(), geom.slice_b.p.dim());
    let n = dm + dp + 1;
    let geom_c = geom.clone();
    let prof = profile.clone();
    let evaluator = move |y: &DVector<f64>| -> Result<DMatrix<f64>> {
        let (v, w) = chart_tangents(&geom_c, y);
        let gram = geom_c.gram(&prof, &v)?;
        let ph = geom_c.horizontal_projector(&prof, &v)?;
        let hw = ph * w;
        Ok(linalg::symmetrize(&(hw.transpose() * gram * hw)))
    };
    let mut center = DVector::zeros(n);
    center[n - 1] = t;
    let mut lower = DVector::from_element(n, -0.5);
    let mut upper = DVector::from_element(n, 0.5);
    lower[n - 1] = 0.5 * t;
    upper[n - 1] = t + 0.5 * t.min(1.0);
    let chart = MetricChart::new(n, evaluator, lower, upper, DEFAULT_STEP)?;

    let spec = geom.submersion_at(profile, t)?;
    let (v, w) = chart_tangents(geom, &center);
    let gram = geom.gram(profile, &v)?;
    let ph = geom.horizontal_projector(profile, &v)?;
    let to_frame = spec.horizontal.transpose() * gram * ph * w;
    Ok(HalfChart {
        chart,
        center,
        to_frame,
        dim_m: dm,
        dim_p: dp,
    })
}
