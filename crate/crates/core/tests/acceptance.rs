//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use strongcurv::certifier::{
    certify_dim4, certify_with, min_sectional_sampled, scan_threshold, validate_certificate,
    Certificate, CertifyOptions, Verdict,
};
use strongcurv::cohom1::{
    assemble_cheeger_half, assemble_gz_half, compute_slice_b, make_profile, make_round_l,
    make_triple, CheegerOptions, HalfGeometry,
};
use strongcurv::curvature::{
    bracket_form, left_invariant_r, scale_up_decomposition, scaled_metric_r, scaled_up_r,
    submersion_r, to_coordinates, SubmersionSpec,
};
use strongcurv::exterior::{
    binomial, sectional_curvature, wedge, FourForm, SymmetricBivectorOperator,
};
use strongcurv::fdoracle::{chart_for_half, fd_riemann, fd_sectional, left_invariant_chart};
use strongcurv::lie::{make_algebra, CMatrix, LieAlgebra, Subspace};
use strongcurv::linalg::{max_abs, numerical_rank};
use strongcurv::random::{gaussian_bianchi_free, gaussian_vector, seeded};
use strongcurv::BivectorFrame;

type Outcome = Result<String, String>;

/// Every certificate emitted by the suites, for the soundness sweep.
#[derive(Default)]
struct Emitted(Vec<(SymmetricBivectorOperator, Certificate)>);

impl Emitted {
    fn certify(
        &mut self,
        r: &SymmetricBivectorOperator,
        opts: &CertifyOptions,
    ) -> Result<Certificate, String> {
        let c = certify_with(r, opts).map_err(|e| e.to_string())?;
        self.0.push((r.clone(), c.clone()));
        Ok(c)
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn e(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn last_line(g: &LieAlgebra) -> Result<Subspace, String> {
    Subspace::coordinate(g, &[g.dim() - 1]).map_err(err)
}

fn c1_biinvariant(_: &mut Emitted) -> Outcome {
    let mut worst = f64::INFINITY;
    for (family, n) in [
        ("so", 3),
        ("so", 4),
        ("su", 2),
        ("su", 3),
        ("sp", 2),
        ("u", 2),
    ] {
        let g = make_algebra(family, n, 1.0).map_err(err)?;
        let r = bracket_form(&g, &g.q()).map_err(err)?;
        let l = r.lambda_min();
        ensure(l >= -1e-9, || format!("{family}({n}): λ_min = {l:e}"))?;
        worst = worst.min(l);
    }
    let s = make_algebra("so", 3, 1.0).map_err(err)?;
    let g = LieAlgebra::direct_sum(&[s.clone(), s]);
    let l = bracket_form(&g, &g.q()).map_err(err)?.lambda_min();
    ensure(l >= -1e-9, || format!("so(3)⊕so(3): λ_min = {l:e}"))?;
    Ok(format!("min λ_min = {:.3e}", worst.min(l)))
}

fn c2_threshold(em: &mut Emitted) -> Outcome {
    let g = make_algebra("so", 3, 1.0).map_err(err)?;
    let a = last_line(&g)?;
    let rep = scan_threshold(
        |t| Ok((scaled_up_r(&g, &a, t)?.r_t, None)),
        (1.0, 1.5),
        0.05,
        &CertifyOptions::default(),
    )
    .map_err(err)?;
    let (lo, hi) = rep.threshold.ok_or("no threshold found")?;
    let target = 4.0 / 3.0;
    ensure(
        (lo - target).abs() <= 1e-6 && (hi - target).abs() <= 1e-6,
        || format!("threshold bracket [{lo}, {hi}]"),
    )?;
    ensure(rep.points.iter().all(|p| p.validated), || {
        "unvalidated scan point".into()
    })?;
    let mut worst = 0.0_f64;
    for t in [0.5, 1.0, 4.0 / 3.0, 1.4] {
        let r = scaled_up_r(&g, &a, t).map_err(err)?.r_t;
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![
            (4.0 - 3.0 * t) / 4.0,
            t / 4.0,
            t / 4.0,
        ]));
        let d = max_abs(&(r.entries() - expected));
        ensure(d <= 1e-10, || format!("t={t}: spectrum deviates by {d:e}"))?;
        worst = worst.max(d);
        em.certify(&r, &CertifyOptions::default())?;
    }
    Ok(format!(
        "threshold ∈ [{lo:.9}, {hi:.9}], diag deviation {worst:.1e}"
    ))
}

fn c3_two_paths(_: &mut Emitted) -> Outcome {
    let (mut worst, mut koszul) = (0.0_f64, 0.0_f64);
    for (family, n) in [("so", 3), ("su", 3)] {
        let g = make_algebra(family, n, 1.0).map_err(err)?;
        let a = last_line(&g)?;
        for t in [0.3, 0.6, 0.9] {
            let up = scaled_up_r(&g, &a, t).map_err(err)?;
            let down = scaled_metric_r(&g, &a, t).map_err(err)?;
            let d = max_abs(&(up.r_t.entries() - down.r.entries()));
            ensure(d <= 1e-10, || format!("{family}({n}) t={t}: {d:e}"))?;
            worst = worst.max(d);
            let k = left_invariant_r(&g, &up.metric()).map_err(err)?;
            let coords = to_coordinates(&up.r_t, &up.frame).map_err(err)?;
            let dk = max_abs(&(k.entries() - coords.entries()));
            ensure(dk <= 1e-10, || {
                format!("{family}({n}) t={t}: Koszul route off by {dk:e}")
            })?;
            koszul = koszul.max(dk);
        }
    }
    Ok(format!(
        "max deviation {worst:.1e} (Koszul route {koszul:.1e})"
    ))
}

fn c4_modifier(em: &mut Emitted) -> Outcome {
    let g = make_algebra("su", 3, 1.0).map_err(err)?;
    let a = last_line(&g)?;
    let mut notes = Vec::new();
    for t in [1.1, 4.0 / 3.0] {
        let r = scaled_up_r(&g, &a, t).map_err(err)?;
        let modified = r.modified();
        let l = modified.lambda_min();
        ensure(l >= -1e-8, || format!("t={t}: λ_min = {l:e}"))?;
        let dec = scale_up_decomposition(&g, &a, t).map_err(err)?;
        let d = max_abs(&(modified.entries() - dec.sum().entries()));
        ensure(d <= 1e-9, || format!("t={t}: decomposition off by {d:e}"))?;
        let part = dec
            .abelian_part
            .lambda_min()
            .min(dec.square_part.lambda_min());
        ensure(part >= -1e-10, || {
            format!("t={t}: Gram part λ_min = {part:e}")
        })?;
        let uncoupled = max_abs(&(modified.entries() - dec.uncoupled.entries()));
        em.certify(
            &r.r_t,
            &CertifyOptions {
                warm_start: Some(r.omega_t.clone()),
                ..Default::default()
            },
        )?;
        notes.push(format!(
            "t={t:.4}: λ_min={l:.2e} dec={d:.1e} uncoupled Δ={uncoupled:.3}"
        ));
    }
    Ok(notes.join("; "))
}

fn random_unitary(rng: &mut strongcurv::random::Rng, n: usize) -> CMatrix {
    let m = DMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    m.qr().q()
}

/// Homogeneous quotients of SU(3) by randomly conjugated subgroups.
fn su3_quotients(seed: u64) -> Result<Vec<SubmersionSpec>, String> {
    let g = make_algebra("su", 3, 1.0).map_err(err)?;
    let mut rng = seeded(seed);
    let one = Complex::new(1.0, 0.0);
    let i_ = Complex::new(0.0, 1.0);
    let m = |i: usize, j: usize, z: Complex<f64>| {
        let mut m = CMatrix::from_element(3, 3, Complex::new(0.0, 0.0));
        m[(i, j)] = z;
        m
    };
    let families: Vec<Vec<CMatrix>> = vec![
        vec![m(0, 0, i_ * 2.0) - m(1, 1, i_) - m(2, 2, i_)],
        vec![m(0, 0, i_) - m(1, 1, i_), m(1, 1, i_) - m(2, 2, i_)],
        vec![
            m(0, 1, one) - m(1, 0, one),
            m(0, 1, i_) + m(1, 0, i_),
            m(0, 0, i_) - m(1, 1, i_),
        ],
        vec![
            m(0, 1, one) - m(1, 0, one),
            m(0, 2, one) - m(2, 0, one),
            m(1, 2, one) - m(2, 1, one),
        ],
        vec![
            m(0, 1, one) - m(1, 0, one),
            m(0, 1, i_) + m(1, 0, i_),
            m(0, 0, i_) - m(1, 1, i_),
            m(0, 0, i_) + m(1, 1, i_) - m(2, 2, i_ * 2.0),
        ],
    ];
    let q = g.q();
    let r = bracket_form(&g, &q).map_err(err)?;
    families
        .into_iter()
        .map(|mats| {
            let u = random_unitary(&mut rng, 3);
            let cols = mats
                .iter()
                .map(|x| g.from_matrix(&(&u * x * u.adjoint())))
                .collect::<Option<Vec<_>>>()
                .ok_or("conjugated generator left su(3)")?;
            let v = Subspace::span(&g, &cols).map_err(err)?;
            SubmersionSpec::homogeneous(&g, &q, r.clone(), v.basis()).map_err(err)
        })
        .collect()
}

fn c5_submersion(em: &mut Emitted) -> Outcome {
    let g = make_algebra("so", 3, 1.0).map_err(err)?;
    let v = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
    let spec = SubmersionSpec::homogeneous(&g, &g.q(), bracket_form(&g, &g.q()).map_err(err)?, &v)
        .map_err(err)?;
    let r = submersion_r(&spec).map_err(err)?;
    let mut rng = seeded(5);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let s = sectional_curvature(
            &r,
            &gaussian_vector(&mut rng, 2),
            &gaussian_vector(&mut rng, 2),
        )
        .map_err(err)?;
        worst = worst.max((s - 1.0).abs());
    }
    ensure(worst <= 1e-10, || {
        format!("S² sec deviates from 1 by {worst:e}")
    })?;
    let mut margins = Vec::new();
    for spec in su3_quotients(2024)? {
        let r = submersion_r(&spec).map_err(err)?;
        let zero = FourForm::zero(&BivectorFrame::new(spec.ambient_dim()));
        let omega = spec.pushed_modifier(&zero).map_err(err)?;
        let c = em.certify(
            &r,
            &CertifyOptions {
                warm_start: Some(omega),
                ..Default::default()
            },
        )?;
        ensure(
            c.verdict == Verdict::Feasible && validate_certificate(&r, &c),
            || {
                format!(
                    "quotient of dim {} not certified: {:?}",
                    spec.base_dim(),
                    c.verdict
                )
            },
        )?;
        margins.push(c.margin.unwrap_or(f64::NAN));
    }
    Ok(format!(
        "S² |sec−1| ≤ {worst:.1e}; quotient margins {}",
        margins
            .iter()
            .map(|m| format!("{m:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    ))
}

/// `P(S) = O(𝔟(S))` on `Sym(∧²ℝⁿ)`.
fn project(s: &SymmetricBivectorOperator) -> SymmetricBivectorOperator {
    s.bianchi().to_operator()
}

fn random_symmetric(rng: &mut strongcurv::random::Rng, n: usize) -> SymmetricBivectorOperator {
    let frame = BivectorFrame::new(n);
    let m = strongcurv::random::gaussian_symmetric(rng, frame.dim());
    SymmetricBivectorOperator::from_matrix(frame, m, "random").expect("symmetric")
}

fn c6_bianchi(_: &mut Emitted) -> Outcome {
    let mut worst = 0.0_f64;
    let mut rng = seeded(6);
    for n in 4..=6 {
        let frame = BivectorFrame::new(n);
        let d = frame.dim();
        // matrix of 𝔟 on the symmetric basis
        let mut cols = Vec::new();
        for a in 0..d {
            for b in a..d {
                let mut m = DMatrix::zeros(d, d);
                m[(a, b)] = 1.0;
                m[(b, a)] = 1.0;
                let s = SymmetricBivectorOperator::from_matrix(frame.clone(), m, "basis")
                    .map_err(err)?;
                cols.push(DVector::from_column_slice(s.bianchi().coeffs()));
            }
        }
        let rank = numerical_rank(&DMatrix::from_columns(&cols), 1e-10);
        ensure(rank == binomial(n, 4), || {
            format!("n={n}: rank {rank} ≠ {}", binomial(n, 4))
        })?;
        for _ in 0..100 {
            let s = random_symmetric(&mut rng, n);
            let t = random_symmetric(&mut rng, n);
            let ps = project(&s);
            let idem = max_abs(&(project(&ps).entries() - ps.entries()));
            let adj = (ps.inner(&t).map_err(err)? - s.inner(&project(&t)).map_err(err)?).abs();
            let x = gaussian_vector(&mut rng, n);
            let y = gaussian_vector(&mut rng, n);
            let xi = wedge(&x, &y).normalize();
            let dec = SymmetricBivectorOperator::from_matrix(
                frame.clone(),
                &xi * xi.transpose(),
                "decomposable",
            )
            .map_err(err)?;
            let vanish = dec.bianchi().max_abs();
            let r = idem.max(adj).max(vanish);
            ensure(r <= 1e-10, || {
                format!("n={n}: idem {idem:e} adj {adj:e} decomposable {vanish:e}")
            })?;
            worst = worst.max(r);
        }
    }
    Ok(format!("ranks 1,5,15; max residual {worst:.1e}"))
}

/// Gaussian curvature operator shifted by `u·|λ_min|·Id`, `u ∈ [0, 1.5)`:
/// PSD for `u ≥ 1`, either verdict below.
fn straddling(
    rng: &mut strongcurv::random::Rng,
    n: usize,
) -> Result<SymmetricBivectorOperator, String> {
    let r0 = gaussian_bianchi_free(rng, n);
    let shift = -r0.lambda_min() * 1.5 * rng.random::<f64>();
    r0.add(&SymmetricBivectorOperator::identity(n).scaled(shift))
        .map_err(err)
}

fn c7_thorpe(em: &mut Emitted) -> Outcome {
    let mut rng = seeded(77);
    let opts = CertifyOptions::default();
    let (mut feas, mut infeas, mut worst) = (0, 0, 0.0_f64);
    for k in 0..100 {
        let r = straddling(&mut rng, 4)?;
        let a = em.certify(&r, &opts)?;
        let b = certify_dim4(&r, &opts).map_err(err)?;
        em.0.push((r.clone(), b.clone()));
        ensure(a.verdict == b.verdict, || {
            format!("case {k}: {:?} vs {:?}", a.verdict, b.verdict)
        })?;
        let (ma, mb) = (a.margin.unwrap_or(f64::NAN), b.margin.unwrap_or(f64::NAN));
        ensure((ma - mb).abs() <= 1e-6, || {
            format!("case {k}: margins {ma} vs {mb}")
        })?;
        worst = worst.max((ma - mb).abs());
        let plane = min_sectional_sampled(&r, 20_000, k).map_err(err)?;
        match a.verdict {
            Verdict::Infeasible => {
                infeas += 1;
                ensure(plane.sec < 0.0, || {
                    format!("case {k}: Infeasible but sampled sec ≥ 0")
                })?;
            }
            Verdict::Feasible => {
                feas += 1;
                ensure(plane.sec >= -1e-6, || {
                    format!("case {k}: Feasible but sec = {}", plane.sec)
                })?;
            }
            Verdict::Undecided => return Err(format!("case {k}: Undecided")),
        }
    }
    Ok(format!(
        "{feas} Feasible, {infeas} Infeasible; margin gap ≤ {worst:.1e}"
    ))
}

fn c8_gz(em: &mut Emitted) -> Outcome {
    let t = make_triple("CP_2").map_err(err)?;
    let b = compute_slice_b(&t, &t.g.q())
        .map_err(err)?
        .scalar
        .ok_or("B is not scalar")?;
    let a = 2.0 / b.sqrt();
    let f = make_profile(a, 1.5 * a, 2.0 * a).map_err(err)?;
    let r = assemble_gz_half(&t, &f, &CertifyOptions::default()).map_err(err)?;
    em.0.push((r.certified.clone(), r.certificate.clone()));
    ensure(r.ad_k_residual <= 1e-12, || {
        format!("Ad_K residual {:e}", r.ad_k_residual)
    })?;
    ensure(
        r.certificate.verdict == Verdict::Feasible && r.certificate_validated,
        || {
            format!(
                "certificate {:?}, validated {}",
                r.certificate.verdict, r.certificate_validated
            )
        },
    )?;
    ensure(r.boundary_residual <= 1e-10, || {
        format!("boundary residual {:e}", r.boundary_residual)
    })?;
    ensure(r.passed, || r.failures.join("; "))?;
    Ok(format!(
        "b={b} e={:.6} Ad_K {:.1e}, margin {:.3e}, boundary {:.1e}, sweep min {:.1e}",
        r.e,
        r.ad_k_residual,
        r.certificate.margin.unwrap_or(f64::NAN),
        r.boundary_residual,
        r.min_margin
    ))
}

fn c9_cheeger(_: &mut Emitted) -> Outcome {
    let mut notes = Vec::new();
    for name in ["CP_2", "HP_2"] {
        let t = make_triple(name).map_err(err)?;
        let r = assemble_cheeger_half(&t, &CheegerOptions::default()).map_err(err)?;
        let rung = r
            .chosen
            .map(|i| &r.ladder[i])
            .ok_or_else(|| format!("{name}: no strictly positive rung"))?;
        let margin = rung.margin.unwrap_or(f64::NAN);
        ensure(margin > 0.0, || format!("{name}: boundary margin {margin}"))?;
        ensure(r.sweep.len() == 45, || {
            format!("{name}: sweep has {} points", r.sweep.len())
        })?;
        let min = r.min_margin.unwrap_or(f64::NEG_INFINITY);
        ensure(min >= -1e-8, || format!("{name}: sweep λ_min {min:e}"))?;
        let spread = r.plateau_spread.unwrap_or(f64::INFINITY);
        ensure(spread <= 1e-9, || {
            format!("{name}: plateau spread {spread:e}")
        })?;
        ensure(r.passed, || format!("{name}: {}", r.failures.join("; ")))?;
        notes.push(format!(
            "{name}: a={:.3} margin {margin:.3e}, sweep min {min:.1e}, spread {spread:.1e}",
            rung.a
        ));
    }
    Ok(notes.join("; "))
}

fn c10_fd(_: &mut Emitted) -> Outcome {
    let g = make_algebra("so", 3, 1.0).map_err(err)?;
    let mut l = g.q();
    l[(2, 2)] = 1.2;
    let c = left_invariant_chart(&g, &l).map_err(err)?;
    let s = fd_sectional(&c, &DVector::zeros(3), &e(3, 0), &e(3, 2), 1e-3).map_err(err)?;
    ensure((s - 0.3).abs() <= 1e-4, || {
        format!("so(3) Q_1.2 plane sec {s}")
    })?;

    let triple = make_triple("CP_2").map_err(err)?;
    let round = make_round_l(&triple).map_err(err)?.l;
    let b = compute_slice_b(&triple, &round)
        .map_err(err)?
        .scalar
        .ok_or("B is not scalar")?;
    let a = 4.0 / b.sqrt();
    let t0 = 1.5 * a;
    let f = make_profile(a, t0, 2.0 * a).map_err(err)?;
    let geom = HalfGeometry::new(&triple, &round).map_err(err)?;
    let mut worst = 0.0_f64;
    for t in [1.0, t0 + 1.0] {
        let hc = chart_for_half(&geom, &f, t).map_err(err)?;
        let r = submersion_r(&geom.submersion_at(&f, t).map_err(err)?).map_err(err)?;
        let rt = fd_riemann(&hc.chart, &hc.center, 1e-3).map_err(err)?;
        let d = hc.to_frame.ncols();
        for i in 0..d {
            for j in (i + 1)..d {
                let fd = rt.sectional(&e(d, i), &e(d, j)).map_err(err)?;
                let alg = sectional_curvature(
                    &r,
                    &hc.to_frame.column(i).into_owned(),
                    &hc.to_frame.column(j).into_owned(),
                )
                .map_err(err)?;
                let dev = (fd - alg).abs();
                ensure(dev <= 1e-3, || {
                    format!("t={t} plane ({i},{j}): FD {fd} vs {alg}")
                })?;
                worst = worst.max(dev);
            }
        }
    }
    Ok(format!(
        "so(3) sec {s:.8}; CP_2 chart max deviation {worst:.1e}"
    ))
}

fn c11_soundness(em: &mut Emitted) -> Outcome {
    let mut rng = seeded(1011);
    let mut counts = [0usize; 3];
    for k in 0..1000u64 {
        let n = 4 + (k % 3) as usize;
        let r = straddling(&mut rng, n)?;
        let a = em.certify(
            &r,
            &CertifyOptions {
                seed: k,
                ..Default::default()
            },
        )?;
        let b = em.certify(
            &r,
            &CertifyOptions {
                seed: k + 7919,
                budget: 5_000,
                ..Default::default()
            },
        )?;
        let pair = [a.verdict, b.verdict];
        ensure(
            !(pair.contains(&Verdict::Feasible) && pair.contains(&Verdict::Infeasible)),
            || format!("run {k} (n={n}): Feasible and Infeasible for the same operator"),
        )?;
        counts[match a.verdict {
            Verdict::Feasible => 0,
            Verdict::Infeasible => 1,
            Verdict::Undecided => 2,
        }] += 1;
    }
    let mut checked = 0;
    for (i, (r, c)) in em.0.iter().enumerate() {
        if c.verdict == Verdict::Infeasible {
            checked += 1;
            ensure(validate_certificate(r, c), || {
                format!("emitted certificate {i} fails validation")
            })?;
        }
    }
    Ok(format!(
        "runs: {} Feasible, {} Infeasible, {} Undecided; {checked} Infeasible of {} emitted validated",
        counts[0],
        counts[1],
        counts[2],
        em.0.len()
    ))
}

type Criterion = (&'static str, u64, fn(&mut Emitted) -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("bi-invariant PSD", 1, c1_biinvariant),
        ("scale-up threshold 4/3", 5, c2_threshold),
        ("two-path oracle", 10, c3_two_paths),
        ("explicit modifier", 10, c4_modifier),
        ("submersion transfer", 10, c5_submersion),
        ("Bianchi projector", 10, c6_bianchi),
        ("dim-4 Thorpe consistency", 60, c7_thorpe),
        ("Grove-Ziller half CP_2", 10, c8_gz),
        ("Cheeger halves CP_2, HP_2", 300, c9_cheeger),
        ("FD oracle", 60, c10_fd),
        ("dual-certificate soundness", 60, c11_soundness),
    ];
    let mut em = Emitted::default();
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = f(&mut em);
        let el = start.elapsed();
        let out = match out {
            Ok(d) if el > Duration::from_secs(limit) => {
                Err(format!("{d}; over the {limit}s limit"))
            }
            o => o,
        };
        let (tag, detail) = match &out {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        if out.is_err() {
            failed += 1;
        }
        println!(
            "{tag} {:>2} {name} [{:.2}s / {limit}s]: {detail}",
            i + 1,
            el.as_secs_f64()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
