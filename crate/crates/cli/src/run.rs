//! Execution of scenario items.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use strongcurv::certifier::{
    certify_with, min_sectional_sampled, scan_threshold, validate_certificate, CertifyOptions,
    Verdict,
};
use strongcurv::cohom1::{
    assemble_cheeger_half, assemble_gz_half, compute_slice_b, make_profile, make_round_l,
    make_triple, CheegerOptions, HalfGeometry,
};
use strongcurv::curvature::{
    biinvariant_r, scale_up_decomposition, scaled_metric_r, scaled_up_r, submersion_r,
    SubmersionSpec,
};
use strongcurv::exterior::{sectional_curvature, OperatorRecord};
use strongcurv::fdoracle::{chart_for_half, fd_riemann};
use strongcurv::lie::{make_algebra, LieAlgebra, Subspace};
use strongcurv::random::{gaussian_bianchi_free, gaussian_symmetric, seeded};
use strongcurv::{linalg, BivectorFrame, SymmetricBivectorOperator};

use crate::scenario::{AlgebraParams, Construction, Item, MetricChoice, ScaledParams, Task};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_UNDECIDED: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: Option<u64>,
    pub tol: f64,
    pub budget: usize,
}

impl Settings {
    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            tol: self.tol,
            budget: self.budget,
            seed: self.seed.unwrap_or(0),
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemReport {
    pub index: usize,
    pub construction: String,
    pub task: Task,
    pub status: String,
    pub exit_code: i32,
    pub wall_time_s: f64,
    pub result: Value,
    /// Operator emitted by the item, if any (written to its own file too).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorRecord>,
}

/// Errors that make the scenario invalid rather than a run failure.
pub fn validate(item: &Item, settings: &Settings) -> Result<(), String> {
    if (item.construction.is_randomized() || item.task == Task::VerifyLemma)
        && settings.seed.is_none()
    {
        return Err("at `seed`: a seed is required for randomized tasks".into());
    }
    match (item.task, &item.construction) {
        (Task::Scan, Construction::ScaledUp(_) | Construction::ScaledMetric(_)) => {
            if item.scan.is_none() {
                return Err("at `scan`: the scan task needs a range".into());
            }
        }
        (Task::Scan, c) => {
            return Err(format!(
                "at `task`: scan is not available for `{}`",
                c.name()
            ))
        }
        (_, Construction::ScaledUp(p) | Construction::ScaledMetric(p)) if p.t.is_none() => {
            return Err("at `construction.params.t`: missing field".into())
        }
        (Task::Certify, Construction::GzHalf(_) | Construction::CheegerHalf(_)) => {
            return Err("at `task`: assemblies support build and verify-lemma".into())
        }
        (Task::VerifyLemma, Construction::Random(_) | Construction::Operator(_)) => {
            return Err("at `task`: verify-lemma needs a geometric construction".into())
        }
        _ => {}
    }
    if item.scan.is_some() && item.task != Task::Scan {
        return Err("at `scan`: only used by the scan task".into());
    }
    Ok(())
}

fn algebra(family: &str, n: usize, scale: f64) -> strongcurv::Result<LieAlgebra> {
    if family == "abelian" {
        LieAlgebra::abelian(n, scale)
    } else {
        make_algebra(family, n, scale)
    }
}

fn subalgebra(g: &LieAlgebra, idx: &Option<Vec<usize>>) -> strongcurv::Result<Subspace> {
    match idx {
        Some(i) => Subspace::coordinate(g, i),
        None => Subspace::coordinate(g, &[g.dim() - 1]),
    }
}

fn bi(p: &AlgebraParams) -> strongcurv::Result<SymmetricBivectorOperator> {
    Ok(biinvariant_r(&algebra(&p.family, p.n, p.scale)?))
}

fn scaled(
    p: &ScaledParams,
    t: f64,
    metric_route: bool,
) -> strongcurv::Result<(SymmetricBivectorOperator, Option<strongcurv::FourForm>)> {
    let g = algebra(&p.family, p.n, p.scale)?;
    let a = subalgebra(&g, &p.subalgebra)?;
    if metric_route {
        Ok((scaled_metric_r(&g, &a, t)?.r, None))
    } else {
        let s = scaled_up_r(&g, &a, t)?;
        Ok((s.r_t, Some(s.omega_t)))
    }
}

/// Operator (and warm-start modifier) described by an operator-valued construction.
fn operator(
    c: &Construction,
    settings: &Settings,
) -> strongcurv::Result<(SymmetricBivectorOperator, Option<strongcurv::FourForm>)> {
    match c {
        Construction::Biinvariant(p) => Ok((bi(p)?, None)),
        Construction::ScaledUp(p) => scaled(p, p.t.expect("validated"), false),
        Construction::ScaledMetric(p) => scaled(p, p.t.expect("validated"), true),
        Construction::Homogeneous(p) => {
            let g = algebra(&p.family, p.n, p.scale)?;
            let h = Subspace::coordinate(&g, &p.isotropy)?;
            let spec = SubmersionSpec::homogeneous(&g, &g.q(), biinvariant_r(&g), h.basis())?;
            Ok((submersion_r(&spec)?, None))
        }
        Construction::Random(p) => {
            let mut rng = seeded(settings.seed.expect("validated"));
            let op = if p.bianchi_free {
                gaussian_bianchi_free(&mut rng, p.n)
            } else {
                let frame = BivectorFrame::new(p.n);
                SymmetricBivectorOperator::from_matrix(
                    frame.clone(),
                    gaussian_symmetric(&mut rng, frame.dim()),
                    "random",
                )?
            };
            Ok((op, None))
        }
        Construction::Operator(rec) => {
            Ok((SymmetricBivectorOperator::try_from(rec.clone())?, None))
        }
        Construction::DiskBundle(p) => {
            let triple = make_triple(&p.triple)?;
            let l = match p.metric {
                MetricChoice::Q => triple.g.q(),
                MetricChoice::Round => make_round_l(&triple)?.l,
            };
            let f = make_profile(p.a, p.t0, p.t_max)?;
            let geom = HalfGeometry::new(&triple, &l)?;
            let spec = geom.submersion_at(&f, p.t)?;
            Ok((submersion_r(&spec)?, None))
        }
        Construction::GzHalf(_) | Construction::CheegerHalf(_) => {
            Err(strongcurv::Error::InvalidParameter(
                "assemblies do not produce a single operator".into(),
            ))
        }
    }
}

fn summary(op: &SymmetricBivectorOperator) -> Value {
    let ev = op.eigenvalues();
    json!({
        "n": op.n(),
        "dim": op.dim(),
        "construction": op.construction(),
        "lambda_min": op.lambda_min(),
        "eigenvalues": ev.iter().copied().collect::<Vec<f64>>(),
    })
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Feasible => EXIT_OK,
        Verdict::Infeasible => EXIT_INFEASIBLE,
        Verdict::Undecided => EXIT_UNDECIDED,
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Feasible => "feasible",
        Verdict::Infeasible => "infeasible",
        Verdict::Undecided => "undecided",
    }
}

struct Outcome {
    status: String,
    code: i32,
    result: Value,
    operator: Option<OperatorRecord>,
}

fn run_inner(item: &Item, settings: &Settings) -> strongcurv::Result<Outcome> {
    let c = &item.construction;
    match item.task {
        Task::Build => match c {
            Construction::GzHalf(_) | Construction::CheegerHalf(_) => assembly(c, settings),
            _ => {
                let (op, _) = operator(c, settings)?;
                Ok(Outcome {
                    status: "built".into(),
                    code: EXIT_OK,
                    result: summary(&op),
                    operator: Some(op.into()),
                })
            }
        },
        Task::Certify => {
            let (op, warm) = operator(c, settings)?;
            let opts = CertifyOptions {
                warm_start: warm,
                ..settings.certify_options()
            };
            let cert = certify_with(&op, &opts)?;
            let validated = validate_certificate(&op, &cert);
            let code = if validated {
                verdict_code(cert.verdict)
            } else {
                EXIT_INTERNAL
            };
            Ok(Outcome {
                status: if validated {
                    verdict_name(cert.verdict).into()
                } else {
                    "invalid-certificate".into()
                },
                code,
                result: json!({
                    "verdict": cert.verdict,
                    "margin": cert.margin,
                    "bound": cert.bound,
                    "gap": cert.gap,
                    "eps": cert.eps,
                    "validated": validated,
                    "certificate": cert,
                    "operator": summary(&op),
                }),
                operator: Some(op.into()),
            })
        }
        Task::Scan => {
            let range = item.scan.as_ref().expect("validated");
            let (p, metric_route) = match c {
                Construction::ScaledUp(p) => (p, false),
                Construction::ScaledMetric(p) => (p, true),
                _ => unreachable!("validated"),
            };
            let report = scan_threshold(
                |t| scaled(p, t, metric_route),
                (range.from, range.to),
                range.step,
                &settings.certify_options(),
            )?;
            let code = if report.points.iter().all(|q| q.validated) {
                EXIT_OK
            } else {
                EXIT_INTERNAL
            };
            Ok(Outcome {
                status: match report.threshold {
                    Some(_) => "threshold-found".into(),
                    None => "no-transition".into(),
                },
                code,
                result: serde_json::to_value(&report).expect("serializable"),
                operator: None,
            })
        }
        Task::VerifyLemma => verify(c, settings),
    }
}

fn assembly(c: &Construction, settings: &Settings) -> strongcurv::Result<Outcome> {
    let (passed, result) = match c {
        Construction::GzHalf(p) => {
            let triple = make_triple(&p.triple)?;
            let b = compute_slice_b(&triple, &triple.g.q())?
                .scalar
                .ok_or_else(|| {
                    strongcurv::Error::Hypothesis("slice metric is not scalar".into())
                })?;
            let a = p.a.unwrap_or(2.0 / b.sqrt());
            let t0 = p.t0_ratio * a;
            let f = make_profile(a, t0, p.t_max_ratio * t0)?;
            let r = assemble_gz_half(&triple, &f, &settings.certify_options())?;
            (r.passed, serde_json::to_value(&r).expect("serializable"))
        }
        Construction::CheegerHalf(p) => {
            let triple = make_triple(&p.triple)?;
            let mut opts = CheegerOptions {
                t0_ratio: p.t0_ratio,
                t_max_ratio: p.t_max_ratio,
                certify: settings.certify_options(),
                ..CheegerOptions::default()
            };
            if let Some(l) = &p.ladder {
                opts.ladder = l.clone();
            }
            let r = assemble_cheeger_half(&triple, &opts)?;
            (r.passed, serde_json::to_value(&r).expect("serializable"))
        }
        _ => unreachable!("assemblies only"),
    };
    Ok(Outcome {
        status: if passed {
            "passed".into()
        } else {
            "failed".into()
        },
        code: if passed { EXIT_OK } else { EXIT_INTERNAL },
        result,
        operator: None,
    })
}

/// Check the statement attached to a construction and report every residual.
fn verify(c: &Construction, settings: &Settings) -> strongcurv::Result<Outcome> {
    let seed = settings.seed.expect("validated");
    let mut checks: Vec<Value> = Vec::new();
    let mut push = |name: &str, value: f64, ok: bool| {
        checks.push(json!({"check": name, "value": value, "passed": ok}));
    };
    match c {
        Construction::Biinvariant(p) => {
            let op = bi(p)?;
            push(
                "lambda_min(R) >= -1e-9",
                op.lambda_min(),
                op.lambda_min() >= -1e-9,
            );
            let s = min_sectional_sampled(&op, 1000, seed)?;
            push("sampled sec >= -1e-9", s.sec, s.sec >= -1e-9);
        }
        Construction::ScaledUp(p) => {
            let t = p.t.expect("validated");
            let g = algebra(&p.family, p.n, p.scale)?;
            let a = subalgebra(&g, &p.subalgebra)?;
            let s = scaled_up_r(&g, &a, t)?;
            let m = s.modified().lambda_min();
            if t <= 4.0 / 3.0 {
                push("lambda_min(R_t + 3b(alpha)) >= -1e-8", m, m >= -1e-8);
            } else {
                push(
                    "lambda_min(R_t + 3b(alpha)) (t > 4/3, informational)",
                    m,
                    true,
                );
            }
            let dec = scale_up_decomposition(&g, &a, t)?;
            let diff = linalg::max_abs(&(dec.sum().entries() - s.modified().entries()));
            push(
                "two-Gram decomposition reproduces R_t + O(omega_t)",
                diff,
                diff <= 1e-9,
            );
            let other = scaled_metric_r(&g, &a, t)?;
            let diff = linalg::max_abs(&(other.r.entries() - s.r_t.entries()));
            push("scaled-metric submersion route agrees", diff, diff <= 1e-10);
            let koszul = strongcurv::curvature::left_invariant_r(&g, &s.metric())?;
            let coords = strongcurv::curvature::to_coordinates(&s.r_t, &s.frame)?;
            let diff = linalg::max_abs(&(koszul.entries() - coords.entries()));
            push("Koszul route agrees", diff, diff <= 1e-10);
        }
        Construction::ScaledMetric(p) => {
            let t = p.t.expect("validated");
            let g = algebra(&p.family, p.n, p.scale)?;
            let a = subalgebra(&g, &p.subalgebra)?;
            let s = scaled_metric_r(&g, &a, t)?;
            let diff = linalg::max_abs(
                &(s.coordinate_form().entries()
                    - strongcurv::curvature::left_invariant_r(&g, &s.metric())?.entries()),
            );
            push(
                "submersion route equals the Koszul route",
                diff,
                diff <= 1e-10,
            );
        }
        Construction::Homogeneous(p) => {
            let g = algebra(&p.family, p.n, p.scale)?;
            let h = Subspace::coordinate(&g, &p.isotropy)?;
            let spec = SubmersionSpec::homogeneous(&g, &g.q(), biinvariant_r(&g), h.basis())?;
            let r = submersion_r(&spec)?;
            let cert = certify_with(&biinvariant_r(&g), &settings.certify_options())?;
            let pushed = spec.pushed_modifier(
                &cert
                    .omega
                    .clone()
                    .unwrap_or_else(|| strongcurv::FourForm::zero(&BivectorFrame::new(g.dim()))),
            )?;
            let m = r.plus_form(&pushed)?.lambda_min();
            push("pushed modifier certifies the quotient", m, m >= -1e-8);
        }
        Construction::DiskBundle(p) => {
            let triple = make_triple(&p.triple)?;
            let l = match p.metric {
                MetricChoice::Q => triple.g.q(),
                MetricChoice::Round => make_round_l(&triple)?.l,
            };
            let f = make_profile(p.a, p.t0, p.t_max)?;
            let geom = HalfGeometry::new(&triple, &l)?;
            let tens = geom.tensoriality_residual(&f, p.t, seed)?;
            push("A-tensor independent of the extension", tens, tens <= 1e-9);
            if geom.m.dim() + geom.slice_b.p.dim() + 1 <= 4 {
                let chart = chart_for_half(&geom, &f, p.t)?;
                let spec = geom.submersion_at(&f, p.t)?;
                let r = submersion_r(&spec)?;
                let fd = fd_riemann(&chart.chart, &chart.center, 1e-3)?;
                let n = chart.chart.dim;
                let mut worst = 0.0_f64;
                for i in 0..n {
                    for j in (i + 1)..n {
                        let ei =
                            nalgebra::DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
                        let ej =
                            nalgebra::DVector::from_fn(n, |k, _| if k == j { 1.0 } else { 0.0 });
                        let a = sectional_curvature(
                            &r,
                            &chart.to_frame.column(i).into_owned(),
                            &chart.to_frame.column(j).into_owned(),
                        )?;
                        worst = worst.max((fd.sectional(&ei, &ej)? - a).abs());
                    }
                }
                push(
                    "finite-difference chart agrees on coordinate planes",
                    worst,
                    worst <= 1e-3,
                );
            }
        }
        Construction::GzHalf(_) | Construction::CheegerHalf(_) => return assembly(c, settings),
        Construction::Random(_) | Construction::Operator(_) => unreachable!("validated"),
    }
    let passed = checks.iter().all(|c| c["passed"] == json!(true));
    Ok(Outcome {
        status: if passed {
            "passed".into()
        } else {
            "failed".into()
        },
        code: if passed { EXIT_OK } else { EXIT_INTERNAL },
        result: json!({ "checks": checks }),
        operator: None,
    })
}

pub fn run_item(index: usize, item: &Item, settings: &Settings) -> ItemReport {
    let start = Instant::now();
    let outcome = run_inner(item, settings).unwrap_or_else(|e| Outcome {
        status: "error".into(),
        code: EXIT_INTERNAL,
        result: json!({ "error": e.to_string() }),
        operator: None,
    });
    ItemReport {
        index,
        construction: item.construction.name().into(),
        task: item.task,
        status: outcome.status,
        exit_code: outcome.code,
        wall_time_s: start.elapsed().as_secs_f64(),
        result: outcome.result,
        operator: outcome.operator,
    }
}
