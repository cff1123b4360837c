//! Scenario files: what to build and what to do with it.

use serde::{Deserialize, Serialize};
use strongcurv::exterior::OperatorRecord;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Single-item form.
    pub construction: Option<Construction>,
    pub task: Option<Task>,
    pub scan: Option<ScanRange>,
    /// Multi-item form; mutually exclusive with `construction`/`task`.
    pub items: Option<Vec<Item>>,
    pub tolerances: Option<Tolerances>,
    pub seed: Option<u64>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Item {
    pub construction: Construction,
    pub task: Task,
    pub scan: Option<ScanRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Build,
    Certify,
    Scan,
    VerifyLemma,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol: Option<f64>,
    pub budget: Option<usize>,
}

/// Grid for the `scan` task over the construction's `t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRange {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    tag = "name",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum Construction {
    Biinvariant(AlgebraParams),
    ScaledUp(ScaledParams),
    ScaledMetric(ScaledParams),
    Homogeneous(HomogeneousParams),
    Random(RandomParams),
    Operator(OperatorRecord),
    DiskBundle(DiskBundleParams),
    GzHalf(GzParams),
    CheegerHalf(CheegerParams),
}

impl Construction {
    pub fn name(&self) -> &'static str {
        match self {
            Construction::Biinvariant(_) => "biinvariant",
            Construction::ScaledUp(_) => "scaled_up",
            Construction::ScaledMetric(_) => "scaled_metric",
            Construction::Homogeneous(_) => "homogeneous",
            Construction::Random(_) => "random",
            Construction::Operator(_) => "operator",
            Construction::DiskBundle(_) => "disk_bundle",
            Construction::GzHalf(_) => "gz_half",
            Construction::CheegerHalf(_) => "cheeger_half",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Construction::Random(_))
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraParams {
    /// `so`, `su`, `u`, `sp`, `abelian`.
    pub family: String,
    pub n: usize,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledParams {
    pub family: String,
    pub n: usize,
    #[serde(default = "one")]
    pub scale: f64,
    /// Basis indices spanning the scaled subalgebra; defaults to the last one.
    pub subalgebra: Option<Vec<usize>>,
    /// Required except for `scan`.
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousParams {
    pub family: String,
    pub n: usize,
    #[serde(default = "one")]
    pub scale: f64,
    /// Basis indices spanning the isotropy algebra.
    pub isotropy: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomParams {
    /// Dimension of the underlying vector space.
    pub n: usize,
    /// Gaussian algebraic curvature operator (Bianchi part removed).
    #[serde(default)]
    pub bianchi_free: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricChoice {
    /// The bi-invariant `Q`.
    Q,
    /// The metric inducing the round sphere on the principal orbit.
    Round,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskBundleParams {
    pub triple: String,
    pub metric: MetricChoice,
    pub a: f64,
    pub t0: f64,
    pub t_max: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GzParams {
    pub triple: String,
    /// Plateau; defaults to `2/√b`.
    pub a: Option<f64>,
    #[serde(default = "default_t0_ratio")]
    pub t0_ratio: f64,
    #[serde(default = "default_t_max_ratio")]
    pub t_max_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheegerParams {
    pub triple: String,
    /// Plateau multiples of `1/√b`.
    pub ladder: Option<Vec<f64>>,
    #[serde(default = "default_t0_ratio")]
    pub t0_ratio: f64,
    #[serde(default = "default_t_max_ratio")]
    pub t_max_ratio: f64,
}

fn default_t0_ratio() -> f64 {
    1.5
}

fn default_t_max_ratio() -> f64 {
    2.0
}

/// Parse with the path of the offending key in the error message.
pub fn parse(text: &str) -> Result<Scenario, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        format!("at `{path}`: {}", e.into_inner())
    })?;
    Ok(scenario)
}

impl Scenario {
    /// Items in scenario order, after the structural checks serde cannot express.
    pub fn items(&self) -> Result<Vec<Item>, String> {
        match (&self.items, &self.construction, &self.task) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(
                "at `items`: give either `items` or a single `construction`/`task`, not both"
                    .into(),
            ),
            (Some(items), None, None) if items.is_empty() => Err("at `items`: empty list".into()),
            (Some(items), None, None) => {
                if self.scan.is_some() {
                    return Err("at `scan`: put scan ranges inside the items".into());
                }
                Ok(items.clone())
            }
            (None, Some(c), Some(t)) => Ok(vec![Item {
                construction: c.clone(),
                task: *t,
                scan: self.scan.clone(),
            }]),
            (None, None, _) => Err("at `construction`: missing field".into()),
            (None, Some(_), None) => Err("at `task`: missing field".into()),
        }
    }
}
