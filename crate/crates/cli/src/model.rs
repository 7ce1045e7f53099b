//! Model-file schema and execution. Files are JSON with a version, a kind
//! tag, a kind-specific body, and a list of named queries. Validation runs
//! before execution; execution errors are carried per query so one bad
//! query does not abort the rest.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Value};

use kernelcat::bayes::{infer_with_policy, posterior, InferenceResult, ZeroMassPolicy};
use kernelcat::finite::{Dist, Event, FiniteSpace, Joint, Kernel};
use kernelcat::gauss::{CovFn, Gaussian, GpState, MeanFn, Observation, ParametricModel};
use kernelcat::markov::{HmmSpec, LinearGaussianModel, MarkovChain};

use crate::util::{fmt_f64, fmt_rational, fmt_vec, parse_rational, validation, CliResult};

pub const SUPPORTED_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    #[serde(flatten)]
    pub spec: KindSpec,
    #[serde(default)]
    pub queries: Vec<Query>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KindSpec {
    DiscreteBayes { body: DiscreteBody },
    Gp { body: GpBody },
    Parametric { body: ParametricBody },
    Hmm { body: HmmBody },
    Kalman { body: KalmanBody },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub name: String,
    pub atoms: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteBody {
    pub hypothesis: SpaceSpec,
    pub data: SpaceSpec,
    pub prior: BTreeMap<String, String>,
    pub sampling: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    pub zero_mass_policy: Option<String>,
    /// Optional claimed inference kernel, checked by `verify` against the
    /// product rule.
    #[serde(default)]
    pub inference: Option<BTreeMap<String, BTreeMap<String, String>>>,
    #[serde(default)]
    pub extensions: Vec<ExtensionSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    pub space: SpaceSpec,
    pub kernel: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpBody {
    pub mean: MeanFn,
    pub cov: CovFn,
    pub noise_var: f64,
    #[serde(default)]
    pub data: Vec<Observation>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricBody {
    pub input_dim: usize,
    pub basis: Vec<kernelcat::gauss::BasisFn>,
    pub prior: GaussianSpec,
    pub noise_var: f64,
    #[serde(default)]
    pub data: Vec<Observation>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmmBody {
    pub times: Vec<String>,
    pub spaces: Vec<SpaceSpec>,
    pub observations: Vec<SpaceSpec>,
    pub transitions: Vec<BTreeMap<String, BTreeMap<String, String>>>,
    pub sensors: Vec<BTreeMap<String, BTreeMap<String, String>>>,
    pub initial: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KalmanBody {
    pub transition: Vec<Vec<f64>>,
    pub process_noise: Vec<Vec<f64>>,
    pub observation: Vec<Vec<f64>>,
    pub observation_noise: Vec<Vec<f64>>,
    pub initial: GaussianSpec,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Query {
    pub name: String,
    #[serde(flatten)]
    pub spec: QuerySpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum QuerySpec {
    /// Pushforward of the prior through the sampling kernel.
    Evidence,
    /// Full inference kernel, one row per data atom.
    Inference,
    /// The joint of prior and sampling kernel.
    Joint,
    /// The joint after all extensions.
    ExtendedJoint,
    /// Posterior for a measurement distribution over the data atoms.
    Posterior { measurement: BTreeMap<String, String> },
    /// Conditional probability on the extended joint.
    Conditional {
        given: Vec<FactorEventSpec>,
        target: Vec<FactorEventSpec>,
    },
    /// Mass of an event on the extended joint.
    Mass { events: Vec<FactorEventSpec> },
    /// Posterior marginal of a process at explicit points.
    Marginal { points: Vec<Vec<f64>> },
    /// Posterior curve on an evenly spaced grid: (z, mean, mean ± 2σ).
    Curve { start: f64, stop: f64, count: usize },
    /// Posterior over the weights of a parametric model.
    WeightPosterior,
    /// Function-value posterior of a parametric model at points.
    Predictive { points: Vec<Vec<f64>> },
    /// Filter a measurement sequence (finite or linear-Gaussian).
    Filter { measurements: Vec<Value> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorEventSpec {
    pub factor: usize,
    pub atoms: Vec<String>,
}

pub fn parse_model(text: &str) -> CliResult<ModelFile> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| validation(format!("model file: {e}")))?;
    if file.version != SUPPORTED_VERSION {
        return Err(validation(format!(
            "unsupported model version {} (expected {SUPPORTED_VERSION})",
            file.version
        )));
    }
    Ok(file)
}

// ---------------------------------------------------------------------------
// Construction of engine values from the parsed body.
// ---------------------------------------------------------------------------

fn build_space(spec: &SpaceSpec) -> CliResult<FiniteSpace> {
    FiniteSpace::new_plain(&spec.name, spec.atoms.clone())
        .map_err(|e| validation(format!("space `{}`: {e}", spec.name)))
}

fn build_dist(space: &FiniteSpace, map: &BTreeMap<String, String>, field: &str) -> CliResult<Dist> {
    let mut weights = vec![parse_rational("0", field)?; space.len()];
    for (atom, text) in map {
        let index = space
            .index_of(atom)
            .ok_or_else(|| validation(format!("field `{field}`: unknown atom `{atom}`")))?;
        weights[index] = parse_rational(text, &format!("{field}.{atom}"))?;
    }
    Dist::new(space.clone(), weights).map_err(|e| validation(format!("field `{field}`: {e}")))
}

fn build_kernel(
    domain: &FiniteSpace,
    codomain: &FiniteSpace,
    map: &BTreeMap<String, BTreeMap<String, String>>,
    field: &str,
) -> CliResult<Kernel> {
    let mut rows = Vec::with_capacity(domain.len());
    for atom in domain.atoms() {
        let row = map.get(atom).ok_or_else(|| {
            validation(format!("field `{field}`: no row for atom `{atom}`"))
        })?;
        rows.push(build_dist(codomain, row, &format!("{field}.{atom}"))?);
    }
    for atom in map.keys() {
        if !domain.contains(atom) {
            return Err(validation(format!(
                "field `{field}`: row for unknown atom `{atom}`"
            )));
        }
    }
    Kernel::new(domain.clone(), codomain.clone(), rows)
        .map_err(|e| validation(format!("field `{field}`: {e}")))
}

fn build_gaussian(spec: &GaussianSpec, field: &str) -> CliResult<Gaussian> {
    Gaussian::from_parts(spec.mean.clone(), spec.cov.clone())
        .map_err(|e| validation(format!("field `{field}`: {e}")))
}

/// A fully validated discrete model with its inference result and the
/// extended joint ready for conditional queries.
pub struct DiscreteModel {
    pub model: kernelcat::bayes::BayesModel,
    pub inference: InferenceResult,
    pub base_joint: Joint,
    pub extended: Joint,
}

pub fn build_discrete(body: &DiscreteBody) -> CliResult<DiscreteModel> {
    let hypothesis = build_space(&body.hypothesis)?;
    let data = build_space(&body.data)?;
    let prior = build_dist(&hypothesis, &body.prior, "prior")?;
    let sampling = build_kernel(&hypothesis, &data, &body.sampling, "sampling")?;
    let policy = match body.zero_mass_policy.as_deref() {
        None | Some("uniform") => ZeroMassPolicy::Uniform,
        Some("copy-prior") => ZeroMassPolicy::CopyPrior,
        Some(other) => {
            return Err(validation(format!(
                "field `zero_mass_policy`: unknown policy `{other}`"
            )))
        }
    };
    let model = kernelcat::bayes::BayesModel::new(prior.clone(), sampling)
        .map_err(|e| validation(e.to_string()))?;
    let inference = infer_with_policy(&model, policy);
    let base_joint = Joint::from_prior_and_kernel(model.prior(), model.sampling())
        .map_err(|e| validation(e.to_string()))?;

    let mut extended = base_joint.clone();
    for (i, extension) in body.extensions.iter().enumerate() {
        let field = format!("extensions[{i}]");
        let codomain = build_space(&extension.space)?;
        let kernel = build_kernel(
            extended.space().as_space(),
            &codomain,
            &extension.kernel,
            &format!("{field}.kernel"),
        )?;
        extended = extended
            .extend(&kernel)
            .map_err(|e| validation(format!("{field}: {e}")))?;
    }
    Ok(DiscreteModel {
        model,
        inference,
        base_joint,
        extended,
    })
}

/// Build the claimed inference kernel (data atoms to hypothesis atoms)
/// declared in a discrete body.
pub fn build_claimed_inference(
    body: &DiscreteBody,
    claimed: &BTreeMap<String, BTreeMap<String, String>>,
) -> CliResult<Kernel> {
    let hypothesis = build_space(&body.hypothesis)?;
    let data = build_space(&body.data)?;
    build_kernel(&data, &hypothesis, claimed, "inference")
}

pub fn build_gp(body: &GpBody) -> CliResult<GpState> {
    body.cov
        .validate()
        .map_err(|e| validation(format!("field `cov`: {e}")))?;
    let gp = GpState::new(body.mean.clone(), body.cov.clone(), body.noise_var)
        .map_err(|e| validation(format!("field `noise_var`: {e}")))?;
    Ok(gp.with_data(body.data.clone()))
}

pub fn build_parametric(body: &ParametricBody) -> CliResult<ParametricModel> {
    let prior = build_gaussian(&body.prior, "prior")?;
    ParametricModel::new(body.input_dim, body.basis.clone(), prior, body.noise_var)
        .map_err(|e| validation(format!("parametric model: {e}")))
}

pub struct HmmModel {
    pub spec: HmmSpec,
    pub observation_spaces: Vec<FiniteSpace>,
}

pub fn build_hmm(body: &HmmBody) -> CliResult<HmmModel> {
    let spaces = body
        .spaces
        .iter()
        .map(build_space)
        .collect::<CliResult<Vec<_>>>()?;
    let observations = body
        .observations
        .iter()
        .map(build_space)
        .collect::<CliResult<Vec<_>>>()?;
    if spaces.len() != body.times.len() || observations.len() != body.times.len() {
        return Err(validation(
            "spaces and observations must both list one space per time".to_owned(),
        ));
    }
    if body.transitions.len() + 1 != body.times.len() {
        return Err(validation(format!(
            "{} transitions for {} times",
            body.transitions.len(),
            body.times.len()
        )));
    }
    let transitions = body
        .transitions
        .iter()
        .enumerate()
        .map(|(i, map)| {
            build_kernel(
                &spaces[i],
                &spaces[i + 1],
                map,
                &format!("transitions[{i}]"),
            )
        })
        .collect::<CliResult<Vec<_>>>()?;
    let sensors = body
        .sensors
        .iter()
        .enumerate()
        .map(|(i, map)| {
            build_kernel(&spaces[i], &observations[i], map, &format!("sensors[{i}]"))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let initial = build_dist(&spaces[0], &body.initial, "initial")?;
    let chain = MarkovChain::new(body.times.clone(), spaces, transitions)
        .map_err(|e| validation(e.to_string()))?;
    let spec = HmmSpec::new(chain, sensors, initial).map_err(|e| validation(e.to_string()))?;
    Ok(HmmModel {
        spec,
        observation_spaces: observations,
    })
}

pub fn build_kalman(body: &KalmanBody) -> CliResult<LinearGaussianModel> {
    let to_matrix = |rows: &Vec<Vec<f64>>, field: &str| -> CliResult<nalgebra::DMatrix<f64>> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
            return Err(validation(format!("field `{field}`: ragged or empty matrix")));
        }
        Ok(nalgebra::DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    };
    LinearGaussianModel::new(
        to_matrix(&body.transition, "transition")?,
        to_matrix(&body.process_noise, "process_noise")?,
        to_matrix(&body.observation, "observation")?,
        to_matrix(&body.observation_noise, "observation_noise")?,
        build_gaussian(&body.initial, "initial")?,
    )
    .map_err(|e| validation(format!("kalman model: {e}")))
}

// ---------------------------------------------------------------------------
// Query execution.
// ---------------------------------------------------------------------------

#[derive(Debug, Default)]
pub struct Diagnostics {
    pub zero_mass_atoms: Vec<String>,
    pub jitter_applied: bool,
}

pub struct QueryOutcome {
    pub name: String,
    pub result: Result<Value, String>,
}

pub struct Execution {
    pub outcomes: Vec<QueryOutcome>,
    pub diagnostics: Diagnostics,
}

fn dist_value(dist: &Dist) -> Value {
    let map: BTreeMap<String, String> = dist
        .space()
        .atoms()
        .iter()
        .zip(dist.weights())
        .map(|(atom, w)| (atom.clone(), fmt_rational(w)))
        .collect();
    json!(map)
}

fn kernel_value(kernel: &Kernel) -> Value {
    let map: BTreeMap<String, Value> = kernel
        .domain()
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, atom)| (atom.clone(), dist_value(kernel.row(i))))
        .collect();
    json!(map)
}

fn gaussian_value(g: &Gaussian) -> Value {
    let mean = fmt_vec(g.mean().iter().copied());
    let cov: Vec<Vec<Value>> = (0..g.dim())
        .map(|i| {
            (0..g.dim())
                .map(|j| Value::String(fmt_f64(g.cov()[(i, j)])))
                .collect()
        })
        .collect();
    json!({ "mean": mean, "cov": cov })
}

fn event_from_specs(joint: &Joint, specs: &[FactorEventSpec]) -> Result<Event, String> {
    let mut event: Option<Event> = None;
    for spec in specs {
        let factor_event = joint
            .space()
            .factor_event(spec.factor, spec.atoms.iter().map(String::as_str))
            .map_err(|e| e.to_string())?;
        event = Some(match event {
            None => factor_event,
            Some(acc) => acc.intersect(&factor_event).map_err(|e| e.to_string())?,
        });
    }
    event.ok_or_else(|| "event needs at least one factor constraint".to_owned())
}

pub fn execute(file: &ModelFile) -> CliResult<Execution> {
    match &file.spec {
        KindSpec::DiscreteBayes { body } => execute_discrete(body, &file.queries),
        KindSpec::Gp { body } => execute_gp(body, &file.queries),
        KindSpec::Parametric { body } => execute_parametric(body, &file.queries),
        KindSpec::Hmm { body } => execute_hmm(body, &file.queries),
        KindSpec::Kalman { body } => execute_kalman(body, &file.queries),
    }
}

fn execute_discrete(body: &DiscreteBody, queries: &[Query]) -> CliResult<Execution> {
    let model = build_discrete(body)?;
    let mut outcomes = Vec::new();
    for query in queries {
        let result: Result<Value, String> = match &query.spec {
            QuerySpec::Evidence => Ok(dist_value(&model.inference.evidence)),
            QuerySpec::Inference => Ok(kernel_value(&model.inference.inference)),
            QuerySpec::Joint => Ok(dist_value(model.base_joint.dist())),
            QuerySpec::ExtendedJoint => Ok(dist_value(model.extended.dist())),
            QuerySpec::Posterior { measurement } => {
                let space = model.inference.evidence.space().clone();
                build_dist(&space, measurement, &format!("queries.{}", query.name))
                    .map_err(|e| e.to_string())
                    .and_then(|m| {
                        posterior(&model.inference, &m).map_err(|e| e.to_string())
                    })
                    .map(|p| dist_value(&p))
            }
            QuerySpec::Conditional { given, target } => event_from_specs(&model.extended, given)
                .and_then(|g| {
                    let t = event_from_specs(&model.extended, target)?;
                    model
                        .extended
                        .conditional(&g, &t)
                        .map_err(|e| e.to_string())
                })
                .map(|v| Value::String(fmt_rational(&v))),
            QuerySpec::Mass { events } => event_from_specs(&model.extended, events)
                .and_then(|e| model.extended.mass(&e).map_err(|err| err.to_string()))
                .map(|v| Value::String(fmt_rational(&v))),
            other => Err(format!("query type {other:?} does not apply to discrete models")),
        };
        outcomes.push(QueryOutcome {
            name: query.name.clone(),
            result,
        });
    }
    Ok(Execution {
        outcomes,
        diagnostics: Diagnostics {
            zero_mass_atoms: model.inference.zero_mass_atoms.clone(),
            jitter_applied: false,
        },
    })
}

fn curve_rows(gp: &GpState, start: f64, stop: f64, count: usize) -> Result<(Vec<Value>, bool), String> {
    if count < 2 {
        return Err("curve needs at least two points".to_owned());
    }
    let step = (stop - start) / (count - 1) as f64;
    let points: Vec<Vec<f64>> = (0..count).map(|i| vec![start + step * i as f64]).collect();
    let (posterior, info) = gp
        .posterior_batch_with_info(&points)
        .map_err(|e| e.to_string())?;
    let rows = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mean = posterior.mean()[i];
            let sd = posterior.variance(i).max(0.0).sqrt();
            json!([
                fmt_f64(p[0]),
                fmt_f64(mean),
                fmt_f64(mean - 2.0 * sd),
                fmt_f64(mean + 2.0 * sd),
            ])
        })
        .collect();
    Ok((rows, info.jitter_applied))
}

fn execute_gp(body: &GpBody, queries: &[Query]) -> CliResult<Execution> {
    let gp = build_gp(body)?;
    let mut diagnostics = Diagnostics::default();
    let mut outcomes = Vec::new();
    for query in queries {
        let result: Result<Value, String> = match &query.spec {
            QuerySpec::Marginal { points } => gp
                .posterior_batch_with_info(points)
                .map_err(|e| e.to_string())
                .map(|(posterior, info)| {
                    diagnostics.jitter_applied |= info.jitter_applied;
                    gaussian_value(&posterior)
                }),
            QuerySpec::Curve { start, stop, count } => {
                curve_rows(&gp, *start, *stop, *count).map(|(rows, jitter)| {
                    diagnostics.jitter_applied |= jitter;
                    json!(rows)
                })
            }
            other => Err(format!("query type {other:?} does not apply to gp models")),
        };
        outcomes.push(QueryOutcome {
            name: query.name.clone(),
            result,
        });
    }
    Ok(Execution {
        outcomes,
        diagnostics,
    })
}

fn execute_parametric(body: &ParametricBody, queries: &[Query]) -> CliResult<Execution> {
    let model = build_parametric(body)?;
    let mut outcomes = Vec::new();
    for query in queries {
        let result: Result<Value, String> = match &query.spec {
            QuerySpec::WeightPosterior => model
                .posterior(&body.data)
                .map_err(|e| e.to_string())
                .map(|g| gaussian_value(&g)),
            QuerySpec::Predictive { points } => model
                .posterior(&body.data)
                .and_then(|weights| model.predictive(&weights, points))
                .map_err(|e| e.to_string())
                .map(|g| gaussian_value(&g)),
            other => Err(format!(
                "query type {other:?} does not apply to parametric models"
            )),
        };
        outcomes.push(QueryOutcome {
            name: query.name.clone(),
            result,
        });
    }
    Ok(Execution {
        outcomes,
        diagnostics: Diagnostics::default(),
    })
}

fn execute_hmm(body: &HmmBody, queries: &[Query]) -> CliResult<Execution> {
    let model = build_hmm(body)?;
    let mut outcomes = Vec::new();
    for query in queries {
        let result: Result<Value, String> = match &query.spec {
            QuerySpec::Filter { measurements } => {
                parse_hmm_measurements(&model, measurements).and_then(|dists| {
                    model
                        .spec
                        .run_filter(&dists)
                        .map_err(|e| e.to_string())
                        .map(|trace| json!(trace.iter().map(dist_value).collect::<Vec<_>>()))
                })
            }
            other => Err(format!("query type {other:?} does not apply to hmm models")),
        };
        outcomes.push(QueryOutcome {
            name: query.name.clone(),
            result,
        });
    }
    Ok(Execution {
        outcomes,
        diagnostics: Diagnostics::default(),
    })
}

fn parse_hmm_measurements(model: &HmmModel, raw: &[Value]) -> Result<Vec<Dist>, String> {
    if raw.len() > model.observation_spaces.len() {
        return Err(format!(
            "{} measurements for {} times",
            raw.len(),
            model.observation_spaces.len()
        ));
    }
    raw.iter()
        .enumerate()
        .map(|(i, value)| {
            let space = &model.observation_spaces[i];
            match value {
                Value::String(atom) => {
                    Dist::dirac(space.clone(), atom).map_err(|e| e.to_string())
                }
                Value::Object(map) => {
                    let weights: BTreeMap<String, String> = map
                        .iter()
                        .map(|(k, v)| match v {
                            Value::String(s) => Ok((k.clone(), s.clone())),
                            _ => Err(format!("measurement {i}: weights must be rational strings")),
                        })
                        .collect::<Result<_, String>>()?;
                    build_dist(space, &weights, &format!("measurements[{i}]"))
                        .map_err(|e| e.to_string())
                }
                _ => Err(format!(
                    "measurement {i}: expected an atom label or a weight map"
                )),
            }
        })
        .collect()
}

fn execute_kalman(body: &KalmanBody, queries: &[Query]) -> CliResult<Execution> {
    let model = build_kalman(body)?;
    let mut outcomes = Vec::new();
    for query in queries {
        let result: Result<Value, String> = match &query.spec {
            QuerySpec::Filter { measurements } => measurements
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    serde_json::from_value::<Vec<f64>>(v.clone())
                        .map_err(|e| format!("measurement {i}: {e}"))
                })
                .collect::<Result<Vec<_>, String>>()
                .and_then(|ys| {
                    kernelcat::markov::run_filter(&model, &ys).map_err(|e| e.to_string())
                })
                .map(|trace| json!(trace.iter().map(gaussian_value).collect::<Vec<_>>())),
            other => Err(format!("query type {other:?} does not apply to kalman models")),
        };
        outcomes.push(QueryOutcome {
            name: query.name.clone(),
            result,
        });
    }
    Ok(Execution {
        outcomes,
        diagnostics: Diagnostics::default(),
    })
}
