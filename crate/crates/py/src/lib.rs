//! Python bindings for the kernelcat engine.
//!
//! Exact rational values cross the boundary as `p/q` strings so nothing is
//! lost to floating point; Gaussian quantities cross as plain floats.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kernelcat::bayes;
use kernelcat::finite;
use kernelcat::funcspace;
use kernelcat::gauss;
use kernelcat::markov;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_rational(text: &str) -> PyResult<BigRational> {
    let parse_int = |part: &str| -> PyResult<BigInt> {
        part.trim()
            .parse::<BigInt>()
            .map_err(|_| err(format!("`{part}` is not an integer")))
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (parse_int(n)?, parse_int(d)?),
        None => (parse_int(text)?, BigInt::from(1)),
    };
    if den.is_zero() {
        return Err(err(format!("rational `{text}` has a zero denominator")));
    }
    Ok(BigRational::new(num, den))
}

fn parse_weights(weights: Vec<String>) -> PyResult<Vec<BigRational>> {
    weights.iter().map(|w| parse_rational(w)).collect()
}

// ---------------------------------------------------------------------------
// Finite spaces, distributions, kernels
// ---------------------------------------------------------------------------

/// A named finite space with ordered atom labels.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct FiniteSpace {
    inner: finite::FiniteSpace,
}

#[pymethods]
impl FiniteSpace {
    #[new]
    fn new(name: &str, atoms: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: finite::FiniteSpace::new_plain(name, atoms).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_owned()
    }

    #[getter]
    fn atoms(&self) -> Vec<String> {
        self.inner.atoms().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("FiniteSpace({})", self.inner)
    }
}

/// An exact probability distribution; weights are `p/q` strings.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Dist {
    inner: finite::Dist,
}

#[pymethods]
impl Dist {
    #[new]
    fn new(space: FiniteSpace, weights: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: finite::Dist::new(space.inner, parse_weights(weights)?).map_err(err)?,
        })
    }

    #[staticmethod]
    fn dirac(space: FiniteSpace, atom: &str) -> PyResult<Self> {
        Ok(Self {
            inner: finite::Dist::dirac(space.inner, atom).map_err(err)?,
        })
    }

    #[staticmethod]
    fn uniform(space: FiniteSpace) -> Self {
        Self {
            inner: finite::Dist::uniform(space.inner),
        }
    }

    #[getter]
    fn space(&self) -> FiniteSpace {
        FiniteSpace {
            inner: self.inner.space().clone(),
        }
    }

    /// Weights as `p/q` strings in atom order.
    fn weights(&self) -> Vec<String> {
        self.inner.weights().iter().map(|w| w.to_string()).collect()
    }

    fn weight_of(&self, atom: &str) -> PyResult<String> {
        Ok(self.inner.weight_of(atom).map_err(err)?.to_string())
    }

    /// Pushforward through a kernel.
    fn push(&self, kernel: &Kernel) -> PyResult<Dist> {
        Ok(Dist {
            inner: finite::pushforward(&self.inner, &kernel.inner).map_err(err)?,
        })
    }

    fn __eq__(&self, other: &Dist) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Dist({} over {})",
            self.weights().join(", "),
            self.inner.space().name()
        )
    }
}

/// A Markov kernel: one exact distribution over the codomain per domain atom.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Kernel {
    inner: finite::Kernel,
}

#[pymethods]
impl Kernel {
    #[new]
    fn new(domain: FiniteSpace, codomain: FiniteSpace, rows: Vec<Vec<String>>) -> PyResult<Self> {
        let rows = rows
            .into_iter()
            .map(parse_weights)
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: finite::Kernel::from_rows(domain.inner, codomain.inner, rows).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(space: FiniteSpace) -> Self {
        Self {
            inner: finite::Kernel::identity(space.inner),
        }
    }

    #[staticmethod]
    fn deterministic(
        domain: FiniteSpace,
        codomain: FiniteSpace,
        table: std::collections::HashMap<String, String>,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: finite::Kernel::deterministic(domain.inner, codomain.inner, &table)
                .map_err(err)?,
        })
    }

    #[getter]
    fn domain(&self) -> FiniteSpace {
        FiniteSpace {
            inner: self.inner.domain().clone(),
        }
    }

    #[getter]
    fn codomain(&self) -> FiniteSpace {
        FiniteSpace {
            inner: self.inner.codomain().clone(),
        }
    }

    /// Entry `T(target | given)` as a `p/q` string.
    fn value(&self, target: &str, given: &str) -> PyResult<String> {
        Ok(self.inner.value(target, given).map_err(err)?.to_string())
    }

    fn row(&self, atom: &str) -> PyResult<Dist> {
        Ok(Dist {
            inner: self.inner.row_of(atom).map_err(err)?.clone(),
        })
    }

    /// Diagrammatic composition: `self` then `next`.
    fn then(&self, next: &Kernel) -> PyResult<Kernel> {
        Ok(Kernel {
            inner: self.inner.then(&next.inner).map_err(err)?,
        })
    }

    fn __eq__(&self, other: &Kernel) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel({} -> {})",
            self.inner.domain().name(),
            self.inner.codomain().name()
        )
    }
}

/// Chapman–Kolmogorov composition `second ∘ first`.
#[pyfunction]
fn compose(second: &Kernel, first: &Kernel) -> PyResult<Kernel> {
    Ok(Kernel {
        inner: finite::compose(&second.inner, &first.inner).map_err(err)?,
    })
}

// ---------------------------------------------------------------------------
// Joints and Bayesian inversion
// ---------------------------------------------------------------------------

/// A joint distribution over a product of finite spaces.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Joint {
    inner: finite::Joint,
}

#[pymethods]
impl Joint {
    /// `J(x,y) = prior(x) · h(y|x)`.
    #[staticmethod]
    fn from_prior_and_kernel(prior: &Dist, h: &Kernel) -> PyResult<Self> {
        Ok(Self {
            inner: finite::Joint::from_prior_and_kernel(&prior.inner, &h.inner).map_err(err)?,
        })
    }

    /// Independent tensor product of two distributions.
    #[staticmethod]
    fn independent(p: &Dist, q: &Dist) -> PyResult<Self> {
        Ok(Self {
            inner: finite::Joint::independent(&p.inner, &q.inner).map_err(err)?,
        })
    }

    /// Extend by one more conditional draw on the whole current product.
    fn extend(&self, next: &Kernel) -> PyResult<Joint> {
        Ok(Joint {
            inner: self.inner.extend(&next.inner).map_err(err)?,
        })
    }

    /// Marginal onto one factor.
    fn marginal(&self, factor: usize) -> PyResult<Dist> {
        Ok(Dist {
            inner: self.inner.marginal(factor).map_err(err)?,
        })
    }

    /// Weight of a product atom given per-factor labels, as `p/q`.
    fn weight_of(&self, labels: Vec<String>) -> PyResult<String> {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Ok(self.inner.weight_of(&refs).map_err(err)?.to_string())
    }

    /// Mass of the event fixing each listed factor to the given atoms.
    fn mass(&self, events: Vec<(usize, Vec<String>)>) -> PyResult<String> {
        Ok(self.event(&events)?.0.to_string())
    }

    /// `Pr(target | given)` with both events given as factor constraints.
    fn conditional(
        &self,
        given: Vec<(usize, Vec<String>)>,
        target: Vec<(usize, Vec<String>)>,
    ) -> PyResult<String> {
        let given = self.event(&given)?.1;
        let target = self.event(&target)?.1;
        Ok(self
            .inner
            .conditional(&given, &target)
            .map_err(err)?
            .to_string())
    }

    /// The product as a flat finite space of tuple atoms.
    fn as_space(&self) -> FiniteSpace {
        FiniteSpace {
            inner: self.inner.space().as_space().clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!("Joint(over {})", self.inner.space().as_space().name())
    }
}

impl Joint {
    fn event(
        &self,
        constraints: &[(usize, Vec<String>)],
    ) -> PyResult<(BigRational, finite::Event)> {
        let mut event: Option<finite::Event> = None;
        for (factor, atoms) in constraints {
            let e = self
                .inner
                .space()
                .factor_event(*factor, atoms.iter().map(String::as_str))
                .map_err(err)?;
            event = Some(match event {
                None => e,
                Some(acc) => acc.intersect(&e).map_err(err)?,
            });
        }
        let event = event.ok_or_else(|| err("event needs at least one constraint"))?;
        let mass = self.inner.mass(&event).map_err(err)?;
        Ok((mass, event))
    }
}

/// The result of Bayesian inversion: the inference kernel, the evidence,
/// and the data atoms whose rows were filled by the fallback policy.
#[pyclass(frozen)]
struct InferenceResult {
    #[pyo3(get)]
    zero_mass_atoms: Vec<String>,
    inference: finite::Kernel,
    evidence: finite::Dist,
}

#[pymethods]
impl InferenceResult {
    #[getter]
    fn inference(&self) -> Kernel {
        Kernel {
            inner: self.inference.clone(),
        }
    }

    #[getter]
    fn evidence(&self) -> Dist {
        Dist {
            inner: self.evidence.clone(),
        }
    }
}

/// Invert a sampling kernel against a prior. `policy` picks the rows at
/// zero-evidence atoms: "uniform" (default) or "copy-prior".
#[pyfunction]
#[pyo3(signature = (prior, sampling, policy = "uniform"))]
fn infer(prior: &Dist, sampling: &Kernel, policy: &str) -> PyResult<InferenceResult> {
    let policy = match policy {
        "uniform" => bayes::ZeroMassPolicy::Uniform,
        "copy-prior" => bayes::ZeroMassPolicy::CopyPrior,
        other => return Err(err(format!("unknown zero-mass policy `{other}`"))),
    };
    let model = bayes::BayesModel::new(prior.inner.clone(), sampling.inner.clone()).map_err(err)?;
    let result = bayes::infer_with_policy(&model, policy);
    Ok(InferenceResult {
        zero_mass_atoms: result.zero_mass_atoms,
        inference: result.inference,
        evidence: result.evidence,
    })
}

/// Posterior for a measurement distribution on the data space.
#[pyfunction]
fn posterior(result: &InferenceResult, measurement: &Dist) -> PyResult<Dist> {
    let engine_result = bayes::InferenceResult {
        inference: result.inference.clone(),
        evidence: result.evidence.clone(),
        zero_mass_atoms: result.zero_mass_atoms.clone(),
    };
    Ok(Dist {
        inner: bayes::posterior(&engine_result, &measurement.inner).map_err(err)?,
    })
}

/// Largest violation of the product rule for a claimed inference kernel,
/// as a `p/q` string; "0" exactly when the kernel inverts the model.
#[pyfunction]
fn product_rule_residual(prior: &Dist, sampling: &Kernel, inference: &Kernel) -> PyResult<String> {
    let model = bayes::BayesModel::new(prior.inner.clone(), sampling.inner.clone()).map_err(err)?;
    Ok(bayes::product_rule_residual(&model, &inference.inner)
        .map_err(err)?
        .to_string())
}

// ---------------------------------------------------------------------------
// Function spaces
// ---------------------------------------------------------------------------

/// The finite function space target^base with enumerated function atoms.
#[pyclass(frozen)]
struct FunctionSpace {
    inner: funcspace::FunctionSpace,
}

#[pymethods]
impl FunctionSpace {
    #[new]
    fn new(base: FiniteSpace, target: FiniteSpace) -> PyResult<Self> {
        Ok(Self {
            inner: funcspace::FunctionSpace::new(base.inner, target.inner).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn as_space(&self) -> FiniteSpace {
        FiniteSpace {
            inner: self.inner.as_space().clone(),
        }
    }

    /// Deterministic evaluation kernel at a base atom.
    fn eval_kernel(&self, x: &str) -> PyResult<Kernel> {
        Ok(Kernel {
            inner: self.inner.eval_kernel(x).map_err(err)?,
        })
    }

    /// Collapse a measure on the function space to a conditional.
    fn to_conditional(&self, p: &Dist) -> PyResult<Kernel> {
        Ok(Kernel {
            inner: self.inner.to_conditional(&p.inner).map_err(err)?,
        })
    }

    /// The independent process with the given conditional; collapsing it
    /// recovers the conditional exactly.
    #[staticmethod]
    fn from_conditional(c: &Kernel) -> PyResult<(FunctionSpace, Dist)> {
        let (fs, dist) = funcspace::FunctionSpace::from_conditional(&c.inner).map_err(err)?;
        Ok((FunctionSpace { inner: fs }, Dist { inner: dist }))
    }
}

// ---------------------------------------------------------------------------
// Gaussian machinery
// ---------------------------------------------------------------------------

/// Multivariate normal with mean vector and covariance matrix.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Gaussian {
    inner: gauss::Gaussian,
}

#[pymethods]
impl Gaussian {
    #[new]
    fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: gauss::Gaussian::from_parts(mean, cov).map_err(err)?,
        })
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean().iter().copied().collect()
    }

    #[getter]
    fn cov(&self) -> Vec<Vec<f64>> {
        (0..self.inner.dim())
            .map(|i| {
                (0..self.inner.dim())
                    .map(|j| self.inner.cov()[(i, j)])
                    .collect()
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Gaussian(dim={})", self.inner.dim())
    }
}

/// Condition a joint Gaussian on its leading coordinates.
#[pyfunction]
fn gaussian_condition(joint: &Gaussian, observed: Vec<f64>) -> PyResult<Gaussian> {
    Ok(Gaussian {
        inner: gauss::condition(&joint.inner, &observed).map_err(err)?,
    })
}

/// A Gaussian-process regression state with recursive and batch posterior
/// query paths.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct GpState {
    inner: gauss::GpState,
}

#[pymethods]
impl GpState {
    /// Process with a squared-exponential covariance and zero mean.
    #[staticmethod]
    #[pyo3(signature = (signal_variance = 1.0, length_scale = 1.0, noise_var = 0.0))]
    fn squared_exponential(
        signal_variance: f64,
        length_scale: f64,
        noise_var: f64,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: gauss::GpState::new(
                gauss::MeanFn::Zero,
                gauss::CovFn::squared_exponential(signal_variance, length_scale).map_err(err)?,
                noise_var,
            )
            .map_err(err)?,
        })
    }

    /// Process built from JSON descriptors of the mean and covariance.
    #[staticmethod]
    fn from_json(mean: &str, cov: &str, noise_var: f64) -> PyResult<Self> {
        let mean: gauss::MeanFn = serde_json::from_str(mean).map_err(err)?;
        let cov: gauss::CovFn = serde_json::from_str(cov).map_err(err)?;
        cov.validate().map_err(err)?;
        Ok(Self {
            inner: gauss::GpState::new(mean, cov, noise_var).map_err(err)?,
        })
    }

    #[getter]
    fn noise_var(&self) -> f64 {
        self.inner.noise_var()
    }

    /// Absorb one measurement, returning the new state.
    fn update_one(&self, x: Vec<f64>, y: f64) -> PyResult<GpState> {
        Ok(GpState {
            inner: self.inner.update_one(&x, y).map_err(err)?,
        })
    }

    fn prior_marginal(&self, points: Vec<Vec<f64>>) -> PyResult<Gaussian> {
        Ok(Gaussian {
            inner: self.inner.prior_marginal(&points).map_err(err)?,
        })
    }

    fn posterior_batch(&self, query: Vec<Vec<f64>>) -> PyResult<Gaussian> {
        Ok(Gaussian {
            inner: self.inner.posterior_batch(&query).map_err(err)?,
        })
    }

    fn posterior_recursive(&self, query: Vec<Vec<f64>>) -> PyResult<Gaussian> {
        Ok(Gaussian {
            inner: self.inner.posterior_recursive(&query).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "GpState({} measurements, noise_var={})",
            self.inner.data().len(),
            self.inner.noise_var()
        )
    }
}

/// A weight-space model with a Gaussian prior over the coefficients of a
/// fixed basis.
#[pyclass(frozen)]
struct ParametricModel {
    inner: gauss::ParametricModel,
}

#[pymethods]
impl ParametricModel {
    /// Affine model: coordinates plus a constant (p = input_dim + 1).
    #[staticmethod]
    fn affine(input_dim: usize, prior: &Gaussian, noise_var: f64) -> PyResult<Self> {
        Ok(Self {
            inner: gauss::ParametricModel::new(
                input_dim,
                gauss::BasisFn::affine(input_dim),
                prior.inner.clone(),
                noise_var,
            )
            .map_err(err)?,
        })
    }

    /// Quadratic model: coordinates, pair products, constant.
    #[staticmethod]
    fn elliptic(input_dim: usize, prior: &Gaussian, noise_var: f64) -> PyResult<Self> {
        Ok(Self {
            inner: gauss::ParametricModel::new(
                input_dim,
                gauss::BasisFn::elliptic(input_dim),
                prior.inner.clone(),
                noise_var,
            )
            .map_err(err)?,
        })
    }

    #[getter]
    fn weight_dim(&self) -> usize {
        self.inner.basis().len()
    }

    /// Posterior over the weights from (x, y) measurements.
    fn posterior(&self, data: Vec<(Vec<f64>, f64)>) -> PyResult<Gaussian> {
        let data: Vec<gauss::Observation> = data
            .into_iter()
            .map(|(x, y)| gauss::Observation::new(x, y))
            .collect();
        Ok(Gaussian {
            inner: self.inner.posterior(&data).map_err(err)?,
        })
    }

    /// Push the weight prior forward to a process.
    fn pushforward(&self) -> GpState {
        GpState {
            inner: self.inner.pushforward(),
        }
    }

    /// Function-value posterior at query points from a weight posterior.
    fn predictive(&self, weights: &Gaussian, query: Vec<Vec<f64>>) -> PyResult<Gaussian> {
        Ok(Gaussian {
            inner: self.inner.predictive(&weights.inner, &query).map_err(err)?,
        })
    }
}

// ---------------------------------------------------------------------------
// Kalman filtering
// ---------------------------------------------------------------------------

/// Linear-Gaussian state-space model for Kalman filtering.
#[pyclass(frozen)]
struct LinearGaussianModel {
    inner: markov::LinearGaussianModel,
}

#[pymethods]
impl LinearGaussianModel {
    #[new]
    fn new(
        transition: Vec<Vec<f64>>,
        process_noise: Vec<Vec<f64>>,
        observation: Vec<Vec<f64>>,
        observation_noise: Vec<Vec<f64>>,
        initial: &Gaussian,
    ) -> PyResult<Self> {
        let matrix = |rows: Vec<Vec<f64>>, what: &str| -> PyResult<nalgebra::DMatrix<f64>> {
            let nrows = rows.len();
            let ncols = rows.first().map_or(0, Vec::len);
            if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
                return Err(err(format!("{what}: ragged or empty matrix")));
            }
            Ok(nalgebra::DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
        };
        Ok(Self {
            inner: markov::LinearGaussianModel::new(
                matrix(transition, "transition")?,
                matrix(process_noise, "process_noise")?,
                matrix(observation, "observation")?,
                matrix(observation_noise, "observation_noise")?,
                initial.inner.clone(),
            )
            .map_err(err)?,
        })
    }

    #[getter]
    fn initial(&self) -> Gaussian {
        Gaussian {
            inner: self.inner.initial().clone(),
        }
    }

    /// One predict-update cycle.
    fn step(&self, state: &Gaussian, measurement: Vec<f64>) -> PyResult<Gaussian> {
        Ok(Gaussian {
            inner: markov::kalman_step(&state.inner, &self.inner, &measurement).map_err(err)?,
        })
    }

    /// Fold the filter over a measurement sequence.
    fn run(&self, measurements: Vec<Vec<f64>>) -> PyResult<Vec<Gaussian>> {
        Ok(markov::run_filter(&self.inner, &measurements)
            .map_err(err)?
            .into_iter()
            .map(|g| Gaussian { inner: g })
            .collect())
    }
}

/// One discrete filter step: posterior from the measurement, and the next
/// prior when a transition kernel is given.
#[pyfunction]
#[pyo3(signature = (prior, sensor, measurement, transition = None))]
fn hmm_filter_step(
    prior: &Dist,
    sensor: &Kernel,
    measurement: &Dist,
    transition: Option<&Kernel>,
) -> PyResult<(Dist, Option<Dist>)> {
    let (post, next) = markov::filter_step(
        &prior.inner,
        &sensor.inner,
        &measurement.inner,
        transition.map(|t| &t.inner),
    )
    .map_err(err)?;
    Ok((Dist { inner: post }, next.map(|d| Dist { inner: d })))
}

#[pymodule]
fn kernelcat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<FiniteSpace>()?;
    m.add_class::<Dist>()?;
    m.add_class::<Kernel>()?;
    m.add_class::<Joint>()?;
    m.add_class::<InferenceResult>()?;
    m.add_class::<FunctionSpace>()?;
    m.add_class::<Gaussian>()?;
    m.add_class::<GpState>()?;
    m.add_class::<ParametricModel>()?;
    m.add_class::<LinearGaussianModel>()?;
    m.add_function(wrap_pyfunction!(compose, m)?)?;
    m.add_function(wrap_pyfunction!(infer, m)?)?;
    m.add_function(wrap_pyfunction!(posterior, m)?)?;
    m.add_function(wrap_pyfunction!(product_rule_residual, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_condition, m)?)?;
    m.add_function(wrap_pyfunction!(hmm_filter_step, m)?)?;
    Ok(())
}
