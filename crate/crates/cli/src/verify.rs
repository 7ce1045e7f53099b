//! Verification suites. Each model kind gets a list of named checks: the
//! exact laws run with rational equality, the floating-point ones at the
//! tolerances the engine promises. Randomized probes draw from a seeded
//! generator so runs are reproducible.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use kernelcat::bayes::{infer_with_policy, posterior, product_rule_residual, BayesModel, ZeroMassPolicy};
use kernelcat::finite::{compose, Dist, Kernel};
use kernelcat::markov::LinearGaussianModel;
use nalgebra::{DMatrix, DVector};

use crate::model::{self, HmmModel, KindSpec, ModelFile, QuerySpec};
use crate::util::CliResult;

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.to_owned(),
        passed,
        detail: detail.into(),
    }
}

pub fn verify_model(file: &ModelFile, seed: u64) -> CliResult<Vec<Check>> {
    let mut rng: ChaCha8Rng = {
        use rand::SeedableRng;
        ChaCha8Rng::seed_from_u64(seed)
    };
    match &file.spec {
        KindSpec::DiscreteBayes { body } => verify_discrete(body, &mut rng),
        KindSpec::Gp { body } => verify_gp(body, &mut rng),
        KindSpec::Parametric { body } => verify_parametric(body, &mut rng),
        KindSpec::Hmm { body } => verify_hmm(body, file),
        KindSpec::Kalman { body } => verify_kalman(body, file, &mut rng),
    }
}

// ---------------------------------------------------------------------------
// discrete-bayes
// ---------------------------------------------------------------------------

fn verify_discrete(body: &model::DiscreteBody, rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let built = model::build_discrete(body)?;
    let model = &built.model;
    let mut checks = Vec::new();

    let residual = product_rule_residual(model, &built.inference.inference)
        .map_err(crate::util::validation_from)?;
    checks.push(check(
        "product-rule residual is exactly zero",
        residual.is_zero(),
        format!("residual = {residual}"),
    ));

    let recovered = posterior(&built.inference, &built.inference.evidence.clone())
        .map_err(crate::util::validation_from)?;
    checks.push(check(
        "evidence measurement reproduces the prior exactly",
        &recovered == model.prior(),
        "posterior(evidence) == prior",
    ));

    // Zero-mass freedom on this model.
    let uniform = infer_with_policy(model, ZeroMassPolicy::Uniform);
    let copied = infer_with_policy(model, ZeroMassPolicy::CopyPrior);
    let mut agree = true;
    for atom in model.data().atoms() {
        if uniform.zero_mass_atoms.contains(atom) {
            continue;
        }
        let m = Dist::dirac(model.data().clone(), atom).map_err(crate::util::validation_from)?;
        if posterior(&uniform, &m) != posterior(&copied, &m) {
            agree = false;
        }
    }
    checks.push(check(
        "fallback policies agree on positive-evidence queries",
        agree,
        format!("{} zero-mass atoms", uniform.zero_mass_atoms.len()),
    ));

    // Randomized models of the same shape.
    let mut all_zero = true;
    for _ in 0..100 {
        let h = model.hypothesis().clone();
        let d = model.data().clone();
        let prior = random_dist(rng, &h);
        let kernel = random_kernel(rng, &h, &d);
        let random_model = BayesModel::new(prior, kernel).map_err(crate::util::validation_from)?;
        let result = kernelcat::bayes::infer(&random_model);
        if !product_rule_residual(&random_model, &result.inference)
            .map_err(crate::util::validation_from)?
            .is_zero()
        {
            all_zero = false;
        }
    }
    checks.push(check(
        "product rule holds on 100 seeded random models",
        all_zero,
        "same hypothesis/data shape",
    ));

    // A claimed inference table in the file is held to the product rule.
    if let Some(claimed) = &body.inference {
        let kernel = model::build_claimed_inference(body, claimed)?;
        let residual = product_rule_residual(model, &kernel)
            .map_err(crate::util::validation_from)?;
        checks.push(check(
            "claimed inference kernel satisfies the product rule",
            residual.is_zero(),
            format!("residual = {residual}"),
        ));
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// gp
// ---------------------------------------------------------------------------

fn verify_gp(body: &model::GpBody, rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let gp = model::build_gp(body)?;
    let dim = body.data.first().map_or(1, |d| d.x.len());
    let mut checks = Vec::new();

    let query: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..10.0)).collect())
        .collect();
    let batch = gp.posterior_batch(&query).map_err(crate::util::validation_from)?;
    let recursive = gp
        .posterior_recursive(&query)
        .map_err(crate::util::validation_from)?;
    let mut worst: f64 = 0.0;
    for i in 0..query.len() {
        worst = worst.max((batch.mean()[i] - recursive.mean()[i]).abs());
        for j in 0..query.len() {
            worst = worst.max((batch.cov()[(i, j)] - recursive.cov()[(i, j)]).abs());
        }
    }
    checks.push(check(
        "recursive and batch posteriors agree within 1e-8",
        worst < 1e-8,
        format!("max gap {worst:.3e} at 20 seeded points"),
    ));

    let mut reversed = gp.clone();
    let mut data = gp.data().to_vec();
    data.reverse();
    reversed = reversed.with_data(data);
    let swapped = reversed
        .posterior_batch(&query)
        .map_err(crate::util::validation_from)?;
    let mut worst: f64 = 0.0;
    for i in 0..query.len() {
        worst = worst.max((batch.mean()[i] - swapped.mean()[i]).abs());
        for j in 0..query.len() {
            worst = worst.max((batch.cov()[(i, j)] - swapped.cov()[(i, j)]).abs());
        }
    }
    checks.push(check(
        "posterior is invariant under data reordering (1e-8)",
        worst < 1e-8,
        format!("max gap {worst:.3e}"),
    ));

    if !gp.data().is_empty() {
        let points: Vec<Vec<f64>> = gp.data().iter().map(|d| d.x.clone()).collect();
        let at_data = gp.posterior_batch(&points).map_err(crate::util::validation_from)?;
        if gp.noise_var() == 0.0 {
            let worst = (0..points.len())
                .map(|i| at_data.variance(i))
                .fold(0.0_f64, f64::max);
            checks.push(check(
                "noise-free posterior variance at data is below 1e-10",
                worst <= 1e-10,
                format!("max variance {worst:.3e}"),
            ));
        } else {
            let mut ok = true;
            for (i, p) in points.iter().enumerate() {
                let effective = gp.cov_fn().eval(p, p) + gp.noise_var();
                if at_data.variance(i) > effective + 1e-10 {
                    ok = false;
                }
            }
            checks.push(check(
                "posterior variance never exceeds the effective prior",
                ok,
                "checked at every measurement input",
            ));
        }
    }

    let mut sane = true;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let z: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let kxx = gp.cov_fn().eval(&x, &x);
        let kzz = gp.cov_fn().eval(&z, &z);
        let kxz = gp.cov_fn().eval(&x, &z);
        if kxz != gp.cov_fn().eval(&z, &x) || kxx < 0.0 || kxx * kzz - kxz * kxz < -1e-10 {
            sane = false;
        }
    }
    checks.push(check(
        "covariance symmetry, nonnegativity, Cauchy–Schwarz on 1000 pairs",
        sane,
        "seeded sample",
    ));
    Ok(checks)
}

// ---------------------------------------------------------------------------
// parametric
// ---------------------------------------------------------------------------

fn verify_parametric(body: &model::ParametricBody, rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let parametric = model::build_parametric(body)?;
    let mut checks = Vec::new();

    let batch = parametric
        .posterior(&body.data)
        .map_err(crate::util::validation_from)?;
    let sequential = parametric
        .posterior_sequential(&body.data)
        .map_err(crate::util::validation_from)?;
    let mut worst: f64 = 0.0;
    for i in 0..batch.dim() {
        worst = worst.max((batch.mean()[i] - sequential.mean()[i]).abs());
        for j in 0..batch.dim() {
            worst = worst.max((batch.cov()[(i, j)] - sequential.cov()[(i, j)]).abs());
        }
    }
    checks.push(check(
        "batch weight posterior equals folded single updates (1e-8)",
        worst < 1e-8,
        format!("max gap {worst:.3e}"),
    ));

    let query: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..body.input_dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let weight_side = parametric
        .predictive(&batch, &query)
        .map_err(crate::util::validation_from)?;
    let gp = parametric.pushforward().with_data(body.data.clone());
    let function_side = gp
        .posterior_batch(&query)
        .map_err(crate::util::validation_from)?;
    let mut worst: f64 = 0.0;
    for i in 0..query.len() {
        worst = worst.max((weight_side.mean()[i] - function_side.mean()[i]).abs());
        for j in 0..query.len() {
            worst = worst.max((weight_side.cov()[(i, j)] - function_side.cov()[(i, j)]).abs());
        }
    }
    checks.push(check(
        "weight-space and function-space predictions agree (1e-8)",
        worst < 1e-8,
        format!("max gap {worst:.3e} at 8 seeded points"),
    ));
    Ok(checks)
}

// ---------------------------------------------------------------------------
// hmm
// ---------------------------------------------------------------------------

fn verify_hmm(body: &model::HmmBody, file: &ModelFile) -> CliResult<Vec<Check>> {
    let HmmModel {
        spec,
        observation_spaces,
    } = model::build_hmm(body)?;
    let mut checks = Vec::new();

    // Functoriality: every bracketing of the derived long-range maps.
    let chain = spec.chain();
    let last = chain.len() - 1;
    let direct = chain
        .compose_range(0, last)
        .map_err(crate::util::validation_from)?;
    let mut functorial = true;
    for mid in 0..=last {
        let left = chain.compose_range(0, mid).map_err(crate::util::validation_from)?;
        let right = chain
            .compose_range(mid, last)
            .map_err(crate::util::validation_from)?;
        if compose(&right, &left).map_err(crate::util::validation_from)? != direct {
            functorial = false;
        }
    }
    checks.push(check(
        "derived chain maps agree for every bracketing, exactly",
        functorial,
        format!("{} times", chain.len()),
    ));

    // Filter vs exhaustive joint on the file's own dirac measurements.
    let measurements = filter_measurements(file, &observation_spaces)?;
    if let Some(observed) = measurements {
        let dists: Vec<Dist> = observed
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                Dist::dirac(
                    observation_spaces[i].clone(),
                    observation_spaces[i].atom(o),
                )
                .map_err(crate::util::validation_from)
            })
            .collect::<CliResult<_>>()?;
        match spec.run_filter(&dists) {
            Ok(trace) => {
                let transitions: Vec<&Kernel> =
                    (0..chain.len() - 1).filter_map(|i| chain.transition(i)).collect();
                let sensors: Vec<&Kernel> = spec.sensors().iter().collect();
                let mut exact = true;
                for step in 0..observed.len() {
                    let oracle = exhaustive_posterior(
                        spec.initial(),
                        &transitions[..step.min(transitions.len())],
                        &sensors[..=step],
                        &observed[..=step],
                    );
                    match oracle {
                        Some(oracle) => {
                            if trace[step].weights() != &oracle[..] {
                                exact = false;
                            }
                        }
                        None => exact = false,
                    }
                }
                checks.push(check(
                    "filter equals exhaustive joint conditioning, exactly",
                    exact,
                    format!("{} steps", observed.len()),
                ));
            }
            Err(e) => {
                checks.push(check(
                    "filter equals exhaustive joint conditioning, exactly",
                    false,
                    format!("filter failed: {e}"),
                ));
            }
        }
    }
    Ok(checks)
}

/// Extract the dirac measurement indices from the file's filter query, if
/// there is one and all measurements are plain atom labels.
fn filter_measurements(
    file: &ModelFile,
    observation_spaces: &[kernelcat::finite::FiniteSpace],
) -> CliResult<Option<Vec<usize>>> {
    for query in &file.queries {
        if let QuerySpec::Filter { measurements } = &query.spec {
            let mut observed = Vec::new();
            for (i, value) in measurements.iter().enumerate() {
                match value {
                    Value::String(atom) => match observation_spaces[i].index_of(atom) {
                        Some(index) => observed.push(index),
                        None => return Ok(None),
                    },
                    _ => return Ok(None),
                }
            }
            return Ok(Some(observed));
        }
    }
    Ok(None)
}

/// Exhaustive oracle over state sequences, exact rational arithmetic.
fn exhaustive_posterior(
    initial: &Dist,
    transitions: &[&Kernel],
    sensors: &[&Kernel],
    observed: &[usize],
) -> Option<Vec<num_rational::BigRational>> {
    use num_rational::BigRational;
    let steps = observed.len();
    let state_counts: Vec<usize> = (0..steps).map(|i| sensors[i].domain().len()).collect();
    let total_sequences: usize = state_counts.iter().product();
    if total_sequences > 1_000_000 {
        return None;
    }
    let last_n = *state_counts.last()?;
    let mut posterior = vec![BigRational::zero(); last_n];
    let mut total = BigRational::zero();
    let mut sequence = vec![0usize; steps];
    loop {
        let mut weight = initial.weight(sequence[0]).clone();
        for i in 0..steps {
            weight *= sensors[i].row(sequence[i]).weight(observed[i]);
            if i + 1 < steps {
                weight *= transitions[i].row(sequence[i]).weight(sequence[i + 1]);
            }
        }
        posterior[sequence[steps - 1]] += &weight;
        total += weight;
        let mut pos = steps;
        loop {
            if pos == 0 {
                if total.is_zero() {
                    return None;
                }
                return Some(posterior.into_iter().map(|w| w / &total).collect());
            }
            pos -= 1;
            sequence[pos] += 1;
            if sequence[pos] < state_counts[pos] {
                break;
            }
            sequence[pos] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// kalman
// ---------------------------------------------------------------------------

fn verify_kalman(
    body: &model::KalmanBody,
    file: &ModelFile,
    rng: &mut ChaCha8Rng,
) -> CliResult<Vec<Check>> {
    let model = model::build_kalman(body)?;
    let mut checks = Vec::new();

    // Measurements: the file's filter query when present, otherwise a
    // seeded synthetic trace.
    let measurements: Vec<Vec<f64>> = file
        .queries
        .iter()
        .find_map(|q| match &q.spec {
            QuerySpec::Filter { measurements } => serde_json::from_value::<Vec<Vec<f64>>>(
                Value::Array(measurements.clone()),
            )
            .ok(),
            _ => None,
        })
        .unwrap_or_else(|| {
            (0..20)
                .map(|t| {
                    (0..model.observation_dim())
                        .map(|_| (t as f64 * 0.3).sin() + rng.gen_range(-0.3..0.3))
                        .collect()
                })
                .collect()
        });

    let trace = kernelcat::markov::run_filter(&model, &measurements)
        .map_err(crate::util::validation_from)?;
    let oracle = textbook_kalman(&model, &measurements);
    let mut worst: f64 = 0.0;
    for (got, (want_mean, want_cov)) in trace.iter().zip(&oracle) {
        for i in 0..got.dim() {
            worst = worst.max((got.mean()[i] - want_mean[i]).abs());
            for j in 0..got.dim() {
                worst = worst.max((got.cov()[(i, j)] - want_cov[(i, j)]).abs());
            }
        }
    }
    checks.push(check(
        "filter trace matches the textbook recursion (1e-10)",
        worst < 1e-10,
        format!("max gap {worst:.3e} over {} steps", measurements.len()),
    ));

    let mut state = model.initial().clone();
    let mut joint_gap: f64 = 0.0;
    let mut loewner_ok = true;
    for y in &measurements {
        let predicted = model.predict(&state).map_err(crate::util::validation_from)?;
        let joint = model
            .observation_joint(&predicted)
            .map_err(crate::util::validation_from)?;
        let via_joint =
            kernelcat::gauss::condition(&joint, y).map_err(crate::util::validation_from)?;
        state = kernelcat::markov::kalman_step(&state, &model, y)
            .map_err(crate::util::validation_from)?;
        for i in 0..state.dim() {
            joint_gap = joint_gap.max((state.mean()[i] - via_joint.mean()[i]).abs());
            for j in 0..state.dim() {
                joint_gap = joint_gap.max((state.cov()[(i, j)] - via_joint.cov()[(i, j)]).abs());
            }
        }
        let diff = predicted.cov() - state.cov();
        let sym = (&diff + diff.transpose()) * 0.5;
        if sym.symmetric_eigenvalues().min() < -1e-10 {
            loewner_ok = false;
        }
    }
    checks.push(check(
        "each step equals conditioning the assembled joint (1e-10)",
        joint_gap < 1e-10,
        format!("max gap {joint_gap:.3e}"),
    ));
    checks.push(check(
        "posterior covariance never exceeds the prediction",
        loewner_ok,
        "Loewner order with 1e-10 slack",
    ));
    Ok(checks)
}

/// Gain-form recursion, independent of the engine's conditioning path.
fn textbook_kalman(
    model: &LinearGaussianModel,
    measurements: &[Vec<f64>],
) -> Vec<(DVector<f64>, DMatrix<f64>)> {
    let a = model.transition();
    let q = model.process_noise();
    let h = model.observation();
    let r = model.observation_noise();
    let mut mean = model.initial().mean().clone();
    let mut cov = model.initial().cov().clone();
    let mut out = Vec::new();
    for y in measurements {
        let mp = a * &mean;
        let pp = a * &cov * a.transpose() + q;
        let innovation = DVector::from_row_slice(y) - h * &mp;
        let s = h * &pp * h.transpose() + r;
        let gain = &pp * h.transpose() * s.try_inverse().expect("invertible innovation");
        mean = mp + &gain * innovation;
        let eye = DMatrix::identity(pp.nrows(), pp.ncols());
        cov = (&eye - &gain * h) * &pp;
        cov = (&cov + cov.transpose()) * 0.5;
        out.push((mean.clone(), cov.clone()));
    }
    out
}

// ---------------------------------------------------------------------------
// seeded random finite generators (mirrors the library test helpers)
// ---------------------------------------------------------------------------

fn random_dist(rng: &mut ChaCha8Rng, space: &kernelcat::finite::FiniteSpace) -> Dist {
    use num_rational::BigRational;
    let denom = rng.gen_range(1..=12i64);
    let mut counts = vec![0i64; space.len()];
    for _ in 0..denom {
        counts[rng.gen_range(0..space.len())] += 1;
    }
    let weights = counts
        .iter()
        .map(|&c| BigRational::new(c.into(), denom.into()))
        .collect();
    Dist::new(space.clone(), weights).expect("counts normalize")
}

fn random_kernel(
    rng: &mut ChaCha8Rng,
    domain: &kernelcat::finite::FiniteSpace,
    codomain: &kernelcat::finite::FiniteSpace,
) -> Kernel {
    let rows = (0..domain.len()).map(|_| random_dist(rng, codomain)).collect();
    Kernel::new(domain.clone(), codomain.clone(), rows).expect("rows over codomain")
}
