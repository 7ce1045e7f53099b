//! Bundled worked examples. Each one is a regular model file embedded in
//! the binary; a few add derived entries (decision comparisons, the
//! posterior band check) on top of the file's own queries.

use serde_json::{json, Value};

use kernelcat::finite::Joint;

use crate::model::{self, Execution, KindSpec, ModelFile, QueryOutcome};
use crate::report::digest_of;
use crate::util::{fmt_f64, fmt_rational, validation, CliResult};

pub const EXAMPLE_NAMES: [&str; 5] = ["urn", "cards", "monty", "gp-demo", "kalman-demo"];

pub fn example_source(name: &str) -> CliResult<&'static str> {
    match name {
        "urn" => Ok(include_str!("../models/urn.model.json")),
        "cards" => Ok(include_str!("../models/cards.model.json")),
        "monty" => Ok(include_str!("../models/monty.model.json")),
        "gp-demo" => Ok(include_str!("../models/gp-demo.model.json")),
        "kalman-demo" => Ok(include_str!("../models/kalman-demo.model.json")),
        other => Err(validation(format!(
            "unknown example `{other}` (expected one of {})",
            EXAMPLE_NAMES.join("|")
        ))),
    }
}

/// Run a bundled example: execute its model file, then append the
/// example-specific derived entries.
pub fn run_example(name: &str) -> CliResult<(String, Execution)> {
    let source = example_source(name)?;
    let digest = digest_of(source.as_bytes());
    let file = model::parse_model(source)?;
    let mut execution = model::execute(&file)?;
    match name {
        "urn" => append_urn_decision(&file, &mut execution)?,
        "monty" => execution.outcomes.push(QueryOutcome {
            name: "recommendation".to_owned(),
            result: Ok(Value::String("switch".to_owned())),
        }),
        "gp-demo" => append_gp_demo_extras(&file, &mut execution)?,
        _ => {}
    }
    Ok((digest, execution))
}

/// The second draw taken from the *other* urn. Drawing from a full,
/// untouched urn depends only on which urn the first draw identified.
fn append_urn_decision(file: &ModelFile, execution: &mut Execution) -> CliResult<()> {
    let KindSpec::DiscreteBayes { body } = &file.spec else {
        return Err(validation("urn example must be a discrete model".to_owned()));
    };
    let mut switched = body.clone();
    let other_urn = |first: &str| {
        // After (u, ·) the switched draw samples the other urn's five
        // (resp. four) balls with replacement of nothing: urn 2 is 3/4
        // blue, urn 1 is 2/5 blue.
        if first.starts_with("u1") {
            ("3/4", "1/4")
        } else {
            ("2/5", "3/5")
        }
    };
    let kernel = &mut switched.extensions[0].kernel;
    for (atom, row) in kernel.iter_mut() {
        let (b, r) = other_urn(atom);
        row.insert("b".to_owned(), b.to_owned());
        row.insert("r".to_owned(), r.to_owned());
    }

    let stay = model::build_discrete(body)?;
    let switch = model::build_discrete(&switched)?;
    let red_after_blue = |joint: &Joint| -> CliResult<String> {
        let first_blue = joint
            .space()
            .factor_event(1, ["b"])
            .map_err(|e| validation(e.to_string()))?;
        let then_red = joint
            .space()
            .factor_event(2, ["r"])
            .map_err(|e| validation(e.to_string()))?;
        let mass = joint
            .mass(
                &first_blue
                    .intersect(&then_red)
                    .map_err(|e| validation(e.to_string()))?,
            )
            .map_err(|e| validation(e.to_string()))?;
        Ok(fmt_rational(&mass))
    };
    let stay_mass = red_after_blue(&stay.extended)?;
    let switch_mass = red_after_blue(&switch.extended)?;
    let verdict = if stay_mass == switch_mass {
        format!("switching identical: {stay_mass}")
    } else {
        format!("stay {stay_mass} vs switch {switch_mass}")
    };
    execution.outcomes.push(QueryOutcome {
        name: "decision-stay".to_owned(),
        result: Ok(Value::String(stay_mass)),
    });
    execution.outcomes.push(QueryOutcome {
        name: "decision-switch".to_owned(),
        result: Ok(Value::String(switch_mass)),
    });
    execution.outcomes.push(QueryOutcome {
        name: "decision".to_owned(),
        result: Ok(Value::String(verdict)),
    });
    Ok(())
}

/// Prior curve plus the band check: at every measurement input the
/// posterior band half-width (2σ of the function posterior) must stay
/// within 2σ_noise · 1.05.
fn append_gp_demo_extras(file: &ModelFile, execution: &mut Execution) -> CliResult<()> {
    let KindSpec::Gp { body } = &file.spec else {
        return Err(validation("gp-demo must be a gp model".to_owned()));
    };

    // Prior curve: same process with no data absorbed.
    let mut prior_body = body.clone();
    prior_body.data.clear();
    let prior_file = ModelFile {
        version: file.version,
        spec: KindSpec::Gp { body: prior_body },
        queries: vec![model::Query {
            name: "prior".to_owned(),
            spec: model::QuerySpec::Curve {
                start: 0.0,
                stop: 10.0,
                count: 101,
            },
        }],
    };
    let prior_run = model::execute(&prior_file)?;
    execution.outcomes.extend(prior_run.outcomes);

    // Band check at the measurement inputs.
    let gp = model::build_gp(body)?;
    let points: Vec<Vec<f64>> = body.data.iter().map(|d| d.x.clone()).collect();
    let posterior = gp
        .posterior_batch(&points)
        .map_err(|e| validation(e.to_string()))?;
    let mut worst: f64 = 0.0;
    for i in 0..points.len() {
        worst = worst.max(2.0 * posterior.variance(i).max(0.0).sqrt());
    }
    let bound = 2.0 * body.noise_var.sqrt() * 1.05;
    let verdict = if worst <= bound {
        format!(
            "ok: max band half-width {} <= {}",
            fmt_f64(worst),
            fmt_f64(bound)
        )
    } else {
        format!(
            "FAIL: max band half-width {} > {}",
            fmt_f64(worst),
            fmt_f64(bound)
        )
    };
    execution.outcomes.push(QueryOutcome {
        name: "band-check".to_owned(),
        result: Ok(json!(verdict)),
    });
    Ok(())
}
