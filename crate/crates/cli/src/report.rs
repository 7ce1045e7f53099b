use serde_json::{json, Value};

use crate::model::Execution;
use crate::util::{validation, CliResult};

/// Deterministic JSON report: keys are emitted in sorted order and all
/// numbers are pre-rendered strings, so identical inputs give identical
/// bytes.
pub fn build_report(digest: &str, seed: u64, execution: &Execution) -> Value {
    let queries: Vec<Value> = execution
        .outcomes
        .iter()
        .map(|outcome| match &outcome.result {
            Ok(value) => json!({
                "name": outcome.name,
                "status": "ok",
                "value": value,
            }),
            Err(message) => json!({
                "name": outcome.name,
                "status": "error",
                "error": message,
            }),
        })
        .collect();
    json!({
        "diagnostics": {
            "jitter_applied": execution.diagnostics.jitter_applied,
            "zero_mass_atoms": execution.diagnostics.zero_mass_atoms,
        },
        "model": digest,
        "queries": queries,
        "seed": seed,
    })
}

pub fn render_json(report: &Value) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// CSV rendering for curve queries: one `curve,z,mean,lower,upper` row per
/// grid point, with the query name in the first column.
pub fn render_csv(execution: &Execution) -> CliResult<String> {
    let mut out = String::from("curve,z,mean,lower,upper\n");
    let mut curves = 0;
    for outcome in &execution.outcomes {
        let Ok(Value::Array(rows)) = &outcome.result else {
            continue;
        };
        let looks_like_curve = rows
            .iter()
            .all(|row| matches!(row, Value::Array(cells) if cells.len() == 4));
        if !looks_like_curve || rows.is_empty() {
            continue;
        }
        curves += 1;
        for row in rows {
            let Value::Array(cells) = row else { unreachable!() };
            let text: Vec<&str> = cells.iter().filter_map(Value::as_str).collect();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                outcome.name, text[0], text[1], text[2], text[3]
            ));
        }
    }
    if curves == 0 {
        return Err(validation(
            "csv output applies only to models with curve queries".to_owned(),
        ));
    }
    Ok(out)
}

pub fn digest_of(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
