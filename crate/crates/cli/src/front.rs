//! Two-sided approximation of the Pareto front from stored results.

use std::path::Path;

use serde::Serialize;

use chute_core::{merge_lower, merge_upper, ChuteError, ChuteResult, Shell};

use crate::error::CliError;
use crate::io::read_text;
use crate::tables::fmt2;

#[derive(Clone, Debug, Serialize)]
pub struct Front {
    pub instance: String,
    pub fingerprint: String,
    pub k: usize,
    pub y_star: Vec<f64>,
    pub lower: Shell,
    pub upper: Shell,
}

/// Reads results from a file holding one result, an array of results, or an
/// experiment report (`cells[].result`).
pub fn load_results(path: &Path) -> Result<Vec<ChuteResult>, CliError> {
    let text = read_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let parse = |v: serde_json::Value| {
        serde_json::from_value::<ChuteResult>(v).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    };
    match value {
        serde_json::Value::Array(items) => items.into_iter().map(parse).collect(),
        serde_json::Value::Object(mut map) if map.contains_key("cells") => {
            let cells = map.remove("cells").unwrap_or_default();
            let cells = cells
                .as_array()
                .ok_or_else(|| CliError::input(format!("{}: cells is not an array", path.display())))?;
            cells
                .iter()
                .filter_map(|c| c.get("result").filter(|r| !r.is_null()).cloned())
                .map(parse)
                .collect()
        }
        other => parse(other).map(|r| vec![r]),
    }
}

/// Merges the lower shells with the lower merge and the upper shells with
/// the upper merge. `y*` is the componentwise maximum of the inputs.
pub fn build_front(results: &[ChuteResult]) -> Result<Front, ChuteError> {
    let first = results
        .first()
        .ok_or_else(|| ChuteError::Consistency("no results to merge".into()))?;
    if let Some(r) = results.iter().find(|r| r.instance_fingerprint != first.instance_fingerprint) {
        return Err(ChuteError::Consistency(format!(
            "results come from different instances: {} and {}",
            first.instance, r.instance
        )));
    }
    let k = first.lambda.len();
    let mut y_star = first.y_star.values().to_vec();
    for r in results {
        for (y, v) in y_star.iter_mut().zip(r.y_star.values()) {
            *y = y.max(*v);
        }
    }
    let lowers: Vec<Shell> = results.iter().map(|r| r.s_l.clone()).collect();
    let uppers: Vec<Shell> = results.iter().map(|r| r.s_u.clone()).collect();
    Ok(Front {
        instance: first.instance.clone(),
        fingerprint: first.instance_fingerprint.clone(),
        k,
        y_star,
        lower: merge_lower(&lowers)?,
        upper: merge_upper(&uppers)?,
    })
}

impl Front {
    /// `kind,f_1..f_k` with one row per lower image, per upper image and `y*`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["kind".to_string()];
        header.extend((1..=self.k).map(|l| format!("f_{l}")));
        w.write_record(&header).expect("in-memory csv");
        let mut row = |kind: &str, values: &[f64]| {
            let mut r = vec![kind.to_string()];
            r.extend(values.iter().map(|v| fmt2(*v)));
            w.write_record(&r).expect("in-memory csv");
        };
        for m in self.lower.members() {
            row("lower", m.outcome.values());
        }
        for m in self.upper.members() {
            row("upper", m.outcome.values());
        }
        row("y_star", &self.y_star);
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }
}
