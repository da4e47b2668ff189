//! CSV tables: per-run rows, experiment cells, per-variant tables laid out
//! in the reference layout, and the averages table.

use chute_core::{ChuteResult, Variant};

use crate::experiment::{Cell, ExperimentReport};

/// Two decimals, the precision of the reference tables.
pub fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

/// `+` when the rounded gap improved (decreased) against the previous
/// `gamma`, `-` when it deteriorated, empty otherwise.
pub fn gap_marker(previous: f64, current: f64) -> &'static str {
    let (p, c) = (round2(previous), round2(current));
    if c < p {
        "+"
    } else if c > p {
        "-"
    } else {
        ""
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// `Time S_U`: the total, and for `chute2` the dual-search part in parentheses.
pub fn time_cell(variant: Variant, total: f64, dual: f64) -> String {
    match variant {
        Variant::Chute1 => fmt2(total),
        Variant::Chute2 => format!("{} ({})", fmt2(total), fmt2(dual)),
    }
}

fn indexed(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |l| format!("{prefix}_{l}"))
}

fn to_csv(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

/// One row per run: lambda, L, U, gap, `|S_U|` and `Time S_U`.
pub fn result_table(results: &[ChuteResult]) -> String {
    let k = results.iter().map(|r| r.lambda.len()).max().unwrap_or(0);
    let mut header: Vec<String> = ["instance", "variant", "gamma"].map(String::from).into();
    header.extend(indexed("lambda", k));
    header.extend(indexed("L", k));
    header.extend(indexed("U", k));
    header.extend(indexed("gap", k));
    header.extend(["su_size", "time_su", "dual_s"].map(String::from));
    let rows = results
        .iter()
        .map(|r| {
            let mut row = vec![r.instance.clone(), r.variant.to_string(), r.gamma.to_string()];
            row.extend(pad(r.lambda.weights().iter().map(|v| v.to_string()), k));
            row.extend(pad(r.lower.iter().map(|v| fmt2(*v)), k));
            row.extend(pad(r.upper.iter().map(|v| fmt2(*v)), k));
            row.extend(pad(r.gap.iter().map(|v| fmt2(*v)), k));
            row.push(r.s_u.len().to_string());
            row.push(fmt2(r.timings.upper_total_s()));
            row.push(fmt2(r.timings.dual_s));
            row
        })
        .collect();
    to_csv(header, rows)
}

fn pad(values: impl Iterator<Item = String>, k: usize) -> Vec<String> {
    let mut v: Vec<String> = values.collect();
    v.resize(k, String::new());
    v
}

/// A file name fragment safe on every platform.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Every table of an experiment as `(file name, CSV text)`, in a fixed order.
pub fn experiment_tables(report: &ExperimentReport) -> Vec<(String, String)> {
    let mut files = vec![
        ("cells.csv".to_string(), cells_table(report)),
        ("lambdas.csv".to_string(), lambdas_table(report)),
    ];
    for inst in &report.instances {
        for &variant in &report.variants {
            let cells: Vec<&Cell> = report
                .cells
                .iter()
                .filter(|c| c.instance == inst.name && c.variant == variant)
                .collect();
            let stem = format!("{}_{}", file_stem(&inst.name), variant);
            for &g in &report.gammas {
                let at: Vec<&Cell> = cells.iter().copied().filter(|c| c.gamma == g).collect();
                files.push((format!("{stem}_g{g}.csv"), variant_table(inst.k, variant, &at)));
            }
            files.push((format!("{stem}_U.csv"), wide_u_table(inst.k, &report.gammas, &cells)));
            files.push((format!("{stem}_gap.csv"), wide_gap_table(inst.k, &report.gammas, &cells)));
            files.push((format!("{stem}_su.csv"), wide_su_table(variant, &report.gammas, &cells)));
        }
    }
    files.push(("averages.csv".to_string(), averages_table(report)));
    files
}

/// One row per (instance, variant, gamma, lambda).
pub fn cells_table(report: &ExperimentReport) -> String {
    let k = report.instances.iter().map(|i| i.k).max().unwrap_or(0);
    let mut header: Vec<String> = ["instance", "variant", "gamma", "no"].map(String::from).into();
    header.extend(indexed("lambda", k));
    header.extend(indexed("L", k));
    header.extend(indexed("U", k));
    header.extend(indexed("gap", k));
    header.extend(
        ["su_size", "time_su", "dual_s", "incumbent_status", "dual_stop", "error"].map(String::from),
    );
    let rows = report
        .cells
        .iter()
        .map(|c| {
            let mut row = vec![c.instance.clone(), c.variant.to_string(), c.gamma.to_string(), c.no.to_string()];
            row.extend(pad(c.lambda.weights().iter().map(|v| v.to_string()), k));
            match &c.result {
                Some(r) => {
                    row.extend(pad(r.lower.iter().map(|v| fmt2(*v)), k));
                    row.extend(pad(r.upper.iter().map(|v| fmt2(*v)), k));
                    row.extend(pad(r.gap.iter().map(|v| fmt2(*v)), k));
                    row.push(r.s_u.len().to_string());
                    row.push(fmt2(r.timings.upper_total_s()));
                    row.push(fmt2(r.timings.dual_s));
                    row.push(json_tag(&r.incumbent.status));
                    row.push(r.dual.as_ref().map(|d| json_tag(&d.stop_reason)).unwrap_or_default());
                    row.push(String::new());
                }
                None => {
                    row.extend(std::iter::repeat_n(String::new(), 3 * k + 5));
                    row.push(c.error.clone().unwrap_or_default());
                }
            }
            row
        })
        .collect();
    to_csv(header, rows)
}

fn json_tag<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

/// Weight vectors with their lower bounds, one row per (instance, lambda).
pub fn lambdas_table(report: &ExperimentReport) -> String {
    let k = report.instances.iter().map(|i| i.k).max().unwrap_or(0);
    let mut header: Vec<String> = ["instance", "no"].map(String::from).into();
    header.extend(indexed("lambda", k));
    header.extend(indexed("L", k));
    let mut rows = Vec::new();
    for inst in &report.instances {
        for (i, lambda) in inst.lambdas.iter().enumerate() {
            let mut row = vec![inst.name.clone(), (i + 1).to_string()];
            row.extend(pad(lambda.weights().iter().map(|v| v.to_string()), k));
            let lower = report
                .cells
                .iter()
                .find(|c| c.instance == inst.name && c.no == i + 1 && c.result.is_some())
                .and_then(|c| c.result.as_ref())
                .map(|r| r.lower.clone())
                .unwrap_or_default();
            row.extend(pad(lower.iter().map(|v| fmt2(*v)), k));
            rows.push(row);
        }
    }
    to_csv(header, rows)
}

/// Lambda, U, gap, `|S_U|` and `Time S_U` for one (instance, variant, gamma),
/// one row per weight vector: `3k + 2` columns.
pub fn variant_table(k: usize, variant: Variant, cells: &[&Cell]) -> String {
    let mut header: Vec<String> = indexed("lambda", k).collect();
    header.extend(indexed("U", k));
    header.extend(indexed("gap", k));
    header.extend(["su_size", "time_su"].map(String::from));
    let rows = cells
        .iter()
        .map(|c| {
            let mut row: Vec<String> = c.lambda.weights().iter().map(|v| v.to_string()).collect();
            match &c.result {
                Some(r) => {
                    row.extend(r.upper.iter().map(|v| fmt2(*v)));
                    row.extend(r.gap.iter().map(|v| fmt2(*v)));
                    row.push(r.s_u.len().to_string());
                    row.push(time_cell(variant, r.timings.upper_total_s(), r.timings.dual_s));
                }
                None => row.extend(std::iter::repeat_n("err".to_string(), 2 * k + 2)),
            }
            row
        })
        .collect();
    to_csv(header, rows)
}

fn gamma_label(g: f64) -> String {
    format!("g{g}")
}

fn numbers(cells: &[&Cell]) -> Vec<usize> {
    let mut nos: Vec<usize> = cells.iter().map(|c| c.no).collect();
    nos.sort_unstable();
    nos.dedup();
    nos
}

fn find<'a>(cells: &[&'a Cell], no: usize, gamma: f64) -> Option<&'a Cell> {
    cells.iter().copied().find(|c| c.no == no && c.gamma == gamma)
}

/// `U(S_U, lambda)` with one column group per gamma.
pub fn wide_u_table(k: usize, gammas: &[f64], cells: &[&Cell]) -> String {
    let mut header = vec!["no".to_string()];
    for &g in gammas {
        header.extend((1..=k).map(|l| format!("U_{l}_{}", gamma_label(g))));
    }
    let rows = numbers(cells)
        .into_iter()
        .map(|no| {
            let mut row = vec![no.to_string()];
            for &g in gammas {
                match find(cells, no, g).and_then(|c| c.result.as_ref()) {
                    Some(r) => row.extend(r.upper.iter().map(|v| fmt2(*v))),
                    None => row.extend(std::iter::repeat_n("err".to_string(), k)),
                }
            }
            row
        })
        .collect();
    to_csv(header, rows)
}

/// Gap components per gamma, with `+`/`-` marking an improvement or a
/// deterioration against the previous gamma column.
pub fn wide_gap_table(k: usize, gammas: &[f64], cells: &[&Cell]) -> String {
    let mut header = vec!["no".to_string()];
    for &g in gammas {
        header.extend((1..=k).map(|l| format!("gap_{l}_{}", gamma_label(g))));
    }
    let rows = numbers(cells)
        .into_iter()
        .map(|no| {
            let gaps: Vec<Option<Vec<f64>>> = gammas
                .iter()
                .map(|&g| find(cells, no, g).and_then(|c| c.result.as_ref()).map(|r| r.gap.clone()))
                .collect();
            let mut row = vec![no.to_string()];
            row.extend(marked_gap_row(k, &gaps));
            row
        })
        .collect();
    to_csv(header, rows)
}

/// Formats one row of gaps (one entry per gamma) with improvement markers.
pub fn marked_gap_row(k: usize, gaps: &[Option<Vec<f64>>]) -> Vec<String> {
    let mut out = Vec::with_capacity(k * gaps.len());
    for (i, g) in gaps.iter().enumerate() {
        let prev = if i > 0 { gaps[i - 1].as_ref() } else { None };
        match g {
            Some(g) => out.extend(g.iter().enumerate().map(|(l, &v)| {
                let marker = prev.map(|p| gap_marker(p[l], v)).unwrap_or("");
                format!("{}{marker}", fmt2(v))
            })),
            None => out.extend(std::iter::repeat_n("err".to_string(), k)),
        }
    }
    out
}

/// `|S_U|` then `Time S_U` per gamma.
pub fn wide_su_table(variant: Variant, gammas: &[f64], cells: &[&Cell]) -> String {
    let mut header = vec!["no".to_string()];
    header.extend(gammas.iter().map(|&g| format!("su_{}", gamma_label(g))));
    header.extend(gammas.iter().map(|&g| format!("time_{}", gamma_label(g))));
    let rows = numbers(cells)
        .into_iter()
        .map(|no| {
            let results: Vec<Option<&ChuteResult>> =
                gammas.iter().map(|&g| find(cells, no, g).and_then(|c| c.result.as_ref())).collect();
            let mut row = vec![no.to_string()];
            row.extend(results.iter().map(|r| r.map_or("err".into(), |r| r.s_u.len().to_string())));
            row.extend(results.iter().map(|r| {
                r.map_or("err".into(), |r| time_cell(variant, r.timings.upper_total_s(), r.timings.dual_s))
            }));
            row
        })
        .collect();
    to_csv(header, rows)
}

/// Average `Time S_U` over the weight vectors, per instance and gamma, one
/// column per variant.
pub fn averages_table(report: &ExperimentReport) -> String {
    let mut header: Vec<String> = ["instance", "gamma"].map(String::from).into();
    header.extend(report.variants.iter().map(|v| format!("avg_time_su_{v}")));
    let mut rows = Vec::new();
    for inst in &report.instances {
        for &g in &report.gammas {
            let mut row = vec![inst.name.clone(), g.to_string()];
            for &variant in &report.variants {
                let done: Vec<&ChuteResult> = report
                    .cells
                    .iter()
                    .filter(|c| c.instance == inst.name && c.variant == variant && c.gamma == g)
                    .filter_map(|c| c.result.as_ref())
                    .collect();
                if done.is_empty() {
                    row.push("n/a".into());
                    continue;
                }
                let n = done.len() as f64;
                let total = done.iter().map(|r| r.timings.upper_total_s()).sum::<f64>() / n;
                let dual = done.iter().map(|r| r.timings.dual_s).sum::<f64>() / n;
                row.push(time_cell(variant, total, dual));
            }
            rows.push(row);
        }
    }
    to_csv(header, rows)
}
