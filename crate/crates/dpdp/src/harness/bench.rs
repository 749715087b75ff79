//! Instance × policy matrices.

use std::io::Write;
use std::time::Instant;

use dpdp_core::Instance;
use rayon::prelude::*;

use super::policy::{simulate, PolicySpec};
use super::report::classify;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub policy: String,
    pub status: String,
    pub orders_total: usize,
    pub orders_completed: usize,
    pub f1: i64,
    pub f2: f64,
    pub f: f64,
    pub runtime_ms: u128,
}

/// Runs every cell, in parallel, and returns rows in instance-major order.
pub fn run_bench(instances: &[(String, Instance)], policies: &[PolicySpec]) -> Vec<BenchRow> {
    let cells: Vec<(usize, usize)> =
        (0..instances.len()).flat_map(|i| (0..policies.len()).map(move |p| (i, p))).collect();
    cells
        .par_iter()
        .map(|&(i, p)| {
            let (name, instance) = &instances[i];
            let spec = policies[p].isolated(&format!("{name}-{p}"));
            let start = Instant::now();
            let run = simulate(instance, &spec);
            let runtime_ms = start.elapsed().as_millis();
            BenchRow {
                instance: name.clone(),
                policy: spec.name().to_owned(),
                status: classify(&run.outcome).0.to_owned(),
                orders_total: run.report.orders_total,
                orders_completed: run.report.orders_completed,
                f1: run.report.f1,
                f2: run.report.f2,
                f: run.report.f,
                runtime_ms,
            }
        })
        .collect()
}

/// One row per cell, then one `mean` row per policy. The runtime column
/// is only written when `timing` is set, so that the default output is
/// reproducible byte for byte.
pub fn write_bench_csv<W: Write>(rows: &[BenchRow], timing: bool, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["instance", "policy", "status", "orders_total", "orders_completed", "f1", "f2", "f"];
    if timing {
        header.push("runtime_ms");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.instance.clone(),
            r.policy.clone(),
            r.status.clone(),
            r.orders_total.to_string(),
            r.orders_completed.to_string(),
            r.f1.to_string(),
            r.f2.to_string(),
            r.f.to_string(),
        ];
        if timing {
            rec.push(r.runtime_ms.to_string());
        }
        w.write_record(&rec)?;
    }
    let mut policies: Vec<&str> = Vec::new();
    for r in rows {
        if !policies.contains(&r.policy.as_str()) {
            policies.push(&r.policy);
        }
    }
    for p in policies {
        let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.policy == p).collect();
        let n = mine.len() as f64;
        let finished = mine.iter().filter(|r| r.status == "FINISHED").count();
        let mut rec = vec![
            "mean".to_owned(),
            p.to_owned(),
            format!("{finished}/{}", mine.len()),
            mine.iter().map(|r| r.orders_total).sum::<usize>().to_string(),
            mine.iter().map(|r| r.orders_completed).sum::<usize>().to_string(),
            (mine.iter().map(|r| r.f1 as f64).sum::<f64>() / n).to_string(),
            (mine.iter().map(|r| r.f2).sum::<f64>() / n).to_string(),
            (mine.iter().map(|r| r.f).sum::<f64>() / n).to_string(),
        ];
        if timing {
            rec.push((mine.iter().map(|r| r.runtime_ms).sum::<u128>() / mine.len() as u128).to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
