use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dclut::{care_fraction, verify_plan, SearchConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{
    load_mask, load_table, module_name, search_config, stem, write, write_outputs,
};
use crate::BatchArgs;

#[derive(Debug, Serialize)]
pub struct BatchEntry {
    pub name: String,
    pub w_in: u32,
    pub w_out: u32,
    pub care_fraction: f64,
    pub config: String,
    pub bits: u64,
    pub pluts: u64,
    pub all_care_bits: Option<u64>,
    pub all_care_pluts: Option<u64>,
    /// `100 * (1 - bits / all_care_bits)`.
    pub reduction_pct: Option<f64>,
    pub verified: bool,
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub name: String,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct BatchReport {
    pub tables: Vec<BatchEntry>,
    pub failures: Vec<Failure>,
    pub total_bits: u64,
    pub total_pluts: u64,
    pub total_all_care_bits: Option<u64>,
    pub total_all_care_pluts: Option<u64>,
    /// Geometric mean of `bits / all_care_bits`.
    pub geomean_ratio: Option<f64>,
    pub geomean_reduction_pct: Option<f64>,
    pub median_reduction_pct: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

impl BatchReport {
    fn new(tables: Vec<BatchEntry>, failures: Vec<Failure>, compare: bool) -> Self {
        let total_bits = tables.iter().map(|t| t.bits).sum();
        let total_pluts = tables.iter().map(|t| t.pluts).sum();
        let (mut total_all_care_bits, mut total_all_care_pluts) = (None, None);
        let (mut geomean_ratio, mut geomean_reduction_pct, mut median_reduction_pct) =
            (None, None, None);
        if compare && !tables.is_empty() {
            total_all_care_bits = Some(tables.iter().filter_map(|t| t.all_care_bits).sum());
            total_all_care_pluts = Some(tables.iter().filter_map(|t| t.all_care_pluts).sum());
            let ratios: Vec<f64> = tables
                .iter()
                .filter_map(|t| t.all_care_bits.map(|a| t.bits as f64 / a as f64))
                .collect();
            let g = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
            geomean_ratio = Some(g);
            geomean_reduction_pct = Some(100.0 * (1.0 - g));
            median_reduction_pct = median(tables.iter().filter_map(|t| t.reduction_pct).collect());
        }
        BatchReport {
            tables,
            failures,
            total_bits,
            total_pluts,
            total_all_care_bits,
            total_all_care_pluts,
            geomean_ratio,
            geomean_reduction_pct,
            median_reduction_pct,
        }
    }

    fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<u64>| v.map_or("-".into(), |v| v.to_string());
        let pct = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.2}%"));
        writeln!(
            s,
            "{:<20} {:>5} {:>5} {:>7} {:<18} {:>10} {:>8} {:>10} {:>9}",
            "table", "w_in", "w_out", "care", "config", "bits", "pluts", "all-care", "reduction"
        )
        .unwrap();
        for t in &self.tables {
            writeln!(
                s,
                "{:<20} {:>5} {:>5} {:>7.4} {:<18} {:>10} {:>8} {:>10} {:>9}",
                t.name,
                t.w_in,
                t.w_out,
                t.care_fraction,
                t.config,
                t.bits,
                t.pluts,
                opt(t.all_care_bits),
                pct(t.reduction_pct)
            )
            .unwrap();
        }
        for f in &self.failures {
            writeln!(s, "FAILED {}: {}", f.name, f.error).unwrap();
        }
        writeln!(s, "total bits: {}", self.total_bits).unwrap();
        writeln!(s, "total est. P-LUTs: {}", self.total_pluts).unwrap();
        if let Some(a) = self.total_all_care_bits {
            writeln!(s, "all-care total bits: {a}").unwrap();
            writeln!(
                s,
                "all-care total est. P-LUTs: {}",
                opt(self.total_all_care_pluts)
            )
            .unwrap();
            writeln!(
                s,
                "geomean bit ratio: {:.4}",
                self.geomean_ratio.unwrap_or(f64::NAN)
            )
            .unwrap();
            writeln!(s, "geomean reduction: {}", pct(self.geomean_reduction_pct)).unwrap();
            writeln!(s, "median reduction: {}", pct(self.median_reduction_pct)).unwrap();
        }
        s
    }
}

fn run_one(tbl: &Path, args: &BatchArgs) -> Result<BatchEntry> {
    let (table, mut notes) = load_table(tbl, args.search.wout)?;
    let mask_path = tbl.with_extension("mask");
    let (mask, note) = load_mask(mask_path.exists().then_some(mask_path.as_path()), &table)?;
    notes.push(note);
    let cfg = search_config(&args.search, table.w_in());
    let (plan, mut report) = dclut::compress(&table, &mask, &cfg)?;
    report.notes = notes;
    let name = module_name(&stem(tbl));
    write_outputs(&args.out, &name, &plan, &report)?;

    let verified = verify_plan(&table, &mask, &plan)?.passed();
    let chosen = report.chosen();
    let (all_care_bits, all_care_pluts) = if args.compare {
        let off = SearchConfig {
            dont_cares: false,
            ..cfg
        };
        let (_, base) = dclut::compress(&table, &mask, &off)?;
        (Some(base.chosen().total_bits), Some(base.chosen().pluts))
    } else {
        (None, None)
    };
    Ok(BatchEntry {
        name,
        w_in: table.w_in(),
        w_out: table.w_out(),
        care_fraction: care_fraction(&mask),
        config: chosen.id.clone(),
        bits: chosen.total_bits,
        pluts: chosen.pluts,
        all_care_bits,
        all_care_pluts,
        reduction_pct: all_care_bits.map(|a| 100.0 * (1.0 - chosen.total_bits as f64 / a as f64)),
        verified,
    })
}

pub fn run(args: BatchArgs) -> Result<u8> {
    let mut tables: Vec<PathBuf> = fs::read_dir(&args.dir)
        .with_context(|| format!("reading {}", args.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tbl"))
        .collect();
    if tables.is_empty() {
        bail!("no tables found in {}", args.dir.display());
    }
    tables.sort();

    let results: Vec<(String, Result<BatchEntry>)> = tables
        .par_iter()
        .map(|p| (stem(p), run_one(p, &args)))
        .collect();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (name, r) in results {
        match r {
            Ok(e) => entries.push(e),
            Err(e) => failures.push(Failure {
                name,
                error: format!("{e:#}"),
            }),
        }
    }
    let unverified = entries.iter().filter(|e| !e.verified).count();
    let report = BatchReport::new(entries, failures, args.compare);

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write(&args.out.join("batch.report"), &report.to_text())?;
    write(
        &args.out.join("batch.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    if args.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    for f in &report.failures {
        eprintln!("error: {}: {}", f.name, f.error);
    }
    Ok(if !report.failures.is_empty() {
        2
    } else if unverified > 0 {
        1
    } else {
        0
    })
}
