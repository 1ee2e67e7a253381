use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dclut::mask::mask_from_observation_text;
use dclut::synth::{motivating_family, planted_table, random_mask, random_table, rng};
use dclut::table::DEFAULT_MAX_INPUT_WIDTH;
use dclut::{
    emit_plan_file, emit_verilog, load_plan_file, verify_plan, CareMask, CostReport, Plan,
    SearchConfig, Table,
};

use crate::{CompressArgs, GenerateArgs, Kind, MaskArgs, SearchArgs, VerifyArgs};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Loads a table file; the returned notes record what was inferred.
pub fn load_table(path: &Path, wout: Option<u32>) -> Result<(Table, Vec<String>)> {
    let table = Table::parse_hex(&read(path)?, wout, DEFAULT_MAX_INPUT_WIDTH)
        .with_context(|| format!("parsing table {}", path.display()))?;
    let mut notes = vec![format!(
        "w_in={} inferred from {} values",
        table.w_in(),
        table.len()
    )];
    notes.push(match wout {
        Some(w) => format!("w_out={w} from --wout"),
        None => format!("w_out={} inferred from the largest value", table.w_out()),
    });
    Ok((table, notes))
}

pub fn load_mask(path: Option<&Path>, table: &Table) -> Result<(CareMask, String)> {
    let Some(path) = path else {
        return Ok((
            CareMask::all_care(table.len()),
            "no mask given: every entry is a care".into(),
        ));
    };
    let mask = CareMask::parse(&read(path)?)
        .with_context(|| format!("parsing mask {}", path.display()))?;
    if mask.len() != table.len() {
        bail!(
            "mask {} has {} entries but the table has {}",
            path.display(),
            mask.len(),
            table.len()
        );
    }
    let note = format!(
        "mask {}: {} of {} entries are cares",
        path.display(),
        mask.care_count(),
        mask.len()
    );
    Ok((mask, note))
}

pub fn search_config(a: &SearchArgs, w_in: u32) -> SearchConfig {
    let w_lb_in = if a.min_tsize.is_some() || a.max_tsize.is_some() {
        let (lo, hi) = if w_in < 4 {
            (1, w_in.saturating_sub(1))
        } else {
            (2, w_in - 2)
        };
        Some((a.min_tsize.unwrap_or(lo), a.max_tsize.unwrap_or(hi)))
    } else {
        None
    };
    SearchConfig {
        w_lb_in,
        w_lb_out: None,
        exiguity: a.exiguity,
        self_similarity: !a.no_ssc,
        higher_bits: !a.no_hbs,
        dont_cares: !a.no_dc,
        passes: a.passes,
        plut_inputs: a.plut_inputs,
    }
}

/// Turns a file stem into a legal Verilog module name.
pub fn module_name(stem: &str) -> String {
    let mut name: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if !name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        name.insert_str(0, "lut_");
    }
    name
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lut".into())
}

/// Writes `<name>.v`, `<name>.plan` and `<name>.report` into `out`.
pub fn write_outputs(out: &Path, name: &str, plan: &Plan, report: &CostReport) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(&out.join(format!("{name}.v")), &emit_verilog(plan, name)?)?;
    write(
        &out.join(format!("{name}.plan")),
        &emit_plan_file(plan, report),
    )?;
    write(&out.join(format!("{name}.report")), &format!("{report}\n"))?;
    Ok(())
}

pub fn compress(a: CompressArgs) -> Result<u8> {
    let (table, mut notes) = load_table(&a.table, a.search.wout)?;
    let (mask, mask_note) = load_mask(a.mask.as_deref(), &table)?;
    notes.push(mask_note);
    let cfg = search_config(&a.search, table.w_in());
    let (plan, mut report) = dclut::compress(&table, &mask, &cfg)?;
    report.notes = notes;

    let name = match a.name {
        Some(n) => n,
        None => module_name(&stem(&a.table)),
    };
    write_outputs(&a.out, &name, &plan, &report)?;

    let check = verify_plan(&table, &mask, &plan)?;
    if a.json {
        println!("{}", report.to_json());
    } else {
        println!("{report}");
    }
    if !check.passed() {
        eprintln!(
            "verification failed: {} care mismatches",
            check.care_mismatches.len()
        );
        return Ok(1);
    }
    Ok(0)
}

pub fn mask(a: MaskArgs) -> Result<u8> {
    let text = read(&a.obs)?;
    let mask = mask_from_observation_text(&text, a.win)
        .with_context(|| format!("reading {}", a.obs.display()))?;
    write(&a.out, &mask.to_text())?;
    println!(
        "care fraction: {:.4} ({} of {})",
        dclut::care_fraction(&mask),
        mask.care_count(),
        mask.len()
    );
    Ok(0)
}

pub fn verify(a: VerifyArgs) -> Result<u8> {
    let (table, _) = load_table(&a.table, a.wout)?;
    let (mask, _) = load_mask(a.mask.as_deref(), &table)?;
    let (plan, _) = load_plan_file(&read(&a.plan)?)
        .with_context(|| format!("parsing plan {}", a.plan.display()))?;
    let r = verify_plan(&table, &mask, &plan)?;
    if a.json {
        println!("{}", serde_json::to_string(&r)?);
    } else {
        println!(
            "checked {} addresses: {} care mismatches, {} don't cares changed",
            r.total_checked,
            r.care_mismatches.len(),
            r.changed_dont_cares
        );
        for m in r.care_mismatches.iter().take(10) {
            println!(
                "  addr {:#x}: expected {:#x}, got {:#x}",
                m.addr, m.expected, m.got
            );
        }
    }
    Ok(if r.passed() { 0 } else { 1 })
}

pub fn generate(a: GenerateArgs) -> Result<u8> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut r = rng(a.seed);
    for i in 0..a.count {
        let (table, mask) = match a.kind {
            Kind::Random => {
                let t = random_table(&mut r, a.win, a.wout)?;
                let m = random_mask(&mut r, t.len(), a.dc);
                (t, m)
            }
            Kind::Planted => planted_table(&mut r, a.win, a.wout, a.tsize, a.bases, a.dc)?,
            Kind::Family => motivating_family(),
        };
        let stem = format!("t{i:03}");
        write(&a.out.join(format!("{stem}.tbl")), &table.to_hex_text())?;
        write(&a.out.join(format!("{stem}.mask")), &mask.to_text())?;
    }
    println!("wrote {} tables to {}", a.count, a.out.display());
    Ok(0)
}
