use dclut::synth::{motivating_family, random_mask, random_table, rng};
use dclut::verify::rtl::RtlModule;
use dclut::{
    compress, emit_plan_file, emit_verilog, evaluate, load_plan_file, Decomposition, Error, Plan,
    SearchConfig,
};

fn family_plan() -> (Plan, dclut::CostReport) {
    let (t, m) = motivating_family();
    let cfg = SearchConfig {
        w_lb_in: Some((2, 2)),
        w_lb_out: Some((0, 0)),
        ..Default::default()
    };
    compress(&t, &m, &cfg).unwrap()
}

#[test]
fn family_verilog_matches_golden() {
    let (plan, _) = family_plan();
    let golden = include_str!("golden/family.v");
    assert_eq!(emit_verilog(&plan, "family").unwrap(), golden);
}

#[test]
fn plain_plan_is_one_rom() {
    let t = random_table(&mut rng(1), 4, 3).unwrap();
    let v = emit_verilog(&Plan::plain(t.clone(), 0), "ident").unwrap();
    assert_eq!(v.matches("case (").count(), 1);
    assert_eq!(
        v.lines()
            .filter(|l| l.trim_start().starts_with("4'h"))
            .count(),
        16
    );
    let rtl = RtlModule::parse(&v).unwrap();
    for x in 0..16 {
        assert_eq!(rtl.eval(x).unwrap(), t.values()[x as usize]);
    }
}

#[test]
fn identity_decomposition_round_trips_through_rtl() {
    let t = random_table(&mut rng(2), 6, 5).unwrap();
    let plan = Plan::compressed(Decomposition::identity(&t, 3).unwrap(), 0);
    let rtl = RtlModule::parse(&emit_verilog(&plan, "id6").unwrap()).unwrap();
    assert_eq!((rtl.input_width(), rtl.output_width()), (6, 5));
    for x in 0..64 {
        assert_eq!(rtl.eval(x).unwrap(), t.values()[x as usize]);
    }
}

#[test]
fn rtl_agrees_with_evaluator_on_random_plans() {
    for seed in 0..24 {
        let mut r = rng(seed);
        let w_in = 5 + (seed as u32 % 6);
        let w_out = 2 + (seed as u32 % 7);
        let t = random_table(&mut r, w_in, w_out).unwrap();
        let m = random_mask(&mut r, t.len(), 0.5);
        let (plan, _) = compress(&t, &m, &SearchConfig::default()).unwrap();
        let rtl = RtlModule::parse(&emit_verilog(&plan, "lut").unwrap()).unwrap();
        for x in 0..t.len() as u64 {
            assert_eq!(
                rtl.eval(x).unwrap(),
                evaluate(&plan, x).unwrap(),
                "seed {seed} addr {x}"
            );
        }
    }
}

#[test]
fn plan_file_round_trip() {
    let (plan, report) = family_plan();
    let text = emit_plan_file(&plan, &report);
    let (back, back_report) = load_plan_file(&text).unwrap();
    assert_eq!(back, plan);
    assert_eq!(back_report.to_json(), report.to_json());
    assert_eq!(emit_plan_file(&back, &back_report), text);

    let t = random_table(&mut rng(3), 8, 7).unwrap();
    let (plan, report) = compress(
        &t,
        &random_mask(&mut rng(4), 256, 0.3),
        &SearchConfig::default(),
    )
    .unwrap();
    let (back, _) = load_plan_file(&emit_plan_file(&plan, &report)).unwrap();
    assert_eq!(back, plan);
}

#[test]
fn truncated_plan_file_names_missing_section() {
    let (plan, report) = family_plan();
    let text = emit_plan_file(&plan, &report);
    let cut: String = text
        .lines()
        .take_while(|l| !l.starts_with("table t_rsh"))
        .map(|l| format!("{l}\n"))
        .collect();
    match load_plan_file(&cut) {
        Err(Error::Parse { msg, .. }) => assert!(msg.contains("t_rsh"), "{msg}"),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn rejects_bad_module_names() {
    let (plan, _) = family_plan();
    for name in ["", "9lut", "my-lut", "a b", "module"] {
        assert!(
            matches!(emit_verilog(&plan, name), Err(Error::Identifier(_))),
            "{name}"
        );
    }
    assert!(emit_verilog(&plan, "_lut_0").is_ok());
}
