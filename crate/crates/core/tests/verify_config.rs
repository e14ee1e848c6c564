use lpjacobi::suite::{self, Context, RunConfig};
use lpjacobi::{Error, Lambda};

#[test]
fn small_lambda_is_a_config_error() {
    let cfg = RunConfig { lambda: "5/2".parse().unwrap(), ..RunConfig::default() };
    assert!(matches!(suite::run_verify(cfg, "t"), Err(Error::Regime { .. })));
}

#[test]
fn small_lambda_is_accepted_with_override_above_two() {
    let cfg = RunConfig { lambda: "5/2".parse().unwrap(), allow_small_lambda: true, ..RunConfig::default() };
    assert!(cfg.validate().is_ok());
    let cfg = RunConfig { lambda: "2".parse().unwrap(), allow_small_lambda: true, ..RunConfig::default() };
    assert!(cfg.validate().is_err());
}

#[test]
fn digits_must_cover_iteration_depth() {
    let cfg = RunConfig { digits: suite::MAX_ITERATION + 1, ..RunConfig::default() };
    assert!(matches!(cfg.validate(), Err(Error::InvalidArgument(_))));
}

#[test]
fn corrupted_table_fails_exact_relations_only_there() {
    let cfg = RunConfig { table_depth: 8, corrupt_row: Some(37), ..RunConfig::default() };
    let ctx = Context::new(cfg).unwrap();
    let r = suite::run_check(&ctx, "coeffs.exact_relations").unwrap();
    assert!(!r.pass);
    assert!(r.error.as_deref().unwrap_or("").contains("corrupted"), "{:?}", r.error);
    // the float-table checks are unaffected by the exact-table fault
    assert!(suite::run_check(&ctx, "coeffs.fn_lower_bound").unwrap().pass);
}

#[test]
fn tolerance_overrides_are_named() {
    let mut t = suite::Tolerances::default();
    t.set("pairing", 1e-7).unwrap();
    assert_eq!(t.pairing, 1e-7);
    assert!(t.set("nonsense", 1.0).is_err());
    assert!(t.set("pairing", -1.0).is_err());
}

#[test]
fn header_records_run_parameters() {
    let cfg = RunConfig { lambda: "7/2".parse::<Lambda>().unwrap(), ..RunConfig::default() };
    let v = serde_json::to_value(suite::Header::new(&cfg, "v")).unwrap();
    assert_eq!(v["lambda"], "7/2");
    assert_eq!(v["M"], 32);
    assert_eq!(v["N"], 1024);
    assert!(v["tolerances"]["v_identity"].is_number());
}

#[test]
fn single_checks_are_reproducible() {
    let ctx = Context::new(RunConfig::default()).unwrap();
    let a = suite::run_check(&ctx, "ruelle.positivity").unwrap();
    let b = suite::run_check(&ctx, "ruelle.positivity").unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(suite::run_check(&ctx, "no.such.check").is_err());
}
