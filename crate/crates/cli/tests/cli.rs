//! End-to-end checks of the binary: CSV shape, published rounded values,
//! byte stability under a fixed configuration.

use std::process::Command;

fn run(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_stochint"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "stochint {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn tables_reproduce_published_roundings() {
    let text = run(&["tables", "--q", "1,10,100"]);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "table_id,q,value,rounded");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 15);
    let lookup = |table: &str, q: &str| -> &str {
        rows.iter()
            .find(|r| r[0] == table && r[1] == q)
            .unwrap_or_else(|| panic!("missing row {table}/{q}"))[3]
    };
    assert_eq!(lookup("table1", "1"), "0.0459");
    assert_eq!(lookup("table1", "10"), "0.0072");
    assert_eq!(lookup("table1", "100"), "7.5722e-4");
    assert_eq!(lookup("table2", "10"), "0.0082");
    assert_eq!(lookup("table3", "100"), "3.3955e-4");
    assert_eq!(lookup("table4", "1"), "2.0294");
    assert_eq!(lookup("table5", "10"), "1.8836");
}

#[test]
fn output_is_byte_stable() {
    let a = run(&["tables", "--q", "1,10"]);
    let b = run(&["tables", "--q", "1,10"]);
    assert_eq!(a, b);
    let a = run(&["identities", "--q", "3,7", "--threads", "1"]);
    let b = run(&["identities", "--q", "3,7", "--threads", "1"]);
    assert_eq!(a, b);
    let a = run(&[
        "mc-verify", "--q", "5", "--trials", "1000", "--grid", "1000", "--seed", "7",
        "--threads", "1",
    ]);
    let b = run(&[
        "mc-verify", "--q", "5", "--trials", "1000", "--grid", "1000", "--seed", "7",
        "--threads", "1",
    ]);
    assert_eq!(a, b);
}

#[test]
fn coeffs_dump_shape_and_precision() {
    let text = run(&[
        "coeffs", "--basis", "trig", "--exponents", "0,0", "--orders", "3,3",
    ]);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "j1,j2,C");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    // row-major: last index fastest
    assert!(rows[0].starts_with("0,0,"));
    assert!(rows[1].starts_with("0,1,"));
    assert!(rows[4].starts_with("1,0,"));
    // 17 significant digits survive a parse round-trip
    let c00: f64 = rows[0].rsplit(',').next().unwrap().parse().unwrap();
    assert!((c00 - 0.5).abs() < 1e-12);
}

#[test]
fn compare_reports_both_bases() {
    let text = run(&["compare", "--kernel", "i1", "--target", "0.001"]);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "basis,kernel,p_min,error");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "legendre");
    assert_eq!(rows[0][2], "1");
    assert_eq!(rows[1][0], "trig");
    assert_eq!(rows[1][2], "0");

    let text = run(&["compare", "--kernel", "i00", "--target", "0.01"]);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let trig = rows.iter().find(|r| r[0] == "trig").unwrap();
    // smallest q with alpha_q/(2 pi^2) <= 0.01
    assert_eq!(trig[2], "5");
    let err: f64 = trig[3].parse().unwrap();
    assert!(err <= 0.01);
}

#[test]
fn mc_verify_reports_passes_at_modest_settings() {
    let text = run(&[
        "mc-verify", "--trials", "2000", "--grid", "2000", "--seed", "11", "--q", "10",
    ]);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row.len(), 7);
        assert_eq!(row[6], "true", "row failed its tolerance: {row:?}");
    }
}

#[test]
fn interval_flags_flow_through() {
    // table quantities are length-normalized, so they match the unit interval
    let unit = run(&["tables", "--q", "10"]);
    let wide = run(&["tables", "--q", "10", "--t0", "1.0", "--t1", "3.5"]);
    let get = |text: &str| -> f64 {
        text.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    let (a, b) = (get(&unit), get(&wide));
    assert!((a - b).abs() <= 1e-12 * a.abs());
    // degenerate interval is rejected
    let out = Command::new(env!("CARGO_BIN_EXE_stochint"))
        .args(["tables", "--t0", "1.0", "--t1", "1.0"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
