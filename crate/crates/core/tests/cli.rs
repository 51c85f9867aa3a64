use std::process::{Command, Output};

fn nbmlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbmlc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn empty_grid_writes_only_the_header() {
    let o = nbmlc(&["simulate", "--scheme", "qam64-gf16-mlc", "--block-symbols", "60", "--seed", "1", "--ebn0", ""]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), format!("{}\n", nbmlc::channel_sim::CSV_HEADER));
}

#[test]
fn construct_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.alist");
    let b = dir.path().join("b.alist");
    for path in [&a, &b] {
        let o = nbmlc(&["construct", "--scheme", "qam64-gf64", "--seed", "4", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
    let code = nbmlc::codes::load_alist(&a).unwrap();
    assert_eq!((code.n(), code.field().q()), (2000, 64));
}

#[test]
fn multilevel_construct_writes_one_file_per_coded_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.alist");
    let o = nbmlc(&["construct", "--scheme", "qam64-gf8-mlc", "--seed", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("m.l0.alist").exists());
    assert!(dir.path().join("m.l1.alist").exists());
    assert!(!out.exists());
}

#[test]
fn complexity_reproduces_reference_rows() {
    let o = nbmlc(&["complexity", "--scheme", "qam256-gf256", "--csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "qam256-gf256,6000,12288000,2601000,841500"), "{}", stdout(&o));
}

#[test]
fn capacity_reports_the_limit() {
    let o = nbmlc(&["capacity", "--constellation", "qam64", "--rate", "0.8"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("8.60"), "{}", stdout(&o));
}

#[test]
fn failures_print_a_kind_and_exit_nonzero() {
    let o = nbmlc(&["simulate", "--scheme", "no-such-scheme", "--seed", "1", "--ebn0", "9"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("error: unknown-preset: "), "{err}");

    let o = nbmlc(&["simulate", "--scheme", "qam64-gf64", "--ebn0", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: config: "));
}

#[test]
fn json_config_drives_a_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let csv = dir.path().join("out.csv");
    let json = format!(
        r#"{{"scheme": "qam64-gf16-mlc", "block_symbols": 60, "seed": 3, "ebn0": [9.0, 9.5],
            "stop_errors": 5, "max_trials": 200, "out": "{}"}}"#,
        csv.display()
    );
    std::fs::write(&cfg, json).unwrap();
    let o = nbmlc(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("qam64-gf16-mlc,9.0000,"));
    assert!(lines[1].ends_with(",3"));

    std::fs::write(&cfg, r#"{"scheme": "qam64-gf64", "sed": 3}"#).unwrap();
    let o = nbmlc(&["simulate", "--config", cfg.to_str().unwrap(), "--ebn0", "9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn inline_scheme_objects_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("inline.json");
    let out = dir.path().join("custom.alist");
    let json = r#"{
      "scheme": {
        "name": "custom",
        "constellation_bits": 6,
        "n_symbols": 500,
        "structure": {"type": "multilevel", "levels": [
          {"type": "coded", "width": 4, "k": 350, "column_weights": [{"weight": 2, "fraction": 1.0}]},
          {"type": "uncoded", "width": 2}
        ]}
      },
      "seed": 7,
      "ebn0": {"start": 9.0, "stop": 10.5, "step": 0.5}
    }"#;
    std::fs::write(&cfg, json).unwrap();
    let o = nbmlc(&["construct", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let code = nbmlc::codes::load_alist(&out).unwrap();
    assert_eq!((code.n(), code.k(), code.field().q()), (500, 350, 16));
}
