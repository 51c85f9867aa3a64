use std::path::Path;
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/nbmlc.h");

#[test]
fn header_declares_the_exported_functions() {
    let text = std::fs::read_to_string(HEADER).unwrap();
    for name in [
        "nbmlc_last_error",
        "nbmlc_field_new",
        "nbmlc_field_free",
        "nbmlc_code_peg",
        "nbmlc_code_load",
        "nbmlc_code_save",
        "nbmlc_code_encode",
        "nbmlc_code_syndrome",
        "nbmlc_code_decode",
        "nbmlc_scheme_preset",
        "nbmlc_sim_run_point",
        "nbmlc_complexity",
        "nbmlc_shannon_limit",
    ] {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(text.contains("typedef struct NbmlcCode NbmlcCode;"));
    assert!(text.contains("NBMLC_STATUS_OK = 0"));
}

#[test]
fn header_compiles_as_c() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"nbmlc.h\"\nint main(void) { NbmlcField *f = 0; return nbmlc_field_new(4, 0, &f) == NBMLC_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = Path::new(HEADER).parent().unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
