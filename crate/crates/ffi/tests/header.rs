//! Compiles and runs a C program against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "epitrace.h"

int main(void) {
    double lo[2] = {-1.0, -1.0}, hi[2] = {1.0, 1.0}, vals[9];
    uintptr_t res[2] = {3, 3};
    for (int i = 0; i < 9; i++) vals[i] = (i % 2) ? INFINITY : 1.0;
    EtGrid *g = NULL;
    if (et_grid_new(2, lo, hi, res, vals, 9, &g) != ET_STATUS_OK) return 1;
    if (et_grid_len(g) != 9) return 2;
    EtDomain *d = NULL;
    double slope = 1.0;
    if (et_domain_new("cone", 2, &slope, 1, &d) != ET_STATUS_OK) return 3;
    EtConstants k;
    if (et_sharp_constants(d, 2.5, 3.0, &k) != ET_STATUS_HYPOTHESIS) return 4;
    if (et_last_error() == NULL) return 5;
    if (et_sharp_constants(d, 2.5, 1.5, &k) != ET_STATUS_OK) return 6;
    printf("%.10f\n", k.c);
    et_domain_free(d);
    et_grid_free(g);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    assert!(include.join("epitrace.h").exists(), "header not generated");
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    // the static library sits next to the test binaries' deps directory
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libepitrace_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let src = tmp.join("abi_check.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let syntax = Command::new(&cc).args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(&include).arg(&src).status().unwrap();
    assert!(syntax.success(), "header does not compile as C99");
    if !lib.exists() {
        eprintln!("{} missing, skipping the link step", lib.display());
        return;
    }
    let exe = tmp.join("abi_check");
    let link = Command::new(&cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(link.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let c: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((c - 0.910377899314).abs() < 1e-8);
}
