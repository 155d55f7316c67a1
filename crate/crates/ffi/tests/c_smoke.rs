//! Compiles and runs a small C program against the generated header and the
//! static library, exercising the ABI end to end.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include "whitney_forest.h"
#include <assert.h>
#include <stdio.h>
#include <string.h>

int main(void) {
    WfForest *forest = NULL;
    WfStatus st = wf_forest_parse_json(
        "{\"m\":1,\"n\":2,\"items\":[{\"omega\":1,\"inf\":\"(1,1)\"}]}", &forest);
    assert(st == WF_STATUS_OK);
    assert(wf_forest_components(forest) == 1);
    assert(wf_forest_order(forest) == 2);

    int is_zero = -1;
    st = wf_forest_tau_is_zero(forest, 1 << 20, &is_zero);
    assert(st == WF_STATUS_OK);
    assert(is_zero == 0);

    char *arf = NULL;
    st = wf_forest_arf_json(forest, 1 << 20, &arf);
    assert(st == WF_STATUS_OK);
    assert(strstr(arf, "\"k\":1") != NULL);
    wf_string_free(arf);
    wf_forest_free(forest);

    st = wf_forest_parse_json("{\"m\":0}", &forest);
    assert(st == WF_STATUS_VALIDATION_ERROR);
    assert(strlen(wf_last_error_message()) > 0);

    char *witt = NULL;
    st = wf_witt_rank(3, 6, &witt);
    assert(st == WF_STATUS_OK);
    assert(strcmp(witt, "116") == 0);
    wf_string_free(witt);

    printf("c-smoke ok\n");
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    let lib_dir = manifest.join("../../target/debug");
    if !lib_dir.join("libwhitney_forest_ffi.a").exists() {
        // Fresh checkout: cargo test may not have produced the staticlib yet.
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let status = Command::new(cargo)
            .args(["build", "-p", "whitney-forest-ffi"])
            .current_dir(manifest.join("../.."))
            .status()
            .expect("invoke cargo build");
        assert!(status.success(), "cargo build -p whitney-forest-ffi failed");
    }

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = dir.path().join("smoke");

    let cc = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lwhitney_forest_ffi")
        .arg("-lpthread")
        .arg("-lm")
        .arg("-ldl")
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("invoke cc");
    assert!(
        cc.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&cc.stderr)
    );

    let run = Command::new(&exe).output().expect("run smoke");
    assert!(
        run.status.success(),
        "smoke run failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c-smoke ok"));
}
