//! Compiles and runs a small C program against the generated header and the
//! static library, proving the header matches the ABI.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "perclab.h"

int main(void) {
    PerclabMatrix *m = NULL;
    if (perclab_matrix_new_uniform(2, 0.9, &m) != PerclabStatus_Ok) return 1;
    double q = -1.0;
    if (perclab_extinction_probability(m, 1e-12, &q) != PerclabStatus_Ok) return 2;
    if (!(q > 0.0 && q < 1e-3)) return 3;

    PerclabTree *t = NULL;
    if (perclab_tree_sample(m, 3, 42, &t) != PerclabStatus_Ok) return 4;
    uint64_t count = 0;
    if (perclab_tree_level_count(t, 3, &count) != PerclabStatus_Ok) return 5;
    if (count == 0) return 6;

    double lo, hi;
    PerclabStatus s = perclab_longest_shadow(t, 3, 1.1, &lo, &hi);
    if (s != PerclabStatus_Ok && s != PerclabStatus_NotFound) return 7;

    perclab_tree_free(t);
    perclab_matrix_free(m);
    printf("c link ok (q = %.6g)\n", q);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    // the staticlib lands next to this test binary's deps directory
    let mut lib_dir = PathBuf::from(std::env::current_exe().unwrap());
    lib_dir.pop(); // test binary
    if lib_dir.ends_with("deps") {
        lib_dir.pop();
    }
    let static_lib = lib_dir.join("libperclab_ffi.a");
    if !static_lib.exists() {
        // `cargo test` links tests against the rlib only; produce the
        // staticlib artifact
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let st = Command::new(cargo)
            .args(["build", "-p", "perclab-ffi"])
            .current_dir(&manifest)
            .status()
            .expect("cargo runs");
        assert!(st.success(), "building the staticlib failed");
    }
    assert!(static_lib.exists(), "staticlib missing at {static_lib:?}");
    let cc = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok());
    let Some(cc) = cc else {
        eprintln!("no C compiler available; skipping link check");
        return;
    };

    let dir = std::env::temp_dir().join(format!("perclab_c_link_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let bin = dir.join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();

    let out = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(&include_dir)
        .arg(&static_lib)
        .arg("-lpthread")
        .arg("-ldl")
        .arg("-lm")
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("compiler runs");
    assert!(
        out.status.success(),
        "C compilation failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let run = Command::new(&bin).output().expect("program runs");
    assert!(
        run.status.success(),
        "C program exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    let _ = std::fs::remove_dir_all(&dir);
}
