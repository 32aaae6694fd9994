use std::path::{Path, PathBuf};
use std::process::Command;

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc)
        .arg("--version")
        .output()
        .ok()?
        .status
        .success()
        .then_some(cc)
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include "one3probe.h"

int main(void) {
    One3Formula *f = NULL;
    if (one3_formula_parse("p p3cnf 4 2\n1 2 3\n1 2 4\n", &f) != ONE3_STATUS_OK) return 1;
    One3SolveResult *r = NULL;
    if (one3_solve(f, ONE3_MODE_REPAIRED, ONE3_DECODE_F_CONSISTENT, 0, &r) != ONE3_STATUS_OK) return 2;
    One3Stats st;
    one3_result_stats(r, &st);
    char *w = NULL;
    if (one3_result_witness(r, &w) != ONE3_STATUS_OK) return 3;
    printf("%d %s %llu\n", one3_result_found(r), w, (unsigned long long)st.calls);
    one3_string_free(w);
    one3_result_free(r);
    one3_formula_free(f);
    if (one3_formula_parse("garbage\n", &f) != ONE3_STATUS_PARSE) return 4;
    if (one3_last_error() == NULL) return 5;
    return 0;
}
"#;

#[test]
fn header_is_current() {
    let h = std::fs::read_to_string(header_dir().join("one3probe.h")).unwrap();
    for sym in [
        "one3_formula_parse",
        "one3_formula_free",
        "one3_formula_expand",
        "one3_oracle",
        "one3_solve",
        "one3_result_witness",
        "one3_result_stats",
        "one3_string_free",
        "one3_last_error",
        "typedef struct One3Formula One3Formula;",
    ] {
        assert!(h.contains(sym), "header lacks {sym}");
    }
}

#[test]
fn c_program_compiles() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-c", "-o"])
        .arg(dir.path().join("main.o"))
        .arg("-I")
        .arg(header_dir())
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    // target/<profile>/deps/<this test> -> target/<profile>/libone3probe_ffi.a
    let exe = std::env::current_exe().unwrap();
    let lib = exe
        .parent()
        .and_then(Path::parent)
        .unwrap()
        .join("libone3probe_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(cc)
        .arg("-I")
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8(run.stdout).unwrap();
    let parts: Vec<&str> = stdout.split_whitespace().collect();
    assert_eq!(parts[0], "1");
    assert_eq!(parts[1].len(), 4);
}
