//! The generated header must be valid C99: compile a tiny translation unit
//! against it.

use std::io::Write;
use std::process::Command;

#[test]
fn generated_header_compiles_as_c() {
    let include_dir = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let header = format!("{include_dir}/fpt.h");
    assert!(
        std::path::Path::new(&header).exists(),
        "header not generated at {header}"
    );

    let cc = match Command::new("cc").arg("--version").output() {
        Ok(out) if out.status.success() => "cc",
        _ => {
            eprintln!("no C compiler available, skipping compile check");
            return;
        }
    };

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let mut f = std::fs::File::create(&src).unwrap();
    writeln!(
        f,
        "#include <fpt.h>\n\
         int use_symbols(void) {{\n\
             FptBoundary *b = 0;\n\
             double lo, hi, grid = 1.0;\n\
             FptStatus st = fpt_boundary_from_json(\"{{}}\", 1.0, &b);\n\
             if (st == FptStatus_Ok) {{\n\
                 st = fpt_envelope(b, &grid, 1, &lo, &hi);\n\
                 fpt_boundary_free(b);\n\
             }}\n\
             return (int) st;\n\
         }}"
    )
    .unwrap();
    drop(f);

    let out = Command::new(cc)
        .args([
            "-std=c99",
            "-Wall",
            "-Werror",
            "-I",
            include_dir,
            "-c",
            src.to_str().unwrap(),
            "-o",
            dir.path().join("smoke.o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "header failed to compile:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
