//! Helpers shared by the CLI test targets: spawning the binary and
//! managing scratch directories under the cargo test tmpdir.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Runs the `qctl` binary with the given arguments.
pub fn qctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qctl"))
        .args(args)
        .output()
        .expect("qctl binary should run")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("qctl should exit, not be killed")
}

/// Fresh scratch directory named for the calling test.
pub fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).expect("clearing old scratch dir");
    }
    std::fs::create_dir_all(&dir).expect("creating scratch dir");
    dir
}

pub fn write_file(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap_or_else(|e| panic!("writing {}: {e}", path.display()));
}

pub fn read_file(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read_file(path))
        .unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

/// Last data row of a CSV file as floats, skipping comment lines.
pub fn last_csv_row(path: &Path) -> Vec<f64> {
    let text = read_file(path);
    let line = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .next_back()
        .unwrap_or_else(|| panic!("{} has no data rows", path.display()));
    line.split(',')
        .map(|c| c.parse().unwrap_or_else(|e| panic!("bad cell {c:?}: {e}")))
        .collect()
}
