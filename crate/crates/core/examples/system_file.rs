//! Write a system file and run the `bound` command on it, as the binary would.

use clap::Parser;
use qsl::cli::{run, Cli, KindSpec, SystemSpec};
use qsl::matrix::{diag, gell_mann};

fn main() {
    let gm = gell_mann();
    let spec = SystemSpec {
        n: 3,
        drift: diag(&[1.0, 0.0, -1.0]),
        controls: vec![gm[1].clone(), gm[4].clone(), gm[6].clone()],
        kind: KindSpec::So,
    };
    let dir = std::env::temp_dir().join("qsl-system-file-example");
    std::fs::create_dir_all(&dir).expect("temporary directory");
    let path = dir.join("so3.json");
    std::fs::write(&path, spec.to_file().to_json()).expect("writable temporary directory");
    println!("wrote {}", path.display());

    let cli = Cli::parse_from(["qsl", "bound", path.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    let code = run(cli, &mut std::io::stdout()).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    println!("exit code {code}; bound.csv and manifest.json are in {}", dir.display());
}
