//! Fits a CSV of observations through the command-line front end.
//!
//! ```text
//! cargo run --example fit_csv -- data.csv [adjacency.csv]
//! ```
//!
//! Without arguments it writes a small synthetic dataset to a temporary
//! directory and fits that.

use std::path::PathBuf;

use lcsm::cli::main_with_args;

fn main() {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        let dir = std::env::temp_dir().join("lcsm-fit-csv-example");
        std::fs::create_dir_all(&dir).expect("temp dir");
        let data = dir.join("data.csv");
        let rows: Vec<String> = (0..30)
            .map(|i| {
                let t = i as f64;
                format!("{:.3},{:.3},{:.3}", (t * 0.7).sin() * 2.0, (t * 1.3).cos(), (t * 0.7).sin() + 0.5 * (t * 2.1).cos())
            })
            .collect();
        std::fs::write(&data, rows.join("\n")).expect("write data");
        let adj = dir.join("adjacency.csv");
        std::fs::write(&adj, "0,1,1\n1,0,0\n1,0,0\n").expect("write adjacency");
        args = vec![path_str(data), path_str(adj)];
    }
    let mut cli = vec!["lcsm".to_string(), "fit".into(), "--data".into(), args[0].clone(), "--nlambda".into(), "20".into()];
    if let Some(adj) = args.get(1) {
        cli.extend(["--adjacency".into(), adj.clone()]);
    }
    std::process::exit(main_with_args(cli));
}

fn path_str(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}
