//! Drives the command layer in-process and writes the three plot kinds.

use cpe_workbench::cli::{run_text, Format, Overrides};

const DOCS: [(&str, &str); 3] = [
    (
        "cb-rank",
        r#"{"schema": "v1", "scheme": {"kind": "acc", "target": "1/2", "side": "below", "ratio": "1/4", "window": "1/4", "body": {"kind": "points", "ps": ["1/2"]}}}"#,
    ),
    (
        "gamma-rank",
        r#"{"schema": "v1", "scheme": {"kind": "points", "ps": ["1/2"]}, "grid_n": 8, "eps": "1/8"}"#,
    ),
    (
        "density-profile",
        r#"{"schema": "v1", "sft": {"alphabet": ["0", "1"], "forbidden": ["11"]}, "u": {"word": "0"}, "v": {"word": "1"}, "n": 8}"#,
    ),
];

fn main() {
    let dir = std::env::temp_dir().join("cpe-workbench-plots");
    std::fs::create_dir_all(&dir).expect("temp dir");
    for (cmd, doc) in DOCS {
        let report = match run_text(cmd, doc, Overrides::default()) {
            Ok(r) => r,
            Err(f) => {
                eprintln!("{cmd}: {}", f.message);
                std::process::exit(f.exit_code);
            }
        };
        print!("{}", report.render(Format::Csv).expect("tabular"));
        let path = dir.join(format!("{cmd}.svg"));
        std::fs::write(&path, report.render(Format::Svg).expect("plottable")).expect("write svg");
        println!("wrote {}", path.display());
    }
}
