#![allow(dead_code)]

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use conclusive_qst::chain::{ChainSpec, DisorderModel};
use rand::Rng;

pub fn qst(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qst"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QST_OUT_DIR")
        .output()
        .expect("qst binary runs")
}

pub fn random_chain<R: Rng>(rng: &mut R, n: usize, spread: f64) -> ChainSpec {
    DisorderModel::new(1.0, spread, rng.gen())
        .unwrap()
        .sample(n)
        .unwrap()
}

/// All `.csv` files in `dir`, sorted by name, with their contents.
pub fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "csv").then(|| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(&p).unwrap(),
                )
            })
        })
        .collect();
    out.sort();
    out
}
