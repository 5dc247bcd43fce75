//! CSV emission and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use stablemix::probe::MCEstimate;
use stablemix::PathSample;

/// Collects the files written by one run.
pub struct OutDir {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    /// Writes `# units: …` followed by the header row and `rows`.
    pub fn csv(&mut self, name: &str, units: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.path(name);
        let mut f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(f, "# units: {units}")?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn manifest(&mut self, config: serde_json::Value, wall_time: f64, summary: serde_json::Value) -> Result<()> {
        let files = self.files.clone();
        let m = serde_json::json!({
            "command": config["command"],
            "seed": config["seed"],
            "versions": {"stablemix": stablemix::VERSION, "cli": env!("CARGO_PKG_VERSION")},
            "threads": rayon::current_num_threads(),
            "wall_time_s": wall_time,
            "config": config,
            "summary": summary,
            "files": files,
        });
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub const ESTIMATE_HEADER: [&str; 10] =
    ["probe", "mean", "stderr", "n_samples", "seed", "bound_rhs", "oracle", "oracle_z", "verdict", "notes"];

pub const ESTIMATE_UNITS: &str =
    "probe: label; mean, stderr, bound_rhs, oracle: units of the probed functional; oracle_z: standard errors; verdict: pass/fail";

pub fn estimate_row(label: &str, e: &MCEstimate<f64>) -> Vec<String> {
    vec![
        label.to_string(),
        num(e.mean),
        num(e.stderr),
        e.n_samples.to_string(),
        e.seed.to_string(),
        num(e.bound_rhs),
        e.oracle.map(num).unwrap_or_default(),
        e.oracle_z().map(num).unwrap_or_default(),
        if e.verdict { "pass" } else { "fail" }.to_string(),
        e.notes.join("; "),
    ]
}

pub const PATH_HEADER: [&str; 5] = ["t", "x", "y", "jump", "jump_size"];

pub const PATH_UNITS: &str = "t: time; x, y: state units; jump: 1 if a jump of size > 1 arrived in (t_prev, t]; jump_size: summed magnitude of those jumps";

/// One row per time node.
pub fn path_rows(path: &PathSample<f64>) -> Vec<Vec<String>> {
    path.times
        .iter()
        .zip(&path.states)
        .enumerate()
        .map(|(k, (&t, s))| {
            let size: f64 = if k == 0 { 0.0 } else { path.large_jumps_in(k - 1).map(|j| j.magnitude()).sum() };
            vec![
                num(t),
                num(s[0]),
                num(s[1]),
                if size > 0.0 { "1" } else { "0" }.to_string(),
                num(size),
            ]
        })
        .collect()
}
