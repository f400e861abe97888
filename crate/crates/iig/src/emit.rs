//! Result files. Every float is written with 17 significant digits
//! (`{:.16e}`), so parsing the text back reproduces the value bit for bit.
//! Non-finite values become `null` in JSON and `inf`, `-inf` or `nan` in CSV.

use std::fmt::Write as _;
use std::path::Path;

use iig_core::mission::MissionLog;
use iig_core::path::Path as TreePath;
use iig_core::planner::{TraceEntry, Tree};

use crate::error::{CliError, Result};

pub fn num_json(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

pub fn num_csv(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn parse_csv_num(text: &str) -> std::result::Result<f64, String> {
    text.trim().parse().map_err(|_| format!("bad number {text:?}"))
}

/// Ordered JSON object.
#[derive(Debug, Default, Clone)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.into(), num_json(v)));
        self
    }

    pub fn opt_num(mut self, key: &str, v: Option<f64>) -> Self {
        self.fields.push((key.into(), v.map_or("null".into(), num_json)));
        self
    }

    pub fn int(mut self, key: &str, v: u64) -> Self {
        self.fields.push((key.into(), v.to_string()));
        self
    }

    pub fn bool(mut self, key: &str, v: bool) -> Self {
        self.fields.push((key.into(), v.to_string()));
        self
    }

    pub fn str(mut self, key: &str, v: &str) -> Self {
        self.fields.push((key.into(), serde_json::to_string(v).expect("string serializes")));
        self
    }

    /// Insert pre-rendered JSON.
    pub fn raw(mut self, key: &str, json: String) -> Self {
        self.fields.push((key.into(), json));
        self
    }

    pub fn render(&self) -> String {
        let body: Vec<String> = self.fields.iter().map(|(k, v)| format!("{k:?}:{v}")).collect();
        format!("{{{}}}", body.join(","))
    }

    /// Rendered with one field per line.
    pub fn pretty(&self) -> String {
        let body: Vec<String> = self.fields.iter().map(|(k, v)| format!("  {k:?}: {v}")).collect();
        format!("{{\n{}\n}}\n", body.join(",\n"))
    }
}

fn points_json(points: impl Iterator<Item = (f64, f64)>) -> String {
    let items: Vec<String> = points.map(|(x, y)| format!("[{},{}]", num_json(x), num_json(y))).collect();
    format!("[{}]", items.join(","))
}

/// `tree.json`: every node with its parent link, pose, cost and information.
pub fn tree_json(tree: &Tree) -> String {
    let mut out = String::from("{\"nodes\":[\n");
    for (i, n) in tree.nodes().iter().enumerate() {
        let parent = n.parent.map_or("null".into(), |p| p.to_string());
        let _ = write!(
            out,
            "{{\"id\":{},\"parent\":{},\"x\":{},\"y\":{},\"heading\":{},\"cost\":{},\"info\":{},\"closed\":{}}}",
            n.id,
            parent,
            num_json(n.position.x),
            num_json(n.position.y),
            num_json(n.pose.heading),
            num_json(n.cost),
            num_json(n.info),
            n.closed
        );
        out.push_str(if i + 1 < tree.len() { ",\n" } else { "\n" });
    }
    out.push_str("]}\n");
    out
}

/// `path.json`: node ids from root to leaf with their positions.
pub fn path_json(tree: &Tree, path: &TreePath) -> String {
    let ids: Vec<String> = path.nodes.iter().map(usize::to_string).collect();
    JsonObject::new()
        .raw("nodes", format!("[{}]", ids.join(",")))
        .raw(
            "points",
            points_json(path.nodes.iter().map(|&i| {
                let p = tree.node(i).position;
                (p.x, p.y)
            })),
        )
        .num("cost", path.cost)
        .num("info", path.info)
        .render()
        + "\n"
}

/// `convergence.csv`: one row per inserted node.
pub fn convergence_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("sample,iric,mean\n");
    for t in trace {
        let _ = writeln!(out, "{},{},{}", t.samples, num_csv(t.iric), num_csv(t.mean));
    }
    out
}

/// `entropy.csv`: average map entropy before each planning step, then the final value.
pub fn entropy_csv(log: &MissionLog) -> String {
    let mut out = String::from("step,avg_entropy\n");
    for s in &log.steps {
        let _ = writeln!(out, "{},{}", s.step, num_csv(s.entropy));
    }
    let _ = writeln!(out, "{},{}", log.steps.len(), num_csv(log.final_entropy));
    out
}

/// `log.jsonl`: one JSON record per mission step.
pub fn log_jsonl(log: &MissionLog) -> String {
    let mut out = String::new();
    for s in &log.steps {
        let rec = JsonObject::new()
            .int("step", s.step as u64)
            .num("x", s.position.x)
            .num("y", s.position.y)
            .num("heading", s.heading)
            .num("entropy", s.entropy)
            .int("samples", s.samples as u64)
            .int("nodes", s.nodes as u64)
            .bool("converged", s.converged)
            .num("final_mean", s.final_mean)
            .raw("path", points_json(s.path.iter().map(|p| (p.x, p.y))))
            .num("distance", s.distance);
        out.push_str(&rec.render());
        out.push('\n');
    }
    out
}

pub fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct NodeRow {
    pub id: usize,
    pub parent: Option<usize>,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub cost: f64,
    pub info: f64,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct TreeFile {
    pub nodes: Vec<NodeRow>,
}

#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct PathFile {
    pub nodes: Vec<usize>,
    pub points: Vec<[f64; 2]>,
    pub cost: f64,
    pub info: f64,
}

pub fn read_tree_json(text: &str) -> std::result::Result<TreeFile, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn read_path_json(text: &str) -> std::result::Result<PathFile, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn read_convergence_csv(text: &str) -> std::result::Result<Vec<TraceEntry>, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        if row.len() != 3 {
            return Err(format!("expected 3 columns, found {}", row.len()));
        }
        out.push(TraceEntry {
            samples: row[0].parse().map_err(|_| format!("bad sample count {:?}", &row[0]))?,
            iric: parse_csv_num(&row[1])?,
            mean: parse_csv_num(&row[2])?,
        });
    }
    Ok(out)
}

pub fn read_entropy_csv(text: &str) -> std::result::Result<Vec<(usize, f64)>, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let step = row.get(0).ok_or("missing step")?;
        let h = row.get(1).ok_or("missing entropy")?;
        out.push((step.parse().map_err(|_| format!("bad step {step:?}"))?, parse_csv_num(h)?));
    }
    Ok(out)
}
