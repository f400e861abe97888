//! Input formats: grid worlds and wireless survey datasets.

use std::path::Path;

use iig_core::geometry::{GridGeometry, GridWorld, Point2};
use iig_core::mission::{WssDataset, WssRecord};

use crate::error::{CliError, Result};

/// Parse a grid world.
///
/// The first line is `width height resolution`; then `height` rows of
/// `width` characters, `#` for an obstacle and `.` for free space. The first
/// row is the top of the map (largest y). The origin is `(0, 0)`.
pub fn parse_world(text: &str) -> std::result::Result<GridWorld, String> {
    let mut lines = text.lines().map(str::trim_end).filter(|l| !l.is_empty());
    let header = lines.next().ok_or("empty world file")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [w, h, res] = fields[..] else {
        return Err(format!("header must be `width height resolution`, found {header:?}"));
    };
    let w: usize = w.parse().map_err(|_| format!("bad width {w:?}"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height {h:?}"))?;
    let res: f64 = res.parse().map_err(|_| format!("bad resolution {res:?}"))?;
    let geometry = GridGeometry::new(w, h, res, Point2::new(0.0, 0.0)).map_err(|e| e.to_string())?;
    let rows: Vec<&str> = lines.collect();
    if rows.len() != h {
        return Err(format!("expected {h} rows, found {}", rows.len()));
    }
    let mut cells = vec![false; w * h];
    for (i, row) in rows.iter().enumerate() {
        let r = h - 1 - i;
        if row.chars().count() != w {
            return Err(format!("row {} has {} cells, expected {w}", i + 1, row.chars().count()));
        }
        for (c, ch) in row.chars().enumerate() {
            cells[geometry.index(c, r)] = match ch {
                '#' => true,
                '.' => false,
                other => return Err(format!("row {}: unexpected character {other:?}", i + 1)),
            };
        }
    }
    GridWorld::new(geometry, cells).map_err(|e| e.to_string())
}

pub fn render_world(world: &GridWorld) -> String {
    let g = world.geometry();
    let mut out = format!("{} {} {}\n", g.width, g.height, g.resolution);
    for r in (0..g.height).rev() {
        for c in 0..g.width {
            out.push(if world.cells()[g.index(c, r)] { '#' } else { '.' });
        }
        out.push('\n');
    }
    out
}

/// Load a world file; a missing or malformed file is an input error.
pub fn load_world(path: &Path) -> Result<GridWorld> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e.to_string()))?;
    parse_world(&text).map_err(|m| CliError::input(path, m))
}

#[derive(Debug, serde::Deserialize)]
struct CsvRecord {
    lat: f64,
    lon: f64,
    rssi_dbm: f64,
}

/// Parse a `lat,lon,rssi_dbm` CSV with one header line.
pub fn parse_dataset(text: &str) -> std::result::Result<WssDataset, String> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?;
    if headers.iter().collect::<Vec<_>>() != ["lat", "lon", "rssi_dbm"] {
        return Err(format!("header must be `lat,lon,rssi_dbm`, found {:?}", headers.as_slice()));
    }
    let mut records = Vec::new();
    for row in reader.deserialize() {
        let r: CsvRecord = row.map_err(|e| e.to_string())?;
        records.push(WssRecord {
            lat: r.lat,
            lon: r.lon,
            rssi: r.rssi_dbm,
        });
    }
    WssDataset::new(records).map_err(|e| e.to_string())
}

pub fn render_dataset(data: &WssDataset) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["lat", "lon", "rssi_dbm"]).expect("in-memory write");
    for r in data.records() {
        writer
            .write_record([
                crate::emit::num_csv(r.lat),
                crate::emit::num_csv(r.lon),
                crate::emit::num_csv(r.rssi),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn load_dataset(path: &Path) -> Result<WssDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e.to_string()))?;
    parse_dataset(&text).map_err(|m| CliError::input(path, m))
}
