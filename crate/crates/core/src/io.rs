//! File formats: point clouds as CSV (`x,y,z` header) or ASCII PLY, binary
//! masks as PGM (P2 or P5), depth rasters as headerless CSV grids with
//! `nan` for missing values.

use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::geom3d::{Point3, Vec3};
use crate::mask2d::{BinaryMask, Raster};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
}

fn format<T>(msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Format(msg.into()))
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct CsvPoint {
    x: f64,
    y: f64,
    z: f64,
}

pub fn write_cloud_csv<W: Write>(out: W, points: &[Point3<f64>]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(CsvPoint { x: p.x, y: p.y, z: p.z })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cloud_csv<R: Read>(input: R) -> Result<Vec<Point3<f64>>, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    r.deserialize::<CsvPoint>()
        .map(|row| row.map(|p| Vec3::new(p.x, p.y, p.z)).map_err(IoError::from))
        .collect()
}

pub fn write_cloud_ply<W: Write>(mut out: W, points: &[Point3<f64>]) -> Result<(), IoError> {
    writeln!(out, "ply\nformat ascii 1.0\nelement vertex {}", points.len())?;
    writeln!(
        out,
        "property double x\nproperty double y\nproperty double z\nend_header"
    )?;
    for p in points {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

/// Reads ASCII PLY vertices; `x`, `y`, `z` may sit anywhere among the vertex
/// properties and other elements are skipped.
pub fn read_cloud_ply<R: Read>(input: R) -> Result<Vec<Point3<f64>>, IoError> {
    let mut lines = BufReader::new(input).lines();
    if lines.next().transpose()?.as_deref().map(str::trim) != Some("ply") {
        return format("missing ply magic");
    }
    let mut elements: Vec<(String, usize, Vec<String>)> = Vec::new();
    loop {
        let Some(line) = lines.next().transpose()? else {
            return format("ply header not terminated");
        };
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            ["end_header"] => break,
            ["format", fmt, ..] if *fmt != "ascii" => return format("only ascii ply is supported"),
            ["element", name, n] => {
                let n = n.parse().map_err(|_| IoError::Format("bad element count".into()))?;
                elements.push((name.to_string(), n, Vec::new()));
            }
            ["property", "list", ..] => match elements.last_mut() {
                Some(e) => e.2.push("list".into()),
                None => return format("property before element"),
            },
            ["property", _, name] => match elements.last_mut() {
                Some(e) => e.2.push(name.to_string()),
                None => return format("property before element"),
            },
            _ => {}
        }
    }
    let mut points = Vec::new();
    for (name, count, props) in &elements {
        let idx = |k: &str| props.iter().position(|p| p == k);
        let cols = (idx("x"), idx("y"), idx("z"));
        for _ in 0..*count {
            let Some(line) = lines.next().transpose()? else {
                return format("ply body is truncated");
            };
            if name != "vertex" {
                continue;
            }
            let (Some(ix), Some(iy), Some(iz)) = cols else {
                return format("vertex element lacks x, y or z");
            };
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| IoError::Format(format!("bad vertex line: {line}")))?;
            if v.len() < props.len() {
                return format(format!("short vertex line: {line}"));
            }
            points.push(Vec3::new(v[ix], v[iy], v[iz]));
        }
    }
    Ok(points)
}

/// Loads a cloud, choosing the format from the extension (`.ply`, else CSV).
pub fn load_cloud(path: &Path) -> Result<Vec<Point3<f64>>, IoError> {
    let file = fs::File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("ply") => read_cloud_ply(file),
        _ => read_cloud_csv(file),
    }
}

pub fn save_cloud(path: &Path, points: &[Point3<f64>]) -> Result<(), IoError> {
    let file = io::BufWriter::new(fs::File::create(path)?);
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("ply") => write_cloud_ply(file, points),
        _ => write_cloud_csv(file, points),
    }
}

/// Binary (P5) PGM, set pixels 255.
pub fn write_mask_pgm<W: Write>(mut out: W, mask: &BinaryMask) -> Result<(), IoError> {
    write!(out, "P5\n{} {}\n255\n", mask.width(), mask.height())?;
    let bytes: Vec<u8> = mask.bits().iter().map(|b| if *b { 255 } else { 0 }).collect();
    out.write_all(&bytes)?;
    Ok(())
}

/// Reads P2 or P5 (8-bit); any non-zero gray is foreground.
pub fn read_mask_pgm<R: Read>(mut input: R) -> Result<BinaryMask, IoError> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let mut pos = 0;
    let mut token = || -> Option<String> {
        loop {
            while pos < data.len() && data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < data.len() && data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&data[start..pos]).into_owned())
    };
    let magic = token();
    let mut num = |what: &str| -> Result<usize, IoError> {
        token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| IoError::Format(format!("bad pgm {what}")))
    };
    let (w, h, max) = (num("width")?, num("height")?, num("maxval")?);
    if max == 0 || max > 255 {
        return format("only 8-bit pgm is supported");
    }
    let bits = match magic.as_deref() {
        Some("P5") => {
            let start = pos + 1;
            let body = data
                .get(start..start + w * h)
                .ok_or(IoError::Format("pgm body is truncated".into()))?;
            body.iter().map(|v| *v != 0).collect()
        }
        Some("P2") => {
            let text = String::from_utf8_lossy(&data[pos..]).into_owned();
            let vals: Vec<u32> = text
                .split_whitespace()
                .take(w * h)
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| IoError::Format("bad pgm sample".into()))?;
            vals.into_iter().map(|v| v != 0).collect()
        }
        _ => return format("not a P2/P5 pgm"),
    };
    BinaryMask::from_bits(w, h, bits).map_err(|e| IoError::Format(e.to_string()))
}

/// One CSV row per raster row; invalid depths are written as `nan`.
pub fn write_depth_csv<W: Write>(out: W, depth: &Raster<f64>) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in depth.values().chunks(depth.width().max(1)) {
        w.write_record(row.iter().map(|v| {
            if Raster::is_valid_depth(*v) {
                v.to_string()
            } else {
                "nan".to_string()
            }
        }))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_depth_csv<R: Read>(input: R) -> Result<Raster<f64>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values = Vec::new();
    let mut width = None;
    let mut height = 0;
    for rec in r.records() {
        let rec = rec?;
        if *width.get_or_insert(rec.len()) != rec.len() {
            return format("ragged depth grid");
        }
        for f in rec.iter() {
            let v: f64 = f.parse().map_err(|_| IoError::Format(format!("bad depth value {f}")))?;
            values.push(if v.is_finite() { v } else { 0.0 });
        }
        height += 1;
    }
    Raster::from_values(width.unwrap_or(0), height, values).map_err(|e| IoError::Format(e.to_string()))
}
