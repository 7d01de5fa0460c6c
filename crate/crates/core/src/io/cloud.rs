use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use super::IoError;
use crate::perception::PointCloud;

/// Read a point cloud, picking the format from the file extension
/// (`.ply` -> ASCII PLY, anything else -> 3-column CSV).
pub fn read_cloud(path: &Path) -> Result<PointCloud, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("ply") => read_cloud_ply(path),
        _ => read_cloud_csv(path),
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Read an ASCII PLY file with `x y z` vertex properties and optional
/// `red green blue` color.
pub fn read_cloud_ply(path: &Path) -> Result<PointCloud, IoError> {
    let file = BufReader::new(File::open(path)?);
    let mut lines = file.lines().enumerate();

    let mut vertex_count: Option<usize> = None;
    let mut properties: Vec<String> = Vec::new();
    let mut header_end = 0usize;

    match lines.next() {
        Some((_, Ok(first))) if first.trim() == "ply" => {}
        Some((n, _)) => return Err(parse_err(path, n + 1, "missing 'ply' magic")),
        None => return Err(parse_err(path, 1, "empty file")),
    }
    for (n, line) in lines.by_ref() {
        let line = line?;
        let line = line.trim();
        if line == "end_header" {
            header_end = n + 1;
            break;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("format") => {
                if tokens.next() != Some("ascii") {
                    return Err(parse_err(path, n + 1, "only ascii PLY is supported"));
                }
            }
            Some("element") => {
                if tokens.next() == Some("vertex") {
                    let count = tokens
                        .next()
                        .and_then(|c| c.parse::<usize>().ok())
                        .ok_or_else(|| parse_err(path, n + 1, "bad vertex count"))?;
                    vertex_count = Some(count);
                } else {
                    return Err(parse_err(path, n + 1, "only vertex elements are supported"));
                }
            }
            Some("property") => {
                let _dtype = tokens.next();
                if let Some(name) = tokens.next() {
                    properties.push(name.to_string());
                }
            }
            Some("comment") | Some("obj_info") => {}
            _ => return Err(parse_err(path, n + 1, format!("unexpected header line {line:?}"))),
        }
    }

    let count = vertex_count.ok_or_else(|| parse_err(path, header_end, "no vertex element"))?;
    if properties.len() < 3 || properties[0] != "x" || properties[1] != "y" || properties[2] != "z"
    {
        return Err(parse_err(
            path,
            header_end,
            "vertex properties must start with x y z",
        ));
    }
    let has_color = properties.len() >= 6
        && properties[3] == "red"
        && properties[4] == "green"
        && properties[5] == "blue";

    let mut points = Vec::with_capacity(count);
    let mut colors = if has_color { Some(Vec::with_capacity(count)) } else { None };
    for (n, line) in lines {
        if points.len() == count {
            break;
        }
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < properties.len().min(if has_color { 6 } else { 3 }) {
            return Err(parse_err(path, n + 1, "too few vertex fields"));
        }
        let mut coord = [0.0f64; 3];
        for (i, c) in coord.iter_mut().enumerate() {
            *c = fields[i]
                .parse::<f64>()
                .map_err(|e| parse_err(path, n + 1, format!("bad coordinate: {e}")))?;
            if !c.is_finite() {
                return Err(parse_err(path, n + 1, "non-finite coordinate"));
            }
        }
        points.push(Point3::new(coord[0], coord[1], coord[2]));
        if let Some(colors) = colors.as_mut() {
            let mut rgb = [0u8; 3];
            for (i, c) in rgb.iter_mut().enumerate() {
                *c = fields[3 + i]
                    .parse::<u8>()
                    .map_err(|e| parse_err(path, n + 1, format!("bad color: {e}")))?;
            }
            colors.push(rgb);
        }
    }
    if points.len() != count {
        return Err(IoError::Invalid(format!(
            "{}: expected {count} vertices, found {}",
            path.display(),
            points.len()
        )));
    }
    Ok(PointCloud { points, colors })
}

/// Write an ASCII PLY file; colors are emitted when the cloud carries them.
pub fn write_cloud_ply(path: &Path, cloud: &PointCloud) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {}", cloud.len())?;
    writeln!(out, "property float x")?;
    writeln!(out, "property float y")?;
    writeln!(out, "property float z")?;
    if cloud.colors.is_some() {
        writeln!(out, "property uchar red")?;
        writeln!(out, "property uchar green")?;
        writeln!(out, "property uchar blue")?;
    }
    writeln!(out, "end_header")?;
    for (i, p) in cloud.points.iter().enumerate() {
        match &cloud.colors {
            Some(colors) => {
                let c = colors[i];
                writeln!(out, "{} {} {} {} {} {}", p.x, p.y, p.z, c[0], c[1], c[2])?;
            }
            None => writeln!(out, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    Ok(())
}

/// Read a plain 3-column CSV point cloud (no header).
pub fn read_cloud_csv(path: &Path) -> Result<PointCloud, IoError> {
    let file = BufReader::new(File::open(path)?);
    let mut points = Vec::new();
    for (n, line) in file.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                n + 1,
                format!("expected 3 columns, found {}", fields.len()),
            ));
        }
        let mut coord = [0.0f64; 3];
        for (i, c) in coord.iter_mut().enumerate() {
            *c = fields[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(path, n + 1, format!("bad coordinate: {e}")))?;
            if !c.is_finite() {
                return Err(parse_err(path, n + 1, "non-finite coordinate"));
            }
        }
        points.push(Point3::new(coord[0], coord[1], coord[2]));
    }
    Ok(PointCloud::new(points))
}

/// Write a plain 3-column CSV point cloud. Colors are dropped.
pub fn write_cloud_csv(path: &Path, cloud: &PointCloud) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    for p in &cloud.points {
        writeln!(out, "{},{},{}", p.x, p.y, p.z)?;
    }
    Ok(())
}
