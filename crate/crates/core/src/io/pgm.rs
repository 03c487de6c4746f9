use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A greyscale raster; `pixels` are row-major, `width` per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
    pub comments: Vec<String>,
}

fn bad(path: &Path, detail: &str) -> Error {
    Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, detail.to_string()))
}

/// Reads a binary (P5) PGM with 8- or 16-bit samples.
pub fn read_pgm(path: &Path) -> Result<Pgm> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut pos = 0;
    let mut comments = Vec::new();
    let mut fields: Vec<String> = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(bad(path, "truncated PGM header"));
        }
        if bytes[pos] == b'#' {
            let end = bytes[pos..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |n| pos + n);
            comments.push(String::from_utf8_lossy(&bytes[pos + 1..end]).trim().to_string());
            pos = end;
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).to_string());
    }
    if fields[0] != "P5" {
        return Err(bad(path, "not a binary PGM (P5)"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(path, "malformed PGM header"));
    let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(bad(path, "PGM maxval out of range"));
    }
    pos += 1;
    let wide = maxval > 255;
    let need = width * height * if wide { 2 } else { 1 };
    if bytes.len() < pos + need {
        return Err(bad(path, "truncated PGM raster"));
    }
    let raster = &bytes[pos..pos + need];
    let pixels = if wide {
        raster.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect()
    } else {
        raster.iter().map(|&b| b as u16).collect()
    };
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        pixels,
        comments,
    })
}

/// Writes a 16-bit big-endian P5 image.
pub fn write_pgm16(path: &Path, pgm: &Pgm) -> Result<()> {
    assert_eq!(pgm.pixels.len(), pgm.width * pgm.height, "PGM raster size mismatch");
    assert!(pgm.maxval > 255, "16-bit PGM needs maxval > 255");
    let mut out = b"P5\n".to_vec();
    for c in &pgm.comments {
        out.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    out.extend_from_slice(format!("{} {}\n{}\n", pgm.width, pgm.height, pgm.maxval).as_bytes());
    for p in &pgm.pixels {
        out.extend_from_slice(&p.to_be_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
