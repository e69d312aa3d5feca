//! Portable FloatMap encoding for depth images.
//!
//! Grayscale `Pf` maps, scale -1.0 (little-endian), rows stored bottom to
//! top per the format convention. No-hit pixels encode as +infinity.

use super::{DepthImage, RenderError, NO_HIT};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub fn write_pfm(depth: &DepthImage, path: &Path) -> Result<(), RenderError> {
    let io_err = |source: std::io::Error| RenderError::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write!(w, "Pf\n{} {}\n-1.0\n", depth.width, depth.height).map_err(io_err)?;
    for v in (0..depth.height).rev() {
        for u in 0..depth.width {
            w.write_all(&depth.at(u, v).to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Read a little-endian grayscale PFM back into a depth image. The validity
/// band is not part of the format; the caller supplies it.
pub fn read_pfm(path: &Path, min_range: f64, max_range: f64) -> Result<DepthImage, RenderError> {
    let io_err = |source: std::io::Error| RenderError::Io { path: path.to_path_buf(), source };
    let bad = |detail: &str| RenderError::Malformed {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(io_err)?
        .read_to_end(&mut bytes)
        .map_err(io_err)?;
    let mut cursor = 0usize;
    let mut token = || -> Result<String, RenderError> {
        while cursor < bytes.len() && bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        let start = cursor;
        while cursor < bytes.len() && !bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        if start == cursor {
            return Err(RenderError::Malformed {
                path: path.to_path_buf(),
                detail: "truncated header".into(),
            });
        }
        let s = String::from_utf8_lossy(&bytes[start..cursor]).into_owned();
        cursor += 1; // single whitespace after each token
        Ok(s)
    };
    if token()? != "Pf" {
        return Err(bad("not a grayscale PFM"));
    }
    let width: u32 = token()?.parse().map_err(|_| bad("bad width"))?;
    let height: u32 = token()?.parse().map_err(|_| bad("bad height"))?;
    let scale: f64 = token()?.parse().map_err(|_| bad("bad scale"))?;
    if scale >= 0.0 {
        return Err(bad("big-endian PFM unsupported"));
    }
    let n = (width as usize) * (height as usize);
    if bytes.len() < cursor + 4 * n {
        return Err(bad("truncated pixel data"));
    }
    let mut data = vec![NO_HIT; n];
    for row_from_bottom in 0..height {
        let v = height - 1 - row_from_bottom;
        for u in 0..width {
            let o = cursor + 4 * (row_from_bottom * width + u) as usize;
            let val = f32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]);
            data[(v * width + u) as usize] = val;
        }
    }
    Ok(DepthImage { width, height, data, min_range, max_range })
}
