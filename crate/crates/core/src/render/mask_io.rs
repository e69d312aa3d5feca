//! Indexed-PNG encoding of steppability masks.
//!
//! Palette: 0 black background, 1 green steppable, 2 yellow passable,
//! 3 red non-passable. External tools (e.g. a trained segmentation model)
//! can produce masks in this format and feed them to the planner via
//! [`load_mask`].

use super::{LabelMask, MaskValue, RenderError};
use std::path::Path;

/// RGB palette, index-aligned with [`MaskValue`].
pub const MASK_PALETTE: [[u8; 3]; 4] = [[0, 0, 0], [0, 255, 0], [255, 255, 0], [255, 0, 0]];

pub fn write_mask_png(mask: &LabelMask, path: &Path) -> Result<(), RenderError> {
    let io_err = |source: std::io::Error| RenderError::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let w = std::io::BufWriter::new(file);
    let mut encoder = png::Encoder::new(w, mask.width, mask.height);
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    encoder.set_palette(MASK_PALETTE.concat());
    let mut writer = encoder
        .write_header()
        .map_err(|e| RenderError::Malformed { path: path.to_path_buf(), detail: e.to_string() })?;
    let indices: Vec<u8> = mask.data.iter().map(|m| *m as u8).collect();
    writer
        .write_image_data(&indices)
        .map_err(|e| RenderError::Malformed { path: path.to_path_buf(), detail: e.to_string() })
}

/// Load an indexed-PNG mask. `expected_dims`, when given, must match the
/// decoded image. Pixels using palette indices above 3 are rejected.
pub fn load_mask(path: &Path, expected_dims: Option<(u32, u32)>) -> Result<LabelMask, RenderError> {
    let io_err = |source: std::io::Error| RenderError::Io { path: path.to_path_buf(), source };
    let malformed = |detail: String| RenderError::Malformed { path: path.to_path_buf(), detail };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| malformed(e.to_string()))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Indexed || info.bit_depth != png::BitDepth::Eight {
        return Err(malformed(format!(
            "expected 8-bit indexed color, got {:?}/{:?}",
            info.color_type, info.bit_depth
        )));
    }
    let (width, height) = (info.width, info.height);
    if let Some((w, h)) = expected_dims {
        if (width, height) != (w, h) {
            return Err(RenderError::DimensionMismatch {
                path: path.to_path_buf(),
                got_w: width,
                got_h: height,
                want_w: w,
                want_h: h,
            });
        }
    }
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or_else(|| malformed("image too large".into()))?];
    let frame = reader.next_frame(&mut buf).map_err(|e| malformed(e.to_string()))?;
    let bytes = &buf[..frame.buffer_size()];
    if bytes.len() != (width * height) as usize {
        return Err(malformed("pixel count mismatch".into()));
    }
    let mut data = Vec::with_capacity(bytes.len());
    for &b in bytes {
        match MaskValue::from_index(b) {
            Some(m) => data.push(m),
            None => {
                return Err(RenderError::UnknownPaletteIndex { path: path.to_path_buf(), index: b })
            }
        }
    }
    Ok(LabelMask { width, height, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker(width: u32, height: u32) -> LabelMask {
        let data = (0..width * height)
            .map(|i| MaskValue::from_index((i % 4) as u8).unwrap())
            .collect();
        LabelMask { width, height, data }
    }

    #[test]
    fn round_trip_identical_labels() {
        let mask = checker(17, 9);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        write_mask_png(&mask, &p).unwrap();
        let back = load_mask(&p, Some((17, 9))).unwrap();
        assert_eq!(back, mask);
    }

    #[test]
    fn rewrite_is_byte_identical() {
        let mask = checker(32, 16);
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.png"), dir.path().join("b.png"));
        write_mask_png(&mask, &p1).unwrap();
        write_mask_png(&mask, &p2).unwrap();
        assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    }

    #[test]
    fn out_of_palette_index_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.png");
        {
            let file = std::fs::File::create(&p).unwrap();
            let mut enc = png::Encoder::new(std::io::BufWriter::new(file), 2, 1);
            enc.set_color(png::ColorType::Indexed);
            enc.set_depth(png::BitDepth::Eight);
            // Five palette entries; the second pixel uses the fifth.
            let mut palette = MASK_PALETTE.concat();
            palette.extend([128, 128, 128]);
            enc.set_palette(palette);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[1, 4]).unwrap();
        }
        assert!(matches!(
            load_mask(&p, None),
            Err(RenderError::UnknownPaletteIndex { index: 4, .. })
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mask = checker(8, 8);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        write_mask_png(&mask, &p).unwrap();
        assert!(matches!(
            load_mask(&p, Some((9, 8))),
            Err(RenderError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_indexed_png_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rgb.png");
        {
            let file = std::fs::File::create(&p).unwrap();
            let mut enc = png::Encoder::new(std::io::BufWriter::new(file), 1, 1);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[10, 20, 30]).unwrap();
        }
        assert!(matches!(load_mask(&p, None), Err(RenderError::Malformed { .. })));
    }
}
