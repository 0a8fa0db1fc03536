//! Image and sidecar I/O.
//!
//! Loading accepts 8/16-bit grayscale or RGB PNG, binary 8/16-bit PGM (P5),
//! and `synth:` URIs for the built-in test scenes. RGB converts to luminance
//! with the 0.2989/0.5870/0.1140 weights. Saving always writes 16-bit
//! grayscale PNG, clamped to [0, 1]; a raw f64 sidecar format (16-byte dims
//! header, little-endian row-major payload) preserves solver precision
//! across pipeline stages. All writes go through a temp-file rename.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use deframe_core::degrade::{checkerboard, synthetic_scene};
use deframe_core::Image;

use crate::errors::{CliError, CliResult};

const LUMA_R: f64 = 0.2989;
const LUMA_G: f64 = 0.5870;
const LUMA_B: f64 = 0.1140;

/// Load an image from a path or a `synth:` URI, optionally resizing.
pub fn load_image(source: &str, resize: Option<[usize; 2]>) -> CliResult<Image> {
    let img = if let Some(spec) = source.strip_prefix("synth:") {
        synth_image(spec)?
    } else {
        let path = Path::new(source);
        match path.extension().and_then(|e| e.to_str()) {
            Some("png") | Some("PNG") => load_png(path)?,
            Some("pgm") | Some("PGM") => load_pgm(path)?,
            other => {
                return Err(CliError::Config(format!(
                    "unsupported image format {other:?} for {source}; expected .png or .pgm"
                )))
            }
        }
    };
    match resize {
        Some([h, w]) => {
            if h == 0 || w == 0 {
                return Err(CliError::Config("resize dimensions must be positive".into()));
            }
            Ok(bilinear_resize(&img, h, w))
        }
        None => Ok(img),
    }
}

/// `scene:HxW`, `scene:N`, `checker:HxW:TILE` or `checker:N:TILE`.
fn synth_image(spec: &str) -> CliResult<Image> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse_dims = |s: &str| -> CliResult<(usize, usize)> {
        let dims: Vec<&str> = s.split('x').collect();
        let bad = || CliError::Config(format!("bad synth dimensions {s}"));
        match dims.as_slice() {
            [n] => {
                let n = n.parse().map_err(|_| bad())?;
                Ok((n, n))
            }
            [h, w] => Ok((h.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    };
    match parts.as_slice() {
        ["scene", dims] => {
            let (h, w) = parse_dims(dims)?;
            Ok(synthetic_scene(h, w))
        }
        ["checker", dims, tile] => {
            let (h, w) = parse_dims(dims)?;
            let tile = tile
                .parse()
                .map_err(|_| CliError::Config(format!("bad checker tile {tile}")))?;
            Ok(checkerboard(h, w, tile))
        }
        _ => Err(CliError::Config(format!(
            "unknown synth image `synth:{spec}`; expected synth:scene:HxW or synth:checker:HxW:TILE"
        ))),
    }
}

fn load_png(path: &Path) -> CliResult<Image> {
    let file = File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| CliError::Io(format!("corrupt PNG {}: {e}", path.display())))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| CliError::Io(format!("corrupt PNG {}: {e}", path.display())))?;
    let (h, w) = (info.height as usize, info.width as usize);
    let data = &buf[..info.buffer_size()];

    use png::{BitDepth, ColorType};
    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::Rgb => 3,
        other => {
            return Err(CliError::Config(format!(
                "unsupported PNG color type {other:?} in {}; expected grayscale or RGB",
                path.display()
            )))
        }
    };
    let mut pixels = Vec::with_capacity(h * w);
    match info.bit_depth {
        BitDepth::Eight => {
            for px in data.chunks_exact(channels) {
                pixels.push(to_gray(px.iter().map(|&v| v as f64 / 255.0), channels));
            }
        }
        BitDepth::Sixteen => {
            for px in data.chunks_exact(2 * channels) {
                pixels.push(to_gray(
                    px.chunks_exact(2)
                        .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 / 65535.0),
                    channels,
                ));
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unsupported PNG bit depth {other:?} in {}",
                path.display()
            )))
        }
    }
    Image::new(h, w, pixels).map_err(CliError::from)
}

fn to_gray(mut channels_iter: impl Iterator<Item = f64>, channels: usize) -> f64 {
    if channels == 1 {
        channels_iter.next().unwrap_or(0.0)
    } else {
        let r = channels_iter.next().unwrap_or(0.0);
        let g = channels_iter.next().unwrap_or(0.0);
        let b = channels_iter.next().unwrap_or(0.0);
        LUMA_R * r + LUMA_G * g + LUMA_B * b
    }
}

fn load_pgm(path: &Path) -> CliResult<Image> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let corrupt = |what: &str| CliError::Io(format!("corrupt PGM {}: {what}", path.display()));

    // Header: "P5" <width> <height> <maxval>, whitespace/comment separated.
    let mut pos = 0usize;
    let mut next_token = |raw: &[u8]| -> Option<(usize, usize)> {
        let mut start = pos;
        loop {
            while start < raw.len() && raw[start].is_ascii_whitespace() {
                start += 1;
            }
            if start < raw.len() && raw[start] == b'#' {
                while start < raw.len() && raw[start] != b'\n' {
                    start += 1;
                }
                continue;
            }
            break;
        }
        let mut end = start;
        while end < raw.len() && !raw[end].is_ascii_whitespace() {
            end += 1;
        }
        if start == end {
            return None;
        }
        pos = end;
        Some((start, end))
    };

    let magic = next_token(&raw).ok_or_else(|| corrupt("missing magic"))?;
    if &raw[magic.0..magic.1] != b"P5" {
        return Err(CliError::Config(format!(
            "unsupported PGM variant in {}; only binary P5 is accepted",
            path.display()
        )));
    }
    let mut parse_number = |what: &str| -> CliResult<usize> {
        let (s, e) = next_token(&raw).ok_or_else(|| corrupt(what))?;
        std::str::from_utf8(&raw[s..e])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| corrupt(what))
    };
    let w = parse_number("width")?;
    let h = parse_number("height")?;
    let maxval = parse_number("maxval")?;
    let data = &raw[pos + 1..];

    let pixels: Vec<f64> = if maxval < 256 {
        if data.len() < h * w {
            return Err(corrupt("truncated payload"));
        }
        data[..h * w].iter().map(|&b| b as f64 / maxval as f64).collect()
    } else if maxval < 65536 {
        if data.len() < 2 * h * w {
            return Err(corrupt("truncated payload"));
        }
        data[..2 * h * w]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 / maxval as f64)
            .collect()
    } else {
        return Err(corrupt("maxval out of range"));
    };
    Image::new(h, w, pixels).map_err(CliError::from)
}

/// Write a [0, 1]-clamped 16-bit grayscale PNG atomically.
pub fn save_png16(img: &Image, path: &Path) -> CliResult<()> {
    let mut payload = Vec::with_capacity(img.len() * 2);
    for &v in img.data() {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        payload.extend_from_slice(&q.to_be_bytes());
    }
    atomic_write(path, |file| {
        let mut encoder = png::Encoder::new(file, img.width() as u32, img.height() as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Sixteen);
        let mut writer = encoder
            .write_header()
            .map_err(|e| CliError::Io(format!("PNG encode: {e}")))?;
        writer
            .write_image_data(&payload)
            .map_err(|e| CliError::Io(format!("PNG encode: {e}")))?;
        Ok(())
    })
}

/// Raw float sidecar: 16-byte header (height u64 LE, width u64 LE) then
/// row-major f64 LE samples.
pub fn save_f64(img: &Image, path: &Path) -> CliResult<()> {
    atomic_write(path, |file| {
        let mut out = BufWriter::new(file);
        out.write_all(&(img.height() as u64).to_le_bytes())?;
        out.write_all(&(img.width() as u64).to_le_bytes())?;
        for &v in img.data() {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    })
}

pub fn load_f64(path: &Path) -> CliResult<Image> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    if raw.len() < 16 {
        return Err(CliError::Io(format!("truncated sidecar {}", path.display())));
    }
    let h = u64::from_le_bytes(raw[0..8].try_into().unwrap()) as usize;
    let w = u64::from_le_bytes(raw[8..16].try_into().unwrap()) as usize;
    let expected = 16 + 8 * h * w;
    if raw.len() != expected {
        return Err(CliError::Io(format!(
            "sidecar {} is {} bytes, expected {expected} for {h}x{w}",
            path.display(),
            raw.len()
        )));
    }
    let data: Vec<f64> = raw[16..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Image::new(h, w, data).map_err(CliError::from)
}

/// Bilinear resampling to the target dimensions.
pub fn bilinear_resize(img: &Image, height: usize, width: usize) -> Image {
    if height == img.height() && width == img.width() {
        return img.clone();
    }
    let sy = img.height() as f64 / height as f64;
    let sx = img.width() as f64 / width as f64;
    Image::from_fn(height, width, |i, j| {
        // Align pixel centers.
        let fy = ((i as f64 + 0.5) * sy - 0.5).clamp(0.0, img.height() as f64 - 1.0);
        let fx = ((j as f64 + 0.5) * sx - 0.5).clamp(0.0, img.width() as f64 - 1.0);
        let (y0, x0) = (fy.floor() as usize, fx.floor() as usize);
        let (y1, x1) = ((y0 + 1).min(img.height() - 1), (x0 + 1).min(img.width() - 1));
        let (wy, wx) = (fy - y0 as f64, fx - x0 as f64);
        (1.0 - wy) * ((1.0 - wx) * img.get(y0, x0) + wx * img.get(y0, x1))
            + wy * ((1.0 - wx) * img.get(y1, x0) + wx * img.get(y1, x1))
    })
}

/// Atomic write via temp-file rename in the destination directory.
pub fn atomic_write(path: &Path, write: impl FnOnce(File) -> CliResult<()>) -> CliResult<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    let file = File::create(&tmp)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", tmp.display())))?;
    write(file)?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot move into place {}: {e}", path.display())))?;
    Ok(())
}

/// Plain-text atomic write helper for CSV emission.
pub fn atomic_write_text(path: &Path, text: &str) -> CliResult<()> {
    atomic_write(path, |mut file| {
        file.write_all(text.as_bytes())?;
        Ok(())
    })
}
