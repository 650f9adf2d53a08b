//! Image file formats: PNG (8-bit RGB and gray, 16-bit gray), PFM, PPM and
//! a raw 32-bit instance format.
//!
//! Every writer goes through a temporary file and a rename, so a file that
//! exists under its final name is complete.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::annotations::{DepthMap, InstanceMap, LabelMap};
use crate::lighting::Spectrum;
use crate::render::RgbImage;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

type Result<T> = std::result::Result<T, FormatError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> FormatError {
    FormatError::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Writes through `<path>.part` and renames into place.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut part = path.as_os_str().to_owned();
    part.push(".part");
    let part = std::path::PathBuf::from(part);
    let file = File::create(&part).map_err(io_err(&part))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(&part))?;
    drop(w);
    std::fs::rename(&part, path).map_err(io_err(path))
}

fn png_bytes(width: u32, height: u32, color: png::ColorType, depth: png::BitDepth, data: &[u8]) -> std::io::Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(color);
        enc.set_depth(depth);
        let mut w = enc.write_header().map_err(std::io::Error::other)?;
        w.write_image_data(data).map_err(std::io::Error::other)?;
    }
    Ok(out)
}

fn write_png(path: &Path, width: u32, height: u32, color: png::ColorType, depth: png::BitDepth, data: &[u8]) -> Result<()> {
    let bytes = png_bytes(width, height, color, depth, data).map_err(io_err(path))?;
    write_atomic(path, |w| w.write_all(&bytes))
}

pub fn write_rgb_png(path: &Path, img: &RgbImage) -> Result<()> {
    write_png(path, img.width, img.height, png::ColorType::Rgb, png::BitDepth::Eight, &img.data)
}

pub fn write_label_png(path: &Path, map: &LabelMap) -> Result<()> {
    write_png(path, map.width, map.height, png::ColorType::Grayscale, png::BitDepth::Eight, &map.data)
}

/// Binary PPM (P6).
pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    write_atomic(path, |w| {
        write!(w, "P6\n{} {}\n255\n", img.width, img.height)?;
        w.write_all(&img.data)
    })
}

/// Magic line of the raw instance format, followed by `"{width} {height}\n"`
/// and little-endian `u32` codes in row-major order.
pub const RAW32_MAGIC: &str = "SSI32";

/// Instance maps whose codes all fit in 16 bits become a 16-bit gray PNG
/// (`.png`), others the raw format (`.raw32`). Returns the extension used.
pub fn instance_extension(map: &InstanceMap) -> &'static str {
    if map.max_code() < 65536 {
        "png"
    } else {
        "raw32"
    }
}

pub fn write_instance(path: &Path, map: &InstanceMap) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("png") => {
            if map.max_code() >= 65536 {
                return Err(format_err(path, "instance codes exceed 16 bits"));
            }
            let data: Vec<u8> = map.data.iter().flat_map(|&c| (c as u16).to_be_bytes()).collect();
            write_png(path, map.width, map.height, png::ColorType::Grayscale, png::BitDepth::Sixteen, &data)
        }
        Some("raw32") => write_atomic(path, |w| {
            write!(w, "{RAW32_MAGIC}\n{} {}\n", map.width, map.height)?;
            for c in &map.data {
                w.write_all(&c.to_le_bytes())?;
            }
            Ok(())
        }),
        _ => Err(format_err(path, "instance maps are written as .png or .raw32")),
    }
}

/// Decoded PNG samples widened to 16 bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PngImage {
    pub width: u32,
    pub height: u32,
    pub channels: usize,
    pub bit_depth: u8,
    pub samples: Vec<u16>,
}

pub fn read_png(path: &Path) -> Result<PngImage> {
    let file = File::open(path).map_err(io_err(path))?;
    let dec = png::Decoder::new(BufReader::new(file));
    let mut reader = dec.read_info().map_err(|e| format_err(path, e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| format_err(path, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| format_err(path, e.to_string()))?;
    buf.truncate(info.buffer_size());
    let channels = info.color_type.samples();
    let samples = match info.bit_depth {
        png::BitDepth::Eight => buf.iter().map(|&b| b as u16).collect(),
        png::BitDepth::Sixteen => buf.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect(),
        d => return Err(format_err(path, format!("unsupported bit depth {d:?}"))),
    };
    Ok(PngImage {
        width: info.width,
        height: info.height,
        channels,
        bit_depth: info.bit_depth as u8,
        samples,
    })
}

/// Reads an 8-bit single-channel label PNG.
pub fn read_label_png(path: &Path) -> Result<LabelMap> {
    let img = read_png(path)?;
    if img.channels != 1 || img.bit_depth != 8 {
        return Err(format_err(
            path,
            format!("label maps are 8-bit gray, found {} channels at {} bits", img.channels, img.bit_depth),
        ));
    }
    Ok(LabelMap {
        width: img.width,
        height: img.height,
        data: img.samples.into_iter().map(|v| v as u8).collect(),
    })
}

pub fn read_instance(path: &Path) -> Result<InstanceMap> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("png") => {
            let img = read_png(path)?;
            if img.channels != 1 || img.bit_depth != 16 {
                return Err(format_err(path, "instance PNGs are 16-bit gray"));
            }
            Ok(InstanceMap {
                width: img.width,
                height: img.height,
                data: img.samples.into_iter().map(u32::from).collect(),
            })
        }
        Some("raw32") => {
            let mut r = BufReader::new(File::open(path).map_err(io_err(path))?);
            let mut magic = String::new();
            r.read_line(&mut magic).map_err(io_err(path))?;
            if magic.trim_end() != RAW32_MAGIC {
                return Err(format_err(path, "missing SSI32 header"));
            }
            let (width, height) = read_dims(&mut r, path)?;
            let mut bytes = Vec::new();
            r.read_to_end(&mut bytes).map_err(io_err(path))?;
            if bytes.len() != 4 * width as usize * height as usize {
                return Err(format_err(path, "payload size does not match the header"));
            }
            let data = bytes.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
            Ok(InstanceMap { width, height, data })
        }
        _ => Err(format_err(path, "unknown instance map extension")),
    }
}

fn read_dims(r: &mut impl BufRead, path: &Path) -> Result<(u32, u32)> {
    let mut line = String::new();
    r.read_line(&mut line).map_err(io_err(path))?;
    let mut it = line.split_whitespace().map(str::parse::<u32>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(w)), Some(Ok(h)), None) => Ok((w, h)),
        _ => Err(format_err(path, format!("bad dimension line `{}`", line.trim_end()))),
    }
}

/// Portable float map: `PF` (RGB) or `Pf` (gray) header, dimensions, then
/// scale `-1.0` marking little-endian data, rows stored bottom to top.
fn write_pfm(path: &Path, width: u32, height: u32, channels: usize, data: &[f32]) -> Result<()> {
    let row = width as usize * channels;
    write_atomic(path, |w| {
        let tag = if channels == 3 { "PF" } else { "Pf" };
        write!(w, "{tag}\n{width} {height}\n-1.0\n")?;
        for y in (0..height as usize).rev() {
            for v in &data[y * row..(y + 1) * row] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    })
}

pub fn write_hdr_pfm(path: &Path, width: u32, height: u32, pixels: &[Spectrum]) -> Result<()> {
    let data: Vec<f32> = pixels.iter().flat_map(|p| p.to_array().map(|v| v as f32)).collect();
    write_pfm(path, width, height, 3, &data)
}

pub fn write_depth_pfm(path: &Path, map: &DepthMap) -> Result<()> {
    write_pfm(path, map.width, map.height, 1, &map.data)
}

/// Float map with rows top to bottom.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatImage {
    pub width: u32,
    pub height: u32,
    pub channels: usize,
    pub data: Vec<f32>,
}

pub fn read_pfm(path: &Path) -> Result<FloatImage> {
    let mut r = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut tag = String::new();
    r.read_line(&mut tag).map_err(io_err(path))?;
    let channels = match tag.trim_end() {
        "PF" => 3,
        "Pf" => 1,
        t => return Err(format_err(path, format!("not a PFM file (tag `{t}`)"))),
    };
    let (width, height) = read_dims(&mut r, path)?;
    let mut scale = String::new();
    r.read_line(&mut scale).map_err(io_err(path))?;
    let scale: f32 = scale
        .trim()
        .parse()
        .map_err(|_| format_err(path, "bad scale line"))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err(path))?;
    let row = width as usize * channels;
    if bytes.len() != 4 * row * height as usize {
        return Err(format_err(path, "payload size does not match the header"));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| {
            let b = [c[0], c[1], c[2], c[3]];
            if scale < 0.0 {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();
    let mut data = Vec::with_capacity(values.len());
    for y in (0..height as usize).rev() {
        data.extend_from_slice(&values[y * row..(y + 1) * row]);
    }
    Ok(FloatImage {
        width,
        height,
        channels,
        data,
    })
}

pub fn read_depth_pfm(path: &Path) -> Result<DepthMap> {
    let img = read_pfm(path)?;
    if img.channels != 1 {
        return Err(format_err(path, "depth maps are single-channel"));
    }
    Ok(DepthMap {
        width: img.width,
        height: img.height,
        data: img.data,
    })
}
