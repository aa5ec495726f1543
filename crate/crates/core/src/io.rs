//! Image and mask files. Masks are 8-bit single channel (0 = background,
//! 255 = foreground) in binary PGM or PNG; color images are binary PPM (P6) or
//! PNG. The format is chosen from the file extension.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::raster::{BinaryMask, RasterError, RgbImage};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}")]
    Png {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Png,
    Netpbm,
}

fn format_of(path: &Path) -> Result<Format, IoError> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("png") => Ok(Format::Png),
        Some("pgm") | Some("ppm") | Some("pnm") => Ok(Format::Netpbm),
        _ => Err(IoError::Format {
            path: path.to_path_buf(),
            msg: "unsupported extension (expected .png, .pgm or .ppm)".into(),
        }),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, IoError> {
    fs::read(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes through a temporary file in the destination directory and renames
/// it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let io_err = |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(bytes).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err)
}

struct Netpbm<'a> {
    magic: [u8; 2],
    width: usize,
    height: usize,
    data: &'a [u8],
}

fn parse_netpbm<'a>(path: &Path, bytes: &'a [u8]) -> Result<Netpbm<'a>, IoError> {
    let bad = |msg: &str| IoError::Format {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    };
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(bad("missing netpbm magic number"));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("malformed header field"))?;
    }
    if fields[2] != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(bad("malformed header terminator"));
    }
    Ok(Netpbm {
        magic,
        width: fields[0],
        height: fields[1],
        data: &bytes[pos + 1..],
    })
}

pub fn read_rgb(path: &Path) -> Result<RgbImage, IoError> {
    let bytes = read_bytes(path)?;
    match format_of(path)? {
        Format::Png => {
            let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
                .map_err(|source| IoError::Png {
                    path: path.to_path_buf(),
                    source,
                })?
                .to_rgb8();
            let (w, h) = (img.width() as usize, img.height() as usize);
            let px = img.pixels().map(|p| p.0).collect();
            Ok(RgbImage::from_pixels(w, h, px)?)
        }
        Format::Netpbm => {
            let pnm = parse_netpbm(path, &bytes)?;
            if &pnm.magic != b"P6" {
                return Err(IoError::Format {
                    path: path.to_path_buf(),
                    msg: "expected binary PPM (P6)".into(),
                });
            }
            let n = pnm.width * pnm.height;
            if pnm.data.len() < 3 * n {
                return Err(IoError::Format {
                    path: path.to_path_buf(),
                    msg: "truncated pixel data".into(),
                });
            }
            let px = pnm.data[..3 * n]
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect();
            Ok(RgbImage::from_pixels(pnm.width, pnm.height, px)?)
        }
    }
}

pub fn encode_rgb(path: &Path, img: &RgbImage) -> Result<Vec<u8>, IoError> {
    let raw: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    match format_of(path)? {
        Format::Png => encode_png(path, &raw, img.width(), img.height(), image::ColorType::Rgb8),
        Format::Netpbm => {
            let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
            out.extend_from_slice(&raw);
            Ok(out)
        }
    }
}

pub fn write_rgb(path: &Path, img: &RgbImage) -> Result<(), IoError> {
    write_atomic(path, &encode_rgb(path, img)?)
}

/// Reads a single-channel mask; any nonzero sample is foreground.
pub fn read_mask(path: &Path) -> Result<BinaryMask, IoError> {
    let bytes = read_bytes(path)?;
    match format_of(path)? {
        Format::Png => {
            let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
                .map_err(|source| IoError::Png {
                    path: path.to_path_buf(),
                    source,
                })?
                .to_luma8();
            let (w, h) = (img.width() as usize, img.height() as usize);
            Ok(BinaryMask::from_bits(
                w,
                h,
                img.as_raw().iter().map(|&v| v != 0).collect(),
            )?)
        }
        Format::Netpbm => {
            let pnm = parse_netpbm(path, &bytes)?;
            if &pnm.magic != b"P5" {
                return Err(IoError::Format {
                    path: path.to_path_buf(),
                    msg: "expected binary PGM (P5)".into(),
                });
            }
            let n = pnm.width * pnm.height;
            if pnm.data.len() < n {
                return Err(IoError::Format {
                    path: path.to_path_buf(),
                    msg: "truncated pixel data".into(),
                });
            }
            Ok(BinaryMask::from_bits(
                pnm.width,
                pnm.height,
                pnm.data[..n].iter().map(|&v| v != 0).collect(),
            )?)
        }
    }
}

pub fn encode_mask(path: &Path, mask: &BinaryMask) -> Result<Vec<u8>, IoError> {
    let raw: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    match format_of(path)? {
        Format::Png => encode_png(path, &raw, mask.width(), mask.height(), image::ColorType::L8),
        Format::Netpbm => {
            let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
            out.extend_from_slice(&raw);
            Ok(out)
        }
    }
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<(), IoError> {
    write_atomic(path, &encode_mask(path, mask)?)
}

fn encode_png(
    path: &Path,
    raw: &[u8],
    width: usize,
    height: usize,
    color: image::ColorType,
) -> Result<Vec<u8>, IoError> {
    use image::ImageEncoder;
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(raw, width as u32, height as u32, color.into())
        .map_err(|source| IoError::Png {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(out)
}
