//! Frame images: binary portable pixmaps (P6, 8-bit RGB) named by
//! zero-padded frame index.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};

pub use image::{Rgb, RgbImage};

/// File name of frame `index`, e.g. `000042.ppm`.
pub fn frame_file_name(index: usize) -> String {
    format!("{index:06}.ppm")
}

pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(img.into_rgb8())
}

/// Encodes as binary P6 with maxval 255.
pub fn encode_ppm(img: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(img.as_raw().len() + 32);
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
        .write_image(
            img.as_raw(),
            img.width(),
            img.height(),
            ExtendedColorType::Rgb8,
        )
        .map_err(|source| Error::Image {
            path: PathBuf::from("<memory>"),
            source,
        })?;
    Ok(out)
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
        .write_image(
            img.as_raw(),
            img.width(),
            img.height(),
            ExtendedColorType::Rgb8,
        )
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Supplies the image for a frame index, when one exists.
pub trait FrameSource: Send + Sync {
    fn frame(&self, index: usize) -> Result<Option<RgbImage>>;
}

/// No images at all (annotation-only runs with oracle classifiers).
pub struct NoFrames;

impl FrameSource for NoFrames {
    fn frame(&self, _index: usize) -> Result<Option<RgbImage>> {
        Ok(None)
    }
}

/// `<dir>/<index:06>.ppm`; a missing file means "no image for this frame".
pub struct FrameDirectory {
    dir: PathBuf,
}

impl FrameDirectory {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(Error::io(
                &dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "frames directory not found"),
            ));
        }
        Ok(Self { dir })
    }
}

impl FrameSource for FrameDirectory {
    fn frame(&self, index: usize) -> Result<Option<RgbImage>> {
        let path = self.dir.join(frame_file_name(index));
        if !path.exists() {
            return Ok(None);
        }
        read_ppm(&path).map(Some)
    }
}

impl FrameSource for Vec<RgbImage> {
    fn frame(&self, index: usize) -> Result<Option<RgbImage>> {
        Ok(self.get(index).cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_header_and_payload_are_exact() {
        let mut img = RgbImage::new(2, 1);
        img.put_pixel(0, 0, Rgb([1, 2, 3]));
        img.put_pixel(1, 0, Rgb([250, 251, 252]));
        let bytes = encode_ppm(&img).unwrap();
        let payload = &bytes[bytes.len() - 6..];
        assert_eq!(payload, &[1, 2, 3, 250, 251, 252]);
        assert!(bytes.starts_with(b"P6"));
    }

    #[test]
    fn ppm_round_trip_through_file() {
        let dir = std::env::temp_dir().join(format!("softret-ppm-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut img = RgbImage::new(3, 2);
        for (i, p) in img.pixels_mut().enumerate() {
            *p = Rgb([i as u8 * 40, 255 - i as u8, 7]);
        }
        let path = dir.join(frame_file_name(3));
        write_ppm(&path, &img).unwrap();
        let source = FrameDirectory::new(&dir).unwrap();
        assert_eq!(source.frame(3).unwrap().unwrap(), img);
        assert!(source.frame(4).unwrap().is_none());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
