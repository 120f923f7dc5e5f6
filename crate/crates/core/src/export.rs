//! Image map files: CSV, binary PGM (P5) with a normalization sidecar, and PNG.

use crate::error::{Error, Result};
use crate::imaging::ImageMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// `x1,x2,W` rows in grid order.
pub fn map_csv(map: &ImageMap) -> String {
    let mut s = String::from("x1,x2,w\n");
    for (i, w) in map.values.iter().enumerate() {
        let p = map.grid.point(i);
        let _ = writeln!(s, "{:?},{:?},{:?}", p.x, p.y, w);
    }
    s
}

/// Min-max scaling of map values onto `0..=maxval`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub min: f64,
    pub max: f64,
    pub maxval: u16,
}

impl Normalization {
    pub fn of(map: &ImageMap, depth: u8) -> Result<Self> {
        let maxval = match depth {
            8 => 255,
            16 => 65535,
            _ => return Err(Error::Domain(format!("bit depth must be 8 or 16, got {depth}"))),
        };
        let (min, max) = map
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Ok(Self { min, max, maxval })
    }

    pub fn level(&self, w: f64) -> u16 {
        let range = self.max - self.min;
        if range <= 0.0 {
            return 0;
        }
        (((w - self.min) / range) * self.maxval as f64)
            .round()
            .clamp(0.0, self.maxval as f64) as u16
    }

    pub fn sidecar(&self, map: &ImageMap) -> String {
        format!(
            "format = pgm-p5\nwidth = {}\nheight = {}\nmaxval = {}\nmin = {:?}\nmax = {:?}\n\
             pixel = round((w - min) / (max - min) * maxval)\n\
             orientation = row 0 at x2_max, columns increasing in x1\n",
            map.grid.cols, map.grid.rows, self.maxval, self.min, self.max
        )
    }
}

/// Pixel levels row by row.
pub fn pixel_levels(map: &ImageMap, norm: &Normalization) -> Vec<u16> {
    map.values.iter().map(|&w| norm.level(w)).collect()
}

/// Big-endian sample bytes as used by both PGM and PNG at 16 bits.
fn sample_bytes(levels: &[u16], depth: u8) -> Vec<u8> {
    if depth == 8 {
        levels.iter().map(|&l| l as u8).collect()
    } else {
        levels.iter().flat_map(|l| l.to_be_bytes()).collect()
    }
}

pub fn pgm_bytes(map: &ImageMap, depth: u8) -> Result<Vec<u8>> {
    let norm = Normalization::of(map, depth)?;
    let mut out = format!("P5\n{} {}\n{}\n", map.grid.cols, map.grid.rows, norm.maxval).into_bytes();
    out.extend(sample_bytes(&pixel_levels(map, &norm), depth));
    Ok(out)
}

/// Writes `path` and its sidecar `path.txt`.
pub fn write_pgm(map: &ImageMap, path: &Path, depth: u8) -> Result<()> {
    std::fs::write(path, pgm_bytes(map, depth)?)?;
    let norm = Normalization::of(map, depth)?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".txt");
    std::fs::write(sidecar, norm.sidecar(map))?;
    Ok(())
}

pub fn write_png(map: &ImageMap, path: &Path, depth: u8) -> Result<()> {
    let norm = Normalization::of(map, depth)?;
    let file = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(file, map.grid.cols as u32, map.grid.rows as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(if depth == 8 { png::BitDepth::Eight } else { png::BitDepth::Sixteen });
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writer
        .write_image_data(&sample_bytes(&pixel_levels(map, &norm), depth))
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writer
        .finish()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}

pub fn write_csv(map: &ImageMap, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(map_csv(map).as_bytes())?;
    w.flush()?;
    Ok(())
}
