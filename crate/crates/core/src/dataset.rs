//! Multi-frequency MSR datasets and their on-disk layout.
//!
//! A dataset is a directory holding
//!
//! * `metadata.txt`: `key = value` lines (see [`MsrDataset::metadata_text`]);
//! * `K_000.bin`, `K_001.bin`, ...: one matrix per frequency, `N+ x N+`
//!   complex entries stored row-major as interleaved little-endian `f64`
//!   pairs `(re, im)`, no header.
//!
//! Floats in the metadata use Rust's shortest round-trip formatting, so
//! reading a dataset back reproduces every value bit for bit.

use crate::error::{Error, Result};
use crate::forward::{build_directions, CMatrix, DirectionSet, ForwardModel};
use crate::media::{HalfSpaceMedium, InclusionMaterial};
use crate::noise::RNG_NAME;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const METADATA_FILE: &str = "metadata.txt";
const FORMAT_TAG: &str = "msr-dataset v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRecord {
    pub snr_db: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsrDataset {
    pub frequencies: Vec<f64>,
    pub matrices: Vec<CMatrix>,
    pub directions: DirectionSet,
    pub model: ForwardModel,
    pub noise: Option<NoiseRecord>,
    pub medium: HalfSpaceMedium,
    pub materials: Vec<InclusionMaterial>,
    /// Propagating count listed for the experiment, when one was given.
    pub tabulated_n_plus: Option<usize>,
}

pub fn matrix_file_name(index: usize) -> String {
    format!("K_{index:03}.bin")
}

fn join_floats(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

impl MsrDataset {
    pub fn n_plus(&self) -> usize {
        self.directions.n_plus
    }

    pub fn metadata_text(&self) -> String {
        let d = &self.directions;
        let mut s = String::new();
        let _ = writeln!(s, "# {FORMAT_TAG}");
        let _ = writeln!(s, "layout = little-endian f64, row-major, interleaved re/im");
        let _ = writeln!(s, "n = {}", d.count);
        let _ = writeln!(s, "n_plus = {}", d.n_plus);
        match self.tabulated_n_plus {
            Some(t) => {
                let _ = writeln!(s, "n_plus_tabulated = {t}");
            }
            None => {
                let _ = writeln!(s, "n_plus_tabulated = none");
            }
        }
        let _ = writeln!(s, "alpha = {:?}", d.alpha);
        let _ = writeln!(s, "beta = {:?}", d.beta);
        let _ = writeln!(s, "zeta = {}", join_floats(d.zeta.iter().copied()));
        let _ = writeln!(
            s,
            "propagating = {}",
            d.propagating
                .iter()
                .map(|&p| if p { "1" } else { "0" })
                .collect::<Vec<_>>()
                .join(" ")
        );
        let _ = writeln!(s, "omega = {}", join_floats(self.frequencies.iter().copied()));
        let _ = writeln!(s, "model = {}", self.model.name());
        match self.noise {
            Some(n) => {
                let _ = writeln!(s, "snr_db = {:?}", n.snr_db);
                let _ = writeln!(s, "seed = {}", n.seed);
                let _ = writeln!(s, "rng = {RNG_NAME}");
            }
            None => {
                let _ = writeln!(s, "snr_db = none");
                let _ = writeln!(s, "seed = none");
                let _ = writeln!(s, "rng = none");
            }
        }
        let m = &self.medium;
        let _ = writeln!(s, "eps_plus = {:?}", m.eps_plus);
        let _ = writeln!(s, "mu_plus = {:?}", m.mu_plus);
        let _ = writeln!(s, "eps_minus = {:?}", m.eps_minus);
        let _ = writeln!(s, "mu_minus = {:?}", m.mu_minus);
        let _ = writeln!(
            s,
            "inclusions = {}",
            self.materials
                .iter()
                .map(|m| format!("{:?}:{:?}", m.eps, m.mu))
                .collect::<Vec<_>>()
                .join(" ")
        );
        let _ = writeln!(
            s,
            "files = {}",
            (0..self.matrices.len())
                .map(matrix_file_name)
                .collect::<Vec<_>>()
                .join(" ")
        );
        s
    }

    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let meta = dir.join(METADATA_FILE);
        fs::write(&meta, self.metadata_text())?;
        written.push(meta);
        for (f, k) in self.matrices.iter().enumerate() {
            let path = dir.join(matrix_file_name(f));
            fs::write(&path, encode_matrix(k))?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let meta_path = dir.join(METADATA_FILE);
        let text = fs::read_to_string(&meta_path)?;
        let meta = Metadata::read(&text, &meta_path.display().to_string())?;

        let count: usize = meta.parse("n")?;
        let n_plus: usize = meta.parse("n_plus")?;
        let alpha: f64 = meta.parse("alpha")?;
        let beta: f64 = meta.parse("beta")?;
        let frequencies: Vec<f64> = meta.parse_list("omega")?;
        let medium = HalfSpaceMedium::new(
            meta.parse("eps_plus")?,
            meta.parse("mu_plus")?,
            meta.parse("eps_minus")?,
            meta.parse("mu_minus")?,
        )?;
        let model_name = meta.get("model")?;
        let model = ForwardModel::parse(model_name)
            .ok_or_else(|| meta.error("model", format!("unknown forward model `{model_name}`")))?;
        let noise = match meta.get("snr_db")? {
            "none" => None,
            _ => Some(NoiseRecord {
                snr_db: meta.parse("snr_db")?,
                seed: meta.parse("seed")?,
            }),
        };
        let tabulated_n_plus = match meta.get("n_plus_tabulated").unwrap_or("none") {
            "none" => None,
            _ => Some(meta.parse("n_plus_tabulated")?),
        };
        let mut materials = Vec::new();
        for item in meta.get("inclusions")?.split_whitespace() {
            let (e, m) = item
                .split_once(':')
                .ok_or_else(|| meta.error("inclusions", format!("bad entry `{item}`")))?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| meta.error("inclusions", format!("bad number `{s}`")))
            };
            materials.push(InclusionMaterial::new(parse(e)?, parse(m)?)?);
        }
        let first = *frequencies
            .first()
            .ok_or_else(|| meta.error("omega", "no frequency listed".into()))?;
        let ctx = medium.frequency_context(first)?;
        let directions = build_directions(count, alpha, beta, &ctx)?;
        if directions.n_plus != n_plus {
            return Err(meta.error(
                "n_plus",
                format!("recorded {n_plus} but the directions give {}", directions.n_plus),
            ));
        }
        let matrices = (0..frequencies.len())
            .map(|f| {
                let path = dir.join(matrix_file_name(f));
                let bytes = fs::read(&path)?;
                decode_matrix(&bytes, n_plus, &path.display().to_string())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            frequencies,
            matrices,
            directions,
            model,
            noise,
            medium,
            materials,
            tabulated_n_plus,
        })
    }

    /// `f, omega, j, l, re, im` rows over all frequencies (indices 0-based).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("f,omega,j,l,re,im\n");
        for (f, (omega, k)) in self.frequencies.iter().zip(&self.matrices).enumerate() {
            for j in 0..k.nrows() {
                for l in 0..k.ncols() {
                    let z = k[(j, l)];
                    let _ = writeln!(s, "{f},{omega:?},{j},{l},{:?},{:?}", z.re, z.im);
                }
            }
        }
        s
    }
}

pub fn encode_matrix(k: &CMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(k.len() * 16);
    for j in 0..k.nrows() {
        for l in 0..k.ncols() {
            let z = k[(j, l)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_matrix(bytes: &[u8], n: usize, file: &str) -> Result<CMatrix> {
    let expected = n * n * 16;
    if bytes.len() != expected {
        return Err(Error::Parse {
            file: file.into(),
            offset: bytes.len().min(expected) as u64,
            reason: format!("expected {expected} bytes for a {n}x{n} matrix, found {}", bytes.len()),
        });
    }
    let mut k = CMatrix::zeros(n, n);
    for (idx, chunk) in bytes.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Parse {
                file: file.into(),
                offset: (idx * 16) as u64,
                reason: "non-finite matrix entry".into(),
            });
        }
        k[(idx / n, idx % n)] = Complex64::new(re, im);
    }
    Ok(k)
}

struct Metadata<'a> {
    file: String,
    entries: Vec<(&'a str, &'a str, u64)>,
}

impl<'a> Metadata<'a> {
    fn read(text: &'a str, file: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut offset = 0u64;
        let mut saw_tag = false;
        for line in text.split_inclusive('\n') {
            let trimmed = line.trim();
            if let Some(comment) = trimmed.strip_prefix('#') {
                saw_tag |= comment.trim() == FORMAT_TAG;
            } else if !trimmed.is_empty() {
                let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
                    file: file.into(),
                    offset,
                    reason: format!("expected `key = value`, found `{trimmed}`"),
                })?;
                entries.push((key.trim(), value.trim(), offset));
            }
            offset += line.len() as u64;
        }
        if !saw_tag {
            return Err(Error::Parse {
                file: file.into(),
                offset: 0,
                reason: format!("missing `# {FORMAT_TAG}` header"),
            });
        }
        Ok(Self {
            file: file.into(),
            entries,
        })
    }

    fn error(&self, key: &str, reason: String) -> Error {
        let offset = self
            .entries
            .iter()
            .find(|(k, _, _)| *k == key)
            .map_or(0, |e| e.2);
        Error::Parse {
            file: self.file.clone(),
            offset,
            reason: format!("{key}: {reason}"),
        }
    }

    fn get(&self, key: &str) -> Result<&'a str> {
        self.entries
            .iter()
            .find(|(k, _, _)| *k == key)
            .map(|e| e.1)
            .ok_or_else(|| Error::Parse {
                file: self.file.clone(),
                offset: 0,
                reason: format!("missing key `{key}`"),
            })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|_| self.error(key, format!("cannot parse `{raw}`")))
    }

    fn parse_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get(key)?
            .split_whitespace()
            .map(|s| {
                s.parse()
                    .map_err(|_| self.error(key, format!("cannot parse `{s}`")))
            })
            .collect()
    }
}
