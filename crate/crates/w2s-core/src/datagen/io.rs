//! Dataset file formats.
//!
//! Binary layout: magic `"W2SR"`, version `u32` LE (=1), then `d`, `n_tilde`,
//! `n_hat`, `n_test`, `flags` as `u64` LE (flag bit 0: aux ζ vector present),
//! followed by column-major little-endian `f64` payloads in order: tilde
//! reps, tilde labels, hat reps, hat labels, test reps, test labels, aux ζ.
//! A binary write/read round trip is bit-identical.
//!
//! CSV: one sample per row, `d` feature columns then the label, optional
//! header. CSV files carry a single split; reading one yields a dataset
//! whose hat split holds the samples (the split every metric is computed
//! on) and whose tilde split is empty.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use numlin::Matrix;
use serde::Deserialize;

use crate::{Error, Result};

use super::{RepDataset, Split};

const MAGIC: [u8; 4] = *b"W2SR";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Binary,
    Csv,
}

fn write_f64s(w: &mut impl Write, xs: &[f64]) -> Result<()> {
    for &x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_binary(ds: &RepDataset, path: &Path) -> Result<()> {
    ds.validate()?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [
        ds.dim as u64,
        ds.tilde.n() as u64,
        ds.hat.n() as u64,
        ds.test.as_ref().map(|t| t.n()).unwrap_or(0) as u64,
        if ds.aux_hat_zeta.is_some() {
            1u64
        } else {
            0u64
        },
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    write_f64s(&mut w, ds.tilde.reps.data())?;
    write_f64s(&mut w, &ds.tilde.labels)?;
    write_f64s(&mut w, ds.hat.reps.data())?;
    write_f64s(&mut w, &ds.hat.labels)?;
    if let Some(t) = &ds.test {
        write_f64s(&mut w, t.reps.data())?;
        write_f64s(&mut w, &t.labels)?;
    }
    if let Some(z) = &ds.aux_hat_zeta {
        write_f64s(&mut w, z)?;
    }
    w.flush()?;
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::TruncatedFile
        } else {
            Error::Io(e)
        }
    })
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    read_exact(r, &mut bytes)?;
    let out: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if !out.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFiniteEntry);
    }
    Ok(out)
}

fn checked_matrix(d: usize, n: usize, r: &mut impl Read) -> Result<Matrix> {
    let count = d
        .checked_mul(n)
        .ok_or_else(|| Error::DimensionMismatch("matrix size overflows".into()))?;
    Ok(Matrix::from_col_major(d, n, read_f64s(r, count)?))
}

pub fn read_binary(path: &Path) -> Result<RepDataset> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut vb = [0u8; 4];
    read_exact(&mut r, &mut vb)?;
    let version = u32::from_le_bytes(vb);
    if version != VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let d = read_u64(&mut r)? as usize;
    let n_tilde = read_u64(&mut r)? as usize;
    let n_hat = read_u64(&mut r)? as usize;
    let n_test = read_u64(&mut r)? as usize;
    let flags = read_u64(&mut r)?;

    let tilde = Split::new(
        checked_matrix(d, n_tilde, &mut r)?,
        read_f64s(&mut r, n_tilde)?,
    );
    let hat = Split::new(checked_matrix(d, n_hat, &mut r)?, read_f64s(&mut r, n_hat)?);
    let test = if n_test > 0 {
        Some(Split::new(
            checked_matrix(d, n_test, &mut r)?,
            read_f64s(&mut r, n_test)?,
        ))
    } else {
        None
    };
    let aux_hat_zeta = if flags & 1 != 0 {
        Some(read_f64s(&mut r, n_hat)?)
    } else {
        None
    };

    let ds = RepDataset {
        dim: d,
        tilde,
        hat,
        test,
        population: None,
        aux_hat_zeta,
    };
    ds.validate()?;
    Ok(ds)
}

/// Writes the hat split as CSV (features then label, no header). Values are
/// printed with 17 significant digits, which round-trips f64 exactly.
pub fn write_csv(ds: &RepDataset, path: &Path) -> Result<()> {
    ds.validate()?;
    let mut w = BufWriter::new(File::create(path)?);
    for j in 0..ds.hat.n() {
        let mut line = String::new();
        for v in ds.hat.reps.col(j) {
            line.push_str(&format!("{v:.16e},"));
        }
        line.push_str(&format!("{:.16e}\n", ds.hat.labels[j]));
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV of samples into the hat split of a fresh dataset (empty
/// tilde split, no test split, no population). A header row is skipped if
/// its first field does not parse as a number.
pub fn read_csv(path: &Path) -> Result<RepDataset> {
    let mut content = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut content)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if rows.is_empty() && lineno == 0 && fields[0].trim().parse::<f64>().is_err() {
            continue; // header
        }
        let mut row = Vec::with_capacity(fields.len());
        for f in &fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::DegenerateData(format!("unparseable field {f:?}")))?;
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry);
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].len() < 2 {
        return Err(Error::DegenerateData(
            "csv must contain at least one sample with one feature and a label".into(),
        ));
    }
    let d = rows[0].len() - 1;
    let n = rows.len();
    let mut reps = Matrix::zeros(d, n);
    let mut labels = vec![0.0; n];
    for (j, row) in rows.iter().enumerate() {
        reps.col_mut(j).copy_from_slice(&row[..d]);
        labels[j] = row[d];
    }
    Ok(RepDataset {
        dim: d,
        tilde: Split::empty(d),
        hat: Split::new(reps, labels),
        test: None,
        population: None,
        aux_hat_zeta: None,
    })
}
