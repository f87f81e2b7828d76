//! Matrix file formats.
//!
//! CSV: header `re_0,im_0,re_1,im_1,...`, one matrix row per line.
//! Binary: magic `RMTC`, rows and cols as little-endian `u64`, then row-major
//! `(re, im)` pairs as little-endian `f64`.

use super::ComplexMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"RMTC";

pub fn write_csv<W: Write>(m: &ComplexMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = (0..m.cols()).flat_map(|j| [format!("re_{j}"), format!("im_{j}")]).collect();
    w.write_record(&header)?;
    for i in 0..m.rows() {
        let rec: Vec<String> = m.row(i).iter().flat_map(|z| [fmt(z.re), fmt(z.im)]).collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt(x: f64) -> String {
    // `{:e}` round-trips exactly.
    format!("{x:e}")
}

pub fn read_csv<R: Read>(reader: R) -> Result<ComplexMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() % 2 != 0 {
        return Err(Error::Format(format!("odd number of header fields ({})", header.len())));
    }
    for (k, name) in header.iter().enumerate() {
        let expected = if k % 2 == 0 { format!("re_{}", k / 2) } else { format!("im_{}", k / 2) };
        if name != expected {
            return Err(Error::Format(format!("header field {k} is {name:?}, expected {expected:?}")));
        }
    }
    let cols = header.len() / 2;
    let mut data = Vec::new();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Format(format!("row {rows} has {} fields, expected {}", rec.len(), header.len())));
        }
        for j in 0..cols {
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Format(format!("row {rows}: cannot parse {s:?}")))
            };
            data.push(Complex64::new(parse(&rec[2 * j])?, parse(&rec[2 * j + 1])?));
        }
        rows += 1;
    }
    ComplexMatrix::new(rows, cols, data)
}

pub fn write_binary<W: Write>(m: &ComplexMatrix, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for z in m.as_slice() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<ComplexMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let mut data = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        data.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after matrix data".into()));
    }
    ComplexMatrix::new(rows, cols, data)
}
