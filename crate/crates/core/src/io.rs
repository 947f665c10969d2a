//! Matrix serialization: CSV with paired re/im columns, and a little-endian
//! binary layout (`HDMD1`, `u64` rows, `u64` cols, row-major `f64` pairs).

use std::io::{Read, Write};

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;

use crate::error::{HdmdError, Result};

pub const BINARY_MAGIC: &[u8; 5] = b"HDMD1";

/// Header `c0_re,c0_im,c1_re,…`; one row per matrix row.
pub fn write_matrix_csv<W: Write>(m: MatRef<'_, c64>, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..m.ncols())
        .flat_map(|j| [format!("c{j}_re"), format!("c{j}_im")])
        .collect();
    wtr.write_record(&header)?;
    let mut rec = Vec::with_capacity(2 * m.ncols());
    for i in 0..m.nrows() {
        rec.clear();
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            rec.push(format!("{:e}", z.re));
            rec.push(format!("{:e}", z.im));
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<Mat<c64>> {
    let mut rdr = csv::Reader::from_reader(input);
    let width = rdr.headers()?.len();
    if width % 2 != 0 {
        return Err(HdmdError::Parse {
            line: 1,
            message: format!("expected re/im column pairs, found {width} columns"),
        });
    }
    let ncols = width / 2;
    let mut data = Vec::new();
    let mut nrows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let vals = parse_record(&rec, line)?;
        if vals.len() != width {
            return Err(HdmdError::Parse {
                line,
                message: format!("expected {width} fields, found {}", vals.len()),
            });
        }
        data.extend(vals.chunks_exact(2).map(|p| c64::new(p[0], p[1])));
        nrows += 1;
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| data[i * ncols + j]))
}

pub(crate) fn parse_record(rec: &csv::StringRecord, line: usize) -> Result<Vec<f64>> {
    rec.iter()
        .map(|f| {
            f.trim().parse::<f64>().map_err(|_| HdmdError::Parse {
                line,
                message: format!("cannot parse `{f}` as a number"),
            })
        })
        .collect()
}

pub fn write_matrix_binary<W: Write>(m: MatRef<'_, c64>, mut out: W) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(m.nrows() as u64).to_le_bytes())?;
    out.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut input: R) -> Result<Mat<c64>> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(HdmdError::Parse {
            line: 0,
            message: "missing HDMD1 magic bytes".into(),
        });
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let nrows = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let ncols = u64::from_le_bytes(word) as usize;
    let mut data = Vec::with_capacity(nrows * ncols);
    for _ in 0..nrows * ncols {
        input.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        input.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        data.push(c64::new(re, im));
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| data[i * ncols + j]))
}

/// Reads a header-prefixed CSV of real numbers into rows.
pub fn read_real_rows<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_reader(input);
    let width = rdr.headers()?.len();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| HdmdError::Parse {
            line,
            message: e.to_string(),
        })?;
        let vals = parse_record(&rec, line)?;
        if vals.len() != width {
            return Err(HdmdError::Parse {
                line,
                message: format!("expected {width} fields, found {}", vals.len()),
            });
        }
        rows.push(vals);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn binary_and_csv_round_trip(
            rows in 0usize..5,
            cols in 1usize..5,
            seed in proptest::collection::vec(-1e6f64..1e6, 50),
        ) {
            let m = Mat::from_fn(rows, cols, |i, j| {
                let k = (i * cols + j) * 2;
                c64::new(seed[k % 50], seed[(k + 1) % 50] / 3.0)
            });
            let mut bin = Vec::new();
            write_matrix_binary(m.as_ref(), &mut bin).unwrap();
            prop_assert_eq!(bin.len(), 5 + 16 + 16 * rows * cols);
            prop_assert!(read_matrix_binary(bin.as_slice()).unwrap() == m);

            let mut text = Vec::new();
            write_matrix_csv(m.as_ref(), &mut text).unwrap();
            if rows > 0 {
                prop_assert!(read_matrix_csv(text.as_slice()).unwrap() == m);
            }
        }
    }

    #[test]
    fn binary_layout_is_little_endian() {
        let m = Mat::from_fn(1, 1, |_, _| c64::new(1.0, -2.0));
        let mut bin = Vec::new();
        write_matrix_binary(m.as_ref(), &mut bin).unwrap();
        assert_eq!(&bin[..5], b"HDMD1");
        assert_eq!(&bin[5..13], &1u64.to_le_bytes());
        assert_eq!(&bin[13..21], &1u64.to_le_bytes());
        assert_eq!(&bin[21..29], &1.0f64.to_le_bytes());
        assert_eq!(&bin[29..37], &(-2.0f64).to_le_bytes());
    }

    #[test]
    fn bad_magic_and_bad_numbers() {
        assert!(read_matrix_binary(&b"HDMD2xxxxxxxxxxxxxxxx"[..]).is_err());
        let err = read_matrix_csv(&b"c0_re,c0_im\n1,2\n3,x\n"[..]).unwrap_err();
        assert!(matches!(err, HdmdError::Parse { line: 3, .. }));
    }
}
