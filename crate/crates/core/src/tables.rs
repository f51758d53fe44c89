//! Machine-readable reproductions of the five reference tables.
//!
//! CSV files carry the printed precision; JSON siblings carry full precision.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_p, TABLE1_DIMS};
use crate::cube::{vaa_overlap_table, CubeGameSetup, Sign, TABLE5_ROWS};
use crate::mub::{TWO_QUBIT_OBSERVABLES, TWO_QUBIT_TABLE};
use crate::search::{find_measurement_bases, find_signal_states, MeasurementBasis4, SignalState};
use crate::{construct_mub, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub d: usize,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2Row {
    pub basis: usize,
    pub observables: String,
    /// 1-based position within the basis.
    pub state: usize,
    pub a_re: i8,
    pub a_im: i8,
    pub b_re: i8,
    pub b_im: i8,
    pub c_re: i8,
    pub c_im: i8,
    pub d_re: i8,
    pub d_im: i8,
}

/// One signal state; indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table3Row {
    pub number: usize,
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub b_re: i8,
    pub b_im: i8,
    pub c_re: i8,
    pub c_im: i8,
    pub d_re: i8,
    pub d_im: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table4Row {
    pub number: usize,
    pub s1: usize,
    pub s2: usize,
    pub s3: usize,
    pub s4: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table5Row {
    pub state: String,
    pub chi1: f64,
    pub chi2: f64,
    pub chi3: f64,
    pub chi4: f64,
}

pub fn table1() -> Result<Vec<Table1Row>> {
    TABLE1_DIMS
        .iter()
        .map(|&d| {
            Ok(Table1Row {
                d,
                bound: bound_p(d)?,
            })
        })
        .collect()
}

pub fn table2() -> Vec<Table2Row> {
    let mut rows = Vec::with_capacity(20);
    for (basis, (states, obs)) in TWO_QUBIT_TABLE
        .iter()
        .zip(TWO_QUBIT_OBSERVABLES)
        .enumerate()
    {
        for (j, s) in states.iter().enumerate() {
            rows.push(Table2Row {
                basis,
                observables: format!("{},{}", obs[0], obs[1]),
                state: j + 1,
                a_re: s[0].0,
                a_im: s[0].1,
                b_re: s[1].0,
                b_im: s[1].1,
                c_re: s[2].0,
                c_im: s[2].1,
                d_re: s[3].0,
                d_im: s[3].1,
            });
        }
    }
    rows
}

fn quarter(z: crate::Amplitude) -> (i8, i8) {
    (z.re.round() as i8, z.im.round() as i8)
}

pub fn table3_from(states: &[SignalState]) -> Vec<Table3Row> {
    states
        .iter()
        .map(|s| {
            let [b, c, d] = s.phases.map(quarter);
            Table3Row {
                number: s.number,
                i: s.indices[0] + 1,
                j: s.indices[1] + 1,
                k: s.indices[2] + 1,
                l: s.indices[3] + 1,
                b_re: b.0,
                b_im: b.1,
                c_re: c.0,
                c_im: c.1,
                d_re: d.0,
                d_im: d.1,
            }
        })
        .collect()
}

pub fn table4_from(bases: &[MeasurementBasis4]) -> Vec<Table4Row> {
    bases
        .iter()
        .map(|b| {
            let [s1, s2, s3, s4] = b.state_numbers();
            Table4Row {
                number: b.number,
                s1,
                s2,
                s3,
                s4,
            }
        })
        .collect()
}

pub fn table5_label(a: usize, sign: Sign, partner: usize) -> String {
    let p = if sign == Sign::Minus { "-" } else { "" };
    format!("{p}n{a},{p}n{partner}")
}

pub fn table5() -> Vec<Table5Row> {
    let setup = CubeGameSetup::new();
    vaa_overlap_table(&setup)
        .iter()
        .zip(TABLE5_ROWS.iter())
        .map(|(r, &(a, sign))| Table5Row {
            state: table5_label(a, sign, setup.partner(a).expect("valid diagonal")),
            chi1: r[0],
            chi2: r[1],
            chi3: r[2],
            chi4: r[3],
        })
        .collect()
}

/// Formats `x` to `digits` significant figures.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Serialize)]
struct Table1Printed {
    d: usize,
    bound: String,
}

#[derive(Serialize)]
struct Table5Printed<'a> {
    state: &'a str,
    chi1: String,
    chi2: String,
    chi3: String,
    chi4: String,
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

pub fn write_table1_csv<W: Write>(rows: &[Table1Row], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    for r in rows {
        out.serialize(Table1Printed {
            d: r.d,
            bound: format!("{:.4}", r.bound),
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_table5_csv<W: Write>(rows: &[Table5Row], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    for r in rows {
        out.serialize(Table5Printed {
            state: &r.state,
            chi1: significant(r.chi1, 3),
            chi2: significant(r.chi2, 3),
            chi3: significant(r.chi3, 3),
            chi4: significant(r.chi4, 3),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Writes rows whose CSV form needs no rounding.
pub fn write_rows_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn read_rows_json<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    Ok(serde_json::from_reader(r)?)
}

fn write_json<T: Serialize>(rows: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, rows)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Writes `table{n}.csv` and `table{n}.json` for each requested table and
/// returns the paths written.
pub fn write_tables(which: &[usize], outdir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(outdir)?;
    let mut written = Vec::new();
    let search = if which.iter().any(|n| *n == 3 || *n == 4) {
        let family = construct_mub(4)?;
        let states = find_signal_states(&family)?;
        let bases = find_measurement_bases(&states);
        Some((states, bases))
    } else {
        None
    };
    for &n in which {
        let csv_path = outdir.join(format!("table{n}.csv"));
        let json_path = outdir.join(format!("table{n}.json"));
        let csv_file = BufWriter::new(File::create(&csv_path)?);
        match n {
            1 => {
                let rows = table1()?;
                write_table1_csv(&rows, csv_file)?;
                write_json(&rows, &json_path)?;
            }
            2 => {
                let rows = table2();
                write_rows_csv(&rows, csv_file)?;
                write_json(&rows, &json_path)?;
            }
            3 => {
                let (states, _) = search.as_ref().expect("search ran");
                write_rows_csv(&table3_from(states), csv_file)?;
                write_json(states, &json_path)?;
            }
            4 => {
                let (_, bases) = search.as_ref().expect("search ran");
                write_rows_csv(&table4_from(bases), csv_file)?;
                write_json(&table4_from(bases), &json_path)?;
            }
            5 => {
                let rows = table5();
                write_table5_csv(&rows, csv_file)?;
                write_json(&rows, &json_path)?;
            }
            _ => {
                return Err(Error::OutOfRange {
                    name: "table",
                    value: n,
                    max: 5,
                })
            }
        }
        written.push(csv_path);
        written.push(json_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_figures() {
        assert_eq!(significant(0.31100001, 3), "0.311");
        assert_eq!(significant(0.022329, 3), "0.0223");
        assert_eq!(significant(0.93301, 3), "0.933");
        assert_eq!(significant(0.066987, 3), "0.0670");
        assert_eq!(significant(12.345, 3), "12.3");
        assert_eq!(significant(0.0, 3), "0");
    }

    #[test]
    fn table1_csv_precision() {
        let mut buf = Vec::new();
        write_table1_csv(&table1().unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("4,0.7000"));
        assert!(text.contains("5,0.6315"));
        let back: Vec<Table1Row> = read_rows_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 6);
    }

    #[test]
    fn table2_has_twenty_rows() {
        let rows = table2();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[8].observables, "YI,IY");
        assert_eq!(
            (rows[8].b_re, rows[8].b_im, rows[8].c_re, rows[8].c_im),
            (0, 1, 0, 1)
        );
        let mut buf = Vec::new();
        write_rows_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_rows_csv::<Table2Row, _>(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn table5_labels() {
        let rows = table5();
        assert_eq!(rows[0].state, "n1,n4");
        assert_eq!(rows[1].state, "-n1,-n4");
        assert_eq!(rows[6].state, "n4,n1");
    }

    #[test]
    fn unknown_table_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_tables(&[6], dir.path()).is_err());
    }
}
