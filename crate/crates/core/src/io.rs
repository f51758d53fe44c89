//! JSON and CSV persistence for bases and families.
//!
//! JSON: `{"dim": d, "bases": [{"label": l, "states": [[{"re", "im"}, ...]]}]}`.
//! CSV: one row per amplitude with columns `basis,state,component,re,im`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::qstate::{Amplitude, StateVector};
use crate::{Error, MubFamily, OrthonormalBasis, Result};

/// Re-checks the invariants that deserialization cannot enforce.
fn reassemble_basis(b: &OrthonormalBasis) -> Result<OrthonormalBasis> {
    OrthonormalBasis::assemble(b.label(), b.states().to_vec())
}

pub fn write_family_json<W: Write>(family: &MubFamily, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, family)?;
    Ok(())
}

/// Reads a family and checks its shape; certification is left to the caller.
pub fn read_family_json<R: Read>(r: R) -> Result<MubFamily> {
    let raw: MubFamily = serde_json::from_reader(r)?;
    let bases = raw
        .bases()
        .iter()
        .map(reassemble_basis)
        .collect::<Result<Vec<_>>>()?;
    let family = MubFamily::assemble(bases)?;
    if family.dim() != raw.dim() {
        return Err(Error::WrongDimension {
            expected: raw.dim(),
            got: family.dim(),
        });
    }
    Ok(family)
}

pub fn write_basis_json<W: Write>(basis: &OrthonormalBasis, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, basis)?;
    Ok(())
}

/// Reads a basis and checks orthonormality.
pub fn read_basis_json<R: Read>(r: R) -> Result<OrthonormalBasis> {
    let raw: OrthonormalBasis = serde_json::from_reader(r)?;
    OrthonormalBasis::new(raw.label(), raw.states().to_vec())
}

#[derive(Debug, Serialize, Deserialize)]
struct AmplitudeRow {
    basis: usize,
    state: usize,
    component: usize,
    re: f64,
    im: f64,
}

fn write_rows<W: Write>(bases: &[OrthonormalBasis], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for b in bases {
        for (state, psi) in b.states().iter().enumerate() {
            for (component, a) in psi.amps().iter().enumerate() {
                out.serialize(AmplitudeRow {
                    basis: b.label(),
                    state,
                    component,
                    re: a.re,
                    im: a.im,
                })?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn read_rows<R: Read>(r: R) -> Result<Vec<OrthonormalBasis>> {
    let mut grid: BTreeMap<usize, BTreeMap<usize, BTreeMap<usize, Amplitude>>> = BTreeMap::new();
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: AmplitudeRow = row?;
        let slot = grid
            .entry(row.basis)
            .or_default()
            .entry(row.state)
            .or_default();
        if slot
            .insert(row.component, Amplitude::new(row.re, row.im))
            .is_some()
        {
            return Err(Error::Parse(format!(
                "duplicate amplitude basis={} state={} component={}",
                row.basis, row.state, row.component
            )));
        }
    }
    grid.into_iter()
        .map(|(label, states)| {
            let vectors = states
                .into_iter()
                .enumerate()
                .map(|(expected, (state, comps))| {
                    if state != expected || comps.keys().enumerate().any(|(i, &c)| i != c) {
                        return Err(Error::Parse(format!("gap in basis {label} state {state}")));
                    }
                    StateVector::new(comps.into_values().collect())
                })
                .collect::<Result<Vec<_>>>()?;
            OrthonormalBasis::assemble(label, vectors)
        })
        .collect()
}

pub fn write_family_csv<W: Write>(family: &MubFamily, w: W) -> Result<()> {
    write_rows(family.bases(), w)
}

pub fn read_family_csv<R: Read>(r: R) -> Result<MubFamily> {
    MubFamily::assemble(read_rows(r)?)
}

pub fn write_basis_csv<W: Write>(basis: &OrthonormalBasis, w: W) -> Result<()> {
    write_rows(std::slice::from_ref(basis), w)
}

/// Reads a single basis and checks orthonormality.
pub fn read_basis_csv<R: Read>(r: R) -> Result<OrthonormalBasis> {
    let mut bases = read_rows(r)?;
    if bases.len() != 1 {
        return Err(Error::Parse(format!(
            "expected one basis, found {}",
            bases.len()
        )));
    }
    let b = bases.remove(0);
    OrthonormalBasis::new(b.label(), b.states().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct_mub;

    #[test]
    fn family_round_trips() {
        for d in [2, 3, 4] {
            let f = construct_mub(d).unwrap();
            let mut json = Vec::new();
            write_family_json(&f, &mut json).unwrap();
            assert_eq!(read_family_json(json.as_slice()).unwrap(), f);
            let mut csv = Vec::new();
            write_family_csv(&f, &mut csv).unwrap();
            assert_eq!(read_family_csv(csv.as_slice()).unwrap(), f);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let f = construct_mub(2).unwrap();
        let mut buf = Vec::new();
        write_family_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("basis,state,component,re,im"));
        assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
    }

    #[test]
    fn basis_round_trips_and_rejects() {
        let f = construct_mub(3).unwrap();
        let b = f.basis(2).unwrap();
        let mut json = Vec::new();
        write_basis_json(b, &mut json).unwrap();
        assert_eq!(&read_basis_json(json.as_slice()).unwrap(), b);
        let mut csv = Vec::new();
        write_basis_csv(b, &mut csv).unwrap();
        assert_eq!(&read_basis_csv(csv.as_slice()).unwrap(), b);

        let dup = "basis,state,component,re,im\n0,0,0,1,0\n0,0,0,1,0\n";
        assert!(read_basis_csv(dup.as_bytes()).is_err());
        let not_orth = "basis,state,component,re,im\n0,0,0,1,0\n0,0,1,0,0\n0,1,0,1,0\n0,1,1,0,0\n";
        assert!(read_basis_csv(not_orth.as_bytes()).is_err());
        assert!(read_family_json("{\"dim\":2}".as_bytes()).is_err());
    }
}
