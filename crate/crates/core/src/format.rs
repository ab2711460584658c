//! Number formatting, JSON documents for systems and partitions, and the
//! binary signal format.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atomic::MoleculeSystem;
use crate::cover::PartitionOfUnity;
use crate::error::{Error, Result};
use crate::func::GFunc;
use crate::group::{CarrierKind, Group};

/// Twelve significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 {
        // empty float sums come out as -0.0
        format!("{:.11e}", 0.0)
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierDoc {
    #[serde(flatten)]
    pub kind: CarrierKind,
    pub dim: usize,
}

impl CarrierDoc {
    pub fn of(g: &Group) -> Self {
        CarrierDoc {
            kind: g.kind(),
            dim: g.dim(),
        }
    }

    pub fn group(&self) -> Result<Group> {
        match self.kind {
            CarrierKind::Lattice => Group::lattice(self.dim),
            CarrierKind::Cyclic { modulus } => Group::cyclic(self.dim, modulus),
        }
    }
}

/// `(coordinates, re, im)` triples.
pub type SparseDoc = Vec<(Vec<i64>, f64, f64)>;

pub fn sparse_doc(f: &GFunc) -> SparseDoc {
    f.iter()
        .map(|(x, v)| (x.coords().to_vec(), v.re, v.im))
        .collect()
}

pub fn from_sparse_doc(group: Group, doc: &SparseDoc) -> Result<GFunc> {
    let pairs = doc
        .iter()
        .map(|(c, re, im)| Ok((group.element(c)?, C64::new(*re, *im))))
        .collect::<Result<Vec<_>>>()?;
    GFunc::from_pairs(group, pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeDoc {
    pub carrier: CarrierDoc,
    pub nodes: Vec<Vec<i64>>,
    pub atoms: Vec<SparseDoc>,
    pub duals: Vec<SparseDoc>,
    pub envelope: SparseDoc,
}

impl MoleculeDoc {
    pub fn of(sys: &MoleculeSystem) -> Self {
        MoleculeDoc {
            carrier: CarrierDoc::of(&sys.group()),
            nodes: sys.nodes().elements().iter().map(|x| x.coords().to_vec()).collect(),
            atoms: sys.atoms().iter().map(sparse_doc).collect(),
            duals: sys.duals().iter().map(sparse_doc).collect(),
            envelope: sparse_doc(sys.envelope()),
        }
    }

    pub fn build(&self) -> Result<MoleculeSystem> {
        let g = self.carrier.group()?;
        let nodes = self
            .nodes
            .iter()
            .map(|c| g.element(c))
            .collect::<Result<Vec<_>>>()?;
        let nodes = crate::group::RelSepSet::with_default_neighborhood(g, nodes)?;
        let conv = |d: &Vec<SparseDoc>| d.iter().map(|s| from_sparse_doc(g, s)).collect::<Result<Vec<_>>>();
        MoleculeSystem::new(nodes, conv(&self.atoms)?, conv(&self.duals)?, from_sparse_doc(g, &self.envelope)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub carrier: CarrierDoc,
    pub centers: Vec<Vec<i64>>,
    pub functions: Vec<SparseDoc>,
    pub envelope: SparseDoc,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl PartitionDoc {
    pub fn of(pu: &PartitionOfUnity) -> Self {
        let (lower, upper) = pu.bounds();
        PartitionDoc {
            carrier: CarrierDoc::of(&pu.domain().group()),
            centers: pu.centers().elements().iter().map(|x| x.coords().to_vec()).collect(),
            functions: pu.functions().iter().map(sparse_doc).collect(),
            envelope: sparse_doc(pu.envelope()),
            lower,
            upper,
            exact: pu.is_exact(),
        }
    }
}

/// Little-endian `u64` length followed by interleaved `(re, im)` doubles.
pub fn write_signal(mut w: impl Write, v: &[C64]) -> Result<()> {
    let io = |e: std::io::Error| Error::Malformed(e.to_string());
    w.write_all(&(v.len() as u64).to_le_bytes()).map_err(io)?;
    for z in v {
        w.write_all(&z.re.to_le_bytes()).map_err(io)?;
        w.write_all(&z.im.to_le_bytes()).map_err(io)?;
    }
    Ok(())
}

pub fn read_signal(mut r: impl Read) -> Result<Vec<C64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Malformed(e.to_string()))?;
    if bytes.len() < 8 {
        return Err(Error::Malformed("missing length header".into()));
    }
    let n = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")) as usize;
    let body = &bytes[8..];
    if body.len() != n * 16 {
        return Err(Error::Malformed(format!(
            "header announces {n} samples, body holds {} bytes",
            body.len()
        )));
    }
    Ok(body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect())
}

/// JSON sidecar describing a stored window or signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSidecar {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub window_family: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(-0.0), "0.00000000000e0");
    }

    #[test]
    fn signal_roundtrip() {
        let v = vec![C64::new(1.5, -2.0), C64::new(0.0, 1e-300)];
        let mut buf = Vec::new();
        write_signal(&mut buf, &v).unwrap();
        assert_eq!(buf.len(), 8 + 32);
        assert_eq!(read_signal(&buf[..]).unwrap(), v);
        assert!(read_signal(&buf[..20]).is_err());
    }

    #[test]
    fn molecule_doc_roundtrip() {
        let g = Group::cyclic(1, 4).unwrap();
        let nodes = crate::group::RelSepSet::with_default_neighborhood(g, g.elements().unwrap()).unwrap();
        let sys = MoleculeSystem::deltas(nodes).unwrap();
        let doc = MoleculeDoc::of(&sys);
        let text = serde_json::to_string(&doc).unwrap();
        let back: MoleculeDoc = serde_json::from_str(&text).unwrap();
        let rebuilt = back.build().unwrap();
        assert_eq!(rebuilt.atoms(), sys.atoms());
    }
}
