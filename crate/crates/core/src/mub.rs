//! Mutually unbiased bases.
//!
//! Prime `d` uses the quadratic root-of-unity construction; `d = 2` uses the
//! Pauli eigenbases; `d = 4` uses an explicit two-qubit family whose bases
//! are the joint eigenbases of pairs of commuting Pauli products.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qstate::{dot, Amplitude, StateVector};
use crate::{Error, Result, Tolerances};

/// `dim` orthonormal states tagged with a label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalBasis {
    label: usize,
    states: Vec<StateVector>,
}

impl OrthonormalBasis {
    /// Validates orthonormality within the construction tolerance.
    pub fn new(label: usize, states: Vec<StateVector>) -> Result<Self> {
        let basis = Self::assemble(label, states)?;
        let dev = basis.orthonormality_deviation();
        if dev > Tolerances::DEFAULT.construction {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(basis)
    }

    /// Shape checks only; orthonormality is left to [`certify_family`].
    pub fn assemble(label: usize, states: Vec<StateVector>) -> Result<Self> {
        let dim = states.len();
        if dim == 0 {
            return Err(Error::ZeroVector);
        }
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: s.dim(),
            });
        }
        Ok(Self { label, states })
    }

    pub fn computational(dim: usize, label: usize) -> Self {
        let states = (0..dim)
            .map(|k| StateVector::basis_state(dim, k).unwrap())
            .collect();
        Self { label, states }
    }

    /// Orthonormalizes `vectors` in order (modified Gram-Schmidt).
    pub fn gram_schmidt(label: usize, vectors: Vec<Vec<Amplitude>>) -> Result<Self> {
        let mut states: Vec<StateVector> = Vec::with_capacity(vectors.len());
        for mut v in vectors {
            // Two passes keep the result orthogonal to ~1e-16.
            for _ in 0..2 {
                for s in &states {
                    let p = dot(s.amps(), &v);
                    v.iter_mut().zip(s.amps()).for_each(|(x, y)| *x -= p * y);
                }
            }
            states.push(StateVector::normalized(v)?);
        }
        Self::new(label, states)
    }

    /// Extends `psi` to a full basis with `psi` as state 0.
    pub fn completing(label: usize, psi: &StateVector) -> Self {
        let dim = psi.dim();
        let mut states = vec![psi.clone()];
        for k in 0..dim {
            if states.len() == dim {
                break;
            }
            let mut v = StateVector::basis_state(dim, k).unwrap().amps().to_vec();
            for _ in 0..2 {
                for s in &states {
                    let p = dot(s.amps(), &v);
                    v.iter_mut().zip(s.amps()).for_each(|(x, y)| *x -= p * y);
                }
            }
            if v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-6 {
                states.push(StateVector::normalized(v).unwrap());
            }
        }
        Self { label, states }
    }

    /// A Haar-random basis.
    pub fn random<R: Rng + ?Sized>(dim: usize, label: usize, rng: &mut R) -> Self {
        loop {
            let vectors = (0..dim)
                .map(|_| StateVector::random(dim, rng).amps().to_vec())
                .collect();
            if let Ok(b) = Self::gram_schmidt(label, vectors) {
                return b;
            }
        }
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = label;
        self
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, j: usize) -> Result<&StateVector> {
        self.states.get(j).ok_or(Error::IndexOutOfRange {
            what: "state",
            index: j,
        })
    }

    /// `max_{j,k} | |⟨s_j|s_k⟩| − δ_jk |`.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, a) in self.states.iter().enumerate() {
            for (k, b) in self.states.iter().enumerate().skip(j) {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((dot(a.amps(), b.amps()).norm() - target).abs());
            }
        }
        worst
    }

    /// Index of the basis state on the same ray as `psi`, if any.
    pub fn index_of(&self, psi: &StateVector, tol: f64) -> Option<usize> {
        self.states.iter().position(|s| s.same_ray(psi, tol))
    }
}

/// `dim + 1` bases labelled `0..=dim`; basis 0 is the preparation basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MubFamily {
    dim: usize,
    bases: Vec<OrthonormalBasis>,
}

impl MubFamily {
    /// Assembles and certifies a family.
    pub fn new(bases: Vec<OrthonormalBasis>) -> Result<Self> {
        let family = Self::assemble(bases)?;
        let report = certify_family(&family);
        if report.max_orthonormality_deviation >= CERTIFY_THRESHOLD {
            return Err(Error::NotOrthonormal(report.max_orthonormality_deviation));
        }
        if report.max_unbiasedness_deviation >= CERTIFY_THRESHOLD {
            return Err(Error::NotUnbiased(report.max_unbiasedness_deviation));
        }
        Ok(family)
    }

    /// Checks count, labels and dimensions without certifying.
    pub fn assemble(mut bases: Vec<OrthonormalBasis>) -> Result<Self> {
        let dim = bases
            .first()
            .map(OrthonormalBasis::dim)
            .ok_or_else(|| Error::MalformedFamily("no bases".into()))?;
        if bases.len() != dim + 1 {
            return Err(Error::MalformedFamily(format!(
                "{} bases for dimension {dim}, expected {}",
                bases.len(),
                dim + 1
            )));
        }
        bases.sort_by_key(OrthonormalBasis::label);
        for (i, b) in bases.iter().enumerate() {
            if b.label() != i {
                return Err(Error::MalformedFamily(format!("labels must be 0..={dim}")));
            }
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: b.dim(),
                });
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bases(&self) -> &[OrthonormalBasis] {
        &self.bases
    }

    pub fn basis(&self, label: usize) -> Result<&OrthonormalBasis> {
        self.bases.get(label).ok_or(Error::UnknownBasis(label))
    }

    /// `|ψ_j^label⟩`.
    pub fn state(&self, label: usize, j: usize) -> Result<&StateVector> {
        self.basis(label)?.state(j)
    }

    /// All labels `0..=dim`.
    pub fn labels(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.dim
    }

    /// Replaces one basis without re-certifying.
    pub fn with_basis_replaced(&self, label: usize, mut basis: OrthonormalBasis) -> Result<Self> {
        if label > self.dim {
            return Err(Error::UnknownBasis(label));
        }
        basis.label = label;
        let mut bases = self.bases.clone();
        bases[label] = basis;
        Self::assemble(bases)
    }
}

const CERTIFY_THRESHOLD: f64 = Tolerances::DEFAULT.comparison;

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
}

/// Builds `d + 1` mutually unbiased bases for prime `d` or `d = 4`.
pub fn construct_mub(d: usize) -> Result<MubFamily> {
    let bases = match d {
        2 => qubit_bases(),
        4 => two_qubit_bases(),
        _ if is_prime(d) => prime_bases(d),
        _ => return Err(Error::UnsupportedDimension(d)),
    };
    MubFamily::assemble(bases)
}

fn c(re: f64, im: f64) -> Amplitude {
    Amplitude::new(re, im)
}

/// Z, X and Y eigenbases, each ordered (+1, −1).
fn qubit_bases() -> Vec<OrthonormalBasis> {
    let raw: [[[Amplitude; 2]; 2]; 3] = [
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]],
        [[c(1.0, 0.0), c(0.0, 1.0)], [c(1.0, 0.0), c(0.0, -1.0)]],
    ];
    raw.iter()
        .enumerate()
        .map(|(label, states)| OrthonormalBasis {
            label,
            states: states
                .iter()
                .map(|s| StateVector::normalized(s.to_vec()).unwrap())
                .collect(),
        })
        .collect()
}

/// Basis `m ∈ 1..=d`, state `j`, component `k`: `ω^{jk + mk²} / √d`.
fn prime_bases(d: usize) -> Vec<OrthonormalBasis> {
    let scale = 1.0 / (d as f64).sqrt();
    let omega = |e: usize| Amplitude::from_polar(scale, 2.0 * PI * (e % d) as f64 / d as f64);
    let mut bases = vec![OrthonormalBasis::computational(d, 0)];
    for m in 1..=d {
        let states = (0..d)
            .map(|j| {
                let amps = (0..d).map(|k| omega(j * k + m * ((k * k) % d))).collect();
                StateVector::from_amps_unchecked(amps)
            })
            .collect();
        bases.push(OrthonormalBasis { label: m, states });
    }
    bases
}

/// Pair of commuting two-qubit observables whose joint eigenbasis is basis
/// `label` of the `d = 4` family.
pub const TWO_QUBIT_OBSERVABLES: [[&str; 2]; 5] = [
    ["ZI", "IZ"],
    ["XI", "IX"],
    ["YI", "IY"],
    ["XY", "YZ"],
    ["YX", "ZY"],
];

/// Unnormalized amplitudes `(re, im)` on `|00⟩, |01⟩, |10⟩, |11⟩`, each basis
/// ordered by eigenvalue signature `++, +−, −+, −−` of its observable pair.
pub const TWO_QUBIT_TABLE: [[[(i8, i8); 4]; 4]; 5] = {
    const O: (i8, i8) = (1, 0);
    const M: (i8, i8) = (-1, 0);
    const I: (i8, i8) = (0, 1);
    const J: (i8, i8) = (0, -1);
    const Z: (i8, i8) = (0, 0);
    [
        [[O, Z, Z, Z], [Z, O, Z, Z], [Z, Z, O, Z], [Z, Z, Z, O]],
        [[O, O, O, O], [O, M, O, M], [O, O, M, M], [O, M, M, O]],
        [[O, I, I, M], [O, J, I, O], [O, I, J, O], [O, J, J, M]],
        [[O, M, I, I], [O, O, J, I], [O, O, I, J], [O, M, J, J]],
        [[O, I, M, I], [O, J, O, I], [O, I, O, J], [O, J, M, J]],
    ]
};

fn two_qubit_bases() -> Vec<OrthonormalBasis> {
    TWO_QUBIT_TABLE
        .iter()
        .enumerate()
        .map(|(label, states)| OrthonormalBasis {
            label,
            states: states
                .iter()
                .map(|s| {
                    let amps = s.iter().map(|&(re, im)| c(re as f64, im as f64)).collect();
                    StateVector::normalized(amps).expect("nonzero table row")
                })
                .collect(),
        })
        .collect()
}

/// Where a certification deviation was observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationSite {
    pub basis_a: usize,
    pub state_a: usize,
    pub basis_b: usize,
    pub state_b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub dim: usize,
    pub max_orthonormality_deviation: f64,
    pub orthonormality_site: Option<DeviationSite>,
    /// `max | |⟨α_i|β_j⟩|² − 1/d |` across distinct bases.
    pub max_unbiasedness_deviation: f64,
    pub unbiasedness_site: Option<DeviationSite>,
    pub threshold: f64,
    pub passed: bool,
}

/// Measures orthonormality within and unbiasedness across every basis pair.
///
/// Passes iff both maximal deviations are below `1e-10`.
pub fn certify_family(f: &MubFamily) -> CertificationReport {
    let d = f.dim();
    let inv_d = 1.0 / d as f64;
    let mut ortho = (0.0, None);
    let mut unbiased = (0.0, None);
    for (a, ba) in f.bases().iter().enumerate() {
        for (b, bb) in f.bases().iter().enumerate().skip(a) {
            for (i, sa) in ba.states().iter().enumerate() {
                for (j, sb) in bb.states().iter().enumerate() {
                    if a == b && j < i {
                        continue;
                    }
                    let overlap = dot(sa.amps(), sb.amps());
                    let site = Some(DeviationSite {
                        basis_a: a,
                        state_a: i,
                        basis_b: b,
                        state_b: j,
                    });
                    if a == b {
                        let target = if i == j { 1.0 } else { 0.0 };
                        let dev = (overlap.norm() - target).abs();
                        if dev > ortho.0 {
                            ortho = (dev, site);
                        }
                    } else {
                        let dev = (overlap.norm_sqr() - inv_d).abs();
                        if dev > unbiased.0 {
                            unbiased = (dev, site);
                        }
                    }
                }
            }
        }
    }
    CertificationReport {
        dim: d,
        max_orthonormality_deviation: ortho.0,
        orthonormality_site: ortho.1,
        max_unbiasedness_deviation: unbiased.0,
        unbiasedness_site: unbiased.1,
        threshold: CERTIFY_THRESHOLD,
        passed: ortho.0 < CERTIFY_THRESHOLD && unbiased.0 < CERTIFY_THRESHOLD,
    }
}
