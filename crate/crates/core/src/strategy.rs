//! Conventional physicist strategies and their exact success probability.
//!
//! A strategy prepares a state, lets the king measure in one basis of the
//! family, measures in a control basis `{χ_k}`, and predicts the king's
//! outcome from the control outcome. An [`AssignmentMap`] says which control
//! outcome signals which state of every basis the control measurement is
//! responsible for.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::matching::max_weight_bijection;
use crate::mub::{MubFamily, OrthonormalBasis};
use crate::qstate::{dot, BlochDirection, StateVector};
use crate::{spin_up_state, Error, Result, Tolerances};

/// `f(i, j, k) = |⟨χ_k|ψ_j^i⟩|²` for every basis `i` of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapTable {
    dim: usize,
    values: Vec<Vec<Vec<f64>>>,
}

impl OverlapTable {
    pub fn new(family: &MubFamily, control: &OrthonormalBasis) -> Result<Self> {
        let d = family.dim();
        if control.dim() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: control.dim(),
            });
        }
        let values = family
            .bases()
            .iter()
            .map(|b| {
                b.states()
                    .iter()
                    .map(|psi| {
                        control
                            .states()
                            .iter()
                            .map(|chi| dot(chi.amps(), psi.amps()).norm_sqr())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { dim: d, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, label: usize, j: usize, k: usize) -> f64 {
        self.values[label][j][k]
    }

    /// Rows `j`, columns `k`, for one basis.
    pub fn basis(&self, label: usize) -> &[Vec<f64>] {
        &self.values[label]
    }
}

/// For every covered basis label, the control outcome assigned to each of
/// its states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentMap {
    dim: usize,
    forward: BTreeMap<usize, Vec<usize>>,
}

impl AssignmentMap {
    pub fn new(dim: usize, forward: BTreeMap<usize, Vec<usize>>) -> Result<Self> {
        for (&label, ks) in &forward {
            if ks.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: ks.len(),
                });
            }
            if let Some(&k) = ks.iter().find(|&&k| k >= dim) {
                return Err(Error::IndexOutOfRange {
                    what: "control outcome",
                    index: k,
                });
            }
            let _ = label;
        }
        Ok(Self { dim, forward })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            forward: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Control outcome signalling `|ψ_j^label⟩`.
    pub fn forward(&self, label: usize, j: usize) -> Option<usize> {
        self.forward.get(&label).and_then(|ks| ks.get(j)).copied()
    }

    pub fn forward_map(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.forward
    }

    pub fn covered(&self) -> impl Iterator<Item = usize> + '_ {
        self.forward.keys().copied()
    }

    /// Labels in `0..=dim` with no assignment.
    pub fn excluded(&self) -> Vec<usize> {
        (0..=self.dim)
            .filter(|l| !self.forward.contains_key(l))
            .collect()
    }

    /// Covered bases whose state → outcome map is not a bijection.
    pub fn ill_conditioned_bases(&self) -> Vec<usize> {
        self.forward
            .iter()
            .filter(|(_, ks)| !is_permutation(ks))
            .map(|(&l, _)| l)
            .collect()
    }

    pub fn is_well_conditioned(&self) -> bool {
        self.forward.values().all(|ks| is_permutation(ks))
    }

    /// State of basis `label` predicted after control outcome `k`.
    pub fn prediction(&self, k: usize, label: usize) -> Option<usize> {
        self.forward.get(&label)?.iter().position(|&x| x == k)
    }

    /// The covered states signalled by control outcome `k`, as `(label, j)`.
    pub fn signalled_by(&self, k: usize) -> Vec<(usize, usize)> {
        self.forward
            .iter()
            .flat_map(|(&l, ks)| {
                ks.iter()
                    .enumerate()
                    .filter(move |(_, &x)| x == k)
                    .map(move |(j, _)| (l, j))
            })
            .collect()
    }
}

fn is_permutation(ks: &[usize]) -> bool {
    let mut seen = vec![false; ks.len()];
    ks.iter()
        .all(|&k| k < seen.len() && !std::mem::replace(&mut seen[k], true))
}

/// Maps each state of every basis except `prep_basis` to the control
/// outcome it overlaps most; ties go to the lowest outcome index.
pub fn assign_greedy(
    family: &MubFamily,
    prep_basis: usize,
    control: &OrthonormalBasis,
) -> Result<AssignmentMap> {
    family.basis(prep_basis)?;
    let covered: Vec<usize> = family.labels().filter(|&l| l != prep_basis).collect();
    assign_greedy_covering(family, &covered, control)
}

/// [`assign_greedy`] over an explicit set of covered bases.
pub fn assign_greedy_covering(
    family: &MubFamily,
    covered: &[usize],
    control: &OrthonormalBasis,
) -> Result<AssignmentMap> {
    let overlaps = OverlapTable::new(family, control)?;
    let tie = Tolerances::DEFAULT.construction;
    let mut forward = BTreeMap::new();
    for &label in covered {
        family.basis(label)?;
        let ks = overlaps
            .basis(label)
            .iter()
            .map(|row| {
                let mut best = 0;
                for (k, &f) in row.iter().enumerate().skip(1) {
                    if f > row[best] + tie {
                        best = k;
                    }
                }
                best
            })
            .collect();
        forward.insert(label, ks);
    }
    AssignmentMap::new(family.dim(), forward)
}

/// Replaces every ill-conditioned basis assignment by the bijection that
/// maximizes `Σ_j f(i, j)`; bijective bases are kept as they are.
pub fn repair_well_conditioned(raw: &AssignmentMap, overlaps: &OverlapTable) -> AssignmentMap {
    let forward = raw
        .forward
        .iter()
        .map(|(&label, ks)| {
            let ks = if is_permutation(ks) {
                ks.clone()
            } else {
                max_weight_bijection(overlaps.basis(label))
            };
            (label, ks)
        })
        .collect();
    AssignmentMap {
        dim: raw.dim,
        forward,
    }
}

/// Greedy assignment followed by repair.
pub fn well_conditioned_assignment(
    family: &MubFamily,
    covered: &[usize],
    control: &OrthonormalBasis,
) -> Result<AssignmentMap> {
    let raw = assign_greedy_covering(family, covered, control)?;
    Ok(repair_well_conditioned(
        &raw,
        &OverlapTable::new(family, control)?,
    ))
}

/// Eigenstate preparation, one control measurement, and a prediction for
/// every basis other than the preparation basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionalStrategy {
    family: MubFamily,
    preparation: StateVector,
    prep_basis: Option<usize>,
    control: OrthonormalBasis,
    assignment: AssignmentMap,
}

impl ConventionalStrategy {
    pub fn new(
        family: MubFamily,
        preparation: StateVector,
        prep_basis: Option<usize>,
        control: OrthonormalBasis,
        assignment: AssignmentMap,
    ) -> Result<Self> {
        let d = family.dim();
        for dim in [preparation.dim(), control.dim(), assignment.dim()] {
            if dim != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: dim,
                });
            }
        }
        let dev = control.orthonormality_deviation();
        if dev > Tolerances::DEFAULT.construction {
            return Err(Error::NotOrthonormal(dev));
        }
        if let Some(&basis) = assignment.ill_conditioned_bases().first() {
            return Err(Error::IllConditioned { basis });
        }
        if let Some(label) = prep_basis {
            let b = family.basis(label)?;
            if b.index_of(&preparation, Tolerances::DEFAULT.comparison)
                .is_none()
            {
                return Err(Error::PreparationNotInBasis(label));
            }
            let expected: Vec<usize> = family.labels().filter(|&l| l != label).collect();
            if assignment.covered().collect::<Vec<_>>() != expected {
                return Err(Error::PartitionViolation(format!(
                    "assignment must cover every basis except {label}"
                )));
            }
        }
        Ok(Self {
            family,
            preparation,
            prep_basis,
            control,
            assignment,
        })
    }

    /// Prepares `|ψ_prep_index^prep_basis⟩` and builds a well-conditioned
    /// assignment for `control` by greedy assignment plus repair.
    pub fn eigenstate(
        family: MubFamily,
        prep_basis: usize,
        prep_index: usize,
        control: OrthonormalBasis,
    ) -> Result<Self> {
        let preparation = family.state(prep_basis, prep_index)?.clone();
        let raw = assign_greedy(&family, prep_basis, &control)?;
        let assignment = repair_well_conditioned(&raw, &OverlapTable::new(&family, &control)?);
        Self::new(family, preparation, Some(prep_basis), control, assignment)
    }

    /// The best known qubit strategy: prepare spin up along z and measure
    /// midway between the x and y axes.
    pub fn qubit_optimal() -> Result<Self> {
        let family = crate::construct_mub(2)?;
        let m = BlochDirection::normalized(1.0, 1.0, 0.0)?;
        let control = OrthonormalBasis::new(0, vec![spin_up_state(&m)?, spin_up_state(&-m)?])?;
        Self::eigenstate(family, 0, 0, control)
    }

    pub fn family(&self) -> &MubFamily {
        &self.family
    }

    pub fn preparation(&self) -> &StateVector {
        &self.preparation
    }

    pub fn prep_basis(&self) -> Option<usize> {
        self.prep_basis
    }

    /// Index of the preparation within its basis.
    pub fn prep_index(&self) -> Option<usize> {
        let b = self.family.basis(self.prep_basis?).ok()?;
        b.index_of(&self.preparation, Tolerances::DEFAULT.comparison)
    }

    pub fn control(&self) -> &OrthonormalBasis {
        &self.control
    }

    pub fn assignment(&self) -> &AssignmentMap {
        &self.assignment
    }
}

/// Exact success probability of a strategy and its decompositions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessBreakdown {
    pub dim: usize,
    pub total: f64,
    /// Success probability conditioned on the king's basis.
    pub per_basis: BTreeMap<usize, f64>,
    /// `F(k)`: summed identification probability of the states signalled by
    /// control outcome `k`.
    pub per_signal: BTreeMap<usize, f64>,
}

impl SuccessBreakdown {
    /// The total regrouped by control outcome:
    /// `(1 + Σ_k F(k) / d) / (d + 1)`.
    pub fn regrouped_total(&self) -> f64 {
        let d = self.dim as f64;
        (1.0 + self.per_signal.values().sum::<f64>() / d) / (d + 1.0)
    }
}

/// Exact success probability of an eigenstate-preparation strategy.
pub fn success_exact(s: &ConventionalStrategy) -> Result<SuccessBreakdown> {
    let prep = s.prep_basis.ok_or(Error::MissingPrepBasis)?;
    let d = s.family.dim();
    let df = d as f64;
    let overlaps = OverlapTable::new(&s.family, &s.control)?;
    let mut total = 1.0 / (df + 1.0);
    let mut per_basis = BTreeMap::from([(prep, 1.0)]);
    let mut per_signal: BTreeMap<usize, f64> = (0..d).map(|k| (k, 0.0)).collect();
    for (&label, ks) in s.assignment.forward_map() {
        let mut basis_sum = 0.0;
        for (j, &k) in ks.iter().enumerate() {
            let f = overlaps.get(label, j, k);
            basis_sum += f;
            *per_signal.get_mut(&k).unwrap() += f;
            total += f / ((df + 1.0) * df);
        }
        per_basis.insert(label, basis_sum / df);
    }
    Ok(SuccessBreakdown {
        dim: d,
        total,
        per_basis,
        per_signal,
    })
}

/// A strategy with an arbitrary pure preparation: guesses for some bases,
/// the control measurement for the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralStrategy {
    family: MubFamily,
    preparation: StateVector,
    /// A basis containing the preparation; becomes the control basis under
    /// [`GeneralStrategy::complement`].
    prep_basis: OrthonormalBasis,
    /// Guessed basis label → guessed state index.
    guesses: BTreeMap<usize, usize>,
    control: OrthonormalBasis,
    assignment: AssignmentMap,
}

impl GeneralStrategy {
    pub fn new(
        family: MubFamily,
        preparation: StateVector,
        prep_basis: OrthonormalBasis,
        guesses: BTreeMap<usize, usize>,
        control: OrthonormalBasis,
        assignment: AssignmentMap,
    ) -> Result<Self> {
        check_partition(&family, &guesses, &assignment)?;
        if prep_basis
            .index_of(&preparation, Tolerances::DEFAULT.comparison)
            .is_none()
        {
            return Err(Error::PreparationNotInBasis(prep_basis.label()));
        }
        Ok(Self {
            family,
            preparation,
            prep_basis,
            guesses,
            control,
            assignment,
        })
    }

    pub fn preparation(&self) -> &StateVector {
        &self.preparation
    }

    pub fn guesses(&self) -> &BTreeMap<usize, usize> {
        &self.guesses
    }

    pub fn control(&self) -> &OrthonormalBasis {
        &self.control
    }

    pub fn assignment(&self) -> &AssignmentMap {
        &self.assignment
    }

    pub fn success(&self) -> Result<f64> {
        success_exact_general(
            &self.family,
            &self.preparation,
            &self.guesses,
            &self.control,
            &self.assignment,
        )
    }

    /// Exchanges the roles of preparation and control with control state 0
    /// as the new preparation.
    pub fn complement(&self) -> Result<GeneralStrategy> {
        self.complement_at(0)
    }

    /// Prepares control state `k`, measures in the old preparation basis,
    /// guesses the bases the control used to cover and covers the bases that
    /// used to be guessed.
    pub fn complement_at(&self, k: usize) -> Result<GeneralStrategy> {
        let preparation = self.control.state(k)?.clone();
        let mut guesses = BTreeMap::new();
        for label in self.assignment.covered() {
            let j = match self.assignment.prediction(k, label) {
                Some(j) => j,
                None => most_likely_state(self.family.basis(label)?, &preparation),
            };
            guesses.insert(label, j);
        }
        let covered: Vec<usize> = self.guesses.keys().copied().collect();
        let new_control = self.prep_basis.clone();
        let assignment = well_conditioned_assignment(&self.family, &covered, &new_control)?;
        GeneralStrategy::new(
            self.family.clone(),
            preparation,
            self.control.clone(),
            guesses,
            new_control,
            assignment,
        )
    }
}

impl From<&ConventionalStrategy> for GeneralStrategy {
    fn from(s: &ConventionalStrategy) -> Self {
        let prep_basis = match s.prep_basis {
            Some(label) => s.family.basis(label).unwrap().clone(),
            None => OrthonormalBasis::completing(usize::MAX, &s.preparation),
        };
        let guesses = s
            .prep_basis
            .into_iter()
            .map(|label| (label, s.prep_index().unwrap_or(0)))
            .collect();
        Self {
            family: s.family.clone(),
            preparation: s.preparation.clone(),
            prep_basis,
            guesses,
            control: s.control.clone(),
            assignment: s.assignment.clone(),
        }
    }
}

fn most_likely_state(basis: &OrthonormalBasis, psi: &StateVector) -> usize {
    let mut best = 0;
    let mut best_p = f64::NEG_INFINITY;
    for (j, s) in basis.states().iter().enumerate() {
        let p = dot(s.amps(), psi.amps()).norm_sqr();
        if p > best_p + Tolerances::DEFAULT.construction {
            best = j;
            best_p = p;
        }
    }
    best
}

fn check_partition(
    family: &MubFamily,
    guesses: &BTreeMap<usize, usize>,
    assignment: &AssignmentMap,
) -> Result<()> {
    let guessed: BTreeSet<usize> = guesses.keys().copied().collect();
    let covered: BTreeSet<usize> = assignment.covered().collect();
    if let Some(l) = guessed.intersection(&covered).next() {
        return Err(Error::PartitionViolation(format!(
            "basis {l} is both guessed and covered"
        )));
    }
    let all: BTreeSet<usize> = family.labels().collect();
    let union: BTreeSet<usize> = guessed.union(&covered).copied().collect();
    if union != all {
        return Err(Error::PartitionViolation(format!(
            "labels {:?} are neither guessed nor covered",
            all.difference(&union).collect::<Vec<_>>()
        )));
    }
    for (&l, &j) in guesses {
        family.state(l, j)?;
    }
    if let Some(&basis) = assignment.ill_conditioned_bases().first() {
        return Err(Error::IllConditioned { basis });
    }
    Ok(())
}

/// Success probability for an arbitrary pure preparation:
/// `Σ_guessed |⟨guess_i|Ψ⟩|² / (d+1) + Σ_covered Σ_j p(i,j) f(i,j) / (d+1)`
/// with `p(i, j) = |⟨ψ_j^i|Ψ⟩|²`.
pub fn success_exact_general(
    family: &MubFamily,
    preparation: &StateVector,
    guesses: &BTreeMap<usize, usize>,
    control: &OrthonormalBasis,
    assignment: &AssignmentMap,
) -> Result<f64> {
    let d = family.dim();
    if preparation.dim() != d || control.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: preparation.dim().max(control.dim()),
        });
    }
    check_partition(family, guesses, assignment)?;
    let weight = 1.0 / (d as f64 + 1.0);
    let mut total = 0.0;
    for (&label, &j) in guesses {
        total += weight * dot(family.state(label, j)?.amps(), preparation.amps()).norm_sqr();
    }
    for (&label, ks) in assignment.forward_map() {
        for (j, &k) in ks.iter().enumerate() {
            let psi = family.state(label, j)?;
            let p = dot(psi.amps(), preparation.amps()).norm_sqr();
            let f = dot(control.state(k)?.amps(), psi.amps()).norm_sqr();
            total += weight * p * f;
        }
    }
    Ok(total)
}

/// The role-exchanged counterpart of an eigenstate strategy.
pub fn complement_strategy(s: &ConventionalStrategy) -> Result<GeneralStrategy> {
    GeneralStrategy::from(s).complement()
}
