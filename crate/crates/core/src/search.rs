//! Exhaustive search for control bases that saturate the eigenstate bound.
//!
//! A saturating control state is an equal-weight superposition of one state
//! from each non-preparation basis whose overlap with each of those states
//! is exactly `p`. In `d = 4` such "signal states" exist and combine into
//! complete orthonormal control bases; in `d = 3` no choice of phases works.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::overlap_target;
use crate::mub::{MubFamily, OrthonormalBasis};
use crate::optim::NelderMead;
use crate::qstate::{dot, Amplitude, StateVector};
use crate::strategy::{AssignmentMap, ConventionalStrategy};
use crate::{Error, Result, Tolerances};

/// Phases scanned for the coefficients of bases 2, 3 and 4: `1, i, −1, −i`.
pub const QUARTER_TURNS: [Amplitude; 4] = [
    Amplitude::new(1.0, 0.0),
    Amplitude::new(0.0, 1.0),
    Amplitude::new(-1.0, 0.0),
    Amplitude::new(0.0, -1.0),
];

/// `(1/√10)(|ψ_i^1⟩ + b|ψ_j^2⟩ + c|ψ_k^3⟩ + d|ψ_l^4⟩)` with all four overlaps
/// equal to `5/8`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalState {
    /// 1-based position in canonical order.
    pub number: usize,
    /// 0-based state indices `(i, j, k, l)` into bases 1..=4.
    pub indices: [usize; 4],
    /// Coefficients `(b, c, d)`; the basis-1 coefficient is fixed to 1.
    pub phases: [Amplitude; 3],
    pub vector: StateVector,
}

impl SignalState {
    /// `|⟨ψ^m|χ⟩|²` for the four constituent states.
    pub fn overlaps(&self, family: &MubFamily) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (m, o) in out.iter_mut().enumerate() {
            let psi = family.state(m + 1, self.indices[m])?;
            *o = dot(psi.amps(), self.vector.amps()).norm_sqr();
        }
        Ok(out)
    }

    /// Human-readable phase symbols, e.g. `["-i", "1", "1"]`.
    pub fn phase_symbols(&self) -> [&'static str; 3] {
        self.phases.map(phase_symbol)
    }
}

pub fn phase_symbol(z: Amplitude) -> &'static str {
    const NAMES: [&str; 4] = ["1", "i", "-1", "-i"];
    QUARTER_TURNS
        .iter()
        .position(|q| (q - z).norm() < 1e-9)
        .map(|n| NAMES[n])
        .unwrap_or("?")
}

fn signal_vector(
    family: &MubFamily,
    indices: &[usize; 4],
    phases: &[Amplitude; 3],
) -> Result<Vec<Amplitude>> {
    let scale = 1.0 / 10f64.sqrt();
    let mut v = vec![Amplitude::new(0.0, 0.0); 4];
    for m in 0..4 {
        let coeff = if m == 0 {
            Amplitude::new(1.0, 0.0)
        } else {
            phases[m - 1]
        } * scale;
        let psi = family.state(m + 1, indices[m])?;
        v.iter_mut()
            .zip(psi.amps())
            .for_each(|(x, y)| *x += coeff * y);
    }
    Ok(v)
}

fn require_dim(family: &MubFamily, expected: usize) -> Result<()> {
    if family.dim() != expected {
        return Err(Error::WrongDimension {
            expected,
            got: family.dim(),
        });
    }
    Ok(())
}

fn index_tuples(d: usize, len: u32) -> impl Iterator<Item = Vec<usize>> {
    (0..d.pow(len)).map(move |mut n| {
        let mut t = vec![0; len as usize];
        for slot in t.iter_mut().rev() {
            *slot = n % d;
            n /= d;
        }
        t
    })
}

type RawSolution = ([usize; 4], [Amplitude; 3], Vec<Amplitude>);

/// Scans all 256 index tuples and 64 quarter-turn phase triples.
///
/// Keeps the combinations whose vector is unit norm within `1e-10` and whose
/// four overlaps equal `5/8` within `1e-9`, ordered by `(i, j, k, l)`.
pub fn find_signal_states(family: &MubFamily) -> Result<Vec<SignalState>> {
    require_dim(family, 4)?;
    let tol = Tolerances::DEFAULT;
    let target = overlap_target(4)?;
    let tuples: Vec<[usize; 4]> = index_tuples(4, 4)
        .map(|t| [t[0], t[1], t[2], t[3]])
        .collect();
    let found: Vec<Vec<RawSolution>> = tuples
        .par_iter()
        .map(|indices| -> Result<_> {
            let mut hits = Vec::new();
            for b in QUARTER_TURNS {
                for c in QUARTER_TURNS {
                    for d in QUARTER_TURNS {
                        let phases = [b, c, d];
                        let v = signal_vector(family, indices, &phases)?;
                        let norm_sqr: f64 = v.iter().map(|a| a.norm_sqr()).sum();
                        if (norm_sqr - 1.0).abs() > tol.comparison {
                            continue;
                        }
                        let ok = (0..4).all(|m| {
                            let psi = family.state(m + 1, indices[m]).unwrap();
                            (dot(psi.amps(), &v).norm_sqr() - target).abs() <= tol.search
                        });
                        if ok {
                            hits.push((*indices, phases, v));
                        }
                    }
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    found
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(n, (indices, phases, v))| {
            Ok(SignalState {
                number: n + 1,
                indices,
                phases,
                vector: StateVector::normalized(v)?,
            })
        })
        .collect()
}

/// Four mutually orthogonal signal states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementBasis4 {
    /// 1-based position in canonical order.
    pub number: usize,
    /// 0-based positions in the signal-state list, ascending.
    pub members: [usize; 4],
}

impl MeasurementBasis4 {
    /// Signal-state numbers as printed in tables (1-based).
    pub fn state_numbers(&self) -> [usize; 4] {
        self.members.map(|m| m + 1)
    }

    pub fn control_basis(&self, states: &[SignalState]) -> Result<OrthonormalBasis> {
        let vectors = self
            .members
            .iter()
            .map(|&m| {
                states
                    .get(m)
                    .map(|s| s.vector.clone())
                    .ok_or(Error::IndexOutOfRange {
                        what: "signal state",
                        index: m,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        OrthonormalBasis::new(self.number, vectors)
    }
}

/// Checks every 4-subset of `states` for pairwise orthogonality within `1e-9`.
pub fn find_measurement_bases(states: &[SignalState]) -> Vec<MeasurementBasis4> {
    let n = states.len();
    let tol = Tolerances::DEFAULT.search;
    let orth: Vec<Vec<bool>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    a != b && dot(states[a].vector.amps(), states[b].vector.amps()).norm() < tol
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let q = [a, b, c, d];
                    let all = (0..4).all(|x| (x + 1..4).all(|y| orth[q[x]][q[y]]));
                    if all {
                        out.push(MeasurementBasis4 {
                            number: out.len() + 1,
                            members: q,
                        });
                    }
                }
            }
        }
    }
    out
}

/// How many bases each signal state belongs to.
pub fn membership_counts(bases: &[MeasurementBasis4], n_states: usize) -> Vec<usize> {
    let mut counts = vec![0; n_states];
    for b in bases {
        for &m in &b.members {
            counts[m] += 1;
        }
    }
    counts
}

/// The strategy that prepares `|ψ_1^0⟩`, measures in `basis` and, on outcome
/// `χ_k` with indices `(i, j, k, l)`, names state `i` in basis 1, `j` in
/// basis 2, `k` in basis 3 and `l` in basis 4.
pub fn certify_optimal_strategy(
    basis: &MeasurementBasis4,
    states: &[SignalState],
    family: &MubFamily,
) -> Result<ConventionalStrategy> {
    require_dim(family, 4)?;
    let control = basis.control_basis(states)?;
    let mut forward: BTreeMap<usize, Vec<usize>> =
        (1..=4).map(|l| (l, vec![usize::MAX; 4])).collect();
    for (k, &m) in basis.members.iter().enumerate() {
        for (slot, &j) in states[m].indices.iter().enumerate() {
            let label = slot + 1;
            let entry = &mut forward.get_mut(&label).unwrap()[j];
            if *entry != usize::MAX {
                return Err(Error::IllConditioned { basis: label });
            }
            *entry = k;
        }
    }
    if let Some((&label, _)) = forward.iter().find(|(_, ks)| ks.contains(&usize::MAX)) {
        return Err(Error::IllConditioned { basis: label });
    }
    let assignment = AssignmentMap::new(4, forward)?;
    ConventionalStrategy::new(
        family.clone(),
        family.state(0, 0)?.clone(),
        Some(0),
        control,
        assignment,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeCheck {
    /// Largest phase movement (radians) of a lattice solution under local
    /// continuous refinement.
    pub max_shift: f64,
    /// Largest residual max-deviation of a lattice solution after refinement.
    pub max_residual: f64,
    /// Tuples outside the lattice solution set that reached a deviation
    /// below `1e-6` under continuous phases.
    pub additional: Vec<[usize; 4]>,
    /// Smallest max-deviation reached by any tuple outside the solution set.
    pub min_off_lattice_deviation: f64,
}

fn signal_deviation(family: &MubFamily, indices: &[usize; 4], angles: &[f64], target: f64) -> f64 {
    let phases = [0, 1, 2].map(|n| Amplitude::from_polar(1.0, angles[n]));
    let v = signal_vector(family, indices, &phases).unwrap();
    let norm_sqr: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    (0..4)
        .map(|m| {
            let psi = family.state(m + 1, indices[m]).unwrap();
            (dot(psi.amps(), &v).norm_sqr() / norm_sqr - target).abs()
        })
        .fold(0.0, f64::max)
}

/// Confirms the quarter-turn lattice holds every solution: refines each
/// solution with continuous phases, then searches every other tuple on a
/// coarse `grid_deg` phase grid followed by local refinement.
pub fn verify_phase_lattice(
    family: &MubFamily,
    solutions: &[SignalState],
    grid_deg: f64,
) -> Result<LatticeCheck> {
    require_dim(family, 4)?;
    let target = overlap_target(4)?;
    let nm = NelderMead {
        initial_step: 1e-3,
        ..Default::default()
    };
    let mut max_shift: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    for s in solutions {
        let start: Vec<f64> = s.phases.iter().map(|z| z.arg()).collect();
        let (x, v) = nm.minimize(|a| signal_deviation(family, &s.indices, a, target), &start);
        let shift = x
            .iter()
            .zip(&start)
            .map(|(a, b)| wrap_angle(a - b).abs())
            .fold(0.0, f64::max);
        max_shift = max_shift.max(shift);
        max_residual = max_residual.max(v);
    }
    let steps = (360.0 / grid_deg).round().max(1.0) as usize;
    let step = 2.0 * PI / steps as f64;
    let known: Vec<[usize; 4]> = solutions.iter().map(|s| s.indices).collect();
    let others: Vec<[usize; 4]> = index_tuples(4, 4)
        .map(|t| [t[0], t[1], t[2], t[3]])
        .filter(|t| !known.contains(t))
        .collect();
    let mins: Vec<([usize; 4], f64)> = others
        .par_iter()
        .map(|t| {
            let mut best = (f64::INFINITY, [0.0; 3]);
            for a in 0..steps {
                for b in 0..steps {
                    for c in 0..steps {
                        let x = [a as f64 * step, b as f64 * step, c as f64 * step];
                        let v = signal_deviation(family, t, &x, target);
                        if v < best.0 {
                            best = (v, x);
                        }
                    }
                }
            }
            let refine = NelderMead {
                initial_step: step / 2.0,
                ..Default::default()
            };
            let (_, v) = refine.minimize(|a| signal_deviation(family, t, a, target), &best.1);
            (*t, v)
        })
        .collect();
    let additional = mins
        .iter()
        .filter(|(_, v)| *v < 1e-6)
        .map(|(t, _)| *t)
        .collect();
    let min_off_lattice_deviation = mins.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    Ok(LatticeCheck {
        max_shift,
        max_residual,
        additional,
        min_off_lattice_deviation,
    })
}

fn wrap_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityConfig {
    pub delta: f64,
    pub starts: usize,
    pub grid_deg: f64,
    pub seed: u64,
}

impl Default for ImpossibilityConfig {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            starts: 32,
            grid_deg: 0.5,
            seed: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleDeviation {
    /// 0-based state indices into bases 1..=3.
    pub indices: [usize; 3],
    /// Minimum over the phase grid of the max overlap deviation.
    pub grid_min: f64,
    /// Minimum reached by multi-start local optimization.
    pub continuous_min: f64,
    /// `min(grid_min, continuous_min)`.
    pub min_deviation: f64,
    /// Phases of bases 2 and 3 (radians) at the minimum.
    pub best_phases: [f64; 2],
    /// Deviation of `|⟨ψ^1|χ⟩|²` from `p` when the phases are chosen to
    /// align the overlaps with `ψ^1` and `N = [d + √d(d−1)]^{-1/2}`.
    pub single_overlap_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityReport {
    pub target: f64,
    pub delta: f64,
    pub tuples: Vec<TupleDeviation>,
    pub worst_case_min: f64,
    pub passed: bool,
}

/// For each of the 27 tuples, the smallest achievable maximum deviation of
/// the three overlaps of the normalized `χ = ψ^1 + e^{iα}ψ^2 + e^{iβ}ψ^3`
/// from `p`. Passes iff every tuple stays above `delta`.
pub fn certify_d3_impossible(
    family: &MubFamily,
    config: &ImpossibilityConfig,
) -> Result<ImpossibilityReport> {
    require_dim(family, 3)?;
    let target = overlap_target(3)?;
    let steps = (360.0 / config.grid_deg).round().max(1.0) as usize;
    let step = 2.0 * PI / steps as f64;
    let tuples: Vec<[usize; 3]> = index_tuples(3, 3).map(|t| [t[0], t[1], t[2]]).collect();
    let results = tuples
        .par_iter()
        .enumerate()
        .map(|(n, indices)| -> Result<TupleDeviation> {
            let psis = [0, 1, 2].map(|m| family.state(m + 1, indices[m]).unwrap().amps().to_vec());
            let deviation = |angles: &[f64]| triple_deviation(&psis, angles, target);

            let mut grid = (f64::INFINITY, [0.0, 0.0]);
            for a in 0..steps {
                for b in 0..steps {
                    let x = [a as f64 * step, b as f64 * step];
                    let v = deviation(&x);
                    if v < grid.0 {
                        grid = (v, x);
                    }
                }
            }

            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(n as u64);
            let nm = NelderMead {
                initial_step: 0.3,
                ..Default::default()
            };
            let mut cont = (f64::INFINITY, [0.0, 0.0]);
            let starts = std::iter::once(grid.1.to_vec()).chain((0..config.starts).map(|_| {
                vec![
                    rng.random::<f64>() * 2.0 * PI,
                    rng.random::<f64>() * 2.0 * PI,
                ]
            }));
            for x0 in starts {
                let (x, v) = nm.minimize(deviation, &x0);
                if v < cont.0 {
                    cont = (v, [x[0], x[1]]);
                }
            }

            let (min_deviation, best) = if cont.0 <= grid.0 { cont } else { grid };
            Ok(TupleDeviation {
                indices: *indices,
                grid_min: grid.0,
                continuous_min: cont.0,
                min_deviation,
                best_phases: best.map(|a| a.rem_euclid(2.0 * PI)),
                single_overlap_deviation: single_overlap_deviation(&psis, target),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_case_min = results
        .iter()
        .map(|t| t.min_deviation)
        .fold(f64::INFINITY, f64::min);
    Ok(ImpossibilityReport {
        target,
        delta: config.delta,
        passed: worst_case_min > config.delta,
        worst_case_min,
        tuples: results,
    })
}

fn triple_deviation(psis: &[Vec<Amplitude>; 3], angles: &[f64], target: f64) -> f64 {
    let coeffs = [
        Amplitude::new(1.0, 0.0),
        Amplitude::from_polar(1.0, angles[0]),
        Amplitude::from_polar(1.0, angles[1]),
    ];
    let mut v = vec![Amplitude::new(0.0, 0.0); psis[0].len()];
    for (c, psi) in coeffs.iter().zip(psis) {
        v.iter_mut().zip(psi).for_each(|(x, y)| *x += c * y);
    }
    let norm_sqr: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    psis.iter()
        .map(|psi| (dot(psi, &v).norm_sqr() / norm_sqr - target).abs())
        .fold(0.0, f64::max)
}

/// Chooses the phases that make every term of `⟨ψ^1|χ⟩` real and positive.
fn single_overlap_deviation(psis: &[Vec<Amplitude>; 3], target: f64) -> f64 {
    let d = psis[0].len() as f64;
    let n = 1.0 / (d + d.sqrt() * (d - 1.0)).sqrt();
    let mut overlap = Amplitude::new(0.0, 0.0);
    for (m, psi) in psis.iter().enumerate() {
        let o = dot(&psis[0], psi);
        let phase = if m == 0 {
            Amplitude::new(1.0, 0.0)
        } else {
            Amplitude::from_polar(1.0, -o.arg())
        };
        overlap += phase * o;
    }
    ((n * overlap).norm_sqr() - target).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct_mub;
    use crate::strategy::success_exact;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tuple_enumeration_order() {
        let t: Vec<Vec<usize>> = index_tuples(3, 2).collect();
        assert_eq!(t.len(), 9);
        assert_eq!(t[0], vec![0, 0]);
        assert_eq!(t[1], vec![0, 1]);
        assert_eq!(t[8], vec![2, 2]);
    }

    #[test]
    fn wrong_dimension_rejected() {
        let f3 = construct_mub(3).unwrap();
        assert!(matches!(
            find_signal_states(&f3),
            Err(Error::WrongDimension {
                expected: 4,
                got: 3
            })
        ));
        let f4 = construct_mub(4).unwrap();
        assert!(certify_d3_impossible(&f4, &ImpossibilityConfig::default()).is_err());
    }

    #[test]
    fn signal_states_first_rows() {
        let f = construct_mub(4).unwrap();
        let states = find_signal_states(&f).unwrap();
        assert_eq!(states.len(), 32);
        assert_eq!(states[0].indices, [0, 0, 0, 0]);
        assert_eq!(states[0].phase_symbols(), ["-i", "-i", "-i"]);
        assert_eq!(states[1].indices, [0, 0, 1, 1]);
        assert_eq!(states[1].phase_symbols(), ["-i", "1", "1"]);
        for s in &states {
            for o in s.overlaps(&f).unwrap() {
                assert!((o - 0.625).abs() < 1e-9);
            }
            assert!((s.vector.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bases_and_optimal_strategy() {
        let f = construct_mub(4).unwrap();
        let states = find_signal_states(&f).unwrap();
        let bases = find_measurement_bases(&states);
        assert_eq!(bases.len(), 32);
        assert_eq!(bases[0].state_numbers(), [1, 11, 22, 32]);
        assert!(membership_counts(&bases, 32).iter().all(|&c| c == 4));
        let s = certify_optimal_strategy(&bases[0], &states, &f).unwrap();
        let b = success_exact(&s).unwrap();
        assert_abs_diff_eq!(b.total, 0.7, epsilon = 1e-9);
        for fk in b.per_signal.values() {
            assert_abs_diff_eq!(*fk, 2.5, epsilon = 1e-9);
        }
        // Outcome k predicts exactly the indices of the k-th signal state.
        for (k, &m) in bases[0].members.iter().enumerate() {
            for label in 1..=4 {
                assert_eq!(
                    s.assignment().prediction(k, label),
                    Some(states[m].indices[label - 1])
                );
            }
        }
    }

    #[test]
    fn non_orthogonal_quadruple_is_rejected() {
        let f = construct_mub(4).unwrap();
        let states = find_signal_states(&f).unwrap();
        let bogus = MeasurementBasis4 {
            number: 99,
            members: [0, 1, 2, 3],
        };
        assert!(certify_optimal_strategy(&bogus, &states, &f).is_err());
    }

    #[test]
    fn single_overlap_can_always_be_fixed() {
        let f = construct_mub(3).unwrap();
        let target = overlap_target(3).unwrap();
        for t in index_tuples(3, 3) {
            let psis = [0, 1, 2].map(|m| f.state(m + 1, t[m]).unwrap().amps().to_vec());
            assert!(single_overlap_deviation(&psis, target) < 1e-12);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(wrap_angle(2.0 * PI + 0.1), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-0.1), -0.1, epsilon = 1e-12);
    }
}
