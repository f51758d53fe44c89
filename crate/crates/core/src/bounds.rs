//! Closed-form upper bounds on conventional success probabilities, and a
//! numerical maximizer for the per-outcome signal sum they rest on.
//!
//! Notation: `d` is the dimension, `r` the number of bases the physicist
//! answers by guessing from the preparation alone, `s = d + 1 − r` the
//! number answered through the control measurement, and
//! `p = (√d + d − 1) / (d√d)` the largest overlap a control state can have
//! simultaneously with one state from each of `d` unbiased bases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mub::MubFamily;
use crate::qstate::{dot, Amplitude, StateVector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundFormula {
    /// Eigenstate preparation bound `P(d)`.
    #[serde(rename = "EQ1")]
    Eq1,
    /// Guess part `P_g(d, r)`.
    A1,
    /// Control part `P_c(d, s)`.
    A7,
    /// Total for `r ∈ {0, d + 1}`.
    A8,
    /// Total for `r ∈ 1..=d`.
    A9,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d: usize,
    pub r: Option<usize>,
    pub value: f64,
    pub formula: BoundFormula,
}

fn check_dim(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    Ok(d as f64)
}

fn check_count(name: &'static str, value: usize, d: usize) -> Result<()> {
    if value > d + 1 {
        return Err(Error::OutOfRange {
            name,
            value,
            max: d + 1,
        });
    }
    Ok(())
}

/// `(2√d + d − 1) / (√d (1 + d))`.
pub fn bound_p(d: usize) -> Result<f64> {
    let df = check_dim(d)?;
    let sd = df.sqrt();
    Ok((2.0 * sd + df - 1.0) / (sd * (1.0 + df)))
}

/// `p = (√d + d − 1) / (d√d)`.
pub fn overlap_target(d: usize) -> Result<f64> {
    let df = check_dim(d)?;
    let sd = df.sqrt();
    Ok((sd + df - 1.0) / (df * sd))
}

/// `(√d + r − 1) / (√d (d + 1))`, zero for `r = 0`.
pub fn guess_bound(d: usize, r: usize) -> Result<f64> {
    let df = check_dim(d)?;
    check_count("r", r, d)?;
    if r == 0 {
        return Ok(0.0);
    }
    let sd = df.sqrt();
    Ok((sd + r as f64 - 1.0) / (sd * (df + 1.0)))
}

/// `(√d + s − 1) / ((d + 1) √d)`, zero for `s = 0`.
pub fn control_bound(d: usize, s: usize) -> Result<f64> {
    let df = check_dim(d)?;
    check_count("s", s, d)?;
    if s == 0 {
        return Ok(0.0);
    }
    let sd = df.sqrt();
    Ok((sd + s as f64 - 1.0) / ((df + 1.0) * sd))
}

/// `guess_bound(d, r) + control_bound(d, d + 1 − r)`.
pub fn total_bound(d: usize, r: usize) -> Result<f64> {
    check_dim(d)?;
    check_count("r", r, d)?;
    Ok(guess_bound(d, r)? + control_bound(d, d + 1 - r)?)
}

impl BoundReport {
    pub fn eigenstate(d: usize) -> Result<Self> {
        Ok(Self {
            d,
            r: None,
            value: bound_p(d)?,
            formula: BoundFormula::Eq1,
        })
    }

    /// Total bound for `r` guessed bases.
    pub fn split(d: usize, r: usize) -> Result<Self> {
        let formula = if r == 0 || r == d + 1 {
            BoundFormula::A8
        } else {
            BoundFormula::A9
        };
        Ok(Self {
            d,
            r: Some(r),
            value: total_bound(d, r)?,
            formula,
        })
    }
}

/// Rows of the `P(d)` table: `(d, bound_p(d))`.
pub fn bound_table(dims: &[usize]) -> Result<Vec<(usize, f64)>> {
    dims.iter().map(|&d| Ok((d, bound_p(d)?))).collect()
}

/// Dimensions listed in the reference bound table.
pub const TABLE1_DIMS: [usize; 6] = [2, 3, 4, 5, 8, 9];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedConfig {
    pub restarts: usize,
    /// Ascent step `η` in `χ ← normalize(χ + η A χ)`.
    pub step: f64,
    /// Stop once a step improves `F` by less than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RelaxedConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            step: 4.0,
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedMax {
    pub value: f64,
    pub maximizer: StateVector,
    /// `(label, j)` of the state attaining `max_j |⟨ψ_j^label|χ⟩|²`.
    pub selection: Vec<(usize, usize)>,
    /// `d · p`, which `value` can never exceed.
    pub relaxed_bound: f64,
    pub restart: usize,
}

impl RelaxedMax {
    pub fn gap(&self) -> f64 {
        self.relaxed_bound - self.value
    }
}

/// `F(χ) = Σ_{i ≠ excluded} max_j |⟨ψ_j^i|χ⟩|²` and the maximizing indices.
pub fn signal_sum(
    family: &MubFamily,
    excluded: usize,
    chi: &StateVector,
) -> (f64, Vec<(usize, usize)>) {
    let mut total = 0.0;
    let mut selection = Vec::with_capacity(family.dim());
    for b in family.bases().iter().filter(|b| b.label() != excluded) {
        let (j, p) = b
            .states()
            .iter()
            .map(|psi| dot(psi.amps(), chi.amps()).norm_sqr())
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (j, p)| if p > acc.1 { (j, p) } else { acc },
            );
        total += p;
        selection.push((b.label(), j));
    }
    (total, selection)
}

/// Maximizes [`signal_sum`] over unit `χ` by multi-start ascent.
///
/// Each step moves `χ` along `A χ` with `A = Σ_i |ψ^i⟩⟨ψ^i|` built from the
/// currently selected states and renormalizes; `F` never decreases. Restart
/// `n` draws its start from a ChaCha8 stream `n` seeded by `seed`, so the
/// result is independent of thread scheduling.
type Ascent = (f64, StateVector, Vec<(usize, usize)>);

pub fn relaxed_f_max(
    family: &MubFamily,
    excluded: usize,
    config: &RelaxedConfig,
    seed: u64,
) -> Result<RelaxedMax> {
    family.basis(excluded)?;
    let d = family.dim();
    let relaxed_bound = d as f64 * overlap_target(d)?;
    let restarts = config.restarts.max(1);
    let results: Vec<Ascent> = (0..restarts)
        .into_par_iter()
        .map(|n| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64);
            let start = StateVector::random(d, &mut rng);
            ascend(family, excluded, start, config)
        })
        .collect();
    let (restart, (value, maximizer, selection)) = results
        .into_iter()
        .enumerate()
        .fold(None, |best: Option<(usize, Ascent)>, (n, r)| match best {
            Some(b) if b.1 .0 >= r.0 => Some(b),
            _ => Some((n, r)),
        })
        .expect("at least one restart");
    Ok(RelaxedMax {
        value,
        maximizer,
        selection,
        relaxed_bound,
        restart,
    })
}

fn ascend(
    family: &MubFamily,
    excluded: usize,
    mut chi: StateVector,
    config: &RelaxedConfig,
) -> (f64, StateVector, Vec<(usize, usize)>) {
    let (mut value, mut selection) = signal_sum(family, excluded, &chi);
    for _ in 0..config.max_iter {
        let mut next: Vec<Amplitude> = chi.amps().to_vec();
        for &(label, j) in &selection {
            let psi = family
                .state(label, j)
                .expect("selection comes from the family");
            let c = dot(psi.amps(), chi.amps()) * config.step;
            next.iter_mut()
                .zip(psi.amps())
                .for_each(|(x, y)| *x += c * y);
        }
        let candidate = match StateVector::normalized(next) {
            Ok(s) => s,
            Err(_) => break,
        };
        let (v, sel) = signal_sum(family, excluded, &candidate);
        if v < value {
            break;
        }
        let improvement = v - value;
        chi = candidate;
        value = v;
        selection = sel;
        if improvement < config.tol {
            break;
        }
    }
    (value, chi, selection)
}
