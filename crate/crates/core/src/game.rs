//! Seeded Monte Carlo simulation of the full game.
//!
//! Every strategy is compiled into a [`PreparedGame`]: the king's outcome
//! distribution per basis, the control outcome distribution per collapsed
//! state, and the physicist's prediction per control outcome. Trials run in
//! fixed-size chunks, each on its own ChaCha8 stream, so results depend only
//! on the seed and the trial count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{
    best_rule, collapse_probability, conventional_cube_optimize, conventional_success,
    king_collapse, vaa_prediction_table, vaa_success, ConventionalRule, CubeGameSetup,
    CubeOptimizeConfig, Sign, TABLE5_ROWS,
};
use crate::qstate::{born_probability, spin_up_state, BlochDirection};
use crate::search::{certify_optimal_strategy, find_measurement_bases, find_signal_states};
use crate::strategy::{success_exact, OverlapTable};
use crate::{construct_mub, ConventionalStrategy, Error, Result, Tolerances};

pub const RNG_NAME: &str = "ChaCha8Rng";
pub const CHUNK_TRIALS: u64 = 1 << 16;

#[derive(Clone, Debug)]
pub enum GameStrategy {
    Mub(ConventionalStrategy),
    CubeVaa,
    CubeConventional {
        direction: BlochDirection,
        rule: ConventionalRule,
    },
}

impl GameStrategy {
    pub fn d2_optimal() -> Result<Self> {
        Ok(Self::Mub(ConventionalStrategy::qubit_optimal()?))
    }

    /// Preparation `|ψ_1^0⟩` with the first saturating two-qubit control basis.
    pub fn d4_optimal() -> Result<Self> {
        let family = construct_mub(4)?;
        let states = find_signal_states(&family)?;
        let bases = find_measurement_bases(&states);
        let first = bases
            .first()
            .ok_or_else(|| Error::MalformedFamily("no saturating basis".into()))?;
        Ok(Self::Mub(certify_optimal_strategy(
            first, &states, &family,
        )?))
    }

    pub fn cube_vaa() -> Self {
        Self::CubeVaa
    }

    /// The optimal spin measurement found by [`conventional_cube_optimize`].
    pub fn cube_conventional(config: &CubeOptimizeConfig) -> Result<Self> {
        let o = conventional_cube_optimize(&CubeGameSetup::new(), config)?;
        Ok(Self::CubeConventional {
            direction: o.best.direction,
            rule: o.best.rule,
        })
    }

    /// Spin measurement along `direction` with its best decision rule.
    pub fn cube_conventional_along(direction: BlochDirection) -> Self {
        let (rule, _) = best_rule(&CubeGameSetup::new(), &direction);
        Self::CubeConventional { direction, rule }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Mub(s) => format!("d{}", s.family().dim()),
            Self::CubeVaa => "cube-vaa".into(),
            Self::CubeConventional { .. } => "cube-conv".into(),
        }
    }

    pub fn exact_success(&self) -> Result<f64> {
        match self {
            Self::Mub(s) => Ok(success_exact(s)?.total),
            Self::CubeVaa => {
                let setup = CubeGameSetup::new();
                Ok(vaa_success(&setup, &vaa_prediction_table(&setup)?).total)
            }
            Self::CubeConventional { direction, rule } => {
                Ok(conventional_success(&CubeGameSetup::new(), direction, rule))
            }
        }
    }

    pub fn prepare(&self) -> Result<PreparedGame> {
        match self {
            Self::Mub(s) => prepare_mub(s),
            Self::CubeVaa => prepare_cube_vaa(),
            Self::CubeConventional { direction, rule } => {
                prepare_cube_conventional(direction, rule)
            }
        }
    }
}

/// Probability tables for one strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedGame {
    /// Label reported for each basis index (basis label, or diagonal number).
    pub labels: Vec<usize>,
    /// `[basis][outcome]`.
    pub king: Vec<Vec<f64>>,
    /// `[basis][outcome][control outcome]`.
    pub control: Vec<Vec<Vec<f64>>>,
    /// `[basis][control outcome]`: predicted king outcome.
    pub prediction: Vec<Vec<Option<usize>>>,
}

impl PreparedGame {
    fn validated(self) -> Result<Self> {
        for (b, row) in self.king.iter().enumerate() {
            checked_total(row)?;
            for dist in &self.control[b] {
                checked_total(dist)?;
            }
        }
        Ok(self)
    }

    pub fn bases(&self) -> usize {
        self.king.len()
    }
}

fn prepare_mub(s: &ConventionalStrategy) -> Result<PreparedGame> {
    let family = s.family();
    let d = family.dim();
    let overlaps = OverlapTable::new(family, s.control())?;
    let mut king = Vec::with_capacity(d + 1);
    let mut control = Vec::with_capacity(d + 1);
    let mut prediction = Vec::with_capacity(d + 1);
    for label in family.labels() {
        let basis = family.basis(label)?;
        king.push(
            basis
                .states()
                .iter()
                .map(|psi| born_probability(s.preparation(), psi))
                .collect::<Result<Vec<_>>>()?,
        );
        control.push(overlaps.basis(label).to_vec());
        prediction.push(if Some(label) == s.prep_basis() {
            vec![s.prep_index(); d]
        } else {
            (0..d)
                .map(|k| s.assignment().prediction(k, label))
                .collect()
        });
    }
    PreparedGame {
        labels: family.labels().collect(),
        king,
        control,
        prediction,
    }
    .validated()
}

fn prepare_cube_vaa() -> Result<PreparedGame> {
    let setup = CubeGameSetup::new();
    let table = vaa_prediction_table(&setup)?;
    let mut king = vec![vec![0.0; 2]; 4];
    let mut control = vec![vec![Vec::new(); 2]; 4];
    for &(a, sign) in TABLE5_ROWS.iter() {
        let s = sign_index(sign);
        king[a - 1][s] = collapse_probability(&setup, a, sign)?;
        let state = king_collapse(&setup, a, sign)?;
        control[a - 1][s] = setup
            .vaa()
            .iter()
            .map(|chi| born_probability(&state, chi))
            .collect::<Result<_>>()?;
    }
    let prediction = (0..4)
        .map(|a| {
            (0..4)
                .map(|k| Some(sign_index(table.signs[k][a])))
                .collect()
        })
        .collect();
    PreparedGame {
        labels: vec![1, 2, 3, 4],
        king,
        control,
        prediction,
    }
    .validated()
}

fn prepare_cube_conventional(m: &BlochDirection, rule: &ConventionalRule) -> Result<PreparedGame> {
    let setup = CubeGameSetup::new();
    let prep = spin_up_state(&setup.diagonals()[0])?;
    let up = spin_up_state(m)?;
    let down = spin_up_state(&-*m)?;
    let mut king = Vec::with_capacity(4);
    let mut control = Vec::with_capacity(4);
    let mut prediction = Vec::with_capacity(4);
    for a in 1..=4 {
        let n = setup.diagonal(a)?;
        let mut k_row = Vec::with_capacity(2);
        let mut c_row = Vec::with_capacity(2);
        for sign in Sign::BOTH {
            let collapsed = spin_up_state(&sign.apply(n))?;
            k_row.push(born_probability(&prep, &collapsed)?);
            c_row.push(vec![
                born_probability(&collapsed, &up)?,
                born_probability(&collapsed, &down)?,
            ]);
        }
        king.push(k_row);
        control.push(c_row);
        prediction.push(
            Sign::BOTH
                .iter()
                .map(|&o| Some(sign_index(rule.predict(a, o))))
                .collect(),
        );
    }
    PreparedGame {
        labels: vec![1, 2, 3, 4],
        king,
        control,
        prediction,
    }
    .validated()
}

fn sign_index(s: Sign) -> usize {
    match s {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

fn checked_total(probs: &[f64]) -> Result<f64> {
    let total: f64 = probs.iter().sum();
    if !total.is_finite()
        || probs.iter().any(|p| *p < 0.0)
        || (total - 1.0).abs() >= Tolerances::DEFAULT.comparison
    {
        return Err(Error::CorruptDistribution(total));
    }
    Ok(total)
}

/// Inverse-CDF sample from `probs`, renormalized when the total is within
/// `1e-10` of one.
pub fn sample_born<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    let total = checked_total(probs)?;
    Ok(sample_unchecked(probs, total, rng))
}

fn sample_unchecked<R: Rng + ?Sized>(probs: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub basis: usize,
    pub king_outcome: usize,
    pub control_outcome: usize,
    pub prediction: Option<usize>,
    pub success: bool,
}

/// One round: uniform basis, Born-sampled king outcome, Born-sampled control
/// outcome on the collapsed state, then the prediction.
pub fn play_once<R: Rng + ?Sized>(game: &PreparedGame, rng: &mut R) -> Transcript {
    let basis = rng.random_range(0..game.bases());
    let king_row = &game.king[basis];
    let king_outcome = sample_unchecked(king_row, king_row.iter().sum(), rng);
    let control_row = &game.control[basis][king_outcome];
    let control_outcome = sample_unchecked(control_row, control_row.iter().sum(), rng);
    let prediction = game.prediction[basis][control_outcome];
    Transcript {
        basis,
        king_outcome,
        control_outcome,
        prediction,
        success: prediction == Some(king_outcome),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameMode {
    D2,
    D4,
    CubeVaa,
    CubeConv,
}

impl GameMode {
    pub fn strategy(self) -> Result<GameStrategy> {
        match self {
            GameMode::D2 => GameStrategy::d2_optimal(),
            GameMode::D4 => GameStrategy::d4_optimal(),
            GameMode::CubeVaa => Ok(GameStrategy::cube_vaa()),
            GameMode::CubeConv => GameStrategy::cube_conventional(&CubeOptimizeConfig::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub mode: GameMode,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisTally {
    pub label: usize,
    pub trials: u64,
    pub successes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub strategy: String,
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: f64,
    pub per_basis: Vec<BasisTally>,
    pub seed: u64,
    pub rng: String,
}

impl GameResult {
    /// `|estimate − exact| / stderr`.
    pub fn z_score(&self) -> f64 {
        (self.estimate - self.exact).abs() / self.stderr
    }
}

pub fn run(config: &GameConfig) -> Result<GameResult> {
    simulate(&config.mode.strategy()?, config.trials, config.seed)
}

/// Plays `trials` rounds of `strategy` in parallel chunks.
pub fn simulate(strategy: &GameStrategy, trials: u64, seed: u64) -> Result<GameResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let game = strategy.prepare()?;
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let tallies: Vec<Vec<(u64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = CHUNK_TRIALS.min(trials - chunk * CHUNK_TRIALS);
            let mut t = vec![(0u64, 0u64); game.bases()];
            for _ in 0..n {
                let r = play_once(&game, &mut rng);
                t[r.basis].0 += 1;
                t[r.basis].1 += u64::from(r.success);
            }
            t
        })
        .collect();
    let mut per_basis: Vec<BasisTally> = game
        .labels
        .iter()
        .map(|&label| BasisTally {
            label,
            ..Default::default()
        })
        .collect();
    for t in &tallies {
        for (acc, (n, s)) in per_basis.iter_mut().zip(t) {
            acc.trials += n;
            acc.successes += s;
        }
    }
    let successes: u64 = per_basis.iter().map(|b| b.successes).sum();
    let estimate = successes as f64 / trials as f64;
    Ok(GameResult {
        strategy: strategy.name(),
        successes,
        trials,
        estimate,
        stderr: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        exact: strategy.exact_success()?,
        per_basis,
        seed,
        rng: RNG_NAME.into(),
    })
}
