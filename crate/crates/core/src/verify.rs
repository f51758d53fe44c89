//! The ten acceptance criteria, runnable from the library and the CLI.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_p, overlap_target, relaxed_f_max, total_bound, RelaxedConfig, TABLE1_DIMS,
};
use crate::cube::{
    always_guess_baseline, conventional_cube_optimize, conventional_optimum_closed_form,
    vaa_overlap_table, vaa_prediction_table, vaa_success, vaa_success_closed_form, CubeGameSetup,
    CubeOptimizeConfig, Sign,
};
use crate::game::{simulate, GameStrategy};
use crate::search::{
    certify_d3_impossible, certify_optimal_strategy, find_measurement_bases, find_signal_states,
    membership_counts, ImpossibilityConfig,
};
use crate::strategy::{complement_strategy, success_exact};
use crate::tables::table3_from;
use crate::{
    certify_family, construct_mub, ConventionalStrategy, MubFamily, OrthonormalBasis, Result,
    StateVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    pub fn trials(self) -> u64 {
        match self {
            Profile::Quick => 100_000,
            Profile::Full => 1_000_000,
        }
    }
}

/// Deliberate corruptions used to check that verification can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fault {
    /// Negates one amplitude of `|ψ_2^3⟩` in the two-qubit family.
    Table2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2}: {} ({:.0} ms) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed_ms,
            self.detail
        )
    }
}

/// Table 1 as printed.
pub const TABLE1_PRINTED: [f64; 6] = [0.9024, 0.7887, 0.7000, 0.6315, 0.4972, 0.4667];

/// Table 3 as printed: `(i, j, k, l)` 1-based and the phases `b, c, d`.
pub const TABLE3_PRINTED: [([usize; 4], [&str; 3]); 32] = [
    ([1, 1, 1, 1], ["-i", "-i", "-i"]),
    ([1, 1, 2, 2], ["-i", "1", "1"]),
    ([1, 2, 3, 1], ["1", "1", "-i"]),
    ([1, 2, 4, 2], ["1", "i", "1"]),
    ([1, 3, 1, 3], ["1", "-i", "1"]),
    ([1, 3, 2, 4], ["1", "1", "i"]),
    ([1, 4, 3, 3], ["i", "1", "1"]),
    ([1, 4, 4, 4], ["i", "i", "i"]),
    ([2, 1, 1, 4], ["1", "1", "-i"]),
    ([2, 1, 2, 3], ["1", "i", "1"]),
    ([2, 2, 3, 4], ["-i", "-i", "-i"]),
    ([2, 2, 4, 3], ["-i", "1", "1"]),
    ([2, 3, 1, 2], ["i", "1", "1"]),
    ([2, 3, 2, 1], ["i", "i", "i"]),
    ([2, 4, 3, 2], ["1", "-i", "1"]),
    ([2, 4, 4, 1], ["1", "1", "i"]),
    ([3, 1, 3, 2], ["1", "1", "i"]),
    ([3, 1, 4, 1], ["1", "-i", "1"]),
    ([3, 2, 1, 2], ["i", "i", "i"]),
    ([3, 2, 2, 1], ["i", "1", "1"]),
    ([3, 3, 3, 4], ["-i", "1", "1"]),
    ([3, 3, 4, 3], ["-i", "-i", "-i"]),
    ([3, 4, 1, 4], ["1", "i", "1"]),
    ([3, 4, 2, 3], ["1", "1", "-i"]),
    ([4, 1, 3, 3], ["i", "i", "i"]),
    ([4, 1, 4, 4], ["i", "1", "1"]),
    ([4, 2, 1, 3], ["1", "1", "i"]),
    ([4, 2, 2, 4], ["1", "-i", "1"]),
    ([4, 3, 3, 1], ["1", "i", "1"]),
    ([4, 3, 4, 2], ["1", "1", "-i"]),
    ([4, 4, 1, 1], ["-i", "1", "1"]),
    ([4, 4, 2, 2], ["-i", "-i", "-i"]),
];

/// Table 4 as printed, in signal-state numbers.
pub const TABLE4_PRINTED: [[usize; 4]; 32] = [
    [1, 11, 22, 32],
    [1, 11, 24, 30],
    [1, 12, 21, 32],
    [1, 15, 22, 28],
    [2, 11, 22, 31],
    [2, 12, 21, 31],
    [2, 12, 23, 29],
    [2, 16, 21, 27],
    [3, 9, 22, 32],
    [3, 9, 24, 30],
    [3, 10, 23, 30],
    [3, 13, 24, 26],
    [4, 9, 24, 29],
    [4, 10, 21, 31],
    [4, 10, 23, 29],
    [4, 14, 23, 25],
    [5, 11, 18, 32],
    [5, 15, 18, 28],
    [5, 15, 20, 26],
    [5, 16, 17, 28],
    [6, 12, 17, 31],
    [6, 15, 18, 27],
    [6, 16, 17, 27],
    [6, 16, 19, 25],
    [7, 9, 20, 30],
    [7, 13, 18, 28],
    [7, 13, 20, 26],
    [7, 14, 19, 26],
    [8, 10, 19, 29],
    [8, 13, 20, 25],
    [8, 14, 17, 27],
    [8, 14, 19, 25],
];

/// Table 5 as printed, rows `(n1,n4), (−n1,−n4), …, (−n4,−n1)`.
pub const TABLE5_PRINTED: [[f64; 4]; 8] = [
    [0.311, 0.311, 0.311, 0.0669],
    [0.0223, 0.0223, 0.0223, 0.933],
    [0.0223, 0.933, 0.0223, 0.0223],
    [0.311, 0.0669, 0.311, 0.311],
    [0.311, 0.311, 0.0669, 0.311],
    [0.0223, 0.0223, 0.933, 0.0223],
    [0.933, 0.0223, 0.0223, 0.0223],
    [0.0669, 0.311, 0.311, 0.311],
];

pub fn two_qubit_family(fault: Option<Fault>) -> Result<MubFamily> {
    let family = construct_mub(4)?;
    match fault {
        None => Ok(family),
        Some(Fault::Table2) => {
            let basis = family.basis(3)?;
            let mut states = basis.states().to_vec();
            let mut amps = states[1].amps().to_vec();
            amps[2] = -amps[2];
            states[1] = StateVector::new(amps)?;
            family.with_basis_replaced(3, OrthonormalBasis::assemble(3, states)?)
        }
    }
}

struct Check {
    passed: bool,
    detail: String,
}

fn run_one(
    id: usize,
    title: &str,
    budget: Option<Duration>,
    f: impl FnOnce() -> Result<Check>,
) -> CriterionOutcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(c) => (c.passed, c.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = budget {
        if elapsed > b {
            passed = false;
            detail.push_str(&format!("; over budget {} ms", b.as_millis()));
        }
    }
    CriterionOutcome {
        id,
        title: title.into(),
        passed,
        detail,
        elapsed_ms: elapsed.as_secs_f64() * 1e3,
    }
}

pub fn run_criteria(profile: Profile, seed: u64, fault: Option<Fault>) -> Vec<CriterionOutcome> {
    vec![
        run_one(
            1,
            "bound table",
            Some(Duration::from_millis(1)),
            criterion_bound_table,
        ),
        run_one(
            2,
            "split-strategy identities",
            Some(Duration::from_millis(1)),
            criterion_identities,
        ),
        run_one(3, "MUB certification", Some(Duration::from_secs(1)), || {
            criterion_certification(fault)
        }),
        run_one(
            4,
            "d=4 exhaustive search",
            Some(Duration::from_secs(10)),
            criterion_search,
        ),
        run_one(5, "d=4 optimum", None, criterion_d4_optimum),
        run_one(
            6,
            "d=3 impossibility",
            Some(Duration::from_secs(60)),
            || criterion_d3(seed),
        ),
        run_one(7, "cube VAA solution", None, criterion_cube_vaa),
        run_one(
            8,
            "cube conventional optimum",
            None,
            criterion_cube_conventional,
        ),
        run_one(
            9,
            "Monte Carlo oracle",
            Some(Duration::from_secs(60)),
            || criterion_monte_carlo(profile, seed),
        ),
        run_one(10, "property suites", None, || criterion_properties(seed)),
    ]
}

fn criterion_bound_table() -> Result<Check> {
    let mut values = Vec::new();
    for d in TABLE1_DIMS {
        values.push(bound_p(d)?);
    }
    let passed = values
        .iter()
        .zip(TABLE1_PRINTED)
        .all(|(v, printed)| format!("{v:.4}") == format!("{printed:.4}"));
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    Ok(Check {
        passed,
        detail: shown.join(" "),
    })
}

fn criterion_identities() -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut edges_ok = true;
    for d in 2..=9usize {
        let p = bound_p(d)?;
        for r in 1..=d {
            worst = worst.max((total_bound(d, r)? - p).abs());
        }
        let df = d as f64;
        let edge = (1.0 + df.sqrt()) / (1.0 + df);
        let lo = total_bound(d, 0)?;
        let hi = total_bound(d, d + 1)?;
        edges_ok &= (lo - edge).abs() < 1e-14 && (hi - edge).abs() < 1e-14 && edge < p;
    }
    Ok(Check {
        passed: worst <= 1e-14 && edges_ok,
        detail: format!("max |P(d,r) - bound| = {worst:.1e}"),
    })
}

fn criterion_certification(fault: Option<Fault>) -> Result<Check> {
    let mut families = Vec::new();
    for d in [2, 3, 5, 7, 11, 13] {
        families.push(construct_mub(d)?);
    }
    families.push(two_qubit_family(fault)?);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for f in &families {
        let r = certify_family(f);
        worst = worst
            .max(r.max_orthonormality_deviation)
            .max(r.max_unbiasedness_deviation);
        if !r.passed {
            let site = r.unbiasedness_site.or(r.orthonormality_site);
            failures.push(format!(
                "d={}: orthonormality {:.3}, unbiasedness {:.3}, at {:?}",
                r.dim, r.max_orthonormality_deviation, r.max_unbiasedness_deviation, site
            ));
        }
    }
    Ok(if failures.is_empty() {
        Check {
            passed: true,
            detail: format!("max deviation {worst:.1e}"),
        }
    } else {
        Check {
            passed: false,
            detail: failures.join("; "),
        }
    })
}

fn criterion_search() -> Result<Check> {
    let family = construct_mub(4)?;
    let states = find_signal_states(&family)?;
    let bases = find_measurement_bases(&states);
    let found: BTreeSet<([usize; 4], [String; 3])> = table3_from(&states)
        .iter()
        .zip(&states)
        .map(|(row, s)| {
            (
                [row.i, row.j, row.k, row.l],
                s.phase_symbols().map(String::from),
            )
        })
        .collect();
    let printed: BTreeSet<([usize; 4], [String; 3])> = TABLE3_PRINTED
        .iter()
        .map(|(idx, ph)| (*idx, ph.map(String::from)))
        .collect();
    let quads: BTreeSet<[usize; 4]> = bases.iter().map(|b| b.state_numbers()).collect();
    let printed_quads: BTreeSet<[usize; 4]> = TABLE4_PRINTED.iter().copied().collect();
    let counts = membership_counts(&bases, states.len());
    let passed = states.len() == 32
        && found == printed
        && bases.len() == 32
        && quads == printed_quads
        && counts.iter().all(|&c| c == 4)
        && quads.contains(&[1, 11, 22, 32]);
    Ok(Check {
        passed,
        detail: format!(
            "{} states (table match: {}), {} bases (table match: {})",
            states.len(),
            found == printed,
            bases.len(),
            quads == printed_quads
        ),
    })
}

fn criterion_d4_optimum() -> Result<Check> {
    let family = construct_mub(4)?;
    let states = find_signal_states(&family)?;
    let bases = find_measurement_bases(&states);
    let mut worst_total: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    let mut worst_complement: f64 = 0.0;
    for b in &bases {
        let s = certify_optimal_strategy(b, &states, &family)?;
        let r = success_exact(&s)?;
        worst_total = worst_total.max((r.total - 0.7).abs());
        for f in r.per_signal.values() {
            worst_f = worst_f.max((f - 2.5).abs());
        }
        worst_complement = worst_complement.max((complement_strategy(&s)?.success()? - 0.7).abs());
    }
    Ok(Check {
        passed: !bases.is_empty() && worst_total <= 1e-9 && worst_f <= 1e-9 && worst_complement <= 1e-9,
        detail: format!(
            "{} bases; max |P-0.7| = {worst_total:.1e}, max |F-2.5| = {worst_f:.1e}, complement {worst_complement:.1e}",
            bases.len()
        ),
    })
}

fn criterion_d3(seed: u64) -> Result<Check> {
    let family = construct_mub(3)?;
    let report = certify_d3_impossible(
        &family,
        &ImpossibilityConfig {
            seed,
            ..Default::default()
        },
    )?;
    let relaxed = relaxed_f_max(&family, 0, &RelaxedConfig::default(), seed)?;
    let target = 3.0 * overlap_target(3)?;
    let gap = target - relaxed.value;
    Ok(Check {
        passed: report.passed && report.tuples.len() == 27 && gap > 0.0,
        detail: format!(
            "worst-case min deviation {:.10} (delta {}), relaxed max F {:.6} vs 3p {:.6}, gap {:.6}",
            report.worst_case_min, report.delta, relaxed.value, target, gap
        ),
    })
}

fn criterion_cube_vaa() -> Result<Check> {
    let setup = CubeGameSetup::new();
    let table = vaa_overlap_table(&setup);
    let mut worst: f64 = 0.0;
    for (row, printed) in table.iter().zip(TABLE5_PRINTED) {
        for (v, p) in row.iter().zip(printed) {
            worst = worst.max((v - p).abs());
        }
    }
    let predictions = vaa_prediction_table(&setup)?;
    let success = vaa_success(&setup, &predictions);
    let wrong = 1.0 - vaa_success_closed_form();
    let mass_ok = success
        .wrong_mass
        .iter()
        .all(|w| (w - wrong).abs() <= 1e-10);
    let printed = format!("{:.3}", success.total);
    let row_ok = predictions.signs[0] == [Sign::Plus, Sign::Minus, Sign::Plus, Sign::Plus];
    Ok(Check {
        passed: worst <= 5e-4 && mass_ok && printed == "0.933" && row_ok,
        detail: format!(
            "max table deviation {worst:.1e}, success {printed}, chi_1 row {:?}",
            predictions.signs[0]
        ),
    })
}

fn criterion_cube_conventional() -> Result<Check> {
    let setup = CubeGameSetup::new();
    let o = conventional_cube_optimize(&setup, &CubeOptimizeConfig::default())?;
    let baseline = always_guess_baseline(&setup);
    let passed = (o.best.value - conventional_optimum_closed_form()).abs() <= 1e-4
        && (o.best.angle_deg - 100.0).abs() <= 0.5
        && o.best.great_circle_partner.is_some()
        && o.best.value > baseline
        && o.best.value >= o.grid_best;
    Ok(Check {
        passed,
        detail: format!(
            "value {:.6}, angle {:.3} deg, great circle with n{}, baseline {:.3}",
            o.best.value,
            o.best.angle_deg,
            o.best
                .great_circle_partner
                .map_or("?".into(), |k| k.to_string()),
            baseline
        ),
    })
}

fn criterion_monte_carlo(profile: Profile, seed: u64) -> Result<Check> {
    let strategies = [
        GameStrategy::d2_optimal()?,
        GameStrategy::d4_optimal()?,
        GameStrategy::cube_vaa(),
        GameStrategy::cube_conventional(&CubeOptimizeConfig::default())?,
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for s in &strategies {
        let r = simulate(s, profile.trials(), seed)?;
        let ok = r.z_score() <= 3.0;
        passed &= ok;
        parts.push(format!(
            "{} {:.4} (z {:.2})",
            r.strategy,
            r.estimate,
            r.z_score()
        ));
    }
    Ok(Check {
        passed,
        detail: parts.join(", "),
    })
}

fn criterion_properties(seed: u64) -> Result<Check> {
    use rand::Rng;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_regroup: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in [2, 3, 4] {
        let family = construct_mub(d)?;
        let pd = overlap_target(d)? * d as f64;
        for _ in 0..1000 {
            let control = OrthonormalBasis::random(d, 0, &mut rng);
            let prep_basis = rng.random_range(0..=d);
            let prep_index = rng.random_range(0..d);
            let s =
                ConventionalStrategy::eigenstate(family.clone(), prep_basis, prep_index, control)?;
            let r = success_exact(&s)?;
            for f in r.per_signal.values() {
                worst_excess = worst_excess.max(f - pd);
            }
            worst_regroup = worst_regroup.max((r.total - r.regrouped_total()).abs());
        }
    }
    let strategy = GameStrategy::d4_optimal()?;
    let a = simulate(&strategy, 200_000, seed)?;
    let b = simulate(&strategy, 200_000, seed)?;
    let deterministic = a == b && a.estimate.to_bits() == b.estimate.to_bits();
    Ok(Check {
        passed: worst_excess <= 1e-9 && worst_regroup <= 1e-12 && deterministic,
        detail: format!(
            "max F(k) - pd = {worst_excess:.3e}, regrouping error {worst_regroup:.1e}, deterministic {deterministic}"
        ),
    })
}
