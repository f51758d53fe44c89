//! The qubit variant in which the king measures spin along one of the four
//! body diagonals of a cube.
//!
//! Diagonal indices `a` and VAA outcome indices `k` are 1-based throughout.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::optim::NelderMead;
use crate::qstate::{
    born_probability, dot, spin_up_state, tensor, Amplitude, BlochDirection, StateVector,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn apply(self, n: BlochDirection) -> BlochDirection {
        match self {
            Sign::Plus => n,
            Sign::Minus => -n,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Row order of the VAA overlap table: each diagonal, up then down.
pub const TABLE5_ROWS: [(usize, Sign); 8] = [
    (1, Sign::Plus),
    (1, Sign::Minus),
    (2, Sign::Plus),
    (2, Sign::Minus),
    (3, Sign::Plus),
    (3, Sign::Minus),
    (4, Sign::Plus),
    (4, Sign::Minus),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeGameSetup {
    diagonals: [BlochDirection; 4],
    bell: StateVector,
    vaa: [StateVector; 4],
    /// 1-based partner of each diagonal under reflection in the x-z plane.
    reflection_partner: [usize; 4],
}

impl CubeGameSetup {
    pub fn new() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let diagonals = [
            BlochDirection { x: s, y: s, z: s },
            BlochDirection { x: -s, y: s, z: s },
            BlochDirection { x: -s, y: -s, z: s },
            BlochDirection { x: s, y: -s, z: s },
        ];
        let r = 1.0 / 2f64.sqrt();
        let zero = Amplitude::new(0.0, 0.0);
        let bell = StateVector::from_amps_unchecked(vec![
            Amplitude::new(r, 0.0),
            zero,
            zero,
            Amplitude::new(r, 0.0),
        ]);
        let big = Amplitude::new(r, 0.0);
        let up = Amplitude::from_polar(0.5, PI / 4.0);
        let down = Amplitude::from_polar(0.5, -PI / 4.0);
        let vaa = [
            vec![big, up, down, zero],
            vec![big, -up, -down, zero],
            vec![zero, down, up, big],
            vec![zero, -down, -up, big],
        ]
        .map(StateVector::from_amps_unchecked);
        Self {
            diagonals,
            bell,
            vaa,
            reflection_partner: [4, 3, 2, 1],
        }
    }

    pub fn diagonal(&self, a: usize) -> Result<BlochDirection> {
        check_index("diagonal", a)?;
        Ok(self.diagonals[a - 1])
    }

    pub fn diagonals(&self) -> &[BlochDirection; 4] {
        &self.diagonals
    }

    pub fn bell(&self) -> &StateVector {
        &self.bell
    }

    pub fn vaa(&self) -> &[StateVector; 4] {
        &self.vaa
    }

    pub fn partner(&self, a: usize) -> Result<usize> {
        check_index("diagonal", a)?;
        Ok(self.reflection_partner[a - 1])
    }

    /// Largest deviation of the VAA Gram matrix from the identity.
    pub fn vaa_orthonormality_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, x) in self.vaa.iter().enumerate() {
            for (j, y) in self.vaa.iter().enumerate() {
                let g = dot(x.amps(), y.amps());
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - Amplitude::new(expected, 0.0)).norm());
            }
        }
        worst
    }
}

impl Default for CubeGameSetup {
    fn default() -> Self {
        Self::new()
    }
}

fn check_index(name: &'static str, a: usize) -> Result<()> {
    if !(1..=4).contains(&a) {
        return Err(Error::OutOfRange {
            name,
            value: a,
            max: 4,
        });
    }
    Ok(())
}

fn spin(n: BlochDirection) -> StateVector {
    spin_up_state(&n).expect("cube directions are unit vectors")
}

/// `|⟨bell| (|n_a, n_b⟩ + |−n_a, −n_b⟩)/√2⟩|`.
pub fn bell_ray_overlap(setup: &CubeGameSetup, a: usize, b: usize) -> Result<f64> {
    let na = setup.diagonal(a)?;
    let nb = setup.diagonal(b)?;
    let plus = tensor(&spin(na), &spin(nb));
    let minus = tensor(&spin(-na), &spin(-nb));
    let r = 1.0 / 2f64.sqrt();
    let sum: Vec<Amplitude> = plus
        .amps()
        .iter()
        .zip(minus.amps())
        .map(|(x, y)| (x + y) * r)
        .collect();
    Ok(dot(setup.bell.amps(), &sum).norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDecompositionReport {
    /// Ray overlap for each diagonal paired with its reflection partner.
    pub overlaps: [f64; 4],
    /// Ray overlap of the wrong pairing `(n_1, n_2)`.
    pub wrong_pairing_overlap: f64,
    /// Smallest correct overlap minus the wrong-pairing overlap.
    pub margin: f64,
    pub passed: bool,
}

pub fn verify_bell_decompositions(setup: &CubeGameSetup) -> BellDecompositionReport {
    let mut overlaps = [0.0; 4];
    for (a, o) in (1..=4).zip(overlaps.iter_mut()) {
        *o = bell_ray_overlap(setup, a, setup.reflection_partner[a - 1]).expect("valid indices");
    }
    let wrong_pairing_overlap = bell_ray_overlap(setup, 1, 2).expect("valid indices");
    let worst = overlaps.iter().copied().fold(f64::INFINITY, f64::min);
    BellDecompositionReport {
        overlaps,
        wrong_pairing_overlap,
        margin: worst - wrong_pairing_overlap,
        passed: overlaps.iter().all(|o| (o - 1.0).abs() < 1e-10),
    }
}

/// Object-ancilla state after the king finds `sign` along diagonal `a`.
pub fn king_collapse(setup: &CubeGameSetup, a: usize, sign: Sign) -> Result<StateVector> {
    let na = setup.diagonal(a)?;
    let nb = setup.diagonal(setup.partner(a)?)?;
    Ok(tensor(&spin(sign.apply(na)), &spin(sign.apply(nb))))
}

/// Probability that the king finds `sign` along diagonal `a` on the object
/// half of the Bell state.
pub fn collapse_probability(setup: &CubeGameSetup, a: usize, sign: Sign) -> Result<f64> {
    let object = spin(sign.apply(setup.diagonal(a)?));
    let mut total = 0.0;
    for k in 0..2 {
        let ancilla = StateVector::basis_state(2, k)?;
        total += dot(tensor(&object, &ancilla).amps(), setup.bell.amps()).norm_sqr();
    }
    Ok(total)
}

/// `|⟨χ_k|row⟩|²` with rows in [`TABLE5_ROWS`] order and columns `χ_1..χ_4`.
pub fn vaa_overlap_table(setup: &CubeGameSetup) -> [[f64; 4]; 8] {
    let mut out = [[0.0; 4]; 8];
    for (row, &(a, sign)) in out.iter_mut().zip(TABLE5_ROWS.iter()) {
        let state = king_collapse(setup, a, sign).expect("valid row");
        for (cell, chi) in row.iter_mut().zip(setup.vaa.iter()) {
            *cell = born_probability(&state, chi).expect("two-qubit states");
        }
    }
    out
}

/// `½cos⁴(θ/2)`, `½sin⁴(θ/2)`, `(3/2)cos⁴(θ/2)`, `(3/2)sin⁴(θ/2)` with
/// `θ = arccos(1/√3)`.
pub fn table5_constants() -> [f64; 4] {
    let theta = (1.0 / 3f64.sqrt()).acos();
    let c4 = (theta / 2.0).cos().powi(4);
    let s4 = (theta / 2.0).sin().powi(4);
    [0.5 * c4, 0.5 * s4, 1.5 * c4, 1.5 * s4]
}

pub fn vaa_success_closed_form() -> f64 {
    (2.0 + 3f64.sqrt()) / 4.0
}

pub fn conventional_optimum_closed_form() -> f64 {
    (15.0 + 33f64.sqrt()) / 24.0
}

/// Predicted sign for each VAA outcome and diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionTable {
    /// Indexed `[k − 1][a − 1]`.
    pub signs: [[Sign; 4]; 4],
}

impl PredictionTable {
    pub fn predict(&self, k: usize, a: usize) -> Result<Sign> {
        check_index("vaa outcome", k)?;
        check_index("diagonal", a)?;
        Ok(self.signs[k - 1][a - 1])
    }
}

/// For each outcome and diagonal, the sign whose collapsed state overlaps
/// `χ_k` more.
pub fn vaa_prediction_table(setup: &CubeGameSetup) -> Result<PredictionTable> {
    let table = vaa_overlap_table(setup);
    let mut signs = [[Sign::Plus; 4]; 4];
    for (k, row) in signs.iter_mut().enumerate() {
        for (a, cell) in row.iter_mut().enumerate() {
            let up = table[2 * a][k];
            let down = table[2 * a + 1][k];
            if (up - down).abs() < 1e-9 {
                return Err(Error::PredictionTie {
                    outcome: k + 1,
                    diagonal: a + 1,
                });
            }
            *cell = if up > down { Sign::Plus } else { Sign::Minus };
        }
    }
    Ok(PredictionTable { signs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaaSuccess {
    pub total: f64,
    /// Probability of an outcome that predicts the wrong sign, per row.
    pub wrong_mass: [f64; 8],
}

pub fn vaa_success(setup: &CubeGameSetup, table: &PredictionTable) -> VaaSuccess {
    let overlaps = vaa_overlap_table(setup);
    let mut wrong_mass = [0.0; 8];
    let mut total = 0.0;
    for (r, &(a, sign)) in TABLE5_ROWS.iter().enumerate() {
        let p = collapse_probability(setup, a, sign).expect("valid row");
        for (signs, &q) in table.signs.iter().zip(&overlaps[r]) {
            if signs[a - 1] == sign {
                total += 0.25 * p * q;
            } else {
                wrong_mass[r] += q;
            }
        }
    }
    VaaSuccess { total, wrong_mass }
}

/// Decision rule for a spin measurement along `m`: outcome `+` predicts
/// `plus_predicts[a − 2]` on diagonal `a ∈ 2..=4`, outcome `−` the opposite.
/// Diagonal 1 is the preparation axis and is always answered `+`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConventionalRule {
    pub plus_predicts: [Sign; 3],
}

impl ConventionalRule {
    pub fn all() -> Vec<ConventionalRule> {
        let mut out = Vec::with_capacity(8);
        for a in Sign::BOTH {
            for b in Sign::BOTH {
                for c in Sign::BOTH {
                    out.push(ConventionalRule {
                        plus_predicts: [a, b, c],
                    });
                }
            }
        }
        out
    }

    fn flipped(self) -> Self {
        Self {
            plus_predicts: self.plus_predicts.map(Sign::flip),
        }
    }

    /// Prediction on diagonal `a` for control outcome `outcome`.
    pub fn predict(&self, a: usize, outcome: Sign) -> Sign {
        if a == 1 {
            return Sign::Plus;
        }
        match outcome {
            Sign::Plus => self.plus_predicts[a - 2],
            Sign::Minus => self.plus_predicts[a - 2].flip(),
        }
    }
}

/// Per-(diagonal, sign) probabilities shared by every rule at a fixed `m`.
struct ConventionalTerms {
    /// `[a − 2][sign]`: probability the king finds `sign` along `n_a` on `|n_1⟩`.
    king: [[f64; 2]; 3],
    /// `[a − 2][sign]`: probability of control outcome `+` on `|sign·n_a⟩`.
    control_plus: [[f64; 2]; 3],
}

impl ConventionalTerms {
    fn new(setup: &CubeGameSetup, m: &BlochDirection) -> Self {
        let prep = spin(setup.diagonals[0]);
        let up = spin(*m);
        let mut king = [[0.0; 2]; 3];
        let mut control_plus = [[0.0; 2]; 3];
        for a in 0..3 {
            for (s, sign) in Sign::BOTH.iter().enumerate() {
                let collapsed = spin(sign.apply(setup.diagonals[a + 1]));
                king[a][s] = born_probability(&prep, &collapsed).expect("qubits");
                control_plus[a][s] = born_probability(&collapsed, &up).expect("qubits");
            }
        }
        Self { king, control_plus }
    }

    fn success(&self, rule: &ConventionalRule) -> f64 {
        let mut total = 0.25;
        for a in 0..3 {
            for (s, sign) in Sign::BOTH.iter().enumerate() {
                let p_plus = self.control_plus[a][s];
                let hit = if rule.plus_predicts[a] == *sign {
                    p_plus
                } else {
                    1.0 - p_plus
                };
                total += 0.25 * self.king[a][s] * hit;
            }
        }
        total
    }

    fn best(&self) -> (ConventionalRule, f64) {
        let mut best = (
            ConventionalRule {
                plus_predicts: [Sign::Plus; 3],
            },
            f64::NEG_INFINITY,
        );
        for rule in ConventionalRule::all() {
            let v = self.success(&rule);
            if v > best.1 {
                best = (rule, v);
            }
        }
        best
    }
}

/// Success probability with preparation `|n_1⟩` and a spin measurement
/// along `m` interpreted by `rule`.
pub fn conventional_success(
    setup: &CubeGameSetup,
    m: &BlochDirection,
    rule: &ConventionalRule,
) -> f64 {
    ConventionalTerms::new(setup, m).success(rule)
}

pub fn best_rule(setup: &CubeGameSetup, m: &BlochDirection) -> (ConventionalRule, f64) {
    ConventionalTerms::new(setup, m).best()
}

/// Always naming the more likely sign on every diagonal, with no control
/// measurement.
pub fn always_guess_baseline(setup: &CubeGameSetup) -> f64 {
    let terms = ConventionalTerms::new(setup, &BlochDirection::PLUS_Z);
    0.25 + 0.25 * terms.king.iter().map(|p| p[0].max(p[1])).sum::<f64>()
}

/// `180° − arctan(4√2)`.
pub fn quoted_optimum_angle_deg() -> f64 {
    180.0 - (4.0 * 2f64.sqrt()).atan().to_degrees()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeOptimizeConfig {
    pub grid_deg: f64,
    pub refine: bool,
    pub tol: f64,
}

impl Default for CubeOptimizeConfig {
    fn default() -> Self {
        Self {
            grid_deg: 0.25,
            refine: true,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalOptimum {
    /// Control direction, sign-fixed so that `m·n_1 ≤ 0`.
    pub direction: BlochDirection,
    pub rule: ConventionalRule,
    pub value: f64,
    /// Angle between `direction` and `n_1`.
    pub angle_deg: f64,
    /// The `k ∈ 2..=4` such that `direction` lies on the `n_1`–`n_k` great
    /// circle, if any.
    pub great_circle_partner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeOptimum {
    pub best: LocalOptimum,
    /// Every distinct optimum within `1e-6` of the best value.
    pub local_optima: Vec<LocalOptimum>,
    pub grid_best: f64,
    pub grid_points: usize,
}

fn canonical(
    setup: &CubeGameSetup,
    m: BlochDirection,
    rule: ConventionalRule,
    value: f64,
) -> LocalOptimum {
    let n1 = setup.diagonals[0];
    let (m, rule) = if m.dot(&n1) > 0.0 {
        (-m, rule.flipped())
    } else {
        (m, rule)
    };
    let great_circle_partner = (2..=4).find(|&k| {
        let c = n1.cross(&setup.diagonals[k - 1]);
        let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        ((m.x * c[0] + m.y * c[1] + m.z * c[2]) / norm).abs() < 1e-5
    });
    LocalOptimum {
        direction: m,
        rule,
        value,
        angle_deg: m.angle_to(&n1).to_degrees(),
        great_circle_partner,
    }
}

fn tangent_frame(m: &BlochDirection) -> ([f64; 3], [f64; 3]) {
    let helper = if m.x.abs() < 0.9 {
        BlochDirection::PLUS_X
    } else {
        BlochDirection::PLUS_Y
    };
    let e1 = m.cross(&helper);
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let e1 = e1.map(|c| c / n);
    let e1d = BlochDirection {
        x: e1[0],
        y: e1[1],
        z: e1[2],
    };
    (e1, m.cross(&e1d))
}

fn offset(m: &BlochDirection, e1: &[f64; 3], e2: &[f64; 3], uv: &[f64]) -> BlochDirection {
    BlochDirection::normalized(
        m.x + uv[0] * e1[0] + uv[1] * e2[0],
        m.y + uv[0] * e1[1] + uv[1] * e2[1],
        m.z + uv[0] * e1[2] + uv[1] * e2[2],
    )
    .expect("finite offset from a unit vector")
}

fn lex_less(a: &BlochDirection, b: &BlochDirection) -> bool {
    a.as_array().partial_cmp(&b.as_array()) == Some(std::cmp::Ordering::Less)
}

/// Maximizes the conventional success over control directions.
///
/// Scans a polar grid, refines the best grid points in the tangent plane and
/// reports every distinct optimum.
pub fn conventional_cube_optimize(
    setup: &CubeGameSetup,
    config: &CubeOptimizeConfig,
) -> Result<CubeOptimum> {
    if !(config.grid_deg > 0.0 && config.grid_deg <= 90.0) {
        return Err(Error::InvalidParameter(format!(
            "grid resolution {} deg out of range",
            config.grid_deg
        )));
    }
    let n_theta = (180.0 / config.grid_deg).round() as usize;
    let n_phi = (360.0 / config.grid_deg).round() as usize;
    let d_theta = PI / n_theta as f64;
    let d_phi = 2.0 * PI / n_phi as f64;
    let rows: Vec<Vec<f64>> = (0..=n_theta)
        .into_par_iter()
        .map(|i| {
            (0..n_phi)
                .map(|j| {
                    best_rule(
                        setup,
                        &BlochDirection::from_angles(i as f64 * d_theta, j as f64 * d_phi),
                    )
                    .1
                })
                .collect()
        })
        .collect();
    let grid_points = rows.len() * n_phi;
    let mut samples: Vec<(f64, usize, usize)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (v, i, j)))
        .collect();
    samples.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let grid_best = samples[0].0;

    // Seeds: best grid points at least 5° apart from each other.
    let mut seeds: Vec<BlochDirection> = Vec::new();
    for &(v, i, j) in &samples {
        if v < grid_best - 1e-2 || seeds.len() >= 24 {
            break;
        }
        let m = BlochDirection::from_angles(i as f64 * d_theta, j as f64 * d_phi);
        if seeds.iter().all(|s| s.angle_to(&m) > 5f64.to_radians()) {
            seeds.push(m);
        }
    }

    let nm = NelderMead {
        initial_step: config.grid_deg.to_radians(),
        value_tol: config.tol * 1e-2,
        point_tol: 1e-12,
        max_iter: 5_000,
    };
    let refined: Vec<LocalOptimum> = seeds
        .par_iter()
        .map(|m0| {
            let (m, value) = if config.refine {
                let (e1, e2) = tangent_frame(m0);
                let (uv, neg) = nm.minimize(
                    |uv| -best_rule(setup, &offset(m0, &e1, &e2, uv)).1,
                    &[0.0, 0.0],
                );
                (offset(m0, &e1, &e2, &uv), -neg)
            } else {
                (*m0, best_rule(setup, m0).1)
            };
            let (rule, v) = best_rule(setup, &m);
            canonical(setup, m, rule, v.max(value))
        })
        .collect();

    let top = refined
        .iter()
        .map(|o| o.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut local_optima: Vec<LocalOptimum> = Vec::new();
    for o in refined.into_iter().filter(|o| o.value >= top - 1e-6) {
        if local_optima
            .iter()
            .all(|p| p.direction.angle_to(&o.direction) > 1e-4)
        {
            local_optima.push(o);
        }
    }
    local_optima.sort_by(|a, b| {
        a.direction
            .as_array()
            .partial_cmp(&b.direction.as_array())
            .unwrap()
    });
    let mut best = local_optima[0].clone();
    for o in &local_optima[1..] {
        if o.value > best.value + 1e-9
            || ((o.value - best.value).abs() <= 1e-9 && lex_less(&o.direction, &best.direction))
        {
            best = o.clone();
        }
    }
    Ok(CubeOptimum {
        best,
        local_optima,
        grid_best,
        grid_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn closed_form_success(setup: &CubeGameSetup, m: &BlochDirection) -> f64 {
        0.625 + 0.125 * (1..4).map(|a| setup.diagonals[a].dot(m).abs()).sum::<f64>()
    }

    #[test]
    fn setup_invariants() {
        let s = CubeGameSetup::new();
        for a in 0..4 {
            assert_abs_diff_eq!(s.diagonals[a].dot(&s.diagonals[a]), 1.0, epsilon = 1e-15);
            for b in a + 1..4 {
                assert_abs_diff_eq!(
                    s.diagonals[a].dot(&s.diagonals[b]).abs(),
                    1.0 / 3.0,
                    epsilon = 1e-15
                );
            }
        }
        assert!(s.vaa_orthonormality_deviation() < 1e-12);
        assert_abs_diff_eq!(s.bell.norm_sqr(), 1.0, epsilon = 1e-15);
        for a in 1..=4 {
            assert_eq!(s.partner(s.partner(a).unwrap()).unwrap(), a);
        }
        assert!(s.diagonal(0).is_err());
        assert!(s.diagonal(5).is_err());
    }

    #[test]
    fn partners_are_xz_reflections() {
        let s = CubeGameSetup::new();
        for a in 1..=4 {
            let n = s.diagonal(a).unwrap();
            let m = s.diagonal(s.partner(a).unwrap()).unwrap();
            assert_abs_diff_eq!(n.x, m.x, epsilon = 1e-15);
            assert_abs_diff_eq!(n.y, -m.y, epsilon = 1e-15);
            assert_abs_diff_eq!(n.z, m.z, epsilon = 1e-15);
        }
    }

    #[test]
    fn bell_decompositions() {
        let s = CubeGameSetup::new();
        let r = verify_bell_decompositions(&s);
        assert!(r.passed);
        assert!(r.wrong_pairing_overlap < 0.5);
        assert!(r.margin > 0.5);
    }

    #[test]
    fn collapse_is_even_and_orthogonal() {
        let s = CubeGameSetup::new();
        for a in 1..=4 {
            let up = king_collapse(&s, a, Sign::Plus).unwrap();
            let down = king_collapse(&s, a, Sign::Minus).unwrap();
            assert!(dot(up.amps(), down.amps()).norm() < 1e-12);
            for sign in Sign::BOTH {
                assert_abs_diff_eq!(
                    collapse_probability(&s, a, sign).unwrap(),
                    0.5,
                    epsilon = 1e-12
                );
            }
        }
        assert!(king_collapse(&s, 5, Sign::Plus).is_err());
    }

    #[test]
    fn overlap_table_structure() {
        let s = CubeGameSetup::new();
        let t = vaa_overlap_table(&s);
        let c = table5_constants();
        for row in &t {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            for v in row {
                assert!(c.iter().any(|x| (x - v).abs() < 1e-12), "{v}");
            }
        }
        assert_abs_diff_eq!(t[6][0], c[2], epsilon = 1e-12);
        assert_abs_diff_eq!(t[0][3], c[3], epsilon = 1e-12);
    }

    #[test]
    fn vaa_predictions() {
        let s = CubeGameSetup::new();
        let p = vaa_prediction_table(&s).unwrap();
        assert_eq!(
            p.signs[0],
            [Sign::Plus, Sign::Minus, Sign::Plus, Sign::Plus]
        );
        let v = vaa_success(&s, &p);
        assert_abs_diff_eq!(v.total, vaa_success_closed_form(), epsilon = 1e-12);
        for w in v.wrong_mass {
            assert_abs_diff_eq!(w, 1.0 - vaa_success_closed_form(), epsilon = 1e-10);
        }
    }

    #[test]
    fn success_matches_closed_form() {
        let s = CubeGameSetup::new();
        for (theta, phi) in [(0.3, 1.0), (1.2, -2.0), (2.9, 0.4), (PI / 2.0, PI)] {
            let m = BlochDirection::from_angles(theta, phi);
            assert_abs_diff_eq!(
                best_rule(&s, &m).1,
                closed_form_success(&s, &m),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn flipped_direction_and_rule_agree() {
        let s = CubeGameSetup::new();
        let m = BlochDirection::from_angles(0.7, 2.1);
        for rule in ConventionalRule::all() {
            assert_abs_diff_eq!(
                conventional_success(&s, &m, &rule),
                conventional_success(&s, &-m, &rule.flipped()),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn baseline_is_three_quarters() {
        assert_abs_diff_eq!(
            always_guess_baseline(&CubeGameSetup::new()),
            0.75,
            epsilon = 1e-12
        );
    }

    #[test]
    fn coarse_optimize() {
        let s = CubeGameSetup::new();
        let o = conventional_cube_optimize(
            &s,
            &CubeOptimizeConfig {
                grid_deg: 2.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(
            o.best.value,
            conventional_optimum_closed_form(),
            epsilon = 1e-9
        );
        assert!(o.best.value >= o.grid_best);
        assert_abs_diff_eq!(o.best.angle_deg, quoted_optimum_angle_deg(), epsilon = 1e-3);
        assert!(o.best.great_circle_partner.is_some());
        let partners: std::collections::BTreeSet<_> = o
            .local_optima
            .iter()
            .filter_map(|l| l.great_circle_partner)
            .collect();
        assert_eq!(partners.into_iter().collect::<Vec<_>>(), vec![2, 3, 4]);
        assert!(conventional_cube_optimize(
            &s,
            &CubeOptimizeConfig {
                grid_deg: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
