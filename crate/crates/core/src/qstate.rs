//! Dense complex state vectors.
//!
//! States are rays: two vectors that differ by a global phase describe the
//! same physical state, so equality is tested with [`StateVector::same_ray`]
//! and never component by component.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Tolerances};

/// A complex probability amplitude.
pub type Amplitude = Complex64;

/// Wire form of an amplitude: `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRecord {
    pub re: f64,
    pub im: f64,
}

impl From<Amplitude> for AmplitudeRecord {
    fn from(z: Amplitude) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<AmplitudeRecord> for Amplitude {
    fn from(r: AmplitudeRecord) -> Self {
        Amplitude::new(r.re, r.im)
    }
}

/// A unit-norm vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<AmplitudeRecord>", try_from = "Vec<AmplitudeRecord>")]
pub struct StateVector {
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amps: Vec<Amplitude>) -> Result<Self> {
        check_finite(&amps)?;
        if amps.is_empty() {
            return Err(Error::ZeroVector);
        }
        let norm_sqr = norm_sqr(&amps);
        if (norm_sqr - 1.0).abs() > Tolerances::DEFAULT.construction {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<Amplitude>) -> Result<Self> {
        check_finite(&amps)?;
        let norm = norm_sqr(&amps).sqrt();
        if amps.is_empty() || norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amps })
    }

    /// Computational basis state `|k⟩` of dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange {
                what: "basis state",
                index: k,
            });
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[k] = Amplitude::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// Draws a state uniformly from the unit sphere in `C^dim`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let amps: Vec<Amplitude> = (0..dim)
                .map(|_| Amplitude::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if let Ok(s) = Self::normalized(amps) {
                return s;
            }
        }
    }

    pub(crate) fn from_amps_unchecked(amps: Vec<Amplitude>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// `|⟨self|other⟩| = 1` within `tol`.
    pub fn same_ray(&self, other: &StateVector, tol: f64) -> bool {
        self.dim() == other.dim() && (dot(&self.amps, &other.amps).norm() - 1.0).abs() <= tol
    }

    /// The same ray with a global phase factor applied.
    pub fn with_phase(&self, phase: Amplitude) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * phase).collect(),
        }
    }
}

impl From<StateVector> for Vec<AmplitudeRecord> {
    fn from(s: StateVector) -> Self {
        s.amps.into_iter().map(AmplitudeRecord::from).collect()
    }
}

impl TryFrom<Vec<AmplitudeRecord>> for StateVector {
    type Error = Error;

    fn try_from(v: Vec<AmplitudeRecord>) -> Result<Self> {
        StateVector::new(v.into_iter().map(Amplitude::from).collect())
    }
}

fn check_finite(amps: &[Amplitude]) -> Result<()> {
    if amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn norm_sqr(amps: &[Amplitude]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// `Σ conj(a_k) b_k` without dimension checks.
#[inline]
pub(crate) fn dot(a: &[Amplitude], b: &[Amplitude]) -> Amplitude {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨a|b⟩`, conjugating the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Amplitude> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(dot(&a.amps, &b.amps))
}

/// Probability `|⟨outcome|state⟩|²` of finding `state` in `outcome`.
pub fn born_probability(state: &StateVector, outcome: &StateVector) -> Result<f64> {
    Ok(inner(outcome, state)?.norm_sqr().min(1.0))
}

/// Kronecker product; component `ka * b.dim() + kb` holds `a[ka] * b[kb]`.
pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    let amps = a
        .amps
        .iter()
        .flat_map(|x| b.amps.iter().map(move |y| x * y))
        .collect();
    StateVector { amps }
}

/// A unit vector on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochDirection {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochDirection {
    pub const PLUS_X: BlochDirection = BlochDirection {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const PLUS_Y: BlochDirection = BlochDirection {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const PLUS_Z: BlochDirection = BlochDirection {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm_sqr = x * x + y * y + z * z;
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > Tolerances::DEFAULT.construction {
            return Err(Error::NonUnitDirection { norm_sqr });
        }
        Ok(Self { x, y, z })
    }

    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NonUnitDirection { norm_sqr: n * n });
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Direction with polar angle `theta` from +z and azimuth `phi` from +x.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    pub fn polar(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }

    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dot(&self, other: &BlochDirection) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &BlochDirection) -> [f64; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }

    /// Angle to `other` in radians.
    pub fn angle_to(&self, other: &BlochDirection) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl std::ops::Neg for BlochDirection {
    type Output = BlochDirection;

    fn neg(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// The `+1` eigenvector of `n·σ`, written `(cos θ/2, e^{iφ} sin θ/2)`.
pub fn spin_up_state(n: &BlochDirection) -> Result<StateVector> {
    let n = BlochDirection::new(n.x, n.y, n.z)?;
    let half = n.polar() / 2.0;
    let phi = if n.x == 0.0 && n.y == 0.0 {
        0.0
    } else {
        n.azimuth()
    };
    Ok(StateVector {
        amps: vec![
            Amplitude::new(half.cos(), 0.0),
            Amplitude::from_polar(half.sin(), phi),
        ],
    })
}
