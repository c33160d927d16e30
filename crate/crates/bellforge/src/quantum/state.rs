//! Dense N-qubit state vectors, mixtures, and the built-in five-qubit state.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::Error;

const NORM_TOL: f64 = 1e-10;
// External files may carry truncated decimals; anything further off than
// this is treated as a different state, not a rounding artifact.
const FILE_NORM_TOL: f64 = 1e-4;

/// Pure N-qubit state, dense amplitudes in computational basis order.
///
/// Party 1 is the most significant qubit: basis index `b` assigns party `j`
/// (0-based) the bit `(b >> (n-1-j)) & 1`.
#[derive(Debug, Clone)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Wraps an already-normalized amplitude vector.
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self, Error> {
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: amps.len(),
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(PureState { n, amps })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(n: usize, mut amps: Vec<Complex64>) -> Result<Self, Error> {
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: amps.len(),
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq < 1e-12 {
            return Err(Error::NotNormalized(norm_sq));
        }
        let inv = 1.0 / norm_sq.sqrt();
        for a in &mut amps {
            *a *= inv;
        }
        Ok(PureState { n, amps })
    }

    /// Computational basis state `|b>`.
    pub fn basis(n: usize, b: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[b] = Complex64::new(1.0, 0.0);
        PureState { n, amps }
    }

    /// Haar-like random state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        PureState::normalized(n, amps).expect("gaussian vector is nonzero")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Convex mixture of pure states. Density matrices are never materialized;
/// expectations distribute over the components.
#[derive(Debug, Clone)]
pub struct MixedState {
    components: Vec<(f64, PureState)>,
}

impl MixedState {
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self, Error> {
        let Some(first) = components.first() else {
            return Err(Error::BadMixture);
        };
        let n = first.1.n();
        let mut total = 0.0;
        for (p, s) in &components {
            if *p <= 0.0 || s.n() != n {
                return Err(Error::BadMixture);
            }
            total += p;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::BadMixture);
        }
        Ok(MixedState { components })
    }

    /// The even mixture of two pure states.
    pub fn even_pair(a: PureState, b: PureState) -> Result<Self, Error> {
        MixedState::new(vec![(0.5, a), (0.5, b)])
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }
}

/// Common access for expectation values: any state is a convex combination
/// of pure states.
pub trait QuantumState {
    fn party_count(&self) -> usize;
    fn pure_parts(&self) -> Vec<(f64, &PureState)>;
}

impl QuantumState for PureState {
    fn party_count(&self) -> usize {
        self.n
    }

    fn pure_parts(&self) -> Vec<(f64, &PureState)> {
        vec![(1.0, self)]
    }
}

impl QuantumState for MixedState {
    fn party_count(&self) -> usize {
        self.components[0].1.n()
    }

    fn pure_parts(&self) -> Vec<(f64, &PureState)> {
        self.components.iter().map(|(p, s)| (*p, s)).collect()
    }
}

/// Printed coefficients of the catalog five-qubit state, as published.
/// Their squared sum is 1 only to five decimals.
pub fn psi2_printed_coefficients() -> [f64; 7] {
    [0.462854, 0.161096, 0.19409, 0.181191, 0.220891, 0.107669, 0.039699]
}

/// The catalog five-qubit state: coefficient `a` on `|00000>`, `b`, `c`,
/// `d`, `e`, `f` on the cyclic families of weight 2, 2, 3, 3, 4 basis
/// states, `g` on `|11111>`, with a single negative sign on `|01101>`.
/// Renormalized once at construction.
pub fn psi2_state() -> PureState {
    let [a, b, c, d, e, f, g] = psi2_printed_coefficients();
    let families: [(f64, &[&str]); 7] = [
        (a, &["00000"]),
        (b, &["00011", "00110", "01100", "11000", "10001"]),
        (c, &["00101", "01010", "10100", "01001", "10010"]),
        (d, &["00111", "01110", "11100", "11001", "10011"]),
        (e, &["01011", "10110", "11010", "10101"]),
        (f, &["01111", "10111", "11011", "11101", "11110"]),
        (g, &["11111"]),
    ];
    let mut amps = vec![Complex64::new(0.0, 0.0); 32];
    for (coeff, kets) in families {
        for ket in kets {
            let b = usize::from_str_radix(ket, 2).expect("binary ket");
            amps[b] = Complex64::new(coeff, 0.0);
        }
    }
    amps[0b01101] = Complex64::new(-e, 0.0);
    PureState::normalized(5, amps).expect("nonzero by construction")
}

// --- serialization ---

#[derive(Serialize, Deserialize)]
struct StateRepr {
    n: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StateRepr {
            n: self.n,
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = StateRepr::deserialize(deserializer)?;
        let amps: Vec<Complex64> = repr
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        if amps.len() != 1usize << repr.n {
            return Err(serde::de::Error::custom(format!(
                "state file for n={} needs {} amplitudes, found {}",
                repr.n,
                1usize << repr.n,
                amps.len()
            )));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > FILE_NORM_TOL {
            return Err(serde::de::Error::custom(Error::NotNormalized(norm_sq)));
        }
        // Keep already-normalized files bit-exact; rescale truncated ones.
        if (norm_sq - 1.0).abs() <= NORM_TOL {
            PureState::new(repr.n, amps).map_err(serde::de::Error::custom)
        } else {
            PureState::normalized(repr.n, amps).map_err(serde::de::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normalization_is_enforced() {
        let half = vec![Complex64::new(0.5, 0.0); 2];
        assert!(matches!(
            PureState::new(1, half.clone()),
            Err(Error::NotNormalized(_))
        ));
        let fixed = PureState::normalized(1, half).unwrap();
        let norm_sq: f64 = fixed.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm_sq - 1.0).abs() < 1e-14);
        assert!(matches!(
            PureState::new(2, vec![Complex64::new(1.0, 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_states_are_normalized_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = PureState::random(3, &mut rng);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = PureState::random(3, &mut rng);
        assert_eq!(a.amplitudes(), b.amplitudes());
        assert!((a.inner(&a).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn printed_coefficients_miss_unit_norm_slightly() {
        let [a, b, c, d, e, f, g] = psi2_printed_coefficients();
        let norm_sq =
            a * a + g * g + 5.0 * (b * b + c * c + d * d + e * e + f * f);
        let off = (norm_sq - 1.0).abs();
        assert!(off > 1e-7, "printed norm error unexpectedly tiny: {off:e}");
        assert!(off < 1e-4, "printed norm error unexpectedly large: {off:e}");
    }

    #[test]
    fn psi2_has_documented_signs() {
        let psi = psi2_state();
        assert!((psi.inner(&psi).re - 1.0).abs() < 1e-12);
        let amp = psi.amplitudes();
        assert!(amp[0b01101].re < 0.0);
        assert!(amp[0b01011].re > 0.0);
        assert!(amp[0b00000].re > amp[0b11111].re);
        // One weight-1 or weight-4 component was never printed: none exist.
        for b in 0..32u32 {
            if b.count_ones() == 1 {
                assert_eq!(amp[b as usize], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn mixture_probabilities_validated() {
        let zero = PureState::basis(2, 0);
        let one = PureState::basis(2, 3);
        assert!(MixedState::new(vec![(0.7, zero.clone()), (0.2, one.clone())]).is_err());
        assert!(MixedState::even_pair(zero, one).is_ok());
        assert!(MixedState::new(vec![]).is_err());
    }

    #[test]
    fn state_files_round_trip() {
        let psi = psi2_state();
        let json = serde_json::to_string(&psi).unwrap();
        let back: PureState = serde_json::from_str(&json).unwrap();
        assert_eq!(psi.amplitudes(), back.amplitudes());

        let bad = r#"{"n":1,"amplitudes":[[0.5,0.0],[0.5,0.0]]}"#;
        assert!(serde_json::from_str::<PureState>(bad).is_err());
    }
}
