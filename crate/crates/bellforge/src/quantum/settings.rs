//! Measurement settings: two unit Bloch vectors per party.

use serde::{Deserialize, Serialize};

use crate::Error;

const UNIT_TOL: f64 = 1e-12;

/// One party's pair of dichotomic observables, as Bloch vectors `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartySettings {
    n1: [f64; 3],
    n2: [f64; 3],
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl PartySettings {
    pub fn from_vectors(n1: [f64; 3], n2: [f64; 3]) -> Result<Self, Error> {
        for v in [n1, n2] {
            let r = norm(v);
            if (r - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotUnitVector(r));
            }
        }
        Ok(PartySettings { n1, n2 })
    }

    /// Observables in the xz-plane: angle `phi` measured from the z-axis,
    /// so `phi = 0` is `sigma_z` and `phi = pi/2` is `sigma_x`.
    pub fn from_xz_angles(phi1: f64, phi2: f64) -> Self {
        PartySettings {
            n1: [phi1.sin(), 0.0, phi1.cos()],
            n2: [phi2.sin(), 0.0, phi2.cos()],
        }
    }

    /// Mirror pair `(phi, -phi)`: half-sum along z, half-difference along x.
    pub fn mirror_xz(phi: f64) -> Self {
        PartySettings::from_xz_angles(phi, -phi)
    }

    pub fn first(&self) -> [f64; 3] {
        self.n1
    }

    pub fn second(&self) -> [f64; 3] {
        self.n2
    }

    /// Bloch vector of `(A1 + A2) / 2`. Generally not unit length.
    pub fn half_sum(&self) -> [f64; 3] {
        [
            0.5 * (self.n1[0] + self.n2[0]),
            0.5 * (self.n1[1] + self.n2[1]),
            0.5 * (self.n1[2] + self.n2[2]),
        ]
    }

    /// Bloch vector of `(A1 - A2) / 2`.
    pub fn half_diff(&self) -> [f64; 3] {
        [
            0.5 * (self.n1[0] - self.n2[0]),
            0.5 * (self.n1[1] - self.n2[1]),
            0.5 * (self.n1[2] - self.n2[2]),
        ]
    }
}

/// Settings for every party, in party order.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingSet {
    parties: Vec<PartySettings>,
}

impl SettingSet {
    pub fn new(parties: Vec<PartySettings>) -> Result<Self, Error> {
        if parties.len() < 2 {
            return Err(Error::BadPartyCount {
                n: parties.len(),
                min: 2,
                max: crate::MAX_CERTIFY_N,
            });
        }
        Ok(SettingSet { parties })
    }

    /// Same mirror angle `(phi, -phi)` at every party.
    pub fn uniform_mirror(n: usize, phi: f64) -> Result<Self, Error> {
        SettingSet::new(vec![PartySettings::mirror_xz(phi); n])
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    pub fn party(&self, j: usize) -> &PartySettings {
        &self.parties[j]
    }

    pub fn parties(&self) -> &[PartySettings] {
        &self.parties
    }

    pub fn set_party(&mut self, j: usize, s: PartySettings) {
        self.parties[j] = s;
    }
}

// --- serialization ---
//
// A party entry is either {"phi1": .., "phi2": ..} for xz-plane angles or
// {"vec1": [x,y,z], "vec2": [x,y,z]} for explicit Bloch vectors.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PartyRepr {
    Angles { phi1: f64, phi2: f64 },
    Vectors { vec1: [f64; 3], vec2: [f64; 3] },
}

#[derive(Serialize, Deserialize)]
struct SettingsRepr {
    parties: Vec<PartyRepr>,
}

impl Serialize for SettingSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let parties = self
            .parties
            .iter()
            .map(|p| {
                if p.n1[1].abs() < 1e-15 && p.n2[1].abs() < 1e-15 {
                    PartyRepr::Angles {
                        phi1: p.n1[0].atan2(p.n1[2]),
                        phi2: p.n2[0].atan2(p.n2[2]),
                    }
                } else {
                    PartyRepr::Vectors { vec1: p.n1, vec2: p.n2 }
                }
            })
            .collect();
        SettingsRepr { parties }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SettingSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SettingsRepr::deserialize(deserializer)?;
        let parties = repr
            .parties
            .into_iter()
            .map(|p| match p {
                PartyRepr::Angles { phi1, phi2 } => {
                    Ok(PartySettings::from_xz_angles(phi1, phi2))
                }
                PartyRepr::Vectors { vec1, vec2 } => PartySettings::from_vectors(vec1, vec2),
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        SettingSet::new(parties).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_must_be_unit() {
        assert!(PartySettings::from_vectors([1.0, 0.0, 0.0], [0.0, 0.5, 0.0]).is_err());
        assert!(PartySettings::from_vectors([1.0, 0.0, 0.0], [0.0, 0.0, -1.0]).is_ok());
    }

    #[test]
    fn mirror_halves_are_axis_aligned() {
        let p = PartySettings::mirror_xz(0.7);
        let hs = p.half_sum();
        let hd = p.half_diff();
        assert!((hs[0] - 0.0).abs() < 1e-15 && (hs[2] - 0.7f64.cos()).abs() < 1e-15);
        assert!((hd[0] - 0.7f64.sin()).abs() < 1e-15 && (hd[2] - 0.0).abs() < 1e-15);
        assert_eq!(hs[1], 0.0);
        assert_eq!(hd[1], 0.0);
    }

    #[test]
    fn angle_entries_round_trip() {
        let s = SettingSet::new(vec![
            PartySettings::from_xz_angles(0.3, 1.1),
            PartySettings::mirror_xz(0.25),
        ])
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("phi1"), "xz settings serialize as angles: {json}");
        let back: SettingSet = serde_json::from_str(&json).unwrap();
        for (a, b) in s.parties().iter().zip(back.parties()) {
            for k in 0..3 {
                assert!((a.first()[k] - b.first()[k]).abs() < 1e-12);
                assert!((a.second()[k] - b.second()[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vector_entries_parse() {
        let json = r#"{"parties":[
            {"vec1":[0.0,1.0,0.0],"vec2":[0.0,0.0,1.0]},
            {"phi1":0.0,"phi2":1.5707963267948966}
        ]}"#;
        let s: SettingSet = serde_json::from_str(json).unwrap();
        assert_eq!(s.party(0).first(), [0.0, 1.0, 0.0]);
        assert!((s.party(1).second()[0] - 1.0).abs() < 1e-12);
    }
}
