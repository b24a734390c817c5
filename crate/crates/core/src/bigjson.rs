//! JSON numbers for big counts: plain integers when they fit in `u64`,
//! decimal strings otherwise.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(x) => s.serialize_u64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Int(u64),
    Text(String),
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
    match Repr::deserialize(d)? {
        Repr::Int(x) => Ok(BigUint::from(x)),
        Repr::Text(t) => t.parse().map_err(de::Error::custom),
    }
}

#[derive(Serialize, Deserialize)]
struct Wrapped(#[serde(with = "self")] BigUint);

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| Wrapped(x.clone())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Ok(Vec::<Wrapped>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_large_round_trip() {
        for v in [BigUint::from(187u32), BigUint::from(u64::MAX) * 3u32] {
            let json = serde_json::to_string(&Wrapped(v.clone())).unwrap();
            let back: Wrapped = serde_json::from_str(&json).unwrap();
            assert_eq!(back.0, v);
        }
        assert_eq!(serde_json::to_string(&Wrapped(BigUint::from(3u32))).unwrap(), "3");
    }
}
