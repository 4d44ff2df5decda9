//! Text encodings of doubles shared by the CSV and JSON writers.

/// Shortest decimal that parses back to the same double; `inf`, `-inf` and
/// `NaN` for the non-finite values.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Serde adapter for optional doubles in JSON: finite values are numbers,
/// non-finite ones become the strings `"inf"`, `"-inf"` or `"NaN"`, and
/// `None` is `null`.
pub mod json_option {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            None => s.serialize_none(),
            Some(v) if v.is_finite() => s.serialize_some(v),
            Some(v) => s.serialize_some(&super::fmt_f64(*v)),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Number(v)) => Ok(Some(v)),
            Some(Repr::Text(t)) => t
                .parse::<f64>()
                .map(Some)
                .map_err(|_| D::Error::custom(format!("not a number: {t:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!("inf".parse::<f64>().unwrap(), f64::INFINITY);
        assert_eq!("-inf".parse::<f64>().unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn round_trips_bitwise() {
        for v in [1e-300, 1.0 / 3.0, -2.5e17, 5e-324, f64::MAX, 0.95] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
