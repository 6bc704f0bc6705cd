//! Infinite parameter sequences given by a finite table plus a tail rule or
//! by a closed form.
//!
//! Entries are indexed from 0. Kernels decide what index 0 means (`q_0` for
//! the comb, `θ_1` for the three-letter kernel).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a finite list continues past its last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tail {
    /// Repeat the list cyclically from index 0.
    Periodic,
    /// Every later entry equals `value`.
    Constant { value: f64 },
    /// Every later entry is 0.
    Zero,
    /// Entry `len - 1 + j` equals `last * ratio^j`.
    Geometric { ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sequence {
    List {
        values: Vec<f64>,
        tail: Tail,
    },
    Constant {
        value: f64,
    },
    /// `numerator / (i + offset)`.
    Harmonic {
        numerator: f64,
        offset: f64,
    },
    /// `scale * ratio^i`.
    Geometric {
        scale: f64,
        ratio: f64,
    },
}

fn in_unit(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::spec(format!("{name} = {v} is outside [0, 1]")))
    }
}

impl Sequence {
    /// Checks that every entry lies in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        match self {
            Sequence::List { values, tail } => {
                if values.is_empty() {
                    return Err(Error::spec("sequence list must not be empty"));
                }
                for (i, &v) in values.iter().enumerate() {
                    in_unit(&format!("values[{i}]"), v)?;
                }
                match *tail {
                    Tail::Constant { value } => in_unit("tail.value", value)?,
                    Tail::Geometric { ratio } => in_unit("tail.ratio", ratio)?,
                    Tail::Periodic | Tail::Zero => {}
                }
            }
            Sequence::Constant { value } => in_unit("value", *value)?,
            Sequence::Harmonic { numerator, offset } => {
                if !(offset.is_finite() && *offset > 0.0) {
                    return Err(Error::spec(format!("harmonic offset {offset} must be > 0")));
                }
                if !(numerator.is_finite() && *numerator >= 0.0) {
                    return Err(Error::spec(format!("harmonic numerator {numerator} must be >= 0")));
                }
                in_unit("numerator / offset", numerator / offset)?;
            }
            Sequence::Geometric { scale, ratio } => {
                in_unit("scale", *scale)?;
                in_unit("ratio", *ratio)?;
            }
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        match self {
            Sequence::List { values, tail } => {
                if i < values.len() {
                    return values[i];
                }
                match *tail {
                    Tail::Periodic => values[i % values.len()],
                    Tail::Constant { value } => value,
                    Tail::Zero => 0.0,
                    Tail::Geometric { ratio } => values[values.len() - 1] * ratio.powi((i + 1 - values.len()) as i32),
                }
            }
            Sequence::Constant { value } => *value,
            Sequence::Harmonic { numerator, offset } => numerator / (i as f64 + offset),
            Sequence::Geometric { scale, ratio } => scale * ratio.powi(i as i32),
        }
    }

    /// Infimum and supremum of `{ v_j : j >= k }` (limits included).
    pub fn inf_sup_from(&self, k: usize) -> (f64, f64) {
        let fold = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        match self {
            Sequence::List { values, tail } => {
                let head = values.get(k..).unwrap_or(&[]);
                match *tail {
                    Tail::Periodic => fold(&mut values.iter().copied()),
                    Tail::Constant { value } => fold(&mut head.iter().copied().chain([value])),
                    Tail::Zero => fold(&mut head.iter().copied().chain([0.0])),
                    Tail::Geometric { ratio } => {
                        let first_tail = self.value(k.max(values.len()));
                        let limit = if ratio < 1.0 { 0.0 } else { first_tail };
                        fold(&mut head.iter().copied().chain([first_tail, limit]))
                    }
                }
            }
            Sequence::Constant { value } => (*value, *value),
            Sequence::Harmonic { numerator, .. } => {
                let v = self.value(k);
                (if *numerator > 0.0 { 0.0 } else { v }, v)
            }
            Sequence::Geometric { ratio, .. } => {
                let v = self.value(k);
                (if *ratio < 1.0 { 0.0 } else { v }, v)
            }
        }
    }

    /// `Σ_{j >= k} v_j`, or `None` when the series diverges.
    pub fn tail_sum(&self, k: usize) -> Option<f64> {
        match self {
            Sequence::List { values, tail } => {
                let head: f64 = values.get(k..).unwrap_or(&[]).iter().sum();
                match *tail {
                    Tail::Periodic => values.iter().all(|&v| v == 0.0).then_some(0.0),
                    Tail::Constant { value } => (value == 0.0).then_some(head),
                    Tail::Zero => Some(head),
                    Tail::Geometric { ratio } => {
                        let first = self.value(k.max(values.len()));
                        if first == 0.0 {
                            Some(head)
                        } else if ratio < 1.0 {
                            Some(head + first / (1.0 - ratio))
                        } else {
                            None
                        }
                    }
                }
            }
            Sequence::Constant { value } => (*value == 0.0).then_some(0.0),
            Sequence::Harmonic { numerator, .. } => (*numerator == 0.0).then_some(0.0),
            Sequence::Geometric { scale, ratio } => {
                if *scale == 0.0 {
                    Some(0.0)
                } else if *ratio < 1.0 {
                    Some(self.value(k) / (1.0 - ratio))
                } else {
                    None
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alternating(eps: f64) -> Sequence {
        Sequence::List { values: vec![1.0 - eps, eps], tail: Tail::Periodic }
    }

    #[test]
    fn periodic_values_and_hull() {
        let s = alternating(0.2);
        assert_eq!(s.value(0), 0.8);
        assert_eq!(s.value(7), 0.2);
        assert_eq!(s.inf_sup_from(5), (0.2, 0.8));
        assert_eq!(s.tail_sum(3), None);
    }

    #[test]
    fn geometric_tail_matches_brute_force() {
        let s = Sequence::List { values: vec![0.004, 0.003], tail: Tail::Geometric { ratio: 0.5 } };
        for k in 0..6 {
            let brute: f64 = (k..400).map(|j| s.value(j)).sum();
            assert!((s.tail_sum(k).unwrap() - brute).abs() < 1e-15, "k = {k}");
        }
        assert_eq!(s.value(2), 0.0015);
        assert_eq!(s.inf_sup_from(3), (0.0, 0.00075));
    }

    #[test]
    fn harmonic_is_decreasing_to_zero() {
        let s = Sequence::Harmonic { numerator: 1.0, offset: 2.0 };
        assert_eq!(s.value(0), 0.5);
        assert_eq!(s.inf_sup_from(2), (0.0, 0.25));
        assert_eq!(s.tail_sum(0), None);
    }

    #[test]
    fn closed_geometric_sum() {
        let s = Sequence::Geometric { scale: 0.01, ratio: 0.5 };
        assert!((s.tail_sum(0).unwrap() - 0.02).abs() < 1e-15);
        assert!((s.tail_sum(2).unwrap() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(Sequence::Constant { value: 1.5 }.validate().is_err());
        assert!(Sequence::List { values: vec![], tail: Tail::Zero }.validate().is_err());
        assert!(Sequence::Harmonic { numerator: 3.0, offset: 2.0 }.validate().is_err());
        assert!(alternating(0.2).validate().is_ok());
    }

    #[test]
    fn json_shape() {
        let s: Sequence =
            serde_json::from_str(r#"{"type":"list","values":[0.8,0.2],"tail":{"type":"periodic"}}"#).unwrap();
        assert_eq!(s, alternating(0.2));
        let bad = serde_json::from_str::<Sequence>(r#"{"type":"constant","value":0.1,"extra":1}"#);
        assert!(bad.is_err());
    }
}
