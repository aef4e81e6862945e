//! Flat JSON attack descriptions as read by the command-line tools.
//!
//! Accepted shapes:
//!
//! ```json
//! {"type": "incoherent", "D": 0.25, "D1": 0.125}
//! {"type": "coherent", "B": 0.1875, "C": 0.0625, "A1": 0.375, "B2": 0.0234375, "C1": 0.0078125}
//! {"type": "coherent", "A": ..., "A1": ..., "A2": ..., "B": ..., "B1": ..., "B2": ..., "B3": ..., "C": ..., "C1": ..., "C2": ...}
//! {"type": "raw", "n": 1, "gram": [[...], ...]}
//! ```

use serde_json::{Map, Value};

use crate::coherent::{solve_free, CoherentParams, CoherentScalars, RELATIONS, RELATION_TOL};
use crate::error::{Error, Result};
use crate::incoherent::IncoherentParams;
use crate::oracle::SymmetricAttack;
use crate::protocol::message_count;
use crate::quantum::{min_eigenvalue, GramMatrix, DEFAULT_PSD_TOL};

const SCALAR_KEYS: [&str; 10] = ["A", "A1", "A2", "B", "B1", "B2", "B3", "C", "C1", "C2"];
const FREE_KEYS: [&str; 5] = ["B", "C", "A1", "B2", "C1"];

/// A parsed, not yet validated, attack description.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackSpec {
    Incoherent { d: f64, d1: f64 },
    Coherent(CoherentScalars),
    Raw { n: usize, gram: Vec<Vec<f64>> },
}

/// Feasibility diagnostics for an attack description.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `(name, lhs - rhs)` for every linear constraint of the family.
    pub residuals: Vec<(String, f64)>,
    pub min_eigenvalue: f64,
    /// First violated constraint, if any.
    pub violation: Option<String>,
}

impl ValidationReport {
    pub fn feasible(&self) -> bool {
        self.violation.is_none()
    }
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<f64> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing key \"{key}\"")))?
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("key \"{key}\" is not a number")))
}

impl AttackSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("attack file must be a JSON object".into()))?;
        let kind = obj
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("missing string key \"type\"".into()))?;
        match kind {
            "incoherent" => Ok(Self::Incoherent {
                d: number(obj, "D")?,
                d1: number(obj, "D1")?,
            }),
            "coherent" => {
                let full = ["A", "A2", "B1", "B3", "C2"].iter().any(|k| obj.contains_key(*k));
                if full {
                    let v = SCALAR_KEYS.iter().map(|k| number(obj, k)).collect::<Result<Vec<_>>>()?;
                    Ok(Self::Coherent(CoherentScalars {
                        A: v[0],
                        A1: v[1],
                        A2: v[2],
                        B: v[3],
                        B1: v[4],
                        B2: v[5],
                        B3: v[6],
                        C: v[7],
                        C1: v[8],
                        C2: v[9],
                    }))
                } else {
                    let v = FREE_KEYS.iter().map(|k| number(obj, k)).collect::<Result<Vec<_>>>()?;
                    Ok(Self::Coherent(solve_free(v[0], v[1], v[2], v[3], v[4])))
                }
            }
            "raw" => {
                let n = obj
                    .get("n")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse("key \"n\" must be 1 or 2".into()))? as usize;
                if !(1..=2).contains(&n) {
                    return Err(Error::Parse(format!("n = {n} must be 1 or 2")));
                }
                let rows = obj
                    .get("gram")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse("key \"gram\" must be an array of rows".into()))?;
                let gram = rows
                    .iter()
                    .map(|r| {
                        r.as_array()
                            .ok_or_else(|| Error::Parse("gram rows must be arrays".into()))?
                            .iter()
                            .map(|x| {
                                x.as_f64()
                                    .ok_or_else(|| Error::Parse("gram entries must be numbers".into()))
                            })
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let dim = message_count(n) * message_count(n);
                if gram.len() != dim || gram.iter().any(|r| r.len() != dim) {
                    return Err(Error::Parse(format!("gram must be {dim}x{dim} for n = {n}")));
                }
                Ok(Self::Raw { n, gram })
            }
            other => Err(Error::Parse(format!("unknown attack type \"{other}\""))),
        }
    }

    pub fn to_json(&self) -> String {
        let value = match self {
            Self::Incoherent { d, d1 } => serde_json::json!({"type": "incoherent", "D": d, "D1": d1}),
            Self::Coherent(s) => {
                let mut v = serde_json::to_value(s).expect("plain struct serializes");
                v["type"] = Value::from("coherent");
                v
            }
            Self::Raw { n, gram } => serde_json::json!({"type": "raw", "n": n, "gram": gram}),
        };
        value.to_string()
    }

    pub fn qubits(&self) -> usize {
        match self {
            Self::Incoherent { .. } => 1,
            Self::Coherent(_) => 2,
            Self::Raw { n, .. } => *n,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Self::Incoherent { d, d1 } => {
                let (f, f1) = (1.0 - d, 1.0 - 2.0 * d - d1);
                let min_eigenvalue = [f + f1, f - f1, d + d1, d - d1]
                    .into_iter()
                    .fold(f64::INFINITY, f64::min);
                ValidationReport {
                    residuals: Vec::new(),
                    min_eigenvalue,
                    violation: IncoherentParams::new(*d, *d1).err().map(|e| e.to_string()),
                }
            }
            Self::Coherent(s) => {
                let residuals = RELATIONS
                    .iter()
                    .zip(s.relation_residuals())
                    .map(|(n, r)| (n.to_string(), r))
                    .collect();
                let violation = CoherentParams::from_scalars(*s).err().map(|e| e.to_string());
                ValidationReport {
                    residuals,
                    min_eigenvalue: s.min_block_eigenvalue(),
                    violation,
                }
            }
            Self::Raw { n, gram } => {
                let m = message_count(*n);
                let residuals: Vec<(String, f64)> = (0..m)
                    .map(|i| {
                        let norm: f64 = (0..m).map(|j| gram[i * m + j][i * m + j]).sum();
                        (format!("sum_j <E{i}j|E{i}j> = 1"), norm - 1.0)
                    })
                    .collect();
                let asym = (0..m * m)
                    .flat_map(|r| (0..m * m).map(move |c| (r, c)))
                    .fold(0.0f64, |v, (r, c)| v.max((gram[r][c] - gram[c][r]).abs()));
                let min_eigenvalue = GramMatrix::from_rows(gram)
                    .map(|g| min_eigenvalue(&g))
                    .unwrap_or(f64::NAN);
                let violation = if asym > RELATION_TOL {
                    Some(format!("gram is not symmetric (max asymmetry {asym:e})"))
                } else if let Some((name, r)) = residuals.iter().find(|(_, r)| r.abs() > RELATION_TOL) {
                    Some(format!("normalization {name} violated, residual {r:e}"))
                } else if min_eigenvalue.is_nan() || min_eigenvalue < -DEFAULT_PSD_TOL {
                    Some(format!("gram not PSD (minimum eigenvalue {min_eigenvalue:e})"))
                } else {
                    None
                };
                ValidationReport {
                    residuals,
                    min_eigenvalue,
                    violation,
                }
            }
        }
    }

    /// The symmetric attack described, if the file uses one of the symmetric families.
    pub fn symmetric(&self) -> Result<Option<SymmetricAttack>> {
        Ok(match self {
            Self::Incoherent { d, d1 } => Some(SymmetricAttack::Incoherent(IncoherentParams::new(*d, *d1)?)),
            Self::Coherent(s) => Some(SymmetricAttack::Coherent(CoherentParams::from_scalars(*s)?)),
            Self::Raw { .. } => None,
        })
    }

    /// Gram matrix of any feasible description.
    pub fn gram(&self) -> Result<GramMatrix> {
        match self {
            Self::Raw { gram, .. } => {
                if let Some(v) = self.validate().violation {
                    return Err(Error::Infeasible(v));
                }
                GramMatrix::from_rows(gram)
            }
            _ => Ok(self.symmetric()?.expect("symmetric family").gram()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::product_embedding;
    use crate::incoherent::optimal_attack;

    fn product_file() -> String {
        let s = *product_embedding(&optimal_attack(0.25).unwrap()).scalars();
        AttackSpec::Coherent(s).to_json()
    }

    #[test]
    fn incoherent_roundtrip() {
        let spec = AttackSpec::parse(r#"{"type":"incoherent","D":0.25,"D1":0.125}"#).unwrap();
        assert_eq!(spec, AttackSpec::Incoherent { d: 0.25, d1: 0.125 });
        assert_eq!(AttackSpec::parse(&spec.to_json()).unwrap(), spec);
        let r = spec.validate();
        assert!(r.feasible());
        assert!((r.min_eigenvalue - 0.125).abs() < 1e-15);
    }

    #[test]
    fn product_file_is_feasible() {
        let r = AttackSpec::parse(&product_file()).unwrap().validate();
        assert!(r.feasible(), "{r:?}");
        assert!(r.residuals.iter().all(|(_, x)| x.abs() < 1e-15));
        assert!(r.min_eigenvalue >= 0.0);
    }

    #[test]
    fn perturbed_b1_breaks_relation_three() {
        let mut v: Value = serde_json::from_str(&product_file()).unwrap();
        v["B1"] = Value::from(v["B1"].as_f64().unwrap() + 0.01);
        let r = AttackSpec::parse(&v.to_string()).unwrap().validate();
        assert!(!r.feasible());
        // A - B = A1 + B1 gives lhs - rhs = -0.01.
        assert!((r.residuals[2].1.abs() - 0.01).abs() < 1e-12);
        assert!(r.violation.unwrap().contains("relation 3"));
    }

    #[test]
    fn free_chart_matches_full_form() {
        let free = AttackSpec::parse(r#"{"type":"coherent","B":0,"C":0,"A1":1,"B2":0,"C1":0}"#).unwrap();
        assert_eq!(free, AttackSpec::Coherent(*CoherentParams::identity().scalars()));
        assert!(free.validate().feasible());
    }

    #[test]
    fn broken_normalization_names_relation_one() {
        let text = r#"{"type":"coherent","A":0.9,"A1":0.9,"A2":0.9,"B":0.1,"B1":0,"B2":0,"B3":0,"C":0,"C1":0,"C2":0}"#;
        let err = AttackSpec::parse(text).unwrap().symmetric().unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
        assert!(err.to_string().contains("relation 1"));
    }

    #[test]
    fn raw_gram_checks() {
        let mut gram = vec![vec![0.0; 4]; 4];
        gram[0][0] = 1.0;
        gram[3][3] = 1.0;
        let spec = AttackSpec::Raw {
            n: 1,
            gram: gram.clone(),
        };
        assert_eq!(AttackSpec::parse(&spec.to_json()).unwrap(), spec);
        assert!(spec.validate().feasible());
        gram[0][3] = 1.5;
        gram[3][0] = 1.5;
        let r = AttackSpec::Raw { n: 1, gram }.validate();
        assert!(!r.feasible() && (r.min_eigenvalue + 0.5).abs() < 1e-12);
    }

    #[test]
    fn parse_errors() {
        for text in [
            "[]",
            r#"{"D":0.1}"#,
            r#"{"type":"incoherent","D":0.1}"#,
            r#"{"type":"quantum"}"#,
            r#"{"type":"raw","n":3,"gram":[]}"#,
            r#"{"type":"raw","n":1,"gram":[[1]]}"#,
            "not json",
        ] {
            assert!(matches!(AttackSpec::parse(text), Err(Error::Parse(_))), "{text}");
        }
    }
}
