//! Instance files.
//!
//! ```json
//! {"family": "maxnorm", "seed": 3, "n": 2, "m": 5, "Q": [[..]], "q": [..],
//!  "balls": [{"c": [..], "rho": 1.0}, ..], "witness": [..]}
//! ```
//!
//! Linear-case instances carry `g2` and `h2` and list the unit ball as their
//! only entry of `balls`. Unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conic::SymMatrix;
use crate::error::{Error, Result};
use crate::instances::model::{Ball, BallQpInstance, Instance, LinearTwoInstance, Provenance};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BallRecord {
    c: Vec<f64>,
    rho: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    family: String,
    seed: u64,
    n: usize,
    m: usize,
    #[serde(rename = "Q")]
    q_mat: Vec<Vec<f64>>,
    q: Vec<f64>,
    balls: Vec<BallRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h2: Option<Vec<f64>>,
    #[serde(default)]
    witness: Vec<f64>,
}

impl From<&Instance<f64>> for InstanceRecord {
    fn from(inst: &Instance<f64>) -> Self {
        let prov = inst.provenance();
        let (balls, g2, h2) = match inst {
            Instance::Balls(b) => (
                b.balls.iter().map(|b| BallRecord { c: b.center.clone(), rho: b.radius }).collect(),
                None,
                None,
            ),
            Instance::Linear(l) => (
                vec![BallRecord { c: vec![0.0; l.n()], rho: 1.0 }],
                Some(l.g2),
                Some(l.h2.clone()),
            ),
        };
        InstanceRecord {
            family: prov.family.clone(),
            seed: prov.seed,
            n: inst.n(),
            m: inst.m(),
            q_mat: inst.q_mat().rows_vec(),
            q: match inst {
                Instance::Balls(b) => b.q.clone(),
                Instance::Linear(l) => l.q.clone(),
            },
            balls,
            g2,
            h2,
            witness: inst.witness().map(<[f64]>::to_vec).unwrap_or_default(),
        }
    }
}

impl TryFrom<InstanceRecord> for Instance<f64> {
    type Error = Error;

    fn try_from(r: InstanceRecord) -> Result<Self> {
        let q_mat = SymMatrix::from_rows(&r.q_mat)?;
        if r.q.len() != r.n {
            return Err(Error::invalid(format!("field n = {} disagrees with q of length {}", r.n, r.q.len())));
        }
        let prov = Provenance::new(r.family, r.seed);
        let witness = (!r.witness.is_empty()).then_some(r.witness);
        let inst: Instance<f64> = match (r.g2, r.h2) {
            (Some(g2), Some(h2)) => {
                if r.m != 2 {
                    return Err(Error::invalid("linear-case instances have m = 2"));
                }
                let unit = r.balls.len() == 1 && r.balls[0].rho == 1.0 && r.balls[0].c.iter().all(|&c| c == 0.0);
                if !unit {
                    return Err(Error::invalid("linear-case instances list exactly the unit ball"));
                }
                let mut l = LinearTwoInstance::new(q_mat, r.q, g2, h2)?.with_provenance(prov);
                l.witness = witness;
                l.into()
            }
            (None, None) => {
                if r.m != r.balls.len() {
                    return Err(Error::invalid(format!("field m = {} but {} balls listed", r.m, r.balls.len())));
                }
                let balls = r.balls.into_iter().map(|b| Ball::new(b.c, b.rho)).collect();
                let mut b = BallQpInstance::new(q_mat, r.q, balls)?.with_provenance(prov);
                b.witness = witness;
                b.into()
            }
            _ => return Err(Error::invalid("g2 and h2 must be given together")),
        };
        if let Some(w) = inst.witness() {
            if w.len() != inst.n() {
                return Err(Error::dimension("witness has the wrong length"));
            }
        }
        Ok(inst)
    }
}

impl Instance<f64> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&InstanceRecord::from(self)).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: InstanceRecord = serde_json::from_str(text)?;
        record.try_into()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Instance<f64> {
        BallQpInstance::new(
            SymMatrix::from_rows(&[vec![-0.12, 0.66], vec![0.66, -1.58]]).unwrap(),
            vec![1.04, 0.10],
            vec![Ball::unit(2), Ball::new(vec![0.09, -0.34], 0.98)],
        )
        .unwrap()
        .with_provenance(Provenance::new("example", 0))
        .with_witness(vec![0.0, 0.0])
        .into()
    }

    #[test]
    fn roundtrip_balls() {
        let inst = sample();
        let text = inst.to_json();
        assert!(text.contains("\"Q\""));
        assert!(!text.contains("g2"));
        let back = Instance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn roundtrip_linear() {
        let inst: Instance<f64> = LinearTwoInstance::new(SymMatrix::identity(2), vec![0.5, 0.25], 1.52, vec![0.19, -0.91])
            .unwrap()
            .into();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn unknown_field_rejected() {
        let text = sample().to_json().replacen("\"family\"", "\"extra\": 1, \"family\"", 1);
        assert!(Instance::from_json(&text).is_err());
    }

    #[test]
    fn inconsistent_m_rejected() {
        let text = sample().to_json().replacen("\"m\": 2", "\"m\": 3", 1);
        assert!(Instance::from_json(&text).is_err());
    }
}
