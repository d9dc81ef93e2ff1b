use super::{EcrAssignment, RelaxOption};
use crate::model::{BilinearSet, Point};
use crate::network::ArcId;
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermChoice {
    pub arc: ArcId,
    pub j: usize,
    pub option: RelaxOption,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub assignment: EcrAssignment,
    pub choices: Vec<TermChoice>,
}

/// `Σ q_i x_i + Σ r_j y_j + Σ s_k z_k ≥ t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCut {
    #[serde(with = "rational::serde_q::map")]
    pub q: BTreeMap<ArcId, Rational>,
    #[serde(with = "rational::serde_q::vec")]
    pub r: Vec<Rational>,
    #[serde(with = "rational::serde_q::map")]
    pub s: BTreeMap<u32, Rational>,
    #[serde(with = "rational::serde_q")]
    pub t: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Coefficients only, for deduplication and equality checks.
pub type CutKey = (BTreeMap<ArcId, Rational>, Vec<Rational>, BTreeMap<u32, Rational>, Rational);

impl LinearCut {
    pub fn from_parts(
        mut q: BTreeMap<ArcId, Rational>,
        r: Vec<Rational>,
        mut s: BTreeMap<u32, Rational>,
        t: Rational,
    ) -> Self {
        q.retain(|_, v| !v.is_zero());
        s.retain(|_, v| !v.is_zero());
        LinearCut { q, r, s, t, provenance: None }
    }

    pub fn key(&self) -> CutKey {
        (self.q.clone(), self.r.clone(), self.s.clone(), self.t.clone())
    }

    /// LHS − t at `p` (negative means violated).
    pub fn slack(&self, p: &Point) -> f64 {
        let f = rational::to_f64;
        self.q.iter().map(|(a, c)| f(c) * p.x(*a)).sum::<f64>()
            + self.r.iter().zip(&p.y).map(|(c, v)| f(c) * v).sum::<f64>()
            + self.s.iter().map(|(k, c)| f(c) * p.z(*k)).sum::<f64>()
            - f(&self.t)
    }

    /// Exact LHS − t at the exact values of `p`'s doubles.
    pub fn slack_exact(&self, p: &Point) -> Rational {
        let e = |v: f64| rational::from_f64(v).unwrap_or_else(rational::zero);
        let mut acc = -self.t.clone();
        for (a, c) in &self.q {
            acc += c * e(p.x(*a));
        }
        for (c, v) in self.r.iter().zip(&p.y) {
            acc += c * e(*v);
        }
        for (k, c) in &self.s {
            acc += c * e(p.z(*k));
        }
        acc
    }

    pub fn violation(&self, p: &Point) -> f64 {
        -self.slack(p)
    }

    /// Largest absolute coefficient, used to normalise violations.
    pub fn norm_inf(&self) -> f64 {
        self.q
            .values()
            .chain(&self.r)
            .chain(self.s.values())
            .map(|c| rational::to_f64(&c.abs()))
            .fold(0.0, f64::max)
    }

    pub fn conforms(&self, s: &BilinearSet) -> bool {
        self.r.len() == s.m()
            && self.q.keys().all(|a| s.net().has_arc(*a))
            && self.s.keys().all(|k| s.triple(*k).is_some())
    }

    /// Human-readable form, e.g. `-z1 + x1 - x2 + 3 y0 >= 2`.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        let mut term = |c: &Rational, var: String| {
            if c.is_zero() {
                return;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            let coef = if a == rational::one() { String::new() } else { format!("{} ", rational::format(&a)) };
            if out.is_empty() {
                let _ = write!(out, "{}{coef}{var}", if sign == "-" { "-" } else { "" });
            } else {
                let _ = write!(out, " {sign} {coef}{var}");
            }
        };
        for (k, c) in &self.s {
            term(c, format!("z{k}"));
        }
        for (j, c) in self.r.iter().enumerate() {
            term(c, format!("y{j}"));
        }
        for (a, c) in &self.q {
            term(c, format!("x{a}"));
        }
        if out.is_empty() {
            out.push('0');
        }
        format!("{out} >= {}", rational::format(&self.t))
    }
}

/// File format for a list of cuts, each tagged with the relaxation set it was
/// generated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutFile {
    pub cuts: Vec<TaggedCut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedCut {
    /// program-level y indices of the set (the set's `y_ids`)
    pub ys: Vec<usize>,
    #[serde(flatten)]
    pub cut: LinearCut,
}

impl CutFile {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let f: CutFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        for c in &f.cuts {
            if c.ys.len() != c.cut.r.len() {
                return Err("cut r length differs from its y list".into());
            }
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cuts serialize")
    }
}
