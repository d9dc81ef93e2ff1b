use super::{AggregatedInequality, EcrError, LinearCut, Provenance, TermChoice};
use crate::model::{BilinearSet, Point};
use crate::network::ArcId;
use crate::rational::{self, Rational};
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How a surviving term `c·y_j x_i` is linearised. The declaration order is
/// the tie-break order.
///
/// | option     | c > 0                           | c < 0                                 |
/// |------------|---------------------------------|---------------------------------------|
/// | BoundLower | `(1−y)x_i ≥ 0` → `c x_i` (m=1)   | `y_j x_i ≥ 0` → `0`                   |
/// | BoundUpper | `y_j(u_i−x_i) ≥ 0` → `c u_i y_j` | `(1−y)(u_i−x_i) ≥ 0` → `−c(u_i−x_i−u_i y)` (m=1) |
/// | Bilinear   | `z_k − y_j x_i ≥ 0` → `c z_k`    | `y_j x_i − z_k ≥ 0` → `c z_k`          |
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelaxOption {
    BoundLower,
    BoundUpper,
    Bilinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainingTerm {
    pub arc: ArcId,
    pub j: usize,
    pub coef: Rational,
    pub options: Vec<RelaxOption>,
}

pub fn remaining_terms(agg: &AggregatedInequality, s: &BilinearSet) -> Result<Vec<RemainingTerm>, EcrError> {
    agg.bilinear
        .iter()
        .map(|(&(arc, j), c)| {
            let single = s.m() == 1;
            let mut options = Vec::with_capacity(3);
            if c.is_positive() {
                if single {
                    options.push(RelaxOption::BoundLower);
                }
                options.push(RelaxOption::BoundUpper);
            } else {
                options.push(RelaxOption::BoundLower);
                if single {
                    options.push(RelaxOption::BoundUpper);
                }
            }
            if s.triple_for(arc, j).is_some() {
                options.push(RelaxOption::Bilinear);
            }
            if options.is_empty() {
                return Err(EcrError::OptionUnavailable { arc, j });
            }
            Ok(RemainingTerm { arc, j, coef: c.clone(), options })
        })
        .collect()
}

struct Linear {
    x: BTreeMap<ArcId, Rational>,
    y: Vec<Rational>,
    z: BTreeMap<u32, Rational>,
    constant: Rational,
}

impl Linear {
    fn from(agg: &AggregatedInequality) -> Self {
        Linear { x: agg.x.clone(), y: agg.y.clone(), z: agg.z.clone(), constant: agg.constant.clone() }
    }

    fn apply(&mut self, s: &BilinearSet, t: &RemainingTerm, o: RelaxOption) {
        let c = &t.coef;
        let u = s.capacity(t.arc);
        fn add<K: Ord>(m: &mut BTreeMap<K, Rational>, k: K, v: Rational) {
            *m.entry(k).or_insert_with(rational::zero) += v;
        }
        match (c.is_positive(), o) {
            (true, RelaxOption::BoundLower) => add(&mut self.x, t.arc, c.clone()),
            (true, RelaxOption::BoundUpper) => self.y[t.j] += c * &u,
            (false, RelaxOption::BoundLower) => {}
            (false, RelaxOption::BoundUpper) => {
                // |c|(u − x − u y) with c < 0 (m = 1)
                self.constant -= c * &u;
                add(&mut self.x, t.arc, c.clone());
                self.y[t.j] += c * &u;
            }
            (_, RelaxOption::Bilinear) => {
                let k = s.triple_for(t.arc, t.j).expect("option offered only with a triple").k;
                add(&mut self.z, k, c.clone());
            }
        }
    }

    fn into_cut(self, provenance: Provenance) -> LinearCut {
        let mut cut = LinearCut::from_parts(self.x, self.y, self.z, -self.constant);
        cut.provenance = Some(provenance);
        cut
    }
}

/// Value at `p` of the linear replacement of term `t` under option `o`.
fn replacement_value(s: &BilinearSet, t: &RemainingTerm, o: RelaxOption, p: &Exact) -> Rational {
    let c = &t.coef;
    let u = s.capacity(t.arc);
    let (x, y) = (p.x(t.arc), &p.y[t.j]);
    match (c.is_positive(), o) {
        (true, RelaxOption::BoundLower) => c * x,
        (true, RelaxOption::BoundUpper) => c * &u * y,
        (false, RelaxOption::BoundLower) => rational::zero(),
        (false, RelaxOption::BoundUpper) => -c * (&u - x - &u * y),
        (_, RelaxOption::Bilinear) => c * p.z(s.triple_for(t.arc, t.j).expect("triple").k),
    }
}

/// Exact copy of a point's coordinates.
struct Exact {
    x: BTreeMap<ArcId, Rational>,
    y: Vec<Rational>,
    z: BTreeMap<u32, Rational>,
    zero: Rational,
}

impl Exact {
    fn new(p: &Point) -> Self {
        let e = |v: f64| rational::from_f64(v).unwrap_or_else(rational::zero);
        Exact {
            x: p.x.iter().map(|(a, v)| (*a, e(*v))).collect(),
            y: p.y.iter().map(|v| e(*v)).collect(),
            z: p.z.iter().map(|(k, v)| (*k, e(*v))).collect(),
            zero: rational::zero(),
        }
    }

    fn x(&self, a: ArcId) -> &Rational {
        self.x.get(&a).unwrap_or(&self.zero)
    }

    fn z(&self, k: u32) -> &Rational {
        self.z.get(&k).unwrap_or(&self.zero)
    }
}

pub fn relax_with(agg: &AggregatedInequality, s: &BilinearSet, choices: &[RelaxOption]) -> Result<LinearCut, EcrError> {
    let terms = remaining_terms(agg, s)?;
    if terms.len() != choices.len() {
        return Err(EcrError::InvalidAssignment(format!("{} choices for {} terms", choices.len(), terms.len())));
    }
    let mut lin = Linear::from(agg);
    let mut picked = Vec::with_capacity(terms.len());
    for (t, &o) in terms.iter().zip(choices) {
        if !t.options.contains(&o) {
            return Err(EcrError::OptionUnavailable { arc: t.arc, j: t.j });
        }
        lin.apply(s, t, o);
        picked.push(TermChoice { arc: t.arc, j: t.j, option: o });
    }
    Ok(lin.into_cut(Provenance { assignment: agg.assignment.clone(), choices: picked }))
}

/// Every combination of per-term options; the last term varies fastest.
pub fn relax_all(agg: &AggregatedInequality, s: &BilinearSet) -> Result<Vec<LinearCut>, EcrError> {
    let terms = remaining_terms(agg, s)?;
    let mut idx = vec![0usize; terms.len()];
    let mut out = Vec::new();
    loop {
        let choices: Vec<RelaxOption> = terms.iter().zip(&idx).map(|(t, &i)| t.options[i]).collect();
        out.push(relax_with(agg, s, &choices)?);
        let mut p = terms.len();
        loop {
            if p == 0 {
                return Ok(out);
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < terms[p].options.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// The cut of `relax_all` with the smallest left-hand side at `p`, found
/// term by term (ties go to the earlier option).
pub fn relax_most_violated(agg: &AggregatedInequality, s: &BilinearSet, p: &Point) -> Result<LinearCut, EcrError> {
    if p.y.len() != s.m() {
        return Err(EcrError::DimensionMismatch);
    }
    let terms = remaining_terms(agg, s)?;
    let exact = Exact::new(p);
    let choices: Vec<RelaxOption> = terms
        .iter()
        .map(|t| {
            let mut best = t.options[0];
            let mut best_v = replacement_value(s, t, best, &exact);
            for &o in &t.options[1..] {
                let v = replacement_value(s, t, o, &exact);
                if v < best_v {
                    best = o;
                    best_v = v;
                }
            }
            best
        })
        .collect();
    relax_with(agg, s, &choices)
}
