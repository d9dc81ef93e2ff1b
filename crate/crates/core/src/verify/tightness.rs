use super::{validity_check, VerifyError};
use crate::ecr::LinearCut;
use crate::lp::{solve_default, Cmp, LpModel, LpStatus, Sense, VarId};
use crate::model::{BilinearSet, Point};
use crate::network::ArcId;
use crate::rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessReport {
    /// distinct tight points of S found
    pub points: Vec<Point>,
    /// dimension of their affine hull (−1 when none)
    pub rank: i64,
}

fn coords(p: &Point) -> Vec<f64> {
    p.x.values().chain(&p.y).chain(p.z.values()).copied().collect()
}

/// Dimension of the affine hull of `pts` (−1 for none), by Gaussian
/// elimination on the differences with a relative pivot threshold.
pub fn affine_rank(pts: &[Vec<f64>]) -> i64 {
    let Some(base) = pts.first() else { return -1 };
    let mut rows: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let scale = rows.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let n = base.len();
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..rows.len()).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs())) else { break };
        if rows[piv][col].abs() <= 1e-9 * scale {
            continue;
        }
        rows.swap(rank, piv);
        for r in 0..rows.len() {
            if r != rank {
                let f = rows[r][col] / rows[rank][col];
                if f != 0.0 {
                    for c in col..n {
                        rows[r][c] -= f * rows[rank][c];
                    }
                }
            }
        }
        rank += 1;
    }
    rank as i64
}

/// Samples optima of random objectives over the cut's face in each disjunct
/// and reports the affine rank of the tight points (a lower bound on the
/// face dimension). Invalid cuts give an empty report.
pub fn tightness_report(cut: &LinearCut, s: &BilinearSet, samples: usize, seed: u64) -> Result<TightnessReport, VerifyError> {
    let empty = TightnessReport { points: Vec::new(), rank: -1 };
    if !validity_check(cut, s)?.valid {
        return Ok(empty);
    }
    let f = rational::to_f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Point> = Vec::new();
    for j in std::iter::once(None).chain((0..s.m()).map(Some)) {
        let mut yh = vec![0.0; s.m()];
        if let Some(j) = j {
            yh[j] = 1.0;
        }
        let mut lp = LpModel::new(Sense::Minimize);
        let x: BTreeMap<ArcId, VarId> = s
            .net()
            .arcs()
            .iter()
            .map(|a| (a.id, lp.add_var(format!("x{}", a.id), 0.0, f(&a.capacity), 0.0)))
            .collect();
        BilinearSet::add_xi_rows(s.net(), &mut lp, &x, "");
        // slack(x) = 0 on this disjunct
        let mut face: BTreeMap<ArcId, f64> = cut.q.iter().map(|(a, c)| (*a, f(c))).collect();
        for t in s.triples() {
            if Some(t.j) == j {
                *face.entry(t.arc).or_default() += cut.s.get(&t.k).map(f).unwrap_or(0.0);
            }
        }
        let rhs = f(&cut.t) - cut.r.iter().zip(&yh).map(|(c, y)| f(c) * y).sum::<f64>();
        lp.add_row("face", face.iter().map(|(a, c)| (x[a], *c)).collect(), Cmp::Eq, rhs);
        for _ in 0..samples {
            for v in x.values() {
                lp.set_objective(*v, StandardNormal.sample(&mut rng));
            }
            let sol = solve_default(&lp)?;
            if sol.status != LpStatus::Optimal {
                break;
            }
            let p = Point::lifted(s, x.iter().map(|(a, v)| (*a, sol.value(*v))).collect(), &yh);
            if !pts.iter().any(|q| coords(q).iter().zip(coords(&p)).all(|(a, b)| (a - b).abs() < 1e-9)) {
                pts.push(p);
            }
        }
    }
    let rank = affine_rank(&pts.iter().map(coords).collect::<Vec<_>>());
    Ok(TightnessReport { points: pts, rank })
}
