//! Search for two parameterizations with the same covariance but different
//! values of one coefficient.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::random::random_instance;
use crate::graph::{EdgeId, MixedGraph};
use crate::linalg::ModelInstance;

/// Largest covariance gap accepted as "equal".
pub const SIGMA_MATCH: f64 = 1e-8;
/// Smallest coefficient gap accepted as "different".
pub const MIN_LAMBDA_GAP: f64 = 1e-3;

const MAX_ITERATIONS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub first: ModelInstance,
    pub second: ModelInstance,
    /// `max |Σ(first) - Σ(second)|`.
    pub sigma_gap: f64,
    /// `|λ(first) - λ(second)|` on the searched edge.
    pub lambda_gap: f64,
}

#[derive(Clone, Copy)]
enum Param {
    Lambda(usize, usize),
    Omega(usize, usize),
}

struct Problem<'a> {
    params: Vec<Param>,
    target: &'a DMatrix<f64>,
    n: usize,
}

fn mixing(lambda: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = lambda.nrows();
    (DMatrix::identity(n, n) - lambda).try_inverse()
}

impl Problem<'_> {
    fn apply(&self, base: &ModelInstance, theta: &DVector<f64>) -> ModelInstance {
        let mut m = base.clone();
        for (k, p) in self.params.iter().enumerate() {
            match *p {
                Param::Lambda(i, j) => m.lambda[(i, j)] = theta[k],
                Param::Omega(i, j) => {
                    m.omega[(i, j)] = theta[k];
                    m.omega[(j, i)] = theta[k];
                }
            }
        }
        m
    }

    fn read(&self, m: &ModelInstance) -> DVector<f64> {
        DVector::from_iterator(
            self.params.len(),
            self.params.iter().map(|p| match *p {
                Param::Lambda(i, j) => m.lambda[(i, j)],
                Param::Omega(i, j) => m.omega[(i, j)],
            }),
        )
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i..self.n).map(move |j| (i, j)))
    }

    /// Residuals over the upper triangle and their Jacobian.
    fn evaluate(&self, m: &ModelInstance) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let mm = mixing(&m.lambda)?;
        let sigma = mm.transpose() * &m.omega * &mm;
        let rows: Vec<(usize, usize)> = self.pairs().collect();
        let r = DVector::from_iterator(rows.len(), rows.iter().map(|&(i, j)| sigma[(i, j)] - self.target[(i, j)]));
        let mut jac = DMatrix::zeros(rows.len(), self.params.len());
        for (k, p) in self.params.iter().enumerate() {
            // dΣ = a bᵀ + b aᵀ for a parameter-specific pair of vectors.
            let (a, b, scale) = match *p {
                Param::Lambda(i, j) => {
                    let u = mm.transpose() * (&m.omega * mm.column(i));
                    (mm.row(j).transpose(), u, 1.0)
                }
                Param::Omega(i, j) => {
                    let half = if i == j { 0.5 } else { 1.0 };
                    (mm.row(i).transpose(), mm.row(j).transpose(), half)
                }
            };
            for (row, &(x, y)) in rows.iter().enumerate() {
                jac[(row, k)] = scale * (a[x] * b[y] + b[x] * a[y]);
            }
        }
        Some((r, jac))
    }
}

/// Levenberg–Marquardt on the covariance residuals, starting from `start`.
/// Returns the fitted instance and its final max-abs residual.
fn fit(problem: &Problem<'_>, start: &ModelInstance) -> Option<(ModelInstance, f64)> {
    let mut theta = problem.read(start);
    let mut m = start.clone();
    let (mut r, mut jac) = problem.evaluate(&m)?;
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        if r.amax() < 1e-14 {
            break;
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut a = jtj.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += mu * (jtj[(i, i)] + 1e-12);
        }
        let Some(chol) = a.cholesky() else {
            mu *= 10.0;
            continue;
        };
        let step = chol.solve(&(-g));
        let cand_theta = &theta + &step;
        let cand = problem.apply(&m, &cand_theta);
        match problem.evaluate(&cand) {
            Some((cr, cj)) if cr.norm_squared() < cost => {
                theta = cand_theta;
                m = cand;
                cost = cr.norm_squared();
                r = cr;
                jac = cj;
                mu = (mu * 0.3).max(1e-15);
            }
            _ => {
                mu *= 10.0;
                if mu > 1e12 {
                    break;
                }
            }
        }
    }
    Some((m, r.amax()))
}

fn positive_definite(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

/// Looks for two instances of `g` whose covariances agree to
/// [`SIGMA_MATCH`] while the coefficient of `edge` differs by at least
/// [`MIN_LAMBDA_GAP`]. Each try draws a fresh instance, shifts the
/// coefficient, and refits every other parameter. Finding nothing is not a
/// proof of identifiability.
pub fn nonident_witness(g: &MixedGraph, edge: EdgeId, tries: usize, seed: u64) -> Option<Witness> {
    let e = g.edge(edge);
    let n = g.node_count();
    let mut params: Vec<Param> = g
        .directed_edges()
        .iter()
        .filter(|d| d.label != e.label)
        .map(|d| Param::Lambda(d.tail.0, d.head.0))
        .collect();
    params.extend((0..n).map(|i| Param::Omega(i, i)));
    params.extend(g.bidirected_edges().iter().map(|b| Param::Omega(b.a.0, b.b.0)));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..tries {
        let first = random_instance(g, &mut rng);
        let mm = mixing(&first.lambda)?;
        let target = mm.transpose() * &first.omega * &mm;
        let problem = Problem {
            params: params.clone(),
            target: &target,
            n,
        };
        let shift = rng.gen_range(0.01..0.3) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut start = first.clone();
        start.lambda[(e.tail.0, e.head.0)] += shift;
        let Some((second, _)) = fit(&problem, &start) else {
            continue;
        };
        if !positive_definite(&second.omega) {
            continue;
        }
        let Some(m2) = mixing(&second.lambda) else {
            continue;
        };
        let sigma2 = m2.transpose() * &second.omega * &m2;
        let sigma_gap = (&sigma2 - &target).amax();
        let lambda_gap = shift.abs();
        if sigma_gap <= SIGMA_MATCH && lambda_gap >= MIN_LAMBDA_GAP {
            return Some(Witness {
                first,
                second,
                sigma_gap,
                lambda_gap,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bow_has_witness() {
        let g = MixedGraph::from_parts(&["x", "y"], &[("x", "y", "b")], &[("x", "y")]).unwrap();
        let w = nonident_witness(&g, g.edge_by_label("b").unwrap(), 20, 1).expect("witness");
        assert!(w.sigma_gap <= SIGMA_MATCH);
        assert!(w.lambda_gap >= MIN_LAMBDA_GAP);
    }

    #[test]
    fn instrument_has_none() {
        let g = MixedGraph::from_parts(
            &["z", "x", "y"],
            &[("z", "x", "a"), ("x", "y", "b")],
            &[("x", "y")],
        )
        .unwrap();
        assert!(nonident_witness(&g, g.edge_by_label("b").unwrap(), 200, 2).is_none());
    }

    #[test]
    fn chain_has_none() {
        let g = MixedGraph::from_parts(&["z", "x", "y"], &[("z", "x", "a"), ("x", "y", "b")], &[])
            .unwrap();
        assert!(nonident_witness(&g, g.edge_by_label("b").unwrap(), 200, 3).is_none());
    }
}
