//! Dense covariance algebra: implied covariance of a parameterized model,
//! Gaussian prefix regressions, and pivoted linear solves with a condition
//! estimate.
//!
//! Convention: `lambda[(i, j)]` is the coefficient on edge `i -> j`, and the
//! implied covariance is `Σ = (I - Λ)^{-T} Ω (I - Λ)^{-1}`, so that
//! `[(I - Λ)^T Σ]_{y,p} = Cov(ε_y, X_p)`.

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{json_position, LinalgError};
use crate::graph::MixedGraph;

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Tolerance for the symmetry invariant of a constructed covariance.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance accepted when loading a covariance from user input.
pub const INPUT_SYMMETRY_TOL: f64 = 1e-8;
/// Relative pivot threshold below which a system is reported singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// Symmetric positive-definite matrix over an ordered list of node names.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    nodes: Vec<String>,
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(nodes: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        Self::validated(nodes, matrix, SYMMETRY_TOL)
    }

    /// Validation used for external input: asymmetry up to
    /// [`INPUT_SYMMETRY_TOL`] is tolerated and averaged away.
    pub fn from_input(nodes: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        Self::validated(nodes, matrix, INPUT_SYMMETRY_TOL)
    }

    fn validated(nodes: Vec<String>, matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = nodes.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(LinalgError::Dimension(format!(
                "{} names for a {}x{} matrix",
                n,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::Parse("non-finite entry".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                let diff = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if diff > tol {
                    return Err(LinalgError::Asymmetric {
                        row: nodes[i].clone(),
                        col: nodes[j].clone(),
                        diff,
                    });
                }
            }
        }
        let matrix = symmetrize(matrix);
        if n > 0 && Cholesky::new(matrix.clone()).is_none() {
            return Err(LinalgError::NotPositiveDefinite);
        }
        Ok(Self { nodes, matrix })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn get(&self, a: &str, b: &str) -> Result<f64> {
        let i = self
            .index_of(a)
            .ok_or_else(|| LinalgError::MissingNode(a.to_string()))?;
        let j = self
            .index_of(b)
            .ok_or_else(|| LinalgError::MissingNode(b.to_string()))?;
        Ok(self.matrix[(i, j)])
    }

    /// Marginal over `names`, in the given order.
    pub fn restrict(&self, names: &[String]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.index_of(n)
                    .ok_or_else(|| LinalgError::MissingNode(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])]);
        Ok(Self {
            nodes: names.to_vec(),
            matrix: m,
        })
    }

    /// Reorders to the node order of `g`, failing on any missing node.
    pub fn aligned_to(&self, g: &MixedGraph) -> Result<Self> {
        self.restrict(g.names())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let o = other.restrict(&self.nodes)?;
        Ok((&self.matrix - &o.matrix).amax())
    }

    pub fn to_json(&self) -> CovarianceFile {
        CovarianceFile {
            nodes: self.nodes.clone(),
            matrix: (0..self.dim())
                .map(|i| self.matrix.row(i).iter().copied().collect())
                .collect(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let f: CovarianceFile = serde_json::from_str(text).map_err(|e| {
            LinalgError::Parse(json_position(&e))
        })?;
        f.into_matrix()
    }

    /// CSV with a header row of node names followed by one row per node. A
    /// leading empty header cell marks a first column of row labels, which
    /// must repeat the header order.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| LinalgError::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let labelled = header.first().is_some_and(|h| h.is_empty());
        let names: Vec<String> = if labelled {
            header[1..].to_vec()
        } else {
            header
        };
        let n = names.len();
        let mut rows = Vec::with_capacity(n);
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| LinalgError::Parse(e.to_string()))?;
            let mut cells: Vec<&str> = rec.iter().collect();
            if labelled {
                let label = cells.remove(0);
                if names.get(r).map(String::as_str) != Some(label) {
                    return Err(LinalgError::Parse(format!(
                        "row {}: label `{}` does not match header order",
                        r + 2,
                        label
                    )));
                }
            }
            if cells.len() != n {
                return Err(LinalgError::Parse(format!(
                    "row {}: expected {} values, found {}",
                    r + 2,
                    n,
                    cells.len()
                )));
            }
            let vals = cells
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    s.parse::<f64>().map_err(|_| {
                        LinalgError::Parse(format!("row {} column {}: `{}`", r + 2, c + 1, s))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(vals);
        }
        if rows.len() != n {
            return Err(LinalgError::Parse(format!(
                "expected {} data rows, found {}",
                n,
                rows.len()
            )));
        }
        let m = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
        Self::from_input(names, m)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.nodes.join(",");
        out.push('\n');
        for i in 0..self.dim() {
            let row: Vec<String> = self.matrix.row(i).iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub(crate) fn from_trusted(nodes: Vec<String>, matrix: DMatrix<f64>) -> Self {
        Self {
            nodes,
            matrix: symmetrize(matrix),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceFile {
    pub nodes: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl CovarianceFile {
    pub fn into_matrix(self) -> Result<CovarianceMatrix> {
        let n = self.nodes.len();
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return Err(LinalgError::Dimension(format!(
                "expected a {n}x{n} matrix for {n} nodes"
            )));
        }
        let m = DMatrix::from_fn(n, n, |r, c| self.matrix[r][c]);
        CovarianceMatrix::from_input(self.nodes, m)
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Coefficients `Λ` (entry `(i, j)` for edge `i -> j`) and error covariance `Ω`,
/// indexed by the node ordinals of the graph they instantiate.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstance {
    pub lambda: DMatrix<f64>,
    pub omega: DMatrix<f64>,
}

impl ModelInstance {
    pub fn new(lambda: DMatrix<f64>, omega: DMatrix<f64>) -> Self {
        Self { lambda, omega }
    }

    /// Zero coefficients and identity error covariance.
    pub fn identity(n: usize) -> Self {
        Self {
            lambda: DMatrix::zeros(n, n),
            omega: DMatrix::identity(n, n),
        }
    }

    pub fn coefficient(&self, g: &MixedGraph, label: &str) -> Option<f64> {
        let e = g.edge(g.edge_by_label(label)?);
        Some(self.lambda[(e.tail.0, e.head.0)])
    }

    pub fn set_coefficient(&mut self, g: &MixedGraph, label: &str, value: f64) -> bool {
        match g.edge_by_label(label) {
            Some(id) => {
                let e = g.edge(id);
                self.lambda[(e.tail.0, e.head.0)] = value;
                true
            }
            None => false,
        }
    }

    /// Checks that sparsity matches `g` and that `Ω` is positive definite.
    pub fn conforms_to(&self, g: &MixedGraph) -> bool {
        let n = g.node_count();
        if self.lambda.shape() != (n, n) || self.omega.shape() != (n, n) {
            return false;
        }
        for i in 0..n {
            for j in 0..n {
                let vi = crate::graph::NodeId(i);
                let vj = crate::graph::NodeId(j);
                if self.lambda[(i, j)] != 0.0 && g.edge_between(vi, vj).is_none() {
                    return false;
                }
                if i != j && self.omega[(i, j)] != 0.0 && !g.has_bidirected(vi, vj) {
                    return false;
                }
                if (self.omega[(i, j)] - self.omega[(j, i)]).abs() > SYMMETRY_TOL {
                    return false;
                }
            }
        }
        Cholesky::new(self.omega.clone()).is_some()
    }
}

/// `Σ = (I - Λ)^{-T} Ω (I - Λ)^{-1}` over the node order of `g`.
pub fn implied_covariance(g: &MixedGraph, m: &ModelInstance) -> Result<CovarianceMatrix> {
    let n = g.node_count();
    if m.lambda.shape() != (n, n) || m.omega.shape() != (n, n) {
        return Err(LinalgError::Dimension(format!(
            "model is {:?}, graph has {} nodes",
            m.lambda.shape(),
            n
        )));
    }
    let i_minus = DMatrix::identity(n, n) - &m.lambda;
    let inv = i_minus
        .clone()
        .lu()
        .try_inverse()
        .ok_or(LinalgError::SingularModel)?;
    let sigma = inv.transpose() * &m.omega * inv;
    Ok(CovarianceMatrix::from_trusted(g.names().to_vec(), sigma))
}

/// Gaussian regression of `target` on `predictors` (matrix indices):
/// `β = Σ_PP^{-1} Σ_Pt` and residual variance `Σ_tt - Σ_tP β`.
pub fn prefix_regression(
    sigma: &DMatrix<f64>,
    target: usize,
    predictors: &[usize],
) -> Option<(Vec<f64>, f64)> {
    let k = predictors.len();
    let stt = sigma[(target, target)];
    if k == 0 {
        return (stt > 0.0).then(|| (Vec::new(), stt));
    }
    let spp = DMatrix::from_fn(k, k, |r, c| sigma[(predictors[r], predictors[c])]);
    let spt = DMatrix::from_fn(k, 1, |r, _| sigma[(predictors[r], target)]);
    let chol = Cholesky::new(spp)?;
    let beta = chol.solve(&spt);
    let resid = stt - (spt.transpose() * &beta)[(0, 0)];
    (resid > 0.0 && resid.is_finite()).then(|| (beta.iter().copied().collect(), resid))
}

/// [`prefix_regression`] against a named covariance, for callers outside the crate.
pub fn regress(
    sigma: &CovarianceMatrix,
    target: &str,
    predictors: &[&str],
) -> Result<(Vec<f64>, f64)> {
    let t = sigma
        .index_of(target)
        .ok_or_else(|| LinalgError::MissingNode(target.to_string()))?;
    let p = predictors
        .iter()
        .map(|n| {
            sigma
                .index_of(n)
                .ok_or_else(|| LinalgError::MissingNode(n.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    prefix_regression(sigma.matrix(), t, &p)
        .ok_or_else(|| LinalgError::SingularPrefix(target.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    /// 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁`.
    pub condition: f64,
}

struct Lu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let scale: Vec<f64> = (0..n)
            .map(|r| a.row(r).iter().fold(0.0f64, |m, x| m.max(x.abs())))
            .collect();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))
                .expect("nonempty pivot range");
            let row_scale = scale[perm[p]];
            if row_scale == 0.0 || lu[(p, k)].abs() < PIVOT_TOL * row_scale {
                return Err(LinalgError::Singular(k));
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        Ok(Self { lu, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[(i, j)] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[(i, j)] * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Solution> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(LinalgError::Dimension(format!(
            "A is {}x{}, b has {} entries",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Solution {
            x: Vec::new(),
            condition: 1.0,
        });
    }
    let lu = Lu::factor(a)?;
    let x = lu.solve(b);
    // Small systems: the exact inverse norm is cheap enough.
    let mut inv_norm = 0.0f64;
    let mut e = vec![0.0; n];
    for c in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[c] = 1.0;
        let col = lu.solve(&e);
        inv_norm = inv_norm.max(col.iter().map(|v| v.abs()).sum());
    }
    Ok(Solution {
        x,
        condition: norm1(a) * inv_norm,
    })
}
