use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{Certificate, RowKind};
use crate::error::{EstimateError, LinalgError};
use crate::graph::MixedGraph;
use crate::linalg::CovarianceMatrix;

/// Linear system `A x = b` whose solution is the coefficients of
/// `cert.edges`, in tail order. Row `i` belongs to `cert.y_set[i]`; column
/// `j` is the covariance with tail `j` and `b` is the covariance with the
/// head. Residual rows subtract the dependency edges into `y` using
/// `lambda_hat`.
pub fn build_system(
    g: &MixedGraph,
    cert: &Certificate,
    sigma: &CovarianceMatrix,
    lambda_hat: &BTreeMap<String, f64>,
) -> Result<(DMatrix<f64>, Vec<f64>), EstimateError> {
    let missing: Vec<String> = cert
        .dependencies
        .iter()
        .filter(|d| !lambda_hat.contains_key(*d))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(EstimateError::MissingDependencies {
            certificate: cert.id,
            labels: missing,
        });
    }
    let linalg = |source| EstimateError::Linalg {
        certificate: cert.id,
        source,
    };
    let idx = |name: &str| {
        sigma
            .index_of(name)
            .ok_or_else(|| linalg(LinalgError::MissingNode(name.to_string())))
    };
    let m = sigma.matrix();
    let columns: Vec<usize> = cert
        .tails
        .iter()
        .map(|t| idx(t))
        .collect::<Result<_, _>>()?;
    let head = idx(&cert.head)?;

    let k = cert.y_set.len();
    let mut a = DMatrix::zeros(k, columns.len());
    let mut b = vec![0.0; k];
    for (i, (y, kind)) in cert.y_set.iter().zip(&cert.row_kinds).enumerate() {
        // Row weights over sigma's nodes: e_y minus dependency coefficients.
        let mut weights = vec![(idx(y)?, 1.0)];
        if *kind == RowKind::Residual {
            let yn = g.node(y)?;
            for &e in g.inc(yn) {
                let edge = g.edge(e);
                if let Some(val) = lambda_hat.get(&edge.label) {
                    if cert.dependencies.contains(&edge.label) {
                        weights.push((idx(g.name(edge.tail))?, -val));
                    }
                }
            }
        }
        let entry = |c: usize| weights.iter().map(|&(r, w)| w * m[(r, c)]).sum::<f64>();
        for (j, &c) in columns.iter().enumerate() {
            a[(i, j)] = entry(c);
        }
        b[i] = entry(head);
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::htc::ht_id;
    use crate::htc::HtcMode;
    use crate::linalg::{implied_covariance, solve, ModelInstance};

    #[test]
    fn instrument_system_recovers_coefficient() {
        let g = MixedGraph::from_parts(
            &["z", "x", "y"],
            &[("z", "x", "a"), ("x", "y", "b")],
            &[("x", "y")],
        )
        .unwrap();
        let mut m = ModelInstance::identity(3);
        m.set_coefficient(&g, "a", 0.8);
        m.set_coefficient(&g, "b", -0.6);
        m.omega[(1, 2)] = 0.4;
        m.omega[(2, 1)] = 0.4;
        let sigma = implied_covariance(&g, &m).unwrap();
        let status = ht_id(&g, HtcMode::Plain);
        let cert = status.certificate_for("b").unwrap();
        let (a, b) = build_system(&g, cert, &sigma, &BTreeMap::new()).unwrap();
        let x = solve(&a, &b).unwrap().x;
        assert!((x[0] + 0.6).abs() < 1e-12);
    }

    #[test]
    fn missing_dependency_is_reported() {
        let g = MixedGraph::from_parts(
            &["x", "y", "w"],
            &[("x", "y", "b"), ("y", "w", "c")],
            &[("x", "y")],
        )
        .unwrap();
        let cert = Certificate {
            id: 7,
            head: "y".into(),
            edges: vec!["b".into()],
            tails: vec!["x".into()],
            y_set: vec!["w".into()],
            row_kinds: vec![RowKind::Residual],
            dependencies: vec!["c".into()],
            context: Default::default(),
            round: 1,
        };
        let sigma = implied_covariance(&g, &ModelInstance::identity(3)).unwrap();
        let err = build_system(&g, &cert, &sigma, &BTreeMap::new()).unwrap_err();
        assert_eq!(
            err,
            EstimateError::MissingDependencies {
                certificate: 7,
                labels: vec!["c".into()]
            }
        );
    }
}
