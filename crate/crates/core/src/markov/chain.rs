use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::{MarkovError, StochasticMatrix};

/// Transition probabilities at or below this are structural zeros.
pub const EDGE_TOL: f64 = 1e-12;

/// Recurrent/transient structure of a finite chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainDecomposition {
    /// Closed communicating classes, each sorted ascending; classes are
    /// ordered by their smallest state.
    pub recurrent_classes: Vec<Vec<usize>>,
    pub transient: Vec<usize>,
    /// Stationary distribution of each class, aligned with the class's
    /// state list.
    pub stationary: Vec<Vec<f64>>,
    /// For each transient state (aligned with `transient`), the probability
    /// of eventual absorption into each class.
    pub absorption: Vec<Vec<f64>>,
}

impl ChainDecomposition {
    /// Which class a state belongs to, if recurrent.
    pub fn class_of(&self, state: usize) -> Option<usize> {
        self.recurrent_classes
            .iter()
            .position(|c| c.contains(&state))
    }
}

pub fn decompose_chain(q: &StochasticMatrix) -> Result<ChainDecomposition, MarkovError> {
    let n = q.n();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if q[(i, j)] > EDGE_TOL {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut component = vec![usize::MAX; n];
    let sccs = tarjan_scc(&graph);
    for (c, scc) in sccs.iter().enumerate() {
        for node in scc {
            component[node.index()] = c;
        }
    }
    let mut closed = vec![true; sccs.len()];
    for i in 0..n {
        for j in 0..n {
            if q[(i, j)] > EDGE_TOL && component[i] != component[j] {
                closed[component[i]] = false;
            }
        }
    }

    let mut recurrent_classes: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|&(c, _)| closed[c])
        .map(|(_, scc)| {
            let mut states: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            states.sort_unstable();
            states
        })
        .collect();
    recurrent_classes.sort_by_key(|c| c[0]);
    let mut is_recurrent = vec![false; n];
    for c in &recurrent_classes {
        for &s in c {
            is_recurrent[s] = true;
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&s| !is_recurrent[s]).collect();

    let stationary = recurrent_classes
        .iter()
        .map(|class| stationary_of_class(q, class))
        .collect::<Result<Vec<_>, _>>()?;
    let absorption = absorption_probabilities(q, &transient, &recurrent_classes)?;

    Ok(ChainDecomposition {
        recurrent_classes,
        transient,
        stationary,
        absorption,
    })
}

/// Solve `π = π Q|_C`, `Σ π = 1` by LU on `Qᵀ − I` with the last equation
/// replaced by the normalisation row.
fn stationary_of_class(q: &StochasticMatrix, class: &[usize]) -> Result<Vec<f64>, MarkovError> {
    let k = class.len();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let mut a = DMatrix::<f64>::zeros(k, k);
    for (r, &i) in class.iter().enumerate() {
        for (c, &j) in class.iter().enumerate() {
            // row j of the system is the balance equation for state j
            a[(c, r)] = q[(i, j)];
        }
        a[(r, r)] -= 1.0;
    }
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let pi = a.lu().solve(&b).ok_or(MarkovError::Degenerate)?;
    if pi.iter().any(|x| !x.is_finite()) {
        return Err(MarkovError::Degenerate);
    }
    // clip rounding noise
    let mut pi: Vec<f64> = pi.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    Ok(pi)
}

/// Solve `(I − Q_TT) X = Q_TR · 1_C` for every class at once.
fn absorption_probabilities(
    q: &StochasticMatrix,
    transient: &[usize],
    classes: &[Vec<usize>],
) -> Result<Vec<Vec<f64>>, MarkovError> {
    let t = transient.len();
    if t == 0 {
        return Ok(Vec::new());
    }
    let mut a = DMatrix::<f64>::identity(t, t);
    for (r, &i) in transient.iter().enumerate() {
        for (c, &j) in transient.iter().enumerate() {
            a[(r, c)] -= q[(i, j)];
        }
    }
    let mut b = DMatrix::<f64>::zeros(t, classes.len());
    for (r, &i) in transient.iter().enumerate() {
        for (c, class) in classes.iter().enumerate() {
            b[(r, c)] = class.iter().map(|&j| q[(i, j)]).sum();
        }
    }
    let x = a.lu().solve(&b).ok_or(MarkovError::Degenerate)?;
    let mut rows = Vec::with_capacity(t);
    for r in 0..t {
        let mut row: Vec<f64> = (0..classes.len()).map(|c| x[(r, c)].max(0.0)).collect();
        let total: f64 = row.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(MarkovError::Degenerate);
        }
        row.iter_mut().for_each(|v| *v /= total);
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sm(rows: &[Vec<f64>]) -> StochasticMatrix {
        StochasticMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_two_classes() {
        let d = decompose_chain(&sm(&[vec![1.0, 0.0], vec![0.0, 1.0]])).unwrap();
        assert_eq!(d.recurrent_classes, vec![vec![0], vec![1]]);
        assert!(d.transient.is_empty());
    }

    #[test]
    fn example_chain() {
        let q = sm(&[
            vec![1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5, 0.0],
        ]);
        let d = decompose_chain(&q).unwrap();
        assert_eq!(d.recurrent_classes, vec![vec![0, 1], vec![2]]);
        assert_eq!(d.transient, vec![3]);
        assert!((d.stationary[0][0] - 3.0 / 7.0).abs() < 1e-14);
        assert!((d.stationary[0][1] - 4.0 / 7.0).abs() < 1e-14);
        assert_eq!(d.stationary[1], vec![1.0]);
        assert!((d.absorption[0][0] - 0.5).abs() < 1e-14);
        assert!((d.absorption[0][1] - 0.5).abs() < 1e-14);
        assert_eq!(d.class_of(1), Some(0));
        assert_eq!(d.class_of(3), None);
    }

    #[test]
    fn irreducible_has_no_transient() {
        let q = sm(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ]);
        let d = decompose_chain(&q).unwrap();
        assert_eq!(d.recurrent_classes.len(), 1);
        assert!(d.transient.is_empty());
        assert!((d.stationary[0].iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
