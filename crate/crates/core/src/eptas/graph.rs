//! Layered DAG with a single source in the top layer and a sink behind
//! layer 0.

use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no path from the source to the sink")]
pub struct NoPath;

/// `layers[q]` holds the node values of layer `q`. An edge runs from node
/// `a` of layer `q` to node `b` of layer `q - 1` with length
/// `edges[q][a][b]` (`None` when absent); `edges[0]` is empty. Every node of
/// layer 0 may have an edge to the sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredGraph {
    pub layers: Vec<Vec<Rational>>,
    pub edges: Vec<Vec<Vec<Option<Rational>>>>,
    pub sink: Vec<Option<Rational>>,
    /// Index of the source node in the top layer.
    pub source: usize,
}

impl LayeredGraph {
    pub fn top(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum::<usize>() + 1
    }

    pub fn edge_count(&self) -> usize {
        let inner: usize = self
            .edges
            .iter()
            .flatten()
            .map(|row| row.iter().filter(|e| e.is_some()).count())
            .sum();
        inner + self.sink.iter().filter(|e| e.is_some()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    /// `nodes[q]` is the node index used in layer `q`.
    pub nodes: Vec<usize>,
    pub length: Rational,
}

/// Backward relaxation from the sink, then a forward walk from the source
/// that takes the lowest-index successor among the optimal ones, which
/// yields the lexicographically smallest optimal node sequence.
pub fn shortest_path(graph: &LayeredGraph) -> Result<Path, NoPath> {
    let top = graph.top();
    let mut dist: Vec<Vec<Option<Rational>>> = Vec::with_capacity(top + 1);
    dist.push(graph.sink.clone());
    for q in 1..=top {
        let below = &dist[q - 1];
        let row: Vec<Option<Rational>> = graph.edges[q]
            .iter()
            .map(|out| {
                out.iter()
                    .zip(below)
                    .filter_map(|(e, d)| Some(e.as_ref()? + d.as_ref()?))
                    .min()
            })
            .collect();
        dist.push(row);
    }
    let length = dist[top][graph.source].clone().ok_or(NoPath)?;
    let mut nodes = vec![0; top + 1];
    nodes[top] = graph.source;
    let mut remaining = length.clone();
    for q in (1..=top).rev() {
        let a = nodes[q];
        let (b, rest) = graph.edges[q][a]
            .iter()
            .zip(&dist[q - 1])
            .enumerate()
            .find_map(|(b, (e, d))| {
                let (e, d) = (e.as_ref()?, d.as_ref()?);
                (e + d == remaining).then(|| (b, d.clone()))
            })
            .expect("optimal successor exists");
        nodes[q - 1] = b;
        remaining = rest;
    }
    debug_assert_eq!(graph.sink[nodes[0]].as_ref(), Some(&remaining));
    Ok(Path { nodes, length })
}
