use designforge_graph::{sample_lists, validate_latin_square, Graph, ListAssignment, ListError, ListMode};
use rand::Rng;

use crate::colouring::{solve_list_edge_colouring, ColouringResult, SolveBudget, SolveError};

/// `K_{n,n}` with rows `0..n` and columns `n..2n`.
pub fn complete_bipartite(n: usize) -> Graph {
    let mut g = Graph::new(2 * n);
    for i in 0..n {
        for j in 0..n {
            g.add_edge(i, n + j);
        }
    }
    g
}

/// Random lists on `K_{n,n}` over `n` colours.
pub fn random_latin_lists<R: Rng + ?Sized>(n: usize, mode: ListMode, rng: &mut R) -> Result<ListAssignment, ListError> {
    sample_lists(&complete_bipartite(n).edges(), mode, n, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatinResult {
    pub result: ColouringResult,
    /// Row-major, `square[i][j]` the symbol of cell `(i, j)`; on success only.
    pub square: Option<Vec<Vec<usize>>>,
}

/// Latin square of order `n` whose cell `(i, j)` uses a symbol from the
/// list of edge `(i, n + j)`.
pub fn latin_square_from_lists<R: Rng + ?Sized>(
    n: usize,
    lists: &ListAssignment,
    budget: &SolveBudget,
    rng: &mut R,
) -> Result<LatinResult, SolveError> {
    let result = solve_list_edge_colouring(&complete_bipartite(n), lists, budget, rng)?;
    let square = result.colouring().map(|c| {
        let mut sq = vec![vec![0; n]; n];
        for (&(i, j), &k) in result.edges.iter().zip(c) {
            sq[i][j - n] = k;
        }
        sq
    });
    if let Some(sq) = &square {
        let report = validate_latin_square(sq);
        if !report.valid {
            return Err(SolveError::Unsound(format!("{} Latin square violations", report.violations.len())));
        }
    }
    Ok(LatinResult { result, square })
}
