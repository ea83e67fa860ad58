use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform grid on [-L, L], symmetric about the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    half_length: f64,
    n_points: usize,
    spacing: f64,
    #[serde(skip)]
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid half length must be positive and finite, got {half_length}"
            )));
        }
        if n_points < 3 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 3 points, got {n_points}"
            )));
        }
        let intervals = (n_points - 1) as f64;
        let spacing = 2.0 * half_length / intervals;
        // x_i = L (2i - (n-1)) / (n-1) is exactly antisymmetric in i and hits 0
        // for odd n.
        let nodes = (0..n_points)
            .map(|i| half_length * (2.0 * i as f64 - intervals) / intervals)
            .collect();
        Ok(Self {
            half_length,
            n_points,
            spacing,
            nodes,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Index of the node at x = 0, present only for odd point counts.
    pub fn origin_index(&self) -> Option<usize> {
        (self.n_points % 2 == 1).then_some(self.n_points / 2)
    }

    /// Number of nodes making up `fraction` of the grid on one side, at least one.
    pub fn edge_count(&self, fraction: f64) -> usize {
        ((self.n_points as f64 * fraction).round() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_with_origin() {
        let g = Grid::new(20.0, 2001).unwrap();
        assert_eq!(g.origin_index(), Some(1000));
        assert_eq!(g.node(1000), 0.0);
        assert_eq!(g.node(0), -20.0);
        assert_eq!(g.node(2000), 20.0);
        for i in 0..g.len() {
            assert_eq!(g.node(i), -g.node(g.len() - 1 - i));
        }
        assert!((g.spacing() * 2000.0 - 40.0).abs() < 1e-12);
    }

    #[test]
    fn even_count_has_no_origin_node() {
        let g = Grid::new(1.0, 4).unwrap();
        assert_eq!(g.origin_index(), None);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Grid::new(0.0, 11).is_err());
        assert!(Grid::new(-1.0, 11).is_err());
        assert!(Grid::new(f64::INFINITY, 11).is_err());
        assert!(Grid::new(1.0, 2).is_err());
    }
}
