//! Greedy nearest-E^2 pairing of analytic and numeric levels.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub analytic_e_squared: f64,
    pub numeric_e_squared: f64,
    pub absolute_deviation: f64,
    pub relative_deviation: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// Ordered by analytic value.
    pub records: Vec<MatchRecord>,
    pub unmatched_analytic: Vec<f64>,
    pub unmatched_numeric: Vec<f64>,
}

/// Acceptance rule shared by the run and `--recheck`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Tolerance {
    pub fn accepts(&self, analytic: f64, numeric: f64) -> bool {
        (analytic - numeric).abs() <= self.absolute.max(self.relative * analytic.abs())
    }
}

/// Repeatedly pair the closest remaining (analytic, numeric) couple while its
/// distance is within `window`. Ties break by analytic, then numeric index.
pub fn greedy_match(analytic: &[f64], numeric: &[f64], window: f64, tol: Tolerance) -> Matching {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in analytic.iter().enumerate() {
        for (j, n) in numeric.iter().enumerate() {
            let d = (a - n).abs();
            if d <= window {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; analytic.len()];
    let mut used_n = vec![false; numeric.len()];
    let mut chosen = Vec::new();
    for (_, i, j) in pairs {
        if !used_a[i] && !used_n[j] {
            used_a[i] = true;
            used_n[j] = true;
            chosen.push((i, j));
        }
    }
    chosen.sort_unstable();
    let records = chosen
        .into_iter()
        .map(|(i, j)| record(analytic[i], numeric[j], tol))
        .collect();
    Matching {
        records,
        unmatched_analytic: analytic
            .iter()
            .zip(&used_a)
            .filter(|(_, u)| !**u)
            .map(|(a, _)| *a)
            .collect(),
        unmatched_numeric: numeric
            .iter()
            .zip(&used_n)
            .filter(|(_, u)| !**u)
            .map(|(n, _)| *n)
            .collect(),
    }
}

pub fn record(analytic: f64, numeric: f64, tol: Tolerance) -> MatchRecord {
    let abs = (analytic - numeric).abs();
    MatchRecord {
        analytic_e_squared: analytic,
        numeric_e_squared: numeric,
        absolute_deviation: abs,
        relative_deviation: (analytic != 0.0).then(|| abs / analytic.abs()),
        pass: tol.accepts(analytic, numeric),
    }
}

/// Sorted values with neighbours closer than `tol` merged into the first.
pub fn distinct(values: &[f64], tol: f64) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        match out.last() {
            Some(last) if x - last <= tol => {}
            _ => out.push(x),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerance = Tolerance {
        relative: 1e-3,
        absolute: 1e-3,
    };

    #[test]
    fn pairs_nearest_first() {
        let m = greedy_match(&[0.0, 7.0, 12.0, 15.0], &[14.99, 0.0004, 7.002, 11.995], 0.5, TOL);
        assert_eq!(m.records.len(), 4);
        assert!(m.unmatched_analytic.is_empty() && m.unmatched_numeric.is_empty());
        assert_eq!(m.records[1].numeric_e_squared, 7.002);
        assert!(m.records.iter().all(|r| r.pass));
        assert_eq!(m.records[0].relative_deviation, None);
    }

    #[test]
    fn each_level_used_once() {
        let m = greedy_match(&[1.0], &[1.01, 0.99], 0.5, TOL);
        assert_eq!(m.records.len(), 1);
        assert_eq!(m.unmatched_numeric.len(), 1);
        assert!(!m.records[0].pass);
    }

    #[test]
    fn window_leaves_far_levels_unmatched() {
        let m = greedy_match(&[0.0, 2.25], &[0.0], 0.5, TOL);
        assert_eq!(m.unmatched_analytic, vec![2.25]);
    }

    #[test]
    fn distinct_merges_pairs() {
        assert_eq!(distinct(&[7.0, 0.0, 7.0 + 1e-9, 12.0], 1e-6), vec![0.0, 7.0, 12.0]);
    }
}
