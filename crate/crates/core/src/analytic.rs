//! Closed-form bound-state catalogs for the shape-invariant families reached
//! by the proportional-coupling reduction.
//!
//! All tables report E^2 together with the non-negative root E. Negative
//! energy mirrors are not listed.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::susy::{critical_field, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// E^2 = A^2 - (A - n)^2 for Wt = A tanh x + B sech x
    Scarf2,
    /// E^2 = A^2 + B^2/A^2 - (A - n)^2 - B^2/(A - n)^2 for Wt = A tanh x + B/A
    RosenMorse2,
    /// Field-coupled Rosen-Morse II levels with kappa = sqrt(kf^2 + km^2) in
    /// the denominator correction, exactly as transcribed.
    Rm2FieldPrinted,
    /// Field-coupled Rosen-Morse II levels re-derived from the reduction with
    /// k' = sqrt(kf^2 + km^2 - kv^2) and kv in the denominator correction.
    Rm2FieldRederived,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelEntry {
    pub n: u32,
    pub sigma: Sign,
    pub e_squared: f64,
    pub e: f64,
    pub formula_id: FormulaId,
    pub parameters: BTreeMap<String, f64>,
}

/// A candidate level dropped from a table, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedLevel {
    pub n: u32,
    pub sigma: Sign,
    pub e_squared: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelTable {
    pub formula_id: FormulaId,
    pub entries: Vec<LevelEntry>,
    pub excluded: Vec<ExcludedLevel>,
}

impl LevelTable {
    fn new(formula_id: FormulaId, mut entries: Vec<LevelEntry>, excluded: Vec<ExcludedLevel>) -> Self {
        entries.sort_by(|a, b| {
            a.e_squared
                .total_cmp(&b.e_squared)
                .then(b.sigma.value().total_cmp(&a.sigma.value()))
                .then(a.n.cmp(&b.n))
        });
        Self {
            formula_id,
            entries,
            excluded,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn for_sigma(&self, sigma: Sign) -> impl Iterator<Item = &LevelEntry> {
        self.entries.iter().filter(move |e| e.sigma == sigma)
    }

    /// E^2 of one partner, ascending.
    pub fn e_squared(&self, sigma: Sign) -> Vec<f64> {
        self.for_sigma(sigma).map(|e| e.e_squared).collect()
    }

    pub fn entry(&self, n: u32, sigma: Sign) -> Option<&LevelEntry> {
        self.entries.iter().find(|e| e.n == n && e.sigma == sigma)
    }

    /// Distinct E^2 values: the two partners share every level except the
    /// unpaired sigma = +1 ground state.
    pub fn distinct_levels(&self, tolerance: f64) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().map(|e| e.e_squared).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= tolerance);
        v
    }
}

/// Quantum numbers allowed for one partner: n < A, starting at 0 for
/// sigma = +1 and at 1 for sigma = -1.
fn quantum_numbers(a: f64, sigma: Sign) -> impl Iterator<Item = u32> {
    let start = match sigma {
        Sign::Plus => 0u32,
        Sign::Minus => 1u32,
    };
    (start..).take_while(move |&n| (n as f64) < a)
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Scarf II, Wt = A tanh x + B sech x. B shapes the wavefunctions only.
pub fn scarf2_levels(a: f64, b: f64) -> LevelTable {
    let mut entries = Vec::new();
    if a > 0.0 {
        for sigma in Sign::both() {
            for n in quantum_numbers(a, sigma) {
                let e2 = a * a - (a - n as f64).powi(2);
                entries.push(LevelEntry {
                    n,
                    sigma,
                    e_squared: e2,
                    e: e2.sqrt(),
                    formula_id: FormulaId::Scarf2,
                    parameters: params(&[("A", a), ("B", b)]),
                });
            }
        }
    }
    LevelTable::new(FormulaId::Scarf2, entries, Vec::new())
}

/// Rosen-Morse II, Wt = A tanh x + B/A with B < A^2.
///
/// A level survives only if E^2 >= 0 and (A - n)^2 > |B|; the second
/// condition is what makes the level-n eigenfunction decay on both sides.
pub fn rosen_morse2_levels(a: f64, b: f64) -> Result<LevelTable> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("A and B must be finite".into()));
    }
    if b >= a * a {
        return Err(Error::Constraint(format!(
            "Rosen-Morse II needs B < A^2, got A={a}, B={b}"
        )));
    }
    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    if a > 0.0 {
        for sigma in Sign::both() {
            for n in quantum_numbers(a, sigma) {
                let an = a - n as f64;
                let e2 = a * a + b * b / (a * a) - an * an - b * b / (an * an);
                if let Some(reason) = binding_failure(e2, an, b.abs()) {
                    excluded.push(ExcludedLevel {
                        n,
                        sigma,
                        e_squared: e2,
                        reason,
                    });
                    continue;
                }
                entries.push(LevelEntry {
                    n,
                    sigma,
                    e_squared: e2,
                    e: e2.sqrt(),
                    formula_id: FormulaId::RosenMorse2,
                    parameters: params(&[("A", a), ("B", b)]),
                });
            }
        }
    }
    Ok(LevelTable::new(FormulaId::RosenMorse2, entries, excluded))
}

fn binding_failure(e2: f64, a_minus_n: f64, abs_b: f64) -> Option<String> {
    if !e2.is_finite() {
        Some("E^2 not finite".into())
    } else if e2 < 0.0 {
        Some(format!("E^2 = {e2} < 0"))
    } else if a_minus_n * a_minus_n <= abs_b {
        Some(format!(
            "(A-n)^2 = {} <= |B| = {abs_b}: not normalizable",
            a_minus_n * a_minus_n
        ))
    } else {
        None
    }
}

/// Both candidate spectra for W = alpha0 tanh x with an electric coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldLevelTables {
    pub printed: LevelTable,
    pub rederived: LevelTable,
}

/// Field-coupled Rosen-Morse II levels for W = alpha0 tanh x.
///
/// `printed` evaluates
/// `E^2 = [a0^2 k^2 - (a0 k - n)^2] / [1 + a0^2 k^2 / (a0 k - n)^2]`
/// with k = sqrt(kf^2 + km^2). `rederived` composes the reduction directly:
/// A = a0 k', B = a0 kv E and eps = (k^2 / k'^2) E^2 give
/// `E^2 = [A^2 - (A - n)^2] / [1 + a0^2 kv^2 / (A - n)^2]`.
/// Both apply the same binding filter with |B| = a0 |kv| E.
pub fn rm2_with_field_levels(alpha0: f64, kappa_f: f64, kappa_m: f64, kappa_v: f64) -> Result<FieldLevelTables> {
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha0 must be positive, got {alpha0}")));
    }
    let kappa = critical_field(kappa_f, kappa_m);
    if kappa_v.abs() >= kappa {
        return Err(Error::CriticalField {
            kappa_v,
            critical: kappa,
        });
    }
    let kappa_eff = (kappa * kappa - kappa_v * kappa_v).sqrt();

    let build = |id: FormulaId, a: f64, correction: f64| {
        let mut entries = Vec::new();
        let mut excluded = Vec::new();
        for sigma in Sign::both() {
            for n in quantum_numbers(a, sigma) {
                let an = a - n as f64;
                let e2 = (a * a - an * an) / (1.0 + correction / (an * an));
                let abs_b = alpha0 * kappa_v.abs() * e2.max(0.0).sqrt();
                if let Some(reason) = binding_failure(e2, an, abs_b) {
                    excluded.push(ExcludedLevel {
                        n,
                        sigma,
                        e_squared: e2,
                        reason,
                    });
                    continue;
                }
                entries.push(LevelEntry {
                    n,
                    sigma,
                    e_squared: e2,
                    e: e2.sqrt(),
                    formula_id: id,
                    parameters: params(&[
                        ("alpha0", alpha0),
                        ("kappa", kappa),
                        ("kappa_eff", kappa_eff),
                        ("kappa_v", kappa_v),
                        ("A", a),
                        ("B", alpha0 * kappa_v * e2.sqrt()),
                    ]),
                });
            }
        }
        LevelTable::new(id, entries, excluded)
    };

    let a_printed = alpha0 * kappa;
    let a_rederived = alpha0 * kappa_eff;
    Ok(FieldLevelTables {
        printed: build(FormulaId::Rm2FieldPrinted, a_printed, a_printed * a_printed),
        rederived: build(
            FormulaId::Rm2FieldRederived,
            a_rederived,
            alpha0 * alpha0 * kappa_v * kappa_v,
        ),
    })
}

/// Parameters of the decoupled zero-energy construction with
/// W = lambda tanh x + nu matched to V = -A(A+1) sech^2 x + 2B tanh x.
///
/// `lambda` here is the tanh amplitude of W, unrelated to the coupling-matrix
/// eigenvalue of [`crate::susy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependentParameters {
    pub lambda: f64,
    pub nu: f64,
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub valid: bool,
    pub reason: Option<String>,
}

impl IndependentParameters {
    /// Rosen-Morse level -(A - n)^2 - B^2 / (A - n)^2 of the target index.
    pub fn target_level(&self) -> f64 {
        let an = self.a - self.n as f64;
        -an * an - self.b * self.b / (an * an)
    }

    /// Whether level n of the matched Rosen-Morse potential is actually bound,
    /// i.e. (A - n)^2 > |B|. With nu = lambda - 1 - n this reads nu > lambda,
    /// which no valid parameter set satisfies.
    pub fn target_level_bound(&self) -> bool {
        let an = self.a - self.n as f64;
        an * an > self.b.abs()
    }
}

/// nu = lambda - 1 - n, A = lambda - 1, B = lambda nu. Valid when n >= 1,
/// lambda >= n + 1, nu >= 0 and B < A^2.
pub fn independent_parameters(lambda: f64, n: u32) -> IndependentParameters {
    let nu = lambda - 1.0 - n as f64;
    let a = lambda - 1.0;
    let b = lambda * nu;
    let reason = if !lambda.is_finite() {
        Some("lambda must be finite".to_string())
    } else if n < 1 {
        Some("n >= 1 required".to_string())
    } else if lambda < n as f64 + 1.0 {
        Some(format!("lambda >= n + 1 required (lambda = {lambda}, n = {n})"))
    } else if nu < 0.0 {
        Some(format!("nu = {nu} must be non-negative"))
    } else if b >= a * a {
        Some(format!("B < A^2 violated (B = {b}, A^2 = {})", a * a))
    } else {
        None
    };
    IndependentParameters {
        lambda,
        nu,
        n,
        a,
        b,
        valid: reason.is_none(),
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn scarf_a4_levels() {
        let t = scarf2_levels(4.0, 0.0);
        assert_eq!(t.e_squared(Sign::Plus), vec![0.0, 7.0, 12.0, 15.0]);
        assert_eq!(t.e_squared(Sign::Minus), vec![7.0, 12.0, 15.0]);
        assert_eq!(t.entries[0].n, 0);
        // ties: sigma = +1 listed first
        assert_eq!(t.entries[1].sigma, Sign::Plus);
        assert_eq!(t.entries[2].sigma, Sign::Minus);
        assert_eq!(t.distinct_levels(1e-12), vec![0.0, 7.0, 12.0, 15.0]);
    }

    #[test]
    fn scarf_strict_upper_bound() {
        let t = scarf2_levels(2.5, 1.0);
        let ns: Vec<u32> = t.for_sigma(Sign::Plus).map(|e| e.n).collect();
        assert_eq!(ns, vec![0, 1, 2]);
        let t = scarf2_levels(3.0, 0.0);
        let ns: Vec<u32> = t.for_sigma(Sign::Plus).map(|e| e.n).collect();
        assert_eq!(ns, vec![0, 1, 2]);
    }

    #[test]
    fn scarf_ground_state_always_zero() {
        for a in [0.3, 1.0, 4.7, 11.0] {
            let t = scarf2_levels(a, -2.0);
            assert_eq!(t.entry(0, Sign::Plus).unwrap().e_squared, 0.0);
            assert!(t.entry(0, Sign::Minus).is_none());
        }
    }

    #[test]
    fn scarf_without_binding_is_empty() {
        assert!(scarf2_levels(0.0, 1.0).is_empty());
        assert!(scarf2_levels(-1.0, 1.0).is_empty());
    }

    #[test]
    fn rosen_morse_examples() {
        let t = rosen_morse2_levels(2.0, 1.0).unwrap();
        assert_eq!(t.entry(0, Sign::Plus).unwrap().e_squared, 0.0);
        // n = 1 evaluates to 4 + 1/4 - 1 - 1 = 2.25 but sits exactly at the
        // normalizability threshold (A-n)^2 = |B|
        let ex = t.excluded.iter().find(|e| e.n == 1 && e.sigma == Sign::Plus).unwrap();
        assert_abs_diff_eq!(ex.e_squared, 2.25, epsilon = 1e-15);
        assert_eq!(t.len(), 1);

        let t = rosen_morse2_levels(3.0, 0.0).unwrap();
        let s = scarf2_levels(3.0, 0.0);
        assert_eq!(t.e_squared(Sign::Plus), s.e_squared(Sign::Plus));
        assert_eq!(t.e_squared(Sign::Minus), s.e_squared(Sign::Minus));
    }

    #[test]
    fn rosen_morse_constraint() {
        assert!(matches!(rosen_morse2_levels(2.0, 4.0), Err(Error::Constraint(_))));
        assert!(matches!(rosen_morse2_levels(2.0, 5.0), Err(Error::Constraint(_))));
    }

    #[test]
    fn rosen_morse_filter_keeps_deep_levels() {
        let t = rosen_morse2_levels(5.0, 2.0).unwrap();
        // (A-n)^2 > 2 for n = 0..3; n = 4 gives 1 <= 2
        let ns: Vec<u32> = t.for_sigma(Sign::Plus).map(|e| e.n).collect();
        assert_eq!(ns, vec![0, 1, 2, 3]);
        assert!(t.excluded.iter().any(|e| e.n == 4));
    }

    #[test]
    fn field_free_limit_of_field_tables() {
        let ft = rm2_with_field_levels(1.0, 3.0, 4.0, 0.0).unwrap();
        let reference = rosen_morse2_levels(5.0, 0.0).unwrap();
        assert_eq!(ft.rederived.e_squared(Sign::Plus), reference.e_squared(Sign::Plus));
        assert_eq!(ft.rederived.entry(1, Sign::Plus).unwrap().e_squared, 9.0);
        // the transcribed denominator keeps a0^2 k^2 and misses this limit
        let printed = ft.printed.entry(1, Sign::Plus).unwrap().e_squared;
        assert_abs_diff_eq!(printed, 9.0 / (1.0 + 25.0 / 16.0), epsilon = 1e-14);
    }

    #[test]
    fn field_tables_differ_when_coupled() {
        let ft = rm2_with_field_levels(2.0, 1.0, 1.0, 1.0).unwrap();
        // A = 2: n = 1 gives 3 / (1 + 4) = 0.6 but (A-n)^2 = 1 < |B| = 2 sqrt(0.6)
        assert_eq!(ft.rederived.e_squared(Sign::Plus), vec![0.0]);
        let ex = ft.rederived.excluded.iter().find(|e| e.n == 1).unwrap();
        assert_abs_diff_eq!(ex.e_squared, 0.6, epsilon = 1e-14);
        let a = 2.0 * 2.0f64.sqrt();
        let expected = (a * a - (a - 1.0).powi(2)) / (1.0 + a * a / (a - 1.0).powi(2));
        assert_abs_diff_eq!(
            ft.printed.entry(1, Sign::Plus).unwrap().e_squared,
            expected,
            epsilon = 1e-14
        );
        assert_ne!(ft.printed.e_squared(Sign::Plus), ft.rederived.e_squared(Sign::Plus));
    }

    #[test]
    fn field_tables_refuse_supercritical() {
        assert!(matches!(
            rm2_with_field_levels(1.0, 3.0, 4.0, 5.0),
            Err(Error::CriticalField { .. })
        ));
    }

    #[test]
    fn weak_field_converges_to_field_free() {
        let weak = rm2_with_field_levels(1.3, 2.0, 1.5, 1e-6).unwrap();
        let a = 1.3 * 2.0f64.hypot(1.5);
        let free = rosen_morse2_levels(a, 0.0).unwrap();
        assert_eq!(weak.rederived.len(), free.len());
        for (w, f) in weak.rederived.entries.iter().zip(&free.entries) {
            assert_eq!((w.n, w.sigma), (f.n, f.sigma));
            assert_abs_diff_eq!(w.e_squared, f.e_squared, epsilon = 1e-4);
        }
    }

    #[test]
    fn independent_examples() {
        let p = independent_parameters(3.0, 1);
        assert!(p.valid);
        assert_eq!((p.nu, p.a, p.b), (1.0, 2.0, 3.0));
        let p = independent_parameters(2.0, 1);
        assert!(p.valid);
        assert_eq!((p.nu, p.b), (0.0, 0.0));
        let p = independent_parameters(3.0, 0);
        assert!(!p.valid);
        assert_eq!(p.reason.as_deref(), Some("n >= 1 required"));
        assert!(!independent_parameters(1.5, 1).valid);
    }

    #[test]
    fn independent_target_level_is_never_bound() {
        for (lambda, n) in [(3.0, 1), (2.0, 1), (5.5, 2), (9.0, 3)] {
            let p = independent_parameters(lambda, n);
            assert!(p.valid);
            assert!(!p.target_level_bound(), "{p:?}");
        }
    }

    proptest! {
        #[test]
        fn scarf_monotone_and_sigma_degenerate(a in 0.05f64..12.0) {
            let t = scarf2_levels(a, 0.0);
            let plus = t.e_squared(Sign::Plus);
            prop_assert!(plus.windows(2).all(|w| w[1] > w[0]));
            let gaps: Vec<f64> = t.for_sigma(Sign::Plus).map(|e| (a - e.n as f64).powi(2)).collect();
            prop_assert!(gaps.windows(2).all(|w| w[1] < w[0]));
            for e in t.for_sigma(Sign::Minus) {
                let partner = t.entry(e.n, Sign::Plus).unwrap();
                prop_assert_eq!(partner.e_squared, e.e_squared);
            }
            prop_assert!(t.entries.iter().all(|e| e.e_squared >= 0.0));
        }

        #[test]
        fn rosen_morse_sigma_degenerate(a in 0.5f64..8.0, frac in -0.95f64..0.95) {
            let b = frac * a * a;
            let t = rosen_morse2_levels(a, b).unwrap();
            for e in t.for_sigma(Sign::Minus) {
                if let Some(partner) = t.entry(e.n, Sign::Plus) {
                    prop_assert_eq!(partner.e_squared, e.e_squared);
                }
            }
            prop_assert!(t.entries.windows(2).all(|w| w[1].e_squared >= w[0].e_squared));
        }

        #[test]
        fn independent_identity(lambda in 2.0f64..20.0, n in 1u32..6) {
            let p = independent_parameters(lambda, n);
            prop_assume!(p.valid && p.nu > 1e-3);
            let lhs = p.lambda.powi(2) + p.nu.powi(2);
            let d = p.lambda - 1.0 - n as f64;
            let rhs = d * d + p.lambda.powi(2) * p.nu.powi(2) / (d * d);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
            prop_assert!(p.a > 0.0 && p.b >= 0.0 && p.b < p.a * p.a);
        }
    }
}
