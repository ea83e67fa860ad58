//! Lattice discretizations of the Dirac and reduced Schrödinger operators and
//! the eigensolver used to cross-check every closed form.
//!
//! Matrices are stored as Hermitian band matrices. Eigenvalues come from
//! Sturm-count bisection on the band LDL^H inertia, eigenvectors from inverse
//! iteration with a pivoted band LU. Both are deterministic.

mod band;
mod dirac;
mod schrodinger;

pub use band::BandMatrix;
pub use dirac::{
    build_dirac, dirac_bound_states, dirac_gap, dirac_residual, reconstruct_spinor, DiracMatrix, ZERO_OUTPUT_RATIO,
};
pub use schrodinger::{
    build_schrodinger, reduced_matrix, self_consistent_level, SchrodingerMatrix, SelfConsistentLevel,
    FIXED_POINT_MAX_ITERATIONS, FIXED_POINT_TOLERANCE,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Grid, ScalarField, SpinorField};
use band::BandLu;

/// Contract bound on ‖Hv − λv‖/‖v‖ for every reported pair.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Outer fraction of the grid inspected on each side by the localization test.
pub const EDGE_FRACTION: f64 = 0.1;
/// Largest probability mass allowed in either outer region for a bound state.
pub const EDGE_MASS: f64 = 0.01;

/// Eigenvalues closer than this are one degenerate level; its vectors are
/// re-chosen to diagonalize position so that states on opposite walls or
/// defects separate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

const MAX_INVERSE_ITERATIONS: usize = 8;
const MAX_BISECTIONS: usize = 200;

/// Which eigenvalues count as "smallest".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralOrder {
    Algebraic,
    /// By distance from a reference energy.
    NearestTo(f64),
}

/// How eigenvector entries map onto the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// No grid; the measure is 1.
    Plain,
    /// One amplitude per node, ends pinned to zero.
    Scalar(Grid),
    /// Interleaved (psi1, psi2) per node.
    Spinor(Grid),
}

/// A Hermitian operator the eigensolver can act on.
pub trait SpectralProblem {
    fn band(&self) -> &BandMatrix;
    fn layout(&self) -> Layout;
    fn default_order(&self) -> SpectralOrder;

    /// Map a vector of the matrix space onto the layout (e.g. re-insert pinned ends).
    fn embed(&self, v: Vec<Complex64>) -> Vec<Complex64> {
        v
    }
}

/// Where the continuum starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuum {
    /// Schrödinger form: bound iff the eigenvalue is strictly below the edge.
    Below(f64),
    /// Dirac form: bound iff the eigenvalue lies strictly inside the gap.
    Gap { lower: f64, upper: f64 },
}

impl Continuum {
    /// Gap (-edge, edge).
    pub fn symmetric(edge: f64) -> Self {
        Continuum::Gap {
            lower: -edge,
            upper: edge,
        }
    }

    pub fn admits(&self, value: f64) -> bool {
        match *self {
            Continuum::Below(edge) => value < edge,
            Continuum::Gap { lower, upper } => lower < value && value < upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit norm under the grid measure.
    pub vectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    pub bound_flags: Vec<bool>,
    pub layout: Layout,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn measure(&self) -> f64 {
        match &self.layout {
            Layout::Plain => 1.0,
            Layout::Scalar(g) | Layout::Spinor(g) => g.spacing(),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Values flagged as bound, ascending.
    pub fn bound_values(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.bound_flags)
            .filter_map(|(v, b)| b.then_some(*v))
            .collect()
    }

    /// Probability per grid node (per entry for plain layouts).
    pub fn density(&self, i: usize) -> Vec<f64> {
        let v = &self.vectors[i];
        match self.layout {
            Layout::Spinor(_) => v.chunks(2).map(|c| c[0].norm_sqr() + c[1].norm_sqr()).collect(),
            _ => v.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn spinor(&self, i: usize) -> Result<SpinorField> {
        match &self.layout {
            Layout::Spinor(g) => {
                let mut s = SpinorField::from_interleaved(g.clone(), &self.vectors[i])?.fix_phase();
                // the phase fix keeps the grid norm, which is already 1
                s = s.normalize()?;
                Ok(s)
            }
            _ => Err(Error::InvalidInput("eigenvectors are not spinors".into())),
        }
    }

    /// Real scalar eigenfunction with its largest sample made positive.
    pub fn scalar(&self, i: usize) -> Result<ScalarField> {
        match &self.layout {
            Layout::Scalar(g) => {
                let v = &self.vectors[i];
                let pivot = v
                    .iter()
                    .copied()
                    .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
                    .unwrap_or_default();
                let phase = if pivot.norm() > 0.0 {
                    pivot.conj() / pivot.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                };
                ScalarField::new(g.clone(), v.iter().map(|z| (z * phase).re).collect())
            }
            _ => Err(Error::InvalidInput("eigenvectors are not scalar fields".into())),
        }
    }

    /// Fraction of probability in the outer `fraction` of nodes on the (left, right).
    pub fn edge_mass(&self, i: usize, fraction: f64) -> (f64, f64) {
        let rho = self.density(i);
        let total: f64 = rho.iter().sum();
        let k = match &self.layout {
            Layout::Scalar(g) | Layout::Spinor(g) => g.edge_count(fraction),
            Layout::Plain => ((rho.len() as f64 * fraction).round() as usize).max(1),
        }
        .min(rho.len());
        let left: f64 = rho[..k].iter().sum();
        let right: f64 = rho[rho.len() - k..].iter().sum();
        (left / total, right / total)
    }

    pub fn is_localized(&self, i: usize) -> bool {
        let (l, r) = self.edge_mass(i, EDGE_FRACTION);
        l <= EDGE_MASS && r <= EDGE_MASS
    }
}

/// Flag eigenpairs that sit inside the continuum threshold and keep their
/// probability away from the box walls.
pub fn classify_bound(mut result: EigenResult, continuum: Continuum) -> EigenResult {
    result.bound_flags = (0..result.len())
        .map(|i| continuum.admits(result.values[i]) && result.is_localized(i))
        .collect();
    result
}

/// Explicit small Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    band: BandMatrix,
}

impl DenseHermitian {
    pub fn new(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        let mut band = BandMatrix::zeros(n, n - 1);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                band.set(i, j, *v);
            }
        }
        if band.hermiticity_defect() > 1e-12 {
            return Err(Error::InvalidInput("matrix is not Hermitian".into()));
        }
        Ok(Self { band })
    }
}

impl SpectralProblem for DenseHermitian {
    fn band(&self) -> &BandMatrix {
        &self.band
    }

    fn layout(&self) -> Layout {
        Layout::Plain
    }

    fn default_order(&self) -> SpectralOrder {
        SpectralOrder::Algebraic
    }
}

/// Eigenvalues of any band operator through a dense self-adjoint solve.
pub fn dense_eigenvalues(band: &BandMatrix) -> Result<Vec<f64>> {
    let n = band.dim();
    let m = faer::Mat::<Complex64>::from_fn(n, n, |i, j| band.get(i, j));
    m.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::NoConvergence {
            iterations: 0,
            detail: format!("dense eigensolver: {e:?}"),
        })
}

/// The `k` smallest eigenpairs in the operator's default order.
pub fn eigensolve<P: SpectralProblem + ?Sized>(problem: &P, k: usize) -> Result<EigenResult> {
    eigensolve_ordered(problem, k, problem.default_order())
}

pub fn eigensolve_ordered<P: SpectralProblem + ?Sized>(
    problem: &P,
    k: usize,
    order: SpectralOrder,
) -> Result<EigenResult> {
    let band = problem.band();
    let n = band.dim();
    if k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs of a {n}-dimensional operator"
        )));
    }
    let solver = Bisection::new(band);
    let indices: Vec<usize> = match order {
        SpectralOrder::Algebraic => (0..k).collect(),
        SpectralOrder::NearestTo(center) => {
            let below = solver.count(center);
            let lo = below.saturating_sub(k);
            let hi = (below + k).min(n);
            let mut cand: Vec<(usize, f64)> = (lo..hi).map(|i| (i, solver.eigenvalue(i))).collect();
            cand.sort_by(|a, b| {
                (a.1 - center)
                    .abs()
                    .total_cmp(&(b.1 - center).abs())
                    .then(a.0.cmp(&b.0))
            });
            let mut chosen: Vec<usize> = cand.into_iter().take(k).map(|c| c.0).collect();
            chosen.sort_unstable();
            chosen
        }
    };
    let values: Vec<f64> = indices.iter().map(|&i| solver.eigenvalue(i)).collect();
    finish(problem, values)
}

/// All eigenpairs strictly inside (lower, upper).
pub fn eigensolve_window<P: SpectralProblem + ?Sized>(problem: &P, lower: f64, upper: f64) -> Result<EigenResult> {
    if !(lower < upper) {
        return Err(Error::InvalidInput(format!("empty window ({lower}, {upper})")));
    }
    let solver = Bisection::new(problem.band());
    let first = solver.count(lower);
    let last = solver.count(upper);
    let values: Vec<f64> = (first..last)
        .map(|i| solver.eigenvalue(i))
        .filter(|v| lower < *v && *v < upper)
        .collect();
    finish(problem, values)
}

struct Bisection<'a> {
    band: &'a BandMatrix,
    pivmin: f64,
    lo: f64,
    hi: f64,
}

impl<'a> Bisection<'a> {
    fn new(band: &'a BandMatrix) -> Self {
        let norm = band.norm_inf().max(f64::MIN_POSITIVE);
        let (lo, hi) = band.gershgorin();
        let pad = 2.0 * f64::EPSILON * norm + f64::MIN_POSITIVE;
        Self {
            band,
            pivmin: f64::EPSILON * norm,
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn count(&self, x: f64) -> usize {
        self.band.count_below(x, self.pivmin)
    }

    /// The eigenvalue with zero-based ascending index `i`.
    fn eigenvalue(&self, i: usize) -> f64 {
        let (mut lo, mut hi) = (self.lo, self.hi);
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count(mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn start_vector(n: usize, seed: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let t = 0.618_033_988_749_895 * (j + 1) as f64 + 0.414_213_562_373_095 * (seed + 1) as f64;
            Complex64::new(1.0 + 0.5 * (7.0 * t).sin(), 0.5 * (3.0 * t).cos())
        })
        .collect()
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(v: &mut [Complex64], s: f64) {
    v.iter_mut().for_each(|z| *z *= s);
}

fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for b in basis {
        let c: Complex64 = b.iter().zip(v.iter()).map(|(bi, vi)| bi.conj() * vi).sum();
        v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
    }
}

fn residual(band: &BandMatrix, v: &[Complex64], lambda: f64) -> f64 {
    let hv = band.matvec(v);
    let r: f64 = hv.iter().zip(v).map(|(a, b)| (a - b * lambda).norm_sqr()).sum();
    r.sqrt() / norm2(v)
}

/// Inverse iteration for each value, orthogonalizing within clusters.
fn finish<P: SpectralProblem + ?Sized>(problem: &P, values: Vec<f64>) -> Result<EigenResult> {
    let band = problem.band();
    let n = band.dim();
    let norm = band.norm_inf().max(1.0);
    let cluster_gap = 1e-3 * norm;
    let converged = 1e-13 * norm;
    let layout = problem.layout();
    let measure = match &layout {
        Layout::Plain => 1.0,
        Layout::Scalar(g) | Layout::Spinor(g) => g.spacing(),
    };

    let mut unit: Vec<Vec<Complex64>> = Vec::with_capacity(values.len());
    let mut residuals = Vec::with_capacity(values.len());
    let mut cluster_start = 0;
    for (idx, &lambda) in values.iter().enumerate() {
        if idx > 0 && lambda - values[idx - 1] > cluster_gap {
            cluster_start = idx;
        }
        let lu = BandLu::factor(band, lambda, f64::EPSILON * norm);
        let mut x = start_vector(n, idx);
        let mut res = f64::INFINITY;
        for _ in 0..MAX_INVERSE_ITERATIONS {
            project_out(&mut x, &unit[cluster_start..idx]);
            let nx = norm2(&x);
            scale(&mut x, 1.0 / nx);
            lu.solve(&mut x);
            project_out(&mut x, &unit[cluster_start..idx]);
            let nx = norm2(&x);
            if !(nx.is_finite() && nx > 0.0) {
                return Err(Error::NoConvergence {
                    iterations: MAX_INVERSE_ITERATIONS,
                    detail: format!("inverse iteration broke down at eigenvalue {lambda}"),
                });
            }
            scale(&mut x, 1.0 / nx);
            res = residual(band, &x, lambda);
            if res <= converged {
                break;
            }
        }
        if res > RESIDUAL_TOLERANCE * norm {
            return Err(Error::NoConvergence {
                iterations: MAX_INVERSE_ITERATIONS,
                detail: format!("eigenvalue {lambda}: residual {res:.3e}"),
            });
        }
        residuals.push(res);
        unit.push(x);
    }

    let mut values = values;
    localize_degenerate(band, &layout, &mut values, &mut unit, &mut residuals)?;

    let vectors = unit
        .into_iter()
        .map(|mut v| {
            scale(&mut v, 1.0 / measure.sqrt());
            problem.embed(v)
        })
        .collect();
    Ok(EigenResult {
        bound_flags: vec![false; values.len()],
        values,
        vectors,
        residuals,
        layout,
    })
}

fn position(layout: &Layout, index: usize) -> f64 {
    match layout {
        Layout::Plain => index as f64,
        Layout::Scalar(g) => g.node(index + 1),
        Layout::Spinor(g) => g.node(index / 2),
    }
}

/// Within each degenerate run, rotate to eigenvectors of the position
/// operator and take Rayleigh quotients as the values.
fn localize_degenerate(
    band: &BandMatrix,
    layout: &Layout,
    values: &mut [f64],
    unit: &mut [Vec<Complex64>],
    residuals: &mut [f64],
) -> Result<()> {
    if matches!(layout, Layout::Plain) {
        return Ok(());
    }
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= DEGENERACY_TOLERANCE {
            end += 1;
        }
        if end - start > 1 {
            let g = end - start;
            let block = &unit[start..end];
            let x = faer::Mat::<Complex64>::from_fn(g, g, |a, b| {
                block[a]
                    .iter()
                    .zip(&block[b])
                    .enumerate()
                    .map(|(k, (va, vb))| va.conj() * vb * position(layout, k))
                    .sum()
            });
            let eig = x
                .self_adjoint_eigen(faer::Side::Lower)
                .map_err(|e| Error::NoConvergence {
                    iterations: 0,
                    detail: format!("position diagonalization: {e:?}"),
                })?;
            let u = eig.U();
            let mut rotated: Vec<(f64, Vec<Complex64>)> = (0..g)
                .map(|k| {
                    let mut v = vec![Complex64::new(0.0, 0.0); block[0].len()];
                    for (b, vb) in block.iter().enumerate() {
                        let c = u[(b, k)];
                        v.iter_mut().zip(vb).for_each(|(vi, wi)| *vi += c * wi);
                    }
                    let nv = norm2(&v);
                    scale(&mut v, 1.0 / nv);
                    let hv = band.matvec(&v);
                    let rq: Complex64 = v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
                    (rq.re, v)
                })
                .collect();
            rotated.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (k, (value, v)) in rotated.into_iter().enumerate() {
                residuals[start + k] = residual(band, &v, value);
                values[start + k] = value;
                unit[start + k] = v;
            }
        }
        start = end;
    }
    Ok(())
}
