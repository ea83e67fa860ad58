use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square matrix with entries only within `kd` of the diagonal.
///
/// Row `i` stores A(i, j) for |i - j| <= kd at `data[i * (2 kd + 1) + j + kd - i]`;
/// both triangles are kept so Hermiticity can be checked rather than assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kd: usize,
    block: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kd: usize) -> Self {
        let kd = kd.min(n.saturating_sub(1));
        Self {
            n,
            kd,
            block: 1,
            data: vec![ZERO; n * (2 * kd + 1)],
        }
    }

    /// Block tridiagonal with 2x2 node blocks (bandwidth 3, even dimension).
    /// Inertia is then taken block by block, which stays reliable when a
    /// block's leading entry is small but the block itself is not.
    pub fn zeros_2x2_blocks(nodes: usize) -> Self {
        let mut m = Self::zeros(2 * nodes, 3);
        m.block = 2;
        m
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        (i < self.n && j < self.n && i.abs_diff(j) <= self.kd).then(|| i * (2 * self.kd + 1) + j + self.kd - i)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.slot(i, j).map_or(ZERO, |s| self.data[s])
    }

    /// Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: Complex64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] += value;
    }

    fn columns(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kd)..(i + self.kd + 1).min(self.n)
    }

    /// max |A(i,j) - conj(A(j,i))|
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in self.columns(i) {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.columns(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.columns(i).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gershgorin enclosure of the (real) spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let d = self.get(i, i).re;
            let r: f64 = self.columns(i).filter(|&j| j != i).map(|j| self.get(i, j).norm()).sum();
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`, from the inertia of the
    /// (block) LDL^H factorization of A - sigma I.
    ///
    /// Pivots smaller than `pivmin` in magnitude are replaced by `-pivmin`.
    pub fn count_below(&self, sigma: f64, pivmin: f64) -> usize {
        if self.block == 2 {
            self.count_below_blocks(sigma, pivmin)
        } else {
            self.count_below_scalar(sigma, pivmin)
        }
    }

    fn block_at(&self, bi: usize, bj: usize) -> [[Complex64; 2]; 2] {
        let (r, c) = (2 * bi, 2 * bj);
        [
            [self.get(r, c), self.get(r, c + 1)],
            [self.get(r + 1, c), self.get(r + 1, c + 1)],
        ]
    }

    // S_0 = D_0 - sigma, S_j = D_j - sigma - A(j, j-1) S_{j-1}^{-1} A(j-1, j).
    // S_{j-1}^{-1} is applied as rank-one terms q q^H / mu and det S_j is
    // updated with det(A - c w w^H) = det A - c w^H adj(A) w, so a nearly
    // singular predecessor cannot wipe out the small eigenvalue of S_j.
    fn count_below_blocks(&self, sigma: f64, pivmin: f64) -> usize {
        let nodes = self.n / 2;
        let mut count = 0;
        let mut prev: Option<([f64; 2], [[Complex64; 2]; 2])> = None;
        for j in 0..nodes {
            let blk = self.block_at(j, j);
            let mut a = blk[0][0].re - sigma;
            let mut d = blk[1][1].re - sigma;
            let mut b = 0.5 * (blk[0][1] + blk[1][0].conj());
            let mut det = a * d - b.norm_sqr();
            if let Some((vals, vecs)) = prev {
                let lower = self.block_at(j, j - 1);
                let order = if vals[0].abs() >= vals[1].abs() { [0, 1] } else { [1, 0] };
                for k in order {
                    let c = 1.0 / vals[k];
                    let q = vecs[k];
                    let w = [
                        lower[0][0] * q[0] + lower[0][1] * q[1],
                        lower[1][0] * q[0] + lower[1][1] * q[1],
                    ];
                    let quad = d * w[0].norm_sqr() + a * w[1].norm_sqr() - 2.0 * (w[0].conj() * b * w[1]).re;
                    det -= c * quad;
                    a -= c * w[0].norm_sqr();
                    d -= c * w[1].norm_sqr();
                    b -= c * w[0] * w[1].conj();
                }
            }
            let (mut vals, vecs) = hermitian_eig2(a, d, b, det);
            if !(vals[0].is_finite() && vals[1].is_finite()) {
                count += 1;
                prev = None;
                continue;
            }
            for v in vals.iter_mut() {
                if v.abs() < pivmin {
                    *v = -pivmin;
                }
            }
            count += vals.iter().filter(|v| **v < 0.0).count();
            prev = Some((vals, vecs));
        }
        count
    }

    fn count_below_scalar(&self, sigma: f64, pivmin: f64) -> usize {
        let (n, kd) = (self.n, self.kd);
        // l[i * kd + t] = L(i, i - kd + t)
        let mut l = vec![ZERO; n * kd];
        let mut d = vec![0.0f64; n];
        let mut count = 0;
        for i in 0..n {
            let j0 = i.saturating_sub(kd);
            for j in j0..i {
                let mut s = self.get(i, j);
                for k in j0..j {
                    s -= l[i * kd + k + kd - i] * d[k] * l[j * kd + k + kd - j].conj();
                }
                l[i * kd + j + kd - i] = s / d[j];
            }
            let mut di = self.get(i, i).re - sigma;
            for k in j0..i {
                di -= l[i * kd + k + kd - i].norm_sqr() * d[k];
            }
            if di.abs() < pivmin || di.is_nan() {
                di = -pivmin;
            }
            if di < 0.0 {
                count += 1;
            }
            d[i] = di;
        }
        count
    }
}

/// Eigenpairs of [[a, b], [conj b, d]] given an accurate determinant.
/// The large-magnitude eigenvalue comes from the trace, the other from det / big.
fn hermitian_eig2(a: f64, d: f64, b: Complex64, det: f64) -> ([f64; 2], [[Complex64; 2]; 2]) {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b.norm());
    let big = if mean >= 0.0 { mean + radius } else { mean - radius };
    if big == 0.0 {
        return (
            [0.0, 0.0],
            [[Complex64::new(1.0, 0.0), ZERO], [ZERO, Complex64::new(1.0, 0.0)]],
        );
    }
    let small = det / big;
    let v1 = [b, Complex64::new(big - a, 0.0)];
    let v2 = [Complex64::new(big - d, 0.0), b.conj()];
    let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
    let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
    let (v, nv) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    let q_big = if nv > 0.0 {
        let s = 1.0 / nv.sqrt();
        [v[0] * s, v[1] * s]
    } else {
        [Complex64::new(1.0, 0.0), ZERO]
    };
    let q_small = [-q_big[1].conj(), q_big[0].conj()];
    ([big, small], [q_big, q_small])
}

/// LU factorization with partial pivoting of a band matrix shifted by a real
/// constant, for inverse iteration.
#[derive(Debug, Clone)]
pub(crate) struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    u: Vec<Complex64>,
    mult: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandLu {
    /// Factor A - shift I. Exactly zero pivots are replaced by `tiny`.
    pub(crate) fn factor(a: &BandMatrix, shift: f64, tiny: f64) -> Self {
        let n = a.n;
        let kl = a.kd;
        let ku = a.kd;
        // U gains up to kl extra superdiagonals from row interchanges
        let width = 2 * kl + ku + 1;
        let mut u = vec![ZERO; n * width];
        for i in 0..n {
            for j in a.columns(i) {
                u[i * width + j + kl - i] = a.get(i, j);
            }
            u[i * width + kl] -= shift;
        }
        let at = |r: usize, c: usize| r * width + c + kl - r;
        let mut mult = vec![ZERO; n * kl];
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let right = (k + kl + ku).min(n - 1);
            let mut p = k;
            for r in k + 1..=last {
                if u[at(r, k)].norm() > u[at(p, k)].norm() {
                    p = r;
                }
            }
            piv[k] = p;
            if p != k {
                for j in k..=right {
                    u.swap(at(k, j), at(p, j));
                }
            }
            if u[at(k, k)] == ZERO {
                u[at(k, k)] = Complex64::new(tiny, 0.0);
            }
            let pivot = u[at(k, k)];
            for r in k + 1..=last {
                let m = u[at(r, k)] / pivot;
                mult[k * kl + r - k - 1] = m;
                u[at(r, k)] = ZERO;
                if m != ZERO {
                    for j in k + 1..=right {
                        let ukj = u[at(k, j)];
                        u[at(r, j)] -= m * ukj;
                    }
                }
            }
        }
        Self {
            n,
            kl,
            width,
            u,
            mult,
            piv,
        }
    }

    pub(crate) fn solve(&self, b: &mut [Complex64]) {
        let (n, kl, w) = (self.n, self.kl, self.width);
        for k in 0..n {
            if self.piv[k] != k {
                b.swap(k, self.piv[k]);
            }
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= self.mult[k * kl + r - k - 1] * bk;
            }
        }
        let reach = w - kl - 1;
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                s -= self.u[i * w + j + kl - i] * b[j];
            }
            b[i] = s / self.u[i * w + kl];
        }
    }
}
