//! Small dense complex linear algebra: state vectors, Hermitian operators
//! and a cyclic Jacobi eigensolver for dimensions up to 4.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest operator dimension the kernel handles.
pub const MAX_DIM: usize = 4;

const NORM_TOLERANCE: f64 = 1e-12;
const HERMITICITY_TOLERANCE: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

/// A normalized vector of complex amplitudes over a 2- or 4-level space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes `amps` and wraps them. Fails on a zero vector or an
    /// unsupported dimension.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        check_state_dim(amps.len())?;
        let norm = norm_of(&amps);
        if !(norm > f64::MIN_POSITIVE) || !norm.is_finite() {
            return Err(Error::ZeroMagnitude { magnitude: norm });
        }
        let inv = 1.0 / norm;
        Ok(Self {
            amps: amps.into_iter().map(|a| a * inv).collect(),
        })
    }

    /// Wraps amplitudes that are already normalized within `1e-12`.
    pub fn from_normalized(amps: Vec<Complex64>) -> Result<Self> {
        check_state_dim(amps.len())?;
        let norm = norm_of(&amps);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: format!("norm {norm} is not 1 within {NORM_TOLERANCE:e}"),
            });
        }
        Ok(Self { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_state_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidParameter {
                name: "index",
                reason: format!("basis index {index} out of range for dimension {dim}"),
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amps)
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Multiplies every amplitude by the unit-modulus factor `e^{i angle}`.
    pub fn rephased(&self, angle: f64) -> StateVector {
        self.scaled(Complex64::from_polar(1.0, angle))
    }

    /// Multiplies every amplitude by `factor`. Callers pass unit-modulus
    /// factors; the result is not renormalized.
    pub(crate) fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// Tensor product `self ⊗ other` with `self` as the slow index.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let amps: Vec<Complex64> = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVector::new(amps)
    }

    /// Squared distance to `other` after removing the best global phase.
    pub fn ray_distance(&self, other: &StateVector) -> f64 {
        let ov = self.inner(other);
        let phase = if ov.norm() > 0.0 {
            ov / ov.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_state_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: if dim < 3 { 2 } else { 4 },
            found: dim,
        })
    }
}

fn norm_of(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// A Hermitian matrix of dimension 1 through 4, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianOperator {
    /// Validates Hermiticity: `max|H[a][b] - conj(H[b][a])| <= 1e-14 * maxabs(H)`.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                found: dim,
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let op = Self { dim, entries };
        let defect = op.hermiticity_defect();
        let tolerance = HERMITICITY_TOLERANCE * op.max_abs();
        if !(defect <= tolerance) {
            return Err(Error::NonHermitianInput { defect, tolerance });
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self::new(dim, entries)
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Self {
            dim: 2,
            entries: vec![o, l, l, o],
        }
    }

    pub fn pauli_y() -> Self {
        let o = Complex64::new(0.0, 0.0);
        Self {
            dim: 2,
            entries: vec![o, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), o],
        }
    }

    pub fn pauli_z() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Self {
            dim: 2,
            entries: vec![l, o, o, -l],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut defect: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                defect = defect.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        defect
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for a in 0..n {
            for b in 0..n {
                let x = self.get(a, b);
                for c in 0..m {
                    for d in 0..m {
                        entries[(a * m + c) * dim + (b * m + d)] = x * other.get(c, d);
                    }
                }
            }
        }
        HermitianOperator::new(dim, entries)
    }

    /// Real linear combination `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &HermitianOperator, beta: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * alpha + b * beta)
            .collect();
        HermitianOperator::new(self.dim, entries)
    }

    pub fn scaled(&self, alpha: f64) -> HermitianOperator {
        HermitianOperator {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * alpha).collect(),
        }
    }

    pub fn shifted(&self, c: f64) -> HermitianOperator {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] += c;
        }
        out
    }

    pub fn apply(&self, v: &StateVector) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|a| (0..n).map(|b| self.get(a, b) * v.amps[b]).sum())
            .collect()
    }

    /// `<v|H|v>`, real for Hermitian `H`.
    pub fn expectation(&self, v: &StateVector) -> f64 {
        let hv = self.apply(v);
        v.amps
            .iter()
            .zip(&hv)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .re
    }

    /// `D H D†` for the diagonal unitary `D = diag(phases)`.
    pub fn conjugated_by_diagonal(&self, phases: &[Complex64]) -> Result<HermitianOperator> {
        if phases.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: phases.len(),
            });
        }
        let n = self.dim;
        let mut entries = self.entries.clone();
        for a in 0..n {
            for b in 0..n {
                entries[a * n + b] = phases[a] * self.get(a, b) * phases[b].conj();
            }
        }
        Ok(HermitianOperator { dim: n, entries })
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &HermitianOperator) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors in
/// matching order.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

impl Eigensystem {
    /// Largest `|H v - λ v|` over all pairs.
    pub fn max_residual(&self, h: &HermitianOperator) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&lambda, v)| {
                h.apply(v)
                    .iter()
                    .zip(v.amplitudes())
                    .map(|(hv, x)| (hv - x * lambda).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation of the eigenvector Gram matrix from identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for (i, a) in self.eigenvectors.iter().enumerate() {
            for (j, b) in self.eigenvectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((a.inner(b) - target).norm());
            }
        }
        defect
    }
}

/// Eigen-decomposition of a Hermitian operator whose eigenvectors fit a
/// [`StateVector`] (dimension 2 or 4).
pub fn hermitian_eigensystem(h: &HermitianOperator) -> Result<Eigensystem> {
    let defect = h.hermiticity_defect();
    let tolerance = HERMITICITY_TOLERANCE * h.max_abs();
    if !(defect <= tolerance) {
        return Err(Error::NonHermitianInput { defect, tolerance });
    }
    check_state_dim(h.dim())?;
    let (eigenvalues, vectors) = jacobi_eigen(h.dim(), h.entries());
    let eigenvectors = vectors
        .into_iter()
        .map(StateVector::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(Eigensystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Cyclic complex Jacobi on a row-major `n x n` Hermitian matrix.
///
/// Returns eigenvalues ascending and the matching eigenvectors. Ties keep
/// the order in which the sweeps left them, so the output is a pure
/// function of the input bits.
#[allow(clippy::needless_range_loop)]
pub(crate) fn jacobi_eigen(n: usize, entries: &[Complex64]) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    assert!((1..=MAX_DIM).contains(&n) && entries.len() == n * n);
    let zero = Complex64::new(0.0, 0.0);
    let mut a = [[zero; MAX_DIM]; MAX_DIM];
    let mut v = [[zero; MAX_DIM]; MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = entries[i * n + j];
        }
        // Hermitian input has a real diagonal up to the tolerance checked upstream.
        a[i][i] = Complex64::new(a[i][i].re, 0.0);
        v[i][i] = Complex64::new(1.0, 0.0);
    }

    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q].norm_sqr();
            }
        }
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let r = a[p][q].norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                // Once the element is below rounding of both diagonals, drop it.
                if sweep > 3
                    && app.abs() + 100.0 * r == app.abs()
                    && aqq.abs() + 100.0 * r == aqq.abs()
                {
                    a[p][q] = zero;
                    a[q][p] = zero;
                    continue;
                }
                let e = a[p][q] / r;
                let ec = e.conj();
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A <- A G with G = [[c, s], [-s e*, c e*]] on (p, q).
                for row in a.iter_mut().take(n) {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = xp * c - xq * (ec * s);
                    row[q] = xp * s + xq * (ec * c);
                }
                // A <- G† A.
                for k in 0..n {
                    let (xp, xq) = (a[p][k], a[q][k]);
                    a[p][k] = xp * c - xq * (e * s);
                    a[q][k] = xp * s + xq * (e * c);
                }
                a[p][q] = zero;
                a[q][p] = zero;
                a[p][p] = Complex64::new(a[p][p].re, 0.0);
                a[q][q] = Complex64::new(a[q][q].re, 0.0);

                for row in v.iter_mut().take(n) {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = xp * c - xq * (ec * s);
                    row[q] = xp * s + xq * (ec * c);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));
    let values = order.iter().map(|&i| a[i][i].re).collect();
    let vectors = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row][col]).collect())
        .collect();
    (values, vectors)
}
