//! Dense complex linear algebra for small operator dimensions.
//!
//! Everything here is exact up to rounding: matrix exponentials and
//! logarithms go through eigendecompositions rather than series, since the
//! dimensions in play are tiny (2 for the driven spin system).

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const UNITARITY_TOL: f64 = 1e-10;
/// Eigenphases closer than this to ±pi raise [`Error::BranchCut`].
pub const BRANCH_GUARD: f64 = 1e-9;

/// Square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            data,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            dim: self.dim,
            data,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian part (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        self.add(&adj).expect("same dim").scale_re(0.5)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Column `k` as a vector.
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, k)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Matrix equal to its conjugate transpose within [`HERMITICITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermiticity_deviation();
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        // Store the exactly Hermitian part so downstream identities hold to
        // rounding regardless of how the input was assembled.
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Real linear combination of Hermitian operators.
    pub fn linear_combination(terms: &[(f64, &HermitianOperator)]) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, h)| h.dim())
            .ok_or(Error::NonFinite("empty linear combination"))?;
        let mut acc = ComplexMatrix::zeros(dim);
        for (w, h) in terms {
            acc = acc.add(&h.matrix().scale_re(*w))?;
        }
        Self::new(acc)
    }
}

/// Matrix with U†U = 1 within [`UNITARITY_TOL`] (Frobenius norm).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let gram = matrix.adjoint().mul(&matrix)?;
        let deviation = gram
            .sub(&ComplexMatrix::identity(matrix.dim()))?
            .frobenius_norm();
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Spin-1/2 operators S_x, S_y, S_z with eigenvalues ±1/2.
pub fn spin_half_operators() -> (HermitianOperator, HermitianOperator, HermitianOperator) {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    let sx = ComplexMatrix::new(2, vec![z(0.0, 0.0), z(0.5, 0.0), z(0.5, 0.0), z(0.0, 0.0)])
        .expect("static");
    let sy = ComplexMatrix::new(2, vec![z(0.0, 0.0), z(0.0, -0.5), z(0.0, 0.5), z(0.0, 0.0)])
        .expect("static");
    let sz = ComplexMatrix::new(2, vec![z(0.5, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(-0.5, 0.0)])
        .expect("static");
    (
        HermitianOperator::new(sx).expect("static"),
        HermitianOperator::new(sy).expect("static"),
        HermitianOperator::new(sz).expect("static"),
    )
}

/// ab - ba. Anti-Hermitian for Hermitian inputs.
pub fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<ComplexMatrix> {
    let ab = a.matrix().mul(b.matrix())?;
    let ba = b.matrix().mul(a.matrix())?;
    ab.sub(&ba)
}

/// exp(-i h dt) via the Hermitian eigendecomposition of `h`.
pub fn evolve(h: &HermitianOperator, dt: f64) -> Result<UnitaryOperator> {
    if !dt.is_finite() {
        return Err(Error::NonFinite("dt"));
    }
    let (vals, vecs) = hermitian_eigensystem(h);
    let n = h.dim();
    let mut u = ComplexMatrix::zeros(n);
    for k in 0..n {
        let phase = Complex64::from_polar(1.0, -vals[k] * dt);
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] += phase * vecs[(i, k)] * vecs[(j, k)].conj();
            }
        }
    }
    UnitaryOperator::new(u)
}

/// (i/dt) log u with all eigenphases taken on the principal branch (-pi, pi].
///
/// Raises [`Error::BranchCut`] when an eigenphase lands within
/// [`BRANCH_GUARD`] of the cut at ±pi, where the branch is ambiguous.
pub fn principal_log(u: &UnitaryOperator, dt: f64) -> Result<HermitianOperator> {
    if !(dt > 0.0) {
        return Err(Error::NonFinite("dt"));
    }
    let (phases, vecs) = unitary_eigensystem(u)?;
    let n = u.dim();
    let mut h = ComplexMatrix::zeros(n);
    for k in 0..n {
        let phase = phases[k];
        if phase.abs() > std::f64::consts::PI - BRANCH_GUARD {
            return Err(Error::BranchCut { phase });
        }
        // u eigenvalue e^{i phase} corresponds to H eigenvalue -phase/dt.
        let lambda = Complex64::new(-phase / dt, 0.0);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] += lambda * vecs[(i, k)] * vecs[(j, k)].conj();
            }
        }
    }
    HermitianOperator::new(h.hermitian_part())
}

/// Ascending eigenvalues and orthonormal eigenvector columns of a Hermitian
/// operator, by cyclic complex Jacobi rotations.
pub fn hermitian_eigensystem(h: &HermitianOperator) -> (Vec<f64>, ComplexMatrix) {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Phase factor turning the (p, q) block real symmetric.
                let w = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotation G: columns p, q mix as
                //   col_p' =  c col_p - s w* col_q
                //   col_q' =  s w col_p + c col_q
                let gp = Complex64::new(c, 0.0);
                let gs = Complex64::new(s, 0.0) * w;
                apply_rotation(&mut a, &mut v, p, q, gp, gs);
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let vals: Vec<f64> = pairs.iter().map(|(val, _)| *val).collect();
    let mut vecs = ComplexMatrix::zeros(n);
    for (new_col, (_, old_col)) in pairs.iter().enumerate() {
        for i in 0..n {
            vecs[(i, new_col)] = v[(i, *old_col)];
        }
    }
    (vals, vecs)
}

/// Update A <- G† A G and V <- V G for the two-column rotation
/// col_p' = c col_p - conj(gs) col_q, col_q' = gs col_p + c col_q.
fn apply_rotation(
    a: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    c: Complex64,
    gs: Complex64,
) {
    let n = a.dim();
    // Columns of A.
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = c * aip - gs.conj() * aiq;
        a[(i, q)] = gs * aip + c * aiq;
    }
    // Rows of A (conjugate rotation).
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = c.conj() * apj - gs * aqj;
        a[(q, j)] = gs.conj() * apj + c.conj() * aqj;
    }
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = c * vip - gs.conj() * viq;
        v[(i, q)] = gs * vip + c * viq;
    }
}

/// Eigenphases in (-pi, pi] and eigenvectors of a unitary (normal) matrix.
///
/// Diagonalizes a Hermitian combination of (U + U†)/2 and i(U - U†)/2, which
/// commute for unitary U, then reads the phases off the diagonalized pair.
fn unitary_eigensystem(u: &UnitaryOperator) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = u.dim();
    let um = u.matrix();
    let ud = um.adjoint();
    let cos_part = um.add(&ud)?.scale_re(0.5);
    let sin_part = um.sub(&ud)?.scale(Complex64::new(0.0, 0.5)); // = -sin in U's eigenbasis
    let cos_h = HermitianOperator::new(cos_part.hermitian_part())?;
    let sin_h = HermitianOperator::new(sin_part.hermitian_part())?;

    // Generic mixings; any one that separates the eigenphases works. The
    // validation loop below catches an unlucky coincidence.
    const MIXINGS: [f64; 4] = [0.7390851332151607, 1.6180339887498949, -0.5772156649015329, 3.3];
    for mu in MIXINGS {
        let mixed = HermitianOperator::new(
            cos_h
                .matrix()
                .add(&sin_h.matrix().scale_re(mu))?
                .hermitian_part(),
        )?;
        let (_, vecs) = hermitian_eigensystem(&mixed);
        let mut phases = Vec::with_capacity(n);
        let mut ok = true;
        for k in 0..n {
            let col = vecs.column(k);
            let uv = um.apply(&col);
            // Rayleigh quotient of U gives the eigenvalue candidate.
            let lam: Complex64 = col.iter().zip(&uv).map(|(a, b)| a.conj() * b).sum();
            let residual: f64 = uv
                .iter()
                .zip(&col)
                .map(|(x, y)| (x - lam * y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if residual > 1e-9 {
                ok = false;
                break;
            }
            phases.push(lam.arg());
        }
        if ok {
            let mut out_phases = phases;
            // atan2 yields [-pi, pi]; fold exact -pi onto pi.
            for ph in out_phases.iter_mut() {
                if *ph == -std::f64::consts::PI {
                    *ph = std::f64::consts::PI;
                }
            }
            return Ok((out_phases, vecs));
        }
    }
    Err(Error::NonFinite("unitary eigensystem did not converge"))
}
