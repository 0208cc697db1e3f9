//! The driven spin-1/2 model: potentials built from four drive constants,
//! the synthetic fields B and B', band surfaces over the (alpha, beta)
//! square, degeneracy scans, and the invariant-direction segments.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective::{
    h_eff_paper, p_polynomials, p_polynomials_dalpha, p_polynomials_dbeta, q_polynomials,
};
use crate::error::{Error, Result};
use crate::operator::{hermitian_eigensystem, ComplexMatrix, HermitianOperator};
use crate::protocol::four_step_protocol;

/// Dimensionless strengths (c1, c2, c3, c4) of the four drive potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl DriveConstants {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Self> {
        if ![c1, c2, c3, c4].iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("drive constant"));
        }
        Ok(Self { c1, c2, c3, c4 })
    }

    pub fn uniform() -> Self {
        Self {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.c1, self.c2, self.c3, self.c4]
    }
}

/// Synthetic magnetic field vector with cached magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticField {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
    pub magnitude: f64,
}

impl SyntheticField {
    pub fn new(bx: f64, by: f64, bz: f64) -> Self {
        Self {
            bx,
            by,
            bz,
            magnitude: (bx * bx + by * by + bz * bz).sqrt(),
        }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.bx, self.by, self.bz]
    }

    pub fn direction(&self) -> Option<[f64; 3]> {
        if self.magnitude == 0.0 {
            None
        } else {
            Some([
                self.bx / self.magnitude,
                self.by / self.magnitude,
                self.bz / self.magnitude,
            ])
        }
    }
}

/// The four step potentials of the spin protocol:
/// V1 = c1 Sx - c2 Sy, V2 = c2 Sy + c3 Sz, V3 = c4 Sz - c1 Sx,
/// V4 = -(c3 + c4) Sz. They sum to zero by construction.
pub fn spin_potentials(c: DriveConstants) -> [HermitianOperator; 4] {
    let (sx, sy, sz) = crate::operator::spin_half_operators();
    [
        HermitianOperator::linear_combination(&[(c.c1, &sx), (-c.c2, &sy)]).expect("2x2"),
        HermitianOperator::linear_combination(&[(c.c2, &sy), (c.c3, &sz)]).expect("2x2"),
        HermitianOperator::linear_combination(&[(c.c4, &sz), (-c.c1, &sx)]).expect("2x2"),
        HermitianOperator::linear_combination(&[(-(c.c3 + c.c4), &sz)]).expect("2x2"),
    ]
}

/// Base Hamiltonian H_0 = S²/2I = (3/8I) identity.
pub fn base_hamiltonian(inertia: f64) -> Result<HermitianOperator> {
    if !(inertia > 0.0) {
        return Err(Error::NonPositiveInertia(inertia));
    }
    HermitianOperator::new(ComplexMatrix::identity(2).scale_re(3.0 / (8.0 * inertia)))
}

/// Bilinear assembly of the synthetic field from the six P polynomials.
fn field_from_p(p: &[f64; 6], c: DriveConstants) -> SyntheticField {
    let [p12, p13, p14, p23, p24, p34] = *p;
    let bx = c.c2 * c.c3 * (-p12 + p14 - p24) + c.c2 * c.c4 * (-p13 + p23 - p24 + p14);
    let by = c.c1 * c.c3 * (-p12 + p14 - p34 - p23) + c.c1 * c.c4 * (-p13 - p34 + p14);
    let bz = c.c1 * c.c2 * (p12 - p13 + p23);
    SyntheticField::new(bx, by, bz)
}

/// Synthetic field B(alpha, beta) such that the first-order term of the
/// effective Hamiltonian is -(pi/8w) S·B.
pub fn synthetic_field(alpha: f64, beta: f64, c: DriveConstants) -> SyntheticField {
    field_from_p(&p_polynomials(alpha, beta), c)
}

/// Partial derivatives (dB/dalpha, dB/dbeta); the field is linear in the
/// polynomials so the same bilinear map applies.
pub fn synthetic_field_gradient(
    alpha: f64,
    beta: f64,
    c: DriveConstants,
) -> (SyntheticField, SyntheticField) {
    (
        field_from_p(&p_polynomials_dalpha(alpha, beta), c),
        field_from_p(&p_polynomials_dbeta(alpha, beta), c),
    )
}

/// Kick field B' such that K(0) = -(pi/4w) S·B'.
pub fn kick_field(alpha: f64, beta: f64, c: DriveConstants) -> SyntheticField {
    let [q1, q2, q3, q4] = q_polynomials(alpha, beta);
    SyntheticField::new(
        c.c1 * (q1 - q3),
        c.c2 * (q2 - q1),
        c.c3 * q2 + c.c4 * q3 - (c.c3 + c.c4) * q4,
    )
}

/// Closed-form field for c = (0, 1, 0, 1): a single x-component that vanishes
/// on all four corners and along the diagonal alpha = beta.
pub fn field_0101(alpha: f64, beta: f64) -> SyntheticField {
    let a = alpha;
    let b = beta;
    let bx = -2.0 * a + 2.0 * a * a + 2.0 * b - 4.0 * a * a * b - 2.0 * b * b + 4.0 * a * b * b;
    SyntheticField::new(bx, 0.0, 0.0)
}

/// S·B for a given field.
pub fn spin_dot_field(b: &SyntheticField) -> HermitianOperator {
    let (sx, sy, sz) = crate::operator::spin_half_operators();
    HermitianOperator::linear_combination(&[(b.bx, &sx), (b.by, &sy), (b.bz, &sz)]).expect("2x2")
}

/// Exact eigenvalues (E_minus, E_plus) of the assembled first-order effective
/// Hamiltonian.
///
/// These evaluate to 3/(8I) ∓ (pi/(16w))|B|; the spin-1/2 eigenvalues of S·B
/// are ±|B|/2, so the gap is (pi/8w)|B| — half of a naive reading of the
/// ±(pi/8w)|B| spectrum formula.
pub fn spectrum(
    alpha: f64,
    beta: f64,
    c: DriveConstants,
    omega: f64,
    inertia: f64,
) -> Result<(f64, f64)> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveOmega(omega));
    }
    let h0 = base_hamiltonian(inertia)?;
    let p = four_step_protocol(alpha, beta, spin_potentials(c))?;
    let model = h_eff_paper(&h0, &p, omega, false)?;
    let (vals, _) = hermitian_eigensystem(&model.h_eff);
    Ok((vals[0], vals[1]))
}

/// One node of a band surface grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandNode {
    pub alpha: f64,
    pub beta: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    pub b_mag: f64,
}

/// Band surfaces E∓(alpha, beta) and |B| on a regular grid.
#[derive(Debug, Clone)]
pub struct BandSurface {
    pub grid_n: usize,
    pub nodes: Vec<BandNode>,
}

/// Evaluate the band surface on a grid_n x grid_n grid over [0,1]².
/// Rows are computed in parallel; node order is fixed (row, column).
pub fn band_surface(
    c: DriveConstants,
    grid_n: usize,
    omega: f64,
    inertia: f64,
) -> Result<BandSurface> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveOmega(omega));
    }
    if !(inertia > 0.0) {
        return Err(Error::NonPositiveInertia(inertia));
    }
    let shift = 3.0 / (8.0 * inertia);
    let nodes: Vec<BandNode> = (0..grid_n)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..grid_n).map(move |col| {
                let alpha = row as f64 / (grid_n - 1) as f64;
                let beta = col as f64 / (grid_n - 1) as f64;
                let b = synthetic_field(alpha, beta, c);
                // Eigenvalues of H0 - (pi/8w) S.B in closed form.
                let half_gap = PI / (16.0 * omega) * b.magnitude;
                BandNode {
                    alpha,
                    beta,
                    e_minus: shift - half_gap,
                    e_plus: shift + half_gap,
                    b_mag: b.magnitude,
                }
            })
        })
        .collect();
    Ok(BandSurface { grid_n, nodes })
}

/// A connected component of the degeneracy set.
#[derive(Debug, Clone, Serialize)]
pub enum DegeneracyComponent {
    /// Isolated diabolical point.
    Point { alpha: f64, beta: f64 },
    /// Polyline approximation of a gapless locus.
    Curve { points: Vec<(f64, f64)> },
}

/// Result of a degeneracy scan over the parameter square.
#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyScan {
    pub degenerate_everywhere: bool,
    pub components: Vec<DegeneracyComponent>,
}

impl DegeneracyScan {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.components
            .iter()
            .filter_map(|component| match component {
                DegeneracyComponent::Point { alpha, beta } => Some((*alpha, *beta)),
                _ => None,
            })
            .collect()
    }

    pub fn curves(&self) -> Vec<&Vec<(f64, f64)>> {
        self.components
            .iter()
            .filter_map(|component| match component {
                DegeneracyComponent::Curve { points } => Some(points),
                _ => None,
            })
            .collect()
    }
}

/// Damped Gauss-Newton descent on |B|² from a seed, projected to the square.
/// Returns the refined point if it converges to a zero below `tol`.
fn refine_zero(mut alpha: f64, mut beta: f64, c: DriveConstants, tol: f64) -> Option<(f64, f64)> {
    for _ in 0..60 {
        let b = synthetic_field(alpha, beta, c);
        if b.magnitude < tol {
            return Some((alpha, beta));
        }
        let (da, db) = synthetic_field_gradient(alpha, beta, c);
        // Normal equations of the 3x2 Jacobian.
        let jtj = [
            da.bx * da.bx + da.by * da.by + da.bz * da.bz,
            da.bx * db.bx + da.by * db.by + da.bz * db.bz,
            db.bx * db.bx + db.by * db.by + db.bz * db.bz,
        ];
        let jtb = [
            da.bx * b.bx + da.by * b.by + da.bz * b.bz,
            db.bx * b.bx + db.by * b.by + db.bz * b.bz,
        ];
        let det = jtj[0] * jtj[2] - jtj[1] * jtj[1];
        let (step_a, step_b) = if det.abs() > 1e-30 {
            (
                -(jtj[2] * jtb[0] - jtj[1] * jtb[1]) / det,
                -(jtj[0] * jtb[1] - jtj[1] * jtb[0]) / det,
            )
        } else {
            // Rank-deficient Jacobian: steepest descent with a small step.
            let g = (jtb[0] * jtb[0] + jtb[1] * jtb[1]).sqrt();
            if g < 1e-30 {
                return None;
            }
            (-0.05 * jtb[0] / g, -0.05 * jtb[1] / g)
        };
        // Damp long steps; the polynomials are cubic so pure GN can overshoot.
        let norm = (step_a * step_a + step_b * step_b).sqrt();
        let scale = if norm > 0.2 { 0.2 / norm } else { 1.0 };
        alpha = (alpha + scale * step_a).clamp(0.0, 1.0);
        beta = (beta + scale * step_b).clamp(0.0, 1.0);
    }
    let b = synthetic_field(alpha, beta, c);
    (b.magnitude < tol).then_some((alpha, beta))
}

/// Scan |B|² on a grid, refine candidate minima by damped Newton descent on
/// |B|², and classify the connected zero components. The four corners are
/// always diabolical points and are always reported.
pub fn diabolical_scan(c: DriveConstants, grid_n: usize, tol: f64) -> Result<DegeneracyScan> {
    if grid_n < 16 {
        return Err(Error::TooFewSamples {
            need: 16,
            got: grid_n,
        });
    }
    let h = 1.0 / (grid_n - 1) as f64;
    let grid: Vec<Vec<f64>> = (0..grid_n)
        .into_par_iter()
        .map(|row| {
            (0..grid_n)
                .map(|col| synthetic_field(row as f64 * h, col as f64 * h, c).magnitude)
                .collect()
        })
        .collect();

    let max_mag = grid
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max);
    if max_mag <= tol {
        return Ok(DegeneracyScan {
            degenerate_everywhere: true,
            components: Vec::new(),
        });
    }

    // Refine every local minimum of |B| on the grid (including edges).
    let mut zero_cells: Vec<(usize, usize, f64, f64)> = Vec::new();
    for row in 0..grid_n {
        for col in 0..grid_n {
            let val = grid[row][col];
            let mut is_min = true;
            for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (nr, nc) = (row as i64 + dr, col as i64 + dc);
                if nr >= 0 && nr < grid_n as i64 && nc >= 0 && nc < grid_n as i64 {
                    if grid[nr as usize][nc as usize] < val {
                        is_min = false;
                        break;
                    }
                }
            }
            // Also chase every node already deep relative to the field scale:
            // curve-shaped zero sets produce flat valleys without strict minima.
            if is_min || val < 0.05 * max_mag {
                if let Some((za, zb)) = refine_zero(row as f64 * h, col as f64 * h, c, tol) {
                    zero_cells.push((row, col, za, zb));
                }
            }
        }
    }

    // Cluster refined zeros by grid-cell adjacency of their seeds.
    let mut assigned = vec![usize::MAX; zero_cells.len()];
    let mut n_clusters = 0;
    for i in 0..zero_cells.len() {
        if assigned[i] != usize::MAX {
            continue;
        }
        let cluster = n_clusters;
        n_clusters += 1;
        let mut stack = vec![i];
        assigned[i] = cluster;
        while let Some(k) = stack.pop() {
            for j in 0..zero_cells.len() {
                if assigned[j] == usize::MAX {
                    let dr = zero_cells[k].0 as i64 - zero_cells[j].0 as i64;
                    let dc = zero_cells[k].1 as i64 - zero_cells[j].1 as i64;
                    if dr.abs() <= 1 && dc.abs() <= 1 {
                        assigned[j] = cluster;
                        stack.push(j);
                    }
                }
            }
        }
    }

    let corner_eps = 2.0 * h;
    let corners = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];
    let mut components: Vec<DegeneracyComponent> = corners
        .iter()
        .map(|&(alpha, beta)| DegeneracyComponent::Point { alpha, beta })
        .collect();

    for cluster in 0..n_clusters {
        let mut members: Vec<(usize, usize, f64, f64)> = zero_cells
            .iter()
            .zip(&assigned)
            .filter(|(_, a)| **a == cluster)
            .map(|(m, _)| *m)
            .collect();
        members.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let spread = members
            .iter()
            .map(|&(_, _, a, b)| {
                members
                    .iter()
                    .map(|&(_, _, a2, b2)| ((a - a2).powi(2) + (b - b2).powi(2)).sqrt())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if spread > 3.0 * h {
            let points = members.iter().map(|&(_, _, a, b)| (a, b)).collect();
            components.push(DegeneracyComponent::Curve { points });
        } else {
            // Isolated point; skip if it repeats one of the corners.
            let (a, b) = (members[0].2, members[0].3);
            let near_corner = corners
                .iter()
                .any(|&(ca, cb)| (a - ca).abs() < corner_eps && (b - cb).abs() < corner_eps);
            if !near_corner {
                components.push(DegeneracyComponent::Point { alpha: a, beta: b });
            }
        }
    }

    Ok(DegeneracyScan {
        degenerate_everywhere: false,
        components,
    })
}

/// Global maximizer of |B| over the square: grid seed plus projected
/// gradient ascent on |B|².
pub fn max_field(c: DriveConstants) -> (f64, f64, f64) {
    let grid_n = 64;
    let h = 1.0 / (grid_n - 1) as f64;
    let mut best = (0.0, 0.0, 0.0f64);
    for row in 0..grid_n {
        for col in 0..grid_n {
            let (a, b) = (row as f64 * h, col as f64 * h);
            let mag = synthetic_field(a, b, c).magnitude;
            if mag > best.2 {
                best = (a, b, mag);
            }
        }
    }
    if best.2 == 0.0 {
        return (best.0, best.1, 0.0);
    }
    let (mut alpha, mut beta) = (best.0, best.1);
    let mut step = 0.05;
    for _ in 0..200 {
        let b = synthetic_field(alpha, beta, c);
        let (da, db) = synthetic_field_gradient(alpha, beta, c);
        // Gradient of |B|²/2.
        let ga = b.bx * da.bx + b.by * da.by + b.bz * da.bz;
        let gb = b.bx * db.bx + b.by * db.by + b.bz * db.bz;
        let gnorm = (ga * ga + gb * gb).sqrt();
        if gnorm < 1e-14 {
            break;
        }
        let trial = |s: f64| -> (f64, f64, f64) {
            let a2 = (alpha + s * ga / gnorm).clamp(0.0, 1.0);
            let b2 = (beta + s * gb / gnorm).clamp(0.0, 1.0);
            (a2, b2, synthetic_field(a2, b2, c).magnitude)
        };
        let mut advanced = false;
        while step > 1e-12 {
            let (a2, b2, mag) = trial(step);
            if mag > b.magnitude {
                alpha = a2;
                beta = b2;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    let mag = synthetic_field(alpha, beta, c).magnitude;
    (alpha, beta, mag)
}

/// The five canonical invariant segments of the parameter square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantSegment {
    AlphaZero,
    AlphaOne,
    BetaZero,
    BetaOne,
    Diagonal,
}

impl InvariantSegment {
    pub const ALL: [InvariantSegment; 5] = [
        InvariantSegment::AlphaZero,
        InvariantSegment::AlphaOne,
        InvariantSegment::BetaZero,
        InvariantSegment::BetaOne,
        InvariantSegment::Diagonal,
    ];

    /// Point on the segment at parameter s in [0, 1].
    pub fn point(&self, s: f64) -> (f64, f64) {
        match self {
            InvariantSegment::AlphaZero => (0.0, s),
            InvariantSegment::AlphaOne => (1.0, s),
            InvariantSegment::BetaZero => (s, 0.0),
            InvariantSegment::BetaOne => (s, 1.0),
            InvariantSegment::Diagonal => (s, s),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InvariantSegment::AlphaZero => "alpha=0",
            InvariantSegment::AlphaOne => "alpha=1",
            InvariantSegment::BetaZero => "beta=0",
            InvariantSegment::BetaOne => "beta=1",
            InvariantSegment::Diagonal => "alpha=beta",
        }
    }
}

/// Direction report for one invariant segment.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentDirection {
    pub segment: InvariantSegment,
    /// Common unit field direction, or None when the field vanishes on the
    /// whole segment.
    pub direction: Option<[f64; 3]>,
    /// Max angular deviation of the sampled directions from the common one.
    pub max_deviation: f64,
}

pub const DIRECTION_TOL: f64 = 1e-10;

/// Verify that the field direction is constant along each of the five
/// canonical segments and return the common directions.
pub fn invariant_segments(c: DriveConstants) -> Result<Vec<SegmentDirection>> {
    let n = 257;
    let mut out = Vec::with_capacity(5);
    for segment in InvariantSegment::ALL {
        let mut reference: Option<[f64; 3]> = None;
        let mut max_dev = 0.0f64;
        for k in 0..n {
            let s = k as f64 / (n - 1) as f64;
            let (alpha, beta) = segment.point(s);
            let b = synthetic_field(alpha, beta, c);
            // Endpoints are diabolical points; skip vanishing samples.
            if b.magnitude < 1e-13 {
                continue;
            }
            let dir = b.direction().expect("nonzero");
            match &mut reference {
                None => reference = Some(dir),
                Some(r) => {
                    // The field may flip sign along a segment only through a
                    // zero; compare up to sign. The cross-product norm gives
                    // sin(angle) without cancellation near alignment.
                    let cross = [
                        r[1] * dir[2] - r[2] * dir[1],
                        r[2] * dir[0] - r[0] * dir[2],
                        r[0] * dir[1] - r[1] * dir[0],
                    ];
                    let dev = cross.iter().map(|x| x * x).sum::<f64>().sqrt();
                    max_dev = max_dev.max(dev);
                    if dev > DIRECTION_TOL {
                        return Err(Error::DirectionNotInvariant {
                            segment: segment.name().to_string(),
                            deviation: dev,
                        });
                    }
                }
            }
        }
        out.push(SegmentDirection {
            segment,
            direction: reference,
            max_deviation: max_dev,
        });
    }
    Ok(out)
}
