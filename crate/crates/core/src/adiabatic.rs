//! Adiabatic analysis of parameter paths: the Bloch-sphere image traced by
//! the synthetic field direction, the geometric phase of the instantaneous
//! ground state, loop and self-intersection counts, and the slow/fast
//! energy costs of traversing a path.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{sample_path, Crossing, ParameterPath};
use crate::spin::{
    spin_dot_field, synthetic_field, synthetic_field_gradient, DriveConstants, InvariantSegment,
    SyntheticField,
};

/// Below this field magnitude the direction n = B/|B| is numerically
/// meaningless: the path is effectively passing through a degeneracy.
pub const DIABOLICAL_GUARD: f64 = 1e-8;
/// First and last direction of a trajectory must agree this closely for a
/// geometric phase to be defined.
pub const CLOSURE_TOL: f64 = 1e-9;

/// One sample of the Bloch-sphere image of a parameter path.
#[derive(Debug, Clone, Serialize)]
pub struct BlochSample {
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Unit field direction.
    pub n: [f64; 3],
    /// Ground spinor of the effective Hamiltonian, fixed to the
    /// (cos(theta/2), e^{i phi} sin(theta/2)) gauge for output readability.
    pub spinor: [[f64; 2]; 2],
}

/// The image of a parameter path under n = B/|B|.
#[derive(Debug, Clone, Serialize)]
pub struct BlochTrajectory {
    pub constants: DriveConstants,
    pub samples: Vec<BlochSample>,
}

/// Ground spinor aligned with the unit vector n: the lower band of
/// H_eff = H_0 - (pi/8w) S.B is the S.n = +1/2 eigenstate.
pub fn aligned_spinor(n: [f64; 3]) -> [Complex64; 2] {
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Map a parameter path onto the Bloch sphere at n samples.
pub fn bloch_trajectory(
    path: &ParameterPath,
    c: DriveConstants,
    n: usize,
) -> Result<BlochTrajectory> {
    let samples = sample_path(path, n)?;
    let mut out = Vec::with_capacity(samples.len());
    for (tau, alpha, beta) in samples {
        let b = synthetic_field(alpha, beta, c);
        if b.magnitude < DIABOLICAL_GUARD {
            return Err(Error::NearDiabolical {
                tau,
                magnitude: b.magnitude,
            });
        }
        let n_hat = b.direction().expect("guarded above");
        let spinor = aligned_spinor(n_hat);
        out.push(BlochSample {
            tau,
            alpha,
            beta,
            n: n_hat,
            spinor: [
                [spinor[0].re, spinor[0].im],
                [spinor[1].re, spinor[1].im],
            ],
        });
    }
    Ok(BlochTrajectory {
        constants: c,
        samples: out,
    })
}

fn closure_gap(traj: &BlochTrajectory) -> f64 {
    let first = traj.samples.first().expect("nonempty").n;
    let last = traj.samples.last().expect("nonempty").n;
    first
        .iter()
        .zip(&last)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Discrete geometric phase of the ground state over a trajectory that is
/// closed on the sphere: -arg of the product of successive spinor overlaps,
/// closed back to the first sample. Gauge-free: every per-sample phase
/// appears once as a bra and once as a ket.
pub fn berry_phase(traj: &BlochTrajectory) -> Result<f64> {
    let gap = closure_gap(traj);
    if gap > CLOSURE_TOL {
        return Err(Error::TrajectoryNotClosed { gap });
    }
    let spinors: Vec<[Complex64; 2]> = traj
        .samples
        .iter()
        .map(|s| {
            [
                Complex64::new(s.spinor[0][0], s.spinor[0][1]),
                Complex64::new(s.spinor[1][0], s.spinor[1][1]),
            ]
        })
        .collect();
    let m = spinors.len();
    // Accumulate the phase incrementally; the product magnitude would
    // underflow for long chains.
    let mut phase = 0.0;
    for k in 0..m {
        let a = &spinors[k];
        let b = &spinors[(k + 1) % m];
        let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
        if overlap.norm() == 0.0 {
            return Err(Error::NonFinite("spinor overlap"));
        }
        phase += overlap.arg();
    }
    // Fold into (-pi, pi].
    let mut gamma = -phase % (2.0 * PI);
    if gamma <= -PI {
        gamma += 2.0 * PI;
    } else if gamma > PI {
        gamma -= 2.0 * PI;
    }
    Ok(gamma)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Signed solid angle swept by the closed trajectory, accumulated as a fan
/// of spherical triangles against a fixed reference direction. Multiply
/// wound loops accumulate beyond 4 pi instead of being reduced.
pub fn solid_angle(traj: &BlochTrajectory) -> Result<f64> {
    let gap = closure_gap(traj);
    if gap > CLOSURE_TOL {
        return Err(Error::TrajectoryNotClosed { gap });
    }
    let reference = pick_reference(traj)?;
    let mut omega = 0.0;
    let m = traj.samples.len();
    for k in 0..m {
        let a = traj.samples[k].n;
        let b = traj.samples[(k + 1) % m].n;
        // Van Oosterom-Strackee signed area of the triangle (ref, a, b).
        let numer = dot(reference, cross(a, b));
        let denom = 1.0 + dot(reference, a) + dot(reference, b) + dot(a, b);
        omega += 2.0 * numer.atan2(denom);
    }
    Ok(omega)
}

/// Reference direction for the triangle fan: must stay well away from the
/// antipodes of all samples, where the fan triangles degenerate.
fn pick_reference(traj: &BlochTrajectory) -> Result<[f64; 3]> {
    let s = 1.0 / 3.0f64.sqrt();
    let candidates = [
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [s, s, s],
        [-s, s, -s],
        [s, -s, -s],
        [-s, -s, s],
    ];
    let mut best: Option<([f64; 3], f64)> = None;
    for cand in candidates {
        // Margin from the antipode: min over samples of 1 + n.cand.
        let margin = traj
            .samples
            .iter()
            .map(|smp| 1.0 + dot(smp.n, cand))
            .fold(f64::INFINITY, f64::min);
        if best.map(|(_, m)| margin > m).unwrap_or(true) {
            best = Some((cand, margin));
        }
    }
    match best {
        Some((cand, margin)) if margin > 0.05 => Ok(cand),
        _ => Err(Error::ReferencePoint),
    }
}

/// Distinct transversal self-intersection points of the spherical polyline.
/// Exactly retraced arcs are deliberately not counted here; multiplicity of
/// coincident traversals is the loop-count's job.
pub fn self_intersections(traj: &BlochTrajectory) -> (usize, Vec<[f64; 3]>) {
    let m = traj.samples.len();
    if m < 4 {
        return (0, Vec::new());
    }
    let closed = closure_gap(traj) <= CLOSURE_TOL;
    // Decimate nearly coincident successive directions: micro-wiggles at
    // slow spots of the parameterization otherwise fake crossings between
    // sub-roundoff chords.
    let min_chord = 1e-5;
    let dist2 = |a: [f64; 3], b: [f64; 3]| {
        (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
    };
    let raw = if closed { &traj.samples[..m - 1] } else { &traj.samples[..] };
    let mut dirs: Vec<[f64; 3]> = vec![raw[0].n];
    for s in &raw[1..] {
        if dist2(s.n, dirs[dirs.len() - 1]) > min_chord * min_chord {
            dirs.push(s.n);
        }
    }
    if closed && dirs.len() > 1 && dist2(dirs[dirs.len() - 1], dirs[0]) <= min_chord * min_chord {
        dirs.pop();
    }
    if dirs.len() < 4 {
        return (0, Vec::new());
    }
    // Chord list; a closed trajectory gets an explicit wrap-around chord.
    let mut chords: Vec<([f64; 3], [f64; 3])> =
        dirs.windows(2).map(|w| (w[0], w[1])).collect();
    if closed {
        chords.push((dirs[dirs.len() - 1], dirs[0]));
    }
    let nc = chords.len();
    let mut points: Vec<[f64; 3]> = Vec::new();
    for i in 0..nc {
        for j in i + 2..nc {
            // Skip adjacent chords, including the wrap pair of a closed loop.
            if closed && i == 0 && j == nc - 1 {
                continue;
            }
            if let Some(p) = arc_intersection(chords[i], chords[j]) {
                points.push(p);
            }
        }
    }
    // Cluster: nearby hits from neighbouring chord pairs are one point.
    let mut distinct: Vec<[f64; 3]> = Vec::new();
    for p in points {
        let is_new = distinct.iter().all(|q| {
            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            d2 > 1e-6
        });
        if is_new {
            distinct.push(p);
        }
    }
    (distinct.len(), distinct)
}

/// Transversal intersection of two great-circle arcs, if any.
fn arc_intersection(
    (a1, a2): ([f64; 3], [f64; 3]),
    (b1, b2): ([f64; 3], [f64; 3]),
) -> Option<[f64; 3]> {
    let na = cross(a1, a2);
    let nb = cross(b1, b2);
    let line = cross(na, nb);
    let norm = dot(line, line).sqrt();
    // Near-coplanar arcs: treat as non-transversal.
    if norm < 1e-12 {
        return None;
    }
    let dir = [line[0] / norm, line[1] / norm, line[2] / norm];
    for p in [dir, [-dir[0], -dir[1], -dir[2]]] {
        let within = |x1: [f64; 3], x2: [f64; 3], nrm: [f64; 3]| {
            dot(cross(x1, p), nrm) >= -1e-12 && dot(cross(p, x2), nrm) >= -1e-12
        };
        if within(a1, a2, na) && within(b1, b2, nb) {
            // Interior endpoints shared by touching (non-adjacent) chords
            // are still transversal crossings; accept.
            return Some(p);
        }
    }
    None
}

/// Number of loops the trajectory makes on the sphere: one base loop plus
/// one extra for every pair of passages of the path through the same
/// invariant direction. Contacts sitting at the endpoints of an open
/// parameter path do not pair up (the traversal starts and stops there).
pub fn loop_count(crossings: &[Crossing]) -> usize {
    let mut extra = 0;
    for segment in InvariantSegment::ALL {
        let contacts = crossings
            .iter()
            .filter(|c| c.segment == segment && !c.at_path_endpoint)
            .count();
        extra += contacts / 2;
    }
    1 + extra
}

/// Duration-weighted average field over one fast period:
/// B_f = (c1 (a-b)/2, c2 (1-2a)/2, (c3 (b-a) + c4 (2b-1))/2).
pub fn b_f_field(alpha: f64, beta: f64, c: DriveConstants) -> SyntheticField {
    SyntheticField::new(
        0.5 * c.c1 * (alpha - beta),
        0.5 * c.c2 * (1.0 - 2.0 * alpha),
        0.5 * (c.c3 * (beta - alpha) + c.c4 * (2.0 * beta - 1.0)),
    )
}

fn expectation(state: &[Complex64; 2], op: &crate::operator::HermitianOperator) -> f64 {
    let m = op.matrix();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += state[i].conj() * m[(i, j)] * state[j];
        }
    }
    acc.re
}

fn check_normalized(state: &[Complex64; 2]) -> Result<()> {
    let norm = (state[0].norm_sqr() + state[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedState(norm));
    }
    Ok(())
}

/// Fast-timescale energy shift <psi| S.B_f |psi> at fixed (alpha0, beta0).
/// The constant rotor offset 3/(8 I) is not included here.
pub fn delta_e_fast(
    state: &[Complex64; 2],
    alpha0: f64,
    beta0: f64,
    c: DriveConstants,
) -> Result<f64> {
    check_normalized(state)?;
    let b = b_f_field(alpha0, beta0, c);
    Ok(expectation(state, &spin_dot_field(&b)))
}

/// State convention for the slow energy cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateMode {
    /// Hold one fixed spinor along the whole path.
    Fixed,
    /// Track the instantaneous ground state of the effective Hamiltonian.
    InstantaneousGround,
}

/// Slow-timescale energy cost: the path integral of
/// <psi| S.(B1 alpha' + B2 beta') |psi> dtau with B1 = -(pi/8w) dB/dalpha
/// and B2 = -(pi/8w) dB/dbeta, by composite trapezoid per path segment.
pub fn delta_e_slow(
    mode: StateMode,
    fixed_state: Option<&[Complex64; 2]>,
    path: &ParameterPath,
    c: DriveConstants,
    omega: f64,
    n: usize,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveOmega(omega));
    }
    // The expectation <psi| S.r |psi> is r . n_psi / 2 with n_psi the Bloch
    // vector of the state; no operators are needed in the hot loop.
    let fixed_bloch = match (mode, fixed_state) {
        (StateMode::Fixed, Some(s)) => {
            check_normalized(s)?;
            let cross_term = s[0].conj() * s[1];
            Some([
                2.0 * cross_term.re,
                2.0 * cross_term.im,
                s[0].norm_sqr() - s[1].norm_sqr(),
            ])
        }
        (StateMode::Fixed, None) => {
            return Err(Error::Config(
                "fixed state mode requires a spinor".into(),
            ))
        }
        (StateMode::InstantaneousGround, _) => None,
    };
    let scale = -PI / (8.0 * omega);

    let integrand = |seg: &crate::path::PathSegment, tau: f64| -> Result<f64> {
        let (alpha, beta) = seg.point(tau);
        let (da, db) = synthetic_field_gradient(alpha, beta, c);
        let (va, vb) = seg.velocity(tau);
        let rate = [
            scale * (da.bx * va + db.bx * vb),
            scale * (da.by * va + db.by * vb),
            scale * (da.bz * va + db.bz * vb),
        ];
        let bloch = match fixed_bloch {
            Some(v) => v,
            None => {
                let b = synthetic_field(alpha, beta, c);
                if b.magnitude < DIABOLICAL_GUARD {
                    return Err(Error::NearDiabolical {
                        tau,
                        magnitude: b.magnitude,
                    });
                }
                b.direction().expect("guarded")
            }
        };
        Ok(0.5 * (rate[0] * bloch[0] + rate[1] * bloch[1] + rate[2] * bloch[2]))
    };

    // Trapezoid composed per segment: the integrand jumps at joints where
    // the velocity is discontinuous, so each interval is evaluated with the
    // maps of the segment that owns it (one-sided at joints).
    let samples = sample_path(path, n)?;
    let segs = path.segments();
    let mut total = 0.0;
    let mut seg_idx = 0;
    for w in samples.windows(2) {
        let (t0, t1) = (w[0].0, w[1].0);
        while t1 > segs[seg_idx].tau1 && seg_idx + 1 < segs.len() {
            seg_idx += 1;
        }
        let seg = &segs[seg_idx];
        let f0 = integrand(seg, t0)?;
        let f1 = integrand(seg, t1)?;
        total += 0.5 * (f0 + f1) * (t1 - t0);
    }
    Ok(total)
}

/// Ratio guard between the two energy scales.
pub const SEPARATION_EPS: f64 = 1e-300;

/// |delta_e_slow| / max(|delta_e_fast|, eps); values below 10 indicate the
/// slow and fast timescales are not separated.
pub fn adiabatic_check(delta_fast: f64, delta_slow: f64) -> (f64, bool) {
    let ratio = delta_slow.abs() / delta_fast.abs().max(SEPARATION_EPS);
    (ratio, ratio >= 10.0)
}

/// Full per-path analysis bundle.
#[derive(Debug, Clone, Serialize)]
pub struct AdiabaticReport {
    pub berry_phase: f64,
    pub solid_angle: f64,
    pub crossings: Vec<Crossing>,
    pub self_intersections: usize,
    pub loop_count: usize,
    pub delta_e_fast: f64,
    pub delta_e_slow: f64,
    pub separation_ratio: f64,
    pub timescales_separated: bool,
    pub state_mode: StateMode,
}

/// Run the whole adiabatic pipeline over a path.
pub fn analyze_path(
    path: &ParameterPath,
    c: DriveConstants,
    omega: f64,
    n: usize,
    mode: StateMode,
    fixed_state: Option<&[Complex64; 2]>,
) -> Result<AdiabaticReport> {
    let traj = bloch_trajectory(path, c, n)?;
    let berry = berry_phase(&traj)?;
    let omega_solid = solid_angle(&traj)?;
    let crossings = crate::path::invariant_crossings(path, n)?;
    let (selfx, _) = self_intersections(&traj);
    let loops = loop_count(&crossings);
    let (t0, _) = path.tau_domain();
    let (alpha0, beta0) = path.point(t0);
    let ref_state = match (mode, fixed_state) {
        (StateMode::Fixed, Some(s)) => *s,
        _ => {
            let b = synthetic_field(alpha0, beta0, c);
            if b.magnitude < DIABOLICAL_GUARD {
                return Err(Error::NearDiabolical {
                    tau: t0,
                    magnitude: b.magnitude,
                });
            }
            aligned_spinor(b.direction().expect("guarded"))
        }
    };
    let fast = delta_e_fast(&ref_state, alpha0, beta0, c)?;
    let slow = delta_e_slow(mode, fixed_state, path, c, omega, n)?;
    let (ratio, separated) = adiabatic_check(fast, slow);
    Ok(AdiabaticReport {
        berry_phase: berry,
        solid_angle: omega_solid,
        crossings,
        self_intersections: selfx,
        loop_count: loops,
        delta_e_fast: fast,
        delta_e_slow: slow,
        separation_ratio: ratio,
        timescales_separated: separated,
        state_mode: mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{builtin_path, PathSegment, ScalarMap};
    use crate::protocol::four_step_protocol;
    use crate::spin::spin_potentials;

    fn unit_c() -> DriveConstants {
        DriveConstants::uniform()
    }

    /// Hand-built trajectory from a list of directions (already unit).
    fn traj_from_dirs(dirs: &[[f64; 3]]) -> BlochTrajectory {
        BlochTrajectory {
            constants: unit_c(),
            samples: dirs
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    let spinor = aligned_spinor(n);
                    BlochSample {
                        tau: k as f64,
                        alpha: 0.0,
                        beta: 0.0,
                        n,
                        spinor: [
                            [spinor[0].re, spinor[0].im],
                            [spinor[1].re, spinor[1].im],
                        ],
                    }
                })
                .collect(),
        }
    }

    fn equator(n: usize, turns: usize) -> Vec<[f64; 3]> {
        (0..=n * turns)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                [phi.cos(), phi.sin(), 0.0]
            })
            .collect()
    }

    #[test]
    fn equatorial_circle_phase_and_area() {
        let traj = traj_from_dirs(&equator(2000, 1));
        let gamma = berry_phase(&traj).unwrap();
        assert!((gamma.abs() - PI).abs() < 1e-5, "gamma = {gamma}");
        let omega = solid_angle(&traj).unwrap();
        assert!((omega.abs() - 2.0 * PI).abs() < 1e-5);
        // Same sign convention: gamma = -omega/2 (mod 2 pi).
        let residue = (gamma + omega / 2.0).rem_euclid(2.0 * PI);
        assert!(residue < 1e-5 || residue > 2.0 * PI - 1e-5);
    }

    #[test]
    fn doubly_wound_equator_accumulates() {
        let traj = traj_from_dirs(&equator(1500, 2));
        let omega = solid_angle(&traj).unwrap();
        assert!((omega.abs() - 4.0 * PI).abs() < 1e-4, "omega = {omega}");
    }

    #[test]
    fn octant_solid_angle() {
        // Geodesic triangle x -> y -> z -> x: one eighth of the sphere.
        let mut dirs = Vec::new();
        let arc = |from: [f64; 3], to: [f64; 3], out: &mut Vec<[f64; 3]>| {
            for k in 0..200 {
                let t = k as f64 / 200.0;
                let raw = [
                    from[0] + t * (to[0] - from[0]),
                    from[1] + t * (to[1] - from[1]),
                    from[2] + t * (to[2] - from[2]),
                ];
                let norm = dot(raw, raw).sqrt();
                out.push([raw[0] / norm, raw[1] / norm, raw[2] / norm]);
            }
        };
        let (x, y, z) = ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        arc(x, y, &mut dirs);
        arc(y, z, &mut dirs);
        arc(z, x, &mut dirs);
        dirs.push(x);
        let omega = solid_angle(&traj_from_dirs(&dirs)).unwrap();
        assert!((omega.abs() - PI / 2.0).abs() < 1e-4, "omega = {omega}");
    }

    #[test]
    fn constant_trajectory_zero_phase() {
        let dirs = vec![[0.6, 0.0, 0.8]; 50];
        let traj = traj_from_dirs(&dirs);
        assert!(berry_phase(&traj).unwrap().abs() < 1e-14);
        assert!(solid_angle(&traj).unwrap().abs() < 1e-14);
    }

    #[test]
    fn berry_phase_gauge_invariance() {
        let traj = traj_from_dirs(&equator(300, 1));
        let base = berry_phase(&traj).unwrap();
        let mut twisted = traj.clone();
        let mut seed = 11u64;
        for s in &mut twisted.samples {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let phase = (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * PI;
            let rot = Complex64::from_polar(1.0, phase);
            let a = Complex64::new(s.spinor[0][0], s.spinor[0][1]) * rot;
            let b = Complex64::new(s.spinor[1][0], s.spinor[1][1]) * rot;
            s.spinor = [[a.re, a.im], [b.re, b.im]];
        }
        let re = berry_phase(&twisted).unwrap();
        assert!((base - re).abs() <= 1e-12);
    }

    #[test]
    fn open_trajectory_rejected() {
        let mut dirs = equator(100, 1);
        dirs.truncate(60);
        assert!(matches!(
            berry_phase(&traj_from_dirs(&dirs)),
            Err(Error::TrajectoryNotClosed { .. })
        ));
    }

    #[test]
    fn orientation_reversal_negates() {
        let p = builtin_path("fig4b").unwrap();
        let traj = bloch_trajectory(&p, unit_c(), 2001).unwrap();
        let mut reversed = traj.clone();
        reversed.samples.reverse();
        let g = berry_phase(&traj).unwrap();
        let gr = berry_phase(&reversed).unwrap();
        let residue = (g + gr).rem_euclid(2.0 * PI);
        assert!(residue < 1e-9 || residue > 2.0 * PI - 1e-9);
        let o = solid_angle(&traj).unwrap();
        let or = solid_angle(&reversed).unwrap();
        assert!((o + or).abs() < 1e-9);
    }

    #[test]
    fn catalog_phase_matches_solid_angle() {
        for name in ["fig4a", "fig4b", "fig4c"] {
            let p = builtin_path(name).unwrap();
            let traj = bloch_trajectory(&p, unit_c(), 10_001).unwrap();
            let gamma = berry_phase(&traj).unwrap();
            let omega = solid_angle(&traj).unwrap();
            let residue = (gamma + omega / 2.0).rem_euclid(2.0 * PI);
            assert!(
                residue < 1e-4 || residue > 2.0 * PI - 1e-4,
                "{name}: gamma = {gamma}, omega = {omega}"
            );
        }
    }

    #[test]
    fn fig4c_image_closes_although_path_is_open() {
        let p = builtin_path("fig4c").unwrap();
        let traj = bloch_trajectory(&p, unit_c(), 4001).unwrap();
        assert!(closure_gap(&traj) <= 1e-9);
    }

    #[test]
    fn trajectory_sample_invariants() {
        let p = builtin_path("fig4a").unwrap();
        let traj = bloch_trajectory(&p, unit_c(), 501).unwrap();
        for s in &traj.samples {
            let norm = dot(s.n, s.n).sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        // Path corner (0.5, 0.5) sits on the diagonal: direction
        // proportional to -(1, 3, -1)/sqrt(11).
        let corner = traj
            .samples
            .iter()
            .find(|s| s.alpha == 0.5 && s.beta == 0.5)
            .expect("joint sampled exactly");
        let want = [-1.0, -3.0, 1.0];
        let norm = dot(want, want).sqrt();
        for (g, w) in corner.n.iter().zip(want) {
            assert!((g - w / norm).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_direction_for_0101_off_diagonal() {
        let c = DriveConstants::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let p = builtin_path("fig5-short").unwrap(); // stays below diagonal
        let traj = bloch_trajectory(&p, c, 301).unwrap();
        for s in &traj.samples {
            assert!((s.n[0].abs() - 1.0).abs() <= 1e-12);
            assert!(s.n[1].abs() <= 1e-12 && s.n[2].abs() <= 1e-12);
        }
        let gamma = berry_phase(&traj).unwrap();
        assert!(gamma.abs() <= 1e-12);
    }

    #[test]
    fn diabolical_guard_fires_on_the_diagonal() {
        let c = DriveConstants::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let p = builtin_path("fig4b").unwrap(); // crosses the diagonal
        assert!(matches!(
            bloch_trajectory(&p, c, 801),
            Err(Error::NearDiabolical { .. })
        ));
    }

    #[test]
    fn image_self_intersections() {
        let c = unit_c();
        let p = builtin_path("fig4a").unwrap();
        let (count, _) = self_intersections(&bloch_trajectory(&p, c, 2001).unwrap());
        assert_eq!(count, 0, "fig4a image is a simple loop");

        let p = builtin_path("fig4b").unwrap();
        let (count, pts) = self_intersections(&bloch_trajectory(&p, c, 2001).unwrap());
        assert_eq!(count, 1, "fig4b image crosses itself once: {pts:?}");
        // The repeated point is the diagonal's invariant direction.
        let want = [-1.0, -3.0, 1.0];
        let norm = dot(want, want).sqrt();
        let aligned = (dot(pts[0], [want[0] / norm, want[1] / norm, want[2] / norm])).abs();
        assert!(aligned > 1.0 - 1e-6, "point {:?}", pts[0]);

        let p = builtin_path("fig4c").unwrap();
        let (count, pts) = self_intersections(&bloch_trajectory(&p, c, 2001).unwrap());
        assert_eq!(count, 1, "fig4c image crosses itself once: {pts:?}");
    }

    #[test]
    fn loop_counts_for_catalog() {
        for (name, want) in [
            ("fig4a", 1),
            ("fig4b", 2),
            ("fig4c", 2),
            ("fig5-long", 2),
            ("fig5-short", 1),
        ] {
            let p = builtin_path(name).unwrap();
            let crossings = crate::path::invariant_crossings(&p, 801).unwrap();
            assert_eq!(loop_count(&crossings), want, "{name}");
        }
    }

    #[test]
    fn b_f_matches_protocol_average() {
        // The duration-weighted mean of the four potentials decomposed on
        // (Sx, Sy, Sz) is exactly S.B_f.
        let c = DriveConstants::new(0.8, -1.1, 0.5, 1.7).unwrap();
        for &(a, b) in &[(0.3, 0.7), (0.5, 0.5), (0.9, 0.2)] {
            let p = four_step_protocol(a, b, spin_potentials(c)).unwrap();
            let avg = p.fourier_component(0);
            let bf = b_f_field(a, b, c);
            let expect = spin_dot_field(&bf);
            let dev = avg.sub(expect.matrix()).unwrap().max_abs();
            assert!(dev <= 1e-14, "({a}, {b}): {dev}");
        }
    }

    #[test]
    fn delta_e_fast_values() {
        let c = unit_c();
        let up = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        // Equi-time: B_f = 0.
        assert_eq!(delta_e_fast(&up, 0.5, 0.5, c).unwrap(), 0.0);
        // Corner (0, 0): B_f = (0, 1/2, -1/2), <S_z> = 1/2.
        assert!((delta_e_fast(&up, 0.0, 0.0, c).unwrap() + 0.25).abs() < 1e-15);
        let bad = [Complex64::new(0.7, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(
            delta_e_fast(&bad, 0.5, 0.5, c),
            Err(Error::UnnormalizedState(_))
        ));
    }

    #[test]
    fn slow_cost_vanishes_on_closed_paths_with_fixed_state() {
        let c = unit_c();
        let state = aligned_spinor([0.6, 0.0, 0.8]);
        for name in ["fig4b", "fig5-long", "fig5-short"] {
            let p = builtin_path(name).unwrap();
            let cost =
                delta_e_slow(StateMode::Fixed, Some(&state), &p, c, 100.0, 500_001).unwrap();
            assert!(cost.abs() <= 1e-10, "{name}: {cost}");
        }
    }

    #[test]
    fn slow_cost_equals_endpoint_difference_for_fixed_state() {
        // The integrand is an exact gradient, so the integral telescopes to
        // -(pi/8w) <S.(B(end) - B(start))>.
        let c = unit_c();
        let omega = 100.0;
        let up = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let p = builtin_path("fig4c").unwrap();
        let got = delta_e_slow(StateMode::Fixed, Some(&up), &p, c, omega, 200_001).unwrap();
        let b_start = synthetic_field(0.25, 0.25, c);
        let (a_end, b_end_pt) = p.point(0.75);
        let b_end = synthetic_field(a_end, b_end_pt, c);
        let want = -PI / (8.0 * omega) * 0.5 * (b_end.bz - b_start.bz);
        assert!((got - want).abs() <= 1e-9, "got {got}, want {want}");
        // Endpoints carry the same field, so the cost is zero.
        assert!(want.abs() <= 1e-12);
    }

    #[test]
    fn slow_cost_ground_mode_tracks_field_magnitude() {
        // In ground mode the integrand reduces to -(pi/16w) d|B|/dtau, so a
        // closed path costs nothing.
        let c = unit_c();
        let p = builtin_path("fig5-long").unwrap();
        let cost =
            delta_e_slow(StateMode::InstantaneousGround, None, &p, c, 100.0, 200_001).unwrap();
        assert!(cost.abs() <= 1e-9, "cost = {cost}");
    }

    #[test]
    fn adiabatic_check_thresholds() {
        let (ratio, ok) = adiabatic_check(0.0, 0.5);
        assert!(ratio > 1e100 && ok);
        let (ratio, ok) = adiabatic_check(0.3, 0.3);
        assert!((ratio - 1.0).abs() < 1e-15 && !ok);
    }

    #[test]
    fn full_report_for_circle() {
        let p = builtin_path("fig4b").unwrap();
        let report = analyze_path(
            &p,
            unit_c(),
            100.0,
            4001,
            StateMode::InstantaneousGround,
            None,
        )
        .unwrap();
        assert_eq!(report.loop_count, 2);
        assert_eq!(report.self_intersections, 1);
        assert!(report.berry_phase > -PI && report.berry_phase <= PI);
        let residue = (report.berry_phase + report.solid_angle / 2.0).rem_euclid(2.0 * PI);
        assert!(residue < 1e-3 || residue > 2.0 * PI - 1e-3);
    }

    #[test]
    fn convergence_order_of_berry_phase() {
        // Richardson-style order estimate on the circle path.
        let p = builtin_path("fig4b").unwrap();
        let gamma = |n: usize| {
            berry_phase(&bloch_trajectory(&p, unit_c(), n + 1).unwrap()).unwrap()
        };
        let (g1, g2, g4) = (gamma(250), gamma(500), gamma(1000));
        let order = ((g1 - g2).abs() / (g2 - g4).abs()).log2();
        assert!(order >= 1.9, "order = {order}");
    }

    #[test]
    fn reference_point_error_path_exists() {
        // A trajectory spraying over the whole sphere leaves no safe
        // reference direction.
        let mut dirs = Vec::new();
        let golden = PI * (3.0 - 5.0f64.sqrt());
        let n = 400;
        for k in 0..n {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            dirs.push([r * phi.cos(), r * phi.sin(), z]);
        }
        dirs.push(dirs[0]);
        assert!(matches!(
            solid_angle(&traj_from_dirs(&dirs)),
            Err(Error::ReferencePoint)
        ));
    }

    #[test]
    fn near_diabolical_guard_in_ground_mode() {
        // A short straight run across the diagonal for c = (0,1,0,1).
        let c = DriveConstants::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let p = crate::path::ParameterPath::new(vec![PathSegment {
            tau0: 0.0,
            tau1: 1.0,
            alpha: ScalarMap::linear(0.3, 0.2),
            beta: ScalarMap::linear(0.5, -0.2),
        }])
        .unwrap();
        assert!(matches!(
            delta_e_slow(StateMode::InstantaneousGround, None, &p, c, 100.0, 101),
            Err(Error::NearDiabolical { .. })
        ));
    }
}
