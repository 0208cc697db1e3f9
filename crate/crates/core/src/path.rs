//! Piecewise-analytic paths tau -> (alpha(tau), beta(tau)) in the unit
//! square, the builtin catalog of figure paths, deterministic sampling,
//! and detection of contacts with the five invariant segments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::InvariantSegment;

/// Joints and closure must match to this accuracy.
pub const CONTINUITY_TOL: f64 = 1e-12;
/// Slack for the image-in-square check (pure roundoff).
const IMAGE_TOL: f64 = 1e-9;
/// A tangential contact must approach a segment at least this closely.
const CONTACT_TOL: f64 = 1e-9;
/// Floor under the square root when differentiating [`ScalarMap::SqrtPoly`],
/// where the true derivative may diverge (integrably) at an endpoint.
const SQRT_FLOOR: f64 = 1e-12;

/// One coordinate of a path segment as an analytic map of tau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarMap {
    /// Polynomial with ascending coefficients: c[0] + c[1] tau + ...
    Poly { coeffs: Vec<f64> },
    /// offset + amp * cos(freq * tau + phase)
    Trig {
        offset: f64,
        amp: f64,
        freq: f64,
        phase: f64,
    },
    /// outer(tau) + coeff * sqrt(inner(tau)), inner clamped at zero.
    SqrtPoly {
        outer: Vec<f64>,
        coeff: f64,
        inner: Vec<f64>,
    },
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn horner_deriv(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
}

impl ScalarMap {
    pub fn constant(value: f64) -> Self {
        ScalarMap::Poly {
            coeffs: vec![value],
        }
    }

    pub fn linear(intercept: f64, slope: f64) -> Self {
        ScalarMap::Poly {
            coeffs: vec![intercept, slope],
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        match self {
            ScalarMap::Poly { coeffs } => horner(coeffs, tau),
            ScalarMap::Trig {
                offset,
                amp,
                freq,
                phase,
            } => offset + amp * (freq * tau + phase).cos(),
            ScalarMap::SqrtPoly {
                outer,
                coeff,
                inner,
            } => horner(outer, tau) + coeff * horner(inner, tau).max(0.0).sqrt(),
        }
    }

    /// Derivative in tau. For `SqrtPoly` the square root is floored at
    /// [`SQRT_FLOOR`], which truncates an integrable endpoint divergence.
    pub fn deriv(&self, tau: f64) -> f64 {
        match self {
            ScalarMap::Poly { coeffs } => horner_deriv(coeffs, tau),
            ScalarMap::Trig {
                amp, freq, phase, ..
            } => -amp * freq * (freq * tau + phase).sin(),
            ScalarMap::SqrtPoly {
                outer,
                coeff,
                inner,
            } => {
                let root = horner(inner, tau).max(SQRT_FLOOR).sqrt();
                horner_deriv(outer, tau) + coeff * horner_deriv(inner, tau) / (2.0 * root)
            }
        }
    }
}

/// One analytic piece of a parameter path on [tau0, tau1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub tau0: f64,
    pub tau1: f64,
    pub alpha: ScalarMap,
    pub beta: ScalarMap,
}

impl PathSegment {
    pub fn point(&self, tau: f64) -> (f64, f64) {
        (self.alpha.eval(tau), self.beta.eval(tau))
    }

    pub fn velocity(&self, tau: f64) -> (f64, f64) {
        (self.alpha.deriv(tau), self.beta.deriv(tau))
    }
}

/// Continuous piecewise path in the parameter square.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterPath {
    segments: Vec<PathSegment>,
    closed: bool,
}

impl ParameterPath {
    pub fn new(segments: Vec<PathSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Config("path needs at least one segment".into()));
        }
        for seg in &segments {
            if !(seg.tau1 > seg.tau0) {
                return Err(Error::Config(format!(
                    "segment range [{}, {}] is empty",
                    seg.tau0, seg.tau1
                )));
            }
        }
        for pair in segments.windows(2) {
            let gap = (pair[1].tau0 - pair[0].tau1).abs();
            if gap > CONTINUITY_TOL {
                return Err(Error::PathDiscontinuous {
                    tau: pair[0].tau1,
                    jump: gap,
                });
            }
            let (a0, b0) = pair[0].point(pair[0].tau1);
            let (a1, b1) = pair[1].point(pair[1].tau0);
            let jump = ((a1 - a0).powi(2) + (b1 - b0).powi(2)).sqrt();
            if jump > CONTINUITY_TOL {
                return Err(Error::PathDiscontinuous {
                    tau: pair[0].tau1,
                    jump,
                });
            }
        }
        // Image check: dense sampling per segment.
        for seg in &segments {
            for k in 0..=512 {
                let tau = seg.tau0 + (seg.tau1 - seg.tau0) * k as f64 / 512.0;
                let (a, b) = seg.point(tau);
                if !(-IMAGE_TOL..=1.0 + IMAGE_TOL).contains(&a)
                    || !(-IMAGE_TOL..=1.0 + IMAGE_TOL).contains(&b)
                {
                    return Err(Error::PathOutOfSquare {
                        tau,
                        alpha: a,
                        beta: b,
                    });
                }
            }
        }
        let first = segments[0].point(segments[0].tau0);
        let last = segments[segments.len() - 1].point(segments[segments.len() - 1].tau1);
        let gap = ((first.0 - last.0).powi(2) + (first.1 - last.1).powi(2)).sqrt();
        Ok(Self {
            closed: gap <= CONTINUITY_TOL,
            segments,
        })
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn tau_domain(&self) -> (f64, f64) {
        (
            self.segments[0].tau0,
            self.segments[self.segments.len() - 1].tau1,
        )
    }

    fn segment_at(&self, tau: f64) -> &PathSegment {
        self.segments
            .iter()
            .find(|s| tau <= s.tau1)
            .unwrap_or(&self.segments[self.segments.len() - 1])
    }

    pub fn point(&self, tau: f64) -> (f64, f64) {
        let (a, b) = self.segment_at(tau).point(tau);
        (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0))
    }

    pub fn velocity(&self, tau: f64) -> (f64, f64) {
        self.segment_at(tau).velocity(tau)
    }

    /// Euclidean length of the n-point sampled polyline.
    pub fn polyline_length(&self, n: usize) -> Result<f64> {
        let samples = sample_path(self, n)?;
        Ok(samples
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1).powi(2) + (w[1].2 - w[0].2).powi(2)).sqrt())
            .sum())
    }
}

/// Catalog of the figure paths.
pub fn builtin_path(name: &str) -> Result<ParameterPath> {
    let polygon = |vertices: &[(f64, f64)]| -> Result<ParameterPath> {
        let m = vertices.len() - 1;
        let segments = (0..m)
            .map(|k| {
                let (t0, t1) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
                let (p, q) = (vertices[k], vertices[k + 1]);
                PathSegment {
                    tau0: t0,
                    tau1: t1,
                    alpha: ScalarMap::linear(
                        p.0 - t0 * (q.0 - p.0) / (t1 - t0),
                        (q.0 - p.0) / (t1 - t0),
                    ),
                    beta: ScalarMap::linear(
                        p.1 - t0 * (q.1 - p.1) / (t1 - t0),
                        (q.1 - p.1) / (t1 - t0),
                    ),
                }
            })
            .collect();
        ParameterPath::new(segments)
    };

    match name {
        // Closed path: two straight legs plus a quarter circle written with
        // an explicit square root.
        "fig4a" => ParameterPath::new(vec![
            PathSegment {
                tau0: 0.0,
                tau1: 0.25,
                alpha: ScalarMap::linear(1.0, -2.0),
                beta: ScalarMap::constant(0.5),
            },
            PathSegment {
                tau0: 0.25,
                tau1: 0.5,
                alpha: ScalarMap::constant(0.5),
                beta: ScalarMap::linear(1.0, -2.0),
            },
            PathSegment {
                tau0: 0.5,
                tau1: 1.0,
                alpha: ScalarMap::linear(0.0, 1.0),
                beta: ScalarMap::SqrtPoly {
                    outer: vec![0.5],
                    coeff: -1.0,
                    inner: vec![0.0, 1.0, -1.0],
                },
            },
        ]),
        // Circle of radius 1/2 about the center of the square.
        "fig4b" => ParameterPath::new(vec![PathSegment {
            tau0: 0.0,
            tau1: 1.0,
            alpha: ScalarMap::Trig {
                offset: 0.5,
                amp: 0.5,
                freq: 2.0 * PI,
                phase: 0.0,
            },
            beta: ScalarMap::Trig {
                offset: 0.5,
                amp: 0.5,
                freq: 2.0 * PI,
                phase: -PI / 2.0,
            },
        }]),
        // Open path from (0.25, 0.25) to (0.75, 0.75) grazing beta = 1.
        "fig4c" => ParameterPath::new(vec![
            PathSegment {
                tau0: 0.25,
                tau1: 0.4,
                alpha: ScalarMap::linear(0.0, 1.0),
                beta: ScalarMap::linear(-1.0, 5.0),
            },
            PathSegment {
                tau0: 0.4,
                tau1: 0.6,
                alpha: ScalarMap::linear(0.0, 1.0),
                beta: ScalarMap::Poly {
                    coeffs: vec![7.0, -25.0, 25.0],
                },
            },
            PathSegment {
                tau0: 0.6,
                tau1: 0.75,
                alpha: ScalarMap::linear(0.0, 1.0),
                beta: ScalarMap::linear(2.0, -5.0 / 3.0),
            },
        ]),
        // Two nearby closed polygons hugging the leading diagonal. The long
        // one detours through a vertex across the diagonal and re-crosses it
        // on the way back; the short one stays below the diagonal. Their
        // lengths differ by about 4.5%.
        "fig5-long" => polygon(&[
            (0.5, 0.42),
            (0.75, 0.42),
            (0.66, 0.6),
            (0.545, 0.565),
            (0.5, 0.42),
        ]),
        "fig5-short" => polygon(&[(0.5, 0.42), (0.75, 0.42), (0.66, 0.6), (0.5, 0.42)]),
        other => Err(Error::UnknownPath(other.to_string())),
    }
}

/// n samples of (tau, alpha, beta): intervals split across segments in
/// proportion to their tau-lengths, with every joint hit exactly.
pub fn sample_path(path: &ParameterPath, n: usize) -> Result<Vec<(f64, f64, f64)>> {
    let segs = path.segments();
    if n < segs.len() + 1 || n < 2 {
        return Err(Error::TooFewSamples {
            need: (segs.len() + 1).max(2),
            got: n,
        });
    }
    let total: f64 = segs.iter().map(|s| s.tau1 - s.tau0).sum();
    let intervals = n - 1;
    // Largest-remainder apportionment with at least one interval per segment.
    let quotas: Vec<f64> = segs
        .iter()
        .map(|s| intervals as f64 * (s.tau1 - s.tau0) / total)
        .collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let mut assigned: usize = counts.iter().sum();
    // Trim over-assignment caused by the minimum, then distribute leftovers.
    while assigned > intervals {
        let k = (0..segs.len())
            .filter(|&k| counts[k] > 1)
            .max_by(|&a, &b| {
                let ra = counts[a] as f64 - quotas[a];
                let rb = counts[b] as f64 - quotas[b];
                ra.partial_cmp(&rb).unwrap()
            })
            .expect("n >= segments + 1 guarantees slack");
        counts[k] -= 1;
        assigned -= 1;
    }
    while assigned < intervals {
        let k = (0..segs.len())
            .max_by(|&a, &b| {
                let ra = quotas[a] - counts[a] as f64;
                let rb = quotas[b] - counts[b] as f64;
                ra.partial_cmp(&rb).unwrap()
            })
            .unwrap();
        counts[k] += 1;
        assigned += 1;
    }

    let mut out = Vec::with_capacity(n);
    for (seg, &k) in segs.iter().zip(&counts) {
        let start = if out.is_empty() { 0 } else { 1 };
        for j in start..=k {
            let tau = if j == k {
                seg.tau1 // joints exact, no roundoff drift
            } else {
                seg.tau0 + (seg.tau1 - seg.tau0) * j as f64 / k as f64
            };
            let (a, b) = seg.point(tau);
            out.push((tau, a.clamp(0.0, 1.0), b.clamp(0.0, 1.0)));
        }
    }
    debug_assert_eq!(out.len(), n);
    Ok(out)
}

/// How a path meets an invariant segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContactKind {
    /// Sign change of the segment's defining function.
    Transversal,
    /// Touch without a sign change.
    Tangential,
}

/// One contact of the path with an invariant segment.
#[derive(Debug, Clone, Serialize)]
pub struct Crossing {
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub segment: InvariantSegment,
    pub kind: ContactKind,
    /// Contact sitting at the endpoint of an open path.
    pub at_path_endpoint: bool,
}

fn segment_function(segment: InvariantSegment) -> fn(f64, f64) -> f64 {
    match segment {
        InvariantSegment::Diagonal => |a, b| a - b,
        InvariantSegment::AlphaZero => |a, _| a,
        InvariantSegment::AlphaOne => |a, _| a - 1.0,
        InvariantSegment::BetaZero => |_, b| b,
        InvariantSegment::BetaOne => |_, b| b - 1.0,
    }
}

/// Find all contacts of the path with the five invariant segments, using
/// n samples for bracketing and local refinement for the exact tau values.
pub fn invariant_crossings(path: &ParameterPath, n: usize) -> Result<Vec<Crossing>> {
    let samples = sample_path(path, n)?;
    let m = samples.len();
    let mut out = Vec::new();

    for segment in InvariantSegment::ALL {
        let g_fn = segment_function(segment);
        let g_at = |tau: f64| {
            let (a, b) = path.point(tau);
            g_fn(a, b)
        };
        let g: Vec<f64> = samples.iter().map(|&(_, a, b)| g_fn(a, b)).collect();
        let zero_tol = 1e-11;

        // Exact-zero samples, grouped into one contact per run.
        let mut i = 0;
        while i < m {
            if g[i].abs() > zero_tol {
                i += 1;
                continue;
            }
            let start = i;
            while i < m && g[i].abs() <= zero_tol {
                i += 1;
            }
            let end = i - 1;
            // Neighbor signs; for a closed path the chain wraps around.
            let before = neighbor_sign(&g, start, -1, path.closed(), zero_tol);
            let after = neighbor_sign(&g, end, 1, path.closed(), zero_tol);
            let at_endpoint = !path.closed() && (start == 0 || end == m - 1);
            let kind = match (before, after) {
                (Some(sb), Some(sa)) if sb * sa < 0.0 => ContactKind::Transversal,
                _ => ContactKind::Tangential,
            };
            let mid = (start + end) / 2;
            let (tau, a, b) = samples[mid];
            out.push(Crossing {
                tau,
                alpha: a,
                beta: b,
                segment,
                kind,
                at_path_endpoint: at_endpoint,
            });
        }

        // Sign changes between consecutive nonzero samples: bisect.
        for k in 0..m - 1 {
            if g[k].abs() <= zero_tol || g[k + 1].abs() <= zero_tol {
                continue;
            }
            if g[k] * g[k + 1] < 0.0 {
                let (mut lo, mut hi) = (samples[k].0, samples[k + 1].0);
                let mut g_lo = g[k];
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let g_mid = g_at(mid);
                    if g_lo * g_mid <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        g_lo = g_mid;
                    }
                    if hi - lo < 1e-13 {
                        break;
                    }
                }
                let tau = 0.5 * (lo + hi);
                let (a, b) = path.point(tau);
                out.push(Crossing {
                    tau,
                    alpha: a,
                    beta: b,
                    segment,
                    kind: ContactKind::Transversal,
                    at_path_endpoint: false,
                });
            }
        }

        // Tangential touches between samples: same-sign local minima of |g|
        // that refine all the way down to the segment.
        for k in 1..m - 1 {
            if g[k].abs() <= zero_tol
                || g[k - 1].abs() <= zero_tol
                || g[k + 1].abs() <= zero_tol
            {
                continue;
            }
            if g[k].abs() < g[k - 1].abs()
                && g[k].abs() <= g[k + 1].abs()
                && g[k - 1] * g[k + 1] > 0.0
            {
                let (mut lo, mut hi) = (samples[k - 1].0, samples[k + 1].0);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if g_at(m1).abs() < g_at(m2).abs() {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                    if hi - lo < 1e-14 {
                        break;
                    }
                }
                let tau = 0.5 * (lo + hi);
                if g_at(tau).abs() <= CONTACT_TOL {
                    let (a, b) = path.point(tau);
                    out.push(Crossing {
                        tau,
                        alpha: a,
                        beta: b,
                        segment,
                        kind: ContactKind::Tangential,
                        at_path_endpoint: false,
                    });
                }
            }
        }
    }

    // A closed path whose start point sits on a segment reports that contact
    // at both tau-domain ends; keep only the first.
    if path.closed() {
        let (t0, t1) = path.tau_domain();
        let mut keep = vec![true; out.len()];
        for i in 0..out.len() {
            for j in 0..out.len() {
                if i != j
                    && keep[j]
                    && out[i].segment == out[j].segment
                    && (out[i].tau - t0).abs() <= 1e-9
                    && (out[j].tau - t1).abs() <= 1e-9
                    && (out[i].alpha - out[j].alpha).abs() <= 1e-9
                    && (out[i].beta - out[j].beta).abs() <= 1e-9
                {
                    keep[j] = false;
                }
            }
        }
        let mut it = keep.iter();
        out.retain(|_| *it.next().unwrap());
    }

    out.sort_by(|x, y| x.tau.partial_cmp(&y.tau).unwrap());
    Ok(out)
}

fn neighbor_sign(
    g: &[f64],
    from: usize,
    dir: i64,
    closed: bool,
    zero_tol: f64,
) -> Option<f64> {
    let m = g.len() as i64;
    let mut idx = from as i64;
    for _ in 0..m {
        idx += dir;
        if closed {
            // Endpoint samples duplicate each other; wrap past them.
            idx = (idx % m + m) % m;
        } else if !(0..m).contains(&idx) {
            return None;
        }
        let v = g[idx as usize];
        if v.abs() > zero_tol {
            return Some(v.signum());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn catalog_membership_and_closure() {
        for (name, closed) in [
            ("fig4a", true),
            ("fig4b", true),
            ("fig4c", false),
            ("fig5-long", true),
            ("fig5-short", true),
        ] {
            let path = builtin_path(name).unwrap();
            assert_eq!(path.closed(), closed, "{name}");
        }
        assert!(matches!(
            builtin_path("fig6"),
            Err(Error::UnknownPath(_))
        ));
    }

    #[test]
    fn fig4a_waypoints() {
        let p = builtin_path("fig4a").unwrap();
        assert_eq!(p.point(0.0), (1.0, 0.5));
        assert_eq!(p.point(0.25), (0.5, 0.5));
        assert_eq!(p.point(0.5), (0.5, 0.0));
        assert_eq!(p.point(1.0), (1.0, 0.5));
        // Third piece is the lower-right quarter of the central circle.
        for k in 1..20 {
            let tau = 0.5 + 0.5 * k as f64 / 20.0;
            let (a, b) = p.point(tau);
            let r2 = (a - 0.5).powi(2) + (b - 0.5).powi(2);
            assert!(close(r2, 0.25, 1e-12), "tau = {tau}");
            assert!(b <= 0.5 && a >= 0.5);
        }
    }

    #[test]
    fn fig4b_waypoints() {
        let p = builtin_path("fig4b").unwrap();
        assert_eq!(p.point(0.0), (1.0, 0.5));
        let (a, b) = p.point(0.25);
        assert!(close(a, 0.5, 1e-12) && close(b, 1.0, 1e-12));
        let (a, b) = p.point(0.5);
        assert!(close(a, 0.0, 1e-12) && close(b, 0.5, 1e-12));
    }

    #[test]
    fn fig4c_waypoints() {
        let p = builtin_path("fig4c").unwrap();
        assert_eq!(p.tau_domain(), (0.25, 0.75));
        assert_eq!(p.point(0.25), (0.25, 0.25));
        let (a, b) = p.point(0.75);
        assert!(close(a, 0.75, 1e-14) && close(b, 0.75, 1e-14));
        let (a, b) = p.point(0.4);
        assert!(close(a, 0.4, 1e-14) && close(b, 1.0, 1e-14));
        let (a, b) = p.point(0.6);
        assert!(close(a, 0.6, 1e-14) && close(b, 1.0, 1e-14));
        // Parabolic middle stays on the boundary only at its ends.
        let (_, b) = p.point(0.5);
        assert!(close(b, 0.75, 1e-12));
    }

    #[test]
    fn fig5_lengths_and_geometry() {
        let long = builtin_path("fig5-long").unwrap();
        let short = builtin_path("fig5-short").unwrap();
        let l_long = long.polyline_length(4001).unwrap();
        let l_short = short.polyline_length(4001).unwrap();
        assert!(l_long > l_short);
        assert!((l_long - l_short) / l_short < 0.10);
        assert!(close(l_short, 0.692, 1e-3));
        assert!(close(l_long, 0.7235, 1e-3));
    }

    #[test]
    fn rejects_discontinuous_and_out_of_square() {
        let err = ParameterPath::new(vec![
            PathSegment {
                tau0: 0.0,
                tau1: 0.5,
                alpha: ScalarMap::constant(0.2),
                beta: ScalarMap::constant(0.2),
            },
            PathSegment {
                tau0: 0.5,
                tau1: 1.0,
                alpha: ScalarMap::constant(0.3),
                beta: ScalarMap::constant(0.2),
            },
        ]);
        assert!(matches!(err, Err(Error::PathDiscontinuous { .. })));

        let err = ParameterPath::new(vec![PathSegment {
            tau0: 0.0,
            tau1: 1.0,
            alpha: ScalarMap::linear(0.0, 1.5),
            beta: ScalarMap::constant(0.5),
        }]);
        assert!(matches!(err, Err(Error::PathOutOfSquare { .. })));
    }

    #[test]
    fn scalar_map_derivatives() {
        let maps = [
            ScalarMap::Poly {
                coeffs: vec![7.0, -25.0, 25.0],
            },
            ScalarMap::Trig {
                offset: 0.5,
                amp: 0.5,
                freq: 2.0 * PI,
                phase: -PI / 2.0,
            },
            ScalarMap::SqrtPoly {
                outer: vec![0.5],
                coeff: -1.0,
                inner: vec![0.0, 1.0, -1.0],
            },
        ];
        let h = 1e-6;
        for map in &maps {
            for k in 1..10 {
                let tau = 0.5 + 0.04 * k as f64; // away from sqrt endpoints
                let fd = (map.eval(tau + h) - map.eval(tau - h)) / (2.0 * h);
                assert!(close(map.deriv(tau), fd, 1e-6), "{map:?} at {tau}");
            }
        }
    }

    #[test]
    fn sampling_includes_joints_and_respects_counts() {
        let p = builtin_path("fig4a").unwrap();
        for n in [7, 64, 999] {
            let s = sample_path(&p, n).unwrap();
            assert_eq!(s.len(), n);
            assert!(s.iter().any(|&(t, a, b)| t == 0.25 && a == 0.5 && b == 0.5));
            assert!(s.iter().any(|&(t, a, b)| t == 0.5 && a == 0.5 && b == 0.0));
            assert_eq!(s[0].1, s[n - 1].1);
            assert_eq!(s[0].2, s[n - 1].2);
            assert!(s.windows(2).all(|w| w[1].0 > w[0].0));
        }
        let circle = builtin_path("fig4b").unwrap();
        let s = sample_path(&circle, 5).unwrap();
        let taus: Vec<f64> = s.iter().map(|x| x.0).collect();
        assert_eq!(taus, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(matches!(
            sample_path(&circle, 1),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn sampling_apportions_by_tau_length() {
        // fig4c segments have tau-lengths 0.15 / 0.2 / 0.15: the middle
        // segment gets the most intervals.
        let p = builtin_path("fig4c").unwrap();
        let s = sample_path(&p, 101).unwrap();
        let in_middle = s.iter().filter(|x| x.0 > 0.4 && x.0 < 0.6).count();
        assert!((in_middle as i64 - 39).abs() <= 2);
    }

    #[test]
    fn circle_crossings() {
        let p = builtin_path("fig4b").unwrap();
        let crossings = invariant_crossings(&p, 400).unwrap();
        let diag: Vec<&Crossing> = crossings
            .iter()
            .filter(|c| c.segment == InvariantSegment::Diagonal)
            .collect();
        assert_eq!(diag.len(), 2);
        let hi = 0.5 + 0.5 / 2.0f64.sqrt();
        let lo = 0.5 - 0.5 / 2.0f64.sqrt();
        for c in &diag {
            assert_eq!(c.kind, ContactKind::Transversal);
            assert!(close(c.alpha, c.beta, 1e-9));
            assert!(close(c.alpha, hi, 1e-6) || close(c.alpha, lo, 1e-6));
        }
        // Four tangential boundary touches.
        for seg in [
            InvariantSegment::AlphaZero,
            InvariantSegment::AlphaOne,
            InvariantSegment::BetaZero,
            InvariantSegment::BetaOne,
        ] {
            let touches: Vec<&Crossing> =
                crossings.iter().filter(|c| c.segment == seg).collect();
            assert_eq!(touches.len(), 1, "{seg:?}");
            assert_eq!(touches[0].kind, ContactKind::Tangential);
        }
    }

    #[test]
    fn fig4a_contacts_are_tangential() {
        let p = builtin_path("fig4a").unwrap();
        let crossings = invariant_crossings(&p, 801).unwrap();
        assert!(crossings.iter().all(|c| c.kind == ContactKind::Tangential));
        let diag: Vec<&Crossing> = crossings
            .iter()
            .filter(|c| c.segment == InvariantSegment::Diagonal)
            .collect();
        assert_eq!(diag.len(), 1);
        assert!(close(diag[0].alpha, 0.5, 1e-9) && close(diag[0].beta, 0.5, 1e-9));
        let bottom: Vec<&Crossing> = crossings
            .iter()
            .filter(|c| c.segment == InvariantSegment::BetaZero)
            .collect();
        assert_eq!(bottom.len(), 1);
        assert!(close(bottom[0].alpha, 0.5, 1e-9));
        // Start/end point (1, 0.5) sits on alpha = 1 and wraps tangentially.
        let right: Vec<&Crossing> = crossings
            .iter()
            .filter(|c| c.segment == InvariantSegment::AlphaOne)
            .collect();
        assert!(!right.is_empty());
        assert!(right.iter().all(|c| c.kind == ContactKind::Tangential));
    }

    #[test]
    fn fig4c_contacts() {
        let p = builtin_path("fig4c").unwrap();
        let crossings = invariant_crossings(&p, 601).unwrap();
        let top: Vec<&Crossing> = crossings
            .iter()
            .filter(|c| c.segment == InvariantSegment::BetaOne)
            .collect();
        assert_eq!(top.len(), 2);
        for c in &top {
            assert_eq!(c.kind, ContactKind::Tangential);
            assert!(close(c.alpha, 0.4, 1e-6) || close(c.alpha, 0.6, 1e-6));
            assert!(!c.at_path_endpoint);
        }
        let diag: Vec<&Crossing> = crossings
            .iter()
            .filter(|c| c.segment == InvariantSegment::Diagonal)
            .collect();
        assert_eq!(diag.len(), 2);
        for c in &diag {
            assert!(c.at_path_endpoint);
        }
    }

    #[test]
    fn fig5_diagonal_crossings() {
        let long = builtin_path("fig5-long").unwrap();
        let diag: Vec<Crossing> = invariant_crossings(&long, 501)
            .unwrap()
            .into_iter()
            .filter(|c| c.segment == InvariantSegment::Diagonal)
            .collect();
        assert_eq!(diag.len(), 2);
        assert!(diag.iter().all(|c| c.kind == ContactKind::Transversal));

        let short = builtin_path("fig5-short").unwrap();
        let any: Vec<Crossing> = invariant_crossings(&short, 501).unwrap();
        assert!(any.is_empty(), "short path should touch nothing: {any:?}");
    }

    #[test]
    fn scalar_map_round_trips_through_json() {
        let maps = vec![
            ScalarMap::linear(1.0, -2.0),
            ScalarMap::Trig {
                offset: 0.5,
                amp: 0.5,
                freq: 2.0 * PI,
                phase: 0.0,
            },
            ScalarMap::SqrtPoly {
                outer: vec![0.5],
                coeff: -1.0,
                inner: vec![0.0, 1.0, -1.0],
            },
        ];
        let text = serde_json::to_string(&maps).unwrap();
        let back: Vec<ScalarMap> = serde_json::from_str(&text).unwrap();
        assert_eq!(maps, back);
    }
}
