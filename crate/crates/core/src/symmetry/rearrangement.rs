//! Schwarz rearrangement on balls and the Talenti comparison.
//!
//! The rearrangement is built from the exact distribution of the quadrature
//! measure: nodal values sorted in decreasing order, each carrying its weight.
//! On a ball the resulting step profile in the measure variable is exactly
//! equimeasurable with the input, and because Gauss nodes interlace their
//! cumulative weights, a radially decreasing input is reproduced node for node.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::spectral::quadrature::LegendreSeries;
use crate::spectral::{apply_inverse_laplacian, Domain, Field, NodeLayout, Point, SpectralBasis};

use super::distribution::RayDistribution;
use super::polarization::PointFunction;

const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Decreasing rearrangement `w*` of nodal data on a ball.
#[derive(Clone, Debug)]
pub struct Rearrangement {
    basis: Arc<SpectralBasis>,
    values: Vec<f64>,
    weights: Vec<f64>,
    /// Measure of the ball carrying the first `k + 1` values.
    cumulative: Vec<f64>,
}

fn ball_measure(domain: Domain, rho: f64) -> f64 {
    match domain {
        Domain::Disk { .. } => PI * rho * rho,
        _ => 2.0 * rho,
    }
}

impl Rearrangement {
    pub(crate) fn from_nodal(basis: &Arc<SpectralBasis>, nodal: &[f64]) -> Result<Self> {
        if !basis.domain().is_ball() {
            return Err(Error::Unsupported("rearrangement needs an interval or a disk"));
        }
        if nodal.len() != basis.node_count() {
            return Err(Error::LengthMismatch { expected: basis.node_count(), found: nodal.len() });
        }
        let min = nodal.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        if min < -NEGATIVE_TOLERANCE {
            return Err(Error::NegativeInput { min });
        }
        let mut pairs: Vec<(f64, f64)> =
            nodal.iter().map(|x| x.max(0.0)).zip(basis.weights().iter().copied()).collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        let mut cumulative = Vec::with_capacity(pairs.len());
        let mut acc = 0.0;
        for (_, w) in &pairs {
            acc += w;
            cumulative.push(acc);
        }
        let (values, weights) = pairs.into_iter().unzip();
        Ok(Rearrangement { basis: basis.clone(), values, weights, cumulative })
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    /// Value on the sphere enclosing a ball of measure `m`. Each sorted value
    /// sits at the midpoint of its measure interval; in between the profile is
    /// linear.
    pub fn profile(&self, m: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        let mid = |k: usize| self.cumulative[k] - 0.5 * self.weights[k];
        let k = self.cumulative.partition_point(|&c| c < m).min(n - 1);
        let (lo, hi) = if m < mid(k) { (k.saturating_sub(1), k) } else { (k, (k + 1).min(n - 1)) };
        let (ml, mh) = (mid(lo), mid(hi));
        if lo == hi || mh <= ml {
            return self.values[k];
        }
        let t = ((m - ml) / (mh - ml)).clamp(0.0, 1.0);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }

    /// `w*(x)`.
    pub fn eval(&self, x: Point) -> f64 {
        let domain = self.basis.domain();
        if !domain.contains(x) {
            return 0.0;
        }
        self.profile(ball_measure(domain, domain.radius_of(x)))
    }

    pub fn nodal(&self) -> Vec<f64> {
        let domain = self.basis.domain();
        self.basis.radii().iter().map(|&r| self.profile(ball_measure(domain, r))).collect()
    }

    /// `∫ |w*|^r`, exact for the step profile.
    pub fn power_integral(&self, r: f64) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| w * v.abs().powf(r)).sum()
    }

    pub fn lr_norm(&self, r: f64) -> f64 {
        self.power_integral(r).powf(1.0 / r)
    }

    /// `|{w* > t}|`.
    pub fn superlevel_measure(&self, t: f64) -> f64 {
        self.values.iter().zip(&self.weights).filter(|(v, _)| **v > t).map(|(_, w)| w).sum()
    }

    /// Quadrature projection of the nodal profile onto the basis.
    pub fn to_field(&self) -> Result<Field> {
        Field::from_nodal(&self.basis, &self.nodal())
    }
}

impl PointFunction for Rearrangement {
    fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    fn value(&self, x: Point) -> f64 {
        self.eval(x)
    }
}

/// Schwarz symmetrization `w*` of a nonnegative field on an interval or disk.
pub fn schwarz_rearrange(w: &Field) -> Result<Rearrangement> {
    Rearrangement::from_nodal(w.basis(), w.nodal())
}

/// Outcome of comparing `(K f)*` with `K(f*)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TalentiReport {
    /// `max (u* − w)⁺ / ‖w‖∞` over the nodes.
    pub max_excess: f64,
    /// `max |u* − w| / ‖w‖∞` over the nodes.
    pub max_gap: f64,
    /// `‖f − f*‖∞ / ‖f‖∞`.
    pub source_asymmetry: f64,
    /// `u* ≤ w` up to the pointwise slack.
    pub ordering_holds: bool,
    /// `u* = w` up to the pointwise slack.
    pub equality: bool,
    /// `f = f*` up to the pointwise slack.
    pub source_symmetric: bool,
}

impl TalentiReport {
    /// Ordering holds and equality occurs exactly when the source is symmetric.
    pub fn passes(&self) -> bool {
        self.ordering_holds && self.equality == self.source_symmetric
    }
}

/// Pointwise slack of the comparison, relative to `‖w‖∞`.
pub const TALENTI_SLACK: f64 = 1e-8;

/// Radii at which radial profiles are sampled: one per ring on a disk, one
/// per node on an interval.
fn sample_radii(basis: &SpectralBasis) -> Vec<f64> {
    match *basis.layout() {
        NodeLayout::Polar { nr, ntheta } => (0..nr).map(|i| basis.radii()[i * ntheta]).collect(),
        _ => basis.radii().to_vec(),
    }
}

fn expand(basis: &SpectralBasis, samples: &[f64]) -> Vec<f64> {
    match *basis.layout() {
        NodeLayout::Polar { ntheta, .. } => (0..basis.node_count()).map(|j| samples[j / ntheta]).collect(),
        _ => samples.to_vec(),
    }
}

/// Radial solution of `−Δw = g` on a disk, `w = 0` on the boundary, from `g`
/// at the ring radii. Returned at the ring radii.
fn disk_dirichlet_solve(basis: &SpectralBasis, g: &[f64]) -> Vec<f64> {
    match basis.domain() {
        Domain::Disk { radius } => {
            // s = r²: w(s) = ¼ ∫_s^{R²} F(σ)/σ dσ with F(s) = ∫_0^s g
            let r2 = radius * radius;
            let s: Vec<f64> = sample_radii(basis).iter().map(|r| r * r).collect();
            let big_f = LegendreSeries::from_gauss_values(0.0, r2, g).antiderivative();
            let ratio: Vec<f64> = s.iter().map(|&si| big_f.eval(si) / si).collect();
            let a = LegendreSeries::from_gauss_values(0.0, r2, &ratio).antiderivative();
            let top = a.eval(r2);
            s.iter().map(|&si| 0.25 * (top - a.eval(si))).collect()
        }
        _ => alloc::vec![0.0; g.len()],
    }
}

const PIECE_NODES: usize = 16;
const PIECE_DEPTH: usize = 24;

/// Piecewise Legendre profile on `[0, R]`, refined until each piece is
/// resolved, with its first and second antiderivatives. Used for `−w'' = g`,
/// `w'(0) = 0`, `w(R) = 0`.
struct Piecewise {
    radius: f64,
    pieces: Vec<(f64, f64, LegendreSeries, LegendreSeries)>,
    /// `G(a_k)` and `∫_0^{a_k} G` at the left end of each piece.
    starts: Vec<(f64, f64)>,
}

impl Piecewise {
    /// `breaks` are known points of reduced smoothness inside `(0, R)`.
    fn adaptive(g: impl Fn(f64) -> f64, radius: f64, breaks: &[f64]) -> Self {
        let scale = g(0.0).abs().max(g(radius).abs()).max(f64::MIN_POSITIVE);
        let mut ends: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && *b < radius).collect();
        ends.push(0.0);
        ends.push(radius);
        ends.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        ends.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * radius);
        let mut stack: Vec<(f64, f64, usize)> = ends.windows(2).map(|w| (w[0], w[1], 0)).collect();
        let mut done = Vec::new();
        while let Some((a, b, depth)) = stack.pop() {
            let (x, _) = crate::spectral::quadrature::gauss_legendre_on(PIECE_NODES, a, b);
            let vals: Vec<f64> = x.iter().map(|&t| g(t)).collect();
            let series = LegendreSeries::from_gauss_values(a, b, &vals);
            let c = series.coefficients();
            let tail = c[PIECE_NODES - 1].abs() + c[PIECE_NODES - 2].abs();
            if tail <= 1e-10 * scale || depth >= PIECE_DEPTH {
                done.push((a, b, series));
            } else {
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            }
        }
        done.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(Ordering::Equal));
        let mut pieces = Vec::with_capacity(done.len());
        let mut starts = Vec::with_capacity(done.len());
        let (mut big_g, mut big_h) = (0.0, 0.0);
        for (a, b, s) in done {
            let first = s.antiderivative();
            let second = first.antiderivative();
            starts.push((big_g, big_h));
            big_h += big_g * (b - a) + second.eval(b);
            big_g += first.eval(b);
            pieces.push((a, b, first, second));
        }
        Piecewise { radius, pieces, starts }
    }

    /// `(G(r), ∫_0^r G)` with `G(r) = ∫_0^r g`.
    fn integrals(&self, r: f64) -> (f64, f64) {
        let k = self.pieces.partition_point(|p| p.1 < r).min(self.pieces.len() - 1);
        let (a, _, first, second) = &self.pieces[k];
        let (g0, h0) = self.starts[k];
        (g0 + first.eval(r), h0 + g0 * (r - a) + second.eval(r))
    }

    fn dirichlet(&self, rho: f64) -> f64 {
        self.integrals(self.radius).1 - self.integrals(rho).1
    }
}

/// Compares `u = K f` with `w = K(f*)` after rearranging `u`.
///
/// Both rearrangements come from distribution functions measured along rays,
/// so the comparison is not limited by the node spacing.
pub fn talenti_check(f: &Field) -> Result<TalentiReport> {
    let basis = f.basis();
    if !basis.domain().is_ball() {
        return Err(Error::Unsupported("the comparison needs an interval or a disk"));
    }
    let min = f.nodal().iter().fold(f64::INFINITY, |m, x| m.min(*x));
    if min < -NEGATIVE_TOLERANCE {
        return Err(Error::NegativeInput { min });
    }
    if f.is_zero() {
        return Err(Error::ZeroField);
    }
    let radii = sample_radii(basis);
    let df = RayDistribution::new(f)?;
    let fstar: Vec<f64> = radii.iter().map(|&r| df.level_at_measure(df.ball_measure(r))).collect();
    let w = match basis.domain() {
        Domain::Interval { length } => {
            let breaks: Vec<f64> = df.critical_levels().iter().map(|&t| 0.5 * df.measure_above(t)).collect();
            let profile = Piecewise::adaptive(|r| df.level_at_measure(2.0 * r), 0.5 * length, &breaks);
            radii.iter().map(|&r| profile.dirichlet(r)).collect()
        }
        _ => disk_dirichlet_solve(basis, &fstar),
    };
    let u = apply_inverse_laplacian(f);
    let du = RayDistribution::new(&u)?;
    let ustar: Vec<f64> = radii.iter().map(|&r| du.level_at_measure(du.ball_measure(r))).collect();
    let wmax = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut excess = 0.0f64;
    let mut gap = 0.0f64;
    for (a, b) in ustar.iter().zip(&w) {
        excess = excess.max(a - b);
        gap = gap.max((a - b).abs());
    }
    let fmax = f.nodal().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let asym = f
        .nodal()
        .iter()
        .zip(expand(basis, &fstar))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / fmax;
    let max_excess = excess.max(0.0) / wmax;
    let max_gap = gap / wmax;
    Ok(TalentiReport {
        max_excess,
        max_gap,
        source_asymmetry: asym,
        ordering_holds: max_excess <= TALENTI_SLACK,
        equality: max_gap < TALENTI_SLACK,
        source_symmetric: asym < TALENTI_SLACK,
    })
}
