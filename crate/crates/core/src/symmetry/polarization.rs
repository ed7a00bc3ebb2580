//! Halfspaces, reflections and polarization.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::spectral::{Field, NodeLayout, Point, SpectralBasis};

/// `H = {x : (x − c)·ν ≥ offset}` where `c` is the domain center.
///
/// `offset = 0` puts the boundary through the center; `offset < 0` keeps the
/// center in the interior of `H`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HalfSpace {
    normal: [f64; 2],
    offset: f64,
}

impl HalfSpace {
    pub fn new(normal: [f64; 2], offset: f64) -> Result<Self> {
        let n = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::OutOfRange { name: "halfspace normal length", value: n });
        }
        if !offset.is_finite() {
            return Err(Error::OutOfRange { name: "halfspace offset", value: offset });
        }
        Ok(HalfSpace { normal: [normal[0] / n, normal[1] / n], offset })
    }

    /// Normal `(cos φ, sin φ)`.
    pub fn at_angle(angle: f64, offset: f64) -> Self {
        HalfSpace { normal: [angle.cos(), angle.sin()], offset }
    }

    pub fn normal(&self) -> [f64; 2] {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn height(&self, center: Point, x: Point) -> f64 {
        (x[0] - center[0]) * self.normal[0] + (x[1] - center[1]) * self.normal[1] - self.offset
    }

    pub fn contains(&self, center: Point, x: Point) -> bool {
        self.height(center, x) >= 0.0
    }

    /// `σ_H x`.
    pub fn reflect(&self, center: Point, x: Point) -> Point {
        let h = 2.0 * self.height(center, x);
        [x[0] - h * self.normal[0], x[1] - h * self.normal[1]]
    }
}

/// Sampled halfspace family: `normals` equally spaced directions times
/// `offsets` boundary positions `−kR/10`, `k = 0, …, offsets − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HalfSpaceFamily {
    pub normals: usize,
    pub offsets: usize,
}

impl Default for HalfSpaceFamily {
    fn default() -> Self {
        HalfSpaceFamily { normals: 64, offsets: 9 }
    }
}

impl HalfSpaceFamily {
    /// Members for a domain with center-to-boundary distance `radius`.
    /// Every member keeps the center in `H`.
    pub fn members(&self, dimension: usize, radius: f64) -> Vec<HalfSpace> {
        let angles: Vec<f64> = if dimension == 1 {
            alloc::vec![0.0, PI]
        } else {
            (0..self.normals).map(|k| 2.0 * PI * k as f64 / self.normals as f64).collect()
        };
        let mut out = Vec::with_capacity(angles.len() * self.offsets);
        for k in 0..self.offsets {
            let offset = -radius * k as f64 / 10.0;
            for &a in &angles {
                out.push(HalfSpace::at_angle(a, offset));
            }
        }
        out
    }
}

/// A function that can be sampled anywhere and at the nodes of a basis.
pub trait PointFunction {
    fn basis(&self) -> &Arc<SpectralBasis>;

    fn value(&self, x: Point) -> f64;

    fn node_value(&self, j: usize) -> f64 {
        self.value(self.basis().nodes()[j])
    }

    fn nodal_values(&self) -> Vec<f64> {
        (0..self.basis().node_count()).map(|j| self.node_value(j)).collect()
    }
}

impl PointFunction for Field {
    fn basis(&self) -> &Arc<SpectralBasis> {
        Field::basis(self)
    }

    fn value(&self, x: Point) -> f64 {
        self.eval(x)
    }

    fn node_value(&self, j: usize) -> f64 {
        self.nodal()[j]
    }
}

impl<F: PointFunction + ?Sized> PointFunction for &F {
    fn basis(&self) -> &Arc<SpectralBasis> {
        (**self).basis()
    }

    fn value(&self, x: Point) -> f64 {
        (**self).value(x)
    }

    fn node_value(&self, j: usize) -> f64 {
        (**self).node_value(j)
    }
}

/// Node index of `σ_H x_j` when the reflection maps the node set to itself.
pub(crate) fn reflected_node(basis: &SpectralBasis, h: &HalfSpace, j: usize) -> Option<usize> {
    if h.offset != 0.0 {
        return None;
    }
    match *basis.layout() {
        NodeLayout::Line => Some(basis.node_count() - 1 - j),
        NodeLayout::Polar { ntheta, .. } => {
            // θ ↦ 2φ + π − θ for the normal angle φ
            let phi = h.normal[1].atan2(h.normal[0]);
            let shift = (2.0 * phi + PI) * ntheta as f64 / (2.0 * PI);
            let k = shift.round();
            if (shift - k).abs() > 1e-9 {
                return None;
            }
            let nt = ntheta as i64;
            let ring = j / ntheta;
            let l = (j % ntheta) as i64;
            let lr = (k as i64 - l).rem_euclid(nt) as usize;
            Some(ring * ntheta + lr)
        }
        NodeLayout::Grid { .. } => None,
    }
}

/// `w_H`, evaluated lazily: `max(w, w∘σ_H)` on `H`, `min(w, w∘σ_H)` off it.
#[derive(Clone, Debug)]
pub struct Polarized<F> {
    inner: F,
    h: HalfSpace,
    center: Point,
}

/// `w ∘ σ_H`, evaluated lazily.
#[derive(Clone, Debug)]
pub struct Reflected<F> {
    inner: F,
    h: HalfSpace,
    center: Point,
}

pub fn polarize<F: PointFunction>(w: F, h: HalfSpace) -> Polarized<F> {
    let center = w.basis().domain().center();
    Polarized { inner: w, h, center }
}

pub fn reflect<F: PointFunction>(w: F, h: HalfSpace) -> Reflected<F> {
    let center = w.basis().domain().center();
    Reflected { inner: w, h, center }
}

impl<F> Polarized<F> {
    pub fn halfspace(&self) -> HalfSpace {
        self.h
    }

    pub fn into_inner(self) -> F {
        self.inner
    }

    fn select(&self, x: Point, own: f64, mirrored: f64) -> f64 {
        if self.h.contains(self.center, x) {
            own.max(mirrored)
        } else {
            own.min(mirrored)
        }
    }
}

impl<F: PointFunction> PointFunction for Polarized<F> {
    fn basis(&self) -> &Arc<SpectralBasis> {
        self.inner.basis()
    }

    fn value(&self, x: Point) -> f64 {
        let own = self.inner.value(x);
        let mirrored = self.inner.value(self.h.reflect(self.center, x));
        self.select(x, own, mirrored)
    }

    fn node_value(&self, j: usize) -> f64 {
        let basis = self.inner.basis();
        let x = basis.nodes()[j];
        let own = self.inner.node_value(j);
        let mirrored = match reflected_node(basis, &self.h, j) {
            Some(k) => self.inner.node_value(k),
            None => self.inner.value(self.h.reflect(self.center, x)),
        };
        self.select(x, own, mirrored)
    }
}

impl<F: PointFunction> PointFunction for Reflected<F> {
    fn basis(&self) -> &Arc<SpectralBasis> {
        self.inner.basis()
    }

    fn value(&self, x: Point) -> f64 {
        self.inner.value(self.h.reflect(self.center, x))
    }

    fn node_value(&self, j: usize) -> f64 {
        let basis = self.inner.basis();
        match reflected_node(basis, &self.h, j) {
            Some(k) => self.inner.node_value(k),
            None => self.inner.value(self.h.reflect(self.center, basis.nodes()[j])),
        }
    }
}

/// Sup distance between the decreasing rearrangements of two nodal data sets
/// under the quadrature measure, relative to the larger sup norm.
pub fn distribution_gap(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let sorted = |x: &[f64]| {
        let mut s: Vec<(f64, f64)> = x.iter().copied().zip(weights.iter().copied()).collect();
        s.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap_or(Ordering::Equal));
        s
    };
    let sa = sorted(a);
    let sb = sorted(b);
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let (mut i, mut k) = (0, 0);
    let (mut ma, mut mb) = (0.0, 0.0);
    let mut gap = 0.0f64;
    while i < sa.len() && k < sb.len() {
        gap = gap.max((sa[i].0 - sb[k].0).abs());
        let ea = ma + sa[i].1;
        let eb = mb + sb[k].1;
        let tie = 1e-14 * ea.max(eb);
        if (ea - eb).abs() <= tie {
            ma = ea;
            mb = eb;
            i += 1;
            k += 1;
        } else if ea < eb {
            ma = ea;
            i += 1;
        } else {
            mb = eb;
            k += 1;
        }
    }
    gap / scale
}

/// `‖a − b‖₂ / ‖b‖₂` under the basis quadrature.
pub(crate) fn relative_l2(basis: &SpectralBasis, a: &[f64], b: &[f64]) -> f64 {
    let w = basis.weights();
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..w.len() {
        num += w[j] * (a[j] - b[j]) * (a[j] - b[j]);
        den += w[j] * b[j] * b[j];
    }
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (num / den).sqrt()
}
