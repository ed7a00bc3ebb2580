//! Dirichlet eigenbases with matching quadrature.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use num_traits::Float;

use super::bessel::{bessel_j, bessel_j_derivative, bessel_j_pair, bessel_zeros_below};
use super::domain::{Domain, Point};
use super::quadrature::gauss_legendre_on;
use crate::error::{Error, Result};

/// Largest supported mode count.
pub const MAX_MODES: usize = 4096;

/// Angular factor of a disk mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Radial,
    Sin,
    Cos,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// `√(2/L) sin(nπx/L)`
    Sine { n: usize },
    /// Tensor product of sines.
    SineProduct { i: usize, j: usize },
    /// `c · J_m(j_{m,k} r/R) · {1, sin mθ, cos mθ}`
    Bessel { m: usize, k: usize, zero: f64, parity: Parity, norm: f64 },
}

/// How quadrature nodes are arranged.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeLayout {
    Line,
    /// `index = ix * ny + iy`
    Grid { nx: usize, ny: usize },
    /// Gauss–Legendre in `s = r²` times trapezoid in θ; `index = ring * ntheta + l`.
    Polar { nr: usize, ntheta: usize },
}

/// Quadrature on the boundary together with outward normals.
#[derive(Clone, Debug)]
pub struct BoundaryRule {
    pub points: Vec<Point>,
    pub normals: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// `(x − center)·ν` at each boundary point.
    pub support: Vec<f64>,
}

/// Eigenpairs of the Dirichlet Laplacian plus quadrature. Immutable once built.
#[derive(Debug)]
pub struct SpectralBasis {
    domain: Domain,
    modes: Vec<Mode>,
    eigenvalues: Vec<f64>,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    radii: Vec<f64>,
    synth: Vec<f64>,
    layout: NodeLayout,
    boundary: BoundaryRule,
    boundary_dn: Vec<f64>,
}

fn even(n: usize) -> usize {
    n + n % 2
}

/// Builds the first `m` Dirichlet modes of `domain` sorted by eigenvalue.
pub fn build_basis(domain: Domain, m: usize) -> Result<Arc<SpectralBasis>> {
    let domain = domain.validated()?;
    if m == 0 {
        return Err(Error::OutOfRange { name: "mode count", value: 0.0 });
    }
    if m > MAX_MODES {
        return Err(Error::Capacity { requested: m, cap: MAX_MODES });
    }
    let basis = match domain {
        Domain::Interval { length } => interval_basis(domain, length, m),
        Domain::Rectangle { lx, ly } => rectangle_basis(domain, lx, ly, m),
        Domain::Disk { radius } => disk_basis(domain, radius, m),
    };
    Ok(Arc::new(basis))
}

fn interval_basis(domain: Domain, length: f64, m: usize) -> SpectralBasis {
    let modes: Vec<Mode> = (1..=m).map(|n| Mode::Sine { n }).collect();
    let eigenvalues = (1..=m).map(|n| (n as f64 * PI / length).powi(2)).collect();
    let q = even(8 * m + 32);
    let (x, w) = gauss_legendre_on(q, 0.0, length);
    let nodes: Vec<Point> = x.iter().map(|&t| [t, 0.0]).collect();
    let boundary = BoundaryRule {
        points: vec![[0.0, 0.0], [length, 0.0]],
        normals: vec![[-1.0, 0.0], [1.0, 0.0]],
        weights: vec![1.0, 1.0],
        support: vec![0.5 * length, 0.5 * length],
    };
    finish(domain, modes, eigenvalues, nodes, w, NodeLayout::Line, boundary)
}

fn rectangle_basis(domain: Domain, lx: f64, ly: f64, m: usize) -> SpectralBasis {
    let lam = |i: usize, j: usize| (i as f64 * PI / lx).powi(2) + (j as f64 * PI / ly).powi(2);
    let bound = lam(1, m).min(lam(m, 1));
    let imax = ((bound.sqrt() * lx / PI).floor() as usize).max(1);
    let mut cand = Vec::new();
    for i in 1..=imax {
        for j in 1.. {
            let l = lam(i, j);
            if l > bound * (1.0 + 1e-12) {
                break;
            }
            cand.push((l, i, j));
        }
    }
    cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    cand.truncate(m);
    let modes: Vec<Mode> = cand.iter().map(|&(_, i, j)| Mode::SineProduct { i, j }).collect();
    let eigenvalues = cand.iter().map(|c| c.0).collect();
    let mi = cand.iter().map(|c| c.1).max().unwrap_or(1);
    let mj = cand.iter().map(|c| c.2).max().unwrap_or(1);
    let nx = even(6 * mi + 24);
    let ny = even(6 * mj + 24);
    let (x, wx) = gauss_legendre_on(nx, 0.0, lx);
    let (y, wy) = gauss_legendre_on(ny, 0.0, ly);
    let mut nodes = Vec::with_capacity(nx * ny);
    let mut weights = Vec::with_capacity(nx * ny);
    for (xi, wxi) in x.iter().zip(&wx) {
        for (yj, wyj) in y.iter().zip(&wy) {
            nodes.push([*xi, *yj]);
            weights.push(wxi * wyj);
        }
    }
    let mut boundary = BoundaryRule {
        points: Vec::new(),
        normals: Vec::new(),
        weights: Vec::new(),
        support: Vec::new(),
    };
    for (yv, nv) in [(0.0, -1.0), (ly, 1.0)] {
        for (xi, wxi) in x.iter().zip(&wx) {
            boundary.points.push([*xi, yv]);
            boundary.normals.push([0.0, nv]);
            boundary.weights.push(*wxi);
            boundary.support.push(0.5 * ly);
        }
    }
    for (xv, nv) in [(0.0, -1.0), (lx, 1.0)] {
        for (yj, wyj) in y.iter().zip(&wy) {
            boundary.points.push([xv, *yj]);
            boundary.normals.push([nv, 0.0]);
            boundary.weights.push(*wyj);
            boundary.support.push(0.5 * lx);
        }
    }
    finish(domain, modes, eigenvalues, nodes, weights, NodeLayout::Grid { nx, ny }, boundary)
}

fn disk_basis(domain: Domain, radius: f64, m: usize) -> SpectralBasis {
    // Weyl: about j²/4 modes lie below j on the unit disk.
    let mut limit = 2.4 * (m as f64).sqrt() + 6.0;
    let mut cand: Vec<(f64, usize, usize, Parity, f64)> = loop {
        let mut cand = Vec::new();
        let mut count = 0usize;
        for ang in 0.. {
            if ang as f64 > limit {
                break;
            }
            let zeros = bessel_zeros_below(ang, limit);
            if zeros.is_empty() {
                break;
            }
            for (k, z) in zeros.into_iter().enumerate() {
                if ang == 0 {
                    cand.push((z, 0, k + 1, Parity::Radial, 0.0));
                    count += 1;
                } else {
                    cand.push((z, ang, k + 1, Parity::Sin, 0.0));
                    cand.push((z, ang, k + 1, Parity::Cos, 0.0));
                    count += 2;
                }
            }
        }
        if count >= m {
            break cand;
        }
        limit *= 1.3;
    };
    let rank = |p: Parity| if p == Parity::Cos { 1 } else { 0 };
    cand.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(rank(a.3).cmp(&rank(b.3)))
    });
    cand.truncate(m);
    for c in &mut cand {
        let j1 = bessel_j_pair(c.1, c.0).1;
        let ang_measure = if c.1 == 0 { 2.0 * PI } else { PI };
        c.4 = 1.0 / (ang_measure * 0.5 * radius * radius * j1 * j1).sqrt();
    }
    let modes: Vec<Mode> = cand
        .iter()
        .map(|&(zero, m, k, parity, norm)| Mode::Bessel { m, k, zero, parity, norm })
        .collect();
    let eigenvalues = cand.iter().map(|c| (c.0 / radius).powi(2)).collect();
    let mmax = cand.iter().map(|c| c.1).max().unwrap_or(0);
    let kmax = cand.iter().map(|c| c.2).max().unwrap_or(1);
    let nr = even(4 * kmax + mmax + 24);
    let ntheta = (((6 * mmax + 12) as f64 / 32.0).ceil() as usize).max(1) * 32;
    let (s, ws) = gauss_legendre_on(nr, 0.0, radius * radius);
    let dtheta = 2.0 * PI / ntheta as f64;
    let mut nodes = Vec::with_capacity(nr * ntheta);
    let mut weights = Vec::with_capacity(nr * ntheta);
    for (si, wi) in s.iter().zip(&ws) {
        let r = si.sqrt();
        for l in 0..ntheta {
            let th = l as f64 * dtheta;
            nodes.push([r * th.cos(), r * th.sin()]);
            weights.push(0.5 * wi * dtheta);
        }
    }
    let boundary = BoundaryRule {
        points: (0..ntheta)
            .map(|l| {
                let th = l as f64 * dtheta;
                [radius * th.cos(), radius * th.sin()]
            })
            .collect(),
        normals: (0..ntheta)
            .map(|l| {
                let th = l as f64 * dtheta;
                [th.cos(), th.sin()]
            })
            .collect(),
        weights: vec![radius * dtheta; ntheta],
        support: vec![radius; ntheta],
    };
    finish(domain, modes, eigenvalues, nodes, weights, NodeLayout::Polar { nr, ntheta }, boundary)
}

fn finish(
    domain: Domain,
    modes: Vec<Mode>,
    eigenvalues: Vec<f64>,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    layout: NodeLayout,
    boundary: BoundaryRule,
) -> SpectralBasis {
    let q = nodes.len();
    let radii: Vec<f64> = nodes.iter().map(|&x| domain.radius_of(x)).collect();
    let mut synth = vec![0.0; modes.len() * q];
    match (&layout, domain) {
        (NodeLayout::Polar { nr, ntheta }, Domain::Disk { radius }) => {
            let dtheta = 2.0 * PI / *ntheta as f64;
            for (n, mode) in modes.iter().enumerate() {
                if let Mode::Bessel { m, zero, parity, norm, .. } = *mode {
                    let row = &mut synth[n * q..(n + 1) * q];
                    for ring in 0..*nr {
                        let r = radii[ring * ntheta];
                        let radial = norm * bessel_j(m, zero * r / radius);
                        for l in 0..*ntheta {
                            let th = l as f64 * dtheta;
                            row[ring * ntheta + l] = radial * angular(m, parity, th);
                        }
                    }
                }
            }
        }
        _ => {
            for (n, mode) in modes.iter().enumerate() {
                for (j, &x) in nodes.iter().enumerate() {
                    synth[n * q + j] = eval_mode_raw(domain, mode, x);
                }
            }
        }
    }
    let nb = boundary.points.len();
    let mut boundary_dn = vec![0.0; modes.len() * nb];
    for (n, mode) in modes.iter().enumerate() {
        for b in 0..nb {
            boundary_dn[n * nb + b] =
                normal_derivative_raw(domain, mode, boundary.points[b], boundary.normals[b]);
        }
    }
    SpectralBasis {
        domain,
        modes,
        eigenvalues,
        nodes,
        weights,
        radii,
        synth,
        layout,
        boundary,
        boundary_dn,
    }
}

fn angular(m: usize, parity: Parity, theta: f64) -> f64 {
    match parity {
        Parity::Radial => 1.0,
        Parity::Sin => (m as f64 * theta).sin(),
        Parity::Cos => (m as f64 * theta).cos(),
    }
}

fn eval_mode_raw(domain: Domain, mode: &Mode, x: Point) -> f64 {
    if !domain.contains(x) {
        return 0.0;
    }
    match (*mode, domain) {
        (Mode::Sine { n }, Domain::Interval { length }) => {
            (2.0 / length).sqrt() * (n as f64 * PI * x[0] / length).sin()
        }
        (Mode::SineProduct { i, j }, Domain::Rectangle { lx, ly }) => {
            (4.0 / (lx * ly)).sqrt()
                * (i as f64 * PI * x[0] / lx).sin()
                * (j as f64 * PI * x[1] / ly).sin()
        }
        (Mode::Bessel { m, zero, parity, norm, .. }, Domain::Disk { radius }) => {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let th = x[1].atan2(x[0]);
            norm * bessel_j(m, zero * r / radius) * angular(m, parity, th)
        }
        _ => 0.0,
    }
}

fn normal_derivative_raw(domain: Domain, mode: &Mode, x: Point, nu: [f64; 2]) -> f64 {
    match (*mode, domain) {
        (Mode::Sine { n }, Domain::Interval { length }) => {
            let k = n as f64 * PI / length;
            (2.0 / length).sqrt() * k * (k * x[0]).cos() * nu[0]
        }
        (Mode::SineProduct { i, j }, Domain::Rectangle { lx, ly }) => {
            let c = (4.0 / (lx * ly)).sqrt();
            let kx = i as f64 * PI / lx;
            let ky = j as f64 * PI / ly;
            let dx = c * kx * (kx * x[0]).cos() * (ky * x[1]).sin();
            let dy = c * (kx * x[0]).sin() * ky * (ky * x[1]).cos();
            dx * nu[0] + dy * nu[1]
        }
        (Mode::Bessel { m, zero, parity, norm, .. }, Domain::Disk { radius }) => {
            let th = x[1].atan2(x[0]);
            norm * zero / radius * bessel_j_derivative(m, zero) * angular(m, parity, th)
        }
        _ => 0.0,
    }
}

impl SpectralBasis {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Distance of each node from the domain center.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    pub fn boundary(&self) -> &BoundaryRule {
        &self.boundary
    }

    /// Nodal values of mode `n` (0-based).
    pub fn mode_row(&self, n: usize) -> &[f64] {
        let q = self.nodes.len();
        &self.synth[n * q..(n + 1) * q]
    }

    /// Evaluates mode `n` at an arbitrary point; zero outside the domain.
    pub fn eval_mode(&self, n: usize, x: Point) -> f64 {
        eval_mode_raw(self.domain, &self.modes[n], x)
    }

    /// Radial (interval: even about the center) modes.
    pub fn is_radial_mode(&self, n: usize) -> bool {
        match self.modes[n] {
            Mode::Sine { n } => n % 2 == 1,
            Mode::SineProduct { .. } => false,
            Mode::Bessel { parity, .. } => parity == Parity::Radial,
        }
    }

    /// True when the last mode is a `sin` whose `cos` partner was cut off.
    pub fn splits_rotation_pair(&self) -> bool {
        matches!(self.modes.last(), Some(Mode::Bessel { parity: Parity::Sin, .. }))
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let q = self.nodes.len();
        let mut out = vec![0.0; q];
        for (n, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let row = &self.synth[n * q..(n + 1) * q];
            for (o, r) in out.iter_mut().zip(row) {
                *o += a * r;
            }
        }
        out
    }

    /// Quadrature projection `a_n = Σ_j w_j φ_n(x_j) f_j`.
    pub fn project(&self, nodal: &[f64]) -> Vec<f64> {
        let q = self.nodes.len();
        let wf: Vec<f64> = nodal.iter().zip(&self.weights).map(|(f, w)| f * w).collect();
        (0..self.modes.len())
            .map(|n| {
                let row = &self.synth[n * q..(n + 1) * q];
                row.iter().zip(&wf).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn integrate(&self, nodal: &[f64]) -> f64 {
        nodal.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    /// `∂_ν u` at the boundary rule points for coefficients `coeffs`.
    pub fn normal_derivative(&self, coeffs: &[f64]) -> Vec<f64> {
        let nb = self.boundary.points.len();
        let mut out = vec![0.0; nb];
        for (n, &a) in coeffs.iter().enumerate() {
            for (o, d) in out.iter_mut().zip(&self.boundary_dn[n * nb..(n + 1) * nb]) {
                *o += a * d;
            }
        }
        out
    }
}
