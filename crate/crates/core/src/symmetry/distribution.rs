//! Distribution functions of fields on balls, measured along rays.
//!
//! Each ray from the center carries a Chebyshev interpolant of the field.
//! `|{u > t}|` is the angular integral of the exact superlevel intervals on
//! each ray, so it converges spectrally wherever level sets cross the rays
//! transversally. Nodal counting, by contrast, only converges like the node
//! spacing.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::spectral::bessel::bessel_j;
use crate::spectral::{Domain, Field, Mode, NodeLayout, Parity};

struct Ray {
    cheb: Vec<f64>,
    /// Sample radii including every interior critical point, so the ray is
    /// monotone between consecutive samples.
    radii: Vec<f64>,
    samples: Vec<f64>,
    critical: Vec<f64>,
}

pub(crate) struct RayDistribution {
    disk: bool,
    radius: f64,
    /// Angular weight of one ray.
    weight: f64,
    rays: Vec<Ray>,
    top: f64,
}

fn chebyshev_nodes(n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|k| 0.5 * radius * (1.0 + (PI * (k as f64 + 0.5) / n as f64).cos())).collect()
}

fn chebyshev_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|j| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                .sum();
            let c = 2.0 * s / n as f64;
            if j == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

fn chebyshev_derivative(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    if n < 2 {
        return alloc::vec![0.0];
    }
    let mut d = alloc::vec![0.0; n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}

impl RayDistribution {
    pub fn new(u: &Field) -> Result<Self> {
        let basis = u.basis();
        let domain = basis.domain();
        let coeffs = u.coefficients();
        let lmax = basis.eigenvalues().last().copied().unwrap_or(1.0);
        match (domain, basis.layout()) {
            (Domain::Disk { radius }, NodeLayout::Polar { ntheta, .. }) => {
                let nc = (lmax.sqrt() * radius).ceil() as usize + 40;
                let rc = chebyshev_nodes(nc, radius);
                // radial factors, then one angular sum per ray
                let mut radial = Vec::with_capacity(coeffs.len());
                for (n, mode) in basis.modes().iter().enumerate() {
                    if let Mode::Bessel { m, zero, parity, norm, .. } = *mode {
                        if coeffs[n] != 0.0 {
                            let row: Vec<f64> = rc.iter().map(|&r| norm * bessel_j(m, zero * r / radius)).collect();
                            radial.push((coeffs[n], m, parity, row));
                        }
                    }
                }
                let nrays = 4 * ntheta;
                let rays = (0..nrays)
                    .map(|k| {
                        let th = 2.0 * PI * k as f64 / nrays as f64;
                        let mut vals = alloc::vec![0.0; nc];
                        for (a, m, parity, row) in &radial {
                            let ang = match parity {
                                Parity::Radial => 1.0,
                                Parity::Sin => (*m as f64 * th).sin(),
                                Parity::Cos => (*m as f64 * th).cos(),
                            };
                            let s = a * ang;
                            vals.iter_mut().zip(row).for_each(|(v, r)| *v += s * r);
                        }
                        vals
                    })
                    .collect::<Vec<_>>();
                Ok(Self::assemble(true, radius, 2.0 * PI / nrays as f64, nc, rays))
            }
            (Domain::Interval { length }, _) => {
                let radius = 0.5 * length;
                let nc = (lmax.sqrt() * radius).ceil() as usize + 40;
                let rc = chebyshev_nodes(nc, radius);
                let rays = [1.0, -1.0]
                    .iter()
                    .map(|dir| rc.iter().map(|&r| u.eval([radius + dir * r, 0.0])).collect())
                    .collect::<Vec<_>>();
                Ok(Self::assemble(false, radius, 1.0, nc, rays))
            }
            _ => Err(Error::Unsupported("distribution functions need an interval or a disk")),
        }
    }

    fn assemble(disk: bool, radius: f64, weight: f64, nc: usize, values: Vec<Vec<f64>>) -> Self {
        let nf = 4 * nc;
        let fine: Vec<f64> = (0..=nf).map(|k| radius * k as f64 / nf as f64).collect();
        let x = |r: f64| 2.0 * r / radius - 1.0;
        let mut top = f64::NEG_INFINITY;
        let rays = values
            .into_iter()
            .map(|v| {
                let cheb = chebyshev_coefficients(&v);
                let d = chebyshev_derivative(&cheb);
                let mut radii = Vec::with_capacity(fine.len() + 8);
                let mut critical = Vec::new();
                radii.push(fine[0]);
                let mut prev = clenshaw(&d, x(fine[0]));
                for k in 1..fine.len() {
                    let cur = clenshaw(&d, x(fine[k]));
                    if (prev > 0.0) != (cur > 0.0) {
                        let (mut a, mut b) = (fine[k - 1], fine[k]);
                        let sa = prev > 0.0;
                        for _ in 0..60 {
                            let m = 0.5 * (a + b);
                            if (clenshaw(&d, x(m)) > 0.0) == sa {
                                a = m;
                            } else {
                                b = m;
                            }
                        }
                        let rc = 0.5 * (a + b);
                        if rc > fine[k - 1] && rc < fine[k] {
                            radii.push(rc);
                            if k > 1 {
                                critical.push(clenshaw(&cheb, x(rc)));
                            }
                        }
                    }
                    radii.push(fine[k]);
                    prev = cur;
                }
                let samples: Vec<f64> = radii.iter().map(|&r| clenshaw(&cheb, x(r))).collect();
                top = samples.iter().fold(top, |m, v| m.max(*v));
                Ray { cheb, radii, samples, critical }
            })
            .collect();
        RayDistribution { disk, radius, weight, rays, top }
    }

    fn ray_value(&self, ray: &Ray, r: f64) -> f64 {
        clenshaw(&ray.cheb, 2.0 * r / self.radius - 1.0)
    }

    /// Crossing of `g = t` inside `[a, b]`, given a sign change.
    fn crossing(&self, ray: &Ray, t: f64, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> f64 {
        let mut side = 0i8;
        for _ in 0..60 {
            let c = (a * fb - b * fa) / (fb - fa);
            let fc = self.ray_value(ray, c) - t;
            if fc == 0.0 || (b - a) < 1e-15 * self.radius {
                return c;
            }
            if (fc > 0.0) == (fa > 0.0) {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        0.5 * (a + b)
    }

    fn content(&self, r: f64) -> f64 {
        if self.disk {
            0.5 * r * r
        } else {
            r
        }
    }

    pub fn ball_measure(&self, rho: f64) -> f64 {
        if self.disk {
            PI * rho * rho
        } else {
            2.0 * rho
        }
    }

    /// `|{u > t}|`.
    pub fn measure_above(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for ray in &self.rays {
            let s = &ray.samples;
            let mut inside = s[0] > t;
            let mut start = 0.0;
            let mut acc = 0.0;
            for k in 1..s.len() {
                let now = s[k] > t;
                if now != inside {
                    let r = self.crossing(ray, t, ray.radii[k - 1], s[k - 1] - t, ray.radii[k], s[k] - t);
                    if inside {
                        acc += self.content(r) - self.content(start);
                    } else {
                        start = r;
                    }
                    inside = now;
                }
            }
            if inside {
                acc += self.content(self.radius) - self.content(start);
            }
            total += acc;
        }
        total * self.weight
    }

    /// Values of `u` at interior critical points along the rays.
    pub fn critical_levels(&self) -> Vec<f64> {
        self.rays.iter().flat_map(|r| r.critical.iter().copied()).collect()
    }

    /// `u*` on the sphere enclosing a ball of measure `m`.
    pub fn level_at_measure(&self, m: f64) -> f64 {
        if m <= 0.0 {
            return self.top;
        }
        let g = |t: f64| self.measure_above(t) - m;
        let (mut a, mut b) = (0.0f64, self.top);
        let (mut fa, mut fb) = (g(a), g(b));
        if fa <= 0.0 {
            return 0.0;
        }
        if fb >= 0.0 {
            return self.top;
        }
        let mut side = 0i8;
        for _ in 0..100 {
            let c = (a * fb - b * fa) / (fb - fa);
            let fc = g(c);
            if fc == 0.0 || (b - a) <= 1e-14 * self.top {
                return c;
            }
            if fc > 0.0 {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        0.5 * (a + b)
    }
}
