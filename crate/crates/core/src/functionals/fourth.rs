//! Fourth-order functional obtained by eliminating `v`.

use alloc::vec::Vec;

use num_traits::Float;

use super::{radial_weight, source_f};
use crate::problem::ExponentPair;
use crate::spectral::Field;

/// `J(u) = (q/(q+1))∫|Δu|^{(q+1)/q}|x|^{−β/q} − (1/(p+1))∫|u|^{p+1}|x|^α`, `Δu` spectral.
pub fn energy_fourth_order(u: &Field, e: &ExponentPair) -> f64 {
    let basis = u.basis();
    let lap = u.map_spectrum(|l| l);
    let s = (e.q + 1.0) / e.q;
    let w = basis.weights();
    let r = basis.radii();
    let mut total = 0.0;
    for j in 0..w.len() {
        let mut a = e.q / (e.q + 1.0) * lap.nodal()[j].abs().powf(s);
        if e.beta != 0.0 {
            a *= r[j].powf(-e.beta / e.q);
        }
        let mut b = u.nodal()[j].abs().powf(e.p + 1.0) / (e.p + 1.0);
        if e.alpha != 0.0 {
            b *= r[j].powf(e.alpha);
        }
        total += w[j] * (a - b);
    }
    total
}

/// Coefficient gradient `−λ_n P(|x|^{−β/q}|Δu|^{1/q−1}Δu)_n − P(|x|^α f(u))_n`.
pub fn gradient_fourth_order(u: &Field, e: &ExponentPair) -> Field {
    let basis = u.basis();
    // −Δu as a field; |Δu|^{1/q−1}Δu = −g⁻¹(−Δu)
    let neg_lap = u.map_spectrum(|l| l);
    let ginv = e.power(crate::problem::Side::G);
    let r = basis.radii();
    let inner: Vec<f64> = (0..basis.node_count())
        .map(|j| {
            let mut x = -ginv.inverse(neg_lap.nodal()[j]);
            if e.beta != 0.0 {
                x *= r[j].powf(-e.beta / e.q);
            }
            x
        })
        .collect();
    let pi = basis.project(&inner);
    let pf = basis.project(&source_f(e, &radial_weight(basis, e.alpha), u.nodal()));
    let grad: Vec<f64> = (0..basis.mode_count())
        .map(|n| -basis.eigenvalues()[n] * pi[n] - pf[n])
        .collect();
    Field::from_coefficients(basis, grad).expect("sizes match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_basis, weighted_power_integral, Domain};
    use core::f64::consts::PI;

    #[test]
    fn examples() {
        let b = build_basis(Domain::interval(PI).unwrap(), 16).unwrap();
        let e = ExponentPair::lane_emden(3.0, 3.0, 1).unwrap();
        assert_eq!(energy_fourth_order(&Field::zero(&b), &e), 0.0);
        let p1 = Field::mode(&b, 0).unwrap();
        let l43 = weighted_power_integral(&b, p1.nodal(), 4.0 / 3.0, 0.0).unwrap();
        let want = 0.75 * l43 - 0.25 * 3.0 / (2.0 * PI);
        assert!((energy_fourth_order(&p1, &e) - want).abs() < 1e-13);
    }

    #[test]
    fn ray_has_single_critical_point() {
        let b = build_basis(Domain::interval(PI).unwrap(), 16).unwrap();
        let e = ExponentPair::lane_emden(2.0, 3.0, 1).unwrap();
        let u = Field::mode(&b, 0).unwrap().combine(1.0, &Field::mode(&b, 2).unwrap(), 0.2).unwrap();
        let d = |t: f64| {
            let h = 1e-6 * t;
            (energy_fourth_order(&u.scaled(t + h), &e) - energy_fourth_order(&u.scaled(t - h), &e)) / (2.0 * h)
        };
        let mut changes = 0;
        let mut prev = d(1e-3);
        let mut t = 1e-3;
        while t < 1e3 {
            t *= 1.1;
            let cur = d(t);
            if (cur > 0.0) != (prev > 0.0) {
                changes += 1;
            }
            prev = cur;
        }
        assert_eq!(changes, 1);
    }
}
