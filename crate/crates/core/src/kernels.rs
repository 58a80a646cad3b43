//! Kernels that the smooth discrepancy and integration classes are built
//! from.
//!
//! The one-dimensional hat `h^r(x, u)` is the `r`-fold convolution of the
//! characteristic function of `[-u/2, u/2)` with itself. It equals
//! `u^(r-1) M_r(x/u)` where `M_r` is the centred cardinal B-spline of
//! order `r`, which is what [`hat_eval`] evaluates.

use crate::error::{invalid, Result};

/// Largest supported hat order.
pub const MAX_ORDER: usize = 30;

/// Cardinal B-spline `N_r` with knots `0, 1, ..., r`; `N_1` is the
/// indicator of `[0, 1)`.
pub fn cardinal_bspline(t: f64, order: usize) -> f64 {
    debug_assert!((1..=MAX_ORDER).contains(&order));
    if !(t >= 0.0 && t < order as f64) {
        return 0.0;
    }
    let cell = t.floor() as usize;
    let mut c = [0.0f64; MAX_ORDER + 1];
    c[cell] = 1.0;
    // c[i] holds N_k(t - i).
    for k in 2..=order {
        let kf = k as f64;
        let inv = 1.0 / (kf - 1.0);
        for i in 0..=(order - k) {
            let s = t - i as f64;
            c[i] = (s * c[i] + (kf - s) * c[i + 1]) * inv;
        }
    }
    c[0]
}

/// `h^r(x, u)` without parameter checks.
#[inline]
pub(crate) fn hat_value(x: f64, u: f64, order: usize) -> f64 {
    let t = x / u + order as f64 * 0.5;
    let b = cardinal_bspline(t, order);
    if b == 0.0 {
        0.0
    } else {
        b * u.powi(order as i32 - 1)
    }
}

/// `h^r(x, u)`: support `[-r u/2, r u/2)`, integral `u^r`.
pub fn hat_eval(x: f64, u: f64, order: usize) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(invalid("hat scale must be positive"));
    }
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(invalid(format!("hat order must be in 1..={MAX_ORDER}")));
    }
    Ok(hat_value(x, u, order))
}

/// A tensor-product hat: order, centre, per-axis scale, and whether it is
/// periodized.
#[derive(Clone, Debug, PartialEq)]
pub struct HatSpec {
    order: usize,
    center: Vec<f64>,
    scale: Vec<f64>,
    periodic: bool,
}

impl HatSpec {
    pub fn new(order: usize, center: Vec<f64>, scale: Vec<f64>, periodic: bool) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(invalid(format!("hat order must be in 1..={MAX_ORDER}")));
        }
        if center.is_empty() || center.len() != scale.len() {
            return Err(invalid("centre and scale must have the same positive length"));
        }
        if scale.iter().any(|&u| !(u > 0.0) || !u.is_finite()) {
            return Err(invalid("hat scales must be positive"));
        }
        let half = order as f64 * 0.5;
        if periodic {
            if scale.iter().any(|&u| u > 0.5) {
                return Err(invalid("periodic hats need scales in (0, 1/2]"));
            }
            if center.iter().any(|&z| !(0.0..1.0).contains(&z)) {
                return Err(invalid("periodic hat centre must lie in [0,1)^d"));
            }
        } else {
            const EPS: f64 = 1e-12;
            for (&z, &u) in center.iter().zip(&scale) {
                if z - half * u < -EPS || z + half * u > 1.0 + EPS {
                    return Err(invalid("hat support box leaves the unit cube"));
                }
            }
        }
        Ok(Self {
            order,
            center,
            scale,
            periodic,
        })
    }

    /// The hat whose support is the box `[lo, hi)`.
    pub fn from_box(order: usize, lo: &[f64], hi: &[f64]) -> Result<Self> {
        let center = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let scale = lo.iter().zip(hi).map(|(a, b)| (b - a) / order as f64).collect();
        Self::new(order, center, scale, false)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Lower and upper corners of the support box.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let half = self.order as f64 * 0.5;
        let lo = self.center.iter().zip(&self.scale).map(|(z, u)| z - half * u).collect();
        let hi = self.center.iter().zip(&self.scale).map(|(z, u)| z + half * u).collect();
        (lo, hi)
    }

    /// Volume of the support box, `prod_j r u_j`.
    pub fn support_volume(&self) -> f64 {
        self.scale.iter().map(|u| self.order as f64 * u).product()
    }
}

fn check_point(x: &[f64], spec: &HatSpec) -> Result<()> {
    if x.len() != spec.dim() {
        return Err(invalid("point dimension does not match the hat"));
    }
    Ok(())
}

/// `h^r_B(x) = prod_j h^r(x_j - z_j, u_j)`.
pub fn hat_box_eval(x: &[f64], spec: &HatSpec) -> Result<f64> {
    check_point(x, spec)?;
    if spec.periodic {
        return Err(invalid("hat_box_eval expects a non-periodic hat"));
    }
    Ok(box_value(x, &spec.center, &spec.scale, spec.order))
}

#[inline]
pub(crate) fn box_value(x: &[f64], center: &[f64], scale: &[f64], order: usize) -> f64 {
    let mut v = 1.0;
    for ((&xi, &z), &u) in x.iter().zip(center).zip(scale) {
        v *= hat_value(xi - z, u, order);
        if v == 0.0 {
            return 0.0;
        }
    }
    v
}

/// `prod_j u_j^r`, the integral of the hat over its support.
pub fn hat_box_integral(spec: &HatSpec) -> f64 {
    spec.scale.iter().map(|u| u.powi(spec.order as i32)).product()
}

/// Periodization of `h^r_B` with period one in every variable.
pub fn periodic_hat_eval(x: &[f64], spec: &HatSpec) -> Result<f64> {
    check_point(x, spec)?;
    if !spec.periodic {
        return Err(invalid("periodic_hat_eval expects a periodic hat"));
    }
    Ok(periodic_value(x, &spec.center, &spec.scale, spec.order))
}

#[inline]
pub(crate) fn periodic_value(x: &[f64], center: &[f64], scale: &[f64], order: usize) -> f64 {
    // Support half-width r u/2 <= r/4, so |k| <= ceil(r/2) covers every wrap.
    let wraps = order.div_ceil(2) as i64;
    let mut v = 1.0;
    for ((&xi, &z), &u) in x.iter().zip(center).zip(scale) {
        let mut s = 0.0;
        for k in -wraps..=wraps {
            s += hat_value(xi + k as f64 - z, u, order);
        }
        v *= s;
        if v == 0.0 {
            return 0.0;
        }
    }
    v
}

/// Truncated Bernoulli-type kernel
/// `F_{r,alpha}(x) = prod_j (1 + 2 sum_{k<=K} k^-r cos(2 pi k x_j - alpha_j pi/2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliSpec {
    order: f64,
    phase: Vec<f64>,
    terms: usize,
}

impl BernoulliSpec {
    pub fn new(order: f64, phase: Vec<f64>, terms: usize) -> Result<Self> {
        if !(order > 1.0) || !order.is_finite() {
            return Err(invalid("Bernoulli kernels need r > 1"));
        }
        if terms == 0 || phase.is_empty() {
            return Err(invalid("Bernoulli kernels need K >= 1 and d >= 1"));
        }
        Ok(Self { order, phase, terms })
    }

    /// Picks `K` so that the per-coordinate tail is at most `tol`.
    pub fn with_tolerance(order: f64, phase: Vec<f64>, tol: f64) -> Result<Self> {
        if !(order > 1.0) {
            return Err(invalid("Bernoulli kernels need r > 1"));
        }
        if !(tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        let k = (2.0 / ((order - 1.0) * tol)).powf(1.0 / (order - 1.0)).ceil();
        Self::new(order, phase, k.max(1.0) as usize)
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn dim(&self) -> usize {
        self.phase.len()
    }

    /// Bound on the one-coordinate truncation error, `2 K^(1-r)/(r-1)`.
    pub fn tail_bound(&self) -> f64 {
        2.0 * (self.terms as f64).powf(1.0 - self.order) / (self.order - 1.0)
    }
}

pub(crate) fn bernoulli_factor(x: f64, order: f64, phase: f64, terms: usize) -> f64 {
    let shift = phase * std::f64::consts::FRAC_PI_2;
    let two_pi_x = 2.0 * std::f64::consts::PI * x;
    let mut s = 0.0;
    for k in (1..=terms).rev() {
        let kf = k as f64;
        s += kf.powf(-order) * (kf * two_pi_x - shift).cos();
    }
    1.0 + 2.0 * s
}

pub fn bernoulli_eval(x: &[f64], spec: &BernoulliSpec) -> Result<f64> {
    if x.len() != spec.dim() {
        return Err(invalid("point dimension does not match the kernel"));
    }
    Ok(x
        .iter()
        .zip(&spec.phase)
        .map(|(&xi, &a)| bernoulli_factor(xi, spec.order, a, spec.terms))
        .product())
}

/// `B_r(x, y) = prod_j (y_j - x_j)_+^(r-1) / (r-1)!`, with `(a)_+^0 = [a > 0]`.
pub fn br_eval(x: &[f64], y: &[f64], order: usize) -> f64 {
    assert!(order >= 1, "B_r needs r >= 1");
    let fact: f64 = (1..order).map(|k| k as f64).product();
    let mut v = 1.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let diff = yi - xi;
        if diff <= 0.0 {
            return 0.0;
        }
        v *= diff.powi(order as i32 - 1) / fact;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_values() {
        for u in [0.1, 0.5, 2.0] {
            assert!((hat_eval(0.0, u, 2).unwrap() - u).abs() < 1e-15);
        }
        assert_eq!(hat_eval(0.3, 1.0, 1).unwrap(), 1.0);
        assert_eq!(hat_eval(0.6, 1.0, 1).unwrap(), 0.0);
        assert_eq!(hat_eval(-0.5, 1.0, 1).unwrap(), 1.0);
        assert_eq!(hat_eval(0.5, 1.0, 1).unwrap(), 0.0);
        assert!((hat_eval(0.0, 1.0, 3).unwrap() - 0.75).abs() < 1e-15);
        assert!(hat_eval(0.0, 0.0, 2).is_err());
        assert!(hat_eval(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn hat_support_and_sign() {
        for r in 1..=6 {
            let u = 0.3;
            let edge = r as f64 * u / 2.0;
            assert_eq!(hat_eval(edge, u, r).unwrap(), 0.0);
            assert_eq!(hat_eval(-edge - 1e-9, u, r).unwrap(), 0.0);
            for i in 0..200 {
                let x = -edge + 2.0 * edge * i as f64 / 200.0;
                assert!(hat_eval(x, u, r).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn box_hats() {
        let spec = HatSpec::new(2, vec![0.5, 0.5], vec![0.5, 0.5], false).unwrap();
        assert!((hat_box_eval(&[0.5, 0.5], &spec).unwrap() - 0.25).abs() < 1e-15);
        let small = HatSpec::new(2, vec![0.3, 0.3], vec![0.1, 0.1], false).unwrap();
        assert_eq!(hat_box_eval(&[0.9, 0.3], &small).unwrap(), 0.0);

        // Support [0.375, 0.625) x [0.25, 0.75), exactly representable.
        let r1 = HatSpec::new(1, vec![0.5, 0.5], vec![0.25, 0.5], false).unwrap();
        assert_eq!(hat_box_eval(&[0.375, 0.25], &r1).unwrap(), 1.0);
        assert_eq!(hat_box_eval(&[0.625, 0.3], &r1).unwrap(), 0.0);
        assert_eq!(hat_box_eval(&[0.45, 0.75], &r1).unwrap(), 0.0);

        assert!(HatSpec::new(2, vec![0.1], vec![0.2], false).is_err());
        assert!(HatSpec::new(2, vec![0.1], vec![0.6], true).is_err());
    }

    #[test]
    fn box_integrals() {
        let r1 = HatSpec::new(1, vec![0.5, 0.5], vec![0.3, 0.4], false).unwrap();
        assert!((hat_box_integral(&r1) - 0.12).abs() < 1e-15);
        let r2 = HatSpec::new(2, vec![0.5], vec![0.5], false).unwrap();
        assert!((hat_box_integral(&r2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn periodic_hat_wraps() {
        let spec = HatSpec::new(2, vec![0.0], vec![0.5], true).unwrap();
        assert!((periodic_hat_eval(&[0.0], &spec).unwrap() - 0.5).abs() < 1e-15);
        // Near x = 1 the hat centred at 0 wraps around.
        assert!((periodic_hat_eval(&[0.9], &spec).unwrap() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn periodic_matches_wide_window() {
        for r in 1..=6 {
            for &(z, u, x) in &[(0.1, 0.5, 0.8), (0.95, 0.31, 0.02), (0.5, 0.17, 0.49)] {
                let spec = HatSpec::new(r, vec![z], vec![u], true).unwrap();
                let wide: f64 = (-10..=10).map(|k| hat_value(x + k as f64 - z, u, r)).sum();
                let v = periodic_hat_eval(&[x], &spec).unwrap();
                assert!((v - wide).abs() < 1e-12, "r={r}");
            }
        }
    }

    #[test]
    fn bernoulli_values() {
        assert!(BernoulliSpec::new(1.0, vec![1.0], 10).is_err());
        let spec = BernoulliSpec::new(2.0, vec![2.0], 100_000).unwrap();
        let v = bernoulli_eval(&[0.0], &spec).unwrap();
        let exact = 1.0 - std::f64::consts::PI.powi(2) / 3.0;
        assert!((v - exact).abs() < 1e-4);
        assert!((exact + 2.289868).abs() < 1e-6);
        assert!(spec.tail_bound() <= 2.0e-5 + 1e-12);

        let auto = BernoulliSpec::with_tolerance(3.0, vec![0.0], 1e-6).unwrap();
        assert!(auto.tail_bound() <= 1e-6 * (1.0 + 1e-9));
    }

    #[test]
    fn bernoulli_mean_is_one() {
        let spec = BernoulliSpec::new(2.5, vec![0.7, 1.3], 200).unwrap();
        let n = 512;
        for j in 0..2 {
            let mean: f64 = (0..n)
                .map(|i| bernoulli_factor(i as f64 / n as f64, spec.order(), spec.phase()[j], spec.terms()))
                .sum::<f64>()
                / n as f64;
            assert!((mean - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_power_kernel() {
        assert_eq!(br_eval(&[0.2, 0.3], &[0.5, 0.4], 1), 1.0);
        assert_eq!(br_eval(&[0.2, 0.3], &[0.5, 0.3], 1), 0.0);
        assert!((br_eval(&[0.2], &[0.7], 2) - 0.5).abs() < 1e-15);
        let almost_one = 1.0 - f64::EPSILON;
        assert!((br_eval(&[0.0, 0.0], &[almost_one, almost_one], 3) - 0.25).abs() < 1e-12);
    }
}
