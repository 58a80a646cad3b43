use crate::error::{invalid, Result};
use crate::util::compositions;

/// `sigma^r(v, u) = sum_{|s|_1 = v} prod_j min((2^s_j u_j)^(r/2), (2^s_j u_j)^(-r/2))`.
pub fn sigma_r(v: u32, u: &[f64], order: f64) -> Result<f64> {
    check(u, order)?;
    let half = 0.5 * order;
    Ok(compositions(v as usize, u.len())
        .iter()
        .map(|s| {
            s.iter()
                .zip(u)
                .map(|(&sj, &uj)| {
                    let t = (sj as f64).exp2() * uj;
                    t.powf(half).min(t.powf(-half))
                })
                .product::<f64>()
        })
        .sum())
}

fn check(u: &[f64], order: f64) -> Result<()> {
    if u.is_empty() || u.len() > 4 {
        return Err(invalid("sigma_r supports 1 <= d <= 4"));
    }
    if u.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(invalid("u must be positive"));
    }
    if !(order > 0.0) {
        return Err(invalid("order must be positive"));
    }
    Ok(())
}

/// The envelope with unit constant: for `P = 2^v prod u_j >= 1` it is
/// `ln(2P)^(d-1) / P^(r/2)`, otherwise `P^(r/2) ln(2/P)^(d-1)`.
pub fn sigma_envelope(v: u32, u: &[f64], order: f64) -> Result<f64> {
    check(u, order)?;
    let p = (v as f64).exp2() * u.iter().product::<f64>();
    let dm1 = u.len() as i32 - 1;
    Ok(if p >= 1.0 {
        (2.0 * p).ln().powi(dm1) / p.powf(0.5 * order)
    } else {
        p.powf(0.5 * order) * (2.0 / p).ln().powi(dm1)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaCheck {
    pub sigma: f64,
    pub envelope: f64,
    pub ratio: f64,
    /// True in the regime `2^v prod u_j >= 1`.
    pub large_product: bool,
}

pub fn bound_check(v: u32, u: &[f64], order: f64) -> Result<SigmaCheck> {
    let sigma = sigma_r(v, u, order)?;
    let envelope = sigma_envelope(v, u, order)?;
    Ok(SigmaCheck {
        sigma,
        envelope,
        ratio: sigma / envelope,
        large_product: (v as f64).exp2() * u.iter().product::<f64>() >= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let s = sigma_r(1, &[0.5, 0.5], 2.0).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
        for v in 0..6 {
            let u = 0.3;
            let t = (v as f64).exp2() * u;
            let expect = t.min(1.0 / t).powf(1.5);
            assert!((sigma_r(v, &[u], 3.0).unwrap() - expect).abs() < 1e-15);
            assert!((bound_check(v, &[u], 3.0).unwrap().ratio - 1.0).abs() < 1e-12);
        }
        assert!(sigma_r(1, &[0.5; 5], 2.0).is_err());
        assert!(sigma_r(1, &[0.0, 0.5], 2.0).is_err());
    }
}
