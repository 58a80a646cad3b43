use super::{frolov_periodic_rule, frolov_rule, worst_case_error_w2r, CubatureRule};
use crate::error::{invalid, Result};
use crate::pointgen::{frolov_basis, Family};
use crate::stats::{loglog_fit, LinearFit};

/// The cubature rule a family provides: partition-of-unity weights for
/// periodized Frolov sets, `(a^d |det A|)^-1` for plain Frolov sets, equal
/// weights otherwise.
pub fn family_rule(family: Family, size: u64, seed: u64) -> Result<CubatureRule> {
    match family {
        Family::Frolov { dim } => frolov_rule(&frolov_basis(dim)?, size as f64),
        Family::FrolovPeriodic { dim } => frolov_periodic_rule(&frolov_basis(dim)?, size as f64),
        other => CubatureRule::equal_weight(other.points(size, seed)?),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub size: u64,
    pub cardinality: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct RateTable {
    pub family: Family,
    pub order: f64,
    pub rows: Vec<RateRow>,
    /// Fit of `ln value` against `ln cardinality`.
    pub fit: LinearFit,
}

/// Worst-case `W^r_2` errors across sizes of one family and the fitted
/// log-log slope against the number of knots.
///
/// Random families are averaged over `seeds` in mean square, which is the
/// quantity with an exact `m^-1/2` law.
pub fn rate_experiment(family: Family, order: f64, sizes: &[u64], seeds: &[u64], tol: f64) -> Result<RateTable> {
    if sizes.len() < 2 {
        return Err(invalid("a rate experiment needs at least two sizes"));
    }
    if family.is_random() && seeds.is_empty() {
        return Err(invalid("random families need at least one seed"));
    }
    let rows = sizes.iter().map(|&size| rate_row(family, order, size, seeds, tol)).collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.cardinality as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let fit = loglog_fit(&x, &y)?;
    Ok(RateTable { family, order, rows, fit })
}

/// One size of [`rate_experiment`].
pub fn rate_row(family: Family, order: f64, size: u64, seeds: &[u64], tol: f64) -> Result<RateRow> {
    if !family.is_random() {
        let rule = family_rule(family, size, 0)?;
        return Ok(RateRow {
            size,
            cardinality: rule.len(),
            value: worst_case_error_w2r(&rule, order, tol)?.value,
        });
    }
    if seeds.is_empty() {
        return Err(invalid("random families need at least one seed"));
    }
    let mut sq = 0.0;
    let mut cardinality = 0;
    for &seed in seeds {
        let rule = family_rule(family, size, seed)?;
        cardinality = rule.len();
        sq += worst_case_error_w2r(&rule, order, tol)?.value.powi(2);
    }
    Ok(RateRow {
        size,
        cardinality,
        value: (sq / seeds.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rate_is_minus_one_half_in_cardinality() {
        let t = rate_experiment(Family::Grid { dim: 2 }, 1.0, &[4, 8, 16, 32], &[], 1e-4).unwrap();
        assert!((t.fit.slope + 0.5).abs() < 0.05, "{}", t.fit.slope);
        assert_eq!(t.rows[1].cardinality, 64);
    }

    #[test]
    fn needs_seeds_for_random() {
        assert!(rate_experiment(Family::Random { dim: 2 }, 1.0, &[4, 8], &[], 1e-4).is_err());
        assert!(rate_experiment(Family::Fibonacci, 1.0, &[8], &[], 1e-4).is_err());
    }
}
