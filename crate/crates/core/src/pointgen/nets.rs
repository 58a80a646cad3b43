use super::PointSet;
use crate::error::{invalid, Result};
use crate::util::compositions;

/// The two-dimensional van der Corput net `{(i/2^r, rev_r(i)/2^r)}`.
pub fn corput_net(r: u32) -> Result<PointSet> {
    if r > 24 {
        return Err(invalid("corput_net supports r <= 24"));
    }
    let n = 1u32 << r;
    let scale = n as f64;
    let mut coords = Vec::with_capacity(2 * n as usize);
    for i in 0..n {
        let rev = if r == 0 { 0 } else { i.reverse_bits() >> (32 - r) };
        coords.push(i as f64 / scale);
        coords.push(rev as f64 / scale);
    }
    PointSet::from_flat(2, coords, format!("corput_net(r={r})"))
}

/// Checks the `(t, r, d)`-net property in base 2: every dyadic box of
/// volume `2^(t-r)` holds exactly `2^t` points under half-open membership.
pub fn net_check(set: &PointSet, t: u32, r: u32, d: usize) -> Result<bool> {
    if set.dim() != d {
        return Err(invalid("net_check: dimension mismatch"));
    }
    if t > r || r > 40 {
        return Err(invalid("net_check requires t <= r <= 40"));
    }
    if set.len() as u64 != 1u64 << r {
        return Err(invalid(format!(
            "net_check: set has {} points, expected 2^{r}",
            set.len()
        )));
    }
    if !set.is_half_open() {
        return Ok(false);
    }
    let level = (r - t) as usize;
    let expected = 1u64 << t;
    for s in compositions(level, d) {
        let mut counts = vec![0u64; 1usize << level];
        for p in set.iter() {
            let mut index = 0usize;
            for (x, &sj) in p.iter().zip(&s) {
                let cell = (x * (1u64 << sj) as f64).floor() as usize;
                index = (index << sj) | cell;
            }
            counts[index] += 1;
        }
        if counts.iter().any(|&c| c != expected) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointgen::regular_grid;

    /// Independent check: enumerate each dyadic box explicitly and count
    /// members with interval comparisons.
    fn brute_net_check(set: &PointSet, t: u32, r: u32) -> bool {
        let level = (r - t) as usize;
        for s in compositions(level, set.dim()) {
            let cells: Vec<usize> = s.iter().map(|&sj| 1usize << sj).collect();
            let total: usize = cells.iter().product();
            for flat in 0..total {
                let mut rem = flat;
                let mut lo = vec![0.0; s.len()];
                let mut hi = vec![0.0; s.len()];
                for j in 0..s.len() {
                    let a = rem % cells[j];
                    rem /= cells[j];
                    lo[j] = a as f64 / cells[j] as f64;
                    hi[j] = (a + 1) as f64 / cells[j] as f64;
                }
                let count = set
                    .iter()
                    .filter(|p| p.iter().enumerate().all(|(j, &x)| lo[j] <= x && x < hi[j]))
                    .count();
                if count != 1 << t {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn small_nets() {
        assert_eq!(corput_net(1).unwrap().coords(), &[0.0, 0.0, 0.5, 0.5]);
        assert_eq!(
            corput_net(2).unwrap().coords(),
            &[0.0, 0.0, 0.25, 0.5, 0.5, 0.25, 0.75, 0.75]
        );
        assert_eq!(corput_net(0).unwrap().len(), 1);
    }

    #[test]
    fn corput_is_a_zero_net() {
        for r in [3, 6] {
            let net = corput_net(r).unwrap();
            assert!(brute_net_check(&net, 0, r));
            assert!(net_check(&net, 0, r, 2).unwrap());
        }
    }

    #[test]
    fn grid_and_duplicates_fail() {
        let grid = regular_grid(2, 2).unwrap();
        assert!(!brute_net_check(&grid, 0, 2));
        assert!(!net_check(&grid, 0, 2, 2).unwrap());

        let dup = PointSet::new(2, vec![vec![0.1, 0.1], vec![0.1, 0.1], vec![0.6, 0.3], vec![0.3, 0.8]], "dup").unwrap();
        assert!(!net_check(&dup, 0, 2, 2).unwrap());
    }

    #[test]
    fn wrong_cardinality_is_rejected() {
        let net = corput_net(3).unwrap();
        assert!(net_check(&net, 0, 4, 2).is_err());
    }

    #[test]
    fn coarser_t_accepts_nets() {
        let net = corput_net(5).unwrap();
        for t in 0..=5 {
            assert!(net_check(&net, t, 5, 2).unwrap());
        }
    }
}
