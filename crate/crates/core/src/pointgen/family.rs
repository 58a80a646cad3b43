use super::{corput_net, fibonacci_set, frolov_basis, frolov_periodized, frolov_points, halton_set, random_uniform, regular_grid, PointSet};
use crate::error::{invalid, Result};

/// Named point-set families swept by the rate experiments.
///
/// Each family is indexed by one integer size parameter: the Fibonacci
/// index `n`, the Frolov scale `a`, the net exponent `r`, the number of grid
/// points per axis `k`, or the point count `m` for Halton and random sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Fibonacci,
    Frolov { dim: usize },
    FrolovPeriodic { dim: usize },
    CorputNet,
    Grid { dim: usize },
    Halton { dim: usize },
    Random { dim: usize },
}

impl Family {
    pub fn parse(name: &str, dim: usize) -> Result<Self> {
        let fixed2 = |f: Family| {
            if dim == 2 {
                Ok(f)
            } else {
                Err(invalid(format!("family {name} is two-dimensional")))
            }
        };
        match name {
            "fibonacci" => fixed2(Family::Fibonacci),
            "corput_net" | "corput" => fixed2(Family::CorputNet),
            "frolov" => Ok(Family::Frolov { dim }),
            "frolov_periodic" => Ok(Family::FrolovPeriodic { dim }),
            "grid" => Ok(Family::Grid { dim }),
            "halton" => Ok(Family::Halton { dim }),
            "random" => Ok(Family::Random { dim }),
            other => Err(invalid(format!("unknown family {other}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Fibonacci => "fibonacci",
            Family::Frolov { .. } => "frolov",
            Family::FrolovPeriodic { .. } => "frolov_periodic",
            Family::CorputNet => "corput_net",
            Family::Grid { .. } => "grid",
            Family::Halton { .. } => "halton",
            Family::Random { .. } => "random",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Family::Fibonacci | Family::CorputNet => 2,
            Family::Frolov { dim }
            | Family::FrolovPeriodic { dim }
            | Family::Grid { dim }
            | Family::Halton { dim }
            | Family::Random { dim } => dim,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Family::Random { .. })
    }

    /// The point set of the given size; `seed` is only used by random sets.
    pub fn points(&self, size: u64, seed: u64) -> Result<PointSet> {
        let size_usize = usize::try_from(size).map_err(|_| invalid("size too large"))?;
        match *self {
            Family::Fibonacci => fibonacci_set(size_usize),
            Family::Frolov { dim } => frolov_points(&frolov_basis(dim)?, size as f64),
            Family::FrolovPeriodic { dim } => Ok(frolov_periodized(&frolov_basis(dim)?, size as f64)?.wrapped),
            Family::CorputNet => corput_net(u32::try_from(size).map_err(|_| invalid("net exponent too large"))?),
            Family::Grid { dim } => regular_grid(size_usize, dim),
            Family::Halton { dim } => halton_set(size_usize, dim),
            Family::Random { dim } => random_uniform(size_usize, dim, seed),
        }
    }
}
