use crate::error::{Error, Result};

/// Cap on the number of encoded vertices a single level may hold.
///
/// Level enumeration materializes arrays indexed by the `d^n` vertices of
/// level `n`, so every level-walking operation checks its level size against
/// this budget first and fails with [`Error::BudgetExceeded`] instead of
/// allocating. The default is `2^24`; the hard maximum is `2^31` because
/// image tables store vertex indices as `u32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexBudget(u64);

impl VertexBudget {
    pub const DEFAULT: u64 = 1 << 24;
    pub const MAX: u64 = 1 << 31;

    pub fn new(vertices: u64) -> Result<Self> {
        if vertices == 0 || vertices > Self::MAX {
            return Err(Error::BudgetOutOfRange {
                requested: vertices,
                max: Self::MAX,
            });
        }
        Ok(VertexBudget(vertices))
    }

    pub fn get(&self) -> u64 {
        self.0
    }

    /// Checks that level `level` of the `arity`-ary tree fits in the budget
    /// and returns its size.
    pub fn check_level(&self, arity: usize, level: usize) -> Result<usize> {
        let mut size: u64 = 1;
        for _ in 0..level {
            size = size
                .checked_mul(arity as u64)
                .filter(|&s| s <= self.0)
                .ok_or(Error::BudgetExceeded {
                    arity,
                    level,
                    budget: self.0,
                })?;
        }
        Ok(size as usize)
    }
}

impl Default for VertexBudget {
    fn default() -> Self {
        VertexBudget(Self::DEFAULT)
    }
}
