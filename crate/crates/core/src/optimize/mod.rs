//! Variational entanglement measures for mixed states.
//!
//! - [`relative_entropy_of_entanglement`]: Frank-Wolfe (with away steps)
//!   over explicit convex combinations of product states.
//! - [`entanglement_of_formation`]: annealed Givens-rotation search over
//!   ensemble decompositions.
//! - [`concurrence_oracle_2q`]: closed form for two qubits, used as an
//!   independent check of the formation search.
//!
//! Restarts run in parallel. Restart `r` draws from stream `r` of a ChaCha8
//! generator seeded with the master seed, and results are reduced by
//! minimum value with ties going to the lower restart index, so serial and
//! parallel runs agree exactly.

mod concurrence;
mod formation;
mod lmo;
mod relent;

pub use concurrence::{concurrence_2q, concurrence_oracle_2q};
pub use formation::{entanglement_of_formation, Decomposition, FormationOptions, FormationResult};
pub use lmo::{alternating_minimization, lmo_product_state, ProductPoint};
pub use relent::{
    er_continuity_probe, relative_entropy_of_entanglement, RelEntOptions, RelEntResult,
    SeparableIterate,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default cap on the composite dimension accepted by the optimizers.
pub const DEFAULT_OPTIMIZATION_CAP: usize = 36;

pub(crate) fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Index of the smallest value, first index on ties.
pub(crate) fn argmin_stable<T>(items: &[T], key: impl Fn(&T) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, it) in items.iter().enumerate() {
        let v = key(it);
        match best {
            Some((_, b)) if !(v < b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn check_cap(dim: usize, cap: usize) -> crate::Result<()> {
    if dim > cap {
        Err(crate::Error::ResourceLimit {
            what: "composite dimension for optimization",
            requested: dim,
            cap,
        })
    } else {
        Ok(())
    }
}
