pub mod estimate;
pub mod round;
pub mod table;
pub mod verify;

use crround_core::{balancedness_c, Matroid, PartitionMatroid};

/// The guaranteed keep probability of each element: `c(d, |D|)` of its
/// block, or 1 when the block is never over capacity.
pub(crate) fn element_bounds(m: &PartitionMatroid) -> Vec<f64> {
    let mut bounds = vec![1.0; m.ground().len()];
    for (block, &d) in m.blocks().iter().zip(m.capacities()) {
        let size = block.len();
        let c = if d == 0 || d >= size {
            1.0
        } else {
            balancedness_c(d, size).unwrap_or(1.0)
        };
        for e in block.iter() {
            bounds[e] = c;
        }
    }
    bounds
}
