//! Deterministic fixture generators shared by the benchmarks in
//! `benches/core_ops.rs`.

use cfregion_core::IntMatrix;

/// Fixed multiplicative-congruential stream: reproducible small integers
/// without pulling a RNG crate into the benchmark build.
fn lcg_entries(count: usize, seed: u64) -> Vec<i64> {
    let mut state = seed | 1;
    (0..count)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 19) as i64 - 9
        })
        .collect()
}

/// Dense square-ish matrix with entries in `[-9, 9]`.
pub fn dense_test_matrix(rows: usize, cols: usize) -> IntMatrix {
    let entries = lcg_entries(rows * cols, 0x5eed);
    let rows_vec: Vec<Vec<i64>> = entries.chunks(cols).map(|c| c.to_vec()).collect();
    IntMatrix::from_rows_i64(&rows_vec).expect("rectangular")
}

/// Wide matrix (more columns than rows) with entries in `[-9, 9]`, the shape
/// right-invertibility checks see.
pub fn wide_test_matrix(rows: usize, cols: usize) -> IntMatrix {
    assert!(cols >= rows, "wide matrix needs cols >= rows");
    let entries = lcg_entries(rows * cols, 0x77de);
    let rows_vec: Vec<Vec<i64>> = entries.chunks(cols).map(|c| c.to_vec()).collect();
    IntMatrix::from_rows_i64(&rows_vec).expect("rectangular")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_shapes() {
        let m = dense_test_matrix(6, 6);
        assert_eq!((m.rows(), m.cols()), (6, 6));
        let w = wide_test_matrix(3, 7);
        assert_eq!((w.rows(), w.cols()), (3, 7));
        assert!(!w.is_zero());
    }
}
