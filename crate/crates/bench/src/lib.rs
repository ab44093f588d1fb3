//! Fixtures shared by the kernel benchmarks.

use nevorder::{sample_sphere, CPoint, RngStream};

/// Fixed uniform points on `S(r) ⊂ C²`.
pub fn sphere_points(r: f64, n: usize) -> Vec<CPoint> {
    sample_sphere(2, r, n, RngStream::new(0xbe4c, 1)).expect("valid sampling arguments")
}
