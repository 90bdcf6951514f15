//! Doubling the 2D trumpet mesh in both directions moves the current by
//! less than 2%. About 15 minutes on one core, so ignored by default.

use nanopnp::fixtures;
use nanopnp::pnp2d::{self, Pnp2dOptions};

#[test]
#[ignore]
fn trumpet_current_converges_under_refinement() {
    let s = fixtures::trumpet(1.0);
    let coarse = Pnp2dOptions { nx: 256, nr: 64, grading: 1.06, ..Default::default() };
    let fine = Pnp2dOptions { nx: 512, nr: 128, grading: 1.03, ..Default::default() };
    let a = pnp2d::solve(&s, 0.2, &coarse).unwrap().current_i;
    let b = pnp2d::solve(&s, 0.2, &fine).unwrap().current_i;
    let change = ((a - b) / b).abs();
    println!("coarse {a:.4}, fine {b:.4}, change {:.3}%", 100.0 * change);
    assert!(change < 0.02);
}
