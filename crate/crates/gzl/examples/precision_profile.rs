//! Print the certified precision profile of the module construction:
//! fixed-point margin, per-branch flatness and shtuka-divisor margins, and
//! the commutation residuals, at a configurable window size.
//!
//! Usage: `cargo run --release --example precision_profile -- [nw]`

use gzl::curve::Curve;
use gzl::drinfeld::DrinfeldCtx;

fn profile(name: &str, curve: Curve, nw: i64) {
    println!("== {name} (q = {}, nw = {nw}) ==", curve.q);
    let dc = match DrinfeldCtx::new(curve, nw, 2) {
        Ok(dc) => dc,
        Err(e) => {
            println!("  construction failed: {e}");
            return;
        }
    };
    println!("  class number h = {}", dc.h());
    println!("  fixed-point margin = {}", dc.fixed_point_margin);
    for (j, b) in dc.branches.iter().enumerate() {
        let div = match dc.certify_shtuka_divisor(j) {
            Ok(m) => m.to_string(),
            Err(e) => format!("FAILED ({e})"),
        };
        let res = match dc.commutation_residuals(j) {
            Ok(r) => format!("{r:?}"),
            Err(e) => format!("FAILED ({e})"),
        };
        println!(
            "  branch {j} {:?}: flat = {}, divisor margin = {}, residuals = {}",
            b.label, b.flat, div, res
        );
        println!(
            "    x1: v = {} prec = {}   y1: v = {} prec = {}   z1: v = {} prec = {}",
            b.x1.v, b.x1.prec, b.y1.v, b.y1.prec, b.z1.v, b.z1.prec
        );
    }
}

fn main() {
    let nw: i64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(96);
    profile("main fixture", Curve::new(3, 1, [0, 0, 0, -1, 1]).unwrap(), nw);
    profile("smoke fixture", Curve::new(2, 1, [0, 0, 1, 1, 1]).unwrap(), nw);
}
