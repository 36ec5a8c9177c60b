use modcurv::geometry::*;
use modcurv::matrixmodel;
use modcurv::numeric::QuadratureConfig;
use std::time::Instant;

fn main() {
    let cfg = QuadratureConfig::default();
    let t0 = Instant::now();
    let grid = [-1.17, -0.83, -0.41, 0.23, 0.52, 0.89, 1.31];
    match verify_cm_h(&[2.0, 3.0, 4.0, 6.0], &grid, 1e-8, cfg) {
        Ok(r) => {
            println!("verify-cm-h: {:?} in {:?}", r.status, t0.elapsed());
            for n in &r.notes { println!("   {}", n); }
        }
        Err(e) => println!("verify-cm-h ERROR: {}", e),
    }
    let t0 = Instant::now();
    match verify_ops_numeric(2.0, 0.3, cfg) {
        Ok(r) => println!("verify-ops numeric [lemma, K-match, L-kernel, diff-at-z]: {:?} in {:?}", r, t0.elapsed()),
        Err(e) => println!("ops numeric ERROR: {}", e),
    }
    let t0 = Instant::now();
    match matrixmodel::run_suite(&[2, 3, 4, 5, 6, 7, 8], 20, 20260810, 1e-9) {
        Ok(r) => {
            println!("matrix model: {:?} in {:?}", r.status, t0.elapsed());
            for n in &r.notes { println!("   {}", n); }
        }
        Err(e) => println!("matrix ERROR: {}", e),
    }
}
