use lagnn::numerics::{DenseMatrix, RngState};
use std::time::Instant;

fn main() {
    let mut rng = RngState::new(1);
    let mk = |r: usize, c: usize, rng: &mut RngState| {
        let mut m = DenseMatrix::zeros(r, c);
        for v in m.data_mut() { *v = rng.normal(); }
        m
    };
    // decoder-shaped product: dh (64x256) @ dW2 (256x1433)
    let a = mk(64, 256, &mut rng);
    let b = mk(256, 1433, &mut rng);
    let t = Instant::now();
    let mut acc = 0.0;
    for _ in 0..200 { acc += a.matmul(&b).unwrap().data()[0]; }
    let dt = t.elapsed().as_secs_f64();
    println!("dh@dW2   : {:.1} ms/it  {:.2} GFLOP/s  ({acc:.3})", dt * 5.0, 200.0 * 2.0 * 64.0 * 256.0 * 1433.0 / dt / 1e9);
    // transpose-shaped: dh^T (256x64) @ g (64x1433)
    let t2 = Instant::now();
    let mut acc2 = 0.0;
    let g = mk(64, 1433, &mut rng);
    for _ in 0..200 { acc2 += a.transpose().matmul(&g).unwrap().data()[0]; }
    let dt2 = t2.elapsed().as_secs_f64();
    println!("dh^T@g   : {:.1} ms/it  {:.2} GFLOP/s  ({acc2:.3})", dt2 * 5.0, 200.0 * 2.0 * 64.0 * 256.0 * 1433.0 / dt2 / 1e9);
    // g (64x1433) @ dW2^T (1433x256)
    let t3 = Instant::now();
    let mut acc3 = 0.0;
    for _ in 0..200 { acc3 += g.matmul(&b.transpose()).unwrap().data()[0]; }
    let dt3 = t3.elapsed().as_secs_f64();
    println!("g@dW2^T  : {:.1} ms/it  {:.2} GFLOP/s  ({acc3:.3})", dt3 * 5.0, 200.0 * 2.0 * 64.0 * 256.0 * 1433.0 / dt3 / 1e9);
    // spmm-ish dense: X (2708x1433) @ W (1433x16)
    let x = mk(2708, 1433, &mut rng);
    let w = mk(1433, 16, &mut rng);
    let t4 = Instant::now();
    let mut acc4 = 0.0;
    for _ in 0..50 { acc4 += x.matmul(&w).unwrap().data()[0]; }
    let dt4 = t4.elapsed().as_secs_f64();
    println!("X@W      : {:.1} ms/it  {:.2} GFLOP/s  ({acc4:.3})", dt4 * 20.0, 50.0 * 2.0 * 2708.0 * 1433.0 * 16.0 / dt4 / 1e9);
}
