//! Dense f64 linear algebra, PRNG, Adam, gradient checking, and tensor
//! serialization. Every reduction has a fixed, documented order so repeated
//! runs and serial/parallel builds agree bit-exactly.

mod adam;
mod gradcheck;
mod io;
mod rng;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use gradcheck::grad_check;
pub use io::{read_tensors, write_tensors};
pub use rng::RngState;

use crate::{Error, Result};

/// Row-major dense matrix of 64-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "from_vec",
                format!("{rows}x{cols} needs {} values, got {}", rows * cols, data.len()),
            ));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Applies `f` to every entry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &DenseMatrix) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "hadamard",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Matrix product `self * b`.
    ///
    /// For each output entry the reduction over the inner index k runs in
    /// ascending order, one unfused multiply-add per term, so the result is
    /// independent of the internal blocking. Rows are processed four at a
    /// time with the running sums kept in registers; a k is skipped when all
    /// four left entries are exactly zero, and a zero entry among nonzero
    /// ones contributes `0.0 * b`, which never changes a finite
    /// accumulation. Left-operand sparsity therefore keeps products cheap.
    pub fn matmul(&self, b: &DenseMatrix) -> Result<Self> {
        if self.cols != b.rows {
            return Err(Error::shape(
                "matmul",
                format!("{:?} * {:?}", self.shape(), b.shape()),
            ));
        }
        let n = b.cols;
        let kk = self.cols;
        let mut out = DenseMatrix::zeros(self.rows, n);
        let mut i = 0;
        while i + 4 <= self.rows {
            let mut j = 0;
            while j + 32 <= n {
                mm_block::<32>(&self.data, &b.data, &mut out.data, i, j, kk, n);
                j += 32;
            }
            while j + 8 <= n {
                mm_block::<8>(&self.data, &b.data, &mut out.data, i, j, kk, n);
                j += 8;
            }
            if j < n {
                mm_scalar(&self.data, &b.data, &mut out.data, i, i + 4, j, kk, n);
            }
            i += 4;
        }
        if i < self.rows {
            mm_scalar(&self.data, &b.data, &mut out.data, i, self.rows, 0, kk, n);
        }
        Ok(out)
    }

    /// `self^T * b` without materializing the transpose; bit-identical to
    /// `self.transpose().matmul(b)`. The reduction per output entry runs
    /// over this matrix's rows in ascending order.
    pub fn matmul_at_b(&self, b: &DenseMatrix) -> Result<Self> {
        if self.rows != b.rows {
            return Err(Error::shape(
                "matmul_at_b",
                format!("{:?}^T * {:?}", self.shape(), b.shape()),
            ));
        }
        let n = b.cols;
        let kk = self.cols;
        let mut out = DenseMatrix::zeros(kk, n);
        // Row blocks bound how often the output is re-streamed.
        let mut i = 0;
        while i < self.rows {
            let ib = (self.rows - i).min(8);
            for k in 0..kk {
                let orow = &mut out.data[k * n..(k + 1) * n];
                for ii in i..i + ib {
                    let a = self.data[ii * kk + k];
                    if a == 0.0 {
                        continue;
                    }
                    let brow = &b.data[ii * n..(ii + 1) * n];
                    for (o, &bv) in orow.iter_mut().zip(brow) {
                        *o += a * bv;
                    }
                }
            }
            i += ib;
        }
        Ok(out)
    }

    /// `self * b^T` without materializing the transpose; bit-identical to
    /// `self.matmul(&b.transpose())`. Each output entry keeps one
    /// accumulator fed in ascending k order, and terms whose left factor
    /// is exactly zero are skipped (the accumulator is never -0.0, so
    /// adding a signed zero cannot change it).
    pub fn matmul_a_bt(&self, b: &DenseMatrix) -> Result<Self> {
        if self.cols != b.cols {
            return Err(Error::shape(
                "matmul_a_bt",
                format!("{:?} * {:?}^T", self.shape(), b.shape()),
            ));
        }
        let kk = self.cols;
        let n = b.rows;
        let mut out = DenseMatrix::zeros(self.rows, n);
        for i in 0..self.rows {
            let arow = &self.data[i * kk..(i + 1) * kk];
            let orow = &mut out.data[i * n..(i + 1) * n];
            let mut j = 0;
            while j + 8 <= n {
                let mut acc = [0.0f64; 8];
                let bblk = &b.data[j * kk..(j + 8) * kk];
                for (k, &a) in arow.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (t, lane) in acc.iter_mut().enumerate() {
                        *lane += a * bblk[t * kk + k];
                    }
                }
                orow[j..j + 8].copy_from_slice(&acc);
                j += 8;
            }
            for (t, o) in orow[j..].iter_mut().enumerate() {
                let brow = &b.data[(j + t) * kk..(j + t + 1) * kk];
                let mut acc = 0.0f64;
                for (&a, &bv) in arow.iter().zip(brow) {
                    if a == 0.0 {
                        continue;
                    }
                    acc += a * bv;
                }
                *o = acc;
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self | b]`.
    pub fn concat_cols(&self, b: &DenseMatrix) -> Result<Self> {
        if self.rows != b.rows {
            return Err(Error::shape(
                "concat_cols",
                format!("{:?} | {:?}", self.shape(), b.shape()),
            ));
        }
        let cols = self.cols + b.cols;
        let mut out = DenseMatrix::zeros(self.rows, cols);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(b.row(i));
        }
        Ok(out)
    }

    /// Columns `[lo, hi)` as a new matrix.
    pub fn slice_cols(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi > self.cols {
            return Err(Error::shape(
                "slice_cols",
                format!("[{lo}, {hi}) of {} cols", self.cols),
            ));
        }
        let cols = hi - lo;
        let mut out = DenseMatrix::zeros(self.rows, cols);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[lo..hi]);
        }
        Ok(out)
    }

    /// Scales every row to sum to 1; all-zero rows are left untouched.
    pub fn row_normalize(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            let row = out.row_mut(i);
            let s: f64 = row.iter().sum();
            if s != 0.0 {
                for v in row.iter_mut() {
                    *v /= s;
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Four rows by JB columns of the product, accumulated in registers over
/// the full k range.
fn mm_block<const JB: usize>(
    a: &[f64],
    b: &[f64],
    out: &mut [f64],
    i: usize,
    j: usize,
    kk: usize,
    n: usize,
) {
    let mut acc = [[0.0f64; JB]; 4];
    for k in 0..kk {
        let a0 = a[i * kk + k];
        let a1 = a[(i + 1) * kk + k];
        let a2 = a[(i + 2) * kk + k];
        let a3 = a[(i + 3) * kk + k];
        if a0 == 0.0 && a1 == 0.0 && a2 == 0.0 && a3 == 0.0 {
            continue;
        }
        let brow = &b[k * n + j..k * n + j + JB];
        for (t, &bv) in brow.iter().enumerate() {
            acc[0][t] += a0 * bv;
            acc[1][t] += a1 * bv;
            acc[2][t] += a2 * bv;
            acc[3][t] += a3 * bv;
        }
    }
    for (r, row) in acc.iter().enumerate() {
        let orow = &mut out[(i + r) * n + j..(i + r) * n + j + JB];
        orow.copy_from_slice(row);
    }
}

/// Rows `[i0, i1)`, columns `[j, n)` of the product, one row at a time with
/// the original per-row zero skip.
#[allow(clippy::too_many_arguments)]
fn mm_scalar(
    a: &[f64],
    b: &[f64],
    out: &mut [f64],
    i0: usize,
    i1: usize,
    j: usize,
    kk: usize,
    n: usize,
) {
    for i in i0..i1 {
        let arow = &a[i * kk..(i + 1) * kk];
        for (k, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b[k * n + j..(k + 1) * n];
            let orow = &mut out[i * n + j..(i + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

/// ReLU applied entrywise.
pub fn relu(x: &DenseMatrix) -> DenseMatrix {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Gradient of ReLU: passes `grad` where the pre-activation was positive.
pub fn relu_backward(grad: &DenseMatrix, pre: &DenseMatrix) -> Result<DenseMatrix> {
    if grad.shape() != pre.shape() {
        return Err(Error::shape(
            "relu_backward",
            format!("{:?} vs {:?}", grad.shape(), pre.shape()),
        ));
    }
    let data = grad
        .data
        .iter()
        .zip(&pre.data)
        .map(|(&g, &p)| if p > 0.0 { g } else { 0.0 })
        .collect();
    Ok(DenseMatrix {
        rows: grad.rows,
        cols: grad.cols,
        data,
    })
}

/// Logistic sigmoid applied entrywise.
pub fn sigmoid(x: &DenseMatrix) -> DenseMatrix {
    x.map(|v| 1.0 / (1.0 + (-v).exp()))
}

/// Row-wise log-softmax with max-subtraction stabilization.
///
/// Each output row r satisfies sum(exp(out[r])) = 1 up to rounding. The sums
/// run left to right over the row.
pub fn row_log_softmax(logits: &DenseMatrix) -> DenseMatrix {
    let mut out = logits.clone();
    for i in 0..out.rows {
        let row = out.row_mut(i);
        let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for v in row.iter() {
            s += (v - mx).exp();
        }
        let lse = mx + s.ln();
        for v in row.iter_mut() {
            *v -= lse;
        }
    }
    out
}

/// Inverted dropout. Training mode zeroes each entry independently with
/// probability `rate` and scales survivors by 1/(1-rate); inference mode is
/// the identity. Returns the output and the realized mask (entries 0 or
/// 1/(1-rate), all-ones in inference mode or at rate 0).
pub fn dropout(
    x: &DenseMatrix,
    rate: f64,
    rng: &mut RngState,
    training: bool,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if !training || rate == 0.0 {
        let mask = x.map(|_| 1.0);
        return Ok((x.clone(), mask));
    }
    let scale = 1.0 / (1.0 - rate);
    let mut mask = DenseMatrix::zeros(x.rows, x.cols);
    for m in mask.data.iter_mut() {
        if rng.uniform() >= rate {
            *m = scale;
        }
    }
    let out = x.hadamard(&mask)?;
    Ok((out, mask))
}

/// [`dropout`] without materializing the mask, for callers that never
/// backpropagate through the dropped tensor. Draws the same random
/// sequence and returns a bit-identical dropped matrix.
pub fn dropout_no_mask(
    x: &DenseMatrix,
    rate: f64,
    rng: &mut RngState,
    training: bool,
) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if !training || rate == 0.0 {
        return Ok(x.clone());
    }
    let scale = 1.0 / (1.0 - rate);
    let mut out = DenseMatrix::zeros(x.rows, x.cols);
    for (o, &v) in out.data.iter_mut().zip(x.data()) {
        let m = if rng.uniform() >= rate { scale } else { 0.0 };
        *o = v * m;
    }
    Ok(out)
}

/// KL(N(mu, diag(exp(log_var))) || N(0, I)) = 1/2 * sum(mu^2 + e^lv - lv - 1).
///
/// `log_var` entries are clamped to [-10, 10] before use.
pub fn gaussian_kl(mu: &[f64], log_var: &[f64]) -> Result<f64> {
    if mu.len() != log_var.len() {
        return Err(Error::shape(
            "gaussian_kl",
            format!("mu len {} vs log_var len {}", mu.len(), log_var.len()),
        ));
    }
    let mut s = 0.0;
    for (&m, &lv) in mu.iter().zip(log_var) {
        let lv = lv.clamp(-10.0, 10.0);
        s += m * m + lv.exp() - lv - 1.0;
    }
    Ok(0.5 * s)
}

/// Glorot-uniform initialization: U(-a, a) with a = sqrt(6 / (rows + cols)).
pub fn glorot_uniform(rows: usize, cols: usize, rng: &mut RngState) -> DenseMatrix {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    let mut out = DenseMatrix::zeros(rows, cols);
    for v in out.data.iter_mut() {
        *v = (rng.uniform() * 2.0 - 1.0) * a;
    }
    out
}
