//! Dense exact linear algebra over F_p.
//!
//! [`DenseMatrix`] stores reduced residues row-major. The multiplication
//! kernels come in three flavors: a cubic reference kernel
//! ([`mat_mul_naive`]), recursive Strassen on squares ([`mat_mul_strassen`]),
//! and a blocked rectangular wrapper ([`mat_mul_rect`]) that tiles the long
//! side of a rectangular product into square blocks. [`tri_inverse`] inverts
//! triangular matrices by half-splitting, and [`schur_update`] performs the
//! batched column elimination used by the blocked reductions.
//!
//! Every kernel takes an [`OpCounter`] and adds its exact field-operation
//! tallies in bulk; counts are deterministic functions of the input shapes
//! and contents.

use crate::field::{ff_inv, FieldContext, FieldElement};
use thiserror::Error;

/// Errors from matrix construction and kernels.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    /// Operand shapes do not compose.
    #[error("dimension mismatch: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    /// `tri_inverse` was given a matrix with nonzeros on the wrong side.
    #[error("matrix is not {0:?}-triangular")]
    NotTriangular(Triangle),
    /// `tri_inverse` was given a triangular matrix with a zero diagonal entry.
    #[error("triangular matrix is singular: zero diagonal at index {0}")]
    SingularMatrix(usize),
    /// The index vector is not a bijection on `0..len`.
    #[error("index array is not a permutation of 0..{0}")]
    NotPermutation(usize),
}

/// Which half of a triangular matrix holds the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    /// Nonzeros on or below the diagonal.
    Lower,
    /// Nonzeros on or above the diagonal.
    Upper,
}

/// Running tallies of field operations, accumulated in bulk by the kernels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    /// Field multiplications.
    pub mul_count: u64,
    /// Field additions and subtractions.
    pub add_count: u64,
    /// Field inversions.
    pub inv_count: u64,
}

impl OpCounter {
    /// A fresh all-zero counter.
    pub fn new() -> OpCounter {
        OpCounter::default()
    }

    /// Folds another counter's tallies into this one.
    pub fn absorb(&mut self, other: &OpCounter) {
        self.mul_count += other.mul_count;
        self.add_count += other.add_count;
        self.inv_count += other.inv_count;
    }
}

/// A row-major dense matrix of reduced residues in the field of `ctx`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
    ctx: FieldContext,
}

impl DenseMatrix {
    /// The zero matrix of the given shape.
    pub fn zeros(ctx: &FieldContext, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
            ctx: ctx.clone(),
        }
    }

    /// The n×n identity.
    pub fn identity(ctx: &FieldContext, n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from unreduced row data (test convenience).
    pub fn from_rows(ctx: &FieldContext, rows: &[Vec<u64>]) -> DenseMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = DenseMatrix::zeros(ctx, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged row data");
            for (j, &v) in row.iter().enumerate() {
                m.data[i * c + j] = ctx.element(v).value();
            }
        }
        m
    }

    /// Row count.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The field this matrix lives over.
    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    /// Element at (i, j).
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.ctx.element(self.at(i, j) as u64)
    }

    /// Stores an element at (i, j).
    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        let c = self.cols;
        self.data[i * c + j] = v.value();
    }

    /// Raw reduced residue at (i, j).
    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> u32 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    /// Stores a raw residue (must already be reduced) at (i, j).
    #[inline(always)]
    pub fn set_raw(&mut self, i: usize, j: usize, v: u32) {
        debug_assert!(i < self.rows && j < self.cols && v < self.ctx.modulus());
        let c = self.cols;
        self.data[i * c + j] = v;
    }

    /// Whether column `j` is entirely zero.
    pub fn col_is_zero(&self, j: usize) -> bool {
        (0..self.rows).all(|i| self.at(i, j) == 0)
    }

    /// Swaps columns `a` and `b` in place.
    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Swaps rows `a` and `b` in place.
    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Copies out the submatrix indexed by `row_set` × `col_set`, in the
    /// order the index sets list them.
    pub fn extract(&self, row_set: &IndexSet, col_set: &IndexSet) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(&self.ctx, row_set.len(), col_set.len());
        for (oi, &i) in row_set.iter().enumerate() {
            for (oj, &j) in col_set.iter().enumerate() {
                out.data[oi * out.cols + oj] = self.at(i, j);
            }
        }
        out
    }

    /// Copies `block` into the positions `row_set` × `col_set`.
    pub fn scatter(&mut self, row_set: &IndexSet, col_set: &IndexSet, block: &DenseMatrix) {
        debug_assert_eq!(block.rows, row_set.len());
        debug_assert_eq!(block.cols, col_set.len());
        for (bi, &i) in row_set.iter().enumerate() {
            for (bj, &j) in col_set.iter().enumerate() {
                let v = block.at(bi, bj);
                self.set_raw(i, j, v);
            }
        }
    }

    /// Copies this matrix into the top-left corner of a larger zero matrix.
    pub fn pad_to(&self, rows: usize, cols: usize) -> DenseMatrix {
        assert!(rows >= self.rows && cols >= self.cols);
        let mut out = DenseMatrix::zeros(&self.ctx, rows, cols);
        for i in 0..self.rows {
            let src = i * self.cols;
            let dst = i * cols;
            out.data[dst..dst + self.cols].copy_from_slice(&self.data[src..src + self.cols]);
        }
        out
    }

    /// Copies out the top-left `rows` × `cols` corner.
    pub fn shrink_to(&self, rows: usize, cols: usize) -> DenseMatrix {
        assert!(rows <= self.rows && cols <= self.cols);
        let mut out = DenseMatrix::zeros(&self.ctx, rows, cols);
        for i in 0..rows {
            let src = i * self.cols;
            let dst = i * cols;
            out.data[dst..dst + cols].copy_from_slice(&self.data[src..src + cols]);
        }
        out
    }

    /// Column axpy: `col[target] += coef · col[source]`, with `coef` a
    /// reduced residue. Counts one multiply and one add per row.
    pub fn col_addmul(&mut self, target: usize, source: usize, coef: u32, counter: &mut OpCounter) {
        debug_assert!(target != source && coef < self.ctx.modulus());
        if coef == 0 {
            return;
        }
        let p = self.ctx.modulus() as u64;
        let c = self.cols;
        for i in 0..self.rows {
            let s = self.data[i * c + source] as u64;
            let t = self.data[i * c + target] as u64;
            self.data[i * c + target] = ((t + coef as u64 * s) % p) as u32;
        }
        counter.mul_count += self.rows as u64;
        counter.add_count += self.rows as u64;
    }

    /// Row axpy: `row[target] += coef · row[source]`. Counts one multiply
    /// and one add per column.
    pub fn row_addmul(&mut self, target: usize, source: usize, coef: u32, counter: &mut OpCounter) {
        debug_assert!(target != source && coef < self.ctx.modulus());
        if coef == 0 {
            return;
        }
        let p = self.ctx.modulus() as u64;
        let c = self.cols;
        for j in 0..c {
            let s = self.data[source * c + j] as u64;
            let t = self.data[target * c + j] as u64;
            self.data[target * c + j] = ((t + coef as u64 * s) % p) as u32;
        }
        counter.mul_count += c as u64;
        counter.add_count += c as u64;
    }

    /// Whether every off-diagonal entry on the wrong side of `tri` is zero.
    pub fn is_triangular(&self, tri: Triangle) -> bool {
        (0..self.rows).all(|i| {
            (0..self.cols).all(|j| {
                let wrong_side = match tri {
                    Triangle::Lower => j > i,
                    Triangle::Upper => j < i,
                };
                !wrong_side || self.at(i, j) == 0
            })
        })
    }
}

/// An ordered list of distinct indices; order is meaningful and preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Wraps an index list. Indices must be pairwise distinct.
    pub fn new(indices: Vec<usize>) -> IndexSet {
        debug_assert!(
            {
                let mut seen = indices.clone();
                seen.sort_unstable();
                seen.windows(2).all(|w| w[0] != w[1])
            },
            "IndexSet indices must be distinct"
        );
        IndexSet(indices)
    }

    /// Number of indices.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether the set is empty.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Iterates the indices in order.
    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    /// The index at position `i`.
    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Appends an index, which must not already be present.
    pub fn push(&mut self, v: usize) {
        debug_assert!(!self.0.contains(&v), "indices must stay distinct");
        self.0.push(v);
    }

    /// The underlying slice.
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// A permutation of `0..len`, stored as the image array: `map[i]` is where
/// index `i` is sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    /// Validates that `map` is a bijection on `0..map.len()`.
    pub fn new(map: Vec<usize>) -> Result<Permutation, MatrixError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(MatrixError::NotPermutation(n));
            }
            seen[v] = true;
        }
        Ok(Permutation(map))
    }

    /// The identity permutation on `0..n`.
    pub fn identity(n: usize) -> Permutation {
        Permutation((0..n).collect())
    }

    /// Domain size.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether the domain is empty.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Image of `i`.
    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Swaps the images of `a` and `b` (post-composes with a transposition).
    pub fn swap_images(&mut self, a: usize, b: usize) {
        self.0.swap(a, b);
    }

    /// The inverse permutation.
    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }
}

/// Moves row `i` of `m` to row `perm.image(i)` of the result.
pub fn apply_row_perm(perm: &Permutation, m: &DenseMatrix) -> DenseMatrix {
    assert_eq!(perm.len(), m.rows(), "permutation length must match rows");
    let mut out = DenseMatrix::zeros(m.ctx(), m.rows(), m.cols());
    for i in 0..m.rows() {
        let dst = perm.image(i);
        for j in 0..m.cols() {
            out.set_raw(dst, j, m.at(i, j));
        }
    }
    out
}

/// Moves column `j` of `m` to column `perm.image(j)` of the result.
pub fn apply_col_perm(perm: &Permutation, m: &DenseMatrix) -> DenseMatrix {
    assert_eq!(perm.len(), m.cols(), "permutation length must match columns");
    let mut out = DenseMatrix::zeros(m.ctx(), m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set_raw(i, perm.image(j), m.at(i, j));
        }
    }
    out
}

fn shape_err(a: &DenseMatrix, b: &DenseMatrix) -> MatrixError {
    MatrixError::DimensionMismatch {
        left_rows: a.rows(),
        left_cols: a.cols(),
        right_rows: b.rows(),
        right_cols: b.cols(),
    }
}

/// Cubic schoolbook product; the oracle the blocked kernels are tested
/// against. Inner products accumulate in u64 (p < 2^16 keeps 2^11 terms far
/// from overflow) and reduce once per entry.
pub fn mat_mul_naive(
    a: &DenseMatrix,
    b: &DenseMatrix,
    counter: &mut OpCounter,
) -> Result<DenseMatrix, MatrixError> {
    if a.cols() != b.rows() {
        return Err(shape_err(a, b));
    }
    debug_assert_eq!(a.ctx(), b.ctx());
    let (r, k, c) = (a.rows(), a.cols(), b.cols());
    let p = a.ctx().modulus() as u64;
    let mut out = DenseMatrix::zeros(a.ctx(), r, c);
    for i in 0..r {
        for j in 0..c {
            let mut acc = 0u64;
            for t in 0..k {
                acc += a.at(i, t) as u64 * b.at(t, j) as u64;
            }
            out.data[i * c + j] = (acc % p) as u32;
        }
    }
    counter.mul_count += (r * k * c) as u64;
    counter.add_count += (r * k * c) as u64;
    Ok(out)
}

fn ew_add(a: &DenseMatrix, b: &DenseMatrix, counter: &mut OpCounter) -> DenseMatrix {
    debug_assert!(a.rows == b.rows && a.cols == b.cols);
    let p = a.ctx.modulus();
    let mut out = a.clone();
    for (x, &y) in out.data.iter_mut().zip(&b.data) {
        let s = *x + y;
        *x = if s >= p { s - p } else { s };
    }
    counter.add_count += a.data.len() as u64;
    out
}

fn ew_sub(a: &DenseMatrix, b: &DenseMatrix, counter: &mut OpCounter) -> DenseMatrix {
    debug_assert!(a.rows == b.rows && a.cols == b.cols);
    let p = a.ctx.modulus();
    let mut out = a.clone();
    for (x, &y) in out.data.iter_mut().zip(&b.data) {
        *x = if *x >= y { *x - y } else { *x + p - y };
    }
    counter.add_count += a.data.len() as u64;
    out
}

/// `dst -= src`, in place.
fn ew_sub_assign(dst: &mut DenseMatrix, src: &DenseMatrix, counter: &mut OpCounter) {
    debug_assert!(dst.rows == src.rows && dst.cols == src.cols);
    let p = dst.ctx.modulus();
    for (x, &y) in dst.data.iter_mut().zip(&src.data) {
        *x = if *x >= y { *x - y } else { *x + p - y };
    }
    counter.add_count += src.data.len() as u64;
}

/// `dst += src`, in place.
fn ew_add_assign(dst: &mut DenseMatrix, src: &DenseMatrix, counter: &mut OpCounter) {
    debug_assert!(dst.rows == src.rows && dst.cols == src.cols);
    let p = dst.ctx.modulus();
    for (x, &y) in dst.data.iter_mut().zip(&src.data) {
        let s = *x + y;
        *x = if s >= p { s - p } else { s };
    }
    counter.add_count += src.data.len() as u64;
}

fn quadrant(m: &DenseMatrix, qi: usize, qj: usize) -> DenseMatrix {
    let h = m.rows / 2;
    let mut out = DenseMatrix::zeros(&m.ctx, h, h);
    for i in 0..h {
        let src = (qi * h + i) * m.cols + qj * h;
        let dst = i * h;
        out.data[dst..dst + h].copy_from_slice(&m.data[src..src + h]);
    }
    out
}

fn assemble(c11: DenseMatrix, c12: DenseMatrix, c21: DenseMatrix, c22: DenseMatrix) -> DenseMatrix {
    let h = c11.rows;
    let n = 2 * h;
    let mut out = DenseMatrix::zeros(&c11.ctx, n, n);
    for i in 0..h {
        out.data[i * n..i * n + h].copy_from_slice(&c11.data[i * h..(i + 1) * h]);
        out.data[i * n + h..(i + 1) * n].copy_from_slice(&c12.data[i * h..(i + 1) * h]);
        let bi = (h + i) * n;
        out.data[bi..bi + h].copy_from_slice(&c21.data[i * h..(i + 1) * h]);
        out.data[bi + h..bi + n].copy_from_slice(&c22.data[i * h..(i + 1) * h]);
    }
    out
}

/// Recursive step on power-of-two squares.
fn strassen_rec(
    a: &DenseMatrix,
    b: &DenseMatrix,
    cutoff: usize,
    counter: &mut OpCounter,
) -> DenseMatrix {
    let n = a.rows;
    if n <= cutoff {
        return mat_mul_naive(a, b, counter).expect("square operands compose");
    }
    let (a11, a12, a21, a22) = (
        quadrant(a, 0, 0),
        quadrant(a, 0, 1),
        quadrant(a, 1, 0),
        quadrant(a, 1, 1),
    );
    let (b11, b12, b21, b22) = (
        quadrant(b, 0, 0),
        quadrant(b, 0, 1),
        quadrant(b, 1, 0),
        quadrant(b, 1, 1),
    );
    let m1 = strassen_rec(
        &ew_add(&a11, &a22, counter),
        &ew_add(&b11, &b22, counter),
        cutoff,
        counter,
    );
    let m2 = strassen_rec(&ew_add(&a21, &a22, counter), &b11, cutoff, counter);
    let m3 = strassen_rec(&a11, &ew_sub(&b12, &b22, counter), cutoff, counter);
    let m4 = strassen_rec(&a22, &ew_sub(&b21, &b11, counter), cutoff, counter);
    let m5 = strassen_rec(&ew_add(&a11, &a12, counter), &b22, cutoff, counter);
    let m6 = strassen_rec(
        &ew_sub(&a21, &a11, counter),
        &ew_add(&b11, &b12, counter),
        cutoff,
        counter,
    );
    let m7 = strassen_rec(
        &ew_sub(&a12, &a22, counter),
        &ew_add(&b21, &b22, counter),
        cutoff,
        counter,
    );
    let c11 = ew_add(&ew_sub(&ew_add(&m1, &m4, counter), &m5, counter), &m7, counter);
    let c12 = ew_add(&m3, &m5, counter);
    let c21 = ew_add(&m2, &m4, counter);
    let c22 = ew_add(&ew_add(&ew_sub(&m1, &m2, counter), &m3, counter), &m6, counter);
    assemble(c11, c12, c21, c22)
}

/// Strassen product of equal-size square matrices. Pads internally to the
/// next power of two; below `cutoff` the schoolbook kernel takes over.
pub fn mat_mul_strassen(
    a: &DenseMatrix,
    b: &DenseMatrix,
    cutoff: usize,
    counter: &mut OpCounter,
) -> Result<DenseMatrix, MatrixError> {
    if a.rows() != a.cols() || b.rows() != b.cols() || a.cols() != b.rows() {
        return Err(shape_err(a, b));
    }
    debug_assert_eq!(a.ctx(), b.ctx());
    let n = a.rows();
    if n == 0 {
        return Ok(DenseMatrix::zeros(a.ctx(), 0, 0));
    }
    let cutoff = cutoff.max(1);
    if n <= cutoff {
        return mat_mul_naive(a, b, counter);
    }
    let full = n.next_power_of_two();
    if full == n {
        return Ok(strassen_rec(a, b, cutoff, counter));
    }
    let prod = strassen_rec(&a.pad_to(full, full), &b.pad_to(full, full), cutoff, counter);
    Ok(prod.shrink_to(n, n))
}

/// Blocked rectangular product where the shared dimension `k` is the block
/// size: the `r`×`k` by `k`×`c` product is tiled into ⌈r/k⌉·⌈c/k⌉ square
/// k×k Strassen products (partial edge tiles are zero-padded).
pub fn mat_mul_rect(
    a: &DenseMatrix,
    b: &DenseMatrix,
    cutoff: usize,
    counter: &mut OpCounter,
) -> Result<DenseMatrix, MatrixError> {
    if a.cols() != b.rows() {
        return Err(shape_err(a, b));
    }
    debug_assert_eq!(a.ctx(), b.ctx());
    let (r, k, c) = (a.rows(), a.cols(), b.cols());
    let mut out = DenseMatrix::zeros(a.ctx(), r, c);
    if r == 0 || k == 0 || c == 0 {
        return Ok(out);
    }
    for bi in 0..r.div_ceil(k) {
        let i0 = bi * k;
        let bh = k.min(r - i0);
        let mut a_tile = DenseMatrix::zeros(a.ctx(), k, k);
        for i in 0..bh {
            let src = (i0 + i) * k;
            a_tile.data[i * k..(i + 1) * k].copy_from_slice(&a.data[src..src + k]);
        }
        for bj in 0..c.div_ceil(k) {
            let j0 = bj * k;
            let bw = k.min(c - j0);
            let mut b_tile = DenseMatrix::zeros(a.ctx(), k, k);
            for t in 0..k {
                let src = t * c + j0;
                b_tile.data[t * k..t * k + bw].copy_from_slice(&b.data[src..src + bw]);
            }
            let prod = mat_mul_strassen(&a_tile, &b_tile, cutoff, counter)?;
            for i in 0..bh {
                let dst = (i0 + i) * c + j0;
                out.data[dst..dst + bw].copy_from_slice(&prod.data[i * k..i * k + bw]);
            }
        }
    }
    Ok(out)
}

/// Negates a matrix in place (counted as additions).
fn negate_in_place(m: &mut DenseMatrix, counter: &mut OpCounter) {
    let p = m.ctx.modulus();
    for x in m.data.iter_mut() {
        if *x != 0 {
            *x = p - *x;
        }
    }
    counter.add_count += m.data.len() as u64;
}

/// Recursive triangular inversion on power-of-two sizes.
///
/// Lower: [[B, 0], [C, D]]⁻¹ = [[B⁻¹, 0], [−D⁻¹·C·B⁻¹, D⁻¹]].
/// Upper: [[B, C], [0, D]]⁻¹ = [[B⁻¹, −B⁻¹·C·D⁻¹], [0, D⁻¹]].
fn tri_inverse_rec(
    m: &DenseMatrix,
    tri: Triangle,
    cutoff: usize,
    counter: &mut OpCounter,
) -> DenseMatrix {
    let n = m.rows;
    if n == 1 {
        counter.inv_count += 1;
        let inv = ff_inv(&m.ctx, m.get(0, 0)).expect("diagonal checked nonzero");
        let mut out = DenseMatrix::zeros(&m.ctx, 1, 1);
        out.set(0, 0, inv);
        return out;
    }
    let b = quadrant(m, 0, 0);
    let d = quadrant(m, 1, 1);
    let b_inv = tri_inverse_rec(&b, tri, cutoff, counter);
    let d_inv = tri_inverse_rec(&d, tri, cutoff, counter);
    let h = n / 2;
    let zero = DenseMatrix::zeros(&m.ctx, h, h);
    match tri {
        Triangle::Lower => {
            let c = quadrant(m, 1, 0);
            let t = strassen_rec(&c, &b_inv, cutoff, counter);
            let mut off = strassen_rec(&d_inv, &t, cutoff, counter);
            negate_in_place(&mut off, counter);
            assemble(b_inv, zero, off, d_inv)
        }
        Triangle::Upper => {
            let c = quadrant(m, 0, 1);
            let t = strassen_rec(&c, &d_inv, cutoff, counter);
            let mut off = strassen_rec(&b_inv, &t, cutoff, counter);
            negate_in_place(&mut off, counter);
            assemble(b_inv, off, zero, d_inv)
        }
    }
}

/// Inverts a triangular matrix exactly by recursive half-splitting; the two
/// half-size products per level use Strassen with the given cutoff.
/// Non-power-of-two sizes are extended with an identity block first.
pub fn tri_inverse(
    m: &DenseMatrix,
    tri: Triangle,
    cutoff: usize,
    counter: &mut OpCounter,
) -> Result<DenseMatrix, MatrixError> {
    if m.rows() != m.cols() {
        return Err(shape_err(m, m));
    }
    if !m.is_triangular(tri) {
        return Err(MatrixError::NotTriangular(tri));
    }
    let n = m.rows();
    for i in 0..n {
        if m.at(i, i) == 0 {
            return Err(MatrixError::SingularMatrix(i));
        }
    }
    if n == 0 {
        return Ok(m.clone());
    }
    let cutoff = cutoff.max(1);
    let full = n.next_power_of_two();
    if full == n {
        return Ok(tri_inverse_rec(m, tri, cutoff, counter));
    }
    // Padding with an identity block keeps the matrix triangular and
    // nonsingular, and the inverse of the padded block is the padded inverse.
    let mut padded = m.pad_to(full, full);
    for i in n..full {
        padded.set_raw(i, i, 1);
    }
    Ok(tri_inverse_rec(&padded, tri, cutoff, counter).shrink_to(n, n))
}

/// Batched column elimination. With `L` the pivot rows of the already-reduced
/// columns `B` (listed in B's order) and `Lbar` the remaining rows, computes
///
///   Λ = R[L,B]⁻¹ · R[L,C],
///   R[Lbar,C] −= R[Lbar,B] · Λ,
///   R[L,C] ← 0,
///
/// mutating `r` in place and returning Λ. R[L,B] must be lower triangular
/// with nonzero diagonal in the given orders (the caller's pivot structure
/// guarantees this).
pub fn schur_update(
    r: &mut DenseMatrix,
    lbar: &IndexSet,
    l: &IndexSet,
    b: &IndexSet,
    c: &IndexSet,
    cutoff: usize,
    counter: &mut OpCounter,
) -> Result<DenseMatrix, MatrixError> {
    let rlb = r.extract(l, b);
    let rlc = r.extract(l, c);
    let rlb_inv = tri_inverse(&rlb, Triangle::Lower, cutoff, counter)?;
    let lambda = mat_mul_rect(&rlb_inv, &rlc, cutoff, counter)?;
    let rlbarb = r.extract(lbar, b);
    let update = mat_mul_rect(&rlbarb, &lambda, cutoff, counter)?;
    let mut rlbarc = r.extract(lbar, c);
    ew_sub_assign(&mut rlbarc, &update, counter);
    r.scatter(lbar, c, &rlbarc);
    let zeros = DenseMatrix::zeros(r.ctx(), l.len(), c.len());
    r.scatter(l, c, &zeros);
    Ok(lambda)
}

/// `dst[rows, cols] += block` helper for the blocked reductions.
pub fn add_into(
    dst: &mut DenseMatrix,
    row_set: &IndexSet,
    col_set: &IndexSet,
    block: &DenseMatrix,
    counter: &mut OpCounter,
) {
    let mut cur = dst.extract(row_set, col_set);
    ew_add_assign(&mut cur, block, counter);
    dst.scatter(row_set, col_set, &cur);
}

/// `dst[row_set, col_set] -= block`, entries paired in set order.
pub fn sub_into(
    dst: &mut DenseMatrix,
    row_set: &IndexSet,
    col_set: &IndexSet,
    block: &DenseMatrix,
    counter: &mut OpCounter,
) {
    let mut cur = dst.extract(row_set, col_set);
    ew_sub_assign(&mut cur, block, counter);
    dst.scatter(row_set, col_set, &cur);
}
