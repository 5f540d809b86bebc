//! Five interchangeable algorithms computing the R = D·V decomposition of a
//! filtration boundary matrix.
//!
//! Every reducer turns the strictly upper triangular matrix D into a
//! column-reduced R (distinct pivot rows) together with a unit upper
//! triangular V satisfying R = D·V exactly, plus U = V⁻¹:
//!
//! - [`reduce_lazy`] sweeps columns left to right and cancels each pivot
//!   collision as it appears.
//! - [`reduce_exhaustive`] additionally clears every pivot row to the right,
//!   so reduced columns stay untouched afterwards.
//! - [`reduce_row_incremental`] sweeps rows bottom to top and reproduces the
//!   lazy output bit for bit.
//! - [`reduce_fast_column`] blocks the exhaustive elimination into a binary
//!   recursion over columns whose cross-block work is batched into matrix
//!   products, on a square padding with an identity block that supplies a
//!   swap target for every zero column.
//! - [`reduce_fast_row`] blocks the row sweep the same way, recording
//!   elimination coefficients in a matrix Λ from which U = 2·I − Λ is read
//!   off at the end.
//!
//! The two blocked reducers take a `leaf_size` (columns/rows handled by the
//! plain incremental step at the recursion base) and a Strassen cutoff for
//! the inner multiplications. Their outputs are bit-identical to their plain
//! counterparts: fast column ≡ exhaustive, fast row ≡ lazy.

use crate::field::{ff_inv, ff_mul, ff_neg, FieldContext};
use crate::filtration::BoundaryMatrix;
use crate::matrix::{
    add_into, mat_mul_rect, schur_update, sub_into, tri_inverse, DenseMatrix, IndexSet,
    MatrixError, OpCounter, Permutation, Triangle,
};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Failures inside a reduction run.
#[derive(Debug, Error)]
pub enum ReductionError {
    /// A structural invariant the algorithms guarantee by construction was
    /// observed to fail; this signals an implementation bug, never a
    /// property of valid input.
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
    /// A matrix kernel rejected its operands.
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

fn internal(msg: impl Into<String>) -> ReductionError {
    ReductionError::InternalInvariantViolation(msg.into())
}

/// Which elimination discipline produced a decomposition. Lazy-mode R may
/// keep nonzero entries in pivot rows right of the pivot; exhaustive-mode R
/// never does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionMode {
    Lazy,
    Exhaustive,
}

/// Selects one of the five reducers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Lazy,
    Exhaustive,
    RowIncremental,
    FastColumn,
    FastRow,
}

impl Algorithm {
    /// All algorithms, in a fixed order convenient for cross-checking.
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Lazy,
        Algorithm::Exhaustive,
        Algorithm::RowIncremental,
        Algorithm::FastColumn,
        Algorithm::FastRow,
    ];

    /// Kebab-case name, as accepted on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lazy => "lazy",
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::RowIncremental => "row-incremental",
            Algorithm::FastColumn => "fast-column",
            Algorithm::FastRow => "fast-row",
        }
    }

    /// The discipline of the decomposition this algorithm produces.
    pub fn mode(self) -> ReductionMode {
        match self {
            Algorithm::Lazy | Algorithm::RowIncremental | Algorithm::FastRow => {
                ReductionMode::Lazy
            }
            Algorithm::Exhaustive | Algorithm::FastColumn => ReductionMode::Exhaustive,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Algorithm, String> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown algorithm {s:?}; expected one of lazy, exhaustive, \
                     row-incremental, fast-column, fast-row"
                )
            })
    }
}

/// The result of any reduction: R = D·V with V unit upper triangular,
/// U = V⁻¹, and the pivot row of each nonzero column of R.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub r: DenseMatrix,
    pub v: DenseMatrix,
    pub u: DenseMatrix,
    /// Per column of R: the largest row holding a nonzero entry.
    pub low_map: Vec<Option<usize>>,
    pub mode: ReductionMode,
    /// Original column count (paddings and permutations already undone).
    pub n: usize,
    pub counter: OpCounter,
}

/// The largest row with a nonzero entry in column `j`, if any.
pub fn low(r: &DenseMatrix, j: usize) -> Option<usize> {
    (0..r.rows()).rev().find(|&i| r.at(i, j) != 0)
}

/// The earliest column whose lowest nonzero entry sits in row `i`, if any.
pub fn lft(r: &DenseMatrix, i: usize) -> Option<usize> {
    (0..r.cols()).find(|&j| r.at(i, j) != 0 && low(r, j) == Some(i))
}

/// Runs the selected algorithm. `leaf_size` and `strassen_cutoff` only
/// affect the two blocked reducers (and never their outputs).
pub fn reduce(
    dm: &BoundaryMatrix,
    algorithm: Algorithm,
    leaf_size: usize,
    strassen_cutoff: usize,
) -> Result<Decomposition, ReductionError> {
    match algorithm {
        Algorithm::Lazy => Ok(reduce_lazy(dm)),
        Algorithm::Exhaustive => Ok(reduce_exhaustive(dm)),
        Algorithm::RowIncremental => Ok(reduce_row_incremental(dm)),
        Algorithm::FastColumn => reduce_fast_column(dm, leaf_size, strassen_cutoff),
        Algorithm::FastRow => reduce_fast_row(dm, leaf_size, strassen_cutoff),
    }
}

fn finish(
    r: DenseMatrix,
    v: DenseMatrix,
    u: DenseMatrix,
    mode: ReductionMode,
    counter: OpCounter,
) -> Decomposition {
    let n = r.cols();
    let low_map = (0..n).map(|j| low(&r, j)).collect();
    Decomposition {
        r,
        v,
        u,
        low_map,
        mode,
        n,
        counter,
    }
}

fn empty_decomposition(ctx: &FieldContext, mode: ReductionMode) -> Decomposition {
    finish(
        DenseMatrix::zeros(ctx, 0, 0),
        DenseMatrix::identity(ctx, 0),
        DenseMatrix::identity(ctx, 0),
        mode,
        OpCounter::new(),
    )
}

/// Left-to-right column reduction: while column `j` shares its pivot row
/// with an earlier column `j'`, subtract α·column j' with α chosen to cancel
/// the entry. V follows every column operation; U absorbs the inverse
/// operation as a row addition (here equivalent to setting U[j',j] = α,
/// since row j of U is still untouched when the collision occurs).
pub fn reduce_lazy(dm: &BoundaryMatrix) -> Decomposition {
    let n = dm.n();
    let ctx = dm.ctx().clone();
    let mut r = dm.matrix().clone();
    let mut v = DenseMatrix::identity(&ctx, n);
    let mut u = DenseMatrix::identity(&ctx, n);
    let mut counter = OpCounter::new();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        while let Some(i) = low(&r, j) {
            let Some(jp) = owner[i] else {
                owner[i] = Some(j);
                break;
            };
            let pinv = ff_inv(&ctx, r.get(i, jp)).expect("pivot entries are nonzero");
            let alpha = ff_mul(&ctx, r.get(i, j), pinv);
            counter.inv_count += 1;
            counter.mul_count += 1;
            let neg = ff_neg(&ctx, alpha).value();
            r.col_addmul(j, jp, neg, &mut counter);
            v.col_addmul(j, jp, neg, &mut counter);
            u.row_addmul(jp, j, alpha.value(), &mut counter);
        }
    }
    finish(r, v, u, ReductionMode::Lazy, counter)
}

/// Left-to-right reduction that, once column `j` settles on pivot row `i`,
/// cancels R[i,j'] for every j' > j immediately. No collision loop is
/// needed: a cleared pivot row can never regain an entry, because every
/// later subtraction uses a pivot column that is already zero in all
/// earlier pivot rows. U absorbs each inverse operation as a full row
/// addition (not merely setting U[j,j'] = α — row j' may already be
/// nontrivial).
pub fn reduce_exhaustive(dm: &BoundaryMatrix) -> Decomposition {
    let n = dm.n();
    let ctx = dm.ctx().clone();
    let mut r = dm.matrix().clone();
    let mut v = DenseMatrix::identity(&ctx, n);
    let mut u = DenseMatrix::identity(&ctx, n);
    let mut counter = OpCounter::new();
    for j in 0..n {
        if let Some(i) = low(&r, j) {
            let pinv = ff_inv(&ctx, r.get(i, j)).expect("pivot entries are nonzero");
            counter.inv_count += 1;
            for jp in j + 1..n {
                let e = r.get(i, jp);
                if e.is_zero() {
                    continue;
                }
                let alpha = ff_mul(&ctx, e, pinv);
                counter.mul_count += 1;
                let neg = ff_neg(&ctx, alpha).value();
                r.col_addmul(jp, j, neg, &mut counter);
                v.col_addmul(jp, j, neg, &mut counter);
                u.row_addmul(j, jp, alpha.value(), &mut counter);
            }
        }
    }
    finish(r, v, u, ReductionMode::Exhaustive, counter)
}

/// Bottom-to-top row sweep: for each row `i` owning a pivot column
/// `j = lft(i)`, subtract column j from every later column whose lowest
/// entry also sits in row i. Produces the lazy decomposition bit for bit
/// (the same eliminations fire, grouped by row instead of by column).
pub fn reduce_row_incremental(dm: &BoundaryMatrix) -> Decomposition {
    let n = dm.n();
    let ctx = dm.ctx().clone();
    let mut r = dm.matrix().clone();
    let mut v = DenseMatrix::identity(&ctx, n);
    let mut u = DenseMatrix::identity(&ctx, n);
    let mut counter = OpCounter::new();
    for i in (0..n).rev() {
        let Some(j) = lft(&r, i) else {
            continue;
        };
        let pinv = ff_inv(&ctx, r.get(i, j)).expect("pivot entries are nonzero");
        counter.inv_count += 1;
        for jp in j + 1..n {
            if r.get(i, jp).is_zero() || low(&r, jp) != Some(i) {
                continue;
            }
            let alpha = ff_mul(&ctx, r.get(i, jp), pinv);
            counter.mul_count += 1;
            let neg = ff_neg(&ctx, alpha).value();
            r.col_addmul(jp, j, neg, &mut counter);
            v.col_addmul(jp, j, neg, &mut counter);
            u.row_addmul(j, jp, alpha.value(), &mut counter);
        }
    }
    finish(r, v, u, ReductionMode::Lazy, counter)
}

/// Working state of the blocked column reduction: the padded matrices, the
/// positions whose zero columns were swapped into the identity block (in
/// swap order), and the accumulated column permutation (position → original
/// column index).
#[derive(Debug, Clone)]
pub struct FastColumnState {
    pub r_padded: DenseMatrix,
    pub v_padded: DenseMatrix,
    pub z: IndexSet,
    pub col_perm: Permutation,
}

struct FastColumnDriver {
    state: FastColumnState,
    /// Pivot row of the column currently at each position, once settled.
    pivot_of_pos: Vec<Option<usize>>,
    /// Settled pivots in processing order, as (row, position).
    pivots: Vec<(usize, usize)>,
    /// Swap partner of the k-th entry of `state.z`.
    swap_partners: Vec<usize>,
    /// Lowest candidate position for the next zero-column swap. Every
    /// position left of it inside the padding range is a zero column, so
    /// the scan never needs to look back.
    spare: usize,
    counter: OpCounter,
    leaf_size: usize,
    cutoff: usize,
    nn: usize,
}

/// Blocked exhaustive reduction.
///
/// D is embedded in an nn×nn matrix (nn the smallest power of two ≥ 3n) as
/// [[D, 0], [0, I]]; the identity block guarantees a fresh pivot for every
/// zero column via a recorded swap. A binary recursion over column ranges
/// reduces the left half, batch-eliminates its pivot rows from the right
/// half with one triangular solve and two products, then reduces the right
/// half. The swaps are undone in reverse and the outputs restricted to the
/// original n columns; the result equals [`reduce_exhaustive`] exactly.
pub fn reduce_fast_column(
    dm: &BoundaryMatrix,
    leaf_size: usize,
    strassen_cutoff: usize,
) -> Result<Decomposition, ReductionError> {
    let n = dm.n();
    let ctx = dm.ctx().clone();
    if n == 0 {
        return Ok(empty_decomposition(&ctx, ReductionMode::Exhaustive));
    }
    let leaf_size = leaf_size.max(1);
    let nn = (3 * n).next_power_of_two();
    let mut r_padded = dm.matrix().pad_to(nn, nn);
    for q in n..nn {
        r_padded.set_raw(q, q, 1);
    }
    let mut driver = FastColumnDriver {
        state: FastColumnState {
            r_padded,
            v_padded: DenseMatrix::identity(&ctx, nn),
            z: IndexSet::new(Vec::new()),
            col_perm: Permutation::identity(nn),
        },
        pivot_of_pos: vec![None; nn],
        pivots: Vec::new(),
        swap_partners: Vec::new(),
        spare: n,
        counter: OpCounter::new(),
        leaf_size,
        cutoff: strassen_cutoff,
        nn,
    };
    driver.reduce_range(0, nn)?;

    let FastColumnDriver {
        mut state,
        swap_partners,
        mut counter,
        ..
    } = driver;
    for k in (0..swap_partners.len()).rev() {
        let a = state.z.get(k);
        let b = swap_partners[k];
        state.r_padded.swap_cols(a, b);
        state.v_padded.swap_cols(a, b);
        state.col_perm.swap_images(a, b);
    }
    debug_assert!(
        (0..nn).all(|q| state.col_perm.image(q) == q),
        "undoing the swap log must restore the identity permutation"
    );
    // The identity block never leaks into the original columns: their R
    // support stays in the original rows and their V support in the
    // original column indices.
    debug_assert!((0..n).all(|j| (n..nn).all(|i| state.r_padded.at(i, j) == 0)));
    debug_assert!((0..n).all(|j| (n..nn).all(|i| state.v_padded.at(i, j) == 0)));
    let r = state.r_padded.shrink_to(n, n);
    let v = state.v_padded.shrink_to(n, n);
    let u = tri_inverse(&v, Triangle::Upper, strassen_cutoff, &mut counter)?;
    Ok(finish(r, v, u, ReductionMode::Exhaustive, counter))
}

impl FastColumnDriver {
    fn reduce_range(&mut self, lo: usize, hi: usize) -> Result<(), ReductionError> {
        if hi - lo <= self.leaf_size {
            self.leaf_block(lo, hi)
        } else {
            let mid = lo + (hi - lo) / 2;
            self.reduce_range(lo, mid)?;
            self.block_update(lo, mid, hi)?;
            self.reduce_range(mid, hi)
        }
    }

    /// Plain exhaustive elimination over a short column range. Cross-block
    /// eliminations were already applied by the enclosing block updates, so
    /// each column either has a fresh pivot or is entirely zero.
    fn leaf_block(&mut self, lo: usize, hi: usize) -> Result<(), ReductionError> {
        for c in lo..hi {
            #[cfg(debug_assertions)]
            for &(row, _) in &self.pivots {
                debug_assert!(
                    self.state.r_padded.at(row, c) == 0,
                    "settled pivot rows must already be cleared at column {c}"
                );
            }
            if self.state.r_padded.col_is_zero(c) {
                self.swap_in_spare(c);
            }
            if let Some(pivot_row) = low(&self.state.r_padded, c) {
                self.pivot_of_pos[c] = Some(pivot_row);
                self.pivots.push((pivot_row, c));
                self.clear_right_within(c, pivot_row, hi);
            }
        }
        Ok(())
    }

    /// Swaps the zero column at `c` with the lowest-index remaining nonzero
    /// column of the padding range. When the spares are exhausted the zero
    /// column simply stays in place (only possible in an all-zero suffix).
    fn swap_in_spare(&mut self, c: usize) {
        self.spare = self.spare.max(c + 1);
        while self.spare < self.nn && self.state.r_padded.col_is_zero(self.spare) {
            self.spare += 1;
        }
        if self.spare >= self.nn {
            return;
        }
        self.state.r_padded.swap_cols(c, self.spare);
        self.state.v_padded.swap_cols(c, self.spare);
        self.state.col_perm.swap_images(c, self.spare);
        self.state.z.push(c);
        self.swap_partners.push(self.spare);
    }

    /// Clears pivot row `pivot_row` in the columns right of `c` within the
    /// current leaf block, mirroring every subtraction onto V.
    fn clear_right_within(&mut self, c: usize, pivot_row: usize, hi: usize) {
        let ctx = self.state.r_padded.ctx().clone();
        let pinv = ff_inv(&ctx, self.state.r_padded.get(pivot_row, c))
            .expect("pivot entries are nonzero");
        self.counter.inv_count += 1;
        for c2 in c + 1..hi {
            let e = self.state.r_padded.get(pivot_row, c2);
            if e.is_zero() {
                continue;
            }
            let alpha = ff_mul(&ctx, e, pinv);
            self.counter.mul_count += 1;
            let neg = ff_neg(&ctx, alpha).value();
            self.state.r_padded.col_addmul(c2, c, neg, &mut self.counter);
            self.state.v_padded.col_addmul(c2, c, neg, &mut self.counter);
        }
    }

    /// Batch-eliminates the pivot rows of the reduced range [lo, mid) from
    /// the columns [mid, hi): with L the pivot rows in B's column order,
    /// solves Λ = R[L,B]⁻¹·R[L,C], subtracts R[·,B]·Λ from R[·,C] (the L
    /// rows become exactly zero), and mirrors the same combination onto V.
    fn block_update(&mut self, lo: usize, mid: usize, hi: usize) -> Result<(), ReductionError> {
        let b_cols: Vec<usize> = (lo..mid).filter(|&q| self.pivot_of_pos[q].is_some()).collect();
        if b_cols.is_empty() {
            return Ok(());
        }
        let l_rows: Vec<usize> = b_cols
            .iter()
            .map(|&q| self.pivot_of_pos[q].expect("filtered on pivoted positions"))
            .collect();
        #[cfg(debug_assertions)]
        self.assert_pivot_block_shape(&b_cols, &l_rows);
        let mut in_l = vec![false; self.nn];
        for &i in &l_rows {
            in_l[i] = true;
        }
        let lbar: Vec<usize> = (0..self.nn).filter(|&i| !in_l[i]).collect();
        let b_set = IndexSet::new(b_cols);
        let l_set = IndexSet::new(l_rows);
        let lbar_set = IndexSet::new(lbar);
        let c_set = IndexSet::new((mid..hi).collect());
        let lambda = schur_update(
            &mut self.state.r_padded,
            &lbar_set,
            &l_set,
            &b_set,
            &c_set,
            self.cutoff,
            &mut self.counter,
        )?;
        let all_rows = IndexSet::new((0..self.nn).collect());
        let vb = self.state.v_padded.extract(&all_rows, &b_set);
        let update = mat_mul_rect(&vb, &lambda, self.cutoff, &mut self.counter)?;
        sub_into(
            &mut self.state.v_padded,
            &all_rows,
            &c_set,
            &update,
            &mut self.counter,
        );
        Ok(())
    }

    /// The pivot block R[L,B] must be lower triangular with a nonzero
    /// diagonal in (L-order, B-order): column b's pivot row is cleared in
    /// every later column by the exhaustive discipline.
    #[cfg(debug_assertions)]
    fn assert_pivot_block_shape(&self, b_cols: &[usize], l_rows: &[usize]) {
        for (s, &row) in l_rows.iter().enumerate() {
            debug_assert!(
                self.state.r_padded.at(row, b_cols[s]) != 0,
                "pivot block diagonal must be nonzero"
            );
            for &col in &b_cols[s + 1..] {
                debug_assert!(
                    self.state.r_padded.at(row, col) == 0,
                    "pivot block must be lower triangular"
                );
            }
        }
    }
}

/// Working state of the blocked row reduction: R padded to
/// [D over 0 | I] with a power-of-two row count, the elimination
/// coefficients Λ kept in permuted coordinates (conjugated at every column
/// transposition), and the accumulated permutation (position → original
/// column index).
#[derive(Debug, Clone)]
pub struct FastRowState {
    pub r_padded: DenseMatrix,
    pub lambda: DenseMatrix,
    pub p: Permutation,
}

struct FastRowDriver {
    state: FastRowState,
    counter: OpCounter,
    leaf_size: usize,
    cutoff: usize,
    m_rows: usize,
    width: usize,
}

/// Blocked lazy reduction, row by row from the bottom.
///
/// D sits in the top rows of an m×(n+m) matrix (m the smallest power of two
/// ≥ n) next to an identity block, so every row owns at least one eligible
/// pivot column. Step t settles row m−1−t: its pivot is the eligible column
/// earliest in the *original* order, moved to position t by a recorded
/// transposition; the coefficients cancelling the rest of the row are
/// written into row t of Λ and the row is zeroed to its right (every such
/// entry is the lowest of its column, because all lower rows are already
/// clear). The recursion batches pending Λ applications with matrix
/// products. Afterwards U = 2·I − Λ, mapped back through the permutation
/// and restricted to the original n columns, with V its triangular inverse;
/// the result equals [`reduce_lazy`] exactly.
pub fn reduce_fast_row(
    dm: &BoundaryMatrix,
    leaf_size: usize,
    strassen_cutoff: usize,
) -> Result<Decomposition, ReductionError> {
    let n = dm.n();
    let ctx = dm.ctx().clone();
    if n == 0 {
        return Ok(empty_decomposition(&ctx, ReductionMode::Lazy));
    }
    let leaf_size = leaf_size.max(1);
    let m_rows = n.next_power_of_two();
    let width = n + m_rows;
    let mut r_padded = dm.matrix().pad_to(m_rows, width);
    for q in 0..m_rows {
        r_padded.set_raw(q, n + q, 1);
    }
    let mut driver = FastRowDriver {
        state: FastRowState {
            r_padded,
            lambda: DenseMatrix::identity(&ctx, width),
            p: Permutation::identity(width),
        },
        counter: OpCounter::new(),
        leaf_size,
        cutoff: strassen_cutoff,
        m_rows,
        width,
    };
    driver.reduce_range(0, m_rows)?;

    let FastRowDriver {
        state, mut counter, ..
    } = driver;
    let col2pos = state.p.inverse();
    // Coefficients only ever flow from a pivot column to a later column of
    // the original order, and never from the identity block into original
    // columns, so the original-column block of Λ is self-contained.
    let mut lambda_orig = DenseMatrix::identity(&ctx, n);
    for c in 0..n {
        for c2 in c + 1..n {
            let val = state.lambda.at(col2pos.image(c), col2pos.image(c2));
            if val != 0 {
                lambda_orig.set_raw(c, c2, val);
            }
        }
        debug_assert!(
            state.lambda.at(col2pos.image(c), col2pos.image(c)) == 1,
            "Λ keeps a unit diagonal"
        );
        debug_assert!(
            (0..c).all(|c2| state.lambda.at(col2pos.image(c), col2pos.image(c2)) == 0),
            "Λ is upper triangular in the original order"
        );
    }
    let u = recover_u(&lambda_orig);
    let v = tri_inverse(&u, Triangle::Upper, strassen_cutoff, &mut counter)?;
    let mut r = DenseMatrix::zeros(&ctx, n, n);
    for c in 0..n {
        let pos = col2pos.image(c);
        for i in 0..n {
            let val = state.r_padded.at(i, pos);
            if val != 0 {
                r.set_raw(i, c, val);
            }
        }
        debug_assert!(
            (n..m_rows).all(|i| state.r_padded.at(i, pos) == 0),
            "original columns never gain support in the padding rows"
        );
    }
    Ok(finish(r, v, u, ReductionMode::Lazy, counter))
}

/// Reads U = 2·I − Λ off a completed coefficient matrix with unit diagonal:
/// the diagonal stays 1 and every off-diagonal entry is negated.
pub fn recover_u(lambda: &DenseMatrix) -> DenseMatrix {
    let ctx = lambda.ctx().clone();
    let n = lambda.rows();
    debug_assert_eq!(lambda.cols(), n);
    let p = ctx.modulus();
    let mut u = DenseMatrix::zeros(&ctx, n, n);
    for i in 0..n {
        for j in 0..n {
            let val = lambda.at(i, j);
            if i == j {
                debug_assert!(val == 1, "Λ must have a unit diagonal");
                u.set_raw(i, i, 1);
            } else if val != 0 {
                u.set_raw(i, j, p - val);
            }
        }
    }
    u
}

impl FastRowDriver {
    fn reduce_range(&mut self, lo: usize, hi: usize) -> Result<(), ReductionError> {
        if hi - lo <= self.leaf_size {
            self.leaf_block(lo, hi)
        } else {
            let mid = lo + (hi - lo) / 2;
            self.reduce_range(lo, mid)?;
            self.row_update(lo, mid, hi)?;
            self.reduce_range(mid, hi)?;
            self.col_update(lo, mid, hi)
        }
    }

    /// Settles rows m−1−lo down to m−1−(hi−1) with the plain incremental
    /// step. Enclosing row updates have already applied every elimination
    /// recorded outside the block, so only this block's own coefficients
    /// need fixing up, row by row, before each pivot step; afterwards the
    /// block's coefficients are propagated to all rows above it.
    fn leaf_block(&mut self, lo: usize, hi: usize) -> Result<(), ReductionError> {
        let ctx = self.state.r_padded.ctx().clone();
        let p = ctx.modulus() as u64;
        for t in lo..hi {
            let row = self.m_rows - 1 - t;
            for b in lo..t {
                let src = self.state.r_padded.at(row, b) as u64;
                if src == 0 {
                    continue;
                }
                let mut ops = 0u64;
                for q in b + 1..self.width {
                    let lam = self.state.lambda.at(b, q) as u64;
                    if lam == 0 {
                        continue;
                    }
                    let cur = self.state.r_padded.at(row, q) as u64;
                    self.state.r_padded.set_raw(row, q, ((cur + src * lam) % p) as u32);
                    ops += 1;
                }
                self.counter.mul_count += ops;
                self.counter.add_count += ops;
            }
            // The pivot is the eligible column earliest in the original
            // order; candidates left of position t are settled pivots of
            // lower rows and cannot be eligible.
            let mut best: Option<(usize, usize)> = None;
            for q in t..self.width {
                if self.state.r_padded.at(row, q) != 0 {
                    let original = self.state.p.image(q);
                    if best.map_or(true, |(cur, _)| original < cur) {
                        best = Some((original, q));
                    }
                }
            }
            let Some((_, qstar)) = best else {
                return Err(internal(format!(
                    "row {row} has no eligible pivot column despite the identity padding"
                )));
            };
            if qstar != t {
                self.state.r_padded.swap_cols(t, qstar);
                self.state.lambda.swap_rows(t, qstar);
                self.state.lambda.swap_cols(t, qstar);
                self.state.p.swap_images(t, qstar);
            }
            let pinv = ff_inv(&ctx, self.state.r_padded.get(row, t))
                .expect("pivot entries are nonzero")
                .value() as u64;
            self.counter.inv_count += 1;
            let mut ops = 0u64;
            for q in t + 1..self.width {
                let e = self.state.r_padded.at(row, q) as u64;
                if e == 0 {
                    continue;
                }
                let alpha = (e * pinv % p) as u32;
                let neg = if alpha == 0 { 0 } else { p as u32 - alpha };
                self.state.lambda.set_raw(t, q, neg);
                self.state.r_padded.set_raw(row, q, 0);
                ops += 1;
            }
            self.counter.mul_count += ops;
        }
        // Propagate this block's coefficients to the rows above the block;
        // the rows below are already zero right of their own pivots, so
        // the operations cannot touch them.
        let top = self.m_rows - hi;
        for b in lo..hi {
            for q in b + 1..hi {
                let lam = self.state.lambda.at(b, q) as u64;
                if lam == 0 {
                    continue;
                }
                for r2 in 0..top {
                    let src = self.state.r_padded.at(r2, b) as u64;
                    if src == 0 {
                        continue;
                    }
                    let cur = self.state.r_padded.at(r2, q) as u64;
                    self.state.r_padded.set_raw(r2, q, ((cur + src * lam) % p) as u32);
                }
                self.counter.mul_count += top as u64;
                self.counter.add_count += top as u64;
            }
        }
        Ok(())
    }

    /// Applies the eliminations recorded at positions [lo, mid) to the rows
    /// the right half is about to settle, at target positions ≥ mid (the
    /// targets inside [lo, mid) were already handled at those rows by the
    /// column updates and block fix-ups of the left half's own recursion).
    fn row_update(&mut self, lo: usize, mid: usize, hi: usize) -> Result<(), ReductionError> {
        let rows_c = IndexSet::new((self.m_rows - hi..self.m_rows - mid).collect());
        let b_set = IndexSet::new((lo..mid).collect());
        let target_set = IndexSet::new((mid..self.width).collect());
        let a = self.state.r_padded.extract(&rows_c, &b_set);
        let lam = self.state.lambda.extract(&b_set, &target_set);
        let update = mat_mul_rect(&a, &lam, self.cutoff, &mut self.counter)?;
        add_into(
            &mut self.state.r_padded,
            &rows_c,
            &target_set,
            &update,
            &mut self.counter,
        );
        Ok(())
    }

    /// Applies the left half's eliminations at target positions [mid, hi)
    /// to every row above the current block, completing those columns
    /// before any enclosing node batches them as sources.
    ///
    /// The coefficients must be composed through the right half's own
    /// eliminations first: at the rows above, the left half's columns are
    /// already final, but a raw Λ[B, C] product would feed stale right-half
    /// columns back into themselves. Multiplying by the inverse of
    /// 2·I − Λ[C, C] (the right half's share of U) folds every chain of
    /// right-half eliminations into a single update, the matrix-product
    /// counterpart of replaying the block fix-up one source at a time.
    fn col_update(&mut self, lo: usize, mid: usize, hi: usize) -> Result<(), ReductionError> {
        let top = self.m_rows - hi;
        if top == 0 {
            return Ok(());
        }
        let rows_set = IndexSet::new((0..top).collect());
        let b_set = IndexSet::new((lo..mid).collect());
        let c_set = IndexSet::new((mid..hi).collect());
        let lam_cc = self.state.lambda.extract(&c_set, &c_set);
        let closure = tri_inverse(
            &recover_u(&lam_cc),
            Triangle::Upper,
            self.cutoff,
            &mut self.counter,
        )?;
        let lam_bc = self.state.lambda.extract(&b_set, &c_set);
        let lam = mat_mul_rect(&lam_bc, &closure, self.cutoff, &mut self.counter)?;
        let a = self.state.r_padded.extract(&rows_set, &b_set);
        let update = mat_mul_rect(&a, &lam, self.cutoff, &mut self.counter)?;
        add_into(
            &mut self.state.r_padded,
            &rows_set,
            &c_set,
            &update,
            &mut self.counter,
        );
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldContext;
    use crate::filtration::{boundary_matrix, parse_filtration};
    use crate::matrix::mat_mul_naive;
    use crate::random::random_filtration;
    use std::collections::HashSet;

    fn ctx(p: u32) -> FieldContext {
        FieldContext::new(p).unwrap()
    }

    fn triangle(p: u32) -> BoundaryMatrix {
        let f = parse_filtration(crate::filtration::tests::triangle_text()).unwrap();
        boundary_matrix(&f, &ctx(p))
    }

    fn random_boundary(n: usize, p: u32, seed: u64) -> BoundaryMatrix {
        boundary_matrix(&random_filtration(n, seed), &ctx(p))
    }

    /// Column support as a sorted row list, for readable assertions.
    fn col_support(m: &DenseMatrix, j: usize) -> Vec<usize> {
        (0..m.rows()).filter(|&i| m.at(i, j) != 0).collect()
    }

    fn assert_decomposition_valid(dm: &BoundaryMatrix, dec: &Decomposition) {
        let n = dec.n;
        let mut c = OpCounter::new();
        let dv = mat_mul_naive(dm.matrix(), &dec.v, &mut c).unwrap();
        assert_eq!(dv, dec.r, "R = D·V must hold exactly");
        let id = DenseMatrix::identity(dm.ctx(), n);
        assert_eq!(mat_mul_naive(&dec.u, &dec.v, &mut c).unwrap(), id, "U·V = I");
        assert_eq!(mat_mul_naive(&dec.v, &dec.u, &mut c).unwrap(), id, "V·U = I");
        assert!(dec.v.is_triangular(Triangle::Upper), "V upper triangular");
        assert!((0..n).all(|j| dec.v.at(j, j) == 1), "V unit diagonal");
        let dr = mat_mul_naive(dm.matrix(), &dec.r, &mut c).unwrap();
        assert!(
            (0..n).all(|i| (0..n).all(|j| dr.at(i, j) == 0)),
            "D·R = 0: nonzero columns of R are cycles"
        );
        let mut seen = HashSet::new();
        for j in 0..n {
            assert_eq!(dec.low_map[j], low(&dec.r, j), "low_map matches R");
            if let Some(i) = dec.low_map[j] {
                assert!(seen.insert(i), "pivot rows must be distinct");
            }
        }
        if dec.mode == ReductionMode::Exhaustive {
            for j in 0..n {
                if let Some(i) = dec.low_map[j] {
                    assert!(
                        (j + 1..n).all(|jp| dec.r.at(i, jp) == 0),
                        "exhaustive R clears pivot rows to the right"
                    );
                }
            }
        }
    }

    #[test]
    fn low_and_lft_follow_their_definitions() {
        let c = ctx(5);
        let m = DenseMatrix::from_rows(&c, &[vec![0, 1], vec![1, 1]]);
        assert_eq!(low(&m, 0), Some(1));
        assert_eq!(low(&m, 1), Some(1));
        // Both columns bottom out in row 1, so row 0 owns no column.
        assert_eq!(lft(&m, 0), None);
        assert_eq!(lft(&m, 1), Some(0));
        let id = DenseMatrix::identity(&c, 2);
        assert_eq!(lft(&id, 0), Some(0));
        assert_eq!(lft(&id, 1), Some(1));
        let z = DenseMatrix::zeros(&c, 2, 2);
        assert_eq!(low(&z, 0), None);
        assert_eq!(lft(&z, 0), None);
    }

    #[test]
    fn lazy_triangle_matches_hand_reduction() {
        let dm = triangle(2);
        let dec = reduce_lazy(&dm);
        assert_decomposition_valid(&dm, &dec);
        assert_eq!(
            dec.low_map,
            vec![None, None, None, Some(1), Some(2), None, Some(5)]
        );
        // The hollow-triangle cycle cancels: col 5 = D(col 5 + col 4 + col 3).
        assert!(col_support(&dec.r, 5).is_empty());
        assert_eq!(col_support(&dec.v, 5), vec![3, 4, 5]);
        // Lazy leaves the untouched columns of D alone.
        assert_eq!(col_support(&dec.r, 3), vec![0, 1]);
        assert_eq!(col_support(&dec.r, 4), vec![1, 2]);
        assert_eq!(col_support(&dec.r, 6), vec![3, 4, 5]);
    }

    #[test]
    fn exhaustive_triangle_clears_pivot_rows() {
        let dm = triangle(2);
        let dec = reduce_exhaustive(&dm);
        assert_decomposition_valid(&dm, &dec);
        assert_eq!(dec.low_map, reduce_lazy(&dm).low_map);
        // Row 1 (pivot of column 3) is cleared from column 4, unlike lazy.
        assert_eq!(col_support(&dec.r, 4), vec![0, 2]);
        assert!(col_support(&dec.r, 5).is_empty());
        assert_eq!(col_support(&dec.r, 6), vec![3, 4, 5]);
    }

    #[test]
    fn single_edge_reduces_without_any_elimination() {
        let dm = boundary_matrix(
            &parse_filtration("0\n1\n0 1\n").unwrap(),
            &ctx(2),
        );
        let dec = reduce_lazy(&dm);
        assert_eq!(dec.low_map, vec![None, None, Some(1)]);
        assert_eq!(col_support(&dec.r, 2), vec![0, 1]);
        assert_eq!(dec.v, DenseMatrix::identity(&ctx(2), 3));
    }

    #[test]
    fn all_zero_boundary_gives_identity_outputs() {
        let dm = boundary_matrix(&parse_filtration("0\n1\n2\n3\n").unwrap(), &ctx(5));
        for alg in Algorithm::ALL {
            let dec = reduce(&dm, alg, 2, 8).unwrap();
            assert_eq!(dec.n, 4);
            assert!((0..4).all(|j| dec.low_map[j].is_none()), "{alg}: R = 0");
            assert_eq!(dec.v, DenseMatrix::identity(&ctx(5), 4), "{alg}: V = I");
            assert_eq!(dec.u, DenseMatrix::identity(&ctx(5), 4), "{alg}: U = I");
        }
    }

    #[test]
    fn row_incremental_is_bit_identical_to_lazy() {
        for p in [2u32, 5] {
            let dm = triangle(p);
            let a = reduce_lazy(&dm);
            let b = reduce_row_incremental(&dm);
            assert_eq!(a.r, b.r);
            assert_eq!(a.v, b.v);
            assert_eq!(a.u, b.u);
        }
        for k in 0..50usize {
            let p = [2u32, 5][k % 2];
            let n = 1 + (k * 37 + 11) % 64;
            let dm = random_boundary(n, p, 900 + k as u64);
            let a = reduce_lazy(&dm);
            let b = reduce_row_incremental(&dm);
            assert_eq!(a.r, b.r, "case {k}");
            assert_eq!(a.v, b.v, "case {k}");
            assert_eq!(a.u, b.u, "case {k}");
            assert_decomposition_valid(&dm, &b);
        }
    }

    #[test]
    fn fast_column_is_bit_identical_to_exhaustive() {
        for k in 0..50usize {
            let p = [2u32, 5][k % 2];
            let n = 1 + (k * 29 + 7) % 64;
            let dm = random_boundary(n, p, 1700 + k as u64);
            let reference = reduce_exhaustive(&dm);
            for leaf in [1usize, 4] {
                let fast = reduce_fast_column(&dm, leaf, 8).unwrap();
                assert_eq!(fast.r, reference.r, "case {k} leaf {leaf}");
                assert_eq!(fast.v, reference.v, "case {k} leaf {leaf}");
                assert_eq!(fast.u, reference.u, "case {k} leaf {leaf}");
                assert_eq!(fast.low_map, reference.low_map, "case {k} leaf {leaf}");
            }
        }
        let dm = triangle(2);
        let fast = reduce_fast_column(&dm, 1, 4).unwrap();
        let reference = reduce_exhaustive(&dm);
        assert_eq!(fast.r, reference.r);
        assert_eq!(fast.v, reference.v);
    }

    #[test]
    fn fast_row_is_bit_identical_to_lazy() {
        for k in 0..50usize {
            let p = [2u32, 5][k % 2];
            let n = 1 + (k * 31 + 3) % 64;
            let dm = random_boundary(n, p, 2600 + k as u64);
            let reference = reduce_lazy(&dm);
            for leaf in [1usize, 4] {
                let fast = reduce_fast_row(&dm, leaf, 8).unwrap();
                assert_eq!(fast.r, reference.r, "case {k} leaf {leaf}");
                assert_eq!(fast.v, reference.v, "case {k} leaf {leaf}");
                assert_eq!(fast.u, reference.u, "case {k} leaf {leaf}");
            }
        }
        let dm = triangle(2);
        let fast = reduce_fast_row(&dm, 1, 4).unwrap();
        let reference = reduce_lazy(&dm);
        assert_eq!(fast.r, reference.r);
        assert_eq!(fast.v, reference.v);
        assert_eq!(fast.u, reference.u);
    }

    #[test]
    fn oversized_leaves_degenerate_to_the_plain_algorithms() {
        let dm = triangle(5);
        let col = reduce_fast_column(&dm, 1024, 8).unwrap();
        assert_eq!(col.r, reduce_exhaustive(&dm).r);
        assert_eq!(col.v, reduce_exhaustive(&dm).v);
        let row = reduce_fast_row(&dm, 1024, 8).unwrap();
        assert_eq!(row.r, reduce_lazy(&dm).r);
        assert_eq!(row.v, reduce_lazy(&dm).v);
    }

    #[test]
    fn every_algorithm_satisfies_the_decomposition_contract() {
        for k in 0..12usize {
            let p = [2u32, 13][k % 2];
            let n = 1 + (k * 17 + 5) % 40;
            let dm = random_boundary(n, p, 4000 + k as u64);
            let mut low_maps = Vec::new();
            for alg in Algorithm::ALL {
                let dec = reduce(&dm, alg, 4, 8).unwrap();
                assert_eq!(dec.mode, alg.mode());
                assert_decomposition_valid(&dm, &dec);
                low_maps.push(dec.low_map);
            }
            assert!(
                low_maps.windows(2).all(|w| w[0] == w[1]),
                "pivots agree across algorithms (case {k})"
            );
        }
    }

    #[test]
    fn recover_u_keeps_diagonal_and_negates_the_rest() {
        let c7 = ctx(7);
        let id = DenseMatrix::identity(&c7, 4);
        assert_eq!(recover_u(&id), id);
        let lambda = DenseMatrix::from_rows(
            &c7,
            &[vec![1, 3, 0, 5], vec![0, 1, 2, 0], vec![0, 0, 1, 6], vec![0, 0, 0, 1]],
        );
        let u = recover_u(&lambda);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j {
                    1
                } else {
                    (7 - lambda.at(i, j)) % 7
                };
                assert_eq!(u.at(i, j), expect);
            }
        }
        let mut c = OpCounter::new();
        let v = tri_inverse(&u, Triangle::Upper, 2, &mut c).unwrap();
        assert_eq!(
            mat_mul_naive(&u, &v, &mut c).unwrap(),
            DenseMatrix::identity(&c7, 4)
        );
        // Characteristic 2: negation is the identity, so U = Λ entrywise.
        let c2 = ctx(2);
        let lambda2 = DenseMatrix::from_rows(&c2, &[vec![1, 1], vec![0, 1]]);
        assert_eq!(recover_u(&lambda2), lambda2);
    }

    #[test]
    fn zero_and_single_simplex_inputs() {
        let c = ctx(3);
        let empty = boundary_matrix(&parse_filtration("").unwrap(), &c);
        for alg in Algorithm::ALL {
            let dec = reduce(&empty, alg, 1, 4).unwrap();
            assert_eq!(dec.n, 0);
            assert!(dec.low_map.is_empty());
        }
        let vertex = boundary_matrix(&parse_filtration("0\n").unwrap(), &c);
        for alg in Algorithm::ALL {
            let dec = reduce(&vertex, alg, 1, 4).unwrap();
            assert_eq!(dec.n, 1);
            assert_eq!(dec.low_map, vec![None]);
            assert_eq!(dec.v.at(0, 0), 1);
            assert_eq!(dec.u.at(0, 0), 1);
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("twisted".parse::<Algorithm>().is_err());
    }

    #[test]
    fn counters_record_work() {
        let dm = random_boundary(32, 5, 77);
        let dec = reduce_fast_column(&dm, 4, 8).unwrap();
        assert!(dec.counter.mul_count > 0);
        let dec = reduce_fast_row(&dm, 4, 8).unwrap();
        assert!(dec.counter.mul_count > 0);
    }
}
