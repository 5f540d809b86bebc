//! Persistence diagrams, simplex classification, and representative chains
//! read off a completed decomposition.
//!
//! A finite pair (birth, death) records that the class created by the birth
//! simplex is killed by the death simplex; classes that survive the whole
//! filtration get an infinite death. All indices in this module are 1-based
//! filtration positions, matching the text formats. Representatives come
//! from two places: columns of V at positive indices (the same for every
//! reduction algorithm) and columns of R at negative indices (algorithm-
//! dependent). Cocycle representatives are read the same way off a reduction
//! of the anti-transposed matrix, with indices mapped back through k ↦ n−k+1.

use std::collections::BTreeMap;

use crate::field::FieldElement;
use crate::filtration::BoundaryMatrix;
use crate::matrix::{mat_mul_naive, DenseMatrix, OpCounter};
use crate::reductions::{low, reduce, Algorithm, Decomposition, ReductionError, ReductionMode};

/// One point of the persistence diagram, in 1-based filtration indices.
/// `death` is `None` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PersistencePair {
    pub birth: usize,
    pub death: Option<usize>,
    pub dim: usize,
}

/// A sparse chain: nonzero coefficients keyed by 1-based filtration index,
/// all supported on simplices of one dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub coefficients: BTreeMap<usize, FieldElement>,
    pub dim: usize,
}

/// Which matrix a representative basis was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepresentativeSource {
    V,
    R,
}

/// Which side of the duality the representatives describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Homology,
    Cohomology,
}

/// Representative chains for a diagram: cycles by birth index (from V),
/// dying cycles by death index (from R).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentativeSet {
    pub v_basis: BTreeMap<usize, Chain>,
    pub r_basis: BTreeMap<usize, Chain>,
    pub source: RepresentativeSource,
    pub side: Side,
}

/// The nonzero entries of a matrix column as a chain over 1-based indices.
fn column_chain(m: &DenseMatrix, col: usize, dim: usize) -> Chain {
    let ctx = m.ctx();
    let mut coefficients = BTreeMap::new();
    for k in 0..m.rows() {
        let val = m.at(k, col);
        if val != 0 {
            coefficients.insert(k + 1, ctx.element(val as u64));
        }
    }
    Chain { coefficients, dim }
}

/// Like [`column_chain`], but for columns of an anti-transposed reduction:
/// row k maps back to the original 1-based index n−k.
fn mapped_column_chain(m: &DenseMatrix, col: usize, dim: usize, n: usize) -> Chain {
    let ctx = m.ctx();
    let mut coefficients = BTreeMap::new();
    for k in 0..m.rows() {
        let val = m.at(k, col);
        if val != 0 {
            coefficients.insert(n - k, ctx.element(val as u64));
        }
    }
    Chain { coefficients, dim }
}

/// Rows that hold a pivot of some column.
fn pivot_rows(low_map: &[Option<usize>]) -> Vec<bool> {
    let mut rows = vec![false; low_map.len()];
    for pivot in low_map.iter().flatten() {
        rows[*pivot] = true;
    }
    rows
}

/// The persistence diagram of a decomposition: a finite pair (i, j) for
/// every column j with pivot row i, and an essential pair (i, ∞) for every
/// zero column i whose row holds no pivot. Sorted by (dim, birth).
pub fn extract_diagram(dec: &Decomposition, dims: &[usize]) -> Vec<PersistencePair> {
    let n = dec.n;
    debug_assert_eq!(dims.len(), n);
    let pivots = pivot_rows(&dec.low_map);
    let mut pairs = Vec::new();
    for j in 0..n {
        if let Some(i) = dec.low_map[j] {
            pairs.push(PersistencePair {
                birth: i + 1,
                death: Some(j + 1),
                dim: dims[i],
            });
        } else if !pivots[j] {
            pairs.push(PersistencePair {
                birth: j + 1,
                death: None,
                dim: dims[j],
            });
        }
    }
    pairs.sort_by_key(|p| (p.dim, p.birth));
    pairs
}

/// Whether a simplex creates a class (positive) or kills one (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexClass {
    Positive,
    Negative,
}

/// Per-index classification: index j is negative exactly when column j of R
/// is nonzero. The split depends only on the filtration order, not on the
/// algorithm.
pub fn classify_simplices(dec: &Decomposition) -> Vec<SimplexClass> {
    dec.low_map
        .iter()
        .map(|low| {
            if low.is_some() {
                SimplexClass::Negative
            } else {
                SimplexClass::Positive
            }
        })
        .collect()
}

/// Cycle representatives from V: one chain per positive index j, read off
/// column j of V. These are cycles by construction (their R column is zero)
/// and identical under every reduction algorithm here.
pub fn extract_v_representatives(dec: &Decomposition, dims: &[usize]) -> RepresentativeSet {
    let mut v_basis = BTreeMap::new();
    for j in 0..dec.n {
        if dec.low_map[j].is_none() {
            v_basis.insert(j + 1, column_chain(&dec.v, j, dims[j]));
        }
    }
    RepresentativeSet {
        v_basis,
        r_basis: BTreeMap::new(),
        source: RepresentativeSource::V,
        side: Side::Homology,
    }
}

/// Dying-cycle representatives from R: one chain per negative index j, read
/// off column j of R. A nonzero R column is a linear combination of
/// boundaries, hence a cycle; unlike the V chains these differ between lazy-
/// and exhaustive-mode outputs in general.
pub fn extract_r_representatives(dec: &Decomposition, dims: &[usize]) -> RepresentativeSet {
    let mut r_basis = BTreeMap::new();
    for j in 0..dec.n {
        if let Some(i) = dec.low_map[j] {
            r_basis.insert(j + 1, column_chain(&dec.r, j, dims[i]));
        }
    }
    RepresentativeSet {
        v_basis: BTreeMap::new(),
        r_basis,
        source: RepresentativeSource::R,
        side: Side::Homology,
    }
}

/// Reduces the anti-transpose and maps the result back: the diagram equals
/// the ordinary (homology) diagram exactly, and the returned chains are
/// cocycle representatives keyed by birth index.
///
/// Finite classes take the V column of the paired nonzero R column; an
/// essential class at k needs its (anti-transposed) column to be zero *and*
/// its row to hold no pivot, and takes its own V column. Whole columns are
/// stored; the view truncated below the pivot is recoverable from the
/// paired death index in the diagram.
pub fn extract_cocycles(
    dm: &BoundaryMatrix,
    algorithm: Algorithm,
    leaf_size: usize,
    strassen_cutoff: usize,
) -> Result<(Vec<PersistencePair>, RepresentativeSet), ReductionError> {
    let perp = dm.antitranspose();
    let dec = reduce(&perp, algorithm, leaf_size, strassen_cutoff)?;
    Ok(cocycles_from_dual(dm, &dec))
}

/// Maps a decomposition of the anti-transposed matrix back to the original
/// index order, as [`extract_cocycles`] does, for callers that ran the dual
/// reduction themselves (to verify it or read its operation counts).
pub fn cocycles_from_dual(
    dm: &BoundaryMatrix,
    dec: &Decomposition,
) -> (Vec<PersistencePair>, RepresentativeSet) {
    let n = dm.n();
    let dims = dm.dims();
    let pivots = pivot_rows(&dec.low_map);
    let mut pairs = Vec::new();
    let mut v_basis = BTreeMap::new();
    for j in 0..n {
        if let Some(i) = dec.low_map[j] {
            // The anti-transposed pair (i, j) is the original (n−j, n−i),
            // 1-based: the young side of the dual pair is the old side here.
            let birth = n - j;
            let dim = dims[birth - 1];
            pairs.push(PersistencePair {
                birth,
                death: Some(n - i),
                dim,
            });
            v_basis.insert(birth, mapped_column_chain(&dec.v, j, dim, n));
        } else if !pivots[j] {
            let birth = n - j;
            let dim = dims[birth - 1];
            pairs.push(PersistencePair {
                birth,
                death: None,
                dim,
            });
            v_basis.insert(birth, mapped_column_chain(&dec.v, j, dim, n));
        }
    }
    pairs.sort_by_key(|p| (p.dim, p.birth));
    (
        pairs,
        RepresentativeSet {
            v_basis,
            r_basis: BTreeMap::new(),
            source: RepresentativeSource::V,
            side: Side::Cohomology,
        },
    )
}

/// One named verification check and whether it held.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationCheck {
    pub name: &'static str,
    pub passed: bool,
}

/// Outcome of [`verify_decomposition`]: one entry per invariant, all checked
/// exactly over the field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<VerificationCheck>,
}

impl VerificationReport {
    /// Whether every check passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Names of the checks that failed.
    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }
}

/// Recomputes every invariant a decomposition of `dm` must satisfy and
/// reports each one separately: R = D·V, U·V = I, V·U = I, V unit upper
/// triangular, pivot rows recorded correctly and pairwise distinct, D·R = 0,
/// and the support property of positive V columns (one positive simplex plus
/// negative simplices only). Exhaustive-mode outputs must additionally have
/// every pivot row zero to the right of its pivot.
pub fn verify_decomposition(dm: &BoundaryMatrix, dec: &Decomposition) -> VerificationReport {
    let mut counter = OpCounter::new();
    let n = dec.n;
    let ctx = dm.ctx();
    let identity = DenseMatrix::identity(ctx, n);
    let mut checks = Vec::new();

    let dv = mat_mul_naive(dm.matrix(), &dec.v, &mut counter).expect("square shapes match");
    checks.push(VerificationCheck {
        name: "R = D·V",
        passed: dv == dec.r,
    });

    let uv = mat_mul_naive(&dec.u, &dec.v, &mut counter).expect("square shapes match");
    checks.push(VerificationCheck {
        name: "U·V = I",
        passed: uv == identity,
    });
    let vu = mat_mul_naive(&dec.v, &dec.u, &mut counter).expect("square shapes match");
    checks.push(VerificationCheck {
        name: "V·U = I",
        passed: vu == identity,
    });

    let unit_upper = (0..n).all(|i| dec.v.at(i, i) == 1 && (0..i).all(|j| dec.v.at(i, j) == 0));
    checks.push(VerificationCheck {
        name: "V unit upper triangular",
        passed: unit_upper,
    });

    let lows: Vec<Option<usize>> = (0..n).map(|j| low(&dec.r, j)).collect();
    let mut seen = vec![false; n];
    let mut low_ok = lows == dec.low_map;
    for i in lows.iter().flatten() {
        if seen[*i] {
            low_ok = false;
        }
        seen[*i] = true;
    }
    checks.push(VerificationCheck {
        name: "pivot rows recorded and injective",
        passed: low_ok,
    });

    let dr = mat_mul_naive(dm.matrix(), &dec.r, &mut counter).expect("square shapes match");
    checks.push(VerificationCheck {
        name: "D·R = 0",
        passed: dr == DenseMatrix::zeros(ctx, n, n),
    });

    // The reductions never add a positive column into another column, so a
    // positive V column may touch negative simplices and itself only.
    let msa_ok = (0..n).all(|j| {
        lows[j].is_some()
            || (0..n).all(|k| k == j || dec.v.at(k, j) == 0 || lows[k].is_some())
    });
    checks.push(VerificationCheck {
        name: "positive V columns supported on negative simplices",
        passed: msa_ok,
    });

    if dec.mode == ReductionMode::Exhaustive {
        let cleared = (0..n).all(|j| match lows[j] {
            Some(i) => (j + 1..n).all(|jp| dec.r.at(i, jp) == 0),
            None => true,
        });
        checks.push(VerificationCheck {
            name: "pivot rows cleared to the right",
            passed: cleared,
        });
    }

    VerificationReport { checks }
}
