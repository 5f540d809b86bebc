//! Simplicial filtrations and their boundary matrices.
//!
//! A [`Filtration`] is an ordered list of simplices in which every proper
//! face appears before its cofaces; position in the list (1-based in all
//! text formats, 0-based in the API) is the filtration index. Filtrations
//! arrive either as plain ordered lists or as level-tagged simplices that
//! [`extend_partial_order`] sorts into a valid total order. The
//! [`boundary_matrix`] of a filtration is the strictly upper triangular
//! matrix whose column j holds the signed facet indicators of simplex j,
//! with the convention that removing the i-th vertex carries sign (−1)^i.

use crate::field::FieldContext;
use crate::matrix::DenseMatrix;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Errors from parsing and validating filtrations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiltrationError {
    /// A malformed input line.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    /// The same simplex appears twice.
    #[error("duplicate simplex {{{simplex}}} at positions {first} and {second}")]
    DuplicateSimplex {
        simplex: String,
        first: usize,
        second: usize,
    },
    /// A simplex appears before one of its proper faces.
    #[error("simplex {{{simplex}}} at position {position} has no earlier face {{{face}}}")]
    MissingFace {
        simplex: String,
        position: usize,
        face: String,
    },
    /// A level-tagged face has a strictly larger level than its coface.
    #[error("face {{{face}}} at level {face_level} exceeds coface {{{simplex}}} at level {simplex_level}")]
    InvalidLevels {
        face: String,
        simplex: String,
        face_level: f64,
        simplex_level: f64,
    },
}

/// A simplex: a strictly increasing list of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vec<u32>,
}

impl Simplex {
    /// Builds a simplex from vertex ids in any order.
    ///
    /// Panics if `vertices` is empty or contains a repeated id.
    pub fn new(mut vertices: Vec<u32>) -> Simplex {
        assert!(!vertices.is_empty(), "a simplex needs at least one vertex");
        vertices.sort_unstable();
        assert!(
            vertices.windows(2).all(|w| w[0] != w[1]),
            "vertex ids must be distinct"
        );
        Simplex { vertices }
    }

    /// The sorted vertex ids.
    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    /// Dimension: one less than the vertex count.
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// The codimension-1 faces in vertex-removal order: the i-th facet drops
    /// the i-th vertex and carries boundary sign (−1)^i.
    pub fn facets(&self) -> Vec<Simplex> {
        if self.dim() == 0 {
            return Vec::new();
        }
        (0..self.vertices.len())
            .map(|i| {
                let mut vs = self.vertices.clone();
                vs.remove(i);
                Simplex { vertices: vs }
            })
            .collect()
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.vertices {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// An ordered simplicial filtration; every proper face of a simplex appears
/// at an earlier position.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    levels: Option<Vec<f64>>,
}

impl Filtration {
    /// Validates the face-ordering and distinctness invariants and wraps the
    /// list. The empty filtration is legal.
    pub fn new(simplices: Vec<Simplex>) -> Result<Filtration, FiltrationError> {
        validate_order(&simplices)?;
        Ok(Filtration {
            simplices,
            levels: None,
        })
    }

    /// The simplices in filtration order.
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Number of simplices.
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    /// Whether the filtration is empty.
    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Per-position levels when the input carried them.
    pub fn levels(&self) -> Option<&[f64]> {
        self.levels.as_deref()
    }
}

/// One pass: catches duplicates and faces that do not appear earlier.
fn validate_order(simplices: &[Simplex]) -> Result<(), FiltrationError> {
    let mut seen: HashMap<&[u32], usize> = HashMap::with_capacity(simplices.len());
    for (j, s) in simplices.iter().enumerate() {
        for facet in s.facets() {
            if !seen.contains_key(facet.vertices()) {
                return Err(FiltrationError::MissingFace {
                    simplex: s.to_string(),
                    position: j + 1,
                    face: facet.to_string(),
                });
            }
        }
        if let Some(&first) = seen.get(s.vertices()) {
            return Err(FiltrationError::DuplicateSimplex {
                simplex: s.to_string(),
                first: first + 1,
                second: j + 1,
            });
        }
        seen.insert(s.vertices(), j);
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> FiltrationError {
    FiltrationError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_vertex_ids(text: &str, line: usize) -> Result<Simplex, FiltrationError> {
    let mut ids = Vec::new();
    for tok in text.split_whitespace() {
        let id: u32 = tok
            .parse()
            .map_err(|_| parse_err(line, format!("invalid vertex id `{tok}`")))?;
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(parse_err(line, "empty simplex"));
    }
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(parse_err(line, "repeated vertex id in simplex"));
    }
    Ok(Simplex { vertices: ids })
}

/// Parses the `.flt` text format: one simplex per line as whitespace-separated
/// vertex ids, in filtration order. Blank lines and text after `#` are
/// ignored. Lines of the form `level <float> : <vertex ids>` tag simplices
/// with levels instead; the total order is then derived by
/// [`extend_partial_order`]. The two line forms cannot be mixed.
pub fn parse_filtration(text: &str) -> Result<Filtration, FiltrationError> {
    let mut plain: Vec<Simplex> = Vec::new();
    let mut leveled: Vec<(Simplex, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        if let Some((head, tail)) = content.split_once(':') {
            let head_tokens: Vec<&str> = head.split_whitespace().collect();
            if head_tokens.len() != 2 || head_tokens[0] != "level" {
                return Err(parse_err(line, "expected `level <float> : <vertex ids>`"));
            }
            let level: f64 = head_tokens[1]
                .parse()
                .map_err(|_| parse_err(line, format!("invalid level `{}`", head_tokens[1])))?;
            if !level.is_finite() {
                return Err(parse_err(line, "level must be finite"));
            }
            if !plain.is_empty() {
                return Err(parse_err(line, "cannot mix leveled and plain simplex lines"));
            }
            leveled.push((parse_vertex_ids(tail, line)?, level));
        } else {
            if !leveled.is_empty() {
                return Err(parse_err(line, "cannot mix leveled and plain simplex lines"));
            }
            plain.push(parse_vertex_ids(content, line)?);
        }
    }
    if leveled.is_empty() {
        Filtration::new(plain)
    } else {
        extend_partial_order(leveled)
    }
}

/// Sorts level-tagged simplices into a total filtration order: ascending
/// level, then ascending dimension, then lexicographic on vertex lists.
/// Rejects inputs where a proper face has a strictly larger level than a
/// coface, is missing entirely, or appears twice.
pub fn extend_partial_order(
    mut entries: Vec<(Simplex, f64)>,
) -> Result<Filtration, FiltrationError> {
    entries.sort_by(|(a, la), (b, lb)| {
        la.total_cmp(lb)
            .then(a.dim().cmp(&b.dim()))
            .then(a.vertices().cmp(b.vertices()))
    });
    let mut level_of: HashMap<&[u32], (f64, usize)> = HashMap::with_capacity(entries.len());
    for (j, (s, level)) in entries.iter().enumerate() {
        if let Some(&(_, first)) = level_of.get(s.vertices()) {
            return Err(FiltrationError::DuplicateSimplex {
                simplex: s.to_string(),
                first: first + 1,
                second: j + 1,
            });
        }
        level_of.insert(s.vertices(), (*level, j));
    }
    for (j, (s, level)) in entries.iter().enumerate() {
        for facet in s.facets() {
            match level_of.get(facet.vertices()) {
                None => {
                    return Err(FiltrationError::MissingFace {
                        simplex: s.to_string(),
                        position: j + 1,
                        face: facet.to_string(),
                    });
                }
                Some(&(face_level, _)) if face_level > *level => {
                    return Err(FiltrationError::InvalidLevels {
                        face: facet.to_string(),
                        simplex: s.to_string(),
                        face_level,
                        simplex_level: *level,
                    });
                }
                Some(_) => {}
            }
        }
    }
    let (simplices, levels): (Vec<Simplex>, Vec<f64>) = entries.into_iter().unzip();
    // Faces have level ≤ coface; ties break by dimension, so the sorted
    // order is a valid filtration.
    let mut f = Filtration::new(simplices)?;
    f.levels = Some(levels);
    Ok(f)
}

/// Canonical plain-format serialization: one simplex per line, sorted vertex
/// ids, filtration order. `parse_filtration` of the output reproduces the
/// simplex sequence.
pub fn serialize_filtration(f: &Filtration) -> String {
    let mut out = String::new();
    for s in f.simplices() {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

/// The boundary matrix of a filtration over a fixed prime field: strictly
/// upper triangular, one column per simplex, satisfying M·M = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix {
    matrix: DenseMatrix,
    dims: Vec<usize>,
}

impl BoundaryMatrix {
    /// Wraps an explicit matrix and dimension list (test and cohomology
    /// plumbing). Panics unless the matrix is square, strictly upper
    /// triangular, and sized to `dims`.
    pub fn from_parts(matrix: DenseMatrix, dims: Vec<usize>) -> BoundaryMatrix {
        let n = dims.len();
        assert!(matrix.rows() == n && matrix.cols() == n, "shape mismatch");
        for i in 0..n {
            for j in 0..=i {
                assert!(matrix.at(i, j) == 0, "matrix must be strictly upper triangular");
            }
        }
        BoundaryMatrix { matrix, dims }
    }

    /// The matrix itself.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Per-column simplex dimensions.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of simplices.
    pub fn n(&self) -> usize {
        self.dims.len()
    }

    /// The field the matrix lives over.
    pub fn ctx(&self) -> &FieldContext {
        self.matrix.ctx()
    }

    /// The anti-transposed boundary matrix: entry (i, j) comes from
    /// (n−1−j, n−1−i). Reducing it computes cohomology; its column j
    /// corresponds to the original filtration position n−1−j.
    pub fn antitranspose(&self) -> BoundaryMatrix {
        let n = self.n();
        let dims = (0..n).map(|j| self.dims[n - 1 - j]).collect();
        BoundaryMatrix {
            matrix: antitranspose(&self.matrix),
            dims,
        }
    }
}

/// Anti-transpose of a square matrix: out[i, j] = m[n−1−j, n−1−i]
/// (transpose across the anti-diagonal). Applying it twice is the identity.
pub fn antitranspose(m: &DenseMatrix) -> DenseMatrix {
    assert_eq!(m.rows(), m.cols(), "anti-transpose needs a square matrix");
    let n = m.rows();
    let mut out = DenseMatrix::zeros(m.ctx(), n, n);
    for i in 0..n {
        for j in 0..n {
            out.set_raw(i, j, m.at(n - 1 - j, n - 1 - i));
        }
    }
    out
}

/// Builds the boundary matrix of a valid filtration: column j holds
/// Σ_i (−1)^i · (facet of simplex j with its i-th vertex removed), reduced
/// into the field; vertex columns are zero.
pub fn boundary_matrix(f: &Filtration, ctx: &FieldContext) -> BoundaryMatrix {
    let n = f.len();
    let mut position: HashMap<&[u32], usize> = HashMap::with_capacity(n);
    for (j, s) in f.simplices().iter().enumerate() {
        position.insert(s.vertices(), j);
    }
    let mut m = DenseMatrix::zeros(ctx, n, n);
    let mut dims = Vec::with_capacity(n);
    for (j, s) in f.simplices().iter().enumerate() {
        dims.push(s.dim());
        for (i, facet) in s.facets().iter().enumerate() {
            let row = position[facet.vertices()];
            debug_assert!(row < j, "validation guarantees faces come earlier");
            let sign = if i % 2 == 0 { 1 } else { -1 };
            m.set(row, j, ctx.element_signed(sign));
        }
    }
    BoundaryMatrix { matrix: m, dims }
}
