//! JSON state documents.
//!
//! A document carries one density matrix, bipartite state, pure vector,
//! ensemble or Kraus channel. Complex entries are `[re, im]` arrays and
//! matrices are row-major nested arrays. Shapes by kind:
//!
//! | kind        | dims               | data                        |
//! |-------------|--------------------|-----------------------------|
//! | `density`   | `[d]`              | `d x d` matrix              |
//! | `bipartite` | `[n_a, n_b]`       | `N x N` matrix, `N = n_a n_b` |
//! | `pure`      | `[d]` or `[n_a, n_b]` | vector of length `d` or `N` |
//! | `ensemble`  | `[members, d]`     | one `d x d` matrix per member |
//! | `channel`   | `[count, d_out, d_in]` | one `d_out x d_in` matrix per operator |
//!
//! `basis_a` (an `n_a x n_a` unitary, columns are basis vectors) is allowed
//! for bipartite and two-factor pure documents; `priors` is required for
//! ensembles and rejected elsewhere.
//!
//! Serialization is compact JSON with shortest round-trip decimals, so
//! `parse -> serialize` reproduces every double bit for bit.

use std::fmt;

use num_complex::Complex64;
use pcoh::{BipartiteState64, ComplexMatrix64, DensityMatrix64, Ensemble64, KrausChannel64};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1.0";

pub type Entry = [f64; 2];
pub type Matrix = Vec<Vec<Entry>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Density,
    Bipartite,
    Ensemble,
    Channel,
    Pure,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 5] = [
        DocumentKind::Density,
        DocumentKind::Bipartite,
        DocumentKind::Ensemble,
        DocumentKind::Channel,
        DocumentKind::Pure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocumentKind::Density => "density",
            DocumentKind::Bipartite => "bipartite",
            DocumentKind::Ensemble => "ensemble",
            DocumentKind::Channel => "channel",
            DocumentKind::Pure => "pure",
        }
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Data {
    Vector(Vec<Entry>),
    Matrix(Matrix),
    Matrices(Vec<Matrix>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateDocument {
    pub schema_version: String,
    pub kind: DocumentKind,
    pub dims: Vec<usize>,
    pub data: Data,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_a: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("syntax error: {0}")]
    Syntax(String),
    /// `pointer` is an RFC 6901 path into the document.
    #[error("schema error at '{pointer}': {message}")]
    Schema { pointer: String, message: String },
    #[error("validation error: {0}")]
    Validation(#[from] pcoh::Error),
}

impl DocumentError {
    fn schema(pointer: &str, message: impl Into<String>) -> Self {
        DocumentError::Schema {
            pointer: pointer.to_owned(),
            message: message.into(),
        }
    }
}

type Parsed<T> = std::result::Result<T, DocumentError>;

/// Parses, checks the schema and runs the library validator for the kind.
pub fn parse_document(bytes: &[u8]) -> Parsed<StateDocument> {
    let doc = parse_unvalidated(bytes)?;
    doc.validate()?;
    Ok(doc)
}

/// Parses and checks the schema and shapes only.
pub fn parse_unvalidated(bytes: &[u8]) -> Parsed<StateDocument> {
    let text = std::str::from_utf8(bytes).map_err(|e| DocumentError::Syntax(format!("invalid UTF-8: {e}")))?;
    let value: Value = serde_json::from_str(text).map_err(|e| DocumentError::Syntax(e.to_string()))?;
    from_value(&value)
}

fn from_value(v: &Value) -> Parsed<StateDocument> {
    let obj = v.as_object().ok_or_else(|| DocumentError::schema("", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "schema_version" | "kind" | "dims" | "data" | "basis_a" | "priors") {
            return Err(DocumentError::schema(&pointer_to("", key), "unknown field"));
        }
    }
    let field = |name: &str| obj.get(name).ok_or_else(|| DocumentError::schema("", format!("missing field '{name}'")));

    let version = field("schema_version")?
        .as_str()
        .ok_or_else(|| DocumentError::schema("/schema_version", "expected a string"))?;
    if version != SCHEMA_VERSION {
        return Err(DocumentError::schema(
            "/schema_version",
            format!("unsupported version '{version}', expected '{SCHEMA_VERSION}'"),
        ));
    }
    let kind_str = field("kind")?
        .as_str()
        .ok_or_else(|| DocumentError::schema("/kind", "expected a string"))?;
    let kind = DocumentKind::ALL
        .into_iter()
        .find(|k| k.as_str() == kind_str)
        .ok_or_else(|| DocumentError::schema("/kind", format!("unknown kind '{kind_str}'")))?;

    let dims_v = field("dims")?
        .as_array()
        .ok_or_else(|| DocumentError::schema("/dims", "expected an array"))?;
    let mut dims = Vec::with_capacity(dims_v.len());
    for (i, d) in dims_v.iter().enumerate() {
        let n = d
            .as_u64()
            .filter(|&n| n >= 1)
            .ok_or_else(|| DocumentError::schema(&format!("/dims/{i}"), "expected a positive integer"))?;
        dims.push(usize::try_from(n).map_err(|_| DocumentError::schema(&format!("/dims/{i}"), "too large"))?);
    }
    let expect_dims = |ok: bool, shape: &str| {
        if ok {
            Ok(())
        } else {
            Err(DocumentError::schema("/dims", format!("{kind} documents need dims {shape}")))
        }
    };
    let product = |d: &[usize]| -> Parsed<usize> {
        d.iter()
            .try_fold(1usize, |a, &b| a.checked_mul(b))
            .ok_or_else(|| DocumentError::schema("/dims", "dimension overflow"))
    };

    let data_v = field("data")?;
    let data = match kind {
        DocumentKind::Density => {
            expect_dims(dims.len() == 1, "[d]")?;
            Data::Matrix(matrix(data_v, "/data", dims[0], dims[0])?)
        }
        DocumentKind::Bipartite => {
            expect_dims(dims.len() == 2, "[n_a, n_b]")?;
            let n = product(&dims)?;
            Data::Matrix(matrix(data_v, "/data", n, n)?)
        }
        DocumentKind::Pure => {
            expect_dims(matches!(dims.len(), 1 | 2), "[d] or [n_a, n_b]")?;
            Data::Vector(vector(data_v, "/data", product(&dims)?)?)
        }
        DocumentKind::Ensemble => {
            expect_dims(dims.len() == 2, "[members, d]")?;
            Data::Matrices(matrices(data_v, "/data", dims[0], dims[1], dims[1])?)
        }
        DocumentKind::Channel => {
            expect_dims(dims.len() == 3, "[count, d_out, d_in]")?;
            Data::Matrices(matrices(data_v, "/data", dims[0], dims[1], dims[2])?)
        }
    };

    let basis_a = match obj.get("basis_a") {
        None => None,
        Some(b) => {
            let two_factor = kind == DocumentKind::Bipartite || (kind == DocumentKind::Pure && dims.len() == 2);
            if !two_factor {
                return Err(DocumentError::schema("/basis_a", format!("not allowed for {kind} documents")));
            }
            Some(matrix(b, "/basis_a", dims[0], dims[0])?)
        }
    };
    let priors = match obj.get("priors") {
        None if kind == DocumentKind::Ensemble => {
            return Err(DocumentError::schema("", "missing field 'priors'"));
        }
        None => None,
        Some(_) if kind != DocumentKind::Ensemble => {
            return Err(DocumentError::schema("/priors", format!("not allowed for {kind} documents")));
        }
        Some(p) => {
            let arr = array_of_len(p, "/priors", dims[0])?;
            let mut out = Vec::with_capacity(arr.len());
            for (i, x) in arr.iter().enumerate() {
                out.push(number(x, &format!("/priors/{i}"))?);
            }
            Some(out)
        }
    };

    Ok(StateDocument {
        schema_version: version.to_owned(),
        kind,
        dims,
        data,
        basis_a,
        priors,
    })
}

fn pointer_to(base: &str, key: &str) -> String {
    format!("{base}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn array_of_len<'a>(v: &'a Value, at: &str, len: usize) -> Parsed<&'a Vec<Value>> {
    let arr = v.as_array().ok_or_else(|| DocumentError::schema(at, "expected an array"))?;
    if arr.len() != len {
        return Err(DocumentError::schema(
            at,
            format!("expected {len} elements, found {}", arr.len()),
        ));
    }
    Ok(arr)
}

fn number(v: &Value, at: &str) -> Parsed<f64> {
    v.as_f64().ok_or_else(|| DocumentError::schema(at, "expected a number"))
}

fn entry(v: &Value, at: &str) -> Parsed<Entry> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| DocumentError::schema(at, "expected a complex number [re, im]"))?;
    Ok([number(&pair[0], &format!("{at}/0"))?, number(&pair[1], &format!("{at}/1"))?])
}

fn vector(v: &Value, at: &str, len: usize) -> Parsed<Vec<Entry>> {
    array_of_len(v, at, len)?
        .iter()
        .enumerate()
        .map(|(i, x)| entry(x, &format!("{at}/{i}")))
        .collect()
}

fn matrix(v: &Value, at: &str, rows: usize, cols: usize) -> Parsed<Matrix> {
    array_of_len(v, at, rows)?
        .iter()
        .enumerate()
        .map(|(i, row)| vector(row, &format!("{at}/{i}"), cols))
        .collect()
}

fn matrices(v: &Value, at: &str, count: usize, rows: usize, cols: usize) -> Parsed<Vec<Matrix>> {
    array_of_len(v, at, count)?
        .iter()
        .enumerate()
        .map(|(i, m)| matrix(m, &format!("{at}/{i}"), rows, cols))
        .collect()
}

fn to_complex(m: &Matrix) -> ComplexMatrix64 {
    let cols = m.first().map_or(0, Vec::len);
    ComplexMatrix64::from_fn(m.len(), cols, |i, j| Complex64::new(m[i][j][0], m[i][j][1]))
}

fn from_complex(m: &ComplexMatrix64) -> Matrix {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn same_bits(a: &[Entry], b: &[Entry]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x[0].to_bits() == y[0].to_bits() && x[1].to_bits() == y[1].to_bits())
}

fn same_matrix_bits(a: &Matrix, b: &Matrix) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same_bits(x, y))
}

impl StateDocument {
    fn new(kind: DocumentKind, dims: Vec<usize>, data: Data) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_owned(),
            kind,
            dims,
            data,
            basis_a: None,
            priors: None,
        }
    }

    pub fn density(rho: &DensityMatrix64) -> Self {
        Self::new(DocumentKind::Density, vec![rho.dim()], Data::Matrix(from_complex(rho.matrix())))
    }

    /// `basis_a` is written only for a non-computational reference basis.
    pub fn bipartite(rho: &BipartiteState64) -> Self {
        let mut doc = Self::new(
            DocumentKind::Bipartite,
            vec![rho.n_a(), rho.n_b()],
            Data::Matrix(from_complex(rho.matrix())),
        );
        if !rho.has_computational_basis() {
            doc.basis_a = Some(from_complex(rho.basis_a()));
        }
        doc
    }

    /// `dims` is `[d]` when `split` is `None`, else `[n_a, n_b]`.
    pub fn pure(psi: &[Complex64], split: Option<(usize, usize)>) -> Self {
        let dims = split.map_or(vec![psi.len()], |(a, b)| vec![a, b]);
        Self::new(DocumentKind::Pure, dims, Data::Vector(psi.iter().map(|z| [z.re, z.im]).collect()))
    }

    pub fn ensemble(e: &Ensemble64) -> Self {
        let mut doc = Self::new(
            DocumentKind::Ensemble,
            vec![e.len(), e.dim()],
            Data::Matrices(e.members().iter().map(|(_, r)| from_complex(r.matrix())).collect()),
        );
        doc.priors = Some(e.priors());
        doc
    }

    pub fn channel(ch: &KrausChannel64) -> Self {
        Self::new(
            DocumentKind::Channel,
            vec![ch.len(), ch.dim_out(), ch.dim_in()],
            Data::Matrices(ch.operators().iter().map(from_complex).collect()),
        )
    }

    /// Compact JSON with a trailing newline.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(self).expect("documents hold only finite-or-null numbers");
        out.push(b'\n');
        out
    }

    /// Equality with doubles compared by bit pattern.
    pub fn bit_identical(&self, other: &Self) -> bool {
        let data = match (&self.data, &other.data) {
            (Data::Vector(a), Data::Vector(b)) => same_bits(a, b),
            (Data::Matrix(a), Data::Matrix(b)) => same_matrix_bits(a, b),
            (Data::Matrices(a), Data::Matrices(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same_matrix_bits(x, y))
            }
            _ => false,
        };
        let basis = match (&self.basis_a, &other.basis_a) {
            (None, None) => true,
            (Some(a), Some(b)) => same_matrix_bits(a, b),
            _ => false,
        };
        let priors = match (&self.priors, &other.priors) {
            (None, None) => true,
            (Some(a), Some(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()),
            _ => false,
        };
        self.schema_version == other.schema_version
            && self.kind == other.kind
            && self.dims == other.dims
            && data
            && basis
            && priors
    }

    /// Builds the library object for the document kind.
    pub fn validate(&self) -> Parsed<()> {
        match self.kind {
            DocumentKind::Density => self.to_density().map(drop),
            DocumentKind::Bipartite => self.to_bipartite().map(drop),
            DocumentKind::Pure if self.dims.len() == 2 => self.to_bipartite().map(drop),
            DocumentKind::Pure => self.to_density().map(drop),
            DocumentKind::Ensemble => self.to_ensemble().map(drop),
            DocumentKind::Channel => self.to_channel().map(drop),
        }
    }

    fn wrong_kind(&self, wanted: &str) -> DocumentError {
        DocumentError::schema("/kind", format!("expected {wanted}, found {}", self.kind))
    }

    fn single_matrix(&self) -> Parsed<&Matrix> {
        match &self.data {
            Data::Matrix(m) => Ok(m),
            _ => Err(DocumentError::schema("/data", "expected a matrix")),
        }
    }

    fn vector_data(&self) -> Parsed<Vec<Complex64>> {
        match &self.data {
            Data::Vector(v) => Ok(v.iter().map(|e| Complex64::new(e[0], e[1])).collect()),
            _ => Err(DocumentError::schema("/data", "expected a vector")),
        }
    }

    fn matrix_list(&self) -> Parsed<Vec<ComplexMatrix64>> {
        match &self.data {
            Data::Matrices(ms) => Ok(ms.iter().map(to_complex).collect()),
            _ => Err(DocumentError::schema("/data", "expected a list of matrices")),
        }
    }

    /// Density, bipartite and pure documents.
    pub fn to_density(&self) -> Parsed<DensityMatrix64> {
        match self.kind {
            DocumentKind::Density => Ok(DensityMatrix64::new(to_complex(self.single_matrix()?))?),
            DocumentKind::Bipartite => Ok(self.to_bipartite()?.state().clone()),
            DocumentKind::Pure if self.dims.len() == 2 => Ok(self.to_bipartite()?.state().clone()),
            DocumentKind::Pure => Ok(DensityMatrix64::pure(&self.vector_data()?)?),
            _ => Err(self.wrong_kind("density, bipartite or pure")),
        }
    }

    /// Bipartite and two-factor pure documents.
    pub fn to_bipartite(&self) -> Parsed<BipartiteState64> {
        let state = match self.kind {
            DocumentKind::Bipartite => DensityMatrix64::new(to_complex(self.single_matrix()?))?,
            DocumentKind::Pure if self.dims.len() == 2 => DensityMatrix64::pure(&self.vector_data()?)?,
            _ => return Err(self.wrong_kind("bipartite or two-factor pure")),
        };
        let (n_a, n_b) = (self.dims[0], self.dims[1]);
        Ok(match &self.basis_a {
            None => BipartiteState64::new(state, n_a, n_b)?,
            Some(b) => BipartiteState64::with_basis(state, n_a, n_b, to_complex(b))?,
        })
    }

    pub fn to_ensemble(&self) -> Parsed<Ensemble64> {
        if self.kind != DocumentKind::Ensemble {
            return Err(self.wrong_kind("ensemble"));
        }
        let priors = self
            .priors
            .as_ref()
            .ok_or_else(|| DocumentError::schema("", "missing field 'priors'"))?;
        let members = priors
            .iter()
            .zip(self.matrix_list()?)
            .map(|(&p, m)| Ok((p, DensityMatrix64::new(m)?)))
            .collect::<Parsed<Vec<_>>>()?;
        Ok(Ensemble64::new(members)?)
    }

    pub fn to_channel(&self) -> Parsed<KrausChannel64> {
        if self.kind != DocumentKind::Channel {
            return Err(self.wrong_kind("channel"));
        }
        Ok(KrausChannel64::new(self.matrix_list()?)?)
    }

    /// A single-operator channel document holding a unitary; its columns
    /// are the basis vectors.
    pub fn to_basis(&self) -> Parsed<ComplexMatrix64> {
        if self.kind != DocumentKind::Channel || self.dims[0] != 1 || self.dims[1] != self.dims[2] {
            return Err(self.wrong_kind("a channel with one square unitary operator"));
        }
        let u = self.matrix_list()?.remove(0);
        Ok(KrausChannel64::unitary(u.clone()).map(|_| u)?)
    }
}
