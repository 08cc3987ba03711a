//! Finite-dimensional subalgebras `B (⊕ₖ M_{nₖ} ⊗ 1_{mₖ}) B*` and the tracial
//! conditional expectation onto them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{c64, eigh, frobenius, hs_inner, identity, trace, zeros, ComplexMatrix, MatrixJson};

/// Unitarity tolerance for the basis, and the tolerance of the algebraic
/// checks in [`validate_expectation`].
pub const SPEC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SubalgebraSpec {
    dim: usize,
    blocks: Vec<(usize, usize)>,
    /// `None` is the standard basis.
    basis: Option<ComplexMatrix>,
}

fn basis_unitarity_defect(b: &ComplexMatrix) -> f64 {
    frobenius(&(b.adjoint() * b - identity(b.nrows())))
}

impl SubalgebraSpec {
    /// Builds a spec, checking the block sizes and the unitarity of `basis`.
    pub fn new(blocks: Vec<(usize, usize)>, basis: Option<ComplexMatrix>) -> Result<Self> {
        let spec = Self::new_unchecked(blocks, basis)?;
        if let Some(b) = &spec.basis {
            let defect = basis_unitarity_defect(b);
            if defect > SPEC_TOL {
                return Err(Error::SpecInconsistent {
                    property: "basis unitarity".into(),
                    detail: format!("‖B*B − 1‖₂ = {defect:e}"),
                });
            }
        }
        Ok(spec)
    }

    /// Checks only the block sizes; the basis is taken as given.
    pub fn new_unchecked(blocks: Vec<(usize, usize)>, basis: Option<ComplexMatrix>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|&(n, m)| n == 0 || m == 0) {
            return invalid("blocks must be non-empty with positive sizes");
        }
        let dim: usize = blocks.iter().map(|&(n, m)| n * m).sum();
        if let Some(b) = &basis {
            if b.nrows() != dim || b.ncols() != dim {
                return invalid(format!("basis is {}x{}, blocks need {dim}", b.nrows(), b.ncols()));
            }
        }
        Ok(SubalgebraSpec { dim, blocks, basis })
    }

    /// The whole matrix algebra: E is the identity.
    pub fn full(dim: usize) -> Self {
        Self::new_unchecked(vec![(dim, 1)], None).expect("valid blocks")
    }

    /// Multiples of the identity: E(X) = Tr(X)/d · 1.
    pub fn trivial(dim: usize) -> Self {
        Self::new_unchecked(vec![(1, dim)], None).expect("valid blocks")
    }

    /// Diagonal matrices in the standard basis.
    pub fn pinching(dim: usize) -> Self {
        Self::new_unchecked(vec![(1, 1); dim], None).expect("valid blocks")
    }

    /// `M_{n₁} ⊗ 1_{n₂}` in the standard basis; E traces out the second factor.
    pub fn first_factor(n1: usize, n2: usize) -> Self {
        Self::new_unchecked(vec![(n1, n2)], None).expect("valid blocks")
    }

    /// `1_{n₁} ⊗ M_{n₂}`; E traces out the first factor. Realized with the
    /// swap basis that maps the rotated index `a·n₁ + b` to `b·n₂ + a`.
    pub fn second_factor(n1: usize, n2: usize) -> Self {
        let dim = n1 * n2;
        let mut swap = zeros(dim);
        for a in 0..n2 {
            for b in 0..n1 {
                swap[(b * n2 + a, a * n1 + b)] = c64(1.0, 0.0);
            }
        }
        Self::new_unchecked(vec![(n2, n1)], Some(swap)).expect("valid blocks")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn basis(&self) -> Option<&ComplexMatrix> {
        self.basis.as_ref()
    }

    /// Same algebra expressed in a rotated basis `U·B`.
    pub fn rotated(&self, u: &ComplexMatrix) -> Result<Self> {
        let b = match &self.basis {
            Some(b) => u * b,
            None => u.clone(),
        };
        Self::new(self.blocks.clone(), Some(b))
    }

    /// `B* X B`.
    pub fn to_rotated(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match &self.basis {
            Some(b) => b.adjoint() * x * b,
            None => x.clone(),
        }
    }

    /// `B Y B*`.
    pub fn from_rotated(&self, y: &ComplexMatrix) -> ComplexMatrix {
        match &self.basis {
            Some(b) => b * y * b.adjoint(),
            None => y.clone(),
        }
    }

    fn check_dim(&self, x: &ComplexMatrix) -> Result<()> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return invalid(format!(
                "matrix is {}x{}, subalgebra lives in dimension {}",
                x.nrows(),
                x.ncols(),
                self.dim
            ));
        }
        Ok(())
    }

    /// The Hilbert–Schmidt orthogonal projection onto the subalgebra.
    pub fn conditional_expectation(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(x)?;
        let y = self.to_rotated(x);
        let mut out = zeros(self.dim);
        let mut offset = 0;
        for &(n, m) in &self.blocks {
            let scale = 1.0 / m as f64;
            for a in 0..n {
                for ap in 0..n {
                    let mut acc = c64(0.0, 0.0);
                    for c in 0..m {
                        acc += y[(offset + a * m + c, offset + ap * m + c)];
                    }
                    acc *= scale;
                    for b in 0..m {
                        out[(offset + a * m + b, offset + ap * m + b)] = acc;
                    }
                }
            }
            offset += n * m;
        }
        Ok(self.from_rotated(&out))
    }

    /// Whether `x` lies in the subalgebra, i.e. `E(x) = x` to `tol` (entrywise, relative).
    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> Result<bool> {
        let ex = self.conditional_expectation(x)?;
        let scale = 1.0 + crate::matrix::max_abs_entry(x);
        Ok(crate::matrix::max_abs_entry(&(ex - x)) <= tol * scale)
    }
}

/// For a single-block spec `(n, m)`, traces out the multiplicity factor in the
/// rotated basis and returns the `n × n` result.
pub fn partial_trace_view(spec: &SubalgebraSpec, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    spec.check_dim(x)?;
    let [(n, m)] = spec.blocks[..] else {
        return invalid(format!(
            "partial trace view needs exactly one block, spec has {}",
            spec.blocks.len()
        ));
    };
    let y = spec.to_rotated(x);
    Ok(ComplexMatrix::from_fn(n, n, |a, ap| {
        (0..m).map(|c| y[(a * m + c, ap * m + c)]).sum()
    }))
}

/// Outcome of [`validate_expectation`]: the worst defect seen for each property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationDiagnostics {
    pub basis_unitarity: f64,
    pub idempotence: f64,
    pub self_adjointness: f64,
    pub trace_preservation: f64,
    pub unitality: f64,
    pub choi_min_eigenvalue: f64,
}

fn matrix_unit(dim: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut e = zeros(dim);
    e[(a, b)] = c64(1.0, 0.0);
    e
}

/// Choi matrix `Σ_{ab} |a⟩⟨b| ⊗ Φ(|a⟩⟨b|)` of a linear map on `dim × dim` matrices.
pub fn choi_matrix<F>(dim: usize, mut map: F) -> Result<ComplexMatrix>
where
    F: FnMut(&ComplexMatrix) -> Result<ComplexMatrix>,
{
    let mut j = zeros(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let image = map(&matrix_unit(dim, a, b))?;
            j.view_mut((a * dim, b * dim), (dim, dim)).copy_from(&image);
        }
    }
    Ok(j)
}

fn fail(property: &str, value: f64) -> Error {
    Error::SpecInconsistent {
        property: property.into(),
        detail: format!("defect {value:e} exceeds {SPEC_TOL:e}"),
    }
}

/// Checks on the matrix-unit basis that E is an idempotent, HS-self-adjoint,
/// trace-preserving, unital, completely positive map.
pub fn validate_expectation(spec: &SubalgebraSpec) -> Result<ExpectationDiagnostics> {
    let d = spec.dim;
    let basis_unitarity = spec.basis.as_ref().map_or(0.0, basis_unitarity_defect);
    if basis_unitarity > SPEC_TOL {
        return Err(fail("basis unitarity", basis_unitarity));
    }

    let units: Vec<ComplexMatrix> = (0..d * d).map(|k| matrix_unit(d, k / d, k % d)).collect();
    let images = units
        .iter()
        .map(|u| spec.conditional_expectation(u))
        .collect::<Result<Vec<_>>>()?;

    let mut idempotence: f64 = 0.0;
    let mut trace_preservation: f64 = 0.0;
    for (u, eu) in units.iter().zip(&images) {
        let eeu = spec.conditional_expectation(eu)?;
        idempotence = idempotence.max(frobenius(&(eeu - eu)));
        trace_preservation = trace_preservation.max((trace(eu) - trace(u)).norm());
    }
    if idempotence > SPEC_TOL {
        return Err(fail("idempotence", idempotence));
    }
    if trace_preservation > SPEC_TOL {
        return Err(fail("trace preservation", trace_preservation));
    }

    let mut self_adjointness: f64 = 0.0;
    for (i, x) in units.iter().enumerate() {
        for (j, y) in units.iter().enumerate() {
            let lhs = hs_inner(&images[i], y)?;
            let rhs = hs_inner(x, &images[j])?;
            self_adjointness = self_adjointness.max((lhs - rhs).norm());
        }
    }
    if self_adjointness > SPEC_TOL {
        return Err(fail("Hilbert-Schmidt self-adjointness", self_adjointness));
    }

    let unitality = frobenius(&(spec.conditional_expectation(&identity(d))? - identity(d)));
    if unitality > SPEC_TOL {
        return Err(fail("unitality", unitality));
    }

    let choi = choi_matrix(d, |x| spec.conditional_expectation(x))?;
    let choi_min_eigenvalue = eigh(&choi)?.min_eigenvalue();
    if choi_min_eigenvalue < -SPEC_TOL {
        return Err(fail("complete positivity", -choi_min_eigenvalue));
    }

    Ok(ExpectationDiagnostics {
        basis_unitarity,
        idempotence,
        self_adjointness,
        trace_preservation,
        unitality,
        choi_min_eigenvalue,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum BasisJson {
    Named(String),
    Matrix(MatrixJson),
}

/// Wire form `{"dim": d, "blocks": [[n,m],...], "basis": matrix-JSON | "identity"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecJson {
    dim: usize,
    blocks: Vec<(usize, usize)>,
    basis: BasisJson,
}

impl From<&SubalgebraSpec> for SpecJson {
    fn from(spec: &SubalgebraSpec) -> Self {
        SpecJson {
            dim: spec.dim,
            blocks: spec.blocks.clone(),
            basis: match &spec.basis {
                Some(b) => BasisJson::Matrix(MatrixJson::from_matrix(b)),
                None => BasisJson::Named("identity".into()),
            },
        }
    }
}

impl TryFrom<SpecJson> for SubalgebraSpec {
    type Error = Error;

    fn try_from(json: SpecJson) -> Result<Self> {
        let basis = match json.basis {
            BasisJson::Named(name) if name == "identity" => None,
            BasisJson::Named(other) => return invalid(format!("unknown basis name {other:?}")),
            BasisJson::Matrix(m) => Some(m.to_matrix()?),
        };
        let spec = SubalgebraSpec::new(json.blocks, basis)?;
        if spec.dim != json.dim {
            return invalid(format!("blocks give dimension {}, declared {}", spec.dim, json.dim));
        }
        Ok(spec)
    }
}

impl Serialize for SubalgebraSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubalgebraSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = SpecJson::deserialize(d)?;
        SubalgebraSpec::try_from(json).map_err(serde::de::Error::custom)
    }
}
