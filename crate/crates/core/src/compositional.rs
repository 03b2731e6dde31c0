//! Simplex data and the maps between the simplex and Euclidean space.
//!
//! All statistics in this crate operate on Helmert-transformed data: the
//! sub-matrix `H` of the Helmert matrix without its first row has
//! orthonormal rows summing to zero, so `y = H x` is an isometry from the
//! zero-sum hyperplane containing the simplex onto `R^(D-1)`.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Default tolerance on the unit-sum constraint for ingested data.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// A point on the simplex: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition(Vec<f64>);

impl Composition {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_composition(&values, DEFAULT_TOLERANCE)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn parts(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Composition {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Checks that `values` lie on the simplex up to `tolerance` and returns
/// them clamped at zero and renormalised to sum to one.
pub fn validate_composition(values: &[f64], tolerance: f64) -> Result<Composition> {
    if values.len() < 2 {
        return Err(Error::InvalidDimension(format!(
            "a composition needs at least 2 parts, got {}",
            values.len()
        )));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidComposition(format!("part {i} is not finite ({v})")));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| v < -tolerance) {
        return Err(Error::InvalidComposition(format!("part {i} is negative ({v})")));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > tolerance {
        return Err(Error::InvalidComposition(format!("parts sum to {sum}, not 1")));
    }
    let clamped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    Ok(Composition(clamped.into_iter().map(|v| v / total).collect()))
}

/// `n` compositions with `D` parts each, stored one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionalSample {
    data: DMatrix<f64>,
}

impl CompositionalSample {
    pub fn from_compositions(rows: &[Composition]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                have: rows.len(),
            });
        }
        let parts = rows[0].parts();
        if let Some(bad) = rows.iter().find(|r| r.parts() != parts) {
            return Err(Error::DimensionMismatch {
                expected: parts,
                found: bad.parts(),
            });
        }
        let data = DMatrix::from_fn(rows.len(), parts, |i, j| rows[i].values()[j]);
        Ok(Self { data })
    }

    /// Validates each row with the default tolerance.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows_with_tolerance(rows, DEFAULT_TOLERANCE)
    }

    pub fn from_rows_with_tolerance(rows: Vec<Vec<f64>>, tolerance: f64) -> Result<Self> {
        let comps = rows
            .iter()
            .map(|r| validate_composition(r, tolerance))
            .collect::<Result<Vec<_>>>()?;
        Self::from_compositions(&comps)
    }

    /// Wraps a matrix whose rows are already known to be compositions.
    pub(crate) fn from_matrix_unchecked(data: DMatrix<f64>) -> Self {
        Self { data }
    }

    /// Reads a headerless or headed CSV file with one composition per row.
    pub fn read_csv(path: impl AsRef<Path>, tolerance: f64) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file, tolerance)
    }

    /// Parses CSV input. A first row that does not parse as numbers is treated
    /// as a header; every other row must have the same number of numeric
    /// columns.
    pub fn from_csv_reader<R: Read>(reader: R, tolerance: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width: Option<usize> = None;
        for (idx, record) in rdr.records().enumerate() {
            let line = idx + 1;
            let record = record.map_err(|e| Error::Parse {
                row: line,
                column: 0,
                message: e.to_string(),
            })?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: Vec<std::result::Result<f64, _>> = record.iter().map(|f| f.parse::<f64>()).collect();
            if idx == 0 && parsed.iter().all(|p| p.is_err()) {
                continue;
            }
            let mut row = Vec::with_capacity(parsed.len());
            for (col, p) in parsed.into_iter().enumerate() {
                row.push(p.map_err(|e| Error::Parse {
                    row: line,
                    column: col + 1,
                    message: format!("{e}: {:?}", &record[col]),
                })?);
            }
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Parse {
                        row: line,
                        column: row.len(),
                        message: format!("expected {w} columns, found {}", row.len()),
                    })
                }
                _ => {}
            }
            let comp = validate_composition(&row, tolerance).map_err(|e| Error::Parse {
                row: line,
                column: 0,
                message: e.to_string(),
            })?;
            rows.push(comp.into_inner());
        }
        let comps: Vec<Composition> = rows.into_iter().map(Composition).collect();
        Self::from_compositions(&comps)
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    /// Number of parts `D`.
    pub fn parts(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    /// Column-wise arithmetic mean.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.data.row_sum().iter().map(|s| s / n).collect()
    }
}

/// `n` observations in `R^d`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanSample {
    data: DMatrix<f64>,
}

impl EuclideanSample {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::InvalidDimension("zero-dimensional sample".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite observation".into()));
        }
        Ok(Self { data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    pub fn mean(&self) -> DVector<f64> {
        self.data.row_mean().transpose()
    }

    /// Applies `y ↦ A y` to every observation.
    pub fn map_linear(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.ncols(),
            });
        }
        Self::new(&self.data * a.transpose())
    }

    /// Adds `shift` to every observation.
    pub fn translate(&self, shift: &DVector<f64>) -> Self {
        let mut data = self.data.clone();
        for mut row in data.row_iter_mut() {
            row += shift.transpose();
        }
        Self { data }
    }

    /// Builds a sample from the rows listed in `indices`.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let data = DMatrix::from_fn(indices.len(), self.dim(), |i, j| self.data[(indices[i], j)]);
        Self { data }
    }
}

/// The `(D-1) × D` Helmert sub-matrix.
///
/// Row `k` (1-based) holds `1/√(k(k+1))` in its first `k` entries,
/// `-k/√(k(k+1))` in entry `k+1` and zeros after.
pub fn helmert_submatrix(parts: usize) -> Result<DMatrix<f64>> {
    if parts < 2 {
        return Err(Error::InvalidDimension(format!(
            "Helmert sub-matrix needs D >= 2, got {parts}"
        )));
    }
    let mut h = DMatrix::zeros(parts - 1, parts);
    for r in 0..parts - 1 {
        let k = (r + 1) as f64;
        let norm = (k * (k + 1.0)).sqrt();
        for c in 0..=r {
            h[(r, c)] = 1.0 / norm;
        }
        h[(r, r + 1)] = -k / norm;
    }
    Ok(h)
}

/// Maps every composition `x` to `H x`.
pub fn helmert_transform(sample: &CompositionalSample) -> EuclideanSample {
    let h = helmert_submatrix(sample.parts()).expect("samples have at least 2 parts");
    EuclideanSample {
        data: sample.matrix() * h.transpose(),
    }
}

/// Inverse additive log-ratio: `x_i = e^{v_i} / (1 + Σ e^{v_j})`, with the
/// last part `1 / (1 + Σ e^{v_j})`.
pub fn alr_inverse(v: &[f64]) -> Result<Composition> {
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite log-ratio {bad}")));
    }
    // The implicit last log-ratio is 0; shift everything by the joint max.
    let shift = v.iter().copied().fold(0.0_f64, f64::max);
    let mut out: Vec<f64> = v.iter().map(|x| (x - shift).exp()).collect();
    out.push((-shift).exp());
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    Ok(Composition(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn helmert_d2_is_single_contrast() {
        let h = helmert_submatrix(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(h[(0, 0)], s, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(0, 1)], -s, epsilon = 1e-15);
    }

    #[test]
    fn helmert_d3_second_row() {
        let h = helmert_submatrix(3).unwrap();
        let s6 = 6f64.sqrt();
        for (c, want) in [1.0 / s6, 1.0 / s6, -2.0 / s6].iter().enumerate() {
            assert_abs_diff_eq!(h[(1, c)], want, epsilon = 1e-15);
        }
    }

    /// Gram–Schmidt on the contrasts e_1 + .. + e_k - k e_{k+1} must
    /// reproduce the closed-form rows.
    #[test]
    fn helmert_matches_gram_schmidt() {
        for parts in 2..8 {
            let h = helmert_submatrix(parts).unwrap();
            let mut basis: Vec<Vec<f64>> = Vec::new();
            for k in 1..parts {
                let mut v = vec![0.0; parts];
                v.iter_mut().take(k).for_each(|x| *x = 1.0);
                v[k] = -(k as f64);
                for b in &basis {
                    let dot: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(b).for_each(|(a, b)| *a -= dot * b);
                }
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.iter_mut().for_each(|a| *a /= norm);
                basis.push(v);
            }
            for (r, b) in basis.iter().enumerate() {
                for c in 0..parts {
                    assert_abs_diff_eq!(h[(r, c)], b[c], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn helmert_rejects_d1() {
        assert!(matches!(helmert_submatrix(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn helmert_orthonormal_and_zero_sum() {
        for parts in 2..=20 {
            let h = helmert_submatrix(parts).unwrap();
            let g = &h * h.transpose();
            let eye = DMatrix::<f64>::identity(parts - 1, parts - 1);
            assert!((g - eye).amax() < 1e-12);
            assert!(h.column_sum().amax() < 1e-12);
        }
    }

    #[test]
    fn uniform_composition_maps_to_origin() {
        let s = CompositionalSample::from_rows(vec![vec![0.25; 4], vec![0.25; 4]]).unwrap();
        let y = helmert_transform(&s);
        assert!(y.matrix().amax() < 1e-15);
        assert_eq!(y.dim(), 3);
    }

    #[test]
    fn transform_preserves_distances() {
        let rows = vec![
            vec![0.1, 0.2, 0.3, 0.4],
            vec![0.4, 0.3, 0.2, 0.1],
            vec![0.7, 0.1, 0.1, 0.1],
            vec![0.0, 0.5, 0.5, 0.0],
        ];
        let s = CompositionalSample::from_rows(rows.clone()).unwrap();
        let y = helmert_transform(&s);
        for i in 0..4 {
            for j in 0..4 {
                let dx: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum();
                let dy = (y.row(i) - y.row(j)).norm_squared();
                assert_abs_diff_eq!(dx, dy, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn alr_inverse_examples() {
        let c = alr_inverse(&[0.0, 0.0, 0.0]).unwrap();
        for v in c.values() {
            assert_abs_diff_eq!(*v, 0.25, epsilon = 1e-15);
        }
        let c = alr_inverse(&[2f64.ln()]).unwrap();
        assert_abs_diff_eq!(c.values()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.values()[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn alr_inverse_large_entry_does_not_overflow() {
        // With v = (700, 0): x = (1/(1 + 2e^-700), e^-700/(1+2e^-700), same).
        let c = alr_inverse(&[700.0, 0.0]).unwrap();
        let tiny = (-700f64).exp();
        assert_abs_diff_eq!(c.values()[0], 1.0 / (1.0 + 2.0 * tiny), epsilon = 1e-15);
        assert!((c.values()[1] / tiny - 1.0).abs() < 1e-12);
        assert!((c.values()[2] / tiny - 1.0).abs() < 1e-12);
        assert_abs_diff_eq!(c.values().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn validate_examples() {
        let c = validate_composition(&[0.25; 4], 1e-12).unwrap();
        assert_eq!(c.values(), &[0.25; 4]);
        let err = validate_composition(&[0.5, 0.5, 0.1], 1e-8).unwrap_err();
        assert!(err.to_string().contains("1.1"));
        let c = validate_composition(&[0.5, 0.5, -1e-15], 1e-12).unwrap();
        assert_eq!(c.values()[2], 0.0);
        assert_abs_diff_eq!(c.values().iter().sum::<f64>(), 1.0, epsilon = 1e-16);
        assert!(validate_composition(&[1.2, -0.2], 1e-8).is_err());
    }

    #[test]
    fn sample_needs_two_rows_and_equal_parts() {
        assert!(CompositionalSample::from_rows(vec![vec![0.5, 0.5]]).is_err());
        assert!(matches!(
            CompositionalSample::from_rows(vec![vec![0.5, 0.5], vec![0.2, 0.3, 0.5]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn csv_with_header_and_ragged_row() {
        let text = "a,b,c\n0.2,0.3,0.5\n0.1,0.1,0.8\n";
        let s = CompositionalSample::from_csv_reader(text.as_bytes(), 1e-8).unwrap();
        assert_eq!((s.len(), s.parts()), (2, 3));

        let ragged = "0.2,0.3,0.5\n0.5,0.5\n";
        match CompositionalSample::from_csv_reader(ragged.as_bytes(), 1e-8) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let bad = "0.2,0.3,0.5\n0.2,x,0.5\n";
        match CompositionalSample::from_csv_reader(bad.as_bytes(), 1e-8) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn zero_parts_are_allowed() {
        let s = CompositionalSample::from_rows(vec![vec![0.0, 1.0, 0.0], vec![0.5, 0.0, 0.5]]).unwrap();
        assert_eq!(helmert_transform(&s).len(), 2);
    }
}
