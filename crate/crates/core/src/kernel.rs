//! Discrete spaces and pair-cost kernels.
//!
//! A [`KernelMatrix`] is the realization of a symmetric pair cost
//! `c: X × X → [0, +∞]` on a finite point set. Entries may be `+∞`; the
//! arithmetic convention everywhere in this crate is `∞ · 0 = 0`.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("empty point set")]
    EmptySpace,
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("non-finite coordinate in point {0}")]
    BadCoordinate(usize),
    #[error("matrix is not square: row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry ({0}, {1}) is negative or NaN")]
    NegativeEntry(usize, usize),
    #[error("entries ({0}, {1}) and ({1}, {0}) differ")]
    Asymmetric(usize, usize),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("infinite entry at ({0}, {1})")]
    InfiniteEntry(usize, usize),
    #[error("circulant profile is not symmetric at index {0}")]
    AsymmetricProfile(usize),
    #[error("circulant kernels need the cyclic points 0..{0} on a line")]
    NotCyclic(usize),
    #[error("invalid kernel parameter: {0}")]
    BadParameter(String),
    #[error("radial profile has no value for distance {0}")]
    MissingDistance(f64),
    #[error("expansion has {rows} basis rows but {coeffs} coefficients")]
    ExpansionShape { rows: usize, coeffs: usize },
    #[error("malformed CSV at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A finite set of distinct points in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpace {
    points: Vec<Vec<f64>>,
}

impl DiscreteSpace {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, KernelError> {
        let first = points.first().ok_or(KernelError::EmptySpace)?;
        let dim = first.len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(KernelError::DimensionMismatch {
                    index: i,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(KernelError::BadCoordinate(i));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(KernelError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(Self { points })
    }

    /// Points on the real line.
    pub fn line(coords: &[f64]) -> Result<Self, KernelError> {
        Self::new(coords.iter().map(|&x| vec![x]).collect())
    }

    /// The cyclic group `ℤ/n` realized as the integers `0..n` on a line.
    pub fn cyclic(n: usize) -> Result<Self, KernelError> {
        Self::new((0..n).map(|i| vec![i as f64]).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Parses the `m,d` header format followed by `m` lines of coordinates.
    pub fn from_csv(text: &str) -> Result<Self, KernelError> {
        let mut lines = data_lines(text);
        let (line_no, header) = lines.next().ok_or(KernelError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = split_fields(header);
        if header.len() != 2 {
            return Err(KernelError::Parse {
                line: line_no,
                msg: "header must be `m,d`".into(),
            });
        }
        let m: usize = parse_field(header[0], line_no)?;
        let d: usize = parse_field(header[1], line_no)?;
        let mut points = Vec::with_capacity(m);
        for (line_no, line) in lines.by_ref().take(m) {
            let fields = split_fields(line);
            if fields.len() != d {
                return Err(KernelError::Parse {
                    line: line_no,
                    msg: format!("expected {d} coordinates, found {}", fields.len()),
                });
            }
            let p = fields
                .iter()
                .map(|f| parse_field::<f64>(f, line_no))
                .collect::<Result<Vec<_>, _>>()?;
            points.push(p);
        }
        if points.len() != m {
            return Err(KernelError::Parse {
                line: line_no + points.len() + 1,
                msg: format!("expected {m} points, found {}", points.len()),
            });
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(KernelError::Parse {
                line: line_no,
                msg: "trailing data".into(),
            });
        }
        Self::new(points)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.len(), self.dim());
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|&x| format_real(x)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Value assigned to `c(x, x)` for kernels that are singular on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagPolicy {
    Cap(f64),
    Infinite,
}

impl DiagPolicy {
    fn value(self) -> Result<f64, KernelError> {
        match self {
            DiagPolicy::Cap(v) if v.is_finite() && v >= 0.0 => Ok(v),
            DiagPolicy::Cap(v) => Err(KernelError::BadParameter(format!(
                "diagonal cap must be finite and nonnegative, got {v}"
            ))),
            DiagPolicy::Infinite => Ok(f64::INFINITY),
        }
    }
}

/// Recipe for a kernel on a [`DiscreteSpace`].
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `|x − y|^{−s}`.
    PowerLaw { s: f64, diag: DiagPolicy },
    /// `|log |x − y||`.
    LogKernel { diag: DiagPolicy },
    /// `ℓ(|x − y|)` looked up in a table of `(distance, value)` pairs.
    Radial { profile: Vec<(f64, f64)> },
    /// `ℓ((j − i) mod n)` on the cyclic points `0..n`.
    Circulant { profile: Vec<f64> },
    /// `∑_k a_k ψ_k(x) ψ_k(y)` with `basis[k][i] = ψ_k(x_i)`.
    Expansion { basis: Vec<Vec<f64>>, coeffs: Vec<f64> },
    Explicit(KernelMatrix),
}

/// Symmetric `m × m` matrix with entries in `[0, +∞]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    m: usize,
    data: Vec<f64>,
}

impl KernelMatrix {
    /// Validates a full square matrix. Symmetry is checked exactly.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, KernelError> {
        let m = rows.len();
        if m == 0 {
            return Err(KernelError::EmptySpace);
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(KernelError::NotSquare {
                    row: i,
                    expected: m,
                    found: r.len(),
                });
            }
        }
        for i in 0..m {
            for j in 0..m {
                let v = rows[i][j];
                if v.is_nan() || v < 0.0 {
                    return Err(KernelError::NegativeEntry(i, j));
                }
                if j > i && v != rows[j][i] {
                    return Err(KernelError::Asymmetric(i, j));
                }
            }
        }
        Ok(Self {
            m,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle
    /// (`i ≤ j`) and mirrored, so the result is bitwise symmetric.
    pub fn from_upper<F>(m: usize, mut f: F) -> Result<Self, KernelError>
    where
        F: FnMut(usize, usize) -> Result<f64, KernelError>,
    {
        if m == 0 {
            return Err(KernelError::EmptySpace);
        }
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = f(i, j)?;
                if v.is_nan() || v < 0.0 {
                    return Err(KernelError::NegativeEntry(i, j));
                }
                data[i * m + j] = v;
                data[j * m + i] = v;
            }
        }
        Ok(Self { m, data })
    }

    pub fn identity(m: usize) -> Self {
        Self::from_upper(m, |i, j| Ok(if i == j { 1.0 } else { 0.0 }))
            .expect("identity is a valid kernel")
    }

    pub fn constant(m: usize, value: f64) -> Result<Self, KernelError> {
        Self::from_upper(m, |_, _| Ok(value))
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// First infinite entry in row-major order, if any.
    pub fn first_infinite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| v.is_infinite())
            .map(|k| (k / self.m, k % self.m))
    }

    /// Largest entry; `+∞` if any entry is infinite.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// The kernel restricted to the given point indices, in that order.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self, KernelError> {
        for &i in indices {
            if i >= self.m {
                return Err(KernelError::SizeMismatch(i, self.m));
            }
        }
        Self::from_upper(indices.len(), |a, b| Ok(self.get(indices[a], indices[b])))
    }

    /// Parses the kernel CSV format: a line `m`, then `m` rows of `m`
    /// comma-separated values, `inf` standing for `+∞`.
    pub fn from_csv(text: &str) -> Result<Self, KernelError> {
        let mut lines = data_lines(text);
        let (line_no, header) = lines.next().ok_or(KernelError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let m: usize = parse_field(header.trim(), line_no)?;
        let mut rows = Vec::with_capacity(m);
        let mut last = line_no;
        for (line_no, line) in lines.by_ref().take(m) {
            last = line_no;
            let row = split_fields(line)
                .into_iter()
                .map(|f| parse_extended(f, line_no))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != m {
                return Err(KernelError::Parse {
                    line: line_no,
                    msg: format!("expected {m} values, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.len() != m {
            return Err(KernelError::Parse {
                line: last + 1,
                msg: format!("expected {m} rows, found {}", rows.len()),
            });
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(KernelError::Parse {
                line: line_no,
                msg: "trailing data".into(),
            });
        }
        Self::new(rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.m).unwrap();
        for i in 0..self.m {
            let row: Vec<String> = self.row(i).iter().map(|&x| format_real(x)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn build_kernel(space: &DiscreteSpace, spec: &KernelSpec) -> Result<KernelMatrix, KernelError> {
    let m = space.len();
    match spec {
        KernelSpec::PowerLaw { s, diag } => {
            if !(s.is_finite() && *s > 0.0) {
                return Err(KernelError::BadParameter(format!(
                    "power-law exponent must be positive, got {s}"
                )));
            }
            let d = diag.value()?;
            KernelMatrix::from_upper(m, |i, j| {
                Ok(if i == j {
                    d
                } else {
                    space.distance(i, j).powf(-s)
                })
            })
        }
        KernelSpec::LogKernel { diag } => {
            let d = diag.value()?;
            KernelMatrix::from_upper(m, |i, j| {
                Ok(if i == j {
                    d
                } else {
                    space.distance(i, j).ln().abs()
                })
            })
        }
        KernelSpec::Radial { profile } => {
            for &(r, v) in profile {
                if !(r.is_finite() && r >= 0.0) || v.is_nan() || v < 0.0 {
                    return Err(KernelError::BadParameter(format!(
                        "radial entry ({r}, {v}) out of range"
                    )));
                }
            }
            KernelMatrix::from_upper(m, |i, j| {
                let r = space.distance(i, j);
                profile
                    .iter()
                    .find(|&&(key, _)| same_distance(key, r))
                    .map(|&(_, v)| v)
                    .ok_or(KernelError::MissingDistance(r))
            })
        }
        KernelSpec::Circulant { profile } => {
            let n = profile.len();
            if n != m || space.dim() != 1 {
                return Err(KernelError::NotCyclic(n));
            }
            for (i, p) in space.points().iter().enumerate() {
                if p[0] != i as f64 {
                    return Err(KernelError::NotCyclic(n));
                }
            }
            check_circulant_profile(profile)?;
            KernelMatrix::from_upper(m, |i, j| Ok(profile[(j + n - i) % n]))
        }
        KernelSpec::Expansion { basis, coeffs } => {
            if basis.len() != coeffs.len() {
                return Err(KernelError::ExpansionShape {
                    rows: basis.len(),
                    coeffs: coeffs.len(),
                });
            }
            for (k, row) in basis.iter().enumerate() {
                if row.len() != m {
                    return Err(KernelError::DimensionMismatch {
                        index: k,
                        expected: m,
                        found: row.len(),
                    });
                }
            }
            if let Some(a) = coeffs.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
                return Err(KernelError::BadParameter(format!(
                    "expansion coefficients must be nonnegative, got {a}"
                )));
            }
            KernelMatrix::from_upper(m, |i, j| {
                Ok(basis
                    .iter()
                    .zip(coeffs)
                    .map(|(psi, a)| a * psi[i] * psi[j])
                    .sum())
            })
        }
        KernelSpec::Explicit(k) => {
            if k.size() != m {
                return Err(KernelError::SizeMismatch(k.size(), m));
            }
            Ok(k.clone())
        }
    }
}

pub(crate) fn check_circulant_profile(profile: &[f64]) -> Result<(), KernelError> {
    let n = profile.len();
    if n == 0 {
        return Err(KernelError::EmptySpace);
    }
    for j in 1..n {
        let (a, b) = (profile[j], profile[n - j]);
        if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
            return Err(KernelError::AsymmetricProfile(j));
        }
    }
    Ok(())
}

fn same_distance(key: f64, r: f64) -> bool {
    (key - r).abs() <= 1e-12 * key.abs().max(r.abs()).max(1.0)
}

/// Entrywise (Schur) product of two finite kernels.
pub fn schur_product(a: &KernelMatrix, b: &KernelMatrix) -> Result<KernelMatrix, KernelError> {
    if a.size() != b.size() {
        return Err(KernelError::SizeMismatch(a.size(), b.size()));
    }
    if let Some((i, j)) = a.first_infinite().or_else(|| b.first_infinite()) {
        return Err(KernelError::InfiniteEntry(i, j));
    }
    KernelMatrix::from_upper(a.size(), |i, j| Ok(a.get(i, j) * b.get(i, j)))
}

/// `(C + Cᵀ) / 2` for a square nonnegative matrix.
pub fn symmetrize(c: &[Vec<f64>]) -> Result<KernelMatrix, KernelError> {
    let m = c.len();
    for (i, r) in c.iter().enumerate() {
        if r.len() != m {
            return Err(KernelError::NotSquare {
                row: i,
                expected: m,
                found: r.len(),
            });
        }
        if let Some(j) = r.iter().position(|v| v.is_nan() || *v < 0.0) {
            return Err(KernelError::NegativeEntry(i, j));
        }
    }
    KernelMatrix::from_upper(m, |i, j| Ok(0.5 * c[i][j] + 0.5 * c[j][i]))
}

/// Decimal with 17 significant digits; `inf` for `+∞`.
pub fn format_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn parse_field<T: FromStr>(field: &str, line: usize) -> Result<T, KernelError> {
    field.parse().map_err(|_| KernelError::Parse {
        line,
        msg: format!("cannot parse `{field}`"),
    })
}

fn parse_extended(field: &str, line: usize) -> Result<f64, KernelError> {
    match field {
        "inf" | "+inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        _ => {
            let v: f64 = parse_field(field, line)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(KernelError::Parse {
                    line,
                    msg: format!("`{field}` is not a finite value or `inf`"),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn power_law_on_three_points() {
        let space = DiscreteSpace::line(&[0.0, 1.0, 2.0]).unwrap();
        let spec = KernelSpec::PowerLaw {
            s: 1.0,
            diag: DiagPolicy::Cap(10.0),
        };
        let k = build_kernel(&space, &spec).unwrap();
        let want = [[10.0, 1.0, 0.5], [1.0, 10.0, 1.0], [0.5, 1.0, 10.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(k.get(i, j), want[i][j]));
            }
        }
    }

    #[test]
    fn log_kernel_off_diagonals() {
        let space = DiscreteSpace::line(&[0.0, 1.0, 2.0]).unwrap();
        let k = build_kernel(
            &space,
            &KernelSpec::LogKernel {
                diag: DiagPolicy::Cap(0.0),
            },
        )
        .unwrap();
        assert_eq!(k.get(0, 1), 0.0);
        assert_eq!(k.get(1, 2), 0.0);
        assert!((k.get(0, 2) - 0.693147).abs() < 1e-6);
        assert_eq!(k.get(1, 1), 0.0);
    }

    #[test]
    fn infinite_diagonal_policy() {
        let space = DiscreteSpace::line(&[0.0, 1.0]).unwrap();
        let k = build_kernel(
            &space,
            &KernelSpec::PowerLaw {
                s: 2.0,
                diag: DiagPolicy::Infinite,
            },
        )
        .unwrap();
        assert_eq!(k.get(0, 0), f64::INFINITY);
        assert_eq!(k.get(0, 1), 1.0);
        assert_eq!(k.first_infinite(), Some((0, 0)));
    }

    #[test]
    fn circulant_first_row() {
        let space = DiscreteSpace::cyclic(4).unwrap();
        let k = build_kernel(
            &space,
            &KernelSpec::Circulant {
                profile: vec![2.0, 1.0, 0.0, 1.0],
            },
        )
        .unwrap();
        assert_eq!(k.row(0), &[2.0, 1.0, 0.0, 1.0]);
        assert_eq!(k.row(1), &[1.0, 2.0, 1.0, 0.0]);
        assert_eq!(k.row(2), &[0.0, 1.0, 2.0, 1.0]);
    }

    #[test]
    fn circulant_rejects_asymmetric_profile() {
        let space = DiscreteSpace::cyclic(4).unwrap();
        let err = build_kernel(
            &space,
            &KernelSpec::Circulant {
                profile: vec![2.0, 1.0, 0.0, 0.5],
            },
        )
        .unwrap_err();
        assert_eq!(err, KernelError::AsymmetricProfile(1));
    }

    #[test]
    fn circulant_requires_cyclic_points() {
        let space = DiscreteSpace::line(&[0.0, 2.0, 3.0]).unwrap();
        let err = build_kernel(
            &space,
            &KernelSpec::Circulant {
                profile: vec![1.0, 0.0, 0.0],
            },
        );
        assert!(matches!(err, Err(KernelError::NotCyclic(3))));
    }

    #[test]
    fn expansion_two_points() {
        let space = DiscreteSpace::line(&[0.0, 1.0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k = build_kernel(
            &space,
            &KernelSpec::Expansion {
                basis: vec![vec![h, h], vec![h, -h]],
                coeffs: vec![2.0, 1.0],
            },
        )
        .unwrap();
        assert!(close(k.get(0, 0), 1.5));
        assert!(close(k.get(0, 1), 0.5));
        assert!(close(k.get(1, 1), 1.5));
        assert_eq!(k.get(0, 1).to_bits(), k.get(1, 0).to_bits());
    }

    #[test]
    fn expansion_shape_mismatch() {
        let space = DiscreteSpace::line(&[0.0, 1.0]).unwrap();
        let err = build_kernel(
            &space,
            &KernelSpec::Expansion {
                basis: vec![vec![1.0, 1.0]],
                coeffs: vec![1.0, 2.0],
            },
        )
        .unwrap_err();
        assert_eq!(err, KernelError::ExpansionShape { rows: 1, coeffs: 2 });
    }

    #[test]
    fn radial_exact_lookup() {
        let space = DiscreteSpace::line(&[0.0, 1.0, 3.0]).unwrap();
        let spec = KernelSpec::Radial {
            profile: vec![(0.0, 5.0), (1.0, 2.0), (2.0, 1.0), (3.0, 0.5)],
        };
        let k = build_kernel(&space, &spec).unwrap();
        assert_eq!(k.get(0, 2), 0.5);
        assert_eq!(k.get(1, 2), 1.0);
        let missing = KernelSpec::Radial {
            profile: vec![(0.0, 5.0), (1.0, 2.0)],
        };
        assert!(matches!(
            build_kernel(&space, &missing),
            Err(KernelError::MissingDistance(_))
        ));
    }

    #[test]
    fn space_rejects_coincident_and_ragged() {
        assert_eq!(
            DiscreteSpace::line(&[0.0, 1.0, 0.0]).unwrap_err(),
            KernelError::CoincidentPoints(0, 2)
        );
        assert!(matches!(
            DiscreteSpace::new(vec![vec![0.0], vec![1.0, 2.0]]),
            Err(KernelError::DimensionMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn schur_examples() {
        let a = KernelMatrix::new(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let b = KernelMatrix::new(vec![vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap();
        let p = schur_product(&a, &b).unwrap();
        assert!(close(p.get(0, 1), 0.1));
        assert_eq!(p.get(0, 0), 1.0);
        let ones = KernelMatrix::constant(2, 1.0).unwrap();
        assert_eq!(schur_product(&a, &ones).unwrap(), a);
    }

    #[test]
    fn schur_errors() {
        let a = KernelMatrix::identity(2);
        let b = KernelMatrix::identity(3);
        assert_eq!(schur_product(&a, &b), Err(KernelError::SizeMismatch(2, 3)));
        let inf = KernelMatrix::new(vec![vec![1.0, f64::INFINITY], vec![f64::INFINITY, 1.0]]).unwrap();
        assert_eq!(schur_product(&a, &inf), Err(KernelError::InfiniteEntry(0, 1)));
    }

    #[test]
    fn symmetrize_examples() {
        let s = symmetrize(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(s.rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = symmetrize(&[vec![1.0, 3.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(s.rows(), vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        let sym = vec![vec![1.0, 0.25], vec![0.25, 7.0]];
        assert_eq!(symmetrize(&sym).unwrap().rows(), sym);
        assert_eq!(
            symmetrize(&[vec![1.0, -1.0], vec![0.0, 1.0]]),
            Err(KernelError::NegativeEntry(0, 1))
        );
    }

    #[test]
    fn kernel_new_validates() {
        assert_eq!(
            KernelMatrix::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]),
            Err(KernelError::Asymmetric(0, 1))
        );
        assert_eq!(
            KernelMatrix::new(vec![vec![-1.0]]),
            Err(KernelError::NegativeEntry(0, 0))
        );
    }

    #[test]
    fn kernel_csv_round_trip_with_infinity() {
        let k = KernelMatrix::new(vec![
            vec![0.1, f64::INFINITY, 1.0 / 3.0],
            vec![f64::INFINITY, 2.0, 0.0],
            vec![1.0 / 3.0, 0.0, 1e-300],
        ])
        .unwrap();
        let text = k.to_csv();
        assert!(text.starts_with("3\n"));
        assert!(text.contains("inf"));
        assert_eq!(KernelMatrix::from_csv(&text).unwrap(), k);
    }

    #[test]
    fn kernel_csv_errors_name_the_line() {
        let err = KernelMatrix::from_csv("2\n1,0\n0,x\n").unwrap_err();
        assert!(matches!(err, KernelError::Parse { line: 3, .. }));
        let err = KernelMatrix::from_csv("2\n1,0\n").unwrap_err();
        assert!(matches!(err, KernelError::Parse { .. }));
    }

    #[test]
    fn space_csv_round_trip() {
        let s = DiscreteSpace::new(vec![vec![0.0, 1.0], vec![0.5, -2.25], vec![1e-3, 7.0]]).unwrap();
        assert_eq!(DiscreteSpace::from_csv(&s.to_csv()).unwrap(), s);
        assert!(DiscreteSpace::from_csv("2,1\n0\n").is_err());
    }

    #[test]
    fn restriction_keeps_order() {
        let k = KernelMatrix::new(vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 5.0],
            vec![3.0, 5.0, 6.0],
        ])
        .unwrap();
        let r = k.restrict(&[2, 0]).unwrap();
        assert_eq!(r.rows(), vec![vec![6.0, 3.0], vec![3.0, 1.0]]);
    }
}
