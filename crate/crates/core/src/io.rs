//! File formats: JSON matrices and certificates, CSV curves.
//!
//! Floats are written by `serde_json` in shortest round-trip form, so reading
//! a written matrix back gives the same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::{LabFunction, LoewnerCertificate, Revalidation, SearchMethod};
use crate::operator::{HermitianMatrix, LoewnerPair, C64};
use crate::scalar::DeformationParameter;
use crate::state::CurvePoint;

/// Accepted asymmetry of `re` and antisymmetry defect of `im`.
pub const ENCODING_TOL: f64 = 1e-10;

/// A Hermitian matrix as row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &HermitianMatrix) -> Self {
        let n = m.dim();
        let rows = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(m.get(i, j))).collect()).collect()
        };
        MatrixFile {
            dim: n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<HermitianMatrix> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Malformed("dim must be positive".into()));
        }
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != n || part.iter().any(|r| r.len() != n) {
                return Err(Error::Malformed(format!("{name} must be a {n}x{n} array")));
            }
            if part.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Malformed(format!("{name} has non-finite entries")));
            }
        }
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                defect = defect
                    .max((self.re[i][j] - self.re[j][i]).abs())
                    .max((self.im[i][j] + self.im[j][i]).abs());
            }
        }
        if defect > ENCODING_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let data = DMatrix::from_fn(n, n, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        Ok(HermitianMatrix::symmetrized(data))
    }
}

pub fn matrix_to_json(m: &HermitianMatrix) -> String {
    serde_json::to_string(&MatrixFile::from_matrix(m)).expect("finite floats serialize")
}

pub fn matrix_from_json(text: &str) -> Result<HermitianMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("matrix JSON: {e}")))?;
    file.to_matrix()
}

pub fn read_matrix(path: &Path) -> Result<HermitianMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Malformed(format!("cannot read {}: {e}", path.display())))?;
    matrix_from_json(&text)
}

pub fn write_matrix(path: &Path, m: &HermitianMatrix) -> Result<()> {
    fs::write(path, matrix_to_json(m) + "\n")?;
    Ok(())
}

/// JSON form of a [`LoewnerCertificate`] and its re-validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub function: LabFunction,
    pub lambda: DeformationParameter,
    pub method: SearchMethod,
    pub perturbation: f64,
    #[serde(default)]
    pub y: Option<f64>,
    pub a: MatrixFile,
    pub b: MatrixFile,
    pub order_gap: f64,
    pub violation: f64,
    pub violation_tol: f64,
    #[serde(default)]
    pub loewner_point: Option<LoewnerPair>,
    #[serde(default)]
    pub revalidation: Option<Revalidation>,
}

impl CertificateFile {
    pub fn new(cert: &LoewnerCertificate, revalidation: Option<Revalidation>) -> Self {
        CertificateFile {
            function: cert.function,
            lambda: cert.lambda,
            method: cert.method,
            perturbation: cert.perturbation,
            y: cert.y,
            a: MatrixFile::from_matrix(&cert.a),
            b: MatrixFile::from_matrix(&cert.b),
            order_gap: cert.order_gap,
            violation: cert.violation,
            violation_tol: cert.violation_tol,
            loewner_point: cert.loewner_point,
            revalidation,
        }
    }

    pub fn to_certificate(&self) -> Result<LoewnerCertificate> {
        Ok(LoewnerCertificate {
            function: self.function,
            lambda: self.lambda,
            a: self.a.to_matrix()?,
            b: self.b.to_matrix()?,
            order_gap: self.order_gap,
            violation: self.violation,
            violation_tol: self.violation_tol,
            perturbation: self.perturbation,
            method: self.method,
            y: self.y,
            loewner_point: self.loewner_point,
        })
    }
}

pub fn certificate_from_json(text: &str) -> Result<LoewnerCertificate> {
    let file: CertificateFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("certificate JSON: {e}")))?;
    file.to_certificate()
}

fn push_number(out: &mut String, x: f64) {
    write!(out, "{x:.15e}").expect("writing to a String");
}

/// CSV with columns `t, alpha, dalpha_dt, escort_z, omega_0, …`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let probes = points.first().map_or(0, |p| p.omega.len());
    let mut out = String::from("t,alpha,dalpha_dt,escort_z");
    for i in 0..probes {
        write!(out, ",omega_{i}").expect("writing to a String");
    }
    out.push('\n');
    for p in points {
        for (i, x) in [p.t, p.alpha, p.dalpha_dt, p.escort.z]
            .into_iter()
            .chain(p.omega.iter().copied())
            .enumerate()
        {
            if i > 0 {
                out.push(',');
            }
            push_number(&mut out, x);
        }
        out.push('\n');
    }
    out
}

/// Parses CSV written by [`curve_csv`] into its header and numeric rows.
pub fn parse_curve_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Malformed("empty CSV".into()))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let row = l
                .split(',')
                .map(|x| x.parse::<f64>().map_err(|e| Error::Malformed(format!("CSV value {x:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != header.len() {
                return Err(Error::Malformed("CSV row length differs from header".into()));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_exact() {
        let data = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.1, 0.0),
                C64::new(1.0 / 3.0, -2.0f64.sqrt()),
                C64::new(1.0 / 3.0, 2.0f64.sqrt()),
                C64::new(-1e-300, 0.0),
            ],
        );
        let m = HermitianMatrix::new(data).unwrap();
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_encodings() {
        assert!(matches!(
            matrix_from_json(r#"{"dim":2,"re":[[1,0],[0,1]],"im":[[0,0],[0]]}"#),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            matrix_from_json(r#"{"dim":2,"re":[[1,1],[0,1]],"im":[[0,0],[0,0]]}"#),
            Err(Error::NotHermitian(_))
        ));
        assert!(matches!(
            matrix_from_json(r#"{"dim":1,"re":[[1]],"im":[[0.5]]}"#),
            Err(Error::NotHermitian(_))
        ));
        assert!(matrix_from_json("not json").is_err());
        assert!(matrix_from_json(r#"{"dim":0,"re":[],"im":[]}"#).is_err());
    }

    #[test]
    fn csv_parses_back() {
        let (header, rows) = parse_curve_csv("t,alpha\n1.0e0,2.5e-1\n").unwrap();
        assert_eq!(header, ["t", "alpha"]);
        assert_eq!(rows, vec![vec![1.0, 0.25]]);
        assert!(parse_curve_csv("t,alpha\n1.0\n").is_err());
    }
}
