//! Simulation designs: null and alternative distributions for the size and
//! power experiments, plus bivariate designs for population values.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, StudentT};
use rankindep::rng::{derive_seed, stream_rng};
use rankindep::{rank_transform, DataMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Distribution of one observation vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeneratorFamily {
    /// `N_p(0, I)`.
    GaussIid,
    /// `W^(1/3)`, `W ~ N_p(0, I)`.
    GaussCopulaCube,
    /// `W^3`, `W ~ N_p(0, I)`.
    GaussCopulaCubed,
    /// Independent t-distributed entries with 3 degrees of freedom.
    StudentT3,
    /// `(w, sin 2πw, cos 2πw, sin 4πw, cos 4πw)`, `w ~ N_{p/5}`.
    DenseTrig,
    /// `(w, log w^2)`, `w ~ N_{p/2}`.
    DenseLog,
    /// The trigonometric block on 10 coordinates, the rest independent noise.
    SparseTrig,
    /// The log block on 10 coordinates, the rest independent noise.
    SparseLog,
    /// `N_p(0, R*)` with four random nonzero correlations.
    SparseCorrGauss,
    /// `sin(2π Z^(1/3) / 3)`, `Z ~ N_p(0, R*)`.
    SparseCorrSin13,
    /// `sin(π Z^3 / 4)`, `Z ~ N_p(0, R*)`.
    SparseCorrSin3,
    /// `(cos θ, sin θ)`, `θ ~ U[0, 2π)`.
    CircleUniform,
    /// Bivariate Gaussian with unit variances and correlation `rho`.
    GaussPair { rho: f64 },
}

impl GeneratorFamily {
    /// Short label, as accepted by [`FromStr`].
    pub fn label(&self) -> String {
        match self {
            GeneratorFamily::GaussIid => "5a".into(),
            GeneratorFamily::GaussCopulaCube => "5b".into(),
            GeneratorFamily::GaussCopulaCubed => "5c".into(),
            GeneratorFamily::StudentT3 => "5d".into(),
            GeneratorFamily::DenseTrig => "6a".into(),
            GeneratorFamily::DenseLog => "6b".into(),
            GeneratorFamily::SparseTrig => "7a".into(),
            GeneratorFamily::SparseLog => "7b".into(),
            GeneratorFamily::SparseCorrGauss => "8a".into(),
            GeneratorFamily::SparseCorrSin13 => "8b".into(),
            GeneratorFamily::SparseCorrSin3 => "8c".into(),
            GeneratorFamily::CircleUniform => "circle".into(),
            GeneratorFamily::GaussPair { rho } => format!("gauss2:{rho}"),
        }
    }

    /// Whether the coordinates are mutually independent.
    pub fn is_null(&self) -> bool {
        matches!(
            self,
            GeneratorFamily::GaussIid
                | GeneratorFamily::GaussCopulaCube
                | GeneratorFamily::GaussCopulaCubed
                | GeneratorFamily::StudentT3
        ) || matches!(self, GeneratorFamily::GaussPair { rho } if *rho == 0.0)
    }

    /// Checks the dimension constraints of the family.
    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        let bad = |msg: String| Err(SimError::SpecInvalid(format!("{}: {msg}", self.label())));
        if n == 0 {
            return bad("n must be positive".into());
        }
        match self {
            GeneratorFamily::DenseTrig if p == 0 || !p.is_multiple_of(5) => {
                bad(format!("p = {p} must be a positive multiple of 5"))
            }
            GeneratorFamily::DenseLog if p == 0 || !p.is_multiple_of(2) => {
                bad(format!("p = {p} must be a positive multiple of 2"))
            }
            GeneratorFamily::SparseTrig | GeneratorFamily::SparseLog if p < 10 => {
                bad(format!("p = {p} must be at least 10"))
            }
            GeneratorFamily::SparseCorrGauss
            | GeneratorFamily::SparseCorrSin13
            | GeneratorFamily::SparseCorrSin3
                if p < 4 =>
            {
                bad(format!(
                    "p = {p} leaves fewer than four upper-triangle entries"
                ))
            }
            GeneratorFamily::CircleUniform | GeneratorFamily::GaussPair { .. } if p != 2 => {
                bad(format!("p = {p}, but this design is bivariate"))
            }
            GeneratorFamily::GaussPair { rho } if rho.is_nan() || rho.abs() >= 1.0 => {
                bad(format!("rho = {rho} must lie in (-1, 1)"))
            }
            _ if p < 2 => bad(format!("p = {p}, need at least two coordinates")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for GeneratorFamily {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let family = match s.trim().to_ascii_lowercase().as_str() {
            "5a" => GeneratorFamily::GaussIid,
            "5b" => GeneratorFamily::GaussCopulaCube,
            "5c" => GeneratorFamily::GaussCopulaCubed,
            "5d" => GeneratorFamily::StudentT3,
            "6a" => GeneratorFamily::DenseTrig,
            "6b" => GeneratorFamily::DenseLog,
            "7a" => GeneratorFamily::SparseTrig,
            "7b" => GeneratorFamily::SparseLog,
            "8a" => GeneratorFamily::SparseCorrGauss,
            "8b" => GeneratorFamily::SparseCorrSin13,
            "8c" => GeneratorFamily::SparseCorrSin3,
            "circle" => GeneratorFamily::CircleUniform,
            other => match other.strip_prefix("gauss2:").map(str::parse::<f64>) {
                Some(Ok(rho)) => GeneratorFamily::GaussPair { rho },
                _ => return Err(SimError::SpecInvalid(format!("unknown design `{s}`"))),
            },
        };
        Ok(family)
    }
}

/// One dataset request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: GeneratorFamily,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: GeneratorFamily, n: usize, p: usize, seed: u64) -> Result<Self> {
        family.validate(n, p)?;
        Ok(Self { family, n, p, seed })
    }
}

const MAX_REDRAWS: u64 = 16;

/// Draws one `n x p` dataset.
///
/// A floating-point collision inside a column would create a tie; the whole
/// dataset is then re-drawn from a derived seed.
pub fn generate(spec: &GeneratorSpec) -> Result<DataMatrix> {
    spec.family.validate(spec.n, spec.p)?;
    for attempt in 0..MAX_REDRAWS {
        let seed = if attempt == 0 {
            spec.seed
        } else {
            derive_seed(spec.seed, attempt)
        };
        let values = draw(spec.family, spec.n, spec.p, &mut stream_rng(seed, 0));
        let data = DataMatrix::from_column_major(spec.n, spec.p, values)?;
        match rank_transform(&data) {
            Ok(_) => return Ok(data),
            Err(rankindep::Error::TiesPresent { column, .. }) => {
                log::warn!(
                    "tie in column {column} of a {} dataset (seed {seed}); re-drawing",
                    spec.family
                );
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(SimError::SpecInvalid(format!(
        "{} keeps producing ties at n = {}",
        spec.family, spec.n
    )))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

// Column-major n x p values; row i is observation i.
fn draw(family: GeneratorFamily, n: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = vec![0.0; n * p];
    let mut set = |i: usize, j: usize, v: f64| out[j * n + i] = v;
    match family {
        GeneratorFamily::GaussIid
        | GeneratorFamily::GaussCopulaCube
        | GeneratorFamily::GaussCopulaCubed => {
            let f: fn(f64) -> f64 = match family {
                GeneratorFamily::GaussCopulaCube => f64::cbrt,
                GeneratorFamily::GaussCopulaCubed => |w| w * w * w,
                _ => |w| w,
            };
            for i in 0..n {
                for j in 0..p {
                    set(i, j, f(normal(rng)));
                }
            }
        }
        GeneratorFamily::StudentT3 => {
            let t3 = StudentT::new(3.0).expect("3 degrees of freedom");
            for i in 0..n {
                for j in 0..p {
                    set(i, j, rng.sample(t3));
                }
            }
        }
        GeneratorFamily::DenseTrig | GeneratorFamily::SparseTrig => {
            let q = if family == GeneratorFamily::DenseTrig {
                p / 5
            } else {
                2
            };
            for i in 0..n {
                for l in 0..q {
                    let w = normal(rng);
                    let block = [
                        w,
                        (2.0 * PI * w).sin(),
                        (2.0 * PI * w).cos(),
                        (4.0 * PI * w).sin(),
                        (4.0 * PI * w).cos(),
                    ];
                    for (b, v) in block.into_iter().enumerate() {
                        set(i, b * q + l, v);
                    }
                }
                for j in 5 * q..p {
                    set(i, j, normal(rng));
                }
            }
        }
        GeneratorFamily::DenseLog | GeneratorFamily::SparseLog => {
            let q = if family == GeneratorFamily::DenseLog {
                p / 2
            } else {
                5
            };
            for i in 0..n {
                for l in 0..q {
                    let w = normal(rng);
                    set(i, l, w);
                    set(i, q + l, (w * w).ln());
                }
                for j in 2 * q..p {
                    set(i, j, normal(rng));
                }
            }
        }
        GeneratorFamily::SparseCorrGauss
        | GeneratorFamily::SparseCorrSin13
        | GeneratorFamily::SparseCorrSin3 => {
            let factor = correlation_factor(&sparse_correlation(p, rng));
            let f: fn(f64) -> f64 = match family {
                GeneratorFamily::SparseCorrSin13 => |z| (2.0 * PI * z.cbrt() / 3.0).sin(),
                GeneratorFamily::SparseCorrSin3 => |z| (PI * z * z * z / 4.0).sin(),
                _ => |z| z,
            };
            for i in 0..n {
                let g = DVector::from_fn(p, |_, _| normal(rng));
                let z = &factor * g;
                for j in 0..p {
                    set(i, j, f(z[j]));
                }
            }
        }
        GeneratorFamily::CircleUniform => {
            for i in 0..n {
                let theta = rng.random_range(0.0..2.0 * PI);
                set(i, 0, theta.cos());
                set(i, 1, theta.sin());
            }
        }
        GeneratorFamily::GaussPair { rho } => {
            let c = (1.0 - rho * rho).sqrt();
            for i in 0..n {
                let (a, b) = (normal(rng), normal(rng));
                set(i, 0, a);
                set(i, 1, rho * a + c * b);
            }
        }
    }
    out
}

/// The random correlation-type matrix `R* = (1 + δ) I + Δ`.
///
/// `Δ` is symmetric with four nonzero upper-triangle entries at distinct
/// uniformly chosen positions, magnitudes uniform on `[0, 1)`. The shift
/// `δ = 0.05 - λ_min(I + Δ)` is applied only when `I + Δ` is not positive
/// definite.
pub fn sparse_correlation(p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let upper = p * (p - 1) / 2;
    let mut m = DMatrix::identity(p, p);
    for pos in index::sample(rng, upper, 4).into_iter() {
        let (j, k) = upper_position(p, pos);
        let v: f64 = rng.random();
        m[(j, k)] = v;
        m[(k, j)] = v;
    }
    let lambda_min = SymmetricEigen::new(m.clone()).eigenvalues.min();
    if lambda_min <= 0.0 {
        let delta = -lambda_min + 0.05;
        for j in 0..p {
            m[(j, j)] += delta;
        }
    }
    m
}

// Position `pos` of the row-major strict upper triangle as `(row, col)`.
fn upper_position(p: usize, mut pos: usize) -> (usize, usize) {
    for j in 0..p {
        let len = p - 1 - j;
        if pos < len {
            return (j, j + 1 + pos);
        }
        pos -= len;
    }
    unreachable!("position beyond the upper triangle")
}

/// Lower Cholesky factor, with a tiny diagonal jitter if the plain
/// factorization fails.
pub fn correlation_factor(r: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = r.clone().cholesky() {
        return chol.l();
    }
    log::warn!("Cholesky failed on the correlation matrix; adding 1e-10 to the diagonal");
    let jittered = r + DMatrix::identity(r.nrows(), r.ncols()) * 1e-10;
    jittered
        .cholesky()
        .expect("shifted matrix is positive definite")
        .l()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for label in [
            "5a",
            "5b",
            "5c",
            "5d",
            "6a",
            "6b",
            "7a",
            "7b",
            "8a",
            "8b",
            "8c",
            "circle",
            "gauss2:0.3",
        ] {
            let f: GeneratorFamily = label.parse().unwrap();
            assert_eq!(f.label(), label);
        }
        assert!("9z".parse::<GeneratorFamily>().is_err());
    }

    #[test]
    fn upper_positions_cover_triangle() {
        let p = 5;
        let all: Vec<_> = (0..10).map(|pos| upper_position(p, pos)).collect();
        assert_eq!(all[0], (0, 1));
        assert_eq!(all[3], (0, 4));
        assert_eq!(all[4], (1, 2));
        assert_eq!(all[9], (3, 4));
    }

    #[test]
    fn dimension_constraints() {
        use GeneratorFamily::*;
        assert!(DenseTrig.validate(10, 12).is_err());
        assert!(DenseTrig.validate(10, 15).is_ok());
        assert!(DenseLog.validate(10, 7).is_err());
        assert!(SparseTrig.validate(10, 9).is_err());
        assert!(SparseLog.validate(10, 10).is_ok());
        assert!(CircleUniform.validate(10, 3).is_err());
        assert!(GaussPair { rho: 1.0 }.validate(10, 2).is_err());
        assert!(GaussIid.validate(10, 1).is_err());
        assert!(SparseCorrGauss.validate(10, 3).is_err());
    }
}
