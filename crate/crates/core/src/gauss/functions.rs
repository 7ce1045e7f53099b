use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean function of a process, given as a closed-form descriptor so states
/// serialize exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MeanFn {
    Zero,
    Constant { value: f64 },
    Linear { weights: Vec<f64>, intercept: f64 },
    /// Weighted sum of basis functions; produced when a weight-space prior
    /// is pushed forward to a process.
    BasisCombination {
        basis: Vec<BasisFn>,
        coefficients: Vec<f64>,
    },
}

impl MeanFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            MeanFn::Zero => 0.0,
            MeanFn::Constant { value } => *value,
            MeanFn::Linear { weights, intercept } => {
                weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + intercept
            }
            MeanFn::BasisCombination { basis, coefficients } => basis
                .iter()
                .zip(coefficients)
                .map(|(b, c)| c * b.eval(x))
                .sum(),
        }
    }
}

/// One coordinate of a feature map: a constant, a coordinate, or a product
/// of two coordinates. Affine and quadratic models are spanned by these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "fn", rename_all = "kebab-case")]
pub enum BasisFn {
    Constant,
    Coord { index: usize },
    CoordProduct { left: usize, right: usize },
}

impl BasisFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BasisFn::Constant => 1.0,
            BasisFn::Coord { index } => x[*index],
            BasisFn::CoordProduct { left, right } => x[*left] * x[*right],
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        match self {
            BasisFn::Constant => None,
            BasisFn::Coord { index } => Some(*index),
            BasisFn::CoordProduct { left, right } => Some(*left.max(right)),
        }
    }

    /// Affine model on n inputs: the n coordinates plus a constant.
    pub fn affine(n: usize) -> Vec<BasisFn> {
        let mut basis: Vec<BasisFn> = (0..n).map(|index| BasisFn::Coord { index }).collect();
        basis.push(BasisFn::Constant);
        basis
    }

    /// Quadratic ("elliptic") model on n inputs: coordinates, unordered
    /// coordinate products, and a constant. Products are kept with
    /// `left ≤ right` so the basis stays linearly independent.
    pub fn elliptic(n: usize) -> Vec<BasisFn> {
        let mut basis: Vec<BasisFn> = (0..n).map(|index| BasisFn::Coord { index }).collect();
        for left in 0..n {
            for right in left..n {
                basis.push(BasisFn::CoordProduct { left, right });
            }
        }
        basis.push(BasisFn::Constant);
        basis
    }
}

fn lex_le(x: &[f64], z: &[f64]) -> bool {
    for (a, b) in x.iter().zip(z) {
        if a < b {
            return true;
        }
        if a > b {
            return false;
        }
    }
    x.len() <= z.len()
}

/// Covariance function families. All of them are symmetric; the white-noise
/// family compares inputs by exact coordinate equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CovFn {
    SquaredExponential {
        signal_variance: f64,
        length_scale: f64,
    },
    /// `k(x,z) = φ(x)ᵀ Σ φ(z)` for the feature map φ given by `basis`.
    DotProduct {
        basis: Vec<BasisFn>,
        weight_cov: Vec<Vec<f64>>,
    },
    Constant {
        value: f64,
    },
    WhiteNoise {
        variance: f64,
    },
    Sum {
        terms: Vec<CovFn>,
    },
}

impl CovFn {
    pub fn squared_exponential(signal_variance: f64, length_scale: f64) -> Result<Self> {
        if signal_variance <= 0.0 {
            return Err(Error::BadVariance {
                value: signal_variance,
            });
        }
        if length_scale <= 0.0 {
            return Err(Error::BadVariance {
                value: length_scale,
            });
        }
        Ok(CovFn::SquaredExponential {
            signal_variance,
            length_scale,
        })
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match self {
            CovFn::SquaredExponential {
                signal_variance,
                length_scale,
            } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                signal_variance * (-d2 / (2.0 * length_scale * length_scale)).exp()
            }
            CovFn::DotProduct { basis, weight_cov } => {
                // Canonicalize the argument order so the float summation
                // runs identically for (x,z) and (z,x).
                let (a, b) = if lex_le(x, z) { (x, z) } else { (z, x) };
                let phi_a: Vec<f64> = basis.iter().map(|f| f.eval(a)).collect();
                let phi_b: Vec<f64> = basis.iter().map(|f| f.eval(b)).collect();
                let mut total = 0.0;
                for (i, row) in weight_cov.iter().enumerate() {
                    for (j, w) in row.iter().enumerate() {
                        total += phi_a[i] * w * phi_b[j];
                    }
                }
                total
            }
            CovFn::Constant { value } => *value,
            CovFn::WhiteNoise { variance } => {
                if x.len() == z.len() && x.iter().zip(z).all(|(a, b)| a == b) {
                    *variance
                } else {
                    0.0
                }
            }
            CovFn::Sum { terms } => terms.iter().map(|t| t.eval(x, z)).sum(),
        }
    }

    /// Effective covariance with white observation noise added on the
    /// diagonal: `κ = k + white(σ²)`, so `κ(x,x) = k(x,x) + σ²` while
    /// off-diagonal values are untouched.
    pub fn with_noise(self, variance: f64) -> Result<CovFn> {
        if variance < 0.0 {
            return Err(Error::BadVariance { value: variance });
        }
        Ok(CovFn::Sum {
            terms: vec![self, CovFn::WhiteNoise { variance }],
        })
    }

    /// Structural validation for descriptors built from untrusted input.
    pub fn validate(&self) -> Result<()> {
        match self {
            CovFn::SquaredExponential {
                signal_variance,
                length_scale,
            } => {
                if *signal_variance <= 0.0 {
                    return Err(Error::BadVariance {
                        value: *signal_variance,
                    });
                }
                if *length_scale <= 0.0 {
                    return Err(Error::BadVariance {
                        value: *length_scale,
                    });
                }
            }
            CovFn::DotProduct { basis, weight_cov } => {
                let p = basis.len();
                if weight_cov.len() != p || weight_cov.iter().any(|r| r.len() != p) {
                    return Err(Error::DimensionMismatch {
                        what: "dot-product covariance".to_owned(),
                        detail: format!("weight covariance is not {p}×{p}"),
                    });
                }
            }
            CovFn::Constant { value } => {
                if *value < 0.0 {
                    return Err(Error::BadVariance { value: *value });
                }
            }
            CovFn::WhiteNoise { variance } => {
                if *variance < 0.0 {
                    return Err(Error::BadVariance { value: *variance });
                }
            }
            CovFn::Sum { terms } => {
                for t in terms {
                    t.validate()?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn se_kernel_peaks_at_coincident_inputs() {
        let k = CovFn::squared_exponential(1.0, 1.0).unwrap();
        assert_eq!(k.eval(&[0.7], &[0.7]), 1.0);
        assert!(k.eval(&[0.0], &[3.0]) < 0.02);
    }

    #[test]
    fn noise_adds_only_on_the_diagonal() {
        let k = CovFn::squared_exponential(1.0, 1.0)
            .unwrap()
            .with_noise(0.25)
            .unwrap();
        assert_eq!(k.eval(&[2.0], &[2.0]), 1.25);
        let base = CovFn::squared_exponential(1.0, 1.0).unwrap();
        assert_eq!(k.eval(&[1.0], &[2.0]), base.eval(&[1.0], &[2.0]));
    }

    #[test]
    fn zero_noise_is_the_identity() {
        let base = CovFn::squared_exponential(2.0, 0.5).unwrap();
        let k = base.clone().with_noise(0.0).unwrap();
        for (x, z) in [(0.0, 0.0), (0.3, 1.4), (-2.0, 2.0)] {
            assert_eq!(k.eval(&[x], &[z]), base.eval(&[x], &[z]));
        }
    }

    #[test]
    fn negative_noise_is_rejected() {
        let err = CovFn::squared_exponential(1.0, 1.0)
            .unwrap()
            .with_noise(-0.1)
            .unwrap_err();
        assert!(matches!(err, Error::BadVariance { .. }));
    }

    #[test]
    fn dot_product_on_the_affine_basis() {
        let k = CovFn::DotProduct {
            basis: BasisFn::affine(1),
            weight_cov: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        // k(x,z) = xz + 1
        assert_eq!(k.eval(&[2.0], &[3.0]), 7.0);
        assert_eq!(k.eval(&[0.0], &[5.0]), 1.0);
    }

    #[test]
    fn elliptic_basis_counts() {
        assert_eq!(BasisFn::affine(2).len(), 3);
        assert_eq!(BasisFn::elliptic(2).len(), 6); // 2 coords + 3 products + 1
    }

    #[test]
    fn descriptors_round_trip_through_json() {
        let means = [
            MeanFn::Zero,
            MeanFn::Constant { value: 2.5 },
            MeanFn::Linear {
                weights: vec![0.1, -0.7],
                intercept: 0.3,
            },
            MeanFn::BasisCombination {
                basis: BasisFn::elliptic(2),
                coefficients: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            },
        ];
        for mean in means {
            let text = serde_json::to_string(&mean).unwrap();
            let back: MeanFn = serde_json::from_str(&text).unwrap();
            assert_eq!(back, mean);
        }
        let covs = [
            CovFn::squared_exponential(1.25, 0.75).unwrap(),
            CovFn::DotProduct {
                basis: BasisFn::affine(1),
                weight_cov: vec![vec![1.0, 0.1], vec![0.1, 2.0]],
            },
            CovFn::squared_exponential(1.0, 1.0)
                .unwrap()
                .with_noise(0.3)
                .unwrap(),
        ];
        for cov in covs {
            let text = serde_json::to_string(&cov).unwrap();
            let back: CovFn = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cov);
        }
    }

    #[test]
    fn mean_families_evaluate() {
        assert_eq!(MeanFn::Zero.eval(&[4.0]), 0.0);
        assert_eq!(MeanFn::Constant { value: 2.5 }.eval(&[4.0]), 2.5);
        let lin = MeanFn::Linear {
            weights: vec![2.0, -1.0],
            intercept: 0.5,
        };
        assert_eq!(lin.eval(&[1.0, 3.0]), -0.5);
        let combo = MeanFn::BasisCombination {
            basis: BasisFn::affine(1),
            coefficients: vec![3.0, 1.0],
        };
        assert_eq!(combo.eval(&[2.0]), 7.0);
    }
}
