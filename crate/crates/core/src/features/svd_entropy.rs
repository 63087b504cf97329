use super::{require_len, FeatureError};

pub const DEFAULT_EMBED_DIM: usize = 10;

const JACOBI_MAX_SWEEPS: usize = 60;

/// Singular values of the delay-embedding matrix of `x` (delay 1,
/// `embed_dim` columns, `N - embed_dim + 1` rows), in descending order.
///
/// Uses one-sided Jacobi rotations on the columns, which keeps full relative
/// accuracy on the small singular values.
pub fn singular_values(x: &[f64], embed_dim: usize) -> Result<Vec<f64>, FeatureError> {
    if embed_dim < 2 {
        return Err(FeatureError::BadEmbedDim(embed_dim));
    }
    require_len(x, 2 * embed_dim)?;
    let rows = x.len() - embed_dim + 1;
    // column-major: column c is x[c..c + rows]
    let mut cols: Vec<Vec<f64>> = (0..embed_dim).map(|c| x[c..c + rows].to_vec()).collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..embed_dim - 1 {
            for q in p + 1..embed_dim {
                let (left, right) = cols.split_at_mut(q);
                let (a, b) = (&mut left[p], &mut right[0]);
                let alpha: f64 = a.iter().map(|v| v * v).sum();
                let beta: f64 = b.iter().map(|v| v * v).sum();
                let gamma: f64 = a.iter().zip(b.iter()).map(|(u, v)| u * v).sum();
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (u, v) in a.iter_mut().zip(b.iter_mut()) {
                    let (x0, y0) = (*u, *v);
                    *u = c * x0 - s * y0;
                    *v = s * x0 + c * y0;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Shannon entropy (natural log) of the normalized singular values of the
/// delay-embedding matrix. Lies in `[0, ln(embed_dim)]`.
pub fn svd_entropy(x: &[f64], embed_dim: usize) -> Result<f64, FeatureError> {
    let sv = singular_values(x, embed_dim)?;
    let total: f64 = sv.iter().sum();
    if total <= 0.0 {
        return Err(FeatureError::DegenerateMatrix);
    }
    let h = -sv
        .iter()
        .map(|s| s / total)
        .filter(|p| *p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>();
    Ok(h.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_has_zero_entropy() {
        let h = svd_entropy(&[2.5; 40], 10).unwrap();
        assert!(h.abs() < 1e-12, "{h}");
    }

    #[test]
    fn zero_signal_is_degenerate() {
        assert_eq!(svd_entropy(&[0.0; 40], 10), Err(FeatureError::DegenerateMatrix));
    }

    #[test]
    fn length_and_dim_checks() {
        assert!(matches!(
            svd_entropy(&[1.0; 19], 10),
            Err(FeatureError::TooShort { len: 19, min: 20 })
        ));
        assert_eq!(svd_entropy(&[1.0; 19], 1), Err(FeatureError::BadEmbedDim(1)));
    }

    #[test]
    fn scale_invariant() {
        let x: Vec<f64> = (0..60).map(|i| ((i * 7919) % 31) as f64 - 10.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let (a, b) = (svd_entropy(&x, 10).unwrap(), svd_entropy(&y, 10).unwrap());
        assert!((a - b).abs() < 1e-12);
        assert!(a > 0.0 && a <= 10f64.ln());
    }

    #[test]
    fn sinusoid_has_rank_two() {
        // a pure sinusoid embeds into a 2-dimensional subspace
        let x: Vec<f64> = (0..200).map(|i| (0.3 * i as f64).sin()).collect();
        let sv = singular_values(&x, 6).unwrap();
        assert!(sv[2] < 1e-10 * sv[0]);
        assert!(sv[1] > 1e-3 * sv[0]);
    }
}
