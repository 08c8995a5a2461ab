use super::NumericsError;

fn check_len(u: &[f64], v: &[f64]) -> Result<(), NumericsError> {
    if u.len() != v.len() {
        return Err(NumericsError::GridMismatch { left: u.len(), right: v.len() });
    }
    Ok(())
}

/// Counting-measure L1 distance `Σ |u_n - v_n|`.
pub fn l1_distance(u: &[f64], v: &[f64]) -> Result<f64, NumericsError> {
    check_len(u, v)?;
    Ok(u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum())
}

/// Total-variation distance between two pmfs, half the L1 distance.
pub fn tv_distance(u: &[f64], v: &[f64]) -> Result<f64, NumericsError> {
    Ok(0.5 * l1_distance(u, v)?)
}

/// L1 distance under quadrature weights, `Σ w_i |u_i - v_i|`.
pub fn l1_distance_weighted(u: &[f64], v: &[f64], weights: &[f64]) -> Result<f64, NumericsError> {
    check_len(u, v)?;
    check_len(u, weights)?;
    Ok(u.iter().zip(v).zip(weights).map(|((a, b), w)| w * (a - b).abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        let u = [0.2, 0.3, 0.5];
        assert_eq!(l1_distance(&u, &u).unwrap(), 0.0);
        assert_eq!(l1_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((l1_distance(&[0.5, 0.5], &[0.25, 0.75]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mismatch_is_reported() {
        assert_eq!(l1_distance(&[1.0], &[0.5, 0.5]), Err(NumericsError::GridMismatch { left: 1, right: 2 }));
    }

    fn pmf(raw: Vec<f64>) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / s).collect()
    }

    proptest! {
        #[test]
        fn triangle_inequality(
            a in prop::collection::vec(0.01f64..1.0, 6),
            b in prop::collection::vec(0.01f64..1.0, 6),
            c in prop::collection::vec(0.01f64..1.0, 6),
        ) {
            let (a, b, c) = (pmf(a), pmf(b), pmf(c));
            let ab = l1_distance(&a, &b).unwrap();
            let bc = l1_distance(&b, &c).unwrap();
            let ac = l1_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-15);
            prop_assert!((ab - l1_distance(&b, &a).unwrap()).abs() < 1e-15);
            prop_assert!(ab >= 0.0);
        }
    }
}
