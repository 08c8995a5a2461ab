use num_complex::Complex64;

use super::DiscreteError;
use crate::models::{BurstPmf, DiscreteBurstModel, RateSeq};

/// Closed-form families recognized for geometric bursts and `γ_n = γ n`.
///
/// Every family is a hypergeometric-type series
/// `p_n ∝ Π_i (a_i)_n / Π_j (b_j)_n · z^n / n!`; the negative binomial is the
/// one-parameter case with no lower parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyParams {
    /// `p_n = (a)_n / n! · p^n (1 - p)^a`
    NegativeBinomial {
        p: f64,
        a: f64,
    },
    /// `p_n ∝ (a1)_n (a2)_n / (b1)_n · b^n / n!`
    Hypergeometric {
        a1: f64,
        a2: f64,
        b1: f64,
        b: f64,
    },
    /// Complex upper/lower parameters (Hill exponents >= 2, or a Hill
    /// exponent of 1 whose upper parameters form a conjugate pair).
    GeneralizedHypergeometric {
        upper: Vec<Complex64>,
        lower: Vec<Complex64>,
        b: f64,
    },
    None,
}

impl FamilyParams {
    fn series(&self) -> Option<(Vec<Complex64>, Vec<Complex64>, f64)> {
        let re = |v: f64| Complex64::new(v, 0.0);
        match self {
            FamilyParams::NegativeBinomial { p, a } => Some((vec![re(*a)], vec![], *p)),
            FamilyParams::Hypergeometric { a1, a2, b1, b } => Some((vec![re(*a1), re(*a2)], vec![re(*b1)], *b)),
            FamilyParams::GeneralizedHypergeometric { upper, lower, b } => Some((upper.clone(), lower.clone(), *b)),
            FamilyParams::None => None,
        }
    }
}

/// Identifies the closed-form stationary family of `model`, if any.
pub fn named_family_params(model: &DiscreteBurstModel) -> Result<FamilyParams, DiscreteError> {
    let BurstPmf::Geometric { b } = *model.burst() else {
        return Ok(FamilyParams::None);
    };
    let Some(gamma) = model.gamma().linear_rate() else {
        return Ok(FamilyParams::None);
    };
    let (basal, slope) = match *model.lambda() {
        RateSeq::Constant { rate } => (rate, 0.0),
        RateSeq::Linear { basal, slope } => (basal, slope),
        RateSeq::Hill(h) => return Ok(hill_family(h, gamma, b)),
        _ => return Ok(FamilyParams::None),
    };
    let p = (slope + b * gamma) / gamma;
    if p >= 1.0 {
        return Err(DiscreteError::NotNormalizable { p });
    }
    Ok(FamilyParams::NegativeBinomial { p, a: basal / (b * gamma + slope) })
}

fn hill_family(h: crate::models::HillParams, gamma: f64, b: f64) -> FamilyParams {
    let (lam, big_l, del, th, n) = (h.scale(), h.denom_const(), h.denom_coeff(), h.numer_coeff(), h.exponent());
    let bgd = b * gamma * del;
    if n == 1.0 {
        let alpha = big_l / del + lam * th / bgd;
        let beta2 = alpha * alpha - 4.0 * lam / bgd;
        let b1 = big_l / del;
        if beta2 >= 0.0 {
            let beta = beta2.sqrt();
            return FamilyParams::Hypergeometric { a1: 0.5 * (alpha - beta), a2: 0.5 * (alpha + beta), b1, b };
        }
        let half = Complex64::new(0.0, 0.5 * (-beta2).sqrt());
        let mid = Complex64::new(0.5 * alpha, 0.0);
        return FamilyParams::GeneralizedHypergeometric {
            upper: vec![mid - half, mid + half],
            lower: vec![Complex64::new(b1, 0.0)],
            b,
        };
    }
    if n.fract() != 0.0 || !(1.0..=64.0).contains(&n) {
        return FamilyParams::None;
    }
    let deg = n as usize;
    // numerator bγΔ s^{N+1} + λΘ s^N + bγΛ s + λ, in descending order
    let mut coeffs = vec![0.0; deg + 2];
    coeffs[0] = bgd;
    coeffs[1] += lam * th;
    coeffs[deg] += b * gamma * big_l;
    coeffs[deg + 1] += lam;
    let upper = polynomial_roots(&coeffs).into_iter().map(|r| -r).collect();
    let radius = (big_l / del).powf(1.0 / n);
    let lower =
        (0..deg).map(|j| -Complex64::from_polar(radius, std::f64::consts::PI * (2 * j + 1) as f64 / n)).collect();
    FamilyParams::GeneralizedHypergeometric { upper, lower, b }
}

/// Roots of `c[0] s^d + ... + c[d]` by Durand–Kerner iteration.
fn polynomial_roots(c: &[f64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    let monic: Vec<Complex64> = c.iter().map(|v| Complex64::new(v / c[0], 0.0)).collect();
    let eval = |s: Complex64| monic.iter().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * s + k);
    let bound = 1.0 + monic[1..].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let seed = Complex64::from_polar(0.4 * bound.clamp(0.9, 10.0), 0.9);
    let mut roots: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32 + 1) * bound.min(10.0)).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            moved = moved.max(step.norm() / (1.0 + roots[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    // snap real roots so conjugate pairs stay exact
    for r in &mut roots {
        if r.im.abs() < 1e-12 * (1.0 + r.re.abs()) {
            r.im = 0.0;
        }
    }
    roots
}

/// Closed-form family pmf on `{0, ..., n_max}`, normalized by the full
/// (untruncated) series.
pub fn family_pmf(params: &FamilyParams, n_max: usize) -> Result<Vec<f64>, DiscreteError> {
    let Some((upper, lower, z)) = params.series() else {
        return Err(DiscreteError::Unsupported("model has no recognized closed form"));
    };
    let ratio = |n: usize| {
        let nf = Complex64::new(n as f64, 0.0);
        let num = upper.iter().fold(Complex64::new(z, 0.0), |acc, a| acc * (nf + a));
        let den = lower.iter().fold(Complex64::new(n as f64 + 1.0, 0.0), |acc, b| acc * (nf + b));
        num / den
    };
    let mut logs = vec![0.0];
    let mut acc = 0.0;
    let mut top = 0.0f64;
    let mut n = 0usize;
    loop {
        let r = ratio(n);
        if !(r.re > 0.0) || r.im.abs() > 1e-8 * r.re {
            return Err(DiscreteError::Unsupported("series ratio is not positive"));
        }
        acc += r.re.ln();
        logs.push(acc);
        n += 1;
        top = top.max(acc);
        if n >= n_max && r.re < 1.0 && acc < top - 50.0 {
            break;
        }
        if n > 10_000_000 {
            return Err(DiscreteError::Unsupported("series did not converge"));
        }
    }
    let z_ln = crate::numerics::log_sum_exp(&logs);
    Ok(logs[..=n_max].iter().map(|l| (l - z_ln).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::stationary_pmf_geometric;
    use crate::models::{DegradationSeq, HillParams};

    fn model(lambda: RateSeq) -> DiscreteBurstModel {
        DiscreteBurstModel::new(lambda, DegradationSeq::LinearDecay { rate: 1.0 }, BurstPmf::geometric(0.5).unwrap())
            .unwrap()
    }

    #[test]
    fn recognizes_examples() {
        let nb = named_family_params(&model(RateSeq::Constant { rate: 1.0 })).unwrap();
        assert_eq!(nb, FamilyParams::NegativeBinomial { p: 0.5, a: 2.0 });
        let h = HillParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        match named_family_params(&model(RateSeq::Hill(h))).unwrap() {
            FamilyParams::Hypergeometric { a1, a2, b1, b } => {
                assert!((a1 - 1.0).abs() < 1e-14 && (a2 - 2.0).abs() < 1e-14);
                assert_eq!((b1, b), (1.0, 0.5));
            }
            other => panic!("{other:?}"),
        }
        let bad = named_family_params(&model(RateSeq::Linear { basal: 1.0, slope: 0.6 }));
        assert!(matches!(bad, Err(DiscreteError::NotNormalizable { p }) if (p - 1.1).abs() < 1e-14));
    }

    #[test]
    fn generalized_family_matches_recurrence() {
        for (n, th) in [(2.0, 0.0), (3.0, 2.0), (4.0, 0.5)] {
            let h = HillParams::new(2.0, 1.5, 0.3, th, n).unwrap();
            let m = model(RateSeq::Hill(h));
            let fam = named_family_params(&m).unwrap();
            assert!(matches!(fam, FamilyParams::GeneralizedHypergeometric { .. }));
            let closed = family_pmf(&fam, 120).unwrap();
            let rec = stationary_pmf_geometric(&m, 120).unwrap();
            let sup = closed.iter().zip(rec.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(sup < 1e-12, "N={n}: {sup}");
        }
    }

    #[test]
    fn conjugate_upper_parameters() {
        // β² < 0: λ large relative to the other terms
        let h = HillParams::new(5.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        let m = model(RateSeq::Hill(h));
        let fam = named_family_params(&m).unwrap();
        assert!(matches!(fam, FamilyParams::GeneralizedHypergeometric { .. }));
        let closed = family_pmf(&fam, 100).unwrap();
        let rec = stationary_pmf_geometric(&m, 100).unwrap();
        let sup = closed.iter().zip(rec.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-12, "{sup}");
    }

    #[test]
    fn durand_kerner_cubic() {
        // (s - 1)(s + 2)(s - 3) = s³ - 2s² - 5s + 6
        let mut r: Vec<f64> = polynomial_roots(&[1.0, -2.0, -5.0, 6.0]).iter().map(|c| c.re).collect();
        r.sort_by(f64::total_cmp);
        for (got, want) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
