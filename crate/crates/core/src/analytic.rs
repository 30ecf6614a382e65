//! Closed-form reliability for independent, identical, exponential
//! components without repair.
//!
//! A `KooN` layer survives while at least `k` of its `n` components do, so
//! its reliability is a binomial tail. The two layers fail independently and
//! the system reliability is the product of the layer reliabilities.

use crate::architecture::{ArchitectureSpec, Layer};
use crate::error::{Error, Result};

/// Largest `n` for which binomial coefficients are computed exactly in
/// integer arithmetic.
pub const EXACT_BINOMIAL_MAX: u32 = 64;

/// `C(n, k)` as an exact integer, or `None` past [`EXACT_BINOMIAL_MAX`].
pub fn binomial_exact(n: u32, k: u32) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    if n > EXACT_BINOMIAL_MAX {
        return None;
    }
    let k = k.min(n - k);
    // Each partial product C(n-k+i, i) is an integer; intermediates stay
    // below C(64,32)·64 < 2^70.
    let mut c: u128 = 1;
    for i in 1..=u128::from(k) {
        c = c * (u128::from(n - k) + i) / i;
    }
    Some(c)
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if let Some(c) = binomial_exact(n, k) {
        return c as f64;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * f64::from(n - k + i) / f64::from(i))
}

/// `Σ_{i=k}^{n} C(n,i) p^i (1-p)^{n-i}`.
pub fn koon_reliability(n: u32, k: u32, p: f64) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::ThresholdOutOfRange {
            layer: "k-out-of-n",
            required: k,
            count: n,
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "survival probability {p} is outside [0, 1]"
        )));
    }
    Ok(koon_with_complement(n, k, p, 1.0 - p))
}

/// Binomial tail with the failure probability `q = 1 - p` supplied by the
/// caller, so that `q` can be formed without cancellation.
///
/// The smaller of the two tails is summed; the other follows as its
/// complement.
pub(crate) fn koon_with_complement(n: u32, k: u32, p: f64, q: f64) -> f64 {
    let term = |i: u32| binomial(n, i) * p.powi(i as i32) * q.powi((n - i) as i32);
    let expected_successes = f64::from(n) * p;
    let value = if f64::from(k) > expected_successes {
        (k..=n).map(term).sum::<f64>()
    } else {
        1.0 - (0..k).map(term).sum::<f64>()
    };
    value.clamp(0.0, 1.0)
}

/// Reliability of one layer at time `t` for component failure rate `lambda`.
pub fn layer_reliability(layer: Layer, lambda: f64, t: f64) -> f64 {
    let x = -lambda * t;
    koon_with_complement(layer.count, layer.required, x.exp(), -x.exp_m1())
}

/// `R(t) = R_sensors(t) · R_mcus(t)`.
pub fn analytic_reliability(spec: &ArchitectureSpec, t: f64) -> f64 {
    layer_reliability(spec.sensors(), spec.lambda_sensor(), t)
        * layer_reliability(spec.mcus(), spec.lambda_mcu(), t)
}

/// Expansion of a layer's reliability into exponentials:
/// `R(t) = Σ_a c_a · exp(-a λ t)`, returned as `(a, c_a)` pairs.
///
/// Expanding `(1 - x)^{n-i}` in each binomial term gives
/// `c_a = Σ_{i=k}^{a} C(n,i) C(n-i,a-i) (-1)^{a-i}` for `k ≤ a ≤ n`.
pub fn layer_exponential_terms(layer: Layer) -> Vec<(u32, f64)> {
    let (n, k) = (layer.count, layer.required);
    (k..=n)
        .map(|a| {
            let c = if n <= EXACT_BINOMIAL_MAX {
                (k..=a)
                    .map(|i| {
                        let mag = binomial_exact(n, i).unwrap() * binomial_exact(n - i, a - i).unwrap();
                        let mag = i128::try_from(mag).expect("3^64 fits in i128");
                        if (a - i) % 2 == 0 {
                            mag
                        } else {
                            -mag
                        }
                    })
                    .sum::<i128>() as f64
            } else {
                (k..=a)
                    .map(|i| {
                        let sign = if (a - i) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binomial(n, i) * binomial(n - i, a - i)
                    })
                    .sum()
            };
            (a, c)
        })
        .filter(|&(_, c)| c != 0.0)
        .collect()
}

/// Mean time to failure of a single layer, `Σ_a c_a / (a λ)`.
pub fn layer_mttf(layer: Layer, lambda: f64) -> f64 {
    layer_exponential_terms(layer)
        .into_iter()
        .map(|(a, c)| c / (f64::from(a) * lambda))
        .sum()
}

/// `∫₀^∞ R(t) dt`, integrated term by term over the product expansion.
pub fn mttf(spec: &ArchitectureSpec) -> f64 {
    let sensor_terms = layer_exponential_terms(spec.sensors());
    let mcu_terms = layer_exponential_terms(spec.mcus());
    let mut total = 0.0;
    for &(a, ca) in &sensor_terms {
        for &(b, cb) in &mcu_terms {
            total += ca * cb / (f64::from(a) * spec.lambda_sensor() + f64::from(b) * spec.lambda_mcu());
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Sums the probability of every component up/down pattern.
    fn koon_brute_force(n: u32, k: u32, p: f64) -> f64 {
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() >= k)
            .map(|mask| {
                let up = mask.count_ones() as i32;
                p.powi(up) * (1.0 - p).powi(n as i32 - up)
            })
            .sum()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_exact(4, 2), Some(6));
        assert_eq!(binomial_exact(64, 32), Some(1_832_624_140_942_590_534));
        assert_eq!(binomial_exact(3, 5), Some(0));
        assert_eq!(binomial_exact(65, 2), None);
        assert_eq!(binomial(65, 2), 2080.0);
        // Pascal's rule across the exact range.
        for n in 1..=EXACT_BINOMIAL_MAX {
            for k in 1..n {
                assert_eq!(
                    binomial_exact(n, k).unwrap(),
                    binomial_exact(n - 1, k - 1).unwrap() + binomial_exact(n - 1, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn koon_examples() {
        assert_eq!(koon_reliability(1, 1, 0.37).unwrap(), 0.37);
        assert!((koon_reliability(3, 2, 0.9).unwrap() - 0.972).abs() < 1e-15);
        assert!((koon_reliability(4, 2, 0.5).unwrap() - 0.6875).abs() < 1e-15);
        assert!((koon_brute_force(3, 2, 0.9) - 0.972).abs() < 1e-15);
        assert!((koon_brute_force(4, 2, 0.5) - 0.6875).abs() < 1e-15);
    }

    #[test]
    fn koon_domain_errors() {
        assert!(koon_reliability(3, 0, 0.5).is_err());
        assert!(koon_reliability(3, 4, 0.5).is_err());
        assert!(koon_reliability(3, 2, 1.5).is_err());
        assert!(koon_reliability(3, 2, f64::NAN).is_err());
    }

    #[test]
    fn koon_matches_brute_force() {
        for n in 1..=10 {
            for k in 1..=n {
                for i in 0..=20 {
                    let p = f64::from(i) / 20.0;
                    let got = koon_reliability(n, k, p).unwrap();
                    let want = koon_brute_force(n, k, p);
                    assert!((got - want).abs() < 1e-13, "{k}oo{n} p={p}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn reference_and_worked_examples() {
        let r = ArchitectureSpec::parse("1oo1/1oo1", 1e-5, 1e-4).unwrap();
        assert!((analytic_reliability(&r, 10_000.0) - (-1.1f64).exp()).abs() < 1e-15);
        assert!((analytic_reliability(&r, 10_000.0) - 0.332871).abs() < 5e-7);
        assert_eq!(analytic_reliability(&r, 0.0), 1.0);

        // Frozen from a 40-digit brute-force enumeration.
        let s = ArchitectureSpec::parse("2oo3/2oo3", 1e-5, 1e-4).unwrap();
        assert!((analytic_reliability(&s, 10_000.0) - 0.298_634_808_658_945_3).abs() < 1e-14);
        let s = ArchitectureSpec::parse("2oo3/2oo4", 1e-5, 1e-4).unwrap();
        assert!((analytic_reliability(&s, 10_000.0) - 0.456_737_346_098_509_8).abs() < 1e-14);
        let ps = (-0.1f64).exp();
        let pm = (-1.0f64).exp();
        let by_hand = (3.0 * ps * ps - 2.0 * ps.powi(3)) * koon_reliability(4, 2, pm).unwrap();
        assert!((analytic_reliability(&s, 10_000.0) - by_hand).abs() < 1e-14);
    }

    #[test]
    fn exponential_terms() {
        // 1oo2: 2e^{-x} - e^{-2x}; 2oo3: 3e^{-2x} - 2e^{-3x}
        assert_eq!(layer_exponential_terms(Layer::new(1, 2)), vec![(1, 2.0), (2, -1.0)]);
        assert_eq!(layer_exponential_terms(Layer::new(2, 3)), vec![(2, 3.0), (3, -2.0)]);
        assert_eq!(layer_exponential_terms(Layer::new(3, 3)), vec![(3, 1.0)]);
        for n in 1..=8 {
            for k in 1..=n {
                let terms = layer_exponential_terms(Layer::new(k, n));
                // R(0) = 1
                let at_zero: f64 = terms.iter().map(|&(_, c)| c).sum();
                assert!((at_zero - 1.0).abs() < 1e-12);
                for x in [0.05, 0.7, 2.0] {
                    let expanded: f64 = terms.iter().map(|&(a, c)| c * (-f64::from(a) * x).exp()).sum();
                    let direct = layer_reliability(Layer::new(k, n), 1.0, x);
                    assert!((expanded - direct).abs() < 1e-11, "{k}oo{n} x={x}");
                }
            }
        }
    }

    #[test]
    fn layer_mttf_matches_order_statistics() {
        // Failure of a KooN layer is the (n-k+1)-th failure; the spacings
        // are exponential with rates n λ, (n-1) λ, ...
        let lambda = 2.5e-4;
        for n in 1..=10 {
            for k in 1..=n {
                let spacings: f64 = (k..=n).map(|j| 1.0 / (f64::from(j) * lambda)).sum();
                let got = layer_mttf(Layer::new(k, n), lambda);
                assert!((got - spacings).abs() / spacings < 1e-9, "{k}oo{n}");
            }
        }
        let one_of_two = layer_mttf(Layer::new(1, 2), 1e-5);
        assert!((one_of_two - 1.5e5).abs() < 1e-6);
    }

    #[test]
    fn system_mttf_examples() {
        let r = ArchitectureSpec::parse("1oo1/1oo1", 1e-5, 1e-4).unwrap();
        assert!((mttf(&r) - 1.0 / 1.1e-4).abs() / mttf(&r) < 1e-12);
        assert!((mttf(&r) - 9090.909).abs() < 1e-3);
        // Frozen from adaptive quadrature at 40 digits.
        for (label, want) in [
            ("2oo3/2oo3", 8_193.346_508_563_9),
            ("2oo3/2oo4", 10_604.200_316_030_45),
            ("1oo3/1oo4", 20_708.171_559_640_39),
        ] {
            let s = ArchitectureSpec::parse(label, 1e-5, 1e-4).unwrap();
            assert!((mttf(&s) - want).abs() / want < 1e-10, "{label}: {}", mttf(&s));
        }
        let two = ArchitectureSpec::parse("2oo3/1oo1", 1e-5, 1e-5).unwrap();
        let one = ArchitectureSpec::parse("1oo3/1oo1", 1e-5, 1e-5).unwrap();
        assert!(mttf(&two) < mttf(&one));
    }

    proptest! {
        #[test]
        fn koon_monotone_in_p_and_k(n in 1u32..=12, k_raw in 0u32..12, p in 0.0f64..=1.0, dp in 0.0f64..=1.0) {
            let k = k_raw % n + 1;
            let p2 = (p + dp * (1.0 - p)).min(1.0);
            let r = koon_reliability(n, k, p).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!(koon_reliability(n, k, p2).unwrap() >= r - 1e-14);
            if k < n {
                prop_assert!(koon_reliability(n, k + 1, p).unwrap() <= r + 1e-14);
            }
        }
    }
}
