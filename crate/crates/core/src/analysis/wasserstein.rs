use crate::error::{Error, Result};
use crate::rng::{index, SimRng};

/// Sorts a copy of `values` (total order; NaN last).
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Exact W₁ between two equal-size empirical measures on ℝ:
/// (1/n) Σ |a₍ᵢ₎ − b₍ᵢ₎| over order statistics. Inputs must be sorted.
pub fn empirical_w1_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::UnequalSampleCounts {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter("W1 needs at least one sample".into()));
    }
    if !is_sorted(a) || !is_sorted(b) {
        return Err(Error::InvalidParameter("W1 inputs must be sorted".into()));
    }
    let total: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    Ok(total / a.len() as f64)
}

fn is_sorted(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

/// Bootstrap standard error of [`empirical_w1_1d`], resampling each sorted
/// sample independently with replacement.
pub fn bootstrap_w1_se(a: &[f64], b: &[f64], resamples: usize, rng: &mut SimRng) -> Result<f64> {
    empirical_w1_1d(a, b)?;
    if resamples < 2 {
        return Err(Error::InvalidParameter("bootstrap needs at least 2 resamples".into()));
    }
    let n = a.len();
    let mut counts = vec![0u32; n];
    let mut ra = Vec::with_capacity(n);
    let mut rb = Vec::with_capacity(n);
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        resample_sorted(a, &mut counts, &mut ra, rng);
        resample_sorted(b, &mut counts, &mut rb, rng);
        let total: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - y).abs()).sum();
        stats.push(total / n as f64);
    }
    let m = stats.iter().sum::<f64>() / resamples as f64;
    let var = stats.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (resamples as f64 - 1.0);
    Ok(var.sqrt())
}

/// Draws n indices with replacement and expands them in index order, so a
/// sorted input yields a sorted resample without another sort.
fn resample_sorted(src: &[f64], counts: &mut [u32], out: &mut Vec<f64>, rng: &mut SimRng) {
    counts.iter_mut().for_each(|c| *c = 0);
    for _ in 0..src.len() {
        counts[index(rng, src.len())] += 1;
    }
    out.clear();
    for (v, &c) in src.iter().zip(counts.iter()) {
        for _ in 0..c {
            out.push(*v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, standard_normal};
    use proptest::prelude::*;

    #[test]
    fn identical_and_shifted() {
        let a = vec![-1.0, 0.5, 2.0, 3.0];
        assert_eq!(empirical_w1_1d(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|v| v + 0.75).collect();
        assert!((empirical_w1_1d(&a, &b).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            empirical_w1_1d(&[1.0], &[1.0, 2.0]),
            Err(Error::UnequalSampleCounts { left: 1, right: 2 })
        ));
        assert!(empirical_w1_1d(&[], &[]).is_err());
        assert!(empirical_w1_1d(&[2.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn bootstrap_se_scales_like_root_n() {
        let mut rng = seeded(11);
        let draw = |n: usize, shift: f64, rng: &mut SimRng| {
            sorted(&(0..n).map(|_| shift + standard_normal(rng)).collect::<Vec<_>>())
        };
        let (a, b) = (draw(400, 0.0, &mut rng), draw(400, 1.0, &mut rng));
        let (c, d) = (draw(6400, 0.0, &mut rng), draw(6400, 1.0, &mut rng));
        let se_small = bootstrap_w1_se(&a, &b, 200, &mut rng).unwrap();
        let se_large = bootstrap_w1_se(&c, &d, 200, &mut rng).unwrap();
        let ratio = se_small / se_large;
        assert!(ratio > 2.5 && ratio < 6.0, "ratio {ratio}");
    }

    fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..40).prop_flat_map(|n| {
            let v = || proptest::collection::vec(-100.0f64..100.0, n);
            (v(), v(), v())
        })
    }

    proptest! {
        #[test]
        fn metric_properties((a, b, c) in triple()) {
            let (a, b, c) = (sorted(&a), sorted(&b), sorted(&c));
            let ab = empirical_w1_1d(&a, &b).unwrap();
            let ba = empirical_w1_1d(&b, &a).unwrap();
            let ac = empirical_w1_1d(&a, &c).unwrap();
            let cb = empirical_w1_1d(&c, &b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert!(ab <= ac + cb + 1e-9);
        }
    }
}
