//! Plug-in information measures over discrete joint pmfs.

use crate::lab::law::marginalize;

/// Shannon entropy in nats.
pub fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// `I(X; S₂ | S₁)` in nats for a pmf over `n` base-`k` digits, where `x`,
/// `s1`, `s2` are disjoint digit index sets.
pub fn conditional_mutual_information(pmf: &[f64], k: usize, n: usize, x: &[usize], s1: &[usize], s2: &[usize]) -> f64 {
    let join = |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().chain(b).copied().collect() };
    let h = |keep: &[usize]| entropy(&marginalize(pmf, k, n, keep));
    let all = join(&join(x, s1), s2);
    let value = h(&join(x, s1)) + h(&join(s1, s2)) - h(s1) - h(&all);
    value.max(0.0)
}

/// Relative frequencies of `counts`.
pub fn pmf_from_counts(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_digits_have_zero_cmi() {
        let p = [0.3, 0.6, 0.8];
        let pmf: Vec<f64> = (0..8)
            .map(|c| {
                (0..3)
                    .map(|i| if (c >> i) & 1 == 1 { p[i] } else { 1.0 - p[i] })
                    .product()
            })
            .collect();
        assert!(conditional_mutual_information(&pmf, 2, 3, &[0], &[1], &[2]) < 1e-15);
    }

    #[test]
    fn copies_share_one_bit() {
        // X = S₂ uniform, S₁ independent uniform: I(X; S₂ | S₁) = ln 2
        let mut pmf = vec![0.0; 8];
        for s1 in 0..2 {
            for v in 0..2 {
                pmf[v | (s1 << 1) | (v << 2)] = 0.25;
            }
        }
        let cmi = conditional_mutual_information(&pmf, 2, 3, &[0], &[1], &[2]);
        assert!((cmi - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn conditioning_removes_shared_cause() {
        // X = S₁ = S₂: everything is explained by S₁
        let mut pmf = vec![0.0; 8];
        pmf[0] = 0.5;
        pmf[7] = 0.5;
        assert!(conditional_mutual_information(&pmf, 2, 3, &[0], &[1], &[2]) < 1e-15);
    }

    #[test]
    fn brute_force_definition() {
        // arbitrary pmf; compare with Σ p log p(x,s1,s2)p(s1) / (p(x,s1)p(s1,s2))
        let raw: Vec<f64> = (1..=8).map(|i| (i * i % 7 + 1) as f64).collect();
        let z: f64 = raw.iter().sum();
        let pmf: Vec<f64> = raw.iter().map(|v| v / z).collect();
        let p = |pred: &dyn Fn(usize) -> bool| -> f64 { (0..8).filter(|&c| pred(c)).map(|c| pmf[c]).sum() };
        let mut expected = 0.0;
        for (c, &pc) in pmf.iter().enumerate() {
            let (x, s1, s2) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
            let ps1 = p(&|d| (d >> 1) & 1 == s1);
            let pxs1 = p(&|d| d & 1 == x && (d >> 1) & 1 == s1);
            let ps1s2 = p(&|d| (d >> 1) & 1 == s1 && (d >> 2) & 1 == s2);
            expected += pc * (pc * ps1 / (pxs1 * ps1s2)).ln();
        }
        let got = conditional_mutual_information(&pmf, 2, 3, &[0], &[1], &[2]);
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn counts_normalize() {
        assert_eq!(pmf_from_counts(&[1, 3]), vec![0.25, 0.75]);
        assert_eq!(pmf_from_counts(&[0, 0]), vec![0.0, 0.0]);
    }
}
