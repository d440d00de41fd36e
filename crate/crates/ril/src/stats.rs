//! Small statistics toolkit for the experiment summaries: medians and
//! quartiles, threshold-crossing detection on reward curves, and a
//! one-sided rank-sum test.

/// Median of an unsorted slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Linear-interpolation quantile over sorted positions `p * (n - 1)`.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty());
    assert!((0.0..=1.0).contains(&p));
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// First episode index whose trailing `window`-episode mean reward reaches
/// `threshold`; only full windows count.
pub fn episodes_to_threshold(rewards: &[f64], window: usize, threshold: f64) -> Option<usize> {
    assert!(window > 0);
    if rewards.len() < window {
        return None;
    }
    let mut sum: f64 = rewards[..window].iter().sum();
    if sum / window as f64 >= threshold {
        return Some(window - 1);
    }
    for i in window..rewards.len() {
        sum += rewards[i] - rewards[i - window];
        if sum / window as f64 >= threshold {
            return Some(i);
        }
    }
    None
}

/// One-sided Mann-Whitney rank-sum test of "sample `a` tends larger than
/// sample `b`", using the tie-corrected normal approximation with
/// continuity correction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSum {
    pub u_statistic: f64,
    pub z: f64,
    /// Significant at the one-sided 0.05 level.
    pub significant: bool,
}

const Z_CRITICAL_05: f64 = 1.6448536269514722;

pub fn rank_sum_greater(a: &[f64], b: &[f64]) -> RankSum {
    assert!(!a.is_empty() && !b.is_empty());
    let n_a = a.len() as f64;
    let n_b = b.len() as f64;
    let n = n_a + n_b;

    let mut combined: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, true))
        .chain(b.iter().map(|&x| (x, false)))
        .collect();
    combined.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite values"));

    // Average ranks within tie groups; accumulate the tie correction term.
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < combined.len() {
        let mut j = i;
        while j < combined.len() && combined[j].0 == combined[i].0 {
            j += 1;
        }
        let ties = (j - i) as f64;
        // ranks are 1-based: positions i..j share the average rank
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for item in &combined[i..j] {
            if item.1 {
                rank_sum_a += avg_rank;
            }
        }
        if ties > 1.0 {
            tie_term += ties * ties * ties - ties;
        }
        i = j;
    }

    let u = rank_sum_a - n_a * (n_a + 1.0) / 2.0;
    let mean_u = n_a * n_b / 2.0;
    let variance = n_a * n_b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let z = if variance > 0.0 {
        (u - mean_u - 0.5) / variance.sqrt()
    } else {
        0.0
    };
    RankSum {
        u_statistic: u,
        z,
        significant: z >= Z_CRITICAL_05,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert_eq!(quantile(&xs, 0.5), 2.5);
        assert_eq!(quantile(&xs, 0.25), 1.75);
    }

    #[test]
    fn threshold_crossing_requires_full_window() {
        let rewards = [10.0, 10.0, 0.0, 0.0, 10.0, 10.0, 10.0];
        // window 3: means are (20/3), (20/3), (10/3), (20/3), 10 -> first >= 7 at idx 6
        assert_eq!(episodes_to_threshold(&rewards, 3, 7.0), Some(6));
        assert_eq!(episodes_to_threshold(&rewards, 3, 6.0), Some(2));
        assert_eq!(episodes_to_threshold(&rewards, 3, 11.0), None);
        assert_eq!(episodes_to_threshold(&rewards[..2], 3, 0.0), None);
    }

    #[test]
    fn rank_sum_detects_complete_separation() {
        // A = {5,6,7} all above B = {1,2,3}: U = 9, z = (9-4.5-0.5)/sqrt(5.25)
        let r = rank_sum_greater(&[5.0, 6.0, 7.0], &[1.0, 2.0, 3.0]);
        assert_eq!(r.u_statistic, 9.0);
        assert!((r.z - 4.0 / 5.25f64.sqrt()).abs() < 1e-12);
        assert!(r.significant);
    }

    #[test]
    fn rank_sum_reversed_is_not_significant() {
        let r = rank_sum_greater(&[1.0, 2.0, 3.0], &[5.0, 6.0, 7.0]);
        assert!(r.z < 0.0);
        assert!(!r.significant);
    }

    #[test]
    fn rank_sum_handles_ties() {
        // A = {2,2}, B = {1,2}: hand-computed U = 3, sigma = 1, z = 0.5.
        let r = rank_sum_greater(&[2.0, 2.0], &[1.0, 2.0]);
        assert!((r.u_statistic - 3.0).abs() < 1e-12);
        assert!((r.z - 0.5).abs() < 1e-12);
        assert!(!r.significant);
    }

    #[test]
    fn rank_sum_all_equal_is_neutral() {
        let r = rank_sum_greater(&[1.0, 1.0], &[1.0, 1.0]);
        assert_eq!(r.z, 0.0);
        assert!(!r.significant);
    }
}
