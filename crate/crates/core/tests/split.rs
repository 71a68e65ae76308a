use proptest::prelude::*;
use swec_core::split::{apportion_test_counts, split_stratified};
use swec_core::synthgrid::DEFAULT_COUNTS;
use swec_core::EventClass;

fn labels_for(counts: &[usize; 4]) -> Vec<EventClass> {
    counts
        .iter()
        .zip(EventClass::ALL)
        .flat_map(|(&n, c)| std::iter::repeat_n(c, n))
        .collect()
}

/// Hamilton apportionment with exact rational quotas: `seats * n_c / N`
/// computed in integers, remainders compared by cross-multiplication.
fn hamilton(counts: &[usize; 4], test_num: usize, test_den: usize) -> [usize; 4] {
    let total: usize = counts.iter().sum();
    let seats = (2 * test_num * total + test_den) / (2 * test_den);
    let mut out = [0; 4];
    let mut rem = [0; 4];
    for c in 0..4 {
        out[c] = test_num * counts[c] / test_den;
        rem[c] = test_num * counts[c] % test_den;
    }
    let mut order = [0, 1, 2, 3];
    order.sort_by(|&a, &b| rem[b].cmp(&rem[a]).then(a.cmp(&b)));
    let mut left = seats - out.iter().sum::<usize>();
    for &c in &order {
        if left == 0 {
            break;
        }
        out[c] += 1;
        left -= 1;
    }
    out
}

#[test]
fn default_counts_give_reference_test_counts() {
    assert_eq!(apportion_test_counts(&DEFAULT_COUNTS, 0.8).unwrap(), [13, 29, 64, 14]);
    let split = split_stratified(&labels_for(&DEFAULT_COUNTS), 0.8, 1).unwrap();
    assert_eq!(split.test.len(), 120);
    assert_eq!(split.train.len(), 480);
}

#[test]
fn fractions_outside_the_open_interval_are_rejected() {
    for f in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(apportion_test_counts(&DEFAULT_COUNTS, f).is_err());
    }
}

proptest! {
    #[test]
    fn apportionment_matches_exact_hamilton(
        counts in prop::array::uniform4(1usize..400),
        tenths in 1usize..10,
    ) {
        let got = apportion_test_counts(&counts, 1.0 - tenths as f64 / 10.0).unwrap();
        prop_assert_eq!(got, hamilton(&counts, tenths, 10));
    }

    #[test]
    fn split_is_disjoint_covering_and_stratified(
        counts in prop::array::uniform4(1usize..60),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let labels = labels_for(&counts);
        let split = split_stratified(&labels, fraction, seed).unwrap();
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        let expect = apportion_test_counts(&counts, fraction).unwrap();
        let mut got = [0; 4];
        for &i in &split.test {
            got[labels[i].index()] += 1;
        }
        prop_assert_eq!(got, expect);
        prop_assert_eq!(split_stratified(&labels, fraction, seed).unwrap(), split);
    }
}
