mod common;

use common::{oracle_entropy, oracle_mi, rng, view};
use infoplane::estimators::{
    bin_values, entropy, exact_mi, joint_view, mutual_information, pair_view, BinningSpec,
    DiscreteView, ExactPmf, Weights,
};
use ndarray::Array2;
use proptest::prelude::*;

fn streams() -> impl Strategy<Value = Vec<(u32, u32, u32)>> {
    prop::collection::vec((0u32..5, 0u32..4, 0u32..3), 1..300)
}

fn split(s: &[(u32, u32, u32)]) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
    (
        s.iter().map(|t| t.0).collect(),
        s.iter().map(|t| t.1).collect(),
        s.iter().map(|t| t.2).collect(),
    )
}

proptest! {
    #[test]
    fn nonnegative_symmetric_bounded(s in streams()) {
        let (a, b, _) = split(&s);
        let (va, vb) = (view(&a), view(&b));
        let (ha, hb) = (entropy(&va), entropy(&vb));
        prop_assert!(ha >= 0.0 && hb >= 0.0);
        let ab = mutual_information(&va, &vb).unwrap();
        let ba = mutual_information(&vb, &va).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!(ab <= ha.min(hb) + 1e-12);
    }

    #[test]
    fn matches_oracle(s in streams(), masses in prop::collection::vec(0.01f64..5.0, 300)) {
        let (a, b, _) = split(&s);
        let (va, vb) = (view(&a), view(&b));
        prop_assert!((entropy(&va) - oracle_entropy(&a)).abs() < 1e-12);
        let plain = mutual_information(&va, &vb).unwrap();
        prop_assert!((plain - oracle_mi(&a, &b, None).max(0.0)).abs() < 1e-12);

        let w = Weights::from_unnormalized(&masses[..a.len()]).unwrap();
        let wa = va.with_weights(w.clone()).unwrap();
        let wb = vb.with_weights(w.clone()).unwrap();
        let weighted = mutual_information(&wa, &wb).unwrap();
        let oracle = oracle_mi(&a, &b, Some(w.as_slice())).max(0.0);
        prop_assert!((weighted - oracle).abs() < 1e-12, "{} vs {}", weighted, oracle);
    }

    #[test]
    fn monotone_under_refinement(s in streams()) {
        let (a, b, c) = split(&s);
        let (va, vb, vc) = (view(&a), view(&b), view(&c));
        let joint = pair_view(&va, &vb).unwrap();
        let fine = mutual_information(&joint, &vc).unwrap();
        let coarse = mutual_information(&va, &vc).unwrap();
        prop_assert!(fine >= coarse - 1e-12);
    }

    #[test]
    fn data_processing(s in streams(), k in 1u32..4) {
        let (a, b, _) = split(&s);
        let g: Vec<u32> = b.iter().map(|v| v % k).collect();
        let direct = mutual_information(&view(&a), &view(&b)).unwrap();
        let processed = mutual_information(&view(&a), &view(&g)).unwrap();
        prop_assert!(processed <= direct + 1e-12);
    }

    #[test]
    fn uniform_weights_equal_unweighted(s in streams()) {
        let (a, b, _) = split(&s);
        let (va, vb) = (view(&a), view(&b));
        let w = Weights::uniform(a.len()).unwrap();
        let plain = mutual_information(&va, &vb).unwrap();
        let weighted = mutual_information(
            &va.clone().with_weights(w.clone()).unwrap(),
            &vb.clone().with_weights(w).unwrap(),
        )
        .unwrap();
        prop_assert_eq!(plain.to_bits(), weighted.to_bits());
    }

    #[test]
    fn relabeling_invariant(s in streams()) {
        let (a, b, _) = split(&s);
        let renamed: Vec<u32> = a.iter().map(|v| 100 - 7 * v).collect();
        let x = mutual_information(&view(&a), &view(&b)).unwrap();
        let y = mutual_information(&view(&renamed), &view(&b)).unwrap();
        prop_assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn binned_joint_view_matches_tuple_oracle(
        values in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..200),
        bins in 2usize..9,
    ) {
        let n = values.len();
        let flat: Vec<f64> = values.iter().flatten().copied().collect();
        let m = Array2::from_shape_vec((n, 3), flat).unwrap();
        let (b, _) = bin_values(m.view(), &BinningSpec::observed(bins)).unwrap();
        let target: Vec<u32> = (0..n as u32).map(|i| i % 3).collect();
        let jv = joint_view(&b, &[0, 2]).unwrap();
        let est = mutual_information(&jv, &view(&target)).unwrap();
        let t = common::tuples(&b, &[0, 2]);
        prop_assert!(b.bins().iter().all(|&v| (v as usize) < bins));
        prop_assert!((est - oracle_mi(&t, &target, None).max(0.0)).abs() < 1e-12);
    }
}

#[test]
fn deterministic_bit_identical() {
    let a: Vec<u32> = (0..1000).map(|i| (i * 7919 % 13) as u32).collect();
    let b: Vec<u32> = (0..1000).map(|i| (i * 104_729 % 5) as u32).collect();
    let first = mutual_information(&view(&a), &view(&b)).unwrap();
    for _ in 0..3 {
        assert_eq!(mutual_information(&view(&a), &view(&b)).unwrap().to_bits(), first.to_bits());
    }
}

/// Plugin MI on `m` draws from `pmf`, for coordinates 0 and 1.
fn sampled_mi(pmf: &ExactPmf, m: usize, seed: u64) -> f64 {
    let idx = pmf.sample_indices(m, &mut rng(seed));
    let a: Vec<u32> = idx.iter().map(|&i| pmf.support()[i][0]).collect();
    let b: Vec<u32> = idx.iter().map(|&i| pmf.support()[i][1]).collect();
    mutual_information(&DiscreteView::from_values(&a).unwrap(), &DiscreteView::from_values(&b).unwrap()).unwrap()
}

#[test]
fn plugin_converges_to_exact() {
    // 4x4 joint with a diagonal bias
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for a in 0..4u32 {
        for b in 0..4u32 {
            support.push(vec![a, b]);
            probs.push(if a == b { 0.15 } else { 0.1 / 3.0 });
        }
    }
    let pmf = ExactPmf::new(support, probs).unwrap();
    let exact = exact_mi(&pmf, &[0], &[1]).unwrap();
    let small = (sampled_mi(&pmf, 1_000, 1) - exact).abs();
    let large = (sampled_mi(&pmf, 200_000, 1) - exact).abs();
    assert!(large < 0.005, "{large}");
    assert!(large < small);
}
