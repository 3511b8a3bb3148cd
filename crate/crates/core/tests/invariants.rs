//! Cross-module invariants: functional axioms (causality, linearity,
//! time-homogeneity), the convolution definition against a direct-sum
//! oracle, the tensor-product structure of stacked networks, and the
//! worst-case witness construction.

use ltcn_core::network::ConvNetParams;
use ltcn_core::rng::SplitMix64;
use ltcn_core::seq::{
    apply_functional, dilated_convolve, functional_error_norm, worst_case_input, FunctionalKernel,
    ScalarSeq, VectorSeq,
};
use ltcn_core::tensor::{detensorize, outer_product, tensorize};
use proptest::prelude::*;

fn finite_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, len)
}

/// Plain double loop over the definition of ordinary convolution,
/// independent of the library's accumulation strategy.
fn convolve_oracle(filter: &[f64], signal: &ScalarSeq) -> Vec<(i64, f64)> {
    let start = signal.start();
    let len = signal.len() + filter.len() - 1;
    let mut out = Vec::new();
    for i in 0..len {
        let t = start + i as i64;
        let mut acc = 0.0;
        for (s, w) in filter.iter().enumerate() {
            acc += w * signal.get(t - s as i64);
        }
        out.push((t, acc));
    }
    out
}

proptest! {
    #[test]
    fn plain_convolution_matches_the_double_loop_oracle(
        filter in finite_vec(1..6),
        values in finite_vec(1..12),
        start in -8i64..8,
    ) {
        let signal = ScalarSeq::new(start, values);
        let out = dilated_convolve(&filter, &signal, 1).unwrap();
        for (t, expect) in convolve_oracle(&filter, &signal) {
            let got = out.get(t);
            prop_assert!((got - expect).abs() <= 1e-12 * (1.0 + expect.abs()),
                "t = {t}: {got} vs {expect}");
        }
    }

    #[test]
    fn functionals_are_causal(
        channel in finite_vec(1..8),
        values in finite_vec(1..10),
        future in finite_vec(1..5),
        t in -4i64..14,
    ) {
        let rho = FunctionalKernel::scalar(channel).unwrap();
        let x = VectorSeq::new(0, values.iter().map(|v| vec![*v]).collect()).unwrap();
        // Same past, arbitrary future appended strictly after t.
        let mut extended_values: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
        let gap = (t + 1 - x.end()).max(0) as usize;
        extended_values.extend(std::iter::repeat_n(vec![0.0], gap));
        extended_values.extend(future.iter().map(|v| vec![*v]));
        let extended = VectorSeq::new(0, extended_values).unwrap();
        let a = apply_functional(&rho, &x, t).unwrap();
        let b = apply_functional(&rho, &extended, t).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn functionals_are_linear(
        channel in finite_vec(1..8),
        xs in finite_vec(2..10),
        ys in finite_vec(2..10),
        l1 in -5.0..5.0f64,
        l2 in -5.0..5.0f64,
        t in -4i64..16,
    ) {
        let rho = FunctionalKernel::scalar(channel).unwrap();
        let x = VectorSeq::new(0, xs.iter().map(|v| vec![*v]).collect()).unwrap();
        let y = VectorSeq::new(-2, ys.iter().map(|v| vec![*v]).collect()).unwrap();
        let combo = x.scale(l1).add(&y.scale(l2)).unwrap();
        let lhs = apply_functional(&rho, &combo, t).unwrap();
        let rhs = l1 * apply_functional(&rho, &x, t).unwrap()
            + l2 * apply_functional(&rho, &y, t).unwrap();
        let scale = 1.0 + rho.l2_norm() * (l1.abs() * x.l2_norm() + l2.abs() * y.l2_norm());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn functionals_are_time_homogeneous(
        channel in finite_vec(1..8),
        values in finite_vec(1..10),
        tau in -20i64..20,
        t in -5i64..15,
    ) {
        let rho = FunctionalKernel::scalar(channel).unwrap();
        let x = VectorSeq::new(0, values.iter().map(|v| vec![*v]).collect()).unwrap();
        let direct = apply_functional(&rho, &x, t).unwrap();
        let shifted = apply_functional(&rho, &x.shift(tau), t + tau).unwrap();
        prop_assert_eq!(direct.to_bits(), shifted.to_bits());
    }

    #[test]
    fn tensorize_round_trips_bitwise(values in finite_vec(1..16)) {
        let t = tensorize(&values, 2, 4).unwrap();
        let back = detensorize(&t);
        prop_assert_eq!(&back[..values.len()], &values[..]);
        prop_assert!(back[values.len()..].iter().all(|v| *v == 0.0));
    }
}

#[test]
fn single_channel_networks_tensorize_to_outer_products() {
    for l in [2usize, 3] {
        for layers in 1..=4usize {
            for seed in 0..10u64 {
                let mut rng = SplitMix64::new(seed);
                let net = ConvNetParams::random(l, layers, 1, 1, &mut rng).unwrap();
                let rho = net.effective_filter().unwrap();
                let tensorized = tensorize(rho.channel(0), l, layers).unwrap();
                let factors: Vec<Vec<f64>> = (0..layers)
                    .rev()
                    .map(|k| net.filter(k, 0, 0).to_vec())
                    .collect();
                let direct = outer_product(&factors).unwrap();
                let max_err = tensorized
                    .data()
                    .iter()
                    .zip(direct.data())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(
                    max_err <= 1e-12,
                    "l = {l}, K = {layers}, seed = {seed}: max entry gap {max_err}"
                );
            }
        }
    }
}

#[test]
fn multi_channel_networks_represent_their_kernels() {
    for seed in 0..5u64 {
        let mut rng = SplitMix64::new(100 + seed);
        let net = ConvNetParams::random(2, 3, 3, 2, &mut rng).unwrap();
        let rho = net.effective_filter().unwrap();
        let x = VectorSeq::random_normal(2, -2, 18, &mut rng);
        let y = net.forward(&x).unwrap();
        let scale = 1.0 + rho.l2_norm() * x.l2_norm();
        for t in -4..28 {
            let expect = apply_functional(&rho, &x, t).unwrap();
            assert!(
                (y.get(t) - expect).abs() <= 1e-12 * scale,
                "seed {seed}, t = {t}"
            );
        }
    }
}

#[test]
fn worst_case_witness_attains_the_error_norm() {
    for seed in 0..20u64 {
        let mut rng = SplitMix64::new(200 + seed);
        let make = |rng: &mut SplitMix64| {
            let channels: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..7).map(|_| rng.next_normal()).collect())
                .collect();
            FunctionalKernel::new(channels).unwrap()
        };
        let a = make(&mut rng);
        let b = make(&mut rng);
        let norm = functional_error_norm(&a, &b).unwrap();
        let delta = a.sub(&b).unwrap();
        let t = 11;
        let x = worst_case_input(&delta, t).unwrap();
        let gap = apply_functional(&a, &x, t).unwrap() - apply_functional(&b, &x, t).unwrap();
        assert!(
            (gap.abs() - norm).abs() <= 1e-10 * norm.max(1.0),
            "seed {seed}: attained {gap} vs norm {norm}"
        );
        assert!((x.l2_norm() - 1.0).abs() <= 1e-12);
    }
}
