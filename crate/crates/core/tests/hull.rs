use std::f64::consts::PI;

use peierls::fracop::fractional_laplacian_constant;
use peierls::hull::{
    bilinear_form_b, build_ansatz, claim1_series, claim2_sum, cutoff_operator_sum, nl_residual, product_identity,
    AnsatzOptions, Cutoff,
};
use peierls::layer::{solve_corrector_psi, solve_layer, LayerSolution};
use peierls::series::lattice_partial_sums;
use peierls::{Order, Potential};

fn layer(s: f64) -> LayerSolution {
    solve_layer(Order::new(s).unwrap(), &Potential::standard(), 40.0, 4096, 200.0, 1e-9).unwrap()
}

fn direct_h(l: &LayerSolution, d: f64, x: f64, terms: i64) -> f64 {
    let p = l.profile();
    (-terms..=terms).map(|i| p.value((x - i as f64) / d)).sum::<f64>() - terms as f64
}

#[test]
fn ansatz_matches_direct_sum_without_corrector() {
    let l = layer(0.75);
    let opts = AnsatzOptions::default();
    for delta in [0.2, 0.1] {
        let a = build_ansatz(delta, 1.0, 0.0, &l, None, &opts).unwrap();
        assert!((a.eval(0.0) - 0.5).abs() < 1e-9, "h(0) = {}", a.eval(0.0));
        for x in [-0.4, -0.1, 0.2, 0.45] {
            let direct = direct_h(&l, delta, x, 200_000);
            assert!((a.eval(x) - direct).abs() < 1e-6, "δ = {delta}, x = {x}: {} vs {direct}", a.eval(x));
            assert!((a.eval(x) + a.eval(-x) - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn deviation_is_bounded_and_stable_under_more_terms() {
    let l = layer(0.75);
    let s = 0.75;
    let psi = solve_corrector_psi(Order::new(s).unwrap(), &Potential::standard(), 1.0, &l, 1e-6).unwrap();
    let base = AnsatzOptions::default();
    let a = build_ansatz(0.1, 1.0, 1.0, &l, Some(&psi), &base).unwrap();
    let bound = a.deviation_bound();
    for k in 0..1000 {
        let x = -3.0 + 6.0 * k as f64 / 1000.0;
        assert!((a.eval(x) - x).abs() <= bound, "x = {x}");
    }
    let more = AnsatzOptions {
        n: 2 * base.n,
        ..base.clone()
    };
    let b = build_ansatz(0.1, 1.0, 1.0, &l, Some(&psi), &more).unwrap();
    let change = a
        .h_minus_x
        .values
        .iter()
        .zip(&b.h_minus_x.values)
        .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
    assert!(change < 1e-8, "{change:e}");
    assert!(a.cauchy_change < 1e-8);
}

#[test]
fn residual_shrinks_relative_to_delta_power() {
    let l = layer(0.75);
    let psi = solve_corrector_psi(Order::new(0.75).unwrap(), &Potential::standard(), 1.0, &l, 1e-6).unwrap();
    let opts = AnsatzOptions::default();
    let scaled: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&d| {
            let a = build_ansatz(d, 1.0, 1.0, &l, Some(&psi), &opts).unwrap();
            nl_residual(&a, None).unwrap().scaled_sup
        })
        .collect();
    assert!(scaled[0] / scaled[2] >= 2.0, "{scaled:?}");
}

#[test]
fn single_layer_residual_is_small() {
    // without ψ the residual is O(δ^{2s}) but not smaller
    let l = layer(0.5);
    let a = build_ansatz(0.1, 1.0, 0.0, &l, None, &AnsatzOptions::default()).unwrap();
    let r = nl_residual(&a, Some(0.0)).unwrap();
    assert!(r.scaled_sup < 5.0, "{}", r.scaled_sup);
}

#[test]
fn half_lattice_sum_oracle() {
    let sums = claim1_series(0.5, 0.5, 1e-12).unwrap();
    let target = PI * PI / 2.0 - 4.0;
    assert!((sums.left - target).abs() < 1e-8, "{}", sums.left);
    let partial = lattice_partial_sums(0.5, 0.5, 100_000);
    assert!((partial.left - target).abs() < 2e-5);
    let odd = claim1_series(-0.3, 0.4, 1e-12).unwrap().signed + claim1_series(0.3, 0.4, 1e-12).unwrap().signed;
    assert!(odd.abs() < 1e-12);
}

#[test]
fn layer_power_sums_are_bounded() {
    let l = layer(0.75);
    for delta in [0.2, 0.1, 0.05] {
        for gamma in [-0.4, 0.0, 0.25, 0.5] {
            for k in [1, 2] {
                let v = claim2_sum(&l, delta, 1.0, gamma, k).unwrap();
                assert!(v.abs() <= 1.0, "δ = {delta}, γ = {gamma}, k = {k}: {v}");
            }
        }
    }
    // odd in γ away from the half-integer
    let a = claim2_sum(&l, 0.1, 1.0, 0.3, 1).unwrap();
    let b = claim2_sum(&l, 0.1, 1.0, -0.3, 1).unwrap();
    assert!((a + b).abs() < 1e-9, "{a} {b}");
}

#[test]
fn cutoff_sum_scales_like_delta_power() {
    let s = 0.3;
    let g = fractional_laplacian_constant(1, Order::new(s).unwrap());
    for delta in [0.2, 0.1, 0.05] {
        let v = cutoff_operator_sum(delta, 1.0, 0.2, s, g, 1e-9).unwrap();
        assert!(v <= 10.0 * delta.powf(2.0 * s), "δ = {delta}: {v}");
    }
}

#[test]
fn product_rule_and_bilinear_bound() {
    let s = 0.3;
    let g = fractional_laplacian_constant(1, Order::new(s).unwrap());
    let l = layer(s);
    let psi = solve_corrector_psi(Order::new(s).unwrap(), &Potential::standard(), 1.0, &l, 1e-3).unwrap();
    let tau = Cutoff::new(5.0).unwrap();
    for x in [-12.0, -3.3, 0.0, 1.7, 8.0] {
        let r = product_identity(&psi, &tau, s, g, x, 1e-9).unwrap();
        assert!((r.lhs - r.rhs).abs() <= 1e-6, "x = {x}: {r:?}");
    }
    // B(f, f) is a positive energy
    let f = |y: f64| (-y * y).exp();
    let b = bilinear_form_b(f, f, 0.3, s, g, &[], 1e-10).unwrap();
    assert!(b > 0.0 && b.is_finite());
}

#[test]
fn cutoff_branch_keeps_symmetry() {
    let l = layer(0.3);
    let a = build_ansatz(0.1, 1.0, 0.0, &l, None, &AnsatzOptions::default()).unwrap();
    let c = a.eval(0.0) * 2.0;
    for x in [0.05, 0.2, 0.37, 0.5, 1.3] {
        assert!((a.eval(x) + a.eval(-x) - c).abs() < 1e-9, "x = {x}");
    }
}

#[test]
fn power_sums_below_one_half_scale_with_delta() {
    let l = layer(0.3);
    let s = 0.3;
    for k in [1u32, 2] {
        let e = 2.0 * s * (2 * k - 1) as f64;
        let gammas = [-0.4, -0.15, 0.1, 0.3, 0.45];
        let fit = gammas
            .iter()
            .map(|&g| claim2_sum(&l, 0.2, 1.0, g, k).unwrap().abs() / (k as f64 * 0.2f64.powf(e) * g.abs()))
            .fold(0.0, f64::max);
        for delta in [0.1, 0.05] {
            for &g in &gammas {
                let v = claim2_sum(&l, delta, 1.0, g, k).unwrap().abs();
                let bound = 1.5 * fit * k as f64 * delta.powf(e) * g.abs();
                assert!(v <= bound, "k = {k}, δ = {delta}, γ = {g}: {v} > {bound}");
            }
        }
    }
}
