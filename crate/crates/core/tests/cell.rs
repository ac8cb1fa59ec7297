use peierls::cell::{hbar, hbar_run, hbar_table, solve_cell_from, HbarOptions, Slope};
use peierls::fracop::fractional_laplacian_constant;
use peierls::potential::sup_norms;
use peierls::{Order, Potential, Sigma};

fn opts(s: f64, w: Potential, horizon: f64, n: usize) -> HbarOptions {
    HbarOptions {
        s,
        g: fractional_laplacian_constant(1, Order::new(s).unwrap()),
        potential: w,
        forcing: Sigma::zero(),
        horizon,
        n,
        tol: 1e-3,
        cfl: 0.9,
        workers: None,
    }
}

#[test]
fn flat_potential_drift_equals_l() {
    let o = opts(0.4, Potential::flat(), 20.0, 64);
    for (p, l) in [(Slope::integer(0), 0.3), (Slope::new(2, 3).unwrap(), -1.2), (Slope::new(-5, 2).unwrap(), 2.0)] {
        let lambda = hbar(p, l, &o).unwrap();
        assert!((lambda - l).abs() <= 1e-6, "p = {p:?}: {lambda}");
    }
}

#[test]
fn drift_stays_within_forcing_bound() {
    let mut o = opts(0.5, Potential::standard(), 100.0, 128);
    o.forcing = Sigma {
        constant: 0.05,
        modes: vec![],
    };
    let (dw, ds) = sup_norms(&o.potential, &o.forcing);
    for l in [-0.5, 0.0, 0.1, 0.5] {
        let run = hbar_run(Slope::new(1, 2).unwrap(), l, &o).unwrap();
        assert!((run.lambda - l).abs() <= dw + ds + run.uncertainty, "L = {l}: {run:?}");
    }
}

#[test]
fn constant_forcing_acts_like_l() {
    let mut forced = opts(0.6, Potential::standard(), 60.0, 64);
    forced.forcing = Sigma {
        constant: 0.2,
        modes: vec![],
    };
    let plain = opts(0.6, Potential::standard(), 60.0, 64);
    let p = Slope::new(1, 3).unwrap();
    let a = hbar_run(p, 0.1, &forced).unwrap().lambda;
    let b = hbar_run(p, 0.3, &plain).unwrap().lambda;
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn small_table_properties() {
    let o = opts(0.5, Potential::standard(), 100.0, 128);
    let ps = [Slope::integer(0), Slope::new(1, 2).unwrap()];
    let ls = [-0.4, -0.1, 0.0, 0.1, 0.4];
    let table = hbar_table(&ps, &ls, &o).unwrap();
    assert!(!table.partial);
    for c in &table.checks {
        assert!(c.passed(), "{c:?}");
    }
    for p in ps {
        for l in ls {
            let a = table.get(p, l).unwrap().lambda().unwrap();
            let b = table.get(p, -l).unwrap().lambda().unwrap();
            assert!((a + b).abs() <= 2e-3, "p = {p:?}, L = {l}: {a} {b}");
        }
    }
    // pinned below the depinning threshold
    assert!(table.get(Slope::integer(0), 0.1).unwrap().lambda().unwrap().abs() < 1e-3);
}

#[test]
fn rows_round_trip() {
    let o = opts(0.5, Potential::flat(), 10.0, 32);
    let table = hbar_table(&[Slope::integer(1)], &[0.0, 1.0], &o).unwrap();
    let back = peierls::cell::HbarTable::from_rows(&table.rows(), &o.potential, &o.forcing).unwrap();
    assert_eq!(back.rows(), table.rows());
}

#[test]
fn integer_shift_of_initial_data_commutes() {
    let o = opts(0.5, Potential::standard(), 3.0, 64);
    let spec = o.spec(Slope::new(1, 2).unwrap(), 0.2);
    let w0: Vec<f64> = (0..64).map(|j| 0.3 * (j as f64 * 0.2).sin()).collect();
    let shifted: Vec<f64> = w0.iter().map(|v| v + 1.0).collect();
    let a = solve_cell_from(&spec, Some(&w0)).unwrap();
    let b = solve_cell_from(&spec, Some(&shifted)).unwrap();
    for (x, y) in a.mean.iter().zip(&b.mean) {
        assert!((y - x - 1.0).abs() < 1e-12);
    }
}

#[test]
fn doubling_the_horizon_stays_within_uncertainty() {
    let short = opts(0.5, Potential::standard(), 100.0, 128);
    let mut long = short.clone();
    long.horizon = 200.0;
    let p = Slope::new(1, 2).unwrap();
    let a = hbar_run(p, 0.3, &short).unwrap();
    let b = hbar_run(p, 0.3, &long).unwrap();
    assert!((a.lambda - b.lambda).abs() <= a.uncertainty.max(1e-9), "{a:?} {b:?}");
}
