mod common;

use num_traits::ToPrimitive;

use nicf_dim::exactnum::rat;
use nicf_dim::pressure_dim::{dim_interval, pressure_bounds};
use nicf_dim::symbolic::AlphabetSelection;

const NODES: usize = 600;

#[test]
fn dimension_contains_discretized_root() {
    for digits in [vec![-3, 3], vec![3, 4], vec![-4, 4, 5], vec![3, -3, 4, -4]] {
        let d = dim_interval(&AlphabetSelection::explicit(digits.clone()).unwrap(), 12, 1e-4);
        let oracle = common::transfer_dimension(&digits, NODES);
        let (lo, hi) = (d.lo.to_f64().unwrap(), d.hi.to_f64().unwrap());
        assert!(lo <= oracle && oracle <= hi, "{digits:?}: {oracle} not in [{lo}, {hi}]");
    }
}

#[test]
fn pressure_contains_log_eigenvalue() {
    let digits = [-3, 3, 4];
    let sel = AlphabetSelection::explicit(digits.to_vec()).unwrap();
    for n in [1, 2, 4] {
        let t = rat(n, 4);
        let p = pressure_bounds(&sel, &t, 8).unwrap();
        let oracle = common::transfer_eigenvalue(&digits, t.to_f64().unwrap(), NODES).ln();
        let (lo, hi) = (p.lo.to_f64().unwrap(), p.hi.to_f64().unwrap());
        assert!(lo - 1e-6 <= oracle && oracle <= hi + 1e-6, "t={t}: {oracle} not in [{lo}, {hi}]");
    }
}
