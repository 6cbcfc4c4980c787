mod common;

use num_traits::ToPrimitive;

use nicf_dim::exactnum::{from_f64, rat, Rational};
use nicf_dim::pressure_dim::appendix::uniform;

/// Root `P` of `1 = r^t e^{-2P} + s^t e^{-3P}` by bisection in `f64`.
fn cycle4_pressure(ratio: f64, t: f64) -> f64 {
    let (r, s) = (ratio.powi(2).powf(t), ratio.powi(3).powf(t));
    let g = |p: f64| r * (-2.0 * p).exp() + s * (-3.0 * p).exp() - 1.0;
    let (mut a, mut b) = (-50.0, 50.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn f(r: &Rational) -> f64 {
    r.to_f64().unwrap()
}

#[test]
fn gdms_pressure_solves_the_loop_equation() {
    let ex = uniform("cycle4", &rat(1, 3)).unwrap();
    for t in [rat(1, 10), rat(1, 4), rat(1, 2), rat(1, 1), rat(2, 1)] {
        let p = ex.gdms_pressure(&t).unwrap();
        let want = cycle4_pressure(1.0 / 3.0, f(&t));
        let (lo, hi) = p.to_f64_bounds();
        assert!(lo - 1e-9 <= want && want <= hi + 1e-9, "t={t}: {want} not in [{lo}, {hi}]");
    }
}

#[test]
fn w_loops_match_full_pressure_only_at_the_root() {
    let ex = uniform("cycle4", &rat(1, 3)).unwrap();
    let h = common::cycle4_root(1.0 / 3.0);
    let hq = from_f64(h);
    let near = ex.closed_form("w", &hq).unwrap().unwrap();
    assert!(near.mid_f64().abs() < 1e-9);
    // above the root the two pressures separate
    let t = &hq * rat(2, 1);
    let pw = ex.closed_form("w", &t).unwrap().unwrap();
    let p = ex.gdms_pressure(&t).unwrap();
    assert!(pw.hi() < p.lo(), "P_Ew = {} and P = {}", pw.mid_f64(), p.mid_f64());
}

#[test]
fn ordering_below_the_root() {
    let ex = uniform("cycle4", &rat(1, 3)).unwrap();
    let h = common::cycle4_root(1.0 / 3.0);
    for k in 1..20 {
        let t = from_f64(h * k as f64 / 20.0);
        let pv = ex.closed_form("v", &t).unwrap().unwrap();
        let pw = ex.closed_form("w", &t).unwrap().unwrap();
        let p = ex.gdms_pressure(&t).unwrap();
        assert!(pv.lo() > pw.hi() && pw.lo() >= p.hi(), "t = {}", f(&t));
    }
}
