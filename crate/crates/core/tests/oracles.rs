//! Cross-checks between independent computations of the same probabilities.

use qoverflow::approx::{build_h_a0, build_h_ak, exact_geometric_formula};
use qoverflow::grid::{f_n_lower_bound, solve_pn, solve_py_inf_many, Method};
use qoverflow::ldrate::rate_v;
use qoverflow::simulate::{mc_pn, mc_py_inf};
use qoverflow::{LatticePoint, QueueParams};

fn y(a: i64, b: i64) -> LatticePoint {
    LatticePoint::y(a, b).unwrap()
}

fn x(a: i64, b: i64) -> LatticePoint {
    LatticePoint::x(a, b).unwrap()
}

fn wedge_points() -> Vec<LatticePoint> {
    let mut pts = Vec::new();
    for a in (1..=40).step_by(3) {
        for b in (0..a).step_by(4) {
            pts.push(y(a, b));
        }
    }
    pts
}

#[test]
fn certificates_bound_wedge_oracle() {
    let p = QueueParams::worked_example();
    let pts = wedge_points();
    let oracle = solve_py_inf_many(&p, &pts, 1e-9).unwrap();
    let h0 = build_h_a0(&p).unwrap();
    for (pt, o) in pts.iter().zip(&oracle.values) {
        let v = h0.approximation.value(*pt);
        assert!(v >= o * (1.0 - 1e-8) && v <= h0.c8 * o * (1.0 + 1e-8), "{pt}: {v} vs {o}");
    }
    for k in [1usize, 3, 8, 20] {
        let fit = build_h_ak(&p, k, 0.7).unwrap();
        for (pt, o) in pts.iter().zip(&oracle.values) {
            let err = (fit.value(*pt) - o).abs() / o;
            assert!(err <= fit.cstar + 1e-8, "K={k} {pt}: {err} > {}", fit.cstar);
        }
    }
}

#[test]
fn geometric_case_three_ways() {
    let p = QueueParams::with_geometric_r(0.6, 0.3).unwrap();
    let pts = [y(2, 0), y(5, 1), y(8, 7), y(12, 3)];
    let oracle = solve_py_inf_many(&p, &pts, 1e-10).unwrap();
    for (i, (pt, o)) in pts.iter().zip(&oracle.values).enumerate() {
        let f = exact_geometric_formula(&p, *pt).unwrap();
        assert!((f - o).abs() <= 1e-8 * o, "{pt}");
        let e = mc_py_inf(&p, *pt, 200_000, 100_000, i as u64).unwrap();
        assert!(e.covers(f, 4.0), "{pt}: {} +- {} vs {f}", e.mean, e.half_width_95);
        assert!(e.truncated_paths as f64 <= 1e-4 * e.trials as f64);
    }
}

#[test]
fn monte_carlo_matches_lattice_solver() {
    let p = QueueParams::worked_example();
    let sol = solve_pn(&p, 6, Method::Direct).unwrap();
    for (i, pt) in [x(1, 0), x(2, 2), x(0, 4)].into_iter().enumerate() {
        let e = mc_pn(&p, pt, 6, 200_000, 50 + i as u64).unwrap();
        let exact = sol.value_at(pt).unwrap();
        assert!(e.covers(exact, 4.0), "{pt}: {} +- {} vs {exact}", e.mean, e.half_width_95);
    }
}

#[test]
fn sandwich_on_a30() {
    let p = QueueParams::worked_example();
    let sol = solve_pn(&p, 30, Method::GaussSeidel).unwrap();
    for (a, b, v) in sol.rows() {
        let lb = f_n_lower_bound(&p, x(a, b), 30).unwrap();
        assert!(0.0 <= lb && lb <= v && v <= 1.0, "({a},{b})");
    }
}

#[test]
fn decay_rate_increases_to_v() {
    let p = QueueParams::worked_example();
    let sols: Vec<_> = [20usize, 40, 60].iter().map(|&n| solve_pn(&p, n, Method::Auto).unwrap()).collect();
    for xr in [[0.1, 0.0], [0.2, 0.1], [0.3, 0.3], [0.05, 0.5]] {
        let v = rate_v(&p, xr);
        let mut last = 0.0;
        for s in &sols {
            let n = s.n as f64;
            let pt = ((n * xr[0]).floor() as i64, (n * xr[1]).floor() as i64);
            let est = -s.value(pt.0, pt.1).unwrap().ln() / n;
            // p_n >= f_n - f_n(0) ~ exp(-n V), so the estimate sits below V.
            assert!(est <= v + 1e-12, "{xr:?} n={n}: {est} > {v}");
            assert!(est > last, "{xr:?} n={n}: {est} <= {last}");
            last = est;
        }
    }
}

#[test]
fn exact_and_approximation_close_far_from_first_axis() {
    let p = QueueParams::worked_example();
    let n = 60;
    let sol = solve_pn(&p, n, Method::Auto).unwrap();
    let fit = build_h_ak(&p, 20, 0.7).unwrap();
    for (a, b) in [(10, 0), (10, 5), (15, 10), (20, 20)] {
        let exact = sol.value(a, b).unwrap();
        let approx = fit.value(x(a, b).transform_tn(n as i64).unwrap());
        assert!((approx - exact).abs() / exact < 2e-3, "({a},{b}): {approx} vs {exact}");
    }
}
