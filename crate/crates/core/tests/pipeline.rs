//! End-to-end flows across module boundaries: measured Urabe data feeding
//! the builder, solved potentials feeding the verifier, and closed-form
//! catalog wells anchoring both ends.

use isochrone::catalog::{standard_catalog, urabe_family};
use isochrone::forge::{chouikha_residual, solve_chouikha, IsoProblem};
use isochrone::period::{energy_ceiling, log_spaced, period_scan};
use isochrone::potential::Potential;
use isochrone::scalar_fn::ScalarFn;
use isochrone::urabe::{check_limit_2_2, f_from_h, h_from_g};

/// Build the characteristic expression set of the forward-direction tests:
/// constants, the identity, and the cosine, at both frequencies.
fn characteristic_set() -> Vec<(ScalarFn, f64, f64)> {
    let mut set = Vec::new();
    for lambda in [1.0, 2.0] {
        // Half-widths keep the construction well inside its singular point.
        let hw = if lambda < 1.5 { 1.2 } else { 0.6 };
        set.push((ScalarFn::constant(0.0), lambda, hw));
        set.push((ScalarFn::constant(0.5), lambda, hw));
        set.push((ScalarFn::from_expr_str("x").unwrap(), lambda, hw));
        set.push((ScalarFn::from_expr_str("cos(x)").unwrap(), lambda, hw));
    }
    set
}

#[test]
fn measured_urabe_data_rebuilds_the_well() {
    // Closed-form well -> measure h -> recover f -> solve the Cauchy
    // problem -> compare potentials.  Every arrow crosses a module
    // boundary, and no step sees the closed form it is being tested
    // against.
    let reference = urabe_family(0.5);
    let h = h_from_g(&reference).unwrap();
    let f = f_from_h(&h, reference.lambda()).unwrap();

    // The recovered characteristic must be the constant 0.5.
    let mut worst_f = 0.0f64;
    let cap = f.domain().hi;
    for i in 0..=60 {
        let s = cap * i as f64 / 60.0;
        worst_f = worst_f.max((f.eval(s).unwrap() - 0.5).abs());
    }
    assert!(worst_f < 1e-6, "recovered characteristic off by {worst_f}");

    let problem = IsoProblem::new(f, reference.lambda(), 0.4).unwrap();
    let sol = solve_chouikha(&problem).unwrap();
    let mut worst_g = 0.0f64;
    for i in -40..=40 {
        let x = 0.4 * i as f64 / 40.0;
        let got = sol.potential(x).unwrap();
        let want = reference.potential(x).unwrap();
        worst_g = worst_g.max((got - want).abs() / want.abs().max(1e-12));
    }
    assert!(worst_g < 1e-6, "rebuilt potential off by {worst_g}");
}

#[test]
fn solved_wells_pass_verification_on_admissible_energies() {
    // The forward direction on the full characteristic set: every solved
    // well is isochronous on energies its range actually supports.
    for (f, lambda, hw) in characteristic_set() {
        let problem = IsoProblem::new(f, lambda, hw).unwrap();
        let sol = solve_chouikha(&problem).unwrap();
        let e_max = energy_ceiling(&sol).unwrap();
        let energies = log_spaced(1e-4, e_max / 2.0, 8);
        let report = period_scan(&sol, &energies, 1e-6).unwrap();
        assert!(
            report.isochronous,
            "lambda {lambda}: max period deviation {}",
            report.max_deviation
        );
    }
}

#[test]
fn solved_wells_satisfy_their_own_characteristic() {
    for (f, lambda, hw) in characteristic_set() {
        let problem = IsoProblem::new(f.clone(), lambda, hw).unwrap();
        let sol = solve_chouikha(&problem).unwrap();
        let lo = sol.x_min() * 0.9;
        let hi = sol.x_max() * 0.9;
        for i in 0..=16 {
            let x = lo + (hi - lo) * i as f64 / 16.0;
            if x.abs() < 1e-3 {
                continue;
            }
            let r = chouikha_residual(&sol, &f, x).unwrap();
            assert!(r.abs() < 1e-7, "residual {r} at {x} (lambda {lambda})");
        }
    }
}

#[test]
fn small_x_limit_holds_across_construction_and_catalog() {
    for (f, lambda, hw) in characteristic_set() {
        let sol = solve_chouikha(&IsoProblem::new(f, lambda, hw).unwrap()).unwrap();
        let check = check_limit_2_2(&sol).unwrap();
        assert!(check.deviations[5] <= 1e-4, "lambda {lambda}: {:?}", check.deviations);
    }
    for entry in standard_catalog() {
        let check = check_limit_2_2(&entry).unwrap();
        assert!(check.deviations[5] <= 1e-3, "{}: {:?}", entry.name, check.deviations);
    }
}

#[test]
fn construction_reproduces_the_closed_form_family() {
    for a in [0.5, 1.0] {
        let reference = urabe_family(a);
        let reach = reference.span().hi.min(0.45 / a);
        let sol = solve_chouikha(
            &IsoProblem::new(ScalarFn::constant(a), 1.0, reach).unwrap(),
        )
        .unwrap();
        for i in -30..=30 {
            let x = reach * i as f64 / 30.0 * 0.98;
            let got = sol.potential(x).unwrap();
            let want = reference.potential(x).unwrap();
            assert!(
                (got - want).abs() <= 1e-8 * want.abs().max(1e-10),
                "a = {a}: G mismatch at {x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn distinct_characteristics_give_distinct_wells() {
    // Same frequency, different characteristic: the construction is
    // injective, and each well fails the other's characteristic equation.
    let f1 = ScalarFn::constant(0.5);
    let f2 = ScalarFn::from_expr_str("0.5 + x").unwrap();
    let sol1 = solve_chouikha(&IsoProblem::new(f1.clone(), 1.0, 0.6).unwrap()).unwrap();
    let sol2 = solve_chouikha(&IsoProblem::new(f2.clone(), 1.0, 0.6).unwrap()).unwrap();

    let mut sep = 0.0f64;
    let mut cross12 = 0.0f64;
    let mut cross21 = 0.0f64;
    for i in -20..=20 {
        let x = 0.5 * i as f64 / 20.0;
        sep = sep.max((sol1.force(x).unwrap() - sol2.force(x).unwrap()).abs());
        if x.abs() > 0.05 {
            cross12 = cross12.max(chouikha_residual(&sol1, &f2, x).unwrap().abs());
            cross21 = cross21.max(chouikha_residual(&sol2, &f1, x).unwrap().abs());
        }
    }
    assert!(sep > 1e-4, "separation only {sep}");
    assert!(cross12 > 1e-5 && cross21 > 1e-5, "cross residuals {cross12}, {cross21}");
}

#[test]
fn catalog_wells_verify_according_to_their_flags() {
    for entry in standard_catalog() {
        let e_max = energy_ceiling(&entry).unwrap();
        let energies = log_spaced(1e-3, e_max * 0.4, 5);
        let report = period_scan(&entry, &energies, 1e-6).unwrap();
        assert_eq!(
            report.isochronous, entry.isochronous,
            "{}: max deviation {}",
            entry.name, report.max_deviation
        );
    }
}
