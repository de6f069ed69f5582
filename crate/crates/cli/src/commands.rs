//! The six subcommand pipelines.
//!
//! Each command returns the process exit code on success (0, or 1 for a
//! clean "not isochronous" verdict) and reports every failure as a
//! [`CliError`], which the caller maps to exit 2.

use isochrone::catalog::standard_catalog;
use isochrone::forge::{chouikha_residual, solve_chouikha, IsoProblem};
use isochrone::period::{energy_ceiling, period_scan, turning_points, PeriodReport};
use isochrone::potential::{ExprPotential, Potential};
use isochrone::series::{f_coeffs_from_h, g_series_from_f, h_coeffs_from_f, SeriesPoly};
use isochrone::urabe::{f_from_h_on, h_from_f, h_from_g, urabe_residual, x_of_big_x};

use crate::config::{Kind, Resolved};
use crate::output::{sci, to_json_string, Sink};
use crate::CliError;

/// Rows in the uniformly sampled CSV tables (conversions and residuals).
const TABLE_ROWS: usize = 257;

/// Relative shrink applied to computed interval endpoints so that roundoff
/// never pushes a sample outside a measured domain.
const EDGE_SHRINK: f64 = 1.0 - 1e-9;

/// Solve the Cauchy problem for `(f, lambda)` and tabulate the well.
pub fn build(cfg: &Resolved) -> Result<u8, CliError> {
    let f = cfg.function(Kind::Characteristic, "build")?;
    let lambda = cfg.lambda_required("build")?;
    let problem = IsoProblem::new(f, lambda, cfg.half_width)?.with_tol(cfg.tol);
    let sol = solve_chouikha(&problem)?;

    let grid = sol.grid();
    let mut csv = String::from("x,H,G,g\n");
    for &x in &grid {
        let h = sol.h_at(x)?;
        let row = [x, h, x * x * h, sol.force(x)?];
        push_row(&mut csv, &row);
    }

    #[derive(serde::Serialize)]
    struct Summary {
        command: &'static str,
        lambda: f64,
        half_width: f64,
        achieved_half_width: f64,
        stopped_early: bool,
        tol: f64,
        max_chouikha_residual: f64,
        rows: usize,
    }
    let summary = Summary {
        command: "build",
        lambda,
        half_width: cfg.half_width,
        achieved_half_width: sol.achieved_half_width(),
        stopped_early: sol.stopped_early(),
        tol: cfg.tol,
        max_chouikha_residual: sol.max_residual()?,
        rows: grid.len(),
    };
    Sink::new(cfg.out.as_ref(), cfg.format).emit(&csv, &to_json_string(&summary))?;
    Ok(0)
}

/// Decide isochronicity of a force `g`: recover the Urabe function and the
/// characteristic, tabulate both residuals, and scan periods independently.
pub fn verify(cfg: &Resolved) -> Result<u8, CliError> {
    let g = cfg.function(Kind::Force, "verify")?;
    let p = ExprPotential::new(g, cfg.lambda, cfg.half_width)?;
    let lambda = p.lambda();
    let h = h_from_g(&p)?;
    let f = f_from_h_on(&h, lambda, h.domain().hi)?;

    // Residual tables live on the x-interval that maps into h's X-range on
    // both sides; outside it one of the recovered functions is undefined.
    let x_sym = h.domain().hi;
    let x_lo = x_of_big_x(&p, -x_sym)? * EDGE_SHRINK;
    let x_hi = x_of_big_x(&p, x_sym)? * EDGE_SHRINK;

    let mut csv = String::from("x,urabe_residual,chouikha_residual\n");
    let mut max_urabe = 0.0f64;
    let mut max_chouikha = 0.0f64;
    for i in 0..TABLE_ROWS {
        let t = i as f64 / (TABLE_ROWS - 1) as f64;
        let x = x_lo + (x_hi - x_lo) * t;
        let ru = urabe_residual(&p, &h, x)?;
        let rc = chouikha_residual(&p, &f, x)?;
        max_urabe = max_urabe.max(ru.abs());
        max_chouikha = max_chouikha.max(rc.abs());
        push_row(&mut csv, &[x, ru, rc]);
    }

    let rim = energy_ceiling(&p)?;
    let energies = cfg.energies.materialize(rim)?;
    let report = period_scan(&p, &energies, cfg.period_tol)?;

    #[derive(serde::Serialize)]
    struct Summary {
        command: &'static str,
        lambda: f64,
        g_prime0: f64,
        tol: f64,
        period_tol: f64,
        expected_period: f64,
        energy_lo: f64,
        energy_hi: f64,
        energy_count: usize,
        max_period_dev: f64,
        max_urabe_residual: f64,
        max_chouikha_residual: f64,
        isochronous: bool,
    }
    let summary = Summary {
        command: "verify",
        lambda,
        g_prime0: p.measured_g_prime0(),
        tol: cfg.tol,
        period_tol: cfg.period_tol,
        expected_period: report.expected_period,
        energy_lo: energies[0],
        energy_hi: energies[energies.len() - 1],
        energy_count: energies.len(),
        max_period_dev: report.max_deviation,
        max_urabe_residual: max_urabe,
        max_chouikha_residual: max_chouikha,
        isochronous: report.isochronous,
    };
    Sink::new(cfg.out.as_ref(), cfg.format).emit(&csv, &to_json_string(&summary))?;
    Ok(if report.isochronous { 0 } else { 1 })
}

/// Convert `f -> h` or `h -> f`; polynomial inputs also yield the exact
/// coefficients of the output series.
pub fn convert(cfg: &Resolved) -> Result<u8, CliError> {
    let (kind, func) = cfg.function_of_any(&[Kind::Characteristic, Kind::Urabe], "convert")?;
    let lambda = cfg.lambda_required("convert")?;
    let poly = cfg
        .function_ast()
        .expect("function_of_any succeeded")
        .to_polynomial(&cfg.params);

    let (direction, csv, domain, series) = match kind {
        Kind::Characteristic => {
            // The half-width flag bounds the X-range of the output here.
            let s_max = cfg.half_width;
            let h = h_from_f(&func, lambda, s_max)?;
            let mut csv = String::from("X,h\n");
            for i in 0..TABLE_ROWS {
                let t = i as f64 / (TABLE_ROWS - 1) as f64;
                let s = -s_max + 2.0 * s_max * t;
                push_row(&mut csv, &[s, h.eval(s)?]);
            }
            let series =
                poly.map(|c| h_coeffs_from_f(&SeriesPoly::new(c), lambda).coeffs().to_vec());
            ("f_to_h", csv, [-s_max, s_max], series)
        }
        Kind::Urabe => {
            let f = f_from_h_on(&func, lambda, cfg.half_width)?;
            let cap = cfg.half_width * cfg.half_width / 2.0;
            let mut csv = String::from("u,f\n");
            for i in 0..TABLE_ROWS {
                let u = cap * i as f64 / (TABLE_ROWS - 1) as f64;
                push_row(&mut csv, &[u, f.eval(u)?]);
            }
            let series = match poly {
                Some(c) => {
                    let fc = f_coeffs_from_h(&SeriesPoly::new(c), lambda * lambda)
                        .map_err(isochrone::Error::from)?;
                    Some(fc.coeffs().to_vec())
                }
                None => None,
            };
            ("h_to_f", csv, [0.0, cap], series)
        }
        Kind::Force => unreachable!("filtered by function_of_any"),
    };

    #[derive(serde::Serialize)]
    struct Summary {
        command: &'static str,
        direction: &'static str,
        lambda: f64,
        tol: f64,
        domain: [f64; 2],
        rows: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        series: Option<Vec<f64>>,
    }
    let summary = Summary {
        command: "convert",
        direction,
        lambda,
        tol: cfg.tol,
        domain,
        rows: TABLE_ROWS,
        series,
    };
    Sink::new(cfg.out.as_ref(), cfg.format).emit(&csv, &to_json_string(&summary))?;
    Ok(0)
}

/// Scan orbital periods for a force `g` or a solved characteristic `f`.
pub fn period(cfg: &Resolved) -> Result<u8, CliError> {
    let (kind, func) = cfg.function_of_any(&[Kind::Characteristic, Kind::Force], "period")?;
    match kind {
        Kind::Force => {
            let p = ExprPotential::new(func, cfg.lambda, cfg.half_width)?;
            period_on(cfg, &p)
        }
        Kind::Characteristic => {
            let lambda = cfg.lambda_required("period with --f")?;
            let problem = IsoProblem::new(func, lambda, cfg.half_width)?.with_tol(cfg.tol);
            let sol = solve_chouikha(&problem)?;
            period_on(cfg, &sol)
        }
        Kind::Urabe => unreachable!("filtered by function_of_any"),
    }
}

fn period_on(cfg: &Resolved, p: &impl Potential) -> Result<u8, CliError> {
    let rim = energy_ceiling(p)?;
    let energies = cfg.energies.materialize(rim)?;
    let report = period_scan(p, &energies, cfg.period_tol)?;
    let csv = period_table(p, &report)?;

    #[derive(serde::Serialize)]
    struct Summary {
        command: &'static str,
        lambda: f64,
        expected_period: f64,
        period_tol: f64,
        energy_lo: f64,
        energy_hi: f64,
        energy_count: usize,
        max_deviation: f64,
        isochronous: bool,
    }
    let summary = Summary {
        command: "period",
        lambda: report.lambda,
        expected_period: report.expected_period,
        period_tol: report.tol,
        energy_lo: energies[0],
        energy_hi: energies[energies.len() - 1],
        energy_count: energies.len(),
        max_deviation: report.max_deviation,
        isochronous: report.isochronous,
    };
    Sink::new(cfg.out.as_ref(), cfg.format).emit(&csv, &to_json_string(&summary))?;
    Ok(if report.isochronous { 0 } else { 1 })
}

fn period_table(p: &impl Potential, report: &PeriodReport) -> Result<String, CliError> {
    let mut csv = String::from("E,x_minus,x_plus,T_quad,T_ode,deviation\n");
    for s in &report.samples {
        let tp = turning_points(p, s.energy)?;
        let dev = (s.t_quadrature - report.expected_period)
            .abs()
            .max((s.t_ode - report.expected_period).abs());
        push_row(&mut csv, &[s.energy, tp.x_minus, tp.x_plus, s.t_quadrature, s.t_ode, dev]);
    }
    Ok(csv)
}

/// Exact Taylor coefficients of the potential from a polynomial `f`.
pub fn series(cfg: &Resolved) -> Result<u8, CliError> {
    let _ = cfg.function(Kind::Characteristic, "series")?;
    let lambda = cfg.lambda_required("series")?;
    let coeffs = cfg
        .function_ast()
        .expect("function required above")
        .to_polynomial(&cfg.params)
        .ok_or_else(|| {
            CliError::Invalid("series needs a polynomial --f (no calls or negative powers)".into())
        })?;
    let f = SeriesPoly::new(coeffs);
    let g_series = g_series_from_f(&f, lambda, cfg.order).map_err(isochrone::Error::from)?;
    let h_series = h_coeffs_from_f(&f, lambda);

    let mut csv = String::from("n,coefficient\n");
    for (n, c) in g_series.coeffs().iter().enumerate() {
        csv.push_str(&format!("{n},{}\n", sci(*c)));
    }

    #[derive(serde::Serialize)]
    struct Summary {
        command: &'static str,
        lambda: f64,
        order: usize,
        g_series: Vec<f64>,
        h_series: Vec<f64>,
    }
    let summary = Summary {
        command: "series",
        lambda,
        order: cfg.order,
        g_series: g_series.coeffs().to_vec(),
        h_series: h_series.coeffs().to_vec(),
    };
    Sink::new(cfg.out.as_ref(), cfg.format).emit(&csv, &to_json_string(&summary))?;
    Ok(0)
}

/// List the built-in closed-form reference wells.
pub fn catalog(cfg: &Resolved) -> Result<u8, CliError> {
    let entries = standard_catalog();

    let mut csv = String::from("name,lambda,x_lo,x_hi,isochronous,closed_form_h,closed_form_f\n");
    for e in &entries {
        let span = e.span();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.name,
            sci(e.lambda()),
            sci(span.lo),
            sci(span.hi),
            e.isochronous,
            e.h.is_some(),
            e.f.is_some(),
        ));
    }

    #[derive(serde::Serialize)]
    struct Entry {
        name: String,
        lambda: f64,
        span: [f64; 2],
        isochronous: bool,
        closed_form_h: bool,
        closed_form_f: bool,
    }
    #[derive(serde::Serialize)]
    struct Summary {
        command: &'static str,
        entries: Vec<Entry>,
    }
    let summary = Summary {
        command: "catalog",
        entries: entries
            .iter()
            .map(|e| Entry {
                name: e.name.clone(),
                lambda: e.lambda(),
                span: [e.span().lo, e.span().hi],
                isochronous: e.isochronous,
                closed_form_h: e.h.is_some(),
                closed_form_f: e.f.is_some(),
            })
            .collect(),
    };
    Sink::new(cfg.out.as_ref(), cfg.format).emit(&csv, &to_json_string(&summary))?;
    Ok(0)
}

fn push_row(csv: &mut String, values: &[f64]) {
    let row: Vec<String> = values.iter().map(|&v| sci(v)).collect();
    csv.push_str(&row.join(","));
    csv.push('\n');
}
