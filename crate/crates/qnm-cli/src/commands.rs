//! Command implementations. Each command takes a validated, resolved
//! configuration and returns its JSON result plus an optional CSV table.

use std::sync::Arc;

use num_complex::Complex64;
use qnm_core::determinant_engine::{build_basis, DeterminantEngine};
use qnm_core::geometry::{rescale, solve_horizons, validate_assumptions, Pole};
use qnm_core::geometry::{kappa_tilde, HorizonData};
use qnm_core::parametrix::symbolic::{build_fiber_symbols, BoundaryOperator, Coefficient, SymbolSettings};
use qnm_core::parametrix::symbol::{RadialCutoff, SymbolPoint};
use qnm_core::parametrix::{DiscreteParametrix, CERTIFY_TOL};
use qnm_core::radial_oracle::{wronskian_zeros, RadialProblem};
use qnm_core::resonance_finder::{count_report, locate, ContourShape, LocatedZero};
use qnm_core::spectral_family::{critical_strips, Horizon, SectorConfig, SpectralFamily};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{num, Table};
use crate::CliError;

/// Output of one command.
pub struct Outcome {
    /// JSON result (embedded in the report envelope).
    pub result: Value,
    /// Optional CSV table.
    pub table: Option<Table>,
}

impl Outcome {
    fn json(result: Value) -> Self {
        Outcome { result, table: None }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))
}

/// Number of ξ samples per fiber symbol in `parametrix dump-symbols`.
pub const DUMP_XI_SAMPLES: usize = 65;
/// ρ values (as fractions of the χ plateau ρ₀) sampled by `parametrix dump-symbols`.
pub const DUMP_RHO_FRACTIONS: [f64; 3] = [0.0, 0.5, 1.0];

fn per_horizon_strips(h: &HorizonData, sector: &SectorConfig) -> Vec<Value> {
    let mut out = Vec::new();
    for j in 1..=sector.n_prime {
        let s = sector.k as f64 + sector.l_weight + j as f64 - 1.0;
        out.push(json!({ "horizon": "minus", "j": j, "value": -s * h.kappa_minus.abs() }));
        out.push(json!({ "horizon": "plus", "j": j, "value": -s * h.kappa_plus.abs() }));
    }
    out
}

/// `validate`: every block plus the geometric assumptions.
pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let h = solve_horizons(&cfg.spacetime)?;
    let report = validate_assumptions(&cfg.spacetime, &h)?;
    let strips = critical_strips(&h, &cfg.sector);
    let contour = cfg.contour();
    Ok(Outcome::json(json!({
        "valid": report.passed,
        "assumptions": to_value(&report)?,
        "trace_class": cfg.sector.trace_class_ok(),
        "strips": strips,
        "contour_strip_clearance": contour.strip_clearance(&strips),
    })))
}

/// `horizons`: roots of μ and surface gravities.
pub fn horizons(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let h = solve_horizons(&cfg.spacetime)?;
    Ok(Outcome::json(to_value(&h)?))
}

/// `geometry`: horizons, assumption check and derived constants.
pub fn geometry(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = &cfg.spacetime;
    let h = solve_horizons(p)?;
    let report = validate_assumptions(p, &h)?;
    Ok(Outcome::json(json!({
        "horizons": to_value(&h)?,
        "assumptions": to_value(&report)?,
        "lambda": p.lambda(),
        "e2": p.e2(),
        "quartic": p.quartic(),
        "kappa_tilde_north": kappa_tilde(p, Pole::North, 1.0),
        "kappa_tilde_south": kappa_tilde(p, Pole::South, -1.0),
    })))
}

/// `strips`: the forbidden imaginary parts for the configured (k, N′).
pub fn strips(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let h = solve_horizons(&cfg.spacetime)?;
    let strips = critical_strips(&h, &cfg.sector);
    let mut table = Table::new(&["horizon", "j", "im_sigma"]);
    let per = per_horizon_strips(&h, &cfg.sector);
    for v in &per {
        table.push(vec![
            v["horizon"].as_str().unwrap_or_default().to_string(),
            v["j"].to_string(),
            num(v["value"].as_f64().unwrap_or(f64::NAN)),
        ]);
    }
    Ok(Outcome { result: json!({ "strips": strips, "per_horizon": per }), table: Some(table) })
}

/// Builds the determinant engine of the configuration.
pub fn engine(cfg: &RunConfig) -> Result<DeterminantEngine<DiscreteParametrix>, CliError> {
    let family = SpectralFamily::new(&cfg.spacetime, cfg.sector)?;
    let disc = family.discretize(cfg.grids.collocation())?;
    let basis = build_basis(&disc, &cfg.sector, cfg.grids.r_max)?;
    let par = DiscreteParametrix::new(disc, &cfg.sector, cfg.grids.parametrix)?;
    Ok(DeterminantEngine::for_sector(par, basis, &cfg.sector)?)
}

/// `det-eval`: one determinant sample with its error budget.
pub fn det_eval(cfg: &RunConfig, sigma: Complex64) -> Result<Outcome, CliError> {
    let eng = engine(cfg)?;
    let sample = eng.sample(sigma)?;
    Ok(Outcome::json(json!({ "rank": eng.basis().rank, "dim": eng.basis().dim(), "sample": to_value(&sample)? })))
}

/// `det-sweep`: D_R on a regular grid over the contour's bounding box.
pub fn det_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let eng = engine(cfg)?;
    let (lo, hi) = cfg.contour().bounding_box();
    let (nx, ny) = (cfg.grids.sweep_re, cfg.grids.sweep_im);
    let axis = |a: f64, b: f64, n: usize, i: usize| if n == 1 { 0.5 * (a + b) } else { a + (b - a) * i as f64 / (n - 1) as f64 };
    let sigmas: Vec<Complex64> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| Complex64::new(axis(lo.re, hi.re, nx, i), axis(lo.im, hi.im, ny, j)))
        .collect();
    let samples = sigmas.par_iter().map(|&s| eng.sample(s)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["re_sigma", "im_sigma", "re_d", "im_d", "abs_d", "dfrak"]);
    for s in &samples {
        table.push(vec![num(s.sigma.re), num(s.sigma.im), num(s.d_r.re), num(s.d_r.im), num(s.d_r.norm()), num(s.budget.dfrak_r)]);
    }
    let max_dfrak = samples.iter().map(|s| s.budget.dfrak_r).fold(0.0, f64::max);
    let flagged = samples.iter().filter(|s| s.flagged).count();
    Ok(Outcome {
        result: json!({ "samples": samples.len(), "rank": eng.basis().rank, "max_dfrak": max_dfrak, "flagged": flagged }),
        table: Some(table),
    })
}

fn zero_table(zeros: &[LocatedZero]) -> Table {
    let mut table = Table::new(&["re_sigma", "im_sigma", "residual", "cell_id"]);
    for z in zeros {
        table.push(vec![num(z.sigma.re), num(z.sigma.im), num(z.residual), z.cell_id.clone()]);
    }
    table
}

/// `count`: N_R, S_R and the error constants on the configured contour.
pub fn count(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let eng = engine(cfg)?;
    let h = solve_horizons(&cfg.spacetime)?;
    let strips = critical_strips(&h, &cfg.sector);
    let report = count_report(&cfg.contour(), &eng, &strips, cfg.grids.n_max)?;
    Ok(Outcome::json(to_value(&report)?))
}

/// `locate`: count report plus the located zeros; the CSV lists only zeros certified
/// as zeros of the collocation pencil.
pub fn locate_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let eng = engine(cfg)?;
    let h = solve_horizons(&cfg.spacetime)?;
    let strips = critical_strips(&h, &cfg.sector);
    let contour = cfg.contour();
    let mut report = count_report(&contour, &eng, &strips, cfg.grids.n_max)?;
    report.located = locate(&contour, &eng, cfg.grids.max_depth, &strips)?;
    // zeros of det(1 + K) that are not zeros of the pencil come from the Neumann truncation
    let certification: Vec<Value> = report
        .located
        .iter()
        .map(|z| {
            let sv = eng.family().certify(z.sigma);
            json!({ "cell_id": z.cell_id, "min_singular_value": sv, "genuine": sv < CERTIFY_TOL })
        })
        .collect();
    let genuine: Vec<LocatedZero> = report.located.iter().filter(|z| eng.family().is_genuine(z.sigma)).cloned().collect();
    let table = zero_table(&genuine);
    let mut result = to_value(&report)?;
    result["certification"] = Value::Array(certification);
    result["resonances"] = to_value(&genuine)?;
    Ok(Outcome { result, table: Some(table) })
}

/// `oracle`: Wronskian zeros of the radial problem inside the contour.
pub fn oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = RadialProblem::new(&cfg.spacetime, cfg.grids.l_sph)?;
    let zeros = wronskian_zeros(&problem, &cfg.contour(), cfg.grids.max_depth)?;
    let table = zero_table(&zeros);
    Ok(Outcome { result: json!({ "l_sph": cfg.grids.l_sph, "zeros": to_value(&zeros)? }), table: Some(table) })
}

/// `rescale`: the configuration mapped to Λ = 1 (σ̃ = σ/√Λ).
pub fn rescale_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = cfg.spacetime.lambda_cc.sqrt();
    let (params, _) = rescale(&cfg.spacetime, Complex64::new(0.0, 0.0));
    let mut out = cfg.clone();
    out.spacetime = params;
    let mut contour = cfg.contour();
    contour.shape = match contour.shape {
        ContourShape::Circle { center, radius } => ContourShape::Circle { center: center / s, radius: radius / s },
        ContourShape::Rectangle { lower_left, upper_right } => ContourShape::Rectangle { lower_left: lower_left / s, upper_right: upper_right / s },
    };
    contour.delta_prime = contour.delta_prime.map(|d| d / s);
    contour.margin /= s;
    out.contour = Some(contour);
    Ok(Outcome::json(json!({ "scale": s, "rescaled": to_value(&out)? })))
}

/// `parametrix dump-symbols`: fiber symbols of the boundary-frozen model at both horizons.
pub fn dump_symbols(cfg: &RunConfig, sigma: Complex64) -> Result<Outcome, CliError> {
    let family = SpectralFamily::new(&cfg.spacetime, cfg.sector)?;
    let sector = &cfg.sector;
    let width = family.horizons().width();
    let (rho0, rho1) = (sector.rho0_frac * width, sector.rho0p_frac * width);
    let mut table = Table::new(&["horizon", "j", "rho", "xi", "re", "im"]);
    let mut orders = Vec::new();
    for horizon in [Horizon::Minus, Horizon::Plus] {
        let ind = family.indicial(horizon, sigma, sector.k, sector.l_weight, 1);
        let op = BoundaryOperator { a: Coefficient::Const(ind.a0), b: Coefficient::Const(ind.b0), c: Coefficient::Const(ind.c0), angular: None };
        let settings = SymbolSettings {
            k: sector.k,
            l: sector.l_weight,
            epsilon: sector.epsilon,
            c_shift: sector.c_shift,
            n_depth: sector.n_depth,
            n_prime: sector.n_prime,
            cutoff: Arc::new(RadialCutoff { rho0, rho1 }),
            angular_cutoff: None,
            sigma,
        };
        let bundle = build_fiber_symbols(&op, settings)?;
        let compiled = bundle.graph.compile(&bundle.fiber);
        let name = match horizon {
            Horizon::Minus => "minus",
            Horizon::Plus => "plus",
        };
        let xi_max = 8.0 * (1.0 + sigma.norm());
        for f in DUMP_RHO_FRACTIONS {
            let rho = f * rho0;
            for i in 0..DUMP_XI_SAMPLES {
                let xi = -xi_max + 2.0 * xi_max * i as f64 / (DUMP_XI_SAMPLES - 1) as f64;
                let vals = compiled.eval(SymbolPoint::new(rho, 0.0, xi, 0.0));
                for (j, v) in vals.iter().enumerate() {
                    table.push(vec![name.to_string(), (j + 1).to_string(), num(rho), num(xi), num(v.re), num(v.im)]);
                }
            }
        }
        orders.push(json!({ "horizon": name, "a0": ind.a0.re, "b0": to_value(&ind.b0)?, "symbols": bundle.fiber.len() }));
    }
    Ok(Outcome { result: json!({ "sigma": to_value(&sigma)?, "horizons": orders, "rows": table.rows.len() }), table: Some(table) })
}
