use anyhow::{bail, Result};
use ioncavity::crystal::{self, Classification, CrystalConfiguration};
use ioncavity::export::{configuration_table, Cell, Table};
use ioncavity::linearized::{self, coupled};
use ioncavity::params;
use ioncavity::softmode::{self, SoftModePotential};
use ioncavity::steadystate::{self, Bipartition};
use ioncavity::sweep::{self, Seed, SweepOptions};
use ioncavity::SystemParams;

use crate::cli::{PowerGrid, SeedArg, Solve};
use crate::output::Sink;
use crate::svg::{Plot, Series};

fn seed_of(arg: SeedArg) -> Seed {
    match arg {
        SeedArg::Linear => Seed::Linear,
        SeedArg::ZigzagUp => Seed::ZigzagUp,
        SeedArg::ZigzagDown => Seed::ZigzagDown,
    }
}

fn start(params: &SystemParams, seed: Seed) -> Vec<[f64; 2]> {
    let amp = SweepOptions::for_params(params).zigzag_amplitude;
    match seed {
        Seed::Linear => crystal::linear_chain_seed(params),
        Seed::ZigzagUp => crystal::zigzag_seed(params, amp),
        Seed::ZigzagDown => crystal::zigzag_seed(params, -amp),
    }
}

/// Applies the power override and solves from the chosen seed.
pub fn solve(
    params: &SystemParams,
    args: &Solve,
    default: Seed,
) -> Result<(SystemParams, CrystalConfiguration)> {
    let p = match args.power {
        Some(power) if !(power >= 0.0) => bail!("power must be non-negative, got {power}"),
        Some(power) => params.with_power(power),
        None => params.clone(),
    };
    let seed = args.seed.map_or(default, seed_of);
    let config = crystal::find_equilibrium(&p, &start(&p, seed))?;
    if !config.is_minimum(&p) {
        eprintln!(
            "warning: the {} solution is not a local minimum",
            config.classification
        );
    }
    Ok((p, config))
}

fn grid_of(g: &PowerGrid) -> Result<Vec<f64>> {
    if g.points == 0 || !(g.p_max >= g.p_min) || !(g.p_min >= 0.0) {
        bail!(
            "invalid power grid {}..{} with {} points",
            g.p_min,
            g.p_max,
            g.points
        );
    }
    if !g.linear && g.p_min == 0.0 {
        bail!("a log-spaced grid needs p_min > 0 (or pass --linear)");
    }
    Ok(if g.linear {
        sweep::linear_grid(g.p_min, g.p_max, g.points)
    } else {
        sweep::log_grid(g.p_min, g.p_max, g.points)
    })
}

fn summary(params: &SystemParams, c: &CrystalConfiguration) -> Vec<String> {
    vec![
        format!("classification {}", c.classification),
        format!("power_p0 {}", params.power()),
        format!("potential_energy_J {:e}", c.potential_energy),
        format!("max_force_N {:e}", c.gradient_norm),
        format!("delta_eff_rad_s {:e}", c.mean_field.delta_eff),
        format!("n_photons {:e}", c.mean_field.n_photons),
        format!(
            "i_out_photons_per_s {:e}",
            params::output_intensity(&c.mean_field, params)
        ),
        format!("local_minimum {}", c.is_minimum(params)),
    ]
}

pub fn equilibrium(params: &SystemParams, args: &Solve, sink: &mut Sink) -> Result<()> {
    let (p, c) = solve(params, args, Seed::Linear)?;
    let mut t = configuration_table(&c);
    t.comments = summary(&p, &c);
    sink.table("equilibrium", t)?;
    let k = p.wavenumber;
    let pts = c.positions.iter().map(|q| (q[1] * 1e6, q[0] * k)).collect();
    sink.plot(
        "equilibrium",
        Plot {
            title: format!("{} equilibrium", c.classification),
            x_label: "y (um)".into(),
            y_label: "k x".into(),
            series: vec![Series::markers("ions", pts)],
            ..Plot::default()
        },
    )
}

pub fn critical(params: &SystemParams, sink: &mut Sink) -> Result<f64> {
    let w = crystal::critical_frequency(params)?;
    let mut t = Table::new(["omega_crit_rad_s", "omega_crit_over_2pi_mhz"]);
    t.push(vec![w.into(), (w / ioncavity::constants::mhz(1.0)).into()]);
    sink.table("critical", t)?;
    Ok(w)
}

fn minima_table(curves: &[(f64, SoftModePotential)], k: f64) -> Table {
    let mut t = Table::new(["power_p0", "class", "minima", "minima_kb"]);
    for (power, v) in curves {
        let list: Vec<String> = v.minima.iter().map(|m| format!("{:.6}", m.b * k)).collect();
        t.push(vec![
            (*power).into(),
            v.class.to_string().into(),
            v.minima.len().into(),
            list.join(";").into(),
        ]);
    }
    t
}

pub fn landau(
    params: &SystemParams,
    theta: f64,
    coop: Option<f64>,
    powers: &[f64],
    projected: bool,
    sink: &mut Sink,
) -> Result<()> {
    if powers.is_empty() {
        bail!("no powers given");
    }
    let k = params.wavenumber;
    let grid = softmode::default_b_grid(params);
    let coop = match coop {
        Some(c) => c,
        None => params::cooperativity(params, &crystal::linear_chain_seed(params)),
    };
    let curves: Vec<(f64, SoftModePotential)> = powers
        .iter()
        .map(|&power| {
            let v = if projected {
                softmode::v_s_projected(&params.with_power(power), &grid)?
            } else {
                softmode::uniform_potential(theta, power, coop, params, &grid)?
            };
            Ok((power, v))
        })
        .collect::<Result<_>>()?;

    let mut columns = vec!["kb".to_owned()];
    columns.extend(powers.iter().map(|p| format!("v_s_J_p{p}")));
    let mut t = Table::new(columns);
    if projected {
        t.comments
            .push("full potential along the free-space soft mode of the linear chain".into());
    } else {
        t.comments.push(format!(
            "uniform chain, theta {theta}, cooperativity {coop}"
        ));
    }
    for (i, b) in grid.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(b * k).into()];
        row.extend(curves.iter().map(|(_, v)| Cell::from(v.values[i])));
        t.push(row);
    }
    sink.table("landau", t)?;
    sink.table("landau_minima", minima_table(&curves, k))?;

    let unit = params.ion_mass * params.omega_x * params.omega_x / (k * k);
    let center = grid.len() / 2;
    let series = curves
        .iter()
        .map(|(power, v)| {
            let v0 = v.values[center];
            let pts = grid
                .iter()
                .zip(&v.values)
                .map(|(b, y)| (b * k, (y - v0) / unit))
                .collect();
            Series::line(format!("P = {power}"), pts)
        })
        .collect();
    sink.plot(
        "landau",
        Plot {
            title: if projected {
                "projected soft-mode potential"
            } else {
                "uniform-chain soft-mode potential"
            }
            .into(),
            x_label: "k b".into(),
            y_label: "V_s / (m omega_x^2 / k^2)".into(),
            series,
            guides: vec![-std::f64::consts::PI, std::f64::consts::PI],
            ..Plot::default()
        },
    )
}

fn opt(v: Option<f64>) -> Cell {
    v.into()
}

pub fn sweep(
    params: &SystemParams,
    grid: &PowerGrid,
    entanglement: bool,
    sink: &mut Sink,
) -> Result<()> {
    let powers = grid_of(grid)?;
    let mut options = SweepOptions::for_params(params);
    options.entanglement = entanglement;
    let table = sweep::sweep_power(params, &powers, &Seed::ALL, &options)?;
    let i0 = table.reference_intensity;
    let k = params.wavenumber;

    let mut t = Table::new([
        "power_p0",
        "branch",
        "class",
        "converged",
        "stable",
        "i_out_over_i0",
        "delta_eff_rad_s",
        "max_abs_x_m",
        "e_n_cavity_all_modes",
        "e_n_cavity_zigzag_mode",
    ]);
    t.comments.push(format!("i0_photons_per_s {i0:e}"));
    t.comments.push(match table.bistable_interval {
        Some((a, b)) => format!("bistable_interval_p0 {a} {b}"),
        None => "bistable_interval_p0 none".into(),
    });
    let n = params.n_ions;
    let mut columns = vec![
        "power_p0".to_owned(),
        "branch".to_owned(),
        "class".to_owned(),
    ];
    columns.extend((1..=n).map(|j| format!("kx_{j}")));
    let mut positions = Table::new(columns);
    positions
        .comments
        .push("transverse positions in units of 1/k, ions sorted along the chain".into());
    for pt in &table.points {
        let c = pt.configuration.as_ref();
        let class = c.map_or("failed".to_owned(), |c| c.classification.to_string());
        t.push(vec![
            pt.power.into(),
            pt.seed.to_string().into(),
            class.clone().into(),
            pt.converged().into(),
            pt.stable.into(),
            opt(pt.output_intensity.map(|i| i / i0)),
            opt(c.map(|c| c.mean_field.delta_eff)),
            opt(c.map(|c| c.max_abs_x())),
            opt(pt.entanglement.map(|e| e.cavity_vs_all_modes)),
            opt(pt.entanglement.map(|e| e.cavity_vs_zigzag_mode)),
        ]);
        if let (Some(c), true) = (c, pt.converged()) {
            let mut row = vec![pt.power.into(), pt.seed.to_string().into(), class.into()];
            row.extend(c.positions.iter().map(|q| Cell::from(q[0] * k)));
            positions.push(row);
        }
        if let Some(e) = &pt.error {
            eprintln!("warning: P = {} ({}): {e}", pt.power, pt.seed);
        }
    }
    sink.table("branches", t)?;
    sink.table("positions", positions)?;

    let h = sweep::hysteresis(params, &powers, &options)?;
    let mut ht = Table::new([
        "direction",
        "power_p0",
        "class",
        "converged",
        "i_out_over_i0",
        "delta_eff_rad_s",
        "max_abs_x_m",
    ]);
    ht.comments
        .push(format!("loop_area_over_i0 {:e}", h.loop_area / i0));
    for (dir, trace) in [("up", &h.up), ("down", &h.down)] {
        for tp in trace.iter() {
            ht.push(vec![
                dir.into(),
                tp.power.into(),
                tp.classification.to_string().into(),
                tp.converged.into(),
                (tp.output_intensity / i0).into(),
                tp.delta_eff.into(),
                tp.max_abs_x.into(),
            ]);
        }
    }
    sink.table("hysteresis", ht)?;

    let guides = table
        .bistable_interval
        .map_or(Vec::new(), |(a, b)| vec![a, b]);
    let trace = |v: &[sweep::TracePoint]| {
        v.iter()
            .map(|t| (t.power, t.output_intensity / i0))
            .collect()
    };
    sink.plot(
        "hysteresis",
        Plot {
            title: "output intensity".into(),
            x_label: "P / P0".into(),
            y_label: "I_out / I_0".into(),
            series: vec![
                Series::line("up", trace(&h.up)),
                Series::line("down", trace(&h.down)),
            ],
            guides: guides.clone(),
            ..Plot::default()
        },
    )?;
    let mut series = Vec::new();
    for class in [Classification::Linear, Classification::Zigzag] {
        for j in 0..n {
            let pts = table
                .points
                .iter()
                .filter(|p| p.stable && p.classification() == Some(class))
                .filter_map(|p| {
                    p.configuration
                        .as_ref()
                        .map(|c| (p.power, c.positions[j][0] * k))
                })
                .collect();
            series.push(Series::markers(format!("{class} ion {}", j + 1), pts));
        }
    }
    sink.plot(
        "positions",
        Plot {
            title: "stable equilibria".into(),
            x_label: "P / P0".into(),
            y_label: "k x".into(),
            series,
            guides,
            ..Plot::default()
        },
    )
}

pub fn modes(params: &SystemParams, args: &Solve, sink: &mut Sink) -> Result<()> {
    let (p, c) = solve(params, args, Seed::ZigzagUp)?;
    let m = linearized::normal_modes(&p, &c)?;
    let system = linearized::drift_matrix(&p, &c, &m);
    let report = linearized::stability_report(&system)?;
    let n = p.n_ions;
    let mut columns: Vec<String> = [
        "mode",
        "omega_rad_s",
        "omega_over_omega_y",
        "coupling_rad_s",
        "coupled",
        "heating_rate_per_s",
        "bath_occupation",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for j in 1..=n {
        columns.push(format!("ex_{j}"));
        columns.push(format!("ey_{j}"));
    }
    let mut t = Table::new(columns);
    t.comments = summary(&p, &c);
    t.comments
        .push(format!("drift_max_real_s {:e}", report.max_real));
    t.comments
        .push(format!("dynamically_stable {}", report.stable));
    for i in 0..m.len() {
        let mut row: Vec<Cell> = vec![
            (i + 1).into(),
            m.frequencies[i].into(),
            (m.frequencies[i] / p.omega_y).into(),
            m.couplings[i].into(),
            coupled(&m.couplings, i).into(),
            m.heating_rates[i].into(),
            m.bath_occupations[i].into(),
        ];
        row.extend(m.mode_matrix.column(i).iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    sink.table("modes", t)?;
    let pts = (0..m.len())
        .map(|i| ((i + 1) as f64, m.frequencies[i] / p.omega_y))
        .collect();
    sink.plot(
        "modes",
        Plot {
            title: "normal modes".into(),
            x_label: "mode".into(),
            y_label: "omega / omega_y".into(),
            series: vec![Series::markers("frequency", pts)],
            ..Plot::default()
        },
    )
}

pub fn steadystate(params: &SystemParams, args: &Solve, sink: &mut Sink) -> Result<()> {
    let (p, c) = solve(params, args, Seed::ZigzagUp)?;
    let m = linearized::normal_modes(&p, &c)?;
    let system = linearized::drift_matrix(&p, &c, &m);
    let result = steadystate::solve_covariance(&system)?;
    let rows = steadystate::mode_occupations(&result, &m);
    let mut t = Table::new([
        "mode",
        "omega_over_omega_y",
        "occupation",
        "bath_occupation",
        "coupled",
    ]);
    t.comments = summary(&p, &c);
    t.comments
        .push(format!("lyapunov_residual {:e}", result.lyapunov_residual));
    let zz = steadystate::zigzag_mode_index(&c, &m);
    t.comments.push(format!(
        "e_n_cavity_all_modes {:e}",
        steadystate::log_negativity(&result, Bipartition::CavityVsAllModes)?
    ));
    t.comments.push(format!(
        "e_n_cavity_mode_{} {:e}",
        zz + 1,
        steadystate::log_negativity(&result, Bipartition::CavityVsMode(zz))?
    ));
    for r in &rows {
        t.push(vec![
            r.mode.into(),
            (r.frequency / p.omega_y).into(),
            r.occupation.into(),
            r.bath_occupation.into(),
            r.coupled.into(),
        ]);
    }
    sink.table("occupations", t)?;
    let occ = rows.iter().map(|r| (r.mode as f64, r.occupation)).collect();
    let bath = rows
        .iter()
        .map(|r| (r.mode as f64, r.bath_occupation))
        .collect();
    sink.plot(
        "occupations",
        Plot {
            title: "mean occupation".into(),
            x_label: "mode".into(),
            y_label: "<b^dag b>".into(),
            log_y: true,
            series: vec![
                Series::markers("steady state", occ),
                Series::markers("bath", bath),
            ],
            ..Plot::default()
        },
    )
}

pub fn spectrum(
    params: &SystemParams,
    args: &Solve,
    points: usize,
    extent: f64,
    sink: &mut Sink,
) -> Result<()> {
    if points < 3 || !(extent > 0.0) {
        bail!("spectrum grid needs at least 3 points and a positive extent");
    }
    let (p, c) = solve(params, args, Seed::ZigzagUp)?;
    let m = linearized::normal_modes(&p, &c)?;
    let system = linearized::drift_matrix(&p, &c, &m);
    let w_max = m.frequencies.iter().copied().fold(0.0, f64::max);
    let grid = steadystate::symmetric_grid(extent * w_max, points);
    let closed = steadystate::spectrum_closed_form(&system.model, &grid);
    let modal = steadystate::spectrum_modal(&system, &grid)?;
    let wy = p.omega_y;
    let mut t = Table::new([
        "nu_over_omega_y",
        "s_times_omega_y",
        "s_modal_times_omega_y",
    ]);
    t.comments = summary(&p, &c);
    for i in 0..grid.len() {
        t.push(vec![
            (grid[i] / wy).into(),
            (closed.values[i] * wy).into(),
            (modal.values[i] * wy).into(),
        ]);
    }
    sink.table("spectrum", t)?;
    let peaks = steadystate::sideband_peaks(&closed, &m.frequencies, &m.couplings);
    let mut pt = Table::new([
        "nu_over_omega_y",
        "s_times_omega_y",
        "mode",
        "mode_omega_over_omega_y",
    ]);
    for pk in &peaks {
        pt.push(vec![
            (pk.nu / wy).into(),
            (pk.value * wy).into(),
            (pk.mode + 1).into(),
            (m.frequencies[pk.mode] / wy).into(),
        ]);
    }
    sink.table("peaks", pt)?;
    let pts = grid
        .iter()
        .zip(&closed.values)
        .map(|(n, s)| (n / wy, s * wy))
        .collect();
    sink.plot(
        "spectrum",
        Plot {
            title: "output spectrum".into(),
            x_label: "nu / omega_y".into(),
            y_label: "S omega_y".into(),
            log_y: true,
            series: vec![Series::line("S", pts)],
            ..Plot::default()
        },
    )
}

pub fn entangle(
    params: &SystemParams,
    grid: &PowerGrid,
    sink: &mut Sink,
    guides: Vec<f64>,
) -> Result<()> {
    let powers = grid_of(grid)?;
    let mut options = SweepOptions::for_params(params);
    options.entanglement = true;
    let table = sweep::sweep_power(params, &powers, &[Seed::ZigzagUp], &options)?;
    let k = params.wavenumber;
    let mut t = Table::new([
        "power_p0",
        "e_n_cavity_all_modes",
        "e_n_cavity_zigzag_mode",
        "zigzag_mode",
        "u0_over_linear_u0",
        "max_abs_kx",
    ]);
    t.comments.push("stable zigzag equilibria only".into());
    let mut all = Vec::new();
    let mut single = Vec::new();
    for pt in &table.points {
        let (Some(e), Some(c)) = (pt.entanglement, pt.configuration.as_ref()) else {
            continue;
        };
        let p = params.with_power(pt.power);
        t.push(vec![
            pt.power.into(),
            e.cavity_vs_all_modes.into(),
            e.cavity_vs_zigzag_mode.into(),
            (e.zigzag_mode + 1).into(),
            sweep::u0_ratio(&p, c)?.into(),
            (c.max_abs_x() * k).into(),
        ]);
        all.push((pt.power, e.cavity_vs_all_modes));
        single.push((pt.power, e.cavity_vs_zigzag_mode));
    }
    sink.table("entanglement", t)?;
    sink.plot(
        "entanglement",
        Plot {
            title: "logarithmic negativity".into(),
            x_label: "P / P0".into(),
            y_label: "E_N".into(),
            series: vec![
                Series::line("cavity vs all modes", all),
                Series::line("cavity vs zigzag mode", single),
            ],
            guides,
            ..Plot::default()
        },
    )
}
