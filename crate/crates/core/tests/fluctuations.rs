use ioncavity::linalg::Complex64;
use ioncavity::linearized::{self, DriftSystem, FluctuationModel, ModeChannel};
use ioncavity::steadystate::{self, Bipartition};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn tmsv(r: f64) -> DMatrix<f64> {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    )
}

/// Local symplectic map: rotation then squeezing on each of two modes.
fn local(phi: [f64; 2], squeeze: [f64; 2]) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(4, 4);
    for k in 0..2 {
        let (c, sn) = (phi[k].cos(), phi[k].sin());
        let (a, b) = (squeeze[k].exp(), (-squeeze[k]).exp());
        let o = 2 * k;
        s[(o, o)] = a * c;
        s[(o, o + 1)] = a * sn;
        s[(o + 1, o)] = -b * sn;
        s[(o + 1, o + 1)] = b * c;
    }
    s
}

fn channel() -> impl Strategy<Value = ModeChannel> {
    (0.5..5.0f64, -0.2..0.2f64, 1e-4..0.05f64, 0.0..20.0f64).prop_map(|(w, c, g, n)| ModeChannel {
        frequency: w,
        coupling: c,
        heating_rate: g,
        bath_occupation: n,
    })
}

fn models() -> impl Strategy<Value = FluctuationModel> {
    (
        0.2..2.0f64,
        -3.0..3.0f64,
        0.0..3.0f64,
        prop::collection::vec(channel(), 1..6),
    )
        .prop_map(|(kappa, delta, a_bar, channels)| FluctuationModel {
            kappa,
            delta_eff: delta,
            a_bar,
            channels,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn two_mode_squeezed_vacuum(r in 0.0..2.0f64) {
        let e = steadystate::log_negativity_of(&tmsv(r), 1).unwrap();
        prop_assert!((e - 2.0 * r / std::f64::consts::LN_2).abs() < 1e-9 * (1.0 + r));
    }

    #[test]
    fn negativity_ignores_local_operations(
        r in 0.0..1.5f64,
        phi in prop::array::uniform2(-3.2..3.2f64),
        sq in prop::array::uniform2(-0.8..0.8f64),
    ) {
        let s = local(phi, sq);
        let cov = &s * tmsv(r) * s.transpose();
        let e = steadystate::log_negativity_of(&cov, 1).unwrap();
        prop_assert!((e - 2.0 * r / std::f64::consts::LN_2).abs() < 1e-8 * (1.0 + r));
    }

    #[test]
    fn trace_of_drift(model in models()) {
        let system = DriftSystem::from_model(model.clone());
        let sum: f64 = model.channels.iter().map(|c| c.heating_rate).sum();
        let expected = -2.0 * (model.kappa + sum);
        prop_assert!((system.drift.trace() - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn stationary_states_are_physical(model in models()) {
        let system = DriftSystem::from_model(model);
        let report = linearized::stability_report(&system).unwrap();
        if report.max_real < -1e-6 {
            let r = steadystate::solve_covariance(&system).unwrap();
            prop_assert!(r.lyapunov_residual < 1e-9);
            prop_assert!(r.min_symplectic_eigenvalue >= 1.0 - 1e-8);
            let c = &r.covariance;
            prop_assert!((c - c.transpose()).amax() <= 1e-12 * c.amax());
            prop_assert!(r.occupations.iter().all(|&n| n > -1e-9));
        } else {
            prop_assert!(steadystate::solve_covariance(&system).is_err());
        }
    }

    #[test]
    fn spectrum_forms_agree(model in models()) {
        prop_assume!(model.a_bar > 0.05);
        let system = DriftSystem::from_model(model.clone());
        let report = linearized::stability_report(&system).unwrap();
        prop_assume!(report.max_real < -1e-6);
        let grid = steadystate::symmetric_grid(6.0, 301);
        let closed = steadystate::spectrum_closed_form(&model, &grid);
        let modal = steadystate::spectrum_modal(&system, &grid).unwrap();
        for (a, b) in closed.values.iter().zip(&modal.values) {
            prop_assert!((a - b).abs() <= 1e-8 * a.abs());
        }
    }
}

#[test]
fn one_mode_eigenvalues_are_quartic_roots() {
    let (kappa, delta, omega, gamma) = (1.0, -0.7, 1.9, 0.03);
    let g = 0.25;
    let model = FluctuationModel {
        kappa,
        delta_eff: delta,
        a_bar: 1.0,
        channels: vec![ModeChannel {
            frequency: omega,
            coupling: g,
            heating_rate: gamma,
            bath_occupation: 1.0,
        }],
    };
    let report = linearized::stability_report(&DriftSystem::from_model(model)).unwrap();
    assert_eq!(report.eigenvalues.len(), 4);
    // (Delta^2 + (kappa + l)^2)((l + Gamma)^2 + omega^2) + 4 Delta g^2 omega
    for z in &report.eigenvalues {
        let l: Complex64 = (*z).into();
        let a = (l + kappa) * (l + kappa) + delta * delta;
        let b = (l + gamma) * (l + gamma) + omega * omega;
        let p = a * b + 4.0 * delta * g * g * omega;
        assert!(p.norm() < 1e-12, "{l} gives {p}");
    }
    let sum: f64 = report.eigenvalues.iter().map(|z| z.re).sum();
    assert!((sum + 2.0 * (kappa + gamma)).abs() < 1e-12);
}

#[test]
fn decoupled_state_is_vacuum_times_thermal() {
    let model = FluctuationModel {
        kappa: 1.0,
        delta_eff: -2.0,
        a_bar: 0.0,
        channels: vec![
            ModeChannel {
                frequency: 1.5,
                coupling: 0.3,
                heating_rate: 0.01,
                bath_occupation: 4.0,
            },
            ModeChannel {
                frequency: 2.5,
                coupling: 0.0,
                heating_rate: 0.02,
                bath_occupation: 0.5,
            },
        ],
    };
    let r = steadystate::solve_covariance(&DriftSystem::from_model(model)).unwrap();
    let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        1.0, 1.0, 9.0, 9.0, 2.0, 2.0,
    ]));
    assert!((&r.covariance - expected).amax() < 1e-12);
    assert!((r.occupations[0] - 4.0).abs() < 1e-12);
    for part in [Bipartition::CavityVsAllModes, Bipartition::CavityVsMode(1)] {
        assert!(steadystate::log_negativity(&r, part).unwrap() < 1e-12);
    }
}

#[test]
fn lossless_spectrum_is_symmetric() {
    let model = FluctuationModel {
        kappa: 1.0,
        delta_eff: -1.3,
        a_bar: 2.0,
        channels: [(1.1, 0.05), (1.7, -0.08), (2.6, 0.02)]
            .iter()
            .map(|&(w, c)| ModeChannel {
                frequency: w,
                coupling: c,
                heating_rate: 0.0,
                bath_occupation: 3.0,
            })
            .collect(),
    };
    let grid = steadystate::symmetric_grid(4.0, 2001);
    let s = steadystate::spectrum_closed_form(&model, &grid).values;
    let n = s.len();
    for i in 0..n {
        assert!((s[i] - s[n - 1 - i]).abs() <= 1e-10 * s[i].abs());
    }
}
