use ioncavity::constants::mhz;
use ioncavity::crystal::{self, Classification};
use ioncavity::linearized;
use ioncavity::params::{self, Position};
use ioncavity::SystemParams;
use proptest::prelude::*;

fn pumped(n: usize, power: f64, offset: f64) -> SystemParams {
    let mut p = SystemParams::calcium_example(n);
    p.g0 = mhz(9.4);
    p.mode_center_y = offset;
    p.with_power(power)
}

fn chain(n: usize) -> impl Strategy<Value = Vec<Position>> {
    prop::collection::vec((-1.5e-6..1.5e-6f64, -1.0e-6..1.0e-6f64), n).prop_map(move |d| {
        d.iter()
            .enumerate()
            .map(|(j, (dx, dy))| [*dx, (j as f64 - 0.5 * (n - 1) as f64) * 4e-6 + dy])
            .collect()
    })
}

fn configs() -> impl Strategy<Value = (SystemParams, Vec<Position>)> {
    (2usize..=6, 0.0..0.4f64, -2e-6..2e-6f64)
        .prop_flat_map(|(n, power, offset)| (Just(pumped(n, power, offset)), chain(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_central_differences((p, q) in configs()) {
        let g = crystal::grad_v_total(&p, &q).unwrap();
        let scale = g.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        let h = 1e-4 / p.wavenumber;
        for j in 0..q.len() {
            for c in 0..2 {
                let (mut a, mut b) = (q.clone(), q.clone());
                a[j][c] += h;
                b[j][c] -= h;
                let fd = (crystal::v_total(&p, &a).unwrap() - crystal::v_total(&p, &b).unwrap()) / (2.0 * h);
                prop_assert!((fd - g[j][c]).abs() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences((p, q) in configs()) {
        let h = crystal::hessian_full(&p, &q).unwrap();
        let scale = h.amax();
        let step = 1e-5 / p.wavenumber;
        for j in 0..q.len() {
            for c in 0..2 {
                let (mut a, mut b) = (q.clone(), q.clone());
                a[j][c] += step;
                b[j][c] -= step;
                let ga = crystal::grad_v_total(&p, &a).unwrap();
                let gb = crystal::grad_v_total(&p, &b).unwrap();
                for i in 0..q.len() {
                    for d in 0..2 {
                        let fd = (ga[i][d] - gb[i][d]) / (2.0 * step);
                        prop_assert!((fd - h[(2 * i + d, 2 * j + c)]).abs() < 1e-5 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn potential_is_even_in_x((p, q) in configs()) {
        let mirrored: Vec<Position> = q.iter().map(|r| [-r[0], r[1]]).collect();
        let a = crystal::v_total(&p, &q).unwrap();
        let b = crystal::v_total(&p, &mirrored).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs());
    }

    #[test]
    fn potential_is_even_in_y_about_a_centred_mode((p, q) in configs()) {
        let p = SystemParams { mode_center_y: 0.0, ..p };
        let flipped: Vec<Position> = q.iter().map(|r| [r[0], -r[1]]).collect();
        let a = crystal::v_total(&p, &q).unwrap();
        let b = crystal::v_total(&p, &flipped).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs());
    }

    #[test]
    fn ion_relabelling_leaves_energy_unchanged((p, q) in configs()) {
        let mut r = q.clone();
        r.reverse();
        let a = crystal::v_total(&p, &q).unwrap();
        prop_assert!((a - crystal::v_total(&p, &r).unwrap()).abs() <= 1e-13 * a.abs());
    }
}

#[test]
fn single_ion_modes_are_the_trap_frequencies() {
    let p = SystemParams::calcium_example(1);
    let c = crystal::find_equilibrium(&p, &[[0.0, 0.0]]).unwrap();
    let m = linearized::normal_modes(&p, &c).unwrap();
    assert!((m.frequencies[0] / p.omega_y - 1.0).abs() < 1e-12);
    assert!((m.frequencies[1] / p.omega_x - 1.0).abs() < 1e-12);
}

#[test]
fn two_ion_modes() {
    let p = SystemParams::calcium_example(2);
    let c = crystal::find_equilibrium(&p, &crystal::linear_chain_seed(&p)).unwrap();
    let m = linearized::normal_modes(&p, &c).unwrap();
    let (wx, wy) = (p.omega_x, p.omega_y);
    let mut expected = [wy, 3f64.sqrt() * wy, (wx * wx - wy * wy).sqrt(), wx];
    expected.sort_by(f64::total_cmp);
    for (got, want) in m.frequencies.iter().zip(expected) {
        assert!((got / want - 1.0).abs() < 1e-10, "{got} vs {want}");
    }
    assert!(m.orthogonality_residual() < 1e-12);
}

#[test]
fn axial_spacings() {
    let p = SystemParams::calcium_example(2);
    let l = 4.449_042_702_816_509_5e-6;
    assert!((p.length_scale() / l - 1.0).abs() < 1e-12);
    let y = crystal::linear_chain_seed(&p);
    assert!(((y[1][1] - y[0][1]) / (2f64.cbrt() * l) - 1.0).abs() < 1e-12);

    let p3 = SystemParams::calcium_example(3);
    let y = crystal::linear_chain_seed(&p3);
    assert!((y[2][1] / (1.25f64.cbrt() * l) - 1.0).abs() < 1e-12);
    assert_eq!(y[1][1], 0.0);
}

#[test]
fn three_ion_critical_frequency() {
    // Zigzag eigenvector (1, -2, 1) of the transverse Coulomb block.
    let p = SystemParams::calcium_example(3);
    let w = crystal::critical_frequency(&p).unwrap();
    assert!((w / (2.4f64.sqrt() * p.omega_y) - 1.0).abs() < 1e-9);
}

#[test]
fn two_ion_critical_frequency_agrees_with_a_scan() {
    let p = SystemParams::calcium_example(2);
    let w = crystal::critical_frequency(&p).unwrap();
    // First omega_x on a dense scan at which the linear pair is a minimum.
    let first_stable = (0..2000)
        .map(|i| p.omega_y * (0.5 + i as f64 * 5e-4))
        .find(|&wx| {
            let q = SystemParams {
                omega_x: wx,
                ..p.clone()
            };
            let h = crystal::hessian_fixed(&q, &crystal::linear_chain_seed(&q)).unwrap();
            nalgebra::SymmetricEigen::new(h).eigenvalues.min() > 0.0
        })
        .unwrap();
    // Bisection width plus the step of the scan.
    assert!(
        (first_stable - w).abs() <= 5.01e-4 * p.omega_y,
        "{first_stable} vs {w}"
    );
    assert!(first_stable >= w * (1.0 - 1e-9));
}

#[test]
fn sixty_ion_chain() {
    let mut p = SystemParams::calcium_example(60);
    p.omega_y = mhz(0.1);
    p.omega_x = mhz(2.26);
    p.waist = 14e-6;
    let y = crystal::linear_chain_seed(&p);
    // Central spacing and N_eff from an independent root solve of the axial chain.
    assert!(((y[30][1] - y[29][1]) / 4.203_249_539_850_53e-6 - 1.0).abs() < 1e-9);
    assert!((params::n_eff(&p, &y) / 5.890_289_869_727_701 - 1.0).abs() < 1e-9);
    let w = crystal::critical_frequency(&p).unwrap();
    assert!((w / mhz(2.216) - 1.0).abs() < 0.01);
}

#[test]
fn zigzag_beyond_threshold_is_mirror_pair() {
    let mut p = SystemParams::calcium_example(4);
    p.omega_x = mhz(1.8);
    let a = crystal::find_equilibrium(&p, &crystal::zigzag_seed(&p, 1e-6)).unwrap();
    let b = crystal::find_equilibrium(&p, &crystal::zigzag_seed(&p, -1e-6)).unwrap();
    assert_eq!(a.classification, Classification::Zigzag);
    assert!(!a.mirrored && b.mirrored);
    for (u, v) in a.positions.iter().zip(&b.positions) {
        assert!((u[0] - v[0]).abs() < 1e-15 && (u[1] - v[1]).abs() < 1e-15);
    }
}

#[test]
fn recoil_frequency_by_hand() {
    let p = SystemParams::calcium_example(4);
    assert!((p.recoil_frequency() / 41_828.027_379_482_96 - 1.0).abs() < 1e-12);
    let c = params::pump_conversions(&p.with_power(0.25));
    assert!((c.power - 0.25).abs() < 1e-14);
}

#[test]
fn effective_decay_for_the_sixty_ion_chain() {
    let mut p = SystemParams::calcium_example(60);
    p.omega_y = mhz(0.1);
    p.omega_x = mhz(2.26);
    p.waist = 14e-6;
    p.kappa = mhz(0.5);
    p.g0 = mhz(9.4);
    let d = params::effective_decay(&p, &crystal::linear_chain_seed(&p)).unwrap();
    assert!((d.kappa_eff / p.kappa / 1.020_818_640_515_565_5 - 1.0).abs() < 1e-9);
    assert!(d.dispersive_valid);
}
