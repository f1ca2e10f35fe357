use ioncavity::config::SystemConfig;
use ioncavity::crystal::{self, Classification};
use ioncavity::linearized::{self, coupled};
use ioncavity::params;
use ioncavity::sweep::{self, Seed, SweepOptions};
use ioncavity::SystemParams;

fn four_ions(coop: f64, offset_um: f64) -> SystemParams {
    let text = format!(
        "n_ions = 4\nomega_x_mhz = 2.12\nomega_y_mhz = 1.0\nwaist_um = 4.1\n\
         mode_center_y_um = {offset_um}\nkappa_mhz = 1.0\ndelta_0_mhz = 500.0\n\
         gamma_mhz = 10.0\ncooperativity = {coop}\n"
    );
    SystemConfig::from_toml_str(&text)
        .unwrap()
        .resolve()
        .unwrap()
}

#[test]
fn repeated_sweeps_are_bit_identical() {
    let p = four_ions(3.0, 0.0);
    let grid = sweep::linear_grid(0.02, 0.2, 19);
    let opts = SweepOptions::for_params(&p);
    let a = sweep::sweep_power(&p, &grid, &Seed::ALL, &opts).unwrap();
    let b = sweep::sweep_power(&p, &grid, &Seed::ALL, &opts).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn zigzag_branch_is_brighter() {
    let p = four_ions(3.0, 0.0);
    let grid = sweep::linear_grid(0.08, 0.14, 7);
    let t = sweep::sweep_power(&p, &grid, &Seed::ALL, &SweepOptions::for_params(&p)).unwrap();
    for i in 0..grid.len() {
        let pts = t.points_at(i);
        let linear = pts
            .iter()
            .find(|q| q.classification() == Some(Classification::Linear));
        let zigzag = pts
            .iter()
            .find(|q| q.classification() == Some(Classification::Zigzag));
        if let (Some(l), Some(z)) = (linear, zigzag) {
            assert!(z.output_intensity.unwrap() >= l.output_intensity.unwrap());
        }
    }
}

#[test]
fn weak_coupling_has_no_bistability() {
    let p = four_ions(0.3, 0.0);
    let grid = sweep::log_grid(0.01, 0.5, 40);
    let t = sweep::sweep_power(&p, &grid, &Seed::ALL, &SweepOptions::for_params(&p)).unwrap();
    assert!(t.bistable_interval.is_none());
    let h = sweep::hysteresis(&p, &grid, &SweepOptions::for_params(&p)).unwrap();
    assert!(h.loop_area.abs() <= 1e-6 * t.reference_intensity);
}

#[test]
fn single_point_loop_is_degenerate() {
    let p = four_ions(3.0, 0.0);
    let h = sweep::hysteresis(&p, &[0.1], &SweepOptions::for_params(&p)).unwrap();
    assert_eq!(h.up, h.down);
    assert_eq!(h.loop_area, 0.0);
}

#[test]
fn dark_cavity_keeps_the_linear_chain() {
    let p = four_ions(3.0, 0.0);
    let t = sweep::sweep_power(&p, &[0.0], &[Seed::Linear], &SweepOptions::for_params(&p)).unwrap();
    let pt = &t.points[0];
    assert_eq!(pt.classification(), Some(Classification::Linear));
    assert_eq!(pt.output_intensity, Some(0.0));
    assert!(t.bistable_interval.is_none());
}

#[test]
fn centred_zigzag_decouples_odd_modes() {
    let p = four_ions(3.0, 0.0).with_power(0.074);
    let amp = SweepOptions::for_params(&p).zigzag_amplitude;
    let c = crystal::find_equilibrium(&p, &crystal::zigzag_seed(&p, amp)).unwrap();
    assert!(c.is_minimum(&p));
    let modes = linearized::normal_modes(&p, &c).unwrap();
    let flags: Vec<bool> = (0..8).map(|n| coupled(&modes.couplings, n)).collect();
    assert_eq!(flags, [false, true, false, true, true, false, false, true]);
    // U0 drops to about a fifth of its linear-chain value.
    let r = sweep::u0_ratio(&p, &c).unwrap();
    assert!((0.15..0.25).contains(&r), "{r}");
}

#[test]
fn displaced_chain_couples_every_mode() {
    let p = four_ions(3.0, 1.1).with_power(0.084);
    let amp = SweepOptions::for_params(&p).zigzag_amplitude;
    let c = crystal::find_equilibrium(&p, &crystal::zigzag_seed(&p, amp)).unwrap();
    let modes = linearized::normal_modes(&p, &c).unwrap();
    assert!((0..8).all(|n| coupled(&modes.couplings, n)));
}

#[test]
fn linear_chain_barely_couples() {
    // At the antinode the couplings of the linear chain come only from the
    // axial gradient of the Gaussian envelope.
    let p = four_ions(3.0, 0.0).with_power(0.05);
    let c = crystal::find_equilibrium(&p, &crystal::linear_chain_seed(&p)).unwrap();
    let modes = linearized::normal_modes(&p, &c).unwrap();
    let zz = four_ions(3.0, 0.0).with_power(0.074);
    let amp = SweepOptions::for_params(&zz).zigzag_amplitude;
    let z = crystal::find_equilibrium(&zz, &crystal::zigzag_seed(&zz, amp)).unwrap();
    let zmodes = linearized::normal_modes(&zz, &z).unwrap();
    let max = |v: &[f64]| v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    // Transverse modes carry no coupling at all on the axis.
    for n in 0..8 {
        let transverse: f64 = (0..4).map(|j| modes.mode_matrix[(2 * j, n)].powi(2)).sum();
        if transverse > 0.99 {
            assert!(modes.couplings[n].abs() < 1e-12 * max(&zmodes.couplings));
        }
    }
    assert!(max(&modes.couplings) < 0.1 * max(&zmodes.couplings));
}

#[test]
fn reference_intensity_uses_the_linear_chain() {
    let p = four_ions(3.0, 0.0);
    let seed = crystal::linear_chain_seed(&p);
    let pumped = p.with_power(1.0);
    let mf = params::mean_field(&pumped, &seed).unwrap();
    let expected = 2.0 * p.kappa * pumped.eta.powi(2) / (p.kappa.powi(2) + mf.delta_eff.powi(2));
    let got = sweep::reference_intensity(&p).unwrap();
    assert!((got / expected - 1.0).abs() < 1e-12);
}
