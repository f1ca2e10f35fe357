//! Bundled parameter files and the recipe run for each figure.

use anyhow::{Context, Result};
use ioncavity::config::SystemConfig;
use ioncavity::SystemParams;
use serde_json::json;

use crate::cli::{Figure, PowerGrid, Solve};
use crate::commands;
use crate::output::Sink;

pub const BUNDLED: [(&str, &str); 17] = [
    ("fig2a", include_str!("../configs/fig2a.toml")),
    ("fig2b", include_str!("../configs/fig2b.toml")),
    ("fig3", include_str!("../configs/fig3.toml")),
    ("fig4a", include_str!("../configs/fig4a.toml")),
    ("fig4b", include_str!("../configs/fig4b.toml")),
    ("fig4c", include_str!("../configs/fig4c.toml")),
    ("fig4d", include_str!("../configs/fig4d.toml")),
    ("fig5", include_str!("../configs/fig5.toml")),
    ("fig6", include_str!("../configs/fig6.toml")),
    ("fig7a", include_str!("../configs/fig7a.toml")),
    ("fig7b", include_str!("../configs/fig7b.toml")),
    ("fig7c", include_str!("../configs/fig7c.toml")),
    ("fig7d", include_str!("../configs/fig7d.toml")),
    ("fig8a", include_str!("../configs/fig8a.toml")),
    ("fig8b", include_str!("../configs/fig8b.toml")),
    ("fig8c", include_str!("../configs/fig8c.toml")),
    ("fig8d", include_str!("../configs/fig8d.toml")),
];

pub fn bundled(name: &str) -> Result<SystemParams> {
    let text = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .with_context(|| format!("no bundled config {name}"))?;
    Ok(SystemConfig::from_toml_str(text)?.resolve()?)
}

fn log_grid(p_min: f64, p_max: f64, points: usize) -> PowerGrid {
    PowerGrid {
        p_min,
        p_max,
        points,
        linear: false,
    }
}

const AS_CONFIGURED: Solve = Solve {
    seed: None,
    power: None,
};

/// Runs `body` for each panel with its own output directory and manifest.
fn panels(
    sink: &Sink,
    figure: Figure,
    names: &[&str],
    mut body: impl FnMut(&str, &SystemParams, &mut Sink) -> Result<()>,
) -> Result<()> {
    for name in names {
        let params = bundled(name)?;
        let command = json!({ "reproduce": figure, "config": name });
        let mut child = sink.child(name, command, &params)?;
        eprintln!("{name}: manifest {}", child.hash());
        body(name, &params, &mut child)?;
        child.finish()?;
    }
    Ok(())
}

pub fn reproduce(figure: Figure, sink: &Sink) -> Result<()> {
    match figure {
        Figure::Fig2 => panels(sink, figure, &["fig2a", "fig2b"], |_, p, s| {
            let powers = [0.0, 0.05, 0.1, 0.15, 0.2];
            commands::landau(p, 0.22, None, &powers, false, s)
        }),
        Figure::Fig3 => panels(sink, figure, &["fig3"], |_, p, s| {
            let w = commands::critical(p, s)?;
            eprintln!(
                "omega_crit/2pi = {:.4} MHz",
                w / ioncavity::constants::mhz(1.0)
            );
            commands::landau(p, 0.0, None, &[0.0, 0.2, 0.4, 0.6, 0.8], true, s)?;
            commands::sweep(p, &log_grid(0.05, 2.0, 60), false, s)
        }),
        Figure::Fig4 => panels(
            sink,
            figure,
            &["fig4a", "fig4b", "fig4c", "fig4d"],
            |_, p, s| commands::sweep(p, &log_grid(0.005, 0.5, 200), false, s),
        ),
        Figure::Fig5 => panels(sink, figure, &["fig5"], |_, p, s| {
            commands::modes(p, &AS_CONFIGURED, s)
        }),
        Figure::Fig6 => panels(sink, figure, &["fig6"], |_, p, s| {
            commands::steadystate(p, &AS_CONFIGURED, s)
        }),
        Figure::Fig7 => panels(
            sink,
            figure,
            &["fig7a", "fig7b", "fig7c", "fig7d"],
            |_, p, s| commands::spectrum(p, &AS_CONFIGURED, 20001, 1.5, s),
        ),
        Figure::Fig8 => {
            let marks = [
                ("fig8a", 0.54),
                ("fig8b", 0.074),
                ("fig8c", 0.62),
                ("fig8d", 0.084),
            ];
            panels(
                sink,
                figure,
                &["fig8a", "fig8b", "fig8c", "fig8d"],
                |name, p, s| {
                    let mark = marks.iter().find(|m| m.0 == name).map(|m| m.1);
                    commands::entangle(p, &log_grid(0.02, 1.0, 100), s, mark.into_iter().collect())
                },
            )
        }
    }
}
