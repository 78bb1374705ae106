//! CSV, manifest and plot-script writers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, RateFitResult, ReplicationRow};

pub const CSV_HEADER: &str = "regime,n,replication,radius_direct,radius_inverse,sn_mass,implied_radius,seed";

/// 12 significant digits.
fn real(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn csv_string(rows: &[ReplicationRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.regime,
            r.n,
            r.replication,
            real(r.radius_direct),
            real(r.radius_inverse),
            real(r.sn_mass),
            real(r.implied_radius),
            r.seed
        );
    }
    s
}

pub fn emit_csv(rows: &[ReplicationRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Inverse of [`csv_string`].
pub fn parse_csv(text: &str) -> Result<Vec<ReplicationRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, key: "header".into(), reason: "unexpected CSV header".into() }),
    }
    lines
        .map(|(i, line)| {
            let bad = |key: &str| Error::Parse { line: i + 1, key: key.into(), reason: "malformed field".into() };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad("row"));
            }
            let num = |k: usize, name: &str| f[k].parse::<f64>().map_err(|_| bad(name));
            Ok(ReplicationRow {
                regime: f[0].parse().map_err(|_| bad("regime"))?,
                n: f[1].parse().map_err(|_| bad("n"))?,
                replication: f[2].parse().map_err(|_| bad("replication"))?,
                radius_direct: num(3, "radius_direct")?,
                radius_inverse: num(4, "radius_inverse")?,
                sn_mass: num(5, "sn_mass")?,
                implied_radius: num(6, "implied_radius")?,
                seed: f[7].parse().map_err(|_| bad("seed"))?,
            })
        })
        .collect()
}

pub fn manifest_string(cfg: &ExperimentConfig, subcommand: &str) -> String {
    format!(
        "version = {}\nsubcommand = {subcommand}\nmaster_seed = {}\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        cfg.echo()
    )
}

pub fn write_manifest(cfg: &ExperimentConfig, subcommand: &str, path: &Path) -> Result<()> {
    std::fs::write(path, manifest_string(cfg, subcommand)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Python/matplotlib script plotting mean radii against n on log-log axes
/// with the fitted and theoretical slopes. `csv_name` is resolved relative
/// to the script's own directory.
pub fn plot_script_string(fit: &RateFitResult, csv_name: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Log-log contraction radii for regime {regime}.
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt

CSV = Path(__file__).resolve().parent / "{csv_name}"
FITTED = {{"inverse": {fi}, "direct": {fd}}}
THEORY = {{"inverse": {ti}, "direct": {td}}}

acc = defaultdict(lambda: {{"inverse": [], "direct": []}})
with open(CSV, newline="") as fh:
    for row in csv.DictReader(fh):
        acc[int(row["n"])]["inverse"].append(float(row["radius_inverse"]))
        acc[int(row["n"])]["direct"].append(float(row["radius_direct"]))
ns = sorted(acc)

fig, ax = plt.subplots()
for kind, marker in (("inverse", "o"), ("direct", "s")):
    means = [sum(acc[n][kind]) / len(acc[n][kind]) for n in ns]
    ax.loglog(ns, means, marker, label=f"{{kind}} radius")
    for name, slope, style in (("fitted", FITTED[kind], "-"), ("theory", THEORY[kind], "--")):
        ax.loglog(ns, [means[0] * (n / ns[0]) ** slope for n in ns], style, label=f"{{kind}} {{name}} {{slope:.3f}}")
ax.set_xlabel("n")
ax.set_ylabel("credible radius")
ax.set_title("{regime}")
ax.legend()
fig.savefig(CSV.with_suffix(".png"), dpi=150)
"#,
        regime = fit.regime,
        fi = fit.inverse_slope,
        fd = fit.direct_slope,
        ti = fit.theory.inverse_slope(),
        td = fit.theory.direct_slope(),
    )
}

pub fn emit_plot_script(fit: &RateFitResult, csv_name: &str, path: &Path) -> Result<()> {
    std::fs::write(path, plot_script_string(fit, csv_name)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::fit_rates;
    use crate::rates_modulus::Regime;

    fn rows() -> Vec<ReplicationRow> {
        (0..4)
            .map(|i| ReplicationRow {
                regime: Regime::Volterra,
                n: 64 << i,
                replication: i,
                radius_direct: 1.0 / 3.0 / (i + 1) as f64,
                radius_inverse: std::f64::consts::PI * 1e-7,
                sn_mass: f64::NAN,
                implied_radius: 12345.678901234,
                seed: u64::MAX - i as u64,
            })
            .collect()
    }

    #[test]
    fn empty_result_is_header_only() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_round_trips_to_twelve_digits() {
        let r = rows();
        let text = csv_string(&r);
        assert!(text.ends_with('\n'));
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("Volterra,64,0,3.33333333333e-1,3.14159265359e-7,NaN,1.23456789012e4,"));
        let back = parse_csv(&text).unwrap();
        for (a, b) in r.iter().zip(&back) {
            assert_eq!((a.regime, a.n, a.replication, a.seed), (b.regime, b.n, b.replication, b.seed));
            assert!(((a.radius_direct - b.radius_direct) / a.radius_direct).abs() < 1e-11);
            assert!(b.sn_mass.is_nan());
        }
        // Re-emitting parsed rows reproduces the bytes.
        assert_eq!(csv_string(&back), text);
    }

    #[test]
    fn plot_script_is_relative_and_passes_slopes_through() {
        let cfg =
            ExperimentConfig { n_grid: vec![64, 128, 256, 512], ..ExperimentConfig::for_regime(Regime::Volterra) };
        let fit = fit_rates(&cfg, rows()).unwrap();
        let s = plot_script_string(&fit, "results.csv");
        assert!(s.contains(r#"parent / "results.csv""#));
        assert!(s.contains(&format!("\"inverse\": {}", fit.theory.inverse_slope())));
        assert!(!s.contains("/root"));
    }
}
