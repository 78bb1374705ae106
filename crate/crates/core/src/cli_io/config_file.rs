//! Flat `key = value` configuration files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::rates_modulus::Regime;

/// One `key = value` assignment with its source line (0 for overrides).
#[derive(Debug, Clone, PartialEq)]
struct Assignment {
    line: usize,
    key: String,
    value: String,
}

fn parse_lines(text: &str) -> Result<Vec<Assignment>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        // Section headers only group keys visually.
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            key: line.to_string(),
            reason: "expected `key = value`".into(),
        })?;
        out.push(Assignment { line: i + 1, key: k.trim().to_string(), value: v.trim().to_string() });
    }
    Ok(out)
}

fn parse_overrides(overrides: &[String]) -> Result<Vec<Assignment>> {
    overrides
        .iter()
        .map(|o| {
            let (k, v) = o.split_once('=').ok_or_else(|| Error::Parse {
                line: 0,
                key: o.clone(),
                reason: "override must be `key=value`".into(),
            })?;
            Ok(Assignment { line: 0, key: k.trim().to_string(), value: v.trim().to_string() })
        })
        .collect()
}

/// Parses config text plus overrides. The regime is resolved first (last
/// assignment wins, else `default_regime`) so unset keys take that regime's
/// defaults; then file lines and overrides are applied in order.
pub fn parse_config_str(text: &str, overrides: &[String], default_regime: Regime) -> Result<ExperimentConfig> {
    let all: Vec<Assignment> = parse_lines(text)?.into_iter().chain(parse_overrides(overrides)?).collect();
    let mut regime = default_regime;
    for a in all.iter().filter(|a| a.key == "regime") {
        regime = a.value.parse().map_err(|e: Error| Error::Parse {
            line: a.line,
            key: a.key.clone(),
            reason: e.to_string(),
        })?;
    }
    let mut cfg = ExperimentConfig::for_regime(regime);
    for a in &all {
        cfg.set(&a.key, &a.value).map_err(|reason| Error::Parse { line: a.line, key: a.key.clone(), reason })?;
    }
    cfg.validate_with(1)?;
    Ok(cfg)
}

pub fn parse_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    parse_config_with(path, overrides, Regime::MildSeq)
}

pub fn parse_config_with(path: &Path, overrides: &[String], default_regime: Regime) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text, overrides, default_regime)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config_str("", &[], Regime::MildSeq).unwrap(), ExperimentConfig::default());
        assert_eq!(parse_config_str("# nothing\n\n", &[], Regime::MildSeq).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn overrides_win_over_file() {
        let cfg = parse_config_str("beta = 3\nalpha=2 # inline\n", &ov(&["beta=2"]), Regime::MildSeq).unwrap();
        assert_eq!((cfg.alpha, cfg.beta), (2.0, 2.0));
    }

    #[test]
    fn regime_selects_defaults_wherever_it_appears() {
        let cfg = parse_config_str("[model]\nreplications = 30\nregime = Deconv\n", &[], Regime::MildSeq).unwrap();
        assert_eq!(cfg.regime, Regime::Deconv);
        assert_eq!(cfg.p, 2.0);
        assert_eq!(cfg.replications, 30);
    }

    #[test]
    fn errors_name_line_and_key() {
        match parse_config_str("alpha = 1\nbogus_key = 4\n", &[], Regime::MildSeq) {
            Err(Error::Parse { line: 2, key, .. }) => assert_eq!(key, "bogus_key"),
            other => panic!("{other:?}"),
        }
        match parse_config_str("", &ov(&["typo_key=1"]), Regime::MildSeq) {
            Err(e @ Error::Parse { line: 0, .. }) => assert!(e.to_string().contains("typo_key")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config_str("alpha = x\n", &[], Regime::MildSeq), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_config_str("no equals sign\n", &[], Regime::MildSeq),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn non_increasing_grid_is_a_validation_error() {
        match parse_config_str("n_grid = 64, 32, 128\n", &[], Regime::MildSeq) {
            Err(Error::Validation { key, constraint }) => {
                assert_eq!(key, "n_grid");
                assert_eq!(constraint, "strictly increasing");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn echo_parses_back() {
        let cfg =
            parse_config_str("", &ov(&["regime=Volterra", "sigma=0.37", "n_grid=2^5..9"]), Regime::MildSeq).unwrap();
        assert_eq!(parse_config_str(&cfg.echo(), &[], Regime::MildSeq).unwrap(), cfg);
    }
}
