//! Bundled assets: delay presets, the path-constraint file, and the
//! published 32-bit adder data. Setting `RTZSIM_DATA_DIR` makes every
//! loader read from that directory instead of the embedded copies.

use std::path::PathBuf;

use crate::cells::{calibrate_delays, parse_constraints, DelayModel};
use crate::error::{Error, Result};

pub const DATA_DIR_ENV: &str = "RTZSIM_DATA_DIR";

const EMBEDDED: &[(&str, &str)] = &[
    ("delays/published.cons", include_str!("../data/delays/published.cons")),
    ("delays/default.cfg", include_str!("../data/delays/default.cfg")),
    ("delays/seitz-slack.cfg", include_str!("../data/delays/seitz-slack.cfg")),
    ("delays/uniform.cfg", include_str!("../data/delays/uniform.cfg")),
    ("delays/adversarial.cfg", include_str!("../data/delays/adversarial.cfg")),
    ("table2.csv", include_str!("../data/table2.csv")),
    ("table4_published.csv", include_str!("../data/table4_published.csv")),
];

/// Names accepted by [`delay_preset`].
pub const DELAY_PRESETS: [&str; 4] = ["default", "seitz-slack", "uniform", "adversarial"];

fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from)
}

/// Contents of a bundled asset, honouring `RTZSIM_DATA_DIR`.
pub fn asset(rel: &str) -> Result<String> {
    if let Some(dir) = data_dir() {
        let path = dir.join(rel);
        return std::fs::read_to_string(&path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())));
    }
    EMBEDDED
        .iter()
        .find(|(name, _)| *name == rel)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| Error::Unknown {
            what: "asset",
            name: rel.to_string(),
        })
}

/// The calibrated library: the path statements solved on top of the
/// assumed values for unpinned kinds.
pub fn default_delays() -> Result<DelayModel> {
    calibrated("delays/default.cfg")
}

/// Calibrated library with AND3 + OR3 = 133 ps.
pub fn seitz_slack_delays() -> Result<DelayModel> {
    calibrated("delays/seitz-slack.cfg")
}

pub fn uniform_delays() -> Result<DelayModel> {
    DelayModel::parse_config(&asset("delays/uniform.cfg")?)
}

/// Default library with the carry-only cells slowed down.
pub fn adversarial_delays() -> Result<DelayModel> {
    DelayModel::parse_config(&asset("delays/adversarial.cfg")?)
}

fn calibrated(defaults: &str) -> Result<DelayModel> {
    let defaults = DelayModel::parse_config(&asset(defaults)?)?;
    let constraints = parse_constraints(&asset("delays/published.cons")?)?;
    calibrate_delays(&constraints, &defaults)
}

pub fn delay_preset(name: &str) -> Result<DelayModel> {
    match name {
        "default" => default_delays(),
        "seitz-slack" => seitz_slack_delays(),
        "uniform" => uniform_delays(),
        "adversarial" => adversarial_delays(),
        other => Err(Error::Unknown {
            what: "delay preset",
            name: other.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::GateKind::*;

    #[test]
    fn default_library_matches_path_statements() {
        let d = default_delays().unwrap();
        assert_eq!(d.get(Ao22), Some(72));
        assert_eq!(d.get(Ce2), Some(106));
        assert_eq!(d.get(Ao21), Some(25));
        assert_eq!(d.get(Or2), Some(22));
        assert_eq!(d.path_delay(&[Ao22, Ao22, Ce2]).unwrap(), 250);
        assert_eq!(d.path_delay(&[Ao22, Ao22, Ao22, Ce2]).unwrap(), 322);
        for kind in crate::netlist::GateKind::ALL {
            assert!(d.get(kind).is_some(), "{kind} missing");
        }
    }

    #[test]
    fn seitz_preset_pins_the_carry_sum() {
        let d = seitz_slack_delays().unwrap();
        assert_eq!(d.path_delay(&[And3, Or3]).unwrap(), 133);
        assert_eq!(d.get(Ao22), Some(72));
    }

    #[test]
    fn presets_are_complete() {
        for name in DELAY_PRESETS {
            let d = delay_preset(name).unwrap();
            assert_eq!(d.iter().count(), 10, "{name}");
        }
        assert!(delay_preset("nope").is_err());
    }
}
