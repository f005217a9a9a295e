//! Flat `key = value` config files for training, and the grid file variant
//! where values may be comma-separated lists. Unknown keys are errors.

use std::collections::BTreeMap;
use std::path::Path;

use causallp_core::embed::WeightMode;
use causallp_core::{ModelKind, TrainConfig64};

use crate::errors::CliError;

pub fn parse_key_value_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let content = std::fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Input(format!("{}:{}: expected `key = value`", path.display(), i + 1))
        })?;
        pairs.push((key.trim().to_owned(), value.trim().to_owned()));
    }
    Ok(pairs)
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Input(format!("bad value {value:?} for config key {key:?}")))
}

/// Applies one config entry to a training configuration.
pub fn apply_train_key(config: &mut TrainConfig64, key: &str, value: &str) -> Result<(), CliError> {
    match key {
        "dim" => config.dim = parse_as(key, value)?,
        "learning_rate" | "lr" => config.learning_rate = parse_as(key, value)?,
        "epochs" => config.epochs = parse_as(key, value)?,
        "batch_size" => config.batch_size = parse_as(key, value)?,
        "eta" | "negatives_per_positive" => {
            config.negatives_per_positive = parse_as(key, value)?
        }
        "weight_mode" => {
            config.weight_mode = WeightMode::parse(value)
                .ok_or_else(|| CliError::Input(format!("bad weight_mode {value:?}")))?
        }
        "beta_decay_epochs" | "structural_influence_decay_epochs" => {
            config.structural_influence_decay_epochs = parse_as(key, value)?
        }
        "beta_frozen" => config.beta_frozen = Some(parse_as(key, value)?),
        "l2" | "l2_coefficient" => config.l2_coefficient = parse_as(key, value)?,
        "seed" => config.seed = parse_as(key, value)?,
        "patience" | "early_stop_patience" => config.early_stop_patience = parse_as(key, value)?,
        other => return Err(CliError::Input(format!("unknown config key {other:?}"))),
    }
    Ok(())
}

/// True for the keys that pin the beta decay horizon explicitly.
pub fn is_decay_key(key: &str) -> bool {
    matches!(key, "beta_decay_epochs" | "structural_influence_decay_epochs")
}

/// Loads a config file; the flag reports whether it set the decay horizon.
pub fn load_train_config(path: Option<&Path>) -> Result<(TrainConfig64, bool), CliError> {
    let mut config = TrainConfig64::default();
    let mut decay_explicit = false;
    if let Some(path) = path {
        for (key, value) in parse_key_value_file(path)? {
            decay_explicit |= is_decay_key(&key);
            apply_train_key(&mut config, &key, &value)?;
        }
    }
    Ok((config, decay_explicit))
}

/// One grid cell: a model, a weight mode, and training-config overrides.
#[derive(Debug, Clone)]
pub struct GridCell {
    pub model: ModelKind,
    pub weight_mode: WeightMode,
    pub overrides: Vec<(String, String)>,
}

/// Expands a grid file into the cartesian product of its axes. Keys are the
/// training-config keys plus `model`; every value may be a comma list.
pub fn parse_grid(path: &Path) -> Result<Vec<GridCell>, CliError> {
    let mut axes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (key, value) in parse_key_value_file(path)? {
        let values: Vec<String> = value
            .split(',')
            .map(|v| v.trim().to_owned())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(CliError::Input(format!("grid key {key:?} has no values")));
        }
        if axes.insert(key.clone(), values).is_some() {
            return Err(CliError::Input(format!("grid key {key:?} repeated")));
        }
    }
    if axes.is_empty() {
        return Err(CliError::Input("empty grid file".into()));
    }

    // validate keys up front: every non-model key must be a train-config key
    for (key, values) in &axes {
        if key == "model" {
            for v in values {
                ModelKind::parse(v)
                    .ok_or_else(|| CliError::Input(format!("bad model {v:?} in grid")))?;
            }
        } else {
            let mut probe = TrainConfig64::default();
            for v in values {
                apply_train_key(&mut probe, key, v)?;
            }
        }
    }

    let keys: Vec<&String> = axes.keys().collect();
    let mut cells = vec![Vec::<(String, String)>::new()];
    for key in &keys {
        let mut next = Vec::new();
        for cell in &cells {
            for value in &axes[*key] {
                let mut grown = cell.clone();
                grown.push(((*key).clone(), value.clone()));
                next.push(grown);
            }
        }
        cells = next;
    }

    let mut out = Vec::with_capacity(cells.len());
    for assignments in cells {
        let mut model = ModelKind::DistMult;
        let mut weight_mode = WeightMode::Base;
        let mut overrides = Vec::new();
        for (key, value) in assignments {
            match key.as_str() {
                "model" => model = ModelKind::parse(&value).expect("validated above"),
                "weight_mode" => {
                    weight_mode = WeightMode::parse(&value)
                        .ok_or_else(|| CliError::Input(format!("bad weight_mode {value:?}")))?;
                    overrides.push((key, value));
                }
                _ => overrides.push((key, value)),
            }
        }
        out.push(GridCell {
            model,
            weight_mode,
            overrides,
        });
    }
    Ok(out)
}
