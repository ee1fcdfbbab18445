//! Tunables shared by the subcommands. Values come from, in priority order:
//! command-line flags, the config file, built-in defaults. The config file
//! is a flat TOML table using the flag names with `_` for `-`.

use std::path::{Path, PathBuf};

use clap::Args;
use dowker_core::metrics::ImageConfig;
use dowker_nn::{ModelConfig, Pooling, TrainConfig};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const CONFIG_ENV: &str = "DOWKER_CONFIG";

fn parse_pooling(s: &str) -> std::result::Result<Pooling, String> {
    match s {
        "max" => Ok(Pooling::Max),
        "mean" => Ok(Pooling::Mean),
        _ => Err(format!("unknown pooling `{s}` (expected max or mean)")),
    }
}

macro_rules! settings {
    ($($(#[$doc:meta])* $field:ident : $ty:ty $(=> $parser:expr)?),* $(,)?) => {
        #[derive(Args, Clone, Debug, Default, Deserialize, PartialEq)]
        #[serde(deny_unknown_fields)]
        pub struct Settings {
            $(
                $(#[$doc])*
                #[arg(long, global = true $(, value_parser = $parser)?)]
                pub $field: Option<$ty>,
            )*
        }

        impl Settings {
            /// Fields set in `self` win over those in `fallback`.
            pub fn over(self, fallback: Settings) -> Settings {
                Settings { $($field: self.$field.or(fallback.$field),)* }
            }
        }
    };
}

settings! {
    /// Seed for generators, initialization, splits and shuffles [default: 0]
    seed: u64,
    /// Worker threads for per-graph batch work [default: available cores]
    workers: usize,
    /// Replacement for infinite deaths in metrics and training [default: 1.0]
    inf_cap: f64,
    /// Hidden width of the network [default: 32]
    hidden: usize,
    /// Message-passing layers [default: 3]
    layers: usize,
    /// Number of label classes [default: 2]
    classes: usize,
    /// Graph pooling before the label head: max or mean [default: max]
    pooling: Pooling => parse_pooling,
    /// Share source and sink branch weights [default: false]
    shared_branches: bool,
    /// Training epochs [default: 50]
    epochs: usize,
    /// Minibatch size [default: 8]
    batch_size: usize,
    /// Adam learning rate [default: 0.001]
    learning_rate: f64,
    /// Weight of the label loss [default: 1.0]
    lambda: f64,
    /// Share of samples used for training [default: 0.8]
    train_fraction: f64,
    /// Cross-validation folds [default: 5]
    folds: usize,
    /// Persistence image side length in pixels [default: 20]
    image_size: usize,
    /// Persistence image Gaussian width [default: 0.05]
    sigma: f64,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Merges flags over the config file named by `--config` or, failing
    /// that, by the `DOWKER_CONFIG` environment variable.
    pub fn resolve(flags: Settings, config: Option<&PathBuf>) -> Result<Settings> {
        let path = config.cloned().or_else(|| {
            std::env::var_os(CONFIG_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        });
        let s = match path {
            Some(p) => flags.over(Settings::from_file(&p)?),
            None => flags,
        };
        if s.workers == Some(0) {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        Ok(s)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn inf_cap(&self) -> f64 {
        self.inf_cap.unwrap_or(1.0)
    }

    pub fn folds(&self) -> usize {
        self.folds.unwrap_or(5)
    }

    pub fn model(&self) -> ModelConfig {
        let d = ModelConfig::default();
        ModelConfig {
            hidden: self.hidden.unwrap_or(d.hidden),
            layers: self.layers.unwrap_or(d.layers),
            classes: self.classes.unwrap_or(d.classes),
            shared_branches: self.shared_branches.unwrap_or(d.shared_branches),
            pooling: self.pooling.unwrap_or(d.pooling),
            seed: self.seed(),
        }
    }

    pub fn train(&self) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            lambda: self.lambda.unwrap_or(d.lambda),
            seed: self.seed(),
            inf_cap: self.inf_cap(),
            train_fraction: self.train_fraction.unwrap_or(d.train_fraction),
            ..d
        }
    }

    pub fn image(&self) -> ImageConfig {
        let d = ImageConfig::default();
        let side = self.image_size.unwrap_or(d.height);
        ImageConfig {
            height: side,
            width: side,
            sigma: self.sigma.unwrap_or(d.sigma),
            inf_cap: self.inf_cap(),
            ..d
        }
    }

    /// A thread pool of the configured size.
    pub fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            if n == 0 {
                return Err(CliError::Usage("--workers must be positive".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win() {
        let file: Settings = toml::from_str("seed = 4\nepochs = 9\npooling = \"mean\"").unwrap();
        let flags = Settings {
            seed: Some(7),
            ..Default::default()
        };
        let s = flags.over(file);
        assert_eq!(s.seed, Some(7));
        assert_eq!(s.epochs, Some(9));
        assert_eq!(s.model().pooling, Pooling::Mean);
        assert_eq!(s.train().batch_size, 8);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<Settings>("sed = 4").is_err());
    }
}
