mod bench;
mod gen;
mod graph;
mod learn;
mod metrics;

use rayon::prelude::*;
use serde::Serialize;

pub use bench::{bench, BenchArgs, BenchReport};
pub use gen::{gen, parse_range, GenArgs};
pub use metrics::ImageFormat;

use crate::error::Result;
use crate::settings::Settings;
use crate::Command;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Single records are emitted bare, several as an array.
fn records<T: Serialize>(mut items: Vec<T>) -> Result<String> {
    if items.len() == 1 {
        to_json(&items.pop().unwrap())
    } else {
        to_json(&items)
    }
}

/// Maps `f` over `items` on the configured pool; results keep input order.
fn par_map<T: Sync, R: Send>(
    settings: &Settings,
    items: &[T],
    f: impl Fn(&T) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    settings
        .pool()?
        .install(|| items.par_iter().map(f).collect())
}

pub fn dispatch(cmd: Command, s: &Settings) -> Result<String> {
    match cmd {
        Command::Linegraph { inputs, weights } => graph::linegraph(&inputs, weights, s),
        Command::Pd {
            inputs,
            kind,
            weights,
        } => graph::pd(&inputs, kind, weights, s),
        Command::Duality { inputs, weights } => graph::duality(&inputs, weights, s),
        Command::Wdist {
            a,
            b,
            dim,
            kind,
            keep_diagonal,
            weights,
        } => metrics::wdist(&a, &b, dim, kind, keep_diagonal, weights, s),
        Command::Pimage {
            input,
            dim,
            kind,
            format,
            weights,
        } => metrics::pimage(&input, dim, kind, format, weights, s),
        Command::Gen(args) => gen(&args, s),
        Command::Train {
            data,
            model_out,
            history,
            init,
        } => learn::train(&data, &model_out, history.as_deref(), init.as_deref(), s),
        Command::Predict { model, inputs } => learn::predict(&model, &inputs, s),
        Command::Eval { model, inputs } => learn::eval(&model, &inputs, s),
        Command::Classify { data } => learn::classify(&data, s),
        Command::Bench(args) => to_json(&bench(&args, s)?),
    }
}
