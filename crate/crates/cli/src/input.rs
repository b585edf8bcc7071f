//! Loading seeds, loops and points from files and flags.

use std::fs;
use std::path::Path;

use serde_json::Value;

use mutloop_core::io::{
    parse_one_based, parse_point as parse_point_json, parse_rational, Convention, LoopFile, SeedFile,
};
use mutloop_core::surfaces::builtin_mapping_class;
use mutloop_core::{ExchangeMatrix, MutationLoop, MutationPath, TropicalPoint};

use crate::Failure;

pub struct Inputs<'a> {
    pub seed: Option<&'a Path>,
    pub loop_file: Option<&'a Path>,
    pub surface: Option<&'a str>,
    pub path: Option<&'a str>,
    pub fz: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

impl Inputs<'_> {
    /// The seed in the working convention, with the convention it was given in.
    pub fn seed(&self) -> Result<(ExchangeMatrix, Convention), Failure> {
        let path = self.seed.ok_or_else(|| Failure::Input("--seed is required".into()))?;
        let mut file: SeedFile = read_json(path)?;
        if self.fz {
            file.convention = Convention::Fz;
        }
        Ok((file.to_matrix()?, file.convention))
    }

    /// The `--path` flag as 0-based steps.
    pub fn path(&self, rank: usize) -> Result<Option<MutationPath>, Failure> {
        let Some(s) = self.path else {
            return Ok(None);
        };
        let labels = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Failure::Input(format!("bad path label `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(MutationPath::new(parse_one_based(&labels, rank)?)))
    }

    pub fn mutation_loop(&self) -> Result<MutationLoop, Failure> {
        if let Some(name) = self.surface {
            if self.seed.is_some() || self.loop_file.is_some() || self.path.is_some() {
                return Err(Failure::Input(
                    "--surface cannot be combined with --seed, --loop or --path".into(),
                ));
            }
            let (t, spec) = builtin_mapping_class(name)?;
            return Ok(spec.to_loop(&t)?);
        }
        let (b, _) = self.seed()?;
        match (self.loop_file, self.path(b.rank())?) {
            (Some(_), Some(_)) => Err(Failure::Input("give either --loop or --path, not both".into())),
            (Some(f), None) => {
                let file: LoopFile = read_json(f)?;
                Ok(file.to_loop(&b)?)
            }
            (None, Some(path)) => Ok(MutationLoop::detect(b, path)?),
            (None, None) => Err(Failure::Input("a loop needs --loop, --path or --surface".into())),
        }
    }
}

/// A JSON array, or a comma list of integers and `p/q` rationals.
pub fn parse_point(s: &str) -> Result<TropicalPoint, Failure> {
    let s = s.trim();
    if s.starts_with('[') {
        let v: Value = serde_json::from_str(s).map_err(|e| Failure::Input(format!("bad point: {e}")))?;
        return Ok(parse_point_json(&v)?);
    }
    let coords = s.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?;
    Ok(TropicalPoint::new(coords))
}
