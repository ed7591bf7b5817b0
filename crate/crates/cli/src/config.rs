use std::fmt;
use std::str::FromStr;

use permwalk::dynamics::shared_support;
use permwalk::{Error, ModelSpec, OccupationState, SectorBasis, TimeGrid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which basis kets a walk reports.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Targets {
    #[default]
    All,
    /// Kets sharing at least `k - 1` sites with the start.
    SharedSupport,
    List(Vec<Vec<usize>>),
}

impl FromStr for Targets {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "all" => Ok(Targets::All),
            "shared-support" | "shared_support" => Ok(Targets::SharedSupport),
            list => list
                .split(',')
                .map(|label| parse_sites(label, '|'))
                .collect::<Result<Vec<_>, _>>()
                .map(Targets::List),
        }
    }
}

impl TryFrom<String> for Targets {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<Targets> for String {
    fn from(t: Targets) -> String {
        t.to_string()
    }
}

impl fmt::Display for Targets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Targets::All => f.write_str("all"),
            Targets::SharedSupport => f.write_str("shared-support"),
            Targets::List(list) => {
                let labels: Vec<String> = list
                    .iter()
                    .map(|sites| sites.iter().map(usize::to_string).collect::<Vec<_>>().join("|"))
                    .collect();
                f.write_str(&labels.join(","))
            }
        }
    }
}

impl Targets {
    /// Column indices into `basis`, in the requested order.
    pub fn resolve(&self, basis: &SectorBasis, initial: &OccupationState) -> Result<Vec<usize>, Error> {
        match self {
            Targets::All => Ok((0..basis.dim()).collect()),
            Targets::SharedSupport => Ok(shared_support(basis, initial)),
            Targets::List(list) => list
                .iter()
                .map(|sites| {
                    let state = OccupationState::from_sites(sites, basis.n_sites())?;
                    basis.rank(&state).ok_or_else(|| {
                        Error::InvalidArgument(format!("target {} is not in the {}-particle sector", state.label(), basis.n_particles()))
                    })
                })
                .collect(),
        }
    }
}

/// Sites given as `5,6` or `5|6`.
pub fn parse_sites(text: &str, sep: char) -> Result<Vec<usize>, Error> {
    let text = text.trim();
    if text.is_empty() || text == "vac" {
        return Ok(Vec::new());
    }
    text.split(sep)
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad site {s:?} in {text:?}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<std::path::PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Everything a walk needs, as read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub initial: Vec<usize>,
    #[serde(default)]
    pub grid: TimeGrid,
    #[serde(default = "default_output")]
    pub output: OutputSpec,
    #[serde(default)]
    pub targets: Targets,
}

fn default_output() -> OutputSpec {
    OutputSpec { path: None, format: Format::Csv }
}

impl RunConfig {
    /// The start ket; its size must match the sector and its sites be distinct and in range.
    pub fn initial_state(&self) -> Result<OccupationState, Error> {
        if self.initial.len() != self.model.k {
            return Err(Error::InvalidArgument(format!(
                "initial tuple has {} sites but the sector has k = {}",
                self.initial.len(),
                self.model.k
            )));
        }
        OccupationState::from_sites(&self.initial, self.model.n)
    }
}
