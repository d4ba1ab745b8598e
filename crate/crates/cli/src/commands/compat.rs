use bellbound::bounds::compat_report;
use bellbound::model::Observable;
use serde::Deserialize;

use crate::error::CliResult;
use crate::output::write_json;
use crate::scenario::read_json;
use crate::IoArgs;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatInput {
    pub x: Observable,
    pub xp: Observable,
}

pub fn run(input: &Path, io: &IoArgs) -> CliResult<()> {
    let pair: CompatInput = read_json(input)?;
    write_json(&compat_report(&pair.x, &pair.xp), io.output.as_deref())
}
