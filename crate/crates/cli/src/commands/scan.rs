use bellbound::bounds::{cor1_bound, cor4_bound, s0_bound, st_bound};
use bellbound::model::{werner, FanoState, StrengthQuad};
use clap::ValueEnum;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{CliError, CliResult};
use crate::output::{csv_writer, num, opt_num, write_json};
use crate::{Format, IoArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// All four strengths equal to the swept value.
    StrengthSweep,
    /// Werner parameter `w` at fixed strengths.
    WernerSweep,
    /// Equal relative angles `θ = φ` at fixed strengths.
    AngleSweep,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::StrengthSweep => "strength",
            Family::WernerSweep => "w",
            Family::AngleSweep => "θ = φ",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub parameter: f64,
    pub unbiased: f64,
    /// Only for T-states.
    pub biased: Option<f64>,
    pub unbiased_violated: bool,
    pub biased_violated: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Crossing {
    pub bound: &'static str,
    pub parameter: f64,
}

/// Parses `START:END`.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected START:END, got `{s}`"))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| format!("`{x}` is not a number: {e}"))
    };
    Ok((parse(a)?, parse(b)?))
}

struct Sweep<'a> {
    unbiased: Box<dyn Fn(f64) -> CliResult<f64> + 'a>,
    biased: Option<Box<dyn Fn(f64) -> CliResult<f64> + 'a>>,
    domain: (f64, f64),
}

fn sweep<'a>(family: Family, state: &'a FanoState, strength: f64) -> CliResult<Sweep<'a>> {
    let tstate = state.is_t_state();
    Ok(match family {
        Family::StrengthSweep => Sweep {
            unbiased: Box::new(move |s| Ok(cor1_bound(state, s, s)?.value)),
            biased: tstate.then(|| -> Box<dyn Fn(f64) -> CliResult<f64>> {
                Box::new(move |s| Ok(cor4_bound(state, s, s)?.value))
            }),
            domain: (0.0, 1.0),
        },
        Family::WernerSweep => Sweep {
            unbiased: Box::new(move |w| Ok(cor1_bound(&werner(w)?, strength, strength)?.value)),
            biased: Some(Box::new(move |w| Ok(cor4_bound(&werner(w)?, strength, strength)?.value))),
            domain: (0.0, 1.0),
        },
        Family::AngleSweep => {
            let q = StrengthQuad::uniform(strength)?;
            Sweep {
                unbiased: Box::new(move |t| Ok(s0_bound(state, &q, t, t)?.value)),
                biased: tstate.then(|| -> Box<dyn Fn(f64) -> CliResult<f64>> {
                    Box::new(move |t| Ok(st_bound(state, &q, t, t)?.value))
                }),
                domain: (0.0, PI),
            }
        }
    })
}

/// Parameter where `f` crosses 2 between `lo` and `hi`.
fn locate(f: &dyn Fn(f64) -> CliResult<f64>, mut lo: f64, mut hi: f64) -> CliResult<f64> {
    let above_lo = f(lo)? > 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid)? > 2.0) == above_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
fn refine_max(f: &dyn Fn(f64) -> CliResult<f64>, mut lo: f64, mut hi: f64) -> CliResult<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        if hi - lo < 1e-12 {
            break;
        }
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(a)? < f(b)? {
            lo = a;
        } else {
            hi = b;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}

pub fn run(
    family: Family,
    range: (f64, f64),
    steps: usize,
    strength: f64,
    state: &FanoState,
    io: &IoArgs,
) -> CliResult<()> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(CliError::parse(format!("--strength {strength} outside [0, 1]")));
    }
    let sw = sweep(family, state, strength)?;
    let (start, end) = range;
    let (lo, hi) = sw.domain;
    if !(start.is_finite() && end.is_finite()) || start > end || start < lo || end > hi {
        return Err(CliError::parse(format!(
            "--range {start}:{end} must satisfy {lo} ≤ START ≤ END ≤ {hi}"
        )));
    }
    if steps < 2 && start != end {
        return Err(CliError::parse("--steps must be at least 2"));
    }
    let n = steps.max(1);
    let params: Vec<f64> = (0..n)
        .map(|i| if n == 1 { start } else { start + (end - start) * i as f64 / (n - 1) as f64 })
        .collect();
    let mut rows = Vec::with_capacity(n);
    for &p in &params {
        let unbiased = (sw.unbiased)(p)?;
        let biased = sw.biased.as_ref().map(|f| f(p)).transpose()?;
        rows.push(ScanRow {
            parameter: p,
            unbiased,
            biased,
            unbiased_violated: unbiased > 2.0,
            biased_violated: biased.map(|b| b > 2.0),
        });
    }
    let mut crossings = Vec::new();
    for w in rows.windows(2) {
        if w[0].unbiased_violated != w[1].unbiased_violated {
            crossings.push(Crossing {
                bound: "unbiased",
                parameter: locate(&sw.unbiased, w[0].parameter, w[1].parameter)?,
            });
        }
        if let (Some(f), Some(a), Some(b)) = (&sw.biased, w[0].biased_violated, w[1].biased_violated) {
            if a != b {
                crossings.push(Crossing {
                    bound: "biased",
                    parameter: locate(f, w[0].parameter, w[1].parameter)?,
                });
            }
        }
    }
    for c in &crossings {
        eprintln!("crossing: {} bound crosses 2 at {} = {:.9}", c.bound, family.name(), c.parameter);
    }
    if family == Family::AngleSweep {
        let best = (0..rows.len())
            .max_by(|&a, &b| rows[a].unbiased.total_cmp(&rows[b].unbiased))
            .expect("at least one row");
        let lo = rows[best.saturating_sub(1)].parameter;
        let hi = rows[(best + 1).min(rows.len() - 1)].parameter;
        let (arg, value) = refine_max(&sw.unbiased, lo, hi)?;
        eprintln!("maximum: unbiased bound {value:.9} at θ = φ = {arg:.9}");
    }
    match io.format_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv_writer(io.output.as_deref())?;
            w.write_record(["parameter", "unbiased", "biased", "unbiased_violated", "biased_violated"])?;
            for r in &rows {
                w.write_record([
                    num(r.parameter),
                    num(r.unbiased),
                    opt_num(r.biased),
                    r.unbiased_violated.to_string(),
                    r.biased_violated.map(|b| b.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Json => {
            #[derive(Serialize)]
            struct ScanOutput<'a> {
                family: Family,
                strength: f64,
                rows: &'a [ScanRow],
                crossings: &'a [Crossing],
            }
            write_json(
                &ScanOutput {
                    family,
                    strength,
                    rows: &rows,
                    crossings: &crossings,
                },
                io.output.as_deref(),
            )
        }
    }
}
