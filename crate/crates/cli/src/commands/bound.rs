use bellbound::bounds::{
    cor1_bound, cor2_sufficient, cor4_bound, horodecki_report, optimal_bound, s0_bound, s0_tilde,
    sgen_bound, st_bound, st_tilde, thm3_bound, thm4_bound, BoundReport,
    CriterionId,
};
use bellbound::chsh::{chsh, ChshVariants};
use bellbound::construct::reference_frames;
use bellbound::model::Scenario;
use bellbound::oracle::{maximize_chsh, BiasMode, OptimizeSpec};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{csv_writer, num, opt_num, write_json};
use crate::scenario::Resolved;
use crate::{Format, IoArgs};

#[derive(Debug, Clone, Serialize)]
pub struct Inapplicable {
    pub criterion_id: CriterionId,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub biases: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundOutput {
    pub correlation_singular_values: [f64; 3],
    pub t_state: bool,
    pub strengths: [f64; 4],
    pub angles: Option<(f64, f64)>,
    pub criteria: Vec<BoundReport>,
    pub inapplicable: Vec<Inapplicable>,
    /// CHSH values of explicitly given observables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chsh: Option<ChshVariants>,
    pub oracle: Vec<OracleCheck>,
}

type Evaluation = Result<BoundReport, String>;

fn domain(e: bellbound::Error) -> String {
    match e {
        bellbound::Error::Domain(m) => m,
        other => other.to_string(),
    }
}

fn unbiased_only(r: &Resolved) -> Result<(), String> {
    if r.biased() {
        Err("nonzero biases given; the bound covers unbiased observables".into())
    } else {
        Ok(())
    }
}

fn t_state(r: &Resolved) -> Result<(), String> {
    if r.state.is_t_state() {
        Ok(())
    } else {
        Err("not a T-state".into())
    }
}

fn fixed_angles(r: &Resolved) -> Result<(f64, f64), String> {
    r.angles.ok_or_else(|| "requires fixed angles".to_string())
}

fn per_side(r: &Resolved) -> Result<(f64, f64), String> {
    let q = r.strengths;
    if q.sx == q.sxp && q.sy == q.syp {
        Ok((q.sx, q.sy))
    } else {
        Err("strengths differ within a side".into())
    }
}

/// Scenario for the general bound: the given observables, otherwise
/// reference directions at the given angles.
fn scenario_for(r: &Resolved) -> Result<Scenario, String> {
    if let Some(s) = r.scenario {
        return Ok(s);
    }
    let (t, p) = r
        .angles
        .ok_or_else(|| "requires fixed angles or explicit observables".to_string())?;
    let dirs = reference_frames(t, p).map_err(domain)?;
    Scenario::from_parts(&r.strengths, r.biases.unwrap_or([0.0; 4]), dirs).map_err(domain)
}

fn evaluate(id: CriterionId, r: &Resolved) -> Evaluation {
    let (state, q) = (&r.state, &r.strengths);
    match id {
        CriterionId::Horodecki => Ok(horodecki_report(state)),
        CriterionId::Thm1 => {
            unbiased_only(r)?;
            match r.angles {
                Some((t, p)) => s0_bound(state, q, t, p),
                None => optimal_bound(state, q, false),
            }
            .map_err(domain)
        }
        CriterionId::Thm2 => {
            t_state(r)?;
            match r.angles {
                Some((t, p)) => st_bound(state, q, t, p),
                None => optimal_bound(state, q, true),
            }
            .map_err(domain)
        }
        CriterionId::Cor1 => {
            unbiased_only(r)?;
            let (sa, sb) = per_side(r)?;
            cor1_bound(state, sa, sb).map_err(domain)
        }
        CriterionId::Cor2 => {
            unbiased_only(r)?;
            Ok(cor2_sufficient(state, q))
        }
        CriterionId::Cor3 => {
            unbiased_only(r)?;
            let (t, p) = fixed_angles(r)?;
            s0_tilde(state, q, t, p).map_err(domain)
        }
        CriterionId::Cor4 => {
            t_state(r)?;
            let (sa, sb) = per_side(r)?;
            cor4_bound(state, sa, sb).map_err(domain)
        }
        CriterionId::Cor6 => {
            t_state(r)?;
            let (t, p) = fixed_angles(r)?;
            st_tilde(state, q, t, p).map_err(domain)
        }
        CriterionId::Thm3 => {
            unbiased_only(r)?;
            if q.sx == q.sxp {
                thm3_bound(state, q.sx, q.sy.max(q.syp), q.sy.min(q.syp), false).map_err(domain)
            } else if q.sy == q.syp {
                // the bound depends on T only through its singular values
                let rep = thm3_bound(state, q.sy, q.sx.max(q.sxp), q.sx.min(q.sxp), false).map_err(domain)?;
                let (t, p) = rep.optimal_angles.expect("thm3 reports angles");
                Ok(rep.with_angles(p, t).with_note("roles of the two sides exchanged"))
            } else {
                Err("requires equal strengths on one side".into())
            }
        }
        CriterionId::Thm4 => {
            unbiased_only(r)?;
            thm4_bound(state, q, false).map_err(domain)
        }
        CriterionId::Sgen => sgen_bound(&scenario_for(r)?, state).map_err(domain),
    }
}

/// Oracle maximum for the same constraints: given angles and biases are
/// held fixed, free ones are optimized.
fn oracle_checks(r: &Resolved) -> CliResult<Vec<OracleCheck>> {
    let mut spec = OptimizeSpec::new(r.state, r.strengths).seed(r.seed);
    if let Some((t, p)) = r.angles {
        spec = spec.angles(t, p);
    }
    let modes: Vec<(&'static str, BiasMode)> = match r.biases {
        Some(b) => vec![("given", BiasMode::FixedValues(b))],
        None => vec![("zero", BiasMode::FixedZero), ("free", BiasMode::FreeExtremal)],
    };
    modes
        .into_iter()
        .map(|(label, mode)| {
            let res = maximize_chsh(&spec.clone().biases(mode))?;
            Ok(OracleCheck {
                biases: label,
                value: res.best_value,
            })
        })
        .collect()
}

pub fn evaluate_all(r: &Resolved, only: Option<CriterionId>) -> CliResult<BoundOutput> {
    let mut criteria = Vec::new();
    let mut inapplicable = Vec::new();
    for id in CriterionId::ALL {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        match evaluate(id, r) {
            Ok(rep) => criteria.push(rep),
            Err(reason) => inapplicable.push(Inapplicable { criterion_id: id, reason }),
        }
    }
    if let (Some(id), Some(miss)) = (only, inapplicable.first()) {
        return Err(CliError::parse(format!("{id} is not applicable: {}", miss.reason)));
    }
    let s = r.state.correlation_singular_values();
    Ok(BoundOutput {
        correlation_singular_values: s,
        t_state: r.state.is_t_state(),
        strengths: r.strengths.as_array(),
        angles: r.angles,
        criteria,
        inapplicable,
        chsh: r.scenario.map(|sc| chsh(&sc, &r.state)),
        oracle: oracle_checks(r)?,
    })
}

pub fn run(r: &Resolved, only: Option<CriterionId>, io: &IoArgs) -> CliResult<()> {
    let out = evaluate_all(r, only)?;
    match io.format_or(Format::Json) {
        Format::Json => write_json(&out, io.output.as_deref()),
        Format::Csv => {
            let mut w = csv_writer(io.output.as_deref())?;
            w.write_record(["criterion_id", "value", "violated", "theta", "phi", "notes"])?;
            for rep in &out.criteria {
                let (t, p) = rep.optimal_angles.unzip();
                w.write_record([
                    rep.criterion_id.as_str().to_string(),
                    num(rep.value),
                    rep.violated.to_string(),
                    opt_num(t),
                    opt_num(p),
                    rep.notes.clone(),
                ])?;
            }
            for miss in &out.inapplicable {
                w.write_record([miss.criterion_id.as_str(), "", "", "", "", &format!("not applicable: {}", miss.reason)])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}
