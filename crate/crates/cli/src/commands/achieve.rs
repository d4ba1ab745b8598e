use bellbound::bounds::{optimal_bound, CriterionId};
use bellbound::chsh::chsh_value;
use bellbound::construct::{
    achieving_directions, achieving_scenario_tstate, cor1_achieving, thm3_achieving, thm4_achieving,
    AchievingConfig, ATTAINMENT_FAILURE,
};
use bellbound::model::{FanoState, Observable, Scenario};

use crate::error::{CliError, CliResult, EXIT_CONSTRUCTION};
use crate::output::write_json;
use crate::scenario::{Angles, ConstructionInfo, ObservableSet, Resolved, ScenarioFile};
use crate::IoArgs;

pub const SUPPORTED: [CriterionId; 6] = [
    CriterionId::Thm1,
    CriterionId::Thm2,
    CriterionId::Cor1,
    CriterionId::Cor4,
    CriterionId::Thm3,
    CriterionId::Thm4,
];

fn angles_or_optimal(r: &Resolved, biased: bool) -> CliResult<(f64, f64)> {
    match r.angles {
        Some(a) => Ok(a),
        None => Ok(optimal_bound(&r.state, &r.strengths, biased)?
            .optimal_angles
            .expect("optimal bound reports angles")),
    }
}

fn flip(o: &Observable) -> CliResult<Observable> {
    Ok(o.with_direction(o.direction().map(|c| -c))?)
}

/// Equal strengths on side A: built for `S_Y ≥ S_Y′`, otherwise for the
/// relabelled pair with `x′ → −x′`, which leaves the canonical CHSH value of
/// unbiased observables unchanged.
fn thm3_side_a(state: &FanoState, s_a: f64, sy: f64, syp: f64) -> CliResult<AchievingConfig> {
    if sy >= syp {
        return Ok(thm3_achieving(state, s_a, sy, syp)?);
    }
    let mut cfg = thm3_achieving(state, s_a, syp, sy)?;
    let s = cfg.scenario.relabeled(false, true);
    cfg.scenario = Scenario::new(s.x, flip(&s.xp)?, s.y, s.yp);
    cfg.attained_chsh = chsh_value(&cfg.scenario, state);
    Ok(cfg)
}

fn construct(r: &Resolved, criterion: CriterionId) -> CliResult<AchievingConfig> {
    let (state, q) = (&r.state, &r.strengths);
    let per_side = || {
        if q.sx == q.sxp && q.sy == q.syp {
            Ok((q.sx, q.sy))
        } else {
            Err(CliError::parse(format!("{criterion} requires equal strengths within each side")))
        }
    };
    Ok(match criterion {
        CriterionId::Thm1 => {
            let (t, p) = angles_or_optimal(r, false)?;
            achieving_directions(state, q, t, p)?
        }
        CriterionId::Thm2 => {
            if !state.is_t_state() {
                return Err(CliError::parse("thm2 requires a T-state (vanishing Bloch vectors)"));
            }
            let (t, p) = angles_or_optimal(r, true)?;
            achieving_scenario_tstate(state, q, t, p, 1.0)?
        }
        CriterionId::Cor1 => {
            let (sa, sb) = per_side()?;
            cor1_achieving(state, sa, sb, false)?
        }
        CriterionId::Cor4 => {
            if !state.is_t_state() {
                return Err(CliError::parse("cor4 requires a T-state (vanishing Bloch vectors)"));
            }
            let (sa, sb) = per_side()?;
            cor1_achieving(state, sa, sb, true)?
        }
        CriterionId::Thm3 => {
            if q.sx == q.sxp {
                thm3_side_a(state, q.sx, q.sy, q.syp)?
            } else if q.sy == q.syp {
                let swapped = FanoState::new(state.b(), state.a(), state.t().transpose())?;
                let mut cfg = thm3_side_a(&swapped, q.sy, q.sx, q.sxp)?;
                let s = cfg.scenario;
                cfg.scenario = Scenario::new(s.y, s.yp, s.x, s.xp);
                cfg.attained_chsh = chsh_value(&cfg.scenario, state);
                cfg
            } else {
                return Err(CliError::parse("thm3 requires equal strengths on one side"));
            }
        }
        CriterionId::Thm4 => thm4_achieving(state, q, false)?,
        other => {
            let names: Vec<_> = SUPPORTED.iter().map(|c| c.as_str()).collect();
            return Err(CliError::parse(format!(
                "no construction for {other} (supported: {})",
                names.join(", ")
            )));
        }
    })
}

pub fn run(file: &ScenarioFile, r: &Resolved, criterion: CriterionId, io: &IoArgs) -> CliResult<()> {
    let cfg = construct(r, criterion)?;
    if (cfg.attained_chsh - cfg.target_bound).abs() > ATTAINMENT_FAILURE {
        return Err(CliError::new(
            EXIT_CONSTRUCTION,
            format!("construction attains {} instead of {}", cfg.attained_chsh, cfg.target_bound),
        ));
    }
    let s = cfg.scenario;
    let out = ScenarioFile {
        state: file.state.clone(),
        strengths: Some(s.strengths().as_array()),
        angles: Some(Angles {
            theta: s.theta(),
            phi: s.phi(),
        }),
        biases: Some(s.biases()),
        seed: file.seed,
        observables: Some(ObservableSet {
            x: s.x,
            xp: s.xp,
            y: s.y,
            yp: s.yp,
        }),
        construction: Some(ConstructionInfo {
            criterion: criterion.as_str().to_string(),
            recipe: serde_json::to_value(cfg.recipe_id)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            target_bound: cfg.target_bound,
            attained_chsh: cfg.attained_chsh,
        }),
    };
    write_json(&out, io.output.as_deref())
}
