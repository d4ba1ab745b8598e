use bellbound::oracle::{audit_bound, AuditCriterion};

use crate::error::{CliError, CliResult, EXIT_AUDIT};
use crate::output::{csv_writer, num, write_json};
use crate::{Format, IoArgs};

pub fn run(criterion: AuditCriterion, trials: usize, seed: u64, tolerance: f64, io: &IoArgs) -> CliResult<()> {
    if trials == 0 {
        return Err(CliError::parse("--trials must be positive"));
    }
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(CliError::parse(format!("--tolerance must be positive, got {tolerance}")));
    }
    let report = audit_bound(criterion, trials, seed, tolerance)?;
    match io.format_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv_writer(io.output.as_deref())?;
            w.write_record(["trial", "bound", "oracle", "gap"])?;
            for row in &report.rows {
                w.write_record([row.trial.to_string(), num(row.bound), num(row.oracle), num(row.gap)])?;
            }
            w.flush()?;
        }
        Format::Json => write_json(&report, io.output.as_deref())?,
    }
    eprintln!(
        "{criterion}: {trials} trials, seed {seed}, max overshoot {:.3e}, max undershoot {:.3e}{}",
        report.max_overshoot,
        report.max_undershoot,
        if report.tight { "" } else { " (soundness only)" }
    );
    if report.passed {
        return Ok(());
    }
    let failing: Vec<usize> = if report.overshoot_trials.is_empty() {
        report.undershoot_trials.clone()
    } else {
        report.overshoot_trials.clone()
    };
    for &t in &failing {
        let row = &report.rows[t];
        eprintln!(
            "  trial {t}: seed {} bound {} oracle {} gap {}",
            row.seed, row.bound, row.oracle, row.gap
        );
    }
    Err(CliError::new(
        EXIT_AUDIT,
        format!(
            "audit failed: {} overshooting and {} undershooting trials",
            report.overshoot_trials.len(),
            if report.tight { report.undershoot_trials.len() } else { 0 }
        ),
    ))
}
